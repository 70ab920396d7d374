//! `key = value` configuration files that override numerical settings.
//! Blank lines and lines starting with `#` are ignored.

use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    /// Lower bound on the range of the characteristic-function table.
    pub charfn_t_max: f64,
    /// Derivative order carried by the characteristic-function table.
    pub charfn_order: usize,
    /// Prime cutoff for the arithmetic factor.
    pub prime_cutoff: usize,
    /// Target accuracy for the arithmetic factor.
    pub arith_tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { charfn_t_max: 50.0, charfn_order: 4, prime_cutoff: 10_000, arith_tol: 1e-8 }
    }
}

impl Settings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {}: expected key = value", lineno + 1);
            };
            let (key, value) = (key.trim(), value.trim());
            let bad = || format!("config line {}: bad value {value:?} for {key}", lineno + 1);
            match key {
                "charfn_t_max" => s.charfn_t_max = value.parse().with_context(bad)?,
                "charfn_order" => s.charfn_order = value.parse().with_context(bad)?,
                "prime_cutoff" => s.prime_cutoff = value.parse().with_context(bad)?,
                "arith_tol" => s.arith_tol = value.parse().with_context(bad)?,
                _ => bail!("config line {}: unknown key {key:?}", lineno + 1),
            }
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_overrides() {
        let s = Settings::parse("# tolerances\nprime_cutoff = 1000\n\narith_tol=1e-6\n").unwrap();
        assert_eq!(s.prime_cutoff, 1000);
        assert_eq!(s.arith_tol, 1e-6);
        assert_eq!(s.charfn_order, 4);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(Settings::parse("speed = 11").is_err());
        assert!(Settings::parse("prime_cutoff").is_err());
    }
}
