//! Subcommand arguments and their implementations. Every command returns a
//! [`Table`]; column orders are fixed and listed in the README.

use std::fmt;
use std::io::Write;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use painleve_core::acceptance;
use painleve_core::charfn::{build_charfn, CharFnTable};
use painleve_core::density::density_eval;
use painleve_core::error::check_s;
use painleve_core::finite_n::{f_finite_n, op_hankel, v_finite_n, FiniteNMethod};
use painleve_core::moments::{
    arithmetic_factor, divergence_probe, f_derivative_branch, f_integral_branch, f_kernel_eps, f_moment, MomentResult,
};
use painleve_core::painleve::{v_bessel_tau, v_exact_zero, OdeSolution, Painleve, PainleveJet};

use crate::config::Settings;
use crate::output::{Cell, Table};

/// Invalid command-line input that the library never sees.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn grid(a: f64, b: f64, points: usize, log: bool) -> Result<Vec<f64>> {
    if points == 0 || !(a <= b) {
        return Err(usage(format!("empty grid [{a}, {b}] with {points} points")));
    }
    if points == 1 {
        return Ok(vec![a]);
    }
    if log && !(a > 0.0) {
        return Err(usage("a logarithmic grid needs a positive lower end"));
    }
    let t = |k: usize| k as f64 / (points - 1) as f64;
    Ok((0..points).map(|k| if log { a * (b / a).powf(t(k)) } else { a + (b - a) * t(k) }).collect())
}

fn table_for(s: f64, settings: &Settings) -> Result<CharFnTable> {
    Ok(build_charfn(s, settings.charfn_t_max, settings.charfn_order)?)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VRoute {
    Auto,
    Ode,
    Bessel,
    Exact,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct VArgs {
    #[arg(long)]
    pub s: f64,
    #[arg(long, default_value_t = 0.1)]
    pub z_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub z_max: f64,
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// Space the grid logarithmically.
    #[arg(long)]
    pub log: bool,
    #[arg(long, value_enum, default_value_t = VRoute::Auto)]
    pub route: VRoute,
}

/// Columns: z, v, dv, d2v, residual, route.
pub fn cmd_v(a: &VArgs) -> Result<Table> {
    check_s(a.s)?;
    let zs = grid(a.z_min, a.z_max, a.points, a.log)?;
    let jets: Vec<PainleveJet> = match a.route {
        VRoute::Auto => {
            let p = Painleve::new(a.s, a.z_max)?;
            zs.par_iter().map(|&z| p.jet(z, 2)).collect::<Result<_, _>>()?
        }
        VRoute::Ode => {
            let sol = OdeSolution::for_s(a.s, a.z_max)?;
            zs.iter().map(|&z| sol.jet(z, 2)).collect::<Result<_, _>>()?
        }
        VRoute::Bessel => {
            if !(a.s >= 1.0 && a.s.fract() == 0.0) {
                return Err(usage("the Bessel route needs a positive integer s"));
            }
            zs.par_iter().map(|&z| v_bessel_tau(z, a.s as usize, 2)).collect::<Result<_, _>>()?
        }
        VRoute::Exact => {
            if a.s != 0.0 {
                return Err(usage("the exact route needs s = 0"));
            }
            zs.iter().map(|&z| v_exact_zero(z, 2)).collect::<Result<_, _>>()?
        }
    };
    let mut t = Table::new("v", &["z", "v", "dv", "d2v", "residual", "route"]);
    for j in jets {
        t.push(vec![j.z.into(), j.v.into(), j.dv[0].into(), j.dv[1].into(), j.residual.into(), j.route.name().into()]);
    }
    Ok(t)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchChoice {
    Auto,
    Derivative,
    Integral,
    KernelEps,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct MomentArgs {
    #[arg(long)]
    pub s: f64,
    #[arg(long)]
    pub h_re: f64,
    #[arg(long, default_value_t = 0.0)]
    pub h_im: f64,
    #[arg(long, value_enum, default_value_t = BranchChoice::Auto)]
    pub branch: BranchChoice,
    /// Also report the arithmetic factor a_s and the product a_s·F(s, h).
    #[arg(long)]
    pub arithmetic: bool,
}

const MOMENT_COLUMNS: [&str; 10] = ["s", "h_re", "h_im", "value_re", "value_im", "quad_error", "prefactor", "branch", "m", "formal"];

fn moment_row(s: f64, h: Complex64, r: &MomentResult) -> Vec<Cell> {
    vec![
        s.into(),
        h.re.into(),
        h.im.into(),
        r.value.re.into(),
        r.value.im.into(),
        r.quad_error.into(),
        r.prefactor.into(),
        r.branch.name().into(),
        r.m.map(Cell::Num).unwrap_or(Cell::Text(String::new())),
        r.formal.into(),
    ]
}

/// Columns: s, h_re, h_im, value_re, value_im, quad_error, prefactor, branch, m, formal.
pub fn cmd_moment(a: &MomentArgs, settings: &Settings) -> Result<Table> {
    check_s(a.s)?;
    let h = Complex64::new(a.h_re, a.h_im);
    let table = table_for(a.s, settings)?;
    let r = match a.branch {
        BranchChoice::Auto => f_moment(h, &table)?,
        BranchChoice::Derivative => {
            if h.im != 0.0 || h.re < 0.0 || h.re.fract() != 0.0 {
                return Err(usage("the derivative branch needs a nonnegative integer h"));
            }
            f_derivative_branch(h.re as u32, &table)?
        }
        BranchChoice::Integral => f_integral_branch(h, &table)?,
        BranchChoice::KernelEps => f_kernel_eps(h, &table)?,
    };
    let mut t = Table::new("moment", &MOMENT_COLUMNS);
    t.push(moment_row(a.s, h, &r));
    if a.arithmetic {
        let af = arithmetic_factor(a.s, settings.prime_cutoff, true, settings.arith_tol)?;
        t.meta.insert("arithmetic_factor".into(), json!(af.value));
        t.meta.insert("arithmetic_factor_error".into(), json!(af.tail_bound));
        t.meta.insert("primes_used".into(), json!(af.primes_used));
        t.meta.insert("leading_coefficient_re".into(), json!(af.value * r.value.re));
    }
    Ok(t)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct DensityArgs {
    #[arg(long)]
    pub s: f64,
    #[arg(long, default_value_t = -10.0)]
    pub x_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
}

/// Columns: x, rho.
pub fn cmd_density(a: &DensityArgs, settings: &Settings) -> Result<Table> {
    check_s(a.s)?;
    let xs = grid(a.x_min, a.x_max, a.points, false)?;
    let g = density_eval(&xs, &table_for(a.s, settings)?)?;
    let mut t = Table::new("density", &["x", "rho"]);
    for (x, r) in g.x_grid.iter().zip(&g.rho) {
        t.push(vec![(*x).into(), (*r).into()]);
    }
    t.meta.insert("mass_defect".into(), json!(g.mass_defect));
    t.meta.insert("min_value".into(), json!(g.min_value));
    Ok(t)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FiniteNWhat {
    Moment,
    V,
    Hankel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Characteristic,
    Weyl,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct FiniteNArgs {
    /// Matrix size N.
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub s: f64,
    #[arg(long, value_enum, default_value_t = FiniteNWhat::Moment)]
    pub what: FiniteNWhat,
    #[arg(long, default_value_t = 0.0)]
    pub h_re: f64,
    #[arg(long, default_value_t = 0.0)]
    pub h_im: f64,
    #[arg(long, value_enum, default_value_t = MethodChoice::Characteristic)]
    pub method: MethodChoice,
    /// Grid for `--what v` (in z) or `--what hankel` (in ξ).
    #[arg(long, default_value_t = 0.1)]
    pub x_min: f64,
    #[arg(long, default_value_t = 5.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
}

/// Columns: moment → as `moment` plus n; v → z, v_n; hankel → xi, ln_w, u_n.
pub fn cmd_finite_n(a: &FiniteNArgs) -> Result<Table> {
    check_s(a.s)?;
    match a.what {
        FiniteNWhat::Moment => {
            let h = Complex64::new(a.h_re, a.h_im);
            let method = match a.method {
                MethodChoice::Characteristic => FiniteNMethod::Characteristic,
                MethodChoice::Weyl => FiniteNMethod::Weyl,
            };
            let r = f_finite_n(a.n, a.s, h, method)?;
            let mut cols = vec!["n"];
            cols.extend(MOMENT_COLUMNS);
            let mut t = Table::new("finite-n", &cols);
            let mut row = vec![Cell::from(a.n)];
            row.extend(moment_row(a.s, h, &r));
            t.push(row);
            Ok(t)
        }
        FiniteNWhat::V => {
            let zs = grid(a.x_min, a.x_max, a.points, false)?;
            let vs: Vec<f64> = zs.par_iter().map(|&z| v_finite_n(z, a.n, a.s)).collect::<Result<_, _>>()?;
            let mut t = Table::new("finite-n", &["z", "v_n"]);
            for (z, v) in zs.iter().zip(vs) {
                t.push(vec![(*z).into(), v.into()]);
            }
            Ok(t)
        }
        FiniteNWhat::Hankel => {
            let xs = grid(a.x_min, a.x_max, a.points, false)?;
            let rows: Vec<(f64, f64)> = xs.par_iter().map(|&x| op_hankel(a.n, x, a.s)).collect::<Result<_, _>>()?;
            let mut t = Table::new("finite-n", &["xi", "ln_w", "u_n"]);
            for (x, (lw, u)) in xs.iter().zip(rows) {
                t.push(vec![(*x).into(), lw.into(), u.into()]);
            }
            Ok(t)
        }
    }
}

// ---------------------------------------------------------------------------

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| usage(format!("bad {what} entry {p:?}"))))
        .collect()
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct ConvergenceArgs {
    #[arg(long)]
    pub s: f64,
    #[arg(long)]
    pub z: f64,
    /// Comma-separated matrix sizes.
    #[arg(long, default_value = "10,20,40")]
    pub n: String,
}

/// Columns: n, v_n, v, error, ratio (error of the previous row over this one).
pub fn cmd_convergence(a: &ConvergenceArgs) -> Result<Table> {
    check_s(a.s)?;
    let ns: Vec<usize> = parse_list(&a.n, "N")?;
    let v = OdeSolution::for_s(a.s, a.z.max(2.0))?.value(a.z);
    let vn: Vec<f64> = ns.par_iter().map(|&n| v_finite_n(a.z, n, a.s)).collect::<Result<_, _>>()?;
    let mut t = Table::new("convergence", &["n", "v_n", "v", "error", "ratio"]);
    let mut prev: Option<f64> = None;
    for (n, x) in ns.iter().zip(vn) {
        let err = (x - v).abs();
        let ratio = prev.map(|p| Cell::Num(p / err)).unwrap_or(Cell::Text(String::new()));
        t.push(vec![(*n).into(), x.into(), v.into(), err.into(), ratio]);
        prev = Some(err);
    }
    Ok(t)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Args, Serialize)]
pub struct ProbeArgs {
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    /// Comma-separated h values in (m, m + 1/2).
    #[arg(long, default_value = "1.4,1.45,1.49")]
    pub h: String,
}

/// Columns: h, f.
pub fn cmd_probe_rule(a: &ProbeArgs, settings: &Settings) -> Result<Table> {
    let hs: Vec<f64> = parse_list(&a.h, "h")?;
    let p = divergence_probe(a.m, &hs, &table_for(a.m as f64, settings)?)?;
    let mut t = Table::new("probe-rule", &["h", "f"]);
    for (h, f) in &p.rows {
        t.push(vec![(*h).into(), (*f).into()]);
    }
    t.meta.insert("growth_exponent".into(), json!(p.growth_exponent));
    Ok(t)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Args, Serialize)]
pub struct AcceptArgs {
    /// Comma-separated criterion numbers (default: all).
    #[arg(long)]
    pub only: Option<String>,
}

/// Prints a PASS/FAIL line per criterion as it finishes (when `print` is
/// set) and returns the table with whether every criterion passed.
/// Columns: id, title, passed, detail, seconds.
pub fn cmd_accept(a: &AcceptArgs, out: &mut dyn Write, print: bool) -> Result<(Table, bool)> {
    let ids: Vec<usize> = match &a.only {
        Some(list) => parse_list(list, "criterion")?,
        None => (1..=acceptance::CRITERIA).collect(),
    };
    if let Some(bad) = ids.iter().find(|&&i| i == 0 || i > acceptance::CRITERIA) {
        bail!(usage(format!("no criterion {bad}")));
    }
    let mut t = Table::new("accept", &["id", "title", "passed", "detail", "seconds"]);
    let mut all = true;
    for id in ids {
        let o = acceptance::run(id);
        if print {
            writeln!(out, "{}", o.line())?;
            out.flush()?;
        }
        all &= o.passed;
        t.push(vec![o.id.into(), o.title.into(), o.passed.into(), o.detail.as_str().into(), o.seconds.into()]);
    }
    Ok((t, all))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(grid(1.0, 1.0, 1, false).unwrap(), vec![1.0]);
        let g = grid(0.1, 10.0, 3, true).unwrap();
        assert!((g[1] - 1.0).abs() < 1e-15);
        assert!(grid(0.0, 1.0, 3, true).is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list::<usize>("10, 20,40", "N").unwrap(), vec![10, 20, 40]);
        assert!(parse_list::<usize>("10,x", "N").is_err());
    }
}
