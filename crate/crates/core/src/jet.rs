//! Truncated Taylor series ("jets") in one variable δ, and determinants of
//! matrices whose entries are jets.

use std::ops::{Add, Mul, Neg, Sub};

/// c[0] + c[1] δ + … + c[n−1] δ^{n−1}.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub c: Vec<f64>,
}

impl Jet {
    pub fn zero(len: usize) -> Self {
        Jet { c: vec![0.0; len] }
    }

    pub fn constant(x: f64, len: usize) -> Self {
        let mut c = vec![0.0; len];
        c[0] = x;
        Jet { c }
    }

    /// The jet of the identity map δ ↦ x + δ.
    pub fn variable(x: f64, len: usize) -> Self {
        let mut c = vec![0.0; len];
        c[0] = x;
        if len > 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn scale(&self, k: f64) -> Jet {
        Jet { c: self.c.iter().map(|x| x * k).collect() }
    }

    pub fn recip(&self) -> Jet {
        let n = self.len();
        let mut r = vec![0.0; n];
        r[0] = 1.0 / self.c[0];
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += self.c[j] * r[k - j];
            }
            r[k] = -acc * r[0];
        }
        Jet { c: r }
    }

    pub fn div(&self, other: &Jet) -> Jet {
        self * &other.recip()
    }

    /// ln of the jet; requires c[0] > 0.
    pub fn ln(&self) -> Jet {
        let n = self.len();
        let mut l = vec![0.0; n];
        l[0] = self.c[0].ln();
        // a·l' = a'
        for k in 1..n {
            let mut acc = k as f64 * self.c[k];
            for j in 1..k {
                acc -= j as f64 * l[j] * self.c[k - j];
            }
            l[k] = acc / (k as f64 * self.c[0]);
        }
        Jet { c: l }
    }

    pub fn exp(&self) -> Jet {
        let n = self.len();
        let mut e = vec![0.0; n];
        e[0] = self.c[0].exp();
        // e' = a' e
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * self.c[j] * e[k - j];
            }
            e[k] = acc / k as f64;
        }
        Jet { c: e }
    }

    /// Derivatives f^{(j)} = j! c[j].
    pub fn derivatives(&self) -> Vec<f64> {
        let mut f = 1.0;
        self.c
            .iter()
            .enumerate()
            .map(|(j, x)| {
                if j > 0 {
                    f *= j as f64;
                }
                x * f
            })
            .collect()
    }

    pub fn from_derivatives(d: &[f64]) -> Jet {
        let mut f = 1.0;
        Jet {
            c: d
                .iter()
                .enumerate()
                .map(|(j, x)| {
                    if j > 0 {
                        f *= j as f64;
                    }
                    x / f
                })
                .collect(),
        }
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        Jet { c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        Jet { c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        let n = self.len().min(o.len());
        let mut c = vec![0.0; n];
        for i in 0..n {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..n - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Jet { c }
    }
}

/// ln |det M| and sign(det M) as jets, by Gaussian elimination with partial
/// pivoting on the constant terms. Returns the log-jet and the sign of the
/// constant term of the determinant.
pub fn log_det(mut m: Vec<Vec<Jet>>) -> (Jet, f64) {
    let n = m.len();
    let len = m[0][0].len();
    let mut sign = 1.0;
    let mut log = Jet::zero(len);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| m[a][col].c[0].abs().total_cmp(&m[b][col].c[0].abs()))
            .expect("non-empty");
        if piv != col {
            m.swap(piv, col);
            sign = -sign;
        }
        let p = m[col][col].clone();
        if p.c[0] < 0.0 {
            sign = -sign;
        }
        log = &log + &p.scale(p.c[0].signum()).ln();
        let pinv = p.recip();
        for r in col + 1..n {
            let factor = &m[r][col] * &pinv;
            for k in col..n {
                let t = &factor * &m[col][k];
                m[r][k] = &m[r][k] - &t;
            }
        }
    }
    (log, sign)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_ln_roundtrip() {
        let a = Jet { c: vec![2.0, 0.3, -0.7, 1.1, 0.05] };
        let b = a.ln().exp();
        for (x, y) in a.c.iter().zip(&b.c) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn recip_of_one_minus_delta() {
        let a = Jet { c: vec![1.0, -1.0, 0.0, 0.0] };
        assert_eq!(a.recip().c, vec![1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn log_det_matches_closed_form() {
        // det [[x, 1], [1, x]] = x² − 1 at x = 3 + δ
        let x = Jet::variable(3.0, 4);
        let one = Jet::constant(1.0, 4);
        let (l, s) = log_det(vec![vec![x.clone(), one.clone()], vec![one, x]]);
        assert_eq!(s, 1.0);
        // ln(x²−1) derivatives at 3: ln 8, 6/8, (2·8 − 36)/64
        assert!((l.c[0] - 8f64.ln()).abs() < 1e-15);
        assert!((l.c[1] - 0.75).abs() < 1e-15);
        assert!((l.c[2] * 2.0 - (16.0 - 36.0) / 64.0).abs() < 1e-15);
    }

    #[test]
    fn derivatives_roundtrip() {
        let d = [1.0, 2.0, 6.0, 24.0];
        let j = Jet::from_derivatives(&d);
        assert_eq!(j.c, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(j.derivatives(), d.to_vec());
    }
}
