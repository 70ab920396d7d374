//! Generalized power series on the lattice of exponents `shift + 2a + bσ`,
//! with coefficients that are polynomials in `ln z`.
//!
//! The small-z expansion of v, its integral f, and u = e^f all live in this
//! form. Keying terms by (a, b) rather than by the real exponent keeps
//! products and exponentials exact when exponents coincide.

use std::collections::BTreeMap;

use num_complex::Complex64;

/// Polynomial in L = ln z, lowest degree first.
pub type LogPoly = Vec<f64>;

#[derive(Debug, Clone)]
pub struct LogSeries {
    pub sigma: f64,
    pub shift: f64,
    /// Exponent cap relative to `shift`; terms beyond it are dropped.
    pub p_max: f64,
    pub terms: BTreeMap<(u32, u32), LogPoly>,
}

fn horner(poly: &[f64], l: f64) -> f64 {
    poly.iter().rev().fold(0.0, |acc, c| acc * l + c)
}

fn poly_add_into(dst: &mut LogPoly, src: &[f64], k: f64) {
    if dst.len() < src.len() {
        dst.resize(src.len(), 0.0);
    }
    for (d, s) in dst.iter_mut().zip(src) {
        *d += k * s;
    }
}

fn poly_mul(a: &[f64], b: &[f64]) -> LogPoly {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_deriv(a: &[f64]) -> LogPoly {
    if a.len() <= 1 {
        return vec![0.0];
    }
    a.iter().enumerate().skip(1).map(|(j, c)| j as f64 * c).collect()
}

/// (p + D) P, with D = d/dL.
pub fn theta_shift(p: f64, poly: &[f64]) -> LogPoly {
    let mut out: LogPoly = poly.iter().map(|c| p * c).collect();
    poly_add_into(&mut out, &poly_deriv(poly), 1.0);
    out
}

/// Solves (p + D) Q = P for polynomial Q; p ≠ 0.
pub fn theta_shift_inv(p: f64, poly: &[f64]) -> LogPoly {
    let n = poly.len();
    let mut q = vec![0.0; n];
    // top-down: p q_j + (j+1) q_{j+1} = P_j
    for j in (0..n).rev() {
        let next = if j + 1 < n { (j + 1) as f64 * q[j + 1] } else { 0.0 };
        q[j] = (poly[j] - next) / p;
    }
    q
}

fn theta_shift_inv_complex(q: Complex64, poly: &[f64]) -> Vec<Complex64> {
    let n = poly.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for j in (0..n).rev() {
        let next = if j + 1 < n { out[j + 1] * (j + 1) as f64 } else { Complex64::new(0.0, 0.0) };
        out[j] = (Complex64::new(poly[j], 0.0) - next) / q;
    }
    out
}

impl LogSeries {
    pub fn new(sigma: f64, shift: f64, p_max: f64) -> Self {
        LogSeries { sigma, shift, p_max, terms: BTreeMap::new() }
    }

    /// Exponent of key (a, b), excluding the shift.
    pub fn lattice_exponent(&self, key: (u32, u32)) -> f64 {
        2.0 * key.0 as f64 + key.1 as f64 * self.sigma
    }

    pub fn exponent(&self, key: (u32, u32)) -> f64 {
        self.shift + self.lattice_exponent(key)
    }

    pub fn add_term(&mut self, key: (u32, u32), poly: &[f64]) {
        if self.lattice_exponent(key) > self.p_max + 1e-12 {
            return;
        }
        let e = self.terms.entry(key).or_default();
        poly_add_into(e, poly, 1.0);
    }

    pub fn coeff(&self, key: (u32, u32)) -> Option<&LogPoly> {
        self.terms.get(&key)
    }

    pub fn eval(&self, z: f64) -> f64 {
        let l = z.ln();
        let mut acc = 0.0;
        for (&k, poly) in &self.terms {
            let p = self.exponent(k);
            acc += z.powf(p) * horner(poly, l);
        }
        acc
    }

    /// Sum of |terms| at z; a scale for rounding-error estimates.
    pub fn eval_abs(&self, z: f64) -> f64 {
        let l = z.ln();
        self.terms.iter().map(|(&k, poly)| (z.powf(self.exponent(k)) * horner(poly, l)).abs()).sum()
    }

    /// Magnitude at z of the terms with lattice exponent above `p_cut`.
    pub fn tail_abs(&self, z: f64, p_cut: f64) -> f64 {
        let l = z.ln();
        self.terms
            .iter()
            .filter(|(&k, _)| self.lattice_exponent(k) > p_cut)
            .map(|(&k, poly)| (z.powf(self.exponent(k)) * horner(poly, l)).abs())
            .sum()
    }

    /// d/dz.
    pub fn derivative(&self) -> LogSeries {
        let mut out = LogSeries::new(self.sigma, self.shift - 1.0, self.p_max);
        for (&k, poly) in &self.terms {
            let d = theta_shift(self.exponent(k), poly);
            if d.iter().any(|c| *c != 0.0) {
                out.terms.insert(k, d);
            }
        }
        out
    }

    /// ∫₀^z F(x) dx / x. Every exponent must be positive.
    pub fn integral_over_x(&self) -> LogSeries {
        let mut out = LogSeries::new(self.sigma, self.shift, self.p_max);
        for (&k, poly) in &self.terms {
            let p = self.exponent(k);
            assert!(p > 0.0, "integral_over_x needs positive exponents (got {p})");
            out.terms.insert(k, theta_shift_inv(p, poly));
        }
        out
    }

    pub fn scale(&self, c: f64) -> LogSeries {
        let mut out = self.clone();
        for poly in out.terms.values_mut() {
            for x in poly.iter_mut() {
                *x *= c;
            }
        }
        out
    }

    /// The series of F(c z), c > 0.
    pub fn rescale(&self, c: f64) -> LogSeries {
        let lc = c.ln();
        let mut out = LogSeries::new(self.sigma, self.shift, self.p_max);
        for (&k, poly) in &self.terms {
            let f = c.powf(self.exponent(k));
            // P(L + ln c) by binomial expansion
            let n = poly.len();
            let mut q = vec![0.0; n];
            for (j, pj) in poly.iter().enumerate() {
                let mut binom = 1.0;
                for i in 0..=j {
                    // coefficient of L^i in (L + lc)^j is C(j, i) lc^{j−i}
                    q[i] += pj * binom * lc.powi((j - i) as i32);
                    binom = binom * (j - i) as f64 / (i + 1) as f64;
                }
            }
            out.terms.insert(k, q.into_iter().map(|x| x * f).collect());
        }
        out
    }

    pub fn mul(&self, other: &LogSeries) -> LogSeries {
        let p_max = self.p_max.min(other.p_max);
        let mut out = LogSeries::new(self.sigma, self.shift + other.shift, p_max);
        for (&ka, pa) in &self.terms {
            for (&kb, pb) in &other.terms {
                let key = (ka.0 + kb.0, ka.1 + kb.1);
                out.add_term(key, &poly_mul(pa, pb));
            }
        }
        out
    }

    /// exp of a series with zero shift and no constant (0, 0) term.
    pub fn exp(&self) -> LogSeries {
        assert!(self.shift == 0.0 && !self.terms.contains_key(&(0, 0)));
        // θg, where θ = z d/dz
        let tg: Vec<((u32, u32), LogPoly)> =
            self.terms.iter().map(|(&k, p)| (k, theta_shift(self.exponent(k), p))).collect();
        let mut keys: Vec<(u32, u32)> = Vec::new();
        let b_max = if self.sigma > 0.0 { (self.p_max / self.sigma).floor() as u32 } else { 0 };
        let has_b = self.terms.keys().any(|k| k.1 > 0);
        let a_max = (self.p_max / 2.0).floor() as u32;
        for a in 0..=a_max {
            for b in 0..=(if has_b { b_max } else { 0 }) {
                if self.lattice_exponent((a, b)) <= self.p_max + 1e-12 {
                    keys.push((a, b));
                }
            }
        }
        keys.sort_by_key(|k| (k.0 + k.1, k.0));
        let mut out = LogSeries::new(self.sigma, 0.0, self.p_max);
        out.terms.insert((0, 0), vec![1.0]);
        // (p_k + D) E_k = Σ_{j + l = k} (θg)_j E_l
        for &k in keys.iter().skip(1) {
            let mut rhs: LogPoly = vec![0.0];
            for (j, tgj) in &tg {
                if j.0 > k.0 || j.1 > k.1 {
                    continue;
                }
                let l = (k.0 - j.0, k.1 - j.1);
                if let Some(el) = out.terms.get(&l) {
                    poly_add_into(&mut rhs, &poly_mul(tgj, el), 1.0);
                }
            }
            if rhs.iter().all(|c| *c == 0.0) {
                continue;
            }
            let p = self.lattice_exponent(k);
            out.terms.insert(k, theta_shift_inv(p, &rhs));
        }
        out
    }

    /// ∫₀^{t1} F(x) x^{−w} dx for complex w, term by term. Every term needs
    /// Re(exponent − w) > −1.
    pub fn integrate_against_power(&self, w: Complex64, t1: f64) -> Complex64 {
        let l1 = t1.ln();
        let mut acc = Complex64::new(0.0, 0.0);
        for (&k, poly) in &self.terms {
            let q = Complex64::new(self.exponent(k) + 1.0, 0.0) - w;
            let qp = theta_shift_inv_complex(q, poly);
            let mut h = Complex64::new(0.0, 0.0);
            for c in qp.iter().rev() {
                h = h * l1 + c;
            }
            acc += (q * l1).exp() * h;
        }
        acc
    }

    /// Terms whose lattice exponent is an even integer 2a with b = 0, and
    /// no log dependence; this is the Taylor part at z = 0.
    pub fn taylor_part(&self, order: usize) -> Vec<f64> {
        let mut c = vec![0.0; order + 1];
        for (&k, poly) in &self.terms {
            if k.1 == 0 && self.shift == 0.0 && (2 * k.0 as usize) <= order {
                c[2 * k.0 as usize] += poly[0];
            }
        }
        c
    }
}
