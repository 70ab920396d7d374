//! Finite-N quantities for the weight ω(y; ξ, s) = (y+ξ)^s y^s e^{−y}:
//! the Hankel determinant W_N(ξ, s) = N! det[∫ y^{j+k} ω dy], its
//! log-derivative u_N = ξ ∂_ξ ln W_N, the confluent Hankel determinant
//! 𝒥_N(t; s) = det[U(1−s−N, 2−2s−2N+j+k, 2t)] and the joint moments
//! F_N(s, h).
//!
//! Two routes to W_N are kept. The moment route assembles the Hankel matrix
//! from confluent U values and is limited by its conditioning. The
//! orthogonal-polynomial route discretizes ω on graded Gauss panels and runs
//! the Stieltjes procedure, which stays accurate for N in the tens; its
//! ξ-jets come from log det(I + Σ δ^m G_m) in the orthonormal basis.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{check_s, domain, Error, Result};
use crate::jet::{log_det, Jet};
use crate::moments::{f_moment, prefactor, Branch, CharData, MomentResult};
use crate::quad::{gauss_legendre, graded_breaks, tanh_sinh};
use crate::specfun::{hyp_u_any_a, laguerre, ln_hyp_u, lngamma};

/// Largest N for moment computations through the characteristic data.
pub const N_MAX_MOMENTS: usize = 12;
/// Largest N for the determinant routes.
pub const N_MAX: usize = 64;
/// ln φ_N below which the characteristic data is treated as zero.
const F_END: f64 = -40.0;

fn check_n(n: usize, max: usize) -> Result<()> {
    if n == 0 || n > max {
        return Err(domain("finite_n", format!("N = {n} must lie in 1..={max}")));
    }
    Ok(())
}

/// Generalized binomial coefficient C(s, m).
fn binom(s: f64, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, k| acc * (s - k as f64) / (k + 1) as f64)
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

// ---------------------------------------------------------------------------
// moment route

/// ln ∫₀^∞ y^n ω(y; ξ, s) dy = ln[ξ^{n+2s+1} Γ(n+s+1) U(n+s+1, n+2s+2, ξ)].
fn ln_moment(n: usize, xi: f64, s: f64) -> Result<f64> {
    let a = n as f64 + s + 1.0;
    Ok((a + s) * xi.ln() + lngamma(a)? + ln_hyp_u(a, a + s + 1.0, xi)?)
}

/// ln |∂_ξ ∫ y^n ω dy| = ln |s ξ^{n+2s} Γ(n+s+1) U(n+s+1, n+2s+1, ξ)|.
fn ln_moment_deriv(n: usize, xi: f64, s: f64) -> Result<f64> {
    let a = n as f64 + s + 1.0;
    Ok(s.abs().ln() + (a + s - 1.0) * xi.ln() + lngamma(a)? + ln_hyp_u(a, a + s, xi)?)
}

/// ∫₀^∞ y^{j+k} (y+ξ)^s y^s e^{−y} dy.
pub fn moment_entry(j: usize, k: usize, xi: f64, s: f64) -> Result<f64> {
    check_s(s)?;
    if !(xi > 0.0) {
        return Err(domain("moment_entry", format!("ξ = {xi} must be positive")));
    }
    Ok(ln_moment(j + k, xi, s)?.exp())
}

#[derive(Debug, Clone)]
pub struct HankelJob {
    pub n: usize,
    pub s: f64,
    pub xi: f64,
    pub moment_matrix: DMatrix<f64>,
    /// ln W_N(ξ, s).
    pub logdet: f64,
    /// u_N(ξ; s) = ξ ∂_ξ ln W_N.
    pub logderiv: f64,
    /// 2-norm condition number of the diagonally equilibrated matrix.
    pub cond_estimate: f64,
}

/// W_N(ξ, s) from the moment Hankel matrix, with u_N by Jacobi's formula.
pub fn w_hankel(n: usize, xi: f64, s: f64) -> Result<HankelJob> {
    check_s(s)?;
    check_n(n, N_MAX)?;
    if !(xi > 0.0) {
        return Err(domain("w_hankel", format!("ξ = {xi} must be positive")));
    }
    let lm: Vec<f64> = (0..2 * n - 1).map(|k| ln_moment(k, xi, s)).collect::<Result<_>>()?;
    let scale: Vec<f64> = (0..n).map(|j| 0.5 * lm[2 * j]).collect();
    let a = DMatrix::from_fn(n, n, |j, k| (lm[j + k] - scale[j] - scale[k]).exp());
    let moment_matrix = DMatrix::from_fn(n, n, |j, k| lm[j + k].exp());

    let sv = a.clone().svd(false, false).singular_values;
    let cond = sv.max() / sv.min();
    if cond > 1e10 {
        log::warn!("moment Hankel at N = {n}, ξ = {xi}, s = {s} has condition {cond:.2e}");
    }
    let estimate = cond * f64::EPSILON * n as f64;
    if !(estimate <= 1e-6) {
        return Err(Error::Conditioning { what: "moment Hankel determinant", estimate });
    }
    let lu = a.clone().full_piv_lu();
    let det = lu.determinant();
    if !(det > 0.0) {
        return Err(Error::Conditioning { what: "moment Hankel determinant", estimate: 1.0 });
    }
    let logdet = ln_factorial(n) + det.ln() + 2.0 * scale.iter().sum::<f64>();

    let logderiv = if s == 0.0 {
        0.0
    } else {
        let ld: Vec<f64> = (0..2 * n - 1).map(|k| ln_moment_deriv(k, xi, s)).collect::<Result<_>>()?;
        let sign = s.signum();
        let da = DMatrix::from_fn(n, n, |j, k| sign * (ld[j + k] - scale[j] - scale[k]).exp());
        let inv = lu.try_inverse().ok_or(Error::Conditioning { what: "moment Hankel inverse", estimate: 1.0 })?;
        xi * (inv * da).trace()
    };
    Ok(HankelJob { n, s, xi, moment_matrix, logdet, logderiv, cond_estimate: cond })
}

// ---------------------------------------------------------------------------
// orthogonal-polynomial route

/// Nodes y_i and weights w_i·ω(y_i) of a composite Gauss rule for ω.
struct WeightRule {
    y: Vec<f64>,
    w: Vec<f64>,
}

fn weight_rule(xi: f64, s: f64, n: usize) -> WeightRule {
    let rule = gauss_legendre(16);
    // geometric panels resolve y^s near 0 and (y+ξ)^s near −ξ
    let y_lo = if xi > 0.0 { 1e-30 * xi.min(1.0) } else { 1e-30 };
    let mut breaks = vec![0.0, y_lo];
    let mut a = y_lo;
    while a < 1.0 {
        a = (4.0 * a).min(1.0);
        breaks.push(a);
    }
    let y_max = 4.0 * n as f64 + 4.0 * s.max(0.0) + 80.0;
    while a < y_max {
        a = (a + a.min(4.0)).min(y_max);
        breaks.push(a);
    }
    let mut y = Vec::with_capacity(16 * breaks.len());
    let mut w = Vec::with_capacity(16 * breaks.len());
    for p in breaks.windows(2) {
        for (x, wt) in rule.mapped(p[0], p[1]) {
            let lw = s * x.ln() + if s == 0.0 { 0.0 } else { s * (x + xi).ln() } - x;
            y.push(x);
            w.push(wt * lw.exp());
        }
    }
    WeightRule { y, w }
}

/// Orthonormal polynomials q_0..q_{N−1} at the nodes of `rule`, and ln W_N.
struct OpBasis {
    q: Vec<Vec<f64>>,
    ln_w: f64,
}

fn op_basis(rule: &WeightRule, n: usize) -> Result<OpBasis> {
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).zip(&rule.w).map(|((x, y), w)| x * y * w).sum() };
    let m0: f64 = rule.w.iter().sum();
    let mut ln_h = m0.ln();
    let mut ln_w = ln_factorial(n) + ln_h;
    let mut q: Vec<Vec<f64>> = vec![vec![1.0 / m0.sqrt(); rule.y.len()]];
    let mut b_prev = 0.0;
    for j in 0..n - 1 {
        let mut r: Vec<f64> = rule.y.iter().zip(&q[j]).map(|(y, v)| y * v).collect();
        if j > 0 {
            for (ri, p) in r.iter_mut().zip(&q[j - 1]) {
                *ri -= b_prev * p;
            }
        }
        // two passes of Gram–Schmidt against the whole basis
        for _ in 0..2 {
            for qk in &q {
                let c = dot(&r, qk);
                for (ri, p) in r.iter_mut().zip(qk) {
                    *ri -= c * p;
                }
            }
        }
        let b = dot(&r, &r).sqrt();
        if !(b > 0.0) {
            return Err(Error::Conditioning { what: "Stieltjes recurrence", estimate: 1.0 });
        }
        for ri in r.iter_mut() {
            *ri /= b;
        }
        ln_h += 2.0 * b.ln();
        ln_w += ln_h;
        b_prev = b;
        q.push(r);
    }
    Ok(OpBasis { q, ln_w })
}

/// Taylor jet of ln W_N(ξ + δ, s) in δ, of length `order + 1`.
fn ln_w_jet(xi: f64, s: f64, n: usize, order: usize) -> Result<Jet> {
    let rule = weight_rule(xi, s, n);
    let basis = op_basis(&rule, n)?;
    let mut out = Jet::constant(basis.ln_w, order + 1);
    if order == 0 || s == 0.0 {
        return Ok(out);
    }
    // node factors w_i C(s,m) (y_i+ξ)^{−m}
    let factors: Vec<Vec<f64>> = (1..=order)
        .map(|m| {
            let c = binom(s, m);
            rule.y.iter().zip(&rule.w).map(|(y, w)| w * c * (y + xi).powi(-(m as i32))).collect()
        })
        .collect();
    let mut mat = vec![vec![Jet::zero(order + 1); n]; n];
    for j in 0..n {
        for k in j..n {
            let mut c = vec![if j == k { 1.0 } else { 0.0 }; 1];
            for f in &factors {
                c.push(basis.q[j].iter().zip(&basis.q[k]).zip(f).map(|((a, b), w)| a * b * w).sum());
            }
            mat[j][k] = Jet { c: c.clone() };
            mat[k][j] = Jet { c };
        }
    }
    let (ld, _) = log_det(mat);
    out.c[1..].copy_from_slice(&ld.c[1..]);
    out.c[0] += ld.c[0];
    Ok(out)
}

/// ln W_N(0, s) = ln N! + Σ_{j<N} ln[j! Γ(j+2s+1)].
fn ln_w_at_zero(n: usize, s: f64) -> Result<f64> {
    let mut acc = ln_factorial(n);
    for j in 0..n {
        acc += ln_factorial(j) + lngamma(j as f64 + 2.0 * s + 1.0)?;
    }
    Ok(acc)
}

/// ln W_N(ξ, s) and u_N(ξ; s) by the orthogonal-polynomial route.
pub fn op_hankel(n: usize, xi: f64, s: f64) -> Result<(f64, f64)> {
    check_s(s)?;
    check_n(n, N_MAX)?;
    if !(xi > 0.0) {
        return Err(domain("op_hankel", format!("ξ = {xi} must be positive")));
    }
    let jet = ln_w_jet(xi, s, n, 1)?;
    Ok((jet.c[0], xi * jet.c.get(1).copied().unwrap_or(0.0)))
}

/// v_N(z; s) = u_N(z/N; s) − z/2.
pub fn v_finite_n(z: f64, n: usize, s: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(domain("v_finite_n", format!("z = {z} must be positive")));
    }
    let (_, u) = op_hankel(n, z / n as f64, s)?;
    Ok(u - 0.5 * z)
}

/// ∏_{j=1}^N Γ(j)Γ(2s+j)/Γ(s+j)².
pub fn selberg_product(n: usize, s: f64) -> Result<f64> {
    check_s(s)?;
    let mut acc = 0.0;
    for j in 1..=n {
        let j = j as f64;
        acc += lngamma(j)? + lngamma(2.0 * s + j)? - 2.0 * lngamma(s + j)?;
    }
    Ok(acc.exp())
}

/// F_N(s, 0) = W_N(0, s) / (N! ∏ Γ(s+j)²), with W_N(0, s) from the
/// discretized Stieltjes procedure rather than the closed form.
pub fn selberg_from_hankel(n: usize, s: f64) -> Result<f64> {
    check_s(s)?;
    check_n(n, N_MAX)?;
    let basis = op_basis(&weight_rule(0.0, s, n), n)?;
    let mut acc = basis.ln_w - ln_factorial(n);
    for j in 1..=n {
        acc -= 2.0 * lngamma(s + j as f64)?;
    }
    Ok(acc.exp())
}

// ---------------------------------------------------------------------------
// confluent Hankel determinant

/// Determinant of exp(e_ij) with row equilibration; returns (ln|det|, sign).
fn ln_det_of_logs(e: &DMatrix<f64>, signs: &DMatrix<f64>) -> (f64, f64) {
    let n = e.nrows();
    let rows: Vec<f64> = (0..n).map(|i| e.row(i).max()).collect();
    let a = DMatrix::from_fn(n, n, |i, j| signs[(i, j)] * (e[(i, j)] - rows[i]).exp());
    let det = a.full_piv_lu().determinant();
    (det.abs().ln() + rows.iter().sum::<f64>(), det.signum())
}

/// 𝒥_N(t; s) rebuilt from positive-parameter U values through the identity
/// det[U(1−2ν, 2−2ν−2μ+i+j, z)] = ∏_{ℓ=0}^{N−2} (1−2ν+ℓ)^{N−1−ℓ} z^{N(2μ+2ν−N)}
/// det[U(2μ−j, 2μ+2ν−i−j, z)] at μ = ν = (N+s)/2, z = 2t.
pub fn hyp_u_hankel(n: usize, t: f64, s: f64) -> Result<f64> {
    check_s(s)?;
    check_n(n, N_MAX_MOMENTS)?;
    if !(t > 0.0) {
        return Err(domain("hyp_u_hankel", format!("t = {t} must be positive")));
    }
    let nf = n as f64;
    let z = 2.0 * t;
    let mut ln_pre = nf * (nf + 2.0 * s) * z.ln();
    let mut sign = 1.0;
    for l in 0..n.saturating_sub(1) {
        let base = 1.0 - nf - s + l as f64;
        if base == 0.0 {
            return Ok(0.0);
        }
        let p = (n - 1 - l) as i32;
        ln_pre += p as f64 * base.abs().ln();
        if base < 0.0 && p % 2 == 1 {
            sign = -sign;
        }
    }
    let mut e = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let a = nf + s - j as f64;
            let b = 2.0 * nf + 2.0 * s - (i + j) as f64;
            e[(i, j)] = ln_hyp_u(a, b, z)?;
        }
    }
    let (ln_det, det_sign) = ln_det_of_logs(&e, &DMatrix::from_element(n, n, 1.0));
    Ok(sign * det_sign * (ln_pre + ln_det).exp())
}

/// 𝒥_N(t; s) from U(1−s−N, ·, 2t) entries reached by the downward
/// recurrence in a.
pub fn hyp_u_hankel_direct(n: usize, t: f64, s: f64) -> Result<f64> {
    check_s(s)?;
    check_n(n, N_MAX_MOMENTS)?;
    let a = 1.0 - s - n as f64;
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            m[(j, k)] = hyp_u_any_a(a, 2.0 - 2.0 * s - 2.0 * n as f64 + (j + k) as f64, 2.0 * t)?;
        }
    }
    Ok(m.determinant())
}

/// (−1)^{s(s−1)/2} det[L^{(2s−1)}_{N+s−1−(j+k)}(−2t)]_{j,k<s}, which equals
/// (−1)^{N(N−1)/2} 𝒥_N(t; s)/Γ(s+N)^N for integer s ≥ 1. Laguerre
/// polynomials of negative degree are taken as zero.
pub fn laguerre_hankel(n: usize, t: f64, s: u32) -> Result<f64> {
    if s == 0 {
        return Err(domain("laguerre_hankel", "s must be a positive integer"));
    }
    check_n(n, N_MAX)?;
    let m = s as usize;
    let alpha = 2.0 * s as f64 - 1.0;
    let mat = DMatrix::from_fn(m, m, |j, k| {
        let deg = (n + m - 1) as i64 - (j + k) as i64;
        if deg < 0 {
            0.0
        } else {
            laguerre(deg as usize, alpha, -2.0 * t)
        }
    });
    let sign = if (m * (m - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * mat.determinant())
}

/// J_N(ξ, s) assembled from 𝒥_N: (−1)^{N(N−1)/2} (2π e^{−|ξ|}/Γ(s+N))^N
/// 2^{−N²−2sN} N! 𝒥_N(|ξ|; s).
pub fn j_from_confluent(n: usize, xi: f64, s: f64) -> Result<f64> {
    let nf = n as f64;
    let x = xi.abs();
    let ln_mag = nf * ((2.0 * PI).ln() - x - lngamma(s + nf)?) - (nf * nf + 2.0 * s * nf) * 2f64.ln() + ln_factorial(n);
    let sign = if (n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * ln_mag.exp() * hyp_u_hankel(n, x, s)?)
}

/// J_N(ξ, s) from the weight integral: (2π)^N e^{−N|ξ|} 2^{−N²−2sN}
/// ∏_{j=1}^N Γ(s+j)^{−2} W_N(2|ξ|, s).
pub fn j_from_weight(n: usize, xi: f64, s: f64) -> Result<f64> {
    let nf = n as f64;
    let x = xi.abs();
    let (ln_w, _) = op_hankel(n, 2.0 * x, s)?;
    let mut acc = nf * (2.0 * PI).ln() - nf * x - (nf * nf + 2.0 * s * nf) * 2f64.ln() + ln_w;
    for j in 1..=n {
        acc -= 2.0 * lngamma(s + j as f64)?;
    }
    Ok(acc.exp())
}

// ---------------------------------------------------------------------------
// characteristic data and moments

/// Finite-N analogue of the characteristic table: u_N(τ) = φ_N(τ/2) =
/// e^{−Nτ/2} W_N(τ, s)/W_N(0, s), the characteristic function of
/// Σ_j x_j evaluated at τ/2.
#[derive(Debug, Clone)]
pub struct FiniteNData {
    pub n: usize,
    pub s: f64,
    pub t_end: f64,
    t_split: f64,
    ln_w0: f64,
}

impl FiniteNData {
    pub fn new(n: usize, s: f64) -> Result<Self> {
        check_s(s)?;
        check_n(n, N_MAX_MOMENTS)?;
        let ln_w0 = ln_w_at_zero(n, s)?;
        let mut data = FiniteNData { n, s, t_end: 0.0, t_split: (1.0 / n as f64).min(0.1), ln_w0 };
        let mut t = 2.0;
        while data.ln_u(t)? > F_END {
            t *= 1.5;
            if t > 1e4 {
                return Err(Error::Tail(format!("φ_N did not decay by τ = {t} (N = {n}, s = {s})")));
            }
        }
        data.t_end = t;
        Ok(data)
    }

    /// ln u_N(τ).
    pub fn ln_u(&self, tau: f64) -> Result<f64> {
        let jet = ln_w_jet(tau, self.s, self.n, 0)?;
        Ok(jet.c[0] - self.ln_w0 - 0.5 * self.n as f64 * tau)
    }

    /// Taylor jet of u_N at τ (τ = 0 allowed for orders below 2s+1).
    pub fn u_jet(&self, tau: f64, order: usize) -> Result<Jet> {
        let mut f = ln_w_jet(tau, self.s, self.n, order)?;
        f.c[0] = if tau == 0.0 { 0.0 } else { f.c[0] - self.ln_w0 - 0.5 * self.n as f64 * tau };
        if order >= 1 {
            f.c[1] -= 0.5 * self.n as f64;
        }
        Ok(f.exp())
    }
}

impl CharData for FiniteNData {
    fn s(&self) -> f64 {
        self.s
    }
    fn t_split(&self) -> f64 {
        self.t_split
    }
    fn head_integral(&self, n: usize, w: Complex64) -> Result<Complex64> {
        // graded panels toward 0, plus a power-law remainder below a0
        let breaks = graded_breaks(0.0, self.t_split, 0.25, 23);
        let a0 = breaks[1];
        let rule = gauss_legendre(20);
        let mut acc = Complex64::new(0.0, 0.0);
        for p in breaks[1..].windows(2) {
            for (t, wt) in rule.mapped(p[0], p[1]) {
                let u = self.u_derivs(t, n)?[n];
                acc += (-w * t.ln()).exp() * (u * wt);
            }
        }
        let g0 = self.u_derivs(a0, n)?[n];
        let g1 = self.u_derivs(4.0 * a0, n)?[n];
        let p = if g0 != 0.0 && g1 != 0.0 { (g1 / g0).abs().ln() / 4f64.ln() } else { 0.0 };
        let denom = (1.0 + p - w).norm().max(0.05);
        acc += (-w * a0.ln()).exp() * (g0 * a0 / denom);
        Ok(acc)
    }
    fn breaks(&self) -> Vec<f64> {
        vec![self.t_split, self.t_end]
    }
    fn u_derivs(&self, t: f64, n: usize) -> Result<Vec<f64>> {
        Ok(self.u_jet(t, n)?.derivatives())
    }
    fn u_deriv_at_zero(&self, n: usize) -> Result<f64> {
        if n as f64 >= 2.0 * self.s + 1.0 {
            return Err(Error::Order { order: n, max: (2.0 * self.s + 1.0).ceil() as usize - 1 });
        }
        Ok(self.u_jet(0.0, n)?.derivatives()[n])
    }
    fn tail_bound(&self, n: usize, w_re: f64) -> f64 {
        let nf = self.n as f64;
        let u = self.ln_u(self.t_end).map(f64::exp).unwrap_or(1.0);
        u * (0.5 * nf + 1.0).powi(n as i32) * self.t_end.powf(-w_re) * 8.0 / nf
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiniteNMethod {
    /// The characteristic-data formulas shared with the limiting moments.
    Characteristic,
    /// Direct quadrature over ℝ^N (N ≤ 2, real h).
    Weyl,
}

/// F_N(s, h). `prefactor` in the result holds F_N(s, 0).
pub fn f_finite_n(n: usize, s: f64, h: Complex64, method: FiniteNMethod) -> Result<MomentResult> {
    check_s(s)?;
    check_n(n, N_MAX_MOMENTS)?;
    let f0 = selberg_product(n, s)?;
    if method == FiniteNMethod::Weyl {
        if h.im != 0.0 {
            return Err(domain("f_finite_n", "Weyl quadrature needs real h"));
        }
        let value = cue_weyl_quadrature(n, s, h.re)?;
        return Ok(MomentResult {
            value: Complex64::new(value, 0.0),
            branch: Branch::Weyl,
            quad_error: 1e-9 * value.abs(),
            prefactor: f0,
            m: None,
            formal: false,
        });
    }
    if h == Complex64::new(0.0, 0.0) {
        return Ok(MomentResult {
            value: Complex64::new(f0, 0.0),
            branch: Branch::Derivative,
            quad_error: 0.0,
            prefactor: f0,
            m: None,
            formal: false,
        });
    }
    let data = FiniteNData::new(n, s)?;
    let r = f_moment(h, &data)?;
    let scale = f0 / prefactor(s)?;
    Ok(MomentResult { value: r.value * scale, quad_error: r.quad_error * scale, prefactor: f0, ..r })
}

/// Direct quadrature of
/// 2^{N²+2sN−2h}/((2π)^N N!) ∫_{ℝ^N} ∏(1+x_j²)^{−s−N} |Σx_j|^{2h} ∏|x_k−x_j|²
/// after x = tan θ, for N ∈ {1, 2}.
pub fn cue_weyl_quadrature(n: usize, s: f64, h: f64) -> Result<f64> {
    check_s(s)?;
    if !(h > -0.5 && h < s + 0.5) {
        return Err(Error::MomentRange(format!("need −1/2 < h < s + 1/2 (s = {s}, h = {h})")));
    }
    let nf = n as f64;
    let p = 2.0 * s - 2.0 * h;
    let half = 0.5 * PI;
    let finite = |x: f64| if x.is_finite() { x } else { 0.0 };
    let (integral, error) = match n {
        1 => {
            let r = tanh_sinh(0.0, half, 1e-13, |th: f64| finite(th.cos().powf(p) * th.sin().powf(2.0 * h)));
            (2.0 * r.value, 2.0 * r.error)
        }
        2 => {
            let mut inner_err = 0.0;
            let r = tanh_sinh(-half, half, 1e-11, |th: f64| {
                let f = |ph: f64| finite((th.cos() * ph.cos()).powf(p) * (th + ph).sin().abs().powf(2.0 * h) * (th - ph).sin().powi(2));
                let a = tanh_sinh(-half, -th, 1e-12, f);
                let b = tanh_sinh(-th, half, 1e-12, f);
                inner_err += a.error + b.error;
                a.value + b.value
            });
            (r.value, r.error + inner_err * 1e-3)
        }
        _ => return Err(domain("cue_weyl_quadrature", format!("N = {n}; only N ≤ 2 is supported"))),
    };
    if !(error <= 1e-8 * integral.abs()) {
        return Err(Error::Quadrature(format!("Weyl integral at N = {n}: error {error:.2e}")));
    }
    let ln_pre = (nf * nf + 2.0 * s * nf - 2.0 * h) * 2f64.ln() - nf * (2.0 * PI).ln() - ln_factorial(n);
    Ok(ln_pre.exp() * integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::tanh_sinh;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn moment_entry_matches_quadrature() {
        let (xi, s) = (0.7, 0.4);
        let direct = tanh_sinh(0.0, 1.0, 1e-14, |x: f64| {
            // y = x/(1−x)
            if x >= 1.0 {
                return 0.0;
            }
            let y = x / (1.0 - x);
            y.powi(3) * (y + xi).powf(s) * y.powf(s) * (-y).exp() / (1.0 - x).powi(2)
        })
        .value;
        assert!(rel(moment_entry(1, 2, xi, s).unwrap(), direct) < 1e-9);
    }

    #[test]
    fn moment_entry_limits() {
        let s = 0.6;
        let xi = 1e6;
        let m = moment_entry(0, 0, xi, s).unwrap();
        assert!(rel(m, lngamma(1.0 + s).unwrap().exp() * xi.powf(s)) < 1e-5);
        assert!(rel(moment_entry(2, 1, 1.0, 0.0).unwrap(), 6.0) < 1e-12);
    }

    #[test]
    fn single_entry_hankel() {
        let (xi, s) = (0.8, 0.3);
        let job = w_hankel(1, xi, s).unwrap();
        let a = 1.0 + s;
        let direct = (1.0 + 2.0 * s) * xi.ln() + lngamma(a).unwrap() + ln_hyp_u(a, 2.0 + 2.0 * s, xi).unwrap();
        assert!((job.logdet - direct).abs() < 1e-12);
    }

    #[test]
    fn moment_and_op_routes_agree() {
        let (n, s) = (6, 0.8);
        for xi in [0.1, 1.0, 5.0] {
            let job = w_hankel(n, xi, s).unwrap();
            let (lw, u) = op_hankel(n, xi, s).unwrap();
            assert!((job.logdet - lw).abs() < 1e-9 * lw.abs(), "{xi}: {} vs {lw}", job.logdet);
            assert!((job.logderiv - u).abs() < 1e-9 * u.abs(), "{xi}: {} vs {u}", job.logderiv);
            // differenced on the smooth route; the U values carry ~1e-11 noise
            let d = 1e-5 * xi;
            let fd = xi * (op_hankel(n, xi + d, s).unwrap().0 - op_hankel(n, xi - d, s).unwrap().0) / (2.0 * d);
            assert!((fd - job.logderiv).abs() < 1e-6 * (1.0 + u.abs()));
        }
    }

    #[test]
    fn hankel_jet_matches_finite_differences() {
        let (n, s, xi) = (4, 1.3, 0.6);
        let jet = ln_w_jet(xi, s, n, 3).unwrap();
        let d = 1e-3;
        let f = |x: f64| op_hankel(n, x, s).unwrap().0;
        let second = (f(xi + d) - 2.0 * f(xi) + f(xi - d)) / (d * d);
        assert!((2.0 * jet.c[2] - second).abs() < 1e-5 * second.abs().max(1.0));
    }

    #[test]
    fn transformation_identity() {
        for (n, s, t) in [(2, 1.3, 0.9), (3, 0.4, 2.0), (2, 1.0, 0.5), (4, 1.0, 0.5)] {
            let a = hyp_u_hankel(n, t, s).unwrap();
            let b = hyp_u_hankel_direct(n, t, s).unwrap();
            assert!(rel(a, b) < 1e-10, "{n} {s} {t}: {a} vs {b}");
        }
    }

    #[test]
    fn confluent_and_weight_forms_of_j_agree() {
        let (n, xi, s) = (2, 1.0, 0.6);
        assert!(rel(j_from_confluent(n, xi, s).unwrap(), j_from_weight(n, xi, s).unwrap()) < 1e-10);
    }

    #[test]
    fn laguerre_reduction() {
        for (n, s, t) in [(4usize, 1u32, 0.5), (3, 2, 1.2), (2, 1, 0.7)] {
            let sf = s as f64;
            let lhs = hyp_u_hankel(n, t, sf).unwrap() / lngamma(sf + n as f64).unwrap().exp().powi(n as i32)
                * if (n * (n - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let rhs = laguerre_hankel(n, t, s).unwrap();
            assert!(rel(lhs, rhs) < 1e-10, "{n} {s}: {lhs} vs {rhs}");
        }
        // L^{(1)}_2(x) = (x² − 6x + 6)/2 at x = −2t
        let x = -1.4;
        assert!(rel(laguerre_hankel(2, 0.7, 1).unwrap(), 0.5 * (x * x - 6.0 * x + 6.0)) < 1e-14);
    }

    #[test]
    fn zero_s_is_linear() {
        for n in [1, 5, 20] {
            assert!((v_finite_n(1.7, n, 0.0).unwrap() + 0.85).abs() < 1e-14);
        }
    }

    #[test]
    fn large_argument_limit() {
        // u_N = Ns − sN(N+s)/t + O(t⁻²)
        let (n, s) = (4, 0.7);
        let c = -s * 4.0 * 4.7;
        let gap = |t: f64| t * (op_hankel(n, t, s).unwrap().1 - 2.8) - c;
        let (g1, g2) = (gap(80.0), gap(800.0));
        assert!(g1.abs() < 2.0 && g2.abs() < 0.2 * g1.abs(), "{g1} {g2}");
    }

    #[test]
    fn selberg_value() {
        for s in [0.3, 1.0, 1.7] {
            for n in 1..=8 {
                let a = selberg_from_hankel(n, s).unwrap();
                let b = selberg_product(n, s).unwrap();
                assert!(rel(a, b) < 1e-12, "{n} {s}: {a} vs {b}");
            }
        }
        assert!((selberg_product(1, 1.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn weyl_quadrature_values() {
        assert!((cue_weyl_quadrature(1, 1.0, 0.0).unwrap() - 2.0).abs() < 1e-12);
        assert!(rel(cue_weyl_quadrature(2, 1.0, 0.0).unwrap(), 3.0) < 1e-9);
        // E[x²] = 1 for density ∝ (1+x²)^{−2}
        assert!(rel(cue_weyl_quadrature(1, 1.0, 1.0).unwrap(), 0.5) < 1e-10);
    }

    #[test]
    fn derivative_branch_at_one() {
        let r = f_finite_n(1, 1.0, Complex64::new(1.0, 0.0), FiniteNMethod::Characteristic).unwrap();
        assert!((r.value.re - 0.5).abs() < 1e-9, "{}", r.value.re);
    }
}
