//! Joint-moment coefficients F(s, h), the kernel K_h^ε, Hua-Pickrell
//! moments, the arithmetic factor a_s and the h → m + 1/2 probe.
//!
//! With u(t) = exp ∫₀ᵗ v(x; s) dx/x and P(s) = G²(1+s)/G(1+2s):
//!
//! * h ∈ ℤ≥0: F = P (−1)^h u^{(2h)}(0);
//! * otherwise: F = −P (2/π) sin(πh) Γ(2h−2M) ∫₀^∞ u^{(2M+1)}(t) t^{−(2h−2M)} dt
//!   with Re h ∈ (M, M+1), or M = −1/2 for Re h ∈ (−1/2, 0).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::charfn::CharFnTable;
use crate::error::{check_s, domain, Error, Result};
use crate::jet::Jet;
use crate::quad::gauss_legendre;
use crate::specfun::{gamma_complex, ln_barnes_g, zeta_int};

/// Closest distance allowed between Re h and s + 1/2.
pub const H_EDGE: f64 = 1e-6;
/// Below this distance from s + 1/2 the integral is nearly divergent.
pub const H_WARN: f64 = 1e-3;
/// ε ladder for the kernel route.
pub const KERNEL_EPS: [f64; 3] = [0.02, 0.01, 0.005];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Derivative,
    Integral,
    KernelEps,
    /// Direct quadrature over the eigenvalue coordinates (finite N only).
    Weyl,
}

impl Branch {
    pub fn name(&self) -> &'static str {
        match self {
            Branch::Derivative => "derivative",
            Branch::Integral => "integral",
            Branch::KernelEps => "kernel-eps",
            Branch::Weyl => "weyl",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentResult {
    pub value: Complex64,
    pub branch: Branch,
    /// Estimated absolute error of `value`.
    pub quad_error: f64,
    pub prefactor: f64,
    /// Branch index M (−0.5 for Re h < 0); `None` on the derivative branch.
    pub m: Option<f64>,
    /// Set for Re h < 0, where the limit defining F is not known to exist.
    pub formal: bool,
}

/// The characteristic data a moment computation needs: u and its
/// derivatives on [t_split, ∞) and an exact treatment of (0, t_split).
pub trait CharData {
    fn s(&self) -> f64;
    fn t_split(&self) -> f64;
    /// ∫₀^{t_split} u^{(n)}(t) t^{−w} dt.
    fn head_integral(&self, n: usize, w: Complex64) -> Result<Complex64>;
    /// Quadrature panels from t_split to the end of the data.
    fn breaks(&self) -> Vec<f64>;
    /// u, u′, …, u^{(n)} at t ≥ t_split.
    fn u_derivs(&self, t: f64, n: usize) -> Result<Vec<f64>>;
    fn u_deriv_at_zero(&self, n: usize) -> Result<f64>;
    /// Bound on ∫ |u^{(n)}| t^{−w} beyond the last break.
    fn tail_bound(&self, n: usize, w_re: f64) -> f64;
}

impl CharData for CharFnTable {
    fn s(&self) -> f64 {
        self.s
    }
    fn t_split(&self) -> f64 {
        self.t_series
    }
    fn head_integral(&self, n: usize, w: Complex64) -> Result<Complex64> {
        Ok(self.u_series(n).integrate_against_power(w, self.t_series))
    }
    fn breaks(&self) -> Vec<f64> {
        self.panels().to_vec()
    }
    fn u_derivs(&self, t: f64, n: usize) -> Result<Vec<f64>> {
        CharFnTable::u_derivs(self, t, n)
    }
    fn u_deriv_at_zero(&self, n: usize) -> Result<f64> {
        CharFnTable::u_deriv_at_zero(self, n)
    }
    fn tail_bound(&self, n: usize, w_re: f64) -> f64 {
        self.tail.integral_bound(self.t_end(), n, w_re)
    }
}

/// G²(1+s)/G(1+2s).
pub fn prefactor(s: f64) -> Result<f64> {
    Ok((2.0 * ln_barnes_g(1.0 + s)? - ln_barnes_g(1.0 + 2.0 * s)?).exp())
}

/// K_h^ε(t) = Γ(1+h)/(2π) [(ε+it)^{−h−1} + (ε−it)^{−h−1}].
pub fn kernel_k(h: Complex64, eps: f64, t: f64) -> Result<Complex64> {
    kernel_k_complex(h, eps, Complex64::new(t, 0.0))
}

fn kernel_k_complex(h: Complex64, eps: f64, t: Complex64) -> Result<Complex64> {
    if !(h.re > -1.0) || !(eps > 0.0) {
        return Err(domain("kernel_k", format!("h = {h}, eps = {eps}")));
    }
    let i = Complex64::i();
    let e = -(h + 1.0);
    let a = (eps + i * t).powc(e);
    let b = (eps - i * t).powc(e);
    Ok(gamma_complex(h + 1.0) / (2.0 * PI) * (a + b))
}

/// ∫_ℝ K_h^ε(ξ) e^{iξx} dξ, which should equal |x|^h e^{−ε|x|}. Both
/// half-lines are rotated into the upper half plane by π/4, where the
/// integrand decays like e^{−r|x|/√2}.
pub fn kernel_inversion(h: f64, eps: f64, x: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(domain("kernel_inversion", "x must be nonzero"));
    }
    let x = x.abs();
    let hc = Complex64::new(h, 0.0);
    let rot = Complex64::from_polar(1.0, PI / 4.0);
    let rot_neg = -rot.conj();
    let i = Complex64::i();
    let r_end = 60.0 / (x * (PI / 4.0).sin());
    let mut breaks = vec![0.0];
    let mut r = eps / 16.0;
    while r < r_end {
        breaks.push(r);
        r *= 2.0;
    }
    breaks.push(r_end);
    let rule = gauss_legendre(30);
    let mut acc = Complex64::new(0.0, 0.0);
    for w in breaks.windows(2) {
        for (r, wt) in rule.mapped(w[0], w[1]) {
            let z1 = rot * r;
            let z2 = rot_neg * r;
            let f1 = kernel_k_complex(hc, eps, z1)? * (i * z1 * x).exp() * rot;
            let f2 = kernel_k_complex(hc, eps, z2)? * (i * z2 * x).exp() * rot.conj();
            acc += (f1 + f2) * wt;
        }
    }
    Ok(acc.re)
}

/// Branch index M for h off the nonnegative integers.
fn branch_index(h: Complex64) -> f64 {
    if h.re < 0.0 {
        -0.5
    } else {
        h.re.floor()
    }
}

fn check_h(s: f64, h: Complex64) -> Result<()> {
    check_s(s)?;
    if !(h.re > -0.5) || !(h.re < s + 0.5 - H_EDGE) {
        return Err(Error::MomentRange(format!("need −1/2 < Re h < s + 1/2 (s = {s}, h = {h})")));
    }
    if h.im.abs() > 1.0 {
        return Err(Error::MomentRange(format!("|Im h| ≤ 1 required (h = {h})")));
    }
    Ok(())
}

fn is_nonneg_integer(h: Complex64) -> bool {
    h.im == 0.0 && h.re >= 0.0 && h.re.fract() == 0.0
}

/// F(s, h) for integer h ≥ 0.
pub fn f_derivative_branch<D: CharData + ?Sized>(h: u32, data: &D) -> Result<MomentResult> {
    let s = data.s();
    check_h(s, Complex64::new(h as f64, 0.0))?;
    let d = data.u_deriv_at_zero(2 * h as usize)?;
    let sign = if h % 2 == 0 { 1.0 } else { -1.0 };
    let pre = prefactor(s)?;
    Ok(MomentResult {
        value: Complex64::new(pre * sign * d, 0.0),
        branch: Branch::Derivative,
        quad_error: 0.0,
        prefactor: pre,
        m: None,
        formal: false,
    })
}

/// ∫₀^∞ u^{(n)}(t) t^{−w} dt, with an error estimate.
pub fn power_integral<D: CharData + ?Sized>(data: &D, n: usize, w: Complex64) -> Result<(Complex64, f64)> {
    let head = data.head_integral(n, w)?;
    let breaks = refine_breaks(&data.breaks());
    let fine = gauss_legendre(20);
    let coarse = gauss_legendre(12);
    let mut body = Complex64::new(0.0, 0.0);
    let mut body_coarse = Complex64::new(0.0, 0.0);
    for p in breaks.windows(2) {
        for (t, wt) in fine.mapped(p[0], p[1]) {
            let u = data.u_derivs(t, n)?[n];
            body += (-w * t.ln()).exp() * (u * wt);
        }
        for (t, wt) in coarse.mapped(p[0], p[1]) {
            let u = data.u_derivs(t, n)?[n];
            body_coarse += (-w * t.ln()).exp() * (u * wt);
        }
    }
    let err = (body - body_coarse).norm() + data.tail_bound(n, w.re) + 1e-15 * head.norm();
    Ok((head + body, err))
}

/// Splits panels so no panel is wider than half its left end or 1.
fn refine_breaks(breaks: &[f64]) -> Vec<f64> {
    let mut out = vec![breaks[0]];
    for w in breaks.windows(2) {
        let (mut a, b) = (w[0], w[1]);
        while b - a > (0.5 * a).min(1.0) {
            a += (0.5 * a).min(1.0);
            out.push(a);
        }
        out.push(b);
    }
    out
}

/// F(s, h) for h off the nonnegative integers.
pub fn f_integral_branch<D: CharData + ?Sized>(h: Complex64, data: &D) -> Result<MomentResult> {
    let s = data.s();
    check_h(s, h)?;
    if is_nonneg_integer(h) {
        return Err(Error::MomentRange(format!("h = {h} is on the derivative branch")));
    }
    if s + 0.5 - h.re < H_WARN {
        log::warn!("Re h = {} is within {H_WARN} of s + 1/2; the integral is nearly divergent", h.re);
    }
    let m = branch_index(h);
    let n = (2.0 * m + 1.0) as usize;
    let w = h * 2.0 - 2.0 * m;
    let (integral, err) = power_integral(data, n, w)?;
    let pre = prefactor(s)?;
    let factor = -(2.0 / PI) * (h * PI).sin() * gamma_complex(w) * pre;
    Ok(MomentResult {
        value: factor * integral,
        branch: Branch::Integral,
        quad_error: factor.norm() * err,
        prefactor: pre,
        m: Some(m),
        formal: h.re < 0.0,
    })
}

/// F(s, h) on whichever branch applies.
pub fn f_moment<D: CharData + ?Sized>(h: Complex64, data: &D) -> Result<MomentResult> {
    if is_nonneg_integer(h) {
        f_derivative_branch(h.re as u32, data)
    } else {
        f_integral_branch(h, data)
    }
}

/// ∫₀^∞ K_{2h}^ε(t) u(2t) dt.
pub fn kernel_integral(h: Complex64, eps: f64, table: &CharFnTable) -> Result<Complex64> {
    let h2 = h * 2.0;
    // in τ = 2t the integrand is ½ K(τ/2) u(τ)
    let mut breaks = vec![0.0];
    let mut t = 1e-12;
    while t < table.t_series {
        breaks.push(t);
        t *= 2.0;
    }
    breaks.extend(refine_breaks(table.panels()));
    let rule = gauss_legendre(20);
    let mut acc = Complex64::new(0.0, 0.0);
    for p in breaks.windows(2) {
        for (tau, wt) in rule.mapped(p[0], p[1]) {
            let u = if tau <= table.t_series { table.u_series(0).eval(tau) } else { table.u_at(tau) };
            acc += kernel_k(h2, eps, 0.5 * tau)? * (0.5 * u * wt);
        }
    }
    Ok(acc)
}

/// F(s, h) = P 2^{1−2h} lim_{ε→0} ∫₀^∞ K_{2h}^ε(t) u(2t) dt, extrapolated
/// from ε ∈ {0.02, 0.01, 0.005}.
///
/// The integral equals ½ E[|X|^{2h} e^{−ε|X|}], whose expansion in ε has
/// an analytic part and a term ε^γ, γ = 2s + 1 − 2h, from the x^{−2s−2}
/// tail of the density; the fit uses {1, ε, ε^γ} (with logs at
/// collisions).
pub fn f_kernel_eps(h: Complex64, table: &CharFnTable) -> Result<MomentResult> {
    let s = table.s;
    check_h(s, h)?;
    let gamma = 2.0 * s + 1.0 - 2.0 * h.re;
    let third = |e: f64| -> f64 {
        if (gamma - 1.0).abs() < 1e-3 {
            e * e.ln()
        } else if (gamma - 2.0).abs() < 1e-3 {
            e * e * e.ln()
        } else if gamma < 2.0 {
            e.powf(gamma)
        } else {
            e * e
        }
    };
    let vals: Vec<Complex64> =
        KERNEL_EPS.iter().map(|&e| kernel_integral(h, e, table)).collect::<Result<_>>()?;
    let a = nalgebra::Matrix3::from_fn(|i, j| match j {
        0 => 1.0,
        1 => KERNEL_EPS[i],
        _ => third(KERNEL_EPS[i]),
    });
    let inv = a.try_inverse().ok_or_else(|| Error::Quadrature("singular ε fit".into()))?;
    let limit: Complex64 = (0..3).map(|j| vals[j] * inv[(0, j)]).sum();
    // two-point fit without the ε^γ term, as an error scale
    let two = vals[2] * 2.0 - vals[1];
    let pre = prefactor(s)?;
    let factor = (Complex64::new(2.0, 0.0).powc(-h * 2.0 + 1.0)) * pre;
    Ok(MomentResult {
        value: factor * limit,
        branch: Branch::KernelEps,
        quad_error: factor.norm() * (limit - two).norm(),
        prefactor: pre,
        m: None,
        formal: h.re < 0.0,
    })
}

/// E|X(s)|^{2h} = 2^{2h} F(s, h) / P(s).
pub fn hua_pickrell_moment<D: CharData + ?Sized>(h: f64, data: &D) -> Result<f64> {
    let f = f_moment(Complex64::new(h, 0.0), data)?;
    Ok(2f64.powf(2.0 * h) * f.value.re / f.prefactor)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArithmeticFactor {
    pub value: f64,
    pub tail_bound: f64,
    pub primes_used: usize,
}

/// a_s = ∏_p (1 − 1/p)^{s²} Σ_m (Γ(m+s)/(Γ(m+1)Γ(s)))² p^{−m}, truncated at
/// `prime_cutoff`. Each log-factor is a power series in 1/p starting at
/// p^{−2}; with `mode_tail` the primes beyond the cutoff are added through
/// the exact sums Σ_{p>P} p^{−k} from the prime zeta function, k ≤ 7.
pub fn arithmetic_factor(s: f64, prime_cutoff: usize, mode_tail: bool, tol: f64) -> Result<ArithmeticFactor> {
    check_s(s)?;
    if s == 0.0 {
        return Ok(ArithmeticFactor { value: 1.0, tail_bound: 0.0, primes_used: 0 });
    }
    let primes = primes_up_to(prime_cutoff);
    let mut log_sum = 0.0;
    for &p in &primes {
        let x = 1.0 / p as f64;
        let mut c = 1.0;
        let mut sum = 1.0;
        let mut xm = 1.0;
        for m in 0..10_000 {
            c *= (m as f64 + s) / (m as f64 + 1.0);
            xm *= x;
            let term = c * c * xm;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        log_sum += s * s * (1.0 - x).ln() + sum.ln();
    }
    let coef = log_factor_series(s, 9);
    let big_p = prime_cutoff.max(2) as f64;
    // Σ_{p>P} p^{−k} = P(k) − Σ_{p≤P} p^{−k} with the prime zeta function P
    let mut tail = 0.0;
    for (k, c) in coef.iter().enumerate().take(8).skip(2) {
        let head: f64 = primes.iter().map(|&p| (p as f64).powi(-(k as i32))).sum();
        tail += c * (prime_zeta(k as u32) - head).max(0.0);
    }
    let last = coef[8] / (7.0 * big_p.powi(7) * big_p.ln());
    let (value, bound) = if mode_tail {
        ((log_sum + tail).exp(), last.abs() + 1e-14 * tail.abs())
    } else {
        (log_sum.exp(), 1.5 * tail.abs())
    };
    let bound = bound * value + 1e-16 * (primes.len() as f64).sqrt() * value;
    if bound > tol {
        return Err(Error::Cutoff { bound, tol });
    }
    Ok(ArithmeticFactor { value, tail_bound: bound, primes_used: primes.len() })
}

/// Prime zeta P(k) = Σ_p p^{−k} = Σ_n μ(n)/n ln ζ(nk), k ≥ 2.
fn prime_zeta(k: u32) -> f64 {
    let mut acc = 0.0;
    for n in 1..=64u32 {
        let m = n * k;
        if m > 64 {
            break;
        }
        let mu = mobius(n);
        if mu != 0 {
            acc += mu as f64 / n as f64 * zeta_minus_one(m).ln_1p();
        }
    }
    acc
}

/// ζ(m) − 1 without cancellation.
fn zeta_minus_one(m: u32) -> f64 {
    if m < 8 {
        return zeta_int(m) - 1.0;
    }
    let mut acc = 0.0;
    for n in (2..200u32).rev() {
        acc += (n as f64).powi(-(m as i32));
    }
    acc
}

fn mobius(mut n: u32) -> i32 {
    let mut sign = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            sign = -sign;
        }
        p += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

/// Power-series coefficients in x = 1/p of s² ln(1−x) + ln Σ c_m² x^m.
fn log_factor_series(s: f64, len: usize) -> Vec<f64> {
    let mut c = vec![0.0; len];
    let mut cm = 1.0;
    c[0] = 1.0;
    for (m, slot) in c.iter_mut().enumerate().skip(1) {
        cm *= (m as f64 - 1.0 + s) / m as f64;
        *slot = cm * cm;
    }
    let mut l = Jet { c }.ln().c;
    for (k, slot) in l.iter_mut().enumerate().skip(1) {
        *slot -= s * s / k as f64;
    }
    l
}

fn primes_up_to(n: usize) -> Vec<usize> {
    if n < 2 {
        return Vec::new();
    }
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve.iter().enumerate().filter(|(_, &p)| p).map(|(i, _)| i).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub m: u32,
    /// (h, F(m, h)) rows.
    pub rows: Vec<(f64, f64)>,
    /// Least-squares slope of ln F against −ln(m + 1/2 − h).
    pub growth_exponent: f64,
}

/// F(m, h) as h → m + 1/2 from below.
pub fn divergence_probe(m: u32, h_list: &[f64], table: &CharFnTable) -> Result<ProbeResult> {
    let edge = m as f64 + 0.5;
    let mut rows = Vec::with_capacity(h_list.len());
    for &h in h_list {
        if !(h > m as f64 && h < edge) {
            return Err(Error::MomentRange(format!("probe needs h in ({m}, {edge}), got {h}")));
        }
        let f = f_integral_branch(Complex64::new(h, 0.0), table)?;
        rows.push((h, f.value.re));
    }
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.1 > 0.0).map(|&(h, f)| (-(edge - h).ln(), f.ln())).collect();
    let growth_exponent = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    } else {
        f64::NAN
    };
    Ok(ProbeResult { m, rows, growth_exponent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfn::build_charfn;

    fn closed_zero(h: f64) -> f64 {
        2f64.powf(-2.0 * h) / (PI * h).cos()
    }

    #[test]
    fn kernel_closed_forms() {
        let k = kernel_k(Complex64::new(0.0, 0.0), 0.3, 0.7).unwrap();
        assert!((k.re - 0.3 / (PI * (0.09 + 0.49))).abs() < 1e-15);
        let k0 = kernel_k(Complex64::new(0.6, 0.0), 0.3, 0.0).unwrap();
        let expect = crate::specfun::gamma(1.6).unwrap() / (PI * 0.3f64.powf(1.6));
        assert!((k0.re - expect).abs() < 1e-13 * expect);
    }

    #[test]
    fn inversion_recovers_power() {
        for (h, e, x) in [(0.6, 0.3, 2.0), (0.0, 0.5, 1.0), (1.3, 0.1, 0.7)] {
            let got = kernel_inversion(h, e, x).unwrap();
            let want = f64::powf(x, h) * (-e * x).exp();
            assert!((got - want).abs() < 1e-9, "{h} {e} {x}: {got} {want}");
        }
    }

    #[test]
    fn zero_s_closed_form() {
        let t = build_charfn(0.0, 60.0, 4).unwrap();
        for h in [0.1, 0.25, 0.4, -0.2] {
            let f = f_moment(Complex64::new(h, 0.0), &t).unwrap();
            assert!((f.value.re - closed_zero(h)).abs() < 1e-10, "h={h}: {}", f.value);
            assert_eq!(f.formal, h < 0.0);
        }
    }

    #[test]
    fn keating_snaith() {
        let t = build_charfn(1.0, 60.0, 2).unwrap();
        let f = f_moment(Complex64::new(0.0, 0.0), &t).unwrap();
        assert!((f.value.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_route_at_zero_s() {
        let t = build_charfn(0.0, 60.0, 2).unwrap();
        // γ = 1/2 here, so the ε^{5/2} and ε² remainders are large
        let f = f_kernel_eps(Complex64::new(0.25, 0.0), &t).unwrap();
        assert!((f.value.re - 1.0).abs() < 1e-3, "{}", f.value);
    }

    #[test]
    fn hua_pickrell_cauchy() {
        let t = build_charfn(0.0, 60.0, 2).unwrap();
        let m = hua_pickrell_moment(0.25, &t).unwrap();
        assert!((m - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn arithmetic_factor_at_one() {
        let a = arithmetic_factor(1.0, 10_000, true, 1e-8).unwrap();
        assert!((a.value - 1.0).abs() < 1e-10);
        let b = arithmetic_factor(2.0, 10_000, true, 1e-8).unwrap();
        let c = arithmetic_factor(2.0, 100_000, true, 1e-8).unwrap();
        assert!((b.value - c.value).abs() < 1e-9, "{} {}", b.value, c.value);
    }

    #[test]
    fn log_factor_leading_coefficient() {
        let s = 2.5;
        let c = log_factor_series(s, 4);
        assert!(c[1].abs() < 1e-14);
        assert!((c[2] + s * s * (s - 1.0) * (s - 1.0) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn prime_zeta_two() {
        // P(2) = 0.45224742004106549850…
        assert!((prime_zeta(2) - 0.452_247_420_041_065_5).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_h() {
        let t = build_charfn(0.5, 60.0, 2).unwrap();
        assert!(f_moment(Complex64::new(1.0, 0.0), &t).is_err());
        assert!(f_moment(Complex64::new(-0.6, 0.0), &t).is_err());
    }
}
