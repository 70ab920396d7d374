//! The distinguished solution v(z; s) of the σ-Painlevé III′ equation
//!
//! (z v″)² = (4v′² − 1)(v + s² − z v′) + s²,   v ~ −z/2 + s√z as z → ∞,
//!
//! computed three ways: exactly for s = 0, from an I-Bessel determinant for
//! positive integer s, and for every s > −1/2 by Taylor integration of the
//! differentiated (third-order) equation, seeded from the small-z series.

use std::sync::Arc;

use log::warn;
use nalgebra::DMatrix;

use crate::error::{check_s, Error, Result};
use crate::jet::{log_det, Jet};
use crate::series::{theta_shift, theta_shift_inv, LogPoly, LogSeries};
use crate::specfun::{bessel_i_entire, cos_pi, digamma, factorial, gamma, sin_pi};

/// Largest derivative order a jet may carry.
pub const MAX_JET_ORDER: usize = 8;
/// Taylor order of each integration step.
const TAYLOR_ORDER: usize = 30;
/// Default switch point between the series and the integrated trajectory.
pub const Z_SWITCH: f64 = 0.1;
/// Bessel route limits.
pub const BESSEL_Z_MAX: f64 = 100.0;
pub const BESSEL_S_MAX: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    ExactZero,
    IntegerS,
    HalfOdd2s,
    Generic,
}

impl Regime {
    pub fn classify(s: f64) -> Regime {
        let two_s = 2.0 * s;
        if s == 0.0 {
            Regime::ExactZero
        } else if s >= 1.0 && (s - s.round()).abs() < 1e-12 {
            Regime::IntegerS
        } else if (two_s - two_s.round()).abs() < 1e-12 && (two_s.round() as i64) % 2 != 0 {
            Regime::HalfOdd2s
        } else {
            Regime::Generic
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regime::ExactZero => "exact_zero",
            Regime::IntegerS => "integer_s",
            Regime::HalfOdd2s => "half_odd_2s",
            Regime::Generic => "generic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Exact,
    BesselTau,
    Ode,
}

impl Route {
    pub fn name(&self) -> &'static str {
        match self {
            Route::Exact => "exact",
            Route::BesselTau => "bessel_tau",
            Route::Ode => "ode",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PainleveParams {
    pub s: f64,
    pub regime: Regime,
    pub z_seed: f64,
    /// Largest lattice exponent kept in the small-z series.
    pub series_order: usize,
}

impl PainleveParams {
    /// Defaults for `s`. For 2s + 1 > 2 the seed point is moved out until the
    /// z^{2s+1} component is at least 1e-5 of v; below that, rounding in the
    /// seed would swamp the one free constant of the solution.
    pub fn new(s: f64) -> Result<Self> {
        check_s(s)?;
        let regime = Regime::classify(s);
        let sigma = 2.0 * s + 1.0;
        let mut z_seed: f64 = if s >= 0.5 { 1e-3 } else { 1e-2 };
        let mut series_order = 24;
        if sigma > 2.0 + 1e-9 {
            let d2 = (1.0 / (4.0 * (1.0 - 4.0 * s * s))).abs();
            let d11 = d11_closed_form(s, regime)?.abs();
            let z_r = (1e-5 * d2 / d11).powf(1.0 / (sigma - 2.0));
            z_seed = z_seed.max(z_r.min(2.0));
            if z_seed > 0.05 {
                series_order = 48;
            }
        }
        Ok(PainleveParams { s, regime, z_seed, series_order })
    }

    pub fn sigma(&self) -> f64 {
        2.0 * self.s + 1.0
    }
}

/// Closed forms for d_{1,1}(s): the z^{2s+1} coefficient (generic s) or the
/// z^{2s+1} ln z coefficient (2s odd).
pub fn d11_closed_form(s: f64, regime: Regime) -> Result<f64> {
    let ratio = gamma(1.0 + s)? / gamma(1.0 + 2.0 * s)?;
    let base = -ratio * ratio / gamma(2.0 + 2.0 * s)?;
    Ok(match regime {
        // e^{2πis} = −1 for 2s odd
        Regime::HalfOdd2s => -base * sin_pi(s) / std::f64::consts::PI,
        _ => base / (2.0 * cos_pi(s)),
    })
}

/// Constant coefficient of z^{2s+1} in the half-odd regime, taken as the
/// finite part of d11(s) z^{2s+1} + d_{2s+1}(s) z^{2s+1} as s approaches the
/// resonance. With L the log coefficient, σ = 2s + 1 and R(s) the right side
/// of the order-σ solve,
///
/// K = L(ψ(1+s) − 2ψ(1+2s) − ψ(2+2s)) + L/(2(σ−1)) − R′(s)/(2σ(2σ−2)).
pub fn d11_companion(s: f64) -> Result<f64> {
    let l = d11_closed_form(s, Regime::HalfOdd2s)?;
    let sigma = 2.0 * s + 1.0;
    let m = (sigma / 2.0).round() as usize;
    // (value, d/ds) of the pure even coefficients c_{2a}, a < m
    let mut c = vec![(0.0f64, 0.0f64); m + 1];
    let rhs = |c: &[(f64, f64)], a: usize| -> (f64, f64) {
        let mut r = (if a == 1 { 0.5 } else { 0.0 }, 0.0);
        for a1 in 1..a {
            let (q, rr) = (2.0 * a1 as f64, 2.0 * (a - a1) as f64);
            let w = 4.0 * rr - 6.0 * q * rr;
            let (x, dx) = c[a1];
            let (y, dy) = c[a - a1];
            r.0 += w * x * y;
            r.1 += w * (dx * y + x * dy);
        }
        r
    };
    for a in 1..m {
        let p = 2.0 * a as f64;
        let lp = p * (p - sigma) * (p - 2.0 + sigma);
        let dlp = 4.0 * p * (1.0 - sigma);
        let (r, dr) = rhs(&c, a);
        let v = r / lp;
        c[a] = (v, (dr - v * dlp) / lp);
    }
    let (_, dr) = rhs(&c, m);
    let psi = digamma(1.0 + s)? - 2.0 * digamma(1.0 + 2.0 * s)? - digamma(2.0 + 2.0 * s)?;
    Ok(l * psi + l / (2.0 * (sigma - 1.0)) - dr / (2.0 * sigma * (2.0 * sigma - 2.0)))
}

/// Truncated small-z expansion of v.
#[derive(Debug, Clone)]
pub struct SmallZSeed {
    pub s: f64,
    pub regime: Regime,
    /// d_{2k}(s) for k = 1..⌈s⌉+1 (the pure z^{2k} coefficients).
    pub d_even: Vec<f64>,
    pub d11: f64,
    /// Constant companion of z^{2s+1} ln z when 2s is odd; zero otherwise.
    pub d_const: f64,
    /// Log coefficient produced by the recursion (half-odd regime only).
    pub d11_recursion: Option<f64>,
    /// Exponent of the first neglected term.
    pub truncation_order: f64,
    pub series: LogSeries,
}

/// Builds the small-z series of v.
pub fn small_z_seed(params: &PainleveParams) -> Result<SmallZSeed> {
    check_s(params.s)?;
    let s = params.s;
    let sigma = params.sigma();
    let p_max = params.series_order as f64;
    if params.regime == Regime::Generic {
        let nearest_even = 2.0 * (sigma / 2.0).round();
        if nearest_even > 0.0 && (sigma - nearest_even).abs() < 1e-6 {
            warn!("2s+1 = {sigma} nearly collides with an even exponent; series coefficients lose accuracy");
        }
    }
    let (series, d11, d_const, d11_rec) = if params.regime == Regime::HalfOdd2s {
        half_odd_series(s, p_max)?
    } else {
        let regime = if params.regime == Regime::ExactZero { Regime::Generic } else { params.regime };
        let d11 = d11_closed_form(s, regime)?;
        (lattice_series(s, d11, p_max), d11, 0.0, None)
    };
    let k_max = s.ceil().max(0.0) as u32 + 1;
    let d_even = (1..=k_max).map(|k| series.coeff((k, 0)).map_or(0.0, |p| p[0])).collect();
    let truncation_order = first_excluded_exponent(sigma, p_max, params.regime);
    Ok(SmallZSeed {
        s,
        regime: params.regime,
        d_even,
        d11,
        d_const,
        d11_recursion: d11_rec,
        truncation_order,
        series,
    })
}

fn first_excluded_exponent(sigma: f64, p_max: f64, regime: Regime) -> f64 {
    if regime == Regime::HalfOdd2s {
        return 2.0 * ((p_max / 2.0).floor() + 1.0);
    }
    let mut best = f64::INFINITY;
    let mut a = 0.0;
    while 2.0 * a <= p_max + 2.0 {
        let b = ((p_max - 2.0 * a) / sigma).floor().max(-1.0) + 1.0;
        best = best.min(2.0 * a + b * sigma);
        a += 1.0;
    }
    best
}

/// v = Σ c_{a,b} z^{2a + bσ}. The a = 0 sector sums to σAz^σ/(1 + Az^σ),
/// A = d11/σ; the rest follows from L(p) c_p = δ_{p,2}/2 + Σ c_q c_r (4r − 6qr)
/// with L(p) = p(p − σ)(p − 2 + σ).
fn lattice_series(s: f64, d11: f64, p_max: f64) -> LogSeries {
    let sigma = 2.0 * s + 1.0;
    let mut series = LogSeries::new(sigma, 0.0, p_max);
    let a_coef = d11 / sigma;
    let b_max = (p_max / sigma).floor() as u32;
    let a_max = (p_max / 2.0).floor() as u32;
    let mut c = vec![vec![0.0f64; b_max as usize + 1]; a_max as usize + 1];
    let mut pw = 1.0;
    for b in 1..=b_max as usize {
        pw *= a_coef;
        let sign = if b % 2 == 1 { 1.0 } else { -1.0 };
        c[0][b] = sigma * sign * pw;
    }
    let expo = |a: usize, b: usize| 2.0 * a as f64 + b as f64 * sigma;
    for a in 1..=a_max as usize {
        for b in 0..=b_max as usize {
            let p = expo(a, b);
            if p > p_max + 1e-12 {
                break;
            }
            let mut r = if a == 1 && b == 0 { 0.5 } else { 0.0 };
            for a1 in 0..=a {
                for b1 in 0..=b {
                    if (a1 == 0 && b1 == 0) || (a1 == a && b1 == b) {
                        continue;
                    }
                    let cq = c[a1][b1];
                    if cq == 0.0 {
                        continue;
                    }
                    let cr = c[a - a1][b - b1];
                    let q = expo(a1, b1);
                    let rr = expo(a - a1, b - b1);
                    r += cq * cr * (4.0 * rr - 6.0 * q * rr);
                }
            }
            let l = p * (p - sigma) * (p - 2.0 + sigma);
            c[a][b] = r / l;
        }
    }
    for (a, row) in c.iter().enumerate() {
        for (b, &x) in row.iter().enumerate() {
            if x != 0.0 && expo(a, b) <= p_max + 1e-12 {
                series.add_term((a as u32, b as u32), &[x]);
            }
        }
    }
    series
}

/// 2s odd: v = Σ P_{2a}(ln z) z^{2a}. At p = σ the solve has a kernel, filled
/// by the companion constant.
fn half_odd_series(s: f64, p_max: f64) -> Result<(LogSeries, f64, f64, Option<f64>)> {
    let sigma = 2.0 * s + 1.0;
    let a_sigma = (sigma / 2.0).round() as usize;
    let a_max = (p_max / 2.0).floor() as usize;
    let d11 = d11_closed_form(s, Regime::HalfOdd2s)?;
    let k = d11_companion(s)?;
    let mut polys: Vec<LogPoly> = vec![vec![0.0]; a_max + 1];
    let mut d11_rec = None;
    for a in 1..=a_max {
        let p = 2.0 * a as f64;
        let mut r: LogPoly = vec![if a == 1 { 0.5 } else { 0.0 }];
        for a1 in 1..a {
            let a2 = a - a1;
            let (q, rr) = (2.0 * a1 as f64, 2.0 * a2 as f64);
            let tq = theta_shift(q, &polys[a1]);
            let tr = theta_shift(rr, &polys[a2]);
            add_scaled(&mut r, &mul(&polys[a1], &tr), 4.0);
            add_scaled(&mut r, &mul(&tq, &tr), -6.0);
        }
        polys[a] = if a == a_sigma {
            // (p + D) D (2σ − 2 + D) P = R
            let y = theta_shift_inv(p, &theta_shift_inv(2.0 * sigma - 2.0, &r));
            let mut out = vec![k];
            for (j, yj) in y.iter().enumerate() {
                out.push(yj / (j + 1) as f64);
            }
            d11_rec = Some(out[1]);
            out
        } else {
            theta_shift_inv(p, &theta_shift_inv(p - sigma, &theta_shift_inv(p - 2.0 + sigma, &r)))
        };
    }
    let mut series = LogSeries::new(sigma, 0.0, p_max);
    for (a, poly) in polys.iter().enumerate().skip(1) {
        series.add_term((a as u32, 0), poly);
    }
    Ok((series, d11, k, d11_rec))
}

fn mul(a: &[f64], b: &[f64]) -> LogPoly {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn add_scaled(dst: &mut LogPoly, src: &[f64], k: f64) {
    if dst.len() < src.len() {
        dst.resize(src.len(), 0.0);
    }
    for (d, x) in dst.iter_mut().zip(src) {
        *d += k * x;
    }
}

/// v and its derivatives at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct PainleveJet {
    pub z: f64,
    pub v: f64,
    /// v′, v″, …, v^{(J)}.
    pub dv: Vec<f64>,
    /// Defect of the σ-form at (z, v, v′, v″).
    pub residual: f64,
    pub route: Route,
}

impl PainleveJet {
    fn from_derivs(s: f64, z: f64, d: &[f64], route: Route) -> Self {
        let residual = first_integral_residual(s, z, d[0], d[1], d[2]).abs();
        PainleveJet { z, v: d[0], dv: d[1..].to_vec(), residual, route }
    }

    /// v^{(k)}, with k = 0 the value.
    pub fn derivative(&self, k: usize) -> f64 {
        if k == 0 {
            self.v
        } else {
            self.dv[k - 1]
        }
    }

    pub fn order(&self) -> usize {
        self.dv.len()
    }

    /// Residual measured against (1 + |v| + z²).
    pub fn scaled_residual(&self) -> f64 {
        self.residual / (1.0 + self.v.abs() + self.z * self.z)
    }
}

/// (z v″)² − (4v′² − 1)(v + s² − z v′) − s².
pub fn first_integral_residual(s: f64, z: f64, v: f64, v1: f64, v2: f64) -> f64 {
    let zv2 = z * v2;
    zv2 * zv2 - (4.0 * v1 * v1 - 1.0) * (v + s * s - z * v1) - s * s
}

fn check_order(j: usize) -> Result<()> {
    if j > MAX_JET_ORDER {
        Err(Error::Order { order: j, max: MAX_JET_ORDER })
    } else {
        Ok(())
    }
}

/// v(z; 0) = −z/2.
pub fn v_exact_zero(z: f64, order: usize) -> Result<PainleveJet> {
    check_order(order)?;
    if !(z > 0.0) {
        return Err(crate::error::domain("v_exact_zero", format!("z = {z}")));
    }
    let mut d = vec![0.0; order.max(2) + 1];
    d[0] = -0.5 * z;
    d[1] = -0.5;
    let mut jet = PainleveJet::from_derivs(0.0, z, &d, Route::Exact);
    jet.dv.truncate(order.max(2));
    Ok(jet)
}

/// Taylor coefficients c_0..c_order of v about z0 from (v, v′, v″), by the
/// recursion of z²v‴ + zv″ − 4s²v′ − 4vv′ + 6zv′² − z/2 = 0.
pub fn taylor_coefficients(s: f64, z0: f64, v: f64, v1: f64, v2: f64, order: usize) -> Vec<f64> {
    let n = order.max(2) + 1;
    let mut c = vec![0.0; n];
    c[0] = v;
    c[1] = v1;
    c[2] = 0.5 * v2;
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    let mut d3 = vec![0.0; n];
    let mut vv1 = vec![0.0; n];
    let mut v1v1 = vec![0.0; n];
    let s2 = s * s;
    for k in 0..n.saturating_sub(3) {
        // coefficients available: c[0..=k+2]
        d1[k] = (k + 1) as f64 * c[k + 1];
        d2[k] = ((k + 1) * (k + 2)) as f64 * c[k + 2];
        let mut a = 0.0;
        let mut b = 0.0;
        for j in 0..=k {
            a += c[j] * d1[k - j];
            b += d1[j] * d1[k - j];
        }
        vv1[k] = a;
        v1v1[k] = b;
        let mut rhs = -(z0 * d2[k]) + 4.0 * s2 * d1[k] + 4.0 * vv1[k] - 6.0 * z0 * v1v1[k];
        if k >= 1 {
            rhs += -d2[k - 1] - 6.0 * v1v1[k - 1];
        }
        if k == 0 {
            rhs += 0.5 * z0;
        }
        if k == 1 {
            rhs += 0.5;
        }
        let mut v3 = rhs;
        if k >= 1 {
            v3 -= 2.0 * z0 * d3[k - 1];
        }
        if k >= 2 {
            v3 -= d3[k - 2];
        }
        v3 /= z0 * z0;
        d3[k] = v3;
        c[k + 3] = v3 / ((k + 1) * (k + 2) * (k + 3)) as f64;
    }
    c.truncate(order + 1);
    c
}

fn horner_derivs(c: &[f64], h: f64, count: usize) -> Vec<f64> {
    // value and first `count - 1` derivatives of Σ c_k h^k
    let mut out = vec![0.0; count];
    for (d, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for k in (d..c.len()).rev() {
            let mut f = 1.0;
            for i in 0..d {
                f *= (k - i) as f64;
            }
            acc = acc * h + c[k] * f;
        }
        *o = acc;
    }
    out
}

#[derive(Debug, Clone)]
struct Step {
    z0: f64,
    h: f64,
    c: Vec<f64>,
}

/// Taylor steps from z0 to z1 starting at `state`, stopping exactly at each
/// point of `stops`. Returns the steps and the end state.
fn integrate_segment(s: f64, z0: f64, state: [f64; 3], z1: f64, stops: &[f64]) -> Result<(Vec<Step>, [f64; 3])> {
    let mut steps = Vec::new();
    let mut z = z0;
    let mut state = state;
    while z < z1 {
        let c = taylor_coefficients(s, z, state[0], state[1], state[2], TAYLOR_ORDER);
        let scale = c[0].abs().max(z * c[1].abs()).max(z * z * c[2].abs()).max(1e-300);
        let tol = 1e-16 * scale;
        let mut h = f64::INFINITY;
        for j in [TAYLOR_ORDER - 1, TAYLOR_ORDER] {
            if c[j] != 0.0 {
                h = h.min((tol / c[j].abs()).powf(1.0 / j as f64));
            }
        }
        h = (0.5 * h).min(0.5 * z);
        if z + h >= z1 * (1.0 - 1e-15) {
            h = z1 - z;
        }
        for &st in stops {
            if st > z && st < z + h {
                h = st - z;
            }
        }
        if !(h > 1e-14 * z) {
            return Err(Error::StepUnderflow(z));
        }
        let next = horner_derivs(&c, h, 3);
        steps.push(Step { z0: z, h, c });
        z = if z + h >= z1 * (1.0 - 1e-15) { z1 } else { z + h };
        state = [next[0], next[1], next[2]];
    }
    Ok((steps, state))
}

/// Dense Taylor trajectory of v.
#[derive(Debug, Clone)]
pub struct Trajectory {
    s: f64,
    steps: Vec<Step>,
    /// Largest first-integral residual met at step ends, scaled by (1+|v|+z²)².
    pub max_scaled_residual: f64,
}

impl Trajectory {
    fn from_steps(s: f64, steps: Vec<Step>) -> Self {
        let mut max_scaled_residual: f64 = 0.0;
        for st in &steps {
            let d = horner_derivs(&st.c, st.h, 3);
            let z = st.z0 + st.h;
            let r = first_integral_residual(s, z, d[0], d[1], d[2]).abs();
            let sc = 1.0 + d[0].abs() + z * z;
            max_scaled_residual = max_scaled_residual.max(r / (sc * sc));
        }
        Trajectory { s, steps, max_scaled_residual }
    }

    pub fn z_start(&self) -> f64 {
        self.steps.first().map_or(f64::NAN, |st| st.z0)
    }

    pub fn z_end(&self) -> f64 {
        self.steps.last().map_or(f64::NAN, |st| st.z0 + st.h)
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Step boundaries, for panel quadrature along the trajectory.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.steps.iter().map(|st| st.z0).collect();
        b.push(self.z_end());
        b
    }

    fn locate(&self, z: f64) -> &Step {
        let idx = self.steps.partition_point(|st| st.z0 <= z);
        &self.steps[idx.saturating_sub(1)]
    }

    /// v, v′, v″ at z from the dense output.
    pub fn state(&self, z: f64) -> [f64; 3] {
        let st = self.locate(z);
        let d = horner_derivs(&st.c, z - st.z0, 3);
        [d[0], d[1], d[2]]
    }

    pub fn value(&self, z: f64) -> f64 {
        let st = self.locate(z);
        let h = z - st.z0;
        st.c.iter().rev().fold(0.0, |acc, c| acc * h + c)
    }

    /// Derivatives v..v^{(order)} at z, re-expanding the recursion about z.
    pub fn derivatives(&self, z: f64, order: usize) -> Vec<f64> {
        let [v, v1, v2] = self.state(z);
        let c = taylor_coefficients(self.s, z, v, v1, v2, order.max(2));
        Jet { c }.derivatives()
    }
}

/// Node spacing in x = √z for the shooting solve. Over one segment the
/// unstable mode grows by about e^{4Δx}.
const SHOOT_DX: f64 = 0.25;
/// Extra room in x beyond the last requested z; the right boundary error
/// decays inward like e^{−4Δx}.
const SHOOT_MARGIN: f64 = 8.0;

/// Solves for the pole-free solution on [z_a, z_b] by multiple shooting.
/// Linearized about v, the equation has modes growing and decaying like
/// e^{±4√z}; v is the one without the growing mode, so a forward march
/// amplifies rounding by e^{4√z}. Here v(z_a), v′(z_a) come from the seed,
/// v(z_b) from the large-z expansion, and Newton matches the segments.
fn shoot(s: f64, z_a: f64, left: [f64; 3], z_b: f64) -> Result<Vec<Step>> {
    let x_a = z_a.sqrt();
    let x_b = z_b.sqrt();
    let m = (((x_b - x_a) / SHOOT_DX).ceil() as usize).max(1);
    let nodes: Vec<f64> = (0..=m)
        .map(|i| {
            let x = x_a + (x_b - x_a) * i as f64 / m as f64;
            if i == 0 {
                z_a
            } else if i == m {
                z_b
            } else {
                x * x
            }
        })
        .collect();

    // initial guess: forward march while it is trustworthy, then the asymptote
    let mut x_guess = vec![[0.0; 3]; m + 1];
    x_guess[0] = left;
    let mut trusted = true;
    for i in 0..m {
        if trusted && nodes[i + 1].sqrt() <= 4.0 {
            match integrate_segment(s, nodes[i], x_guess[i], nodes[i + 1], &[]) {
                Ok((_, st)) => x_guess[i + 1] = st,
                Err(_) => trusted = false,
            }
        } else {
            trusted = false;
        }
        if !trusted {
            x_guess[i + 1] = asymptote_state(nodes[i + 1], s);
        }
    }
    let v_right = v_large_z_asymptote(z_b, s, 6);

    let n = 3 * (m + 1);
    let mut x = x_guess;
    for iter in 0..30 {
        let mut jac = DMatrix::<f64>::zeros(n, n);
        let mut res = nalgebra::DVector::<f64>::zeros(n);
        res[0] = x[0][0] - left[0];
        res[1] = x[0][1] - left[1];
        jac[(0, 0)] = 1.0;
        jac[(1, 1)] = 1.0;
        for i in 0..m {
            let (_, end) = integrate_segment(s, nodes[i], x[i], nodes[i + 1], &[])?;
            let row = 2 + 3 * i;
            for k in 0..3 {
                res[row + k] = end[k] - x[i + 1][k];
                jac[(row + k, 3 * (i + 1) + k)] = -1.0;
            }
            for j in 0..3 {
                let mut p = x[i];
                let eps = 1e-7 * (1.0 + p[j].abs());
                p[j] += eps;
                let (_, e2) = integrate_segment(s, nodes[i], p, nodes[i + 1], &[])?;
                for k in 0..3 {
                    jac[(row + k, 3 * i + j)] = (e2[k] - end[k]) / eps;
                }
            }
        }
        res[n - 1] = x[m][0] - v_right;
        jac[(n - 1, 3 * m)] = 1.0;
        let delta = jac.lu().solve(&(-res)).ok_or(Error::Conditioning { what: "shooting system", estimate: f64::INFINITY })?;
        let mut change: f64 = 0.0;
        for i in 0..=m {
            for k in 0..3 {
                let d = delta[3 * i + k];
                x[i][k] += d;
                change = change.max(d.abs() / (1.0 + x[i][k].abs()));
            }
        }
        if change < 1e-15 || (iter > 3 && change < 1e-13) {
            break;
        }
        if iter == 29 {
            return Err(Error::Conditioning { what: "shooting iteration", estimate: change });
        }
    }
    let mut steps = Vec::new();
    for i in 0..m {
        let stops: Vec<f64> = [1.0].into_iter().filter(|&p| p > nodes[i] && p < nodes[i + 1]).collect();
        let (st, _) = integrate_segment(s, nodes[i], x[i], nodes[i + 1], &stops)?;
        steps.extend(st);
    }
    Ok(steps)
}

/// (v, v′, v″) of the 6-term large-z expansion.
fn asymptote_state(z: f64, s: f64) -> [f64; 3] {
    let q = 4.0 * s * s - 1.0;
    let c = [s, -0.75 * s * s, s * q / 32.0, s * s * q / 64.0, 3.0 * s * q * (4.0 * s * s + 3.0) / 2048.0];
    // Σ c_k z^{(1−k)/2} for k = 0..4 plus −z/2
    let mut v = -0.5 * z;
    let mut d1 = -0.5;
    let mut d2 = 0.0;
    for (k, ck) in c.iter().enumerate() {
        let e = (1.0 - k as f64) / 2.0;
        v += ck * z.powf(e);
        d1 += ck * e * z.powf(e - 1.0);
        d2 += ck * e * (e - 1.0) * z.powf(e - 2.0);
    }
    [v, d1, d2]
}

/// v by Taylor integration of the third-order equation: a forward march
/// from the small-z seed up to z = 1, then a multiple-shooting solve out to
/// the requested range.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub params: PainleveParams,
    pub seed: SmallZSeed,
    series_derivs: Vec<LogSeries>,
    pub trajectory: Trajectory,
    /// First-integral residual of the seed, scaled by (1+|v|+z²)².
    pub seed_residual: f64,
    /// |Δv″| at the start of the shooting range between the forward march
    /// from the seed and the shooting solve. Small only if the seed is the
    /// pole-free member of the one-parameter family.
    pub seed_consistency: f64,
    z_max: f64,
}

impl OdeSolution {
    pub fn new(params: PainleveParams, z_max: f64) -> Result<Self> {
        check_s(params.s)?;
        let s = params.s;
        let seed = small_z_seed(&params)?;
        let mut series_derivs = vec![seed.series.clone()];
        for _ in 0..MAX_JET_ORDER {
            let next = series_derivs.last().expect("nonempty").derivative();
            series_derivs.push(next);
        }
        let z0 = params.z_seed;
        let state = [series_derivs[0].eval(z0), series_derivs[1].eval(z0), series_derivs[2].eval(z0)];
        let r = first_integral_residual(s, z0, state[0], state[1], state[2]).abs();
        let sc = 1.0 + state[0].abs() + z0 * z0;
        if r > 1e-9 * sc * sc {
            return Err(Error::SeedQuality { z: z0, residual: r });
        }
        let z_max = z_max.max(2.0 * z0).max(2.0);
        let z_a = z0.max(1.0);
        let (mut steps, left) = integrate_segment(s, z0, state, z_a, &[Z_SWITCH])?;
        let z_b = (z_max.sqrt() + SHOOT_MARGIN).powi(2);
        let shot = shoot(s, z_a, left, z_b)?;
        let seed_consistency = (2.0 * shot[0].c[2] - left[2]).abs() / (1.0 + left[2].abs());
        if seed_consistency > 1e-6 {
            warn!("s = {s}: seed and shooting solve disagree (|Δv″| = {seed_consistency:.3e})");
        }
        steps.extend(shot);
        let trajectory = Trajectory::from_steps(s, steps);
        Ok(OdeSolution { params, seed, series_derivs, trajectory, seed_residual: r / (sc * sc), seed_consistency, z_max })
    }

    pub fn for_s(s: f64, z_max: f64) -> Result<Self> {
        OdeSolution::new(PainleveParams::new(s)?, z_max)
    }

    pub fn s(&self) -> f64 {
        self.params.s
    }

    /// Upper end of the range where values are accurate.
    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    /// Recomputes the solution on a longer range.
    pub fn extend_to(&mut self, z_max: f64) -> Result<()> {
        if z_max > self.z_max {
            *self = OdeSolution::new(self.params.clone(), z_max)?;
        }
        Ok(())
    }

    /// The n-th derivative of the small-z series.
    pub fn series_derivative(&self, n: usize) -> &LogSeries {
        &self.series_derivs[n]
    }

    fn in_series_region(&self, z: f64) -> bool {
        z <= self.params.z_seed
    }

    pub fn value(&self, z: f64) -> f64 {
        if self.in_series_region(z) {
            self.series_derivs[0].eval(z)
        } else {
            self.trajectory.value(z)
        }
    }

    pub fn jet(&self, z: f64, order: usize) -> Result<PainleveJet> {
        check_order(order)?;
        if !(z > 0.0) || z > self.z_max * (1.0 + 1e-12) {
            return Err(crate::error::domain("v_ode", format!("z = {z} outside (0, {}]", self.z_max)));
        }
        let n = order.max(2);
        let d: Vec<f64> = if self.in_series_region(z) {
            (0..=n).map(|k| self.series_derivs[k].eval(z)).collect()
        } else {
            self.trajectory.derivatives(z, n)
        };
        let mut jet = PainleveJet::from_derivs(self.params.s, z, &d, Route::Ode);
        jet.dv.truncate(n);
        Ok(jet)
    }
}

/// Jets along sorted targets by the ODE route.
pub fn v_ode(z_targets: &[f64], params: &PainleveParams, order: usize) -> Result<Vec<PainleveJet>> {
    let z_max = z_targets.iter().cloned().fold(1.0, f64::max);
    let sol = OdeSolution::new(params.clone(), z_max)?;
    z_targets.iter().map(|&z| sol.jet(z, order)).collect()
}

/// φ_ν(z) = z^{−ν/2} I_ν(2√z); φ_ν′ = φ_{ν+1}.
fn phi(nu: f64, z: f64) -> f64 {
    bessel_i_entire(nu, z)
}

/// v for positive integer s from v = −z/2 + z d/dz ln det[φ_{j+k+1}(z)].
pub fn v_bessel_tau(z: f64, s: usize, order: usize) -> Result<PainleveJet> {
    check_order(order)?;
    if s == 0 || s > BESSEL_S_MAX {
        return Err(crate::error::domain("v_bessel_tau", format!("s = {s} outside 1..={BESSEL_S_MAX}")));
    }
    if !(z > 0.0) || z > BESSEL_Z_MAX {
        return Err(crate::error::domain("v_bessel_tau", format!("z = {z} outside (0, {BESSEL_Z_MAX}]")));
    }
    let n = order.max(2);
    let len = n + 2;
    let max_nu = 2 * s - 1 + len;
    let phis: Vec<f64> = (0..=max_nu).map(|nu| phi(nu as f64, z)).collect();
    // entries as jets in δ: φ_{j+k+1}(z + δ) = Σ_m φ_{j+k+1+m}(z) δ^m / m!
    let m: Vec<Vec<Jet>> = (0..s)
        .map(|j| {
            (0..s)
                .map(|k| Jet { c: (0..len).map(|mm| phis[j + k + 1 + mm] / factorial(mm)).collect() })
                .collect()
        })
        .collect();
    let cond = scaled_condition(&m);
    let estimate = cond * f64::EPSILON;
    if estimate > 1e-8 {
        return Err(Error::Conditioning { what: "I-Bessel determinant", estimate });
    }
    let (l, _) = log_det(m);
    let mut w = vec![0.0; n + 1];
    for (mm, wm) in w.iter_mut().enumerate() {
        *wm = z * (mm + 1) as f64 * l.c[mm + 1] + mm as f64 * l.c[mm];
    }
    w[0] -= 0.5 * z;
    w[1] -= 0.5;
    let d = Jet { c: w }.derivatives();
    let mut jet = PainleveJet::from_derivs(s as f64, z, &d, Route::BesselTau);
    jet.dv.truncate(n);
    Ok(jet)
}

fn scaled_condition(m: &[Vec<Jet>]) -> f64 {
    let n = m.len();
    let mut a = DMatrix::from_fn(n, n, |i, j| m[i][j].c[0]);
    for i in 0..n {
        let r = a.row(i).amax();
        a.row_mut(i).scale_mut(1.0 / r);
    }
    for j in 0..n {
        let c = a.column(j).amax();
        a.column_mut(j).scale_mut(1.0 / c);
    }
    let sv = a.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Partial sums of −z/2 + s√z − 3s²/4 + s(4s²−1)/(32√z) + s²(4s²−1)/(64z)
/// + 3s(4s²−1)(4s²+3)/(2048 z^{3/2}).
pub fn v_large_z_asymptote(z: f64, s: f64, n_terms: usize) -> f64 {
    let q = 4.0 * s * s - 1.0;
    let rz = z.sqrt();
    let terms = [
        -0.5 * z,
        s * rz,
        -0.75 * s * s,
        s * q / (32.0 * rz),
        s * s * q / (64.0 * z),
        3.0 * s * q * (4.0 * s * s + 3.0) / (2048.0 * z * rz),
    ];
    terms.iter().take(n_terms.clamp(1, 6)).sum()
}

/// Evaluates v with the preferred route for (z, s): exact for s = 0, the
/// Bessel determinant for integer s ≤ 8 and z ≤ 100, the ODE otherwise.
/// Holds the ODE solution so repeated calls are cheap.
#[derive(Debug, Clone)]
pub struct Painleve {
    pub s: f64,
    pub regime: Regime,
    ode: Option<Arc<OdeSolution>>,
}

impl Painleve {
    pub fn new(s: f64, z_max: f64) -> Result<Self> {
        check_s(s)?;
        let regime = Regime::classify(s);
        let ode = if regime == Regime::ExactZero { None } else { Some(Arc::new(OdeSolution::for_s(s, z_max)?)) };
        Ok(Painleve { s, regime, ode })
    }

    pub fn ode(&self) -> Option<&OdeSolution> {
        self.ode.as_deref()
    }

    pub fn jet(&self, z: f64, order: usize) -> Result<PainleveJet> {
        match self.regime {
            Regime::ExactZero => v_exact_zero(z, order),
            Regime::IntegerS if self.s as usize <= BESSEL_S_MAX && z <= BESSEL_Z_MAX => {
                match v_bessel_tau(z, self.s as usize, order) {
                    Err(Error::Conditioning { .. }) => self.ode_jet(z, order),
                    other => other,
                }
            }
            _ => self.ode_jet(z, order),
        }
    }

    fn ode_jet(&self, z: f64, order: usize) -> Result<PainleveJet> {
        self.ode.as_ref().expect("ode solution exists for s ≠ 0").jet(z, order)
    }
}

/// One-shot dispatch; see [`Painleve`].
pub fn v_dispatch(z: f64, s: f64, order: usize) -> Result<PainleveJet> {
    Painleve::new(s, z.max(1.0))?.jet(z, order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes() {
        assert_eq!(Regime::classify(0.0), Regime::ExactZero);
        assert_eq!(Regime::classify(2.0), Regime::IntegerS);
        assert_eq!(Regime::classify(1.5), Regime::HalfOdd2s);
        assert_eq!(Regime::classify(0.5), Regime::HalfOdd2s);
        assert_eq!(Regime::classify(-0.3), Regime::Generic);
        assert!(PainleveParams::new(-0.5).is_err());
    }

    #[test]
    fn d2_of_one_from_series() {
        let p = PainleveParams { series_order: 20, ..PainleveParams::new(1.0).unwrap() };
        let seed = small_z_seed(&p).unwrap();
        assert!((seed.d_even[0] + 1.0 / 12.0).abs() < 1e-15);
        assert!((seed.d11 - 1.0 / 48.0).abs() < 1e-15);
    }

    #[test]
    fn half_odd_log_coefficients() {
        let seed = small_z_seed(&PainleveParams::new(0.5).unwrap()).unwrap();
        assert!((seed.d11 - 0.125).abs() < 1e-15);
        assert!((seed.d11_recursion.unwrap() - 0.125).abs() < 1e-15);
        let seed = small_z_seed(&PainleveParams::new(1.5).unwrap()).unwrap();
        assert!((seed.d11 + 1.0 / 1536.0).abs() < 1e-17);
        assert!((seed.d11_recursion.unwrap() + 1.0 / 1536.0).abs() < 1e-17);
        assert!((seed.d_even[0] + 1.0 / 32.0).abs() < 1e-16);
    }

    #[test]
    fn companion_is_the_resonance_limit() {
        // mpmath limit of d11(s) + d_{2s+1}(s) as s → 1/2 and 3/2
        assert!((d11_companion(0.5).unwrap() + 0.153_982_878_914_603_1).abs() < 1e-14);
        assert!((d11_companion(1.5).unwrap() - 1.073_261_522_124_669e-3).abs() < 1e-16);
    }

    #[test]
    fn quarter_d11() {
        let d = d11_closed_form(0.25, Regime::Generic).unwrap();
        assert!((d + 0.5564).abs() < 1e-4, "{d}");
    }

    #[test]
    fn series_at_zero_s_is_linear() {
        let p = PainleveParams::new(0.0).unwrap();
        let seed = small_z_seed(&p).unwrap();
        for z in [1e-3, 1e-2, 0.05] {
            assert!((seed.series.eval(z) + 0.5 * z).abs() < 1e-16, "{z}");
        }
    }

    #[test]
    fn exact_zero_jet() {
        let j = v_exact_zero(1.0, 2).unwrap();
        assert_eq!((j.v, j.dv[0], j.dv[1]), (-0.5, -0.5, 0.0));
        assert!(v_exact_zero(3.0, 2).unwrap().residual <= 1e-14);
    }

    #[test]
    fn asymptote_values() {
        let z = 100.0;
        let expect = -50.0 + 10.0 - 0.75 + 3.0 / 320.0 + 3.0 / 6400.0 + 63.0 / 2048000.0;
        assert!((v_large_z_asymptote(z, 1.0, 6) - expect).abs() < 1e-13);
        let half = v_large_z_asymptote(7.0, 0.5, 6);
        assert!((half - (-3.5 + 0.5 * 7f64.sqrt() - 3.0 / 16.0)).abs() < 1e-14);
        assert_eq!(v_large_z_asymptote(9.0, 0.0, 6), -4.5);
    }

    #[test]
    fn bessel_small_z() {
        let j = v_bessel_tau(1e-3, 1, 2).unwrap();
        assert!((j.v / 1e-6 + 1.0 / 12.0).abs() < 1e-3);
        let j = v_bessel_tau(25.0, 1, 2).unwrap();
        assert!((j.v - v_large_z_asymptote(25.0, 1.0, 6)).abs() < 2e-2);
    }

    #[test]
    fn routes_agree_integer_s() {
        for s in [1usize, 2, 3] {
            let sol = OdeSolution::for_s(s as f64, 30.0).unwrap();
            let mut worst: f64 = 0.0;
            for i in 0..60 {
                let z = 0.1 + (30.0 - 0.1) * i as f64 / 59.0;
                let a = sol.jet(z, 4).unwrap();
                let b = v_bessel_tau(z, s, 4).unwrap();
                worst = worst.max((a.v - b.v).abs());
                for k in 0..4 {
                    let scale = 1.0 + b.dv[k].abs();
                    assert!((a.dv[k] - b.dv[k]).abs() < 1e-7 * scale, "s={s} z={z} k={k}");
                }
            }
            assert!(worst < 1e-8, "s={s} worst={worst}");
        }
    }

    #[test]
    fn ode_reproduces_zero_s() {
        let sol = OdeSolution::for_s(0.0, 50.0).unwrap();
        for i in 0..50 {
            let z = 0.01 * (5000f64).powf(i as f64 / 49.0);
            assert!((sol.value(z) + 0.5 * z).abs() < 1e-12, "z={z}");
        }
    }

    #[test]
    fn seed_dispatch_matches_series() {
        let sol = OdeSolution::for_s(0.3, 2.0).unwrap();
        let z = sol.params.z_seed;
        let j = sol.jet(z, 2).unwrap();
        assert!((j.v - sol.seed.series.eval(z)).abs() < 1e-10);
    }
}
