//! f(t) = ∫₀ᵗ v(x; s) dx/x, u(t) = e^{f(t)} and the derivative jets of u.
//!
//! u(t) is the characteristic function E[exp(i t X(s)/2)], so the density of
//! X(s) is built from φ(t) = u(2t).

use std::sync::Arc;

use crate::error::{check_s, Error, Result};
use crate::painleve::{OdeSolution, PainleveParams, Regime, MAX_JET_ORDER, Z_SWITCH};
use crate::quad::gauss_legendre;
use crate::series::LogSeries;
use crate::specfun::binomial;

/// Value of f where the table ends; e^{−40} ≈ 4e-18.
const F_END: f64 = -40.0;

/// Large-t model u(t) ≈ C t^{b} e^{−t/2 + a√t}, obtained by integrating the
/// large-z expansion of v term by term: a = 2s, b = −3s²/4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    pub c: f64,
    pub a: f64,
    pub b: f64,
}

impl TailModel {
    pub fn eval(&self, t: f64) -> f64 {
        self.c * t.powf(self.b) * (-0.5 * t + self.a * t.sqrt()).exp()
    }

    /// Bound on ∫_T^∞ |u^{(n)}(t)| t^{−w} dt for w ≥ 0, assuming
    /// |u^{(n)}| ≲ 2^{−n} u and the model decay rate beyond T.
    pub fn integral_bound(&self, t: f64, n: usize, w: f64) -> f64 {
        let rate = 0.5 - 0.5 * self.a / t.sqrt() - self.b.max(0.0) / t;
        let rate = rate.max(0.05);
        // generous factor for the derivative prefactor
        4.0 * 0.5f64.powi(n as i32) * self.eval(t) * t.powf(-w) / rate
    }
}

#[derive(Debug, Clone)]
enum VSource {
    Exact,
    Ode(Arc<OdeSolution>),
}

/// f, u and u-jets of one s.
#[derive(Debug, Clone)]
pub struct CharFnTable {
    pub s: f64,
    pub t_grid: Vec<f64>,
    pub f: Vec<f64>,
    pub u: Vec<f64>,
    /// u^{(1..=J)} at each grid node.
    pub jets: Vec<Vec<f64>>,
    pub tail: TailModel,
    pub j_max: usize,
    /// Below this point f and u come from the small-t series.
    pub t_series: f64,
    source: VSource,
    f_series: LogSeries,
    /// u and its derivatives as series in t.
    u_series: Vec<LogSeries>,
    /// Integration panels beyond `t_series` and f at their left ends.
    panels: Vec<f64>,
    f_panels: Vec<f64>,
}

/// Builds the table up to `t_max`, extended until f(t) ≤ −40.
pub fn build_charfn(s: f64, t_max: f64, j: usize) -> Result<CharFnTable> {
    check_s(s)?;
    if j > MAX_JET_ORDER {
        return Err(Error::Order { order: j, max: MAX_JET_ORDER });
    }
    let mut target = t_max.max(estimate_t_end(s));
    for _ in 0..4 {
        let table = build_to(s, target, j)?;
        let t_end = *table.t_grid.last().expect("nonempty");
        if table.f_at(t_end) <= F_END {
            return Ok(table);
        }
        target *= 1.5;
        if target > 10.0 * t_max.max(estimate_t_end(s)) {
            break;
        }
    }
    Err(Error::Tail(format!("u(t) did not fall below e^{F_END} by t = {target} for s = {s}")))
}

/// T with −T/2 + 2s√T − (3s²/4) ln T ≈ −45.
fn estimate_t_end(s: f64) -> f64 {
    let a = 2.0 * s.max(0.0);
    let mut t: f64 = 90.0;
    for _ in 0..50 {
        let rhs = 2.0 * (45.0 + a * t.sqrt() - 0.75 * s * s * t.ln());
        t = rhs.max(20.0);
    }
    t * 1.05
}

fn build_to(s: f64, t_end: f64, j: usize) -> Result<CharFnTable> {
    let (source, f_series, t_series, traj_breaks) = if Regime::classify(s) == Regime::ExactZero {
        let mut fs = LogSeries::new(1.0, 0.0, 24.0);
        fs.add_term((0, 1), &[-0.5]);
        (VSource::Exact, fs, Z_SWITCH, Vec::new())
    } else {
        let sol = OdeSolution::new(PainleveParams::new(s)?, t_end)?;
        let fs = sol.seed.series.integral_over_x();
        let t_series = Z_SWITCH.max(sol.params.z_seed);
        let breaks: Vec<f64> =
            sol.trajectory.breakpoints().into_iter().filter(|&b| b > t_series && b < t_end).collect();
        (VSource::Ode(Arc::new(sol)), fs, t_series, breaks)
    };
    let u0 = f_series.exp();
    let mut u_series = vec![u0];
    for _ in 0..=MAX_JET_ORDER {
        let d = u_series.last().expect("nonempty").derivative();
        u_series.push(d);
    }

    let mut panels = vec![t_series];
    match source {
        VSource::Exact => {
            let mut t = t_series;
            while t < t_end {
                t = (t + 1.0).min(t_end);
                panels.push(t);
            }
        }
        VSource::Ode(_) => {
            panels.extend(traj_breaks);
            panels.push(t_end);
        }
    }
    let mut table = CharFnTable {
        s,
        t_grid: Vec::new(),
        f: Vec::new(),
        u: Vec::new(),
        jets: Vec::new(),
        tail: TailModel { c: 0.0, a: 2.0 * s, b: -0.75 * s * s },
        j_max: j,
        t_series,
        source,
        f_series,
        u_series,
        f_panels: Vec::new(),
        panels,
    };
    let f0 = table.f_series.eval(t_series);
    let mut f_panels = vec![f0];
    for w in table.panels.windows(2) {
        let last = *f_panels.last().expect("nonempty");
        f_panels.push(last + table.integrate_v_over_x(w[0], w[1]));
    }
    table.f_panels = f_panels;

    let mut grid: Vec<f64> = (1..=12).rev().map(|k| t_series * 0.5f64.powi(k)).collect();
    grid.insert(0, 0.0);
    grid.extend(table.panels.iter().cloned());
    let mut fs = Vec::with_capacity(grid.len());
    let mut us = Vec::with_capacity(grid.len());
    let mut jets = Vec::with_capacity(grid.len());
    for &t in &grid {
        let f = table.f_at(t);
        fs.push(f);
        us.push(f.exp());
        let d = if t == 0.0 {
            (1..=j).map(|n| table.u_deriv_at_zero(n).unwrap_or(f64::NAN)).collect()
        } else {
            table.u_derivs(t, j)?[1..].to_vec()
        };
        jets.push(d);
    }
    table.t_grid = grid;
    table.f = fs;
    table.u = us;
    table.jets = jets;

    // tail constant from the last decade of the grid
    let t_last = t_end;
    let lo = t_last / 10f64.sqrt();
    let mut cs = Vec::new();
    for &t in table.t_grid.iter().filter(|&&t| t >= lo) {
        let f = table.f_at(t);
        cs.push(f + 0.5 * t - table.tail.a * t.sqrt() - table.tail.b * t.ln());
    }
    let ln_c = cs.last().copied().unwrap_or(0.0);
    table.tail.c = ln_c.exp();
    Ok(table)
}

impl CharFnTable {
    pub fn t_end(&self) -> f64 {
        *self.panels.last().expect("nonempty")
    }

    /// Panel break points on [t_series, t_end] used for quadrature.
    pub fn panels(&self) -> &[f64] {
        &self.panels
    }

    /// The series of u (n = 0) or u^{(n)} near t = 0.
    pub fn u_series(&self, n: usize) -> &LogSeries {
        &self.u_series[n]
    }

    pub fn v_at(&self, x: f64) -> f64 {
        match &self.source {
            VSource::Exact => -0.5 * x,
            VSource::Ode(sol) => sol.value(x),
        }
    }

    fn integrate_v_over_x(&self, a: f64, b: f64) -> f64 {
        let rule = gauss_legendre(20);
        rule.integrate(a, b, |x| self.v_at(x) / x)
    }

    pub fn f_at(&self, t: f64) -> f64 {
        if let VSource::Exact = self.source {
            return -0.5 * t;
        }
        if t <= self.t_series {
            if t == 0.0 {
                return 0.0;
            }
            return self.f_series.eval(t);
        }
        let t = t.min(self.t_end());
        let k = self.panels.partition_point(|&p| p <= t).saturating_sub(1);
        self.f_panels[k] + self.integrate_v_over_x(self.panels[k], t)
    }

    pub fn u_at(&self, t: f64) -> f64 {
        if t > self.t_end() {
            return self.tail.eval(t);
        }
        self.f_at(t).exp()
    }

    /// f, f′, …, f^{(n)} at t > 0.
    pub fn f_derivs(&self, t: f64, n: usize) -> Result<Vec<f64>> {
        let mut out = vec![self.f_at(t)];
        if n == 0 {
            return Ok(out);
        }
        let v: Vec<f64> = match &self.source {
            VSource::Exact => {
                let mut d = vec![0.0; n];
                d[0] = -0.5 * t;
                if n > 1 {
                    d[1] = -0.5;
                }
                d
            }
            VSource::Ode(sol) => {
                let jet = sol.jet(t, (n - 1).max(2))?;
                (0..n).map(|k| jet.derivative(k)).collect()
            }
        };
        // f^{(m)} = Σ_k C(m−1,k) v^{(k)} (−1)^{m−1−k} (m−1−k)! / t^{m−k}
        for m in 1..=n {
            let mut acc = 0.0;
            for (k, vk) in v.iter().enumerate().take(m) {
                let r = m - 1 - k;
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                acc += binomial(m - 1, k) * vk * sign * crate::specfun::factorial(r) / t.powi((m - k) as i32);
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// u, u′, …, u^{(n)} at t > 0.
    pub fn u_derivs(&self, t: f64, n: usize) -> Result<Vec<f64>> {
        if n > MAX_JET_ORDER + 1 {
            return Err(Error::Order { order: n, max: MAX_JET_ORDER + 1 });
        }
        if t > 0.0 && t <= self.t_series {
            return Ok((0..=n).map(|k| self.u_series[k].eval(t)).collect());
        }
        if let VSource::Exact = self.source {
            let u = (-0.5 * t).exp();
            return Ok((0..=n).map(|k| (-0.5f64).powi(k as i32) * u).collect());
        }
        let f = self.f_derivs(t, n)?;
        let mut u = vec![f[0].exp()];
        // u^{(m+1)} = Σ_k C(m,k) u^{(k)} f^{(m+1−k)}
        for m in 0..n {
            let mut acc = 0.0;
            for k in 0..=m {
                acc += binomial(m, k) * u[k] * f[m + 1 - k];
            }
            u.push(acc);
        }
        Ok(u)
    }

    /// u^{(n)}(t), t ≥ 0.
    pub fn u_deriv_at(&self, t: f64, n: usize) -> Result<f64> {
        if n > self.j_max.max(MAX_JET_ORDER + 1) {
            return Err(Error::Order { order: n, max: self.j_max });
        }
        if t == 0.0 {
            return self.u_deriv_at_zero(n);
        }
        Ok(self.u_derivs(t, n)?[n])
    }

    /// u^{(n)}(0) = n! [t^n] u, which exists for n < 2s + 1.
    pub fn u_deriv_at_zero(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Ok(1.0);
        }
        if let VSource::Exact = self.source {
            return Ok((-0.5f64).powi(n as i32));
        }
        if n as f64 >= 2.0 * self.s + 1.0 && Regime::classify(self.s) != Regime::ExactZero {
            return Err(Error::Order { order: n, max: (2.0 * self.s + 1.0).ceil() as usize - 1 });
        }
        let c = self.u_series[0].taylor_part(n);
        Ok(c[n] * crate::specfun::factorial(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_s_is_exponential() {
        let t = build_charfn(0.0, 50.0, 4).unwrap();
        for x in [0.05, 1.0, 7.0, 30.0] {
            assert!((t.u_at(x) - (-0.5 * x).exp()).abs() < 1e-15);
        }
        let d = t.u_deriv_at(1.0, 3).unwrap();
        assert!((d + 0.125 * (-0.5f64).exp()).abs() < 1e-15);
        assert!((t.u_deriv_at(0.0, 2).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn s_one_small_t() {
        let t = build_charfn(1.0, 50.0, 4).unwrap();
        let x = 1e-3;
        // v = −z²/12 + z³/48 + O(z⁴)
        assert!((t.f_at(x) + x * x / 24.0 - x * x * x / 144.0).abs() < 2e-3 * x.powi(4));
        assert_eq!(t.u_deriv_at(0.0, 1).unwrap(), 0.0);
    }

    #[test]
    fn second_derivative_at_zero_is_d2() {
        let t = build_charfn(2.0, 50.0, 4).unwrap();
        assert!((t.u_deriv_at(0.0, 2).unwrap() + 1.0 / 60.0).abs() < 1e-14);
        assert!(t.u_deriv_at(0.0, 5).is_err());
    }

    #[test]
    fn jets_match_finite_differences() {
        let t = build_charfn(1.5, 50.0, 4).unwrap();
        let x = 2.0;
        let h = 1e-2;
        let u = |y: f64| t.u_at(y);
        let fd3 = (u(x + 2.0 * h) - 2.0 * u(x + h) + 2.0 * u(x - h) - u(x - 2.0 * h)) / (2.0 * h * h * h);
        let d3 = t.u_deriv_at(x, 3).unwrap();
        assert!((fd3 - d3).abs() < 1e-6 * (1.0 + d3.abs()), "{fd3} {d3}");
    }

    #[test]
    fn continuity_across_series_switch() {
        let t = build_charfn(0.7, 50.0, 3).unwrap();
        let a = t.t_series;
        let below = t.u_derivs(a * (1.0 - 1e-12), 3).unwrap();
        let above = t.u_derivs(a * (1.0 + 1e-12), 3).unwrap();
        for k in 0..=3 {
            assert!((below[k] - above[k]).abs() < 1e-9 * (1.0 + below[k].abs()), "k={k}");
        }
    }

    #[test]
    fn tail_reaches_threshold() {
        for s in [-0.3, 0.7, 2.0] {
            let t = build_charfn(s, 10.0, 2).unwrap();
            assert!(t.f_at(t.t_end()) <= F_END);
            assert!(t.u.iter().all(|&u| u > 0.0));
        }
    }
}
