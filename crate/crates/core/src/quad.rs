//! Quadrature rules: Gauss–Legendre panels, tanh-sinh for endpoint
//! singularities, and a few helpers for graded panel layouts.

use std::collections::HashMap;
use std::ops::{Add, Mul};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

/// Values a quadrature can accumulate.
pub trait QuadValue: Copy + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// An n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    fn compute(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, p1) = legendre_pair(n, x);
                dp = n as f64 * (x * p - p1) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (p, p1) = legendre_pair(n, x);
            dp = if (x * x - 1.0).abs() > 0.0 { n as f64 * (x * p - p1) / (x * x - 1.0) } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<T: QuadValue>(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> T) -> T {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let mut acc = T::zero();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(c + r * x) * (w * r);
        }
        acc
    }

    /// Mapped nodes and weights for [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + r * x, w * r))
    }
}

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Shared Gauss–Legendre rule with `n` points.
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard.entry(n).or_insert_with(|| Arc::new(GaussLegendre::compute(n))).clone()
}

/// Composite Gauss–Legendre over consecutive break points.
pub fn panels<T: QuadValue>(breaks: &[f64], n: usize, mut f: impl FnMut(f64) -> T) -> T {
    let rule = gauss_legendre(n);
    let mut acc = T::zero();
    for w in breaks.windows(2) {
        acc = acc + rule.integrate(w[0], w[1], &mut f);
    }
    acc
}

/// Break points `a, a + (b-a) r^{levels-1}, …, a + (b-a) r, b`, graded
/// geometrically toward `a` with ratio `r < 1`.
pub fn graded_breaks(a: f64, b: f64, ratio: f64, levels: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(levels + 2);
    out.push(a);
    for k in (1..=levels).rev() {
        out.push(a + (b - a) * ratio.powi(k as i32));
    }
    out.push(b);
    out
}

/// Uniform break points with spacing at most `width`.
pub fn uniform_breaks(a: f64, b: f64, width: f64) -> Vec<f64> {
    let n = (((b - a) / width).ceil() as usize).max(1);
    (0..=n).map(|k| a + (b - a) * k as f64 / n as f64).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evals: usize,
}

/// Tanh-sinh quadrature on [a, b]. Nodes near `a` are generated without
/// cancellation, so integrable singularities at `a` down to ~1e-300 are
/// resolved.
pub fn tanh_sinh<T: QuadValue>(
    a: f64,
    b: f64,
    tol: f64,
    mut f: impl FnMut(f64) -> T,
) -> QuadResult<T> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let len = b - a;
    // Beyond this |t| the nodes collapse onto the endpoints in f64.
    let t_max = 6.1;
    let mut eval = |t: f64| -> T {
        let sh = half_pi * t.sinh();
        let ch = half_pi * t.cosh();
        let q = (-2.0 * sh.abs()).exp();
        // distance from the nearer endpoint, as a fraction of len
        let frac = q / (1.0 + q);
        let w = len * ch * 2.0 * q / ((1.0 + q) * (1.0 + q));
        if !(w > 0.0) || frac * len == 0.0 {
            return T::zero();
        }
        let x = if t < 0.0 { a + len * frac } else { b - len * frac };
        f(x) * w
    };

    let mut h = 1.0;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        let t = k as f64 * h;
        sum = sum + eval(t) + eval(-t);
        k += 1;
    }
    let mut evals = 2 * k - 1;
    let mut estimate = sum * h;
    let mut error = f64::INFINITY;
    for level in 1..=11 {
        h *= 0.5;
        let mut add = T::zero();
        let mut j = 1;
        while j as f64 * h <= t_max {
            let t = j as f64 * h;
            add = add + eval(t) + eval(-t);
            evals += 2;
            j += 2;
        }
        sum = sum + add;
        let next = sum * h;
        error = (next + estimate * -1.0).magnitude();
        estimate = next;
        if level >= 3 && error <= tol * estimate.magnitude().max(1e-300) {
            break;
        }
    }
    QuadResult { value: estimate, error, evals }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let r = gauss_legendre(10);
        let v: f64 = r.integrate(0.0, 2.0, |x| x.powi(19));
        assert!((v - 2f64.powi(20) / 20.0).abs() < 1e-9 * v);
        let total: f64 = r.weights.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        let r = tanh_sinh(0.0, 1.0, 1e-14, |x: f64| x.powf(-0.7));
        assert!((r.value - 1.0 / 0.3).abs() < 1e-11, "{}", r.value);
        let r = tanh_sinh(0.0, 1.0, 1e-14, |x: f64| x.ln());
        assert!((r.value + 1.0).abs() < 1e-13);
    }

    #[test]
    fn tanh_sinh_complex() {
        let w = Complex64::new(0.4, 0.3);
        let r = tanh_sinh(0.0, 1.0, 1e-14, |x: f64| Complex64::new(x, 0.0).powc(-w));
        let exact = Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - w);
        assert!((r.value - exact).norm() < 1e-12);
    }

    #[test]
    fn graded_breaks_are_increasing() {
        let b = graded_breaks(0.0, 1.0, 0.5, 10);
        assert_eq!(b.len(), 12);
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(b[b.len() - 1], 1.0);
    }
}
