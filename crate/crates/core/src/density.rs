//! The density ρ^{(s)} of X(s) by Fourier inversion,
//! ρ(x) = (1/π) ∫₀^∞ cos(xt) φ(t) dt with φ(t) = u(2t), its absolute
//! moments, and the correlation kernel of the underlying point process.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::charfn::CharFnTable;
use crate::error::{check_s, domain, Error, Result};
use crate::quad::gauss_legendre;
use crate::specfun::{bessel_j, gamma, gamma_complex};

/// Widest τ-panel of the cosine transform.
const TAU_PANEL: f64 = 0.25;
/// Beyond this |x| the density comes from its large-x expansion.
pub const X_DIRECT: f64 = 64.0;
/// Split point of moment integrals between quadrature and expansion.
const X_SPLIT: f64 = 24.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub s: f64,
    pub x_grid: Vec<f64>,
    pub rho: Vec<f64>,
    pub mass_defect: f64,
    pub min_value: f64,
}

/// One term c τ^p (ln τ)^k of the small-τ expansion of u.
#[derive(Debug, Clone, Copy)]
struct TailTerm {
    c: f64,
    p: f64,
    k: usize,
}

/// Cosine transform of u on precomputed nodes.
#[derive(Debug, Clone)]
pub struct Density {
    pub s: f64,
    /// (τ, weight · u(τ)).
    nodes: Vec<(f64, f64)>,
    terms: Vec<TailTerm>,
    /// Bound on the transform of u beyond the table.
    cutoff_bound: f64,
}

impl Density {
    pub fn new(table: &CharFnTable) -> Result<Self> {
        let rule = gauss_legendre(20);
        let mut breaks = vec![0.0];
        let mut t = 1e-14;
        while t < table.t_series {
            breaks.push(t);
            t *= 2.0;
        }
        let panels = table.panels();
        breaks.push(panels[0]);
        for w in panels.windows(2) {
            let mut a = w[0];
            let step = TAU_PANEL.min(0.5 * a);
            let n = ((w[1] - a) / step).ceil().max(1.0) as usize;
            let h = (w[1] - a) / n as f64;
            for _ in 0..n - 1 {
                a += h;
                breaks.push(a);
            }
            breaks.push(w[1]);
        }
        let mut nodes = Vec::with_capacity(breaks.len() * rule.nodes.len());
        for w in breaks.windows(2) {
            for (tau, wt) in rule.mapped(w[0], w[1]) {
                let u = if tau <= table.t_series { table.u_series(0).eval(tau) } else { table.u_at(tau) };
                nodes.push((tau, wt * u));
            }
        }
        let series = table.u_series(0);
        let mut terms = Vec::new();
        for (&key, poly) in &series.terms {
            let p = series.exponent(key);
            for (k, &c) in poly.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                // even integer powers are smooth and do not reach the tail
                if k == 0 && (p / 2.0).fract() == 0.0 && p.fract() == 0.0 {
                    continue;
                }
                terms.push(TailTerm { c, p, k });
            }
        }
        let cutoff_bound = table.tail.integral_bound(table.t_end(), 0, 0.0) / (2.0 * PI);
        Ok(Density { s: table.s, nodes, terms, cutoff_bound })
    }

    /// ρ(x) by direct quadrature.
    fn rho_direct(&self, x: f64) -> f64 {
        let y = 0.5 * x;
        self.nodes.iter().map(|&(tau, wu)| wu * (y * tau).cos()).sum::<f64>() / (2.0 * PI)
    }

    /// Large-|x| expansion of ρ, built from the non-smooth terms of u at 0.
    pub fn rho_expansion(&self, x: f64) -> f64 {
        let y = 0.5 * x.abs();
        self.terms
            .iter()
            .map(|t| t.c * p_derivative(t.k, t.p, |p| cos_transform_of_power(p) * Complex64::new(y, 0.0).powc(-(p + 1.0))))
            .sum::<f64>()
            / (2.0 * PI)
    }

    pub fn rho(&self, x: f64) -> f64 {
        if x.abs() > X_DIRECT {
            self.rho_expansion(x)
        } else {
            self.rho_direct(x.abs())
        }
    }

    /// ∫_X^∞ x^{e} ρ(x) dx from the expansion, e = 2h.
    fn tail_moment(&self, big_x: f64, e: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.c * p_derivative(t.k, t.p, |p| {
                    // ∫_X^∞ x^e (x/2)^{−p−1} dx = 2^{p+1} X^{e−p}/(p−e)
                    cos_transform_of_power(p) * Complex64::new(2.0, 0.0).powc(p + 1.0)
                        * Complex64::new(big_x, 0.0).powc(-p + e)
                        / (p - e)
                })
            })
            .sum::<f64>()
            / (2.0 * PI)
    }

    /// E|X|^{e} = ∫ |x|^{e} ρ(x) dx for −1 < e < 2s + 1.
    pub fn moment(&self, e: f64) -> Result<f64> {
        let edge = 2.0 * self.s + 1.0;
        if !(e > -1.0) || e >= edge - 0.05 {
            return Err(Error::MomentRange(format!("density moment needs −1 < 2h < 2s + 1 − 0.05, got {e}")));
        }
        let mut breaks = vec![0.0];
        let mut x = 1e-12;
        while x < 0.5 {
            breaks.push(x);
            x *= 2.0;
        }
        let mut x = 0.5;
        while x < X_SPLIT {
            breaks.push(x);
            x += 0.5;
        }
        breaks.push(X_SPLIT);
        let rule = gauss_legendre(20);
        let mut head = 0.0;
        for w in breaks.windows(2) {
            head += rule.integrate(w[0], w[1], |x| x.powf(e) * self.rho_direct(x));
        }
        Ok(2.0 * (head + self.tail_moment(X_SPLIT, e)))
    }

    /// Bound on the error from truncating φ at the end of the table.
    pub fn cutoff_bound(&self) -> f64 {
        self.cutoff_bound
    }
}

/// Γ(p+1) cos(π(p+1)/2): ∫₀^∞ cos(yτ) τ^p dτ = this × y^{−p−1}.
fn cos_transform_of_power(p: Complex64) -> Complex64 {
    gamma_complex(p + 1.0) * ((p + 1.0) * (PI / 2.0)).cos()
}

/// ∂_p^k f at real p, by the Cauchy integral on a circle of radius 1/4.
fn p_derivative(k: usize, p: f64, f: impl Fn(Complex64) -> Complex64) -> f64 {
    if k == 0 {
        return f(Complex64::new(p, 0.0)).re;
    }
    let n = 48;
    let r = 0.25;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let th = 2.0 * PI * j as f64 / n as f64;
        let e = Complex64::from_polar(1.0, th);
        acc += f(Complex64::new(p, 0.0) + e * r) * Complex64::from_polar(1.0, -(k as f64) * th);
    }
    let kf: f64 = (1..=k).map(|i| i as f64).product();
    (acc * kf / (n as f64 * r.powi(k as i32))).re
}

/// ρ on a grid, with the mass defect and the most negative value.
pub fn density_eval(x_grid: &[f64], table: &CharFnTable) -> Result<DensityGrid> {
    check_s(table.s)?;
    let d = Density::new(table)?;
    let rho0 = d.rho(0.0);
    if d.cutoff_bound() > 1e-8 * rho0 {
        return Err(Error::Tail(format!("truncation bound {:.3e} exceeds 1e-8 ρ(0)", d.cutoff_bound())));
    }
    let rho: Vec<f64> = x_grid.iter().map(|&x| d.rho(x)).collect();
    let mass = d.moment(0.0)?;
    let min_value = rho.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(DensityGrid { s: table.s, x_grid: x_grid.to_vec(), rho, mass_defect: (1.0 - mass).abs(), min_value })
}

/// E|X(s)|^{2h} from the density.
pub fn density_moment(table: &CharFnTable, two_h: f64) -> Result<f64> {
    Density::new(table)?.moment(two_h)
}

/// 𝖦^{(s)}(x) = 2^{2s−1/2} Γ(s+1/2) |x|^{−1/2} J_{s−1/2}(1/|x|).
pub fn kernel_g(s: f64, x: f64) -> Result<f64> {
    let a = x.abs();
    Ok(2f64.powf(2.0 * s - 0.5) * gamma(s + 0.5)? * a.powf(-0.5) * bessel_j(s - 0.5, 1.0 / a)?)
}

/// 𝖧^{(s)}(x) = sgn(x) 2^{2s+1/2} Γ(s+3/2) |x|^{−1/2} J_{s+1/2}(1/|x|).
pub fn kernel_h(s: f64, x: f64) -> Result<f64> {
    let a = x.abs();
    Ok(x.signum() * 2f64.powf(2.0 * s + 0.5) * gamma(s + 1.5)? * a.powf(-0.5) * bessel_j(s + 0.5, 1.0 / a)?)
}

/// d/dx of |x|^{−1/2} J_ν(1/|x|) for x > 0, using J′_ν = (ν/y)J_ν − J_{ν+1}.
fn d_half_bessel(nu: f64, x: f64) -> Result<f64> {
    let y = 1.0 / x;
    let j = bessel_j(nu, y)?;
    let dj = nu / y * j - bessel_j(nu + 1.0, y)?;
    Ok(-0.5 * x.powf(-1.5) * j - x.powf(-2.5) * dj)
}

fn kernel_g_prime(s: f64, x: f64) -> Result<f64> {
    // 𝖦 is even, so 𝖦′(x) = sgn(x) 𝖦′(|x|)
    Ok(x.signum() * 2f64.powf(2.0 * s - 0.5) * gamma(s + 0.5)? * d_half_bessel(s - 0.5, x.abs())?)
}

fn kernel_h_prime(s: f64, x: f64) -> Result<f64> {
    // 𝖧 is odd, so 𝖧′ is even
    Ok(2f64.powf(2.0 * s + 0.5) * gamma(s + 1.5)? * d_half_bessel(s + 0.5, x.abs())?)
}

/// Correlation kernel 𝖪^{(s)}(x, y); the diagonal uses 𝖦′𝖧 − 𝖦𝖧′.
pub fn hp_kernel(s: f64, x: f64, y: f64) -> Result<f64> {
    check_s(s)?;
    if x == 0.0 || y == 0.0 {
        return Err(domain("hp_kernel", "x and y must be nonzero"));
    }
    let c = gamma(s + 1.0)?.powi(2) / (2.0 * PI * gamma(2.0 * s + 1.0)? * gamma(2.0 * s + 2.0)?);
    if (x - y).abs() < 1e-6 {
        let m = 0.5 * (x + y);
        return Ok(c * (kernel_g_prime(s, m)? * kernel_h(s, m)? - kernel_g(s, m)? * kernel_h_prime(s, m)?));
    }
    let num = kernel_g(s, x)? * kernel_h(s, y)? - kernel_g(s, y)? * kernel_h(s, x)?;
    Ok(c * num / (x - y))
}
