//! The `C²` bump `ρ` with `spt ρ ⊆ B(0,1)`, `∫ρ = 1`, `‖∇ρ‖₁ <= d+1` and
//! `‖Δρ‖₁ <= 2(d+1)²`.
//!
//! `ρ = k^d ρ₀(k·) * η`, `k = 1+s`, where `ρ₀ = d(d+2)/(2σ_{d-1}) (1-|x|²)₊`
//! and `η` is the radial bump `(1-(|x|/a)²)³₊` of radius `a = s/(1+s)`,
//! normalized to unit mass. Everything is radial, so values, gradients and
//! Laplacians reduce to one-dimensional integrals over the bump radius with
//! the angular part done in closed form.

use std::f64::consts::PI;

use crate::bounds::{omega_d, sphere_area};
use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::report::BoundReport;

pub const DEFAULT_SMOOTHING: f64 = 0.02;
pub const MAX_SMOOTHING: f64 = 0.05;

const INNER_TOL: f64 = 1e-11;
const MASS_TOL: f64 = 1e-11;
const NORM_TOL: f64 = 1e-9;
const TABLE_POINTS: usize = 2001;

/// `∫_{S^{d-1}} (α + β u)₊ dω` with `u = ω₁`, and its partials in `α`, `β`.
fn positive_part_average(d: usize, alpha: f64, beta: f64) -> (f64, f64, f64) {
    let sigma = sphere_area(d);
    if alpha >= beta {
        return (sigma * alpha, sigma, 0.0);
    }
    if alpha <= -beta {
        return (0.0, 0.0, 0.0);
    }
    match d {
        1 => (alpha + beta, 1.0, 1.0),
        2 => {
            let phi = (-alpha / beta).acos();
            (2.0 * (alpha * phi + beta * phi.sin()), 2.0 * phi, 2.0 * phi.sin())
        }
        _ => {
            let s = alpha + beta;
            (PI * s * s / beta, 2.0 * PI * s / beta, PI * s * (beta - alpha) / (beta * beta))
        }
    }
}

/// Measure of `{ω : ω₁ > u0}`.
fn cap_measure(d: usize, u0: f64) -> f64 {
    match d {
        1 => (1.0 > u0) as u8 as f64 + (-1.0 > u0) as u8 as f64,
        2 => 2.0 * u0.clamp(-1.0, 1.0).acos(),
        _ => 2.0 * PI * (1.0 - u0.clamp(-1.0, 1.0)),
    }
}

fn piecewise(f: impl Fn(f64) -> f64, mut breaks: Vec<f64>, tol: f64) -> Result<f64> {
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut total = 0.0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            total += integrate(&f, w[0], w[1], tol)?.value;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Profile {
    d: usize,
    /// Amplitude of the rescaled `ρ₀`.
    amp: f64,
    k: f64,
    /// Support radius of the rescaled `ρ₀`.
    b: f64,
    a: f64,
    c_eta: f64,
}

impl Profile {
    fn new(d: usize, s: f64) -> Self {
        let df = d as f64;
        let sigma = sphere_area(d);
        let k = 1.0 + s;
        let a = s / k;
        // ∫_0^1 (1-u²)³ u^{d-1} du = Γ(d/2) Γ(4) / (2 Γ(d/2 + 4))
        let j = libm::tgamma(df / 2.0) * 6.0 / (2.0 * libm::tgamma(df / 2.0 + 4.0));
        Self {
            d,
            amp: df * (df + 2.0) / (2.0 * sigma) * k.powi(d as i32),
            k,
            b: 1.0 / k,
            a,
            c_eta: 1.0 / (sigma * a.powi(d as i32) * j),
        }
    }

    fn eta(&self, tau: f64) -> f64 {
        if tau >= self.a {
            0.0
        } else {
            let q = 1.0 - (tau / self.a).powi(2);
            self.c_eta * q * q * q
        }
    }

    fn radial_weight(&self, tau: f64) -> f64 {
        self.eta(tau) * tau.powi(self.d as i32 - 1)
    }

    fn tau_breaks(&self, r: f64) -> Vec<f64> {
        let mut out = vec![0.0, self.a];
        for x in [self.b - r, r - self.b, r + self.b] {
            if x > 0.0 && x < self.a {
                out.push(x);
            }
        }
        out
    }

    fn ab(&self, r: f64, tau: f64) -> (f64, f64) {
        let k2 = self.k * self.k;
        (1.0 - k2 * (r * r + tau * tau), 2.0 * k2 * r * tau)
    }

    fn value(&self, r: f64) -> Result<f64> {
        if r >= 1.0 {
            return Ok(0.0);
        }
        let f = |tau: f64| {
            let (al, be) = self.ab(r, tau);
            self.radial_weight(tau) * positive_part_average(self.d, al, be).0
        };
        Ok(self.amp * piecewise(f, self.tau_breaks(r), INNER_TOL)?)
    }

    /// `∂ρ/∂R` at radius `r`.
    fn radial_derivative(&self, r: f64) -> Result<f64> {
        if r >= 1.0 {
            return Ok(0.0);
        }
        let k2 = self.k * self.k;
        let f = |tau: f64| {
            let (al, be) = self.ab(r, tau);
            let (_, pa, pb) = positive_part_average(self.d, al, be);
            self.radial_weight(tau) * (pa * (-2.0 * k2 * r) + pb * (2.0 * k2 * tau))
        };
        Ok(self.amp * piecewise(f, self.tau_breaks(r), INNER_TOL)?)
    }

    /// `Δρ = -2d·amp·k² (1_{B_b} * η) + 2·amp·k (δ_{∂B_b} * η)`.
    fn laplacian(&self, r: f64) -> Result<f64> {
        if r >= 1.0 {
            return Ok(0.0);
        }
        let d = self.d;
        let b = self.b;
        let ball = |tau: f64| {
            let m = if r * tau == 0.0 {
                if r * r + tau * tau < b * b {
                    sphere_area(d)
                } else {
                    0.0
                }
            } else {
                cap_measure(d, (r * r + tau * tau - b * b) / (2.0 * r * tau))
            };
            self.radial_weight(tau) * m
        };
        let inside = piecewise(ball, self.tau_breaks(r), INNER_TOL)?;

        let dist = |u: f64| (r * r + b * b - 2.0 * r * b * u).max(0.0).sqrt();
        let shell = if r == 0.0 {
            sphere_area(d) * b.powi(d as i32 - 1) * self.eta(b)
        } else {
            let u_star = (r * r + b * b - self.a * self.a) / (2.0 * r * b);
            match d {
                1 => self.eta((r - b).abs()) + self.eta(r + b),
                _ if u_star >= 1.0 => 0.0,
                2 => {
                    let phi_max = u_star.clamp(-1.0, 1.0).acos();
                    2.0 * b * integrate(|phi: f64| self.eta(dist(phi.cos())), 0.0, phi_max, INNER_TOL)?.value
                }
                _ => {
                    let lo = u_star.max(-1.0);
                    2.0 * PI * b * b * integrate(|u| self.eta(dist(u)), lo, 1.0, INNER_TOL)?.value
                }
            }
        };
        let df = d as f64;
        Ok(-2.0 * df * self.amp * self.k * self.k * inside + 2.0 * self.amp * self.k * shell)
    }

    /// `σ ∫_0^1 g(R) R^{d-1} dR`.
    fn radial_integral(&self, g: impl Fn(f64) -> Result<f64>, tol: f64) -> Result<f64> {
        let failed = std::cell::Cell::new(None);
        let f = |r: f64| match g(r) {
            Ok(v) => v * r.powi(self.d as i32 - 1),
            Err(e) => {
                failed.set(Some(e));
                0.0
            }
        };
        let v = piecewise(f, vec![0.0, self.b - self.a, self.b, 1.0], tol)?;
        match failed.into_inner() {
            Some(e) => Err(e),
            None => Ok(sphere_area(self.d) * v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mollifier {
    pub d: usize,
    pub s: f64,
    /// `1/(1+s)`.
    pub prescale: f64,
    pub bump_radius: f64,
    /// `∫ρ` by quadrature.
    pub mass: f64,
    /// `‖∇ρ‖₁` by quadrature.
    pub grad_l1: f64,
    /// `‖Δρ‖₁` by quadrature.
    pub lap_l1: f64,
    /// Young bound `(1+s) d(d+2)/(d+1)`.
    pub grad_l1_bound: f64,
    /// Young bound `(1+s)² 2d(d+2)`.
    pub lap_l1_bound: f64,
    /// `ρ` at radii `i / (n-1)`, `i = 0..n`.
    pub table: Vec<f64>,
    profile: Profile,
}

impl Mollifier {
    /// `ρ` at radius `r`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        self.profile.value(r)
    }

    pub fn radial_derivative(&self, r: f64) -> Result<f64> {
        self.profile.radial_derivative(r)
    }

    pub fn laplacian(&self, r: f64) -> Result<f64> {
        self.profile.laplacian(r)
    }
}

pub fn mollifier_build(d: usize, s: f64) -> Result<Mollifier> {
    if !(1..=3).contains(&d) {
        return Err(Error::domain(format!("mollifier dimension {d} not in 1..=3")));
    }
    if !(s > 0.0 && s <= MAX_SMOOTHING) {
        return Err(Error::domain(format!("smoothing scale {s} not in (0, {MAX_SMOOTHING}]")));
    }
    let df = d as f64;
    let grad_l1_bound = (1.0 + s) * df * (df + 2.0) / (df + 1.0);
    let lap_l1_bound = (1.0 + s).powi(2) * 2.0 * df * (df + 2.0);
    if grad_l1_bound > df + 1.0 || lap_l1_bound > 2.0 * (df + 1.0).powi(2) {
        return Err(Error::domain(format!("smoothing scale {s} exceeds the norm budget")));
    }
    let p = Profile::new(d, s);
    let mass = p.radial_integral(|r| p.value(r), MASS_TOL)?;
    let grad_l1 = p.radial_integral(|r| Ok(p.radial_derivative(r)?.abs()), NORM_TOL)?;
    let lap_l1 = p.radial_integral(|r| Ok(p.laplacian(r)?.abs()), NORM_TOL)?;
    let table = (0..TABLE_POINTS)
        .map(|i| p.value(i as f64 / (TABLE_POINTS - 1) as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(Mollifier {
        d,
        s,
        prescale: 1.0 / (1.0 + s),
        bump_radius: p.a,
        mass,
        grad_l1,
        lap_l1,
        grad_l1_bound,
        lap_l1_bound,
        table,
        profile: p,
    })
}

/// `(‖∇ρ₀‖₁, ‖Δρ₀‖)` by radial quadrature; the Laplacian is a measure whose
/// total variation has a volume part and a shell part.
pub fn rho0_norms(d: usize) -> Result<(f64, f64)> {
    let df = d as f64;
    let sigma = sphere_area(d);
    let c = df * (df + 2.0) / (2.0 * sigma);
    let grad = sigma * integrate(|r| 2.0 * c * r * r.powi(d as i32 - 1), 0.0, 1.0, 1e-14)?.value;
    let lap = 2.0 * df * c * omega_d(d) + 2.0 * c * sigma;
    Ok((grad, lap))
}

/// Norm-budget and mass checks of a built mollifier.
pub fn mollifier_reports(m: &Mollifier) -> Vec<BoundReport> {
    let df = m.d as f64;
    let tag = |r: BoundReport| r.param("d", df).param("s", m.s);
    vec![
        tag(BoundReport::new("lemma44", "||grad rho||_1 <= d+1", m.grad_l1, df + 1.0, 1.0)),
        tag(BoundReport::new("lemma44", "||lap rho||_1 <= 2(d+1)^2", m.lap_l1, 2.0 * (df + 1.0).powi(2), 1.0)),
        tag(BoundReport::new("lemma44", "|int rho - 1| <= 1e-8", (m.mass - 1.0).abs(), 1e-8, 1.0)),
        tag(BoundReport::new(
            "lemma44",
            "||grad rho||_1 <= (1+s) d(d+2)/(d+1)",
            m.grad_l1,
            m.grad_l1_bound,
            1.0 + 1e-9,
        )),
        tag(BoundReport::new(
            "lemma44",
            "||lap rho||_1 <= (1+s)^2 2d(d+2)",
            m.lap_l1,
            m.lap_l1_bound,
            1.0 + 1e-9,
        )),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unsmoothed_norms() {
        for d in 1..=3 {
            let df = d as f64;
            let (g, l) = rho0_norms(d).unwrap();
            assert!((g - df * (df + 2.0) / (df + 1.0)).abs() < 1e-12);
            assert!((l - 2.0 * df * (df + 2.0)).abs() < 1e-12);
        }
        assert!((rho0_norms(2).unwrap().0 - 8.0 / 3.0).abs() < 1e-12);
        assert_eq!(rho0_norms(1).unwrap().1, 6.0);
    }

    #[test]
    fn built_in_one_dimension() {
        let m = mollifier_build(1, DEFAULT_SMOOTHING).unwrap();
        assert!((m.mass - 1.0).abs() < 1e-8, "{}", m.mass);
        // ρ is even and decreasing in |x|, so ‖ρ'‖₁ = 2ρ(0)
        assert!((m.grad_l1 - 2.0 * m.table[0]).abs() < 1e-8);
        assert!(m.grad_l1 <= m.grad_l1_bound && m.grad_l1_bound <= 2.0);
        assert!(m.lap_l1 <= m.lap_l1_bound && m.lap_l1_bound <= 8.0);
        assert!(m.table.iter().all(|&v| v >= 0.0));
        assert_eq!(*m.table.last().unwrap(), 0.0);
        assert!(m.table.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        assert!(mollifier_reports(&m).iter().all(|r| r.pass));
    }

    #[test]
    fn built_in_higher_dimensions() {
        for d in 2..=3 {
            let m = mollifier_build(d, DEFAULT_SMOOTHING).unwrap();
            assert!((m.mass - 1.0).abs() < 1e-8, "d={d}: {}", m.mass);
            for r in mollifier_reports(&m) {
                assert!(r.pass, "d={d}: {r:?}");
            }
        }
    }

    #[test]
    fn derivative_matches_differences() {
        let m = mollifier_build(2, 0.05).unwrap();
        for &r in &[0.1, 0.5, 0.93, 0.96] {
            let e = 1e-5;
            let fd = (m.eval(r + e).unwrap() - m.eval(r - e).unwrap()) / (2.0 * e);
            assert!((fd - m.radial_derivative(r).unwrap()).abs() < 1e-6, "r={r}");
            let f0 = m.eval(r).unwrap();
            let e = 1e-4;
            let fdd = (m.eval(r + e).unwrap() - 2.0 * f0 + m.eval(r - e).unwrap()) / (e * e);
            let lap = fdd + m.radial_derivative(r).unwrap() / r;
            assert!((lap - m.laplacian(r).unwrap()).abs() < 1e-3 * (1.0 + lap.abs()), "r={r}");
        }
    }

    #[test]
    fn rejects_large_smoothing() {
        assert!(mollifier_build(1, 0.06).is_err());
        assert!(mollifier_build(1, 0.0).is_err());
        assert!(mollifier_build(4, 0.02).is_err());
    }
}
