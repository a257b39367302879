//! Free-space heat and resolvent kernels, and the off-diagonal resolvent
//! estimates between separated sets.
//!
//! Laplace transforms `∫₀^∞ e^{-μt} g(t) dt` are evaluated in the variable
//! `u = ln t`, where the integrands decay double-exponentially at both ends;
//! the cut-off tails are bounded analytically and added to the error.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Quadrature};

/// Absolute target for the Gauss–Kronrod part of a Laplace integral.
pub const QUAD_TOL: f64 = 1e-11;

/// Largest certified error accepted for a resolvent kernel value.
pub const KERNEL_CERT: f64 = 1e-9;

/// Largest certified error accepted for an off-diagonal value.
pub const OFFDIAG_CERT: f64 = 1e-8;

/// Exponent at which the `u`-range is cut on either side.
const CUT: f64 = 45.0;

/// `(4πt)^{-d/2} e^{-r²/(4t)}`.
pub fn free_heat_kernel(d: usize, t: f64, r: f64) -> f64 {
    (4.0 * PI * t).powf(-(d as f64) / 2.0) * (-r * r / (4.0 * t)).exp()
}

fn check_dim(d: usize) -> Result<()> {
    if (1..=3).contains(&d) {
        Ok(())
    } else {
        Err(Error::domain(format!("dimension {d} not in 1..=3")))
    }
}

/// Green's function of `μ - Δ` at distance `r`: closed forms for `d = 1, 3`,
/// certified Laplace quadrature for `d = 2`.
pub fn free_resolvent_kernel(d: usize, mu: f64, r: f64) -> Result<f64> {
    check_dim(d)?;
    if !(mu > 0.0) || !(r >= 0.0) {
        return Err(Error::domain(format!("need mu > 0 and r >= 0, got mu={mu}, r={r}")));
    }
    if d >= 2 && r == 0.0 {
        return Err(Error::domain("the resolvent kernel diverges at r = 0 for d >= 2"));
    }
    let s = mu.sqrt();
    match d {
        1 => Ok((-s * r).exp() / (2.0 * s)),
        3 => Ok((-s * r).exp() / (4.0 * PI * r)),
        _ => {
            let q = resolvent_by_quadrature(d, mu, r)?;
            if q.error > KERNEL_CERT {
                return Err(Error::Quadrature {
                    tol: KERNEL_CERT,
                    estimate: q.error,
                });
            }
            Ok(q.value)
        }
    }
}

/// `u`-range `[lo, hi]` around the saddle `e^u = r / (2√μ)`.
fn u_range(mu: f64, r: f64) -> (f64, f64) {
    let hi = (CUT / mu).ln();
    if r == 0.0 {
        return (hi - 2.0 * CUT, hi);
    }
    let saddle = (r / (2.0 * mu.sqrt())).ln();
    let lo = (r * r / (4.0 * CUT)).ln();
    (lo.min(saddle - 1.0), hi.max(saddle + 1.0))
}

/// `∫₀^∞ e^{-μt} k_t(r) dt` by quadrature, any `d`.
pub fn resolvent_by_quadrature(d: usize, mu: f64, r: f64) -> Result<Quadrature> {
    check_dim(d)?;
    let half = d as f64 / 2.0;
    let (lo, hi) = u_range(mu, r);
    let f = |u: f64| {
        let t = u.exp();
        t * (-mu * t).exp() * free_heat_kernel(d, t, r)
    };
    let q = integrate(f, lo, hi, QUAD_TOL)?;
    let norm = (4.0 * PI).powf(-half);
    // upper tail: ∫_S^∞ μ^{d/2-1} s^{-d/2} e^{-s} ds with s = μ e^u
    let s_hi = mu * hi.exp();
    let upper = norm * mu.powf(half - 1.0) * s_hi.powf(-half) * (-s_hi).exp();
    // lower tail: with s = r² e^{-u} / 4 the integrand is at most
    // (4/r²)^{d/2-1} s^{d/2-2} e^{-s}; for r = 0 (d = 1) drop the Gaussian
    let lower = if r == 0.0 {
        norm * 2.0 * (lo / 2.0).exp()
    } else {
        let s_lo = r * r * (-lo).exp() / 4.0;
        norm * (4.0 / (r * r)).powf(half - 1.0) * s_lo.powf(half - 2.0) * (-s_lo).exp()
    };
    Ok(Quadrature {
        value: q.value,
        error: q.error + upper + lower,
    })
}

/// Family of separated sets with a tractable `sup_{x∈B} ∫_A G_μ(x-y) dy`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SetFamily {
    /// `A = {x₁ <= 0}`, `B = {x₁ >= r}` in any dimension.
    HalfSpaces { r: f64 },
    /// Closed intervals in `d = 1`; endpoints may be infinite.
    Intervals { a: (f64, f64), b: (f64, f64) },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffDiagonalSetup {
    pub dim: usize,
    pub family: SetFamily,
    pub mu: f64,
    pub theta: f64,
}

impl OffDiagonalSetup {
    pub fn half_spaces(dim: usize, r: f64, mu: f64, theta: f64) -> Self {
        Self {
            dim,
            family: SetFamily::HalfSpaces { r },
            mu,
            theta,
        }
    }

    pub fn intervals(a: (f64, f64), b: (f64, f64), mu: f64, theta: f64) -> Self {
        Self {
            dim: 1,
            family: SetFamily::Intervals { a, b },
            mu,
            theta,
        }
    }

    /// Euclidean distance between the two sets.
    pub fn distance(&self) -> f64 {
        match self.family {
            SetFamily::HalfSpaces { r } => r,
            SetFamily::Intervals { a, b } => (b.0 - a.1).max(a.0 - b.1).max(0.0),
        }
    }

    fn validate(&self) -> Result<()> {
        check_dim(self.dim)?;
        if !(self.mu > 0.0) {
            return Err(Error::domain(format!("mu must be positive, got {}", self.mu)));
        }
        match self.family {
            SetFamily::HalfSpaces { r } if r >= 0.0 => Ok(()),
            SetFamily::Intervals { a, b } if self.dim == 1 && a.0 <= a.1 && b.0 <= b.1 => Ok(()),
            _ => Err(Error::UnsupportedSetFamily(format!("{:?} in d = {}", self.family, self.dim))),
        }
    }
}

/// `∫_A G_μ(x - y) dy` for an interval `A` in one dimension.
fn interval_mass(mu: f64, a: (f64, f64), x: f64) -> f64 {
    let s = mu.sqrt();
    let e = |z: f64| if z.is_infinite() { 0.0 } else { (-s * z).exp() };
    if x >= a.1 {
        (e(x - a.1) - e(x - a.0)) / (2.0 * mu)
    } else if x <= a.0 {
        (e(a.0 - x) - e(a.1 - x)) / (2.0 * mu)
    } else {
        (2.0 - e(x - a.0) - e(a.1 - x)) / (2.0 * mu)
    }
}

/// `‖1_A (μ-Δ)^{-1} 1_B‖_{1→1} = sup_{x∈B} ∫_A G_μ(x - y) dy`.
///
/// Half-lines and intervals use closed forms; half-spaces with `d >= 2` use
/// the Laplace transform of the heat mass `½ erfc(r / (2√t))` that crosses
/// a hyperplane (the transverse directions integrate out).
pub fn offdiag_resolvent_exact(setup: &OffDiagonalSetup) -> Result<Quadrature> {
    setup.validate()?;
    let mu = setup.mu;
    match setup.family {
        SetFamily::HalfSpaces { r } if setup.dim == 1 => Ok(Quadrature {
            value: (-mu.sqrt() * r).exp() / (2.0 * mu),
            error: 0.0,
        }),
        SetFamily::HalfSpaces { r } => {
            let q = half_space_by_quadrature(mu, r)?;
            if q.error > OFFDIAG_CERT {
                return Err(Error::Quadrature {
                    tol: OFFDIAG_CERT,
                    estimate: q.error,
                });
            }
            Ok(q)
        }
        SetFamily::Intervals { a, b } => {
            // the mass is unimodal in x with its peak at the centre of A
            let mut candidates = vec![b.0, b.1];
            let mid = 0.5 * (a.0 + a.1);
            if mid.is_finite() && b.0 <= mid && mid <= b.1 {
                candidates.push(mid);
            }
            let value = candidates
                .into_iter()
                .filter(|x| x.is_finite())
                .map(|x| interval_mass(mu, a, x))
                .fold(0.0, f64::max);
            let value = if b.0.is_infinite() && b.1.is_infinite() {
                interval_mass(mu, a, mid)
            } else {
                value
            };
            Ok(Quadrature { value, error: 0.0 })
        }
    }
}

/// `∫₀^∞ e^{-μt} ½ erfc(r / (2√t)) dt` by quadrature in `u = ln t`.
pub fn half_space_by_quadrature(mu: f64, r: f64) -> Result<Quadrature> {
    let (lo, hi) = u_range(mu, r);
    let lo = lo.min((1e-3 * QUAD_TOL * mu).ln());
    let f = |u: f64| {
        let t = u.exp();
        t * (-mu * t).exp() * 0.5 * libm::erfc(r / (2.0 * t.sqrt()))
    };
    let q = integrate(f, lo, hi, QUAD_TOL)?;
    let upper = 0.5 * (-mu * hi.exp()).exp() / mu;
    // erfc(r e^{-u/2} / 2) increases with u, so the lower tail is at most
    // ½ e^{lo} erfc(r e^{-lo/2} / 2)
    let lower = 0.5 * lo.exp() * libm::erfc(r * (-lo / 2.0).exp() / 2.0);
    Ok(Quadrature {
        value: q.value,
        error: q.error + upper + lower,
    })
}

/// `(1-θ²)^{-d/2} (1/μ) e^{-θ√μ r}`.
pub fn prop35_bound(d: usize, mu: f64, theta: f64, r: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::domain(format!("theta must lie in (0, 1), got {theta}")));
    }
    if !(mu > 0.0) || !(r >= 0.0) {
        return Err(Error::domain(format!("need mu > 0 and r >= 0, got mu={mu}, r={r}")));
    }
    Ok((1.0 - theta * theta).powf(-(d as f64) / 2.0) / mu * (-theta * mu.sqrt() * r).exp())
}

/// The choice `θ = 1 - d/(2r√μ)`, valid for `μ > (d/(2r))²`.
pub fn remark36_theta(d: usize, mu: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || !(mu > (d as f64 / (2.0 * r)).powi(2)) {
        return Err(Error::domain(format!(
            "need r > 0 and mu > (d/(2r))², got mu={mu}, r={r}"
        )));
    }
    Ok(1.0 - d as f64 / (2.0 * r * mu.sqrt()))
}

/// `(2e/d + r√μ)^{d/2} (1/μ) e^{-r√μ}`.
pub fn remark36_bound(d: usize, mu: f64, r: f64) -> Result<f64> {
    remark36_theta(d, mu, r)?;
    let a = r * mu.sqrt();
    let df = d as f64;
    Ok((2.0 * std::f64::consts::E / df + a).powf(df / 2.0) / mu * (-a).exp())
}

/// `θ* = (1 - d/(r√μ))^{1/2}`, the approximate optimizer, for `μ > (d/r)²`.
pub fn prop35_theta_star(d: usize, mu: f64, r: f64) -> Option<f64> {
    let a = r * mu.sqrt();
    (a > d as f64).then(|| (1.0 - d as f64 / a).sqrt())
}

/// Exact minimizer of [`prop35_bound`] in θ: the positive root of
/// `a θ² + d θ - a = 0` with `a = r√μ`.
pub fn prop35_theta_opt(d: usize, mu: f64, r: f64) -> f64 {
    let a = r * mu.sqrt();
    let df = d as f64;
    if a == 0.0 {
        return 0.0;
    }
    ((df * df + 4.0 * a * a).sqrt() - df) / (2.0 * a)
}

/// The nine-point θ grid `0.1, ..., 0.9`.
pub fn theta_grid() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}
