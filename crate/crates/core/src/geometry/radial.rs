//! Ground-state energies of unit balls via the radial equation
//! `u'' + (d-1)/ρ u' + E u = 0`, `u(0) = 1`, `u'(0) = 0`, `u(1) = 0`.

use crate::error::{Error, Result};
use crate::report::BoundReport;

const STEP: f64 = 1e-5;

/// `u(1)` for trial energy `e`, by RK4 from a series start at `ρ = STEP`.
fn shoot(d: usize, e: f64) -> f64 {
    let k = (d - 1) as f64;
    let rhs = |rho: f64, u: f64, v: f64| (v, -k / rho * v - e * u);
    let mut rho = STEP;
    let mut u = 1.0 - e * rho * rho / (2.0 * d as f64);
    let mut v = -e * rho / d as f64;
    let steps = ((1.0 - STEP) / STEP).round() as usize;
    let h = (1.0 - STEP) / steps as f64;
    for _ in 0..steps {
        let (a1, b1) = rhs(rho, u, v);
        let (a2, b2) = rhs(rho + h / 2.0, u + h / 2.0 * a1, v + h / 2.0 * b1);
        let (a3, b3) = rhs(rho + h / 2.0, u + h / 2.0 * a2, v + h / 2.0 * b2);
        let (a4, b4) = rhs(rho + h, u + h * a3, v + h * b3);
        u += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        v += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        rho += h;
    }
    u
}

/// `E_{0,d}`, the Dirichlet ground-state energy of the unit ball in `ℝ^d`.
pub fn ball_ground_energy(d: usize) -> Result<f64> {
    if !(1..=3).contains(&d) {
        return Err(Error::domain(format!("ball energies are available for d in 1..=3, got {d}")));
    }
    // the second radial eigenvalue exceeds 12 for d <= 3
    let (mut lo, mut hi) = (1.0, 12.0);
    let f_lo = shoot(d, lo);
    debug_assert!(f_lo > 0.0 && shoot(d, hi) < 0.0);
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if shoot(d, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `E_{0,d} <= (d+1)(d+2)/2`.
pub fn ball_energy_report(d: usize) -> Result<BoundReport> {
    let e = ball_ground_energy(d)?;
    let bound = 0.5 * ((d + 1) * (d + 2)) as f64;
    Ok(BoundReport::new("lemma42", "E0 of unit ball <= (d+1)(d+2)/2", e, bound, 1.0).param("d", d as f64))
}
