//! Explicit constants and right-hand sides of the L1 eigenfunction, heat
//! kernel and heat content inequalities, and the parameter pipeline behind
//! the L1 estimate.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};
use crate::freespace::free_heat_kernel;

/// `δ` of the parameter pipeline.
pub const DELTA: f64 = 16.0 / 45.0;
/// `θ` of the parameter pipeline.
pub const THETA: f64 = 0.5;

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Volume of the unit ball, `π^{d/2} / Γ(d/2 + 1)`.
pub fn omega_d(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    PI.powf(h) / libm::tgamma(h + 1.0)
}

/// Surface area of the unit sphere in `ℝ^d`, `d ω_d`.
pub fn sphere_area(d: usize) -> f64 {
    d as f64 * omega_d(d)
}

/// `c_d = 35^{d+1} d^{d/2}`.
pub fn constant_c_d(d: usize) -> f64 {
    35f64.powi(d as i32 + 1) * (d as f64).powf(d as f64 / 2.0)
}

/// `C_ε = ε^{-1/2} ln(3 + 3/ε)`.
pub fn constant_c_eps(eps: f64) -> Result<f64> {
    positive("epsilon", eps)?;
    Ok(eps.powf(-0.5) * (3.0 + 3.0 / eps).ln())
}

/// `c_d (t-λ)^{-d/2} (ln(3t/(t-λ)))^d N`.
pub fn thm11_rhs(d: usize, lambda: f64, t: f64, n: usize) -> Result<f64> {
    positive("lambda", lambda)?;
    if !(t > lambda) {
        return Err(Error::domain(format!("need t > lambda, got t={t}, lambda={lambda}")));
    }
    if n == 0 {
        return Err(Error::domain("counting function value must be at least 1"));
    }
    let df = d as f64;
    let gap = t - lambda;
    Ok(constant_c_d(d) * gap.powf(-df / 2.0) * (3.0 * t / gap).ln().powi(d as i32) * n as f64)
}

/// `(2πd/e)^{d/2} λ^{-d/2}`.
pub fn thm11_lower(d: usize, lambda: f64) -> Result<f64> {
    positive("lambda", lambda)?;
    let df = d as f64;
    Ok((2.0 * PI * df / E).powf(df / 2.0) * lambda.powf(-df / 2.0))
}

/// `c_d C_ε^d λ^{-d/2} N`.
pub fn cor13_rhs(d: usize, lambda: f64, eps: f64, n: usize) -> Result<f64> {
    positive("lambda", lambda)?;
    if n == 0 {
        return Err(Error::domain("counting function value must be at least 1"));
    }
    let df = d as f64;
    Ok(constant_c_d(d) * constant_c_eps(eps)?.powi(d as i32) * lambda.powf(-df / 2.0) * n as f64)
}

/// `(eE₀/(2πd))^{d/2} exp(-E₀t - r²/(4t))`, valid for `t >= d/(2E₀)`.
pub fn hke_rhs(d: usize, e0: f64, t: f64, r: f64) -> Result<f64> {
    positive("E0", e0)?;
    positive("t", t)?;
    let df = d as f64;
    if t < df / (2.0 * e0) * (1.0 - 1e-12) {
        return Err(Error::domain(format!(
            "envelope needs t >= d/(2 E0) = {}, got {t}",
            df / (2.0 * e0)
        )));
    }
    Ok((E * e0 / (2.0 * PI * df)).powf(df / 2.0) * (-e0 * t - r * r / (4.0 * t)).exp())
}

/// `(4πt)^{-d/2} (1 + (2e/d) E₀ t)^{d/2} exp(-E₀t - r²/(4t))`, any `t > 0`.
pub fn combined_hke_rhs(d: usize, e0: f64, t: f64, r: f64) -> Result<f64> {
    positive("t", t)?;
    if !(e0 >= 0.0) {
        return Err(Error::domain(format!("E0 must be nonnegative, got {e0}")));
    }
    let df = d as f64;
    Ok((4.0 * PI * t).powf(-df / 2.0)
        * (1.0 + 2.0 * E / df * e0 * t).powf(df / 2.0)
        * (-e0 * t - r * r / (4.0 * t)).exp())
}

/// `ε^{-d/2} e^{-(1-ε)E₀t} k_t(r)`, the domination of the kernel by a
/// damped free kernel.
pub fn thm34_rhs(d: usize, eps: f64, e0: f64, t: f64, r: f64) -> Result<f64> {
    positive("t", t)?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::domain(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    Ok(eps.powf(-(d as f64) / 2.0) * (-(1.0 - eps) * e0 * t).exp() * free_heat_kernel(d, t, r))
}

/// `(4πt)^{-d/2} e^{|ξ|² t}`, the weighted `1 → ∞` bound of the free
/// semigroup.
pub fn davies_rhs(d: usize, t: f64, xi_norm: f64) -> Result<f64> {
    positive("t", t)?;
    Ok((4.0 * PI * t).powf(-(d as f64) / 2.0) * (xi_norm * xi_norm * t).exp())
}

/// `c_d C_ε^d λ₁^{-d/2} Z²` with `Z = Z(t/(2+ε))`.
pub fn thm17_rhs(d: usize, eps: f64, lambda1: f64, z: f64) -> Result<f64> {
    positive("lambda1", lambda1)?;
    if !(z >= 0.0) {
        return Err(Error::domain(format!("heat trace must be nonnegative, got {z}")));
    }
    Ok(constant_c_d(d)
        * constant_c_eps(eps)?.powi(d as i32)
        * lambda1.powf(-(d as f64) / 2.0)
        * z
        * z)
}

/// `Z(T) e^{Tλ}`.
pub fn lemma18_rhs(z_t: f64, t: f64, lambda: f64) -> Result<f64> {
    positive("T", t)?;
    positive("lambda", lambda)?;
    Ok(z_t * (t * lambda).exp())
}

/// Default for the counting-function constant: the Berezin–Li–Yau form
/// `(1 + 2/d)^{d/2} (2π)^{-d} ω_d`. Taken from the literature, not from the
/// estimates implemented here.
pub fn liyau_default_k(d: usize) -> f64 {
    let df = d as f64;
    (1.0 + 2.0 / df).powf(df / 2.0) * (2.0 * PI).powf(-df) * omega_d(d)
}

/// `K_d vol t^{d/2}`; `K_d` must be supplied.
pub fn liyau_rhs(d: usize, vol: f64, t: f64, k_d: Option<f64>) -> Result<f64> {
    let k = k_d.ok_or_else(|| Error::config("liyau.k_d", "missing constant K_d"))?;
    positive("t", t)?;
    Ok(k * vol * t.powf(d as f64 / 2.0))
}

/// `(num, den)` in lowest terms.
fn reduce(num: u64, den: u64) -> (u64, u64) {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let g = gcd(num, den);
    (num / g, den / g)
}

/// `K_{δ,θ} = (5/4) δ (1 - θ²)` for rational `δ = p/q`, `θ = a/b`, exactly.
pub fn k_delta_theta_rational(delta: (u64, u64), theta: (u64, u64)) -> (u64, u64) {
    let (p, q) = delta;
    let (a, b) = theta;
    reduce(5 * p * (b * b - a * a), 4 * q * b * b)
}

/// Internal parameters of the L1-estimate proof for given `(d, λ, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProofParameters {
    pub d: usize,
    pub lambda: f64,
    pub t: f64,
    pub e0d: f64,
    pub delta: f64,
    pub theta: f64,
    /// `(d+1) ln(3t/(t-λ))`.
    pub c: f64,
    /// `((c² + E_{0,d}) / ((1-δ)(t-λ)))^{1/2}`.
    pub r: f64,
    /// `δ (t-λ)/t`.
    pub eps: f64,
    /// Lower bound `(1-δ)(t-λ) - E_{0,d}/r² = c²/r²` on the resolvent shift.
    pub mu_lower: f64,
    /// `(5/4) δ (1-θ²)`.
    pub k: f64,
    /// `√(2/(1-δ)) + 2`.
    pub c_delta: f64,
    /// `(7/4) c² / ((1-δ)(t-λ))`, which must dominate `r²`.
    pub r2_bound: f64,
}

impl ProofParameters {
    pub fn invariants_hold(&self) -> bool {
        let df = self.d as f64;
        self.c >= df + 1.0
            && self.r * self.r <= self.r2_bound * (1.0 + 1e-12)
            && self.eps > 0.0
            && self.eps <= 1.0
            && self.k.sqrt() * 2.0 * self.c_delta <= 4.5
    }
}

pub fn proof_parameters(d: usize, lambda: f64, t: f64, e0d: f64) -> Result<ProofParameters> {
    positive("lambda", lambda)?;
    positive("E0d", e0d)?;
    if !(t > lambda) {
        return Err(Error::domain(format!("need t > lambda, got t={t}, lambda={lambda}")));
    }
    let df = d as f64;
    let gap = t - lambda;
    let c = (df + 1.0) * (3.0 * t / gap).ln();
    let r2 = (c * c + e0d) / ((1.0 - DELTA) * gap);
    Ok(ProofParameters {
        d,
        lambda,
        t,
        e0d,
        delta: DELTA,
        theta: THETA,
        c,
        r: r2.sqrt(),
        eps: DELTA * gap / t,
        mu_lower: (1.0 - DELTA) * gap - e0d / r2,
        k: 1.25 * DELTA * (1.0 - THETA * THETA),
        c_delta: (2.0 / (1.0 - DELTA)).sqrt() + 2.0,
        r2_bound: 1.75 * c * c / ((1.0 - DELTA) * gap),
    })
}

/// The closing estimate `ω_d (5r)^d <= π^{-1/2} 35^d 2 d^{d/2}
/// (ln(3t/(t-λ)))^d (t-λ)^{-d/2}` and its three numeric ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StirlingChain {
    pub lhs: f64,
    pub rhs: f64,
    /// `2πe (7/4)/(1-δ)`, at most 49.
    pub stirling_factor: f64,
    /// `(d+1)^d` against `2 d^{d+1/2}`.
    pub power_lhs: f64,
    pub power_rhs: f64,
    /// `(11/2)² π^{-1/2} 2`, at most 35.
    pub closing_constant: f64,
}

impl StirlingChain {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + 1e-12)
            && self.stirling_factor <= 49.0
            && self.power_lhs <= self.power_rhs * (1.0 + 1e-12)
            && self.closing_constant <= 35.0
    }
}

pub fn stirling_chain(d: usize, lambda: f64, t: f64, e0d: f64) -> Result<StirlingChain> {
    let p = proof_parameters(d, lambda, t, e0d)?;
    let df = d as f64;
    let gap = t - lambda;
    Ok(StirlingChain {
        lhs: omega_d(d) * (5.0 * p.r).powi(d as i32),
        rhs: PI.powf(-0.5)
            * 35f64.powi(d as i32)
            * 2.0
            * df.powf(df / 2.0)
            * (3.0 * t / gap).ln().powi(d as i32)
            * gap.powf(-df / 2.0),
        stirling_factor: 2.0 * PI * E * 1.75 / (1.0 - DELTA),
        power_lhs: (df + 1.0).powi(d as i32),
        power_rhs: 2.0 * df.powf(df + 0.5),
        closing_constant: 5.5f64.powi(2) * PI.powf(-0.5) * 2.0,
    })
}
