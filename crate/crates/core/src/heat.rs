//! The semigroup `e^{-tH}`: propagation, pointwise kernels, heat trace, heat
//! content, domination by the free lattice semigroup and exponentially
//! weighted norms.
//!
//! Kernel values are matrix-exponential entries divided by `h^d`, i.e. they
//! approximate the continuum density `p_t(x, y)`.

use crate::error::{Error, Result};
use crate::grid::DomainMask;
use crate::linalg::chebyshev::ChebyshevExp;
use crate::linalg::{dot, norm};
use crate::operator::{assemble_operator, DiscreteOperator};
use crate::report::{BoundReport, GridMeta};
use crate::spectral::{grid_norm, GridNorm, SpectrumSlice};

/// Kernel values below `RESOLUTION_FACTOR * h²` are not trusted.
pub const RESOLUTION_FACTOR: f64 = 20.0;

/// Default absolute tolerance for propagation (per unit `‖v‖`).
pub const PROPAGATION_TOL: f64 = 1e-12;

/// Relative tolerance accepted on a heat-trace tail.
pub const TRACE_TAIL_TOL: f64 = 1e-8;

/// Roundoff allowance for entrywise positivity and domination.
pub const ENTRY_SLACK: f64 = 1e-12;

/// Largest admissible `|ξ| h` for weighted norms.
pub const WEIGHT_WINDOW: f64 = 0.1;

pub fn t_min(h: f64) -> f64 {
    RESOLUTION_FACTOR * h * h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Propagation {
    /// Expansion over the complete spectrum.
    Spectral,
    /// Expansion over a slice, tail bounded by `e^{-t Λ}`.
    TruncatedSpectral,
    /// Chebyshev polynomial in `H` on the full space.
    Chebyshev,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagated {
    pub values: Vec<f64>,
    /// Bound on the weighted-L2 error of `values`.
    pub error_bound: f64,
    pub method: Propagation,
}

/// `e^{-tH} v`, through the slice when its tail is small enough and by a
/// Chebyshev expansion otherwise. `tol` is relative to `‖v‖`.
pub fn semigroup_apply(
    op: &DiscreteOperator,
    spec: &SpectrumSlice,
    t: f64,
    v: &[f64],
    tol: f64,
) -> Result<Propagated> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be nonnegative, got {t}")));
    }
    if v.len() != op.dim() || spec.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: v.len(),
        });
    }
    let vnorm = grid_norm(op, v, GridNorm::L2)?;
    let full = spec.is_full();
    let tail = if full { 0.0 } else { (-t * spec.cutoff()).exp() * vnorm };
    if spec.complete_below() && tail <= tol * vnorm {
        let cell = spec.cell_volume();
        let mut out = vec![0.0; v.len()];
        for p in spec.pairs() {
            let c = (-t * p.value).exp() * dot(v, &p.vector) * cell;
            if c != 0.0 {
                for (o, f) in out.iter_mut().zip(&p.vector) {
                    *o += c * f;
                }
            }
        }
        return Ok(Propagated {
            values: out,
            error_bound: tail,
            method: if full {
                Propagation::Spectral
            } else {
                Propagation::TruncatedSpectral
            },
        });
    }
    let cheb = ChebyshevExp::new(t, 0.0, op.spectral_upper_bound().max(1.0), tol.max(1e-15));
    Ok(Propagated {
        values: cheb.apply(op, v),
        error_bound: cheb.truncation * vnorm,
        method: Propagation::Chebyshev,
    })
}

/// `e^{-tH} v` by Chebyshev expansion alone.
pub fn chebyshev_apply(op: &DiscreteOperator, t: f64, v: &[f64], tol: f64) -> Vec<f64> {
    ChebyshevExp::new(t, 0.0, op.spectral_upper_bound().max(1.0), tol).apply(op, v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelEvaluation {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub value: f64,
    /// Bound on the omitted part of the eigenfunction expansion.
    pub truncation: f64,
}

fn check_resolution(spec_h: f64, t: f64) -> Result<()> {
    let tm = t_min(spec_h);
    if t < tm * (1.0 - 1e-12) {
        return Err(Error::BelowResolution { t, t_min: tm });
    }
    Ok(())
}

/// Pointwise bound on the omitted eigenfunction terms: `φ_k(x)² <= h^{-d}`.
fn pointwise_tail(spec: &SpectrumSlice, t: f64) -> f64 {
    if spec.is_full() {
        0.0
    } else {
        (spec.dim() - spec.len()) as f64 * (-t * spec.cutoff()).exp() / spec.cell_volume()
    }
}

/// `p_t(x, y)` at the grid nodes nearest to `x` and `y`.
pub fn heat_kernel_point(
    op: &DiscreteOperator,
    spec: &SpectrumSlice,
    t: f64,
    x: &[f64],
    y: &[f64],
) -> Result<KernelEvaluation> {
    check_resolution(op.h(), t)?;
    let i = op.dof_at(x)?;
    let j = op.dof_at(y)?;
    // ordered product keeps p_t(x, y) = p_t(y, x) bit for bit
    let (lo, hi) = (i.min(j), i.max(j));
    let value = spec
        .pairs()
        .iter()
        .map(|p| (-t * p.value).exp() * p.vector[lo] * p.vector[hi])
        .sum();
    Ok(KernelEvaluation {
        t,
        x: op.coords(i),
        y: op.coords(j),
        value,
        truncation: pointwise_tail(spec, t),
    })
}

/// Kernel block `p_t(rows[a], cols[b])`, row-major, with its truncation bound.
pub fn kernel_block(
    op: &DiscreteOperator,
    spec: &SpectrumSlice,
    t: f64,
    rows: &[usize],
    cols: &[usize],
) -> Result<(Vec<f64>, f64)> {
    check_resolution(op.h(), t)?;
    let weights: Vec<f64> = spec.pairs().iter().map(|p| (-t * p.value).exp()).collect();
    let mut out = vec![0.0; rows.len() * cols.len()];
    for (a, &i) in rows.iter().enumerate() {
        for (b, &j) in cols.iter().enumerate() {
            let (lo, hi) = (i.min(j), i.max(j));
            out[a * cols.len() + b] = spec
                .pairs()
                .iter()
                .zip(&weights)
                .map(|(p, w)| w * p.vector[lo] * p.vector[hi])
                .sum();
        }
    }
    Ok((out, pointwise_tail(spec, t)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// `Z(t) = Σ e^{-tλ_k}`; the tail is at most `(dim - K) e^{-tΛ}`.
pub fn heat_trace(spec: &SpectrumSlice, t: f64) -> Result<HeatValue> {
    if !(t > 0.0) {
        return Err(Error::domain(format!("heat trace needs t > 0, got {t}")));
    }
    let value: f64 = spec.pairs().iter().map(|p| (-t * p.value).exp()).sum();
    let tail_bound = if spec.is_full() {
        0.0
    } else {
        (spec.dim() - spec.len()) as f64 * (-t * spec.cutoff()).exp()
    };
    if !spec.complete_below() || tail_bound > TRACE_TAIL_TOL * value {
        return Err(Error::UncertifiedTail {
            bound: tail_bound,
            tol: TRACE_TAIL_TOL * value,
        });
    }
    Ok(HeatValue { value, tail_bound })
}

/// `Q(t) = ‖e^{-tH} 1‖₁`.
pub fn heat_content(op: &DiscreteOperator, spec: &SpectrumSlice, t: f64) -> Result<HeatValue> {
    let ones = vec![1.0; op.dim()];
    let p = semigroup_apply(op, spec, t, &ones, PROPAGATION_TOL)?;
    let value = grid_norm(op, &p.values, GridNorm::L1)?;
    // Cauchy-Schwarz turns the L2 error into an L1 error
    let tail_bound = op.mask().volume().sqrt() * p.error_bound;
    Ok(HeatValue { value, tail_bound })
}

/// Columns of `e^{-tH}` (plain matrix entries) for the given DOFs.
fn exp_columns(op: &DiscreteOperator, t: f64, cols: &[usize]) -> Vec<Vec<f64>> {
    let cheb = ChebyshevExp::new(t, 0.0, op.spectral_upper_bound().max(1.0), 1e-15);
    cols.iter()
        .map(|&j| {
            let mut e = vec![0.0; op.dim()];
            e[j] = 1.0;
            cheb.apply(op, &e)
        })
        .collect()
}

/// Entrywise `0 <= e^{-tH} <= e^{-tH_free}` where `free_op` is the `V = 0`
/// operator on a padded full box with the same spacing.
pub fn domination_check(op: &DiscreteOperator, free_op: &DiscreteOperator, t: f64) -> Result<BoundReport> {
    let g = op.grid();
    let fg = free_op.grid();
    let aligned = g.dim() == fg.dim()
        && (g.h() - fg.h()).abs() <= 1e-12 * g.h()
        && (0..g.dim()).all(|a| {
            let shift = (g.lo()[a] - fg.lo()[a]) / g.h();
            (shift - shift.round()).abs() < 1e-9
        });
    if !aligned {
        return Err(Error::GridMismatch("operator", "free operator"));
    }
    let required = 6.0 * t.sqrt();
    let mut margin = f64::INFINITY;
    let mut map = Vec::with_capacity(op.dim());
    for i in 0..op.dim() {
        let x = op.coords(i);
        for a in 0..g.dim() {
            margin = margin.min(x[a] - fg.lo()[a]).min(fg.hi()[a] - x[a]);
        }
        let j = free_op
            .dof_at(&x)
            .map_err(|_| Error::InsufficientPadding { margin: 0.0, required })?;
        map.push(j);
    }
    if margin < required {
        return Err(Error::InsufficientPadding { margin, required });
    }

    let cols: Vec<usize> = (0..op.dim()).collect();
    let free_cols: Vec<usize> = map.clone();
    let p = exp_columns(op, t, &cols);
    let f = exp_columns(free_op, t, &free_cols);
    let mut max_excess = f64::NEG_INFINITY;
    let mut min_entry = f64::INFINITY;
    let mut max_mass_ratio: f64 = 0.0;
    for j in 0..op.dim() {
        let mut mass = 0.0;
        let mut free_mass = 0.0;
        for i in 0..op.dim() {
            let pij = p[j][i];
            let fij = f[j][map[i]];
            max_excess = max_excess.max(pij - fij);
            min_entry = min_entry.min(pij);
            mass += pij;
        }
        free_mass += f[j].iter().sum::<f64>();
        max_mass_ratio = max_mass_ratio.max(mass / free_mass);
    }
    let mut rep = BoundReport::new(
        "domination",
        "e^{-tH}_{ij} - e^{-tH_free}_{ij} <= 0 entrywise",
        max_excess,
        ENTRY_SLACK,
        1.0,
    )
    .param("t", t)
    .param("min_entry", min_entry)
    .param("max_column_mass_ratio", max_mass_ratio)
    .with_grid(GridMeta {
        dim: g.dim(),
        h: g.h(),
        dof: op.dim(),
    });
    if min_entry < -ENTRY_SLACK {
        rep = rep.fail_with(format!("negative kernel entry {min_entry:e}"));
    }
    Ok(rep)
}

/// `V = 0` operator on the full box around `op`, padded so that every DOF of
/// `op` is at least `6 sqrt(t)` away from the outer boundary.
pub fn padded_free_operator(op: &DiscreteOperator, t: f64) -> Result<DiscreteOperator> {
    let g = op.grid();
    let cells = ((6.0 * t.sqrt()) / g.h()).ceil() as usize + 1;
    let padded = g.padded(cells);
    let mask = DomainMask::full(padded.clone())?;
    assemble_operator(&mask, &crate::grid::PotentialField::zero(&padded))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedNorm {
    /// `‖D_ξ e^{-tH} D_ξ^{-1}‖_{2→2}`.
    pub norm: f64,
    /// `e^{t|ξ|² - E₀ t}`.
    pub continuum_bound: f64,
    /// `e^{t w(ξ,h) - E₀ t}` with `w = Σ_a 2(cosh(ξ_a h) - 1)/h²`.
    pub discrete_bound: f64,
    pub e0: f64,
}

/// Lattice symbol of the exponential weight, `Σ_a 2(cosh(ξ_a h) - 1)/h²`.
pub fn weight_symbol(xi: &[f64], h: f64) -> f64 {
    xi.iter()
        .map(|&x| 2.0 * ((x * h).cosh() - 1.0) / (h * h))
        .sum()
}

/// Operator norm of the conjugated semigroup by power iteration on `AᵀA`.
pub fn weighted_norm(op: &DiscreteOperator, spec: &SpectrumSlice, t: f64, xi: &[f64]) -> Result<WeightedNorm> {
    let h = op.h();
    let xin = norm(xi);
    if xi.len() != op.space_dim() {
        return Err(Error::DimensionMismatch {
            expected: op.space_dim(),
            got: xi.len(),
        });
    }
    if xin * h > WEIGHT_WINDOW {
        return Err(Error::WeightWindow { value: xin * h });
    }
    let e0 = spec
        .lowest()
        .ok_or_else(|| Error::domain("empty spectrum slice"))?
        .value;
    let w: Vec<f64> = (0..op.dim())
        .map(|i| {
            let x = op.coords(i);
            dot(&x, xi).exp()
        })
        .collect();
    let apply = |v: &[f64]| -> Result<Vec<f64>> {
        Ok(semigroup_apply(op, spec, t, v, 1e-14)?.values)
    };
    let mut v = vec![1.0; op.dim()];
    let vn = norm(&v);
    v.iter_mut().for_each(|x| *x /= vn);
    let mut sigma2 = 0.0;
    for _ in 0..1000 {
        // A v = D e^{-tH} D^{-1} v, then A^T (A v) = D^{-1} e^{-tH} D (A v)
        let u: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a / b).collect();
        let mut av = apply(&u)?;
        av.iter_mut().zip(&w).for_each(|(a, b)| *a *= b);
        let mut z: Vec<f64> = av.iter().zip(&w).map(|(a, b)| a * b).collect();
        z = apply(&z)?;
        z.iter_mut().zip(&w).for_each(|(a, b)| *a /= b);
        let next = norm(&z);
        if next == 0.0 {
            break;
        }
        z.iter_mut().for_each(|x| *x /= next);
        let done = (next - sigma2).abs() <= 1e-12 * next;
        sigma2 = next;
        v = z;
        if done {
            break;
        }
    }
    Ok(WeightedNorm {
        norm: sigma2.sqrt(),
        continuum_bound: (t * xin * xin - e0 * t).exp(),
        discrete_bound: (t * weight_symbol(xi, h) - e0 * t).exp(),
        e0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_mask, GridSpec, PotentialField, Shape, ShapeOp};
    use crate::spectral::{eigensolve_lowest, SliceRequest};
    use std::f64::consts::PI;

    fn interval(n: usize) -> (DiscreteOperator, SpectrumSlice) {
        let g = GridSpec::unit(1, n).unwrap();
        let m = build_mask(&g, &[ShapeOp::union(Shape::interval(0.0, 1.0))]).unwrap();
        let op = assemble_operator(&m, &PotentialField::zero(&g)).unwrap();
        let s = eigensolve_lowest(&op, SliceRequest::Full).unwrap();
        (op, s)
    }

    fn series_trace(t: f64) -> f64 {
        (1..200).map(|k| (-t * (k as f64 * PI).powi(2)).exp()).sum()
    }

    fn series_content(t: f64) -> f64 {
        (1..400)
            .step_by(2)
            .map(|k| {
                let k = k as f64;
                8.0 / (k * PI).powi(2) * (-t * (k * PI).powi(2)).exp()
            })
            .sum()
    }

    fn series_kernel(t: f64, x: f64, y: f64) -> f64 {
        (1..400)
            .map(|k| {
                let k = k as f64;
                2.0 * (k * PI * x).sin() * (k * PI * y).sin() * (-t * (k * PI).powi(2)).exp()
            })
            .sum()
    }

    #[test]
    fn interval_kernel_trace_and_content() {
        let (op, s) = interval(400);
        let p = heat_kernel_point(&op, &s, 0.1, &[0.5], &[0.5]).unwrap();
        assert!((p.value - series_kernel(0.1, 0.5, 0.5)).abs() < 1e-4, "{}", p.value);
        assert!((p.value - 0.7457).abs() < 1e-3);
        let z = heat_trace(&s, 1.0 / 30.0).unwrap();
        assert!((z.value - series_trace(1.0 / 30.0)).abs() < 2e-3, "{}", z.value);
        let q = heat_content(&op, &s, 0.1).unwrap();
        assert!((q.value - series_content(0.1)).abs() < 1e-4, "{}", q.value);
        assert!((q.value - 0.30214).abs() < 2e-4);
    }

    #[test]
    fn kernel_symmetry_and_resolution_limit() {
        let (op, s) = interval(100);
        let a = heat_kernel_point(&op, &s, 0.05, &[0.2], &[0.7]).unwrap();
        let b = heat_kernel_point(&op, &s, 0.05, &[0.7], &[0.2]).unwrap();
        assert_eq!(a.value, b.value);
        assert!(matches!(
            heat_kernel_point(&op, &s, 1e-4, &[0.5], &[0.5]),
            Err(Error::BelowResolution { .. })
        ));
    }

    #[test]
    fn long_time_kernel_approaches_ground_state() {
        let (op, s) = interval(200);
        let g = &s.pairs()[0];
        let (x, y) = (0.3, 0.6);
        let p = heat_kernel_point(&op, &s, 2.0, &[x], &[y]).unwrap();
        let i = op.dof_at(&[x]).unwrap();
        let j = op.dof_at(&[y]).unwrap();
        let lhs = (g.value * 2.0).exp() * p.value;
        assert!((lhs - g.vector[i] * g.vector[j]).abs() < 1e-6);
    }

    #[test]
    fn semigroup_law_and_eigenvector() {
        let (op, s) = interval(60);
        let v: Vec<f64> = (0..op.dim()).map(|i| (i as f64 * 0.3).cos().abs()).collect();
        let a = semigroup_apply(&op, &s, 0.03, &v, 1e-13).unwrap();
        let b = semigroup_apply(&op, &s, 0.02, &a.values, 1e-13).unwrap();
        let c = semigroup_apply(&op, &s, 0.05, &v, 1e-13).unwrap();
        for (x, y) in b.values.iter().zip(&c.values) {
            assert!((x - y).abs() <= 1e-9 * y.abs().max(1e-3));
        }
        let phi = &s.pairs()[0];
        let e = semigroup_apply(&op, &s, 0.1, &phi.vector, 1e-13).unwrap();
        for (x, y) in e.values.iter().zip(&phi.vector) {
            assert!((x - (-0.1 * phi.value).exp() * y).abs() < 1e-12);
        }
    }

    #[test]
    fn chebyshev_matches_spectral() {
        let (op, s) = interval(80);
        let v: Vec<f64> = (0..op.dim()).map(|i| ((i * 37) % 11) as f64).collect();
        for t in [1e-3, 0.02, 0.5] {
            let a = semigroup_apply(&op, &s, t, &v, 1e-13).unwrap();
            let b = chebyshev_apply(&op, t, &v, 1e-14);
            let err = a.values.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(err < 1e-11, "t={t} err={err}");
        }
    }

    #[test]
    fn trace_identity_with_diagonal() {
        let (op, s) = interval(50);
        let t = 0.01;
        let cols: Vec<usize> = (0..op.dim()).collect();
        let diag: f64 = exp_columns(&op, t, &cols)
            .iter()
            .enumerate()
            .map(|(j, c)| c[j])
            .sum();
        let z = heat_trace(&s, t).unwrap().value;
        assert!((z - diag).abs() < 1e-10 * z);
    }

    #[test]
    fn single_dof_trace() {
        let g = GridSpec::unit(1, 2).unwrap();
        let m = DomainMask::full(g.clone()).unwrap();
        let op = assemble_operator(&m, &PotentialField::constant(&g, 2.0).unwrap()).unwrap();
        let s = eigensolve_lowest(&op, SliceRequest::Full).unwrap();
        let z = heat_trace(&s, 0.3).unwrap().value;
        assert!((z - (-0.3f64 * 10.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn truncated_slice_tail_is_reported() {
        let (op, _) = interval(100);
        let s = eigensolve_lowest(&op, SliceRequest::Threshold(1000.0)).unwrap();
        assert!(heat_trace(&s, 1e-4).is_err());
        let z = heat_trace(&s, 0.5).unwrap();
        assert!(z.tail_bound < 1e-100);
    }

    #[test]
    fn domination_with_spike() {
        let g = GridSpec::unit(1, 40).unwrap();
        let m = build_mask(&g, &[ShapeOp::union(Shape::interval(0.0, 1.0))]).unwrap();
        let v = PotentialField::from_fn(&g, |x| if (x[0] - 0.5).abs() < 0.03 { 1e6 } else { 0.0 }).unwrap();
        let op = assemble_operator(&m, &v).unwrap();
        let t = 0.01;
        let free = padded_free_operator(&op, t).unwrap();
        let rep = domination_check(&op, &free, t).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.params["max_column_mass_ratio"] < 1.0);
        // no padding at all is rejected
        let tight = assemble_operator(&DomainMask::full(g.clone()).unwrap(), &PotentialField::zero(&g)).unwrap();
        assert!(matches!(
            domination_check(&op, &tight, t),
            Err(Error::InsufficientPadding { .. })
        ));
    }

    #[test]
    fn weighted_norm_bounds() {
        let (op, s) = interval(100);
        let n0 = weighted_norm(&op, &s, 0.1, &[0.0]).unwrap();
        assert!((n0.norm - (-0.1 * n0.e0).exp()).abs() < 1e-10);
        let n1 = weighted_norm(&op, &s, 0.1, &[1.0]).unwrap();
        assert!(n1.norm <= n1.discrete_bound * (1.0 + 1e-10));
        assert!((weight_symbol(&[1.0], 1e-3) - 1.0).abs() < 1e-6);
        let a = weighted_norm(&op, &s, 0.05, &[1.0]).unwrap().norm;
        assert!(n1.norm <= a * a * (1.0 + 1e-9));
        assert!(matches!(
            weighted_norm(&op, &s, 0.1, &[20.0]),
            Err(Error::WeightWindow { .. })
        ));
    }
}
