//! Grid-scale versions of the localization constructions: local ground-energy
//! maps, the sets `F_r(t)`, `U_s(F_r)`, `G_r(t)`, the cutoff `ξ` and the
//! localization identity `(H_U - λ)(ξφ) = -2∇ξ·∇φ - (Δξ)φ`.
//!
//! Node sets carry their own (padded) grid so dilations are never clipped by
//! the bounding box; sets on different grids are compared by coordinates.

mod mollifier;
mod radial;

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;

pub use mollifier::{mollifier_build, mollifier_reports, rho0_norms, Mollifier, DEFAULT_SMOOTHING, MAX_SMOOTHING};
pub use radial::{ball_energy_report, ball_ground_energy};

use crate::bounds::omega_d;
use crate::error::{Error, Result};
use crate::grid::{DomainMask, GridSpec};
use crate::operator::{restrict_to_open_set, DiscreteOperator};
use crate::report::{BoundReport, GridMeta};
use crate::spectral::{ground_energy, EigenPair};

/// Smallest admissible energy-map radius in cells.
pub const MIN_RADIUS_CELLS: f64 = 3.0;
/// Smallest admissible cutoff radius in cells.
pub const MIN_CUTOFF_CELLS: f64 = 10.0;
/// Default constant in the localization residual tolerance.
pub const DEFAULT_C_LOC: f64 = 10.0;

/// `1 + 5h/r`, the discretization allowance of the geometric checks.
pub fn h_slack(h: f64, r: f64) -> f64 {
    1.0 + 5.0 * h / r
}

fn meta(op: &DiscreteOperator) -> GridMeta {
    GridMeta {
        dim: op.space_dim(),
        h: op.h(),
        dof: op.dim(),
    }
}

/// Lattice offsets `k` with `|k| h < radius` (or `<=` when `closed`).
fn stencil(dim: usize, h: f64, radius: f64, closed: bool) -> Vec<Vec<i64>> {
    let m = (radius / h).floor() as i64;
    let lim = (radius / h).powi(2);
    let inside = |q: f64| if closed { q <= lim * (1.0 + 1e-12) } else { q < lim * (1.0 - 1e-12) };
    let mut out = Vec::new();
    let mut k = vec![-m; dim];
    loop {
        let q: f64 = k.iter().map(|&v| (v * v) as f64).sum();
        if inside(q) {
            out.push(k.clone());
        }
        let mut a = 0;
        loop {
            if a == dim {
                return out;
            }
            k[a] += 1;
            if k[a] <= m {
                break;
            }
            k[a] = -m;
            a += 1;
        }
    }
}

fn shift(grid: &GridSpec, idx: &[usize], k: &[i64]) -> Option<usize> {
    let mut out = Vec::with_capacity(idx.len());
    for a in 0..idx.len() {
        let v = idx[a] as i64 + k[a];
        if v < 0 || v > grid.intervals()[a] as i64 {
            return None;
        }
        out.push(v as usize);
    }
    Some(grid.flat_index(&out))
}

/// A set of lattice nodes (possibly empty, possibly outside the domain).
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    grid: GridSpec,
    members: Vec<bool>,
}

impl NodeSet {
    pub fn from_members(grid: GridSpec, members: Vec<bool>) -> Result<Self> {
        if members.len() != grid.node_count() {
            return Err(Error::DimensionMismatch {
                expected: grid.node_count(),
                got: members.len(),
            });
        }
        Ok(Self { grid, members })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }

    /// Cell count times `h^d`.
    pub fn volume(&self) -> f64 {
        self.count() as f64 * self.grid.cell_volume()
    }

    /// Membership of the node nearest to `x`; points off the grid are outside.
    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.grid.nearest_node(x).is_some_and(|n| self.members[n])
    }

    /// Union of balls of radius `s` around members (open, or closed), on a
    /// grid padded far enough that nothing is clipped.
    pub fn dilate(&self, s: f64, closed: bool) -> NodeSet {
        let h = self.grid.h();
        let cells = (s / h).ceil() as usize + 1;
        let grid = self.grid.padded(cells);
        let mut members = vec![false; grid.node_count()];
        let offsets = stencil(grid.dim(), h, s, closed);
        for n in (0..self.members.len()).filter(|&n| self.members[n]) {
            let idx: Vec<usize> = self.grid.multi_index(n).iter().map(|i| i + cells).collect();
            for k in &offsets {
                if let Some(m) = shift(&grid, &idx, k) {
                    members[m] = true;
                }
            }
        }
        NodeSet { grid, members }
    }

    pub fn complement(&self) -> NodeSet {
        NodeSet {
            grid: self.grid.clone(),
            members: self.members.iter().map(|m| !m).collect(),
        }
    }

    /// Every member of `self` is a member of `other` (compared by position).
    pub fn is_subset_of(&self, other: &NodeSet) -> bool {
        (0..self.members.len())
            .filter(|&n| self.members[n])
            .all(|n| other.contains_point(&self.grid.coords(n)))
    }
}

/// `e(x) = E₀(H restricted to B(x,r) ∩ Ω)` on a grid padded by `r`; `+∞`
/// where the ball misses the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyField {
    pub grid: GridSpec,
    pub r: f64,
    pub values: Vec<f64>,
}

impl EnergyField {
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_finite(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `e` at the node nearest to `x`.
    pub fn at(&self, x: &[f64]) -> Option<f64> {
        self.grid.nearest_node(x).map(|n| self.values[n])
    }
}

/// Ball energies keyed by centre (lattice index relative to the operator
/// grid) and radius. Only valid for one operator.
#[derive(Debug, Default)]
pub struct EnergyCache {
    map: Mutex<HashMap<(Vec<i64>, u64), f64>>,
}

impl EnergyCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn local_energy_map(op: &DiscreteOperator, r: f64) -> Result<EnergyField> {
    local_energy_map_cached(op, r, &EnergyCache::new())
}

pub fn local_energy_map_cached(op: &DiscreteOperator, r: f64, cache: &EnergyCache) -> Result<EnergyField> {
    let h = op.h();
    if !(r >= MIN_RADIUS_CELLS * h * (1.0 - 1e-12)) {
        return Err(Error::RadiusTooSmall { r, h });
    }
    let base = op.grid();
    let pad = (r / h).ceil() as usize + 1;
    let grid = base.padded(pad);
    let offsets = stencil(grid.dim(), h, r, false);
    let values = (0..grid.node_count())
        .into_par_iter()
        .map(|n| {
            let centre: Vec<i64> = grid
                .multi_index(n)
                .iter()
                .map(|&i| i as i64 - pad as i64)
                .collect();
            let key = (centre.clone(), r.to_bits());
            if let Some(&v) = cache.map.lock().expect("cache lock").get(&key) {
                return Ok(v);
            }
            let mut dofs: Vec<usize> = offsets
                .iter()
                .filter_map(|k| {
                    let mut idx = Vec::with_capacity(k.len());
                    for a in 0..k.len() {
                        let v = centre[a] + k[a];
                        if v < 0 || v > base.intervals()[a] as i64 {
                            return None;
                        }
                        idx.push(v as usize);
                    }
                    op.dof_of(base.flat_index(&idx))
                })
                .collect();
            let e = if dofs.is_empty() {
                f64::INFINITY
            } else {
                dofs.sort_unstable();
                ground_energy(&op.restrict_to_dofs(&dofs))?
            };
            cache.map.lock().expect("cache lock").insert(key, e);
            Ok(e)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(EnergyField { grid, r, values })
}

/// `F_r(t)`, `U_s(F_r(t))` and the conservative `G_r(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SublevelSets {
    pub f: NodeSet,
    pub u_s: NodeSet,
    /// Nodes at distance `> r + h` from `F`: the complement of the closed
    /// `r`-neighbourhood, shrunk by one more cell layer because `F` is only
    /// known at nodes.
    pub g: NodeSet,
}

pub fn sublevel_sets(field: &EnergyField, t: f64, s: f64) -> Result<SublevelSets> {
    if !(t > 0.0 && s > 0.0) {
        return Err(Error::domain(format!("need t > 0 and s > 0, got t={t}, s={s}")));
    }
    let f = NodeSet {
        grid: field.grid.clone(),
        members: field.values.iter().map(|&e| e < t).collect(),
    };
    let u_s = f.dilate(s, false);
    let g = f.dilate(field.r + field.grid.h(), true).complement();
    Ok(SublevelSets { f, u_s, g })
}

/// `|U_s(F_r(t))| <= ω_d (2r+s)^d N_t(H)` with slack `1 + 5h/r`.
pub fn lemma41_check(f: &NodeSet, r: f64, s: f64, n_t: usize) -> BoundReport {
    let d = f.grid.dim();
    let lhs = f.dilate(s, false).volume();
    let rhs = omega_d(d) * (2.0 * r + s).powi(d as i32) * n_t as f64;
    BoundReport::new("lemma41", "|U_s(F_r(t))| <= omega_d (2r+s)^d N_t", lhs, rhs, h_slack(f.grid.h(), r))
        .param("r", r)
        .param("s", s)
        .param("N_t", n_t as f64)
        .param("F_cells", f.count() as f64)
}

/// `E₀(H_{G ∩ Ω}) >= t - E_{0,d}/r²`, cast with the bound as LHS and the
/// measured energy as RHS; slack `1 + 5h/r`.
pub fn lemma42_check(g: &NodeSet, op: &DiscreteOperator, t: f64, r: f64, e0d: f64) -> Result<BoundReport> {
    let bound = t - e0d / (r * r);
    let label = "t - E0d/r^2 <= E0(H_G)";
    let slack = h_slack(op.h(), r);
    let restricted = op.restrict_where(|i| g.contains_point(&op.coords(i)));
    let rep = match restricted {
        None => BoundReport::new("lemma42", label, bound, f64::INFINITY, slack)
            .with_note("G meets no cell of the domain: vacuous"),
        Some(sub) => {
            let e0 = ground_energy(&sub)?;
            BoundReport::new("lemma42", label, bound, e0, slack)
                .param("G_dof", sub.dim() as f64)
                .with_note("G excludes one cell layer beyond the closure of U_r(F)")
        }
    };
    Ok(rep
        .param("t", t)
        .param("r", r)
        .param("E0d", e0d)
        .with_grid(meta(op)))
}

/// `ξ = 1 - ρ_{r/2} * 1_{U_{3r/2}(F)}` on a grid padded around `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cutoff {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub r: f64,
    /// Max Euclidean norm of the centred-difference gradient.
    pub grad_inf: f64,
    /// Max modulus of the discrete Laplacian.
    pub lap_inf: f64,
    /// `‖∇ρ‖₁ / r`.
    pub grad_bound: f64,
    /// `2 ‖Δρ‖₁ / r²`.
    pub lap_bound: f64,
    /// Nodes of `U_r(F)` where `ξ != 0`.
    pub nonzero_on_inner: usize,
    /// Nodes outside `U_{2r}(F)` where `ξ != 1`.
    pub not_one_outside: usize,
    /// Discrete mass of the sampled kernel before normalization.
    pub raw_kernel_mass: f64,
}

impl Cutoff {
    /// `ξ` at the node nearest to `x`; 1 off the grid.
    pub fn at(&self, x: &[f64]) -> f64 {
        self.grid.nearest_node(x).map_or(1.0, |n| self.values[n])
    }
}

pub fn cutoff_build(f: &NodeSet, r: f64, moll: &Mollifier) -> Result<Cutoff> {
    let h = f.grid.h();
    let d = f.grid.dim();
    if d != moll.d {
        return Err(Error::domain(format!("mollifier dimension {} does not match grid {d}", moll.d)));
    }
    if !(r >= MIN_CUTOFF_CELLS * h * (1.0 - 1e-12)) {
        return Err(Error::RadiusTooSmall { r, h });
    }
    let u = f.dilate(1.5 * r, false);
    let extra = (0.5 * r / h).ceil() as usize + 2;
    let grid = u.grid.padded(extra);
    let mut in_u = vec![false; grid.node_count()];
    for n in (0..u.members.len()).filter(|&n| u.members[n]) {
        let idx: Vec<usize> = u.grid.multi_index(n).iter().map(|i| i + extra).collect();
        in_u[grid.flat_index(&idx)] = true;
    }

    // kernel of ρ_{r/2}, sampled and renormalized to unit discrete mass
    let offsets = stencil(d, h, 0.5 * r, false);
    let mut by_radius: HashMap<i64, f64> = HashMap::new();
    let scale = (2.0 / r).powi(d as i32);
    let mut weights = Vec::with_capacity(offsets.len());
    for k in &offsets {
        let q: i64 = k.iter().map(|v| v * v).sum();
        let w = match by_radius.get(&q) {
            Some(&w) => w,
            None => {
                let w = scale * moll.eval(2.0 * (q as f64).sqrt() * h / r)?;
                by_radius.insert(q, w);
                w
            }
        };
        weights.push(w);
    }
    let cell = grid.cell_volume();
    let raw: f64 = weights.iter().sum::<f64>() * cell;
    for w in &mut weights {
        *w *= cell / raw;
    }

    let values: Vec<f64> = (0..grid.node_count())
        .into_par_iter()
        .map(|n| {
            let idx = grid.multi_index(n);
            let conv: f64 = offsets
                .iter()
                .zip(&weights)
                .filter_map(|(k, &w)| shift(&grid, &idx, k).map(|m| if in_u[m] { w } else { 0.0 }))
                .sum();
            1.0 - conv
        })
        .collect();

    let mut grad_inf: f64 = 0.0;
    let mut lap_inf: f64 = 0.0;
    for n in 0..grid.node_count() {
        let idx = grid.multi_index(n);
        if grid.is_boundary_node(&idx) {
            continue;
        }
        let (mut g2, mut lap) = (0.0, 0.0);
        for a in 0..d {
            let st = grid.stride(a);
            let (p, m) = (values[n + st], values[n - st]);
            g2 += ((p - m) / (2.0 * h)).powi(2);
            lap += (p - 2.0 * values[n] + m) / (h * h);
        }
        grad_inf = grad_inf.max(g2.sqrt());
        lap_inf = lap_inf.max(lap.abs());
    }

    let inner = f.dilate(r, false);
    let outer = f.dilate(2.0 * r, false);
    let tol = 1e-12;
    let mut nonzero_on_inner = 0;
    let mut not_one_outside = 0;
    for n in 0..grid.node_count() {
        let x = grid.coords(n);
        if inner.contains_point(&x) && values[n].abs() > tol {
            nonzero_on_inner += 1;
        }
        if !outer.contains_point(&x) && (values[n] - 1.0).abs() > tol {
            not_one_outside += 1;
        }
    }
    Ok(Cutoff {
        grid,
        values,
        r,
        grad_inf,
        lap_inf,
        grad_bound: moll.grad_l1 / r,
        lap_bound: 2.0 * moll.lap_l1 / (r * r),
        nonzero_on_inner,
        not_one_outside,
        raw_kernel_mass: raw,
    })
}

/// Derivative and support checks of a built cutoff.
pub fn cutoff_reports(c: &Cutoff) -> Vec<BoundReport> {
    let slack = h_slack(c.grid.h(), c.r);
    let tag = |rep: BoundReport| rep.param("r", c.r);
    vec![
        tag(BoundReport::new("lemma44", "||grad xi||_inf <= ||grad rho||_1 / r", c.grad_inf, c.grad_bound, slack)),
        tag(BoundReport::new("lemma44", "||lap xi||_inf <= 2 ||lap rho||_1 / r^2", c.lap_inf, c.lap_bound, slack)),
        tag(BoundReport::new("lemma44", "xi = 0 on U_r(F)", c.nonzero_on_inner as f64, 0.0, 1.0)),
        tag(BoundReport::new("lemma44", "xi = 1 outside U_2r(F)", c.not_one_outside as f64, 0.0, 1.0)),
    ]
}

/// Finite differences used for `∇ξ·∇φ` in the localization identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeScheme {
    /// One-sided `D⁺`: first-order consistent.
    Forward,
    /// Centred `D⁰`: second-order consistent.
    Centered,
}

/// `‖(H_U - λ)(ξφ) - (-2∇_hξ·∇_hφ - (Δ_hξ)φ)‖₂ <= C_loc h ‖φ‖₂ (1+λ)`.
///
/// `xi` holds `ξ` at every node of the operator grid; it must vanish on the
/// cells of the domain outside `u`.
pub fn localization_residual(
    op: &DiscreteOperator,
    pair: &EigenPair,
    u: &DomainMask,
    xi: &[f64],
    scheme: DerivativeScheme,
    c_loc: f64,
) -> Result<BoundReport> {
    let grid = op.grid();
    if xi.len() != grid.node_count() {
        return Err(Error::DimensionMismatch {
            expected: grid.node_count(),
            got: xi.len(),
        });
    }
    if pair.vector.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: pair.vector.len(),
        });
    }
    let cells = (0..op.dim())
        .filter(|&i| {
            let n = op.node_of(i);
            !u.is_occupied(n) && xi[n] != 0.0
        })
        .count();
    if cells > 0 {
        return Err(Error::SupportViolated { cells });
    }
    let sub = restrict_to_open_set(op, u)?;
    let h = op.h();
    let lambda = pair.value;

    let mut phi = vec![0.0; grid.node_count()];
    for (i, &v) in pair.vector.iter().enumerate() {
        phi[op.node_of(i)] = v;
    }
    let w: Vec<f64> = (0..sub.dim())
        .map(|j| {
            let n = sub.node_of(j);
            xi[n] * phi[n]
        })
        .collect();
    let hw = sub.matvec(&w);

    let mut sq = 0.0;
    for j in 0..sub.dim() {
        let n = sub.node_of(j);
        let lhs = hw[j] - lambda * w[j];
        let (mut cross, mut lap) = (0.0, 0.0);
        for a in 0..grid.dim() {
            let st = grid.stride(a);
            let (p, m) = (n + st, n - st);
            cross += match scheme {
                DerivativeScheme::Forward => (xi[p] - xi[n]) * (phi[p] - phi[n]) / (h * h),
                DerivativeScheme::Centered => (xi[p] - xi[m]) * (phi[p] - phi[m]) / (4.0 * h * h),
            };
            lap += (xi[p] - 2.0 * xi[n] + xi[m]) / (h * h);
        }
        let rhs = -2.0 * cross - lap * phi[n];
        sq += (lhs - rhs).powi(2);
    }
    let cell = grid.cell_volume();
    let residual = (sq * cell).sqrt();
    let phi_norm = (pair.vector.iter().map(|v| v * v).sum::<f64>() * cell).sqrt();
    let rhs = c_loc * h * phi_norm * (1.0 + lambda);
    Ok(BoundReport::new(
        "lemma24",
        "||(H_U - l)(xi phi) + 2 grad xi.grad phi + (lap xi) phi||_2 <= C h ||phi||_2 (1+l)",
        residual,
        rhs,
        1.0,
    )
    .param("h", h)
    .param("lambda", lambda)
    .param("C_loc", c_loc)
    .with_note(match scheme {
        DerivativeScheme::Forward => "forward differences",
        DerivativeScheme::Centered => "centred differences",
    })
    .with_grid(meta(op)))
}
