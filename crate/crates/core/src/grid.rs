//! Rectilinear lattices, rasterized domains and potentials.
//!
//! A [`GridSpec`] places nodes at `lo + i h` for `i = 0..=n` on every axis.
//! Nodes on the bounding box never carry a degree of freedom, which gives the
//! one-cell Dirichlet margin. Axis 0 varies fastest in the flat node index.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EVEN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    h: f64,
    intervals: Vec<usize>,
}

impl GridSpec {
    pub fn new(dim: usize, lo: &[f64], hi: &[f64], h: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if lo.len() != dim || hi.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "box bounds must have {dim} entries"
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing {h} must be positive")));
        }
        let mut intervals = Vec::with_capacity(dim);
        for a in 0..dim {
            let len = hi[a] - lo[a];
            if !(len > 0.0) {
                return Err(Error::InvalidGrid(format!("axis {a} has empty extent")));
            }
            let n = len / h;
            let rounded = n.round();
            if rounded < 1.0 || (n - rounded).abs() > EVEN_TOL * n.max(1.0) {
                return Err(Error::InvalidGrid(format!(
                    "spacing {h} does not divide axis {a} of length {len}"
                )));
            }
            intervals.push(rounded as usize);
        }
        Ok(Self {
            dim,
            lo: lo.to_vec(),
            hi: hi.to_vec(),
            h,
            intervals,
        })
    }

    /// Unit box `[0,1]^d` with `n` intervals per axis.
    pub fn unit(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, &vec![0.0; dim], &vec![1.0; dim], 1.0 / n as f64)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    /// Number of intervals per axis.
    pub fn intervals(&self) -> &[usize] {
        &self.intervals
    }

    pub fn nodes_per_axis(&self, axis: usize) -> usize {
        self.intervals[axis] + 1
    }

    pub fn node_count(&self) -> usize {
        self.intervals.iter().map(|n| n + 1).product()
    }

    /// Volume carried by one node, `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = Vec::with_capacity(self.dim);
        for a in 0..self.dim {
            let n = self.nodes_per_axis(a);
            idx.push(flat % n);
            flat /= n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let mut flat = 0;
        let mut stride = 1;
        for a in 0..self.dim {
            flat += idx[a] * stride;
            stride *= self.nodes_per_axis(a);
        }
        flat
    }

    pub fn stride(&self, axis: usize) -> usize {
        (0..axis).map(|a| self.nodes_per_axis(a)).product()
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.lo[a] + i as f64 * self.h)
            .collect()
    }

    pub fn is_boundary_node(&self, idx: &[usize]) -> bool {
        idx.iter()
            .zip(&self.intervals)
            .any(|(&i, &n)| i == 0 || i == n)
    }

    /// Flat index of the node nearest to `x`, if `x` lies in the box.
    pub fn nearest_node(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim {
            return None;
        }
        let mut idx = Vec::with_capacity(self.dim);
        for a in 0..self.dim {
            let f = ((x[a] - self.lo[a]) / self.h).round();
            if f < 0.0 || f > self.intervals[a] as f64 {
                return None;
            }
            idx.push(f as usize);
        }
        Some(self.flat_index(&idx))
    }

    /// Same grid extended by `cells` nodes on every side.
    pub fn padded(&self, cells: usize) -> Self {
        let pad = cells as f64 * self.h;
        let mut intervals = self.intervals.clone();
        for n in &mut intervals {
            *n += 2 * cells;
        }
        Self {
            dim: self.dim,
            lo: self.lo.iter().map(|v| v - pad).collect(),
            hi: self.hi.iter().map(|v| v + pad).collect(),
            h: self.h,
            intervals,
        }
    }

    /// Same lattice geometry within tolerance (boxes and spacing agree).
    pub fn same_as(&self, other: &GridSpec) -> bool {
        self.dim == other.dim
            && self.intervals == other.intervals
            && (self.h - other.h).abs() <= 1e-12 * self.h
            && self
                .lo
                .iter()
                .zip(&other.lo)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()))
    }
}

/// Primitive sets used to describe domains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// Axis-aligned box; an interval in one dimension.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl Shape {
    pub fn interval(lo: f64, hi: f64) -> Self {
        Shape::Box {
            lo: vec![lo],
            hi: vec![hi],
        }
    }

    pub fn rect(lo: &[f64], hi: &[f64]) -> Self {
        Shape::Box {
            lo: lo.to_vec(),
            hi: hi.to_vec(),
        }
    }

    pub fn ball(center: &[f64], radius: f64) -> Self {
        Shape::Ball {
            center: center.to_vec(),
            radius,
        }
    }

    fn dim(&self) -> usize {
        match self {
            Shape::Box { lo, .. } => lo.len(),
            Shape::Ball { center, .. } => center.len(),
        }
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Shape::Box { lo, hi } => (lo.clone(), hi.clone()),
            Shape::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
        }
    }

    pub fn contains_open(&self, x: &[f64]) -> bool {
        match self {
            Shape::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, u))| *l < *v && *v < *u),
            Shape::Ball { center, radius } => dist2(x, center) < radius * radius,
        }
    }

    pub fn contains_closed(&self, x: &[f64]) -> bool {
        match self {
            Shape::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, u))| *l <= *v && *v <= *u),
            Shape::Ball { center, radius } => dist2(x, center) <= radius * radius,
        }
    }
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetOp {
    Union,
    /// Removes the closure of the shape, so the result stays open.
    Difference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeOp {
    pub op: SetOp,
    pub shape: Shape,
}

impl ShapeOp {
    pub fn union(shape: Shape) -> Self {
        Self {
            op: SetOp::Union,
            shape,
        }
    }

    pub fn difference(shape: Shape) -> Self {
        Self {
            op: SetOp::Difference,
            shape,
        }
    }
}

/// Occupancy field over the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainMask {
    grid: GridSpec,
    occupied: Vec<bool>,
}

impl DomainMask {
    /// Validates that at least one node is occupied and that no boundary
    /// node is.
    pub fn from_occupancy(grid: GridSpec, occupied: Vec<bool>) -> Result<Self> {
        if occupied.len() != grid.node_count() {
            return Err(Error::InvalidGrid(format!(
                "occupancy has {} entries, grid has {} nodes",
                occupied.len(),
                grid.node_count()
            )));
        }
        if !occupied.iter().any(|&o| o) {
            return Err(Error::EmptyMask);
        }
        if let Some(flat) = (0..occupied.len())
            .find(|&i| occupied[i] && grid.is_boundary_node(&grid.multi_index(i)))
        {
            return Err(Error::InvalidGrid(format!(
                "boundary node {:?} is occupied",
                grid.coords(flat)
            )));
        }
        Ok(Self { grid, occupied })
    }

    /// Every interior node of the grid.
    pub fn full(grid: GridSpec) -> Result<Self> {
        let occupied = (0..grid.node_count())
            .map(|i| !grid.is_boundary_node(&grid.multi_index(i)))
            .collect();
        Self::from_occupancy(grid, occupied)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupied
    }

    pub fn is_occupied(&self, flat: usize) -> bool {
        self.occupied[flat]
    }

    pub fn count(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    pub fn volume(&self) -> f64 {
        self.count() as f64 * self.grid.cell_volume()
    }

    pub fn occupied_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.occupied
            .iter()
            .enumerate()
            .filter_map(|(i, &o)| o.then_some(i))
    }

    pub fn is_subset_of(&self, other: &DomainMask) -> bool {
        self.grid.same_as(&other.grid)
            && self
                .occupied
                .iter()
                .zip(&other.occupied)
                .all(|(&a, &b)| !a || b)
    }

    /// Occupied nodes of `self` that also satisfy `keep`; `None` if empty.
    pub fn filter(&self, mut keep: impl FnMut(usize) -> bool) -> Option<DomainMask> {
        let occupied: Vec<bool> = self
            .occupied
            .iter()
            .enumerate()
            .map(|(i, &o)| o && keep(i))
            .collect();
        occupied.iter().any(|&o| o).then(|| DomainMask {
            grid: self.grid.clone(),
            occupied,
        })
    }

    /// Number of connected components under nearest-neighbour adjacency.
    pub fn components(&self) -> usize {
        let mut seen = vec![false; self.occupied.len()];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in self.occupied_indices() {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(i) = queue.pop_front() {
                for j in lattice_neighbors(&self.grid, i) {
                    if self.occupied[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        count
    }
}

/// Flat indices of the lattice neighbours of node `flat` (up to `2d`).
pub(crate) fn lattice_neighbors(grid: &GridSpec, flat: usize) -> impl Iterator<Item = usize> {
    let idx = grid.multi_index(flat);
    let mut out = Vec::with_capacity(2 * grid.dim());
    for a in 0..grid.dim() {
        let stride = grid.stride(a);
        if idx[a] > 0 {
            out.push(flat - stride);
        }
        if idx[a] < grid.intervals()[a] {
            out.push(flat + stride);
        }
    }
    out.into_iter()
}

/// Rasterizes a sequence of set operations by node-center membership.
///
/// Starts from the empty set and applies each operation in order.
pub fn build_mask(grid: &GridSpec, shapes: &[ShapeOp]) -> Result<DomainMask> {
    for (index, s) in shapes.iter().enumerate() {
        if s.shape.dim() != grid.dim() {
            return Err(Error::InvalidGrid(format!(
                "shape {index} has dimension {}, grid has {}",
                s.shape.dim(),
                grid.dim()
            )));
        }
        let (lo, hi) = s.shape.bounds();
        let slack = 1e-12 * (1.0 + grid.h());
        let outside = (0..grid.dim())
            .any(|a| lo[a] < grid.lo()[a] - slack || hi[a] > grid.hi()[a] + slack);
        if outside {
            return Err(Error::ShapeOutsideBox { index });
        }
    }
    let mut occupied = vec![false; grid.node_count()];
    for (flat, cell) in occupied.iter_mut().enumerate() {
        let idx = grid.multi_index(flat);
        if grid.is_boundary_node(&idx) {
            continue;
        }
        let x = grid.coords(flat);
        for s in shapes {
            match s.op {
                SetOp::Union => *cell |= s.shape.contains_open(&x),
                SetOp::Difference => *cell &= !s.shape.contains_closed(&x),
            }
        }
    }
    DomainMask::from_occupancy(grid.clone(), occupied)
}

/// Nonnegative potential sampled at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl PotentialField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidGrid(format!(
                "potential has {} entries, grid has {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidPotential { index, value });
        }
        Ok(Self { grid, values })
    }

    pub fn zero(grid: &GridSpec) -> Self {
        Self {
            values: vec![0.0; grid.node_count()],
            grid: grid.clone(),
        }
    }

    pub fn constant(grid: &GridSpec, c: f64) -> Result<Self> {
        Self::new(grid.clone(), vec![c; grid.node_count()])
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: &GridSpec, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.node_count()).map(|i| f(&grid.coords(i))).collect();
        Self::new(grid.clone(), values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, flat: usize) -> f64 {
        self.values[flat]
    }
}
