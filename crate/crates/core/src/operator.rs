//! Finite-difference assembly of `H = -Δ_h + V` on a masked grid.
//!
//! Dirichlet conditions are imposed by deleting unoccupied nodes: each row
//! carries `2d/h² + V` on the diagonal and `-1/h²` for every occupied lattice
//! neighbour.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::grid::{lattice_neighbors, DomainMask, GridSpec, PotentialField};

const NO_DOF: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOperator {
    grid: GridSpec,
    mask: DomainMask,
    /// Flat lattice index of each degree of freedom, increasing.
    nodes: Vec<usize>,
    lookup: Vec<u32>,
    diag: Vec<f64>,
    potential: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

/// Assembles the operator on `mask` with potential `v`.
pub fn assemble_operator(mask: &DomainMask, v: &PotentialField) -> Result<DiscreteOperator> {
    if !mask.grid().same_as(v.grid()) {
        return Err(Error::GridMismatch("mask", "potential"));
    }
    if let Some((index, &value)) = v
        .values()
        .iter()
        .enumerate()
        .find(|(_, x)| !(x.is_finite() && **x >= 0.0))
    {
        return Err(Error::InvalidPotential { index, value });
    }
    let nodes: Vec<usize> = mask.occupied_indices().collect();
    let potential = nodes.iter().map(|&n| v.at(n)).collect();
    Ok(DiscreteOperator::from_nodes(mask.grid().clone(), nodes, potential))
}

/// Dirichlet restriction of `op` to `submask` by deleting rows and columns.
pub fn restrict_to_open_set(op: &DiscreteOperator, submask: &DomainMask) -> Result<DiscreteOperator> {
    if submask.count() == 0 {
        return Err(Error::EmptyMask);
    }
    if !submask.is_subset_of(&op.mask) {
        return Err(Error::NotASubmask);
    }
    let keep: Vec<usize> = (0..op.dim())
        .filter(|&i| submask.is_occupied(op.nodes[i]))
        .collect();
    Ok(op.restrict_to_dofs(&keep))
}

impl DiscreteOperator {
    fn from_nodes(grid: GridSpec, nodes: Vec<usize>, potential: Vec<f64>) -> Self {
        let mut lookup = vec![NO_DOF; grid.node_count()];
        for (dof, &n) in nodes.iter().enumerate() {
            lookup[n] = dof as u32;
        }
        let h2 = grid.h() * grid.h();
        let off = -1.0 / h2;
        let base = 2.0 * grid.dim() as f64 / h2;
        let mut row_ptr = Vec::with_capacity(nodes.len() + 1);
        let mut cols = Vec::with_capacity(nodes.len() * 2 * grid.dim());
        row_ptr.push(0);
        for &n in &nodes {
            let mut nbrs: Vec<usize> = lattice_neighbors(&grid, n)
                .filter_map(|m| (lookup[m] != NO_DOF).then_some(lookup[m] as usize))
                .collect();
            nbrs.sort_unstable();
            cols.extend(nbrs);
            row_ptr.push(cols.len());
        }
        let vals = vec![off; cols.len()];
        let diag = potential.iter().map(|v| base + v).collect();
        let occupied = lookup.iter().map(|&d| d != NO_DOF).collect();
        let mask = DomainMask::from_occupancy(grid.clone(), occupied)
            .expect("operator nodes are interior and nonempty");
        Self {
            grid,
            mask,
            nodes,
            lookup,
            diag,
            potential,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Operator on the subset of degrees of freedom `keep` (sorted).
    pub(crate) fn restrict_to_dofs(&self, keep: &[usize]) -> DiscreteOperator {
        let nodes = keep.iter().map(|&i| self.nodes[i]).collect();
        let potential = keep.iter().map(|&i| self.potential[i]).collect();
        DiscreteOperator::from_nodes(self.grid.clone(), nodes, potential)
    }

    /// The same operator on the grid padded by `cells` on every side.
    pub fn embedded(&self, cells: usize) -> DiscreteOperator {
        let grid = self.grid.padded(cells);
        let nodes = self
            .nodes
            .iter()
            .map(|&n| {
                let idx: Vec<usize> = self.grid.multi_index(n).iter().map(|i| i + cells).collect();
                grid.flat_index(&idx)
            })
            .collect();
        DiscreteOperator::from_nodes(grid, nodes, self.potential.clone())
    }

    /// Restriction to the nodes accepted by `keep`, or `None` if none are.
    pub fn restrict_where(&self, mut keep: impl FnMut(usize) -> bool) -> Option<DiscreteOperator> {
        let dofs: Vec<usize> = (0..self.dim()).filter(|&i| keep(i)).collect();
        (!dofs.is_empty()).then(|| self.restrict_to_dofs(&dofs))
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn mask(&self) -> &DomainMask {
        &self.mask
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    pub fn space_dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Potential value at each degree of freedom.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn node_of(&self, dof: usize) -> usize {
        self.nodes[dof]
    }

    pub fn dof_of(&self, node: usize) -> Option<usize> {
        match self.lookup.get(node) {
            Some(&d) if d != NO_DOF => Some(d as usize),
            _ => None,
        }
    }

    pub fn coords(&self, dof: usize) -> Vec<f64> {
        self.grid.coords(self.nodes[dof])
    }

    /// Degree of freedom at the node nearest to `x`.
    pub fn dof_at(&self, x: &[f64]) -> Result<usize> {
        self.grid
            .nearest_node(x)
            .and_then(|n| self.dof_of(n))
            .ok_or_else(|| Error::NotOccupied(x.to_vec()))
    }

    /// Off-diagonal entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn nnz_offdiag(&self) -> usize {
        self.cols.len()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.dim() {
            let mut acc = self.diag[i] * x[i];
            for (j, v) in self.row(i) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        y
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = self.diag[i];
            for (j, v) in self.row(i) {
                a[i * n + j] = v;
            }
        }
        a
    }

    /// Largest `|i - j|` over nonzero entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.dim())
            .flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    /// Gershgorin upper bound on the spectrum.
    pub fn spectral_upper_bound(&self) -> f64 {
        (0..self.dim())
            .map(|i| self.diag[i] + self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Copy with `c` added to the potential.
    pub fn shifted(&self, c: f64) -> Result<DiscreteOperator> {
        let potential: Vec<f64> = self.potential.iter().map(|v| v + c).collect();
        if let Some((index, &value)) = potential.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::InvalidPotential { index, value });
        }
        Ok(DiscreteOperator::from_nodes(
            self.grid.clone(),
            self.nodes.clone(),
            potential,
        ))
    }

    pub fn is_exactly_symmetric(&self) -> bool {
        let mut seen: HashMap<(usize, usize), u64> = HashMap::new();
        for i in 0..self.dim() {
            for (j, v) in self.row(i) {
                seen.insert((i, j), v.to_bits());
            }
        }
        seen.iter()
            .all(|(&(i, j), bits)| seen.get(&(j, i)) == Some(bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_mask, Shape, ShapeOp};

    fn interval(n: usize, lo: f64, hi: f64) -> DomainMask {
        let g = GridSpec::unit(1, n).unwrap();
        build_mask(&g, &[ShapeOp::union(Shape::interval(lo, hi))]).unwrap()
    }

    #[test]
    fn quarter_spacing_interval_stencil() {
        let m = interval(4, 0.0, 1.0);
        let op = assemble_operator(&m, &PotentialField::zero(m.grid())).unwrap();
        #[rustfmt::skip]
        let expected = [
            32.0, -16.0, 0.0,
            -16.0, 32.0, -16.0,
            0.0, -16.0, 32.0,
        ];
        assert_eq!(op.to_dense(), expected);
    }

    #[test]
    fn isolated_cell_is_one_by_one() {
        let g = GridSpec::unit(2, 8).unwrap();
        let m = build_mask(&g, &[ShapeOp::union(Shape::ball(&[0.5, 0.5], 0.05))]).unwrap();
        let op = assemble_operator(&m, &PotentialField::zero(&g)).unwrap();
        assert_eq!(op.dim(), 1);
        assert_eq!(op.to_dense(), vec![4.0 * 64.0]);
    }

    #[test]
    fn restriction_matches_direct_assembly() {
        let full = interval(40, 0.0, 1.0);
        let half = interval(40, 0.0, 0.5);
        let v = PotentialField::from_fn(full.grid(), |x| 3.0 * x[0]).unwrap();
        let op = assemble_operator(&full, &v).unwrap();
        let restricted = restrict_to_open_set(&op, &half).unwrap();
        let direct = assemble_operator(&half, &v).unwrap();
        assert_eq!(restricted, direct);
        assert_eq!(restrict_to_open_set(&op, &full).unwrap(), op);
    }

    #[test]
    fn restriction_rejects_non_subsets() {
        let a = interval(40, 0.0, 0.5);
        let b = interval(40, 0.25, 1.0);
        let op = assemble_operator(&a, &PotentialField::zero(a.grid())).unwrap();
        assert_eq!(restrict_to_open_set(&op, &b), Err(Error::NotASubmask));
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let m = interval(40, 0.0, 1.0);
        let other = GridSpec::unit(1, 20).unwrap();
        assert_eq!(
            assemble_operator(&m, &PotentialField::zero(&other)),
            Err(Error::GridMismatch("mask", "potential"))
        );
    }

    #[test]
    fn two_dimensional_stencil_is_symmetric() {
        let g = GridSpec::unit(2, 16).unwrap();
        let m = build_mask(
            &g,
            &[
                ShapeOp::union(Shape::rect(&[0.0, 0.0], &[1.0, 1.0])),
                ShapeOp::difference(Shape::ball(&[0.5, 0.5], 0.2)),
            ],
        )
        .unwrap();
        let op = assemble_operator(&m, &PotentialField::constant(&g, 2.0).unwrap()).unwrap();
        assert!(op.is_exactly_symmetric());
        let h2 = 1.0 / (g.h() * g.h());
        for i in 0..op.dim() {
            assert_eq!(op.diag()[i], 4.0 * h2 + 2.0);
            assert!(op.row(i).all(|(_, v)| v == -h2));
        }
        assert_eq!(op.bandwidth(), 15);
    }
}
