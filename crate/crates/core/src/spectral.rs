//! Low-lying spectra of discrete operators, the counting function and grid
//! norms.
//!
//! Eigenvectors are stored as grid functions normalized in the weighted norm
//! `(Σ |φ_i|² h^d)^{1/2} = 1`, so their values approximate continuum
//! eigenfunctions pointwise.

use crate::error::{Error, Result};
use crate::linalg::dense::symmetric_eigen;
use crate::linalg::lanczos::{lowest_eigenpairs, LanczosTarget};
use crate::linalg::{axpy, norm};
use crate::operator::DiscreteOperator;

/// Largest dimension for which the full spectrum can be requested.
pub const DENSE_LIMIT: usize = 1000;

/// Partial requests switch from dense diagonalization to Lanczos above this.
pub const LANCZOS_FROM: usize = 400;

/// Residual certificate: `|Hφ - λφ| <= RESIDUAL_TOL * max(1, λ)`.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// Eigenvalues closer than `CLUSTER_TOL * max(1, λ)` form one cluster.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Relative buffer above a threshold request before completeness is certified.
pub const THRESHOLD_BUFFER: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SliceRequest {
    /// The `k` lowest eigenpairs (plus the rest of the last cluster).
    Count(usize),
    /// Every eigenpair up to the given value.
    Threshold(f64),
    /// The whole spectrum; dense operators only.
    Full,
}

/// Ordered eigenpairs with a completeness certificate below `cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSlice {
    pairs: Vec<EigenPair>,
    cutoff: f64,
    complete_below: bool,
    dim: usize,
    cell_volume: f64,
}

impl SpectrumSlice {
    pub fn pairs(&self) -> &[EigenPair] {
        &self.pairs
    }

    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Every eigenvalue strictly below this value is present.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn complete_below(&self) -> bool {
        self.complete_below
    }

    /// Dimension of the operator the slice was taken from.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }

    /// True when the slice holds the entire spectrum.
    pub fn is_full(&self) -> bool {
        self.pairs.len() == self.dim
    }

    pub fn lowest(&self) -> Option<&EigenPair> {
        self.pairs.first()
    }

    /// Cluster sizes in order, grouping eigenvalues within [`CLUSTER_TOL`].
    pub fn clusters(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for p in &self.pairs {
            match out.last_mut() {
                Some((rep, size)) if p.value - *rep <= CLUSTER_TOL * rep.abs().max(1.0) => {
                    *size += 1
                }
                _ => out.push((p.value, 1)),
            }
        }
        out
    }
}

/// Computes the requested low-lying eigenpairs of `op`.
///
/// Dense Householder/QL for small operators and for full spectra,
/// shift-invert Lanczos with inertia certification otherwise.
pub fn eigensolve_lowest(op: &DiscreteOperator, request: SliceRequest) -> Result<SpectrumSlice> {
    let n = op.dim();
    if let SliceRequest::Count(k) = request {
        if k > n {
            return Err(Error::TooManyEigenpairs { requested: k, dim: n });
        }
    }
    let dense = match request {
        SliceRequest::Full => n <= DENSE_LIMIT,
        _ => n <= LANCZOS_FROM,
    };
    let (values, vectors, cutoff) = if dense {
        dense_slice(op, request)?
    } else {
        let target = match request {
            SliceRequest::Count(k) => LanczosTarget::Count(k),
            SliceRequest::Threshold(l) => LanczosTarget::Below(l * (1.0 + THRESHOLD_BUFFER)),
            SliceRequest::Full => {
                return Err(Error::NoConvergence(format!(
                    "full spectrum requested for dimension {n} > {DENSE_LIMIT}"
                )))
            }
        };
        let low = lowest_eigenpairs(op, target, CLUSTER_TOL, RESIDUAL_TOL)?;
        (low.values, low.vectors, low.certified_below)
    };

    let cell = op.grid().cell_volume();
    let inv_sqrt = 1.0 / cell.sqrt();
    let mut pairs = Vec::with_capacity(values.len());
    for (value, u) in values.into_iter().zip(vectors) {
        let mut r = op.matvec(&u);
        axpy(-value, &u, &mut r);
        let residual = norm(&r);
        if residual > RESIDUAL_TOL * value.abs().max(1.0) {
            return Err(Error::NoConvergence(format!(
                "residual {residual:e} for eigenvalue {value}"
            )));
        }
        pairs.push(EigenPair {
            value,
            vector: u.iter().map(|x| x * inv_sqrt).collect(),
            residual,
        });
    }
    Ok(SpectrumSlice {
        pairs,
        cutoff,
        complete_below: true,
        dim: n,
        cell_volume: cell,
    })
}

type Eigen = (Vec<f64>, Vec<Vec<f64>>, f64);

fn dense_slice(op: &DiscreteOperator, request: SliceRequest) -> Result<Eigen> {
    let n = op.dim();
    let eig = symmetric_eigen(&op.to_dense(), n)?;
    let take = match request {
        SliceRequest::Full => n,
        SliceRequest::Threshold(l) => {
            let cut = l * (1.0 + THRESHOLD_BUFFER);
            eig.values.iter().filter(|&&v| v < cut).count()
        }
        SliceRequest::Count(k) => {
            let mut take = k;
            while take > 0
                && take < n
                && eig.values[take] - eig.values[take - 1]
                    <= CLUSTER_TOL * eig.values[take - 1].abs().max(1.0)
            {
                take += 1;
            }
            take
        }
    };
    let cutoff = match request {
        SliceRequest::Threshold(l) if take == n => f64::INFINITY.min(l * (1.0 + THRESHOLD_BUFFER)),
        SliceRequest::Threshold(l) => l * (1.0 + THRESHOLD_BUFFER),
        _ if take == n => f64::INFINITY,
        _ => eig.values[take],
    };
    let mut values = eig.values;
    let mut vectors = eig.vectors;
    values.truncate(take);
    vectors.truncate(take);
    Ok((values, vectors, cutoff))
}

/// Number of eigenvalues `<= t`, counted with multiplicity.
pub fn counting_function(spec: &SpectrumSlice, t: f64) -> Result<usize> {
    if !spec.complete_below || t >= spec.cutoff {
        return Err(Error::AboveCutoff {
            t,
            cutoff: spec.cutoff,
        });
    }
    Ok(spec
        .clusters()
        .iter()
        .take_while(|(rep, _)| *rep <= t)
        .map(|(_, size)| size)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridNorm {
    L1,
    L2,
}

/// `(Σ |φ_i|^p h^d)^{1/p}` over the degrees of freedom of `op`.
pub fn grid_norm(op: &DiscreteOperator, phi: &[f64], p: GridNorm) -> Result<f64> {
    if phi.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: phi.len(),
        });
    }
    let cell = op.grid().cell_volume();
    Ok(match p {
        GridNorm::L1 => phi.iter().map(|x| x.abs()).sum::<f64>() * cell,
        GridNorm::L2 => (phi.iter().map(|x| x * x).sum::<f64>() * cell).sqrt(),
    })
}

/// `<Hv, v> / <v, v>`.
pub fn rayleigh_quotient(op: &DiscreteOperator, v: &[f64]) -> Result<f64> {
    if v.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: v.len(),
        });
    }
    let vv: f64 = v.iter().map(|x| x * x).sum();
    if vv == 0.0 {
        return Err(Error::ZeroVector);
    }
    let hv = op.matvec(v);
    Ok(hv.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / vv)
}

/// Bottom of the spectrum, `λ_1`, with certified residual.
pub fn ground_energy(op: &DiscreteOperator) -> Result<f64> {
    Ok(ground_state(op)?.value)
}

pub fn ground_state(op: &DiscreteOperator) -> Result<EigenPair> {
    let slice = eigensolve_lowest(op, SliceRequest::Count(1))?;
    Ok(slice.pairs[0].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_mask, GridSpec, PotentialField, Shape, ShapeOp};
    use crate::operator::assemble_operator;
    use std::f64::consts::PI;

    fn interval_op(n: usize) -> DiscreteOperator {
        let g = GridSpec::unit(1, n).unwrap();
        let m = build_mask(&g, &[ShapeOp::union(Shape::interval(0.0, 1.0))]).unwrap();
        assemble_operator(&m, &PotentialField::zero(&g)).unwrap()
    }

    #[test]
    fn interval_spectrum_close_to_continuum() {
        let op = interval_op(400);
        let s = eigensolve_lowest(&op, SliceRequest::Count(5)).unwrap();
        for k in 1..=5 {
            let exact = (k as f64 * PI).powi(2);
            let rel = (s.pairs()[k - 1].value - exact).abs() / exact;
            assert!(rel < 0.005, "k={k} rel={rel}");
        }
    }

    #[test]
    fn one_by_one_operator() {
        let g = GridSpec::unit(1, 2).unwrap();
        let m = DomainMask::full(g.clone()).unwrap();
        let op = assemble_operator(&m, &PotentialField::constant(&g, 1.5).unwrap()).unwrap();
        let s = eigensolve_lowest(&op, SliceRequest::Count(1)).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.pairs()[0].value - (8.0 + 1.5)).abs() < 1e-12);
        // grid normalization: single node with h = 1/2
        assert!((s.pairs()[0].vector[0].abs() - 2f64.sqrt()).abs() < 1e-12);
    }

    use crate::grid::DomainMask;

    #[test]
    fn counting_function_steps() {
        let op = interval_op(400);
        let s = eigensolve_lowest(&op, SliceRequest::Threshold(4.0 * PI * PI)).unwrap();
        assert_eq!(counting_function(&s, 2.0 * PI * PI).unwrap(), 1);
        assert_eq!(counting_function(&s, 5.0).unwrap(), 0);
        assert!(counting_function(&s, 100.0 * PI * PI).is_err());
    }

    #[test]
    fn norms_of_interval_ground_state() {
        let op = interval_op(400);
        let g = ground_state(&op).unwrap();
        let l1 = grid_norm(&op, &g.vector, GridNorm::L1).unwrap();
        let l2 = grid_norm(&op, &g.vector, GridNorm::L2).unwrap();
        assert!((l2 - 1.0).abs() < 1e-10);
        assert!((l1 - 2.0 * 2f64.sqrt() / PI).abs() < 1e-4, "{l1}");
        let ones = vec![1.0; op.dim()];
        let vol = grid_norm(&op, &ones, GridNorm::L1).unwrap();
        assert!((vol - op.mask().volume()).abs() < 1e-14);
    }

    #[test]
    fn rayleigh_errors_and_min_max() {
        let op = interval_op(50);
        assert_eq!(rayleigh_quotient(&op, &vec![0.0; op.dim()]), Err(Error::ZeroVector));
        let e0 = ground_energy(&op).unwrap();
        let v: Vec<f64> = (0..op.dim()).map(|i| ((i * 7919) % 13) as f64 + 0.5).collect();
        assert!(rayleigh_quotient(&op, &v).unwrap() >= e0 - 1e-9);
    }
}
