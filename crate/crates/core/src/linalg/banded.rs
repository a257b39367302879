//! Banded symmetric factorizations used for shift-invert and inertia counts.

use crate::error::{Error, Result};
use crate::operator::DiscreteOperator;

/// Lower band of a symmetric matrix: `band[i][k]` holds entry `(i, i - bw + k)`.
#[derive(Debug, Clone)]
pub struct BandedSym {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedSym {
    /// Band of `op - shift * I`.
    pub fn from_operator(op: &DiscreteOperator, shift: f64) -> Self {
        let n = op.dim();
        let bw = op.bandwidth();
        let mut data = vec![0.0; n * (bw + 1)];
        for i in 0..n {
            data[i * (bw + 1) + bw] = op.diag()[i] - shift;
            for (j, v) in op.row(i) {
                if j < i {
                    data[i * (bw + 1) + bw - (i - j)] = v;
                }
            }
        }
        Self { n, bw, data }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * (self.bw + 1) + self.bw - (i - j)
    }

    fn first_col(&self, i: usize) -> usize {
        i.saturating_sub(self.bw)
    }
}

/// Cholesky factor `L L^T` of a positive definite banded matrix.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    l: BandedSym,
}

impl BandedCholesky {
    pub fn factor(mut a: BandedSym) -> Result<Self> {
        for i in 0..a.n {
            let i0 = a.first_col(i);
            for j in i0..=i {
                let k0 = i0.max(a.first_col(j));
                let mut s = a.data[a.at(i, j)];
                for k in k0..j {
                    s -= a.data[a.at(i, k)] * a.data[a.at(j, k)];
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(Error::NoConvergence(format!(
                            "matrix not positive definite at pivot {i}"
                        )));
                    }
                    let idx = a.at(i, i);
                    a.data[idx] = s.sqrt();
                } else {
                    let idx = a.at(i, j);
                    a.data[idx] = s / a.data[a.at(j, j)];
                }
            }
        }
        Ok(Self { l: a })
    }

    pub fn dim(&self) -> usize {
        self.l.n
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let l = &self.l;
        for i in 0..l.n {
            let mut s = x[i];
            for k in l.first_col(i)..i {
                s -= l.data[l.at(i, k)] * x[k];
            }
            x[i] = s / l.data[l.at(i, i)];
        }
        for i in (0..l.n).rev() {
            x[i] /= l.data[l.at(i, i)];
            let xi = x[i];
            for k in l.first_col(i)..i {
                x[k] -= l.data[l.at(i, k)] * xi;
            }
        }
    }
}

/// Number of eigenvalues of `op` strictly below `sigma`, by Sylvester's law
/// of inertia on an unpivoted banded `L D L^T` factorization of
/// `op - sigma I`.
///
/// A shift that hits a (near) zero pivot is nudged downwards by a relative
/// `1e-11`, so an eigenvalue sitting exactly at `sigma` is not counted.
pub fn count_below(op: &DiscreteOperator, sigma: f64) -> Result<usize> {
    let scale = op.spectral_upper_bound().max(1.0);
    let mut shift = sigma;
    for attempt in 0..12 {
        if let Some(count) = ldlt_negative_pivots(BandedSym::from_operator(op, shift), scale) {
            return Ok(count);
        }
        shift = sigma - (1u64 << attempt) as f64 * 1e-11 * sigma.abs().max(1.0);
    }
    Err(Error::NoConvergence(format!(
        "no regular LDL^T factorization near shift {sigma}"
    )))
}

fn ldlt_negative_pivots(mut a: BandedSym, scale: f64) -> Option<usize> {
    let n = a.n;
    let mut dvals = vec![0.0; n];
    let mut negative = 0;
    for i in 0..n {
        let i0 = a.first_col(i);
        for j in i0..i {
            let k0 = i0.max(a.first_col(j));
            let mut s = a.data[a.at(i, j)];
            for k in k0..j {
                s -= a.data[a.at(i, k)] * a.data[a.at(j, k)] * dvals[k];
            }
            let idx = a.at(i, j);
            a.data[idx] = s / dvals[j];
        }
        let mut s = a.data[a.at(i, i)];
        for k in i0..i {
            let lik = a.data[a.at(i, k)];
            s -= lik * lik * dvals[k];
        }
        if s.abs() <= 1e-13 * scale || !s.is_finite() {
            return None;
        }
        dvals[i] = s;
        if s < 0.0 {
            negative += 1;
        }
    }
    Some(negative)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_mask, GridSpec, PotentialField, Shape, ShapeOp};
    use crate::operator::assemble_operator;

    fn square_op(n: usize) -> DiscreteOperator {
        let g = GridSpec::unit(2, n).unwrap();
        let m = build_mask(&g, &[ShapeOp::union(Shape::rect(&[0.0, 0.0], &[1.0, 1.0]))]).unwrap();
        assemble_operator(&m, &PotentialField::zero(&g)).unwrap()
    }

    #[test]
    fn cholesky_solves_grid_system() {
        let op = square_op(12);
        let b: Vec<f64> = (0..op.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
        let chol = BandedCholesky::factor(BandedSym::from_operator(&op, 0.0)).unwrap();
        let mut x = b.clone();
        chol.solve_in_place(&mut x);
        let ax = op.matvec(&x);
        let err = ax.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn inertia_counts_discrete_square_eigenvalues() {
        // eigenvalues are mu_i + mu_j with mu_k = (2 - 2 cos(k pi h)) / h^2
        let n = 10;
        let op = square_op(n);
        let h = 1.0 / n as f64;
        let mu: Vec<f64> = (1..n)
            .map(|k| (2.0 - 2.0 * (k as f64 * std::f64::consts::PI * h).cos()) / (h * h))
            .collect();
        // 400 is an exact eigenvalue (mu_5 = 2 / h^2) and must not be counted
        for sigma in [10.0, 50.0, 100.0, 123.4, 400.0, 401.0] {
            let brute = mu
                .iter()
                .flat_map(|a| mu.iter().map(move |b| a + b))
                .filter(|&l| l < sigma - 1e-9)
                .count();
            assert_eq!(count_below(&op, sigma).unwrap(), brute, "sigma = {sigma}");
        }
    }
}
