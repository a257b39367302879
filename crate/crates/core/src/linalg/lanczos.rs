//! Shift-invert Lanczos with full reorthogonalization and locking.
//!
//! The iteration runs on `H^{-1}` (applied through a banded Cholesky factor),
//! so the lowest eigenvalues of `H` become the best separated ones. Converged
//! Ritz vectors are locked and the iteration restarts from a fresh vector
//! orthogonal to everything locked, which is how repeated eigenvalues are
//! picked up. Completeness is certified by Sylvester inertia counts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::banded::{count_below, BandedCholesky, BandedSym};
use super::dense::{symmetric_eigen, tridiagonal_eigen};
use super::{axpy, dot, norm, orthogonalize, scale};
use crate::error::{Error, Result};
use crate::operator::DiscreteOperator;

const START_SEED: u64 = 0x5eed_1a2c;
const MAX_RESTARTS: usize = 200;
const RITZ_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LanczosTarget {
    /// The `k` lowest eigenvalues, extended to close the last cluster.
    Count(usize),
    /// Every eigenvalue strictly below the given value.
    Below(f64),
}

/// Certified low-lying eigenpairs. `vectors` are orthonormal in the plain
/// Euclidean inner product.
#[derive(Debug, Clone)]
pub struct LowEigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// Every eigenvalue `< certified_below` is in `values`.
    pub certified_below: f64,
}

pub fn lowest_eigenpairs(
    op: &DiscreteOperator,
    target: LanczosTarget,
    cluster_tol: f64,
    residual_tol: f64,
) -> Result<LowEigenpairs> {
    let n = op.dim();
    let chol = BandedCholesky::factor(BandedSym::from_operator(op, 0.0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);

    let mut locked_vals: Vec<f64> = Vec::new();
    let mut locked: Vec<Vec<f64>> = Vec::new();

    let (mut wanted, fixed_cut) = match target {
        LanczosTarget::Count(k) => {
            if k > n {
                return Err(Error::TooManyEigenpairs { requested: k, dim: n });
            }
            (k, None)
        }
        LanczosTarget::Below(sigma) => (count_below(op, sigma)?, Some(sigma)),
    };

    let certified_below;
    let mut restarts = 0;
    loop {
        // certificate check
        if locked.len() >= wanted {
            let mut sorted = locked_vals.clone();
            sorted.sort_by(f64::total_cmp);
            let cut = match fixed_cut {
                Some(s) => s,
                None if wanted == 0 => 0.0,
                None => {
                    let top = sorted[wanted - 1];
                    top + cluster_tol * top.max(1.0)
                }
            };
            let have = sorted.iter().filter(|&&v| v < cut).count();
            let truth = count_below(op, cut)?;
            if have >= truth {
                certified_below = cut;
                break;
            }
            wanted = truth;
        }
        if locked.len() >= n {
            certified_below = f64::INFINITY;
            break;
        }
        restarts += 1;
        if restarts > MAX_RESTARTS {
            return Err(Error::NoConvergence(format!(
                "Lanczos locked {} of {} eigenpairs after {MAX_RESTARTS} restarts",
                locked.len(),
                wanted
            )));
        }
        let remaining = wanted.saturating_sub(locked.len()).max(1);
        let new = lanczos_run(&chol, &locked, remaining, &mut rng)?;
        if new.is_empty() {
            return Err(Error::NoConvergence(
                "Lanczos run produced no converged Ritz pairs".into(),
            ));
        }
        for (theta, v) in new {
            locked_vals.push(1.0 / theta);
            locked.push(v);
        }
    }

    let (values, vectors) = refine(op, &chol, locked, residual_tol)?;
    let keep: Vec<usize> = (0..values.len())
        .filter(|&i| values[i] < certified_below)
        .collect();
    Ok(LowEigenpairs {
        values: keep.iter().map(|&i| values[i]).collect(),
        vectors: keep.iter().map(|&i| vectors[i].clone()).collect(),
        certified_below,
    })
}

/// One Lanczos run on `H^{-1}` restricted to the complement of `locked`.
/// Returns converged `(theta, vector)` pairs, largest `theta` first.
fn lanczos_run(
    chol: &BandedCholesky,
    locked: &[Vec<f64>],
    remaining: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = chol.dim();
    let free = n - locked.len();
    let m_max = free.min((3 * remaining + 60).max(80));

    let mut q: Vec<f64> = (0..n).map(|_| 1.0 + 0.5 * rng.gen::<f64>()).collect();
    orthogonalize(&mut q, locked);
    let qn = norm(&q);
    if qn == 0.0 {
        return Ok(vec![]);
    }
    scale(1.0 / qn, &mut q);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut converged = Vec::new();

    for j in 0..m_max {
        let mut w = basis[j].clone();
        chol.solve_in_place(&mut w);
        let a = dot(&basis[j], &w);
        alpha.push(a);
        orthogonalize(&mut w, locked);
        orthogonalize(&mut w, &basis);
        let b = norm(&w);
        let breakdown = b <= 1e-13 * a.abs().max(f64::MIN_POSITIVE);
        let last = breakdown || j + 1 == m_max;
        if last || (j + 1) % 10 == 0 {
            let t = tridiagonal_eigen(&alpha, &beta)?;
            let m = alpha.len();
            converged.clear();
            for i in (0..m).rev() {
                let theta = t.values[i];
                if theta <= 0.0 {
                    continue;
                }
                let bound = if breakdown { 0.0 } else { (b * t.vectors[i][m - 1]).abs() };
                if bound <= RITZ_TOL * theta {
                    converged.push(i);
                } else {
                    break;
                }
            }
            if converged.len() >= remaining || last {
                let mut out: Vec<(f64, Vec<f64>)> = Vec::with_capacity(converged.len());
                for &i in &converged {
                    let mut v = vec![0.0; n];
                    for (c, qk) in t.vectors[i].iter().zip(&basis) {
                        axpy(*c, qk, &mut v);
                    }
                    orthogonalize(&mut v, locked);
                    for (_, prev) in &out {
                        let c = dot(prev, &v);
                        axpy(-c, prev, &mut v);
                    }
                    let vn = norm(&v);
                    scale(1.0 / vn, &mut v);
                    out.push((t.values[i], v));
                }
                return Ok(out);
            }
        }
        beta.push(b);
        scale(1.0 / b, &mut w);
        basis.push(w);
    }
    unreachable!("loop always returns on its last step")
}

/// Rayleigh-Ritz on the span of `x` with respect to `H`, followed by block
/// inverse iteration until every residual meets `residual_tol * max(1, λ)`.
fn refine(
    op: &DiscreteOperator,
    chol: &BandedCholesky,
    mut x: Vec<Vec<f64>>,
    residual_tol: f64,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut last_worst = f64::INFINITY;
    for sweep in 0..8 {
        if sweep > 0 {
            for v in x.iter_mut() {
                chol.solve_in_place(v);
            }
        }
        orthonormalize(&mut x);
        let (vals, vecs) = rayleigh_ritz(op, &x)?;
        let worst = vals
            .iter()
            .zip(&vecs)
            .map(|(l, v)| {
                let mut r = op.matvec(v);
                axpy(-l, v, &mut r);
                norm(&r) / l.max(1.0)
            })
            .fold(0.0, f64::max);
        if worst <= residual_tol || worst >= last_worst {
            if worst > residual_tol {
                return Err(Error::NoConvergence(format!(
                    "eigenvector residual stalled at {worst:e}"
                )));
            }
            return Ok((vals, vecs));
        }
        last_worst = worst;
        x = vecs;
    }
    Err(Error::NoConvergence(format!(
        "eigenvector residual above {residual_tol:e} after refinement"
    )))
}

fn orthonormalize(x: &mut [Vec<f64>]) {
    for i in 0..x.len() {
        let (done, rest) = x.split_at_mut(i);
        let v = &mut rest[0];
        for _ in 0..2 {
            for q in done.iter() {
                let c = dot(q, v);
                axpy(-c, q, v);
            }
        }
        let vn = norm(v);
        scale(1.0 / vn, v);
    }
}

fn rayleigh_ritz(op: &DiscreteOperator, x: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let m = x.len();
    let hx: Vec<Vec<f64>> = x.iter().map(|v| op.matvec(v)).collect();
    let mut g = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let val = 0.5 * (dot(&x[i], &hx[j]) + dot(&x[j], &hx[i]));
            g[i * m + j] = val;
            g[j * m + i] = val;
        }
    }
    let eig = symmetric_eigen(&g, m)?;
    let n = op.dim();
    let vecs = eig
        .vectors
        .iter()
        .map(|y| {
            let mut v = vec![0.0; n];
            for (c, xk) in y.iter().zip(x) {
                axpy(*c, xk, &mut v);
            }
            v
        })
        .collect();
    Ok((eig.values, vecs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_mask, GridSpec, PotentialField, Shape, ShapeOp};
    use crate::operator::assemble_operator;

    fn discrete_square_eigs(n: usize) -> Vec<f64> {
        let h = 1.0 / n as f64;
        let mu: Vec<f64> = (1..n)
            .map(|k| (2.0 - 2.0 * (k as f64 * std::f64::consts::PI * h).cos()) / (h * h))
            .collect();
        let mut all: Vec<f64> = mu.iter().flat_map(|a| mu.iter().map(move |b| a + b)).collect();
        all.sort_by(f64::total_cmp);
        all
    }

    #[test]
    fn recovers_degenerate_square_spectrum() {
        let n = 24;
        let g = GridSpec::unit(2, n).unwrap();
        let m = build_mask(&g, &[ShapeOp::union(Shape::rect(&[0.0, 0.0], &[1.0, 1.0]))]).unwrap();
        let op = assemble_operator(&m, &PotentialField::zero(&g)).unwrap();
        let exact = discrete_square_eigs(n);
        let res = lowest_eigenpairs(&op, LanczosTarget::Below(500.0), 1e-8, 1e-8).unwrap();
        let expected: Vec<f64> = exact.iter().copied().filter(|&l| l < 500.0).collect();
        assert_eq!(res.values.len(), expected.len());
        for (a, b) in res.values.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-8 * b, "{a} vs {b}");
        }

        let res = lowest_eigenpairs(&op, LanczosTarget::Count(2), 1e-8, 1e-8).unwrap();
        // the second eigenvalue is doubly degenerate, so both copies come back
        assert_eq!(res.values.len(), 3);
        assert!((res.values[1] - res.values[2]).abs() < 1e-8 * res.values[1]);
    }
}
