//! Action of `exp(-tH)` through a Chebyshev expansion on a spectral
//! enclosure `[a, b]` of `H`.
//!
//! The degree needed grows like `sqrt(t (b - a))`, against `t (b - a)` for a
//! scaled Taylor series, which is what makes short and moderate times
//! affordable on stiff finite-difference operators.

use super::axpy;
use crate::operator::DiscreteOperator;

#[derive(Debug, Clone)]
pub struct ChebyshevExp {
    coeffs: Vec<f64>,
    a: f64,
    b: f64,
    /// Bound on `sup |exp(-t x) - p(x)|` over `[a, b]`.
    pub truncation: f64,
}

impl ChebyshevExp {
    /// Expansion of `exp(-t x)` on `[a, b]` with truncation below `tol`
    /// (absolute, relative to `max exp(-t x) = exp(-t a)`).
    ///
    /// The coefficients are `2 exp(-t a) (-1)^k exp(-z) I_k(z)` with
    /// `z = t (b - a) / 2`, evaluated by Miller's backward recurrence.
    pub fn new(t: f64, a: f64, b: f64, tol: f64) -> Self {
        assert!(b > a && t >= 0.0);
        let z = 0.5 * t * (b - a);
        let peak = (-t * a).exp();
        let scaled = scaled_bessel_i(z, tol);
        let mut coeffs: Vec<f64> = scaled
            .iter()
            .enumerate()
            .map(|(k, ik)| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                2.0 * peak * sign * ik
            })
            .collect();
        let mut tail = 0.0;
        let mut degree = coeffs.len() - 1;
        while degree > 0 && tail + coeffs[degree].abs() <= tol * peak {
            tail += coeffs[degree].abs();
            degree -= 1;
        }
        coeffs.truncate(degree + 1);
        Self {
            coeffs,
            a,
            b,
            truncation: tail,
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Scalar evaluation, mainly for checking the expansion.
    pub fn eval(&self, x: f64) -> f64 {
        let y = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let (mut t0, mut t1) = (1.0, y);
        let mut acc = 0.5 * self.coeffs[0];
        if self.coeffs.len() > 1 {
            acc += self.coeffs[1] * y;
        }
        for c in &self.coeffs[2..] {
            let t2 = 2.0 * y * t1 - t0;
            acc += c * t2;
            t0 = t1;
            t1 = t2;
        }
        acc
    }

    /// `p(H) v`, accurate to `truncation * |v|` in the Euclidean norm.
    pub fn apply(&self, op: &DiscreteOperator, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let alpha = 2.0 / (self.b - self.a);
        let beta = -(self.a + self.b) / (self.b - self.a);
        let mut out = vec![0.0; n];
        axpy(0.5 * self.coeffs[0], v, &mut out);
        if self.coeffs.len() == 1 {
            return out;
        }
        let mut t_prev = v.to_vec();
        let mut t_cur = op.matvec(v);
        for (tc, vi) in t_cur.iter_mut().zip(v) {
            *tc = alpha * *tc + beta * vi;
        }
        axpy(self.coeffs[1], &t_cur, &mut out);
        let mut hv = vec![0.0; n];
        for &c in &self.coeffs[2..] {
            op.apply(&t_cur, &mut hv);
            for i in 0..n {
                let next = 2.0 * (alpha * hv[i] + beta * t_cur[i]) - t_prev[i];
                t_prev[i] = next;
            }
            std::mem::swap(&mut t_prev, &mut t_cur);
            axpy(c, &t_cur, &mut out);
        }
        out
    }
}

/// `exp(-z) I_k(z)` for `k = 0..=m`, with `m` large enough that the
/// neglected orders sum to well below `tol`.
fn scaled_bessel_i(z: f64, tol: f64) -> Vec<f64> {
    if z == 0.0 {
        return vec![1.0];
    }
    let l = (1.0 / tol).ln().max(1.0) + 10.0;
    let mut m = (1.5 * (2.0 * z * l).sqrt() + l + 20.0).ceil() as usize;
    loop {
        let mut vals = vec![0.0; m + 1];
        let (mut next, mut cur) = (0.0f64, 1e-300f64);
        for k in (0..=m).rev() {
            vals[k] = cur;
            let prev = next + 2.0 * k as f64 / z * cur;
            next = cur;
            cur = prev;
            if cur > 1e250 {
                for v in vals[k..].iter_mut() {
                    *v *= 1e-250;
                }
                next *= 1e-250;
                cur *= 1e-250;
            }
        }
        // exp(z) = I_0 + 2 sum I_k normalizes the sequence
        let total = vals[0] + 2.0 * vals[1..].iter().sum::<f64>();
        for v in vals.iter_mut() {
            *v /= total;
        }
        if vals[m] <= 1e-6 * tol {
            return vals;
        }
        m *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_expansion_matches_exponential() {
        for &(t, b) in &[(0.01, 1e4), (0.5, 3e4), (2.0, 10.0), (0.1, 1e6)] {
            let p = ChebyshevExp::new(t, 0.0, b, 1e-14);
            for i in 0..=200 {
                let x = b * i as f64 / 200.0;
                let err = (p.eval(x) - (-t * x).exp()).abs();
                assert!(err <= 1e-12, "t={t} b={b} x={x}: err {err:e}");
            }
            assert!(p.truncation <= 1e-14);
        }
    }

    #[test]
    fn degree_scales_like_square_root() {
        let small = ChebyshevExp::new(1.0, 0.0, 1e3, 1e-14).degree();
        let large = ChebyshevExp::new(1.0, 0.0, 1e5, 1e-14).degree();
        let ratio = large as f64 / small as f64;
        assert!(ratio > 5.0 && ratio < 15.0, "ratio {ratio}");
    }
}
