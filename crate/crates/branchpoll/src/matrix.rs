//! Small dense square matrices of nonnegative means.
//!
//! Everything in the analysis layer uses the entrywise sum norm
//! `||A|| = sum |a_ij|`; reports state the norm used.

use crate::error::{Error, Result};
use std::fmt;

/// Row-major `m x m` matrix of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    m: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(m: usize) -> Self {
        Matrix { m, data: vec![0.0; m * m] }
    }

    pub fn identity(m: usize) -> Self {
        let mut a = Matrix::zeros(m);
        for i in 0..m {
            a.data[i * m + i] = 1.0;
        }
        a
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let m = rows.len();
        let mut data = Vec::with_capacity(m * m);
        for row in rows {
            assert_eq!(row.len(), m, "matrix rows must have length m");
            data.extend_from_slice(row);
        }
        Matrix { m, data }
    }

    /// Uniform scaling of the identity, `c * I`.
    pub fn scaled_identity(m: usize, c: f64) -> Self {
        let mut a = Matrix::zeros(m);
        for i in 0..m {
            a.data[i * m + i] = c;
        }
        a
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.m + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    /// Entrywise sum norm `sum |a_ij|`.
    pub fn sum_norm(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn scale_mut(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.m, other.m);
        let m = self.m;
        let mut out = Matrix::zeros(m);
        for i in 0..m {
            for k in 0..m {
                let a = self.data[i * m + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..m {
                    out.data[i * m + j] += a * other.data[k * m + j];
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn has_zero_row(&self) -> bool {
        (0..self.m).any(|i| self.row(i).iter().all(|&v| v == 0.0))
    }

    pub fn all_positive(&self) -> bool {
        self.data.iter().all(|&v| v > 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Row vector times matrix: `(v A)_j = sum_i v_i a_ij`.
    pub fn left_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.m);
        let m = self.m;
        let mut out = vec![0.0; m];
        for i in 0..m {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            for j in 0..m {
                out[j] += vi * self.data[i * m + j];
            }
        }
        out
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.m);
        let m = self.m;
        let mut out = vec![0.0; m];
        for i in 0..m {
            let mut acc = 0.0;
            for j in 0..m {
                acc += self.data[i * m + j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Spectral radius by power iteration (on `A + I`, which has the same
    /// eigenvectors and spectrum shifted by one, so oscillation between the
    /// eigenvalues of equal modulus cannot stall the iteration).
    pub fn spectral_radius(&self) -> Result<f64> {
        const TOL: f64 = 1e-10;
        const MAX_ITERS: usize = 10_000;
        let m = self.m;
        if !self.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "spectral radius of non-finite matrix {self}"
            )));
        }
        if self.sum_norm() == 0.0 {
            return Ok(0.0);
        }
        let mut x = vec![1.0 / m as f64; m];
        let mut lambda = 0.0f64;
        for _ in 0..MAX_ITERS {
            let mut y = self.mul_vec(&x);
            for (yi, xi) in y.iter_mut().zip(&x) {
                *yi += xi; // (A + I) x
            }
            let norm: f64 = y.iter().map(|v| v.abs()).sum();
            if norm == 0.0 {
                return Ok(0.0);
            }
            let next = norm; // ||x||_1 = 1 is maintained below
            for yi in &mut y {
                *yi /= norm;
            }
            let done = (next - lambda).abs() <= TOL * next.max(1.0);
            x = y;
            lambda = next;
            if done {
                return Ok(lambda - 1.0);
            }
        }
        Err(Error::SpectralRadiusDiverged {
            matrix: format!("{self}"),
        })
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.m {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.m {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn spectral_radius_identity() {
        assert_abs_diff_eq!(Matrix::identity(3).spectral_radius().unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn spectral_radius_diagonal() {
        let a = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 3.0]]);
        assert_abs_diff_eq!(a.spectral_radius().unwrap(), 3.0, epsilon = 1e-8);
    }

    #[test]
    fn spectral_radius_permutation() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_abs_diff_eq!(a.spectral_radius().unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn spectral_radius_zero() {
        assert_eq!(Matrix::zeros(4).spectral_radius().unwrap(), 0.0);
    }

    #[test]
    fn norms_and_products() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(a.sum_norm(), 10.0);
        let v = a.left_mul_vec(&[1.0, 1.0]);
        assert_eq!(v, vec![4.0, 6.0]);
        let b = a.mul(&Matrix::identity(2));
        assert_eq!(a, b);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn spectral_radius_of_diagonal_is_max_entry(
                diag in prop::collection::vec(0.0f64..50.0, 1..6)
            ) {
                let m = diag.len();
                let mut a = Matrix::zeros(m);
                for (i, d) in diag.iter().enumerate() {
                    a.set(i, i, *d);
                }
                let expect = diag.iter().cloned().fold(0.0, f64::max);
                // Nearly tied eigenvalues slow power iteration down; a
                // clean non-convergence error is acceptable there, and an
                // accepted value may carry error on the scale of the gap.
                match a.spectral_radius() {
                    Ok(got) => prop_assert!((got - expect).abs() <= 1e-5 * (1.0 + expect)),
                    Err(Error::SpectralRadiusDiverged { .. }) => {}
                    Err(e) => prop_assert!(false, "unexpected error {e}"),
                }
            }

            #[test]
            fn sum_norm_is_submultiplicative(
                rows_a in prop::collection::vec(prop::collection::vec(0.0f64..3.0, 3), 3),
                rows_b in prop::collection::vec(prop::collection::vec(0.0f64..3.0, 3), 3),
            ) {
                let a = Matrix::from_rows(&rows_a);
                let b = Matrix::from_rows(&rows_b);
                prop_assert!(a.mul(&b).sum_norm() <= a.sum_norm() * b.sum_norm() * (1.0 + 1e-12) + 1e-12);
            }
        }
    }
}
