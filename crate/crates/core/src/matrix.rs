// SPDX-License-Identifier: Apache-2.0

//! Small dense complex matrices for gate blocks (at most a few qubits wide).

use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance used for unitarity checks.
pub const UNITARY_TOL: f64 = 1e-10;

/// Square matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::LengthMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::new(dim, data.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self { dim, data }
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let dim = entries.len();
        let mut m = Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        };
        for (i, &e) in entries.iter().enumerate() {
            m.data[i * dim + i] = e;
        }
        m
    }

    /// `|a><b|` outer product.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Self {
        let dim = a.len();
        assert_eq!(dim, b.len());
        let mut data = Vec::with_capacity(dim * dim);
        for ai in a {
            for bj in b {
                data.push(ai * bj.conj());
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for c in 0..n {
                data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        Self { dim: n, data }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn kron(&self, other: &Matrix) -> Self {
        let (n, k) = (self.dim, other.dim);
        let dim = n * k;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for r1 in 0..n {
            for c1 in 0..n {
                let a = self.get(r1, c1);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for r2 in 0..k {
                    for c2 in 0..k {
                        data[(r1 * k + r2) * dim + c1 * k + c2] = a * other.get(r2, c2);
                    }
                }
            }
        }
        Self { dim, data }
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| {
                self.data[r * self.dim..(r + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Largest elementwise deviation of `self · self†` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let prod = self * &self.adjoint();
        let id = Matrix::identity(self.dim);
        prod.data
            .iter()
            .zip(&id.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn check_unitary(&self, tol: f64) -> Result<()> {
        let deviation = self.unitarity_deviation();
        if deviation > tol {
            return Err(Error::NonUnitary { deviation });
        }
        Ok(())
    }

    /// `self^(2^s)` by repeated squaring.
    pub fn pow2(&self, s: u32) -> Self {
        let mut m = self.clone();
        for _ in 0..s {
            m = &m * &m;
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        let n = self.dim;
        assert_eq!(n, rhs.dim);
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        Matrix { dim: n, data }
    }
}
