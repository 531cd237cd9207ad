//! Orthogonal sine transform on the tensor grid.
//!
//! The length-N matrix `S[k][l] = sqrt(2h) sin((k+1)(l+1) pi h)` with
//! `h = 1/(N+1)` is symmetric and involutive (`S S = I`); its columns are the
//! 1D Dirichlet Laplacian eigenvectors. Applying it along every axis maps a
//! statevector between the position basis and the Laplacian eigenbasis.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::grid::GridSpec;

/// Precomputed 1D transform matrix for one grid, applied axis by axis.
#[derive(Debug, Clone)]
pub struct SineTransform {
    n: usize,
    d: usize,
    // Row-major N x N matrix; symmetric, so row/column order is immaterial.
    mat: Vec<f64>,
}

impl SineTransform {
    pub fn new(grid: &GridSpec) -> Self {
        let n = grid.n();
        let h = grid.h();
        let scale = (2.0 * h).sqrt();
        let mut mat = vec![0.0; n * n];
        for k in 0..n {
            for l in 0..n {
                mat[k * n + l] = scale * ((k + 1) as f64 * (l + 1) as f64 * PI * h).sin();
            }
        }
        SineTransform {
            n,
            d: grid.d(),
            mat,
        }
    }

    /// Apply the transform along one axis of the row-major (axis 1 fastest)
    /// state. Self-inverse, so the same call performs forward and inverse.
    pub fn apply_axis(&self, state: &mut [Complex64], axis: usize) {
        let n = self.n;
        let stride = n.pow(axis as u32);
        let block = stride * n;
        let total = state.len();
        let mut line = vec![Complex64::default(); n];
        for base in (0..total).step_by(block) {
            for off in 0..stride {
                let start = base + off;
                for (i, li) in line.iter_mut().enumerate() {
                    *li = state[start + i * stride];
                }
                for k in 0..n {
                    let row = &self.mat[k * n..(k + 1) * n];
                    let mut acc = Complex64::default();
                    for (i, &li) in line.iter().enumerate() {
                        acc += li * row[i];
                    }
                    state[start + k * stride] = acc;
                }
            }
        }
    }

    /// Full d-dimensional transform (position basis <-> sine eigenbasis).
    pub fn apply(&self, state: &mut [Complex64]) {
        for axis in 0..self.d {
            self.apply_axis(state, axis);
        }
    }

    /// Transform a real vector, returning its sine-basis coefficients.
    pub fn apply_real(&self, state: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex64> = state.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.apply(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}
