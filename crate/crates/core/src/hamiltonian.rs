//! The assembled operator `M_h = -1/2 Δ_h + V_h`, its stencil matvec, and
//! diagonal-basis exponentials of the two splitting parts
//! `H1 = (-1/2 Δ_h)/R` and `H2 = V_h/R`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::grid::{laplacian_eigenvalue_1d, GridSpec};
use crate::sine::SineTransform;
use crate::{Error, Result};

/// Immutable split Hamiltonian. `R = 3 d h^{-2}` bounds the spectral norm of
/// `M_h` so that eigenphases of `W = e^{i M_h / R}` lie in `[0, 1)`;
/// `sigma = 0` since both parts are non-negative.
#[derive(Debug, Clone)]
pub struct HamiltonianParts {
    grid: GridSpec,
    v_diag: Vec<f64>,
    r_scale: f64,
    sigma: f64,
    transform: SineTransform,
    // Per-axis 1D eigenvalues of -1/2 Δ_h, index 0 is k=1.
    axis_eigs: Vec<f64>,
}

impl HamiltonianParts {
    /// Assemble from a grid and sampled potential values (length `N^d`).
    pub fn assemble(grid: GridSpec, v_diag: Vec<f64>) -> Result<Self> {
        if v_diag.len() != grid.total_dim() {
            return Err(Error::RejectedInput(format!(
                "potential has {} entries, grid has {}",
                v_diag.len(),
                grid.total_dim()
            )));
        }
        let h = grid.h();
        let r_scale = 3.0 * grid.d() as f64 / (h * h);
        let axis_eigs = (1..=grid.n())
            .map(|k| laplacian_eigenvalue_1d(h, k))
            .collect();
        Ok(HamiltonianParts {
            transform: SineTransform::new(&grid),
            grid,
            v_diag,
            r_scale,
            sigma: 0.0,
            axis_eigs,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn v_diag(&self) -> &[f64] {
        &self.v_diag
    }

    pub fn r_scale(&self) -> f64 {
        self.r_scale
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn transform(&self) -> &SineTransform {
        &self.transform
    }

    /// `||H1|| <= 2/3` for every grid.
    pub fn h1_norm_bound(&self) -> f64 {
        2.0 / 3.0
    }

    /// `||H2|| <= M / (3 d h^{-2})`; computed from the sampled maximum.
    pub fn h2_norm_bound(&self) -> f64 {
        self.v_diag.iter().cloned().fold(0.0, f64::max) / self.r_scale
    }

    /// Eigenvalue of `-1/2 Δ_h` at the flat sine-basis index.
    fn lap_eig_flat(&self, flat: usize) -> f64 {
        let n = self.grid.n();
        let mut rem = flat;
        let mut e = 0.0;
        for _ in 0..self.grid.d() {
            e += self.axis_eigs[rem % n];
            rem /= n;
        }
        e
    }

    /// Stencil matvec of `-1/2 Δ_h` (never materialized densely).
    pub fn laplacian_matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.grid.n();
        let d = self.grid.d();
        let h = self.grid.h();
        let inv_h2 = 1.0 / (h * h);
        let mut y = vec![0.0; x.len()];
        for (flat, yi) in y.iter_mut().enumerate() {
            let mut acc = d as f64 * inv_h2 * x[flat];
            let mut stride = 1;
            let mut rem = flat;
            for _ in 0..d {
                let l = rem % n;
                if l > 0 {
                    acc -= 0.5 * inv_h2 * x[flat - stride];
                }
                if l + 1 < n {
                    acc -= 0.5 * inv_h2 * x[flat + stride];
                }
                rem /= n;
                stride *= n;
            }
            *yi = acc;
        }
        y
    }

    /// Matvec of the full `M_h = -1/2 Δ_h + V_h`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.laplacian_matvec(x);
        for (yi, (&vi, &xi)) in y.iter_mut().zip(self.v_diag.iter().zip(x)) {
            *yi += vi * xi;
        }
        y
    }

    /// Dense materialization of `M_h`, for the reference spectrum and for
    /// splitting-error oracles at small sizes.
    pub fn dense(&self) -> DMatrix<f64> {
        let dim = self.grid.total_dim();
        let mut m = DMatrix::zeros(dim, dim);
        let mut basis = vec![0.0; dim];
        for j in 0..dim {
            basis[j] = 1.0;
            let col = self.matvec(&basis);
            basis[j] = 0.0;
            for (i, &ci) in col.iter().enumerate() {
                m[(i, j)] = ci;
            }
        }
        m
    }

    /// Apply `e^{i H1 z}` with `H1 = (-1/2 Δ_h)/R`: forward sine transform,
    /// phase multiply by `z E0_{h,k} / R`, inverse transform.
    pub fn apply_h1_exponential(&self, state: &mut [Complex64], z: f64) -> Result<()> {
        self.check_len(state.len())?;
        if z == 0.0 {
            return Ok(());
        }
        self.transform.apply(state);
        for (flat, amp) in state.iter_mut().enumerate() {
            let phase = z * self.lap_eig_flat(flat) / self.r_scale;
            *amp *= Complex64::from_polar(1.0, phase);
        }
        self.transform.apply(state);
        Ok(())
    }

    /// Apply `e^{i H2 z}` with `H2 = V_h/R`: entrywise phase `z v_l / R`.
    pub fn apply_h2_exponential(&self, state: &mut [Complex64], z: f64) -> Result<()> {
        self.check_len(state.len())?;
        if z == 0.0 {
            return Ok(());
        }
        for (amp, &v) in state.iter_mut().zip(&self.v_diag) {
            if v != 0.0 {
                *amp *= Complex64::from_polar(1.0, z * v / self.r_scale);
            }
        }
        Ok(())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.grid.total_dim() {
            return Err(Error::RejectedInput(format!(
                "state has length {len}, grid has {}",
                self.grid.total_dim()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{laplacian_eigenpair, sample_potential, GridSpec, MultiIndex, Potential};
    use approx::assert_relative_eq;
    use nalgebra::SymmetricEigen;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn ham(d: usize, n: usize, p: &Potential) -> HamiltonianParts {
        let grid = GridSpec::new(d, n).unwrap();
        let v = sample_potential(p, &grid).unwrap();
        HamiltonianParts::assemble(grid, v).unwrap()
    }

    #[test]
    fn stencil_row_matches_spec() {
        // d=1, N=3, V=0: matvec on e1 is (1/h^2) (1, -1/2, 0)^T.
        let h = ham(1, 3, &Potential::zero());
        let inv_h2 = 16.0;
        let y = h.matvec(&[1.0, 0.0, 0.0]);
        assert_relative_eq!(y[0], inv_h2, max_relative = 1e-14);
        assert_relative_eq!(y[1], -0.5 * inv_h2, max_relative = 1e-14);
        assert_eq!(y[2], 0.0);
    }

    #[test]
    fn eigen_residual_against_stencil() {
        // d=1, N=7, k=3: (-1/2 Δ_h) u = E u against the stencil to 1e-10.
        let h = ham(1, 7, &Potential::zero());
        let k = MultiIndex::new(h.grid(), vec![3]).unwrap();
        let (e, u) = laplacian_eigenpair(h.grid(), &k);
        let hu = h.laplacian_matvec(&u);
        let res: f64 = hu
            .iter()
            .zip(&u)
            .map(|(a, b)| (a - e * b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(res < 1e-10 * e, "residual {res} vs eigenvalue {e}");
    }

    #[test]
    fn symmetric_on_random_pairs() {
        let h = ham(2, 4, &Potential::constant(1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dim = h.grid().total_dim();
        for _ in 0..20 {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mx = h.matvec(&x);
            let my = h.matvec(&y);
            let a: f64 = x.iter().zip(&my).map(|(u, v)| u * v).sum();
            let b: f64 = mx.iter().zip(&y).map(|(u, v)| u * v).sum();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn assemble_rejects_length_mismatch() {
        let grid = GridSpec::new(1, 4).unwrap();
        assert!(HamiltonianParts::assemble(grid, vec![0.0; 3]).is_err());
    }

    #[test]
    fn h1_exponential_identity_at_zero() {
        let h = ham(1, 7, &Potential::product_sine(1.0));
        let mut state: Vec<Complex64> =
            (0..7).map(|i| Complex64::new(i as f64, -0.5)).collect();
        let orig = state.clone();
        h.apply_h1_exponential(&mut state, 0.0).unwrap();
        assert_eq!(state, orig);
        h.apply_h2_exponential(&mut state, 0.0).unwrap();
        assert_eq!(state, orig);
    }

    #[test]
    fn h2_exponential_identity_for_zero_potential() {
        let h = ham(1, 7, &Potential::zero());
        let mut state: Vec<Complex64> =
            (0..7).map(|i| Complex64::new(1.0, i as f64)).collect();
        let orig = state.clone();
        h.apply_h2_exponential(&mut state, 1.3).unwrap();
        assert_eq!(state, orig);
    }

    #[test]
    fn h1_exponential_eigenvector_global_phase() {
        let h = ham(1, 7, &Potential::zero());
        let k = MultiIndex::new(h.grid(), vec![2]).unwrap();
        let (e, u) = laplacian_eigenpair(h.grid(), &k);
        let z = 0.7;
        let mut state: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        h.apply_h1_exponential(&mut state, z).unwrap();
        let expected = Complex64::from_polar(1.0, z * e / h.r_scale());
        for (s, &ui) in state.iter().zip(&u) {
            assert!((s - expected * ui).norm() < 1e-12);
        }
    }

    #[test]
    fn h1_exponential_matches_dense_expm() {
        // Random state, d=1, N=7, z=0.3, against a dense matrix exponential
        // built from the eigendecomposition of -1/2 Δ_h.
        let h = ham(1, 7, &Potential::zero());
        let z = 0.3;
        let dim = 7;
        let dense = h.dense();
        let eig = SymmetricEigen::new(dense);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let state: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        // expm via U diag(e^{i z λ / R}) U^T acting on re and im parts.
        let mut expected = vec![Complex64::default(); dim];
        for (s, lambda) in eig.eigenvalues.iter().enumerate() {
            let col = eig.eigenvectors.column(s);
            let proj: Complex64 = state
                .iter()
                .zip(col.iter())
                .map(|(x, &u)| x * u)
                .sum();
            let phase = Complex64::from_polar(1.0, z * lambda / h.r_scale());
            for (e_i, &u) in expected.iter_mut().zip(col.iter()) {
                *e_i += phase * proj * u;
            }
        }
        let mut actual = state;
        h.apply_h1_exponential(&mut actual, z).unwrap();
        for (a, e) in actual.iter().zip(&expected) {
            assert!((a - e).norm() < 1e-8);
        }
    }

    #[test]
    fn h2_exponential_matches_dense_diagonal() {
        let h = ham(1, 7, &Potential::product_sine(1.0));
        let z = 1.1;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let state: Vec<Complex64> = (0..7)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let expected: Vec<Complex64> = state
            .iter()
            .zip(h.v_diag())
            .map(|(x, &v)| x * Complex64::from_polar(1.0, z * v / h.r_scale()))
            .collect();
        let mut actual = state;
        h.apply_h2_exponential(&mut actual, z).unwrap();
        for (a, e) in actual.iter().zip(&expected) {
            assert!((a - e).norm() < 1e-12);
        }
    }

    #[test]
    fn exponentials_preserve_norm() {
        let h = ham(2, 4, &Potential::well(1.5));
        let dim = h.grid().total_dim();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut state: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm_in: f64 = state.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        h.apply_h1_exponential(&mut state, 2.3).unwrap();
        h.apply_h2_exponential(&mut state, -0.9).unwrap();
        let norm_out: f64 = state.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        assert!((norm_in - norm_out).abs() < 1e-10);
    }

    #[test]
    fn h2_norm_bound_holds_exactly() {
        let h = ham(1, 15, &Potential::product_sine(1.0));
        let m = 1.0;
        assert!(h.h2_norm_bound() <= m / h.r_scale() + 1e-15);
    }

    #[test]
    fn orthonormal_eigenbasis() {
        // All pairs on a small grid.
        let grid = GridSpec::new(2, 4).unwrap();
        let n = grid.n();
        let mut vecs = Vec::new();
        for k1 in 1..=n {
            for k2 in 1..=n {
                let k = MultiIndex::new(&grid, vec![k1, k2]).unwrap();
                vecs.push(laplacian_eigenpair(&grid, &k).1);
            }
        }
        for (i, a) in vecs.iter().enumerate() {
            for (j, b) in vecs.iter().enumerate() {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn r_scale_definition() {
        let h = ham(2, 4, &Potential::zero());
        assert_relative_eq!(h.r_scale(), 3.0 * 2.0 * 25.0, max_relative = 1e-14);
        assert_eq!(h.sigma(), 0.0);
        // sigma is a lower bound on the spectrum: smallest analytic eigenvalue
        // is positive.
        let k = MultiIndex::new(h.grid(), vec![1, 1]).unwrap();
        assert!(crate::grid::laplacian_eigenvalue(h.grid(), &k) > h.sigma());
        let _ = PI;
    }
}
