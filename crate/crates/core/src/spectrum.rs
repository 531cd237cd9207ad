//! Classical ground truth: dense eigendecomposition of `M_h` at small sizes,
//! clustering of near-degenerate eigenvalues into distinct levels, and the
//! empirical discretization-error rate check.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::grid::{self, GridSpec, MultiIndex};
use crate::hamiltonian::HamiltonianParts;
use crate::{Error, Result};

/// Default cap on `N^d` for dense eigendecomposition.
pub const DENSE_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumSource {
    Dense,
    AnalyticLaplacian,
}

/// Sorted eigenpairs of `M_h` (or of `-1/2 Δ_h` on the analytic path).
#[derive(Debug, Clone)]
pub struct SpectrumTable {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns aligned with `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
    pub source: SpectrumSource,
}

impl SpectrumTable {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i).iter().cloned().collect()
    }
}

/// Full symmetric eigendecomposition of the densely materialized `M_h`.
pub fn dense_spectrum(ham: &HamiltonianParts) -> Result<SpectrumTable> {
    dense_spectrum_capped(ham, DENSE_CAP)
}

pub fn dense_spectrum_capped(ham: &HamiltonianParts, cap: usize) -> Result<SpectrumTable> {
    let dim = ham.grid().total_dim();
    if dim > cap {
        return Err(Error::Capacity(format!(
            "N^d = {dim} exceeds the dense cap {cap}; use the analytic Laplacian path"
        )));
    }
    let eig = SymmetricEigen::new(ham.dense());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::zeros(dim, dim);
    for (col, &i) in order.iter().enumerate() {
        eigenvectors.set_column(col, &eig.eigenvectors.column(i));
    }
    Ok(SpectrumTable {
        eigenvalues,
        eigenvectors,
        source: SpectrumSource::Dense,
    })
}

/// Analytic spectrum of `-1/2 Δ_h` from the tensor sine eigenpairs (V = 0).
pub fn analytic_laplacian_spectrum(grid: &GridSpec) -> SpectrumTable {
    let dim = grid.total_dim();
    let mut pairs: Vec<(f64, usize)> = (0..dim)
        .map(|flat| {
            let k = flat_to_multi(grid, flat);
            (grid::laplacian_eigenvalue(grid, &k), flat)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut eigenvectors = DMatrix::zeros(dim, dim);
    for (col, &(_, flat)) in pairs.iter().enumerate() {
        let k = flat_to_multi(grid, flat);
        let (_, v) = grid::laplacian_eigenpair(grid, &k);
        eigenvectors.set_column(col, &DVector::from_vec(v));
    }
    SpectrumTable {
        eigenvalues: pairs.into_iter().map(|(e, _)| e).collect(),
        eigenvectors,
        source: SpectrumSource::AnalyticLaplacian,
    }
}

fn flat_to_multi(grid: &GridSpec, flat: usize) -> MultiIndex {
    let n = grid.n();
    let mut rem = flat;
    let comps: Vec<usize> = (0..grid.d())
        .map(|_| {
            let k = rem % n + 1;
            rem /= n;
            k
        })
        .collect();
    MultiIndex::new(grid, comps).expect("flat index in range")
}

/// Distinct levels of a sorted eigenvalue list with their member index
/// ranges. Clustering is greedy from the minimum: a new cluster starts when
/// the next eigenvalue exceeds the current representative (cluster minimum)
/// by more than `tol`.
#[derive(Debug, Clone, Serialize)]
pub struct LevelClusters {
    pub levels: Vec<f64>,
    /// Half-open member index ranges per level, into the sorted sequence.
    pub members: Vec<(usize, usize)>,
    pub tol: f64,
}

impl LevelClusters {
    pub fn multiplicity(&self, i: usize) -> usize {
        self.members[i].1 - self.members[i].0
    }
}

pub fn distinct_levels(eigenvalues: &[f64], tol: f64) -> LevelClusters {
    let mut levels = Vec::new();
    let mut members = Vec::new();
    let mut start = 0usize;
    for (i, &e) in eigenvalues.iter().enumerate() {
        if i == 0 {
            levels.push(e);
            continue;
        }
        if e - levels.last().unwrap() > tol {
            members.push((start, i));
            levels.push(e);
            start = i;
        }
    }
    if !eigenvalues.is_empty() {
        members.push((start, eigenvalues.len()));
    }
    LevelClusters {
        levels,
        members,
        tol,
    }
}

/// Exact distinct continuum Laplacian levels `(pi^2/2) sum k_i^2 <= bound`
/// with multiplicities, by dynamic programming over achievable square sums.
pub fn continuum_levels(d: usize, count: usize, bound: f64) -> LevelClusters {
    let counts = square_sum_counts(d, bound);
    let mut levels = Vec::new();
    let mut members = Vec::new();
    let mut cursor = 0usize;
    for (s, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        levels.push(0.5 * s as f64 * std::f64::consts::PI.powi(2));
        let mult = usize::try_from(c).unwrap_or(usize::MAX);
        members.push((cursor, cursor.saturating_add(mult)));
        cursor = cursor.saturating_add(mult);
        if levels.len() >= count && count > 0 {
            break;
        }
    }
    LevelClusters {
        levels,
        members,
        tol: 0.0,
    }
}

/// Number of tuples in `N^d` with each square sum `s <= 2 bound / pi^2`.
fn square_sum_counts(d: usize, bound: f64) -> Vec<u128> {
    let smax = (2.0 * bound / std::f64::consts::PI.powi(2)).floor() as usize;
    let mut counts = vec![0u128; smax + 1];
    if smax == 0 {
        return counts;
    }
    counts[0] = 1;
    for _ in 0..d {
        let mut next = vec![0u128; smax + 1];
        for (s, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mut k = 1usize;
            while s + k * k <= smax {
                next[s + k * k] += c;
                k += 1;
            }
        }
        counts = next;
    }
    counts
}

/// All distinct continuum levels up to `bound`, ignoring multiplicity.
pub fn continuum_level_values(d: usize, bound: f64) -> Vec<f64> {
    continuum_levels(d, usize::MAX, bound).levels
}

/// The `idx`-th distinct analytic level of `-1/2 Δ_h` on the grid, for small
/// `idx`. Components above `idx + 3` cannot contribute to such a low level.
pub fn discrete_level(grid: &GridSpec, idx: usize) -> f64 {
    let kcap = (idx + 3).min(grid.n());
    let h = grid.h();
    let axis: Vec<f64> = (1..=kcap)
        .map(|k| grid::laplacian_eigenvalue_1d(h, k))
        .collect();
    let mut sums = vec![0.0f64];
    for _ in 0..grid.d() {
        let mut next = Vec::with_capacity(sums.len() * kcap);
        for &s in &sums {
            for &a in &axis {
                next.push(s + a);
            }
        }
        sums = next;
    }
    sums.sort_by(f64::total_cmp);
    let mut distinct: Vec<f64> = Vec::new();
    for s in sums {
        if distinct.last().map_or(true, |&l| s - l > 1e-9 * s.max(1.0)) {
            distinct.push(s);
        }
    }
    distinct[idx]
}

/// Log-log regression of the discretization error `|E0_{h,(k)} - E0_{(k)}|`
/// against `h` over a sequence of grid sizes. Returns the fitted order
/// (expected near 2) and the intercept-derived constant of `err ~ C d h^p`.
pub fn weinberger_check(d: usize, k: usize, n_sequence: &[usize]) -> Result<(f64, f64)> {
    if n_sequence.len() < 3 {
        return Err(Error::RejectedInput(
            "need at least 3 grid sizes for the rate fit".into(),
        ));
    }
    if n_sequence.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::RejectedInput(
            "grid sizes must be strictly increasing".into(),
        ));
    }
    let continuum = {
        // Enough levels to index k on the continuum side.
        let bound = 0.5 * (d + 8 * (k + 1)) as f64 * std::f64::consts::PI.powi(2);
        let levels = continuum_level_values(d, bound);
        levels[k]
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &n in n_sequence {
        let grid = GridSpec::new(d, n)?;
        let err = (discrete_level(&grid, k) - continuum).abs();
        if err == 0.0 {
            return Err(Error::Numeric("zero discretization error in rate fit".into()));
        }
        xs.push(grid.h().ln());
        ys.push(err.ln());
    }
    let (slope, intercept) = linear_fit(&xs, &ys)?;
    Ok((slope, intercept.exp() / d as f64))
}

/// Least-squares line `y = slope x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Numeric("degenerate regression".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}
