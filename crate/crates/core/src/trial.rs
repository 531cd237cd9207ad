//! Construction of the trial eigenvector set: a selected subsequence of
//! continuum Laplacian levels with gaps exceeding the potential bound, the
//! derived cutoff, and the overlap profile of an eigenvector of `M_h`
//! against the sine eigenbasis.

use serde::Serialize;

use crate::grid::{self, GridSpec, MultiIndex};
use crate::sine::SineTransform;
use crate::spectrum::continuum_level_values;
use crate::{Error, Result};

/// `j+1` continuum levels with consecutive gaps exceeding `M`, the derived
/// offset `c' = E0_{(s_j)} - E0_{(0)}` and the overlap bound `B`.
#[derive(Debug, Clone, Serialize)]
pub struct LevelSubsequence {
    pub selected: Vec<f64>,
    pub m_bound: f64,
    pub c_prime: f64,
    /// Continuum bound `B = M + E0_{(s_j)}`.
    pub b_continuum: f64,
    /// Discrete cutoff `3M + E0_{(s_j)} + 1`.
    pub discrete_cutoff: f64,
}

/// Greedy subsequence over exact distinct continuum levels: starting from
/// the ground level, pick the next level exceeding the previous pick by more
/// than `M`, until `j+1` levels are selected.
pub fn build_level_subsequence(d: usize, m_bound: f64, j: usize) -> Result<LevelSubsequence> {
    if j < 1 {
        return Err(Error::RejectedInput("j must be >= 1".into()));
    }
    if m_bound < 0.0 {
        return Err(Error::RejectedInput("M must be non-negative".into()));
    }
    let ground = 0.5 * d as f64 * std::f64::consts::PI.powi(2);
    let mut bound = ground + (j as f64 + 1.0) * (m_bound + 5.0 * std::f64::consts::PI.powi(2));
    loop {
        let levels = continuum_level_values(d, bound);
        let mut selected = vec![levels[0]];
        for &l in &levels[1..] {
            if l - selected.last().unwrap() > m_bound {
                selected.push(l);
                if selected.len() == j + 1 {
                    let top = *selected.last().unwrap();
                    return Ok(LevelSubsequence {
                        c_prime: top - selected[0],
                        b_continuum: m_bound + top,
                        discrete_cutoff: 3.0 * m_bound + top + 1.0,
                        selected,
                        m_bound,
                    });
                }
            }
        }
        // Levels are unbounded above; widen the enumeration window.
        bound *= 2.0;
    }
}

/// The set of Laplacian multi-indices whose discrete eigenvalue does not
/// exceed the cutoff, in lexicographic order.
#[derive(Debug, Clone, Serialize)]
pub struct TrialSet {
    pub indices: Vec<MultiIndex>,
    pub cutoff: f64,
    /// Overlap constant `c` (default 2, kept configurable).
    pub c: f64,
}

impl TrialSet {
    pub fn cardinality(&self) -> usize {
        self.indices.len()
    }

    /// `q = 1 - 1/c^2`, the guaranteed in-set overlap mass.
    pub fn q(&self) -> f64 {
        1.0 - 1.0 / (self.c * self.c)
    }
}

/// Exhaustively enumerate multi-indices with `E0_{h,k} <= cutoff`, pruning
/// each axis once the partial sum exceeds the cutoff (per-axis eigenvalues
/// increase with the component).
pub fn enumerate_trial_indices(grid: &GridSpec, sub: &LevelSubsequence) -> Result<TrialSet> {
    enumerate_trial_indices_with_c(grid, sub, 2.0)
}

pub fn enumerate_trial_indices_with_c(
    grid: &GridSpec,
    sub: &LevelSubsequence,
    c: f64,
) -> Result<TrialSet> {
    let cutoff = sub.discrete_cutoff;
    let d = grid.d();
    let n = grid.n();
    let h = grid.h();
    let axis: Vec<f64> = (1..=n)
        .map(|k| grid::laplacian_eigenvalue_1d(h, k))
        .collect();
    let ground = d as f64 * axis[0];
    if cutoff < ground {
        return Err(Error::EmptyTrialSet { cutoff, ground });
    }
    let mut indices = Vec::new();
    let mut current = vec![1usize; d];
    // DFS over axes; remaining axes contribute at least axis[0] each.
    fn recurse(
        axis: &[f64],
        d: usize,
        cutoff: f64,
        depth: usize,
        partial: f64,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if depth == d {
            out.push(current.clone());
            return;
        }
        let tail_min = (d - depth - 1) as f64 * axis[0];
        for (i, &a) in axis.iter().enumerate() {
            if partial + a + tail_min > cutoff {
                break;
            }
            current[depth] = i + 1;
            recurse(axis, d, cutoff, depth + 1, partial + a, current, out);
        }
        current[depth] = 1;
    }
    let mut raw = Vec::new();
    recurse(&axis, d, cutoff, 0, 0.0, &mut current, &mut raw);
    // DFS emits components most-significant-first within each axis loop;
    // sort to pin lexicographic order regardless of traversal details.
    raw.sort();
    for comps in raw {
        indices.push(MultiIndex::new(grid, comps)?);
    }
    Ok(TrialSet { indices, cutoff, c })
}

/// Expansion of a unit vector in the sine eigenbasis with the masses and the
/// residual moment used by the overlap guarantees.
#[derive(Debug, Clone)]
pub struct OverlapProfile {
    /// `|beta_i|^2` indexed like the flat sine basis.
    pub betas: Vec<f64>,
    /// Mass on the trial set, `sum_{k in S} |beta_k|^2`.
    pub in_set_mass: f64,
    /// `sum_i |beta_i|^2 (E0_{h,i} - E)^2`.
    pub residual: f64,
    /// `1 - 1/c^2`.
    pub q: f64,
    /// Largest single mass over trial-set members.
    pub max_in_set: f64,
}

/// Expand `u` (a unit eigenvector of `M_h` with eigenvalue `e`) in the sine
/// basis and report the trial-set overlap masses.
pub fn overlap_profile(
    u: &[f64],
    e: f64,
    grid: &GridSpec,
    trial: &TrialSet,
) -> Result<OverlapProfile> {
    if u.len() != grid.total_dim() {
        return Err(Error::RejectedInput(format!(
            "vector length {} does not match grid dimension {}",
            u.len(),
            grid.total_dim()
        )));
    }
    let norm: f64 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::RejectedInput(format!(
            "vector is not unit norm (||u|| = {norm})"
        )));
    }
    let transform = SineTransform::new(grid);
    let coeffs = transform.apply_real(u);
    let betas: Vec<f64> = coeffs.iter().map(|c| c * c).collect();
    let n = grid.n();
    let h = grid.h();
    let axis: Vec<f64> = (1..=n)
        .map(|k| grid::laplacian_eigenvalue_1d(h, k))
        .collect();
    let mut residual = 0.0;
    for (flat, &b) in betas.iter().enumerate() {
        let mut rem = flat;
        let mut lam = 0.0;
        for _ in 0..grid.d() {
            lam += axis[rem % n];
            rem /= n;
        }
        residual += b * (lam - e).powi(2);
    }
    let mut in_set_mass = 0.0;
    let mut max_in_set: f64 = 0.0;
    for k in &trial.indices {
        let b = betas[grid.flat_index(k)];
        in_set_mass += b;
        max_in_set = max_in_set.max(b);
    }
    Ok(OverlapProfile {
        betas,
        in_set_mass,
        residual,
        q: trial.q(),
        max_in_set,
    })
}
