//! The level-finding loops: repeated phase estimation over the trial set,
//! minimum-outcome selection with the two-unit guard band, the resulting
//! energy estimates, and the a-priori success bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::laplacian_eigenpair;
use crate::hamiltonian::HamiltonianParts;
use crate::qpe::{
    exact_outcome_distribution, outcome_to_energy, phase_of_energy, truncate_outcome,
    trotterized_qpe, OutcomeDistribution, QpeConfig,
};
use crate::rng::derive_rng;
use crate::spectrum::{dense_spectrum, SpectrumTable};
use crate::splitting::{error_budget, optimal_order, trotterized_power, ExponentialSchedule, SUZUKI_C_HAT};
use crate::trial::TrialSet;
use crate::{Error, Result};

/// How the per-trial-vector outcome distributions are produced.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Backend {
    /// Analytic outcome kernel mixed over the dense eigendecomposition.
    Exact,
    /// Statevector circuit with product-formula powers. `order_k = 0`
    /// selects the order automatically from the error budget.
    Trotter { order_k: u32, g: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunOptions {
    /// Number of levels to estimate.
    pub j: usize,
    /// Phase-estimation repetitions per trial vector per level.
    pub r: usize,
    pub seed: u64,
    pub backend: Backend,
}

/// One phase-estimation shot: which level pass, repetition, and trial
/// vector produced it, the raw `t`-bit outcome, and its `b`-bit truncation.
#[derive(Debug, Clone, Serialize)]
pub struct MeasurementRecord {
    pub pass_index: usize,
    pub repetition: usize,
    pub trial_index: usize,
    pub m_raw: u64,
    pub m: u64,
    pub selected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelEstimates {
    pub energies: Vec<f64>,
    pub selected_outcomes: Vec<u64>,
    pub records: Vec<MeasurementRecord>,
}

/// Outcome distributions, one per trial vector; they do not depend on the
/// pass or repetition, so they are computed once up front.
pub fn build_trial_distributions(
    ham: &HamiltonianParts,
    trial: &TrialSet,
    qpe: &QpeConfig,
    backend: &Backend,
) -> Result<Vec<OutcomeDistribution>> {
    match backend {
        Backend::Exact => {
            let table = dense_spectrum(ham)?;
            exact_trial_distributions(ham, trial, qpe, &table)
        }
        Backend::Trotter { order_k, g } => {
            let budget = error_budget(qpe.b, qpe.t0, *g)?;
            let k = if *order_k == 0 {
                optimal_order(*g, budget.eps_tau[0], SUZUKI_C_HAT)
            } else {
                *order_k
            };
            let schedules: Vec<ExponentialSchedule> = budget
                .eps_tau
                .iter()
                .enumerate()
                .map(|(tau, &eps)| trotterized_power(ham, tau as u32, eps, k))
                .collect::<Result<_>>()?;
            trial
                .indices
                .par_iter()
                .map(|kidx| {
                    let (_, u) = laplacian_eigenpair(ham.grid(), kidx);
                    let probs = trotterized_qpe(ham, &schedules, &u, qpe.t())?;
                    OutcomeDistribution::from_probs(probs)
                })
                .collect()
        }
    }
}

/// Exact-path distributions from a precomputed eigendecomposition.
pub fn exact_trial_distributions(
    ham: &HamiltonianParts,
    trial: &TrialSet,
    qpe: &QpeConfig,
    table: &SpectrumTable,
) -> Result<Vec<OutcomeDistribution>> {
    let dim = ham.grid().total_dim();
    let phases: Vec<f64> = table
        .eigenvalues
        .iter()
        .map(|&e| phase_of_energy(e, ham.r_scale(), ham.sigma()))
        .collect::<Result<_>>()?;
    trial
        .indices
        .par_iter()
        .map(|kidx| {
            let (_, s) = laplacian_eigenpair(ham.grid(), kidx);
            let components: Vec<(f64, f64)> = (0..dim)
                .map(|i| {
                    let overlap: f64 =
                        (0..dim).map(|row| table.eigenvectors[(row, i)] * s[row]).sum();
                    (overlap * overlap, phases[i])
                })
                .collect();
            exact_outcome_distribution(&components, qpe.t())
        })
        .collect()
}

/// Smallest recorded outcome at least two units above the previous pick.
pub fn select_next(outcomes: &[u64], last: i64) -> Option<u64> {
    outcomes
        .iter()
        .copied()
        .filter(|&m| m as i64 >= last + 2)
        .min()
}

/// Estimate the lowest `j` well-separated levels. Each pass draws `r`
/// fresh measurements per trial vector, then keeps the smallest truncated
/// outcome at least two units above the previous pass's pick.
pub fn run_algorithm2(
    ham: &HamiltonianParts,
    trial: &TrialSet,
    qpe: &QpeConfig,
    opts: &RunOptions,
) -> Result<LevelEstimates> {
    let dists = build_trial_distributions(ham, trial, qpe, &opts.backend)?;
    run_with_distributions(&dists, ham, qpe, opts)
}

/// Single-level variant: one pass, selecting the minimum outcome outright.
pub fn run_algorithm1(
    ham: &HamiltonianParts,
    trial: &TrialSet,
    qpe: &QpeConfig,
    opts: &RunOptions,
) -> Result<LevelEstimates> {
    let single = RunOptions { j: 1, ..opts.clone() };
    run_algorithm2(ham, trial, qpe, &single)
}

/// Core loop over precomputed distributions (lets callers run many seeds
/// without rebuilding the distributions).
pub fn run_with_distributions(
    dists: &[OutcomeDistribution],
    ham: &HamiltonianParts,
    qpe: &QpeConfig,
    opts: &RunOptions,
) -> Result<LevelEstimates> {
    if opts.j < 1 || opts.r < 1 {
        return Err(Error::RejectedInput("j and r must be >= 1".into()));
    }
    let mut records = Vec::with_capacity(opts.j * opts.r * dists.len());
    let mut energies = Vec::with_capacity(opts.j);
    let mut selected_outcomes = Vec::with_capacity(opts.j);
    let mut last: i64 = -2;
    for pass in 0..opts.j {
        let start = records.len();
        for rep in 0..opts.r {
            for (ti, dist) in dists.iter().enumerate() {
                let mut rng =
                    derive_rng(opts.seed, &[pass as u64, rep as u64, ti as u64]);
                let m_raw = dist.sample(&mut rng);
                records.push(MeasurementRecord {
                    pass_index: pass,
                    repetition: rep,
                    trial_index: ti,
                    m_raw,
                    m: truncate_outcome(m_raw, qpe.t0),
                    selected: false,
                });
            }
        }
        let pass_outcomes: Vec<u64> = records[start..].iter().map(|rec| rec.m).collect();
        let pick = select_next(&pass_outcomes, last)
            .ok_or(Error::Exhausted { last, required: last + 2 })?;
        if let Some(rec) = records[start..].iter_mut().find(|rec| rec.m == pick) {
            rec.selected = true;
        }
        last = pick as i64;
        selected_outcomes.push(pick);
        energies.push(outcome_to_energy(pick, qpe.b, ham.r_scale(), ham.sigma()));
    }
    Ok(LevelEstimates { energies, selected_outcomes, records })
}

/// A-priori lower bound on the probability that all `j` estimates land
/// correctly: per pass, the chance of missing every in-band outcome decays
/// as `exp(-r q p / |S|)` and stray outcomes cost at most `r |S| / (2^t0 - 2)`.
pub fn success_bound(j: usize, r: usize, s_card: usize, t0: u32, q: f64) -> f64 {
    let p = 1.0 - 1.0 / (2f64.powi(t0 as i32) - 2.0);
    let miss = (-(r as f64) * q * p / s_card as f64).exp();
    let stray = (r * s_card) as f64 / (2f64.powi(t0 as i32) - 2.0);
    (1.0 - (miss + stray)).max(0.0).powi(j as i32)
}

/// Smallest `r` whose in-band miss probability per pass drops below
/// `delta`, given `q = 3/4` overlap mass.
pub fn default_repetitions(s_card: usize, t0: u32, q: f64, delta: f64) -> usize {
    let p = 1.0 - 1.0 / (2f64.powi(t0 as i32) - 2.0);
    ((s_card as f64 * (1.0 / delta).ln() / (q * p)).ceil() as usize).max(1)
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    /// Reference level index matched to each estimate, in order.
    pub assignments: Vec<usize>,
    /// Every estimate lies within `slack * eps` of a distinct reference level.
    pub proximity_ok: bool,
    /// No well-separated reference level skipped between consecutive picks.
    pub no_skips: bool,
    pub eps: f64,
}

impl VerifyReport {
    pub fn all_ok(&self) -> bool {
        self.proximity_ok && self.no_skips
    }
}

/// Check the estimates against reference levels. `eps` is an outcome unit
/// `2 pi R / 2^b`; each estimate must sit within `slack * eps` of its own
/// reference level (assignments strictly increasing), and whenever two
/// consecutive picks differ by more than `3 eps`, no intermediate reference
/// level at distance more than `slack * eps` from both may be skipped.
pub fn verify_conditions(
    estimates: &[f64],
    reference: &[f64],
    eps: f64,
    slack: f64,
) -> VerifyReport {
    let mut assignments = Vec::with_capacity(estimates.len());
    let mut proximity_ok = true;
    let mut next_free = 0usize;
    for &e in estimates {
        let found = (next_free..reference.len()).find(|&i| (reference[i] - e).abs() <= slack * eps);
        match found {
            Some(i) => {
                assignments.push(i);
                next_free = i + 1;
            }
            None => {
                proximity_ok = false;
                assignments.push(usize::MAX);
            }
        }
    }
    let mut no_skips = true;
    for w in estimates.windows(2) {
        if w[1] - w[0] > 3.0 * eps {
            let skipped = reference.iter().any(|&l| {
                l > w[0] + slack * eps && l < w[1] - slack * eps
            });
            if skipped {
                no_skips = false;
            }
        }
    }
    VerifyReport { assignments, proximity_ok, no_skips, eps }
}
