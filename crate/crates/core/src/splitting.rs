//! Suzuki product formulas for the controlled powers `W^(2^tau)` of the
//! walk operator `W = e^{i M_h / R}`, with the per-power error budget and
//! the exponential-count accounting that drives the cost model.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::hamiltonian::HamiltonianParts;
use crate::{Error, Result};

pub const SUZUKI_C_HAT: f64 = 8.0 * std::f64::consts::E;

/// Which of the two split terms an exponential applies: the kinetic part
/// `H1 = (-Delta_h/2)/R` (diagonal in the sine basis) or the potential part
/// `H2 = V_h/R` (diagonal in the grid basis).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OpTag {
    H1,
    H2,
}

/// A concrete sequence of elementary exponentials approximating
/// `e^{i (H1 + H2) T}` with `T = 2^tau`. `steps` holds (term, duration)
/// pairs after merging the junctions between consecutive substeps.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentialSchedule {
    pub tau: u32,
    pub order_k: u32,
    pub substeps: usize,
    pub steps: Vec<(OpTag, f64)>,
    /// Count before junction merging, `3 * 5^{k-1} * substeps`; this is the
    /// number the cost bound is stated against.
    pub unmerged_count: usize,
}

impl ExponentialSchedule {
    pub fn merged_count(&self) -> usize {
        self.steps.len()
    }

    pub fn count_by_tag(&self, tag: OpTag) -> usize {
        self.steps.iter().filter(|(t, _)| *t == tag).count()
    }

    pub fn duration_by_tag(&self, tag: OpTag) -> f64 {
        self.steps
            .iter()
            .filter(|(t, _)| *t == tag)
            .map(|(_, z)| z)
            .sum()
    }
}

fn suzuki_p(k: u32) -> f64 {
    1.0 / (4.0 - 4f64.powf(1.0 / (2.0 * k as f64 - 1.0)))
}

fn suzuki_unmerged(k: u32, dt: f64, out: &mut Vec<(OpTag, f64)>) {
    if k == 1 {
        out.push((OpTag::H1, dt / 2.0));
        out.push((OpTag::H2, dt));
        out.push((OpTag::H1, dt / 2.0));
        return;
    }
    let p = suzuki_p(k);
    for scale in [p, p, 1.0 - 4.0 * p, p, p] {
        suzuki_unmerged(k - 1, scale * dt, out);
    }
}

fn merge(steps: Vec<(OpTag, f64)>) -> Vec<(OpTag, f64)> {
    let mut merged: Vec<(OpTag, f64)> = Vec::with_capacity(steps.len());
    for (tag, z) in steps {
        match merged.last_mut() {
            Some((t, acc)) if *t == tag => *acc += z,
            _ => merged.push((tag, z)),
        }
    }
    merged
}

/// One substep of the order-2k formula over duration `dt`, junctions merged.
pub fn suzuki_steps(k: u32, dt: f64) -> Vec<(OpTag, f64)> {
    let mut raw = Vec::new();
    suzuki_unmerged(k, dt, &mut raw);
    merge(raw)
}

/// Number of elementary exponentials in one unmerged order-2k substep.
pub fn exponentials_per_substep(k: u32) -> usize {
    3 * 5usize.pow(k - 1)
}

/// Upper bound on the exponentials needed so the order-2k approximation of
/// `e^{i(H1+H2) 2^tau}` lands within `eps_tau` in spectral norm, floored at
/// the cost of a single substep.
pub fn exponential_count_bound(
    tau: u32,
    k: u32,
    h1_norm: f64,
    h2_norm: f64,
    eps_tau: f64,
) -> f64 {
    let e = std::f64::consts::E;
    let t_sim = 2f64.powi(tau as i32);
    let raw = 16.0
        * e
        * h1_norm
        * t_sim
        * (25f64 / 3.0).powi(k as i32 - 1)
        * (8.0 * e * t_sim * h2_norm / eps_tau).powf(1.0 / (2.0 * k as f64));
    raw.max(exponentials_per_substep(k) as f64)
}

/// Per-power error allocations `eps_tau = 2^{tau+1-t} / (40 g)` for
/// `tau = 0..t-1`; they sum to just under `1/(20 g)`.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorBudget {
    pub eps_tau: Vec<f64>,
    pub total: f64,
    pub g_value: f64,
}

pub fn error_budget(b: u32, t0: u32, g: f64) -> Result<ErrorBudget> {
    if g <= 0.0 {
        return Err(Error::RejectedInput("g must be positive".into()));
    }
    let t = b + t0;
    let eps_tau: Vec<f64> = (0..t)
        .map(|tau| 2f64.powi(tau as i32 + 1 - t as i32) / (40.0 * g))
        .collect();
    let total = eps_tau.iter().sum();
    Ok(ErrorBudget { eps_tau, total, g_value: g })
}

/// Splitting order minimizing the count bound:
/// `k* = floor(sqrt(log_{25/3}(C g^2 / eps) / 2) + 1/2)`, at least 1.
pub fn optimal_order(g: f64, eps: f64, c_hat: f64) -> u32 {
    let arg = c_hat * g * g / eps;
    if arg <= 1.0 {
        return 1;
    }
    let log = arg.ln() / (25f64 / 3.0).ln();
    let k = ((0.5 * log).sqrt() + 0.5).floor();
    (k as u32).max(1)
}

/// Build the order-2k schedule for `W^(2^tau)` whose unmerged count meets
/// the bound for `eps_tau`.
pub fn trotterized_power(
    ham: &HamiltonianParts,
    tau: u32,
    eps_tau: f64,
    k: u32,
) -> Result<ExponentialSchedule> {
    if k < 1 {
        return Err(Error::RejectedInput("splitting order k must be >= 1".into()));
    }
    if eps_tau <= 0.0 {
        return Err(Error::RejectedInput("eps_tau must be positive".into()));
    }
    let per = exponentials_per_substep(k);
    let t_full = 2f64.powi(tau as i32);
    if ham.h2_norm_bound() == 0.0 {
        // No potential term: the kinetic exponential alone is exact.
        return Ok(ExponentialSchedule {
            tau,
            order_k: k,
            substeps: 1,
            steps: vec![(OpTag::H1, t_full)],
            unmerged_count: 1,
        });
    }
    let bound = exponential_count_bound(tau, k, ham.h1_norm_bound(), ham.h2_norm_bound(), eps_tau);
    let substeps = ((bound / per as f64).ceil() as usize).max(1);
    let t_sim = 2f64.powi(tau as i32);
    let dt = t_sim / substeps as f64;
    let mut raw = Vec::with_capacity(per * substeps);
    for _ in 0..substeps {
        suzuki_unmerged(k, dt, &mut raw);
    }
    Ok(ExponentialSchedule {
        tau,
        order_k: k,
        substeps,
        steps: merge(raw),
        unmerged_count: per * substeps,
    })
}

/// Apply a schedule to a state vector in place.
pub fn apply_schedule(
    ham: &HamiltonianParts,
    schedule: &ExponentialSchedule,
    state: &mut [Complex64],
) -> Result<()> {
    for &(tag, z) in &schedule.steps {
        match tag {
            OpTag::H1 => ham.apply_h1_exponential(state, z)?,
            OpTag::H2 => ham.apply_h2_exponential(state, z)?,
        }
    }
    Ok(())
}

/// Materialize the schedule as a dense unitary (column by column).
pub fn schedule_unitary_dense(
    ham: &HamiltonianParts,
    schedule: &ExponentialSchedule,
) -> Result<DMatrix<Complex64>> {
    let dim = ham.grid().total_dim();
    let mut u = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut state = vec![Complex64::new(0.0, 0.0); dim];
        state[col] = Complex64::new(1.0, 0.0);
        apply_schedule(ham, schedule, &mut state)?;
        for row in 0..dim {
            u[(row, col)] = state[row];
        }
    }
    Ok(u)
}

/// Exact `W^(2^tau) = e^{i M_h 2^tau / R}` via dense eigendecomposition.
pub fn exact_power_dense(ham: &HamiltonianParts, tau: u32) -> DMatrix<Complex64> {
    let m = ham.dense();
    let eig = m.symmetric_eigen();
    let dim = ham.grid().total_dim();
    let t_sim = 2f64.powi(tau as i32);
    let mut u = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        let phase = Complex64::from_polar(1.0, eig.eigenvalues[a] * t_sim / ham.r_scale());
        for row in 0..dim {
            for col in 0..dim {
                u[(row, col)] +=
                    phase * Complex64::new(eig.eigenvectors[(row, a)] * eig.eigenvectors[(col, a)], 0.0);
            }
        }
    }
    u
}

/// Spectral-norm distance between two dense operators.
pub fn spectral_norm_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).svd(false, false).singular_values[0]
}
