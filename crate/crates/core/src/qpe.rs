//! Phase estimation over the walk operator: the analytic outcome kernel for
//! exact simulation, a statevector circuit path driven by product-formula
//! schedules, outcome sampling, and the truncation to `b` reported bits.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::hamiltonian::HamiltonianParts;
use crate::splitting::{apply_schedule, ExponentialSchedule};
use crate::{Error, Result};

/// Hard cap on the joint ancilla+system statevector for the circuit path.
const JOINT_CAP: usize = 1 << 27;

/// Register sizes: `b` reported bits plus `t0` buffer bits.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QpeConfig {
    pub b: u32,
    pub t0: u32,
}

impl QpeConfig {
    pub fn new(b: u32, t0: u32) -> Result<Self> {
        if b < 1 {
            return Err(Error::RejectedInput("b must be >= 1".into()));
        }
        if t0 < 2 {
            return Err(Error::RejectedInput(
                "t0 must be >= 2 (the success bound needs 2^t0 > 2)".into(),
            ));
        }
        if b + t0 > 24 {
            return Err(Error::RejectedInput(format!(
                "t = b + t0 = {} exceeds the supported limit of 24 bits",
                b + t0
            )));
        }
        Ok(Self { b, t0 })
    }

    pub fn t(&self) -> u32 {
        self.b + self.t0
    }

    /// Per-measurement success floor `1 - 1/(2 (2^t0 - 2))`.
    pub fn success_floor(&self) -> f64 {
        1.0 - 1.0 / (2.0 * (2f64.powi(self.t0 as i32) - 2.0))
    }
}

/// Map an eigenvalue to its walk phase `(e - sigma) / (2 pi R)`, rejecting
/// values outside `[0, 1)` where the readout would wrap.
pub fn phase_of_energy(e: f64, r_scale: f64, sigma: f64) -> Result<f64> {
    let phi = (e - sigma) / (2.0 * std::f64::consts::PI * r_scale);
    if !(0.0..1.0).contains(&phi) {
        return Err(Error::InvalidScaling { phase: phi, r: r_scale });
    }
    Ok(phi)
}

/// `P(l) = sin^2(2^t pi delta) / (4^t sin^2(pi delta))` with
/// `delta = phi - l/2^t`; the numerator is the same for every `l`.
pub fn outcome_kernel(phi: f64, t: u32) -> Vec<f64> {
    let cap = 1usize << t;
    let capf = cap as f64;
    let num = (capf * std::f64::consts::PI * phi).sin().powi(2);
    let mut probs = vec![0.0; cap];
    for (l, p) in probs.iter_mut().enumerate() {
        let delta = phi - l as f64 / capf;
        let den = (std::f64::consts::PI * delta).sin().powi(2) * capf * capf;
        if den < f64::MIN_POSITIVE || delta.abs() < 1e-15 {
            *p = 1.0;
        } else {
            *p = num / den;
        }
    }
    probs
}

/// A probability table over the `2^t` ancilla outcomes with its CDF, ready
/// for inverse-transform sampling.
#[derive(Debug, Clone)]
pub struct OutcomeDistribution {
    pub probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::Numeric(format!(
                "outcome probabilities sum to {total}, not 1"
            )));
        }
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cdf.push(acc);
        }
        Ok(Self { probs, cdf })
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> u64 {
        let u: f64 = rng.gen::<f64>() * self.cdf.last().copied().unwrap_or(1.0);
        self.cdf.partition_point(|&c| c < u) as u64
    }
}

/// Outcome distribution for a state expanded over eigenphases: mixes the
/// analytic kernel with the given weights, skipping negligible terms.
pub fn exact_outcome_distribution(components: &[(f64, f64)], t: u32) -> Result<OutcomeDistribution> {
    let cap = 1usize << t;
    let mut probs = vec![0.0; cap];
    let mut kept = 0.0;
    for &(w, phi) in components {
        if w < 1e-14 {
            continue;
        }
        if !(0.0..1.0).contains(&phi) {
            return Err(Error::InvalidScaling { phase: phi, r: f64::NAN });
        }
        kept += w;
        for (p, k) in probs.iter_mut().zip(outcome_kernel(phi, t)) {
            *p += w * k;
        }
    }
    if (kept - 1.0).abs() > 1e-6 {
        return Err(Error::Numeric(format!(
            "phase component weights sum to {kept}, not 1"
        )));
    }
    OutcomeDistribution::from_probs(probs)
}

/// Run the phase-estimation circuit on a joint `2^t x dim` statevector with
/// caller-supplied controlled powers: `apply_power(tau, system)` must apply
/// the (approximate) `W^(2^tau)` in place.
pub fn qpe_distribution_with<F>(
    mut apply_power: F,
    system_init: &[f64],
    t: u32,
) -> Result<Vec<f64>>
where
    F: FnMut(u32, &mut [Complex64]) -> Result<()>,
{
    let dim = system_init.len();
    let cap = 1usize << t;
    let joint_len = cap
        .checked_mul(dim)
        .filter(|&n| n <= JOINT_CAP)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "joint statevector 2^{t} x {dim} exceeds the circuit-path limit"
            ))
        })?;
    let norm: f64 = system_init.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::RejectedInput(format!(
            "initial system state is not unit norm (||psi|| = {norm})"
        )));
    }

    // Hadamard layer on the ancilla register: uniform superposition.
    let amp = 1.0 / (cap as f64).sqrt();
    let mut joint: Vec<Complex64> = Vec::with_capacity(joint_len);
    for _ in 0..cap {
        joint.extend(system_init.iter().map(|&x| Complex64::new(amp * x, 0.0)));
    }

    // Controlled powers: block a sees W^a = prod over set bits tau.
    for tau in 0..t {
        for a in 0..cap {
            if a >> tau & 1 == 1 {
                apply_power(tau, &mut joint[a * dim..(a + 1) * dim])?;
            }
        }
    }

    // Inverse QFT on the ancilla, per system coordinate.
    let fft = FftPlanner::new().plan_fft_forward(cap);
    let mut column = vec![Complex64::new(0.0, 0.0); cap];
    for s in 0..dim {
        for a in 0..cap {
            column[a] = joint[a * dim + s];
        }
        fft.process(&mut column);
        for a in 0..cap {
            joint[a * dim + s] = column[a] * amp;
        }
    }

    // Marginalize out the system register.
    let probs: Vec<f64> = (0..cap)
        .map(|l| joint[l * dim..(l + 1) * dim].iter().map(|z| z.norm_sqr()).sum())
        .collect();
    Ok(probs)
}

/// Circuit-path distribution using product-formula schedules for the
/// controlled powers; `schedules[tau]` must target `W^(2^tau)`.
pub fn trotterized_qpe(
    ham: &HamiltonianParts,
    schedules: &[ExponentialSchedule],
    system_init: &[f64],
    t: u32,
) -> Result<Vec<f64>> {
    if schedules.len() != t as usize {
        return Err(Error::RejectedInput(format!(
            "need {t} schedules (one per ancilla bit), got {}",
            schedules.len()
        )));
    }
    for (tau, s) in schedules.iter().enumerate() {
        if s.tau != tau as u32 {
            return Err(Error::RejectedInput(format!(
                "schedule at position {tau} targets power 2^{}",
                s.tau
            )));
        }
    }
    qpe_distribution_with(
        |tau, state| apply_schedule(ham, &schedules[tau as usize], state),
        system_init,
        t,
    )
}

/// Drop the `t0` buffer bits: `m = floor(m' / 2^t0)`.
pub fn truncate_outcome(m_prime: u64, t0: u32) -> u64 {
    m_prime >> t0
}

/// Convert a truncated outcome back to an energy, `2 pi R m / 2^b + sigma`.
pub fn outcome_to_energy(m: u64, b: u32, r_scale: f64, sigma: f64) -> f64 {
    2.0 * std::f64::consts::PI * r_scale * m as f64 / 2f64.powi(b as i32) + sigma
}
