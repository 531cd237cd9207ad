//! End-to-end acceptance checks. Each test prints a single PASS line on
//! success (visible with --nocapture); a failed assertion marks the
//! criterion as failed.

use qlevels::algorithm::{
    build_trial_distributions, default_repetitions, run_with_distributions, select_next,
    success_bound, verify_conditions, Backend, RunOptions,
};
use qlevels::grid::{sample_potential, GridSpec, Potential};
use qlevels::hamiltonian::HamiltonianParts;
use qlevels::qpe::QpeConfig;
use qlevels::rng::derive_rng;
use qlevels::spectrum::{
    analytic_laplacian_spectrum, dense_spectrum, distinct_levels, weinberger_check,
};
use qlevels::splitting::{
    error_budget, exact_power_dense, exponential_count_bound, schedule_unitary_dense,
    spectral_norm_diff, trotterized_power,
};
use qlevels::trial::{build_level_subsequence, enumerate_trial_indices, overlap_profile};

use rand::Rng;

fn outcome_unit(ham: &HamiltonianParts, b: u32) -> f64 {
    2.0 * std::f64::consts::PI * ham.r_scale() / 2f64.powi(b as i32)
}

#[test]
fn criterion_1_zero_potential_exactness() {
    let qpe = QpeConfig::new(12, 10).unwrap();
    for d in [1usize, 2] {
        for n in [8usize, 16] {
            let grid = GridSpec::new(d, n).unwrap();
            let v = sample_potential(&Potential::zero(), &grid).unwrap();
            let ham = HamiltonianParts::assemble(grid.clone(), v).unwrap();
            let sub = build_level_subsequence(d, 0.0, 2).unwrap();
            let trial = enumerate_trial_indices(&grid, &sub).unwrap();
            let dists =
                build_trial_distributions(&ham, &trial, &qpe, &Backend::Exact).unwrap();
            let r = default_repetitions(trial.cardinality(), qpe.t0, trial.q(), 0.05);
            let eps = outcome_unit(&ham, qpe.b);
            let reference =
                distinct_levels(&analytic_laplacian_spectrum(&grid).eigenvalues, eps / 2.0);
            let mut successes = 0;
            for seed in 0..100u64 {
                let opts = RunOptions { j: 2, r, seed, backend: Backend::Exact };
                let est = run_with_distributions(&dists, &ham, &qpe, &opts).unwrap();
                let ok = est
                    .energies
                    .iter()
                    .zip(&reference.levels)
                    .all(|(a, b)| (a - b).abs() <= eps);
                if ok {
                    successes += 1;
                }
            }
            assert!(
                successes >= 95,
                "d={d} N={n}: {successes}/100 trials recovered both levels"
            );
        }
    }
    println!("criterion 1 (zero-potential exactness): PASS");
}

fn five_potentials(grid: &GridSpec) -> Vec<Potential> {
    let smooth: Vec<f64> = (0..grid.total_dim())
        .map(|i| {
            let x = grid.point(i)[0];
            2.0 * (std::f64::consts::PI * x).sin().powi(2)
        })
        .collect();
    vec![
        Potential::product_sine(1.0),
        Potential::constant(1.0),
        Potential::well(1.0),
        Potential::tabulated(smooth, 2.0, 2.0 * std::f64::consts::PI),
        Potential::zero(),
    ]
}

#[test]
fn criterion_2_overlap_bound() {
    let grid = GridSpec::new(1, 15).unwrap();
    for p in five_potentials(&grid) {
        let v = sample_potential(&p, &grid).unwrap();
        let ham = HamiltonianParts::assemble(grid.clone(), v).unwrap();
        let table = dense_spectrum(&ham).unwrap();
        let sub = build_level_subsequence(1, p.m_bound, 1).unwrap();
        let trial = enumerate_trial_indices(&grid, &sub).unwrap();
        let mut checked = 0;
        for i in 0..table.len() {
            let e = table.eigenvalues[i];
            if e > sub.b_continuum {
                continue;
            }
            let prof = overlap_profile(&table.eigenvector(i), e, &grid, &trial).unwrap();
            assert!(
                prof.in_set_mass >= 0.75 - 1e-8,
                "{:?}: eigenpair {i} has in-set mass {}",
                p.family,
                prof.in_set_mass
            );
            checked += 1;
        }
        assert!(checked >= 1, "{:?}: no eigenvalue below the bound", p.family);
    }
    println!("criterion 2 (overlap bound): PASS");
}

#[test]
fn criterion_3_residual_identity() {
    let grid = GridSpec::new(1, 15).unwrap();
    for p in five_potentials(&grid) {
        let v = sample_potential(&p, &grid).unwrap();
        let ham = HamiltonianParts::assemble(grid.clone(), v.clone()).unwrap();
        let table = dense_spectrum(&ham).unwrap();
        let sub = build_level_subsequence(1, p.m_bound, 1).unwrap();
        let trial = enumerate_trial_indices(&grid, &sub).unwrap();
        for i in 0..table.len() {
            let u = table.eigenvector(i);
            let prof =
                overlap_profile(&u, table.eigenvalues[i], &grid, &trial).unwrap();
            let vu_sq: f64 = u.iter().zip(&v).map(|(ui, vi)| (ui * vi).powi(2)).sum();
            let rel = (prof.residual - vu_sq).abs() / vu_sq.max(1e-30);
            assert!(
                vu_sq < 1e-20 && prof.residual < 1e-16 || rel <= 1e-8,
                "{:?}: eigenpair {i} residual {} vs {}",
                p.family,
                prof.residual,
                vu_sq
            );
        }
    }
    println!("criterion 3 (residual identity): PASS");
}

#[test]
fn criterion_4_weinberger_rate() {
    for d in [1usize, 2] {
        let (order, _) = weinberger_check(d, 0, &[8, 16, 32, 64]).unwrap();
        assert!(
            (1.8..=2.2).contains(&order),
            "d={d}: fitted order {order} outside [1.8, 2.2]"
        );
    }
    println!("criterion 4 (discretization rate): PASS");
}

#[test]
fn criterion_5_trotter_fidelity() {
    let grid = GridSpec::new(1, 7).unwrap();
    let v = sample_potential(&Potential::product_sine(1.0), &grid).unwrap();
    let ham = HamiltonianParts::assemble(grid.clone(), v).unwrap();
    let qpe = QpeConfig::new(4, 2).unwrap();
    let budget = error_budget(qpe.b, qpe.t0, 1.0).unwrap();
    for k in [1u32, 2] {
        let mut schedules = Vec::new();
        for (tau, &eps) in budget.eps_tau.iter().enumerate() {
            let sched = trotterized_power(&ham, tau as u32, eps, k).unwrap();
            let approx = schedule_unitary_dense(&ham, &sched).unwrap();
            let exact = exact_power_dense(&ham, tau as u32);
            let err = spectral_norm_diff(&approx, &exact);
            assert!(err <= eps, "k={k} tau={tau}: operator error {err} > {eps}");
            schedules.push(sched);
        }

        // Distribution-level check on the first trial vector.
        let sub = build_level_subsequence(1, 1.0, 1).unwrap();
        let trial = enumerate_trial_indices(&grid, &sub).unwrap();
        let trotter = build_trial_distributions(
            &ham,
            &trial,
            &qpe,
            &Backend::Trotter { order_k: k, g: 1.0 },
        )
        .unwrap();
        let exact = build_trial_distributions(&ham, &trial, &qpe, &Backend::Exact).unwrap();
        for (td, ed) in trotter.iter().zip(&exact) {
            let tv: f64 = td
                .probs
                .iter()
                .zip(&ed.probs)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                / 2.0;
            assert!(
                tv <= 2.0 * budget.total,
                "k={k}: total-variation distance {tv} > {}",
                2.0 * budget.total
            );
        }
    }
    println!("criterion 5 (product-formula fidelity): PASS");
}

#[test]
fn criterion_6_success_probability_bound() {
    let grid = GridSpec::new(1, 15).unwrap();
    let v = sample_potential(&Potential::product_sine(1.0), &grid).unwrap();
    let ham = HamiltonianParts::assemble(grid.clone(), v).unwrap();
    let qpe = QpeConfig::new(12, 10).unwrap();
    let sub = build_level_subsequence(1, 1.0, 2).unwrap();
    let trial = enumerate_trial_indices(&grid, &sub).unwrap();
    let r = 16usize;
    let bound = success_bound(2, r, trial.cardinality(), qpe.t0, trial.q());
    assert!(bound >= 0.75, "chosen parameters give bound {bound} < 0.75");

    let dists = build_trial_distributions(&ham, &trial, &qpe, &Backend::Exact).unwrap();
    let table = dense_spectrum(&ham).unwrap();
    let eps = outcome_unit(&ham, qpe.b);
    let reference = distinct_levels(&table.eigenvalues, eps / 2.0);

    let trials = 200usize;
    let mut successes = 0usize;
    for seed in 0..trials as u64 {
        let opts = RunOptions { j: 2, r, seed, backend: Backend::Exact };
        match run_with_distributions(&dists, &ham, &qpe, &opts) {
            Ok(est) => {
                let report = verify_conditions(&est.energies, &reference.levels, eps, 2.0);
                if report.all_ok() {
                    successes += 1;
                }
            }
            Err(_) => {}
        }
    }
    let rate = successes as f64 / trials as f64;
    let se = (bound * (1.0 - bound) / trials as f64).sqrt();
    assert!(
        rate >= bound - 3.0 * se,
        "empirical rate {rate} below bound {bound} - 3se ({})",
        bound - 3.0 * se
    );
    println!("criterion 6 (success-probability bound): PASS (rate {rate:.3}, bound {bound:.3})");
}

#[test]
fn criterion_7_selection_semantics() {
    // Canonical selection scenarios.
    let m = 9u64;
    // Scenario A: previous pick m-1; new outcomes {m-1, m+1, m+2} -> m+1.
    assert_eq!(select_next(&[m - 1, m + 1, m + 2], m as i64 - 1), Some(m + 1));
    // Scenario B: previous pick m; new outcomes {m, m+2} -> m+2.
    assert_eq!(select_next(&[m, m + 2], m as i64), Some(m + 2));

    // Random-record property: every pick is >= last + 2 and minimal.
    let mut rng = derive_rng(2024, &[7]);
    for _ in 0..2000 {
        let len = rng.gen_range(1..30);
        let outcomes: Vec<u64> = (0..len).map(|_| rng.gen_range(0..50)).collect();
        let last = rng.gen_range(-2i64..50);
        let eligible: Vec<u64> =
            outcomes.iter().copied().filter(|&m| m as i64 >= last + 2).collect();
        match select_next(&outcomes, last) {
            Some(m) => {
                assert!(m as i64 >= last + 2);
                assert!(eligible.iter().all(|&x| x >= m));
            }
            None => assert!(eligible.is_empty()),
        }
    }

    // Sequential picks m_i >= m_{i-1} + 2 across passes.
    let mut last = -2i64;
    let mut rng = derive_rng(11, &[0]);
    for _ in 0..50 {
        let outcomes: Vec<u64> = (0..20).map(|_| rng.gen_range(0..400)).collect();
        if let Some(m) = select_next(&outcomes, last) {
            assert!(m as i64 >= last + 2);
            last = m as i64;
        }
    }
    println!("criterion 7 (selection semantics): PASS");
}

#[test]
fn criterion_8_cardinality_polynomiality() {
    let scan = qlevels::report::cardinality_scan(2..=10, 4, 1.0, 1).unwrap();
    // Brute force over all N^d indices where that stays within 4096.
    for &(d, card) in scan.rows.iter().filter(|(d, _)| 4usize.pow(*d as u32) <= 4096) {
        let grid = GridSpec::new(d, 4).unwrap();
        let sub = build_level_subsequence(d, 1.0, 1).unwrap();
        let mut brute = 0usize;
        for flat in 0..grid.total_dim() {
            let mut rem = flat;
            let mut lam = 0.0;
            for _ in 0..d {
                lam += qlevels::grid::laplacian_eigenvalue_1d(grid.h(), rem % 4 + 1);
                rem /= 4;
            }
            if lam <= sub.discrete_cutoff {
                brute += 1;
            }
        }
        assert_eq!(card, brute, "d={d}");
    }
    assert!(
        scan.fit_exponent <= scan.exponent_limit,
        "fit exponent {} exceeds limit {}",
        scan.fit_exponent,
        scan.exponent_limit
    );
    println!(
        "criterion 8 (cardinality growth): PASS (exponent {:.3} <= {})",
        scan.fit_exponent, scan.exponent_limit
    );
}

#[test]
fn criterion_9_cost_bound_dominance() {
    // Dominance of the bound chain on executed schedules.
    let grid = GridSpec::new(1, 7).unwrap();
    let v = sample_potential(&Potential::product_sine(1.0), &grid).unwrap();
    let ham = HamiltonianParts::assemble(grid, v).unwrap();
    let qpe = QpeConfig::new(6, 2).unwrap();
    for g in [0.5f64, 1.0, 4.0] {
        let budget = error_budget(qpe.b, qpe.t0, g).unwrap();
        for k in 1..=3u32 {
            let schedules: Vec<_> = budget
                .eps_tau
                .iter()
                .enumerate()
                .map(|(tau, &eps)| trotterized_power(&ham, tau as u32, eps, k).unwrap())
                .collect();
            let cost = qlevels::report::cost_report(
                &ham, &schedules, &budget.eps_tau, 1, 4, 3, &qpe,
            );
            for p in &cost.per_power {
                assert!(
                    (p.actual as f64) <= p.bound,
                    "g={g} k={k} tau={}: actual {} > bound {}",
                    p.tau,
                    p.actual,
                    p.bound
                );
            }
            assert!(cost.n_tot_actual as f64 <= cost.n_tot_bound);
        }
    }

    // Local optimality of k*: with the geometric error budget the per-power ratio
    // 2^tau / eps_tau is constant, so the total bound is convex in k and
    // the rounded stationary point is a local minimizer.
    let h1 = ham.h1_norm_bound();
    let h2 = ham.h2_norm_bound();
    for g in [1.0f64, 100.0, 1e6, 1e9] {
        let budget = error_budget(qpe.b, qpe.t0, g).unwrap();
        let total = |k: u32| -> f64 {
            budget
                .eps_tau
                .iter()
                .enumerate()
                .map(|(tau, &eps)| exponential_count_bound(tau as u32, k, h1, h2, eps))
                .sum()
        };
        let x = 8.0 * std::f64::consts::E
            * h2
            * 2f64.powi(qpe.t() as i32 - 1)
            * 40.0
            * g;
        let k_cont = (x.ln() / (2.0 * (25f64 / 3.0).ln())).sqrt();
        let k_star = ((k_cont + 0.5).floor() as u32).max(1);
        assert!(total(k_star) <= total(k_star + 1), "g={g}: k*={k_star} not better than k*+1");
        if k_star > 1 {
            assert!(total(k_star) <= total(k_star - 1), "g={g}: k*={k_star} not better than k*-1");
        }
    }
    println!("criterion 9 (cost-bound dominance): PASS");
}
