use cliffqkd::channels::{choi_of_pauli_random, PauliWeights};
use cliffqkd::linalg::{self, Eigh};
use cliffqkd::pauli::bell_state;
use cliffqkd::protocol::{
    objective_reduced, simulate_constraints, CliffSumMode, ConstraintMode, EveMode, ScenarioConfig,
};
use cliffqkd::solver::{
    gap_allowance, solve_restricted, solve_scenario, solve_unrestricted, ConstraintSet, SolverOptions,
};
use cliffqkd::Error;
use proptest::prelude::*;

fn config(b: f64, eps: f64, constraints: ConstraintMode, eve: EveMode) -> ScenarioConfig {
    ScenarioConfig { b, p: 0.5, eps, constraints, eve, cliff_sum: CliffSumMode::Eq3 }
}

#[test]
fn returned_iterates_are_feasible_and_interior() {
    let opts = SolverOptions::default();
    for eve in [EveMode::Unrestricted, EveMode::CliffordMix] {
        for constraints in [ConstraintMode::Coarse, ConstraintMode::Fine] {
            let cfg = config(0.3, 0.08, constraints, eve);
            let sol = solve_scenario(&cfg, &opts).unwrap();
            assert!(sol.residual <= 1e-8, "{eve} {constraints}: residual {}", sol.residual);
            let original = simulate_constraints(&cfg).unwrap();
            if eve == EveMode::Unrestricted {
                assert!(original.max_residual(sol.rho.matrix()) <= 1e-8);
            }
            assert!(Eigh::new(sol.rho.matrix()).min() > 0.0);
            assert!(sol.result.converged);
            assert_eq!(sol.result.perturbation, 0.0);
        }
    }
}

#[test]
fn stage_objectives_decrease_along_the_path() {
    let opts = SolverOptions::default();
    for eve in [EveMode::Unrestricted, EveMode::CliffordMix] {
        let sol = solve_scenario(&config(1.0 / 9.0, 0.1, ConstraintMode::Coarse, eve), &opts).unwrap();
        assert_eq!(sol.stage_objectives.len(), 9);
        for w in sol.stage_objectives.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{eve}: {:?}", sol.stage_objectives);
        }
        let last = *sol.stage_objectives.last().unwrap();
        assert!((last - sol.result.r).abs() < 1e-12);
    }
}

#[test]
fn symmetric_optimum_is_the_bell_diagonal_attack() {
    let q = 0.05;
    let attack = choi_of_pauli_random(&PauliWeights::from_bb84_q(q).unwrap()).into_state();
    let oracle = objective_reduced(&attack, 0.5).unwrap();
    let sol = solve_scenario(&config(0.5, 2.0 * q, ConstraintMode::Fine, EveMode::Unrestricted), &SolverOptions::default())
        .unwrap();
    assert!((sol.result.r - oracle).abs() < 1e-4, "{} vs {oracle}", sol.result.r);
    assert!(linalg::max_abs_diff(sol.rho.matrix(), attack.matrix()) < 1e-3);
    let bell: Vec<_> = (0..4).map(|i| bell_state(2, i / 2, i % 2).unwrap()).collect();
    for (i, u) in bell.iter().enumerate() {
        for v in &bell[i + 1..] {
            let off = (u.amplitudes().adjoint() * sol.rho.matrix() * v.amplitudes())[(0, 0)];
            assert!(off.norm() <= 1e-4, "{off}");
        }
    }
}

#[test]
fn boundary_statistics_are_perturbed_into_the_interior() {
    let sol = solve_scenario(&config(0.5, 0.0, ConstraintMode::Fine, EveMode::Unrestricted), &SolverOptions::default())
        .unwrap();
    assert!(sol.result.perturbation > 0.0);
    assert!((sol.result.keyrate - 0.5).abs() < 1e-3);
}

#[test]
fn pure_source_has_no_restricted_interior() {
    let opts = SolverOptions::default();
    for b in [0.0, 1.0] {
        let cfg = config(b, 0.1, ConstraintMode::Coarse, EveMode::CliffordMix);
        let err = solve_scenario(&cfg, &opts).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)), "{err}");
        let unrestricted = solve_scenario(&ScenarioConfig { eve: EveMode::Unrestricted, ..cfg }, &opts).unwrap();
        assert_eq!(unrestricted.result.keyrate, 0.0);
    }
}

#[test]
fn inconsistent_constraints_name_the_culprit() {
    let mut cs = ConstraintSet::trace_only();
    let zz = linalg::kron(&cliffqkd::pauli::Letter::Z.matrix(), &cliffqkd::pauli::Letter::Z.matrix());
    cs.push("ZZ low", zz.clone(), 0.2).unwrap();
    cs.push("ZZ high", zz, 0.6).unwrap();
    let err = solve_unrestricted(&cs, 0.5, &SolverOptions::default()).unwrap_err();
    assert!(matches!(&err, Error::Infeasible(m) if m.contains("ZZ")), "{err}");
}

#[test]
fn out_of_range_inputs_are_rejected() {
    let opts = SolverOptions::default();
    let cs = simulate_constraints(&config(0.5, 0.1, ConstraintMode::Coarse, EveMode::CliffordMix)).unwrap();
    assert!(matches!(solve_restricted(&cs, 1.0, 0.5, CliffSumMode::Eq3, &opts), Err(Error::Argument(_))));
    assert!(matches!(solve_unrestricted(&cs, 0.5, &opts.with_mu_final(2.0)), Err(Error::Argument(_))));
    assert!(solve_scenario(&config(1.5, 0.1, ConstraintMode::Coarse, EveMode::Unrestricted), &opts).is_err());
}

#[test]
fn le3_matches_eq3() {
    let opts = SolverOptions::default();
    let eq3 = solve_scenario(&config(1.0 / 9.0, 0.1, ConstraintMode::Coarse, EveMode::CliffordMix), &opts).unwrap();
    let le3 = solve_scenario(
        &ScenarioConfig { cliff_sum: CliffSumMode::Le3, ..config(1.0 / 9.0, 0.1, ConstraintMode::Coarse, EveMode::CliffordMix) },
        &opts,
    )
    .unwrap();
    assert!((eq3.result.keyrate - le3.result.keyrate).abs() < 1e-6);
    let params = eq3.params.unwrap();
    for s in params.row_sums() {
        assert!((s - 1.0).abs() < 1e-8);
    }
    assert!(params.flat().iter().all(|&c| c > 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn restriction_and_detail_only_raise_the_rate(b in 0.05f64..0.95, eps in 0.01f64..0.2) {
        let opts = SolverOptions::default();
        let mut k = [[0.0; 2]; 2];
        for (i, constraints) in [ConstraintMode::Coarse, ConstraintMode::Fine].into_iter().enumerate() {
            for (j, eve) in [EveMode::Unrestricted, EveMode::CliffordMix].into_iter().enumerate() {
                let sol = solve_scenario(&config(b, eps, constraints, eve), &opts).unwrap();
                let r = &sol.result;
                prop_assert!(r.converged);
                prop_assert!(r.certificate_lb <= r.r);
                prop_assert!(r.gap <= gap_allowance(r) + 1e-9);
                k[i][j] = r.keyrate_raw;
            }
        }
        prop_assert!(k[0][1] >= k[0][0] - 1e-6);
        prop_assert!(k[1][1] >= k[1][0] - 1e-6);
        prop_assert!(k[1][0] >= k[0][0] - 1e-6);
        prop_assert!(k[1][1] >= k[0][1] - 1e-6);
    }

    #[test]
    fn relabeling_symmetry(b in 0.05f64..0.95, eps in 0.01f64..0.2) {
        let opts = SolverOptions::default();
        for eve in [EveMode::Unrestricted, EveMode::CliffordMix] {
            let a = solve_scenario(&config(b, eps, ConstraintMode::Coarse, eve), &opts).unwrap();
            let m = solve_scenario(&config(1.0 - b, eps, ConstraintMode::Coarse, eve), &opts).unwrap();
            prop_assert!((a.result.keyrate_raw - m.result.keyrate_raw).abs() < 2e-3);
        }
    }
}
