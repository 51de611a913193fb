//! Certified minimization of the reduced objective.
//!
//! Both eavesdropper models reduce to minimizing a convex function over an
//! affine slice of 4×4 matrices intersected with the positive-definite cone
//! (and, for the Clifford-mixture model, a polytope). The slice is
//! parameterized by orthonormal null-space coordinates and solved by a
//! log-barrier Newton path with exact Hessians. The barrier path yields a
//! certified lower bound on the optimum.

mod affine;
mod barrier;
mod restricted;

use std::f64::consts::{LN_2, SQRT_2};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use affine::{build_feasible_affine, AffineFamily, Constraint, ConstraintSet, CONSISTENCY_TOL, RANK_TOL};
pub use restricted::{
    restricted_correlations, restricted_matrix, restricted_state, InitialCorrelations, RestrictedParams, SOURCES,
    TARGETS,
};

use crate::error::{arg, Error, Result};
use crate::linalg::{self, CMatrix};
use crate::pauli::partial_trace;
use crate::protocol::{
    initial_state, leak_ec, simulate_constraints, statistics_from_state, CliffSumMode, EveMode, KeyRateResult,
    ScenarioConfig,
};
use crate::state::DensityMatrix;

use barrier::BarrierProblem;

/// Fractions by which boundary constraint targets are pulled into the
/// interior when no strictly feasible point exists, tried in order.
pub const INTERIOR_PERTURBATIONS: [f64; 2] = [1e-8, 1e-6];

/// Barrier-path settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub mu_initial: f64,
    pub mu_final: f64,
    pub mu_shrink: f64,
    /// Stage ends once the scale-free centrality `‖∇F_μ‖*/μ` (dual norm in
    /// the barrier Hessian metric) drops below this.
    pub stage_tol: f64,
    pub max_stage_iterations: usize,
    pub max_iterations: usize,
    /// Echoed in reports; the solver itself is deterministic.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            mu_initial: 1.0,
            mu_final: 1e-8,
            mu_shrink: 0.1,
            stage_tol: 1e-3,
            max_stage_iterations: 200,
            max_iterations: 2000,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn with_mu_final(self, mu_final: f64) -> Self {
        Self { mu_final, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu_final > 0.0 && self.mu_final < self.mu_initial) {
            return arg(format!("need 0 < mu_final < mu_initial, got {} and {}", self.mu_final, self.mu_initial));
        }
        if !(self.mu_shrink > 0.0 && self.mu_shrink < 1.0) {
            return arg(format!("mu_shrink {} outside (0, 1)", self.mu_shrink));
        }
        if !(self.stage_tol > 0.0 && self.stage_tol < 1.0) {
            return arg(format!("stage_tol {} outside (0, 1)", self.stage_tol));
        }
        Ok(())
    }
}

/// Optimizer output: the final iterate and its key-rate figures.
#[derive(Debug, Clone)]
pub struct Solution {
    pub rho: DensityMatrix,
    pub result: KeyRateResult,
    /// Clifford-mixture coefficients of the optimum (restricted model only).
    pub params: Option<RestrictedParams>,
    /// Objective in bits at the end of each barrier stage.
    pub stage_objectives: Vec<f64>,
    /// Largest violation of the (possibly perturbed) equality constraints.
    pub residual: f64,
    /// Scale-free centrality of the final iterate.
    pub centrality: f64,
}

/// `2·μ_final·ν / ln 2`, the loose a-priori gap allowance in bits.
pub fn gap_allowance(result: &KeyRateResult) -> f64 {
    2.0 * result.mu_final * result.nu / LN_2
}

fn finish(
    problem: &BarrierProblem,
    outcome: barrier::BarrierOutcome,
    leak: f64,
    p_pass: f64,
    perturbation: f64,
) -> Result<(DensityMatrix, KeyRateResult)> {
    let r = outcome.value / LN_2;
    let lb = (outcome.value - outcome.gap) / LN_2;
    let mut result = KeyRateResult::assemble(r, leak, p_pass, lb);
    result.iterations = outcome.iterations;
    result.converged = outcome.converged && outcome.gap.is_finite();
    result.mu_final = outcome.mu_final;
    result.nu = problem.nu();
    result.perturbation = perturbation;
    let rho = DensityMatrix::new(outcome.rho.clone())?;
    Ok((rho, result))
}

fn leak_for(cs: &ConstraintSet, rho: &DensityMatrix, p: f64) -> Result<f64> {
    match cs.statistics() {
        Some(dist) => Ok(leak_ec(dist)),
        None => Ok(leak_ec(&statistics_from_state(rho, p)?)),
    }
}

fn unrestricted_problem(cs: &ConstraintSet, p: f64) -> Result<BarrierProblem> {
    let fam = build_feasible_affine(cs)?;
    let m = fam.dim();
    Ok(BarrierProblem {
        m0: fam.rho0,
        dirs: fam.basis,
        s0: DVector::zeros(0),
        s_mat: DMatrix::zeros(0, m),
        p,
        diameter: SQRT_2,
    })
}

/// Minimizes the objective over all two-qubit states meeting `cs`.
pub fn solve_unrestricted(cs: &ConstraintSet, p: f64, opts: &SolverOptions) -> Result<Solution> {
    opts.validate()?;
    if !(p > 0.0 && p < 1.0) {
        return arg(format!("p = {p} outside (0, 1)"));
    }
    let mixed = linalg::identity(4).scale(0.25);
    let attempts = std::iter::once((cs.clone(), 0.0))
        .chain(INTERIOR_PERTURBATIONS.iter().map(|&d| (cs.perturbed_toward(&mixed, d), d)));
    for (system, delta) in attempts {
        let problem = unrestricted_problem(&system, p)?;
        let Some(y0) = problem.phase_one() else { continue };
        let outcome = problem.minimize(y0, opts);
        let stage_objectives = outcome.stage_values.iter().map(|v| v / LN_2).collect();
        let centrality = outcome.centrality;
        let residual = system.max_residual(&outcome.rho);
        let rho_tmp = DensityMatrix::new(outcome.rho.clone())?;
        let leak = leak_for(cs, &rho_tmp, p)?;
        let (rho, result) = finish(&problem, outcome, leak, crate::protocol::p_pass(p), delta)?;
        return Ok(Solution { rho, result, params: None, stage_objectives, residual, centrality });
    }
    Err(Error::Infeasible("no strictly positive state meets the constraints".into()))
}

/// `(ρ(C) − ρ(0))` for each unit coefficient, and `ρ(0)`.
fn restricted_columns(b: f64) -> Result<(CMatrix, Vec<CMatrix>)> {
    let zero = RestrictedParams { c: [[0.0; 6]; 3] };
    let base = restricted_matrix(&zero, b)?;
    let cols = (0..18)
        .map(|i| {
            let mut flat = [0.0; 18];
            flat[i] = 1.0;
            let c = RestrictedParams::from_flat(&flat)?;
            Ok(restricted_matrix(&c, b)? - &base)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((base, cols))
}

struct RestrictedProblem {
    barrier: BarrierProblem,
    c0: DVector<f64>,
    null: DMatrix<f64>,
}

fn restricted_problem(cs: &ConstraintSet, p: f64, b: f64, mode: CliffSumMode) -> Result<RestrictedProblem> {
    let (base, cols) = restricted_columns(b)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut targets = Vec::new();
    let mut labels = Vec::new();
    for c in cs.constraints() {
        rows.push(cols.iter().map(|m| linalg::trace_prod_re(m, &c.observable)).collect());
        targets.push(c.target - linalg::trace_prod_re(&base, &c.observable));
        labels.push(c.label.clone());
    }
    let mut ineq_rows: Vec<Vec<f64>> = (0..18)
        .map(|i| (0..18).map(|k| if k == i { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut ineq_offsets = vec![0.0; 18];
    for j in 0..3 {
        let row: Vec<f64> = (0..18).map(|k| if k / 6 == j { 1.0 } else { 0.0 }).collect();
        match mode {
            CliffSumMode::Eq3 => {
                rows.push(row);
                targets.push(1.0);
                labels.push(format!("sum C[{}]", SOURCES[j]));
            }
            CliffSumMode::Le3 => {
                ineq_rows.push(row.iter().map(|v| -v).collect());
                ineq_offsets.push(1.0);
            }
        }
    }
    let a = if rows.is_empty() {
        DMatrix::zeros(0, 18)
    } else {
        DMatrix::from_row_iterator(rows.len(), 18, rows.iter().flatten().copied())
    };
    let (c0, null) = affine::solve_affine(&a, &DVector::from_vec(targets), &labels)?;
    let ineq = DMatrix::from_row_iterator(ineq_rows.len(), 18, ineq_rows.iter().flatten().copied());
    let s0 = DVector::from_vec(ineq_offsets) + &ineq * &c0;
    let s_mat = &ineq * &null;
    let combine = |coef: &[f64]| {
        cols.iter()
            .zip(coef)
            .fold(linalg::zeros(4), |acc, (m, &x)| acc + m.scale(x))
    };
    let m0 = &base + combine(c0.as_slice());
    let dirs = null.column_iter().map(|col| combine(col.as_slice())).collect();
    Ok(RestrictedProblem {
        barrier: BarrierProblem { m0, dirs, s0, s_mat, p, diameter: 6f64.sqrt() },
        c0,
        null,
    })
}

/// Minimizes the objective over Clifford-mixture channels on Bob's qubit
/// that reproduce the statistics in `cs`. The result is a lower bound on
/// the key rate against such an eavesdropper.
pub fn solve_restricted(
    cs: &ConstraintSet,
    p: f64,
    b: f64,
    mode: CliffSumMode,
    opts: &SolverOptions,
) -> Result<Solution> {
    opts.validate()?;
    if !(p > 0.0 && p < 1.0) {
        return arg(format!("p = {p} outside (0, 1)"));
    }
    let psi = initial_state(b)?.density();
    let marginal = partial_trace(psi.matrix(), &[2, 2], &[0])?;
    let reference = linalg::kron(&marginal, &linalg::identity(2).scale(0.5));
    let attempts = std::iter::once((cs.clone(), 0.0))
        .chain(INTERIOR_PERTURBATIONS.iter().map(|&d| (cs.perturbed_toward(&reference, d), d)));
    for (system, delta) in attempts {
        let problem = restricted_problem(&system, p, b, mode)?;
        let Some(y0) = problem.barrier.phase_one() else { continue };
        let outcome = problem.barrier.minimize(y0, opts);
        let c = &problem.c0 + &problem.null * &outcome.y;
        let params = RestrictedParams::from_flat(c.as_slice())?;
        let stage_objectives = outcome.stage_values.iter().map(|v| v / LN_2).collect();
        let centrality = outcome.centrality;
        let residual = system.max_residual(&outcome.rho);
        let rho_tmp = DensityMatrix::new(outcome.rho.clone())?;
        let leak = leak_for(cs, &rho_tmp, p)?;
        let (rho, result) = finish(&problem.barrier, outcome, leak, crate::protocol::p_pass(p), delta)?;
        return Ok(Solution { rho, result, params: Some(params), stage_objectives, residual, centrality });
    }
    Err(Error::Infeasible(
        "the observed statistics are not reproducible by a Clifford mixture on Bob's qubit".into(),
    ))
}

/// Simulates the scenario's statistics and solves under its eavesdropper
/// model.
pub fn solve_scenario(config: &ScenarioConfig, opts: &SolverOptions) -> Result<Solution> {
    config.validate()?;
    let cs = simulate_constraints(config)?;
    match config.eve {
        EveMode::Unrestricted => solve_unrestricted(&cs, config.p, opts),
        EveMode::CliffordMix => solve_restricted(&cs, config.p, config.b, config.cliff_sum, opts),
    }
}

/// Outcome of [`certificate_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateCheck {
    pub passed: bool,
    /// `gap ≤ 2·μ_final·ν/ln 2 + 1e-9` and `certificate_lb ≤ r`.
    pub gap_ok: bool,
    /// `|Δ keyrate| / |keyrate|` between `μ_final` and `μ_final/10`.
    pub relative_change: f64,
    pub result: KeyRateResult,
    pub tightened: KeyRateResult,
}

/// Solves at `opts.mu_final` and at a tenth of it, and checks the gap
/// allowance and the stability of the key rate (relative change below
/// `1e-3`, with an absolute floor of `1e-9` for vanishing rates).
pub fn certificate_check(config: &ScenarioConfig, opts: &SolverOptions) -> Result<CertificateCheck> {
    let first = solve_scenario(config, opts)?.result;
    let tighter = solve_scenario(config, &opts.with_mu_final(opts.mu_final / 10.0))?.result;
    let gap_ok = first.gap <= gap_allowance(&first) + 1e-9 && first.certificate_lb <= first.r + 1e-9;
    let delta = (first.keyrate - tighter.keyrate).abs();
    let scale = first.keyrate.abs();
    let relative_change = if scale > 0.0 { delta / scale } else { delta };
    let stable = delta <= 1e-3 * scale + 1e-9;
    Ok(CertificateCheck {
        passed: gap_ok && stable && first.converged && tighter.converged,
        gap_ok,
        relative_change,
        result: first,
        tightened: tighter,
    })
}
