//! Log-barrier Newton method for the reduced objective over an affine
//! family of two-qubit matrices with optional scalar slacks.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{self, CMatrix, Eigh};
use crate::protocol::LocalObjective;

use super::SolverOptions;

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-14;
const PHASE_ONE_MARGIN: f64 = 1e-12;
/// Centrality still accepted when a stage stalls at rounding level.
const STALL_CENTRALITY: f64 = 0.25;

/// `min f(ρ(y))` subject to `ρ(y) ≻ 0` and `s(y) > 0`, where
/// `ρ(y) = m0 + Σ y_i dirs_i` and `s(y) = s0 + S y`.
pub(crate) struct BarrierProblem {
    pub m0: CMatrix,
    pub dirs: Vec<CMatrix>,
    pub s0: DVector<f64>,
    pub s_mat: DMatrix<f64>,
    pub p: f64,
    /// Euclidean diameter of the feasible set in `y` coordinates.
    pub diameter: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct BarrierOutcome {
    pub y: DVector<f64>,
    pub rho: CMatrix,
    /// Objective in nats.
    pub value: f64,
    /// Certified bound on `value − optimum`, in nats.
    pub gap: f64,
    pub centrality: f64,
    pub mu_final: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective (nats) at the end of each barrier stage.
    pub stage_values: Vec<f64>,
}

/// Barrier value, gradient and Hessians at one interior point.
struct Local {
    value: f64,
    barrier: f64,
    grad_f: DVector<f64>,
    grad_b: DVector<f64>,
    hess_f: DMatrix<f64>,
    hess_b: DMatrix<f64>,
}

impl BarrierProblem {
    pub fn dim(&self) -> usize {
        self.dirs.len()
    }

    pub fn nu(&self) -> f64 {
        (self.m0.nrows() + self.s0.len()) as f64
    }

    pub fn rho(&self, y: &DVector<f64>) -> CMatrix {
        self.dirs
            .iter()
            .zip(y.iter())
            .fold(self.m0.clone(), |acc, (m, &c)| acc + m.scale(c))
    }

    fn slacks(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.s0 + &self.s_mat * y
    }

    /// Returns the barrier-augmented objective when `y` is strictly interior.
    fn merit(&self, y: &DVector<f64>, mu: f64) -> Option<f64> {
        let s = self.slacks(y);
        if s.iter().any(|&v| v <= 0.0) {
            return None;
        }
        let obj = LocalObjective::new(&self.rho(y), self.p);
        if obj.min_eigenvalue() <= 0.0 {
            return None;
        }
        let log_s: f64 = s.iter().map(|v| v.ln()).sum();
        Some(obj.value() - mu * (obj.log_det() + log_s))
    }

    fn local(&self, y: &DVector<f64>) -> Local {
        let m = self.dim();
        let rho = self.rho(y);
        let obj = LocalObjective::new(&rho, self.p);
        let inv = obj.inverse();
        let grad = obj.gradient();
        let s = self.slacks(y);
        let inv_s = s.map(|v| 1.0 / v);

        let scaled: Vec<CMatrix> = self.dirs.iter().map(|d| &inv * d).collect();
        let hf_dirs: Vec<CMatrix> = self.dirs.iter().map(|d| obj.hessian(d)).collect();
        let mut grad_f = DVector::zeros(m);
        let mut grad_b = -(self.s_mat.transpose() * &inv_s);
        let mut hess_f = DMatrix::zeros(m, m);
        let mut hess_b = self.s_mat.transpose() * DMatrix::from_diagonal(&inv_s.map(|v| v * v)) * &self.s_mat;
        for i in 0..m {
            grad_f[i] = linalg::trace_prod_re(&grad, &self.dirs[i]);
            grad_b[i] -= linalg::trace(&scaled[i]).re;
            for j in 0..m {
                hess_f[(i, j)] = linalg::trace_prod_re(&self.dirs[i], &hf_dirs[j]);
                hess_b[(i, j)] += linalg::trace_prod_re(&scaled[i], &scaled[j]);
            }
        }
        let hess_f = (&hess_f + hess_f.transpose()) * 0.5;
        let barrier = -(obj.log_det() + s.iter().map(|v| v.ln()).sum::<f64>());
        Local { value: obj.value(), barrier, grad_f, grad_b, hess_f, hess_b }
    }

    /// Finds a point with `ρ(y) ≻ 0` and `s(y) > 0` by minimizing `t`
    /// subject to `ρ(y) + tI ≻ 0`, `s(y) + t > 0` along a barrier path.
    /// Returns `None` when no point with margin above [`PHASE_ONE_MARGIN`]
    /// exists.
    pub fn phase_one(&self) -> Option<DVector<f64>> {
        let m = self.dim();
        let n = self.m0.nrows();
        let k = self.s0.len();
        let mut y = DVector::zeros(m);
        let start_eig = Eigh::new(&self.rho(&y)).min();
        let start_slack = self.slacks(&y).iter().copied().fold(f64::INFINITY, f64::min);
        let mut t = (-start_eig).max(-start_slack).max(0.0) + 1.0;

        let mut dirs = self.dirs.clone();
        dirs.push(linalg::identity(n));
        let mut s_ext = DMatrix::zeros(k, m + 1);
        s_ext.columns_mut(0, m).copy_from(&self.s_mat);
        s_ext.column_mut(m).fill(1.0);

        let state = |z: &DVector<f64>| -> Option<(CMatrix, DVector<f64>)> {
            let yy = z.rows(0, m).into_owned();
            let r = self.rho(&yy) + linalg::identity(n).scale(z[m]);
            let s = self.slacks(&yy).add_scalar(z[m]);
            if s.iter().any(|&v| v <= 0.0) || Eigh::new(&r).min() <= 0.0 {
                None
            } else {
                Some((r, s))
            }
        };

        let mut z = DVector::from_iterator(m + 1, y.iter().copied().chain([t]));
        let mut mu = 1.0;
        while mu >= 1e-14 {
            for _ in 0..100 {
                let (r, s) = state(&z).expect("phase-one iterate is interior");
                let inv = Eigh::new(&r).map(|v| 1.0 / v);
                let inv_s = s.map(|v| 1.0 / v);
                let scaled: Vec<CMatrix> = dirs.iter().map(|d| &inv * d).collect();
                let mut g = -(s_ext.transpose() * &inv_s) * mu;
                g[m] += 1.0;
                let mut h = s_ext.transpose() * DMatrix::from_diagonal(&inv_s.map(|v| v * v)) * &s_ext * mu;
                for i in 0..=m {
                    g[i] -= mu * linalg::trace(&scaled[i]).re;
                    for j in 0..=m {
                        h[(i, j)] += mu * linalg::trace_prod_re(&scaled[i], &scaled[j]);
                    }
                }
                let d = match newton_direction(&h, &g) {
                    Some(d) => d,
                    None => break,
                };
                let decrement = (-g.dot(&d) / mu).max(0.0).sqrt();
                let mut step = 1.0 / (1.0 + decrement);
                let mut next = &z + &d * step;
                while state(&next).is_none() && step > MIN_STEP {
                    step *= 0.5;
                    next = &z + &d * step;
                }
                if state(&next).is_none() {
                    break;
                }
                z = next;
                if decrement < 1e-8 {
                    break;
                }
            }
            if z[m] < -1e-3 {
                break;
            }
            mu *= 0.2;
        }
        t = z[m];
        y = z.rows(0, m).into_owned();
        (t < -PHASE_ONE_MARGIN).then_some(y)
    }

    /// Barrier path from the strictly feasible `y0` down to
    /// `opts.mu_final`.
    pub fn minimize(&self, y0: DVector<f64>, opts: &SolverOptions) -> BarrierOutcome {
        let nu = self.nu();
        let mut y = y0;
        let mut mu = opts.mu_initial;
        let mut iterations = 0;
        let mut converged = true;
        let mut stage_values = Vec::new();
        let mut centrality;
        let mut grad_norm;
        loop {
            let mut stage_iters = 0;
            loop {
                let loc = self.local(&y);
                let g = &loc.grad_f + &loc.grad_b * mu;
                let h = &loc.hess_f + &loc.hess_b * mu;
                centrality = dual_norm(&loc.hess_b, &g).map_or(f64::INFINITY, |v| v / mu);
                grad_norm = g.norm();
                if centrality <= opts.stage_tol {
                    break;
                }
                if stage_iters >= opts.max_stage_iterations || iterations >= opts.max_iterations {
                    converged &= centrality <= STALL_CENTRALITY;
                    break;
                }
                let Some(d) = newton_direction(&h, &g) else {
                    converged = false;
                    break;
                };
                let slope = g.dot(&d);
                let f0 = loc.value + mu * loc.barrier;
                // predicted decrease below floating-point resolution of the merit
                if centrality <= STALL_CENTRALITY && -0.5 * slope <= 1e-15 * f0.abs().max(1.0) {
                    break;
                }
                let mut step = 1.0;
                let mut accepted = None;
                while step > MIN_STEP {
                    let cand = &y + &d * step;
                    if let Some(fc) = self.merit(&cand, mu) {
                        if fc <= f0 + ARMIJO * step * slope {
                            accepted = Some(cand);
                            break;
                        }
                    }
                    step *= 0.5;
                }
                iterations += 1;
                stage_iters += 1;
                match accepted {
                    Some(next) => y = next,
                    None => {
                        converged &= centrality <= STALL_CENTRALITY;
                        break;
                    }
                }
            }
            let value = LocalObjective::new(&self.rho(&y), self.p).value();
            if let Some(&prev) = stage_values.last() {
                if value > prev + 1e-9 + 1e-2 * mu {
                    converged = false;
                }
            }
            stage_values.push(value);
            if mu <= opts.mu_final * (1.0 + 1e-9) || iterations >= opts.max_iterations {
                break;
            }
            mu = (mu * opts.mu_shrink).max(opts.mu_final);
        }
        if mu > opts.mu_final * (1.0 + 1e-9) {
            converged = false;
        }
        let value = *stage_values.last().expect("at least one stage");
        let gap = certified_gap(mu, nu, centrality, grad_norm, self.diameter);
        BarrierOutcome {
            rho: self.rho(&y),
            y,
            value,
            gap,
            centrality,
            mu_final: mu,
            iterations,
            converged,
            stage_values,
        }
    }
}

/// Upper bound on `f(y) − f*` from an approximately centered point.
///
/// With `κ < 1` the linearization of `f` at `y` is a linear objective whose
/// barrier Newton decrement is `κ`, giving `μ(ν + (κ + √ν)κ/(1 − κ))`. The
/// fallback `μν + diam·‖g‖` holds at any interior point.
pub(crate) fn certified_gap(mu: f64, nu: f64, kappa: f64, grad_norm: f64, diameter: f64) -> f64 {
    let anywhere = mu * nu + diameter * grad_norm;
    if kappa < 1.0 {
        let centered = mu * (nu + (kappa + nu.sqrt()) * kappa / (1.0 - kappa));
        centered.min(anywhere)
    } else {
        anywhere
    }
}

/// Solves `H x = g` under symmetric diagonal scaling.
fn scaled_solve(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = h.diagonal().map(|v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 });
    let hs = DMatrix::from_fn(h.nrows(), h.ncols(), |i, j| h[(i, j)] * scale[i] * scale[j]);
    let gs = g.component_mul(&scale);
    let xs = match hs.clone().cholesky() {
        Some(ch) => ch.solve(&gs),
        None => {
            let svd = hs.svd(true, true);
            svd.solve(&gs, 1e-14 * svd.singular_values.max()).ok()?
        }
    };
    Some(xs.component_mul(&scale))
}

/// `sqrt(gᵀ H⁻¹ g)` for positive-definite `H`.
fn dual_norm(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<f64> {
    if g.is_empty() {
        return Some(0.0);
    }
    let x = scaled_solve(h, g)?;
    let v = g.dot(&x);
    (v >= -1e-12 * g.norm_squared()).then(|| v.max(0.0).sqrt())
}

fn newton_direction(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    if g.is_empty() {
        return None;
    }
    scaled_solve(h, g).map(|d| -d)
}
