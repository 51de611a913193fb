//! Linear constraint systems on two-qubit Hermitian matrices and their
//! affine solution sets.

use nalgebra::{DMatrix, DVector};

use crate::entropy::JointDistribution;
use crate::error::{arg, Error, Result};
use crate::linalg::{self, CMatrix};
use crate::pauli::{letter_pair, Letter};
use crate::protocol::ConstraintMode;

/// Relative singular-value threshold below which constraint rows are
/// treated as dependent.
pub const RANK_TOL: f64 = 1e-10;
/// Largest tolerated residual of the least-squares particular solution.
pub const CONSISTENCY_TOL: f64 = 1e-6;

/// `Tr[ρ O] = target`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub label: String,
    pub observable: CMatrix,
    pub target: f64,
}

/// Equality constraints on a two-qubit state; unit trace is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    constraints: Vec<Constraint>,
    mode: ConstraintMode,
    alice_marginal: bool,
    statistics: Option<JointDistribution>,
}

impl ConstraintSet {
    pub fn new(mode: ConstraintMode, alice_marginal: bool) -> Self {
        Self { constraints: Vec::new(), mode, alice_marginal, statistics: None }
    }

    /// Unit trace only.
    pub fn trace_only() -> Self {
        Self::new(ConstraintMode::Coarse, false)
    }

    pub fn push(&mut self, label: impl Into<String>, observable: CMatrix, target: f64) -> Result<()> {
        let label = label.into();
        if observable.shape() != (4, 4) || !linalg::is_hermitian(&observable, 1e-12) {
            return arg(format!("observable {label} is not a Hermitian 4x4 matrix"));
        }
        if !target.is_finite() {
            return arg(format!("target of {label} is not finite"));
        }
        self.constraints.push(Constraint { label, observable, target });
        Ok(())
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn mode(&self) -> ConstraintMode {
        self.mode
    }

    pub fn has_alice_marginal(&self) -> bool {
        self.alice_marginal
    }

    /// Sifted statistics the constraints were simulated from, used for the
    /// error-correction leakage.
    pub fn statistics(&self) -> Option<&JointDistribution> {
        self.statistics.as_ref()
    }

    pub fn set_statistics(&mut self, dist: JointDistribution) {
        self.statistics = Some(dist);
    }

    /// `Tr[ρ O] − target` per constraint.
    pub fn residuals(&self, rho: &CMatrix) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|c| linalg::trace_prod_re(rho, &c.observable) - c.target)
            .collect()
    }

    pub fn max_residual(&self, rho: &CMatrix) -> f64 {
        self.residuals(rho).into_iter().map(f64::abs).fold(0.0, f64::max)
    }

    /// Moves every target a fraction `delta` toward its value on `reference`.
    pub fn perturbed_toward(&self, reference: &CMatrix, delta: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.constraints {
            let anchor = linalg::trace_prod_re(reference, &c.observable);
            c.target = (1.0 - delta) * c.target + delta * anchor;
        }
        out
    }
}

/// `{ rho0 + Σ y_i basis_i }`, with `basis` orthonormal in the
/// Hilbert–Schmidt inner product and traceless.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFamily {
    pub rho0: CMatrix,
    pub basis: Vec<CMatrix>,
}

impl AffineFamily {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn point(&self, y: &[f64]) -> CMatrix {
        self.basis
            .iter()
            .zip(y)
            .fold(self.rho0.clone(), |acc, (m, &c)| acc + m.scale(c))
    }
}

/// The sixteen `P_k ⊗ P_j / 2`, an orthonormal basis of Hermitian 4×4
/// matrices, indexed `4k + j`.
pub(crate) fn pauli_frame() -> Vec<CMatrix> {
    Letter::ALL
        .iter()
        .flat_map(|&k| Letter::ALL.iter().map(move |&j| letter_pair(k, j).scale(0.5)))
        .collect()
}

pub(crate) fn frame_coords(frame: &[CMatrix], h: &CMatrix) -> DVector<f64> {
    DVector::from_iterator(frame.len(), frame.iter().map(|f| linalg::trace_prod_re(h, f)))
}

/// Solution set of `A x = t` as a particular solution plus an orthonormal
/// null-space basis (columns). `labels` name the rows for error messages.
pub(crate) fn solve_affine(
    a: &DMatrix<f64>,
    t: &DVector<f64>,
    labels: &[String],
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let (m, n) = a.shape();
    let rows = m.max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.rows_mut(0, m).copy_from(a);
    let mut rhs = DVector::zeros(rows);
    rhs.rows_mut(0, m).copy_from(t);

    let svd = padded.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let smax = svd.singular_values[order[0]];
    let rank = order
        .iter()
        .filter(|&&i| svd.singular_values[i] > RANK_TOL * smax.max(f64::MIN_POSITIVE))
        .count();

    let mut x = DVector::zeros(n);
    for &i in &order[..rank] {
        let coef = u.column(i).dot(&rhs) / svd.singular_values[i];
        x += v_t.row(i).transpose() * coef;
    }
    let residual = a * &x - t;
    if let Some((worst, r)) = residual
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
    {
        if r.abs() > CONSISTENCY_TOL {
            return Err(Error::Infeasible(format!(
                "constraint {} cannot be met (residual {:.3e})",
                labels.get(worst).map(String::as_str).unwrap_or("?"),
                r.abs()
            )));
        }
    }
    let null: Vec<DVector<f64>> = order[rank..].iter().map(|&i| v_t.row(i).transpose()).collect();
    let null = if null.is_empty() { DMatrix::zeros(n, 0) } else { DMatrix::from_columns(&null) };
    Ok((x, null))
}

/// Parameterizes every Hermitian unit-trace matrix satisfying `cs`.
pub fn build_feasible_affine(cs: &ConstraintSet) -> Result<AffineFamily> {
    let frame = pauli_frame();
    let mut rows = vec![frame_coords(&frame, &linalg::identity(4)).transpose()];
    let mut targets = vec![1.0];
    let mut labels = vec!["trace".to_string()];
    for c in cs.constraints() {
        rows.push(frame_coords(&frame, &c.observable).transpose());
        targets.push(c.target);
        labels.push(c.label.clone());
    }
    let a = DMatrix::from_rows(&rows);
    let (x, null) = solve_affine(&a, &DVector::from_vec(targets), &labels)?;
    let combine = |coef: &[f64]| {
        frame
            .iter()
            .zip(coef)
            .fold(linalg::zeros(4), |acc, (f, &c)| acc + f.scale(c))
    };
    Ok(AffineFamily {
        rho0: combine(x.as_slice()),
        basis: null.column_iter().map(|col| combine(col.as_slice())).collect(),
    })
}
