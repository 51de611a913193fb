//! Clifford-mixture parameterization of Bob's channel.
//!
//! A mixture of Clifford conjugations on Bob's qubit acts on correlations
//! through signed permutations of `{X, Y, Z}`. `C[j][ν]` is the total
//! weight of gates whose Heisenberg action sends letter `j` to the signed
//! letter `ν`.

use crate::error::{arg, Result};
use crate::linalg::CMatrix;
use crate::pauli::{correlations, from_correlations};
use crate::protocol::initial_state;
use crate::state::DensityMatrix;

/// Signed target letters in column order.
pub const TARGETS: [&str; 6] = ["+X", "+Y", "+Z", "-X", "-Y", "-Z"];
/// Source letters in row order.
pub const SOURCES: [&str; 3] = ["X", "Y", "Z"];

/// Mixture coefficients `C[j][ν]`, `j ∈ {X,Y,Z}`, `ν ∈ {±X, ±Y, ±Z}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestrictedParams {
    pub c: [[f64; 6]; 3],
}

impl RestrictedParams {
    /// The identity channel.
    pub fn identity() -> Self {
        let mut c = [[0.0; 6]; 3];
        for (j, row) in c.iter_mut().enumerate() {
            row[j] = 1.0;
        }
        Self { c }
    }

    pub fn from_flat(v: &[f64]) -> Result<Self> {
        if v.len() != 18 {
            return arg(format!("expected 18 coefficients, got {}", v.len()));
        }
        let mut c = [[0.0; 6]; 3];
        for (i, &x) in v.iter().enumerate() {
            c[i / 6][i % 6] = x;
        }
        Ok(Self { c })
    }

    pub fn flat(&self) -> [f64; 18] {
        let mut out = [0.0; 18];
        for (i, x) in out.iter_mut().enumerate() {
            *x = self.c[i / 6][i % 6];
        }
        out
    }

    /// `Σ_ν C[j][ν]` per source letter.
    pub fn row_sums(&self) -> [f64; 3] {
        self.c.map(|row| row.iter().sum())
    }

    /// Net signed weight `C[j][+ν] − C[j][−ν]` of source `j` onto letter `ν`.
    pub fn net(&self, j: usize, nu: usize) -> f64 {
        self.c[j][nu] - self.c[j][nu + 3]
    }
}

/// Correlations `T[k][j] = ⟨P_k ⊗ P_j⟩` of the source state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialCorrelations {
    pub t: [[f64; 4]; 4],
}

impl InitialCorrelations {
    pub fn of_source(b: f64) -> Result<Self> {
        let psi = initial_state(b)?.density();
        Ok(Self { t: correlations(psi.matrix())? })
    }
}

/// Correlation table after Bob's mixture: the `I` column is untouched and
/// `t[k][j] = Σ_ν (C[j][+ν] − C[j][−ν]) T[k][ν]`.
pub fn restricted_correlations(c: &RestrictedParams, init: &InitialCorrelations) -> [[f64; 4]; 4] {
    let mut t = [[0.0; 4]; 4];
    for k in 0..4 {
        t[k][0] = init.t[k][0];
        for j in 0..3 {
            t[k][j + 1] = (0..3).map(|nu| c.net(j, nu) * init.t[k][nu + 1]).sum();
        }
    }
    t
}

/// Hermitian unit-trace matrix of the parameterized state; positivity is
/// not implied by the parameters.
pub fn restricted_matrix(c: &RestrictedParams, b: f64) -> Result<CMatrix> {
    let init = InitialCorrelations::of_source(b)?;
    Ok(from_correlations(&restricted_correlations(c, &init)))
}

/// As [`restricted_matrix`], validated as a density matrix.
pub fn restricted_state(c: &RestrictedParams, b: f64) -> Result<DensityMatrix> {
    DensityMatrix::new(restricted_matrix(c, b)?)
}
