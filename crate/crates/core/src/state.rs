//! Validated pure and mixed states.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMatrix, CVector, Eigh};

/// Tolerance on `M = M†` and `Tr M = 1`.
pub const STATE_TOL: f64 = 1e-12;
/// Smallest eigenvalue tolerated in a density matrix.
pub const PSD_TOL: f64 = 1e-10;

/// A unit-norm vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: CVector,
}

impl StateVector {
    pub fn new(amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if (norm - 1.0).abs() > STATE_TOL * 10.0 {
            return Err(Error::Argument(format!("state vector has norm {norm}")));
        }
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(linalg::projector(&self.amps))
    }

    /// `|⟨self|other⟩|`.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.amps.dotc(&other.amps).norm()
    }
}

/// A Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates the state invariants. The stored matrix is symmetrized so
    /// that downstream eigensolvers see an exactly Hermitian input.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::Argument(format!("density matrix shape {:?}", m.shape())));
        }
        if !linalg::is_hermitian(&m, STATE_TOL) {
            return Err(Error::Precondition("matrix is not Hermitian".into()));
        }
        let tr = linalg::trace(&m).re;
        if (tr - 1.0).abs() > STATE_TOL * m.nrows() as f64 {
            return Err(Error::Precondition(format!("trace is {tr}, expected 1")));
        }
        let m = linalg::hermitian_part(&m);
        let min = Eigh::new(&m).min();
        if min < -PSD_TOL {
            return Err(Error::Precondition(format!("minimum eigenvalue {min:e} is negative")));
        }
        Ok(Self { m })
    }

    /// Skips validation; for matrices that are states by construction.
    pub(crate) fn from_trusted(m: CMatrix) -> Self {
        Self { m: linalg::hermitian_part(&m) }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_trusted(linalg::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        Eigh::new(&self.m).values
    }

    /// `Tr[ρ O]` for a Hermitian observable.
    pub fn expect(&self, observable: &CMatrix) -> f64 {
        linalg::trace_prod_re(&self.m, observable)
    }
}

/// A random full-rank state `A A† / Tr[A A†]` with uniformly drawn entries
/// of `A`. Suitable for property tests; not Haar-distributed.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let a = CMatrix::from_fn(dim, dim, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let m = &a * a.adjoint();
    let tr = linalg::trace(&m).re;
    DensityMatrix::from_trusted(m.scale(1.0 / tr))
}
