//! Pauli-random channels, depolarization, Choi states of unitary attacks and
//! bit-error rates.

use crate::error::{arg, Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::pauli::{self, bell_state, gen_pauli, PauliLabel};
use crate::state::DensityMatrix;
use crate::tableau::{tableau_to_unitary, Gate, MAX_DENSE_QUBITS};

/// BB84 measurement bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    /// Basis vector for outcome `bit` (`|0⟩,|1⟩` or `|+⟩,|−⟩`).
    pub fn ket(self, bit: usize) -> CVector {
        match self {
            Basis::Z => linalg::basis_ket(2, bit),
            Basis::X => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                let sign = if bit == 0 { h } else { -h };
                CVector::from_vec(vec![linalg::c64(h, 0.0), linalg::c64(sign, 0.0)])
            }
        }
    }

    pub fn projector(self, bit: usize) -> CMatrix {
        linalg::projector(&self.ket(bit))
    }

    /// Projector onto disagreeing outcomes, `Σ_{a≠b} M_a ⊗ M_b`.
    pub fn error_observable(self) -> CMatrix {
        linalg::kron(&self.projector(0), &self.projector(1)) + linalg::kron(&self.projector(1), &self.projector(0))
    }
}

/// Probability weights `w[r][s]` of a Pauli-random channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliWeights {
    d: usize,
    w: Vec<Vec<f64>>,
}

impl PauliWeights {
    pub fn new(d: usize, w: Vec<Vec<f64>>) -> Result<Self> {
        PauliLabel::identity(d)?;
        if w.len() != d || w.iter().any(|row| row.len() != d) {
            return arg(format!("weights must be a {d}x{d} table"));
        }
        if w.iter().flatten().any(|&x| x < 0.0 || !x.is_finite()) {
            return arg("weights must be nonnegative");
        }
        let total: f64 = w.iter().flatten().sum();
        if (total - 1.0).abs() > 1e-12 {
            return arg(format!("weights sum to {total}"));
        }
        Ok(Self { d, w })
    }

    /// All weight on the identity.
    pub fn identity(d: usize) -> Result<Self> {
        let mut w = vec![vec![0.0; d]; d];
        w[0][0] = 1.0;
        Self::new(d, w)
    }

    pub fn uniform(d: usize) -> Result<Self> {
        let x = 1.0 / (d * d) as f64;
        Self::new(d, vec![vec![x; d]; d])
    }

    /// Optimal-attack qubit weights at average error rate `q`: `(1−q)²` on
    /// I, `q(1−q)` on X and Z, `q²` on Y.
    pub fn from_bb84_q(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return arg(format!("error rate {q} outside [0, 1]"));
        }
        let c = q * (1.0 - q);
        Self::new(2, vec![vec![(1.0 - q) * (1.0 - q), c], vec![c, q * q]])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, r: usize, s: usize) -> f64 {
        self.w[r][s]
    }

    fn labelled(&self) -> impl Iterator<Item = (PauliLabel, f64)> + '_ {
        PauliLabel::all(self.d)
            .expect("dimension validated")
            .into_iter()
            .map(|l| (l, self.w[l.r()][l.s()]))
    }
}

/// Choi state (trace-one convention) of a channel acting on the second factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiState {
    d: usize,
    rho: DensityMatrix,
}

impl ChoiState {
    pub fn new(d: usize, m: CMatrix) -> Result<Self> {
        if m.nrows() != d * d {
            return arg(format!("Choi matrix must be {0}x{0}", d * d));
        }
        let rho = DensityMatrix::new(m)?;
        let reference = pauli::partial_trace(rho.matrix(), &[d, d], &[0])?;
        let mixed = linalg::identity(d).scale(1.0 / d as f64);
        if linalg::max_abs_diff(&reference, &mixed) > 1e-10 {
            return Err(Error::Precondition("reference marginal is not maximally mixed".into()));
        }
        Ok(Self { d, rho })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn matrix(&self) -> &CMatrix {
        self.rho.matrix()
    }

    pub fn into_state(self) -> DensityMatrix {
        self.rho
    }

    /// Moduli `d·|c_L|` of the two-factor Pauli coefficients, i.e. the
    /// coefficients of the expansion `ρ = (1/d) Σ μ_L P_L`.
    pub fn pauli_moduli(&self) -> Vec<(Vec<PauliLabel>, f64)> {
        scaled_pauli_moduli(self.matrix(), self.d).expect("Choi dimension validated")
    }
}

/// `d·|c_L|` for every two-factor word `L` of a `d²`-dimensional matrix.
pub fn scaled_pauli_moduli(m: &CMatrix, d: usize) -> Result<Vec<(Vec<PauliLabel>, f64)>> {
    Ok(pauli::pauli_decompose(m, d, 2)?
        .iter()
        .map(|(w, c)| (w.clone(), d as f64 * c.norm()))
        .collect())
}

pub fn pauli_random_apply(w: &PauliWeights, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != w.d {
        return arg(format!("state dim {} vs channel dim {}", rho.dim(), w.d));
    }
    let out = w
        .labelled()
        .filter(|(_, x)| *x > 0.0)
        .fold(linalg::zeros(w.d), |acc, (l, x)| {
            let p = gen_pauli(l);
            acc + (&p * rho.matrix() * p.adjoint()).scale(x)
        });
    Ok(DensityMatrix::from_trusted(out))
}

pub fn choi_of_pauli_random(w: &PauliWeights) -> ChoiState {
    let m = w.labelled().fold(linalg::zeros(w.d * w.d), |acc, (l, x)| {
        let b = bell_state(w.d, l.r(), l.s()).expect("label in range");
        acc + linalg::projector(b.amplitudes()).scale(x)
    });
    ChoiState::new(w.d, m).expect("Bell-diagonal mixtures are Choi states")
}

/// `(id ⊗ E)(|B_00⟩⟨B_00|)` for a linear map `E` on `d × d` matrices.
pub fn choi_of_channel<F>(d: usize, channel: F) -> CMatrix
where
    F: Fn(&CMatrix) -> CMatrix,
{
    let mut out = linalg::zeros(d * d);
    for i in 0..d {
        for j in 0..d {
            let eij = linalg::outer(&linalg::basis_ket(d, i), &linalg::basis_ket(d, j));
            out += linalg::kron(&eij, &channel(&eij)).scale(1.0 / d as f64);
        }
    }
    out
}

/// Two-qubit Choi state of a Clifford circuit acting on Bob's qubit (qubit
/// 0) and `n_eve` ancillas (qubits `1..=n_eve`). The circuit is applied to
/// half of a maximally entangled state on `1 + n_eve` qubit pairs, then
/// every ancilla factor is traced on both sides.
pub fn choi_of_unitary_attack(n_eve: usize, gates: &[Gate]) -> Result<ChoiState> {
    let n = n_eve + 1;
    if n > MAX_DENSE_QUBITS {
        return Err(Error::Capability(format!(
            "at most {} Eve ancillas supported, got {n_eve}",
            MAX_DENSE_QUBITS - 1
        )));
    }
    let u = tableau_to_unitary(n, gates)?;
    let dim = 1usize << n;
    let norm = 1.0 / (dim as f64).sqrt();
    let mut psi = CVector::zeros(dim * dim);
    for k in 0..dim {
        for l in 0..dim {
            psi[k * dim + l] = u[(l, k)] * norm;
        }
    }
    let full = linalg::projector(&psi);
    let reduced = pauli::partial_trace(&full, &vec![2; 2 * n], &[0, n])?;
    ChoiState::new(2, reduced)
}

/// `(1−ε)ρ + ε·Tr_B[ρ] ⊗ I/2` on a two-qubit state.
pub fn depolarize(rho: &DensityMatrix, eps: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&eps) {
        return arg(format!("depolarizing probability {eps} outside [0, 1]"));
    }
    if rho.dim() != 4 {
        return arg(format!("depolarize expects a two-qubit state, got dim {}", rho.dim()));
    }
    let marginal = pauli::partial_trace(rho.matrix(), &[2, 2], &[0])?;
    let noise = linalg::kron(&marginal, &linalg::identity(2).scale(0.5));
    Ok(DensityMatrix::from_trusted(rho.matrix().scale(1.0 - eps) + noise.scale(eps)))
}

/// Error probability `Tr[ρ E_basis]` of same-basis rounds.
pub fn qber(rho: &DensityMatrix, basis: Basis) -> f64 {
    let e = rho.expect(&basis.error_observable());
    let matched: f64 = (0..2)
        .flat_map(|a| (0..2).map(move |b| (a, b)))
        .map(|(a, b)| rho.expect(&linalg::kron(&basis.projector(a), &basis.projector(b))))
        .sum();
    e / matched
}

pub fn avg_qber(rho: &DensityMatrix) -> f64 {
    0.5 * (qber(rho, Basis::Z) + qber(rho, Basis::X))
}
