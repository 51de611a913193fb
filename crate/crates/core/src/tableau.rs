//! Phase-tracked Clifford tableaux for qubits.
//!
//! Pauli words are held internally as `i^phase ∏_q X_q^{x_q} Z_q^{z_q}`,
//! so `Y = i·XZ`. Qubit 0 is the most significant tensor factor.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{arg, Error, Result};
use crate::linalg::{self, c64, CMatrix};
use crate::pauli::Letter;

/// Largest register realized as a dense unitary.
pub const MAX_DENSE_QUBITS: usize = 4;

/// A Hermitian Pauli word with a real sign.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Letter>,
    negative: bool,
}

impl PauliString {
    pub fn new(letters: Vec<Letter>, sign: i8) -> Result<Self> {
        match sign {
            1 => Ok(Self { letters, negative: false }),
            -1 => Ok(Self { letters, negative: true }),
            _ => arg(format!("sign must be ±1, got {sign}")),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self { letters: vec![Letter::I; n], negative: false }
    }

    /// A single letter on qubit `k` of an `n`-qubit register.
    pub fn single(n: usize, k: usize, letter: Letter) -> Self {
        let mut letters = vec![Letter::I; n];
        letters[k] = letter;
        Self { letters, negative: false }
    }

    /// Parses words like `"XZ"`, `"-YI"`, `"+Z"`.
    pub fn parse(s: &str) -> Result<Self> {
        let (negative, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let letters = body
            .chars()
            .map(|c| match c {
                'I' => Ok(Letter::I),
                'X' => Ok(Letter::X),
                'Y' => Ok(Letter::Y),
                'Z' => Ok(Letter::Z),
                other => arg(format!("unknown Pauli letter {other:?}")),
            })
            .collect::<Result<_>>()?;
        Ok(Self { letters, negative })
    }

    pub fn n(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn sign(&self) -> i8 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn matrix(&self) -> CMatrix {
        let mats: Vec<CMatrix> = self.letters.iter().map(|l| l.matrix()).collect();
        let m = linalg::kron_all(&mats);
        if self.negative {
            -m
        } else {
            m
        }
    }

    /// True when the two words commute.
    pub fn commutes_with(&self, other: &Self) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| **a != Letter::I && **b != Letter::I && a != b)
            .count();
        anti % 2 == 0
    }

    fn to_symplectic(&self) -> Symplectic {
        let mut s = Symplectic::identity(self.n());
        for (q, l) in self.letters.iter().enumerate() {
            match l {
                Letter::I => {}
                Letter::X => s.x[q] = true,
                Letter::Z => s.z[q] = true,
                Letter::Y => {
                    s.x[q] = true;
                    s.z[q] = true;
                    s.phase += 1;
                }
            }
        }
        if self.negative {
            s.phase += 2;
        }
        s.phase %= 4;
        s
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.negative { "-" } else { "+" })?;
        for l in &self.letters {
            write!(f, "{}", l.symbol())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Symplectic {
    x: Vec<bool>,
    z: Vec<bool>,
    phase: u8,
}

impl Symplectic {
    fn identity(n: usize) -> Self {
        Self { x: vec![false; n], z: vec![false; n], phase: 0 }
    }

    fn mul(&self, rhs: &Self) -> Self {
        // Z^a X^b = (-1)^{ab} X^b Z^a on each qubit
        let swaps = self.z.iter().zip(&rhs.x).filter(|(a, b)| **a && **b).count();
        let phase = (self.phase as usize + rhs.phase as usize + 2 * swaps) % 4;
        Self {
            x: self.x.iter().zip(&rhs.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&rhs.z).map(|(a, b)| a ^ b).collect(),
            phase: phase as u8,
        }
    }

    fn conjugate(&mut self, gate: Gate) {
        match gate {
            Gate::H(q) => {
                if self.x[q] && self.z[q] {
                    self.phase = (self.phase + 2) % 4;
                }
                std::mem::swap(&mut self.x[q], &mut self.z[q]);
            }
            Gate::S(q) => {
                if self.x[q] {
                    self.phase = (self.phase + 1) % 4;
                    self.z[q] ^= true;
                }
            }
            Gate::Cnot(c, t) => {
                let xc = self.x[c];
                let zt = self.z[t];
                self.x[t] ^= xc;
                self.z[c] ^= zt;
            }
        }
    }

    fn to_pauli_string(&self) -> PauliString {
        let mut ys = 0;
        let letters = self
            .x
            .iter()
            .zip(&self.z)
            .map(|(&x, &z)| match (x, z) {
                (false, false) => Letter::I,
                (true, false) => Letter::X,
                (false, true) => Letter::Z,
                (true, true) => {
                    ys += 1;
                    Letter::Y
                }
            })
            .collect();
        let residual = (self.phase as i32 - ys).rem_euclid(4);
        assert!(residual % 2 == 0, "Clifford image of a Hermitian word acquired phase ±i");
        PauliString { letters, negative: residual == 2 }
    }
}

/// Generators of the qubit Clifford group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    S(usize),
    /// `Cnot(control, target)`.
    Cnot(usize, usize),
}

impl Gate {
    /// Builds a gate from a name in `{H, S, CNOT}` (case-insensitive) and
    /// its qubit indices.
    pub fn from_name(name: &str, qubits: &[usize]) -> Result<Self> {
        match (name.to_ascii_uppercase().as_str(), qubits) {
            ("H", &[q]) => Ok(Gate::H(q)),
            ("S", &[q]) => Ok(Gate::S(q)),
            ("CNOT" | "CX", &[c, t]) => Ok(Gate::Cnot(c, t)),
            ("H" | "S" | "CNOT" | "CX", _) => arg(format!("gate {name} given {} qubit indices", qubits.len())),
            _ => arg(format!("unknown gate {name:?}")),
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        let ok = match *self {
            Gate::H(q) | Gate::S(q) => q < n,
            Gate::Cnot(c, t) => c < n && t < n && c != t,
        };
        if ok {
            Ok(())
        } else {
            arg(format!("gate {self:?} invalid on {n} qubits"))
        }
    }

    fn dense(&self, n: usize) -> CMatrix {
        let dim = 1usize << n;
        let bit = |idx: usize, q: usize| (idx >> (n - 1 - q)) & 1;
        let mut u = linalg::zeros(dim);
        match *self {
            Gate::H(q) => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                for col in 0..dim {
                    let flipped = col ^ (1 << (n - 1 - q));
                    let sign = if bit(col, q) == 1 { -h } else { h };
                    u[(col, col)] += c64(sign, 0.0);
                    u[(flipped, col)] += c64(h, 0.0);
                }
            }
            Gate::S(q) => {
                for col in 0..dim {
                    u[(col, col)] = if bit(col, q) == 1 { c64(0.0, 1.0) } else { c64(1.0, 0.0) };
                }
            }
            Gate::Cnot(c, t) => {
                for col in 0..dim {
                    let row = if bit(col, c) == 1 { col ^ (1 << (n - 1 - t)) } else { col };
                    u[(row, col)] = c64(1.0, 0.0);
                }
            }
        }
        u
    }
}

/// Conjugation action `P ↦ U P U†` of a Clifford unitary, stored as the
/// images of every `X_k` and `Z_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitTableau {
    images_x: Vec<Symplectic>,
    images_z: Vec<Symplectic>,
}

impl QubitTableau {
    pub fn identity(n: usize) -> Self {
        let unit = |q: usize, is_x: bool| {
            let mut s = Symplectic::identity(n);
            if is_x {
                s.x[q] = true;
            } else {
                s.z[q] = true;
            }
            s
        };
        Self {
            images_x: (0..n).map(|q| unit(q, true)).collect(),
            images_z: (0..n).map(|q| unit(q, false)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.images_x.len()
    }

    pub fn image_of_x(&self, k: usize) -> PauliString {
        self.images_x[k].to_pauli_string()
    }

    pub fn image_of_z(&self, k: usize) -> PauliString {
        self.images_z[k].to_pauli_string()
    }

    /// Appends a gate applied after the current circuit.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.check(self.n())?;
        for img in self.images_x.iter_mut().chain(self.images_z.iter_mut()) {
            img.conjugate(gate);
        }
        Ok(())
    }

    pub fn apply(&self, p: &PauliString) -> Result<PauliString> {
        if p.n() != self.n() {
            return arg(format!("word on {} qubits, tableau on {}", p.n(), self.n()));
        }
        let src = p.to_symplectic();
        let mut acc = Symplectic::identity(self.n());
        acc.phase = src.phase;
        for q in 0..self.n() {
            if src.x[q] {
                acc = acc.mul(&self.images_x[q]);
            }
            if src.z[q] {
                acc = acc.mul(&self.images_z[q]);
            }
        }
        Ok(acc.to_pauli_string())
    }
}

pub fn tableau_from_circuit(n: usize, gates: &[Gate]) -> Result<QubitTableau> {
    let mut t = QubitTableau::identity(n);
    for &g in gates {
        t.push(g)?;
    }
    Ok(t)
}

pub fn tableau_apply(t: &QubitTableau, p: &PauliString) -> Result<PauliString> {
    t.apply(p)
}

/// A uniformly drawn word of `depth` generators with random qubit targets.
/// Single-qubit registers draw from `{H, S}` only.
pub fn random_circuit(n: usize, depth: usize, seed: u64) -> Vec<Gate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = if n >= 2 { 3 } else { 2 };
    (0..depth)
        .map(|_| match rng.gen_range(0..kinds) {
            0 => Gate::H(rng.gen_range(0..n)),
            1 => Gate::S(rng.gen_range(0..n)),
            _ => {
                let c = rng.gen_range(0..n);
                let t = (c + rng.gen_range(1..n)) % n;
                Gate::Cnot(c, t)
            }
        })
        .collect()
}

pub fn random_clifford(n: usize, depth: usize, seed: u64) -> QubitTableau {
    tableau_from_circuit(n, &random_circuit(n, depth, seed)).expect("generated gates are in range")
}

/// Dense `2^n × 2^n` unitary of a circuit, gates applied left to right.
pub fn tableau_to_unitary(n: usize, gates: &[Gate]) -> Result<CMatrix> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::Capability(format!(
            "dense circuits limited to {MAX_DENSE_QUBITS} qubits, got {n}"
        )));
    }
    let mut u = linalg::identity(1 << n);
    for g in gates {
        g.check(n)?;
        u = g.dense(n) * u;
    }
    Ok(u)
}
