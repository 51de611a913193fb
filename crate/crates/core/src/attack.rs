//! Single-qubit Clifford attacks on symmetric BB84.
//!
//! A Clifford gate on Bob's qubit permutes the Pauli letters up to sign, so
//! every candidate attack is a signed permutation of `(X, Y, Z)` applied to
//! the B side of the Bell-state correlations. Only half of the 48 candidates
//! are positive semidefinite.

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use crate::channels::{avg_qber, choi_of_unitary_attack};
use crate::entropy::binary_entropy;
use crate::error::{arg, Result};
use crate::linalg::{self, CMatrix, Eigh};
use crate::pauli::{from_correlations, Letter};
use crate::protocol::{keyrate_eval, ScenarioConfig};
use crate::state::DensityMatrix;
use crate::tableau::Gate;

/// PSD tolerance of the validity filter.
pub const VALIDITY_TOL: f64 = 1e-10;

const AXES: [Letter; 3] = [Letter::X, Letter::Y, Letter::Z];

/// `X, Y, Z ↦ signs[i]·images[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedPermutation {
    images: [Letter; 3],
    signs: [i8; 3],
}

impl SignedPermutation {
    pub fn new(images: [Letter; 3], signs: [i8; 3]) -> Result<Self> {
        let mut seen = [false; 4];
        for l in images {
            if l == Letter::I || seen[l.index()] {
                return arg(format!("{images:?} is not a permutation of X, Y, Z"));
            }
            seen[l.index()] = true;
        }
        if signs.iter().any(|s| s.abs() != 1) {
            return arg(format!("signs must be ±1, got {signs:?}"));
        }
        Ok(Self { images, signs })
    }

    pub fn identity() -> Self {
        Self { images: AXES, signs: [1; 3] }
    }

    /// All 48, permutations in lexicographic order, then sign patterns
    /// `+++`, `++-`, ….
    pub fn all() -> Vec<Self> {
        let mut perms = Vec::new();
        for a in AXES {
            for b in AXES {
                for c in AXES {
                    if a != b && b != c && a != c {
                        perms.push([a, b, c]);
                    }
                }
            }
        }
        let mut out = Vec::with_capacity(48);
        for images in perms {
            for mask in 0..8u8 {
                let signs = [0, 1, 2].map(|i| if mask >> (2 - i) & 1 == 1 { -1 } else { 1 });
                out.push(Self { images, signs });
            }
        }
        out
    }

    pub fn images(&self) -> [Letter; 3] {
        self.images
    }

    pub fn signs(&self) -> [i8; 3] {
        self.signs
    }

    /// Image of a letter with its sign; `I` is fixed.
    pub fn apply(&self, letter: Letter) -> (Letter, i8) {
        match letter {
            Letter::I => (Letter::I, 1),
            l => (self.images[l.index() - 1], self.signs[l.index() - 1]),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let mut images = [Letter::I; 3];
        let mut signs = [1; 3];
        for (i, &axis) in AXES.iter().enumerate() {
            let (mid, s1) = other.apply(axis);
            let (out, s2) = self.apply(mid);
            images[i] = out;
            signs[i] = s1 * s2;
        }
        Self { images, signs }
    }

    /// Determinant of the signed permutation matrix.
    pub fn det(&self) -> i8 {
        let idx = self.images.map(|l| l.index());
        let inversions = (0..3)
            .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
            .filter(|&(i, j)| idx[i] > idx[j])
            .count();
        let parity = if inversions % 2 == 0 { 1 } else { -1 };
        parity * self.signs.iter().product::<i8>()
    }

    /// Images as a word, e.g. `"YXZ"`.
    pub fn perm_label(&self) -> String {
        self.images.iter().map(|l| l.symbol()).collect()
    }

    /// Signs as a word, e.g. `"+-+"`.
    pub fn sign_label(&self) -> String {
        self.signs.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
    }

    /// Candidate Choi matrix: the Bell-state correlations with Bob's letters
    /// mapped through `self`. Not necessarily positive.
    pub fn candidate(&self) -> CMatrix {
        let bell = bell_correlations();
        let mut t = [[0.0; 4]; 4];
        for k in Letter::ALL {
            for j in Letter::ALL {
                let (image, sign) = self.apply(j);
                t[k.index()][image.index()] = f64::from(sign) * bell[k.index()][j.index()];
            }
        }
        from_correlations(&t)
    }

    /// Shortest `H`/`S` word on one qubit whose Choi state equals
    /// [`candidate`](Self::candidate), searched up to `max_len` gates.
    pub fn realizing_circuit(&self, max_len: usize) -> Result<Option<Vec<Gate>>> {
        let target = self.candidate();
        let mut queue = VecDeque::from([Vec::<Gate>::new()]);
        while let Some(word) = queue.pop_front() {
            let choi = choi_of_unitary_attack(0, &word)?;
            if linalg::max_abs_diff(choi.matrix(), &target) < 1e-12 {
                return Ok(Some(word));
            }
            if word.len() < max_len {
                for g in [Gate::H(0), Gate::S(0)] {
                    let mut next = word.clone();
                    next.push(g);
                    queue.push_back(next);
                }
            }
        }
        Ok(None)
    }
}

impl fmt::Display for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, l) in self.signs.iter().zip(self.images) {
            write!(f, "{}{}", if *s > 0 { '+' } else { '-' }, l.symbol())?;
        }
        Ok(())
    }
}

fn bell_correlations() -> [[f64; 4]; 4] {
    let mut t = [[0.0; 4]; 4];
    t[0][0] = 1.0;
    t[1][1] = 1.0;
    t[2][2] = -1.0;
    t[3][3] = 1.0;
    t
}

/// One enumerated attack. Rates and QBER are only defined for valid ones.
#[derive(Debug, Clone)]
pub struct AttackRecord {
    pub sp: SignedPermutation,
    pub choi: CMatrix,
    pub valid: bool,
    pub q: Option<f64>,
    pub clifford_keyrate: Option<f64>,
    pub worst_case_keyrate: Option<f64>,
}

impl AttackRecord {
    pub fn state(&self) -> Option<DensityMatrix> {
        self.valid.then(|| DensityMatrix::new(self.choi.clone()).ok()).flatten()
    }
}

/// Optimal-attack key rate at QBER `q`: `p_pass·max(0, 1 − 2h(min(q, 1−q)))`.
pub fn worst_case_keyrate(q: f64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return arg(format!("QBER {q} outside [0, 1]"));
    }
    if !(p > 0.0 && p < 1.0) {
        return arg(format!("p = {p} outside (0, 1)"));
    }
    let h = binary_entropy(q.min(1.0 - q))?;
    Ok(crate::protocol::p_pass(p) * (1.0 - 2.0 * h).max(0.0))
}

/// All 48 candidates evaluated at symmetric BB84 (`b = p = 0.5`).
pub fn enumerate_attacks() -> Result<Vec<AttackRecord>> {
    enumerate_attacks_at(0.5)
}

/// As [`enumerate_attacks`] with basis probability `p`.
pub fn enumerate_attacks_at(p: f64) -> Result<Vec<AttackRecord>> {
    let config = ScenarioConfig { b: 0.5, p, eps: 0.0, ..Default::default() };
    config.validate()?;
    SignedPermutation::all()
        .into_iter()
        .map(|sp| {
            let choi = sp.candidate();
            let valid = Eigh::new(&choi).min() >= -VALIDITY_TOL;
            let mut record = AttackRecord { sp, choi, valid, q: None, clifford_keyrate: None, worst_case_keyrate: None };
            if let Some(rho) = record.state() {
                let q = avg_qber(&rho);
                record.q = Some(q);
                record.clifford_keyrate = Some(keyrate_eval(&rho, &config)?.keyrate);
                record.worst_case_keyrate = Some(worst_case_keyrate(q.clamp(0.0, 1.0), p)?);
            }
            Ok(record)
        })
        .collect()
}

/// One QBER class of valid attacks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareRow {
    pub q: f64,
    /// Smallest key rate among the valid attacks with this QBER.
    pub clifford_keyrate: f64,
    pub worst_case_keyrate: f64,
    pub margin: f64,
    pub attacks: usize,
}

/// Clifford versus worst-case key rates, one row per distinct QBER in
/// ascending order.
pub fn compare_report(records: &[AttackRecord]) -> Vec<CompareRow> {
    let mut rows: Vec<CompareRow> = Vec::new();
    let mut valid: Vec<_> = records
        .iter()
        .filter_map(|r| Some((r.q?, r.clifford_keyrate?, r.worst_case_keyrate?)))
        .collect();
    valid.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (q, k, w) in valid {
        match rows.last_mut() {
            Some(row) if (row.q - q).abs() < 1e-9 => {
                row.clifford_keyrate = row.clifford_keyrate.min(k);
                row.margin = row.clifford_keyrate - row.worst_case_keyrate;
                row.attacks += 1;
            }
            _ => rows.push(CompareRow { q, clifford_keyrate: k, worst_case_keyrate: w, margin: k - w, attacks: 1 }),
        }
    }
    rows
}
