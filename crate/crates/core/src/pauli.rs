//! Generalized Pauli (Weyl–Heisenberg) operators, Bell states, Pauli-basis
//! decompositions and partial traces for prime-dimensional qudits.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{arg, Error, Result};
use crate::linalg::{self, c64, CMatrix, CVector};
use crate::state::StateVector;

pub fn is_prime(d: usize) -> bool {
    d >= 2 && (2..).take_while(|k| k * k <= d).all(|k| d % k != 0)
}

/// `e^{2πi k/d}`.
pub fn root_of_unity(k: usize, d: usize) -> Complex64 {
    let k = k % d;
    if (4 * k) % d == 0 {
        return [c64(1.0, 0.0), c64(0.0, 1.0), c64(-1.0, 0.0), c64(0.0, -1.0)][4 * k / d];
    }
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64)
}

/// Index pair `(r, s)` of the operator `P_{r,s} = Σ_k e^{2πiks/d}|k+r⟩⟨k|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliLabel {
    d: usize,
    r: usize,
    s: usize,
}

impl PauliLabel {
    pub fn new(d: usize, r: usize, s: usize) -> Result<Self> {
        if !is_prime(d) {
            return arg(format!("dimension {d} is not prime"));
        }
        if r >= d || s >= d {
            return arg(format!("label ({r},{s}) out of range for d={d}"));
        }
        Ok(Self { d, r, s })
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::new(d, 0, 0)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn is_identity(&self) -> bool {
        self.r == 0 && self.s == 0
    }

    /// All `d²` labels in `(r, s)` lexicographic order.
    pub fn all(d: usize) -> Result<Vec<Self>> {
        if !is_prime(d) {
            return arg(format!("dimension {d} is not prime"));
        }
        Ok((0..d)
            .flat_map(|r| (0..d).map(move |s| Self { d, r, s }))
            .collect())
    }
}

pub fn gen_pauli(label: PauliLabel) -> CMatrix {
    let PauliLabel { d, r, s } = label;
    let mut m = linalg::zeros(d);
    for k in 0..d {
        m[((k + r) % d, k)] = root_of_unity(k * s, d);
    }
    m
}

/// Tensor product of generalized Paulis, first label most significant.
pub fn pauli_word(labels: &[PauliLabel]) -> CMatrix {
    let mats: Vec<CMatrix> = labels.iter().map(|&l| gen_pauli(l)).collect();
    linalg::kron_all(&mats)
}

/// Hermitian single-qubit Pauli letters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn matrix(self) -> CMatrix {
        let (o, z, i) = (c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 1.0));
        match self {
            Letter::I => linalg::identity(2),
            Letter::X => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
            Letter::Y => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
            Letter::Z => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        }
    }

    pub fn symbol(self) -> char {
        ['I', 'X', 'Y', 'Z'][self as usize]
    }
}

/// `P_k ⊗ P_j` for Hermitian letters.
pub fn letter_pair(k: Letter, j: Letter) -> CMatrix {
    linalg::kron(&k.matrix(), &j.matrix())
}

/// Two-qubit correlation table `t[k][j] = Tr[M P_k⊗P_j]`, so that
/// `M = ¼ Σ t[k][j] P_k⊗P_j`.
pub fn correlations(m: &CMatrix) -> Result<[[f64; 4]; 4]> {
    if m.shape() != (4, 4) {
        return arg(format!("expected a 4x4 matrix, got {:?}", m.shape()));
    }
    let mut t = [[0.0; 4]; 4];
    for k in Letter::ALL {
        for j in Letter::ALL {
            t[k.index()][j.index()] = linalg::trace_prod_re(m, &letter_pair(k, j));
        }
    }
    Ok(t)
}

/// Inverse of [`correlations`].
pub fn from_correlations(t: &[[f64; 4]; 4]) -> CMatrix {
    let mut m = linalg::zeros(4);
    for k in Letter::ALL {
        for j in Letter::ALL {
            let c = t[k.index()][j.index()];
            if c != 0.0 {
                m += letter_pair(k, j).scale(0.25 * c);
            }
        }
    }
    m
}

/// `|B_{r,s}⟩ = d^{-1/2} Σ_k e^{2πiks/d}|k⟩|k+r⟩` on `d²` amplitudes.
pub fn bell_state(d: usize, r: usize, s: usize) -> Result<StateVector> {
    PauliLabel::new(d, r, s)?;
    let mut v = CVector::zeros(d * d);
    let norm = 1.0 / (d as f64).sqrt();
    for k in 0..d {
        v[k * d + (k + r) % d] = root_of_unity(k * s, d) * norm;
    }
    StateVector::new(v)
}

/// Coefficients `c_L = Tr[M (⊗P_L)†] / d^n` for every word `L` of `n` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliDecomposition {
    d: usize,
    n: usize,
    coeffs: BTreeMap<Vec<PauliLabel>, Complex64>,
}

impl PauliDecomposition {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, word: &[PauliLabel]) -> Complex64 {
        self.coeffs.get(word).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<PauliLabel>, &Complex64)> {
        self.coeffs.iter()
    }

    /// Words whose coefficient modulus exceeds `tol`.
    pub fn support(&self, tol: f64) -> Vec<(Vec<PauliLabel>, Complex64)> {
        self.coeffs
            .iter()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(w, c)| (w.clone(), *c))
            .collect()
    }

    /// `Σ_L c_L ⊗P_L`.
    pub fn reassemble(&self) -> CMatrix {
        let dim = self.d.pow(self.n as u32);
        self.coeffs
            .iter()
            .fold(linalg::zeros(dim), |acc, (w, c)| acc + pauli_word(w) * *c)
    }
}

fn words(d: usize, n: usize) -> Result<Vec<Vec<PauliLabel>>> {
    let single = PauliLabel::all(d)?;
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|w| {
                single.iter().map(move |&l| {
                    let mut w = w.clone();
                    w.push(l);
                    w
                })
            })
            .collect();
    }
    Ok(out)
}

pub fn pauli_decompose(m: &CMatrix, d: usize, n: usize) -> Result<PauliDecomposition> {
    let dim = d
        .checked_pow(n as u32)
        .ok_or_else(|| Error::Capability(format!("{d}^{n} overflows")))?;
    if m.nrows() != dim || m.ncols() != dim {
        return arg(format!("matrix is {:?}, expected {dim}x{dim}", m.shape()));
    }
    let coeffs = words(d, n)?
        .into_iter()
        .map(|w| {
            let p = pauli_word(&w);
            let c = linalg::trace_prod(m, &p.adjoint()) / dim as f64;
            (w, c)
        })
        .collect();
    Ok(PauliDecomposition { d, n, coeffs })
}

/// Traces out every factor not listed in `keep`. Kept factors retain their
/// relative order.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.nrows() != total {
        return arg(format!("factor dims {dims:?} do not match matrix {:?}", m.shape()));
    }
    if let Some(&k) = keep.iter().find(|&&k| k >= dims.len()) {
        return arg(format!("kept factor {k} out of range"));
    }
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.len() != keep.len() {
        return arg("duplicate factor in keep set");
    }
    let nf = dims.len();
    let strides: Vec<usize> = (0..nf).map(|i| dims[i + 1..].iter().product()).collect();
    let traced: Vec<usize> = (0..nf).filter(|i| !keep.contains(i)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let traced_dim: usize = traced.iter().map(|&t| dims[t]).product();

    let split = |mut idx: usize, ds: &[usize]| -> Vec<usize> {
        let mut digits = vec![0; ds.len()];
        for i in (0..ds.len()).rev() {
            digits[i] = idx % ds[i];
            idx /= ds[i];
        }
        digits
    };
    let traced_dims: Vec<usize> = traced.iter().map(|&t| dims[t]).collect();
    let offset = |kept: &[usize], tr: &[usize]| -> usize {
        keep.iter().zip(kept).map(|(&k, &v)| v * strides[k]).sum::<usize>()
            + traced.iter().zip(tr).map(|(&t, &v)| v * strides[t]).sum::<usize>()
    };

    let mut out = linalg::zeros(out_dim);
    for i in 0..out_dim {
        let di = split(i, &kept_dims);
        for j in 0..out_dim {
            let dj = split(j, &kept_dims);
            let mut acc = c64(0.0, 0.0);
            for t in 0..traced_dim {
                let dt = split(t, &traced_dims);
                acc += m[(offset(&di, &dt), offset(&dj, &dt))];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, ATOL};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lbl(d: usize, r: usize, s: usize) -> PauliLabel {
        PauliLabel::new(d, r, s).unwrap()
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
        let a = CMatrix::from_fn(dim, dim, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        linalg::hermitian_part(&a)
    }

    #[test]
    fn qubit_paulis() {
        assert_eq!(gen_pauli(lbl(2, 0, 0)), linalg::identity(2));
        let x = gen_pauli(lbl(2, 1, 0));
        let z = gen_pauli(lbl(2, 0, 1));
        let one = c64(1.0, 0.0);
        let zero = c64(0.0, 0.0);
        assert_eq!(x, CMatrix::from_row_slice(2, 2, &[zero, one, one, zero]));
        assert!(max_abs_diff(&z, &CMatrix::from_row_slice(2, 2, &[one, zero, zero, -one])) < ATOL);
    }

    #[test]
    fn qutrit_shift_phase() {
        let m = gen_pauli(lbl(3, 1, 1));
        for row in 0..3 {
            for col in 0..3 {
                // oracle: the formula evaluated entrywise with explicit cos/sin
                let expect = if row == (col + 1) % 3 {
                    let th = 2.0 * PI * col as f64 / 3.0;
                    c64(th.cos(), th.sin())
                } else {
                    c64(0.0, 0.0)
                };
                assert!((m[(row, col)] - expect).norm() < ATOL);
            }
        }
    }

    #[test]
    fn out_of_range_labels_rejected() {
        assert!(PauliLabel::new(2, 2, 0).is_err());
        assert!(PauliLabel::new(4, 0, 0).is_err());
        assert!(bell_state(3, 0, 3).is_err());
    }

    #[test]
    fn unitarity_and_trace() {
        for d in [2, 3, 5] {
            for l in PauliLabel::all(d).unwrap() {
                let p = gen_pauli(l);
                assert!(max_abs_diff(&(&p * p.adjoint()), &linalg::identity(d)) < ATOL);
                let tr = linalg::trace(&p);
                let expect = if l.is_identity() { d as f64 } else { 0.0 };
                assert!((tr - c64(expect, 0.0)).norm() < ATOL);
            }
        }
    }

    #[test]
    fn bell_examples() {
        let h = 1.0 / 2f64.sqrt();
        let b00 = bell_state(2, 0, 0).unwrap();
        let expect = CVector::from_vec(vec![c64(h, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(h, 0.0)]);
        assert!((b00.amplitudes() - expect).norm() < ATOL);
        let b11 = bell_state(2, 1, 1).unwrap();
        let expect = CVector::from_vec(vec![c64(0.0, 0.0), c64(h, 0.0), c64(-h, 0.0), c64(0.0, 0.0)]);
        assert!((b11.amplitudes() - expect).norm() < ATOL);
    }

    #[test]
    fn bell_displacement_and_orthonormality() {
        for d in [2, 3, 5] {
            let base = bell_state(d, 0, 0).unwrap();
            let labels = PauliLabel::all(d).unwrap();
            let states: Vec<StateVector> = labels
                .iter()
                .map(|l| bell_state(d, l.r(), l.s()).unwrap())
                .collect();
            for (l, st) in labels.iter().zip(&states) {
                let op = linalg::kron(&linalg::identity(d), &gen_pauli(*l));
                let shifted = op * base.amplitudes();
                assert!((shifted - st.amplitudes()).norm() < ATOL);
            }
            for (i, a) in states.iter().enumerate() {
                for (j, b) in states.iter().enumerate() {
                    let ip = a.amplitudes().dotc(b.amplitudes());
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - c64(expect, 0.0)).norm() < ATOL);
                }
            }
        }
    }

    #[test]
    fn decompose_identity_and_bell() {
        let dec = pauli_decompose(&linalg::identity(4), 2, 2).unwrap();
        for (w, c) in dec.iter() {
            let expect = if w.iter().all(|l| l.is_identity()) { 1.0 } else { 0.0 };
            assert!((c - c64(expect, 0.0)).norm() < ATOL);
        }

        let rho = bell_state(3, 0, 0).unwrap().density();
        let dec = pauli_decompose(rho.matrix(), 3, 2).unwrap();
        for (w, c) in dec.iter() {
            let (a, b) = (w[0], w[1]);
            let expect = if a.r() == b.r() && (a.s() + b.s()) % 3 == 0 { 1.0 / 9.0 } else { 0.0 };
            assert!((c.norm() - expect).abs() < ATOL, "{w:?} {c}");
            assert!((c - c64(expect, 0.0)).norm() < ATOL);
        }
    }

    #[test]
    fn bell_correlations_in_hermitian_letters() {
        let rho = bell_state(2, 0, 0).unwrap().density();
        let t = correlations(rho.matrix()).unwrap();
        for k in Letter::ALL {
            for j in Letter::ALL {
                let expect = match (k, j) {
                    (Letter::I, Letter::I) | (Letter::X, Letter::X) | (Letter::Z, Letter::Z) => 0.25,
                    (Letter::Y, Letter::Y) => -0.25,
                    _ => 0.0,
                };
                assert!((0.25 * t[k.index()][j.index()] - expect).abs() < ATOL);
            }
        }
        assert!(max_abs_diff(&from_correlations(&t), rho.matrix()) < ATOL);
    }

    #[test]
    fn qubit_labels_match_letters_up_to_phase() {
        assert_eq!(gen_pauli(lbl(2, 1, 0)), Letter::X.matrix());
        assert_eq!(gen_pauli(lbl(2, 0, 1)), Letter::Z.matrix());
        let minus_i_y = Letter::Y.matrix() * c64(0.0, -1.0);
        assert!(max_abs_diff(&gen_pauli(lbl(2, 1, 1)), &minus_i_y) < ATOL);
    }

    #[test]
    fn decompose_rejects_bad_dims() {
        assert!(pauli_decompose(&linalg::identity(3), 2, 2).is_err());
    }

    #[test]
    fn decompose_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2usize, 3] {
            for n in [1, 2] {
                let dim = d.pow(n as u32);
                for _ in 0..200 {
                    let h = random_hermitian(&mut rng, dim);
                    let back = pauli_decompose(&h, d, n).unwrap().reassemble();
                    assert!(max_abs_diff(&back, &h) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn partial_trace_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(&mut rng, 3);
        let b = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(0.25, 0.0), c64(0.75, 0.0)]));
        let ab = linalg::kron(&a, &b);
        assert!(max_abs_diff(&partial_trace(&ab, &[3, 2], &[0]).unwrap(), &a) < ATOL);
        let ba = linalg::kron(&b, &a);
        assert!(max_abs_diff(&partial_trace(&ba, &[2, 3], &[1]).unwrap(), &a) < ATOL);

        let bell = bell_state(2, 0, 0).unwrap().density();
        let marg = partial_trace(bell.matrix(), &[2, 2], &[0]).unwrap();
        assert!(max_abs_diff(&marg, &linalg::identity(2).scale(0.5)) < ATOL);

        assert!(partial_trace(&ab, &[2, 2], &[0]).is_err());
        assert!(partial_trace(&ab, &[3, 2], &[2]).is_err());
    }

    #[test]
    fn partial_trace_of_pauli_words() {
        let labels = PauliLabel::all(2).unwrap();
        for &pa in &labels {
            for &pb in &labels {
                for &pc in &labels {
                    let word = pauli_word(&[pa, pb, pc]);
                    let out = partial_trace(&word, &[2, 2, 2], &[0]).unwrap();
                    let expect = if pb.is_identity() && pc.is_identity() {
                        gen_pauli(pa).scale(4.0)
                    } else {
                        linalg::zeros(2)
                    };
                    assert!(max_abs_diff(&out, &expect) < ATOL);
                }
            }
        }
    }

    #[test]
    fn partial_trace_keeps_order_of_noncontiguous_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_hermitian(&mut rng, 2);
        let c = random_hermitian(&mut rng, 2);
        let mid = linalg::identity(2).scale(0.5);
        let m = linalg::kron_all([&a, &mid, &c]);
        let out = partial_trace(&m, &[2, 2, 2], &[0, 2]).unwrap();
        assert!(max_abs_diff(&out, &linalg::kron(&a, &c)) < ATOL);
        let trace_before = linalg::trace(&m);
        let trace_after = linalg::trace(&partial_trace(&m, &[2, 2, 2], &[1]).unwrap());
        assert!((trace_before - trace_after).norm() < ATOL);
    }
}
