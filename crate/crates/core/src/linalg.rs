//! Dense complex linear algebra on small matrices.
//!
//! Every object in this crate is at most 256×256 (a two-sided Choi state for
//! four qubits), so everything is a plain `nalgebra::DMatrix<Complex64>`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Absolute tolerance for exact-algebra equality checks.
pub const ATOL: f64 = 1e-12;

/// Eigenvalues at or below this are treated as zero in entropy and
/// support decisions.
pub const EIG_ZERO: f64 = 1e-12;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(n: usize) -> CMatrix {
    CMatrix::zeros(n, n)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, first factor most significant.
pub fn kron_all<'a, I>(factors: I) -> CMatrix
where
    I: IntoIterator<Item = &'a CMatrix>,
{
    factors
        .into_iter()
        .fold(CMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().sum()
}

/// `Tr[a b]`, without forming the product.
pub fn trace_prod(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Real part of `Tr[a b]` for Hermitian arguments.
pub fn trace_prod_re(a: &CMatrix, b: &CMatrix) -> f64 {
    trace_prod(a, b).re
}

pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

pub fn projector(v: &CVector) -> CMatrix {
    outer(v, v)
}

pub fn basis_ket(dim: usize, idx: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[idx] = Complex64::new(1.0, 0.0);
    v
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && (m - m.adjoint()).iter().all(|z| z.norm() <= tol)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

// Cyclic complex Jacobi sweeps.
fn jacobi_eigh(mut a: CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    let mut v = identity(n);
    let scale = a.norm().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = diag(1, conj(phase)) * [[c, s], [-s, c]] acting on (p, q).
                let gpp = c64(c, 0.0);
                let gpq = c64(s, 0.0);
                let gqp = -phase.conj() * s;
                let gqq = phase.conj() * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = akp * gpp + akq * gqp;
                    a[(k, q)] = akp * gpq + akq * gqq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
                    a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
                }
                a[(p, q)] = c64(0.0, 0.0);
                a[(q, p)] = c64(0.0, 0.0);
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = vkp * gpp + vkq * gqp;
                    v[(k, q)] = vkp * gpq + vkq * gqq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)].re).collect(), v)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Columns are the orthonormal eigenvectors.
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn new(m: &CMatrix) -> Self {
        let n = m.nrows();
        let (diag, vecs) = jacobi_eigh(hermitian_part(m));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
        let values = order.iter().map(|&i| diag[i]).collect();
        let vectors = CMatrix::from_fn(n, n, |r, c| vecs[(r, order[c])]);
        Self { values, vectors }
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("empty spectrum")
    }

    /// `U f(Λ) U†`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (c, &lam) in self.values.iter().enumerate() {
            let fl = f(lam);
            for r in 0..n {
                scaled[(r, c)] *= fl;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Rotate `h` into the eigenbasis: `U† h U`.
    pub fn to_eigenbasis(&self, h: &CMatrix) -> CMatrix {
        self.vectors.adjoint() * h * &self.vectors
    }

    pub fn from_eigenbasis(&self, h: &CMatrix) -> CMatrix {
        &self.vectors * h * self.vectors.adjoint()
    }
}

/// Natural-log divided differences of a positive spectrum, the kernel of
/// the Fréchet derivative of the matrix logarithm.
pub(crate) fn log_divided_differences(values: &[f64]) -> DMatrix<f64> {
    let n = values.len();
    DMatrix::from_fn(n, n, |a, b| {
        let (x, y) = (values[a], values[b]);
        let scale = x.max(y);
        if (x - y).abs() <= 1e-9 * scale {
            // second-order expansion around the midpoint
            let m = 0.5 * (x + y);
            let h = 0.5 * (x - y);
            (1.0 + h * h / (3.0 * m * m)) / m
        } else {
            (x.ln() - y.ln()) / (x - y)
        }
    })
}

/// Directional derivative of `ln` at `eig` (a positive-definite matrix)
/// along the Hermitian direction `h`.
pub(crate) fn dlog(eig: &Eigh, h: &CMatrix) -> CMatrix {
    let kernel = log_divided_differences(&eig.values);
    let mut rotated = eig.to_eigenbasis(h);
    let n = kernel.nrows();
    for c in 0..n {
        for r in 0..n {
            rotated[(r, c)] *= kernel[(r, c)];
        }
    }
    eig.from_eigenbasis(&rotated)
}
