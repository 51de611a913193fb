//! Shannon and von Neumann entropies, relative entropy and pinching maps.
//!
//! Reported values are in bits. The `*_nats` variants feed the solver.

use std::f64::consts::LN_2;

use crate::error::{arg, Error, Result};
use crate::linalg::{self, CMatrix, CVector, Eigh, EIG_ZERO};
use crate::state::DensityMatrix;

/// Mass of `ρ` outside `supp(σ)` above which `D(ρ||σ)` is infinite.
const SUPPORT_TOL: f64 = 1e-12;

pub fn binary_entropy(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return arg(format!("probability {q} outside [0, 1]"));
    }
    Ok(xlog2x_neg(q) + xlog2x_neg(1.0 - q))
}

fn xlog2x_neg(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Joint distribution of Alice's key character `x ∈ {0,1}` and Bob's
/// outcome `y ∈ {0, 1, +, −}` (columns in that order).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointDistribution {
    p: [[f64; 4]; 2],
}

impl JointDistribution {
    pub fn new(p: [[f64; 4]; 2]) -> Result<Self> {
        let total: f64 = p.iter().flatten().sum();
        if p.iter().flatten().any(|&v| v < -1e-12 || !v.is_finite()) {
            return arg("joint distribution has a negative entry");
        }
        if (total - 1.0).abs() > 1e-12 {
            return arg(format!("joint distribution sums to {total}"));
        }
        Ok(Self { p: p.map(|row| row.map(|v| v.max(0.0))) })
    }

    pub fn table(&self) -> &[[f64; 4]; 2] {
        &self.p
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.p[x][y]
    }
}

pub fn cond_shannon(dist: &JointDistribution) -> f64 {
    let mut h = 0.0;
    for y in 0..4 {
        let py = dist.p[0][y] + dist.p[1][y];
        if py <= 0.0 {
            continue;
        }
        for x in 0..2 {
            let pxy = dist.p[x][y];
            if pxy > 0.0 {
                h -= pxy * (pxy / py).log2();
            }
        }
    }
    h.max(0.0)
}

/// `−Tr[M ln M]` of a positive semidefinite (not necessarily normalized)
/// matrix.
pub(crate) fn entropy_nats(m: &CMatrix) -> f64 {
    Eigh::new(m)
        .values
        .iter()
        .filter(|&&l| l > EIG_ZERO)
        .map(|&l| -l * l.ln())
        .sum()
}

pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    entropy_nats(rho.matrix()) / LN_2
}

/// `Tr[A(ln A − ln B)]` for positive semidefinite `A`, `B`, or `+∞` when
/// `supp A ⊄ supp B`.
pub(crate) fn relative_entropy_nats(a: &CMatrix, b: &CMatrix) -> f64 {
    let ea = Eigh::new(a);
    let eb = Eigh::new(b);
    let overlaps = ea.vectors.adjoint() * &eb.vectors;
    let mut d = 0.0;
    for (i, &la) in ea.values.iter().enumerate() {
        if la <= EIG_ZERO {
            continue;
        }
        d += la * la.ln();
        for (j, &lb) in eb.values.iter().enumerate() {
            let w = la * overlaps[(i, j)].norm_sqr();
            if lb <= EIG_ZERO {
                if w > SUPPORT_TOL {
                    return f64::INFINITY;
                }
            } else {
                d -= w * lb.ln();
            }
        }
    }
    d
}

/// `D(ρ||σ)` in bits; `+∞` on support violation.
pub fn rel_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return arg(format!("dimension mismatch {} vs {}", rho.dim(), sigma.dim()));
    }
    Ok(relative_entropy_nats(rho.matrix(), sigma.matrix()) / LN_2)
}

/// A complete set of mutually orthogonal projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PinchingSpec {
    projectors: Vec<CMatrix>,
}

impl PinchingSpec {
    pub fn new(projectors: Vec<CMatrix>) -> Result<Self> {
        let first = projectors
            .first()
            .ok_or_else(|| Error::Argument("pinching needs at least one projector".into()))?;
        let dim = first.nrows();
        let tol = 1e-12;
        let mut sum = linalg::zeros(dim);
        for (i, p) in projectors.iter().enumerate() {
            if p.shape() != (dim, dim) || !linalg::is_hermitian(p, tol) {
                return arg(format!("projector {i} is not a Hermitian {dim}x{dim} matrix"));
            }
            if linalg::max_abs_diff(&(p * p), p) > 1e-10 {
                return arg(format!("operator {i} is not idempotent"));
            }
            for (j, q) in projectors.iter().enumerate().skip(i + 1) {
                if (p * q).iter().any(|z| z.norm() > 1e-10) {
                    return arg(format!("projectors {i} and {j} overlap"));
                }
            }
            sum += p;
        }
        if linalg::max_abs_diff(&sum, &linalg::identity(dim)) > tol {
            return arg("projectors do not sum to the identity");
        }
        Ok(Self { projectors })
    }

    /// Projectors `I_left ⊗ |v⟩⟨v| ⊗ I_right` for an orthonormal basis `{v}`
    /// of the middle factor.
    pub fn on_factor(basis: &[CVector], left: usize, right: usize) -> Result<Self> {
        let il = linalg::identity(left);
        let ir = linalg::identity(right);
        Self::new(
            basis
                .iter()
                .map(|v| linalg::kron_all([&il, &linalg::projector(v), &ir]))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    /// `Σ Π_i M Π_i` on an arbitrary square matrix.
    pub fn apply(&self, m: &CMatrix) -> CMatrix {
        self.projectors
            .iter()
            .fold(linalg::zeros(self.dim()), |acc, p| acc + p * m * p)
    }
}

pub fn pinch(rho: &DensityMatrix, spec: &PinchingSpec) -> Result<DensityMatrix> {
    if rho.dim() != spec.dim() {
        return arg(format!("state dim {} vs pinching dim {}", rho.dim(), spec.dim()));
    }
    Ok(DensityMatrix::from_trusted(spec.apply(rho.matrix())))
}
