//! The entanglement-based BB84 protocol: source state, sifted statistics,
//! error-correction leakage and the reduced relative-entropy objective.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::channels::{depolarize, Basis};
use crate::entropy::{self, cond_shannon, JointDistribution, PinchingSpec};
use crate::error::{arg, Error, Result};
use crate::linalg::{self, dlog, CMatrix, CVector, Eigh, EIG_ZERO};
use crate::pauli::{letter_pair, Letter};
use crate::solver::ConstraintSet;
use crate::state::{DensityMatrix, StateVector};

/// Which channel statistics Alice and Bob reconcile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintMode {
    /// Basis-wise error rates only.
    Coarse,
    /// All sixteen joint outcome probabilities.
    Fine,
}

/// The eavesdropper model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EveMode {
    Unrestricted,
    /// Eve applies a classical mixture of Clifford conjugations to Bob's qubit.
    CliffordMix,
}

/// Normalization of the Clifford-mixture coefficients of each source letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CliffSumMode {
    /// Each source letter is mapped somewhere with total weight one.
    Eq3,
    /// Each source letter has total weight at most one.
    Le3,
}

macro_rules! string_enum {
    ($ty:ident { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self {
                    $($ty::$variant => $name),+
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($ty::$variant),)+
                    other => arg(format!("unknown {} value {other:?}", stringify!($ty))),
                }
            }
        }
    };
}

string_enum!(ConstraintMode { Coarse => "coarse", Fine => "fine" });
string_enum!(EveMode { Unrestricted => "unrestricted", CliffordMix => "clifford-mix" });
string_enum!(CliffSumMode { Eq3 => "eq3", Le3 => "le3" });

/// One asymmetric-BB84 scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Weight of `|00⟩` in the source state.
    pub b: f64,
    /// Probability of choosing the Z basis.
    pub p: f64,
    /// Depolarizing probability of the simulated channel.
    pub eps: f64,
    pub constraints: ConstraintMode,
    pub eve: EveMode,
    pub cliff_sum: CliffSumMode,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            b: 0.5,
            p: 0.5,
            eps: 0.0,
            constraints: ConstraintMode::Fine,
            eve: EveMode::Unrestricted,
            cliff_sum: CliffSumMode::Eq3,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.b) {
            return arg(format!("b = {} outside [0, 1]", self.b));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return arg(format!("p = {} outside (0, 1)", self.p));
        }
        if !(0.0..=1.0).contains(&self.eps) {
            return arg(format!("eps = {} outside [0, 1]", self.eps));
        }
        Ok(())
    }

    pub fn p_pass(&self) -> f64 {
        p_pass(self.p)
    }
}

/// Sifting probability `p² + (1−p)²`.
pub fn p_pass(p: f64) -> f64 {
    p * p + (1.0 - p) * (1.0 - p)
}

/// Objective, leakage and solver diagnostics for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyRateResult {
    /// Objective value in bits.
    pub r: f64,
    /// Error-correction leakage `H(X|Y)` in bits.
    pub leak: f64,
    pub p_pass: f64,
    /// `max(0, keyrate_raw)`.
    pub keyrate: f64,
    /// `r − p_pass·leak`.
    pub keyrate_raw: f64,
    /// Certified lower bound on the optimal objective, in bits.
    pub certificate_lb: f64,
    /// `r − certificate_lb`.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Barrier weight of the last stage (0 when no solve was performed).
    pub mu_final: f64,
    /// Barrier parameter: 4 for the log-det term plus one per scalar slack.
    pub nu: f64,
    /// Size of the interior-point perturbation of the constraint targets.
    pub perturbation: f64,
}

impl KeyRateResult {
    pub(crate) fn assemble(r: f64, leak: f64, p_pass: f64, certificate_lb: f64) -> Self {
        let keyrate_raw = r - p_pass * leak;
        Self {
            r,
            leak,
            p_pass,
            keyrate: keyrate_raw.max(0.0),
            keyrate_raw,
            certificate_lb,
            gap: r - certificate_lb,
            iterations: 0,
            converged: true,
            mu_final: 0.0,
            nu: 0.0,
            perturbation: 0.0,
        }
    }

    /// Key rate implied by the certified objective bound.
    pub fn certified_keyrate(&self) -> f64 {
        (self.certificate_lb - self.p_pass * self.leak).max(0.0)
    }
}

/// `√b|00⟩ + √(1−b)|11⟩`.
pub fn initial_state(b: f64) -> Result<StateVector> {
    if !(0.0..=1.0).contains(&b) {
        return arg(format!("b = {b} outside [0, 1]"));
    }
    let mut v = CVector::zeros(4);
    v[0] = linalg::c64(b.sqrt(), 0.0);
    v[3] = linalg::c64((1.0 - b).sqrt(), 0.0);
    StateVector::new(v)
}

/// Bob's outcome projectors in column order `0, 1, +, −`.
pub fn outcome_projectors() -> [CMatrix; 4] {
    [
        Basis::Z.projector(0),
        Basis::Z.projector(1),
        Basis::X.projector(0),
        Basis::X.projector(1),
    ]
}

const OUTCOME_NAMES: [&str; 4] = ["0", "1", "+", "-"];

/// Sifted joint distribution of Alice's key character and Bob's outcome.
/// Alice's `|0⟩, |+⟩` map to key character 0 and `|1⟩, |−⟩` to 1.
pub fn statistics_from_state(rho: &DensityMatrix, p: f64) -> Result<JointDistribution> {
    if rho.dim() != 4 {
        return arg(format!("expected a two-qubit state, got dim {}", rho.dim()));
    }
    if !(p > 0.0 && p < 1.0) {
        return arg(format!("p = {p} outside (0, 1)"));
    }
    let m = outcome_projectors();
    let pp = p_pass(p);
    let mut table = [[0.0; 4]; 2];
    for x in 0..2 {
        for y in 0..2 {
            table[x][y] = p * p * rho.expect(&linalg::kron(&m[x], &m[y])) / pp;
            table[x][2 + y] = (1.0 - p) * (1.0 - p) * rho.expect(&linalg::kron(&m[2 + x], &m[2 + y])) / pp;
        }
    }
    JointDistribution::new(table)
}

pub fn leak_ec(dist: &JointDistribution) -> f64 {
    cond_shannon(dist)
}

/// Labelled constraint observables on `AB`.
pub fn constraint_observables(mode: ConstraintMode) -> Vec<(String, CMatrix)> {
    match mode {
        ConstraintMode::Coarse => vec![
            ("E_Z".to_string(), Basis::Z.error_observable()),
            ("E_X".to_string(), Basis::X.error_observable()),
        ],
        ConstraintMode::Fine => {
            let m = outcome_projectors();
            let mut out = Vec::with_capacity(16);
            for i in 0..4 {
                for j in 0..4 {
                    out.push((
                        format!("E_{}{}", OUTCOME_NAMES[i], OUTCOME_NAMES[j]),
                        linalg::kron(&m[i], &m[j]),
                    ));
                }
            }
            out
        }
    }
}

/// `X⊗I, Y⊗I, Z⊗I`.
pub fn alice_marginal_observables() -> Vec<(String, CMatrix)> {
    [Letter::X, Letter::Y, Letter::Z]
        .into_iter()
        .map(|l| (format!("{}^A", l.symbol()), letter_pair(l, Letter::I)))
        .collect()
}

/// Depolarized source state of a scenario.
pub fn simulated_state(config: &ScenarioConfig) -> Result<DensityMatrix> {
    config.validate()?;
    depolarize(&initial_state(config.b)?.density(), config.eps)
}

/// Constraint targets observed on the depolarized source state. The
/// unrestricted model additionally pins Alice's marginal, which a channel on
/// Bob's side cannot change.
pub fn simulate_constraints(config: &ScenarioConfig) -> Result<ConstraintSet> {
    let rho = simulated_state(config)?;
    let alice = config.eve == EveMode::Unrestricted;
    let mut cs = ConstraintSet::new(config.constraints, alice);
    for (label, obs) in constraint_observables(config.constraints) {
        let target = rho.expect(&obs);
        cs.push(label, obs, target)?;
    }
    if alice {
        for (label, obs) in alice_marginal_observables() {
            let target = match label.as_str() {
                "Z^A" => 2.0 * config.b - 1.0,
                _ => 0.0,
            };
            cs.push(label, obs, target)?;
        }
    }
    cs.set_statistics(statistics_from_state(&rho, config.p)?);
    Ok(cs)
}

fn key_map_pinchings() -> &'static (PinchingSpec, PinchingSpec) {
    static CELL: OnceLock<(PinchingSpec, PinchingSpec)> = OnceLock::new();
    CELL.get_or_init(|| {
        let on_a = |basis: Basis| {
            PinchingSpec::on_factor(&[basis.ket(0), basis.ket(1)], 1, 2).expect("orthonormal basis")
        };
        (on_a(Basis::Z), on_a(Basis::X))
    })
}

/// The key-map pinching on Alice's qubit in the Z basis.
pub fn key_map_z() -> &'static PinchingSpec {
    &key_map_pinchings().0
}

/// The key-map pinching on Alice's qubit in the X basis.
pub fn key_map_x() -> &'static PinchingSpec {
    &key_map_pinchings().1
}

fn check_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return arg(format!("expected a two-qubit state, got dim {}", rho.dim()));
    }
    Ok(())
}

/// `p²·D(ρ||Z_Z(ρ)) + (1−p)²·D(ρ||Z_X(ρ))` in bits.
pub fn objective_reduced(rho: &DensityMatrix, p: f64) -> Result<f64> {
    check_two_qubit(rho)?;
    let m = rho.matrix();
    let dz = entropy::relative_entropy_nats(m, &key_map_z().apply(m));
    let dx = entropy::relative_entropy_nats(m, &key_map_x().apply(m));
    Ok((p * p * dz + (1.0 - p) * (1.0 - p) * dx) / LN_2)
}

/// Brute-force objective on the 64-dimensional register space
/// `Ã ⊗ B̃ ⊗ Ā ⊗ B̄ ⊗ A ⊗ B` (basis choices, outcomes, systems): applies
/// every measurement Kraus operator, post-selects matching bases and
/// returns `D(G(ρ)||Z^Ā(G(ρ)))` in bits.
pub fn objective_dilated(rho: &DensityMatrix, p: f64) -> Result<f64> {
    check_two_qubit(rho)?;
    let g = g_map(rho.matrix(), p);
    let ket = |i| linalg::basis_ket(2, i);
    let pinch = PinchingSpec::on_factor(&[ket(0), ket(1)], 4, 8)?;
    Ok(entropy::relative_entropy_nats(&g, &pinch.apply(&g)) / LN_2)
}

/// `G(ρ) = Π (Σ_{a,b} K_a^A K_b^B ρ (K_a^A K_b^B)†) Π` on 64 dimensions.
pub fn g_map(rho: &CMatrix, p: f64) -> CMatrix {
    let m = outcome_projectors();
    let weight = [p.sqrt(), (1.0 - p).sqrt()];
    let mut out = linalg::zeros(64);
    for a in 0..2 {
        for b in 0..2 {
            let mut k = CMatrix::zeros(64, 4);
            for x in 0..2 {
                for y in 0..2 {
                    let register = 8 * a + 4 * b + 2 * x + y;
                    let meas = linalg::kron(&m[2 * a + x], &m[2 * b + y]);
                    for r in 0..4 {
                        for c in 0..4 {
                            k[(4 * register + r, c)] += meas[(r, c)] * (weight[a] * weight[b]);
                        }
                    }
                }
            }
            out += &k * rho * k.adjoint();
        }
    }
    // keep only rounds where Alice and Bob chose the same basis
    let kept = |i: usize| matches!(i / 16, 0 | 3);
    CMatrix::from_fn(64, 64, |i, j| if kept(i) && kept(j) { out[(i, j)] } else { linalg::c64(0.0, 0.0) })
}

/// Gradient (natural-log units) of the reduced objective.
pub fn objective_gradient(rho: &DensityMatrix, p: f64) -> Result<CMatrix> {
    check_two_qubit(rho)?;
    let local = LocalObjective::new(rho.matrix(), p);
    if local.min_eigenvalue() <= EIG_ZERO {
        return Err(Error::Precondition("gradient requires a positive-definite state".into()));
    }
    Ok(local.gradient())
}

/// Spectral data of `ρ`, `Z_Z(ρ)` and `Z_X(ρ)` at one point, from which the
/// objective, its gradient and Hessian-vector products are evaluated.
pub(crate) struct LocalObjective {
    cz: f64,
    cx: f64,
    rho: Eigh,
    z: Eigh,
    x: Eigh,
}

fn entropy_from_spectrum(values: &[f64]) -> f64 {
    values.iter().filter(|&&l| l > EIG_ZERO).map(|&l| -l * l.ln()).sum()
}

impl LocalObjective {
    pub(crate) fn new(m: &CMatrix, p: f64) -> Self {
        Self {
            cz: p * p,
            cx: (1.0 - p) * (1.0 - p),
            rho: Eigh::new(m),
            z: Eigh::new(&key_map_z().apply(m)),
            x: Eigh::new(&key_map_x().apply(m)),
        }
    }

    pub(crate) fn min_eigenvalue(&self) -> f64 {
        self.rho.min()
    }

    pub(crate) fn log_det(&self) -> f64 {
        self.rho.values.iter().map(|v| v.ln()).sum()
    }

    /// Objective in nats via the pinching identity `D(ρ||Zρ) = S(Zρ) − S(ρ)`.
    pub(crate) fn value(&self) -> f64 {
        let s = entropy_from_spectrum(&self.rho.values);
        self.cz * (entropy_from_spectrum(&self.z.values) - s) + self.cx * (entropy_from_spectrum(&self.x.values) - s)
    }

    pub(crate) fn gradient(&self) -> CMatrix {
        let ln = |e: &Eigh| e.map(f64::ln);
        ln(&self.rho).scale(self.cz + self.cx) - ln(&self.z).scale(self.cz) - ln(&self.x).scale(self.cx)
    }

    /// Hessian applied to a Hermitian direction.
    pub(crate) fn hessian(&self, h: &CMatrix) -> CMatrix {
        let z = key_map_z();
        let x = key_map_x();
        dlog(&self.rho, h).scale(self.cz + self.cx)
            - z.apply(&dlog(&self.z, &z.apply(h))).scale(self.cz)
            - x.apply(&dlog(&self.x, &x.apply(h))).scale(self.cx)
    }

    /// `ρ^{-1}`.
    pub(crate) fn inverse(&self) -> CMatrix {
        self.rho.map(|v| 1.0 / v)
    }
}

/// Key rate of a fixed state: objective, leakage of its own statistics, and
/// no optimization.
pub fn keyrate_eval(rho: &DensityMatrix, config: &ScenarioConfig) -> Result<KeyRateResult> {
    config.validate()?;
    let r = objective_reduced(rho, config.p)?;
    let leak = leak_ec(&statistics_from_state(rho, config.p)?);
    Ok(KeyRateResult::assemble(r, leak, config.p_pass(), r))
}
