//! Sweep and report plumbing behind the `cliffqkd` binary.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use cliffqkd::attack::{enumerate_attacks_at, AttackRecord};
use cliffqkd::protocol::{CliffSumMode, ConstraintMode, EveMode, ScenarioConfig};
use cliffqkd::solver::{solve_scenario, SolverOptions};
use rayon::prelude::*;
use serde::Serialize;

pub const CSV_HEADER: [&str; 15] = [
    "param",
    "b",
    "p",
    "eps",
    "constraints",
    "eve",
    "cliff_sum",
    "keyrate",
    "r",
    "leak",
    "p_pass",
    "cert_lb",
    "gap",
    "converged",
    "wall_time_ms",
];

pub const ENUMERATE_HEADER: [&str; 6] = ["perm", "signs", "valid", "q", "k_clifford", "k_worst"];

/// Rounds to 9 significant digits; the shortest round-trip form of the
/// result is what gets printed.
pub fn sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

fn fmt_num(x: Option<f64>) -> String {
    x.map(|v| sig9(v).to_string()).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Eps,
    B,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Eps => "eps",
            SweepParam::B => "b",
        }
    }
}

/// Grid of scenarios along one parameter, endpoints included.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub base: ScenarioConfig,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.from.partial_cmp(&self.to) != Some(std::cmp::Ordering::Less) {
            return Err(format!("--from {} must be below --to {}", self.from, self.to));
        }
        if self.steps < 2 {
            return Err(format!("--steps must be at least 2, got {}", self.steps));
        }
        for x in [self.from, self.to] {
            self.at(x).validate().map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..self.steps)
            .map(|i| if i == n { self.to } else { self.from + (self.to - self.from) * i as f64 / n as f64 })
            .collect()
    }

    pub fn at(&self, x: f64) -> ScenarioConfig {
        match self.param {
            SweepParam::Eps => ScenarioConfig { eps: x, ..self.base },
            SweepParam::B => ScenarioConfig { b: x, ..self.base },
        }
    }
}

/// One solver curve: an eavesdropper model with its constraint granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Curve {
    pub eve: EveMode,
    pub constraints: ConstraintMode,
    /// Ignored by the unrestricted model.
    pub cliff_sum: CliffSumMode,
}

/// Cartesian product of the requested modes, unrestricted curves first and
/// without duplicates over `cliff_sum`.
pub fn curves(eves: &[EveMode], constraints: &[ConstraintMode], sums: &[CliffSumMode]) -> Vec<Curve> {
    let mut out = Vec::new();
    for &eve in eves {
        for &c in constraints {
            match eve {
                EveMode::Unrestricted => {
                    out.push(Curve { eve, constraints: c, cliff_sum: CliffSumMode::Eq3 });
                }
                EveMode::CliffordMix => {
                    for &s in sums {
                        out.push(Curve { eve, constraints: c, cliff_sum: s });
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    /// Name of the swept parameter, `none` for single solves.
    pub param: String,
    pub b: f64,
    pub p: f64,
    pub eps: f64,
    pub constraints: String,
    pub eve: String,
    pub cliff_sum: String,
    pub keyrate: Option<f64>,
    pub r: Option<f64>,
    pub leak: Option<f64>,
    pub p_pass: f64,
    pub cert_lb: Option<f64>,
    pub gap: Option<f64>,
    pub converged: bool,
    pub wall_time_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ResultRow {
    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.param.clone(),
            fmt_num(Some(self.b)),
            fmt_num(Some(self.p)),
            fmt_num(Some(self.eps)),
            self.constraints.clone(),
            self.eve.clone(),
            self.cliff_sum.clone(),
            fmt_num(self.keyrate),
            fmt_num(self.r),
            fmt_num(self.leak),
            fmt_num(Some(self.p_pass)),
            fmt_num(self.cert_lb),
            fmt_num(self.gap),
            self.converged.to_string(),
            format!("{:.3}", self.wall_time_ms),
        ]
    }

    /// Copy with every float rounded to 9 significant digits.
    pub fn rounded(&self) -> Self {
        let r = |x: Option<f64>| x.map(sig9);
        Self {
            b: sig9(self.b),
            p: sig9(self.p),
            eps: sig9(self.eps),
            keyrate: r(self.keyrate),
            r: r(self.r),
            leak: r(self.leak),
            p_pass: sig9(self.p_pass),
            cert_lb: r(self.cert_lb),
            gap: r(self.gap),
            wall_time_ms: (self.wall_time_ms * 1e3).round() / 1e3,
            ..self.clone()
        }
    }
}

/// Solves one scenario. Solver failures become a row with
/// `converged = false` and an `error` message.
pub fn run_solve(param: &str, config: &ScenarioConfig, opts: &SolverOptions) -> ResultRow {
    let start = Instant::now();
    let outcome = solve_scenario(config, opts);
    let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let cliff_sum = match config.eve {
        EveMode::Unrestricted => "none".to_string(),
        EveMode::CliffordMix => config.cliff_sum.to_string(),
    };
    let mut row = ResultRow {
        param: param.to_string(),
        b: config.b,
        p: config.p,
        eps: config.eps,
        constraints: config.constraints.to_string(),
        eve: config.eve.to_string(),
        cliff_sum,
        keyrate: None,
        r: None,
        leak: None,
        p_pass: config.p_pass(),
        cert_lb: None,
        gap: None,
        converged: false,
        wall_time_ms,
        error: None,
    };
    match outcome {
        Ok(sol) => {
            let res = sol.result;
            row.keyrate = Some(res.keyrate);
            row.r = Some(res.r);
            row.leak = Some(res.leak);
            row.cert_lb = Some(res.certificate_lb);
            row.gap = Some(res.gap);
            row.converged = res.converged;
            if !res.converged {
                row.error = Some(format!("barrier path did not converge after {} iterations", res.iterations));
            }
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Every grid point times every curve, solved in parallel and returned in
/// grid order (point-major, then curve order).
pub fn run_sweep(spec: &SweepSpec, curves: &[Curve], opts: &SolverOptions) -> Vec<ResultRow> {
    let jobs: Vec<ScenarioConfig> = spec
        .points()
        .into_iter()
        .flat_map(|x| {
            curves.iter().map(move |c| ScenarioConfig {
                eve: c.eve,
                constraints: c.constraints,
                cliff_sum: c.cliff_sum,
                ..spec.at(x)
            })
        })
        .collect();
    jobs.par_iter().map(|cfg| run_solve(spec.param.name(), cfg, opts)).collect()
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.csv_record())?;
    }
    w.flush()?;
    Ok(())
}

/// Whitespace-separated gnuplot table: `param k_unrestricted_coarse
/// k_unrestricted_fine k_restricted [k_restricted_le3]`, one line per grid
/// point, `NaN` where a curve was not run or failed.
pub fn companion(spec: &SweepSpec, rows: &[ResultRow]) -> String {
    let with_le3 = rows.iter().any(|r| r.cliff_sum == "le3" && r.constraints == "coarse");
    let mut out = String::from("# param k_unrestricted_coarse k_unrestricted_fine k_restricted");
    if with_le3 {
        out.push_str(" k_restricted_le3");
    }
    out.push('\n');
    let pick = |x: f64, eve: &str, constraints: &str, sum: &str| -> String {
        rows.iter()
            .find(|r| {
                let v = match spec.param {
                    SweepParam::Eps => r.eps,
                    SweepParam::B => r.b,
                };
                v == x && r.eve == eve && r.constraints == constraints && r.cliff_sum == sum
            })
            .and_then(|r| r.keyrate.filter(|_| r.converged))
            .map(|k| sig9(k).to_string())
            .unwrap_or_else(|| "NaN".to_string())
    };
    for x in spec.points() {
        let _ = write!(
            out,
            "{} {} {} {}",
            sig9(x),
            pick(x, "unrestricted", "coarse", "none"),
            pick(x, "unrestricted", "fine", "none"),
            pick(x, "clifford-mix", "coarse", "eq3"),
        );
        if with_le3 {
            let _ = write!(out, " {}", pick(x, "clifford-mix", "coarse", "le3"));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackRow {
    pub perm: String,
    pub signs: String,
    pub valid: bool,
    pub q: Option<f64>,
    pub k_clifford: Option<f64>,
    pub k_worst: Option<f64>,
}

impl From<&AttackRecord> for AttackRow {
    fn from(r: &AttackRecord) -> Self {
        Self {
            perm: r.sp.perm_label(),
            signs: r.sp.sign_label(),
            valid: r.valid,
            q: r.q.map(sig9),
            k_clifford: r.clifford_keyrate.map(sig9),
            k_worst: r.worst_case_keyrate.map(sig9),
        }
    }
}

pub fn run_enumerate(p: f64) -> cliffqkd::Result<Vec<AttackRow>> {
    Ok(enumerate_attacks_at(p)?.iter().map(AttackRow::from).collect())
}

pub fn write_attack_csv<W: Write>(rows: &[AttackRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ENUMERATE_HEADER)?;
    for r in rows {
        w.write_record([
            r.perm.clone(),
            r.signs.clone(),
            r.valid.to_string(),
            fmt_num(r.q),
            fmt_num(r.k_clifford),
            fmt_num(r.k_worst),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.2136030431234).to_string(), "0.213603043");
        assert_eq!(sig9(1.0).to_string(), "1");
        assert_eq!(sig9(-1.234567891234e-7).to_string(), "-0.000000123456789");
        assert_eq!(sig9(0.0), 0.0);
    }

    #[test]
    fn grid_includes_endpoints() {
        let spec = SweepSpec { param: SweepParam::Eps, from: 0.0, to: 0.25, steps: 6, base: ScenarioConfig::default() };
        let pts = spec.points();
        assert_eq!(pts.len(), 6);
        assert_eq!((pts[0], pts[5]), (0.0, 0.25));
        for (i, x) in pts.iter().enumerate() {
            assert!((x - 0.05 * i as f64).abs() < 1e-15);
        }
        assert!(spec.validate().is_ok());
        assert!(SweepSpec { steps: 1, ..spec.clone() }.validate().is_err());
        assert!(SweepSpec { from: 0.3, ..spec.clone() }.validate().is_err());
        assert!(SweepSpec { to: 1.5, ..spec }.validate().is_err());
    }

    #[test]
    fn curve_expansion() {
        let all = curves(
            &[EveMode::Unrestricted, EveMode::CliffordMix],
            &[ConstraintMode::Coarse, ConstraintMode::Fine],
            &[CliffSumMode::Eq3, CliffSumMode::Le3],
        );
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], Curve { eve: EveMode::Unrestricted, constraints: ConstraintMode::Coarse, cliff_sum: CliffSumMode::Eq3 });
        assert_eq!(all[3].cliff_sum, CliffSumMode::Le3);
    }

    #[test]
    fn failed_rows_leave_numbers_empty() {
        let cfg = ScenarioConfig { b: 0.0, eve: EveMode::CliffordMix, ..Default::default() };
        let row = run_solve("none", &cfg, &SolverOptions::default());
        assert!(!row.converged);
        assert!(row.error.is_some());
        let rec = row.csv_record();
        assert_eq!(rec.len(), CSV_HEADER.len());
        assert_eq!(rec[7], "");
        assert_eq!(rec[13], "false");
    }
}
