use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cliffqkd::protocol::{CliffSumMode, ConstraintMode, EveMode, ScenarioConfig};
use cliffqkd::solver::SolverOptions;
use cliffqkd_cli::{
    companion, curves, run_enumerate, run_solve, run_sweep, write_attack_csv, write_csv, SweepParam, SweepSpec,
};

const USAGE_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "cliffqkd", version, about = "BB84 key-rate bounds against unrestricted and Clifford-restricted eavesdroppers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario (JSON by default).
    Solve(SolveArgs),
    /// Sweep eps or b and emit one CSV row per grid point and curve.
    Sweep(SweepArgs),
    /// Tabulate the 48 signed-permutation attacks.
    Enumerate(EnumerateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstraintsArg {
    Coarse,
    Fine,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum EveArg {
    Unrestricted,
    CliffordMix,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliffSumArg {
    Eq3,
    Le3,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParamArg {
    Eps,
    B,
}

#[derive(Args)]
struct Common {
    /// Source asymmetry: |ψ⟩ = √b|00⟩ + √(1−b)|11⟩.
    #[arg(long, default_value_t = 0.5)]
    b: f64,
    /// Probability of the Z basis.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Depolarizing probability of the simulated channel.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, value_enum)]
    constraints: Option<ConstraintsArg>,
    #[arg(long, value_enum)]
    eve: Option<EveArg>,
    #[arg(long = "cliff-sum", value_enum)]
    cliff_sum: Option<CliffSumArg>,
    /// Barrier weight of the last stage.
    #[arg(long = "mu-final", default_value_t = 1e-8)]
    mu_final: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    param: ParamArg,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long, default_value_t = 11)]
    steps: usize,
    /// Also write a gnuplot-ready table of the curves to this path.
    #[arg(long)]
    companion: Option<PathBuf>,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn constraint_modes(arg: ConstraintsArg) -> Vec<ConstraintMode> {
    match arg {
        ConstraintsArg::Coarse => vec![ConstraintMode::Coarse],
        ConstraintsArg::Fine => vec![ConstraintMode::Fine],
        ConstraintsArg::Both => vec![ConstraintMode::Coarse, ConstraintMode::Fine],
    }
}

fn eve_modes(arg: EveArg) -> Vec<EveMode> {
    match arg {
        EveArg::Unrestricted => vec![EveMode::Unrestricted],
        EveArg::CliffordMix => vec![EveMode::CliffordMix],
        EveArg::Both => vec![EveMode::Unrestricted, EveMode::CliffordMix],
    }
}

fn sum_modes(arg: CliffSumArg) -> Vec<CliffSumMode> {
    match arg {
        CliffSumArg::Eq3 => vec![CliffSumMode::Eq3],
        CliffSumArg::Le3 => vec![CliffSumMode::Le3],
        CliffSumArg::Both => vec![CliffSumMode::Eq3, CliffSumMode::Le3],
    }
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(USAGE_ERROR)
}

fn options(common: &Common) -> Result<SolverOptions, String> {
    let opts = SolverOptions { seed: common.seed, ..SolverOptions::default() }.with_mu_final(common.mu_final);
    opts.validate().map_err(|e| e.to_string())?;
    Ok(opts)
}

fn sink(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit<F>(path: &Option<PathBuf>, write: F) -> ExitCode
where
    F: FnOnce(&mut dyn Write) -> Result<(), Box<dyn std::error::Error>>,
{
    let result = (|| -> Result<(), Box<dyn std::error::Error>> {
        let mut w = sink(path)?;
        write(&mut *w)?;
        w.flush()?;
        Ok(())
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: writing output: {e}");
            ExitCode::FAILURE
        }
    }
}

fn solve(args: SolveArgs) -> ExitCode {
    let c = &args.common;
    let constraints = match c.constraints.unwrap_or(ConstraintsArg::Fine) {
        ConstraintsArg::Coarse => ConstraintMode::Coarse,
        ConstraintsArg::Fine => ConstraintMode::Fine,
        ConstraintsArg::Both => return usage("solve takes a single --constraints mode"),
    };
    let eve = match c.eve.unwrap_or(EveArg::Unrestricted) {
        EveArg::Unrestricted => EveMode::Unrestricted,
        EveArg::CliffordMix => EveMode::CliffordMix,
        EveArg::Both => return usage("solve takes a single --eve mode"),
    };
    let cliff_sum = match c.cliff_sum.unwrap_or(CliffSumArg::Eq3) {
        CliffSumArg::Eq3 => CliffSumMode::Eq3,
        CliffSumArg::Le3 => CliffSumMode::Le3,
        CliffSumArg::Both => return usage("solve takes a single --cliff-sum mode"),
    };
    let config = ScenarioConfig { b: c.b, p: c.p, eps: c.eps, constraints, eve, cliff_sum };
    if let Err(e) = config.validate() {
        return usage(e);
    }
    let opts = match options(c) {
        Ok(o) => o,
        Err(e) => return usage(e),
    };
    let row = run_solve("none", &config, &opts).rounded();
    if let Some(err) = &row.error {
        eprintln!("solve failed: {err}");
    }
    let code = emit(&c.out, |w| {
        match c.format.unwrap_or(Format::Json) {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, &row)?;
                writeln!(w)?;
            }
            Format::Csv => write_csv(std::slice::from_ref(&row), w)?,
        }
        Ok(())
    });
    if code != ExitCode::SUCCESS || !row.converged {
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}

fn sweep(args: SweepArgs) -> ExitCode {
    let c = &args.common;
    let base = ScenarioConfig { b: c.b, p: c.p, eps: c.eps, ..ScenarioConfig::default() };
    let param = match args.param {
        ParamArg::Eps => SweepParam::Eps,
        ParamArg::B => SweepParam::B,
    };
    let spec = SweepSpec { param, from: args.from, to: args.to, steps: args.steps, base };
    if let Err(e) = spec.validate() {
        return usage(e);
    }
    let opts = match options(c) {
        Ok(o) => o,
        Err(e) => return usage(e),
    };
    let curves = curves(
        &eve_modes(c.eve.unwrap_or(EveArg::Both)),
        &constraint_modes(c.constraints.unwrap_or(ConstraintsArg::Both)),
        &sum_modes(c.cliff_sum.unwrap_or(CliffSumArg::Eq3)),
    );
    let rows: Vec<_> = run_sweep(&spec, &curves, &opts).iter().map(|r| r.rounded()).collect();
    for row in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "{}={} {} {} {}: {}",
            row.param,
            if param == SweepParam::Eps { row.eps } else { row.b },
            row.eve,
            row.constraints,
            row.cliff_sum,
            row.error.as_deref().unwrap_or_default()
        );
    }
    let mut code = emit(&c.out, |w| {
        match c.format.unwrap_or(Format::Csv) {
            Format::Csv => write_csv(&rows, w)?,
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, &rows)?;
                writeln!(w)?;
            }
        }
        Ok(())
    });
    if let Some(path) = &args.companion {
        if let Err(e) = std::fs::write(path, companion(&spec, &rows)) {
            eprintln!("error: writing {}: {e}", path.display());
            code = ExitCode::FAILURE;
        }
    }
    if !rows.iter().any(|r| r.converged) {
        eprintln!("no sweep row succeeded");
        return ExitCode::FAILURE;
    }
    code
}

fn enumerate(args: EnumerateArgs) -> ExitCode {
    let rows = match run_enumerate(args.p) {
        Ok(rows) => rows,
        Err(e) => return usage(e),
    };
    emit(&args.out, |w| {
        match args.format {
            Format::Csv => write_attack_csv(&rows, w)?,
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, &rows)?;
                writeln!(w)?;
            }
        }
        Ok(())
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve(args) => solve(args),
        Command::Sweep(args) => sweep(args),
        Command::Enumerate(args) => enumerate(args),
    }
}
