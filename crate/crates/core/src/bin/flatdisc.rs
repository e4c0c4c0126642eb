use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use flatdisc::experiment::{
    record_path, run_single_with, run_sweep, write_atomic, InitKind, RegimeKind, SweepConfig,
    SweepMode,
};
use flatdisc::field::{gp_energy, read_field, write_field, EnergyForm};
use flatdisc::symmetry::{default_n_max, radial_minimize, symmetric_branch_energy};
use flatdisc::tf::{giant_vortex_energy, tf_solve};
use flatdisc::{BoundaryCondition, Error, Result, TfRegimeParams};

#[derive(Parser)]
#[command(
    name = "flatdisc",
    version,
    about = "Rotating condensates in a flat disc trap"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Thomas-Fermi energy, radii and optionally the density profile.
    Tf(TfArgs),
    /// Operations on stored fields.
    #[command(subcommand)]
    Field(FieldCommand),
    /// Energy of a lattice or giant-vortex trial state.
    TrialEnergy(TrialArgs),
    /// Minimize the GP energy on the unit sphere.
    Minimize(MinimizeArgs),
    /// Symmetric vortex energies E_n and the best symmetric state.
    Symmetry(SymmetryArgs),
    /// Run a parameter sweep described by a TOML file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Regime {
    Fixed,
    Fast,
}

#[derive(Args)]
struct TfArgs {
    #[arg(long, value_enum)]
    regime: Regime,
    /// Ω₀ (fixed) or Ω₁ (fast).
    #[arg(long)]
    omega: f64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    emit_density: Option<PathBuf>,
    #[arg(long, default_value_t = 201)]
    samples: usize,
}

#[derive(Subcommand)]
enum FieldCommand {
    /// Energy of a stored field.
    Energy {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        omega: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value = "both")]
        form: FormArg,
    },
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FormArg {
    Angular,
    Magnetic,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Lattice,
    Giant,
}

#[derive(Args)]
struct TrialArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    eps: f64,
    /// Ω₀ for the lattice, Ω₁ for the giant vortex.
    #[arg(long)]
    omega: f64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 128)]
    nr: usize,
    #[arg(long, default_value_t = 256)]
    ntheta: usize,
    #[arg(long, default_value = "neumann")]
    bc: BoundaryCondition,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    save_field: Option<PathBuf>,
}

#[derive(Args)]
struct MinimizeArgs {
    #[arg(long)]
    eps: f64,
    /// Angular velocity Ω.
    #[arg(long)]
    omega: f64,
    #[arg(long, default_value = "neumann")]
    bc: BoundaryCondition,
    /// trial, random or file:<path>
    #[arg(long, default_value = "trial")]
    init: String,
    #[arg(long, default_value_t = 128)]
    nr: usize,
    #[arg(long, default_value_t = 256)]
    ntheta: usize,
    #[arg(long, default_value_t = 2000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    save_field: Option<PathBuf>,
}

#[derive(Args)]
struct SymmetryArgs {
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    omega: f64,
    /// Largest n scanned; ⌈2Ω⌉ when absent.
    #[arg(long)]
    nmax: Option<u32>,
    #[arg(long, default_value_t = 256)]
    nr: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Writes to stdout; a reader that closed the pipe early is not an error.
fn print_out(text: &str) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
    {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => print_out(&format!("{text}\n")),
    }
}

fn tf_params(args: &TfArgs) -> Result<TfRegimeParams> {
    let p = match args.regime {
        Regime::Fixed => TfRegimeParams::Fixed { omega0: args.omega },
        Regime::Fast => TfRegimeParams::Fast {
            omega1: args.omega,
            alpha: args.alpha.ok_or_else(|| {
                Error::InvalidParameter("--alpha is required for the fast regime".into())
            })?,
            eps: args.eps.ok_or_else(|| {
                Error::InvalidParameter("--eps is required for the fast regime".into())
            })?,
        },
    };
    p.validate()?;
    Ok(p)
}

#[derive(Serialize)]
struct TfReport {
    #[serde(flatten)]
    solution: flatdisc::TfSolution,
    giant_vortex_energy: Option<f64>,
}

fn cmd_tf(args: TfArgs) -> Result<()> {
    let params = tf_params(&args)?;
    let solution = tf_solve(params)?;
    if let Some(path) = &args.emit_density {
        if args.samples < 2 {
            return Err(Error::InvalidParameter(
                "--samples must be at least 2".into(),
            ));
        }
        let mut csv = String::from("r,density\n");
        for i in 0..args.samples {
            let r = i as f64 / (args.samples - 1) as f64;
            writeln!(csv, "{r:e},{:e}", solution.density(r)).expect("string write");
        }
        write_atomic(path, csv.as_bytes())?;
    }
    let giant = match params {
        TfRegimeParams::Fast { omega1, alpha, eps } => {
            Some(giant_vortex_energy(omega1, alpha, eps)?.energy)
        }
        _ => None,
    };
    emit(
        &TfReport {
            solution,
            giant_vortex_energy: giant,
        },
        None,
    )
}

#[derive(Serialize)]
struct FieldEnergyReport {
    angular_momentum_form: Option<flatdisc::EnergyBreakdown>,
    magnetic_form: Option<flatdisc::EnergyBreakdown>,
    relative_agreement: Option<f64>,
}

fn cmd_field(cmd: FieldCommand) -> Result<()> {
    let FieldCommand::Energy {
        input,
        omega,
        eps,
        form,
    } = cmd;
    let field = read_field(&input)?;
    let a = (form != FormArg::Magnetic)
        .then(|| gp_energy(&field, omega, eps, EnergyForm::AngularMomentum))
        .transpose()?;
    let m = (form != FormArg::Angular)
        .then(|| gp_energy(&field, omega, eps, EnergyForm::Magnetic))
        .transpose()?;
    let agreement = match (&a, &m) {
        (Some(a), Some(m)) => Some((a.total - m.total).abs() / a.total.abs().max(1.0)),
        _ => None,
    };
    emit(
        &FieldEnergyReport {
            angular_momentum_form: a,
            magnetic_form: m,
            relative_agreement: agreement,
        },
        None,
    )
}

fn single_config(
    regime: RegimeKind,
    omega: f64,
    eps: f64,
    nr: usize,
    ntheta: usize,
    bc: BoundaryCondition,
    mode: SweepMode,
) -> SweepConfig {
    SweepConfig {
        regime,
        omega,
        alpha: None,
        eps_list: vec![eps],
        nr,
        ntheta,
        bc,
        mode,
        out_dir: PathBuf::from("."),
        seed: 0,
        init: InitKind::Trial,
        max_iters: None,
        tol: None,
        delta: None,
        eta: None,
        beta: None,
        allow_small_eps: true,
    }
}

fn finish(
    cfg: &SweepConfig,
    init: Option<flatdisc::WaveField>,
    out: Option<&Path>,
    save: Option<&Path>,
) -> Result<bool> {
    for w in cfg.validate()? {
        eprintln!("warning: {w}");
    }
    let (rec, field) = run_single_with(cfg, 0, init);
    emit(&rec, out)?;
    if let (Some(path), Some(f)) = (save, &field) {
        write_field(f, path)?;
    }
    if let Some(e) = &rec.error {
        eprintln!("error: {e}");
    }
    Ok(rec.error.is_none())
}

fn cmd_trial(args: TrialArgs) -> Result<bool> {
    let (regime, alpha) = match args.family {
        Family::Lattice => (RegimeKind::Fixed, None),
        Family::Giant => (RegimeKind::Fast, Some(args.alpha.unwrap_or(1.0))),
    };
    let mut cfg = single_config(
        regime,
        args.omega,
        args.eps,
        args.nr,
        args.ntheta,
        args.bc,
        SweepMode::TrialOnly,
    );
    cfg.alpha = alpha;
    cfg.beta = args.beta;
    cfg.delta = args.delta;
    cfg.eta = args.eta;
    finish(&cfg, None, args.out.as_deref(), args.save_field.as_deref())
}

fn cmd_minimize(args: MinimizeArgs) -> Result<bool> {
    let mut cfg = single_config(
        RegimeKind::Constant,
        args.omega,
        args.eps,
        args.nr,
        args.ntheta,
        args.bc,
        SweepMode::Minimize,
    );
    cfg.max_iters = Some(args.max_iters);
    cfg.tol = Some(args.tol);
    cfg.seed = args.seed;
    let init = match args.init.as_str() {
        "trial" => None,
        "random" => {
            cfg.init = InitKind::Random;
            None
        }
        other => match other.strip_prefix("file:") {
            Some(path) => Some(read_field(Path::new(path))?),
            None => {
                return Err(Error::InvalidParameter(format!(
                    "--init must be trial, random or file:<path>, got {other}"
                )))
            }
        },
    };
    finish(&cfg, init, args.out.as_deref(), args.save_field.as_deref())
}

#[derive(Serialize)]
struct SymmetryReport {
    eps: f64,
    omega: f64,
    n_max: u32,
    nr: usize,
    branch: flatdisc::symmetry::SymmetricBranch,
    best_profile_monotone_violations: usize,
}

fn cmd_symmetry(args: SymmetryArgs) -> Result<()> {
    let n_max = args.nmax.unwrap_or_else(|| default_n_max(args.omega));
    let branch = symmetric_branch_energy(args.eps, args.omega, n_max, args.nr)?;
    for w in &branch.warnings {
        eprintln!("warning: {w}");
    }
    let mut table = String::from("n,E_n,E_restricted\n");
    for e in &branch.table {
        writeln!(table, "{},{:e},{:e}", e.n, e.e_n, e.e_restricted).expect("string write");
    }
    print_out(&table)?;
    let best = radial_minimize(branch.best_n, args.eps, args.omega, args.nr)?;
    let report = SymmetryReport {
        eps: args.eps,
        omega: args.omega,
        n_max,
        nr: args.nr,
        best_profile_monotone_violations: best.monotone_violations,
        branch,
    };
    match &args.out {
        Some(p) => emit(&report, Some(p)),
        None => Ok(()),
    }
}

fn cmd_sweep(config: &Path) -> Result<bool> {
    let cfg = SweepConfig::load(config)?;
    let out = run_sweep(&cfg)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    for (i, r) in out.records.iter().enumerate() {
        if let Some(e) = &r.error {
            eprintln!(
                "run {} (eps = {}) failed: {e}",
                record_path(&cfg.out_dir, i, r.inputs.eps).display(),
                r.inputs.eps
            );
        }
    }
    print_out(&format!("{}\n", out.csv_path.display()))?;
    Ok(out.all_completed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Tf(a) => cmd_tf(a).map(|_| true),
        Command::Field(c) => cmd_field(c).map(|_| true),
        Command::TrialEnergy(a) => cmd_trial(a),
        Command::Minimize(a) => cmd_minimize(a),
        Command::Symmetry(a) => cmd_symmetry(a).map(|_| true),
        Command::Sweep { config } => cmd_sweep(&config),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
