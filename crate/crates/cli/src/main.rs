mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{RunConfig, CONFIG_ENV};

#[derive(Parser)]
#[command(name = "nondeg", version, about = "Non-degenerate curves, telephone wires and frame-loop invariants")]
struct Cli {
    /// RunConfig JSON file; defaults to $NONDEG_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Samples per unit of curve time (per twist for wires).
    #[arg(long, global = true)]
    density: Option<f64>,
    /// Smallest margin accepted as nondegenerate.
    #[arg(long, global = true)]
    margin_tol: Option<f64>,
    /// Allowed frame jump at concatenation points.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Largest N tried by wire scans.
    #[arg(long, global = true)]
    n_max: Option<usize>,
    /// Seed echoed in the report configuration; no command draws random numbers.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory that relative output paths resolve against.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Write the JSON report here instead of stdout (relative to the output directory).
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Margin, endpoint frames and loop-space membership of a curve.
    Check { curve: PathBuf },
    /// Flat matrix wire or manifold telephone wire.
    Wire(WireArgs),
    /// Frame-loop class of a curve or of a CSV frame loop.
    Spin { input: PathBuf },
    /// Mollify a curve and blend its ends into a reference loop.
    Smooth {
        curve: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        eps2: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Moore concatenation of curves in order.
    Concat {
        #[arg(required = true, num_args = 1..)]
        curves: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Derivative deviation table of matrix wires, as JSON and CSV.
    Asymptotics {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        omega: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
        n: Vec<usize>,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Frame-loop class census.
    Pi0 {
        #[command(subcommand)]
        cmd: Pi0Cmd,
    },
    /// Equality in the localized monoid.
    Loc {
        #[command(subcommand)]
        cmd: LocCmd,
    },
    /// Built-in manifolds.
    Manifold {
        #[command(subcommand)]
        cmd: ManifoldCmd,
    },
    /// Write a fixture curve (JSON) or frame loop (CSV).
    Gen {
        #[command(subcommand)]
        fixture: commands::Fixture,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
pub struct WireArgs {
    /// Flat twist curve.
    #[arg(long)]
    omega: PathBuf,
    /// Matrix loop as CSV (flat wire).
    #[arg(long, conflicts_with = "curve", required_unless_present = "curve")]
    matrix: Option<PathBuf>,
    /// Base curve (manifold wire).
    #[arg(long)]
    curve: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "parallel")]
    lift: commands::LiftKind,
    #[arg(long, default_value_t = 0.125)]
    lambda0: f64,
    #[arg(long, conflicts_with = "scan", required_unless_present = "scan")]
    n: Option<usize>,
    #[arg(long)]
    scan: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Pi0Cmd {
    /// Partition the loops in a directory by frame-loop class.
    Census {
        #[arg(long)]
        dim: usize,
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Subcommand)]
enum LocCmd {
    /// Compare (a, k_a) and (b, k_b) in the omega-localized pi_0.
    Equal {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        omega: PathBuf,
        #[arg(long, default_value_t = 0)]
        power_a: u32,
        #[arg(long, default_value_t = 0)]
        power_b: u32,
    },
}

#[derive(Subcommand)]
enum ManifoldCmd {
    /// Print the built-in manifolds and their chart radii.
    List,
}

fn build_config(cli: &Cli) -> nondeg_core::Result<RunConfig> {
    let path = cli.config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let mut c = RunConfig::load(path.as_deref())?;
    if let Some(v) = cli.density {
        c.density = v;
    }
    if let Some(v) = cli.margin_tol {
        c.margin_tol = v;
    }
    if let Some(v) = cli.delta {
        c.delta = v;
    }
    if let Some(v) = cli.n_max {
        c.n_max = v;
    }
    if let Some(v) = cli.seed {
        c.seed = v;
    }
    if let Some(v) = &cli.out_dir {
        c.out_dir = v.clone();
    }
    c.validate()?;
    Ok(c)
}

fn run(cli: Cli) -> nondeg_core::Result<report::Verdict> {
    let cfg = build_config(&cli)?;
    let rep = cli.report.as_ref().map(|p| cfg.resolve(p));
    let rep = rep.as_deref();
    use commands as c;
    match cli.cmd {
        Cmd::Check { curve } => c::check(&cfg, &curve, rep),
        Cmd::Wire(w) => c::wire(&cfg, &w, rep),
        Cmd::Spin { input } => c::spin(&cfg, &input, rep),
        Cmd::Smooth { curve, reference, tau, eps2, out } => c::smooth(&cfg, &curve, &reference, tau, eps2, &out, rep),
        Cmd::Concat { curves, out } => c::concat(&cfg, &curves, &out, rep),
        Cmd::Asymptotics { matrix, omega, n, csv } => c::asymptotics(&cfg, &matrix, &omega, &n, &csv, rep),
        Cmd::Pi0 { cmd: Pi0Cmd::Census { dim, input } } => c::census(&cfg, dim, &input, rep),
        Cmd::Loc { cmd: LocCmd::Equal { a, b, omega, power_a, power_b } } => {
            c::loc_equal(&cfg, &a, &b, &omega, power_a, power_b, rep)
        }
        Cmd::Manifold { cmd: ManifoldCmd::List } => c::manifold_list(&cfg, rep),
        Cmd::Gen { fixture, out } => c::generate(&cfg, &fixture, out.as_deref(), rep),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report::Verdict::Pass) => ExitCode::SUCCESS,
        Ok(report::Verdict::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
