//! Command-line front end: `run`, `verify` and `example`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 numerical failure.

mod config;
mod example;

pub use config::{
    BoundaryKind, BoundarySection, GridSection, InitSection, ModelSection, OutputSection,
    RunConfig, SchemeName, SteppingSection, RESOLVED_CONFIG,
};
pub use example::{comparison_csv, ComparisonRow, COMPARISON_COLUMNS};

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::flow::{run, write_checkpoint};
use crate::monitors::{check_theorem_a, write_csv, Monitor};
use crate::verify::{self, Suite, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "graphflow",
    version,
    about = "Graphical mean curvature flow into hyperbolic targets"
)]
pub struct Cli {
    /// Worker threads for grid sweeps (default: all cores).
    #[arg(long, global = true, env = "GRAPHFLOW_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a flow from a TOML configuration.
    Run(RunArgs),
    /// Run the acceptance suites and print a pass/fail table.
    Verify(VerifyArgs),
    /// Compare a closed-form example with the ODE reduction and the PDE.
    Example(ExampleArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `stepping.t_end`.
    #[arg(long)]
    pub t_end: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// `examples`, `invariants` or `all`.
    #[arg(default_value = "all")]
    pub suite: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    /// `hs1`, `hs2`, `hs3a` or `hs3b`.
    pub id: String,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub d0: Option<f64>,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
    /// Grid points of the PDE run.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Spacing of the rows in the comparison CSVs.
    #[arg(long)]
    pub every: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Exit code for an error raised while executing (not configuring) a command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Io(_) | Error::Dimension(_) | Error::Domain(_) => EXIT_CONFIG,
        _ => EXIT_NUMERICAL,
    }
}

/// Parses `args` and runs the command, writing reports to `out` and
/// diagnostics to `err`.
pub fn main_with<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    dispatch(cli, out, err)
}

pub fn dispatch(cli: Cli, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32 {
    let threads = match &cli.command {
        Command::Run(a) => match RunConfig::load(&a.config) {
            Ok(cfg) => cli.threads.or(cfg.threads),
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_CONFIG;
            }
        },
        _ => cli.threads,
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: thread pool: {e}");
            return EXIT_CONFIG;
        }
    };
    pool.install(|| match cli.command {
        Command::Run(a) => cmd_run(&a, out, err),
        Command::Verify(a) => cmd_verify(&a, out, err),
        Command::Example(a) => example::cmd_example(&a, out, err),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

/// Executes a run configuration.
pub fn cmd_run(args: &RunArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32 {
    let setup = || -> Result<_> {
        let mut cfg = RunConfig::load(&args.config)?;
        if let Some(t) = args.t_end {
            cfg.stepping.t_end = t;
        }
        if let Some(s) = args.seed {
            cfg.seed = s;
        }
        if let Some(dir) = &args.out {
            cfg.output.dir = dir.to_string_lossy().into_owned();
        }
        cfg.validate()?;
        let state = cfg.initial_state()?;
        let monitor = Monitor::new(&state, cfg.stepping.eps2)?;
        let dir = PathBuf::from(&cfg.output.dir);
        ensure_dir(&dir)?;
        fs::write(dir.join(RESOLVED_CONFIG), cfg.to_toml())?;
        Ok((cfg, state, monitor, dir))
    };
    let (cfg, state, monitor, dir) = match setup() {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let control = cfg.control().expect("validated");
    let slack = verify::monitor_slack(state.grid.h_min());
    let (final_state, records, failure) = match run(state, &control, cfg.monitor_every(), &monitor)
    {
        Ok(o) => (o.state, o.records, None),
        Err(f) => (f.state, f.records, Some(f.error)),
    };
    let write = || -> Result<()> {
        write_csv(&records, create(&dir.join(&cfg.output.monitors))?)?;
        let mut w = create(&dir.join(&cfg.output.checkpoint))?;
        write_checkpoint(&final_state, &mut w)?;
        w.flush()?;
        Ok(())
    };
    if let Err(e) = write() {
        let _ = writeln!(err, "error: {e}");
        return EXIT_CONFIG;
    }
    if let Some(e) = failure {
        let _ = writeln!(err, "error: {e}");
        let _ = writeln!(
            err,
            "last valid state at t = {} written to {}",
            final_state.t,
            dir.display()
        );
        return exit_code(&e);
    }
    let report = check_theorem_a(&records, &monitor.check_config(slack));
    let _ = writeln!(
        out,
        "t = {} reached in {} steps; {} monitor records in {}",
        final_state.t,
        final_state.stats.steps,
        records.len(),
        dir.display()
    );
    let _ = write!(out, "{report}");
    if !report.passed() {
        let _ = writeln!(err, "warning: monitored inequalities violated (see report)");
    }
    EXIT_OK
}

pub fn cmd_verify(
    args: &VerifyArgs,
    out: &mut (dyn Write + Send),
    err: &mut (dyn Write + Send),
) -> i32 {
    let suite: Suite = match args.suite.parse() {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let opts = VerifyOptions {
        seed: args.seed,
        inject_fault: args.inject_fault,
    };
    let ctx = verify::Context::new();
    let mut failed = 0;
    for &id in suite.criteria() {
        let o = verify::run_criterion(id, &ctx, &opts);
        failed += usize::from(!o.passed);
        let _ = writeln!(out, "{o}");
        let _ = out.flush();
    }
    let total = suite.criteria().len();
    let _ = writeln!(out, "{} of {total} criteria passed", total - failed);
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}
