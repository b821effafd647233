//! Subcommand dispatch and exit codes.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use elreg_core::coefficients::Preset;
use elreg_core::diagnostics::steady_state_solve;
use elreg_core::dynamics::{run_simulation, RunOutput, SimState, CFL_WARNING};
use elreg_core::spectral::{Rank, SpectralField};
use elreg_core::Error as CoreError;

use crate::config::{parse_config, ConfigError, SimConfig};
use crate::records::{write_records, write_records_csv};
use crate::selftest::run_selftest;
use crate::snapshot::write_snapshot;
use crate::FormatError;

pub const EXIT_OK: i32 = 0;
/// Validation or assertion failure.
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
/// Blow-up or I/O error.
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "elreg", version, about = "Regularized Ericksen-Leslie simulator on the periodic torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a configuration and write its energy records as CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// CSV destination; overrides `output.csv_path`. Without either the
        /// records go to stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// List the named model presets.
    Presets,
    /// Check a configuration and print its coefficient report.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Relax the configured initial director to a harmonic-map equilibrium.
    Steady {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        /// Write the equilibrium (with zero velocity) as a snapshot.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the built-in invariant and format round-trip checks.
    Selftest,
}

/// Parses `args` (program name first) and runs the command; returns the exit
/// code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Run { config, csv } => cmd_run(&config, csv.as_deref(), out, err),
        Command::Presets => cmd_presets(out),
        Command::Validate { config } => cmd_validate(&config, out),
        Command::Steady {
            config,
            tol,
            max_iters,
            output,
        } => cmd_steady(&config, tol, max_iters, output.as_deref(), out),
        Command::Selftest => cmd_selftest(out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn io(e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_RUNTIME,
            message: e.to_string(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let code = match e {
            ConfigError::Syntax { .. } => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::BlowUp { .. } => EXIT_RUNTIME,
            _ => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Model(inner) => inner.into(),
            other => Failure::io(other),
        }
    }
}

fn load(path: &Path) -> Result<SimConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn cmd_run(path: &Path, csv: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = load(path)?;
    let run = cfg.run_config();
    let snap_dir = cfg.file.output.snapshot_dir.clone();
    if let Some(dir) = &snap_dir {
        fs::create_dir_all(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))?;
    }

    let mut index = 0usize;
    let mut snapshot_error = None;
    let result = run_simulation(&run, &mut |s: &SimState| {
        if let Some(dir) = &snap_dir {
            let file = dir.join(format!("snapshot_{:06}.bin", index * run.snapshot_every));
            if let Err(e) = write_snapshot(&file, s) {
                snapshot_error = Some(e);
                return Err(CoreError::InvalidParameter("snapshot write failed".into()));
            }
        }
        index += 1;
        Ok(())
    });
    if let Some(e) = snapshot_error {
        return Err(e.into());
    }
    let output = result?;

    let extra = cfg.extra_column_names();
    match csv.or(cfg.file.output.csv_path.as_deref()) {
        Some(p) => write_records_csv(p, &output.records, &extra)?,
        None => write_records(&mut *out, &output.records, &extra)?,
    }
    summarize(&cfg, &output, err);
    Ok(EXIT_OK)
}

fn summarize(cfg: &SimConfig, o: &RunOutput, err: &mut dyn Write) {
    let last = o.records.last().expect("the initial state is always recorded");
    let worst_budget = o.records.iter().map(|r| r.budget_residual).fold(0.0, f64::max);
    let _ = writeln!(
        err,
        "{} steps to t = {}, E = {:.6e}, max budget residual {:.3e}, max CFL {:.3}",
        o.steps, last.t, last.e_total, worst_budget, o.max_cfl
    );
    if o.cfl_warnings > 0 {
        let _ = writeln!(
            err,
            "warning: CFL estimate exceeded {CFL_WARNING} on {} steps (max {:.3})",
            o.cfl_warnings, o.max_cfl
        );
    }
    if worst_budget > cfg.file.tolerances.budget {
        let _ = writeln!(
            err,
            "warning: budget residual {worst_budget:.3e} exceeds tolerance {:.3e}",
            cfg.file.tolerances.budget
        );
    }
    let mp = &o.max_principle;
    if mp.applicable && !mp.ok {
        let _ = writeln!(
            err,
            "warning: max |d| reached {:.6}, above the initial bound {:.6}",
            mp.max_seen, mp.bound
        );
    }
}

fn cmd_presets(out: &mut dyn Write) -> Result<i32, Failure> {
    let mut w = || -> std::io::Result<()> {
        writeln!(
            out,
            "{:<16} {:>5} {:>6} {:>6} {:>3}  {:<9} dissipation",
            "preset", "theta", "theta1", "theta2", "chi", "advection"
        )?;
        for p in Preset::ALL {
            let (t, t1, t2, chi) = p.exponents();
            let diss = match p.dissipation() {
                elreg_core::coefficients::Dissipation::Fractional => "fractional",
                elreg_core::coefficients::Dissipation::Voigt => "voigt",
            };
            writeln!(
                out,
                "{:<16} {:>5} {:>6} {:>6} {:>3}  {:<9} {diss}",
                p.name(),
                t,
                t1,
                t2,
                chi,
                p.bilinear_form()
            )?;
        }
        Ok(())
    };
    w().map_err(Failure::io)?;
    Ok(EXIT_OK)
}

fn cmd_validate(path: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let (report, lambdas) = match parse_config(&text) {
        Ok(c) => (c.report.clone(), Some((c.lambda1, c.lambda2))),
        Err(ConfigError::Constraint(r)) => (r, None),
        Err(e) => return Err(e.into()),
    };
    let mut w = || -> std::io::Result<()> {
        if let Some((l1, l2)) = lambdas {
            writeln!(out, "lambda1 = {l1}, lambda2 = {l2}")?;
        }
        for c in &report.checks {
            let mark = if c.satisfied() { "ok  " } else { "FAIL" };
            writeln!(out, "{mark} {} (slack {:e})", c.name, c.slack)?;
        }
        writeln!(out, "{report}")
    };
    w().map_err(Failure::io)?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_steady(
    path: &Path,
    tol: f64,
    max_iters: usize,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let cfg = load(path)?;
    let grid = cfg.file.grid.build()?;
    let d0 = cfg.file.init.director.build(&grid)?;
    let r = steady_state_solve(&d0, tol, max_iters)?;
    writeln!(
        out,
        "converged = {}, iterations = {}, residual = {:.3e}, max |d| = {:.12}",
        r.converged,
        r.iterations,
        r.residual,
        r.d.max_abs()
    )
    .map_err(Failure::io)?;
    if let Some(p) = output {
        let state = SimState::new(SpectralField::zeros(&grid, Rank::Vector), r.d, 0.0)?;
        write_snapshot(p, &state)?;
    }
    Ok(if r.converged { EXIT_OK } else { EXIT_FAILURE })
}

fn cmd_selftest(out: &mut dyn Write) -> Result<i32, Failure> {
    let mut io_err = None;
    let report = run_selftest(&mut |c| {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        if let Err(e) = writeln!(out, "{mark} {:<24} {}", c.name, c.detail) {
            io_err.get_or_insert(e);
        }
    });
    if let Some(e) = io_err {
        return Err(Failure::io(e));
    }
    let passed = report.checks.iter().filter(|c| c.passed).count();
    writeln!(
        out,
        "{passed}/{} checks passed in {:.1} s",
        report.checks.len(),
        report.elapsed.as_secs_f64()
    )
    .map_err(Failure::io)?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAILURE })
}
