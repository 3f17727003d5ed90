mod config;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use xtalk_core::error::Error;
use xtalk_core::gamma::scan_gamma;
use xtalk_core::presets::{preset_names, run_experiment};
use xtalk_core::verify::run_checks;

use config::Loaded;

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_CHECK_FAILED: u8 = 2;
pub const EXIT_NO_MINIMUM: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn validation(message: String) -> Self {
        CliError {
            code: EXIT_VALIDATION,
            message,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoMinimum { .. } => EXIT_NO_MINIMUM,
            _ => EXIT_VALIDATION,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Parser)]
#[command(name = "xtalk", version, about = "Simulate XY-crosstalk suppression by FM and DD control")]
struct Cli {
    /// Worker threads for parallel cells (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<String>,
    /// Figure preset; see `list-presets`.
    #[arg(long)]
    preset: Option<String>,
    /// Output CSV path (default: stdout).
    #[arg(long)]
    out: Option<String>,
    /// Largest integrator step in ns.
    #[arg(long)]
    step: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its infidelities as CSV.
    Simulate(Common),
    /// Scan γ for one or more cycle counts and report the first local minimum.
    OptimizeGamma {
        #[command(flatten)]
        common: Common,
        /// fm1, fm2-idle, fm2-x or fm2-xx.
        #[arg(long)]
        functional: Option<String>,
        /// Comma-separated cycle counts.
        #[arg(long, value_delimiter = ',')]
        cycles: Option<Vec<u32>>,
    },
    /// Run the oracle and invariant checks.
    Verify {
        #[arg(long)]
        config: Option<String>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// List figure presets.
    ListPresets,
}

fn load(path: Option<&str>) -> Result<Loaded, CliError> {
    match path {
        Some(p) => Loaded::load(p),
        None => Ok(Loaded::empty()),
    }
}

fn emit(text: &str, path: Option<String>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(&p, text)
            .map_err(|e| CliError::validation(format!("cannot write {p}: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn simulate(c: &Common) -> Result<(), CliError> {
    let cfg = load(c.config.as_deref())?;
    let spec = cfg.experiment(c.preset.as_deref())?;
    let settings = cfg.settings(c.step)?;
    let result = run_experiment(&spec, &settings)?;
    emit(&output::simulate_csv(&spec, &settings, &result), cfg.output(c.out.as_deref()))
}

fn optimize(c: &Common, functional: Option<&str>, cycles: Option<&[u32]>) -> Result<(), CliError> {
    let cfg = load(c.config.as_deref())?;
    let req = cfg.optimize_request(c.preset.as_deref(), functional, cycles)?;
    let settings = cfg.settings(c.step)?;
    let mut scans = Vec::new();
    let mut missing = Vec::new();
    for &n in &req.cycles {
        match scan_gamma(req.functional, &req.params, n, req.gate_time, &settings.gamma_grid, &settings.quadrature) {
            Ok(s) => scans.push(s),
            Err(Error::NoMinimum { scan, max_mhz }) => {
                missing.push(format!("N={n}: no minimum below {max_mhz} MHz"));
                scans.push(*scan);
            }
            Err(e) => return Err(e.into()),
        }
    }
    emit(&output::optimize_csv(&req, &settings, &scans), cfg.output(c.out.as_deref()))?;
    for s in &scans {
        if let Some(g) = s.gamma_opt() {
            eprintln!("N={}: gamma_opt/2pi = {:.2} MHz", s.cycles, xtalk_core::units::to_mhz(g));
        }
    }
    if missing.is_empty() {
        Ok(())
    } else {
        Err(CliError {
            code: EXIT_NO_MINIMUM,
            message: missing.join("; "),
        })
    }
}

fn verify(config: Option<&str>, step: Option<f64>) -> Result<(), CliError> {
    let cfg = load(config)?;
    let v = cfg.verify_config(step)?;
    let results = run_checks(&v)?;
    let mut failed = 0;
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!("{status} {:<36} measured {:.3e} tolerance {:.3e}", r.name, r.measured, r.tolerance);
        failed += usize::from(!r.passed);
    }
    if failed > 0 {
        return Err(CliError {
            code: EXIT_CHECK_FAILED,
            message: format!("{failed} of {} checks failed", results.len()),
        });
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::validation(format!("cannot start thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Simulate(c) => simulate(c),
        Command::OptimizeGamma {
            common,
            functional,
            cycles,
        } => optimize(common, functional.as_deref(), cycles.as_deref()),
        Command::Verify { config, step } => verify(config.as_deref(), *step),
        Command::ListPresets => {
            for (name, description) in preset_names() {
                println!("{name:<6} {description}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
