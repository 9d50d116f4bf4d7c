//! `duffing-readout`: drive-frequency sweeps, spectra and readout metrics
//! for a Duffing-oscillator qubit detector. Tables are written as CSV.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use duffing_core::circuit::{circuit_map_scan, linspace, CircuitParams, QuarticConvention};
use duffing_core::config::{parse_modes, Config};
use duffing_core::metrics::{spectrum_scan, SpectrumModel};
use duffing_core::pipeline::{QubitMode, SolveOptions, DEFAULT_N_FOCK};
use duffing_core::propagate::Rk4Options;
use duffing_core::rwa::{locate_multiphoton_resonances, track_quasienergies};
use duffing_core::spectra::Operator;
use duffing_core::sweep::{self, SweepConfig};
use duffing_core::{Error, HilbertSpace};

#[derive(Parser)]
#[command(name = "duffing-readout", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Configuration file (TOML)
    #[arg(long, value_name = "PATH", global = true)]
    config: Option<PathBuf>,
    /// Shipped configuration: fig0 … fig5
    #[arg(long, value_name = "NAME", global = true, conflicts_with = "config")]
    preset: Option<String>,
    /// Output CSV; `-` for stdout. Defaults to the config's `out` key, else stdout
    #[arg(long, value_name = "PATH", global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long, value_name = "N", global = true)]
    jobs: Option<usize>,
}

#[derive(Args, Clone, Default)]
struct Grid {
    /// Grid start
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    /// Grid end
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    /// Grid points
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Args, Clone, Default)]
struct SweepArgs {
    #[command(flatten)]
    grid: Grid,
    /// Comma-separated qubit modes: coupled, up, down, detector-only
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<String>>,
    /// Oscillator levels kept
    #[arg(long)]
    nfock: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// α/Ω and g/Ω against the external flux φ_ex (grid flags set φ_ex)
    CircuitMap {
        #[command(flatten)]
        grid: Grid,
        #[command(flatten)]
        common: Common,
    },
    /// Response amplitude and qubit polarization over ω_ex
    Sweep {
        #[command(flatten)]
        args: SweepArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Minimal quasienergy gaps at the multiphoton resonances
    Resonances {
        /// Highest photon number
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        nfock: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Symmetrized noise spectrum on a frequency grid (grid flags set ω)
    Spectrum {
        #[command(flatten)]
        grid: Grid,
        /// chi or chi2
        #[arg(long)]
        operator: Option<String>,
        /// Second operator (default: same as --operator)
        #[arg(long)]
        operator_b: Option<String>,
        #[arg(long)]
        nfock: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Discrimination power, relaxation rate, measurement time and efficiency
    Metrics {
        #[command(flatten)]
        args: SweepArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Null-space steady state against RK4 time propagation
    OracleCompare {
        /// Comma-separated drive frequencies
        #[arg(long, value_delimiter = ',')]
        omega_ex: Option<Vec<f64>>,
        /// Qubit mode
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        nfock: Option<usize>,
        /// Truncation of the propagated reference
        #[arg(long)]
        reference_nfock: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Quasienergy branches tracked over the sweep grid
    Quasienergies {
        #[command(flatten)]
        args: SweepArgs,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::CircuitMap { common, .. }
            | Command::Sweep { common, .. }
            | Command::Resonances { common, .. }
            | Command::Spectrum { common, .. }
            | Command::Metrics { common, .. }
            | Command::OracleCompare { common, .. }
            | Command::Quasienergies { common, .. } => common,
        }
    }
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn load_config(common: &Common) -> Result<Config, Failure> {
    Ok(match (&common.config, &common.preset) {
        (Some(path), _) => Config::load(path)?,
        (None, Some(name)) => Config::preset(name)?,
        (None, None) => Config::default(),
    })
}

fn open_output(explicit: Option<&Path>, configured: Option<&str>) -> Result<Box<dyn Write>, Failure> {
    let path = explicit.map(Path::to_path_buf).or_else(|| configured.map(PathBuf::from));
    match path {
        Some(p) if p.as_os_str() != "-" => {
            let f = File::create(&p).map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display())))?;
            log::info!("writing {}", p.display());
            Ok(Box::new(BufWriter::new(f)))
        }
        _ => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn sweep_config(cfg: &Config, args: &SweepArgs) -> Result<SweepConfig, Failure> {
    let mut s = cfg.sweep_config_unvalidated()?;
    if let Some(v) = args.grid.from {
        s.omega_from = v;
    }
    if let Some(v) = args.grid.to {
        s.omega_to = v;
    }
    if let Some(v) = args.grid.points {
        s.points = v;
    }
    if let Some(m) = &args.modes {
        s.modes = parse_modes(m)?;
    }
    if let Some(n) = args.nfock {
        s.solve.n_fock = n;
    }
    s.validate()?;
    Ok(s)
}

fn run(command: &Command) -> Result<(), Failure> {
    let common = command.common();
    let cfg = load_config(common)?;
    let out = common.out.as_deref();
    match command {
        Command::CircuitMap { grid, .. } => {
            let section = cfg.circuit_map.clone().unwrap_or_default();
            let (circuit, quartic) = match &cfg.circuit {
                Some(c) => (c.params(), c.quartic),
                None => (CircuitParams::reference(), QuarticConvention::default()),
            };
            let rows = circuit_map_scan(
                &circuit,
                grid.from.unwrap_or(section.phi_from),
                grid.to.unwrap_or(section.phi_to),
                grid.points.unwrap_or(section.points),
                quartic,
            )?;
            sweep::write_circuit_map_csv(&rows, open_output(out, section.out.as_deref())?)?;
        }
        Command::Sweep { args, .. } => {
            let s = sweep_config(&cfg, args)?;
            let section = cfg.sweep_section();
            let result = sweep::run_sweep(&s)?;
            sweep::write_sweep_csv(&result.rows, open_output(out, section.out.as_deref())?)?;
            if s.metrics {
                if let Some(path) = &section.metrics_out {
                    sweep::write_metrics_csv(&result.metrics, s.params.gamma, open_output(None, Some(path))?)?;
                }
            }
            if let Some(path) = &section.quasienergies_out {
                write_quasienergies(&s, Some(Path::new(path)))?;
            }
        }
        Command::Metrics { args, .. } => {
            let mut s = sweep_config(&cfg, args)?;
            s.metrics = true;
            let section = cfg.sweep_section();
            let result = sweep::run_sweep(&s)?;
            let path = section.metrics_out.as_deref();
            sweep::write_metrics_csv(&result.metrics, s.params.gamma, open_output(out, path)?)?;
        }
        Command::Quasienergies { args, .. } => {
            let s = sweep_config(&cfg, args)?;
            let section = cfg.sweep_section();
            let path = out.map(Path::to_path_buf).or(section.quasienergies_out.map(PathBuf::from));
            write_quasienergies(&s, path.as_deref())?;
        }
        Command::Resonances { n_max, nfock, .. } => {
            let section = cfg.resonances.clone().unwrap_or_default();
            let p = cfg.model_params()?;
            let rows = locate_multiphoton_resonances(
                &p,
                nfock.or(section.n_fock).unwrap_or(DEFAULT_N_FOCK),
                n_max.unwrap_or(section.n_max),
            )?;
            for r in rows.iter().filter(|r| !r.resolved) {
                log::warn!("N = {} resonance is not resolved (branch weight {:.3})", r.photons, r.branch_weight);
            }
            sweep::write_resonances_csv(&rows, open_output(out, section.out.as_deref())?)?;
        }
        Command::Spectrum {
            grid,
            operator,
            operator_b,
            nfock,
            ..
        } => {
            let section = cfg.spectrum.clone();
            let parse_op = |s: &str| {
                Operator::parse(s).ok_or_else(|| Failure::Config(format!("unknown operator `{s}` (expected chi or chi2)")))
            };
            let op_a = match operator {
                Some(s) => parse_op(s)?,
                None => section.as_ref().map_or(Operator::Chi, |s| s.operator),
            };
            let op_b = match operator_b {
                Some(s) => parse_op(s)?,
                None => section.as_ref().and_then(|s| s.operator_b).unwrap_or(op_a),
            };
            let from = grid.from.or(section.as_ref().map(|s| s.omega_from)).unwrap_or(-1.2);
            let to = grid.to.or(section.as_ref().map(|s| s.omega_to)).unwrap_or(1.2);
            let points = grid.points.or(section.as_ref().map(|s| s.points)).unwrap_or(2001);
            if points < 2 || !(from < to) {
                return Err(Failure::Config(format!(
                    "spectrum grid needs from < to and points >= 2, got [{from}, {to}] with {points}"
                )));
            }
            let model = section.as_ref().map_or(SpectrumModel::default(), |s| s.model);
            let n_fock = nfock.or(section.as_ref().and_then(|s| s.n_fock)).unwrap_or(DEFAULT_N_FOCK);
            let p = cfg.model_params()?;
            let rows = spectrum_scan(&p, model, op_a, op_b, &linspace(from, to, points), &SolveOptions::with_n_fock(n_fock))?;
            let path = section.as_ref().and_then(|s| s.out.clone());
            sweep::write_spectrum_csv(&rows, open_output(out, path.as_deref())?)?;
        }
        Command::OracleCompare {
            omega_ex,
            mode,
            nfock,
            reference_nfock,
            ..
        } => {
            let section = cfg.oracle.clone();
            let p = cfg.model_params()?;
            let omegas = omega_ex
                .clone()
                .or(section.as_ref().map(|s| s.omega_ex.clone()))
                .unwrap_or_else(|| vec![p.omega_ex]);
            let mode_name = mode
                .clone()
                .or(section.as_ref().map(|s| s.mode.clone()))
                .unwrap_or_else(|| "detector-only".into());
            let mode = parse_modes(&[mode_name])?[0];
            let n_fock = nfock.or(section.as_ref().and_then(|s| s.n_fock)).unwrap_or(DEFAULT_N_FOCK);
            let reference = reference_nfock.or(section.as_ref().and_then(|s| s.reference_n_fock));
            let rk4 = section.as_ref().map_or(Rk4Options::default(), |s| Rk4Options {
                horizon_gamma: s.horizon_gamma,
                step_fraction: s.step_fraction,
                ..Rk4Options::default()
            });
            let reports = sweep::oracle_compare(&p, mode, &omegas, n_fock, reference, &rk4);
            let path = section.as_ref().and_then(|s| s.out.clone());
            sweep::write_oracle_csv(&reports, open_output(out, path.as_deref())?)?;
            let failed = reports.iter().filter(|r| !r.pass).count();
            if failed > 0 {
                return Err(Failure::Numerical(format!("{failed} of {} oracle points failed", reports.len())));
            }
        }
    }
    Ok(())
}

fn write_quasienergies(s: &SweepConfig, path: Option<&Path>) -> Result<(), Failure> {
    let qubit = s.modes.iter().any(|m| *m != QubitMode::DetectorOnly);
    let space = HilbertSpace::new(s.solve.n_fock, qubit)?;
    let tracked = track_quasienergies(&s.params, space, &s.grid())?;
    sweep::write_quasienergies_csv(&tracked, open_output(path, None)?)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // parallelism comes from the sweep; dense kernels stay sequential
    faer::set_global_parallelism(faer::Par::Seq);
    if let Some(n) = cli.command.common().jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
