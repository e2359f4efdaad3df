//! Command-line front end for the simulator.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pqed::cli::{cmd_find_optimum, cmd_fit, cmd_solve, cmd_sweep, CliError, SweepSource};
use pqed::sweep::Preset;

#[derive(Parser)]
#[command(
    name = "pqed",
    version,
    about = "Steady-state simulator for a two-level emitter coupled to two lossy nanoantenna modes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit scattering/absorption spectra and write a characterization JSON.
    Fit {
        /// Scattering spectrum CSV (`omega_thz_over_2pi,power`).
        #[arg(long)]
        scat: PathBuf,
        /// Absorption spectrum CSV.
        #[arg(long)]
        abs: PathBuf,
        /// Partial Purcell contributions "f1,f2" of the two modes.
        #[arg(long, value_parser = parse_pair)]
        purcell_f: (f64, f64),
        /// Output characterization JSON path.
        #[arg(long)]
        out: PathBuf,
        /// Label stored in the characterization.
        #[arg(long, default_value = "fitted")]
        label: String,
        /// Fit the full spectrum instead of ±3Γ windows around the peaks.
        #[arg(long)]
        no_window: bool,
    },
    /// Solve one configuration and emit the observable row.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Output path (.csv or .json); stdout JSON when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the per-mode Fock truncation.
        #[arg(long)]
        truncation: Option<usize>,
        /// Logarithm base for the negativity: 2, e or 10.
        #[arg(long)]
        log_base: Option<String>,
    },
    /// Run a parameter sweep and write one CSV per observable.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Built-in grid: fig4, fig5, fig6a, fig6b or fig7.
        #[arg(long, conflicts_with = "spec")]
        preset: Option<String>,
        /// Sweep specification JSON.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Overwrite existing output files.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        truncation: Option<usize>,
        #[arg(long)]
        log_base: Option<String>,
    },
    /// Golden-section search for the emitter frequency maximizing E_N.
    FindOptimum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        truncation: Option<usize>,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected two comma-separated numbers".into());
    }
    let a = parts[0].trim().parse().map_err(|e| format!("{e}"))?;
    let b = parts[1].trim().parse().map_err(|e| format!("{e}"))?;
    Ok((a, b))
}

/// Guard removing a temporary override directory.
struct TempDirGuard(PathBuf);

impl Drop for TempDirGuard {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

/// Apply --truncation/--log-base overrides by rewriting the config into a
/// temporary copy; relative antenna paths are absolutized so they keep
/// resolving against the original config directory.
fn apply_overrides(
    config: &PathBuf,
    truncation: Option<usize>,
    log_base: Option<&str>,
) -> Result<(PathBuf, Option<TempDirGuard>), CliError> {
    if truncation.is_none() && log_base.is_none() {
        return Ok((config.clone(), None));
    }
    let io = |path: &PathBuf| {
        let path = path.clone();
        move |source| CliError::Io { path, source }
    };
    let text = std::fs::read_to_string(config).map_err(io(config))?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(n) = truncation {
        value["truncation"] = serde_json::json!([n, n]);
    }
    if let Some(base) = log_base {
        value["log_base"] = serde_json::Value::String(base.to_string());
    }
    if let Some(s) = value.get("antenna").and_then(|v| v.as_str()) {
        if !s.starts_with("table1:") {
            let parent = config
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .map(|p| p.to_path_buf())
                .unwrap_or_else(|| PathBuf::from("."));
            let abs = parent.join(s);
            value["antenna"] = serde_json::Value::String(abs.to_string_lossy().into_owned());
        }
    }
    let dir = std::env::temp_dir().join(format!("pqed-override-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(io(&dir))?;
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&value).unwrap()).map_err(io(&path))?;
    Ok((path, Some(TempDirGuard(dir))))
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Fit {
            scat,
            abs,
            purcell_f,
            out,
            label,
            no_window,
        } => cmd_fit(
            &scat,
            &abs,
            [purcell_f.0, purcell_f.1],
            &out,
            &label,
            !no_window,
        ),
        Command::Solve {
            config,
            out,
            truncation,
            log_base,
        } => {
            let (config, _guard) = apply_overrides(&config, truncation, log_base.as_deref())?;
            cmd_solve(&config, out.as_deref()).map(|_| ())
        }
        Command::Sweep {
            config,
            preset,
            spec,
            out,
            workers,
            force,
            truncation,
            log_base,
        } => {
            let source = match (preset, spec) {
                (Some(name), None) => SweepSource::Preset(
                    Preset::parse(&name)
                        .ok_or_else(|| CliError::Config(format!("unknown preset {name:?}")))?,
                ),
                (None, Some(path)) => SweepSource::SpecFile(path),
                _ => {
                    return Err(CliError::Config(
                        "sweep needs exactly one of --preset or --spec".into(),
                    ))
                }
            };
            let (config, _guard) = apply_overrides(&config, truncation, log_base.as_deref())?;
            cmd_sweep(&config, source, &out, workers, force)
        }
        Command::FindOptimum { config, truncation } => {
            let (config, _guard) = apply_overrides(&config, truncation, None)?;
            cmd_find_optimum(&config).map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
