//! Batch front end: JSON configuration, the fit/solve/sweep/find-optimum
//! commands, and their CSV/JSON outputs.
//!
//! Configuration keys carry units in their names (`omega_qe_thz_over_2pi`,
//! `pump_per_s`, `dipole_cm`); unknown keys are rejected. The antenna is an
//! inline record, a bundled-table reference like `"table1:dl0"`, or a path
//! to a characterization JSON produced by the fit command.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::constants::{rad_per_s_to_thz_over_2pi, thz_over_2pi_to_rad_per_s};
use crate::entangle::LogBase;
use crate::model::{
    table1_antenna, AntennaJson, AntennaModel, EmitterModel, ModelError,
};
use crate::observables::{find_optimum, solve_pipeline, ObservableRow, PipelineError};
use crate::spectra::{
    characterize, fit_two_lorentzians, read_spectrum_csv, Channel, FitOptions, SpectraError,
};
use crate::steady::SteadyError;
use crate::sweep::{run_sweep, write_sweep_outputs, Preset, SweepError, SweepJob, SweepSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("fit did not converge")]
    FitNotConverged,
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
}

impl CliError {
    /// Process exit code: 1 usage/IO, 2 fit non-convergence, 3 degenerate
    /// steady state.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::FitNotConverged => 2,
            CliError::Pipeline(PipelineError::Steady(SteadyError::DegenerateSteadyState)) => 3,
            CliError::Sweep(SweepError::Pipeline(PipelineError::Steady(
                SteadyError::DegenerateSteadyState,
            ))) => 3,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

// ---------------------------------------------------------------------------
// Configuration schema
// ---------------------------------------------------------------------------

/// Emitter transition frequency: a number (ω/2π in THz), `"midpoint"` for
/// the mean of the two mode frequencies, or `"optimal"` for the
/// golden-section E_N optimum.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaQeSpec {
    ThzOver2Pi(f64),
    Named(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitterConfig {
    pub omega_qe_thz_over_2pi: OmegaQeSpec,
    #[serde(default = "defaults::dipole_cm")]
    pub dipole_cm: f64,
    #[serde(default)]
    pub theta_deg: f64,
    #[serde(default = "defaults::gamma_d_per_s")]
    pub gamma_d_per_s: f64,
    pub pump_per_s: f64,
    #[serde(default = "defaults::epsilon_host")]
    pub epsilon_host: f64,
}

/// Antenna source: `"table1:<label>"`, a path to a characterization JSON,
/// or an inline antenna record.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AntennaRef {
    Named(String),
    Inline(AntennaJson),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum LogBaseConfig {
    #[default]
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "e")]
    E,
    #[serde(rename = "10")]
    Ten,
}

impl From<LogBaseConfig> for LogBase {
    fn from(value: LogBaseConfig) -> Self {
        match value {
            LogBaseConfig::Two => LogBase::Two,
            LogBaseConfig::E => LogBase::E,
            LogBaseConfig::Ten => LogBase::Ten,
        }
    }
}

/// Whether pump and dephasing inputs are plain rates (events per second,
/// the default) or angular rates to be multiplied by 2π on load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RateConvention {
    #[default]
    Plain,
    Angular,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub antenna: AntennaRef,
    pub emitter: EmitterConfig,
    #[serde(default = "defaults::truncation")]
    pub truncation: [usize; 2],
    #[serde(default)]
    pub outputs: Option<Vec<String>>,
    #[serde(default)]
    pub log_base: LogBaseConfig,
    #[serde(default)]
    pub rate_convention: RateConvention,
}

mod defaults {
    pub fn dipole_cm() -> f64 {
        6e-29
    }
    pub fn gamma_d_per_s() -> f64 {
        1e11
    }
    pub fn epsilon_host() -> f64 {
        2.25
    }
    pub fn truncation() -> [usize; 2] {
        [4, 4]
    }
}

/// A parsed and resolved configuration ready to run.
pub struct ResolvedConfig {
    pub antenna: AntennaModel,
    pub emitter: EmitterModel,
    pub truncation: [usize; 2],
    pub outputs: Vec<String>,
    pub log_base: LogBase,
    pub config_sha256: String,
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn resolve_antenna(antenna: &AntennaRef, config_dir: &Path) -> Result<AntennaModel, CliError> {
    match antenna {
        AntennaRef::Named(name) => {
            if let Some(label) = name.strip_prefix("table1:") {
                Ok(table1_antenna(label)?)
            } else {
                let path = config_dir.join(name);
                let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
                let parsed: AntennaJson = serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                Ok(parsed.to_model()?)
            }
        }
        AntennaRef::Inline(json) => Ok(json.to_model()?),
    }
}

/// Resolve the antenna, emitter frequency and unit conventions. Paths inside
/// the config are taken relative to the config file's directory.
pub fn resolve_config(config: &RunConfig, config_path: &Path) -> Result<ResolvedConfig, CliError> {
    let config_dir = config_path.parent().unwrap_or(Path::new("."));
    let antenna = resolve_antenna(&config.antenna, config_dir)?;
    let log_base: LogBase = config.log_base.into();
    let rate_factor = match config.rate_convention {
        RateConvention::Plain => 1.0,
        RateConvention::Angular => 2.0 * std::f64::consts::PI,
    };
    let pump = config.emitter.pump_per_s * rate_factor;
    let gamma_d = config.emitter.gamma_d_per_s * rate_factor;

    // Provisional emitter at the midpoint; replaced below if a number or the
    // optimum is requested.
    let base = EmitterModel::new(
        antenna.omega_midpoint(),
        config.emitter.dipole_cm,
        config.emitter.theta_deg,
        gamma_d,
        pump,
        config.emitter.epsilon_host,
    )?;
    let omega_qe = match &config.emitter.omega_qe_thz_over_2pi {
        OmegaQeSpec::ThzOver2Pi(v) => thz_over_2pi_to_rad_per_s(*v),
        OmegaQeSpec::Named(name) => match name.as_str() {
            "midpoint" => antenna.omega_midpoint(),
            "optimal" => {
                find_optimum(&antenna, &base, config.truncation, log_base)?.omega_qe_opt
            }
            other => {
                return Err(CliError::Config(format!(
                    "omega_qe_thz_over_2pi must be a number, \"midpoint\" or \"optimal\", got {other:?}"
                )))
            }
        },
    };
    let mut emitter = base;
    emitter.omega_qe = omega_qe;

    let outputs = config
        .outputs
        .clone()
        .unwrap_or_else(|| crate::sweep::OBSERVABLE_NAMES.iter().map(|s| s.to_string()).collect());
    for name in &outputs {
        if !crate::sweep::OBSERVABLE_NAMES.contains(&name.as_str()) {
            return Err(CliError::Config(format!("unknown observable {name:?}")));
        }
    }

    let canonical = serde_json::to_vec(config).expect("config reserializes");
    let config_sha256 = hex_digest(&canonical);

    Ok(ResolvedConfig {
        antenna,
        emitter,
        truncation: config.truncation,
        outputs,
        log_base,
        config_sha256,
    })
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

/// Fit both channel spectra, derive the mode characterization and write it
/// as an antenna JSON. A flagged non-convergence is reported through
/// [`CliError::FitNotConverged`] (exit code 2) after writing nothing.
pub fn cmd_fit(
    in_scat: &Path,
    in_abs: &Path,
    purcell_f: [f64; 2],
    out: &Path,
    label: &str,
    window: bool,
) -> Result<(), CliError> {
    let scat_file = std::fs::File::open(in_scat).map_err(io_err(in_scat))?;
    let abs_file = std::fs::File::open(in_abs).map_err(io_err(in_abs))?;
    let scat = read_spectrum_csv(scat_file, Channel::Scat)?;
    let abs = read_spectrum_csv(abs_file, Channel::Abs)?;
    let options = FitOptions {
        window_gammas: window.then_some(3.0),
        ..FitOptions::default()
    };
    let fit_scat = fit_two_lorentzians(&scat, None, &options)?;
    let fit_abs = fit_two_lorentzians(&abs, None, &options)?;
    if !fit_scat.converged || !fit_abs.converged {
        return Err(CliError::FitNotConverged);
    }
    // The emitter enters only through γ_fs in the κ formula; standard
    // emitter settings with the transition centered between the fitted modes.
    let omega_mid = 0.5 * (fit_scat.modes[0].omega0 + fit_scat.modes[1].omega0);
    let emitter = crate::model::default_emitter(omega_mid, 90.0, 1e9);
    let characterization = characterize(&fit_scat, &fit_abs, purcell_f, &emitter)?;
    let antenna = characterization.into_antenna(label)?;
    let json = AntennaJson::from_model(&antenna);
    let text = serde_json::to_string_pretty(&json).expect("antenna serializes");
    std::fs::write(out, text).map_err(io_err(out))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

/// Serializable one-row observable output.
#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub r_per_s: f64,
    pub r1_per_s: f64,
    pub r2_per_s: f64,
    pub n1: f64,
    pub n2: f64,
    pub p_total: Vec<f64>,
    pub e_n: f64,
    pub p_bell: f64,
    pub phi_star_rad: f64,
    pub p_10: f64,
    pub p_01: f64,
    pub p_e: f64,
    pub p_g: f64,
    pub residual: f64,
    pub discarded_weight: f64,
    pub vacuum: bool,
    pub omega_qe_thz_over_2pi: f64,
}

impl SolveReport {
    pub fn from_row(row: &ObservableRow, emitter: &EmitterModel) -> Self {
        Self {
            r_per_s: row.r_total,
            r1_per_s: row.r_mode[0],
            r2_per_s: row.r_mode[1],
            n1: row.n_mode[0],
            n2: row.n_mode[1],
            p_total: row.p_total.clone(),
            e_n: row.e_n,
            p_bell: row.p_bell,
            phi_star_rad: row.phi_star,
            p_10: row.p_10,
            p_01: row.p_01,
            p_e: row.p_e,
            p_g: row.p_g,
            residual: row.residual,
            discarded_weight: row.discarded_weight,
            vacuum: row.vacuum,
            omega_qe_thz_over_2pi: rad_per_s_to_thz_over_2pi(emitter.omega_qe),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut header = String::from(
            "omega_qe_thz_over_2pi,r_per_s,r1_per_s,r2_per_s,n1,n2",
        );
        let mut line = format!(
            "{},{},{},{},{},{}",
            self.omega_qe_thz_over_2pi, self.r_per_s, self.r1_per_s, self.r2_per_s, self.n1, self.n2
        );
        for (n, p) in self.p_total.iter().enumerate() {
            header.push_str(&format!(",p{n}"));
            line.push_str(&format!(",{p}"));
        }
        header.push_str(",e_n,p_bell,phi_star_rad,p_10,p_01,p_e,p_g,residual,discarded_weight,vacuum");
        line.push_str(&format!(
            ",{},{},{},{},{},{},{},{},{},{}",
            self.e_n,
            self.p_bell,
            self.phi_star_rad,
            self.p_10,
            self.p_01,
            self.p_e,
            self.p_g,
            self.residual,
            self.discarded_weight,
            self.vacuum
        ));
        format!("{header}\n{line}\n")
    }
}

/// Solve one configuration; write CSV or JSON depending on the output
/// extension (JSON to stdout when no path given). Returns the report.
pub fn cmd_solve(config_path: &Path, out: Option<&Path>) -> Result<SolveReport, CliError> {
    let config = load_config(config_path)?;
    let resolved = resolve_config(&config, config_path)?;
    let row = solve_pipeline(
        &resolved.antenna,
        &resolved.emitter,
        resolved.truncation,
        resolved.log_base,
    )?;
    if row.vacuum {
        eprintln!("warning: stationary state is vacuum (no pump?): entanglement observables are zero");
    }
    let report = SolveReport::from_row(&row, &resolved.emitter);
    match out {
        Some(path) if path.extension().is_some_and(|e| e == "csv") => {
            std::fs::write(path, report.to_csv()).map_err(io_err(path))?;
        }
        Some(path) => {
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            std::fs::write(path, json).map_err(io_err(path))?;
        }
        None => {
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            println!("{json}");
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

pub enum SweepSource {
    Preset(Preset),
    SpecFile(PathBuf),
}

/// Run a sweep from a preset or a spec file and write the CSV tables plus a
/// manifest recording the config hash, grids and wall time.
pub fn cmd_sweep(
    config_path: &Path,
    source: SweepSource,
    out_dir: &Path,
    workers: usize,
    force: bool,
) -> Result<(), CliError> {
    let config = load_config(config_path)?;
    let resolved = resolve_config(&config, config_path)?;
    let (job, preset_name) = match &source {
        SweepSource::Preset(preset) => (
            preset.job(
                &resolved.antenna,
                &resolved.emitter,
                resolved.truncation,
                resolved.log_base,
            ),
            Some(preset.name()),
        ),
        SweepSource::SpecFile(path) => {
            let text = std::fs::read_to_string(path).map_err(io_err(path))?;
            let spec: SweepSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            (
                SweepJob {
                    antennas: vec![resolved.antenna.clone()],
                    emitter: resolved.emitter,
                    spec,
                    mode_levels: resolved.truncation,
                    log_base: resolved.log_base,
                },
                None,
            )
        }
    };
    let started = std::time::Instant::now();
    let rows = run_sweep(&job, workers)?;
    let wall_ms = started.elapsed().as_millis();
    write_sweep_outputs(
        &job,
        &rows,
        &resolved.outputs,
        out_dir,
        &resolved.config_sha256,
        preset_name,
        workers,
        wall_ms,
        force,
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// find-optimum
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct OptimumJson {
    pub omega_qe_opt_thz_over_2pi: f64,
    pub e_n_max: f64,
    pub midpoint_offset_thz_over_2pi: f64,
    pub deviates_from_midpoint: bool,
}

pub fn cmd_find_optimum(config_path: &Path) -> Result<OptimumJson, CliError> {
    let config = load_config(config_path)?;
    let resolved = resolve_config(&config, config_path)?;
    let report = find_optimum(
        &resolved.antenna,
        &resolved.emitter,
        resolved.truncation,
        resolved.log_base,
    )?;
    let out = OptimumJson {
        omega_qe_opt_thz_over_2pi: rad_per_s_to_thz_over_2pi(report.omega_qe_opt),
        e_n_max: report.e_n_max,
        midpoint_offset_thz_over_2pi: rad_per_s_to_thz_over_2pi(report.midpoint_offset),
        deviates_from_midpoint: report.deviates_from_midpoint,
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&out).expect("optimum serializes")
    );
    Ok(out)
}

/// Shared helper for tests and the binary: a config JSON for one bundled
/// antenna at explicit settings.
pub fn table1_config_json(label: &str, pump_per_s: f64, theta_deg: f64, omega: &str) -> String {
    format!(
        r#"{{
  "antenna": "table1:{label}",
  "emitter": {{
    "omega_qe_thz_over_2pi": {omega},
    "theta_deg": {theta_deg},
    "pump_per_s": {pump_per_s}
  }}
}}"#
    )
}
