//! Declarative parameter sweeps and the CSV tables they produce.
//!
//! A sweep is one or two axes over {pump, emitter frequency, dipole moment,
//! orientation}; grid points are computed independently on a rayon pool and
//! assembled in grid order, so the output is byte-identical no matter how
//! many workers run. Presets reproduce the figure-style scans: fig4
//! (pump × ω_qe), fig5 (dipole × ϑ), fig6a (ϑ scan), fig6b (pump scan across
//! all six bundled antennas), fig7 (pump scan with photon statistics).

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::rad_per_s_to_thz_over_2pi;
use crate::entangle::LogBase;
use crate::model::{table1, AntennaModel, EmitterModel};
use crate::observables::{antenna_for_dipole, solve_pipeline, ObservableRow, PipelineError};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep spec invalid: {0}")]
    InvalidSpec(String),
    #[error("output file {0} exists (use force to overwrite)")]
    OutputExists(PathBuf),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// Scannable quantities. Pump grids are logarithmic, the rest linear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisQuantity {
    Pump,
    OmegaQe,
    Dipole,
    ThetaDeg,
}

impl AxisQuantity {
    pub fn column_name(&self) -> &'static str {
        match self {
            AxisQuantity::Pump => "pump_per_s",
            AxisQuantity::OmegaQe => "omega_qe_thz_over_2pi",
            AxisQuantity::Dipole => "dipole_cm",
            AxisQuantity::ThetaDeg => "theta_deg",
        }
    }

    fn log_spaced(&self) -> bool {
        matches!(self, AxisQuantity::Pump)
    }

    /// Physical quantities that must stay positive on the grid.
    fn requires_positive(&self) -> bool {
        matches!(self, AxisQuantity::Pump | AxisQuantity::OmegaQe | AxisQuantity::Dipole)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub quantity: AxisQuantity,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl AxisSpec {
    fn validate(&self) -> Result<(), SweepError> {
        if self.points == 0 {
            return Err(SweepError::InvalidSpec("axis needs at least 1 point".into()));
        }
        if self.points == 1 && self.min != self.max {
            return Err(SweepError::InvalidSpec(
                "single-point axis requires min == max".into(),
            ));
        }
        if self.points > 1 && self.min >= self.max {
            return Err(SweepError::InvalidSpec("axis needs min < max".into()));
        }
        if self.quantity.requires_positive() && self.min <= 0.0 {
            return Err(SweepError::InvalidSpec(format!(
                "{} axis must be positive",
                self.quantity.column_name()
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        (0..self.points)
            .map(|i| {
                let f = i as f64 / (self.points - 1) as f64;
                if self.quantity.log_spaced() {
                    self.min * (self.max / self.min).powf(f)
                } else {
                    self.min + (self.max - self.min) * f
                }
            })
            .collect()
    }
}

/// One or two axes; values for the unswept quantities come from the emitter.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axes: Vec<AxisSpec>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), SweepError> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(SweepError::InvalidSpec(format!(
                "sweeps take 1 or 2 axes, got {}",
                self.axes.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for axis in &self.axes {
            axis.validate()?;
            if !seen.insert(axis.quantity.column_name()) {
                return Err(SweepError::InvalidSpec("duplicate axis quantity".into()));
            }
        }
        Ok(())
    }
}

/// A fully specified sweep over one or more antennas.
#[derive(Debug, Clone)]
pub struct SweepJob {
    pub antennas: Vec<AntennaModel>,
    pub emitter: EmitterModel,
    pub spec: SweepSpec,
    pub mode_levels: [usize; 2],
    pub log_base: LogBase,
}

/// One computed grid point.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub antenna_label: String,
    pub axis_values: Vec<f64>,
    pub row: ObservableRow,
}

/// Run every grid point of a job. Points are independent; `workers` bounds
/// the rayon pool (0 = rayon default). Output order is (antenna, grid) row
/// major and independent of the worker count.
pub fn run_sweep(job: &SweepJob, workers: usize) -> Result<Vec<SweepRow>, SweepError> {
    job.spec.validate()?;
    let grids: Vec<Vec<f64>> = job.spec.axes.iter().map(AxisSpec::grid).collect();
    let mut tasks: Vec<(usize, Vec<f64>)> = Vec::new();
    for (ai, _) in job.antennas.iter().enumerate() {
        match grids.len() {
            1 => {
                for &x in &grids[0] {
                    tasks.push((ai, vec![x]));
                }
            }
            _ => {
                for &x in &grids[0] {
                    for &y in &grids[1] {
                        tasks.push((ai, vec![x, y]));
                    }
                }
            }
        }
    }

    let compute = |(ai, values): &(usize, Vec<f64>)| -> Result<SweepRow, SweepError> {
        let antenna = &job.antennas[*ai];
        let mut emitter = job.emitter;
        let mut dipole = emitter.dipole_d;
        for (axis, &v) in job.spec.axes.iter().zip(values.iter()) {
            match axis.quantity {
                AxisQuantity::Pump => emitter.pump = v,
                AxisQuantity::OmegaQe => emitter.omega_qe = v,
                AxisQuantity::ThetaDeg => emitter.theta_deg = v,
                AxisQuantity::Dipole => dipole = v,
            }
        }
        emitter.dipole_d = dipole;
        let antenna = antenna_for_dipole(antenna, dipole);
        let row = solve_pipeline(&antenna, &emitter, job.mode_levels, job.log_base)?;
        Ok(SweepRow {
            antenna_label: job.antennas[*ai].label.clone(),
            axis_values: values.clone(),
            row,
        })
    };

    let results: Vec<Result<SweepRow, SweepError>> = if workers == 1 {
        tasks.iter().map(compute).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| SweepError::InvalidSpec(format!("worker pool: {e}")))?;
        pool.install(|| tasks.par_iter().map(compute).collect())
    };
    results.into_iter().collect()
}

/// Observables that sweeps can emit, in output order.
pub const OBSERVABLE_NAMES: &[&str] = &[
    "r_per_s",
    "r1_per_s",
    "r2_per_s",
    "n1",
    "n2",
    "p0",
    "p1",
    "p2",
    "log10_p1_over_p0",
    "log10_p2_over_p1",
    "e_n",
    "p_bell",
    "phi_star_rad",
    "p_10",
    "p_01",
    "p_e",
    "p_g",
    "residual",
    "discarded_weight",
];

/// Extract a named observable from a row.
pub fn observable_value(row: &ObservableRow, name: &str) -> Option<f64> {
    let v = match name {
        "r_per_s" => row.r_total,
        "r1_per_s" => row.r_mode[0],
        "r2_per_s" => row.r_mode[1],
        "n1" => row.n_mode[0],
        "n2" => row.n_mode[1],
        "p0" => row.p_total.first().copied().unwrap_or(0.0),
        "p1" => row.p_total.get(1).copied().unwrap_or(0.0),
        "p2" => row.p_total.get(2).copied().unwrap_or(0.0),
        "log10_p1_over_p0" => {
            let p0 = row.p_total.first().copied().unwrap_or(0.0);
            let p1 = row.p_total.get(1).copied().unwrap_or(0.0);
            (p1 / p0).log10()
        }
        "log10_p2_over_p1" => {
            let p1 = row.p_total.get(1).copied().unwrap_or(0.0);
            let p2 = row.p_total.get(2).copied().unwrap_or(0.0);
            (p2 / p1).log10()
        }
        "e_n" => row.e_n,
        "p_bell" => row.p_bell,
        "phi_star_rad" => row.phi_star,
        "p_10" => row.p_10,
        "p_01" => row.p_01,
        "p_e" => row.p_e,
        "p_g" => row.p_g,
        "residual" => row.residual,
        "discarded_weight" => row.discarded_weight,
        _ => return None,
    };
    Some(v)
}

/// The figure-style sweep presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig4,
    Fig5,
    Fig6a,
    Fig6b,
    Fig7,
}

impl Preset {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "fig4" => Some(Preset::Fig4),
            "fig5" => Some(Preset::Fig5),
            "fig6a" => Some(Preset::Fig6a),
            "fig6b" => Some(Preset::Fig6b),
            "fig7" => Some(Preset::Fig7),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6a => "fig6a",
            Preset::Fig6b => "fig6b",
            Preset::Fig7 => "fig7",
        }
    }

    /// Build the job for a preset around a configured antenna and emitter.
    /// Pump and orientation defaults come from the preset where the preset
    /// fixes them; the emitter's transition frequency must be resolved by
    /// the caller (most presets use the per-antenna optimum).
    pub fn job(
        &self,
        antenna: &AntennaModel,
        emitter: &EmitterModel,
        mode_levels: [usize; 2],
        log_base: LogBase,
    ) -> SweepJob {
        let mut emitter = *emitter;
        let (antennas, axes) = match self {
            Preset::Fig4 => {
                let span = antenna.modes[1].omega - antenna.modes[0].omega;
                (
                    vec![antenna.clone()],
                    vec![
                        AxisSpec {
                            quantity: AxisQuantity::Pump,
                            min: 1e7,
                            max: 1e10,
                            points: 21,
                        },
                        AxisSpec {
                            quantity: AxisQuantity::OmegaQe,
                            min: rad_per_s_to_thz_over_2pi(
                                antenna.modes[0].omega - 0.5 * span,
                            ),
                            max: rad_per_s_to_thz_over_2pi(
                                antenna.modes[1].omega + 0.5 * span,
                            ),
                            points: 41,
                        },
                    ],
                )
            }
            Preset::Fig5 => {
                emitter.pump = 1e9;
                (
                    vec![antenna.clone()],
                    vec![
                        AxisSpec {
                            quantity: AxisQuantity::Dipole,
                            min: 1e-30,
                            max: 3e-28,
                            points: 25,
                        },
                        AxisSpec {
                            quantity: AxisQuantity::ThetaDeg,
                            min: 0.0,
                            max: 180.0,
                            points: 19,
                        },
                    ],
                )
            }
            Preset::Fig6a => {
                emitter.pump = 1e8;
                (
                    vec![antenna.clone()],
                    vec![AxisSpec {
                        quantity: AxisQuantity::ThetaDeg,
                        min: 0.0,
                        max: 180.0,
                        points: 181,
                    }],
                )
            }
            Preset::Fig6b => (
                table1(),
                vec![AxisSpec {
                    quantity: AxisQuantity::Pump,
                    min: 1e7,
                    max: 1e10,
                    points: 25,
                }],
            ),
            Preset::Fig7 => (
                vec![antenna.clone()],
                vec![AxisSpec {
                    quantity: AxisQuantity::Pump,
                    min: 1e7,
                    max: 1e10,
                    points: 25,
                }],
            ),
        };
        // ω_qe axis values arrive in THz/2π; convert inside the runner.
        let mut axes = axes;
        for a in &mut axes {
            if a.quantity == AxisQuantity::OmegaQe {
                a.min = crate::constants::thz_over_2pi_to_rad_per_s(a.min);
                a.max = crate::constants::thz_over_2pi_to_rad_per_s(a.max);
            }
        }
        SweepJob {
            antennas,
            emitter,
            spec: SweepSpec { axes },
            mode_levels,
            log_base,
        }
    }
}

/// Serialized sweep output: one CSV per observable plus a manifest.
pub struct SweepOutput {
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool_version: &'a str,
    config_sha256: &'a str,
    preset: Option<&'a str>,
    axes: &'a [AxisSpec],
    antenna_labels: Vec<&'a str>,
    observables: &'a [String],
    workers: usize,
    wall_ms: u128,
    files: Vec<String>,
}

/// Write one CSV per observable into `out_dir`. Axis columns come first
/// (frequencies reported as ω/2π in THz), then an antenna column when the
/// job spans several antennas, then the observable value.
#[allow(clippy::too_many_arguments)]
pub fn write_sweep_outputs(
    job: &SweepJob,
    rows: &[SweepRow],
    observables: &[String],
    out_dir: &Path,
    config_sha256: &str,
    preset: Option<&str>,
    workers: usize,
    wall_ms: u128,
    force: bool,
) -> Result<SweepOutput, SweepError> {
    std::fs::create_dir_all(out_dir).map_err(|e| SweepError::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    let multi_antenna = job.antennas.len() > 1;
    let mut files = Vec::new();
    for obs in observables {
        let path = out_dir.join(format!("{obs}.csv"));
        if path.exists() && !force {
            return Err(SweepError::OutputExists(path));
        }
        let mut buf = String::new();
        for axis in &job.spec.axes {
            buf.push_str(axis.quantity.column_name());
            buf.push(',');
        }
        if multi_antenna {
            buf.push_str("antenna,");
        }
        buf.push_str(obs);
        buf.push('\n');
        for row in rows {
            for (axis, &v) in job.spec.axes.iter().zip(&row.axis_values) {
                let shown = if axis.quantity == AxisQuantity::OmegaQe {
                    rad_per_s_to_thz_over_2pi(v)
                } else {
                    v
                };
                buf.push_str(&format!("{shown},"));
            }
            if multi_antenna {
                buf.push_str(&row.antenna_label);
                buf.push(',');
            }
            let value = observable_value(&row.row, obs).unwrap_or(f64::NAN);
            buf.push_str(&format!("{value}\n"));
        }
        let mut f = std::fs::File::create(&path).map_err(|e| SweepError::Io {
            path: path.clone(),
            source: e,
        })?;
        f.write_all(buf.as_bytes()).map_err(|e| SweepError::Io {
            path: path.clone(),
            source: e,
        })?;
        files.push(path);
    }

    let manifest_path = out_dir.join("manifest.json");
    if manifest_path.exists() && !force {
        return Err(SweepError::OutputExists(manifest_path));
    }
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        config_sha256,
        preset,
        axes: &job.spec.axes,
        antenna_labels: job.antennas.iter().map(|a| a.label.as_str()).collect(),
        observables: &observables.to_vec(),
        workers,
        wall_ms,
        files: files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&manifest_path, json).map_err(|e| SweepError::Io {
        path: manifest_path.clone(),
        source: e,
    })?;
    Ok(SweepOutput {
        files,
        manifest: manifest_path,
    })
}
