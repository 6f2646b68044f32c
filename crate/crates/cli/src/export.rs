//! Deterministic file exports: error-report CSV/JSON, per-step time series,
//! field snapshots as legacy VTK, and the JSON artifacts that let `export`
//! re-render files without re-running anything.

use crate::config::ScenarioConfig;
use crate::report::ErrorReport;
use crate::scenario::SimSetup;
use crate::CliError;
use fracflow_core::timestepper::RunResult;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Output root: the `FRACFLOW_OUT` environment variable overrides both the
/// config value and any `--out` flag.
pub fn resolve_out_dir(config_dir: &str, flag: Option<&str>) -> PathBuf {
    if let Ok(env) = std::env::var("FRACFLOW_OUT") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    PathBuf::from(flag.unwrap_or(config_dir))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::Io(format!("creating {}: {e}", parent.display())))?;
    }
    let mut f = fs::File::create(path)
        .map_err(|e| CliError::Io(format!("creating {}: {e}", path.display())))?;
    f.write_all(bytes)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
    Ok(())
}

/// One CSV per mode with the pinned header, plus the full JSON report.
pub fn export_report(report: &ErrorReport, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for (mode, csv) in report.csv_per_mode() {
        let path = dir.join(format!("errors_{mode}.csv"));
        write_atomic(&path, csv.as_bytes())?;
        written.push(path);
    }
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Io(format!("serializing report: {e}")))?;
    let path = dir.join("report.json");
    write_atomic(&path, json.as_bytes())?;
    written.push(path);
    Ok(written)
}

/// Per-step diagnostics: time, iterations, total b-mass and per-continuum
/// pressure ranges.
pub fn export_timeseries(
    result: &RunResult,
    dir: &Path,
    filename: &str,
) -> Result<PathBuf, CliError> {
    let mut csv = String::from(
        "t,iterations,total_mass,matrix_min,matrix_mean,matrix_max,fracture_min,fracture_mean,fracture_max,vug_min,vug_mean,vug_max\n",
    );
    for d in &result.diagnostics {
        csv.push_str(&format!("{},{},{}", d.time, d.iterations, d.total_mass));
        for (min, mean, max) in &d.pressure_range {
            csv.push_str(&format!(",{min},{mean},{max}"));
        }
        csv.push('\n');
    }
    let path = dir.join(filename);
    write_atomic(&path, csv.as_bytes())?;
    Ok(path)
}

/// Field snapshots kept for later export: the owning config (to rebuild the
/// mesh deterministically) plus the raw nodal values per requested day.
#[derive(Debug, Serialize, Deserialize)]
pub struct FieldsArtifact {
    pub config: ScenarioConfig,
    pub mode: String,
    pub days: Vec<f64>,
    /// continuum-major nodal values, one vector per day
    pub values: Vec<Vec<f64>>,
}

pub fn save_fields_artifact(artifact: &FieldsArtifact, dir: &Path) -> Result<PathBuf, CliError> {
    let json = serde_json::to_string(artifact)
        .map_err(|e| CliError::Io(format!("serializing fields: {e}")))?;
    let path = dir.join("fields.json");
    write_atomic(&path, json.as_bytes())?;
    Ok(path)
}

pub fn load_fields_artifact(path: &Path) -> Result<FieldsArtifact, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Io(format!("parsing {}: {e}", path.display())))
}

/// Render one legacy-VTK file per stored day.
pub fn export_fields_vtk(artifact: &FieldsArtifact, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let setup = SimSetup::build(artifact.config.clone())?;
    let names = ["pressure_matrix", "pressure_fracture", "pressure_vug"];
    let mut written = Vec::new();
    for (day, values) in artifact.days.iter().zip(&artifact.values) {
        let mut buf = Vec::new();
        fracflow_core::vtk::write_fields(&mut buf, &setup.mesh, &names, values)
            .map_err(|e| CliError::Io(format!("vtk: {e}")))?;
        let path = dir.join(format!("fields_{}_day{}.vtk", artifact.mode, fmt_day(*day)));
        write_atomic(&path, &buf)?;
        written.push(path);
    }
    Ok(written)
}

/// Mesh + coarse-block export.
pub fn export_mesh_vtk(setup: &SimSetup, dir: &Path) -> Result<PathBuf, CliError> {
    let mut buf = Vec::new();
    fracflow_core::vtk::write_mesh(&mut buf, &setup.mesh, Some(&setup.grid))
        .map_err(|e| CliError::Io(format!("vtk: {e}")))?;
    let path = dir.join("mesh.vtk");
    write_atomic(&path, &buf)?;
    Ok(path)
}

/// Per-neighborhood eigenvalues for spectral-gap diagnostics.
pub fn export_eigenvalues_csv(
    eigenvalues: &[Vec<f64>],
    dir: &Path,
) -> Result<PathBuf, CliError> {
    let mut csv = String::from("neighborhood,k,lambda\n");
    for (g, vals) in eigenvalues.iter().enumerate() {
        for (k, v) in vals.iter().enumerate() {
            csv.push_str(&format!("{g},{k},{v}\n"));
        }
    }
    let path = dir.join("eigenvalues.csv");
    write_atomic(&path, csv.as_bytes())?;
    Ok(path)
}

fn fmt_day(day: f64) -> String {
    if day == day.trunc() {
        format!("{}", day as i64)
    } else {
        format!("{day}").replace('.', "p")
    }
}

pub fn load_report(path: &Path) -> Result<ErrorReport, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Io(format!("parsing {}: {e}", path.display())))
}
