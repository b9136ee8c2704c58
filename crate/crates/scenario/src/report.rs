//! Writing a [`RunReport`] to disk.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Result, ScenarioError};
use crate::experiment::RunReport;

fn write(path: PathBuf, contents: &str) -> Result<()> {
    std::fs::write(&path, contents).map_err(|e| ScenarioError::Io { path, source: e })
}

/// Writes `metrics.csv`, one `psd_<tag>.dat` per spectrum and
/// `config.resolved`, all deterministic for a fixed config and seed. Run
/// metadata including wall time goes to `run_info.toml`.
pub fn emit_report(report: &RunReport, dir: impl AsRef<Path>, wall_time_s: Option<f64>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| ScenarioError::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut written = Vec::new();
    let p = dir.join("metrics.csv");
    write(p.clone(), &report.metrics_csv())?;
    written.push(p);
    for (tag, psd) in &report.spectra {
        let p = dir.join(format!("psd_{tag}.dat"));
        write(p.clone(), &psd.to_dat())?;
        written.push(p);
    }
    let p = dir.join("config.resolved");
    write(p.clone(), &report.resolved_config)?;
    written.push(p);
    let mut info = String::new();
    let _ = writeln!(info, "experiment = \"{}\"", report.experiment.as_str());
    let _ = writeln!(info, "seed = {}", report.seed);
    let _ = writeln!(info, "config_hash = \"{}\"", report.config_hash);
    let _ = writeln!(info, "rows = {}", report.rows.len());
    let _ = writeln!(info, "failed_rows = {}", report.failed_rows());
    if let Some(t) = wall_time_s {
        let _ = writeln!(info, "wall_time_s = {t:.3}");
    }
    let p = dir.join("run_info.toml");
    write(p.clone(), &info)?;
    written.push(p);
    Ok(written)
}
