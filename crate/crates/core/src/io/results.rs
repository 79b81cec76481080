//! CSV result tables and the run manifest.
//!
//! Floats are written in shortest round-trip form, so identical runs give
//! byte-identical files and reading a table back restores the exact values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::calibration::{CalibratedParam, CalibrationReport, SensitivityReport};
use crate::engine::{ScenarioRun, YearFrame};
use crate::error::{ModelError, Result};
use crate::policy::SweepRow;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub seeds: Vec<u64>,
    /// Scenario labels in output order; `<label>_mean.csv` holds the means.
    pub scenarios: Vec<String>,
    pub files: Vec<String>,
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| ModelError::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> ModelError {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    ModelError::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

/// One row per frame, one column per field after `year`.
pub fn frames_to_csv(frames: &[YearFrame]) -> String {
    let mut out = String::from("year");
    for f in YearFrame::FIELDS {
        out.push(',');
        out.push_str(f);
    }
    out.push('\n');
    for frame in frames {
        out.push_str(&frame.year.to_string());
        for v in frame.values() {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn read_frames_csv(path: &Path) -> Result<Vec<YearFrame>> {
    let text = std::fs::read_to_string(path).map_err(|e| ModelError::io(path, e))?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let expected: Vec<&str> = std::iter::once("year").chain(YearFrame::FIELDS.iter().copied()).collect();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(ModelError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "columns do not match the frame layout".into(),
        });
    }
    let mut frames = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let bad = |m: String| ModelError::Parse {
            path: path.to_path_buf(),
            line,
            message: m,
        };
        let year: i32 = record[0].parse().map_err(|_| bad(format!("bad year `{}`", &record[0])))?;
        let values = record
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>().map_err(|_| bad(format!("bad number `{v}`"))))
            .collect::<Result<Vec<f64>>>()?;
        frames.push(YearFrame::from_values(year, &values));
    }
    Ok(frames)
}

/// Writes mean, standard-error and per-replica tables for every run plus the
/// manifest. Returns the manifest.
pub fn write_results(
    runs: &[(String, &ScenarioRun)],
    config: &RunConfig,
    command: &str,
    dir: &Path,
) -> Result<Manifest> {
    if runs.is_empty() || runs.iter().any(|(_, r)| r.mean.is_empty()) {
        return Err(ModelError::Config("no simulated frames to write".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| ModelError::io(dir, e))?;
    let mut files = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        write_file(&dir.join(&name), body.as_bytes())?;
        files.push(name);
        Ok(())
    };
    for (label, run) in runs {
        put(format!("{label}_mean.csv"), frames_to_csv(&run.mean))?;
        put(format!("{label}_stderr.csv"), frames_to_csv(&run.std_err))?;
        for r in &run.replicas {
            put(format!("{label}_replica_{}.csv", r.seed), frames_to_csv(&r.frames))?;
        }
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        config: config.clone(),
        seeds: runs[0].1.replicas.iter().map(|r| r.seed).collect(),
        scenarios: runs.iter().map(|(l, _)| l.clone()).collect(),
        files,
    };
    write_manifest(&manifest, dir)?;
    Ok(manifest)
}

pub fn write_manifest(manifest: &Manifest, dir: &Path) -> Result<()> {
    let mut json = serde_json::to_string_pretty(manifest)
        .map_err(|e| ModelError::Config(e.to_string()))?;
    json.push('\n');
    write_file(&dir.join(MANIFEST_FILE), json.as_bytes())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| ModelError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| ModelError::Parse {
        path: path.clone(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Mean series of every scenario listed in the manifest of `dir`.
pub fn read_mean_results(dir: &Path) -> Result<Vec<(String, Vec<YearFrame>)>> {
    read_manifest(dir)?
        .scenarios
        .into_iter()
        .map(|label| {
            let frames = read_frames_csv(&dir.join(format!("{label}_mean.csv")))?;
            Ok((label, frames))
        })
        .collect()
}

const SWEEP_COLUMNS: [&str; 9] = [
    "theta",
    "year",
    "eps",
    "price",
    "mean_farm_size",
    "n_active",
    "subsidy_per_farmer",
    "subsidy_per_hectare",
    "subsidy_per_farmer_at_start",
];

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = SWEEP_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let cells = [
            r.theta.to_string(),
            r.year.to_string(),
            r.eps.to_string(),
            r.price.to_string(),
            r.mean_farm_size.to_string(),
            r.n_active.to_string(),
            r.subsidy_per_farmer.to_string(),
            r.subsidy_per_hectare.to_string(),
            r.subsidy_per_farmer_at_start.to_string(),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_sweep(rows: &[SweepRow], dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| ModelError::io(dir, e))?;
    let path = dir.join(SWEEP_FILE);
    write_file(&path, sweep_to_csv(rows).as_bytes())?;
    Ok(path)
}

pub fn read_sweep(path: &Path) -> Result<Vec<SweepRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| ModelError::io(path, e))?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != SWEEP_COLUMNS {
        return Err(ModelError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected columns `{}`", SWEEP_COLUMNS.join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let num = |i: usize| -> Result<f64> {
            record[i].parse().map_err(|_| ModelError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("bad number `{}` in column `{}`", &record[i], SWEEP_COLUMNS[i]),
            })
        };
        rows.push(SweepRow {
            theta: num(0)?,
            year: num(1)? as i32,
            eps: num(2)?,
            price: num(3)?,
            mean_farm_size: num(4)?,
            n_active: num(5)?,
            subsidy_per_farmer: num(6)?,
            subsidy_per_hectare: num(7)?,
            subsidy_per_farmer_at_start: num(8)?,
        });
    }
    Ok(rows)
}

/// `calibration.txt` (summary) and `calibration_samples.csv` (every point).
pub fn write_calibration_report(report: &CalibrationReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| ModelError::io(dir, e))?;
    let summary = dir.join("calibration.txt");
    write_file(&summary, report.summary().as_bytes())?;
    let mut table = String::from("index");
    for p in CalibratedParam::ALL {
        table.push(',');
        table.push_str(p.name());
    }
    table.push_str(",sse\n");
    for s in &report.samples {
        table.push_str(&s.index.to_string());
        for v in s.values {
            table.push(',');
            table.push_str(&v.to_string());
        }
        table.push(',');
        table.push_str(&s.sse.to_string());
        table.push('\n');
    }
    let samples = dir.join("calibration_samples.csv");
    write_file(&samples, table.as_bytes())?;
    Ok(vec![summary, samples])
}

/// `sensitivity.csv`: one row per parameter and factor, relative changes.
pub fn write_sensitivity(report: &SensitivityReport, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| ModelError::io(dir, e))?;
    let mut out = String::from("parameter,factor,year,eps,pesticide,farm_size\n");
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.parameter.name(),
            r.factor,
            report.year,
            r.eps,
            r.pesticide,
            r.farm_size
        ));
    }
    let path = dir.join("sensitivity.csv");
    write_file(&path, out.as_bytes())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_scenario;
    use crate::init::{SizeBin, SizeHistogram};
    use crate::params::ModelParams;
    use crate::policy::{ScenarioConfig, ScenarioKind};

    fn small_run(seed: u64) -> ScenarioRun {
        let h = SizeHistogram::new(vec![
            SizeBin { low: 1.0, high: 20.0, count: 100.0 },
            SizeBin { low: 20.0, high: 100.0, count: 150.0 },
            SizeBin { low: 100.0, high: 300.0, count: 20.0 },
        ])
        .unwrap();
        let p = ModelParams::default().scaled(300.0 / 300_000.0);
        run_scenario(&p, &ScenarioConfig::of_kind(ScenarioKind::Baseline), &h, &[seed, seed + 1])
            .unwrap()
    }

    #[test]
    fn frames_round_trip_exactly() {
        let run = small_run(3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        std::fs::write(&path, frames_to_csv(&run.mean)).unwrap();
        let back = read_frames_csv(&path).unwrap();
        assert_eq!(back.len(), 86);
        for (a, b) in back.iter().zip(&run.mean) {
            assert_eq!(a.year, b.year);
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
            }
        }
    }

    #[test]
    fn results_are_byte_stable() {
        let cfg = RunConfig::default();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let run1 = small_run(5);
        let run2 = small_run(5);
        let m = write_results(&[("baseline".into(), &run1)], &cfg, "run", a.path()).unwrap();
        write_results(&[("baseline".into(), &run2)], &cfg, "run", b.path()).unwrap();
        assert_eq!(m.files.len(), 4);
        for f in m.files.iter().map(String::as_str).chain([MANIFEST_FILE]) {
            let x = std::fs::read(a.path().join(f)).unwrap();
            let y = std::fs::read(b.path().join(f)).unwrap();
            assert_eq!(x, y, "{f}");
        }
        let mean = std::fs::read_to_string(a.path().join("baseline_mean.csv")).unwrap();
        assert_eq!(mean.lines().count(), 87);
    }

    #[test]
    fn manifest_echoes_config() {
        let mut cfg = RunConfig::default();
        cfg.model.gamma = 2.5;
        cfg.engine.replicas = 2;
        let dir = tempfile::tempdir().unwrap();
        let run = small_run(1);
        write_results(&[("baseline".into(), &run)], &cfg, "run", dir.path()).unwrap();
        let m = read_manifest(dir.path()).unwrap();
        assert_eq!(m.config, cfg);
        assert_eq!(m.seeds, vec![1, 2]);
        let text = std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
        let json: serde_json::Value = serde_json::from_str(&text).unwrap();
        let model = json["config"]["model"].as_object().unwrap();
        for key in ["n0", "alpha", "gamma", "beta", "upsilon_max", "rationing"] {
            assert!(model.contains_key(key), "{key}");
        }
        let means = read_mean_results(dir.path()).unwrap();
        assert_eq!(means[0].0, "baseline");
        assert_eq!(means[0].1.len(), 86);
    }

    #[test]
    fn sweep_round_trip() {
        let rows = vec![SweepRow {
            theta: 0.003,
            year: 2075,
            eps: 0.6,
            price: 70.0,
            mean_farm_size: 90.0,
            n_active: 11000.0,
            subsidy_per_farmer: 120.0,
            subsidy_per_hectare: 498.0,
            subsidy_per_farmer_at_start: 121.0,
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = write_sweep(&rows, dir.path()).unwrap();
        assert_eq!(read_sweep(&path).unwrap(), rows);
    }

    #[test]
    fn unwritable_path_fails() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let run = small_run(1);
        let e = write_results(&[("b".into(), &run)], &RunConfig::default(), "run", &blocker.join("sub"));
        assert!(matches!(e, Err(ModelError::Io { .. })));
    }
}
