//! Run configuration, reference data, result files and charts.

mod charts;
mod config;
mod reference;
mod results;

pub use charts::{render_scenario_chart, render_sweep_chart};
pub use config::{EngineConfig, PathsConfig, RunConfig, CONFIG_ENV};
pub use reference::{
    load_histogram, load_reference_data, ReferenceData, BIODIVERSITY_FILE, CENSUS_FILE,
    PESTICIDE_FILE, PRICE_INDEX_FILE, YIELD_FILE,
};
pub use results::{
    frames_to_csv, read_frames_csv, read_manifest, read_mean_results, read_sweep,
    sweep_to_csv, write_calibration_report, write_manifest, write_results, write_sensitivity,
    write_sweep, Manifest, MANIFEST_FILE, SWEEP_FILE,
};

/// Writes an SVG document, creating parent directories.
pub fn write_svg(path: &std::path::Path, svg: &str) -> crate::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| crate::ModelError::io(parent, e))?;
    }
    std::fs::write(path, svg).map_err(|e| crate::ModelError::io(path, e))
}
