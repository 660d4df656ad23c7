//! Command implementations behind the CLI: configuration ingestion, result
//! files and plot data.
//!
//! Data files (CSV, summaries, comparison results) are deterministic for a
//! given config. Only the atlas manifest carries a timestamp.
//!
//! The environment variable `QUBIT_PULSE_SEED` is reserved for future
//! stochastic features. Nothing reads it at present.

pub mod config;
pub mod svg;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::{build_atlas, classify, map_coordinates, regime_index, AtlasSpec, MapCoordinates, RegimeReport};
use crate::propagator::refine_to_tolerance;
use crate::qubit::{Complex2State, Unitary2};
use crate::regimes::{closed_form, RegimeKind};

pub use config::{AtlasConfig, OutputConfig, RunConfig, Thresholds, UNITS_NOTE};

pub const SEED_ENV_VAR: &str = "QUBIT_PULSE_SEED";

/// Fixed 17-significant-digit formatting for CSV cells.
pub fn format_real(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolveSummary {
    pub units_note: String,
    pub t_final: f64,
    pub steps: usize,
    pub error_estimate: f64,
    pub final_unitary: Unitary2,
    pub unitarity_defect: f64,
    pub initial_state: Complex2State,
    pub final_state: Complex2State,
    pub final_populations: [f64; 2],
    pub coordinates: Option<MapCoordinates>,
    pub report: Option<RegimeReport>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegimeComparison {
    pub regime: RegimeKind,
    pub applicable: bool,
    /// `null` when the regime's margin is infinite or unavailable.
    pub validity_margin: Option<f64>,
    /// Frobenius distance to the numerical propagator.
    pub matrix_error: Option<f64>,
    /// `|P2 closed - P2 numerical|` from the configured initial state.
    pub transfer_error: Option<f64>,
    /// Why the closed form could not be evaluated.
    pub unavailable: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NumericalReference {
    pub final_unitary: Unitary2,
    pub error_estimate: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonResult {
    pub units_note: String,
    pub ratio: f64,
    pub t_final: f64,
    pub coordinates: Option<MapCoordinates>,
    pub regimes: Vec<RegimeComparison>,
    pub numerical_reference: NumericalReference,
    /// `[t, P1, P2]` rows.
    pub time_series: Vec<[f64; 3]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifyOutput {
    pub units_note: String,
    pub coordinates: MapCoordinates,
    pub report: RegimeReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct AtlasManifest {
    pub units_note: String,
    pub generated_unix_seconds: u64,
    pub crate_version: String,
    pub jobs: usize,
    pub grid: AtlasSpec,
    pub cells: usize,
    pub invalid_cells: usize,
    pub nan_counts: Vec<(RegimeKind, usize)>,
    pub files: Vec<String>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn prepare_dir(out: &OutputConfig) -> Result<()> {
    fs::create_dir_all(&out.dir)?;
    Ok(())
}

fn units_note(cfg: Option<&String>) -> String {
    cfg.cloned().unwrap_or_else(|| UNITS_NOTE.to_string())
}

/// Map coordinates and report, or a note explaining why they are missing.
fn locate(cfg: &RunConfig) -> (Option<MapCoordinates>, Option<RegimeReport>, Vec<String>) {
    match classify(&cfg.system, &cfg.pulse, cfg.thresholds.ratio) {
        Ok(r) => (Some(r.coords), Some(r), Vec::new()),
        Err(e) => (map_coordinates(&cfg.system, &cfg.pulse).ok(), None, vec![format!("not classified: {e}")]),
    }
}

/// Propagate from the configured initial state and write
/// `<prefix>_timeseries.csv` and `<prefix>_summary.json`. Returns the paths
/// written.
pub fn cmd_evolve(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let t_final = cfg.t_final()?;
    let (record, estimate) = refine_to_tolerance(
        &cfg.system,
        &cfg.pulse,
        t_final,
        cfg.propagation.tolerance,
        &cfg.propagation,
        Some(&cfg.initial_state),
    )?;
    let states = record.states.as_deref().expect("initial state was supplied");
    prepare_dir(&cfg.output)?;

    let csv_path = cfg.output.path("timeseries.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["t", "re_a1", "im_a1", "re_a2", "im_a2", "p1", "p2"])?;
    for (t, s) in record.times.iter().zip(states) {
        let (p1, p2) = s.populations();
        let row = [*t, s.a1.re, s.a1.im, s.a2.re, s.a2.im, p1, p2];
        w.write_record(row.iter().map(|v| format_real(*v)))?;
    }
    w.flush()?;

    let u = record.final_propagator();
    let final_state = *states.last().expect("record is never empty");
    let (p1, p2) = final_state.populations();
    let (coordinates, report, notes) = locate(cfg);
    let summary = EvolveSummary {
        units_note: units_note(cfg.units_note.as_ref()),
        t_final,
        steps: record.steps,
        error_estimate: estimate,
        final_unitary: u,
        unitarity_defect: u.unitarity_defect(),
        initial_state: cfg.initial_state,
        final_state,
        final_populations: [p1, p2],
        coordinates,
        report,
        notes,
    };
    let json_path = cfg.output.path("summary.json");
    write_json(&json_path, &summary)?;
    Ok(vec![csv_path, json_path])
}

/// Evaluate the requested closed forms against a refined numerical
/// reference. Regimes outside their validity region are still evaluated
/// and flagged.
pub fn compare(cfg: &RunConfig) -> Result<ComparisonResult> {
    let t_final = cfg.t_final()?;
    let (record, estimate) = refine_to_tolerance(
        &cfg.system,
        &cfg.pulse,
        t_final,
        cfg.propagation.tolerance,
        &cfg.propagation,
        Some(&cfg.initial_state),
    )?;
    let exact = record.final_propagator();
    let exact_p2 = exact.mul_state(&cfg.initial_state).a2.norm_sqr();
    let (coordinates, report, _) = locate(cfg);
    let regimes = cfg
        .regimes()
        .into_iter()
        .map(|kind| {
            let (applicable, validity_margin) = match &report {
                Some(r) => (r.applies(kind), finite(r.margin(kind))),
                None => (false, None),
            };
            match closed_form(kind, &cfg.system, &cfg.pulse, t_final) {
                Ok(u) => RegimeComparison {
                    regime: kind,
                    applicable,
                    validity_margin,
                    matrix_error: finite(u.distance(&exact)),
                    transfer_error: finite((u.mul_state(&cfg.initial_state).a2.norm_sqr() - exact_p2).abs()),
                    unavailable: None,
                },
                Err(e) => RegimeComparison {
                    regime: kind,
                    applicable,
                    validity_margin,
                    matrix_error: None,
                    transfer_error: None,
                    unavailable: Some(e.to_string()),
                },
            }
        })
        .collect();
    let time_series = record
        .times
        .iter()
        .zip(record.states.as_deref().expect("initial state was supplied"))
        .map(|(t, s)| {
            let (p1, p2) = s.populations();
            [*t, p1, p2]
        })
        .collect();
    Ok(ComparisonResult {
        units_note: units_note(cfg.units_note.as_ref()),
        ratio: cfg.thresholds.ratio,
        t_final,
        coordinates,
        regimes,
        numerical_reference: NumericalReference { final_unitary: exact, error_estimate: estimate, steps: record.steps },
        time_series,
    })
}

/// Write `<prefix>_comparison.json`.
pub fn cmd_compare(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let result = compare(cfg)?;
    prepare_dir(&cfg.output)?;
    let path = cfg.output.path("comparison.json");
    write_json(&path, &result)?;
    Ok(vec![path])
}

/// Build the atlas and write one CSV (and optionally one SVG) per regime
/// plus `<prefix>_manifest.json`.
pub fn cmd_atlas(cfg: &AtlasConfig, jobs: usize) -> Result<Vec<PathBuf>> {
    let grid = build_atlas(&cfg.grid, jobs)?;
    prepare_dir(&cfg.output)?;
    let mut written = Vec::new();
    let mut nan_counts = Vec::new();
    for kind in RegimeKind::ALL {
        let i = regime_index(kind);
        let path = cfg.output.path(&format!("{kind}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["x", "y", "error", "transfer_error"])?;
        let mut nans = 0;
        for (x, y, cell) in grid.iter() {
            let (e, te) = (cell.matrix_errors[i], cell.transfer_errors[i]);
            nans += usize::from(e.is_nan());
            w.write_record([x, y, e, te].iter().map(|v| format_real(*v)))?;
        }
        w.flush()?;
        written.push(path);
        nan_counts.push((kind, nans));
        if cfg.output.svg {
            let path = cfg.output.path(&format!("{kind}.svg"));
            let field = grid.matrix_error_field(kind);
            fs::write(&path, svg::heatmap(kind.name(), &grid.x_axis, &grid.y_axis, &field))?;
            written.push(path);
        }
    }
    let manifest_path = cfg.output.path("manifest.json");
    let manifest = AtlasManifest {
        units_note: units_note(cfg.units_note.as_ref()),
        generated_unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        jobs,
        grid: cfg.grid.clone(),
        cells: cfg.grid.nx * cfg.grid.ny,
        invalid_cells: grid.invalid_count(),
        nan_counts,
        files: written
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
    };
    write_json(&manifest_path, &manifest)?;
    written.push(manifest_path);
    Ok(written)
}

pub fn classify_config(cfg: &RunConfig) -> Result<ClassifyOutput> {
    let report = classify(&cfg.system, &cfg.pulse, cfg.thresholds.ratio)?;
    Ok(ClassifyOutput { units_note: units_note(cfg.units_note.as_ref()), coordinates: report.coords, report })
}

/// Print the classification of the configured pulse as JSON.
pub fn cmd_classify(cfg: &RunConfig, out: &mut impl Write) -> Result<()> {
    let text = serde_json::to_string_pretty(&classify_config(cfg)?)?;
    writeln!(out, "{text}")?;
    Ok(())
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    exit_code: i32,
    message: String,
}

/// Machine-readable description of a failed command.
pub fn error_json(e: &Error) -> String {
    let body = ErrorBody { kind: e.kind(), exit_code: e.exit_code(), message: e.to_string() };
    serde_json::json!({ "error": body }).to_string()
}
