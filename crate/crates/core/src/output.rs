//! Trace, metrics and plot-data files.
//!
//! CSV files have a single header line, fixed column order and
//! period-decimal floats in shortest round-trip form. Quaternions are
//! written scalar first.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::{RunMetrics, SimulationTrace, TraceRecord};

pub const TRACE_HEADER: [&str; 18] = [
    "t", "qw", "qx", "qy", "qz", "wx", "wy", "wz", "eq_norm", "ew_norm", "dhx", "dhy", "dhz",
    "taux", "tauy", "tauz", "Vk1", "Vaux",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceFormat {
    #[default]
    Csv,
    Json,
}

impl TraceFormat {
    pub fn file_name(&self) -> &'static str {
        match self {
            TraceFormat::Csv => "trace.csv",
            TraceFormat::Json => "trace.json",
        }
    }
}

#[derive(Serialize)]
struct TraceRow {
    t: f64,
    qw: f64,
    qx: f64,
    qy: f64,
    qz: f64,
    wx: f64,
    wy: f64,
    wz: f64,
    eq_norm: f64,
    ew_norm: f64,
    dhx: f64,
    dhy: f64,
    dhz: f64,
    taux: f64,
    tauy: f64,
    tauz: f64,
    #[serde(rename = "Vk1")]
    vk1: f64,
    #[serde(rename = "Vaux")]
    vaux: f64,
}

impl From<&TraceRecord> for TraceRow {
    fn from(r: &TraceRecord) -> Self {
        Self {
            t: r.t,
            qw: r.q.s,
            qx: r.q.v.x,
            qy: r.q.v.y,
            qz: r.q.v.z,
            wx: r.omega.x,
            wy: r.omega.y,
            wz: r.omega.z,
            eq_norm: r.e_q.norm(),
            ew_norm: r.e_omega.norm(),
            dhx: r.delta_hat.x,
            dhy: r.delta_hat.y,
            dhz: r.delta_hat.z,
            taux: r.tau.x,
            tauy: r.tau.y,
            tauz: r.tau.z,
            vk1: r.vk1,
            vaux: r.vaux,
        }
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Writes rows under an explicit header.
fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: Serialize,
{
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(create(path)?);
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_trace_csv(trace: &SimulationTrace, path: impl AsRef<Path>) -> Result<()> {
    write_csv(
        path.as_ref(),
        &TRACE_HEADER,
        trace.records.iter().map(TraceRow::from),
    )
}

pub fn write_trace_json(trace: &SimulationTrace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let rows: Vec<TraceRow> = trace.records.iter().map(TraceRow::from).collect();
    let mut f = create(path)?;
    serde_json::to_writer(&mut f, &rows).map_err(|e| Error::io(path, e.into()))?;
    f.write_all(b"\n")
        .and_then(|_| f.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_trace(
    trace: &SimulationTrace,
    dir: impl AsRef<Path>,
    format: TraceFormat,
) -> Result<()> {
    let path = dir.as_ref().join(format.file_name());
    match format {
        TraceFormat::Csv => write_trace_csv(trace, path),
        TraceFormat::Json => write_trace_json(trace, path),
    }
}

/// Serialized form of [`RunMetrics`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub final_eq_norm: f64,
    pub final_ew_norm: f64,
    pub final_delta_err_norm: f64,
    pub rms_ew_20_40: Option<f64>,
    pub rms_window: [f64; 2],
    #[serde(rename = "settle_time_eq_1e-2")]
    pub settle_time_eq: Option<f64>,
    pub vk1_monotonicity_violations: usize,
    pub starts_in_certified_region: Option<bool>,
    pub region_entry_time: Option<f64>,
    pub region_exits: usize,
    pub m_epsilon_exits: usize,
    pub max_unit_norm_drift: f64,
    pub left_h0: bool,
    /// Non-robust over robust RMS rate error, set by the comparison study.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rms_ew_ratio_nonrobust_over_robust: Option<f64>,
}

impl From<&RunMetrics> for MetricsReport {
    fn from(m: &RunMetrics) -> Self {
        Self {
            final_eq_norm: m.final_eq_norm,
            final_ew_norm: m.final_ew_norm,
            final_delta_err_norm: m.final_delta_err_norm,
            rms_ew_20_40: m.rms_ew,
            rms_window: [m.rms_window.0, m.rms_window.1],
            settle_time_eq: m.settle_time_eq,
            vk1_monotonicity_violations: m.vk1_monotonicity_violations,
            starts_in_certified_region: m.starts_in_region,
            region_entry_time: m.region_entry_time,
            region_exits: m.region_exits,
            m_epsilon_exits: m.m_epsilon_exits,
            max_unit_norm_drift: m.max_unit_norm_drift,
            left_h0: m.left_h0,
            rms_ew_ratio_nonrobust_over_robust: None,
        }
    }
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Per-panel series: attitude error, rate error and disturbance error
/// `delta(t) - delta_hat(t)`. Returns the written file names.
pub fn write_plot_data(trace: &SimulationTrace, dir: impl AsRef<Path>) -> Result<Vec<String>> {
    let dir = dir.as_ref();
    let recs = &trace.records;
    let files = [
        "attitude_error.csv",
        "velocity_error.csv",
        "disturbance_error.csv",
    ];
    write_csv(
        &dir.join(files[0]),
        &["t", "eq_s", "eq_x", "eq_y", "eq_z", "eq_norm"],
        recs.iter()
            .map(|r| (r.t, r.e_q.s, r.e_q.v.x, r.e_q.v.y, r.e_q.v.z, r.e_q.norm())),
    )?;
    write_csv(
        &dir.join(files[1]),
        &["t", "ew_x", "ew_y", "ew_z", "ew_norm"],
        recs.iter()
            .map(|r| (r.t, r.e_omega.x, r.e_omega.y, r.e_omega.z, r.e_omega.norm())),
    )?;
    write_csv(
        &dir.join(files[2]),
        &["t", "ed_x", "ed_y", "ed_z", "ed_norm"],
        recs.iter().map(|r| {
            let d = r.delta_error();
            (r.t, d.x, d.y, d.z, d.norm())
        }),
    )?;
    Ok(files.iter().map(|s| s.to_string()).collect())
}

/// Rate-error norms of a robust and a non-robust run on the same time grid.
pub fn write_velocity_comparison(
    robust: &SimulationTrace,
    non_robust: &SimulationTrace,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_csv(
        path.as_ref(),
        &["t", "ew_norm_robust", "ew_norm_nonrobust"],
        robust
            .records
            .iter()
            .zip(&non_robust.records)
            .map(|(a, b)| (a.t, a.e_omega.norm(), b.e_omega.norm())),
    )
}
