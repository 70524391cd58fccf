//! One-parameter gain studies. Each value is an independent run on its own
//! copy of the base scenario; runs execute on a rayon pool.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::{simulate, ControlLaw, RunMetrics, ScenarioConfig};

/// Env var capping sweep parallelism.
pub const THREADS_ENV: &str = "QUATTRACK_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Alpha,
    KQ,
    K1,
    KOmega,
    KDelta,
}

impl SweepParam {
    pub const ALL: [SweepParam; 5] = [
        SweepParam::Alpha,
        SweepParam::KQ,
        SweepParam::K1,
        SweepParam::KOmega,
        SweepParam::KDelta,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::KQ => "k_q",
            SweepParam::K1 => "k1",
            SweepParam::KOmega => "k_omega",
            SweepParam::KDelta => "k_delta",
        }
    }

    /// Copy of `base` with this parameter set to `value`.
    pub fn apply(&self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut cfg = base.clone();
        match self {
            SweepParam::Alpha => cfg.law.base_mut().alpha = value,
            SweepParam::KQ => cfg.law.base_mut().k_q = value,
            SweepParam::K1 => cfg.law.base_mut().k1 = value,
            SweepParam::KOmega => cfg.law.base_mut().k_omega = value,
            SweepParam::KDelta => match &mut cfg.law {
                ControlLaw::Robust(rg) => rg.k_delta = value,
                ControlLaw::NonRobust(_) => {
                    return Err(Error::invalid(
                        "param",
                        "k_delta needs a robust base config",
                    ))
                }
            },
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Self::ALL.iter().map(|p| p.name()).collect();
                Error::invalid(
                    "param",
                    format!("unknown `{s}`, expected one of {}", names.join(", ")),
                )
            })
    }
}

/// Parses a comma-separated list of numbers.
pub fn parse_values(list: &str) -> Result<Vec<f64>> {
    let values = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::invalid("values", format!("`{s}` is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::invalid("values", "empty list"));
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub metrics: RunMetrics,
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs one simulation per value. Rows come back in input order.
pub fn run_sweep(
    base: &ScenarioConfig,
    param: SweepParam,
    values: &[f64],
    threads: Option<usize>,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::invalid("values", "empty list"));
    }
    let configs = values
        .iter()
        .map(|&v| param.apply(base, v))
        .collect::<Result<Vec<_>>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::invalid("threads", e.to_string()))?;
    pool.install(|| {
        configs
            .par_iter()
            .zip(values.par_iter())
            .map(|(cfg, &value)| simulate(cfg).map(|(_, metrics)| SweepRow { value, metrics }))
            .collect()
    })
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    param: &'a str,
    value: f64,
    final_eq_norm: f64,
    final_ew_norm: f64,
    final_delta_err_norm: f64,
    rms_ew_20_40: Option<f64>,
    settle_time_eq: Option<f64>,
    vk1_monotonicity_violations: usize,
    max_unit_norm_drift: f64,
}

pub const SUMMARY_HEADER: [&str; 9] = [
    "param",
    "value",
    "final_eq_norm",
    "final_ew_norm",
    "final_delta_err_norm",
    "rms_ew_20_40",
    "settle_time_eq_1e-2",
    "vk1_monotonicity_violations",
    "max_unit_norm_drift",
];

pub fn write_summary(param: SweepParam, rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let to_err = |e: csv::Error| Error::io(path, std::io::Error::other(e.to_string()));
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(to_err)?;
    w.write_record(SUMMARY_HEADER).map_err(to_err)?;
    for r in rows {
        w.serialize(SummaryRow {
            param: param.name(),
            value: r.value,
            final_eq_norm: r.metrics.final_eq_norm,
            final_ew_norm: r.metrics.final_ew_norm,
            final_delta_err_norm: r.metrics.final_delta_err_norm,
            rms_ew_20_40: r.metrics.rms_ew,
            settle_time_eq: r.metrics.settle_time_eq,
            vk1_monotonicity_violations: r.metrics.vk1_monotonicity_violations,
            max_unit_norm_drift: r.metrics.max_unit_norm_drift,
        })
        .map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
