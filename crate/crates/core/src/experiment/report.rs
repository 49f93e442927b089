//! Structured run output and its JSON / CSV encodings.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::scenario::{Method, Mode};
use crate::angles::{FriedrichsResult, FriedrichsRoute};
use crate::error::Result;
use crate::projmethods::IterationTrace;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(format!("unknown format '{other}', expected json or csv")),
        }
    }
}

/// One Friedrichs-number route: either a value or the reason it was refused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteOutcome {
    pub route: FriedrichsRoute,
    pub value: Option<f64>,
    pub raw: Option<f64>,
    pub degenerate: Option<bool>,
    pub error: Option<String>,
}

impl RouteOutcome {
    pub fn from_result(route: FriedrichsRoute, res: crate::Result<FriedrichsResult>) -> Self {
        match res {
            Ok(f) => RouteOutcome {
                route,
                value: Some(f.value),
                raw: Some(f.raw),
                degenerate: Some(f.degenerate),
                error: None,
            },
            Err(e) => RouteOutcome {
                route,
                value: None,
                raw: None,
                degenerate: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub start_index: usize,
    pub start: Vec<f64>,
    pub errors: Vec<f64>,
    pub bounds: Vec<f64>,
    /// `max_k (errors[k] − bounds[k])`.
    pub max_violation: f64,
}

impl TraceSummary {
    pub fn new(start_index: usize, trace: IterationTrace) -> Self {
        let max_violation = trace.max_violation();
        TraceSummary {
            start_index,
            start: trace.start,
            errors: trace.errors,
            bounds: trace.bounds,
            max_violation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    /// Scenario check name (see [`Check::name`](super::scenario::Check::name)) or suite property name.
    pub check: String,
    /// Which facet of the check, e.g. `validity` or `tightness` for bounds.
    pub property: String,
    pub passed: bool,
    /// Worst residual observed; absent when the computation itself failed.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: Option<u64>,
    pub mode: Mode,
    pub method: Method,
    pub ambient_dim: usize,
    pub r: usize,
    pub k_max: usize,
    pub tolerances: Tolerances,
    /// Only filled when timing was requested; keeps reports byte-stable.
    pub wall_time_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario_name: String,
    pub friedrichs: Vec<RouteOutcome>,
    /// Optimal simultaneous rate `(r−1)/r · cos + 1/r`.
    pub q: Option<f64>,
    /// Per-sweep contraction `‖∏ P_{M_i ∩ M^⊥}‖` of the cyclic method.
    pub cyclic_rate: Option<f64>,
    /// `‖T^k − P_M‖` for `k = 1..=k_max` and the scenario's method.
    pub error_norms: Vec<f64>,
    /// Worst adjacent residuals of the norm chain over `k = 1..=k_max`.
    pub chain_residuals: Option<[f64; 5]>,
    pub traces: Vec<TraceSummary>,
    pub check_outcomes: Vec<CheckOutcome>,
    /// Set when the scenario could not be run, e.g. disjoint affine subspaces.
    pub error: Option<String>,
    pub metadata: Metadata,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.error.is_none() && self.check_outcomes.iter().all(|c| c.passed)
    }

    pub fn from_json(text: &str) -> Result<Report> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    scenario: &'a str,
    start_index: usize,
    k: usize,
    error: f64,
    bound: f64,
    ratio: Option<f64>,
}

/// Encode a report. JSON is the complete document; CSV has one row per
/// `(start, k)` with an empty ratio cell where the bound is 0.
pub fn render_report(rep: &Report, fmt: Format) -> Result<Vec<u8>> {
    match fmt {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(rep)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(Vec::new());
            w.write_record(["scenario", "start_index", "k", "error", "bound", "ratio"])?;
            for t in &rep.traces {
                for (k, (&error, &bound)) in t.errors.iter().zip(&t.bounds).enumerate() {
                    w.serialize(CsvRow {
                        scenario: &rep.scenario_name,
                        start_index: t.start_index,
                        k,
                        error,
                        bound,
                        ratio: (bound != 0.0).then(|| error / bound),
                    })?;
                }
            }
            w.into_inner()
                .map_err(|e| crate::Error::Io(e.into_error()))
        }
    }
}

pub fn emit_report(rep: &Report, fmt: Format, path: &Path) -> Result<()> {
    std::fs::write(path, render_report(rep, fmt)?)?;
    Ok(())
}
