//! CSV emission and the run manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use kerrloss::{validate, DensityOperator, ScalarField, TimeSeries};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";
pub const WIGNER_CONVENTION: &str = "W(b) = (2/pi) Tr[rho D(b) P D(b)^dag], integral 1, vacuum peak 2/pi";
pub const QUADRATURE_CONVENTION: &str = "x = (a + a^dag)/sqrt(2), vacuum variance 1/2";

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn write_rows(path: &Path, header: &str, rows: impl Iterator<Item = Vec<String>>) -> Result<usize, CliError> {
    let io = |e| CliError::Io(path.to_path_buf(), e);
    let mut w = create(path)?;
    writeln!(w, "{header}").map_err(io)?;
    let mut n = 0;
    for row in rows {
        writeln!(w, "{}", row.join(",")).map_err(io)?;
        n += 1;
    }
    w.flush().map_err(io)?;
    Ok(n)
}

/// `re,im,value`, row-major with the real part outer.
pub fn write_field(path: &Path, field: &ScalarField) -> Result<usize, CliError> {
    let rows = field
        .grid
        .points()
        .zip(&field.values)
        .map(|(p, v)| vec![num(p.re), num(p.im), num(*v)]);
    write_rows(path, "re,im,value", rows)
}

/// `t,value`.
pub fn write_series(path: &Path, s: &TimeSeries) -> Result<usize, CliError> {
    write_rows(path, "t,value", s.t.iter().zip(&s.values).map(|(t, v)| vec![num(*t), num(*v)]))
}

/// `t,max_abs_diff,trace_defect`.
pub fn write_comparison(path: &Path, rows: &[(f64, f64, f64)]) -> Result<usize, CliError> {
    write_rows(
        path,
        "t,max_abs_diff,trace_defect",
        rows.iter().map(|(t, d, tr)| vec![num(*t), num(*d), num(*tr)]),
    )
}

/// Any CSV with a caller-chosen header; cells are written as given.
pub fn write_table(path: &Path, header: &str, rows: Vec<Vec<String>>) -> Result<usize, CliError> {
    write_rows(path, header, rows.into_iter())
}

pub fn cell(x: f64) -> String {
    num(x)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OutputRecord {
    pub path: String,
    pub schema: &'static str,
    pub rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage_ok: Option<bool>,
}

/// Worst defects over every state checked during a run.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ValidationSummary {
    pub states_checked: usize,
    pub max_trace_defect: f64,
    pub max_hermiticity_defect: f64,
    pub max_positivity_defect: f64,
    pub tolerance: f64,
}

impl ValidationSummary {
    pub fn new(tolerance: f64) -> Self {
        Self {
            states_checked: 0,
            max_trace_defect: 0.0,
            max_hermiticity_defect: 0.0,
            max_positivity_defect: 0.0,
            tolerance,
        }
    }

    pub fn check<D: DensityOperator + ?Sized>(&mut self, rho: &D) {
        let d = validate(rho);
        self.states_checked += 1;
        self.max_trace_defect = self.max_trace_defect.max(d.trace_defect);
        self.max_hermiticity_defect = self.max_hermiticity_defect.max(d.hermiticity_defect);
        self.max_positivity_defect = self.max_positivity_defect.max(d.positivity_defect());
    }

    pub fn worst(&self) -> f64 {
        self.max_trace_defect.max(self.max_hermiticity_defect).max(self.max_positivity_defect)
    }

    pub fn passed(&self) -> bool {
        self.worst() <= self.tolerance
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub messages: Vec<String>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Conventions {
    pub wigner: &'static str,
    pub quadrature: &'static str,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RunManifest {
    pub status: &'static str,
    pub scenario: Option<String>,
    pub version: &'static str,
    pub config: Map<String, Value>,
    pub duration_seconds: f64,
    pub conventions: Conventions,
    pub outputs: Vec<OutputRecord>,
    pub validation: Option<ValidationSummary>,
    pub results: Map<String, Value>,
    pub warnings: Vec<String>,
    pub error: Option<ErrorRecord>,
}

impl RunManifest {
    pub fn new(scenario: Option<String>, config: Map<String, Value>) -> Self {
        Self {
            status: "ok",
            scenario,
            version: env!("CARGO_PKG_VERSION"),
            config,
            duration_seconds: 0.0,
            conventions: Conventions {
                wigner: WIGNER_CONVENTION,
                quadrature: QUADRATURE_CONVENTION,
            },
            outputs: Vec::new(),
            validation: None,
            results: Map::new(),
            warnings: Vec::new(),
            error: None,
        }
    }

    pub fn fail(&mut self, e: &CliError) {
        self.status = "error";
        self.error = Some(ErrorRecord {
            kind: e.kind(),
            messages: e.messages(),
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest is plain data")
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(MANIFEST_NAME);
        std::fs::write(&path, self.to_json() + "\n").map_err(|e| CliError::Io(path.clone(), e))?;
        Ok(path)
    }
}
