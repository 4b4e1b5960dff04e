//! Residual scans: one row per grid point, plus named observed constants.

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// `None` for NaN.
pub fn point(x: f64) -> Option<f64> {
    if x.is_nan() {
        None
    } else {
        Some(x)
    }
}

/// Formats a number the way every CSV in this crate does.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{:.16e}", x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    pub grid_point: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

/// A named scalar extracted from a scan, with its own verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub name: String,
    pub value: f64,
    pub worst_point: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    /// The headline observed constant of the scan.
    pub observed: f64,
    pub worst_point: Option<f64>,
    pub pass: bool,
    pub skipped: usize,
    /// Set when the scanned domain is empty and the pass is vacuous.
    pub degenerate: bool,
    pub notes: Vec<String>,
    pub observations: Vec<Observation>,
    pub rows: Vec<Row>,
}

impl VerificationReport {
    pub fn new(name: impl Into<String>) -> Self {
        VerificationReport {
            name: name.into(),
            observed: f64::NAN,
            worst_point: None,
            pass: true,
            skipped: 0,
            degenerate: false,
            notes: Vec::new(),
            observations: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, name: impl Into<String>, grid_point: f64, lhs: f64, rhs: f64, margin: f64, pass: bool) {
        self.rows.push(Row {
            name: name.into(),
            grid_point,
            lhs,
            rhs,
            margin,
            pass,
        });
    }

    pub fn observe(&mut self, name: &str, value: f64, worst_point: Option<f64>, pass: bool) {
        self.observations.push(Observation {
            name: name.to_string(),
            value,
            worst_point,
            pass,
        });
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    pub fn observation(&self, name: &str) -> Option<&Observation> {
        self.observations.iter().find(|o| o.name == name)
    }

    /// Value of a named observation; panics if absent.
    pub fn value(&self, name: &str) -> f64 {
        self.observation(name)
            .unwrap_or_else(|| panic!("report {} has no observation {}", self.name, name))
            .value
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "grid_point", "lhs", "rhs", "margin", "pass"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.name.clone(),
                fmt_num(r.grid_point),
                fmt_num(r.lhs),
                fmt_num(r.rhs),
                fmt_num(r.margin),
                r.pass.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}
