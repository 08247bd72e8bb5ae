//! Reports and their json, csv and text renderings.
//!
//! JSON schema (field order is fixed):
//!
//! ```text
//! {
//!   "experiment": string,
//!   "config": { key: string, ... },
//!   "checks": [ {
//!       "experiment": string,
//!       "id": string,
//!       "computed": number | null,
//!       "expected": number | null,
//!       "provenance": "published" | "trivial" | "derived",
//!       "comparison": "absolute" | "relative" | "at_most" | "at_least",
//!       "tolerance": number,
//!       "pass": bool
//!   }, ... ],
//!   "notes": [ string, ... ],
//!   "wall_time_s": number
//! }
//! ```
//!
//! Numbers carry 17 significant digits; non-finite values become `null`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::error::Result;

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// A value stated in the published source.
    Published,
    /// Forced by definitions alone.
    Trivial,
    /// Computed independently here.
    Derived,
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Provenance::Published => "published",
            Provenance::Trivial => "trivial",
            Provenance::Derived => "derived",
        }
    }
}

/// How `computed` is judged against `expected` and `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|computed − expected| ≤ tol`
    Absolute,
    /// `|computed − expected| ≤ tol·|expected|`
    Relative,
    /// `computed ≤ tol` (`expected` is the ideal value, usually 0)
    AtMost,
    /// `computed ≥ tol`
    AtLeast,
}

impl Comparison {
    pub fn label(self) -> &'static str {
        match self {
            Comparison::Absolute => "abs",
            Comparison::Relative => "rel",
            Comparison::AtMost => "max",
            Comparison::AtLeast => "min",
        }
    }

    pub fn judge(self, computed: f64, expected: f64, tol: f64) -> bool {
        let ok = match self {
            Comparison::Absolute => (computed - expected).abs() <= tol,
            Comparison::Relative => (computed - expected).abs() <= tol * expected.abs(),
            Comparison::AtMost => computed <= tol,
            Comparison::AtLeast => computed >= tol,
        };
        ok && computed.is_finite()
    }
}

mod sig17 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if !x.is_finite() {
            return s.serialize_none();
        }
        let n: serde_json::Number = format!("{x:.16e}").parse().map_err(serde::ser::Error::custom)?;
        serde::Serialize::serialize(&n, s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub experiment: String,
    pub id: String,
    #[serde(with = "sig17")]
    pub computed: f64,
    #[serde(with = "sig17")]
    pub expected: f64,
    pub provenance: Provenance,
    pub comparison: Comparison,
    #[serde(with = "sig17")]
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub config: std::collections::BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    #[serde(with = "sig17")]
    pub wall_time_s: f64,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["experiment", "check_id", "computed", "expected", "provenance", "tolerance", "pass"])?;
        for c in &self.checks {
            w.write_record([
                c.experiment.clone(),
                c.id.clone(),
                format!("{:.16e}", c.computed),
                format!("{:.16e}", c.expected),
                c.provenance.label().to_string(),
                format!("{:.16e}", c.tolerance),
                c.pass.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// One line per check; failures start with `FAIL`.
    pub fn to_text(&self) -> String {
        let mut s = format!("experiment {}\n", self.experiment);
        for c in &self.checks {
            s += &format!(
                "{} {} computed={:.16e} expected={:.16e} tol={:e} ({}) [{}]\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.id,
                c.computed,
                c.expected,
                c.tolerance,
                c.comparison.label(),
                c.provenance.label(),
            );
        }
        for n in &self.notes {
            s += &format!("note {n}\n");
        }
        let failed = self.failures().count();
        s += &format!(
            "{} of {} checks passed in {:.2} s\n",
            self.checks.len() - failed,
            self.checks.len(),
            self.wall_time_s
        );
        s
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
            Format::Text => Ok(self.to_text()),
        }
    }

    pub fn emit(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        out.write_all(self.render(format)?.as_bytes())?;
        Ok(())
    }
}
