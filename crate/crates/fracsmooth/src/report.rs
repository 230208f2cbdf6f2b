//! Report schema: verification rows with fixed CSV columns and a JSON mirror.
//!
//! Rows are the atomic output of every check: two sides of a comparison with
//! error bars, a mechanical verdict, and the named parameters that produced
//! them.  The CSV column set is stable:
//!
//! ```text
//! check_name,case,params,lhs,lhs_err,rhs,rhs_err,verdict,margin,note
//! ```
//!
//! Numeric rendering uses the shortest round-trip float form, so re-running
//! with the same configuration reproduces the numeric columns byte for byte.
//! Run metadata (including the timestamp, which is excluded from the
//! determinism contract) is emitted on `#`-prefixed comment lines.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Version of the report layout, bumped on any column change.
pub const SCHEMA_VERSION: u32 = 1;

/// Outcome of a single check row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// The asserted comparison holds outright.
    Pass,
    /// The comparison holds within four combined standard errors.
    PassWithinError,
    /// The asserted comparison fails beyond the error allowance.
    Fail,
    /// The bound is trivially saturated (no evidence either way).
    Vacuous,
    /// Informational row; never affects exit status.
    Report,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::PassWithinError => "pass-within-error",
            Verdict::Fail => "fail",
            Verdict::Vacuous => "vacuous",
            Verdict::Report => "report",
        }
    }

    /// Verdicts that count as success for exit-status purposes.
    pub fn is_ok(self) -> bool {
        !matches!(self, Verdict::Fail)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One verification row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub case: String,
    /// Named numeric parameters (sorted by key for stable rendering).
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub lhs_err: f64,
    pub rhs: f64,
    pub rhs_err: f64,
    pub verdict: Verdict,
    /// `rhs - lhs`; positive when the bound holds with room.
    pub margin: f64,
    pub note: String,
}

impl CheckRow {
    /// Flattens the parameter map to `key=value;key=value`.
    pub fn params_string(&self) -> String {
        self.params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }

    /// A stable sort key: check name, then case, then parameters.
    pub fn sort_key(&self) -> (String, String, String) {
        (
            self.check.clone(),
            self.case.clone(),
            self.params_string(),
        )
    }
}

/// Run provenance; the timestamp is excluded from determinism comparisons.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool_version: String,
    pub seed: u64,
    pub samples: usize,
    pub generated_unix: u64,
}

/// A full report: metadata plus sorted rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub metadata: RunMetadata,
    pub rows: Vec<CheckRow>,
}

impl Report {
    pub fn new(seed: u64, samples: usize) -> Self {
        let generated_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Report {
            schema_version: SCHEMA_VERSION,
            metadata: RunMetadata {
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                seed,
                samples,
                generated_unix,
            },
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: CheckRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = CheckRow>) {
        self.rows.extend(rows);
    }

    /// Sorts rows by (check, case, params) so that parallel generation
    /// order never leaks into the output.
    pub fn sort_rows(&mut self) {
        self.rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    }

    pub fn failures(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.verdict == Verdict::Fail)
            .count()
    }

    /// True when no asserted row failed (vacuous/report rows never count).
    pub fn all_ok(&self) -> bool {
        self.failures() == 0
    }

    /// Renders the CSV form: comment header, column names, then rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# fracsmooth report schema {} version {}\n",
            self.schema_version, self.metadata.tool_version
        ));
        out.push_str(&format!(
            "# seed={} samples={} generated_unix={}\n",
            self.metadata.seed, self.metadata.samples, self.metadata.generated_unix
        ));
        out.push_str("check_name,case,params,lhs,lhs_err,rhs,rhs_err,verdict,margin,note\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                csv_field(&row.check),
                csv_field(&row.case),
                csv_field(&row.params_string()),
                row.lhs,
                row.lhs_err,
                row.rhs,
                row.rhs_err,
                row.verdict,
                row.margin,
                csv_field(&row.note),
            ));
        }
        out
    }

    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// A one-line console summary.
    pub fn summary(&self) -> String {
        let mut counts: BTreeMap<&'static str, usize> = BTreeMap::new();
        for row in &self.rows {
            *counts.entry(row.verdict.as_str()).or_insert(0) += 1;
        }
        let parts: Vec<String> = counts.iter().map(|(k, v)| format!("{v} {k}")).collect();
        format!("{} rows: {}", self.rows.len(), parts.join(", "))
    }
}

/// Quotes a CSV field if it contains a delimiter, quote, or newline.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row() -> CheckRow {
        let mut params = BTreeMap::new();
        params.insert("epsilon".to_string(), 0.1);
        params.insert("r".to_string(), 2.0);
        CheckRow {
            check: "small_ball_moment_bound".into(),
            case: "x1sq".into(),
            params,
            lhs: 1.25,
            lhs_err: 0.01,
            rhs: 2.5,
            rhs_err: 0.0,
            verdict: Verdict::Pass,
            margin: 1.25,
            note: String::new(),
        }
    }

    #[test]
    fn csv_has_fixed_columns_and_sorted_params() {
        let mut report = Report::new(7, 1000);
        report.push(sample_row());
        let csv = report.to_csv();
        let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
        assert_eq!(
            lines.next().unwrap(),
            "check_name,case,params,lhs,lhs_err,rhs,rhs_err,verdict,margin,note"
        );
        let row = lines.next().unwrap();
        assert_eq!(
            row,
            "small_ball_moment_bound,x1sq,epsilon=0.1;r=2,1.25,0.01,2.5,0,pass,1.25,"
        );
    }

    #[test]
    fn rows_sort_stably() {
        let mut report = Report::new(1, 10);
        let mut a = sample_row();
        a.case = "zzz".into();
        let b = sample_row();
        report.push(a);
        report.push(b.clone());
        report.sort_rows();
        assert_eq!(report.rows[0].case, "x1sq");
        assert_eq!(report.rows[1].case, "zzz");
    }

    #[test]
    fn json_round_trips() {
        let mut report = Report::new(3, 99);
        report.push(sample_row());
        let json = report.to_json().unwrap();
        let back: Report = serde_json::from_str(&json).unwrap();
        assert_eq!(back.rows.len(), 1);
        assert_eq!(back.rows[0].verdict, Verdict::Pass);
        assert_eq!(back.metadata.seed, 3);
    }

    #[test]
    fn exit_semantics_ignore_non_asserted_rows() {
        let mut report = Report::new(1, 10);
        let mut vac = sample_row();
        vac.verdict = Verdict::Vacuous;
        let mut rep = sample_row();
        rep.verdict = Verdict::Report;
        report.push(vac);
        report.push(rep);
        assert!(report.all_ok());
        let mut fail = sample_row();
        fail.verdict = Verdict::Fail;
        report.push(fail);
        assert!(!report.all_ok());
    }

    #[test]
    fn csv_quotes_fields_with_commas() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
