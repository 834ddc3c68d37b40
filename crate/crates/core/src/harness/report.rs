//! Verification reports and their JSON/CSV encodings.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

pub const SCHEMA: &str = "mlsq/1";

/// One inequality or identity evaluated on one instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub check: String,
    pub instance_seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    pub ratio: f64,
    /// Absolute slack granted to `lhs <= rhs`.
    pub slack: f64,
    pub pass: bool,
    /// False for survey quantities that are reported but not judged.
    pub asserted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Record {
    pub fn new(check: &str, instance_seed: u64, lhs: f64, rhs: f64, slack: f64) -> Self {
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        Record {
            check: check.to_string(),
            instance_seed,
            lhs,
            rhs,
            constant: None,
            ratio,
            slack,
            pass: lhs <= rhs + slack,
            asserted: true,
            chain: None,
            note: None,
        }
    }

    /// `rhs + slack - lhs`.
    pub fn margin(&self) -> f64 {
        self.rhs + self.slack - self.lhs
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub check: String,
    pub count: usize,
    pub pass_count: usize,
    pub max_ratio: f64,
    pub min_slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: &'static str,
    pub config_digest: String,
    pub aggregates: Vec<Aggregate>,
    pub records: Vec<Record>,
}

/// Per-check aggregates in order of first appearance.
pub fn aggregate(records: &[Record]) -> Vec<Aggregate> {
    let mut out: Vec<Aggregate> = Vec::new();
    for r in records {
        let idx = match out.iter().position(|a| a.check == r.check) {
            Some(i) => i,
            None => {
                out.push(Aggregate {
                    check: r.check.clone(),
                    count: 0,
                    pass_count: 0,
                    max_ratio: f64::NEG_INFINITY,
                    min_slack: f64::INFINITY,
                });
                out.len() - 1
            }
        };
        let a = &mut out[idx];
        a.count += 1;
        a.pass_count += r.pass as usize;
        a.max_ratio = a.max_ratio.max(r.ratio);
        a.min_slack = a.min_slack.min(r.margin());
    }
    out
}

impl VerificationReport {
    pub fn new(config_digest: String, records: Vec<Record>) -> Self {
        VerificationReport {
            schema: SCHEMA,
            config_digest,
            aggregates: aggregate(&records),
            records,
        }
    }

    /// True when an asserted record failed.
    pub fn failed(&self) -> bool {
        self.records.iter().any(|r| r.asserted && !r.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One row per record; the chain is `;`-joined.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "check,instance_seed,lhs,rhs,constant,ratio,slack,pass,asserted,chain,note\n",
        );
        for r in &self.records {
            let constant = r.constant.map(|c| format!("{c:e}")).unwrap_or_default();
            let chain = r
                .chain
                .as_ref()
                .map(|c| {
                    c.iter()
                        .map(|v| format!("{v:e}"))
                        .collect::<Vec<_>>()
                        .join(";")
                })
                .unwrap_or_default();
            let note = r.note.as_deref().unwrap_or("").replace('"', "'");
            let _ = writeln!(
                s,
                "{},{},{:e},{:e},{},{:e},{:e},{},{},{},\"{}\"",
                r.check,
                r.instance_seed,
                r.lhs,
                r.rhs,
                constant,
                r.ratio,
                r.slack,
                r.pass,
                r.asserted,
                chain,
                note
            );
        }
        s
    }

    /// Writes `report.json` and `report.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.to_json())?;
        fs::write(dir.join("report.csv"), self.to_csv())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregates_recompute() {
        let mut recs = vec![
            Record::new("a", 1, 1.0, 2.0, 0.0),
            Record::new("b", 1, 3.0, 2.0, 0.5),
            Record::new("a", 2, 1.5, 2.0, 0.0),
        ];
        recs[1].asserted = false;
        let rep = VerificationReport::new("d".into(), recs);
        assert_eq!(rep.aggregates.len(), 2);
        assert_eq!(rep.aggregates[0].count, 2);
        assert_eq!(rep.aggregates[0].max_ratio, 0.75);
        assert_eq!(rep.aggregates[0].min_slack, 0.5);
        assert_eq!(rep.aggregates[1].pass_count, 0);
        assert!(!rep.failed());
        assert_eq!(aggregate(&rep.records), rep.aggregates);
        let json: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(json["schema"], "mlsq/1");
        assert_eq!(rep.to_csv().lines().count(), 4);
    }

    #[test]
    fn empty_report() {
        let rep = VerificationReport::new("d".into(), Vec::new());
        assert!(rep.aggregates.is_empty());
        assert!(!rep.failed());
    }
}
