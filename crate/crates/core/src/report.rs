//! Per-sample strata reports shared by the model sampler and the curved
//! chart decompositions.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Local-geometry diagnostics recorded for one sample.
#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct Diagnostics {
    /// Defining-function value(s) at the sample (pairing or section component).
    pub value: f64,
    /// Norm of the gradient of the defining function along the orbit chart.
    pub grad_norm: Option<f64>,
    /// Rank of the Jacobian of the defining constraints.
    pub jacobian_rank: Option<usize>,
    pub hessian_det: Option<f64>,
    pub einstein_residual: Option<f64>,
    /// Tractor-metric invariant `h(s, s)` of the section at this point.
    pub invariant: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SampleRecord {
    pub index: usize,
    pub coords: Vec<f64>,
    pub label: String,
    /// Membership in the filtration zero loci `Z^U`, innermost first.
    pub zero_membership: Vec<bool>,
    pub diagnostics: Diagnostics,
}

/// Geometry attributed to a measure-zero stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StratumGeometry {
    Hypersurface,
    /// Two independent real constraints.
    Codimension2,
    Isolated,
    Open,
    Unresolved,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StrataSummary {
    pub label_counts: BTreeMap<String, usize>,
    pub geometry: BTreeMap<String, StratumGeometry>,
    pub expected_labels: Vec<String>,
    pub observed_labels: Vec<String>,
    pub ambiguous: usize,
    /// Whether every `Z^U` membership implies membership in the next larger `Z^{U'}`.
    pub monotone_zero_loci: bool,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StrataReport {
    pub scenario: String,
    pub samples: Vec<SampleRecord>,
    pub summary: StrataSummary,
}

impl StrataReport {
    /// Assembles a report; `geometry` maps labels to their detected stratum type.
    pub fn new(
        scenario: impl Into<String>,
        samples: Vec<SampleRecord>,
        expected_labels: Vec<String>,
        geometry: BTreeMap<String, StratumGeometry>,
    ) -> Self {
        let mut label_counts = BTreeMap::new();
        for s in &samples {
            *label_counts.entry(s.label.clone()).or_insert(0) += 1;
        }
        let ambiguous = label_counts.get("AMBIGUOUS").copied().unwrap_or(0);
        let observed_labels = label_counts
            .keys()
            .filter(|k| k.as_str() != "AMBIGUOUS")
            .cloned()
            .collect();
        let monotone_zero_loci = samples.iter().all(|s| {
            s.zero_membership
                .windows(2)
                .all(|w| !w[0] || w[1])
        });
        StrataReport {
            scenario: scenario.into(),
            samples,
            summary: StrataSummary {
                label_counts,
                geometry,
                expected_labels,
                observed_labels,
                ambiguous,
                monotone_zero_loci,
            },
        }
    }

    /// Whether the observed label set equals the expected one.
    pub fn labels_match(&self) -> bool {
        let mut e = self.summary.expected_labels.clone();
        e.sort();
        e == self.summary.observed_labels
    }

    /// Whether every observed label belongs to the expected set.
    pub fn labels_within_expected(&self) -> bool {
        self.summary
            .observed_labels
            .iter()
            .all(|l| self.summary.expected_labels.contains(l))
    }

    pub fn count(&self, label: &str) -> usize {
        self.summary.label_counts.get(label).copied().unwrap_or(0)
    }

    /// Writes the per-sample table. Coordinates are padded to a common width.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let width = self.samples.iter().map(|s| s.coords.len()).max().unwrap_or(0);
        let zdepth = self.samples.iter().map(|s| s.zero_membership.len()).max().unwrap_or(0);
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["index".to_string()];
        header.extend((0..width).map(|i| format!("x{i}")));
        header.push("label".into());
        header.extend((0..zdepth).map(|i| format!("zero_{i}")));
        for h in ["value", "grad_norm", "jacobian_rank", "hessian_det", "einstein_residual", "invariant"] {
            header.push(h.into());
        }
        w.write_record(&header)?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for s in &self.samples {
            let mut row = vec![s.index.to_string()];
            for i in 0..width {
                row.push(s.coords.get(i).map(|x| x.to_string()).unwrap_or_default());
            }
            row.push(s.label.clone());
            for i in 0..zdepth {
                row.push(s.zero_membership.get(i).map(|b| b.to_string()).unwrap_or_default());
            }
            let d = &s.diagnostics;
            row.push(d.value.to_string());
            row.push(opt(d.grad_norm));
            row.push(d.jacobian_rank.map(|r| r.to_string()).unwrap_or_default());
            row.push(opt(d.hessian_det));
            row.push(opt(d.einstein_residual));
            row.push(opt(d.invariant));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, json_path: &Path, csv_path: &Path) -> Result<()> {
        let summary = serde_json::json!({
            "scenario": self.scenario,
            "summary": self.summary,
            "samples": self.samples.len(),
        });
        std::fs::write(json_path, serde_json::to_string_pretty(&summary)?)?;
        self.write_csv(std::fs::File::create(csv_path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(i: usize, label: &str, z: Vec<bool>) -> SampleRecord {
        SampleRecord {
            index: i,
            coords: vec![i as f64],
            label: label.into(),
            zero_membership: z,
            diagnostics: Diagnostics::default(),
        }
    }

    #[test]
    fn counts_and_label_sets() {
        let r = StrataReport::new(
            "t",
            vec![rec(0, "PLUS", vec![]), rec(1, "MINUS", vec![]), rec(2, "PLUS", vec![])],
            vec!["PLUS".into(), "MINUS".into()],
            BTreeMap::new(),
        );
        assert_eq!(r.count("PLUS"), 2);
        assert!(r.labels_match());
    }

    #[test]
    fn monotonicity_flag() {
        let ok = StrataReport::new("t", vec![rec(0, "A", vec![true, true])], vec![], BTreeMap::new());
        assert!(ok.summary.monotone_zero_loci);
        let bad = StrataReport::new("t", vec![rec(0, "A", vec![true, false])], vec![], BTreeMap::new());
        assert!(!bad.summary.monotone_zero_loci);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let r = StrataReport::new("t", vec![rec(0, "PLUS", vec![false])], vec![], BTreeMap::new());
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,x0,label,zero_0,value"));
        assert_eq!(text.lines().count(), 2);
    }
}
