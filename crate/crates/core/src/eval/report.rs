//! Report rendering.
//!
//! Structured reports are newline-delimited JSON. The first line is a header
//! `{"format":"ner-report","kind":...,"version":1}`; every following line is
//! one record with a `record` field naming its type. Keys within a line are
//! sorted.

use serde_json::{json, Value};

use super::{CvReport, KappaReport, Prf, Scores, TTest, TagReport};
use crate::corpus::EntityDistribution;

pub const REPORT_FORMAT: &str = "ner-report";
pub const REPORT_VERSION: u32 = 1;

/// Header line for a report of the given kind; `extra` object fields are
/// merged in.
pub fn report_header(kind: &str, extra: Value) -> Value {
    let mut h = json!({ "format": REPORT_FORMAT, "version": REPORT_VERSION, "kind": kind });
    if let (Some(h), Value::Object(extra)) = (h.as_object_mut(), extra) {
        h.extend(extra);
    }
    h
}

/// One compact JSON value per line.
pub fn ndjson(lines: impl IntoIterator<Item = Value>) -> String {
    lines.into_iter().map(|v| format!("{v}\n")).collect()
}

fn scores_record(record: &str, name: Option<&str>, s: &Scores) -> Value {
    let mut v = json!({
        "record": record,
        "tp": s.tp, "fp": s.fp, "fn": s.fn_,
        "precision": s.precision, "recall": s.recall, "f1": s.f1,
    });
    if let Some(name) = name {
        v["tag"] = json!(name);
    }
    v
}

fn prf_record(record: &str, p: &Prf) -> Value {
    json!({ "record": record, "precision": p.precision, "recall": p.recall, "f1": p.f1 })
}

fn table_rows(out: &mut String, rows: &[(String, f64, f64, f64, String)]) {
    let width = rows.iter().map(|r| r.0.chars().count()).max().unwrap_or(0).max(10);
    out.push_str(&format!("{:<width$}  {:>9}  {:>9}  {:>9}  {}\n", "", "Precision", "Recall", "F1", "Support"));
    for (name, p, r, f, support) in rows {
        out.push_str(&format!("{name:<width$}  {p:>9.4}  {r:>9.4}  {f:>9.4}  {support}\n"));
    }
}

impl TagReport {
    pub fn to_ndjson(&self) -> String {
        let head = report_header("tags", json!({ "mode": self.mode, "include_o": self.include_o }));
        let rows = self.rows.iter().map(|(n, s)| scores_record("tag", Some(n), s));
        let tail = [scores_record("micro", None, &self.micro), prf_record("macro", &Prf {
            precision: self.macro_avg.precision,
            recall: self.macro_avg.recall,
            f1: self.macro_avg.f1,
        })];
        ndjson(std::iter::once(head).chain(rows).chain(tail))
    }

    pub fn to_table(&self) -> String {
        let mut rows: Vec<_> = self
            .rows
            .iter()
            .map(|(n, s)| (n.clone(), s.precision, s.recall, s.f1, s.support().to_string()))
            .collect();
        rows.push(("micro avg".into(), self.micro.precision, self.micro.recall, self.micro.f1, self.micro.support().to_string()));
        rows.push(("macro avg".into(), self.macro_avg.precision, self.macro_avg.recall, self.macro_avg.f1, String::new()));
        let mut out = String::new();
        table_rows(&mut out, &rows);
        out
    }
}

impl CvReport {
    pub fn to_ndjson(&self) -> String {
        let head = report_header("crossval", json!({ "folds": self.folds.len() }));
        let folds = self.folds.iter().enumerate().map(|(i, r)| {
            json!({ "record": "fold", "fold": i + 1, "precision": r.micro.precision, "recall": r.micro.recall, "f1": r.micro.f1 })
        });
        let tail = [
            prf_record("mean", &self.mean),
            prf_record("std", &self.std),
            json!({ "record": "best_fold", "fold": self.best_fold + 1 }),
        ];
        ndjson(std::iter::once(head).chain(folds).chain(tail))
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<6}  {:>9}  {:>9}  {:>9}\n", "Fold", "Precision", "Recall", "F1"));
        for (i, r) in self.folds.iter().enumerate() {
            out.push_str(&format!("{:<6}  {:>9.4}  {:>9.4}  {:>9.4}\n", i + 1, r.micro.precision, r.micro.recall, r.micro.f1));
        }
        out.push_str(&format!(
            "Mean ± Std: precision {:.4} ± {:.4}, recall {:.4} ± {:.4}, F1 {:.4} ± {:.4}\n",
            self.mean.precision, self.std.precision, self.mean.recall, self.std.recall, self.mean.f1, self.std.f1
        ));
        let best = &self.folds[self.best_fold].micro;
        out.push_str(&format!(
            "Best fold: {} (precision {:.4}, recall {:.4}, F1 {:.4})\n",
            self.best_fold + 1,
            best.precision,
            best.recall,
            best.f1
        ));
        out
    }
}

impl KappaReport {
    pub fn to_ndjson(&self) -> String {
        ndjson([
            report_header("kappa", json!({})),
            json!({ "record": "kappa", "observed": self.observed, "expected": self.expected, "kappa": self.kappa }),
        ])
    }

    pub fn to_table(&self) -> String {
        format!(
            "Observed agreement  {:.4}\nExpected agreement  {:.4}\nCohen's kappa       {:.4}\n",
            self.observed, self.expected, self.kappa
        )
    }
}

impl TTest {
    pub fn to_record(&self) -> Value {
        json!({ "record": "ttest", "t": finite_or_string(self.t), "p": self.p, "df": self.df, "mean_difference": self.mean_difference })
    }
}

fn finite_or_string(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

/// Renders a two-model comparison: each model's CV summary plus the paired
/// t-test on fold F1.
pub fn comparison_ndjson(names: (&str, &str), a: &CvReport, b: &CvReport, test: &TTest) -> String {
    let mut lines = vec![report_header("compare", json!({ "folds": a.folds.len() }))];
    for (name, r) in [(names.0, a), (names.1, b)] {
        let mut mean = prf_record("mean", &r.mean);
        mean["model"] = json!(name);
        let mut std = prf_record("std", &r.std);
        std["model"] = json!(name);
        let fold_f1 = json!({ "record": "fold_f1", "model": name, "values": r.fold_f1() });
        lines.extend([fold_f1, mean, std]);
    }
    lines.push(test.to_record());
    ndjson(lines)
}

impl EntityDistribution {
    pub fn to_ndjson(&self) -> String {
        let rows = self.rows().into_iter().map(|(name, count, pct)| {
            json!({ "record": "entity", "type": name, "count": count, "percentage": pct })
        });
        ndjson(
            std::iter::once(report_header("distribution", json!({})))
                .chain(rows)
                .chain([json!({ "record": "total", "count": self.total })]),
        )
    }

    /// Aligned table with percentages to two decimals.
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<15}  {:>11}  {:>14}\n", "Entity Type", "Occurrences", "Percentage (%)");
        for (name, count, pct) in self.rows() {
            out.push_str(&format!("{name:<15}  {count:>11}  {pct:>14.2}\n"));
        }
        out.push_str(&format!("{:<15}  {:>11}  {:>14.2}\n", "Total", self.total, if self.total > 0 { 100.0 } else { 0.0 }));
        out
    }
}
