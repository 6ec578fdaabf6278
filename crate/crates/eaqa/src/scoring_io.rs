//! Prediction JSONL, evaluation reports, the confusion CSV and the error
//! review sheet.

use std::fmt::Write as _;
use std::path::Path;

use eaqa_core::scoring::{ConfusionMatrix, ErrorAnalysis, EvalReport, PredictionRecord, Score};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;

pub fn predictions_to_string(preds: &[PredictionRecord]) -> String {
    io::to_jsonl(preds)
}

pub fn parse_predictions_str(path: &Path, text: &str) -> Result<Vec<PredictionRecord>> {
    io::lines(text)
        .map(|(n, l)| {
            let p: PredictionRecord = io::parse_line(path, n, l)?;
            match p.span {
                Some(s) if s.start > s.end => Err(Error::Record {
                    path: path.to_path_buf(),
                    line: n,
                    message: format!("span: start {} after end {}", s.start, s.end),
                }),
                _ => Ok(p),
            }
        })
        .collect()
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    parse_predictions_str(path, &io::read_to_string(path)?)
}

pub fn write_predictions(path: &Path, preds: &[PredictionRecord]) -> Result<()> {
    io::write_atomic(path, predictions_to_string(preds).as_bytes())
}

/// Strict and (optionally) lenient reports side by side.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportFile {
    pub system_id: Option<String>,
    pub strict: EvalReport,
    pub lenient: Option<EvalReport>,
}

pub fn report_to_string(report: &ReportFile) -> String {
    io::to_pretty_json(report)
}

pub fn parse_report_str(text: &str) -> std::result::Result<ReportFile, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

pub fn read_report(path: &Path) -> Result<ReportFile> {
    parse_report_str(&io::read_to_string(path)?).map_err(|m| Error::Data(format!("{}: {m}", path.display())))
}

fn score_row(out: &mut String, label: &str, s: &Score) {
    let c = s.counts;
    let _ = writeln!(
        out,
        "{label:<28} {:>7.2} {:>7.2} {:>7.2} {:>6} {:>6} {:>6}",
        s.precision * 100.0,
        s.recall * 100.0,
        s.f1 * 100.0,
        c.predicted,
        c.gold,
        c.correct
    );
}

fn table_header(out: &mut String, title: &str) {
    let _ = writeln!(out, "{title:<28} {:>7} {:>7} {:>7} {:>6} {:>6} {:>6}", "P", "R", "F1", "pred", "gold", "corr");
}

/// Plain-text summary of a report.
pub fn render_table(report: &ReportFile) -> String {
    let mut out = String::new();
    table_header(&mut out, "evaluation");
    score_row(&mut out, "strict", &report.strict.score);
    if let Some(l) = &report.lenient {
        score_row(&mut out, "lenient", &l.score);
    }
    let r = &report.strict;
    if let Some(by) = &r.by_distance {
        out.push('\n');
        table_header(&mut out, "distance");
        for (k, s) in by {
            score_row(&mut out, &k.label(), s);
        }
    }
    if let Some(by) = &r.by_role {
        out.push('\n');
        table_header(&mut out, "role");
        for (k, b) in by {
            score_row(&mut out, k, &b.score);
        }
    }
    if let Some(by) = &r.by_event {
        out.push('\n');
        table_header(&mut out, "event type");
        for (k, b) in &by.top {
            score_row(&mut out, k, &b.score);
        }
        if let Some(o) = &by.other {
            score_row(&mut out, "other", &o.score);
        }
    }
    if let Some(errors) = &r.errors {
        out.push('\n');
        let _ = writeln!(out, "{:<28} {:>6} {:>7}", "error category", "count", "%");
        let pct = errors.percentages();
        for (k, n) in &errors.histogram {
            let _ = writeln!(out, "{:<28} {n:>6} {:>7.2}", k.as_str(), pct[k]);
        }
        if !errors.chains_available {
            let _ = writeln!(out, "(no coreference chains: alternative spans not detected)");
        }
    }
    out
}

/// Gold roles as rows, predicted roles as columns.
pub fn confusion_to_csv(m: &ConfusionMatrix) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["gold\\predicted".to_string()];
    header.extend(m.labels.iter().cloned());
    w.write_record(&header).expect("in-memory write");
    for (label, row) in m.labels.iter().zip(&m.counts) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(|n| n.to_string()));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

#[derive(Serialize)]
struct ReviewRow<'a> {
    doc_id: &'a str,
    event_index: usize,
    role: &'a str,
    category: &'a str,
    predicted: Option<String>,
    gold: Option<String>,
    predicted_text: Option<String>,
    gold_text: Option<String>,
    evidence: &'a eaqa_core::scoring::ErrorEvidence,
}

/// One JSON line per error case with the span texts, for manual review.
pub fn error_review_sheet(errors: &ErrorAnalysis, gold: &[eaqa_core::AnnotatedDocument]) -> String {
    let index = eaqa_core::questiongen::index_corpus(gold);
    io::to_jsonl(errors.cases.iter().map(|c| {
        let text = |s: Option<eaqa_core::Span>| {
            s.and_then(|s| index.get(c.doc_id.as_str()).map(|d| d.document.span_text(s)))
        };
        ReviewRow {
            doc_id: &c.doc_id,
            event_index: c.event_index,
            role: &c.role,
            category: c.category.as_str(),
            predicted: c.predicted.map(|s| s.to_string()),
            gold: c.gold.map(|s| s.to_string()),
            predicted_text: text(c.predicted),
            gold_text: text(c.gold),
            evidence: &c.evidence,
        }
    }))
}
