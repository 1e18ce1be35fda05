//! Deterministic JSON / CSV / Markdown rendering of building reports.

use serde::Serialize;

use super::analyze::BuildingReport;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Md,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            "md" => Ok(ReportFormat::Md),
            other => Err(Error::Config(format!("unknown report format {other:?}"))),
        }
    }
}

#[derive(Serialize)]
struct Document<'a> {
    schema_version: u32,
    reports: Vec<&'a BuildingReport>,
}

fn ordered(reports: &[BuildingReport]) -> Vec<&BuildingReport> {
    let mut v: Vec<&BuildingReport> = reports.iter().collect();
    v.sort_by(|a, b| (a.building_id.as_str(), a.quantity).cmp(&(b.building_id.as_str(), b.quantity)));
    v
}

pub fn render_report(reports: &[BuildingReport], format: ReportFormat) -> String {
    let rows = ordered(reports);
    match format {
        ReportFormat::Json => render_json(rows),
        ReportFormat::Csv => render_csv(&rows),
        ReportFormat::Md => render_md(&rows),
    }
}

fn render_json(rows: Vec<&BuildingReport>) -> String {
    let doc = Document {
        schema_version: SCHEMA_VERSION,
        reports: rows,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("reports serialize");
    s.push('\n');
    s
}

const CSV_COLUMNS: [&str; 25] = [
    "schema_version",
    "building_id",
    "quantity",
    "n_observations",
    "m",
    "lambda",
    "achieved_ratio",
    "h_hat",
    "q_at_hat",
    "c",
    "a_n",
    "a_limit",
    "delta",
    "b_n",
    "d_n_stat",
    "beta0",
    "beta1",
    "beta2",
    "branch",
    "verdict",
    "persistence",
    "memory_class",
    "noise_label",
    "forecastable",
    "warnings",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Serialized enum name (matches the JSON spelling).
fn label<T: Serialize>(v: Option<T>) -> String {
    v.and_then(|x| serde_json::to_value(x).ok())
        .and_then(|x| x.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn render_csv(rows: &[&BuildingReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for r in rows {
        let record = [
            SCHEMA_VERSION.to_string(),
            r.building_id.clone(),
            r.quantity.to_string(),
            r.n_observations.to_string(),
            opt(r.m),
            opt(r.lambda),
            opt(r.achieved_ratio),
            opt(r.h_hat),
            opt(r.q_at_hat),
            opt(r.c),
            opt(r.a_n),
            opt(r.a_limit),
            opt(r.delta),
            opt(r.b_n),
            opt(r.d_n_stat),
            r.beta0.to_string(),
            opt(r.beta1),
            opt(r.beta2),
            label(r.branch),
            label(r.verdict),
            label(r.persistence),
            label(r.memory_class),
            label(r.noise_label),
            r.forecastable.to_string(),
            r.warnings.join("; "),
        ];
        w.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

fn cell(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "—".to_string(), |x| format!("{x:.digits$}"))
}

fn render_md(rows: &[&BuildingReport]) -> String {
    let mut s = String::new();
    s.push_str("| Object | Qty | m | λ | Ĥ | A_n | B_n | D_n | A | δ | β₁ | β₂ | Verdict | Memory | Forecastable | Notes |\n");
    s.push_str("|---|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---|---|---|---|\n");
    for r in rows {
        let notes = r.warnings.join("; ").replace('|', "\\|");
        s.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
            r.building_id.replace('|', "\\|"),
            r.quantity,
            r.m.map_or_else(|| "—".into(), |m| m.to_string()),
            cell(r.lambda, 3),
            cell(r.h_hat, 2),
            cell(r.a_n, 4),
            cell(r.b_n, 4),
            cell(r.d_n_stat, 4),
            cell(r.a_limit, 4),
            cell(r.delta, 4),
            cell(r.beta1, 4),
            cell(r.beta2, 4),
            r.verdict.map_or_else(|| "—".into(), |v| v.to_string()),
            {
                let m = label(r.memory_class);
                if m.is_empty() { "—".to_string() } else { m }
            },
            if r.forecastable { "yes" } else { "no" },
            notes,
        ));
    }
    s
}
