//! CSV tables and the JSON summary.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use quasiloc_core::VerificationRecord;

use crate::suites::{Prepared, SuiteOutput, SUITES};

#[derive(Serialize)]
struct RecordRow<'a> {
    suite: &'a str,
    identity: &'a str,
    mesh_id: &'a str,
    max_residual: f64,
    tolerance: f64,
    passed: bool,
}

#[derive(Serialize)]
struct SuiteSummary<'a> {
    name: &'a str,
    description: &'a str,
    passed: bool,
    records: usize,
    max_residual: f64,
    failures: Vec<&'a VerificationRecord>,
}

#[derive(Serialize)]
struct RunSummary<'a> {
    label: &'a str,
    nodes: usize,
    interface_nodes: usize,
    lambda_one: f64,
    lambdas: &'a [f64],
    max_half_order: usize,
    seed: u64,
    all_passed: bool,
    suites: Vec<SuiteSummary<'a>>,
}

pub struct Summary {
    pub text: String,
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `records.csv`, `summary.json` and, when the suites produced them,
/// `series.csv` and `sweep.csv`. Files from earlier runs that this run does
/// not produce are removed.
pub fn write_reports(dir: &Path, p: &Prepared, outputs: &[(&str, SuiteOutput)]) -> anyhow::Result<Summary> {
    fs::create_dir_all(dir)?;
    let records = outputs.iter().flat_map(|(suite, out)| {
        out.records.iter().map(move |r| RecordRow {
            suite,
            identity: &r.identity,
            mesh_id: &r.mesh_id,
            max_residual: r.max_residual,
            tolerance: r.tolerance,
            passed: r.passed,
        })
    });
    write_csv(&dir.join("records.csv"), records)?;
    let series: Vec<_> = outputs.iter().flat_map(|(_, o)| &o.series).collect();
    let sweep: Vec<_> = outputs.iter().flat_map(|(_, o)| &o.sweep).collect();
    for (name, empty) in [("series.csv", series.is_empty()), ("sweep.csv", sweep.is_empty())] {
        let path = dir.join(name);
        if empty && path.exists() {
            fs::remove_file(&path)?;
        }
    }
    if !series.is_empty() {
        write_csv(&dir.join("series.csv"), series)?;
    }
    if !sweep.is_empty() {
        write_csv(&dir.join("sweep.csv"), sweep)?;
    }

    let mut text = String::new();
    let mut suites = Vec::new();
    for (name, out) in outputs {
        let description = SUITES.iter().find(|s| s.name == *name).map_or("", |s| s.description);
        let failures: Vec<&VerificationRecord> = out.records.iter().filter(|r| !r.passed).collect();
        let max_residual = out
            .records
            .iter()
            .filter(|r| r.tolerance > 0.0)
            .map(|r| r.max_residual)
            .fold(0.0, f64::max);
        let passed = failures.is_empty();
        writeln!(
            text,
            "{name:<22} {} ({} records, max residual {max_residual:.2e})",
            if passed { "PASS" } else { "FAIL" },
            out.records.len()
        )?;
        suites.push(SuiteSummary { name, description, passed, records: out.records.len(), max_residual, failures });
    }
    let summary = RunSummary {
        label: &p.config.label,
        nodes: p.mesh.node_count(),
        interface_nodes: p.cut.interface().len(),
        lambda_one: p.lambda_one,
        lambdas: &p.config.lambdas,
        max_half_order: p.options.max_half_order,
        seed: p.seed,
        all_passed: suites.iter().all(|s| s.passed),
        suites,
    };
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    fs::write(dir.join("summary.json"), json)?;
    Ok(Summary { text })
}
