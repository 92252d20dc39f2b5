//! `report.md` and `report.json` from an artifact directory.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use waveop::checks::Criterion;

use crate::config::ScenarioConfig;
use crate::pipeline::{expected_artifacts, CHECKS};

/// Expected artifacts absent from the directory (exit status 2).
#[derive(Debug)]
pub struct MissingArtifacts(pub Vec<String>);

impl std::fmt::Display for MissingArtifacts {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "missing artifacts: {}", self.0.join(", "))
    }
}

impl std::error::Error for MissingArtifacts {}

/// Gating checks failed (exit status 1).
#[derive(Debug)]
pub struct AcceptanceFailure(pub Vec<String>);

impl std::fmt::Display for AcceptanceFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "acceptance failures: {}", self.0.join(", "))
    }
}

impl std::error::Error for AcceptanceFailure {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub anchor: String,
    pub verdict: String,
    pub value: f64,
    pub tolerance: String,
    pub criterion: usize,
    pub gating: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub status: String,
    pub config_hash: String,
    pub scenario: String,
    pub checks: Vec<ReportEntry>,
}

impl Report {
    pub fn failing(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| c.gating && c.verdict != "pass")
            .map(|c| c.anchor.clone())
            .collect()
    }
}

#[derive(Deserialize)]
struct CheckFile {
    config_hash: String,
    scenario: String,
    criteria: Vec<Criterion>,
}

/// Aggregate `checks.json` into the two report files. Every artifact the
/// config implies must be present; missing ones are named in the error.
pub fn emit_report(dir: &Path, cfg: &ScenarioConfig) -> Result<Report> {
    let missing: Vec<String> = expected_artifacts(cfg)
        .into_iter()
        .filter(|name| !dir.join(name).is_file())
        .collect();
    if !missing.is_empty() {
        return Err(MissingArtifacts(missing).into());
    }
    let path = dir.join(CHECKS);
    let text =
        std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let file: CheckFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;

    let checks: Vec<ReportEntry> = file
        .criteria
        .iter()
        .flat_map(|crit| {
            crit.checks.iter().map(move |c| ReportEntry {
                anchor: c.anchor.clone(),
                verdict: if c.passed { "pass" } else { "fail" }.into(),
                value: c.value,
                tolerance: c.tolerance.clone(),
                criterion: crit.number,
                gating: c.gating,
            })
        })
        .collect();
    let passed = file.criteria.iter().all(Criterion::passed);
    let report = Report {
        status: if passed { "pass" } else { "fail" }.into(),
        config_hash: file.config_hash,
        scenario: file.scenario,
        checks,
    };
    std::fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(&report)? + "\n",
    )?;
    std::fs::write(dir.join("report.md"), markdown(&report, &file.criteria))?;
    Ok(report)
}

fn markdown(report: &Report, criteria: &[Criterion]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Report: {}\n", report.scenario);
    let _ = writeln!(s, "Status: **{}**  ", report.status.to_uppercase());
    let _ = writeln!(s, "Config SHA-256: `{}`\n", report.config_hash);
    for crit in criteria {
        let verdict = if crit.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(s, "## {}. {} ({verdict})\n", crit.number, crit.title);
        let _ = writeln!(s, "| anchor | verdict | value | tolerance |");
        let _ = writeln!(s, "|---|---|---|---|");
        for c in &crit.checks {
            let _ = writeln!(
                s,
                "| {} | {} | {:.6e} | {} |",
                c.anchor,
                if c.passed { "pass" } else { "fail" },
                c.value,
                c.tolerance
            );
        }
        s.push('\n');
    }
    s
}
