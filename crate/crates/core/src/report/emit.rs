//! Writes a bundle as one CSV per table family plus JSON.

use std::fs;
use std::path::{Path, PathBuf};

use super::analysis::*;
use super::RunManifest;
use crate::error::{Error, Result};
use crate::linguistics::LinguisticsRow;

fn f(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.4}")
    } else {
        String::new()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(f).unwrap_or_default()
}

fn joined(values: impl IntoIterator<Item = String>) -> String {
    values.into_iter().collect::<Vec<_>>().join(";")
}

trait CsvRow {
    const HEADER: &'static [&'static str];
    fn cells(&self) -> Vec<String>;
}

impl CsvRow for ScoreRow {
    const HEADER: &'static [&'static str] = &[
        "persona", "model", "gold_group", "subgroup", "metric", "unit", "runs", "mean", "std", "per_run", "evaluated", "excluded",
    ];
    fn cells(&self) -> Vec<String> {
        let s = &self.score;
        vec![
            self.persona_id.clone(),
            self.model_name.clone(),
            self.gold_group.clone(),
            self.subgroup.clone(),
            s.metric.clone(),
            s.unit.clone(),
            s.runs().to_string(),
            f(s.mean),
            f(s.std),
            joined(s.per_run.iter().map(|v| f(*v))),
            self.evaluated.to_string(),
            self.excluded.to_string(),
        ]
    }
}

impl CsvRow for DeltaRow {
    const HEADER: &'static [&'static str] = &["persona", "model", "metric", "instances", "delta", "ci_low", "ci_high", "significant"];
    fn cells(&self) -> Vec<String> {
        vec![
            self.persona_id.clone(),
            self.model_name.clone(),
            self.metric.clone(),
            self.instances.to_string(),
            f(self.delta),
            f(self.low),
            f(self.high),
            self.significant.to_string(),
        ]
    }
}

impl CsvRow for AgreementRow {
    const HEADER: &'static [&'static str] = &["scope", "group", "personas", "runs", "mean", "std", "per_run"];
    fn cells(&self) -> Vec<String> {
        let a = &self.agreement;
        vec![
            self.scope.clone(),
            a.group.clone(),
            self.personas.to_string(),
            a.per_run.len().to_string(),
            opt(a.mean),
            opt(a.std),
            joined(a.per_run.iter().map(|v| opt(*v))),
        ]
    }
}

impl CsvRow for OverflagRow {
    const HEADER: &'static [&'static str] = &["gold", "pred", "persona", "model", "rate"];
    fn cells(&self) -> Vec<String> {
        vec![
            self.gold.to_string(),
            self.pred.to_string(),
            self.persona_id.clone(),
            self.model_name.clone(),
            f(self.rate),
        ]
    }
}

impl CsvRow for StuartMaxwellRow {
    const HEADER: &'static [&'static str] = &[
        "group", "persona_a", "persona_b", "n", "statistic", "dof", "p_value", "threshold", "significant", "dropped_categories",
    ];
    fn cells(&self) -> Vec<String> {
        let p = &self.pair;
        vec![
            p.group.clone(),
            p.persona_a.clone(),
            p.persona_b.clone(),
            self.n.to_string(),
            f(p.test.statistic),
            p.test.dof.to_string(),
            f(p.test.p_value),
            f(p.threshold),
            p.significant.to_string(),
            joined(p.test.dropped.iter().map(usize::to_string)),
        ]
    }
}

impl CsvRow for StuartMaxwellSummary {
    const HEADER: &'static [&'static str] = &["group", "family_size", "threshold", "significant_pairs"];
    fn cells(&self) -> Vec<String> {
        vec![
            self.group.clone(),
            self.family_size.to_string(),
            f(self.threshold),
            self.significant_pairs.to_string(),
        ]
    }
}

impl CsvRow for LabelDistributionRow {
    const HEADER: &'static [&'static str] = &["persona", "model", "label", "count", "share"];
    fn cells(&self) -> Vec<String> {
        vec![
            self.persona_id.clone(),
            self.model_name.clone(),
            self.label.to_string(),
            self.count.to_string(),
            f(self.share),
        ]
    }
}

impl CsvRow for DisagreementRow {
    const HEADER: &'static [&'static str] = &["group", "personas", "rate"];
    fn cells(&self) -> Vec<String> {
        vec![self.group.clone(), self.personas.to_string(), f(self.rate)]
    }
}

impl CsvRow for LinguisticsRow {
    const HEADER: &'static [&'static str] = &["persona", "model", "texts", "avg_words", "avg_flesch"];
    fn cells(&self) -> Vec<String> {
        vec![
            self.persona_id.clone(),
            self.model_name.clone(),
            self.texts.to_string(),
            f(self.avg_words),
            f(self.avg_flesch),
        ]
    }
}

impl CsvRow for ParseFailureRow {
    const HEADER: &'static [&'static str] = &[
        "persona", "model", "total", "ok", "repaired", "failed", "no_json", "missing_label", "unknown_label", "unresolvable_answer",
    ];
    fn cells(&self) -> Vec<String> {
        [self.total, self.ok, self.repaired, self.failed, self.no_json, self.missing_label, self.unknown_label, self.unresolvable_answer]
            .iter()
            .map(usize::to_string)
            .fold(vec![self.persona_id.clone(), self.model_name.clone()], |mut v, c| {
                v.push(c);
                v
            })
    }
}

fn write_csv<R: CsvRow>(dir: &Path, name: &str, rows: &[R], written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(R::HEADER)?;
    for r in rows {
        w.write_record(r.cells())?;
    }
    w.flush().map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    written.push(path);
    Ok(())
}

fn write_json<T: serde::Serialize>(path: PathBuf, value: &T, written: &mut Vec<PathBuf>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    written.push(path);
    Ok(())
}

/// Writes `manifest.json`, and for a non-empty bundle `bundle.json` plus one
/// CSV per table. Returns the files written.
pub fn emit(bundle: &ReportBundle, manifest: &RunManifest, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(format!("creating {}", out_dir.display()), e))?;
    let mut written = Vec::new();
    write_json(out_dir.join("manifest.json"), manifest, &mut written)?;
    if bundle.is_empty() {
        return Ok(written);
    }
    write_json(out_dir.join("bundle.json"), bundle, &mut written)?;
    write_csv(out_dir, "scores.csv", &bundle.scores, &mut written)?;
    write_csv(out_dir, "deltas.csv", &bundle.deltas, &mut written)?;
    write_csv(out_dir, "agreement.csv", &bundle.agreement, &mut written)?;
    write_csv(out_dir, "overflag.csv", &bundle.overflag, &mut written)?;
    write_csv(out_dir, "stuart_maxwell.csv", &bundle.stuart_maxwell, &mut written)?;
    write_csv(out_dir, "stuart_maxwell_summary.csv", &bundle.stuart_maxwell_summary, &mut written)?;
    write_csv(out_dir, "label_distribution.csv", &bundle.label_distribution, &mut written)?;
    write_csv(out_dir, "disagreement.csv", &bundle.disagreement, &mut written)?;
    write_csv(out_dir, "linguistics.csv", &bundle.linguistics, &mut written)?;
    write_csv(out_dir, "parse_failures.csv", &bundle.parse_failures, &mut written)?;
    Ok(written)
}
