//! Krippendorff's α for persona agreement on labels and rationale masks.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{Label, OrdinalScale, Task};
use crate::metrics::mean_std;
use crate::parsing::AnnotationRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Nominal,
    Ordinal,
}

/// Units × annotators matrix of category codes with missing entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReliabilityData {
    pub units: Vec<String>,
    pub annotators: Vec<String>,
    /// `values[u][a]`, `None` when annotator `a` did not code unit `u`.
    pub values: Vec<Vec<Option<u32>>>,
    pub level: Level,
}

impl ReliabilityData {
    /// Matrix with generated unit/annotator ids.
    pub fn from_matrix(values: Vec<Vec<Option<u32>>>, level: Level) -> Self {
        let annotators = values.first().map_or(0, Vec::len);
        ReliabilityData {
            units: (0..values.len()).map(|u| format!("u{u}")).collect(),
            annotators: (0..annotators).map(|a| format!("a{a}")).collect(),
            values,
            level,
        }
    }
}

/// α, or `Undefined` when expected disagreement is zero (one category only).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alpha {
    Value(f64),
    Undefined,
}

impl Alpha {
    pub fn value(self) -> Option<f64> {
        match self {
            Alpha::Value(v) => Some(v),
            Alpha::Undefined => None,
        }
    }
}

/// Coincidence matrix over the sorted categories present in pairable units.
#[derive(Debug, Clone)]
pub struct Coincidences {
    pub categories: Vec<u32>,
    pub matrix: Vec<Vec<f64>>,
}

impl Coincidences {
    pub fn build(data: &ReliabilityData) -> Self {
        let pairable: Vec<Vec<u32>> = data
            .values
            .iter()
            .map(|row| row.iter().flatten().copied().collect::<Vec<_>>())
            .filter(|vals| vals.len() >= 2)
            .collect();
        let categories: Vec<u32> = pairable
            .iter()
            .flatten()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: BTreeMap<u32, usize> = categories.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let k = categories.len();
        // Integer pair counts per unit size, divided at the end in a fixed
        // order so the result does not depend on unit or annotator order.
        let mut by_size: BTreeMap<usize, Vec<Vec<u64>>> = BTreeMap::new();
        for vals in &pairable {
            let mut counts = vec![0u64; k];
            for v in vals {
                counts[index[v]] += 1;
            }
            let pairs = by_size.entry(vals.len()).or_insert_with(|| vec![vec![0; k]; k]);
            for c in 0..k {
                for d in 0..k {
                    pairs[c][d] += if c == d { counts[c] * counts[c].saturating_sub(1) } else { counts[c] * counts[d] };
                }
            }
        }
        let mut matrix = vec![vec![0.0; k]; k];
        for (m, pairs) in &by_size {
            let weight = (*m - 1) as f64;
            for c in 0..k {
                for d in 0..k {
                    matrix[c][d] += pairs[c][d] as f64 / weight;
                }
            }
        }
        Coincidences { categories, matrix }
    }

    pub fn marginals(&self) -> Vec<f64> {
        self.matrix.iter().map(|row| row.iter().sum()).collect()
    }
}

/// Squared distance between categories at positions `c` and `k`.
fn delta(level: Level, marginals: &[f64], c: usize, k: usize) -> f64 {
    if c == k {
        return 0.0;
    }
    match level {
        Level::Nominal => 1.0,
        Level::Ordinal => {
            let (lo, hi) = if c < k { (c, k) } else { (k, c) };
            let span: f64 = marginals[lo..=hi].iter().sum();
            (span - (marginals[c] + marginals[k]) / 2.0).powi(2)
        }
    }
}

/// α = 1 − D_o / D_e over the coincidence matrix.
///
/// Units with fewer than two values are dropped. The ordinal metric uses the
/// coincidence marginals of the categories present, ordered by code; codes
/// that never occur carry zero mass and do not change the result.
pub fn krippendorff_alpha(data: &ReliabilityData) -> Result<Alpha> {
    if data.annotators.len() < 2 {
        return Err(Error::InvalidInput("agreement needs at least two annotators".into()));
    }
    if data.values.iter().any(|row| row.len() != data.annotators.len()) {
        return Err(Error::InvalidInput("ragged reliability matrix".into()));
    }
    let co = Coincidences::build(data);
    let n_c = co.marginals();
    let n: f64 = n_c.iter().sum();
    if n == 0.0 {
        return Err(Error::InvalidInput("no unit has two or more values".into()));
    }
    let k = co.categories.len();
    let mut observed = 0.0;
    let mut expected = 0.0;
    for c in 0..k {
        for d in 0..k {
            let dist = delta(data.level, &n_c, c, d);
            observed += co.matrix[c][d] * dist;
            expected += n_c[c] * n_c[d] * dist;
        }
    }
    if expected == 0.0 {
        return Ok(Alpha::Undefined);
    }
    Ok(Alpha::Value(1.0 - (n - 1.0) * observed / expected))
}

/// A named set of personas whose agreement is measured together.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementGroup {
    pub name: String,
    pub persona_ids: Vec<String>,
}

/// α per run for one group, with the mean and std over defined runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAgreement {
    pub group: String,
    pub per_run: Vec<Option<f64>>,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

impl GroupAgreement {
    fn from_runs(group: &str, per_run: Vec<Option<f64>>) -> Self {
        let defined: Vec<f64> = per_run.iter().flatten().copied().collect();
        let (mean, std) = if defined.is_empty() {
            (None, None)
        } else {
            let (m, s) = mean_std(&defined);
            (Some(m), Some(s))
        };
        GroupAgreement {
            group: group.to_string(),
            per_run,
            mean,
            std,
        }
    }
}

/// Numeric code of a label for agreement: ordinal value for hate3, position
/// in the label set for sst3, option index for cose.
pub fn label_code(task: Task, label: Label) -> Option<u32> {
    match (task, label) {
        (Task::Hate3, l) => OrdinalScale.value(l).map(|v| v as u32),
        (Task::Cose, Label::Choice(i)) => Some(i as u32),
        (t, l) => t.labels().iter().position(|x| *x == l).map(|i| i as u32),
    }
}

type RecordIndex<'a> = BTreeMap<(u32, &'a str, &'a str), &'a AnnotationRecord>;

fn index_records(records: &[AnnotationRecord]) -> (RecordIndex<'_>, BTreeSet<u32>, Vec<&str>) {
    let mut idx = BTreeMap::new();
    let mut runs = BTreeSet::new();
    let mut instances: Vec<&str> = Vec::new();
    let mut seen = BTreeSet::new();
    for r in records.iter().filter(|r| r.is_usable()) {
        idx.insert((r.run, r.persona_id.as_str(), r.instance_id.as_str()), r);
        runs.insert(r.run);
        if seen.insert(r.instance_id.as_str()) {
            instances.push(r.instance_id.as_str());
        }
    }
    (idx, runs, instances)
}

fn alpha_or_none(data: &ReliabilityData) -> Option<f64> {
    krippendorff_alpha(data).ok().and_then(Alpha::value)
}

/// Label agreement among the personas of each group, per run then mean ± std.
/// Ordinal for hate3, nominal otherwise.
pub fn label_agreement_by_group(records: &[AnnotationRecord], groups: &[AgreementGroup], task: Task) -> Vec<GroupAgreement> {
    let (idx, runs, instances) = index_records(records);
    let level = if task == Task::Hate3 { Level::Ordinal } else { Level::Nominal };
    groups
        .iter()
        .filter(|g| g.persona_ids.len() >= 2)
        .map(|g| {
            let per_run = runs
                .iter()
                .map(|run| {
                    let values = instances
                        .iter()
                        .map(|inst| {
                            g.persona_ids
                                .iter()
                                .map(|p| {
                                    idx.get(&(*run, p.as_str(), *inst))
                                        .and_then(|r| r.label)
                                        .and_then(|l| label_code(task, l))
                                })
                                .collect()
                        })
                        .collect();
                    alpha_or_none(&ReliabilityData {
                        units: instances.iter().map(|s| s.to_string()).collect(),
                        annotators: g.persona_ids.clone(),
                        values,
                        level,
                    })
                })
                .collect();
            GroupAgreement::from_runs(&g.name, per_run)
        })
        .collect()
}

/// Rationale agreement: each (instance, token position) is a unit with binary
/// values, nominal level.
pub fn rationale_agreement_by_group(records: &[AnnotationRecord], groups: &[AgreementGroup]) -> Vec<GroupAgreement> {
    let (idx, runs, instances) = index_records(records);
    groups
        .iter()
        .filter(|g| g.persona_ids.len() >= 2)
        .map(|g| {
            let per_run = runs
                .iter()
                .map(|run| {
                    let mut units = Vec::new();
                    let mut values = Vec::new();
                    for inst in &instances {
                        let masks: Vec<Option<&crate::label::Mask>> = g
                            .persona_ids
                            .iter()
                            .map(|p| idx.get(&(*run, p.as_str(), *inst)).map(|r| &r.rationale_mask))
                            .collect();
                        let Some(len) = masks.iter().flatten().map(|m| m.len()).max() else {
                            continue;
                        };
                        for t in 0..len {
                            units.push(format!("{inst}#{t}"));
                            values.push(
                                masks
                                    .iter()
                                    .map(|m| m.filter(|m| t < m.len()).map(|m| u32::from(m.get(t))))
                                    .collect(),
                            );
                        }
                    }
                    alpha_or_none(&ReliabilityData {
                        units,
                        annotators: g.persona_ids.clone(),
                        values,
                        level: Level::Nominal,
                    })
                })
                .collect();
            GroupAgreement::from_runs(&g.name, per_run)
        })
        .collect()
}
