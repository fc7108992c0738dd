//! Turns annotation records into every report table.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::agreement::{label_agreement_by_group, label_code, rationale_agreement_by_group, AgreementGroup, GroupAgreement};
use crate::corpus::{slice_by_target, GoldAnnotation, Instance, MAJORITY_GROUP};
use crate::error::Result;
use crate::label::{Label, Mask, OrdinalScale, Task};
use crate::linguistics::{profile_by_persona, LinguisticsRow};
use crate::metrics::{self, MaskConventions, ScoreTable};
use crate::parsing::{AnnotationRecord, ParseStatus};
use crate::personas::{group_of, Persona, PersonaKind};
use crate::stats::{bonferroni, bonferroni_threshold, bootstrap_delta, disagreement_rate, stuart_maxwell, BootstrapConfig, PairTest};

pub const ALL_SUBGROUP: &str = "all";
pub const COMPOSITE_GROUP: &str = "composite";

/// Which analysis families to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricToggles {
    pub labels: bool,
    pub rationales: bool,
    pub agreement: bool,
    pub significance: bool,
    pub linguistics: bool,
}

impl Default for MetricToggles {
    fn default() -> Self {
        MetricToggles {
            labels: true,
            rationales: true,
            agreement: true,
            significance: true,
            linguistics: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnalysisOptions {
    pub toggles: MetricToggles,
    pub conventions: MaskConventions,
    pub bootstrap: BootstrapConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub persona_id: String,
    pub model_name: String,
    pub gold_group: String,
    pub subgroup: String,
    #[serde(flatten)]
    pub score: ScoreTable,
    /// Items scored, summed over runs.
    pub evaluated: usize,
    /// Parse failures left out, summed over runs.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub persona_id: String,
    pub model_name: String,
    pub metric: String,
    pub instances: usize,
    pub delta: f64,
    pub low: f64,
    pub high: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementRow {
    pub scope: String,
    pub personas: usize,
    #[serde(flatten)]
    pub agreement: GroupAgreement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverflagRow {
    pub gold: Label,
    pub pred: Label,
    pub persona_id: String,
    pub model_name: String,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StuartMaxwellRow {
    pub n: usize,
    #[serde(flatten)]
    pub pair: PairTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StuartMaxwellSummary {
    pub group: String,
    pub family_size: usize,
    pub threshold: f64,
    pub significant_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelDistributionRow {
    pub persona_id: String,
    pub model_name: String,
    pub label: Label,
    pub count: usize,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisagreementRow {
    pub group: String,
    pub personas: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseFailureRow {
    pub persona_id: String,
    pub model_name: String,
    pub total: usize,
    pub ok: usize,
    pub repaired: usize,
    pub failed: usize,
    pub no_json: usize,
    pub missing_label: usize,
    pub unknown_label: usize,
    pub unresolvable_answer: usize,
}

/// Every table of an audit. Contains no timing data, so identical inputs
/// give identical bundles.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportBundle {
    pub scores: Vec<ScoreRow>,
    pub deltas: Vec<DeltaRow>,
    pub agreement: Vec<AgreementRow>,
    pub overflag: Vec<OverflagRow>,
    pub stuart_maxwell: Vec<StuartMaxwellRow>,
    pub stuart_maxwell_summary: Vec<StuartMaxwellSummary>,
    pub label_distribution: Vec<LabelDistributionRow>,
    pub disagreement: Vec<DisagreementRow>,
    pub linguistics: Vec<LinguisticsRow>,
    pub parse_failures: Vec<ParseFailureRow>,
}

impl ReportBundle {
    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
            && self.deltas.is_empty()
            && self.agreement.is_empty()
            && self.overflag.is_empty()
            && self.stuart_maxwell.is_empty()
            && self.stuart_maxwell_summary.is_empty()
            && self.label_distribution.is_empty()
            && self.disagreement.is_empty()
            && self.linguistics.is_empty()
            && self.parse_failures.is_empty()
    }

    pub fn score(&self, persona_id: &str, gold_group: &str, subgroup: &str, metric: &str) -> Option<&ScoreRow> {
        self.scores.iter().find(|r| {
            r.persona_id == persona_id && r.gold_group == gold_group && r.subgroup == subgroup && r.score.metric == metric
        })
    }

    pub fn delta(&self, persona_id: &str, metric: &str) -> Option<&DeltaRow> {
        self.deltas.iter().find(|r| r.persona_id == persona_id && r.metric == metric)
    }
}

fn gold_for<'a>(inst: &'a Instance, group: &str) -> Option<&'a GoldAnnotation> {
    if group == MAJORITY_GROUP {
        inst.canonical.as_ref()
    } else {
        inst.gold.get(group)
    }
}

fn label_metrics(task: Task) -> &'static [&'static str] {
    match task {
        Task::Hate3 => &["accuracy", "macro_f1", "mae", "me"],
        Task::Sst3 => &["accuracy", "macro_f1"],
        Task::Cose => &["accuracy"],
    }
}

const RATIONALE_METRICS: [&str; 2] = ["token_f1", "iou_f1"];

/// Hate3 rationales are scored only where the gold marks something.
fn rationale_eligible(task: Task, gold: &GoldAnnotation) -> bool {
    task != Task::Hate3 || !gold.rationale_mask.is_all_zero()
}

/// Attribute groups among the selected personas, each with ≥ 2 members.
pub fn attribute_groups(personas: &[&Persona]) -> Vec<AgreementGroup> {
    let mut groups: BTreeMap<(u8, String), Vec<String>> = BTreeMap::new();
    for p in personas {
        let key = match p.kind {
            PersonaKind::Single => group_of(p).map(|c| (0, c.name().to_string())),
            PersonaKind::Composite => Some((1, COMPOSITE_GROUP.to_string())),
            PersonaKind::Baseline => None,
        };
        if let Some(k) = key {
            groups.entry(k).or_default().push(p.id.clone());
        }
    }
    groups
        .into_iter()
        .filter(|(_, ids)| ids.len() >= 2)
        .map(|((_, name), persona_ids)| AgreementGroup { name, persona_ids })
        .collect()
}

struct Index<'a> {
    task: Task,
    instances: BTreeMap<&'a str, &'a Instance>,
    order: Vec<&'a str>,
    /// (persona, run) → instance id → record
    by_persona_run: BTreeMap<(&'a str, u32), BTreeMap<&'a str, &'a AnnotationRecord>>,
    runs: Vec<u32>,
    model_name: String,
}

impl<'a> Index<'a> {
    fn new(instances: &'a [Instance], records: &'a [AnnotationRecord]) -> Self {
        let mut by_persona_run: BTreeMap<_, BTreeMap<_, _>> = BTreeMap::new();
        let mut runs = BTreeSet::new();
        for r in records {
            by_persona_run
                .entry((r.persona_id.as_str(), r.run))
                .or_default()
                .insert(r.instance_id.as_str(), r);
            runs.insert(r.run);
        }
        Index {
            task: instances.first().map_or(Task::Hate3, |i| i.task),
            instances: instances.iter().map(|i| (i.id.as_str(), i)).collect(),
            order: instances.iter().map(|i| i.id.as_str()).collect(),
            by_persona_run,
            runs: runs.into_iter().collect(),
            model_name: records.first().map(|r| r.model_name.clone()).unwrap_or_default(),
        }
    }

    /// (instance, record) pairs for a persona and run over `ids`.
    fn rows(&self, persona: &str, run: u32, ids: &BTreeSet<&str>) -> Vec<(&'a Instance, &'a AnnotationRecord)> {
        let Some(recs) = self.by_persona_run.get(&(persona, run)) else {
            return Vec::new();
        };
        self.order
            .iter()
            .filter(|id| ids.contains(*id))
            .filter_map(|id| recs.get(id).map(|r| (self.instances[id], *r)))
            .collect()
    }
}

/// Score of one metric on one run, with the number of evaluated items.
fn run_score(
    task: Task,
    metric: &str,
    rows: &[(&Instance, &AnnotationRecord)],
    group: &str,
    conv: &MaskConventions,
) -> Option<(f64, usize)> {
    let usable: Vec<(&AnnotationRecord, &GoldAnnotation)> = rows
        .iter()
        .filter(|(_, r)| r.is_usable())
        .filter_map(|(i, r)| gold_for(i, group).map(|g| (*r, g)))
        .collect();
    let pred: Vec<Label> = usable.iter().filter_map(|(r, _)| r.label).collect();
    let gold: Vec<Label> = usable.iter().map(|(_, g)| g.label).collect();
    let value = match metric {
        "accuracy" => metrics::accuracy(&pred, &gold).map(|v| v * 100.0),
        "macro_f1" => {
            let excluded: &[Label] = if task == Task::Sst3 { &[Label::NoSentiment] } else { &[] };
            metrics::macro_f1(&pred, &gold, task.labels(), excluded).map(|v| v * 100.0)
        }
        "mae" => metrics::mae(&pred, &gold, OrdinalScale),
        "me" => metrics::mean_error(&pred, &gold, OrdinalScale),
        "token_f1" | "iou_f1" => {
            let pairs: Vec<(&Mask, &Mask)> = usable
                .iter()
                .filter(|(_, g)| rationale_eligible(task, g))
                .map(|(r, g)| (&r.rationale_mask, &g.rationale_mask))
                .collect();
            let f = if metric == "token_f1" { metrics::mean_token_f1 } else { metrics::iou_f1 };
            return f(&pairs, conv).ok().map(|v| (v * 100.0, pairs.len()));
        }
        _ => return None,
    };
    value.ok().map(|v| (v, usable.len()))
}

/// Per-instance score behind each bootstrapped delta.
fn instance_score(task: Task, metric: &str, inst: &Instance, r: &AnnotationRecord, conv: &MaskConventions) -> Option<f64> {
    let gold = inst.canonical.as_ref()?;
    let pred = r.label?;
    match metric {
        "accuracy" => Some(if pred == gold.label { 100.0 } else { 0.0 }),
        "mae" | "me" => {
            let d = OrdinalScale.value(pred)? - OrdinalScale.value(gold.label)?;
            Some(100.0 * if metric == "mae" { d.abs() } else { d } as f64)
        }
        "token_f1" if rationale_eligible(task, gold) => {
            metrics::token_f1_with(&r.rationale_mask, &gold.rationale_mask, conv).ok().map(|v| v * 100.0)
        }
        "iou_f1" if rationale_eligible(task, gold) => metrics::iou_with(&r.rationale_mask, &gold.rationale_mask, conv)
            .ok()
            .map(|v| if v >= conv.iou_threshold { 100.0 } else { 0.0 }),
        _ => None,
    }
}

fn delta_metrics(task: Task, toggles: &MetricToggles) -> Vec<&'static str> {
    let mut out = Vec::new();
    if toggles.labels {
        out.push("accuracy");
        if task == Task::Hate3 {
            out.extend(["mae", "me"]);
        }
    }
    if toggles.rationales {
        out.extend(RATIONALE_METRICS);
    }
    out
}

/// Builds every enabled table. `personas` should list the baseline first.
pub fn analyze(instances: &[Instance], personas: &[&Persona], records: &[AnnotationRecord], opts: &AnalysisOptions) -> Result<ReportBundle> {
    let mut bundle = ReportBundle::default();
    if records.is_empty() {
        return Ok(bundle);
    }
    let idx = Index::new(instances, records);
    let task = idx.task;
    let model = idx.model_name.clone();
    let all_ids: BTreeSet<&str> = idx.order.iter().copied().collect();

    let mut subgroups: Vec<(String, BTreeSet<&str>)> = vec![(ALL_SUBGROUP.into(), all_ids.clone())];
    if task == Task::Hate3 {
        for (sg, insts) in slice_by_target(instances) {
            let ids = insts.iter().map(|i| idx.instances.get_key_value(i.id.as_str()).map(|(k, _)| *k).unwrap()).collect();
            subgroups.push((sg.name().to_string(), ids));
        }
    }
    let mut gold_groups = vec![MAJORITY_GROUP.to_string()];
    if task != Task::Hate3 {
        let extra: BTreeSet<&String> = instances.iter().flat_map(|i| i.gold.keys()).collect();
        gold_groups.extend(extra.into_iter().filter(|g| g.as_str() != MAJORITY_GROUP).cloned());
    }

    let mut metric_names: Vec<&str> = Vec::new();
    if opts.toggles.labels {
        metric_names.extend(label_metrics(task));
    }
    if opts.toggles.rationales {
        metric_names.extend(RATIONALE_METRICS);
    }

    for p in personas {
        for group in &gold_groups {
            for (sg, ids) in &subgroups {
                let per_run_rows: Vec<_> = idx.runs.iter().map(|&r| idx.rows(&p.id, r, ids)).collect();
                let excluded = per_run_rows.iter().flatten().filter(|(_, r)| !r.is_usable()).count();
                for metric in &metric_names {
                    let runs: Vec<(f64, usize)> = per_run_rows
                        .iter()
                        .filter_map(|rows| run_score(task, metric, rows, group, &opts.conventions))
                        .collect();
                    if runs.is_empty() {
                        continue;
                    }
                    bundle.scores.push(ScoreRow {
                        persona_id: p.id.clone(),
                        model_name: model.clone(),
                        gold_group: group.clone(),
                        subgroup: sg.clone(),
                        score: ScoreTable::new(*metric, runs.iter().map(|r| r.0).collect(), "percent"),
                        evaluated: runs.iter().map(|r| r.1).sum(),
                        excluded,
                    });
                }
            }
        }
    }

    let baseline = personas.iter().find(|p| p.is_baseline());
    if opts.toggles.significance {
        if let Some(base) = baseline {
            let averaged = |persona: &str, metric: &str| -> BTreeMap<String, f64> {
                let mut sums: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
                for &run in &idx.runs {
                    for (inst, r) in idx.rows(persona, run, &all_ids) {
                        if let Some(v) = r.is_usable().then(|| instance_score(task, metric, inst, r, &opts.conventions)).flatten() {
                            let e = sums.entry(inst.id.as_str()).or_default();
                            e.0 += v;
                            e.1 += 1;
                        }
                    }
                }
                sums.into_iter().map(|(k, (s, n))| (k.to_string(), s / n as f64)).collect()
            };
            for metric in delta_metrics(task, &opts.toggles) {
                let base_scores = averaged(&base.id, metric);
                for p in personas.iter().filter(|p| !p.is_baseline()) {
                    let mut mine = averaged(&p.id, metric);
                    mine.retain(|k, _| base_scores.contains_key(k));
                    let theirs: BTreeMap<String, f64> =
                        base_scores.iter().filter(|(k, _)| mine.contains_key(*k)).map(|(k, v)| (k.clone(), *v)).collect();
                    if mine.is_empty() {
                        continue;
                    }
                    let d = bootstrap_delta(&p.id, metric, &mine, &theirs, &opts.bootstrap)?;
                    bundle.deltas.push(DeltaRow {
                        persona_id: d.persona_id,
                        model_name: model.clone(),
                        metric: d.metric,
                        instances: mine.len(),
                        delta: d.delta,
                        low: d.low,
                        high: d.high,
                        significant: d.significant,
                    });
                }
            }
        }
    }

    let groups = attribute_groups(personas);
    if opts.toggles.agreement {
        let member_count: BTreeMap<&str, usize> = groups.iter().map(|g| (g.name.as_str(), g.persona_ids.len())).collect();
        let mut push = |scope: &str, rows: Vec<GroupAgreement>| {
            for a in rows {
                bundle.agreement.push(AgreementRow {
                    scope: scope.into(),
                    personas: member_count[a.group.as_str()],
                    agreement: a,
                });
            }
        };
        if opts.toggles.labels {
            push("label", label_agreement_by_group(records, &groups, task));
        }
        if opts.toggles.rationales {
            push("rationale", rationale_agreement_by_group(records, &groups));
        }
        if opts.toggles.labels {
            for g in &groups {
                if let Some(rate) = disagreement_rate(records, &g.persona_ids) {
                    bundle.disagreement.push(DisagreementRow {
                        group: g.name.clone(),
                        personas: g.persona_ids.len(),
                        rate,
                    });
                }
            }
        }
    }

    if opts.toggles.labels {
        for p in personas {
            let usable: Vec<(&Instance, &AnnotationRecord)> = idx
                .runs
                .iter()
                .flat_map(|&r| idx.rows(&p.id, r, &all_ids))
                .filter(|(_, r)| r.is_usable())
                .collect();
            if usable.is_empty() {
                continue;
            }
            let mut counts: BTreeMap<Label, usize> = task.labels().iter().map(|l| (*l, 0)).collect();
            for (_, r) in &usable {
                *counts.entry(r.label.expect("usable records carry a label")).or_default() += 1;
            }
            for (label, count) in counts {
                bundle.label_distribution.push(LabelDistributionRow {
                    persona_id: p.id.clone(),
                    model_name: model.clone(),
                    label,
                    count,
                    share: count as f64 / usable.len() as f64,
                });
            }
            if task != Task::Cose {
                let (pred, gold): (Vec<Label>, Vec<Label>) = usable
                    .iter()
                    .filter_map(|(i, r)| Some((r.label?, i.canonical.as_ref()?.label)))
                    .unzip();
                for ((g, pr), rate) in metrics::overflag_matrix(&pred, &gold, task.labels())? {
                    bundle.overflag.push(OverflagRow {
                        gold: g,
                        pred: pr,
                        persona_id: p.id.clone(),
                        model_name: model.clone(),
                        rate,
                    });
                }
            }
        }
    }

    if opts.toggles.significance && opts.toggles.labels {
        let k = match task {
            Task::Cose => instances.iter().map(|i| i.options.len()).max().unwrap_or(0),
            t => t.labels().len(),
        };
        for g in &groups {
            let mut tests = Vec::new();
            for (ai, a) in g.persona_ids.iter().enumerate() {
                for b in &g.persona_ids[ai + 1..] {
                    let mut la = Vec::new();
                    let mut lb = Vec::new();
                    for &run in &idx.runs {
                        let (Some(ra), Some(rb)) = (idx.by_persona_run.get(&(a.as_str(), run)), idx.by_persona_run.get(&(b.as_str(), run))) else {
                            continue;
                        };
                        for id in &idx.order {
                            let codes = ra.get(id).and_then(|r| r.label).zip(rb.get(id).and_then(|r| r.label));
                            if let Some((x, y)) = codes.and_then(|(x, y)| label_code(task, x).zip(label_code(task, y))) {
                                la.push(x as usize);
                                lb.push(y as usize);
                            }
                        }
                    }
                    if la.is_empty() || k < 2 {
                        continue;
                    }
                    if let Ok(test) = stuart_maxwell(&la, &lb, k) {
                        tests.push((
                            la.len(),
                            PairTest {
                                group: g.name.clone(),
                                persona_a: a.clone(),
                                persona_b: b.clone(),
                                test,
                                threshold: 0.0,
                                significant: false,
                            },
                        ));
                    }
                }
            }
            let family = g.persona_ids.len() * (g.persona_ids.len() - 1) / 2;
            let (ns, pairs): (Vec<usize>, Vec<PairTest>) = tests.into_iter().unzip();
            let pairs = bonferroni(pairs, family);
            bundle.stuart_maxwell_summary.push(StuartMaxwellSummary {
                group: g.name.clone(),
                family_size: family,
                threshold: bonferroni_threshold(family),
                significant_pairs: pairs.iter().filter(|p| p.significant).count(),
            });
            bundle.stuart_maxwell.extend(ns.into_iter().zip(pairs).map(|(n, pair)| StuartMaxwellRow { n, pair }));
        }
    }

    if opts.toggles.linguistics {
        bundle.linguistics = profile_by_persona(records);
    }

    for p in personas {
        let recs: Vec<&AnnotationRecord> = idx
            .runs
            .iter()
            .filter_map(|&r| idx.by_persona_run.get(&(p.id.as_str(), r)))
            .flat_map(|m| m.values().copied())
            .collect();
        if recs.is_empty() {
            continue;
        }
        let status = |s: ParseStatus| recs.iter().filter(|r| r.parse_status == s).count();
        let reason = |code: &str| recs.iter().filter(|r| r.failure.as_ref().is_some_and(|f| f.code() == code)).count();
        bundle.parse_failures.push(ParseFailureRow {
            persona_id: p.id.clone(),
            model_name: model.clone(),
            total: recs.len(),
            ok: status(ParseStatus::Ok),
            repaired: status(ParseStatus::Repaired),
            failed: status(ParseStatus::Failed),
            no_json: reason("no_json"),
            missing_label: reason("missing_label"),
            unknown_label: reason("unknown_label"),
            unresolvable_answer: reason("unresolvable_answer"),
        });
    }
    Ok(bundle)
}
