//! Corpus loading, validation, filtering and slicing.
//!
//! Two JSONL input formats are supported:
//!
//! * `hatexplain_json`: `{"id", "tokens", "annotators": [{"label", "rationale"}], "targets"}`
//! * `brwrr_json`: `{"id", "tokens", "task": "cose"|"sst", "options", "gold": {"BY": {...}, ...}}`
//!
//! Corpora are consumed pre-tokenized; masks stay aligned to the shipped
//! token lists. Invalid instances are rejected rather than repaired.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{Label, Mask, Task};

/// Group id of the reduced gold standard used when a task has a single ground truth.
pub const MAJORITY_GROUP: &str = "majority";

/// The six BRWRR annotator groups (ethnicity × age).
pub const BRWRR_GROUPS: [&str; 6] = ["BY", "BO", "WY", "WO", "LY", "LO"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldAnnotation {
    pub label: Label,
    pub rationale_mask: Mask,
    pub annotator_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub tokens: Vec<Token>,
    pub task: Task,
    /// Per-annotator (hate3) or per-demographic-group (BRWRR) gold.
    pub gold: BTreeMap<String, GoldAnnotation>,
    /// Reduced single gold standard; `None` for hate3 items without a label majority.
    pub canonical: Option<GoldAnnotation>,
    pub targets: BTreeSet<String>,
    pub options: Vec<String>,
}

impl Instance {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens joined by single spaces; the text shown to the model.
    pub fn text(&self) -> String {
        self.tokens
            .iter()
            .map(|t| t.surface.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn surfaces(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.surface.as_str()).collect()
    }

    /// Gold annotations to evaluate against: the canonical gold for hate3,
    /// every demographic group for BRWRR tasks.
    pub fn evaluation_golds(&self) -> Vec<(&str, &GoldAnnotation)> {
        match self.task {
            Task::Hate3 => self
                .canonical
                .as_ref()
                .map(|g| vec![(MAJORITY_GROUP, g)])
                .unwrap_or_default(),
            _ => self.gold.iter().map(|(k, v)| (k.as_str(), v)).collect(),
        }
    }

    /// Check every structural invariant of a loaded instance.
    pub fn validate(&self) -> Result<()> {
        let invalid = |message: String| Error::Validation {
            id: self.id.clone(),
            message,
        };
        if self.id.is_empty() {
            return Err(invalid("empty id".into()));
        }
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.index != i {
                return Err(invalid(format!("token {i} has index {}", tok.index)));
            }
            if tok.surface.is_empty() {
                return Err(invalid(format!("token {i} has an empty surface")));
            }
        }
        let golds = self
            .gold
            .iter()
            .map(|(k, g)| (k.as_str(), g))
            .chain(self.canonical.as_ref().map(|g| (MAJORITY_GROUP, g)));
        for (group, g) in golds {
            if g.rationale_mask.len() != self.tokens.len() {
                return Err(invalid(format!(
                    "group `{group}` rationale mask has length {} but there are {} tokens",
                    g.rationale_mask.len(),
                    self.tokens.len()
                )));
            }
            let label_ok = match (self.task, g.label) {
                (Task::Cose, Label::Choice(i)) => i < self.options.len(),
                (task, label) => task.accepts(label),
            };
            if !label_ok {
                return Err(invalid(format!(
                    "group `{group}` label `{}` is not valid for task {}",
                    g.label, self.task
                )));
            }
        }
        if self.task == Task::Cose && self.options.is_empty() {
            return Err(invalid("cose instance without options".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusFormat {
    HatexplainJson,
    BrwrrJson,
}

#[derive(Deserialize)]
struct RawHatexplain {
    id: String,
    tokens: Vec<String>,
    annotators: Vec<RawAnnotation>,
    #[serde(default)]
    targets: Vec<String>,
}

#[derive(Deserialize)]
struct RawAnnotation {
    label: serde_json::Value,
    #[serde(default)]
    rationale: Option<Vec<u8>>,
}

#[derive(Deserialize)]
struct RawBrwrr {
    id: String,
    tokens: Vec<String>,
    task: String,
    #[serde(default)]
    options: Vec<String>,
    gold: BTreeMap<String, RawAnnotation>,
}

/// Load and validate a JSONL corpus file.
pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Vec<Instance>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading corpus {}", path.display()), e))?;
    parse_corpus(&text, format, path)
}

/// Parse JSONL corpus text; `origin` is only used in error messages.
pub fn parse_corpus(text: &str, format: CorpusFormat, origin: &Path) -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ctx = LineCtx {
            path: origin,
            line: lineno + 1,
        };
        let instance = match format {
            CorpusFormat::HatexplainJson => ctx.hatexplain(line)?,
            CorpusFormat::BrwrrJson => ctx.brwrr(line)?,
        };
        instance.validate()?;
        if !seen.insert(instance.id.clone()) {
            return Err(Error::Validation {
                id: instance.id,
                message: "duplicate id".into(),
            });
        }
        out.push(instance);
    }
    Ok(out)
}

struct LineCtx<'a> {
    path: &'a Path,
    line: usize,
}

impl LineCtx<'_> {
    fn err(&self, id: &str, field: &str, message: impl Into<String>) -> Error {
        Error::Load {
            path: self.path.to_path_buf(),
            line: self.line,
            id: id.to_string(),
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// Best-effort id for errors raised before the line deserializes.
    fn peek_id(line: &str) -> String {
        serde_json::from_str::<serde_json::Value>(line)
            .ok()
            .and_then(|v| v.get("id").and_then(|i| i.as_str()).map(str::to_string))
            .unwrap_or_else(|| "<unknown>".into())
    }

    fn decode<T: serde::de::DeserializeOwned>(&self, line: &str) -> Result<T> {
        let mut de = serde_json::Deserializer::from_str(line);
        serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            let message = e.inner().to_string();
            let field = if path == "." {
                // missing fields are reported at the parent path
                message.split('`').nth(1).unwrap_or("<record>").to_string()
            } else {
                path
            };
            self.err(&Self::peek_id(line), &field, message)
        })
    }

    fn mask(&self, id: &str, field: &str, raw: Option<Vec<u8>>, len: usize) -> Result<Mask> {
        match raw {
            None => Ok(Mask::zeros(len)),
            Some(v) if v.is_empty() => Ok(Mask::zeros(len)),
            Some(v) => {
                if let Some(b) = v.iter().find(|b| **b > 1) {
                    return Err(self.err(id, field, format!("mask entry {b} is not 0/1")));
                }
                if v.len() != len {
                    return Err(Error::Validation {
                        id: id.to_string(),
                        message: format!("`{field}` has length {} but there are {len} tokens", v.len()),
                    });
                }
                Ok(Mask::from_bits(v))
            }
        }
    }

    fn label(&self, id: &str, field: &str, task: Task, raw: &serde_json::Value, options: &[String]) -> Result<Label> {
        let parsed = match (task, raw) {
            (Task::Cose, serde_json::Value::Number(n)) => n.as_u64().map(|i| Label::Choice(i as usize)),
            (Task::Cose, serde_json::Value::String(s)) => options
                .iter()
                .position(|o| o == s)
                .map(Label::Choice)
                .or_else(|| Label::parse(task, s)),
            (_, serde_json::Value::String(s)) => Label::parse(task, s),
            _ => None,
        };
        parsed.ok_or_else(|| self.err(id, field, format!("unrecognised label {raw}")))
    }

    fn tokens(&self, id: &str, raw: Vec<String>) -> Result<Vec<Token>> {
        if raw.is_empty() {
            return Err(self.err(id, "tokens", "no tokens"));
        }
        Ok(raw
            .into_iter()
            .enumerate()
            .map(|(index, surface)| Token { index, surface })
            .collect())
    }

    fn hatexplain(&self, line: &str) -> Result<Instance> {
        let raw: RawHatexplain = self.decode(line)?;
        let id = raw.id.clone();
        let tokens = self.tokens(&id, raw.tokens)?;
        if raw.annotators.is_empty() {
            return Err(self.err(&id, "annotators", "no annotations"));
        }
        let mut gold = BTreeMap::new();
        for (i, a) in raw.annotators.into_iter().enumerate() {
            let field = format!("annotators[{i}]");
            let label = self.label(&id, &format!("{field}.label"), Task::Hate3, &a.label, &[])?;
            let mask = self.mask(&id, &format!("{field}.rationale"), a.rationale, tokens.len())?;
            gold.insert(
                format!("annotator_{}", i + 1),
                GoldAnnotation {
                    label,
                    rationale_mask: mask,
                    annotator_count: 1,
                },
            );
        }
        let canonical = majority_gold(&gold, tokens.len());
        Ok(Instance {
            id,
            tokens,
            task: Task::Hate3,
            gold,
            canonical,
            targets: raw.targets.into_iter().collect(),
            options: Vec::new(),
        })
    }

    fn brwrr(&self, line: &str) -> Result<Instance> {
        let raw: RawBrwrr = self.decode(line)?;
        let id = raw.id.clone();
        let task = match raw.task.as_str() {
            "cose" => Task::Cose,
            "sst" | "sst3" | "sst2" => Task::Sst3,
            other => return Err(self.err(&id, "task", format!("unknown task `{other}`"))),
        };
        let tokens = self.tokens(&id, raw.tokens)?;
        if raw.gold.is_empty() {
            return Err(self.err(&id, "gold", "no gold annotations"));
        }
        let mut gold = BTreeMap::new();
        for (group, a) in raw.gold {
            if !BRWRR_GROUPS.contains(&group.as_str()) {
                return Err(self.err(&id, &format!("gold.{group}"), "unknown demographic group"));
            }
            let label = self.label(&id, &format!("gold.{group}.label"), task, &a.label, &raw.options)?;
            let mask = self.mask(&id, &format!("gold.{group}.rationale"), a.rationale, tokens.len())?;
            gold.insert(
                group,
                GoldAnnotation {
                    label,
                    rationale_mask: mask,
                    annotator_count: 1,
                },
            );
        }
        let canonical = plurality_gold(task, &gold, tokens.len());
        Ok(Instance {
            id,
            tokens,
            task,
            gold,
            canonical: Some(canonical),
            targets: BTreeSet::new(),
            options: raw.options,
        })
    }
}

/// Majority label plus the token-wise majority mask (marked by ≥2 of 3 for
/// three annotators). `None` when no label has a strict majority.
fn majority_gold(per_annotator: &BTreeMap<String, GoldAnnotation>, len: usize) -> Option<GoldAnnotation> {
    let n = per_annotator.len();
    let mut counts: BTreeMap<Label, usize> = BTreeMap::new();
    for g in per_annotator.values() {
        *counts.entry(g.label).or_default() += 1;
    }
    let (label, count) = counts.into_iter().max_by_key(|(_, c)| *c)?;
    if 2 * count <= n {
        return None;
    }
    Some(GoldAnnotation {
        label,
        rationale_mask: majority_mask(per_annotator.values(), n, len),
        annotator_count: n,
    })
}

/// Plurality label across demographic groups (ties go to the earliest label)
/// with a strict-majority token mask.
fn plurality_gold(task: Task, groups: &BTreeMap<String, GoldAnnotation>, len: usize) -> GoldAnnotation {
    let mut counts: BTreeMap<Label, usize> = BTreeMap::new();
    for g in groups.values() {
        *counts.entry(g.label).or_default() += 1;
    }
    let order = |l: &Label| match task {
        Task::Cose => match l {
            Label::Choice(i) => *i,
            _ => usize::MAX,
        },
        _ => task.labels().iter().position(|x| x == l).unwrap_or(usize::MAX),
    };
    let label = counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| order(b.0).cmp(&order(a.0))))
        .map(|(l, _)| *l)
        .expect("at least one gold group");
    GoldAnnotation {
        label,
        rationale_mask: majority_mask(groups.values(), groups.len(), len),
        annotator_count: groups.len(),
    }
}

fn majority_mask<'a>(masks: impl Iterator<Item = &'a GoldAnnotation>, n: usize, len: usize) -> Mask {
    let mut votes = vec![0usize; len];
    for g in masks {
        for (i, b) in g.rationale_mask.iter().enumerate() {
            votes[i] += usize::from(b);
        }
    }
    votes.into_iter().map(|v| 2 * v > n).collect::<Vec<_>>().into()
}

/// Drop hate3 items with three pairwise-distinct labels, and items with fewer
/// than three rationale-bearing annotations unless the majority label is Normal.
pub fn filter_hatexplain(instances: Vec<Instance>) -> Vec<Instance> {
    instances
        .into_iter()
        .filter(|inst| {
            if inst.task != Task::Hate3 {
                return false;
            }
            let labels: BTreeSet<Label> = inst.gold.values().map(|g| g.label).collect();
            if inst.gold.len() == 3 && labels.len() == 3 {
                return false;
            }
            let Some(canonical) = &inst.canonical else {
                return false;
            };
            let with_rationale = inst
                .gold
                .values()
                .filter(|g| !g.rationale_mask.is_all_zero())
                .count();
            canonical.label == Label::Normal || with_rationale >= 3
        })
        .collect()
}

/// Seeded sample of `n` instances, returned in input order.
pub fn sample_subset(instances: &[Instance], n: usize, seed: u64) -> Result<Vec<Instance>> {
    if n > instances.len() {
        return Err(Error::InvalidInput(format!(
            "cannot sample {n} instances from {}",
            instances.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, instances.len(), n).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| instances[i].clone()).collect())
}

/// Target subgroups used for slicing hate3 results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Subgroup {
    Gender,
    #[serde(rename = "Race/Ethnicity")]
    RaceEthnicity,
    Religion,
    /// Targets that fall in none of the three named families.
    Other,
    NoTarget,
}

impl Subgroup {
    pub fn name(self) -> &'static str {
        match self {
            Subgroup::Gender => "Gender",
            Subgroup::RaceEthnicity => "Race/Ethnicity",
            Subgroup::Religion => "Religion",
            Subgroup::Other => "Other",
            Subgroup::NoTarget => "NoTarget",
        }
    }

    /// Map one target tag (HateXplain vocabulary, case-insensitive) to its family.
    pub fn of_target(tag: &str) -> Option<Subgroup> {
        match tag.trim().to_lowercase().as_str() {
            "women" | "woman" | "men" | "man" | "female" | "male" => Some(Subgroup::Gender),
            "african" | "arab" | "asian" | "caucasian" | "hispanic" | "indian" | "indigenous"
            | "latino" | "black" | "white" => Some(Subgroup::RaceEthnicity),
            "islam" | "muslim" | "jewish" | "christian" | "buddhism" | "hindu" | "nonreligious"
            | "atheist" => Some(Subgroup::Religion),
            "" | "none" => None,
            _ => Some(Subgroup::Other),
        }
    }
}

/// Group hate3 instances by target family. Instances may appear in several
/// families; instances without targets go to `NoTarget`.
pub fn slice_by_target(instances: &[Instance]) -> BTreeMap<Subgroup, Vec<Instance>> {
    let mut out: BTreeMap<Subgroup, Vec<Instance>> = [
        Subgroup::Gender,
        Subgroup::RaceEthnicity,
        Subgroup::Religion,
        Subgroup::NoTarget,
    ]
    .into_iter()
    .map(|s| (s, Vec::new()))
    .collect();
    for inst in instances {
        let families: BTreeSet<Subgroup> =
            inst.targets.iter().filter_map(|t| Subgroup::of_target(t)).collect();
        if families.is_empty() {
            out.entry(Subgroup::NoTarget).or_default().push(inst.clone());
        }
        for f in families {
            out.entry(f).or_default().push(inst.clone());
        }
    }
    out
}

const SYNTHETIC_VOCAB: &[&str] = &[
    "people", "those", "they", "should", "never", "always", "really", "think", "about", "city",
    "news", "today", "again", "every", "country", "group", "vote", "school", "work", "street",
    "online", "family", "church", "market", "friends", "angry", "stupid", "filthy", "vermin",
    "trash", "idiots", "disgusting", "hate", "leave", "go", "back", "deport", "ban", "kill",
    "morons", "losers", "pathetic", "ugly", "weird", "lazy", "criminals", "animals", "parasites",
    "clowns", "liars", "great", "nice", "game", "music", "weekend", "coffee", "movie", "dog",
    "rain", "sunny",
];

const SYNTHETIC_TARGETS: &[&str] = &["Women", "African", "Islam", "Jewish", "Men", "Asian", "Refugee"];

/// Deterministic synthetic hate3 corpus for offline runs and tests.
///
/// Every instance has pairwise-distinct tokens, three agreeing annotators and
/// a non-empty rationale for non-Normal labels, so it survives
/// [`filter_hatexplain`] unchanged.
pub fn synthetic_hate3(n: usize, seed: u64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let len = rng.gen_range(6..=12);
            let mut words: Vec<&str> = SYNTHETIC_VOCAB.to_vec();
            words.shuffle(&mut rng);
            let tokens: Vec<Token> = words[..len]
                .iter()
                .enumerate()
                .map(|(index, w)| Token {
                    index,
                    surface: (*w).to_string(),
                })
                .collect();
            let label = match rng.gen_range(0..10) {
                0..=4 => Label::Normal,
                5..=6 => Label::Offensive,
                _ => Label::HateSpeech,
            };
            let mut mask = Mask::zeros(len);
            if label != Label::Normal {
                let marks = rng.gen_range(1..=3);
                let mut positions: Vec<usize> = (0..len).collect();
                positions.shuffle(&mut rng);
                for p in positions.into_iter().take(marks) {
                    mask.set(p, true);
                }
            }
            let gold: BTreeMap<String, GoldAnnotation> = (1..=3)
                .map(|a| {
                    (
                        format!("annotator_{a}"),
                        GoldAnnotation {
                            label,
                            rationale_mask: mask.clone(),
                            annotator_count: 1,
                        },
                    )
                })
                .collect();
            let targets = if rng.gen_bool(0.4) {
                BTreeSet::new()
            } else {
                let k = rng.gen_range(1..=2);
                SYNTHETIC_TARGETS
                    .choose_multiple(&mut rng, k)
                    .map(|t| t.to_string())
                    .collect()
            };
            Instance {
                id: format!("syn-{i:04}"),
                tokens,
                task: Task::Hate3,
                canonical: majority_gold(&gold, len),
                gold,
                targets,
                options: Vec::new(),
            }
        })
        .collect()
}

/// Serialize instances back to `hatexplain_json` lines.
pub fn to_hatexplain_jsonl(instances: &[Instance]) -> String {
    let mut out = String::new();
    for inst in instances {
        let annotators: Vec<serde_json::Value> = inst
            .gold
            .values()
            .map(|g| {
                serde_json::json!({
                    "label": g.label.as_str(),
                    "rationale": g.rationale_mask,
                })
            })
            .collect();
        let line = serde_json::json!({
            "id": inst.id,
            "tokens": inst.surfaces(),
            "annotators": annotators,
            "targets": inst.targets,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}
