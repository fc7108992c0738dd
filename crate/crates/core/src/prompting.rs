//! Prompt rendering and run planning.
//!
//! Templates live in `templates/` as text assets. Placeholders are
//! `{{persona_description}}`, `{{input_text}}` and `{{options}}`; the
//! `{{#cot}}…{{/cot}}` and `{{#reasoning}}…{{/reasoning}}` sections are kept
//! or dropped depending on the prompt variant and whether the provider needs
//! an explicit `"reasoning"` key. Everything is sent as a single user turn.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::Instance;
use crate::error::{Error, Result};
use crate::label::Task;
use crate::personas::{Persona, PersonaKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Cot,
    #[serde(alias = "no-cot")]
    NoCot,
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "cot" => Ok(Variant::Cot),
            "no-cot" | "no_cot" => Ok(Variant::NoCot),
            other => Err(format!("unknown variant `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PromptSpec<'a> {
    pub task: Task,
    pub persona: &'a Persona,
    pub variant: Variant,
    /// Ask for a `"reasoning"` JSON key (providers without think-tag support).
    pub reasoning_field: bool,
}

/// Keys the model is asked to emit, plus what the parser needs to check them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputSchema {
    pub task: Task,
    pub keys: Vec<String>,
    pub options: Vec<String>,
}

impl OutputSchema {
    pub fn new(task: Task, reasoning_field: bool, options: Vec<String>) -> Self {
        let mut keys: Vec<String> = match task {
            Task::Cose => vec!["answer".into(), "answer_index".into(), "rationale".into()],
            _ => vec!["label".into(), "rationale".into()],
        };
        if reasoning_field {
            keys.push("reasoning".into());
        }
        OutputSchema { task, keys, options }
    }

    pub fn has_reasoning(&self) -> bool {
        self.keys.iter().any(|k| k == "reasoning")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub text: String,
    pub schema: OutputSchema,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum TemplateKind {
    Baseline,
    Persona,
}

struct Template {
    name: &'static str,
    task: Task,
    kind: TemplateKind,
    body: &'static str,
}

const TEMPLATES: [Template; 6] = [
    Template {
        name: "hate3_baseline",
        task: Task::Hate3,
        kind: TemplateKind::Baseline,
        body: include_str!("../templates/hate3_baseline.txt"),
    },
    Template {
        name: "hate3_persona",
        task: Task::Hate3,
        kind: TemplateKind::Persona,
        body: include_str!("../templates/hate3_persona.txt"),
    },
    Template {
        name: "cose_baseline",
        task: Task::Cose,
        kind: TemplateKind::Baseline,
        body: include_str!("../templates/cose_baseline.txt"),
    },
    Template {
        name: "cose_persona",
        task: Task::Cose,
        kind: TemplateKind::Persona,
        body: include_str!("../templates/cose_persona.txt"),
    },
    Template {
        name: "sst3_baseline",
        task: Task::Sst3,
        kind: TemplateKind::Baseline,
        body: include_str!("../templates/sst3_baseline.txt"),
    },
    Template {
        name: "sst3_persona",
        task: Task::Sst3,
        kind: TemplateKind::Persona,
        body: include_str!("../templates/sst3_persona.txt"),
    },
];

fn template_for(task: Task, persona: &Persona) -> &'static Template {
    let kind = match persona.kind {
        PersonaKind::Baseline => TemplateKind::Baseline,
        _ => TemplateKind::Persona,
    };
    TEMPLATES
        .iter()
        .find(|t| t.task == task && t.kind == kind)
        .expect("one template per task and kind")
}

/// SHA-256 of every template asset, keyed by template name.
pub fn template_hashes() -> BTreeMap<String, String> {
    TEMPLATES
        .iter()
        .map(|t| (t.name.to_string(), hex::encode(Sha256::digest(t.body.as_bytes()))))
        .collect()
}

/// `0. <option>` lines in dataset order.
pub fn format_options(options: &[String]) -> String {
    options
        .iter()
        .enumerate()
        .map(|(i, o)| format!("{i}. {o}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Single-pass expansion: substituted values are never re-scanned.
fn expand(body: &str, vars: &BTreeMap<&str, String>, sections: &BTreeMap<&str, bool>) -> Result<String> {
    let mut out = String::with_capacity(body.len() + 256);
    let mut rest = body;
    let mut open: Vec<&str> = Vec::new();
    let visible = |open: &[&str]| open.iter().all(|s| sections.get(s).copied().unwrap_or(false));
    while let Some(start) = rest.find("{{") {
        if visible(&open) {
            out.push_str(&rest[..start]);
        }
        let after = &rest[start + 2..];
        let end = after
            .find("}}")
            .ok_or_else(|| Error::InvalidInput("unterminated template tag".into()))?;
        let tag = &after[..end];
        if let Some(name) = tag.strip_prefix('#') {
            open.push(name);
        } else if let Some(name) = tag.strip_prefix('/') {
            if open.pop() != Some(name) {
                return Err(Error::InvalidInput(format!("mismatched section close `{name}`")));
            }
        } else if visible(&open) {
            let value = vars
                .get(tag)
                .ok_or_else(|| Error::InvalidInput(format!("unknown template variable `{tag}`")))?;
            out.push_str(value);
        }
        rest = &after[end + 2..];
    }
    if !open.is_empty() {
        return Err(Error::InvalidInput(format!("unclosed section `{}`", open[0])));
    }
    if visible(&open) {
        out.push_str(rest);
    }
    Ok(out)
}

pub fn render(spec: &PromptSpec<'_>, instance: &Instance) -> Result<RenderedPrompt> {
    if instance.task != spec.task {
        return Err(Error::InvalidInput(format!(
            "prompt for task {} cannot render instance `{}` of task {}",
            spec.task, instance.id, instance.task
        )));
    }
    let template = template_for(spec.task, spec.persona);
    let vars = BTreeMap::from([
        ("persona_description", spec.persona.predicate()),
        ("input_text", instance.text()),
        ("options", format_options(&instance.options)),
    ]);
    let sections = BTreeMap::from([
        ("cot", spec.variant == Variant::Cot),
        ("reasoning", spec.reasoning_field),
    ]);
    let mut text = expand(template.body, &vars, &sections)?;
    while text.ends_with('\n') {
        text.pop();
    }
    Ok(RenderedPrompt {
        text,
        schema: OutputSchema::new(spec.task, spec.reasoning_field, instance.options.clone()),
    })
}

/// One (instance, persona, run) completion to obtain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WorkItem {
    pub instance_index: usize,
    pub instance_id: String,
    pub persona_id: String,
    /// 1-based run number.
    pub run: u32,
}

impl WorkItem {
    /// Stable human-readable key, unique within a plan.
    pub fn key(&self) -> String {
        format!("{}::{}::run{}", self.instance_id, self.persona_id, self.run)
    }
}

/// Instance-major cartesian product of instances × personas × runs.
pub fn plan_run(instances: &[Instance], personas: &[&Persona], runs: u32) -> Result<Vec<WorkItem>> {
    if runs == 0 {
        return Err(Error::InvalidInput("runs must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(instances.len() * personas.len() * runs as usize);
    for (instance_index, inst) in instances.iter().enumerate() {
        for persona in personas {
            for run in 1..=runs {
                out.push(WorkItem {
                    instance_index,
                    instance_id: inst.id.clone(),
                    persona_id: persona.id.clone(),
                    run,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::corpus::{synthetic_hate3, CorpusFormat};
    use crate::personas::{baseline, by_id};

    fn hate_instance() -> Instance {
        synthetic_hate3(1, 3).remove(0)
    }

    fn cose_instance() -> Instance {
        let line = r#"{"id":"c1","tokens":["Where","do","you","keep","milk","?"],"task":"cose","options":["fridge","shelf","car"],"gold":{"BY":{"label":0}}}"#;
        crate::corpus::parse_corpus(line, CorpusFormat::BrwrrJson, std::path::Path::new("mem"))
            .unwrap()
            .remove(0)
    }

    fn sst_instance() -> Instance {
        let line = r#"{"id":"s1","tokens":["a","moving","film"],"task":"sst","gold":{"BY":{"label":"positive"}}}"#;
        crate::corpus::parse_corpus(line, CorpusFormat::BrwrrJson, std::path::Path::new("mem"))
            .unwrap()
            .remove(0)
    }

    fn spec(task: Task, persona: &Persona, variant: Variant, reasoning_field: bool) -> PromptSpec<'_> {
        PromptSpec {
            task,
            persona,
            variant,
            reasoning_field,
        }
    }

    #[test]
    fn hate_baseline_exact() {
        let inst = hate_instance();
        let p = render(&spec(Task::Hate3, baseline(), Variant::Cot, false), &inst).unwrap();
        let expected = format!(
            "Given the following text post, classify it into one of the available categories:\n\n\
Available categories: Hate speech, Offensive language, Normal\n\n\
First, think step by step, explaining your reasoning inside <think>...</think> tags.\n\n\
Then, respond with a JSON object in this format (and no other text):\n\n\
{{\n  \"label\": \"<one of the above categories>\",\n  \"rationale\": [\"word1\", \"word2\", \"...\"]\n}}\n\n\
Input:\n{}",
            inst.text()
        );
        assert_eq!(p.text, expected);
        assert_eq!(p.schema.keys, vec!["label", "rationale"]);
    }

    #[test]
    fn reasoning_field_adds_key() {
        let inst = hate_instance();
        let p = render(&spec(Task::Hate3, baseline(), Variant::Cot, true), &inst).unwrap();
        assert!(p.text.contains(
            "\"rationale\": [\"word1\", \"word2\", \"...\"],\n  \"reasoning\": \"<your reasoning>\"\n}"
        ));
        assert!(p.schema.has_reasoning());
    }

    #[test]
    fn no_cot_drops_only_the_think_paragraph() {
        let inst = hate_instance();
        for persona in [baseline(), by_id("age_15").unwrap()] {
            let cot = render(&spec(Task::Hate3, persona, Variant::Cot, false), &inst).unwrap();
            let plain = render(&spec(Task::Hate3, persona, Variant::NoCot, false), &inst).unwrap();
            assert!(cot.text.contains("<think>"));
            assert!(!plain.text.contains("<think>"));
            let para_start = cot.text.find("First, think").unwrap();
            let para_end = cot.text[para_start..].find("\n\n").unwrap() + para_start + 2;
            let mut stripped = cot.text.clone();
            stripped.replace_range(para_start..para_end, "");
            assert_eq!(stripped, plain.text);
        }
    }

    #[test]
    fn persona_prompts() {
        let inst = hate_instance();
        let p = render(&spec(Task::Hate3, by_id("religion_atheist").unwrap(), Variant::Cot, false), &inst).unwrap();
        assert!(p.text.starts_with("Step into the shoes of a real person who is an atheist.\n\n"));
        assert!(p.text.contains("Available categories for classification:\nHate speech, Offensive language, Normal"));

        let sst = sst_instance();
        let p = render(&spec(Task::Sst3, by_id("WYM").unwrap(), Variant::Cot, false), &sst).unwrap();
        assert!(p.text.starts_with("Step into the shoes of a real person who is a 25-year-old Caucasian male."));
        assert!(p.text.contains("Stay fully in character"));
        assert!(p.text.ends_with("Sentence:\na moving film\n\nRules:\n\n- Stay fully in character; do not break persona or add explanations outside the JSON."));
    }

    #[test]
    fn cose_options_and_rules() {
        let inst = cose_instance();
        let p = render(&spec(Task::Cose, by_id("LOF").unwrap(), Variant::Cot, false), &inst).unwrap();
        assert!(p.text.contains("Options:\n0. fridge\n1. shelf\n2. car\n"));
        assert!(p.text.contains("- The value for \"answer\" must be copied verbatim from the options list."));
        assert!(p.text.contains("- \"answer_index\" must match the position (0-based) in the options list."));
        assert!(p.text.contains("include it in \"rationale\"."));
        assert_eq!(p.schema.options, vec!["fridge", "shelf", "car"]);
        let b = render(&spec(Task::Cose, baseline(), Variant::Cot, false), &inst).unwrap();
        assert!(b.text.contains("Question:\nWhere do you keep milk ?\n\nOptions:\n0. fridge"));
    }

    #[test]
    fn task_mismatch() {
        let inst = hate_instance();
        assert!(render(&spec(Task::Sst3, baseline(), Variant::Cot, false), &inst).is_err());
    }

    #[test]
    fn input_text_is_not_rescanned() {
        let mut inst = hate_instance();
        inst.tokens[0].surface = "{{options}}".into();
        let p = render(&spec(Task::Hate3, baseline(), Variant::Cot, false), &inst).unwrap();
        assert!(p.text.contains("Input:\n{{options}}"));
    }

    #[test]
    fn template_hash_snapshot() {
        let hashes = template_hashes();
        assert_eq!(hashes.len(), 6);
        // Fixed so any edit to a template asset is a deliberate, visible change.
        let digest = hex::encode(Sha256::digest(
            hashes.values().cloned().collect::<Vec<_>>().join(",").as_bytes(),
        ));
        assert_eq!(&digest[..16], TEMPLATE_SET_DIGEST_PREFIX);
    }

    const TEMPLATE_SET_DIGEST_PREFIX: &str = "01b217007e50968d";

    #[test]
    fn plan_cardinalities_and_keys() {
        let instances = synthetic_hate3(7, 1);
        let personas: Vec<&Persona> = crate::personas::singles().take(4).collect();
        let plan = plan_run(&instances, &personas, 3).unwrap();
        assert_eq!(plan.len(), 7 * 4 * 3);
        let keys: BTreeSet<String> = plan.iter().map(WorkItem::key).collect();
        assert_eq!(keys.len(), plan.len());
        assert_eq!(plan[0].instance_id, plan[11].instance_id);
        assert_ne!(plan[0].instance_id, plan[12].instance_id);
        assert!(plan_run(&instances, &personas, 0).is_err());
        assert_eq!(plan_run(&instances[..1], &personas[..1], 1).unwrap().len(), 1);
    }
}
