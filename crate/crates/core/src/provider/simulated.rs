use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::{ChatBackend, Completion, Request};
use crate::corpus::Instance;
use crate::error::{Error, Result};
use crate::label::{Label, Task};
use crate::personas::Persona;
use crate::prompting::Variant;

/// With `probability`, move the gold label `drift` steps along the label
/// order, clamped to the ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bias {
    pub probability: f64,
    pub drift: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulatedAnnotatorParams {
    pub seed: u64,
    /// Keyed by persona id; personas not listed are unbiased.
    pub bias: BTreeMap<String, Bias>,
    /// Chance that a gold rationale token is reproduced.
    pub fidelity: f64,
    /// Chance that a non-gold token is marked.
    pub false_mark_rate: f64,
}

impl Default for SimulatedAnnotatorParams {
    fn default() -> Self {
        SimulatedAnnotatorParams {
            seed: 0,
            bias: BTreeMap::new(),
            fidelity: 1.0,
            false_mark_rate: 0.0,
        }
    }
}

impl SimulatedAnnotatorParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} = {p} is not a probability")))
            }
        };
        unit("fidelity", self.fidelity)?;
        unit("false_mark_rate", self.false_mark_rate)?;
        for (id, b) in &self.bias {
            unit(&format!("bias[{id}].probability"), b.probability)?;
        }
        Ok(())
    }
}

/// Offline annotator: gold plus controlled noise, a pure function of
/// (seed, instance, persona, run).
#[derive(Debug, Clone)]
pub struct SimulatedAnnotator {
    params: SimulatedAnnotatorParams,
}

fn item_rng(seed: u64, instance: &str, persona: &str, run: u32) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for part in [instance, persona] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    h.update(run.to_le_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

impl SimulatedAnnotator {
    pub fn new(params: SimulatedAnnotatorParams) -> Result<Self> {
        params.validate()?;
        Ok(SimulatedAnnotator { params })
    }

    pub fn params(&self) -> &SimulatedAnnotatorParams {
        &self.params
    }

    /// Completion text for one work item. `reasoning_field` puts the
    /// reasoning in the JSON instead of a think block.
    pub fn simulate(&self, instance: &Instance, persona: &Persona, run: u32, variant: Variant, reasoning_field: bool) -> Result<String> {
        let gold = instance.canonical.as_ref().ok_or_else(|| Error::Validation {
            id: instance.id.clone(),
            message: "simulated annotation needs a canonical gold".into(),
        })?;
        let mut rng = item_rng(self.params.seed, &instance.id, &persona.id, run);

        let shift_roll: f64 = rng.gen();
        let label = match self.params.bias.get(&persona.id) {
            Some(b) if shift_roll < b.probability => shifted(instance, gold.label, b.drift),
            _ => gold.label,
        };

        let mut words = Vec::new();
        for (tok, marked) in instance.tokens.iter().zip(gold.rationale_mask.iter()) {
            let p = if marked { self.params.fidelity } else { self.params.false_mark_rate };
            if rng.gen::<f64>() < p {
                words.push(tok.surface.clone());
            }
        }

        let mut obj = serde_json::Map::new();
        match (instance.task, label) {
            (Task::Cose, Label::Choice(i)) => {
                obj.insert("answer".into(), json!(instance.options.get(i).cloned().unwrap_or_default()));
                obj.insert("answer_index".into(), json!(i));
            }
            (_, l) => {
                obj.insert("label".into(), json!(l.as_str()));
            }
        }
        obj.insert("rationale".into(), json!(words));
        let reasoning = reasoning_text(persona, &words, &instance_label_text(instance, label));
        if reasoning_field {
            obj.insert("reasoning".into(), json!(reasoning));
        }
        let body = serde_json::to_string_pretty(&Value::Object(obj))?;
        Ok(if variant == Variant::Cot && !reasoning_field {
            format!("<think>\n{reasoning}\n</think>\n{body}")
        } else {
            body
        })
    }
}

fn instance_label_text(instance: &Instance, label: Label) -> String {
    match label {
        Label::Choice(i) => instance.options.get(i).cloned().unwrap_or_default(),
        l => l.as_str().into_owned(),
    }
}

fn shifted(instance: &Instance, gold: Label, drift: i32) -> Label {
    let order: Vec<Label> = match instance.task {
        Task::Cose => (0..instance.options.len()).map(Label::Choice).collect(),
        t => t.labels().to_vec(),
    };
    let Some(pos) = order.iter().position(|l| *l == gold) else {
        return gold;
    };
    let target = (pos as i64 + i64::from(drift)).clamp(0, order.len() as i64 - 1);
    order[target as usize]
}

fn reasoning_text(persona: &Persona, words: &[String], label: &str) -> String {
    let opener = if persona.is_baseline() {
        "I read the text carefully.".to_string()
    } else {
        format!("As someone who {}, I read the text carefully.", persona.predicate())
    };
    let focus = if words.is_empty() {
        "No single word drives my judgment.".to_string()
    } else {
        format!("The words that stand out to me are {}.", words.join(", "))
    };
    format!("{opener} {focus} My answer is {label}.")
}

impl ChatBackend for SimulatedAnnotator {
    fn model_name(&self) -> &str {
        "simulated"
    }

    fn cache_params(&self) -> Value {
        serde_json::to_value(&self.params).expect("params serialize")
    }

    fn call(&self, req: &Request<'_>) -> Result<Completion> {
        let text = self.simulate(req.instance, req.persona, req.item.run, req.variant, req.prompt.schema.has_reasoning())?;
        Ok(Completion { text, attempt: 1 })
    }
}
