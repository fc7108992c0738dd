//! Shared parser fixture check.

use persona_audit::label::{Label, Task};
use persona_audit::parsing::{parse_completion, ParseStatus};
use persona_audit::prompting::OutputSchema;
use serde::Deserialize;
use serde_json::Value;

#[derive(Deserialize)]
pub struct Case {
    pub name: String,
    pub task: Task,
    pub reasoning: bool,
    pub options: Vec<String>,
    pub text: String,
    pub status: ParseStatus,
    pub label: Value,
    pub rationale: Vec<String>,
    pub failure: Option<String>,
}

pub fn cases() -> Vec<Case> {
    serde_json::from_str(include_str!("../fixtures/parser_cases.json")).unwrap()
}

fn expected_label(task: Task, v: &Value) -> Option<Label> {
    match v {
        Value::Null => None,
        Value::Number(n) => Some(Label::Choice(n.as_u64().unwrap() as usize)),
        Value::String(s) => Some(Label::parse(task, s).expect("fixture label")),
        other => panic!("bad fixture label {other}"),
    }
}

/// Names and parses of fixtures whose (status, label, rationale, failure)
/// differ from the expectation.
pub fn mismatches(cases: &[Case]) -> Vec<String> {
    let mut out = Vec::new();
    for c in cases {
        let schema = OutputSchema::new(c.task, c.reasoning, c.options.clone());
        let got = parse_completion(&c.text, &schema);
        let ok = got.status == c.status
            && got.label == expected_label(c.task, &c.label)
            && got.rationale_words == c.rationale
            && got.failure.as_ref().map(|f| f.code().to_string()) == c.failure;
        if !ok {
            out.push(format!("{}: got {:?}", c.name, got));
        }
    }
    out
}
