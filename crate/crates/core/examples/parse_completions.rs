//! Parse raw model completions into labels, rationales and reasoning.

use persona_audit::corpus::Token;
use persona_audit::label::Task;
use persona_audit::parsing::{parse_completion, parse_cose, project_mask};
use persona_audit::prompting::OutputSchema;

fn main() {
    let schema = OutputSchema::new(Task::Hate3, false, vec![]);
    let completions = [
        "<think>The post calls a group vermin.</think>\n{\"label\": \"Hate speech\", \"rationale\": [\"vermin\"]}",
        "```json\n{'label': 'offensive', 'rationale': ['idiots',],}\n```",
        "{\"label\": \"Normal\", \"rationale\": [], \"reasoning\": \"Nothing harmful here.\"}",
        "I'm sorry, I can't help with that.",
        "{\"label\": \"Hate speech\", \"rationale\": [\"vermin\"",
    ];
    for text in completions {
        let p = parse_completion(text, &schema);
        println!(
            "{:<9} {:<20} {:?} {}",
            format!("{:?}", p.status),
            p.label.map(|l| l.to_string()).unwrap_or_else(|| "-".into()),
            p.rationale_words,
            p.failure.map(|f| f.code().to_string()).unwrap_or_default()
        );
    }

    let tokens: Vec<Token> = ["they", "are", "Vermin,", "vermin!"]
        .iter()
        .enumerate()
        .map(|(index, s)| Token {
            index,
            surface: s.to_string(),
        })
        .collect();
    let proj = project_mask(&["vermin".into(), "rats".into()], &tokens);
    println!("mask {:?}, unmatched {:?}", proj.mask.bits(), proj.unmatched);

    let options: Vec<String> = ["bakery", "library", "bank"].iter().map(|s| s.to_string()).collect();
    let cose = parse_cose("{\"answer\": \"bakery\", \"answer_index\": 2, \"rationale\": [\"bread\"]}", &options);
    println!("cose answer {:?} ({:?})", cose.answer_index, cose.status);
}
