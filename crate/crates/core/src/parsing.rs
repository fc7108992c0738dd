//! Completion parsing: think-block extraction, JSON payload recovery, label
//! normalization and projection of rationale words onto token masks.
//!
//! The JSON payload is the last top-level object outside `<think>` blocks.
//! When no strictly valid object exists the repair ladder runs (code fences,
//! trailing commas, single quotes, `#`/`//` comments, Python literals,
//! truncated closers) and the result is marked `repaired`. Nothing here
//! panics on arbitrary input.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::corpus::{Instance, Token};
use crate::error::{Error, Result};
use crate::label::{Label, Mask, Task};
use crate::prompting::{OutputSchema, WorkItem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseStatus {
    Ok,
    Repaired,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    NoJson,
    MissingLabel,
    UnknownLabel(String),
    UnresolvableAnswer,
}

impl FailureReason {
    pub fn code(&self) -> &'static str {
        match self {
            FailureReason::NoJson => "no_json",
            FailureReason::MissingLabel => "missing_label",
            FailureReason::UnknownLabel(_) => "unknown_label",
            FailureReason::UnresolvableAnswer => "unresolvable_answer",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedResponse {
    pub label: Option<Label>,
    pub rationale_words: Vec<String>,
    pub reasoning_text: String,
    pub answer_index: Option<usize>,
    pub status: ParseStatus,
    pub failure: Option<FailureReason>,
}

impl ParsedResponse {
    fn failed(reason: FailureReason, reasoning_text: String) -> Self {
        ParsedResponse {
            label: None,
            rationale_words: Vec::new(),
            reasoning_text,
            answer_index: None,
            status: ParseStatus::Failed,
            failure: Some(reason),
        }
    }

    pub fn is_usable(&self) -> bool {
        self.status != ParseStatus::Failed
    }
}

/// Split a completion into (reasoning from think tags, text outside them).
///
/// The reasoning is the content of the final complete `<think>…</think>`
/// pair. A stray `</think>` without an opener treats everything before it as
/// reasoning; an unclosed `<think>` swallows the rest of the text.
fn split_think(text: &str) -> (Option<String>, String, Option<String>) {
    const OPEN: &str = "<think>";
    const CLOSE: &str = "</think>";
    let lower = text.to_ascii_lowercase();
    let mut outside = String::new();
    let mut last_think: Option<String> = None;
    let mut unclosed: Option<String> = None;
    let mut pos = 0;

    // Leading orphan close tag: some servers strip the opening tag.
    if let Some(close) = lower.find(CLOSE) {
        let open = lower.find(OPEN);
        if open.is_none_or(|o| o > close) {
            last_think = Some(text[..close].trim().to_string());
            pos = close + CLOSE.len();
        }
    }

    while pos < text.len() {
        match lower[pos..].find(OPEN) {
            None => {
                outside.push_str(&text[pos..]);
                break;
            }
            Some(rel) => {
                let open = pos + rel;
                outside.push_str(&text[pos..open]);
                let body_start = open + OPEN.len();
                match lower[body_start..].find(CLOSE) {
                    Some(rel_close) => {
                        let close = body_start + rel_close;
                        last_think = Some(text[body_start..close].trim().to_string());
                        pos = close + CLOSE.len();
                    }
                    None => {
                        unclosed = Some(text[body_start..].to_string());
                        break;
                    }
                }
            }
        }
    }
    (last_think, outside, unclosed)
}

/// Byte spans of top-level `{…}` objects. A trailing unterminated object is
/// returned with its missing closers.
fn object_spans(text: &str) -> Vec<(usize, usize, Option<String>)> {
    let bytes = text.as_bytes();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'{' {
            i += 1;
            continue;
        }
        let start = i;
        let mut stack: Vec<u8> = Vec::new();
        let mut in_str = false;
        let mut escaped = false;
        let mut j = i;
        let mut end = None;
        while j < bytes.len() {
            let b = bytes[j];
            if in_str {
                if escaped {
                    escaped = false;
                } else if b == b'\\' {
                    escaped = true;
                } else if b == b'"' {
                    in_str = false;
                }
            } else {
                match b {
                    b'"' => in_str = true,
                    b'{' => stack.push(b'}'),
                    b'[' => stack.push(b']'),
                    b'}' | b']' => {
                        if stack.last() == Some(&b) {
                            stack.pop();
                        } else {
                            break;
                        }
                        if stack.is_empty() {
                            end = Some(j + 1);
                            break;
                        }
                    }
                    _ => {}
                }
            }
            j += 1;
        }
        match end {
            Some(e) => {
                spans.push((start, e, None));
                i = e;
            }
            None if j >= bytes.len() => {
                let mut closers = String::new();
                if in_str {
                    closers.push('"');
                }
                closers.extend(stack.iter().rev().map(|b| *b as char));
                spans.push((start, bytes.len(), Some(closers)));
                break;
            }
            None => i = start + 1,
        }
    }
    spans
}

/// Rewrite near-JSON into JSON: single-quoted strings, comments, trailing
/// commas and Python literals.
fn repair_json(src: &str) -> String {
    let chars: Vec<char> = src.chars().collect();
    let mut out = String::with_capacity(src.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '"' | '\'' => {
                let quote = c;
                out.push('"');
                i += 1;
                while i < chars.len() {
                    let d = chars[i];
                    if d == '\\' && i + 1 < chars.len() {
                        let next = chars[i + 1];
                        if quote == '\'' && next == '\'' {
                            out.push('\'');
                        } else {
                            out.push('\\');
                            out.push(next);
                        }
                        i += 2;
                        continue;
                    }
                    if d == quote {
                        break;
                    }
                    match d {
                        '"' => out.push_str("\\\""),
                        '\n' => out.push_str("\\n"),
                        '\r' => out.push_str("\\r"),
                        '\t' => out.push_str("\\t"),
                        _ => out.push(d),
                    }
                    i += 1;
                }
                out.push('"');
                i += 1;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            ',' => {
                let mut k = i + 1;
                loop {
                    while k < chars.len() && chars[k].is_whitespace() {
                        k += 1;
                    }
                    let comment = chars.get(k) == Some(&'#')
                        || (chars.get(k) == Some(&'/') && chars.get(k + 1) == Some(&'/'));
                    if !comment {
                        break;
                    }
                    while k < chars.len() && chars[k] != '\n' {
                        k += 1;
                    }
                }
                if !matches!(chars.get(k), Some('}') | Some(']')) {
                    out.push(',');
                }
                i += 1;
            }
            _ if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                out.push_str(match word.as_str() {
                    "True" => "true",
                    "False" => "false",
                    "None" => "null",
                    other => other,
                });
            }
            _ => {
                out.push(c);
                i += 1;
            }
        }
    }
    out
}

fn inside_fence(text: &str, start: usize) -> bool {
    text[..start].matches("```").count() % 2 == 1
}

fn get_ci<'a>(obj: &'a Map<String, Value>, key: &str) -> Option<&'a Value> {
    obj.get(key).or_else(|| {
        obj.iter()
            .find(|(k, _)| k.trim().eq_ignore_ascii_case(key))
            .map(|(_, v)| v)
    })
}

/// Locate the payload object. Prefers the last strictly valid object carrying
/// `required`, then the last repairable one.
fn find_payload(text: &str, required: &str) -> Option<(Map<String, Value>, bool)> {
    let spans = object_spans(text);
    let strict: Vec<(Map<String, Value>, bool)> = spans
        .iter()
        .filter(|(_, _, closers)| closers.is_none())
        .filter_map(|(s, e, _)| match serde_json::from_str::<Value>(&text[*s..*e]) {
            Ok(Value::Object(m)) => Some((m, inside_fence(text, *s))),
            _ => None,
        })
        .collect();
    if let Some(hit) = pick(strict, required) {
        return Some(hit);
    }
    let repaired: Vec<(Map<String, Value>, bool)> = spans
        .iter()
        .filter_map(|(s, e, closers)| {
            let mut candidate = repair_json(&text[*s..*e]);
            if let Some(c) = closers {
                candidate = repair_json(&format!("{}{c}", &text[*s..*e]));
            }
            match serde_json::from_str::<Value>(&candidate) {
                Ok(Value::Object(m)) => Some((m, true)),
                _ => None,
            }
        })
        .collect();
    pick(repaired, required)
}

fn pick(mut found: Vec<(Map<String, Value>, bool)>, required: &str) -> Option<(Map<String, Value>, bool)> {
    if let Some(i) = found.iter().rposition(|(m, _)| get_ci(m, required).is_some()) {
        return Some(found.swap_remove(i));
    }
    found.pop()
}

fn value_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn rationale_of(obj: &Map<String, Value>) -> Vec<String> {
    match get_ci(obj, "rationale") {
        Some(Value::Array(items)) => items.iter().map(value_text).filter(|s| !s.is_empty()).collect(),
        Some(Value::String(s)) if !s.trim().is_empty() => vec![s.clone()],
        _ => Vec::new(),
    }
}

struct Extracted {
    payload: Option<(Map<String, Value>, ParseStatus)>,
    reasoning: String,
}

fn extract(text: &str, required: &str) -> Extracted {
    let (think, outside, unclosed) = split_think(text);
    let mut payload = find_payload(&outside, required).map(|(m, repaired)| {
        (m, if repaired { ParseStatus::Repaired } else { ParseStatus::Ok })
    });
    if payload.is_none() {
        // JSON emitted inside an unterminated or final think block
        let fallback = unclosed.as_deref().or(think.as_deref()).unwrap_or("");
        payload = find_payload(fallback, required).map(|(m, _)| (m, ParseStatus::Repaired));
    }
    let reasoning = think
        .or_else(|| {
            payload
                .as_ref()
                .and_then(|(m, _)| get_ci(m, "reasoning"))
                .map(value_text)
        })
        .or_else(|| unclosed.map(|s| s.trim().to_string()))
        .unwrap_or_default();
    Extracted { payload, reasoning }
}

/// Parse one completion against the schema it was prompted with.
pub fn parse_completion(text: &str, schema: &OutputSchema) -> ParsedResponse {
    match schema.task {
        Task::Cose => parse_cose(text, &schema.options),
        task => parse_labelled(text, task),
    }
}

fn parse_labelled(text: &str, task: Task) -> ParsedResponse {
    let Extracted { payload, reasoning } = extract(text, "label");
    let Some((obj, status)) = payload else {
        return ParsedResponse::failed(FailureReason::NoJson, reasoning);
    };
    let raw = match get_ci(&obj, "label") {
        Some(Value::Array(items)) if items.len() == 1 => value_text(&items[0]),
        Some(v) => value_text(v),
        None => return ParsedResponse::failed(FailureReason::MissingLabel, reasoning),
    };
    if raw.trim().is_empty() {
        return ParsedResponse::failed(FailureReason::MissingLabel, reasoning);
    }
    let Some(label) = Label::parse(task, &raw) else {
        return ParsedResponse::failed(FailureReason::UnknownLabel(raw), reasoning);
    };
    ParsedResponse {
        label: Some(label),
        rationale_words: rationale_of(&obj),
        reasoning_text: reasoning,
        answer_index: None,
        status,
        failure: None,
    }
}

/// Parse a multiple-choice completion.
///
/// An `answer` that matches an option verbatim wins over `answer_index`;
/// otherwise an in-range index wins; otherwise the parse fails. Any
/// disagreement between the two fields marks the result `repaired`.
pub fn parse_cose(text: &str, options: &[String]) -> ParsedResponse {
    let Extracted { payload, reasoning } = extract(text, "answer");
    let Some((obj, status)) = payload else {
        return ParsedResponse::failed(FailureReason::NoJson, reasoning);
    };
    let answer = get_ci(&obj, "answer").map(value_text);
    let index = match get_ci(&obj, "answer_index") {
        Some(Value::Number(n)) => n.as_u64().map(|i| i as usize),
        Some(Value::String(s)) => s.trim().parse::<usize>().ok(),
        _ => None,
    };
    let by_text = answer
        .as_deref()
        .and_then(|a| options.iter().position(|o| o == a));
    let resolved = match (by_text, index) {
        (Some(t), Some(i)) if t == i => Some((t, ParseStatus::Ok)),
        (Some(t), _) => Some((t, ParseStatus::Repaired)),
        (None, Some(i)) if i < options.len() => Some((i, ParseStatus::Repaired)),
        _ => None,
    };
    let Some((idx, resolution)) = resolved else {
        return ParsedResponse::failed(FailureReason::UnresolvableAnswer, reasoning);
    };
    ParsedResponse {
        label: Some(Label::Choice(idx)),
        rationale_words: rationale_of(&obj),
        reasoning_text: reasoning,
        answer_index: Some(idx),
        status: status.max(resolution),
        failure: None,
    }
}

/// Casefold and strip leading/trailing non-alphanumeric characters.
pub fn normalize_word(w: &str) -> String {
    w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    pub mask: Mask,
    /// Rationale words that matched no token (after normalization).
    pub unmatched: Vec<String>,
}

/// Mark every token whose normalized form equals a normalized rationale word.
/// Multi-word entries are split on whitespace first.
pub fn project_mask(rationale_words: &[String], tokens: &[Token]) -> Projection {
    let normalized: Vec<String> = tokens.iter().map(|t| normalize_word(&t.surface)).collect();
    let mut mask = Mask::zeros(tokens.len());
    let mut unmatched = Vec::new();
    for word in rationale_words.iter().flat_map(|w| w.split_whitespace()) {
        let key = normalize_word(word);
        if key.is_empty() {
            continue;
        }
        let mut hit = false;
        for (i, t) in normalized.iter().enumerate() {
            if *t == key {
                mask.set(i, true);
                hit = true;
            }
        }
        if !hit {
            unmatched.push(word.to_string());
        }
    }
    Projection { mask, unmatched }
}

/// One parsed (instance, persona, run, model) outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub instance_id: String,
    pub persona_id: String,
    pub run: u32,
    pub model_name: String,
    pub label: Option<Label>,
    pub rationale_mask: Mask,
    pub reasoning_text: String,
    pub parse_status: ParseStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureReason>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unmatched_rationale: Vec<String>,
}

impl AnnotationRecord {
    pub fn from_parsed(item: &WorkItem, instance: &Instance, model_name: &str, parsed: ParsedResponse) -> Self {
        let projection = if parsed.is_usable() {
            project_mask(&parsed.rationale_words, &instance.tokens)
        } else {
            Projection {
                mask: Mask::zeros(instance.len()),
                unmatched: Vec::new(),
            }
        };
        AnnotationRecord {
            instance_id: item.instance_id.clone(),
            persona_id: item.persona_id.clone(),
            run: item.run,
            model_name: model_name.to_string(),
            label: parsed.label,
            rationale_mask: projection.mask,
            reasoning_text: parsed.reasoning_text,
            parse_status: parsed.status,
            failure: parsed.failure,
            unmatched_rationale: projection.unmatched,
        }
    }

    pub fn is_usable(&self) -> bool {
        self.parse_status != ParseStatus::Failed && self.label.is_some()
    }
}

pub fn write_records(path: &Path, records: &[AnnotationRecord]) -> Result<()> {
    let mut file = fs::File::create(path)
        .map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    for r in records {
        let line = serde_json::to_string(r)?;
        writeln!(file, "{line}").map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    }
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<AnnotationRecord>> {
    let file = fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hate() -> OutputSchema {
        OutputSchema::new(Task::Hate3, false, Vec::new())
    }

    fn toks(words: &[&str]) -> Vec<Token> {
        words
            .iter()
            .enumerate()
            .map(|(index, w)| Token {
                index,
                surface: w.to_string(),
            })
            .collect()
    }

    fn words(ws: &[&str]) -> Vec<String> {
        ws.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn clean_with_think() {
        let p = parse_completion("<think>x</think>{\"label\":\"Normal\",\"rationale\":[]}", &hate());
        assert_eq!(p.label, Some(Label::Normal));
        assert_eq!(p.status, ParseStatus::Ok);
        assert_eq!(p.reasoning_text, "x");
        assert!(p.rationale_words.is_empty());
    }

    #[test]
    fn fenced_trailing_comma() {
        let text = "Sure.\n```json\n{\"label\": \"Hate speech\", \"rationale\": [\"vermin\",],}\n```";
        let p = parse_completion(text, &hate());
        assert_eq!(p.label, Some(Label::HateSpeech));
        assert_eq!(p.rationale_words, words(&["vermin"]));
        assert_eq!(p.status, ParseStatus::Repaired);
    }

    #[test]
    fn refusal_fails() {
        let p = parse_completion("I cannot help with that.", &hate());
        assert_eq!(p.status, ParseStatus::Failed);
        assert_eq!(p.failure, Some(FailureReason::NoJson));
    }

    #[test]
    fn last_object_wins_and_think_is_ignored() {
        let text = "<think>maybe {\"label\": \"Hate speech\"}</think>\n{\"label\": \"Offensive\", \"rationale\": [\"idiots\"]}\nActually: {\"label\": \"normal\", \"rationale\": []}";
        let p = parse_completion(text, &hate());
        assert_eq!(p.label, Some(Label::Normal));
        assert_eq!(p.reasoning_text, "maybe {\"label\": \"Hate speech\"}");
    }

    #[test]
    fn reasoning_field_fallback() {
        let text = "{\"label\": \"offensive\", \"rationale\": [\"a\"], \"reasoning\": \"It insults.\"}";
        let p = parse_completion(text, &hate());
        assert_eq!(p.reasoning_text, "It insults.");
        assert_eq!(p.label, Some(Label::Offensive));
    }

    #[test]
    fn single_quotes_and_comments() {
        let text = "{'label': 'Hate speech', 'rationale': ['don\\'t', 'go'], # only for Mistral-Medium\n}";
        let p = parse_completion(text, &hate());
        assert_eq!(p.status, ParseStatus::Repaired);
        assert_eq!(p.rationale_words, words(&["don't", "go"]));
    }

    #[test]
    fn unknown_label() {
        let p = parse_completion("{\"label\": \"Spam\"}", &hate());
        assert_eq!(p.failure, Some(FailureReason::UnknownLabel("Spam".into())));
    }

    #[test]
    fn cose_precedence() {
        let opts = words(&["cat", "dog"]);
        let p = parse_cose("{\"answer\":\"dog\",\"answer_index\":1,\"rationale\":[]}", &opts);
        assert_eq!((p.answer_index, p.status), (Some(1), ParseStatus::Ok));
        let p = parse_cose("{\"answer\":\"dog\",\"answer_index\":0,\"rationale\":[]}", &opts);
        assert_eq!((p.answer_index, p.status), (Some(1), ParseStatus::Repaired));
        let three = words(&["cat", "dog", "eel"]);
        let p = parse_cose("{\"answer\":\"fish\",\"answer_index\":9}", &three);
        assert_eq!(p.status, ParseStatus::Failed);
        assert_eq!(p.failure, Some(FailureReason::UnresolvableAnswer));
        let p = parse_cose("{\"answer\":\"fish\",\"answer_index\":\"2\"}", &three);
        assert_eq!((p.label, p.status), (Some(Label::Choice(2)), ParseStatus::Repaired));
    }

    #[test]
    fn projection() {
        let t = toks(&["the", "cat", "sat"]);
        assert_eq!(project_mask(&words(&["cat"]), &t).mask, Mask::from_bits([0, 1, 0]));
        assert_eq!(project_mask(&words(&["CAT!"]), &toks(&["cat"])).mask, Mask::from_bits([1]));
        let t = toks(&["kill", "all", "white", "south", "africans", "now"]);
        let p = project_mask(&words(&["white", "south africans"]), &t);
        assert_eq!(p.mask, Mask::from_bits([0, 0, 1, 1, 1, 0]));
        assert!(p.unmatched.is_empty());
        let p = project_mask(&words(&["dog", "..."]), &toks(&["the", "cat"]));
        assert_eq!(p.unmatched, words(&["dog"]));
        // all occurrences are marked
        assert_eq!(
            project_mask(&words(&["the"]), &toks(&["the", "cat", "The"])).mask,
            Mask::from_bits([1, 0, 1])
        );
    }

    #[test]
    fn truncated_payload_is_closed() {
        let p = parse_completion("{\"label\": \"Normal\", \"rationale\": [\"a\"", &hate());
        assert_eq!(p.label, Some(Label::Normal));
        assert_eq!(p.status, ParseStatus::Repaired);
    }

    #[test]
    fn orphan_close_tag() {
        let p = parse_completion("thinking here</think>{\"label\":\"Normal\",\"rationale\":[]}", &hate());
        assert_eq!(p.reasoning_text, "thinking here");
        assert_eq!(p.status, ParseStatus::Ok);
    }
}
