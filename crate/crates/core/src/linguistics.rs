//! Word counts and Flesch Reading Ease of reasoning text.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::parsing::AnnotationRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextProfile {
    pub word_count: usize,
    pub sentence_count: usize,
    pub syllable_count: usize,
    pub flesch: f64,
}

pub fn flesch(words: usize, sentences: usize, syllables: usize) -> f64 {
    206.835 - 1.015 * (words as f64 / sentences as f64) - 84.6 * (syllables as f64 / words as f64)
}

/// Vowel-group syllable estimate: runs of `aeiouy`, minus a trailing silent
/// `e` when another group exists, at least 1.
pub fn syllables(word: &str) -> usize {
    let letters: Vec<char> = word.chars().filter(|c| c.is_alphabetic()).flat_map(char::to_lowercase).collect();
    let is_vowel = |c: char| "aeiouy".contains(c);
    let mut groups = 0;
    let mut prev = false;
    for &c in &letters {
        let v = is_vowel(c);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    if groups > 1 && letters.last() == Some(&'e') {
        groups -= 1;
    }
    groups.max(1)
}

fn is_word(unit: &str) -> bool {
    unit.chars().any(char::is_alphabetic)
}

/// Profile of `text`, or `None` when it has no words.
pub fn profile(text: &str) -> Option<TextProfile> {
    let words: Vec<&str> = text.split_whitespace().filter(|w| is_word(w)).collect();
    if words.is_empty() {
        return None;
    }
    let sentence_count = text
        .split(['.', '!', '?'])
        .filter(|seg| seg.split_whitespace().any(is_word))
        .count()
        .max(1);
    let syllable_count = words.iter().map(|w| syllables(w)).sum();
    Some(TextProfile {
        word_count: words.len(),
        sentence_count,
        syllable_count,
        flesch: flesch(words.len(), sentence_count, syllable_count),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinguisticsRow {
    pub persona_id: String,
    pub model_name: String,
    pub texts: usize,
    pub avg_words: f64,
    pub avg_flesch: f64,
}

/// Average profile per (persona, model) over usable records with non-empty
/// reasoning. Cells without any such record are absent.
pub fn profile_by_persona(records: &[AnnotationRecord]) -> Vec<LinguisticsRow> {
    let mut cells: BTreeMap<(&str, &str), Vec<TextProfile>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_usable()) {
        if let Some(p) = profile(&r.reasoning_text) {
            cells.entry((r.persona_id.as_str(), r.model_name.as_str())).or_default().push(p);
        }
    }
    cells
        .into_iter()
        .map(|((persona, model), ps)| {
            let n = ps.len() as f64;
            LinguisticsRow {
                persona_id: persona.to_string(),
                model_name: model.to_string(),
                texts: ps.len(),
                avg_words: ps.iter().map(|p| p.word_count as f64).sum::<f64>() / n,
                avg_flesch: ps.iter().map(|p| p.flesch).sum::<f64>() / n,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn go_go_go() {
        let p = profile("Go. Go. Go.").unwrap();
        assert_eq!((p.word_count, p.sentence_count, p.syllable_count), (3, 3, 3));
        assert!((p.flesch - 121.22).abs() < 1e-9);
    }

    #[test]
    fn monosyllabic_sentence() {
        let p = profile("the cat sat on a mat and it was fat").unwrap();
        assert_eq!((p.word_count, p.sentence_count, p.syllable_count), (10, 1, 10));
        assert!((p.flesch - 112.085).abs() < 1e-9);
    }

    #[test]
    fn empty_and_wordless() {
        assert_eq!(profile(""), None);
        assert_eq!(profile("  42 ... !! "), None);
    }

    #[test]
    fn syllable_rule() {
        assert_eq!(syllables("make"), 1);
        assert_eq!(syllables("the"), 1);
        assert_eq!(syllables("reading"), 2);
        assert_eq!(syllables("rhythm"), 1);
        assert_eq!(syllables("Beautiful,"), 3);
        assert_eq!(syllables("psst"), 1);
    }

    #[test]
    fn flesch_monotone() {
        assert!(flesch(10, 1, 15) < flesch(10, 1, 14));
        assert!(flesch(20, 1, 20) < flesch(20, 2, 20));
    }
}
