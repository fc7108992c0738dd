//! Task kinds, label sets and rationale masks shared across the pipeline.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// The three evaluation tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Three-way hate speech classification (Normal / Offensive language / Hate speech).
    Hate3,
    /// Commonsense multiple choice; the label is an option index.
    Cose,
    /// Three-way sentiment (Positive / Negative / No sentiment).
    Sst3,
}

impl Task {
    /// Closed label set, in ordinal order where one exists. Empty for `Cose`.
    pub fn labels(self) -> &'static [Label] {
        match self {
            Task::Hate3 => &[Label::Normal, Label::Offensive, Label::HateSpeech],
            Task::Sst3 => &[Label::Negative, Label::NoSentiment, Label::Positive],
            Task::Cose => &[],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Hate3 => "hate3",
            Task::Cose => "cose",
            Task::Sst3 => "sst3",
        }
    }

    /// Whether `label` is admissible for this task. Option indices are
    /// range-checked separately against the instance's options.
    pub fn accepts(self, label: Label) -> bool {
        match self {
            Task::Cose => matches!(label, Label::Choice(_)),
            _ => self.labels().contains(&label),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A task label. Named variants serialize as their display strings, option
/// choices as bare integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Normal,
    Offensive,
    HateSpeech,
    Positive,
    Negative,
    NoSentiment,
    Choice(usize),
}

impl Label {
    pub fn as_str(&self) -> std::borrow::Cow<'static, str> {
        match self {
            Label::Normal => "Normal".into(),
            Label::Offensive => "Offensive language".into(),
            Label::HateSpeech => "Hate speech".into(),
            Label::Positive => "Positive".into(),
            Label::Negative => "Negative".into(),
            Label::NoSentiment => "No sentiment".into(),
            Label::Choice(i) => i.to_string().into(),
        }
    }

    /// Short code used in over-flagging tables (N/O/H, P/Neg/NS).
    pub fn short(&self) -> String {
        match self {
            Label::Normal => "N".into(),
            Label::Offensive => "O".into(),
            Label::HateSpeech => "H".into(),
            Label::Positive => "P".into(),
            Label::Negative => "Neg".into(),
            Label::NoSentiment => "NS".into(),
            Label::Choice(i) => i.to_string(),
        }
    }

    /// Normalize a free-form label string for `task`.
    ///
    /// Matching is case-insensitive and ignores surrounding quotes and
    /// punctuation as well as `_`/`-` separators. Returns `None` for anything
    /// outside the alias table.
    pub fn parse(task: Task, raw: &str) -> Option<Label> {
        let key: String = raw
            .trim()
            .trim_matches(|c: char| !c.is_alphanumeric())
            .to_lowercase()
            .chars()
            .map(|c| if c == '_' || c == '-' { ' ' } else { c })
            .collect();
        let key = key.split_whitespace().collect::<Vec<_>>().join(" ");
        match task {
            Task::Hate3 => match key.as_str() {
                "normal" => Some(Label::Normal),
                "offensive" | "offensive language" => Some(Label::Offensive),
                "hate" | "hate speech" | "hatespeech" => Some(Label::HateSpeech),
                _ => None,
            },
            Task::Sst3 => match key.as_str() {
                "positive" => Some(Label::Positive),
                "negative" => Some(Label::Negative),
                "no sentiment" | "nosentiment" | "neutral" | "none" => Some(Label::NoSentiment),
                _ => None,
            },
            Task::Cose => key.parse::<usize>().ok().map(Label::Choice),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_str())
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Label::Choice(i) => serializer.serialize_u64(*i as u64),
            other => serializer.serialize_str(&other.as_str()),
        }
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct LabelVisitor;

        impl Visitor<'_> for LabelVisitor {
            type Value = Label;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a label string or option index")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Label, E> {
                Ok(Label::Choice(v as usize))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Label, E> {
                usize::try_from(v)
                    .map(Label::Choice)
                    .map_err(|_| E::custom("negative option index"))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Label, E> {
                Label::parse(Task::Hate3, v)
                    .or_else(|| Label::parse(Task::Sst3, v))
                    .ok_or_else(|| E::custom(format!("unknown label `{v}`")))
            }
        }

        deserializer.deserialize_any(LabelVisitor)
    }
}

/// Ordinal severity scale for hate3 labels: Normal 0, Offensive 1, Hate 2.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OrdinalScale;

impl OrdinalScale {
    pub fn value(self, label: Label) -> Option<i32> {
        match label {
            Label::Normal => Some(0),
            Label::Offensive => Some(1),
            Label::HateSpeech => Some(2),
            _ => None,
        }
    }

    pub fn label(self, value: i32) -> Option<Label> {
        match value {
            0 => Some(Label::Normal),
            1 => Some(Label::Offensive),
            2 => Some(Label::HateSpeech),
            _ => None,
        }
    }
}

/// Binary rationale mask over an instance's tokens. Serialized as `[0, 1, ...]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Mask(Vec<bool>);

impl Mask {
    pub fn zeros(len: usize) -> Self {
        Mask(vec![false; len])
    }

    pub fn from_bits(bits: impl IntoIterator<Item = u8>) -> Self {
        Mask(bits.into_iter().map(|b| b != 0).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    pub fn is_all_zero(&self) -> bool {
        !self.0.iter().any(|b| *b)
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.0.iter().copied()
    }
}

impl From<Vec<bool>> for Mask {
    fn from(v: Vec<bool>) -> Self {
        Mask(v)
    }
}

impl Serialize for Mask {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter().map(|b| u8::from(*b)))
    }
}

impl<'de> Deserialize<'de> for Mask {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = Vec::<u8>::deserialize(deserializer)?;
        if let Some(bad) = raw.iter().find(|b| **b > 1) {
            return Err(de::Error::custom(format!("mask entries must be 0 or 1, got {bad}")));
        }
        Ok(Mask::from_bits(raw))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alias_table() {
        assert_eq!(Label::parse(Task::Hate3, "offensive"), Some(Label::Offensive));
        assert_eq!(Label::parse(Task::Hate3, "HATE"), Some(Label::HateSpeech));
        assert_eq!(Label::parse(Task::Hate3, "hatespeech"), Some(Label::HateSpeech));
        assert_eq!(Label::parse(Task::Hate3, " \"Hate speech\". "), Some(Label::HateSpeech));
        assert_eq!(Label::parse(Task::Sst3, "neutral"), Some(Label::NoSentiment));
        assert_eq!(Label::parse(Task::Sst3, "No Sentiment"), Some(Label::NoSentiment));
        assert_eq!(Label::parse(Task::Sst3, "no_sentiment"), Some(Label::NoSentiment));
        assert_eq!(Label::parse(Task::Hate3, "positive"), None);
        assert_eq!(Label::parse(Task::Cose, "2"), Some(Label::Choice(2)));
    }

    #[test]
    fn label_serde() {
        let json = serde_json::to_string(&[Label::Offensive, Label::Choice(3)]).unwrap();
        assert_eq!(json, r#"["Offensive language",3]"#);
        let back: Vec<Label> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![Label::Offensive, Label::Choice(3)]);
    }

    #[test]
    fn mask_rejects_non_binary() {
        assert!(serde_json::from_str::<Mask>("[0,1,2]").is_err());
        let m: Mask = serde_json::from_str("[0,1,1]").unwrap();
        assert_eq!(m.count_ones(), 2);
        assert_eq!(serde_json::to_string(&m).unwrap(), "[0,1,1]");
    }
}
