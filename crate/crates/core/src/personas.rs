//! Closed persona registry: the no-persona baseline, 21 single-attribute
//! personas over seven categories and 12 composite (age × gender × ethnicity)
//! personas.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

/// Bumped whenever ids, attribute values or phrasings change.
pub const REGISTRY_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PersonaKind {
    Baseline,
    Single,
    Composite,
}

/// Attribute categories. The first seven are the single-persona categories;
/// `Ethnicity` only appears in composite personas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeCategory {
    Age,
    Gender,
    Education,
    Race,
    Religion,
    PoliticalView,
    Loneliness,
    Ethnicity,
}

impl AttributeCategory {
    pub const SINGLE: [AttributeCategory; 7] = [
        AttributeCategory::Age,
        AttributeCategory::Gender,
        AttributeCategory::Education,
        AttributeCategory::Race,
        AttributeCategory::Religion,
        AttributeCategory::PoliticalView,
        AttributeCategory::Loneliness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttributeCategory::Age => "age",
            AttributeCategory::Gender => "gender",
            AttributeCategory::Education => "education",
            AttributeCategory::Race => "race",
            AttributeCategory::Religion => "religion",
            AttributeCategory::PoliticalView => "political_view",
            AttributeCategory::Loneliness => "loneliness",
            AttributeCategory::Ethnicity => "ethnicity",
        }
    }

    /// Closed value list for single-attribute personas, paired with the
    /// id suffix and the rendered description phrase.
    fn single_values(self) -> &'static [(&'static str, &'static str, &'static str)] {
        match self {
            AttributeCategory::Age => &[
                ("15", "15", "is 15 years old"),
                ("35", "35", "is 35 years old"),
                ("65", "65", "is 65 years old"),
            ],
            AttributeCategory::Education => &[
                ("No formal education", "no_formal", "has no formal education"),
                ("High school education", "high_school", "has a high school education"),
                ("Higher education", "higher", "has a higher education"),
            ],
            AttributeCategory::Gender => &[
                ("Male", "male", "is male"),
                ("Female", "female", "is female"),
            ],
            AttributeCategory::Loneliness => &[
                ("Not lonely", "not_lonely", "is not lonely"),
                ("Somewhat lonely", "somewhat_lonely", "is somewhat lonely"),
            ],
            AttributeCategory::PoliticalView => &[
                ("Left-wing", "left_wing", "identifies as left-wing"),
                ("Right-wing", "right_wing", "identifies as right-wing"),
                ("Centrist", "centrist", "identifies as a centrist"),
            ],
            AttributeCategory::Race => &[
                ("White", "white", "is White"),
                ("Black", "black", "is Black"),
                ("Asian", "asian", "is Asian"),
            ],
            AttributeCategory::Religion => &[
                ("Christian", "christian", "is a Christian"),
                ("Muslim", "muslim", "is a Muslim"),
                ("Jewish", "jewish", "is Jewish"),
                ("Atheist", "atheist", "is an atheist"),
                ("Hindu", "hindu", "is a Hindu"),
            ],
            AttributeCategory::Ethnicity => &[],
        }
    }

    /// The attribute values of this category, in registry order.
    pub fn values(self) -> Vec<&'static str> {
        self.single_values().iter().map(|v| v.0).collect()
    }
}

impl fmt::Display for AttributeCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Persona {
    pub id: String,
    pub kind: PersonaKind,
    pub attributes: BTreeMap<AttributeCategory, String>,
    pub description: String,
}

impl Persona {
    pub fn is_baseline(&self) -> bool {
        self.kind == PersonaKind::Baseline
    }

    /// Relative-clause predicate completing "a real person who ...".
    ///
    /// Single-attribute phrases already carry their verb; composite
    /// descriptions are noun phrases and get a leading "is".
    pub fn predicate(&self) -> String {
        match self.kind {
            PersonaKind::Baseline => String::new(),
            PersonaKind::Single => self.description.clone(),
            PersonaKind::Composite => format!("is {}", self.description),
        }
    }

    /// BRWRR demographic group a composite persona mirrors ("BY", "LO", ...).
    pub fn brwrr_group(&self) -> Option<String> {
        (self.kind == PersonaKind::Composite).then(|| self.id[..2].to_string())
    }
}

const COMPOSITE_ETHNICITIES: [(&str, &str); 3] = [
    ("B", "African American"),
    ("W", "Caucasian"),
    ("L", "Hispanic"),
];
const COMPOSITE_AGES: [(&str, &str); 2] = [("Y", "25"), ("O", "45")];
const COMPOSITE_GENDERS: [(&str, &str); 2] = [("M", "Male"), ("F", "Female")];

pub const BASELINE_ID: &str = "baseline";

static REGISTRY: LazyLock<Vec<Persona>> = LazyLock::new(build_registry);

fn build_registry() -> Vec<Persona> {
    let mut out = vec![Persona {
        id: BASELINE_ID.to_string(),
        kind: PersonaKind::Baseline,
        attributes: BTreeMap::new(),
        description: String::new(),
    }];
    for category in AttributeCategory::SINGLE {
        for (value, suffix, phrase) in category.single_values() {
            out.push(Persona {
                id: format!("{}_{}", category.name(), suffix),
                kind: PersonaKind::Single,
                attributes: BTreeMap::from([(category, value.to_string())]),
                description: phrase.to_string(),
            });
        }
    }
    for (eth_code, ethnicity) in COMPOSITE_ETHNICITIES {
        for (age_code, age) in COMPOSITE_AGES {
            for (gender_code, gender) in COMPOSITE_GENDERS {
                out.push(Persona {
                    id: format!("{eth_code}{age_code}{gender_code}"),
                    kind: PersonaKind::Composite,
                    attributes: BTreeMap::from([
                        (AttributeCategory::Age, age.to_string()),
                        (AttributeCategory::Gender, gender.to_string()),
                        (AttributeCategory::Ethnicity, ethnicity.to_string()),
                    ]),
                    description: format!(
                        "a {age}-year-old {ethnicity} {}",
                        gender.to_lowercase()
                    ),
                });
            }
        }
    }
    out
}

/// The full registry: baseline first, then singles by category, then composites.
pub fn registry() -> &'static [Persona] {
    &REGISTRY
}

pub fn by_id(id: &str) -> Option<&'static Persona> {
    REGISTRY.iter().find(|p| p.id == id)
}

pub fn baseline() -> &'static Persona {
    &REGISTRY[0]
}

pub fn singles() -> impl Iterator<Item = &'static Persona> {
    REGISTRY.iter().filter(|p| p.kind == PersonaKind::Single)
}

pub fn composites() -> impl Iterator<Item = &'static Persona> {
    REGISTRY.iter().filter(|p| p.kind == PersonaKind::Composite)
}

pub fn describe(persona: &Persona) -> &str {
    &persona.description
}

/// Attribute category of a single-attribute persona.
pub fn group_of(persona: &Persona) -> Option<AttributeCategory> {
    match persona.kind {
        PersonaKind::Single => persona.attributes.keys().next().copied(),
        _ => None,
    }
}

/// Persona selection by name: `single`, `composite`, `all`, or a list of ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PersonaSelection {
    Named(String),
    Ids(Vec<String>),
}

impl Default for PersonaSelection {
    fn default() -> Self {
        PersonaSelection::Named("single".into())
    }
}

impl PersonaSelection {
    /// Resolve to registry personas, excluding the baseline.
    pub fn resolve(&self) -> Result<Vec<&'static Persona>, String> {
        match self {
            PersonaSelection::Named(n) => match n.as_str() {
                "single" => Ok(singles().collect()),
                "composite" => Ok(composites().collect()),
                "all" => Ok(singles().chain(composites()).collect()),
                "none" => Ok(Vec::new()),
                other => Err(format!("unknown persona selection `{other}`")),
            },
            PersonaSelection::Ids(ids) => ids
                .iter()
                .filter(|id| id.as_str() != BASELINE_ID)
                .map(|id| by_id(id).ok_or_else(|| format!("unknown persona id `{id}`")))
                .collect(),
        }
    }
}
