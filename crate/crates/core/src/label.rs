use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One of the eleven annotation roles: eight functional-chunk (adverbial)
/// labels plus the subject, verb and object anchors.
///
/// The declaration order is the canonical order used for tables, tie-breaks
/// and matrix axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TagLabel {
    Time,
    Place,
    Manner,
    Cause,
    Effect,
    Condition,
    Purpose,
    Concession,
    Subject,
    Verb,
    Object,
}

/// The three SVO anchor roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Anchor {
    Subject,
    Verb,
    Object,
}

impl TagLabel {
    pub const ALL: [TagLabel; 11] = [
        TagLabel::Time,
        TagLabel::Place,
        TagLabel::Manner,
        TagLabel::Cause,
        TagLabel::Effect,
        TagLabel::Condition,
        TagLabel::Purpose,
        TagLabel::Concession,
        TagLabel::Subject,
        TagLabel::Verb,
        TagLabel::Object,
    ];

    /// The functional-chunk subset, in canonical order.
    pub const FUNCTIONAL: [TagLabel; 8] = [
        TagLabel::Time,
        TagLabel::Place,
        TagLabel::Manner,
        TagLabel::Cause,
        TagLabel::Effect,
        TagLabel::Condition,
        TagLabel::Purpose,
        TagLabel::Concession,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TagLabel::Time => "time",
            TagLabel::Place => "place",
            TagLabel::Manner => "manner",
            TagLabel::Cause => "cause",
            TagLabel::Effect => "effect",
            TagLabel::Condition => "condition",
            TagLabel::Purpose => "purpose",
            TagLabel::Concession => "concession",
            TagLabel::Subject => "S",
            TagLabel::Verb => "V",
            TagLabel::Object => "O",
        }
    }

    pub fn is_functional(self) -> bool {
        self.fc_index().is_some()
    }

    /// Position of a functional-chunk label on the 8-label axis.
    pub fn fc_index(self) -> Option<usize> {
        TagLabel::FUNCTIONAL.iter().position(|&l| l == self)
    }

    pub fn anchor(self) -> Option<Anchor> {
        match self {
            TagLabel::Subject => Some(Anchor::Subject),
            TagLabel::Verb => Some(Anchor::Verb),
            TagLabel::Object => Some(Anchor::Object),
            _ => None,
        }
    }

    /// Case-insensitive lookup used by the tag parser.
    pub fn parse_name(name: &str) -> Option<TagLabel> {
        TagLabel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(name))
    }

    /// The `<label>` form used in rendered patterns.
    pub fn tag(self) -> String {
        format!("<{}>", self.as_str())
    }
}

impl Anchor {
    pub const ALL: [Anchor; 3] = [Anchor::Subject, Anchor::Verb, Anchor::Object];

    pub fn label(self) -> TagLabel {
        match self {
            Anchor::Subject => TagLabel::Subject,
            Anchor::Verb => TagLabel::Verb,
            Anchor::Object => TagLabel::Object,
        }
    }
}

impl fmt::Display for TagLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label().as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown label `{0}`")]
pub struct UnknownLabel(pub String);

impl FromStr for TagLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim().trim_start_matches('<').trim_end_matches('>');
        TagLabel::parse_name(trimmed).ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

impl FromStr for Anchor {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<TagLabel>()?
            .anchor()
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

impl Serialize for TagLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for TagLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Renders a label sequence as `<S><V><effect>`.
pub fn render_pattern(labels: &[TagLabel]) -> String {
    labels.iter().map(|l| l.tag()).collect()
}
