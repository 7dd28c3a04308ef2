use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chunkorder_core::{parse_sentence, Mode, TagLabel};
use serde::Deserialize;

use crate::AnnotateError;

pub const MIN_EXAMPLES: usize = 3;

/// Instruction text, paired demonstrations and one example phrase per label.
#[derive(Debug, Clone, PartialEq)]
pub struct FewShotSet {
    pub instruction: String,
    /// `(raw sentence, annotated sentence)` pairs.
    pub examples: Vec<(String, String)>,
    pub per_label_examples: BTreeMap<TagLabel, String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FewShotFile {
    instruction: String,
    examples: Vec<(String, String)>,
    #[serde(default)]
    per_label_examples: BTreeMap<String, String>,
}

impl FewShotSet {
    pub fn from_json(text: &str) -> Result<Self, AnnotateError> {
        let file: FewShotFile =
            serde_json::from_str(text).map_err(|e| AnnotateError::InvalidFewShot(e.to_string()))?;
        let mut per_label_examples = BTreeMap::new();
        for (name, text) in file.per_label_examples {
            let label = TagLabel::parse_name(&name)
                .ok_or_else(|| AnnotateError::InvalidFewShot(format!("unknown label `{name}`")))?;
            per_label_examples.insert(label, text);
        }
        let set = FewShotSet {
            instruction: file.instruction,
            examples: file.examples,
            per_label_examples,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self, AnnotateError> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Requires at least three examples, each of which parses strictly.
    pub fn validate(&self) -> Result<(), AnnotateError> {
        if self.examples.len() < MIN_EXAMPLES {
            return Err(AnnotateError::InvalidFewShot(format!(
                "{} examples given, at least {MIN_EXAMPLES} required",
                self.examples.len()
            )));
        }
        for (i, (_, annotated)) in self.examples.iter().enumerate() {
            parse_sentence(format!("example-{}", i + 1), annotated, Mode::Strict).map_err(|e| {
                AnnotateError::InvalidFewShot(format!("example {}: {e}", i + 1))
            })?;
        }
        Ok(())
    }
}

/// Builds the annotation prompt for one raw sentence.
///
/// The layout is: instruction, label glossary in canonical label order,
/// the paired examples, then the target sentence. Equal inputs always give
/// byte-identical prompts.
pub fn build_prompt(raw: &str, fs: &FewShotSet) -> Result<String, AnnotateError> {
    if fs.examples.is_empty() {
        return Err(AnnotateError::EmptyFewShot);
    }
    let mut lines: Vec<String> = vec![fs.instruction.clone(), String::new(), "Labels:".into()];
    for (label, example) in &fs.per_label_examples {
        lines.push(format!("- {}: {example}", label.tag()));
    }
    lines.push(String::new());
    lines.push("Examples:".into());
    for (input, output) in &fs.examples {
        lines.push(String::new());
        lines.push(format!("Input: {input}"));
        lines.push(format!("Output: {output}"));
    }
    lines.push(String::new());
    lines.push("Annotate the next sentence. Reply with the annotated sentence only.".into());
    lines.push(format!("Input: {raw}"));
    lines.push("Output:".into());
    Ok(lines.join("\n"))
}
