//! Annotated sentences, corpora and the inline tag grammar.
//!
//! An annotated line is plain text with flat `<label>…</label>` spans. Text
//! outside any span is a gap and is preserved verbatim, so a parsed sentence
//! serializes back to its source line (labels are re-emitted in canonical
//! case).

mod parse;
mod stats;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::label::TagLabel;

pub use parse::{
    parse_corpus, parse_sentence, read_corpus, split_id, CorpusError, Diagnostic, Mode, Parsed, TagError,
    TagErrorKind,
};
pub use stats::{
    corpus_stats, fc_distribution, tokenize, CorpusStats, FcDistribution, FcRow, Tokenizer,
};

/// A labelled span of an annotated line.
///
/// `span` is a byte range into [`Sentence::raw`] covering the chunk text,
/// excluding the surrounding tags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub label: TagLabel,
    pub text: String,
    pub span: Range<usize>,
}

/// A piece of a sentence in surface order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment<'a> {
    Gap(&'a str),
    Chunk(TagLabel, &'a str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub id: String,
    pub raw: String,
    chunks: Vec<Chunk>,
}

impl Sentence {
    /// Assembles a sentence from gaps and chunks, building the annotated
    /// line in canonical form.
    pub fn from_segments(id: impl Into<String>, segments: &[Segment<'_>]) -> Result<Self, TagError> {
        let mut raw = String::new();
        let mut chunks = Vec::new();
        for segment in segments {
            match *segment {
                Segment::Gap(text) => raw.push_str(text),
                Segment::Chunk(label, text) => {
                    if text.is_empty() {
                        return Err(TagError::new(TagErrorKind::EmptyChunk(label), raw.len()));
                    }
                    raw.push('<');
                    raw.push_str(label.as_str());
                    raw.push('>');
                    let start = raw.len();
                    raw.push_str(text);
                    chunks.push(Chunk {
                        label,
                        text: text.to_string(),
                        span: start..raw.len(),
                    });
                    raw.push_str("</");
                    raw.push_str(label.as_str());
                    raw.push('>');
                }
            }
        }
        let sentence = parse_sentence(id, &raw, Mode::Strict)?.sentence;
        if sentence.chunks != chunks {
            // A gap or chunk text carried tag markup of its own.
            return Err(TagError::new(TagErrorKind::MarkupInText, 0));
        }
        Ok(sentence)
    }

    pub(crate) fn from_parts(id: String, raw: String, chunks: Vec<Chunk>) -> Self {
        debug_assert!(chunks.windows(2).all(|w| w[0].span.end < w[1].span.start));
        Sentence { id, raw, chunks }
    }

    pub fn chunks(&self) -> &[Chunk] {
        &self.chunks
    }

    pub fn labels(&self) -> impl Iterator<Item = TagLabel> + '_ {
        self.chunks.iter().map(|c| c.label)
    }

    /// Gaps and chunks in surface order. Empty gaps are skipped.
    pub fn segments(&self) -> Vec<Segment<'_>> {
        let mut out = Vec::with_capacity(self.chunks.len() * 2 + 1);
        let mut cursor = 0;
        for chunk in &self.chunks {
            let open_start = chunk.span.start - chunk.label.as_str().len() - 2;
            if open_start > cursor {
                out.push(Segment::Gap(&self.raw[cursor..open_start]));
            }
            out.push(Segment::Chunk(chunk.label, &self.raw[chunk.span.clone()]));
            cursor = chunk.span.end + chunk.label.as_str().len() + 3;
        }
        if cursor < self.raw.len() {
            out.push(Segment::Gap(&self.raw[cursor..]));
        }
        out
    }

    pub fn gaps(&self) -> Vec<&str> {
        self.segments()
            .into_iter()
            .filter_map(|s| match s {
                Segment::Gap(g) => Some(g),
                Segment::Chunk(..) => None,
            })
            .collect()
    }
}

/// Emits gaps verbatim and chunks as `<label>text</label>` in canonical case.
pub fn serialize_sentence(sentence: &Sentence) -> String {
    let mut out = String::with_capacity(sentence.raw.len());
    for segment in sentence.segments() {
        match segment {
            Segment::Gap(text) => out.push_str(text),
            Segment::Chunk(label, text) => {
                out.push('<');
                out.push_str(label.as_str());
                out.push('>');
                out.push_str(text);
                out.push_str("</");
                out.push_str(label.as_str());
                out.push('>');
            }
        }
    }
    out
}

/// Collapses whitespace runs to one space and trims both ends.
pub fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    English,
    Chinese,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::English => "english",
            Language::Chinese => "chinese",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "english" | "en" => Ok(Language::English),
            "chinese" | "zh" => Ok(Language::Chinese),
            other => Err(format!("unknown language `{other}` (expected english or chinese)")),
        }
    }
}

/// A language-tagged collection of annotated sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub language: Language,
    pub name: String,
    sentences: Vec<Sentence>,
    pub source_meta: BTreeMap<String, String>,
}

impl Corpus {
    /// Fails with the first repeated sentence id.
    pub fn new(
        name: impl Into<String>,
        language: Language,
        sentences: Vec<Sentence>,
    ) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(sentences.len());
        for s in &sentences {
            if !seen.insert(s.id.as_str()) {
                return Err(CorpusError::DuplicateId(s.id.clone()));
            }
        }
        Ok(Corpus {
            language,
            name: name.into(),
            sentences,
            source_meta: BTreeMap::new(),
        })
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Concatenates two corpora of the same language; ids must stay unique.
    pub fn concat(&self, other: &Corpus) -> Result<Corpus, CorpusError> {
        let mut sentences = self.sentences.clone();
        sentences.extend(other.sentences.iter().cloned());
        Corpus::new(format!("{}+{}", self.name, other.name), self.language, sentences)
    }
}
