use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;

use super::{Chunk, Corpus, Language, Sentence};
use crate::label::TagLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Every tag must be admissible and well formed.
    #[default]
    Strict,
    /// Unknown, stray and unclosed tags are kept as literal text and reported
    /// as warnings. Nesting is still rejected.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TagErrorKind {
    UnclosedTag(TagLabel),
    UnknownLabel(String),
    NestedTag { outer: TagLabel, inner: TagLabel },
    StrayClosingTag(TagLabel),
    MismatchedClosingTag { open: TagLabel, close: TagLabel },
    EmptyChunk(TagLabel),
    MarkupInText,
}

impl TagErrorKind {
    /// Short machine-readable name.
    pub fn name(&self) -> &'static str {
        match self {
            TagErrorKind::UnclosedTag(_) => "UnclosedTag",
            TagErrorKind::UnknownLabel(_) => "UnknownLabel",
            TagErrorKind::NestedTag { .. } => "NestedTag",
            TagErrorKind::StrayClosingTag(_) => "StrayClosingTag",
            TagErrorKind::MismatchedClosingTag { .. } => "MismatchedClosingTag",
            TagErrorKind::EmptyChunk(_) => "EmptyChunk",
            TagErrorKind::MarkupInText => "MarkupInText",
        }
    }
}

impl fmt::Display for TagErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TagErrorKind::UnclosedTag(l) => write!(f, "<{l}> is never closed"),
            TagErrorKind::UnknownLabel(name) => write!(f, "unknown label <{name}>"),
            TagErrorKind::NestedTag { outer, inner } => {
                write!(f, "<{inner}> opened inside <{outer}>; tags must not nest")
            }
            TagErrorKind::StrayClosingTag(l) => write!(f, "</{l}> has no matching <{l}>"),
            TagErrorKind::MismatchedClosingTag { open, close } => {
                write!(f, "</{close}> closes <{open}>")
            }
            TagErrorKind::EmptyChunk(l) => write!(f, "<{l}> span is empty"),
            TagErrorKind::MarkupInText => write!(f, "text contains tag markup"),
        }
    }
}

/// A tag-grammar problem at a byte offset of the line.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} (byte {offset})")]
pub struct TagError {
    pub kind: TagErrorKind,
    pub offset: usize,
}

impl TagError {
    pub fn new(kind: TagErrorKind, offset: usize) -> Self {
        TagError { kind, offset }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed {
    pub sentence: Sentence,
    /// Problems tolerated in lenient mode. Always empty in strict mode.
    pub warnings: Vec<TagError>,
}

/// One problem found while loading a corpus. `rejected` lines were dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub error: TagError,
    pub rejected: bool,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = if self.rejected { "error" } else { "warning" };
        write!(f, "line {}: {what}: {} [{}]", self.line, self.error, self.error.kind.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: invalid UTF-8")]
    Encoding { line: usize },
    #[error("{0}")]
    Rejected(Diagnostic),
    #[error("duplicate sentence id `{0}`")]
    DuplicateId(String),
}

struct TagToken<'a> {
    closing: bool,
    name: &'a str,
    len: usize,
}

/// Recognizes `<name>` or `</name>` with an ASCII-alphabetic name at the
/// start of `s`. Anything else starting with `<` is literal text.
fn scan_tag(s: &str) -> Option<TagToken<'_>> {
    let bytes = s.as_bytes();
    if bytes.first() != Some(&b'<') {
        return None;
    }
    let mut i = 1;
    let closing = bytes.get(1) == Some(&b'/');
    if closing {
        i += 1;
    }
    let name_start = i;
    while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
        i += 1;
    }
    if i == name_start || bytes.get(i) != Some(&b'>') {
        return None;
    }
    Some(TagToken {
        closing,
        name: &s[name_start..i],
        len: i + 1,
    })
}

struct Open {
    label: TagLabel,
    tag_start: usize,
    content_start: usize,
}

/// Parses one annotated line.
///
/// In strict mode the first grammar problem is returned as the error. In
/// lenient mode unknown labels, stray or mismatched closers, empty spans and
/// unclosed openers become literal text and are listed in
/// [`Parsed::warnings`]; a nested opener is an error in both modes.
pub fn parse_sentence(id: impl Into<String>, raw: &str, mode: Mode) -> Result<Parsed, TagError> {
    let mut chunks: Vec<Chunk> = Vec::new();
    let mut warnings = Vec::new();
    let mut open: Option<Open> = None;
    let mut unknown_open: Vec<String> = Vec::new();

    let mut tolerate = |err: TagError| -> Result<(), TagError> {
        match mode {
            Mode::Strict => Err(err),
            Mode::Lenient => {
                warnings.push(err);
                Ok(())
            }
        }
    };

    let mut pos = 0;
    while let Some(rel) = raw[pos..].find('<') {
        let at = pos + rel;
        let Some(tok) = scan_tag(&raw[at..]) else {
            pos = at + 1;
            continue;
        };
        pos = at + tok.len;
        let Some(label) = TagLabel::parse_name(tok.name) else {
            let name = tok.name.to_ascii_lowercase();
            if tok.closing {
                if let Some(i) = unknown_open.iter().rposition(|n| *n == name) {
                    unknown_open.remove(i);
                    continue;
                }
            } else {
                unknown_open.push(name.clone());
            }
            tolerate(TagError::new(TagErrorKind::UnknownLabel(tok.name.to_string()), at))?;
            continue;
        };

        match (&open, tok.closing) {
            (Some(o), false) => {
                return Err(TagError::new(
                    TagErrorKind::NestedTag {
                        outer: o.label,
                        inner: label,
                    },
                    at,
                ));
            }
            (None, false) => {
                open = Some(Open {
                    label,
                    tag_start: at,
                    content_start: pos,
                });
            }
            (Some(o), true) if o.label == label => {
                let o = open.take().expect("open span");
                if at == o.content_start {
                    tolerate(TagError::new(TagErrorKind::EmptyChunk(label), o.tag_start))?;
                    continue;
                }
                chunks.push(Chunk {
                    label,
                    text: raw[o.content_start..at].to_string(),
                    span: o.content_start..at,
                });
            }
            (Some(o), true) => {
                let kind = TagErrorKind::MismatchedClosingTag {
                    open: o.label,
                    close: label,
                };
                tolerate(TagError::new(kind, at))?;
            }
            (None, true) => {
                tolerate(TagError::new(TagErrorKind::StrayClosingTag(label), at))?;
            }
        }
    }

    if let Some(o) = open {
        tolerate(TagError::new(TagErrorKind::UnclosedTag(o.label), o.tag_start))?;
    }

    Ok(Parsed {
        sentence: Sentence::from_parts(id.into(), raw.to_string(), chunks),
        warnings,
    })
}

/// Splits an optional `id<TAB>` prefix off a corpus line.
/// Splits a leading `id<TAB>` field off a corpus line, if present.
pub fn split_id(line: &str) -> Option<(&str, &str)> {
    let (id, rest) = line.split_once('\t')?;
    let plausible = !id.is_empty() && !id.contains(|c: char| c == '<' || c.is_whitespace());
    plausible.then_some((id, rest))
}

/// Loads a corpus from one-sentence-per-line annotated text.
///
/// Blank lines are skipped but still count toward line numbers. Sentence ids
/// default to `<name>-L<line>`. In strict mode the first rejected line fails
/// the whole load; in lenient mode rejects and warnings are returned as
/// diagnostics ordered by line.
pub fn parse_corpus<R: BufRead>(
    mut reader: R,
    name: &str,
    language: Language,
    mode: Mode,
) -> Result<(Corpus, Vec<Diagnostic>), CorpusError> {
    let mut sentences = Vec::new();
    let mut diagnostics = Vec::new();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let line = std::str::from_utf8(&buf).map_err(|_| CorpusError::Encoding { line: line_no })?;
        let line = line.trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() {
            continue;
        }
        let (id, body) = match split_id(line) {
            Some((id, body)) => (id.to_string(), body),
            None => (format!("{name}-L{line_no}"), line),
        };
        match parse_sentence(id, body, mode) {
            Ok(parsed) => {
                diagnostics.extend(parsed.warnings.into_iter().map(|error| Diagnostic {
                    line: line_no,
                    error,
                    rejected: false,
                }));
                sentences.push(parsed.sentence);
            }
            Err(error) => {
                let diagnostic = Diagnostic {
                    line: line_no,
                    error,
                    rejected: true,
                };
                if mode == Mode::Strict {
                    return Err(CorpusError::Rejected(diagnostic));
                }
                diagnostics.push(diagnostic);
            }
        }
    }
    let corpus = Corpus::new(name, language, sentences)?;
    Ok((corpus, diagnostics))
}

/// [`parse_corpus`] over a file, recording the path in `source_meta`.
pub fn read_corpus(
    path: &Path,
    name: &str,
    language: Language,
    mode: Mode,
) -> Result<(Corpus, Vec<Diagnostic>), CorpusError> {
    let file = File::open(path)?;
    let (mut corpus, diagnostics) = parse_corpus(BufReader::new(file), name, language, mode)?;
    corpus
        .source_meta
        .insert("path".to_string(), path.display().to_string());
    Ok((corpus, diagnostics))
}
