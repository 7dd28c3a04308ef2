use std::collections::{BTreeMap, HashSet};

use num_rational::Ratio;

use super::{Corpus, Language, Segment};
use crate::label::TagLabel;
use crate::StatsError;

/// Token splitting used for the token/type counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tokenizer {
    /// Runs of letters, digits, apostrophes and hyphens; everything else
    /// separates. Types are case-folded.
    Whitespace,
    /// Every CJK ideograph is one token; runs of other alphanumerics (Latin
    /// words, digits) form one token each. Types are not case-folded.
    CjkChar,
}

impl Tokenizer {
    pub fn for_language(language: Language) -> Self {
        match language {
            Language::English => Tokenizer::Whitespace,
            Language::Chinese => Tokenizer::CjkChar,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tokenizer::Whitespace => "whitespace",
            Tokenizer::CjkChar => "cjk_char",
        }
    }
}

fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xF900..=0xFAFF | 0x20000..=0x2FA1F | 0x3040..=0x30FF)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '-' || c == '\u{2019}'
}

/// Splits `text` into tokens.
pub fn tokenize(text: &str, tokenizer: Tokenizer) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    fn flush<'a>(out: &mut Vec<&'a str>, word: &'a str) {
        let tok = word.trim_matches(|c| c == '\'' || c == '-' || c == '\u{2019}');
        if !tok.is_empty() {
            out.push(tok);
        }
    }
    for (i, c) in text.char_indices() {
        let cjk = tokenizer == Tokenizer::CjkChar && is_cjk(c);
        if is_word_char(c) && !cjk {
            start.get_or_insert(i);
            continue;
        }
        if let Some(s) = start.take() {
            flush(&mut out, &text[s..i]);
        }
        if cjk {
            out.push(&text[i..i + c.len_utf8()]);
        }
    }
    if let Some(s) = start {
        flush(&mut out, &text[s..]);
    }
    out
}

/// Descriptive counts for one corpus.
///
/// Ratios are exact; `ttr * tokens == types`, `tag_per_line * lines == tags`
/// and `fc_per_line * lines == fcs` hold without rounding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusStats {
    pub texts: u64,
    pub tokens: u64,
    pub types: u64,
    pub lines: u64,
    pub tags: u64,
    pub fcs: u64,
    pub ttr: Ratio<u64>,
    pub tag_per_line: Ratio<u64>,
    pub fc_per_line: Ratio<u64>,
}

impl CorpusStats {
    /// Builds the ratios from raw counts. `lines` must be nonzero.
    pub fn from_counts(
        texts: u64,
        tokens: u64,
        types: u64,
        lines: u64,
        tags: u64,
        fcs: u64,
    ) -> Result<Self, StatsError> {
        if lines == 0 {
            return Err(StatsError::EmptyCorpus);
        }
        let ttr = if tokens == 0 {
            Ratio::from_integer(0)
        } else {
            Ratio::new(types, tokens)
        };
        Ok(CorpusStats {
            texts,
            tokens,
            types,
            lines,
            tags,
            fcs,
            ttr,
            tag_per_line: Ratio::new(tags, lines),
            fc_per_line: Ratio::new(fcs, lines),
        })
    }
}

/// The text id a sentence belongs to: everything before the last `-` of its
/// sentence id (`CROWN-A03AA-7` → `CROWN-A03AA`, `name-L12` → `name`).
fn text_id(sentence_id: &str) -> &str {
    sentence_id.rsplit_once('-').map_or(sentence_id, |(head, _)| head)
}

pub fn corpus_stats(corpus: &Corpus, tokenizer: Tokenizer) -> Result<CorpusStats, StatsError> {
    let mut tokens = 0u64;
    let mut types: HashSet<String> = HashSet::new();
    let mut texts: HashSet<&str> = HashSet::new();
    let mut tags = 0u64;
    let mut fcs = 0u64;
    for sentence in corpus.sentences() {
        texts.insert(text_id(&sentence.id));
        tags += sentence.chunks().len() as u64;
        fcs += sentence.labels().filter(|l| l.is_functional()).count() as u64;
        for segment in sentence.segments() {
            let text = match segment {
                Segment::Gap(t) | Segment::Chunk(_, t) => t,
            };
            for tok in tokenize(text, tokenizer) {
                tokens += 1;
                if tokenizer == Tokenizer::Whitespace {
                    types.insert(tok.to_lowercase());
                } else if !types.contains(tok) {
                    types.insert(tok.to_string());
                }
            }
        }
    }
    CorpusStats::from_counts(
        texts.len() as u64,
        tokens,
        types.len() as u64,
        corpus.len() as u64,
        tags,
        fcs,
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FcRow {
    pub label: TagLabel,
    pub frequency: u64,
    pub proportion: Ratio<u64>,
}

/// Occurrence counts of the eight functional-chunk labels, most frequent
/// first (ties in canonical label order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FcDistribution {
    pub rows: Vec<FcRow>,
    pub total: u64,
}

impl FcDistribution {
    pub fn get(&self, label: TagLabel) -> Option<&FcRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}

pub fn fc_distribution(corpus: &Corpus) -> FcDistribution {
    let mut counts: BTreeMap<TagLabel, u64> =
        TagLabel::FUNCTIONAL.iter().map(|&l| (l, 0)).collect();
    for label in corpus.sentences().iter().flat_map(|s| s.labels()) {
        if let Some(n) = counts.get_mut(&label) {
            *n += 1;
        }
    }
    let total: u64 = counts.values().sum();
    let mut rows: Vec<FcRow> = counts
        .into_iter()
        .map(|(label, frequency)| FcRow {
            label,
            frequency,
            proportion: if total == 0 {
                Ratio::from_integer(0)
            } else {
                Ratio::new(frequency, total)
            },
        })
        .collect();
    rows.sort_by(|a, b| b.frequency.cmp(&a.frequency).then(a.label.cmp(&b.label)));
    FcDistribution { rows, total }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_corpus, Mode};
    use crate::rounding::ratio_half_up;

    fn corpus(text: &str, language: Language) -> Corpus {
        parse_corpus(text.as_bytes(), "c", language, Mode::Strict).unwrap().0
    }

    #[test]
    fn table_arithmetic() {
        let s = CorpusStats::from_counts(220, 90131, 12502, 2649, 17865, 5846).unwrap();
        assert_eq!(ratio_half_up(s.ttr, 3), "0.139");
        assert_eq!(ratio_half_up(s.tag_per_line, 2), "6.74");
        assert_eq!(ratio_half_up(s.fc_per_line, 2), "2.21");
        assert_eq!(s.ttr * s.tokens, Ratio::from_integer(s.types));
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let c = corpus("", Language::English);
        assert_eq!(corpus_stats(&c, Tokenizer::Whitespace), Err(StatsError::EmptyCorpus));
    }

    #[test]
    fn one_line_a_a_b() {
        let c = corpus("a a b\n", Language::English);
        let s = corpus_stats(&c, Tokenizer::Whitespace).unwrap();
        assert_eq!((s.tokens, s.types), (3, 2));
        assert_eq!(ratio_half_up(s.ttr, 3), "0.667");
        assert_eq!(s.texts, 1);
    }

    #[test]
    fn english_types_are_case_folded() {
        let c = corpus("<S>The cat</S> <V>saw</V> <O>the dog's toy</O>.\n", Language::English);
        let s = corpus_stats(&c, Tokenizer::Whitespace).unwrap();
        assert_eq!(s.tokens, 6);
        assert_eq!(s.types, 5);
        assert_eq!((s.tags, s.fcs), (3, 0));
    }

    #[test]
    fn cjk_tokens() {
        assert_eq!(tokenize("去年GDP增长5%。", Tokenizer::CjkChar), vec!["去", "年", "GDP", "增", "长", "5"]);
        assert_eq!(tokenize("well-known 'quote' -x-", Tokenizer::Whitespace), vec!["well-known", "quote", "x"]);
    }

    #[test]
    fn distribution_counts_and_order() {
        let c = corpus("<time>a</time> <time>b</time> <place>c</place> <S>d</S>\n", Language::English);
        let d = fc_distribution(&c);
        assert_eq!(d.total, 3);
        assert_eq!(d.rows[0].label, TagLabel::Time);
        assert_eq!(d.rows[0].proportion, Ratio::new(2, 3));
        assert_eq!(d.rows[1].label, TagLabel::Place);
        assert_eq!(ratio_half_up(d.rows[1].proportion, 3), "0.333");
        assert_eq!(d.rows.len(), 8);
        assert_eq!(d.rows[2].frequency, 0);
    }

    #[test]
    fn table_six_proportion() {
        assert_eq!(ratio_half_up(Ratio::new(3293u64, 8389), 2), "0.39");
    }

    #[test]
    fn all_zero_distribution() {
        let c = corpus("<S>x</S>\n", Language::English);
        let d = fc_distribution(&c);
        assert_eq!(d.total, 0);
        assert!(d.rows.iter().all(|r| r.frequency == 0 && r.proportion == Ratio::from_integer(0)));
    }

    #[test]
    fn texts_from_ids() {
        let c = corpus("A01-1\t<S>x</S>\nA01-2\t<S>y</S>\nA02-1\t<S>z</S>\n", Language::English);
        assert_eq!(corpus_stats(&c, Tokenizer::Whitespace).unwrap().texts, 2);
    }
}
