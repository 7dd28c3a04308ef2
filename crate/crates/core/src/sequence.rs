//! Label sequences, whole-sentence pattern counts and first-order
//! transitions between functional chunks.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_rational::Ratio;

use crate::corpus::{Corpus, Sentence};
use crate::label::{render_pattern, TagLabel};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSequence {
    pub sentence_id: String,
    pub labels: Vec<TagLabel>,
}

pub fn tag_sequence(sentence: &Sentence) -> TagSequence {
    TagSequence {
        sentence_id: sentence.id.clone(),
        labels: sentence.labels().collect(),
    }
}

/// Keeps functional-chunk labels only, preserving order and repeats.
pub fn fc_projection(labels: &[TagLabel]) -> Vec<TagLabel> {
    labels.iter().copied().filter(|l| l.is_functional()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternRow {
    pub pattern: Vec<TagLabel>,
    pub frequency: u64,
}

impl PatternRow {
    pub fn render(&self) -> String {
        render_pattern(&self.pattern)
    }
}

/// Ranked pattern frequencies. `total` and `distinct` describe the table
/// before `top_k` truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternTable {
    pub rows: Vec<PatternRow>,
    pub total: u64,
    pub distinct: usize,
}

/// Frequency descending, then element-wise canonical label order (a proper
/// prefix sorts first).
fn rank(a: &PatternRow, b: &PatternRow) -> Ordering {
    b.frequency.cmp(&a.frequency).then_with(|| a.pattern.cmp(&b.pattern))
}

fn tabulate<I>(patterns: I, top_k: Option<usize>) -> PatternTable
where
    I: IntoIterator<Item = Vec<TagLabel>>,
{
    let mut counts: HashMap<Vec<TagLabel>, u64> = HashMap::new();
    for p in patterns {
        *counts.entry(p).or_default() += 1;
    }
    let total = counts.values().sum();
    let distinct = counts.len();
    let mut rows: Vec<PatternRow> = counts
        .into_iter()
        .map(|(pattern, frequency)| PatternRow { pattern, frequency })
        .collect();
    rows.sort_by(rank);
    if let Some(k) = top_k {
        rows.truncate(k);
    }
    PatternTable {
        rows,
        total,
        distinct,
    }
}

/// Counts each sentence's full label sequence (S/V/O included) as one
/// pattern. Sentences without chunks are skipped.
pub fn pattern_counts(corpus: &Corpus, top_k: Option<usize>) -> PatternTable {
    tabulate(
        corpus
            .sentences()
            .iter()
            .map(|s| tag_sequence(s).labels)
            .filter(|l| !l.is_empty()),
        top_k,
    )
}

/// Counts each sentence's functional-chunk projection as one combination
/// when it has at least `min_len` chunks.
pub fn fc_combination_counts(corpus: &Corpus, min_len: usize, top_k: Option<usize>) -> PatternTable {
    tabulate(
        corpus
            .sentences()
            .iter()
            .map(|s| fc_projection(&tag_sequence(s).labels))
            .filter(|p| !p.is_empty() && p.len() >= min_len),
        top_k,
    )
}

const N: usize = TagLabel::FUNCTIONAL.len();

/// Adjacent-pair counts over functional-chunk projections, indexed in
/// canonical label order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TransitionMatrix {
    pub counts: [[u64; N]; N],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: TagLabel,
    pub to: TagLabel,
    pub count: u64,
    pub prob: Ratio<u64>,
}

impl TransitionMatrix {
    pub fn row_total(&self, from: usize) -> u64 {
        self.counts[from].iter().sum()
    }

    /// Rows with no outgoing transitions have no distribution.
    pub fn is_defined(&self, from: usize) -> bool {
        self.row_total(from) > 0
    }

    /// P(next = `to` | current = `from`), or `None` for an undefined row.
    pub fn prob(&self, from: usize, to: usize) -> Option<Ratio<u64>> {
        let total = self.row_total(from);
        (total > 0).then(|| Ratio::new(self.counts[from][to], total))
    }

    /// Row-stochastic matrix; undefined rows are all zero.
    pub fn probs(&self) -> [[f64; N]; N] {
        let mut out = [[0.0; N]; N];
        for (i, row) in out.iter_mut().enumerate() {
            let total = self.row_total(i);
            if total == 0 {
                continue;
            }
            for (j, p) in row.iter_mut().enumerate() {
                *p = self.counts[i][j] as f64 / total as f64;
            }
        }
        out
    }

    pub fn add(&self, other: &TransitionMatrix) -> TransitionMatrix {
        let mut out = self.clone();
        for (row, other_row) in out.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(other_row) {
                *c += o;
            }
        }
        out
    }

    /// All transitions out of defined rows, most probable first (ties by
    /// count, then canonical order of source and target).
    pub fn ranked(&self) -> Vec<Transition> {
        let mut out = Vec::new();
        for (i, from) in TagLabel::FUNCTIONAL.into_iter().enumerate() {
            for (j, to) in TagLabel::FUNCTIONAL.into_iter().enumerate() {
                if let Some(prob) = self.prob(i, j) {
                    out.push(Transition {
                        from,
                        to,
                        count: self.counts[i][j],
                        prob,
                    });
                }
            }
        }
        out.sort_by(|a, b| {
            b.prob
                .cmp(&a.prob)
                .then(b.count.cmp(&a.count))
                .then(a.from.cmp(&b.from))
                .then(a.to.cmp(&b.to))
        });
        out
    }
}

/// Counts within-sentence adjacent pairs of the functional-chunk projection.
/// S/V/O chunks are transparent; sentence boundaries reset the chain.
pub fn transition_matrix(corpus: &Corpus) -> TransitionMatrix {
    let mut m = TransitionMatrix::default();
    for sentence in corpus.sentences() {
        let indices: Vec<usize> = sentence.labels().filter_map(|l| l.fc_index()).collect();
        for pair in indices.windows(2) {
            m.counts[pair[0]][pair[1]] += 1;
        }
    }
    m
}
