//! Dual-run agreement: sentence-level exact match plus chunk-level F1 over
//! `(label, text)` pairs.

use std::collections::{BTreeMap, HashMap, HashSet};

use chunkorder_core::{Corpus, Ratio, Sentence, TagLabel};
use serde::ser::{Serialize, SerializeMap, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AgreementError {
    #[error("sentence ids differ between runs: `{0}` has no counterpart")]
    IdMismatch(String),
}

/// Chunk-level true positives and totals for one label (or all labels).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ChunkCounts {
    pub matched: u64,
    /// Chunks in the first (reference) run.
    pub total_a: u64,
    /// Chunks in the second run.
    pub total_b: u64,
}

impl ChunkCounts {
    /// `matched / total_b`; 1 when the second run has no chunks.
    pub fn precision(&self) -> Ratio<u64> {
        ratio_or_one(self.matched, self.total_b)
    }

    /// `matched / total_a`; 1 when the first run has no chunks.
    pub fn recall(&self) -> Ratio<u64> {
        ratio_or_one(self.matched, self.total_a)
    }

    /// Harmonic mean of precision and recall, `2·matched / (total_a + total_b)`.
    pub fn f1(&self) -> Ratio<u64> {
        ratio_or_one(2 * self.matched, self.total_a + self.total_b)
    }
}

fn ratio_or_one(n: u64, d: u64) -> Ratio<u64> {
    if d == 0 {
        Ratio::from_integer(1)
    } else {
        Ratio::new(n, d)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgreementReport {
    pub n_sentences: u64,
    pub exact_matches: u64,
    pub chunks: ChunkCounts,
    /// Only labels that occur in at least one run.
    pub per_label: BTreeMap<TagLabel, ChunkCounts>,
}

impl AgreementReport {
    /// Fraction of sentences whose chunk lists are identical; 1 for two
    /// empty runs.
    pub fn exact_match_rate(&self) -> Ratio<u64> {
        ratio_or_one(self.exact_matches, self.n_sentences)
    }

    pub fn chunk_f1(&self) -> Ratio<u64> {
        self.chunks.f1()
    }

    pub fn precision(&self) -> Ratio<u64> {
        self.chunks.precision()
    }

    pub fn recall(&self) -> Ratio<u64> {
        self.chunks.recall()
    }

    pub fn per_label_f1(&self) -> BTreeMap<TagLabel, Ratio<u64>> {
        self.per_label.iter().map(|(l, c)| (*l, c.f1())).collect()
    }
}

fn as_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl Serialize for AgreementReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let per_label: BTreeMap<&str, f64> = self
            .per_label_f1()
            .into_iter()
            .map(|(l, f)| (l.as_str(), as_f64(f)))
            .collect();
        let mut map = serializer.serialize_map(Some(6))?;
        map.serialize_entry("chunk_f1", &as_f64(self.chunk_f1()))?;
        map.serialize_entry("exact_match_rate", &as_f64(self.exact_match_rate()))?;
        map.serialize_entry("n_sentences", &self.n_sentences)?;
        map.serialize_entry("per_label_f1", &per_label)?;
        map.serialize_entry("precision", &as_f64(self.precision()))?;
        map.serialize_entry("recall", &as_f64(self.recall()))?;
        map.end()
    }
}

fn chunk_keys(s: &Sentence) -> Vec<(TagLabel, &str)> {
    s.chunks().iter().map(|c| (c.label, c.text.as_str())).collect()
}

/// Compares two annotation runs of the same sentences, aligned by id.
///
/// Run `a` is the reference for recall. A true positive is a `(label, text)`
/// chunk present in both runs of the same sentence, counted with
/// multiplicity.
pub fn agreement(a: &Corpus, b: &Corpus) -> Result<AgreementReport, AgreementError> {
    let by_id: HashMap<&str, &Sentence> = b.sentences().iter().map(|s| (s.id.as_str(), s)).collect();
    let ids_a: HashSet<&str> = a.sentences().iter().map(|s| s.id.as_str()).collect();
    if let Some(extra) = b.sentences().iter().find(|s| !ids_a.contains(s.id.as_str())) {
        return Err(AgreementError::IdMismatch(extra.id.clone()));
    }

    let mut report = AgreementReport {
        n_sentences: a.len() as u64,
        exact_matches: 0,
        chunks: ChunkCounts::default(),
        per_label: BTreeMap::new(),
    };
    for sa in a.sentences() {
        let sb = by_id
            .get(sa.id.as_str())
            .ok_or_else(|| AgreementError::IdMismatch(sa.id.clone()))?;
        let (ka, kb) = (chunk_keys(sa), chunk_keys(sb));
        if ka == kb {
            report.exact_matches += 1;
        }
        let mut remaining: HashMap<(TagLabel, &str), u64> = HashMap::new();
        for &k in &kb {
            *remaining.entry(k).or_default() += 1;
            report.per_label.entry(k.0).or_default().total_b += 1;
        }
        report.chunks.total_a += ka.len() as u64;
        report.chunks.total_b += kb.len() as u64;
        for k in &ka {
            let entry = report.per_label.entry(k.0).or_default();
            entry.total_a += 1;
            if let Some(n) = remaining.get_mut(k).filter(|n| **n > 0) {
                *n -= 1;
                entry.matched += 1;
                report.chunks.matched += 1;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chunkorder_core::{parse_corpus, Language, Mode};

    fn corpus(text: &str) -> Corpus {
        parse_corpus(text.as_bytes(), "r", Language::English, Mode::Strict).unwrap().0
    }

    #[test]
    fn self_agreement_is_perfect() {
        let a = corpus("<S>a</S> <V>b</V>\nplain\n");
        let r = agreement(&a, &a).unwrap();
        assert_eq!(r.exact_match_rate(), Ratio::from_integer(1));
        assert_eq!(r.chunk_f1(), Ratio::from_integer(1));
    }

    #[test]
    fn dropped_chunk() {
        let a = corpus("<S>a</S> <V>b</V> <O>c</O>\n<S>d</S> <V>e</V> <time>f</time>\n");
        let b = corpus("<S>a</S> <V>b</V> <O>c</O>\n<S>d</S> <V>e</V> f\n");
        let r = agreement(&a, &b).unwrap();
        assert_eq!(r.exact_match_rate(), Ratio::new(1, 2));
        assert_eq!(r.precision(), Ratio::from_integer(1));
        assert_eq!(r.recall(), Ratio::new(5, 6));
        assert_eq!(r.chunk_f1(), Ratio::new(10, 11));
        assert_eq!(r.per_label_f1()[&TagLabel::Time], Ratio::from_integer(0));
        let swapped = agreement(&b, &a).unwrap();
        assert_eq!(swapped.chunk_f1(), r.chunk_f1());
        assert_eq!(swapped.exact_match_rate(), r.exact_match_rate());
    }

    #[test]
    fn ids_must_align() {
        let a = parse_corpus("x\t<S>a</S>\n".as_bytes(), "r", Language::English, Mode::Strict).unwrap().0;
        let b = parse_corpus("y\t<S>a</S>\n".as_bytes(), "r", Language::English, Mode::Strict).unwrap().0;
        assert_eq!(agreement(&a, &b), Err(AgreementError::IdMismatch("y".into())));
    }
}
