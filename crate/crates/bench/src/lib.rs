//! Seeded synthetic corpora for the benchmarks.

use chunkorder_core::{parse_corpus, Corpus, Language, Mode, TagLabel};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const WORDS: &[&str] = &[
    "the", "council", "approved", "a", "new", "budget", "on", "Monday", "in", "Paris", "because", "of", "rising",
    "costs", "quickly", "to", "avoid", "delays", "although", "critics", "objected",
];

/// `lines` annotated sentences in corpus-file form, 2 to 8 chunks each.
pub fn corpus_text(lines: usize, seed: u64) -> String {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut text = String::new();
    for i in 0..lines {
        text.push_str(&format!("bench-{}-{i:05}\t", i / 20));
        for _ in 0..rng.random_range(2..=8) {
            let tag = TagLabel::ALL[rng.random_range(0..TagLabel::ALL.len())].as_str();
            let words: Vec<&str> = (0..rng.random_range(1..=4)).map(|_| WORDS[rng.random_range(0..WORDS.len())]).collect();
            text.push_str(&format!("<{tag}>{}</{tag}> ", words.join(" ")));
        }
        text.push_str(".\n");
    }
    text
}

pub fn corpus(lines: usize, seed: u64) -> Corpus {
    parse_corpus(corpus_text(lines, seed).as_bytes(), "bench", Language::English, Mode::Strict)
        .expect("synthetic corpus parses")
        .0
}

/// Two samples of `n` values in [0, 1].
pub fn samples(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = StdRng::seed_from_u64(seed);
    let a = (0..n).map(|_| rng.random::<f64>()).collect();
    let b = (0..n).map(|_| rng.random::<f64>().powf(1.5)).collect();
    (a, b)
}
