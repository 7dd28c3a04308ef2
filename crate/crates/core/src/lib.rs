//! Constituent-order analysis of corpora annotated with functional chunks
//! (`<time>`, `<place>`, …) and SVO anchors (`<S>`, `<V>`, `<O>`).
//!
//! The crate covers the inline tag grammar, descriptive corpus statistics,
//! positional tests, conditional anchor probabilities, pattern and transition
//! counting, and centroid similarity over precomputed embeddings.

pub mod corpus;
mod error;
pub mod label;
pub mod position;
pub mod rounding;
pub mod semantic;
pub mod sequence;
pub mod special;

pub use corpus::{
    corpus_stats, fc_distribution, parse_corpus, parse_sentence, read_corpus, serialize_sentence,
    Chunk, Corpus, CorpusError, CorpusStats, Diagnostic, FcDistribution, Language, Mode, Segment,
    Sentence, TagError, TagErrorKind, Tokenizer,
};
pub use error::StatsError;
pub use label::{render_pattern, Anchor, TagLabel};
pub use position::{
    chi_square_bins, chi_square_uniform, conditional_anchor_probability, relative_positions,
    welch_t_test, AnchorProbability, Degenerate, PositionSample, TestResult,
};
pub use semantic::{
    centroid, cosine_similarity, load_embeddings, pca_project, EmbeddingError, EmbeddingSet,
    Projection, TagFilter,
};
pub use sequence::{
    fc_combination_counts, pattern_counts, tag_sequence, transition_matrix, PatternTable,
    TagSequence, TransitionMatrix,
};
pub use special::{regularized_gamma_q, regularized_incomplete_beta};

pub use num_rational::Ratio;
