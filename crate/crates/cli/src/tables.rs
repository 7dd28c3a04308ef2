//! Row builders for every CSV/JSON output, shared by the single-table
//! subcommands and the report bundle.

use chunkorder_core::rounding::{f64_half_up, f64_sci, ratio_half_up, rounded_f64};
use chunkorder_core::sequence::PatternRow;
use chunkorder_core::{
    centroid, chi_square_uniform, conditional_anchor_probability, corpus_stats, cosine_similarity,
    fc_distribution, relative_positions, welch_t_test, Anchor, Corpus, Degenerate, EmbeddingSet,
    PatternTable, Projection, StatsError, TagFilter, TagLabel, TestResult, Tokenizer, TransitionMatrix,
};
use serde_json::{json, Map, Value};

use crate::config::Rounding;
use crate::CliError;

/// A header plus string cells, rendered as RFC 4180 CSV with LF endings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Prepends a constant column, e.g. the corpus name on stdout.
    pub fn with_leading(mut self, column: &str, value: &str) -> Self {
        self.header.insert(0, column.to_string());
        for row in &mut self.rows {
            row.insert(0, value.to_string());
        }
        self
    }

    /// Appends the rows of a table with the same header.
    pub fn extend(&mut self, other: Table) {
        debug_assert_eq!(self.header, other.header);
        self.rows.extend(other.rows);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

fn blank() -> String {
    String::new()
}

/// JSON text with keys sorted at every level and a trailing newline.
pub fn pretty_json(value: &Value) -> Vec<u8> {
    fn sorted(v: &Value) -> Value {
        match v {
            Value::Object(map) => {
                let mut keys: Vec<&String> = map.keys().collect();
                keys.sort();
                let mut out = Map::new();
                for k in keys {
                    out.insert(k.clone(), sorted(&map[k]));
                }
                Value::Object(out)
            }
            Value::Array(items) => Value::Array(items.iter().map(sorted).collect()),
            other => other.clone(),
        }
    }
    let mut text = serde_json::to_vec_pretty(&sorted(value)).expect("serializable value");
    text.push(b'\n');
    text
}

pub fn stats_json(corpus: &Corpus, r: &Rounding) -> Result<Value, CliError> {
    let tokenizer = Tokenizer::for_language(corpus.language);
    let s = corpus_stats(corpus, tokenizer).map_err(|e| CliError::from(e).context(&corpus.name))?;
    Ok(json!({
        "corpus": corpus.name,
        "language": corpus.language.as_str(),
        "tokenizer": tokenizer.as_str(),
        "texts": s.texts,
        "tokens": s.tokens,
        "types": s.types,
        "lines": s.lines,
        "tags": s.tags,
        "fcs": s.fcs,
        "ttr": rounded_f64(s.ttr, r.ttr),
        "tag_per_line": rounded_f64(s.tag_per_line, r.per_line),
        "fc_per_line": rounded_f64(s.fc_per_line, r.per_line),
        "exact": {
            "ttr": s.ttr.to_string(),
            "tag_per_line": s.tag_per_line.to_string(),
            "fc_per_line": s.fc_per_line.to_string(),
        },
    }))
}

pub fn fc_distribution_table(corpus: &Corpus, r: &Rounding) -> Table {
    let mut t = Table::new(&["label", "frequency", "proportion"]);
    for row in fc_distribution(corpus).rows {
        t.push(vec![
            row.label.to_string(),
            row.frequency.to_string(),
            ratio_half_up(row.proportion, r.proportion),
        ]);
    }
    t
}

pub fn positions_table(corpus: &Corpus, r: &Rounding) -> Table {
    let mut t = Table::new(&["label", "sentence_id", "rel_pos"]);
    for label in TagLabel::FUNCTIONAL {
        for s in relative_positions(corpus, label) {
            t.push(vec![label.to_string(), s.sentence_id, ratio_half_up(s.rel_pos, r.position)]);
        }
    }
    t
}

fn p_value(p: f64, r: &Rounding) -> String {
    f64_sci(p, r.p_value)
}

/// Chi-square against an even front/back split for every FC label. Labels
/// with no occurrences get empty statistic cells. The t columns are filled
/// only in the cross-corpus table.
pub fn tests_table(corpus: &Corpus, r: &Rounding) -> Result<Table, CliError> {
    let mut t = Table::new(&["label", "front", "back", "chi2", "df", "p", "t", "t_df", "t_p"]);
    for label in TagLabel::FUNCTIONAL {
        let samples = relative_positions(corpus, label);
        let mut row = vec![label.to_string()];
        match chi_square_uniform(&samples) {
            Ok(res) => row.extend([
                res.n[0].to_string(),
                res.n[1].to_string(),
                f64_half_up(res.statistic, r.statistic),
                format!("{}", res.df),
                p_value(res.p_value, r),
            ]),
            Err(StatsError::EmptySamples) => row.extend(["0".into(), "0".into(), blank(), blank(), blank()]),
            Err(e) => return Err(e.into()),
        }
        row.extend([blank(), blank(), blank()]);
        t.push(row);
    }
    Ok(t)
}

fn degenerate_note(res: &TestResult) -> &'static str {
    match res.degenerate {
        Some(Degenerate::ConstantEqual) => "constant samples, equal",
        Some(Degenerate::ConstantUnequal) => "constant samples, unequal",
        None => "",
    }
}

/// Welch t-tests on relative positions for every pair of corpora and every
/// FC label.
pub fn cross_tests_table(corpora: &[Corpus], r: &Rounding) -> Result<Table, CliError> {
    let mut t = Table::new(&["label", "corpus_a", "corpus_b", "n_a", "n_b", "t", "t_df", "t_p", "note"]);
    for (i, a) in corpora.iter().enumerate() {
        for b in &corpora[i + 1..] {
            for label in TagLabel::FUNCTIONAL {
                let xa: Vec<f64> = relative_positions(a, label).iter().map(|s| s.value()).collect();
                let xb: Vec<f64> = relative_positions(b, label).iter().map(|s| s.value()).collect();
                let mut row = vec![
                    label.to_string(),
                    a.name.clone(),
                    b.name.clone(),
                    xa.len().to_string(),
                    xb.len().to_string(),
                ];
                match welch_t_test(&xa, &xb) {
                    Ok(res) => row.extend([
                        f64_half_up(res.statistic, r.statistic),
                        f64_half_up(res.df, r.statistic),
                        p_value(res.p_value, r),
                        degenerate_note(&res).to_string(),
                    ]),
                    Err(StatsError::InsufficientData { .. }) => {
                        row.extend([blank(), blank(), blank(), "fewer than 2 samples".to_string()])
                    }
                    Err(e) => return Err(e.into()),
                }
                t.push(row);
            }
        }
    }
    Ok(t)
}

/// All 24 FC/anchor pairs; pairs that never co-occur have `n = 0` and empty
/// probabilities.
pub fn condprob_table(corpus: &Corpus, r: &Rounding) -> Result<Table, CliError> {
    let mut t = Table::new(&["fc", "anchor", "before", "after", "n", "p_before", "p_after"]);
    for fc in TagLabel::FUNCTIONAL {
        for anchor in Anchor::ALL {
            let mut row = vec![fc.to_string(), anchor.to_string()];
            match conditional_anchor_probability(corpus, fc, anchor) {
                Ok(p) => row.extend([
                    p.before.to_string(),
                    (p.n_pairs - p.before).to_string(),
                    p.n_pairs.to_string(),
                    ratio_half_up(p.p_before, r.probability),
                    ratio_half_up(p.p_after, r.probability),
                ]),
                Err(StatsError::NoEligibleSentences { .. }) => {
                    row.extend(["0".into(), "0".into(), "0".into(), blank(), blank()])
                }
                Err(e) => return Err(e.into()),
            }
            t.push(row);
        }
    }
    Ok(t)
}

pub fn pattern_table(table: &PatternTable, column: &str) -> Table {
    let mut t = Table::new(&[column, "length", "frequency"]);
    for PatternRow { pattern, frequency } in &table.rows {
        t.push(vec![chunkorder_core::render_pattern(pattern), pattern.len().to_string(), frequency.to_string()]);
    }
    t
}

/// Transitions out of defined rows, most probable first.
pub fn transitions_table(m: &TransitionMatrix, r: &Rounding) -> Table {
    let mut t = Table::new(&["from", "to", "count", "prob"]);
    for tr in m.ranked() {
        t.push(vec![
            tr.from.to_string(),
            tr.to.to_string(),
            tr.count.to_string(),
            ratio_half_up(tr.prob, r.probability),
        ]);
    }
    t
}

/// The 8×8 probability matrix; rows without outgoing transitions are empty.
pub fn transition_matrix_table(m: &TransitionMatrix, r: &Rounding) -> Table {
    let mut header = vec!["from".to_string()];
    header.extend(TagLabel::FUNCTIONAL.iter().map(|l| l.to_string()));
    header.push("row_count".into());
    let mut t = Table {
        header,
        rows: Vec::new(),
    };
    for (i, from) in TagLabel::FUNCTIONAL.iter().enumerate() {
        let mut row = vec![from.to_string()];
        for j in 0..TagLabel::FUNCTIONAL.len() {
            row.push(m.prob(i, j).map_or_else(blank, |p| ratio_half_up(p, r.probability)));
        }
        row.push(m.row_total(i).to_string());
        t.push(row);
    }
    t
}

/// Cosine similarity (as a percentage) between the centroids of every pair
/// of subsets.
pub fn similarity_table(set: &EmbeddingSet, subsets: &[String], r: &Rounding) -> Result<Table, CliError> {
    let mut centroids = Vec::new();
    for s in subsets {
        let filter: TagFilter = s.parse().map_err(|e| CliError::usage(format!("subset `{s}`: {e}")))?;
        let n = set.select(&filter).count();
        centroids.push((filter.to_string(), n, centroid(set, &filter)?));
    }
    let mut t = Table::new(&["subset_a", "subset_b", "n_a", "n_b", "cosine_pct"]);
    for (i, (na, ca, va)) in centroids.iter().enumerate() {
        for (nb, cb, vb) in &centroids[i + 1..] {
            let cos = cosine_similarity(va, vb)?;
            t.push(vec![
                na.clone(),
                nb.clone(),
                ca.to_string(),
                cb.to_string(),
                f64_half_up(cos * 100.0, r.cosine_pct),
            ]);
        }
    }
    Ok(t)
}

pub fn projection_table(set: &EmbeddingSet, p: &Projection, r: &Rounding) -> Table {
    let mut t = Table::new(&["id", "x", "y", "tags"]);
    for (id, coords) in &p.coords {
        let tags: Vec<&str> = set.entries()[id].tags.iter().map(String::as_str).collect();
        t.push(vec![
            id.clone(),
            f64_half_up(coords[0], r.coordinate),
            f64_half_up(coords.get(1).copied().unwrap_or(0.0), r.coordinate),
            tags.join(";"),
        ]);
    }
    t
}
