//! Fixture corpora, special functions and embeddings checked against values
//! produced by `fixtures/oracle/derive.py` (regex counting, scipy, numpy).

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use chunkorder_core::semantic::reconstruction_error;
use chunkorder_core::sequence::fc_projection;
use chunkorder_core::*;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn json(name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

fn ratio(s: &str) -> Ratio<u64> {
    let (n, d) = s.split_once('/').unwrap();
    Ratio::new(n.parse().unwrap(), d.parse().unwrap())
}

fn load(name: &str, language: Language) -> Corpus {
    read_corpus(&fixture(&format!("{name}.txt")), name, language, Mode::Strict).unwrap().0
}

fn corpora() -> Vec<(Corpus, Value)> {
    vec![
        (load("mini_en", Language::English), json("mini_en.expected.json")),
        (load("mini_zh", Language::Chinese), json("mini_zh.expected.json")),
    ]
}

#[test]
fn chunk_counts_and_round_trip() {
    for (corpus, exp) in corpora() {
        assert_eq!(corpus.len() as u64, exp["lines"].as_u64().unwrap());
        let chunks: usize = corpus.sentences().iter().map(|s| s.chunks().len()).sum();
        assert_eq!(chunks as u64, exp["chunks"].as_u64().unwrap(), "{}", corpus.name);
        for s in corpus.sentences() {
            assert_eq!(
                corpus::normalize_whitespace(&serialize_sentence(s)),
                corpus::normalize_whitespace(&s.raw)
            );
        }
    }
    let zh = load("mini_zh", Language::Chinese);
    assert_eq!(zh.len(), 30);
    assert_eq!(zh.sentences().iter().map(|s| s.chunks().len()).sum::<usize>(), 121);
}

#[test]
fn fc_distribution_matches() {
    for (corpus, exp) in corpora() {
        let d = fc_distribution(&corpus);
        assert_eq!(d.total, exp["fcs"].as_u64().unwrap());
        for row in &d.rows {
            let e = &exp["fc_distribution"][row.label.as_str()];
            assert_eq!(row.frequency, e["frequency"].as_u64().unwrap(), "{}", row.label);
            assert_eq!(row.proportion, ratio(e["proportion"].as_str().unwrap()));
        }
        assert!(d.rows.windows(2).all(|w| w[0].frequency >= w[1].frequency));
    }
}

#[test]
fn positions_match() {
    for (corpus, exp) in corpora() {
        for label in TagLabel::FUNCTIONAL {
            let got: Vec<(String, Ratio<u64>)> = relative_positions(&corpus, label)
                .into_iter()
                .map(|p| (p.sentence_id, p.rel_pos))
                .collect();
            let want: Vec<(String, Ratio<u64>)> = exp["positions"][label.as_str()]
                .as_array()
                .map(|a| {
                    a.iter()
                        .map(|p| {
                            (
                                p["sentence_id"].as_str().unwrap().to_string(),
                                ratio(p["rel_pos"].as_str().unwrap()),
                            )
                        })
                        .collect()
                })
                .unwrap_or_default();
            assert_eq!(got, want, "{} {label}", corpus.name);
        }
    }
}

#[test]
fn conditional_probabilities_match() {
    for (corpus, exp) in corpora() {
        let mut want: BTreeMap<(String, String), &Value> = BTreeMap::new();
        for row in exp["condprob"].as_array().unwrap() {
            want.insert(
                (row["fc"].as_str().unwrap().into(), row["anchor"].as_str().unwrap().into()),
                row,
            );
        }
        for fc in TagLabel::FUNCTIONAL {
            for anchor in Anchor::ALL {
                let key = (fc.to_string(), anchor.to_string());
                match (conditional_anchor_probability(&corpus, fc, anchor), want.get(&key)) {
                    (Ok(p), Some(row)) => {
                        assert_eq!(p.p_before, ratio(row["p_before"].as_str().unwrap()));
                        assert_eq!(p.p_after, ratio(row["p_after"].as_str().unwrap()));
                        assert_eq!(p.n_pairs, row["n"].as_u64().unwrap());
                    }
                    (Err(StatsError::NoEligibleSentences { .. }), None) => {}
                    (got, want) => panic!("{key:?}: {got:?} vs {want:?}"),
                }
            }
        }
    }

    let synthetic = load("condprob_synthetic", Language::English);
    let p = conditional_anchor_probability(&synthetic, TagLabel::Time, Anchor::Verb).unwrap();
    assert_eq!(p.p_before, Ratio::new(2, 3));
}

fn table_rows(t: &PatternTable) -> Vec<(String, u64)> {
    t.rows.iter().map(|r| (r.render(), r.frequency)).collect()
}

fn expected_rows(v: &Value) -> Vec<(String, u64)> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|r| (r["pattern"].as_str().unwrap().to_string(), r["frequency"].as_u64().unwrap()))
        .collect()
}

#[test]
fn patterns_and_combinations_match() {
    for (corpus, exp) in corpora() {
        let patterns = pattern_counts(&corpus, None);
        assert_eq!(table_rows(&patterns), expected_rows(&exp["patterns"]));
        let nonempty = corpus.sentences().iter().filter(|s| !s.chunks().is_empty()).count();
        assert_eq!(patterns.total, nonempty as u64);

        let combos = fc_combination_counts(&corpus, 2, None);
        assert_eq!(table_rows(&combos), expected_rows(&exp["combos"]));
    }
}

#[test]
fn transitions_match_and_rescan() {
    for (corpus, exp) in corpora() {
        let m = transition_matrix(&corpus);
        for (i, from) in TagLabel::FUNCTIONAL.iter().enumerate() {
            for (j, to) in TagLabel::FUNCTIONAL.iter().enumerate() {
                let cell = &exp["transitions"][from.as_str()][to.as_str()];
                assert_eq!(m.counts[i][j], cell["count"].as_u64().unwrap());
                assert_eq!(m.prob(i, j), cell["prob"].as_str().map(ratio), "{from}->{to}");
            }
        }
        // Row sums equal the number of adjacent FC pairs starting with that label.
        for (i, from) in TagLabel::FUNCTIONAL.iter().enumerate() {
            let pairs: u64 = corpus
                .sentences()
                .iter()
                .map(|s| {
                    let p = fc_projection(&s.labels().collect::<Vec<_>>());
                    p.windows(2).filter(|w| w[0] == *from).count() as u64
                })
                .sum();
            assert_eq!(m.row_total(i), pairs);
        }
    }
}

#[test]
fn sentence_seven_sequence() {
    let (corpus, exp) = corpora().remove(0);
    let want: Vec<TagLabel> = exp["sequence_line_7"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().parse().unwrap())
        .collect();
    assert_eq!(tag_sequence(&corpus.sentences()[6]).labels, want);
}

#[test]
fn special_function_grid() {
    let grid = json("special_grid.json");
    let gamma = grid["gamma_q"].as_array().unwrap();
    let beta = grid["inc_beta"].as_array().unwrap();
    assert_eq!((gamma.len(), beta.len()), (200, 200));
    let mut worst = 0.0f64;
    for p in gamma {
        let got = regularized_gamma_q(p["s"].as_f64().unwrap(), p["x"].as_f64().unwrap()).unwrap();
        let err = (got - p["q"].as_f64().unwrap()).abs();
        worst = worst.max(err);
        assert!(err <= 1e-10, "gamma_q{p}: {got}");
    }
    for p in beta {
        let (a, b, x) = (p["a"].as_f64().unwrap(), p["b"].as_f64().unwrap(), p["x"].as_f64().unwrap());
        let got = regularized_incomplete_beta(a, b, x).unwrap();
        let err = (got - p["i"].as_f64().unwrap()).abs();
        worst = worst.max(err);
        assert!(err <= 1e-10, "inc_beta{p}: {got}");
    }
    eprintln!("worst special-function error: {worst:e}");
}

#[test]
fn test_statistics_match_reference() {
    let data = json("stat_pairs.json");
    for pair in data["pairs"].as_array().unwrap() {
        let bins = pair["bins"].as_array().unwrap();
        let chi = chi_square_bins(bins[0].as_u64().unwrap(), bins[1].as_u64().unwrap()).unwrap();
        assert!((chi.statistic - pair["chi2"].as_f64().unwrap()).abs() <= 1e-8);
        assert!((chi.p_value - pair["chi2_p"].as_f64().unwrap()).abs() <= 1e-8);

        let a: Vec<f64> = pair["a"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        let b: Vec<f64> = pair["b"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        let t = welch_t_test(&a, &b).unwrap();
        assert!((t.statistic - pair["t"].as_f64().unwrap()).abs() <= 1e-8);
        assert!((t.df - pair["df"].as_f64().unwrap()).abs() <= 1e-8);
        assert!((t.p_value - pair["t_p"].as_f64().unwrap()).abs() <= 1e-8);
    }
    let ex = &data["welch_example"];
    let t = welch_t_test(&[0.1, 0.2, 0.3], &[0.7, 0.8, 0.9]).unwrap();
    assert!((t.statistic - ex["t"].as_f64().unwrap()).abs() <= 1e-8);
    assert!((t.p_value - ex["t_p"].as_f64().unwrap()).abs() <= 1e-8);
}

#[test]
fn embedding_fixture() {
    let exp = json("emb_mini.expected.json");
    let set = load_embeddings(&fixture("emb_mini.jsonl")).unwrap();
    assert_eq!(set.len() as u64, exp["count"].as_u64().unwrap());
    assert_eq!(set.dim() as u64, exp["dim"].as_u64().unwrap());

    let floats = |v: &Value| -> Vec<f64> { v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect() };
    let zh = centroid(&set, &"zh".parse().unwrap()).unwrap();
    let en = centroid(&set, &"en".parse().unwrap()).unwrap();
    for (got, want) in zh.iter().zip(floats(&exp["centroid_zh"])) {
        assert!((got - want).abs() < 1e-12);
    }
    let cos = cosine_similarity(&en, &zh).unwrap();
    assert!((cos - exp["cosine_en_zh"].as_f64().unwrap()).abs() < 1e-12);

    let p = pca_project(&set, 2).unwrap();
    for (got, want) in p.variances.iter().zip(floats(&exp["pca_variances"])) {
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }
    assert!((p.total_variance - exp["total_variance"].as_f64().unwrap()).abs() < 1e-10);
    // Projected coordinates carry exactly the component variances.
    for k in 0..2 {
        let xs: Vec<f64> = p.coords.values().map(|c| c[k]).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((var - p.variances[k]).abs() < 1e-8);
    }
    let e1 = reconstruction_error(&set, &p, 1);
    let e2 = reconstruction_error(&set, &p, 2);
    assert!(e2 <= e1 + 1e-12);
}
