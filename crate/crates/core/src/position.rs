//! Where functional chunks sit inside their sentences, and whether that
//! placement departs from uniform or differs between corpora.
//!
//! Relative position is chunk-index based: the chunk at index `i` of a
//! sentence with `n` chunks (gaps excluded) sits at `i / (n - 1)`, and a lone
//! chunk sits at `1/2`.

use num_rational::Ratio;

use crate::corpus::Corpus;
use crate::label::{Anchor, TagLabel};
use crate::special::{chi_square_sf, student_t_two_sided};
use crate::StatsError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionSample {
    pub label: TagLabel,
    pub rel_pos: Ratio<u64>,
    pub sentence_id: String,
}

impl PositionSample {
    pub fn value(&self) -> f64 {
        *self.rel_pos.numer() as f64 / *self.rel_pos.denom() as f64
    }
}

/// Every occurrence of `label` with its relative position, in corpus order.
pub fn relative_positions(corpus: &Corpus, label: TagLabel) -> Vec<PositionSample> {
    let mut out = Vec::new();
    for sentence in corpus.sentences() {
        let n = sentence.chunks().len() as u64;
        for (i, l) in sentence.labels().enumerate() {
            if l != label {
                continue;
            }
            let rel_pos = if n > 1 {
                Ratio::new(i as u64, n - 1)
            } else {
                Ratio::new(1, 2)
            };
            out.push(PositionSample {
                label,
                rel_pos,
                sentence_id: sentence.id.clone(),
            });
        }
    }
    out
}

/// Marks tests whose samples had no spread at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degenerate {
    /// Both samples constant with the same value: p = 1 by convention.
    ConstantEqual,
    /// Both samples constant with different values: p = 0 by convention.
    ConstantUnequal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
    /// Bin counts `[front, back]` for chi-square, sample sizes `[a, b]` for t.
    pub n: Vec<u64>,
    pub degenerate: Option<Degenerate>,
}

/// Goodness of fit of front/back bin counts against an even split (df = 1).
pub fn chi_square_bins(front: u64, back: u64) -> Result<TestResult, StatsError> {
    let n = front + back;
    if n == 0 {
        return Err(StatsError::EmptySamples);
    }
    // Σ (O − n/2)² / (n/2) collapses to (front − back)² / n.
    let diff = front.abs_diff(back) as f64;
    let statistic = diff * diff / n as f64;
    Ok(TestResult {
        statistic,
        df: 1.0,
        p_value: chi_square_sf(statistic, 1.0)?,
        n: vec![front, back],
        degenerate: None,
    })
}

/// Bins samples into front (`rel_pos < 1/2`) and back (`≥ 1/2`) and tests the
/// split against uniformity.
pub fn chi_square_uniform(samples: &[PositionSample]) -> Result<TestResult, StatsError> {
    let half = Ratio::new(1, 2);
    let front = samples.iter().filter(|s| s.rel_pos < half).count() as u64;
    chi_square_bins(front, samples.len() as u64 - front)
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of
/// freedom and a two-sided p-value.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    let got = a.len().min(b.len());
    if got < 2 {
        return Err(StatsError::InsufficientData { needed: 2, got });
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(StatsError::Domain("t-test samples must be finite".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mean_a, var_a) = mean_var(a);
    let (mean_b, var_b) = mean_var(b);
    let n = vec![a.len() as u64, b.len() as u64];

    if var_a == 0.0 && var_b == 0.0 {
        let equal = mean_a == mean_b;
        let statistic = if equal {
            0.0
        } else {
            (mean_a - mean_b).signum() * f64::INFINITY
        };
        return Ok(TestResult {
            statistic,
            df: na + nb - 2.0,
            p_value: if equal { 1.0 } else { 0.0 },
            n,
            degenerate: Some(if equal {
                Degenerate::ConstantEqual
            } else {
                Degenerate::ConstantUnequal
            }),
        });
    }

    let se_a = var_a / na;
    let se_b = var_b / nb;
    let se = se_a + se_b;
    let statistic = (mean_a - mean_b) / se.sqrt();
    let df = se * se / (se_a * se_a / (na - 1.0) + se_b * se_b / (nb - 1.0));
    Ok(TestResult {
        statistic,
        df,
        p_value: student_t_two_sided(statistic, df)?,
        n,
        degenerate: None,
    })
}

/// How often a functional chunk precedes the first occurrence of an anchor
/// in sentences containing both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnchorProbability {
    pub fc: TagLabel,
    pub anchor: Anchor,
    pub before: u64,
    pub n_pairs: u64,
    pub p_before: Ratio<u64>,
    pub p_after: Ratio<u64>,
}

/// Pairs every `fc` occurrence with the first `anchor` of its sentence, over
/// sentences containing at least one of each.
pub fn conditional_anchor_probability(
    corpus: &Corpus,
    fc: TagLabel,
    anchor: Anchor,
) -> Result<AnchorProbability, StatsError> {
    let anchor_label = anchor.label();
    let mut before = 0u64;
    let mut pairs = 0u64;
    for sentence in corpus.sentences() {
        let labels: Vec<TagLabel> = sentence.labels().collect();
        let Some(first) = labels.iter().position(|&l| l == anchor_label) else {
            continue;
        };
        for (i, &l) in labels.iter().enumerate() {
            if l == fc {
                pairs += 1;
                if i < first {
                    before += 1;
                }
            }
        }
    }
    if pairs == 0 {
        return Err(StatsError::NoEligibleSentences {
            fc: fc.to_string(),
            anchor: anchor.to_string(),
        });
    }
    Ok(AnchorProbability {
        fc,
        anchor,
        before,
        n_pairs: pairs,
        p_before: Ratio::new(before, pairs),
        p_after: Ratio::new(pairs - before, pairs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_corpus, Language, Mode};
    use TagLabel::*;

    fn corpus(text: &str) -> Corpus {
        parse_corpus(text.as_bytes(), "c", Language::English, Mode::Strict).unwrap().0
    }

    #[test]
    fn first_and_last_positions() {
        let c = corpus("<time>a</time><S>b</S><V>c</V><O>d</O>\n<S>b</S><V>c</V><O>d</O><time>a</time>\n<time>x</time>\n");
        let pos: Vec<_> = relative_positions(&c, Time).into_iter().map(|p| p.rel_pos).collect();
        assert_eq!(pos, vec![Ratio::from_integer(0), Ratio::from_integer(1), Ratio::new(1, 2)]);
        assert!(relative_positions(&c, Cause).is_empty());
    }

    #[test]
    fn chi_square_cases() {
        let r = chi_square_bins(10, 10).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        let r = chi_square_bins(75, 25).unwrap();
        assert_eq!(r.statistic, 25.0);
        assert!((r.p_value - 5.733_031_437_583_875e-7).abs() < 1e-15);
        assert_eq!(chi_square_uniform(&[]), Err(StatsError::EmptySamples));
    }

    #[test]
    fn boundary_goes_to_back_bin() {
        let s = PositionSample {
            label: Time,
            rel_pos: Ratio::new(1, 2),
            sentence_id: "x".into(),
        };
        assert_eq!(chi_square_uniform(&[s]).unwrap().n, vec![0, 1]);
    }

    #[test]
    fn welch_identical_samples() {
        let a = [0.1, 0.4, 0.9];
        let r = welch_t_test(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn welch_reference_example() {
        // scipy.stats.ttest_ind(a, b, equal_var=False)
        let r = welch_t_test(&[0.1, 0.2, 0.3], &[0.7, 0.8, 0.9]).unwrap();
        assert!((r.statistic - -7.348_469_228_349_532).abs() < 1e-12);
        assert!((r.p_value - 0.001_826_260_668_259_984_8).abs() < 1e-8);
        assert!((r.df - 4.0).abs() < 1e-12);
    }

    #[test]
    fn welch_degenerate_samples() {
        let r = welch_t_test(&[0.5, 0.5], &[0.5, 0.5, 0.5]).unwrap();
        assert_eq!((r.p_value, r.degenerate), (1.0, Some(Degenerate::ConstantEqual)));
        let r = welch_t_test(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!((r.p_value, r.degenerate), (0.0, Some(Degenerate::ConstantUnequal)));
        assert_eq!(r.statistic, f64::NEG_INFINITY);
        assert!(welch_t_test(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn anchor_probability() {
        let c = corpus("<time>a</time><S>b</S><V>c</V><O>d</O>\n");
        let p = conditional_anchor_probability(&c, Time, Anchor::Subject).unwrap();
        assert_eq!(p.p_before, Ratio::from_integer(1));
        assert_eq!(p.p_before + p.p_after, Ratio::from_integer(1));

        let c = corpus(
            "<time>Today</time> <S>we</S> <V>met</V>.\n\
             <S>They</S> <V>left</V> <time>yesterday</time>.\n\
             <S>She</S> <time>then</time> <V>called</V> <O>him</O>.\n",
        );
        let p = conditional_anchor_probability(&c, Time, Anchor::Verb).unwrap();
        assert_eq!((p.p_before, p.n_pairs), (Ratio::new(2, 3), 3));
        assert!(conditional_anchor_probability(&c, Cause, Anchor::Verb).is_err());
    }

    #[test]
    fn first_anchor_occurrence_is_used() {
        let c = corpus("<S>a</S><V>b</V><time>t</time><S>c</S><V>d</V>\n");
        let p = conditional_anchor_probability(&c, Time, Anchor::Verb).unwrap();
        assert_eq!(p.before, 0);
    }
}
