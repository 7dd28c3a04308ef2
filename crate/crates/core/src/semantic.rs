//! Precomputed text embeddings: subset centroids, cosine similarity and a
//! deterministic PCA projection for 2-D plots.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("i/o failure: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}: vector has dimension {found}, expected {expected}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: vector component {index} is not finite")]
    NonFiniteComponent { line: usize, index: usize },
    #[error("tag filter `{0}` selects no entries")]
    EmptySelection(String),
    #[error("vector has zero norm")]
    ZeroNorm,
    #[error("vectors differ in dimension ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("projection to {k} components needs at least {needed} entries, got {got}")]
    TooFewPoints { k: usize, needed: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub vector: Vec<f64>,
    pub tags: BTreeSet<String>,
}

/// Equal-dimension vectors keyed by unique id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmbeddingSet {
    dim: usize,
    entries: BTreeMap<String, Embedding>,
}

#[derive(Deserialize)]
struct Row {
    id: String,
    #[serde(default)]
    tags: Vec<String>,
    vec: Vec<f64>,
}

impl EmbeddingSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &BTreeMap<String, Embedding> {
        &self.entries
    }

    /// Adds an entry. `line` is only used for error reporting.
    pub fn insert(
        &mut self,
        id: String,
        vector: Vec<f64>,
        tags: impl IntoIterator<Item = String>,
        line: usize,
    ) -> Result<(), EmbeddingError> {
        if vector.is_empty() {
            return Err(EmbeddingError::Schema {
                line,
                message: "empty vector".into(),
            });
        }
        if let Some(index) = vector.iter().position(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFiniteComponent { line, index });
        }
        if self.entries.is_empty() {
            self.dim = vector.len();
        } else if vector.len() != self.dim {
            return Err(EmbeddingError::DimensionMismatch {
                line,
                expected: self.dim,
                found: vector.len(),
            });
        }
        if self.entries.contains_key(&id) {
            return Err(EmbeddingError::Schema {
                line,
                message: format!("duplicate id `{id}`"),
            });
        }
        self.entries.insert(
            id,
            Embedding {
                vector,
                tags: tags.into_iter().collect(),
            },
        );
        Ok(())
    }

    /// Reads JSON lines of the form `{"id": …, "tags": [...], "vec": [...]}`.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, EmbeddingError> {
        let mut set = EmbeddingSet::default();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: Row = serde_json::from_str(&line).map_err(|e| EmbeddingError::Schema {
                line: line_no,
                message: e.to_string(),
            })?;
            set.insert(row.id, row.vec, row.tags, line_no)?;
        }
        if set.is_empty() {
            return Err(EmbeddingError::Schema {
                line: 0,
                message: "no embeddings".into(),
            });
        }
        Ok(set)
    }

    pub fn select<'a>(&'a self, filter: &'a TagFilter) -> impl Iterator<Item = (&'a String, &'a Embedding)> + 'a {
        self.entries.iter().filter(move |(_, e)| filter.matches(e))
    }
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingSet, EmbeddingError> {
    EmbeddingSet::from_reader(BufReader::new(File::open(path)?))
}

/// Selects entries carrying every listed tag. Written as `en,time`; an empty
/// filter selects everything.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TagFilter(pub BTreeSet<String>);

impl TagFilter {
    pub fn matches(&self, e: &Embedding) -> bool {
        self.0.iter().all(|t| e.tags.contains(t))
    }
}

impl FromStr for TagFilter {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(TagFilter(
            s.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(String::from)
                .collect(),
        ))
    }
}

impl fmt::Display for TagFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("*");
        }
        let parts: Vec<&str> = self.0.iter().map(String::as_str).collect();
        f.write_str(&parts.join(","))
    }
}

/// Componentwise mean of the selected vectors.
pub fn centroid(set: &EmbeddingSet, filter: &TagFilter) -> Result<Vec<f64>, EmbeddingError> {
    let mut sum = vec![0.0; set.dim()];
    let mut n = 0usize;
    for (_, e) in set.select(filter) {
        for (s, v) in sum.iter_mut().zip(&e.vector) {
            *s += v;
        }
        n += 1;
    }
    if n == 0 {
        return Err(EmbeddingError::EmptySelection(filter.to_string()));
    }
    Ok(sum.into_iter().map(|s| s / n as f64).collect())
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::LengthMismatch(u.len(), v.len()));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(EmbeddingError::ZeroNorm);
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub mean: Vec<f64>,
    /// Unit principal axes, strongest first.
    pub components: Vec<Vec<f64>>,
    /// Variance captured by each axis (sample covariance eigenvalues).
    pub variances: Vec<f64>,
    pub total_variance: f64,
    pub coords: BTreeMap<String, Vec<f64>>,
    /// Fewer than `k` axes carry variance; missing coordinates are zero.
    pub rank_deficient: bool,
}

const PCA_TOL: f64 = 1e-10;
const PCA_MAX_ITER: usize = 100_000;

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// Flips `v` so its largest-magnitude component is positive.
fn orient(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Dominant eigenpair of a symmetric positive semi-definite matrix.
fn power_iteration(m: &[Vec<f64>]) -> Option<(f64, Vec<f64>)> {
    let dim = m.len();
    let seed: Vec<f64> = (0..dim).map(|i| 1.0 / (i + 1) as f64).collect();
    let mut v = mat_vec(m, &seed);
    let n = norm(&v);
    if n == 0.0 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= n);
    for _ in 0..PCA_MAX_ITER {
        let mut w = mat_vec(m, &v);
        let n = norm(&w);
        if n == 0.0 {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= n);
        let delta = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if delta < PCA_TOL {
            break;
        }
    }
    let lambda = dot(&v, &mat_vec(m, &v));
    orient(&mut v);
    Some((lambda, v))
}

/// Projects mean-centred vectors onto the top `k` eigenvectors of the sample
/// covariance, found by power iteration with deflation.
pub fn pca_project(set: &EmbeddingSet, k: usize) -> Result<Projection, EmbeddingError> {
    let n = set.len();
    if k == 0 || n < k + 1 {
        return Err(EmbeddingError::TooFewPoints {
            k,
            needed: k + 1,
            got: n,
        });
    }
    let dim = set.dim();
    let mean = centroid(set, &TagFilter::default())?;
    let centred: Vec<(&String, Vec<f64>)> = set
        .entries()
        .iter()
        .map(|(id, e)| (id, e.vector.iter().zip(&mean).map(|(x, m)| x - m).collect()))
        .collect();

    let mut cov = vec![vec![0.0; dim]; dim];
    for (_, x) in &centred {
        for (row, xi) in cov.iter_mut().zip(x) {
            for (c, xj) in row.iter_mut().zip(x) {
                *c += xi * xj;
            }
        }
    }
    for c in cov.iter_mut().flatten() {
        *c /= (n - 1) as f64;
    }
    let total_variance: f64 = (0..dim).map(|i| cov[i][i]).sum();
    let floor = total_variance * 1e-12;

    let mut components = Vec::with_capacity(k);
    let mut variances = Vec::with_capacity(k);
    let mut rank_deficient = false;
    let mut deflated = cov;
    for _ in 0..k.min(dim) {
        match power_iteration(&deflated) {
            Some((lambda, v)) if lambda > floor => {
                for i in 0..dim {
                    for j in 0..dim {
                        deflated[i][j] -= lambda * v[i] * v[j];
                    }
                }
                components.push(v);
                variances.push(lambda);
            }
            _ => {
                rank_deficient = true;
                break;
            }
        }
    }
    if components.len() < k {
        rank_deficient = true;
    }

    let coords = centred
        .into_iter()
        .map(|(id, x)| {
            let mut c: Vec<f64> = components.iter().map(|v| dot(v, &x)).collect();
            c.resize(k, 0.0);
            (id.clone(), c)
        })
        .collect();
    Ok(Projection {
        mean,
        components,
        variances,
        total_variance,
        coords,
        rank_deficient,
    })
}

/// Sum of squared residuals after reconstructing every entry from the first
/// `k` axes of `projection`.
pub fn reconstruction_error(set: &EmbeddingSet, projection: &Projection, k: usize) -> f64 {
    let axes = &projection.components[..k.min(projection.components.len())];
    set.entries()
        .values()
        .map(|e| {
            let x: Vec<f64> = e.vector.iter().zip(&projection.mean).map(|(a, m)| a - m).collect();
            let mut r = x.clone();
            for v in axes {
                let c = dot(v, &x);
                for (ri, vi) in r.iter_mut().zip(v) {
                    *ri -= c * vi;
                }
            }
            dot(&r, &r)
        })
        .sum()
}
