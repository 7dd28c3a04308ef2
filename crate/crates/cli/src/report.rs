//! The `report` pipeline: strict loading, every table and figure per corpus,
//! cross-corpus tests, optional semantics, and a manifest of digests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chunkorder_core::rounding::f64_half_up;
use chunkorder_core::{
    fc_combination_counts, parse_corpus, pattern_counts, pca_project, transition_matrix, Corpus,
    CorpusError, EmbeddingSet, Language, Mode,
};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{PipelineConfig, SemanticsConfig};
use crate::svg::{self, Point};
use crate::tables::{self, pretty_json};
use crate::CliError;

pub const MANIFEST: &str = "manifest.json";
/// The only manifest key that changes between identical runs.
pub const TIMESTAMP_KEY: &str = "generated_at";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A corpus file read strictly, with its digest.
pub struct LoadedCorpus {
    pub corpus: Corpus,
    pub sha256: String,
    pub bytes: usize,
}

/// Reads and strictly parses one corpus file. A rejected line becomes a
/// data error naming the file and line.
pub fn load_corpus(path: &Path, name: &str, language: Language, mode: Mode) -> Result<(LoadedCorpus, Vec<String>), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let (mut corpus, diagnostics) = parse_corpus(bytes.as_slice(), name, language, mode).map_err(|e| match e {
        CorpusError::Rejected(d) => CliError::data(format!("{}: {d}", path.display())),
        other => CliError::from(other).context(path.display()),
    })?;
    corpus.source_meta.insert("path".into(), path.display().to_string());
    let notes = diagnostics.iter().map(|d| format!("{}: {d}", path.display())).collect();
    Ok((
        LoadedCorpus {
            corpus,
            sha256: sha256_hex(&bytes),
            bytes: bytes.len(),
        },
        notes,
    ))
}

pub fn load_all(cfg: &PipelineConfig) -> Result<Vec<LoadedCorpus>, CliError> {
    cfg.corpora
        .iter()
        .map(|c| load_corpus(&cfg.resolve(&c.path), &c.name, c.language, Mode::Strict).map(|(l, _)| l))
        .collect()
}

/// In-memory bundle: relative path → file contents.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bundle {
    pub files: BTreeMap<String, Vec<u8>>,
}

impl Bundle {
    fn add(&mut self, path: String, contents: impl Into<Vec<u8>>) {
        let previous = self.files.insert(path, contents.into());
        debug_assert!(previous.is_none());
    }
}

fn corpus_files(bundle: &mut Bundle, corpus: &Corpus, cfg: &PipelineConfig) -> Result<(), CliError> {
    let r = &cfg.rounding;
    let dir = &corpus.name;
    bundle.add(format!("{dir}/stats.json"), pretty_json(&tables::stats_json(corpus, r)?));
    bundle.add(format!("{dir}/fc_distribution.csv"), tables::fc_distribution_table(corpus, r).to_csv());
    bundle.add(format!("{dir}/positions.csv"), tables::positions_table(corpus, r).to_csv());
    bundle.add(format!("{dir}/tests.csv"), tables::tests_table(corpus, r)?.to_csv());
    bundle.add(format!("{dir}/condprob.csv"), tables::condprob_table(corpus, r)?.to_csv());
    let patterns = pattern_counts(corpus, Some(cfg.top_k_patterns));
    bundle.add(format!("{dir}/patterns.csv"), tables::pattern_table(&patterns, "pattern").to_csv());
    let combos = fc_combination_counts(corpus, 2, Some(cfg.top_k_combos));
    bundle.add(format!("{dir}/combos.csv"), tables::pattern_table(&combos, "combination").to_csv());
    let m = transition_matrix(corpus);
    bundle.add(format!("{dir}/transitions.csv"), tables::transitions_table(&m, r).to_csv());
    bundle.add(format!("{dir}/transition_matrix.csv"), tables::transition_matrix_table(&m, r).to_csv());
    bundle.add(
        format!("{dir}/transitions.svg"),
        svg::transition_heatmap(&format!("{}: functional chunk transitions", corpus.name), &m, r.probability),
    );
    Ok(())
}

fn rounded(x: f64, decimals: u32) -> Value {
    json!(f64_half_up(x, decimals).parse::<f64>().expect("finite"))
}

fn semantics_files(
    bundle: &mut Bundle,
    set: &EmbeddingSet,
    sem: &SemanticsConfig,
    cfg: &PipelineConfig,
) -> Result<Value, CliError> {
    let r = &cfg.rounding;
    if sem.subsets.len() >= 2 {
        bundle.add("similarity.csv".into(), tables::similarity_table(set, &sem.subsets, r)?.to_csv());
    }
    let k = 2.min(set.len().saturating_sub(1));
    if k == 0 {
        return Ok(json!({ "projection": null }));
    }
    let p = pca_project(set, k)?;
    bundle.add("projection.csv".into(), tables::projection_table(set, &p, r).to_csv());
    let points: Vec<Point<'_>> = p
        .coords
        .iter()
        .map(|(id, c)| Point {
            id,
            x: c[0],
            y: c.get(1).copied().unwrap_or(0.0),
            class: sem.color_by.iter().position(|t| set.entries()[id].tags.contains(t)),
        })
        .collect();
    bundle.add("projection.svg".into(), svg::scatter("Embedding projection (PCA)", &points, &sem.color_by));
    let explained: Vec<Value> = p
        .variances
        .iter()
        .map(|v| rounded(if p.total_variance > 0.0 { v / p.total_variance } else { 0.0 }, r.coordinate))
        .collect();
    Ok(json!({
        "projection": {
            "method": "pca",
            "components": k,
            "variances": p.variances.iter().map(|v| rounded(*v, r.coordinate)).collect::<Vec<_>>(),
            "explained_ratio": explained,
            "total_variance": rounded(p.total_variance, r.coordinate),
            "rank_deficient": p.rank_deficient,
        }
    }))
}

/// Computes every output file. Nothing is written to disk.
pub fn build_bundle(cfg: &PipelineConfig, generated_at: &str) -> Result<Bundle, CliError> {
    let loaded = load_all(cfg)?;
    let corpora: Vec<Corpus> = loaded.iter().map(|l| l.corpus.clone()).collect();
    for c in &corpora {
        if c.is_empty() {
            return Err(CliError::data(format!("corpus `{}` is empty", c.name)));
        }
    }

    let mut bundle = Bundle::default();
    for c in &corpora {
        corpus_files(&mut bundle, c, cfg)?;
    }
    bundle.add("cross_tests.csv".into(), tables::cross_tests_table(&corpora, &cfg.rounding)?.to_csv());

    let mut embeddings = Value::Null;
    let mut semantics = Value::Null;
    if let Some(sem) = &cfg.semantics {
        let path = cfg.resolve(&sem.embeddings);
        let bytes = fs::read(&path).map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
        let set = EmbeddingSet::from_reader(bytes.as_slice()).map_err(|e| CliError::from(e).context(path.display()))?;
        embeddings = json!({
            "path": sem.embeddings.display().to_string(),
            "sha256": sha256_hex(&bytes),
            "count": set.len(),
            "dim": set.dim(),
        });
        semantics = semantics_files(&mut bundle, &set, sem, cfg)?;
        semantics["subsets"] = json!(sem.subsets);
    }

    let inputs: Vec<Value> = cfg
        .corpora
        .iter()
        .zip(&loaded)
        .map(|(entry, l)| {
            json!({
                "name": entry.name,
                "path": entry.path.display().to_string(),
                "language": entry.language.as_str(),
                "sha256": l.sha256,
                "bytes": l.bytes,
                "sentences": l.corpus.len(),
            })
        })
        .collect();
    let files: BTreeMap<&String, String> = bundle.files.iter().map(|(k, v)| (k, sha256_hex(v))).collect();
    let r = &cfg.rounding;
    let mut manifest = json!({
        "tool": "chunkorder",
        "version": env!("CARGO_PKG_VERSION"),
        "inputs": inputs,
        "embeddings": embeddings,
        "semantics": semantics,
        "settings": {
            "mode": "strict",
            "top_k_patterns": cfg.top_k_patterns,
            "top_k_combos": cfg.top_k_combos,
            "min_combination_length": 2,
            "rounding": {
                "ttr": r.ttr, "per_line": r.per_line, "proportion": r.proportion,
                "position": r.position, "statistic": r.statistic, "p_value_significant_digits": r.p_value,
                "probability": r.probability, "cosine_pct": r.cosine_pct, "coordinate": r.coordinate,
            },
        },
        "files": files,
    });
    manifest[TIMESTAMP_KEY] = json!(generated_at);
    bundle.add(MANIFEST.into(), pretty_json(&manifest));
    Ok(bundle)
}

/// RFC 3339 UTC time, taken from `SOURCE_DATE_EPOCH` when set.
pub fn timestamp() -> String {
    use time::format_description::well_known::Rfc3339;
    use time::OffsetDateTime;
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| OffsetDateTime::from_unix_timestamp(secs).ok())
        .unwrap_or_else(OffsetDateTime::now_utc);
    now.format(&Rfc3339).expect("formattable timestamp")
}

/// Writes the bundle through a staging directory next to `out_dir` and
/// swaps it into place. An existing `out_dir` is replaced only if it is empty
/// or holds a previous bundle (has a manifest).
pub fn write_bundle(bundle: &Bundle, out_dir: &Path) -> Result<(), CliError> {
    if out_dir.exists() {
        let is_bundle = out_dir.join(MANIFEST).is_file();
        let is_empty = fs::read_dir(out_dir).map(|mut d| d.next().is_none()).unwrap_or(false);
        if !out_dir.is_dir() || !(is_bundle || is_empty) {
            return Err(CliError::usage(format!(
                "refusing to overwrite {}: not a previous report directory",
                out_dir.display()
            )));
        }
    }
    let parent = match out_dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let leaf = out_dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    let io = |e: std::io::Error, what: &Path| CliError::data(format!("cannot write {}: {e}", what.display()));
    fs::create_dir_all(&parent).map_err(|e| io(e, &parent))?;
    let staging = parent.join(format!(".{leaf}.staging-{}", std::process::id()));
    let result = (|| {
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(|e| io(e, &staging))?;
        }
        for (rel, contents) in &bundle.files {
            let path = staging.join(rel);
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
            }
            fs::write(&path, contents).map_err(|e| io(e, &path))?;
        }
        if out_dir.exists() {
            fs::remove_dir_all(out_dir).map_err(|e| io(e, out_dir))?;
        }
        fs::rename(&staging, out_dir).map_err(|e| io(e, out_dir))
    })();
    if result.is_err() {
        let _ = fs::remove_dir_all(&staging);
    }
    result
}

/// Builds and writes the full report; returns the output directory.
pub fn run_report(cfg: &PipelineConfig, out_override: Option<&Path>) -> Result<PathBuf, CliError> {
    let out_dir = match out_override {
        Some(p) => p.to_path_buf(),
        None => cfg.resolve(&cfg.output_dir),
    };
    let bundle = build_bundle(cfg, &timestamp())?;
    write_bundle(&bundle, &out_dir)?;
    Ok(out_dir)
}
