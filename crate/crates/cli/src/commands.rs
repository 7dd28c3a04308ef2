use std::collections::HashSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chunkorder_annotate::{agreement, Annotator, FewShotSet};
use chunkorder_core::{
    fc_combination_counts, load_embeddings, parse_corpus, pattern_counts, pca_project, serialize_sentence,
    transition_matrix, Corpus, Language, Mode,
};
use clap::error::ErrorKind as ClapKind;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::config::{PipelineConfig, Rounding};
use crate::report::{self, load_corpus};
use crate::tables::{self, pretty_json, Table};
use crate::{svg, CliError};

#[derive(Parser, Debug)]
#[command(
    name = "chunkorder",
    version,
    about = "Constituent-order analysis of corpora tagged with functional chunks and S/V/O roles",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse an annotated file and print its chunks as JSON lines
    Parse(ParseArgs),
    /// Check an annotated file and report every problem
    Validate(ParseArgs),
    /// Annotate raw sentences through the configured endpoint
    Annotate(AnnotateArgs),
    /// Corpus statistics (tokens, types, tags per line) as JSON
    Stats(StatsArgs),
    /// Relative position of every functional chunk
    Positions(Inputs),
    /// Chi-square tests against an even front/back split, or Welch t-tests across corpora
    Tests(TestsArgs),
    /// Probability that a functional chunk precedes the first S, V or O
    Condprob(Inputs),
    /// Most frequent whole-sentence label sequences
    Patterns(PatternArgs),
    /// Most frequent functional-chunk combinations
    Combos(ComboArgs),
    /// Transitions between adjacent functional chunks
    Transitions(TransitionArgs),
    /// Centroid similarity and 2-D projection of embedding vectors
    Semantics(SemanticsArgs),
    /// Write every table and figure for the configured corpora
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct ParseArgs {
    /// Annotated corpus file, one sentence per line
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    #[arg(long, default_value = "english")]
    language: Language,
    /// Corpus name used for default sentence ids (defaults to the file stem)
    #[arg(long)]
    name: Option<String>,
    /// Keep unknown or stray tags as text instead of rejecting the line
    #[arg(long)]
    lenient: bool,
    /// Print canonical `id<TAB>annotated line` text instead of JSON
    #[arg(long)]
    tagged: bool,
}

#[derive(Args, Debug)]
struct Inputs {
    /// Pipeline config listing the corpora
    #[arg(long, value_name = "FILE", required_unless_present = "input", conflicts_with = "input")]
    config: Option<PathBuf>,
    /// A single annotated corpus file
    #[arg(long = "in", value_name = "FILE")]
    input: Option<PathBuf>,
    #[arg(long, default_value = "english", requires = "input")]
    language: Language,
    #[arg(long, requires = "input")]
    name: Option<String>,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Print the functional-chunk distribution table instead
    #[arg(long)]
    fc: bool,
}

#[derive(Args, Debug)]
struct TestsArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Welch t-tests between every pair of corpora
    #[arg(long)]
    cross: bool,
}

#[derive(Args, Debug)]
struct PatternArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long)]
    top_k: Option<usize>,
}

#[derive(Args, Debug)]
struct ComboArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long, default_value_t = 2)]
    min_len: usize,
}

#[derive(Args, Debug)]
struct TransitionArgs {
    #[command(flatten)]
    inputs: Inputs,
    /// Print the 8×8 probability matrix instead of the ranked list
    #[arg(long)]
    matrix: bool,
    /// Also write a heatmap of the first corpus
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SemanticsArgs {
    /// Pipeline config with a [semantics] section
    #[arg(long, value_name = "FILE", required_unless_present = "embeddings", conflicts_with = "embeddings")]
    config: Option<PathBuf>,
    /// JSON-lines embedding file
    #[arg(long, value_name = "FILE")]
    embeddings: Option<PathBuf>,
    /// Tag filter (comma-separated tags) whose centroid is compared; repeatable
    #[arg(long = "subset", value_name = "TAGS")]
    subsets: Vec<String>,
    /// Write PCA coordinates to this CSV file
    #[arg(long, value_name = "FILE")]
    projection: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Output directory (overrides `output_dir` in the config)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnnotateArgs {
    /// Raw sentences, one per line; an `id<TAB>` prefix is kept as the id
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Annotated output, written as `id<TAB>annotated line`
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    #[arg(long, default_value = "english")]
    language: Language,
    #[arg(long)]
    name: Option<String>,
    /// Annotate twice and score agreement; the second run goes to `<out>.run2`
    #[arg(long)]
    dual: bool,
    /// Where to write the agreement report (default: stdout)
    #[arg(long, value_name = "FILE", requires = "dual")]
    agreement_out: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ClapKind::DisplayHelp | ClapKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Parse(a) => parse(a, out, err),
        Command::Validate(a) => validate(a, out, err),
        Command::Annotate(a) => annotate(a, out, err),
        Command::Stats(a) => stats(a, out),
        Command::Positions(a) => per_corpus(&a, out, |c, r| Ok(tables::positions_table(c, r))),
        Command::Tests(a) => tests(a, out),
        Command::Condprob(a) => per_corpus(&a, out, tables::condprob_table),
        Command::Patterns(a) => {
            let ctx = Context::load(&a.inputs)?;
            let k = a.top_k.unwrap_or(ctx.top_k_patterns);
            emit_per_corpus(&ctx, out, |c, _| Ok(tables::pattern_table(&pattern_counts(c, Some(k)), "pattern")))
        }
        Command::Combos(a) => {
            let ctx = Context::load(&a.inputs)?;
            let k = a.top_k.unwrap_or(ctx.top_k_combos);
            let min_len = a.min_len;
            emit_per_corpus(&ctx, out, |c, _| {
                Ok(tables::pattern_table(&fc_combination_counts(c, min_len, Some(k)), "combination"))
            })
        }
        Command::Transitions(a) => transitions(a, out),
        Command::Semantics(a) => semantics(a, out),
        Command::Report(a) => {
            let cfg = PipelineConfig::load(&a.config)?;
            let dir = report::run_report(&cfg, a.out.as_deref())?;
            writeln!(out, "wrote {}", dir.display()).map_err(stdout_error)
        }
    }
}

fn stdout_error(e: std::io::Error) -> CliError {
    CliError::data(format!("cannot write output: {e}"))
}

fn default_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "corpus".into(), |s| s.to_string_lossy().into_owned())
}

/// Corpora and settings for the single-table commands.
struct Context {
    corpora: Vec<Corpus>,
    rounding: Rounding,
    top_k_patterns: usize,
    top_k_combos: usize,
}

impl Context {
    fn load(inputs: &Inputs) -> Result<Self, CliError> {
        match (&inputs.config, &inputs.input) {
            (Some(config), _) => {
                let cfg = PipelineConfig::load(config)?;
                Ok(Context {
                    corpora: report::load_all(&cfg)?.into_iter().map(|l| l.corpus).collect(),
                    rounding: cfg.rounding,
                    top_k_patterns: cfg.top_k_patterns,
                    top_k_combos: cfg.top_k_combos,
                })
            }
            (None, Some(path)) => {
                let name = inputs.name.clone().unwrap_or_else(|| default_name(path));
                let (loaded, _) = load_corpus(path, &name, inputs.language, Mode::Strict)?;
                Ok(Context {
                    corpora: vec![loaded.corpus],
                    rounding: Rounding::default(),
                    top_k_patterns: 20,
                    top_k_combos: 50,
                })
            }
            (None, None) => Err(CliError::usage("either --config or --in is required")),
        }
    }
}

/// Runs `table` per corpus and prints the rows with a leading corpus column.
fn emit_per_corpus<F>(ctx: &Context, out: &mut dyn Write, table: F) -> Result<(), CliError>
where
    F: Fn(&Corpus, &Rounding) -> Result<Table, CliError>,
{
    let mut all: Option<Table> = None;
    for c in &ctx.corpora {
        let t = table(c, &ctx.rounding)?.with_leading("corpus", &c.name);
        match &mut all {
            Some(a) => a.extend(t),
            None => all = Some(t),
        }
    }
    if let Some(t) = all {
        out.write_all(&t.to_csv()).map_err(stdout_error)?;
    }
    Ok(())
}

fn per_corpus<F>(inputs: &Inputs, out: &mut dyn Write, table: F) -> Result<(), CliError>
where
    F: Fn(&Corpus, &Rounding) -> Result<Table, CliError>,
{
    emit_per_corpus(&Context::load(inputs)?, out, table)
}

fn parse_file(a: &ParseArgs) -> Result<(Corpus, Vec<chunkorder_core::Diagnostic>), CliError> {
    let bytes = fs::read(&a.input).map_err(|e| CliError::data(format!("cannot read {}: {e}", a.input.display())))?;
    let name = a.name.clone().unwrap_or_else(|| default_name(&a.input));
    let mode = if a.lenient { Mode::Lenient } else { Mode::Strict };
    parse_corpus(bytes.as_slice(), &name, a.language, mode).map_err(|e| CliError::from(e).context(a.input.display()))
}

fn parse(a: ParseArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let (corpus, diagnostics) = parse_file(&a)?;
    for d in &diagnostics {
        let _ = writeln!(err, "{}: {d}", a.input.display());
    }
    for s in corpus.sentences() {
        let line = if a.tagged {
            format!("{}\t{}", s.id, serialize_sentence(s))
        } else {
            let chunks: Vec<Value> = s
                .chunks()
                .iter()
                .map(|c| json!({"label": c.label, "text": c.text, "start": c.span.start, "end": c.span.end}))
                .collect();
            serde_json::to_string(&json!({"id": s.id, "chunks": chunks})).expect("serializable")
        };
        writeln!(out, "{line}").map_err(stdout_error)?;
    }
    Ok(())
}

/// Scans the whole file leniently so every problem is reported. In strict
/// mode any diagnostic fails validation; in lenient mode only rejected lines
/// (nested tags) do.
fn validate(a: ParseArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let scan = ParseArgs {
        lenient: true,
        input: a.input.clone(),
        name: a.name.clone(),
        ..a
    };
    let (corpus, diagnostics) = parse_file(&scan)?;
    let strict = !a.lenient;
    let mut errors = 0;
    for d in &diagnostics {
        let fatal = d.rejected || strict;
        errors += usize::from(fatal);
        let _ = writeln!(err, "{}: {}{d}", a.input.display(), if fatal { "" } else { "warning: " });
    }
    let chunks: usize = corpus.sentences().iter().map(|s| s.chunks().len()).sum();
    writeln!(
        out,
        "{}: {} sentences, {chunks} chunks, {errors} errors, {} warnings",
        a.input.display(),
        corpus.len(),
        diagnostics.len() - errors
    )
    .map_err(stdout_error)?;
    if errors > 0 {
        return Err(CliError::data(format!("{} failed validation with {errors} error(s)", a.input.display())));
    }
    Ok(())
}

fn stats(a: StatsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.fc {
        return per_corpus(&a.inputs, out, |c, r| Ok(tables::fc_distribution_table(c, r)));
    }
    let ctx = Context::load(&a.inputs)?;
    let rows: Vec<Value> = ctx
        .corpora
        .iter()
        .map(|c| tables::stats_json(c, &ctx.rounding))
        .collect::<Result<_, _>>()?;
    out.write_all(&pretty_json(&Value::Array(rows))).map_err(stdout_error)
}

fn tests(a: TestsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let ctx = Context::load(&a.inputs)?;
    if a.cross {
        if ctx.corpora.len() < 2 {
            return Err(CliError::usage("--cross needs a config with at least two corpora"));
        }
        let t = tables::cross_tests_table(&ctx.corpora, &ctx.rounding)?;
        return out.write_all(&t.to_csv()).map_err(stdout_error);
    }
    emit_per_corpus(&ctx, out, tables::tests_table)
}

fn transitions(a: TransitionArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let ctx = Context::load(&a.inputs)?;
    if let (Some(path), Some(first)) = (&a.svg, ctx.corpora.first()) {
        let m = transition_matrix(first);
        let title = format!("{}: functional chunk transitions", first.name);
        fs::write(path, svg::transition_heatmap(&title, &m, ctx.rounding.probability))
            .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
    }
    let matrix = a.matrix;
    emit_per_corpus(&ctx, out, |c, r| {
        let m = transition_matrix(c);
        Ok(if matrix {
            tables::transition_matrix_table(&m, r)
        } else {
            tables::transitions_table(&m, r)
        })
    })
}

fn semantics(a: SemanticsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (path, mut subsets, rounding) = match &a.config {
        Some(config) => {
            let cfg = PipelineConfig::load(config)?;
            let sem = cfg
                .semantics
                .clone()
                .ok_or_else(|| CliError::usage(format!("{} has no [semantics] section", config.display())))?;
            (cfg.resolve(&sem.embeddings), sem.subsets, cfg.rounding)
        }
        None => (a.embeddings.clone().expect("required by clap"), Vec::new(), Rounding::default()),
    };
    if !a.subsets.is_empty() {
        subsets = a.subsets.clone();
    }
    let set = load_embeddings(&path).map_err(|e| CliError::from(e).context(path.display()))?;
    if let Some(target) = &a.projection {
        let k = 2.min(set.len().saturating_sub(1)).max(1);
        let p = pca_project(&set, k)?;
        fs::write(target, tables::projection_table(&set, &p, &rounding).to_csv())
            .map_err(|e| CliError::data(format!("cannot write {}: {e}", target.display())))?;
    }
    if subsets.len() < 2 {
        if a.projection.is_none() {
            return Err(CliError::usage("give at least two --subset filters or --projection"));
        }
        return Ok(());
    }
    let t = tables::similarity_table(&set, &subsets, &rounding)?;
    out.write_all(&t.to_csv()).map_err(stdout_error)
}

fn write_tagged(path: &Path, corpus: &Corpus) -> Result<(), CliError> {
    let text: String = corpus
        .sentences()
        .iter()
        .map(|s| format!("{}\t{}\n", s.id, serialize_sentence(s)))
        .collect();
    fs::write(path, text).map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

/// Keeps only sentences whose id appears in both runs.
fn common_ids(a: &Corpus, b: &Corpus) -> Result<(Corpus, Corpus), CliError> {
    let ids_a: HashSet<&str> = a.sentences().iter().map(|s| s.id.as_str()).collect();
    let ids_b: HashSet<&str> = b.sentences().iter().map(|s| s.id.as_str()).collect();
    let keep = |c: &Corpus| -> Result<Corpus, CliError> {
        let sentences = c
            .sentences()
            .iter()
            .filter(|s| ids_a.contains(s.id.as_str()) && ids_b.contains(s.id.as_str()))
            .cloned()
            .collect();
        Ok(Corpus::new(c.name.clone(), c.language, sentences)?)
    };
    Ok((keep(a)?, keep(b)?))
}

fn annotate(a: AnnotateArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let cfg = PipelineConfig::load(&a.config)?;
    let mut ann = cfg
        .annotation
        .clone()
        .ok_or_else(|| CliError::usage(format!("{} has no [annotation] section", a.config.display())))?;
    ann.few_shot_path = cfg.resolve(&ann.few_shot_path);
    let few_shot = FewShotSet::load(&ann.few_shot_path)?;
    let annotator = Annotator::from_env(ann, few_shot)?;

    let text = fs::read_to_string(&a.input).map_err(|e| CliError::data(format!("cannot read {}: {e}", a.input.display())))?;
    let lines: Vec<&str> = text.lines().collect();
    let name = a.name.clone().unwrap_or_else(|| default_name(&a.input));
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::service(format!("cannot start async runtime: {e}")))?;

    let runs = if a.dual { 2 } else { 1 };
    let mut outputs = Vec::new();
    let mut failed = 0;
    for run in 1..=runs {
        let (corpus, failures) = runtime.block_on(annotator.annotate_corpus(&lines, &name, a.language))?;
        for f in &failures {
            let _ = writeln!(err, "{}: line {} ({}): {}", a.input.display(), f.line, f.id, f.error);
        }
        failed += failures.len();
        let path = if run == 1 {
            a.out.clone()
        } else {
            PathBuf::from(format!("{}.run2", a.out.display()))
        };
        write_tagged(&path, &corpus)?;
        outputs.push(corpus);
    }

    if a.dual {
        let (run_a, run_b) = common_ids(&outputs[0], &outputs[1])?;
        let report = agreement(&run_a, &run_b).map_err(|e| CliError::data(e.to_string()))?;
        let mut value = serde_json::to_value(&report).expect("serializable report");
        value["excluded_sentences"] = json!(outputs[0].len().max(outputs[1].len()) - run_a.len());
        let bytes = pretty_json(&value);
        match &a.agreement_out {
            Some(path) => fs::write(path, bytes).map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?,
            None => out.write_all(&bytes).map_err(stdout_error)?,
        }
    }
    if failed > 0 {
        return Err(CliError::service(format!("{failed} line(s) could not be annotated")));
    }
    Ok(())
}
