//! Command-line front end.
//!
//! Exit codes: 0 success or a selected method, 1 no method found, 2 usage,
//! validation or missing input, 3 failure writing output, 4 backend
//! failure, 5 unparseable input or response.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::Error;
use crate::eval::{
    run_experiment, welch_t, ExperimentConfig, ExperimentRun, Materials, Report, ReportRow, ScoreSeries, Segments,
    Study, SummaryTable,
};
use crate::features::{Encoder, HashingEncoder, DEFAULT_DIM};
use crate::gateway::{Gateway, HttpBackend, RecordedBackend, ScriptedBackend, TemplateSet, TranscriptStore};
use crate::method_store::{separate_pairs, MethodLibrary};
use crate::mom::escalate;
use crate::reuse::{Query, ReuseConfig, ReuseEngine, SearchMode, Taxonomy};
use crate::similarity::SimilarityWeights;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NONE_FOUND: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_WRITE: i32 = 3;
pub const EXIT_BACKEND: i32 = 4;
pub const EXIT_PARSE: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "reuse-forge", version, about = "Cross-question method reuse toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Separate a text into question/solution pairs and append them to a library.
    ExtractPairs {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        library: PathBuf,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Find a stored method whose solution carries over to a new question.
    Query {
        #[arg(long)]
        question: String,
        /// Comma-separated scope labels of the question.
        #[arg(long, value_delimiter = ',')]
        scope: Vec<String>,
        /// Superset category, `label=member,member`; repeatable.
        #[arg(long = "superset")]
        supersets: Vec<String>,
        #[arg(long)]
        library: PathBuf,
        /// Method depth to search.
        #[arg(long, default_value_t = 0)]
        depth: u32,
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Validate or refine a stored method with a method of the next depth.
    Mom {
        /// Id of the method under review.
        #[arg(long)]
        method: String,
        #[arg(long)]
        library: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Statistics and experiments.
    Eval {
        #[command(subcommand)]
        command: EvalCommand,
    },
    /// Print the method-pair comparison table.
    Report(ReportArgs),
}

#[derive(Debug, Subcommand)]
enum EvalCommand {
    /// Welch's t-test between two score CSV files.
    Ttest {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Run both arms of a study and write their score series.
    Run {
        #[arg(long)]
        experiment: String,
        #[arg(long, default_value_t = 20)]
        rounds: usize,
        #[arg(long)]
        out_dir: PathBuf,
        /// Corpus directory replacing the built-in materials.
        #[arg(long)]
        materials: Option<PathBuf>,
        /// JSON file of manual scoring segments.
        #[arg(long)]
        segments: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_DIM)]
        dim: usize,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Same as the top-level `report`.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Summary tables or run records written by `eval run`.
    #[arg(long, num_args = 1.., required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Both)]
    format: ReportFormat,
    #[arg(long, default_value_t = DEFAULT_DIM)]
    dim: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFormat {
    Table,
    Json,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendKind {
    Recorded,
    Scripted,
    Http,
}

#[derive(Debug, Args)]
struct BackendArgs {
    #[arg(long, value_enum, default_value_t = BackendKind::Recorded)]
    backend: BackendKind,
    /// Transcript file for the recorded backend.
    #[arg(long)]
    transcripts: Option<PathBuf>,
    /// JSON array of responses for the scripted backend.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Directory of prompt templates overriding the built-in ones.
    #[arg(long)]
    templates: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    #[arg(long, default_value_t = 0.6)]
    tau: f64,
    #[arg(long, default_value_t = 0.05)]
    delta_tau: f64,
    #[arg(long, default_value_t = 0.2)]
    tau_min: f64,
    #[arg(long, default_value_t = 0.5)]
    tau_meta: f64,
    #[arg(long, default_value_t = 10)]
    budget: usize,
    #[arg(long, default_value = "relative")]
    mode: String,
    #[arg(long, default_value_t = DEFAULT_DIM)]
    dim: usize,
    /// Symbolic, embedding and measurable weights.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.4, 0.4, 0.2])]
    weights: Vec<f64>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl fmt::Display) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }
}

/// Exit code for a library error met while reading inputs or running.
fn code_for(err: &Error) -> i32 {
    match err {
        e if e.is_backend() => EXIT_BACKEND,
        Error::Parse { .. } | Error::UnparseableResponse | Error::UnparseableVerdict(_) => EXIT_PARSE,
        _ => EXIT_USAGE,
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure::new(code_for(&err), err)
    }
}

fn write_failure(err: Error) -> Failure {
    match err {
        e @ Error::Io { .. } => Failure::new(EXIT_WRITE, e),
        e => e.into(),
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::ExtractPairs {
            input,
            library,
            backend,
        } => extract_pairs(&input, &library, &backend),
        Command::Query {
            question,
            scope,
            supersets,
            library,
            depth,
            config,
            backend,
        } => query(&question, scope, &supersets, &library, depth, &config, &backend),
        Command::Mom {
            method,
            library,
            config,
            backend,
        } => mom(&method, &library, &config, &backend),
        Command::Eval { command } => match command {
            EvalCommand::Ttest { a, b } => ttest(&a, &b),
            EvalCommand::Run {
                experiment,
                rounds,
                out_dir,
                materials,
                segments,
                dim,
                backend,
            } => eval_run(
                &experiment,
                rounds,
                &out_dir,
                materials.as_deref(),
                segments.as_deref(),
                dim,
                &backend,
            ),
            EvalCommand::Report(args) => report(&args),
        },
        Command::Report(args) => report(&args),
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_json(value: &impl serde::Serialize) {
    emit(&(serde_json::to_string_pretty(value).expect("output serializes") + "\n"));
}

fn require_file(path: &Path, what: &str) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_USAGE,
            format!("{what} not found: {}", path.display()),
        ))
    }
}

fn gateway(args: &BackendArgs) -> Result<Gateway, Failure> {
    let templates = match &args.templates {
        Some(dir) => TemplateSet::from_dir(dir)?,
        None => TemplateSet::builtin(),
    };
    Ok(match args.backend {
        BackendKind::Recorded => {
            let path = args
                .transcripts
                .as_deref()
                .ok_or_else(|| Failure::new(EXIT_USAGE, "--transcripts is required with the recorded backend"))?;
            require_file(path, "transcripts file")?;
            Gateway::with_templates(templates, RecordedBackend::new(TranscriptStore::load(path)?))
        }
        BackendKind::Scripted => {
            let path = args
                .script
                .as_deref()
                .ok_or_else(|| Failure::new(EXIT_USAGE, "--script is required with the scripted backend"))?;
            require_file(path, "script file")?;
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let responses: Vec<String> = serde_json::from_str(&text).map_err(|e| Error::Parse {
                line: e.line(),
                message: format!("{}: expected a JSON array of strings ({e})", path.display()),
            })?;
            Gateway::with_templates(templates, ScriptedBackend::new(responses))
        }
        BackendKind::Http => Gateway::with_templates(templates, HttpBackend::from_env()?),
    })
}

fn encoder(dim: usize) -> Result<Arc<dyn Encoder>, Failure> {
    Ok(Arc::new(HashingEncoder::new(dim)?))
}

fn reuse_config(args: &ConfigArgs) -> Result<ReuseConfig, Failure> {
    let [symbolic, embedding, measurable] = args.weights[..] else {
        return Err(Failure::new(EXIT_USAGE, "--weights takes exactly three values"));
    };
    let config = ReuseConfig {
        mode: args.mode.parse::<SearchMode>()?,
        tau: args.tau,
        delta_tau: args.delta_tau,
        tau_min: args.tau_min,
        budget: args.budget,
        tau_meta: args.tau_meta,
        weights: SimilarityWeights::new(symbolic, embedding, measurable)?,
    };
    config.validate()?;
    Ok(config)
}

fn parse_supersets(raw: &[String]) -> Result<Taxonomy, Failure> {
    let mut taxonomy = Taxonomy::new();
    for item in raw {
        let (label, members) = item
            .split_once('=')
            .ok_or_else(|| Failure::new(EXIT_USAGE, format!("--superset expects label=a,b (got {item:?})")))?;
        let members: std::collections::BTreeSet<String> = members
            .split(',')
            .map(str::trim)
            .filter(|m| !m.is_empty())
            .map(String::from)
            .collect();
        if label.trim().is_empty() || members.is_empty() {
            return Err(Failure::new(
                EXIT_USAGE,
                format!("--superset expects label=a,b (got {item:?})"),
            ));
        }
        taxonomy.entry(label.trim().to_string()).or_default().extend(members);
    }
    Ok(taxonomy)
}

fn load_library(path: &Path) -> Result<MethodLibrary, Failure> {
    require_file(path, "library file")?;
    Ok(MethodLibrary::load(path)?)
}

fn extract_pairs(input: &Path, library_path: &Path, backend: &BackendArgs) -> Outcome {
    require_file(input, "input file")?;
    let text = std::fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
    let mut library = if library_path.exists() {
        load_library(library_path)?
    } else {
        MethodLibrary::new()
    };
    let gw = gateway(backend)?;
    let methods = separate_pairs(&text, &gw)?;
    let extracted = methods.len();
    let mut added = 0;
    for method in methods {
        if !library.contains(&method.id) {
            library.add(method)?;
            added += 1;
        }
    }
    library.save(library_path).map_err(write_failure)?;
    emit(&format!("extracted {extracted} pairs ({added} new)\n"));
    Ok(EXIT_OK)
}

fn query(
    question: &str,
    scope: Vec<String>,
    supersets: &[String],
    library_path: &Path,
    depth: u32,
    config: &ConfigArgs,
    backend: &BackendArgs,
) -> Outcome {
    let reuse = reuse_config(config)?;
    let taxonomy = parse_supersets(supersets)?;
    let enc = encoder(config.dim)?;
    let library = load_library(library_path)?;
    let gw = gateway(backend)?;
    let engine = ReuseEngine::new(&gw, reuse)?.with_encoder(enc).with_taxonomy(taxonomy);
    let scope: Vec<String> = scope
        .into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    let outcome = engine.solve_at_depth(&Query::new(question).with_scope(scope), &library, depth)?;
    print_json(&outcome);
    Ok(if outcome.is_selected() {
        EXIT_OK
    } else {
        EXIT_NONE_FOUND
    })
}

fn mom(method_id: &str, library_path: &Path, config: &ConfigArgs, backend: &BackendArgs) -> Outcome {
    let reuse = reuse_config(config)?;
    let enc = encoder(config.dim)?;
    let library = load_library(library_path)?;
    let failed = library.get(method_id).ok_or_else(|| {
        Failure::new(
            EXIT_USAGE,
            format!("no method `{method_id}` in {}", library_path.display()),
        )
    })?;
    let gw = gateway(backend)?;
    let engine = ReuseEngine::new(&gw, reuse)?.with_encoder(enc);
    let outcome = escalate(failed, &library, &engine)?;
    print_json(&outcome);
    Ok(if outcome.applied_mom.is_some() {
        EXIT_OK
    } else {
        EXIT_NONE_FOUND
    })
}

fn load_series(path: &Path) -> Result<ScoreSeries, Failure> {
    require_file(path, "score file")?;
    Ok(ScoreSeries::load(path)?)
}

fn ttest(a: &Path, b: &Path) -> Outcome {
    let result = welch_t(&load_series(a)?, &load_series(b)?)?;
    print_json(&result);
    Ok(EXIT_OK)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, Failure> {
    require_file(path, what)?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::Parse {
            line: e.line(),
            message: format!("{}: {e}", path.display()),
        }
        .into()
    })
}

fn arm_summary(series: &ScoreSeries) -> serde_json::Value {
    let summary = crate::eval::summarize(&series.scores).ok();
    json!({
        "label": series.label,
        "rounds": series.rounds(),
        "mean": series.mean(),
        "sd": summary.map(|s| s.sd),
    })
}

fn eval_run(
    experiment: &str,
    rounds: usize,
    out_dir: &Path,
    materials: Option<&Path>,
    segments: Option<&Path>,
    dim: usize,
    backend: &BackendArgs,
) -> Outcome {
    let study: Study = experiment.parse()?;
    if rounds == 0 {
        return Err(Failure::new(EXIT_USAGE, "--rounds must be at least 1"));
    }
    let materials = match materials {
        Some(dir) => Materials::from_dir(study, dir)?,
        None => Materials::builtin(study),
    };
    let segments: Segments = match segments {
        Some(path) => read_json(path, "segments file")?,
        None => Segments::new(),
    };
    let config = ExperimentConfig {
        encoder: encoder(dim)?,
        segments,
    };
    let gw = gateway(backend)?;
    let run = run_experiment(study, rounds, &materials, &gw, &config)?;

    std::fs::create_dir_all(out_dir).map_err(|e| Failure::new(EXIT_WRITE, Error::io(out_dir, e)))?;
    let treated_csv = out_dir.join(format!("{}_treated.csv", study.name()));
    let control_csv = out_dir.join(format!("{}_control.csv", study.name()));
    let run_json = out_dir.join(format!("{}_run.json", study.name()));
    run.treated.series.save(&treated_csv).map_err(write_failure)?;
    run.control.series.save(&control_csv).map_err(write_failure)?;
    let record = serde_json::to_string_pretty(&run).expect("run serializes") + "\n";
    std::fs::write(&run_json, record).map_err(|e| Failure::new(EXIT_WRITE, Error::io(&run_json, e)))?;

    let test = welch_t(&run.treated.series, &run.control.series).ok();
    print_json(&json!({
        "experiment": study.name(),
        "rounds": rounds,
        "treated": arm_summary(&run.treated.series),
        "control": arm_summary(&run.control.series),
        "test": test,
        "files": [treated_csv, control_csv, run_json],
    }));
    Ok(EXIT_OK)
}

fn report(args: &ReportArgs) -> Outcome {
    let enc = encoder(args.dim)?;
    let mut rows = Vec::new();
    for path in &args.inputs {
        let value: serde_json::Value = read_json(path, "report input")?;
        let parse = |e: serde_json::Error| -> Failure {
            Error::Parse {
                line: 0,
                message: format!("{}: {e}", path.display()),
            }
            .into()
        };
        if value.get("rows").is_some() {
            let table: SummaryTable = serde_json::from_value(value).map_err(parse)?;
            rows.extend(Report::from_summary(&table)?.rows);
        } else if value.get("study").is_some() {
            let run: ExperimentRun = serde_json::from_value(value).map_err(parse)?;
            rows.push(ReportRow::from_run(&run, enc.as_ref())?);
        } else {
            return Err(Failure::new(
                EXIT_PARSE,
                format!("{}: neither a summary table nor a run record", path.display()),
            ));
        }
    }
    let report = Report { rows };
    match args.format {
        ReportFormat::Table => emit(&report.render_table()),
        ReportFormat::Json => emit(&(report.to_json() + "\n")),
        ReportFormat::Both => emit(&format!("{}\n{}\n", report.render_table(), report.to_json())),
    }
    Ok(EXIT_OK)
}
