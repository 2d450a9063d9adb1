//! The `critex` command line.
//!
//! Exit codes: 0 on success, 2 on bad input data, 64 on usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::corpus::{read_corpus, read_gold_dir, InputFormat, InputRecord};
use crate::eval::{evaluate, EvalOptions};
use crate::kb::{bundled_kb, load_kb, mine_kb_candidates, KnowledgeBase};
use crate::output::{read_documents, to_json, to_json_pretty, StructuredRecord};
use crate::pipeline::{annotate, segment, PipelineConfig};
use crate::segmentation::SplitMode;
use crate::syntax::{align_parses, read_parse_blocks, DependencyParse, ParseError};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "critex",
    version,
    about = "Structure clinical-trial free text into entity/attribute relations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extract relations from records and print one JSON document per record.
    Annotate(AnnotateArgs),
    /// Score extended predictions against a Brat gold directory.
    Evaluate(EvaluateArgs),
    /// Knowledge-base tools.
    Kb {
        #[command(subcommand)]
        command: KbCommand,
    },
    /// Show the configuration.
    Config {
        /// Print every default as JSON.
        #[arg(long)]
        show_defaults: bool,
    },
}

#[derive(Subcommand, Debug)]
enum KbCommand {
    /// Check a KB file (JSON, or TSV by extension).
    Validate { path: PathBuf },
    /// Propose KB entries from `<noun phrase> <value> <unit>` patterns.
    Mine {
        input: PathBuf,
        /// Write the candidate KB here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "paragraphs")]
        mode: ModeArg,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Lines,
    Paragraphs,
}

impl From<ModeArg> for SplitMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Lines => SplitMode::Lines,
            ModeArg::Paragraphs => SplitMode::Paragraphs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    /// Pretty-printed, one document per record.
    Json,
    /// One compact document per line.
    Jsonl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Table,
    Json,
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

#[derive(Args, Debug)]
struct AnnotateArgs {
    /// A .txt file, a directory of .txt files, or a .jsonl file of {"id","text"}.
    input: PathBuf,
    /// Knowledge base; defaults to $CRITEX_KB, then the bundled mini-KB.
    #[arg(long, env = "CRITEX_KB")]
    kb: Option<PathBuf>,
    /// Pipeline settings as JSON (see `critex config --show-defaults`).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Weight of KB compatibility against syntactic proximity.
    #[arg(long, value_parser = unit_interval)]
    theta: Option<f64>,
    /// Minimum mixed score for a relation to be kept.
    #[arg(long, value_parser = unit_interval)]
    min_score: Option<f64>,
    /// Allow entities and attributes in different sentences to link.
    #[arg(long)]
    cross_sentence: bool,
    /// Dependency parses, one block per sentence in input order.
    #[arg(long)]
    deps: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
    /// Include mentions, labels and scores (needed by `evaluate`).
    #[arg(long)]
    extended: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Directory of Brat .txt/.ann pairs.
    #[arg(long)]
    gold: PathBuf,
    /// Output of `critex annotate --extended`.
    #[arg(long)]
    pred: PathBuf,
    /// Count a relation only when its label matches too.
    #[arg(long)]
    match_labels: bool,
    #[arg(long, value_enum, default_value = "table")]
    format: ReportFormat,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure::Usage(message.into())
}

fn require_exists(path: &Path) -> Result<(), Failure> {
    if path.exists() {
        Ok(())
    } else {
        Err(usage(format!(
            "{}: no such file or directory",
            path.display()
        )))
    }
}

fn io_error(context: &Path, source: std::io::Error) -> Error {
    Error::Io {
        context: context.display().to_string(),
        source,
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{rendered}");
            return code;
        }
    };
    let result = match cli.command {
        Command::Annotate(args) => cmd_annotate(&args, stdout),
        Command::Evaluate(args) => cmd_evaluate(&args, stdout),
        Command::Kb { command } => cmd_kb(&command, stdout),
        Command::Config { show_defaults } => cmd_config(show_defaults, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_DATA
        }
    }
}

fn write_output(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_error(path, e).into()),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| io_error(Path::new("<stdout>"), e).into()),
    }
}

fn load_kb_arg(kb: Option<&Path>) -> Result<KnowledgeBase, Failure> {
    match kb {
        Some(path) => {
            require_exists(path)?;
            Ok(load_kb(path).map_err(Error::from)?)
        }
        None => Ok(bundled_kb()),
    }
}

fn pipeline_config(args: &AnnotateArgs) -> Result<PipelineConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => {
            require_exists(path)?;
            let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => PipelineConfig::default(),
    };
    if let Some(mode) = args.mode {
        config.mode = mode.into();
    }
    if let Some(theta) = args.theta {
        config.linker.theta = theta;
    }
    if let Some(min_score) = args.min_score {
        config.linker.min_score = min_score;
    }
    if args.cross_sentence {
        config.linker.same_sentence_only = false;
    }
    config.validate().map_err(usage)?;
    Ok(config)
}

/// Splits the parse file across records, in input order.
fn record_parses(
    path: &Path,
    records: &[InputRecord],
    config: &PipelineConfig,
) -> Result<Vec<Vec<DependencyParse>>, Error> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let blocks = read_parse_blocks(&text)?;
    let sentences: Vec<_> = records
        .iter()
        .map(|r| segment(&r.id, &r.text, config))
        .collect();
    let total: usize = sentences.iter().map(Vec::len).sum();
    if blocks.len() != total {
        return Err(ParseError::SentenceCount {
            expected: total,
            found: blocks.len(),
        }
        .into());
    }
    let mut out = Vec::new();
    let mut next = 0;
    for (record, s) in records.iter().zip(&sentences) {
        let refs: Vec<_> = s.iter().collect();
        let parses =
            align_parses(&blocks[next..next + s.len()], &refs).map_err(|e| Error::InRecord {
                record: record.id.clone(),
                source: Box::new(e.into()),
            })?;
        next += s.len();
        out.push(parses);
    }
    Ok(out)
}

fn cmd_annotate(args: &AnnotateArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    require_exists(&args.input)?;
    if let Some(deps) = &args.deps {
        require_exists(deps)?;
    }
    let config = pipeline_config(args)?;
    let kb = load_kb_arg(args.kb.as_deref())?;
    let records =
        read_corpus(&args.input, InputFormat::detect(&args.input)).map_err(Error::from)?;
    let parses = match &args.deps {
        Some(path) => Some(record_parses(path, &records, &config)?),
        None => None,
    };

    let render = |i: usize, r: &InputRecord| -> Result<String, Error> {
        let p = parses.as_ref().map(|p| p[i].as_slice());
        let annotated = annotate(&r.id, &r.text, &kb, &config, p).map_err(|e| Error::InRecord {
            record: r.id.clone(),
            source: Box::new(e.into()),
        })?;
        let record = StructuredRecord::from_annotated(&annotated);
        Ok(match args.format {
            OutputFormat::Json => to_json_pretty(&record, args.extended),
            OutputFormat::Jsonl => to_json(&record, args.extended),
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs as usize)
        .build()
        .map_err(|e| usage(format!("cannot start {} workers: {e}", args.jobs)))?;
    let rendered: Vec<Result<String, Error>> = pool.install(|| {
        records
            .par_iter()
            .enumerate()
            .map(|(i, r)| render(i, r))
            .collect()
    });
    let mut text = String::new();
    for doc in rendered {
        text.push_str(&doc?);
        text.push('\n');
    }
    write_output(args.out.as_deref(), &text, stdout)
}

fn cmd_evaluate(args: &EvaluateArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    require_exists(&args.gold)?;
    require_exists(&args.pred)?;
    if !args.gold.is_dir() {
        return Err(usage(format!("{} is not a directory", args.gold.display())));
    }
    let gold = read_gold_dir(&args.gold).map_err(Error::from)?;
    let text = fs::read_to_string(&args.pred).map_err(|e| io_error(&args.pred, e))?;
    let predictions = read_documents(&text).map_err(Error::from)?;
    let gold: Vec<_> = gold.into_iter().map(|g| (g.id, g.annotation)).collect();
    let report = evaluate(
        &predictions,
        &gold,
        EvalOptions {
            match_labels: args.match_labels,
        },
    )
    .map_err(Error::from)?;
    let text = match args.format {
        ReportFormat::Table => report.to_string(),
        ReportFormat::Json => serde_json::to_string_pretty(&report).map_err(Error::from)? + "\n",
    };
    write_output(None, &text, stdout)
}

fn cmd_kb(command: &KbCommand, stdout: &mut dyn Write) -> Result<(), Failure> {
    match command {
        KbCommand::Validate { path } => {
            let kb = load_kb_arg(Some(path))?;
            write_output(
                None,
                &format!("{}: ok, {} entries\n", path.display(), kb.len()),
                stdout,
            )
        }
        KbCommand::Mine { input, out, mode } => {
            require_exists(input)?;
            let config = PipelineConfig {
                mode: (*mode).into(),
                ..PipelineConfig::default()
            };
            let records = read_corpus(input, InputFormat::detect(input)).map_err(Error::from)?;
            let sentences: Vec<_> = records
                .iter()
                .flat_map(|r| segment(&r.id, &r.text, &config))
                .collect();
            let kb = KnowledgeBase::new(mine_kb_candidates(&sentences), Default::default())
                .map_err(Error::from)?;
            write_output(out.as_deref(), &(kb.to_json() + "\n"), stdout)
        }
    }
}

fn cmd_config(show_defaults: bool, stdout: &mut dyn Write) -> Result<(), Failure> {
    if !show_defaults {
        return Err(usage("nothing to do; try `critex config --show-defaults`"));
    }
    let text = serde_json::to_string_pretty(&PipelineConfig::default()).map_err(Error::from)?;
    write_output(None, &(text + "\n"), stdout)
}
