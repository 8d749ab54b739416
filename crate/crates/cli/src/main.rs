mod config;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use dxasp_core::eval::{evaluate, load_dataset, render_table, EvalOptions, EvalReport};
use dxasp_core::explain::render_tree;
use dxasp_core::ground::{GroundConfig, DEFAULT_MAX_GROUND_RULES};
use dxasp_core::lang::{
    check_fragment, normalize_symbol, parse_atom, parse_program_from, Program,
};
use dxasp_core::solve::{consequences, Mode, SolveConfig, DEFAULT_MAX_MODELS};
use dxasp_core::{diagnose, Config, Diagnosis};
use dxasp_ingest::{
    translate, FixtureClient, HttpClient, HttpConfig, KbStore, PromptTemplate, TranslateError,
    TranslationJob, TranslatorClient, DEFAULT_MAX_ATTEMPTS,
};

use config::FileConfig;

const PRECEDENCE: &str = "\
Settings are resolved as: command-line flags, then environment variables
(DXASP_LLM_URL, DXASP_LLM_MODEL, DXASP_LLM_KEY), then the config file
(--config, or ./dxasp.toml when present), then built-in defaults.

Exit codes: 0 success, 1 domain failure (parse/validation error, UNSAT,
failed translation), 2 usage error, 3 transport error.";

#[derive(Parser, Debug)]
#[command(name = "dx-asp", version, about = "Explainable diagnosis with answer set programs", after_help = PRECEDENCE)]
struct Cli {
    /// Flat key/value TOML config file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and fragment-check programs.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Compute optimal answer sets of the concatenated programs.
    Solve(SolveArgs),
    /// Justify an atom of the first optimal answer set.
    Explain(ExplainArgs),
    /// Turn medical text into a knowledge-base fragment.
    Translate(TranslateArgs),
    /// Score knowledge bases against a symptom dataset.
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
struct EngineArgs {
    /// Stop grounding beyond this many ground rules.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    max_ground_rules: Option<u64>,
    /// Optimal models to report.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    max_models: Option<u64>,
    /// Do not add `has(T) :- add(T).` for choice rules over `add/1`.
    #[arg(long)]
    no_bridge: bool,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[command(flatten)]
    engine: EngineArgs,
    /// Which consequences to report as diagnoses.
    #[arg(long, default_value = "brave")]
    mode: ModeArg,
    /// Emit machine-readable JSON.
    #[arg(long)]
    json: bool,
    /// Write the ground program to PATH.
    #[arg(long, value_name = "PATH")]
    emit_ground: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ExplainArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[command(flatten)]
    engine: EngineArgs,
    /// Atom to justify, e.g. "diagnosis(chickenpox)".
    #[arg(long)]
    goal: String,
    #[arg(long, default_value = "tree")]
    format: Format,
}

#[derive(Args, Debug)]
struct TranslateArgs {
    /// Disease name; normalized to a constant.
    #[arg(long)]
    disease: String,
    /// File with the medical text.
    #[arg(long, value_name = "PATH")]
    text: PathBuf,
    /// Directory holding `<disease>.lp` and `<disease>.responses.jsonl`.
    #[arg(long, value_name = "DIR")]
    kb_dir: Option<PathBuf>,
    /// Replay responses from a JSONL file instead of calling the endpoint.
    #[arg(long, value_name = "PATH")]
    fixture: Option<PathBuf>,
    #[arg(long, default_value = "structured")]
    template: TemplateArg,
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    max_repair_attempts: Option<u64>,
    #[arg(long, env = "DXASP_LLM_URL", hide_env_values = true)]
    url: Option<String>,
    #[arg(long, env = "DXASP_LLM_MODEL")]
    model: Option<String>,
    #[arg(long, env = "DXASP_LLM_KEY", hide_env_values = true)]
    key: Option<String>,
    /// Dot path to the reply text in the endpoint's JSON response.
    #[arg(long, value_name = "PATH")]
    response_path: Option<String>,
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    max_in_flight: Option<u64>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// A knowledge-base directory (`<disease>.lp` files) or a single `.lp` file.
    #[arg(long, value_name = "PATH")]
    kb: PathBuf,
    /// Wide-format CSV: a Disease column plus symptom columns.
    #[arg(long, value_name = "PATH")]
    data: PathBuf,
    /// Evaluate only this disease.
    #[arg(long)]
    disease: Option<String>,
    #[arg(long, default_value = "brave", conflicts_with = "both")]
    mode: ModeArg,
    /// Report brave and cautious accuracy.
    #[arg(long)]
    both: bool,
    /// Count a record correct only if the label is the sole prediction.
    #[arg(long)]
    exact: bool,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, conflicts_with = "table")]
    json: bool,
    /// Disease / Size / Accuracy table (the default).
    #[arg(long)]
    table: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Brave,
    Cautious,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Brave => Mode::Brave,
            ModeArg::Cautious => Mode::Cautious,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Tree,
    Dot,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TemplateArg {
    Naive,
    Structured,
}

enum Failure {
    Usage(String),
    Domain(anyhow::Error),
    Transport(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Transport(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let file = FileConfig::load(cli.config.as_deref()).map_err(Failure::Usage)?;
    match cli.command {
        Command::Check { files } => check(&files),
        Command::Solve(args) => solve(args, &file),
        Command::Explain(args) => explain(args, &file),
        Command::Translate(args) => translate_cmd(args, &file),
        Command::Eval(args) => eval(args, &file),
    }
}

fn engine_config(args: &EngineArgs, file: &FileConfig) -> Config {
    Config {
        ground: GroundConfig {
            max_ground_rules: args
                .max_ground_rules
                .map(|n| n as usize)
                .or(file.max_ground_rules)
                .unwrap_or(DEFAULT_MAX_GROUND_RULES),
        },
        solve: SolveConfig {
            max_models: args
                .max_models
                .map(|n| n as usize)
                .or(file.max_models)
                .unwrap_or(DEFAULT_MAX_MODELS),
            bridge: !args.no_bridge && file.bridge.unwrap_or(true),
        },
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_program(path: &Path) -> anyhow::Result<Program> {
    let name = path.display().to_string();
    parse_program_from(&read(path)?, Some(&name)).map_err(|e| anyhow!("{name}: {e}"))
}

fn load_programs(files: &[PathBuf]) -> anyhow::Result<Program> {
    let mut program = Program::new();
    for f in files {
        program.extend(&load_program(f)?);
    }
    Ok(program)
}

fn check(files: &[PathBuf]) -> Outcome {
    let mut failed = false;
    for f in files {
        match load_program(f).and_then(|p| {
            check_fragment(&p)?;
            Ok(p)
        }) {
            Ok(p) => println!("{}: ok ({} rules)", f.display(), p.len()),
            Err(e) => {
                eprintln!("{e:#}");
                failed = true;
            }
        }
    }
    if failed {
        return Err(Failure::Domain(anyhow!("validation failed")));
    }
    Ok(())
}

fn run_pipeline(files: &[PathBuf], config: &Config) -> anyhow::Result<Diagnosis> {
    Ok(diagnose(&load_programs(files)?, config)?)
}

fn unsat(d: &Diagnosis) -> Failure {
    Failure::Domain(anyhow!(
        "UNSATISFIABLE: {}",
        d.unsat_hint().unwrap_or_default()
    ))
}

fn solve(args: SolveArgs, file: &FileConfig) -> Outcome {
    let config = engine_config(&args.engine, file);
    let d = run_pipeline(&args.files, &config)?;
    if let Some(path) = &args.emit_ground {
        std::fs::write(path, d.ground.to_string())
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    let mode = Mode::from(args.mode);
    let diagnoses: Vec<String> = consequences(&d.result, mode)
        .map(|s| s.iter().map(|a| a.to_string()).collect())
        .unwrap_or_default();
    if args.json {
        let out = json!({
            "cost": d.result.optimal_cost,
            "models": d.result.models.iter().map(|m| m.rendered()).collect::<Vec<_>>(),
            "diagnoses": diagnoses,
            "mode": mode,
            "truncated": d.result.truncated,
            "stats": d.result.stats,
        });
        println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    } else if !d.result.is_unsat() {
        let mut out = String::new();
        for (i, m) in d.result.models.iter().enumerate() {
            let _ = writeln!(out, "Answer: {}\n{}", i + 1, m.rendered().join(" "));
        }
        let _ = writeln!(
            out,
            "Optimization: {}",
            d.result.optimal_cost.unwrap_or_default()
        );
        let _ = writeln!(
            out,
            "Models: {}{}",
            d.result.models.len(),
            if d.result.truncated { "+" } else { "" }
        );
        let _ = writeln!(out, "Diagnoses ({mode}): {}", diagnoses.join(" "));
        print!("{out}");
    }
    if d.result.is_unsat() {
        return Err(unsat(&d));
    }
    Ok(())
}

fn explain(args: ExplainArgs, file: &FileConfig) -> Outcome {
    let goal = parse_atom(&args.goal)
        .map_err(|e| Failure::Usage(format!("invalid --goal {:?}: {e}", args.goal)))?;
    let d = run_pipeline(&args.files, &engine_config(&args.engine, file))?;
    if d.result.is_unsat() {
        return Err(unsat(&d));
    }
    match args.format {
        Format::Dot => print!("{}", d.causal_graph().map_err(anyhow::Error::from)?.to_dot()),
        Format::Tree | Format::Json => {
            let tree = d
                .explain(&goal)
                .map_err(|e| anyhow!("{e} (not in the first optimal answer set)"))?;
            if matches!(args.format, Format::Tree) {
                print!("{}", render_tree(&tree));
            } else {
                let out = json!({ "cost": d.result.optimal_cost, "tree": tree });
                println!("{}", serde_json::to_string_pretty(&out).expect("json"));
            }
        }
    }
    Ok(())
}

fn translate_cmd(args: TranslateArgs, file: &FileConfig) -> Outcome {
    let text = read(&args.text)?;
    let template = match args.template {
        TemplateArg::Naive => PromptTemplate::naive(),
        TemplateArg::Structured => PromptTemplate::structured(),
    };
    let mut job = TranslationJob::new(&args.disease, text, template)
        .map_err(|e| Failure::Usage(format!("--disease: {e}")))?;
    let max_attempts = args
        .max_repair_attempts
        .map(|n| n as usize)
        .or(file.max_repair_attempts)
        .unwrap_or(DEFAULT_MAX_ATTEMPTS);
    let client: Box<dyn TranslatorClient> = match &args.fixture {
        Some(path) => Box::new(
            FixtureClient::from_jsonl(path).map_err(|e| Failure::Usage(e.to_string()))?,
        ),
        None => {
            let url = args.url.or(file.llm_url.clone()).ok_or_else(|| {
                Failure::Usage("no endpoint: set --url, DXASP_LLM_URL or llm_url, or use --fixture".into())
            })?;
            let model = args.model.or(file.llm_model.clone()).ok_or_else(|| {
                Failure::Usage("no model: set --model, DXASP_LLM_MODEL or llm_model".into())
            })?;
            let mut http = HttpConfig::new(url, model);
            http.api_key = args.key.or(file.llm_key.clone());
            if let Some(p) = args.response_path.or(file.response_path.clone()) {
                http.response_path = p;
            }
            if let Some(n) = args.max_in_flight.map(|n| n as usize).or(file.max_in_flight) {
                http.max_in_flight = n;
            }
            Box::new(HttpClient::new(http))
        }
    };
    let kb_dir = args
        .kb_dir
        .or(file.kb_dir.clone())
        .unwrap_or_else(|| PathBuf::from("kb"));
    let store = KbStore::new(kb_dir);
    let result = translate(client.as_ref(), &mut job, max_attempts);
    for (i, a) in job.attempts.iter().enumerate() {
        if let Some(e) = &a.error {
            eprintln!("attempt {}: rejected: {e}", i + 1);
        }
    }
    match result {
        Ok(_) => {
            let saved = store.save(&job).map_err(anyhow::Error::from)?;
            for w in &saved.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", saved.kb_path.display());
            Ok(())
        }
        Err(e) => {
            store.write_log(&job).map_err(anyhow::Error::from)?;
            match e {
                TranslateError::Transport(t) => Err(Failure::Transport(t.into())),
                other => Err(Failure::Domain(other.into())),
            }
        }
    }
}

fn eval(args: EvalArgs, file: &FileConfig) -> Outcome {
    let records = load_dataset(&args.data).map_err(anyhow::Error::from)?;
    let wanted = args
        .disease
        .as_deref()
        .map(normalize_symbol)
        .transpose()
        .map_err(|e| Failure::Usage(format!("--disease: {e}")))?;

    let mut kbs: Vec<(String, PathBuf)> = Vec::new();
    if args.kb.is_dir() {
        let labels: BTreeSet<&str> = records.iter().map(|r| r.label.as_str()).collect();
        let candidates: Vec<String> = match &wanted {
            Some(d) => vec![d.clone()],
            None => labels.iter().map(|s| s.to_string()).collect(),
        };
        for d in candidates {
            let path = args.kb.join(format!("{d}.lp"));
            if path.exists() {
                kbs.push((d, path));
            } else if wanted.is_some() {
                return Err(Failure::Domain(anyhow!("no knowledge base at {}", path.display())));
            }
        }
        if kbs.is_empty() {
            return Err(Failure::Domain(anyhow!(
                "no dataset label has a knowledge base in {}",
                args.kb.display()
            )));
        }
    } else {
        let stem = args
            .kb
            .file_stem()
            .and_then(|s| s.to_str())
            .map(normalize_symbol)
            .transpose()
            .ok()
            .flatten();
        let d = wanted
            .clone()
            .or(stem)
            .ok_or_else(|| Failure::Usage("--disease is required for this --kb file".into()))?;
        kbs.push((d, args.kb.clone()));
    }

    let modes: Vec<Mode> = if args.both {
        vec![Mode::Brave, Mode::Cautious]
    } else {
        vec![args.mode.into()]
    };
    let config = engine_config(&args.engine, file);
    let mut reports: Vec<(String, EvalReport)> = Vec::new();
    for (disease, path) in &kbs {
        let kb = load_program(path)?;
        let subset: Vec<_> = records.iter().filter(|r| &r.label == disease).cloned().collect();
        if subset.is_empty() {
            eprintln!("warning: no records labelled {disease}");
            continue;
        }
        for &mode in &modes {
            let options = EvalOptions {
                mode,
                exact: args.exact,
                config,
            };
            let report = evaluate(&kb, &subset, &options)
                .with_context(|| format!("evaluating {}", path.display()))?;
            for w in &report.warnings {
                eprintln!("warning: {}: {w}", path.display());
            }
            reports.push((disease.clone(), report));
        }
    }
    if args.json {
        let out: Vec<_> = reports
            .iter()
            .map(|(d, r)| json!({ "disease": d, "report": r }))
            .collect();
        println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    } else {
        let rows: Vec<_> = reports
            .iter()
            .flat_map(|(_, r)| r.rows.iter().map(move |row| (r.mode, row)))
            .collect();
        print!("{}", render_table(&rows));
    }
    Ok(())
}
