//! `asrefine`: refinement checking of action-system mutants.

mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use asrefine_core::campaign::{check_one, generate_inputs, run_batch, CheckConfig, Engine, MutantInput};
use asrefine_core::fixture::Fixture;
use asrefine_core::model::{check_normal_form, parse_model, Model};
use asrefine_core::mutation::{enumerate_mutants, MutantSpec, Operator};
use asrefine_core::refinement::build_nonrefinement_constraint;
use asrefine_core::semantics::{translate_system, StepVarSpace};

const EXIT_INPUT: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "asrefine", version, about = "Symbolic refinement checker for action-system mutants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one mutant against the original.
    Check {
        original: PathBuf,
        mutant: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Print the step formulas and non-refinement constraints to stderr.
        #[arg(long)]
        dump_formulas: bool,
    },
    /// Check every mutant of a model.
    Batch {
        original: PathBuf,
        /// Directory of mutant files, with an optional manifest.json.
        /// Mutants are generated when omitted.
        #[arg(long)]
        mutants: Option<PathBuf>,
        #[command(flatten)]
        ops: OpsArg,
        #[command(flatten)]
        run: RunArgs,
        /// Worker threads; defaults to the number of cores.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: Option<u64>,
        /// Write the report here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Write every mutant of a model plus manifest.json into a directory.
    Mutate {
        model: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[command(flatten)]
        ops: OpsArg,
    },
    /// Write a shipped CAS model.
    Fixture {
        #[arg(value_parser = parse_fixture)]
        name: Fixture,
        /// Output file; stdout when omitted.
        out: Option<PathBuf>,
    },
    /// Parse a model and report normal-form violations.
    Lint { model: PathBuf },
}

#[derive(Args)]
struct OpsArg {
    /// Mutation operators to apply.
    #[arg(long, value_delimiter = ',', default_value = "guard_true,comp_invert,int_inc")]
    ops: Vec<Operator>,
}

#[derive(Args)]
struct RunArgs {
    /// Maximum trace length explored from the initial state.
    #[arg(long, default_value_t = 20)]
    max_depth: usize,
    /// Wall-clock limit per mutant, in seconds.
    #[arg(long, value_parser = parse_timeout)]
    timeout: Option<Duration>,
    /// Search-node limit per solver call.
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    node_budget: u64,
    #[arg(long, default_value = "symbolic", value_parser = parse_engine)]
    engine: Engine,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl RunArgs {
    fn config(&self) -> CheckConfig {
        let mut cfg =
            CheckConfig { max_depth: self.max_depth, node_budget: self.node_budget, engine: self.engine, ..Default::default() };
        if let Some(t) = self.timeout {
            cfg.mutant_timeout = Some(t);
            cfg.solve_timeout = cfg.solve_timeout.min(t);
        }
        cfg
    }
}

fn parse_timeout(s: &str) -> Result<Duration, String> {
    let secs: f64 = s.parse().map_err(|_| format!("`{s}` is not a number of seconds"))?;
    if !(secs > 0.0 && secs.is_finite()) {
        return Err("timeout must be positive".into());
    }
    Ok(Duration::from_secs_f64(secs))
}

fn parse_engine(s: &str) -> Result<Engine, String> {
    s.parse()
}

fn parse_fixture(s: &str) -> Result<Fixture, String> {
    s.parse()
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    schema_version: u32,
    original: String,
    mutants: Vec<ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    id: usize,
    file: String,
    spec: MutantSpec,
}

/// A failure that maps to the input-error exit code.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn load_model(path: &Path) -> Result<Model, InputError> {
    let display = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| InputError(format!("{display}: error: {e}")))?;
    parse_model(&text).map_err(|e| InputError(e.render(&display)))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            if let Some(input) = e.downcast_ref::<InputError>() {
                eprintln!("{input}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Check { original, mutant, run, dump_formulas } => {
            let orig = load_model(&original)?;
            let mutant_model = load_model(&mutant)?;
            validate_pair(&orig, &mutant_model, &mutant)?;
            if dump_formulas {
                dump(&orig, &mutant_model)?;
            }
            let input = MutantInput {
                id: 0,
                file: Some(mutant.display().to_string()),
                spec: None,
                model: Ok(mutant_model),
            };
            let report = check_one(&orig, &input, &run.config());
            emit(&output::mutant(&report, run.format)?)?;
            Ok(report.verdict.exit_code() as u8)
        }
        Command::Batch { original, mutants, ops, run, jobs, output } => {
            let orig = load_model(&original)?;
            let inputs = match mutants {
                Some(dir) => load_mutant_dir(&dir)?,
                None => generate_inputs(&orig, &ops.ops),
            };
            let jobs = jobs.map_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()), |j| j as usize);
            let name = original.display().to_string();
            let report = run_batch(&name, &orig, &inputs, &run.config(), jobs);
            let text = output::batch(&report, run.format)?;
            match output {
                Some(path) => fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => emit(&text)?,
            }
            Ok(0)
        }
        Command::Mutate { model, out, ops } => {
            let orig = load_model(&model)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let stem = model.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
            let mut manifest = Manifest { schema_version: 1, original: model.display().to_string(), mutants: Vec::new() };
            for (i, m) in enumerate_mutants(&orig, &ops.ops).into_iter().enumerate() {
                let id = i + 1;
                let file = format!("{stem}.mut{id:03}.as");
                let text = format!("% mutant {id}: {}\n{}", m.spec, m.model);
                fs::write(out.join(&file), text).with_context(|| format!("writing {file}"))?;
                manifest.mutants.push(ManifestEntry { id, file, spec: m.spec });
            }
            fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
            eprintln!("wrote {} mutants to {}", manifest.mutants.len(), out.display());
            Ok(0)
        }
        Command::Fixture { name, out } => {
            let src = name.source();
            match out {
                Some(path) => fs::write(&path, src).with_context(|| format!("writing {}", path.display()))?,
                None => emit(&src)?,
            }
            Ok(0)
        }
        Command::Lint { model } => {
            let m = load_model(&model)?;
            let diags = check_normal_form(&m);
            let name = model.display().to_string();
            for d in &diags {
                eprintln!("{}", d.render(&name));
            }
            Ok(if diags.is_empty() { 0 } else { EXIT_INPUT })
        }
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

/// Mutants listed in `manifest.json`, or every `.as` file in name order.
fn load_mutant_dir(dir: &Path) -> anyhow::Result<Vec<MutantInput>> {
    if !dir.is_dir() {
        bail!(InputError(format!("{}: error: not a directory", dir.display())));
    }
    let load = |file: &str| {
        let path = dir.join(file);
        load_model(&path).map_err(|e| e.0)
    };
    let manifest_path = dir.join("manifest.json");
    if manifest_path.exists() {
        let manifest: Manifest = serde_json::from_str(&fs::read_to_string(&manifest_path)?)
            .map_err(|e| InputError(format!("{}: error: {e}", manifest_path.display())))?;
        return Ok(manifest
            .mutants
            .into_iter()
            .map(|e| MutantInput { id: e.id, model: load(&e.file), file: Some(e.file), spec: Some(e.spec) })
            .collect());
    }
    let mut files: Vec<String> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".as"))
        .collect();
    files.sort();
    Ok(files
        .into_iter()
        .enumerate()
        .map(|(i, f)| MutantInput { id: i + 1, model: load(&f), file: Some(f), spec: None })
        .collect())
}

/// Rejects pairs the checker cannot translate.
fn validate_pair(orig: &Model, mutant: &Model, mutant_path: &Path) -> Result<(), InputError> {
    let fail = |e: asrefine_core::semantics::SemanticsError| InputError(format!("{}: error: {e}", mutant_path.display()));
    let space = StepVarSpace::for_pair(orig, mutant).map_err(fail)?;
    translate_system(orig, &space).map_err(fail)?;
    translate_system(mutant, &space).map_err(fail)?;
    Ok(())
}

fn dump(orig: &Model, mutant: &Model) -> anyhow::Result<()> {
    let space = StepVarSpace::for_pair(orig, mutant)?;
    eprintln!("; variables");
    for v in 0..space.num_vars() {
        let (lo, hi) = space.domains()[v];
        eprintln!(";   {} in {lo}..{hi}", space.var_name(v));
    }
    for (code, label) in space.labels.iter().enumerate() {
        eprintln!(";   label {code} = {label}");
    }
    eprintln!("; original system\n{}", space.dump(&translate_system(orig, &space)?));
    for (i, a) in mutant.system_actions() {
        let c = build_nonrefinement_constraint(orig, a, i, &space)?;
        eprintln!("; non-refinement constraint for `{}`\n{}", a.label, space.dump(&c.formula));
    }
    Ok(())
}
