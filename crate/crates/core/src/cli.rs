//! Command-line front end. Results are JSON on stdout; `--pretty` adds a
//! one-line summary on stderr.
//!
//! Exit codes: 0 ran, 1 `--fail-on` matched, 2 usage error, 3 input or model error.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::compat::{no_signalling, prep_compatible, CompatReport};
use crate::incext::ExtensionFamily;
use crate::models::{self, EmpiricalModel, MeasurementModel, ModelError, PreparationModel};
use crate::quantum::{builtin_bell, builtin_pbr};
use crate::verdict::{
    check_measurement, check_preparation, Mode, PrepMode, PrepOptions, Status, Verdict, VerdictError, DEFAULT_MAX_SWEEP,
};

pub const MAX_SWEEP_ENV: &str = "CONTEXTURE_MAX_SWEEP";

#[derive(Debug, Parser)]
#[command(name = "contexture", version, about = "Exact contextuality checks for finite empirical models")]
struct Cli {
    /// Print a one-line human summary to stderr.
    #[arg(long, global = true)]
    pretty: bool,
    /// Exit with status 1 when the result matches.
    #[arg(long, global = true, value_enum, value_name = "STATUS")]
    fail_on: Option<FailOn>,
    /// Add wall-clock timing to the output.
    #[arg(long, global = true)]
    stats: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FailOn {
    Contextual,
    Incompatible,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Builtin {
    Bell,
    Pbr,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MeasModeArg {
    #[value(alias = "probabilistic")]
    Prob,
    #[value(alias = "possibilistic")]
    Poss,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PrepModeArg {
    Auto,
    #[value(alias = "probabilistic")]
    Prob,
    #[value(alias = "possibilistic")]
    Poss,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a built-in model.
    Gen {
        #[arg(value_enum)]
        which: Builtin,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check that a model file is well formed and stochastic.
    Validate { model: Option<PathBuf> },
    #[command(subcommand)]
    Check(Check),
}

#[derive(Debug, Subcommand)]
enum Check {
    /// No-signalling on every context overlap.
    Ns { model: Option<PathBuf> },
    /// Measurement contextuality.
    Measurement {
        model: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "prob")]
        mode: MeasModeArg,
    },
    /// Preparation compatibility under one extension family.
    PrepCompat {
        model: Option<PathBuf>,
        /// `uniform` or a family file.
        #[arg(long, default_value = "uniform")]
        mu: String,
    },
    /// Preparation contextuality.
    Preparation {
        model: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "auto")]
        mode: PrepModeArg,
        /// `uniform` or a family file; repeatable.
        #[arg(long)]
        mu: Vec<String>,
    },
}

enum Failure {
    Usage(String),
    Input { message: String, path: Option<String> },
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure::Input { message: message.to_string(), path: None }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Input { path: Some(e.path().to_string()), message: e.to_string() }
    }
}

impl From<VerdictError> for Failure {
    fn from(e: VerdictError) -> Self {
        match e {
            VerdictError::Model(m) => m.into(),
            VerdictError::NoFamilies => Failure::Usage(format!("{e}; pass --mu uniform or --mu <file>")),
            other => Failure::input(other),
        }
    }
}

struct Outcome {
    json: Option<Value>,
    summary: String,
    matched: Option<FailOn>,
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let start = Instant::now();
    match execute(&cli, stdin) {
        Ok(mut out) => {
            if let Some(json) = out.json.as_mut() {
                if cli.stats {
                    let ms = start.elapsed().as_secs_f64() * 1e3;
                    match json.get_mut("stats").and_then(Value::as_object_mut) {
                        Some(stats) => {
                            stats.insert("elapsed_ms".into(), json!(ms));
                        }
                        None => json["stats"] = json!({ "elapsed_ms": ms }),
                    }
                }
                let text = serde_json::to_string_pretty(json).expect("json serialises");
                if writeln!(stdout, "{text}").is_err() {
                    return 3;
                }
            }
            if cli.pretty {
                let _ = writeln!(stderr, "{}", out.summary);
            }
            match (cli.fail_on, out.matched) {
                (Some(FailOn::Contextual), Some(FailOn::Contextual))
                | (Some(FailOn::Incompatible), Some(FailOn::Incompatible)) => 1,
                _ => 0,
            }
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Input { message, path }) => {
            let err = json!({ "error": message, "path": path });
            let _ = writeln!(stderr, "{}", serde_json::to_string(&err).expect("json serialises"));
            3
        }
    }
}

fn read_input(path: Option<&Path>, stdin: &mut dyn Read) -> Result<Vec<u8>, Failure> {
    match path {
        Some(p) if p != Path::new("-") => {
            std::fs::read(p).map_err(|e| Failure::input(format!("cannot read {}: {e}", p.display())))
        }
        _ => {
            let mut buf = Vec::new();
            stdin.read_to_end(&mut buf).map_err(|e| Failure::input(format!("cannot read stdin: {e}")))?;
            Ok(buf)
        }
    }
}

fn load(path: Option<&Path>, stdin: &mut dyn Read) -> Result<EmpiricalModel, Failure> {
    let model = models::parse(&read_input(path, stdin)?)?;
    model.validate()?;
    Ok(model)
}

fn load_measurement(path: Option<&Path>, stdin: &mut dyn Read) -> Result<MeasurementModel, Failure> {
    match load(path, stdin)? {
        EmpiricalModel::Measurement(m) => Ok(m),
        EmpiricalModel::Preparation(_) => Err(Failure::input("expected a measurement model, got a preparation model")),
    }
}

fn load_preparation(path: Option<&Path>, stdin: &mut dyn Read) -> Result<PreparationModel, Failure> {
    match load(path, stdin)? {
        EmpiricalModel::Preparation(m) => Ok(m),
        EmpiricalModel::Measurement(_) => Err(Failure::input("expected a preparation model, got a measurement model")),
    }
}

fn load_family(spec: &str, model: &PreparationModel) -> Result<ExtensionFamily, Failure> {
    if spec == "uniform" {
        let s = model.scenario();
        return Ok(ExtensionFamily::uniform(s.sources(), s.instances().len()));
    }
    let bytes = std::fs::read(spec).map_err(|e| Failure::input(format!("cannot read {spec}: {e}")))?;
    let fam = ExtensionFamily::parse(&bytes).map_err(|e| Failure::input(format!("{spec}: {e}")))?;
    fam.check_against(model.scenario()).map_err(|e| Failure::input(format!("{spec}: {e}")))?;
    Ok(fam)
}

fn max_sweep() -> Result<usize, Failure> {
    match std::env::var(MAX_SWEEP_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Failure::Usage(format!("{MAX_SWEEP_ENV} must be a positive integer"))),
        Err(_) => Ok(DEFAULT_MAX_SWEEP),
    }
}

fn compat_outcome(report: &CompatReport, extra: Option<(&str, Value)>) -> Outcome {
    let compatible = report.passes();
    let mut json = json!({ "compatible": compatible, "pairs": report.to_json() });
    if let Some((k, v)) = extra {
        json[k] = v;
    }
    let summary = match report.first_violation() {
        None => format!("compatible: all {} context pairs agree", report.checks.len()),
        Some(v) => format!("INCOMPATIBLE: pair {:?} / {:?} disagrees", v.pair.0, v.pair.1),
    };
    Outcome { json: Some(json), summary, matched: (!compatible).then_some(FailOn::Incompatible) }
}

fn verdict_outcome(v: &Verdict) -> Outcome {
    let matched = match v.status {
        Status::Contextual => Some(FailOn::Contextual),
        Status::Incompatible => Some(FailOn::Incompatible),
        _ => None,
    };
    Outcome { json: Some(v.to_json()), summary: v.summary(), matched }
}

fn execute(cli: &Cli, stdin: &mut dyn Read) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Gen { which, output } => {
            let (model, name) = match which {
                Builtin::Bell => (EmpiricalModel::Measurement(builtin_bell()), "Bell"),
                Builtin::Pbr => (EmpiricalModel::Preparation(builtin_pbr()), "PBR"),
            };
            let text = models::serialize(&model);
            match output {
                Some(p) => {
                    std::fs::write(p, &text)
                        .map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display())))?;
                    Ok(Outcome { json: None, summary: format!("wrote {name} model to {}", p.display()), matched: None })
                }
                None => {
                    let json = serde_json::from_str(&text).expect("serialised model is JSON");
                    Ok(Outcome { json: Some(json), summary: format!("{name} model"), matched: None })
                }
            }
        }
        Command::Validate { model } => {
            let m = models::parse(&read_input(model.as_deref(), stdin)?)?;
            let report = m.validate()?;
            let summary =
                format!("valid {} model: {} contexts, {} columns", report.kind, report.contexts, report.columns);
            let json = serde_json::to_value(&report).expect("report serialises");
            Ok(Outcome { json: Some(json), summary, matched: None })
        }
        Command::Check(Check::Ns { model }) => {
            let m = load_measurement(model.as_deref(), stdin)?;
            let report = no_signalling(&m).map_err(Failure::input)?;
            Ok(compat_outcome(&report, None))
        }
        Command::Check(Check::Measurement { model, mode }) => {
            let m = load_measurement(model.as_deref(), stdin)?;
            let mode = match mode {
                MeasModeArg::Prob => Mode::Probabilistic,
                MeasModeArg::Poss => Mode::Possibilistic,
            };
            Ok(verdict_outcome(&check_measurement(&m, mode)?))
        }
        Command::Check(Check::PrepCompat { model, mu }) => {
            let m = load_preparation(model.as_deref(), stdin)?;
            let fam = load_family(mu, &m)?;
            let report = prep_compatible(&m, &fam).map_err(Failure::input)?;
            Ok(compat_outcome(&report, Some(("mu", fam.to_json()["mu"].clone()))))
        }
        Command::Check(Check::Preparation { model, mode, mu }) => {
            let m = load_preparation(model.as_deref(), stdin)?;
            let families = mu.iter().map(|s| load_family(s, &m)).collect::<Result<Vec<_>, _>>()?;
            let mode = match mode {
                PrepModeArg::Auto => PrepMode::Auto,
                PrepModeArg::Prob => PrepMode::Probabilistic,
                PrepModeArg::Poss => PrepMode::Possibilistic,
            };
            let options = PrepOptions { mode, families, max_sweep: max_sweep()? };
            Ok(verdict_outcome(&check_preparation(&m, &options)?))
        }
    }
}
