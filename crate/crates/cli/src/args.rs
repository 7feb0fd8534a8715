use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use crate::config::{ExperimentConfig, Format, Kind};
use crate::error::{CliError, CliResult};
use crate::run::execute;

#[derive(Debug, Parser)]
#[command(name = "cubesample", version, about = "Exact experiments on low-depth samplers over the Boolean cube")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for every random choice; 0 when neither flag nor config sets it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; never changes the report.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Report path; stdout when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Log2 bound on exhaustive enumeration.
    #[arg(long, global = true)]
    pub budget: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact total-variation distances.
    Dist(ExperimentArgs),
    /// Build the parity sampler or the majority proof system.
    Construct(ExperimentArgs),
    /// Check the image of a proof system.
    Verify(ExperimentArgs),
    /// Map a U_k sampler to a U_1 sampler.
    Reduce(ExperimentArgs),
    /// Robust sunflowers and greedy separators.
    Sunflower(ExperimentArgs),
    /// Switching networks: analysis, conversion and depth sweeps.
    Switchnet(ExperimentArgs),
    /// Search for the best small-depth sampler.
    Frontier(ExperimentArgs),
    /// Walk a forest through the U_1 lower-bound argument.
    Diagnose(ExperimentArgs),
    /// Audit locality lower bounds.
    Audit(ExperimentArgs),
    /// Run a config file of any kind.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Config file; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// One parameter as `key=value`; dotted keys nest, values parse as JSON
    /// and fall back to strings.
    #[arg(short = 'p', long = "param", value_name = "KEY=VALUE")]
    pub param: Vec<String>,
    /// All parameters as a JSON object.
    #[arg(long, value_name = "JSON")]
    pub params: Option<String>,
}

impl Command {
    fn kind(&self) -> Option<Kind> {
        Some(match self {
            Command::Dist(_) => Kind::Distance,
            Command::Construct(_) => Kind::Construct,
            Command::Verify(_) => Kind::Verify,
            Command::Reduce(_) => Kind::Reduce,
            Command::Sunflower(_) => Kind::Sunflower,
            Command::Switchnet(_) => Kind::Switchnet,
            Command::Frontier(_) => Kind::Frontier,
            Command::Diagnose(_) => Kind::Diagnostic,
            Command::Audit(_) => Kind::Audit,
            Command::Run { .. } => return None,
        })
    }
}

fn set_path(root: &mut Map<String, Value>, key: &str, value: Value) -> CliResult<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| CliError::Usage(format!("empty parameter key in {key:?}")))?;
    let mut at = root;
    for p in parts {
        let slot = at.entry(p.to_string()).or_insert_with(|| Value::Object(Map::new()));
        at = slot.as_object_mut().ok_or_else(|| CliError::Usage(format!("parameter {p:?} is not an object")))?;
    }
    at.insert(last.to_string(), value);
    Ok(())
}

fn read_json(path: &std::path::Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(Some(path), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Schema { field: None, message: format!("{}: {e}", path.display()) })
}

/// Assembles the config document from a config file, `--params` and `-p`
/// in that order of precedence (later wins), then applies global flags.
/// A config file must carry its own seed unless `--seed` is given; flag-only
/// runs default to seed 0.
pub fn build_config(cli: &Cli) -> CliResult<ExperimentConfig> {
    let (file, args) = match &cli.command {
        Command::Run { config } => (Some(config.clone()), None),
        Command::Dist(a)
        | Command::Construct(a)
        | Command::Verify(a)
        | Command::Reduce(a)
        | Command::Sunflower(a)
        | Command::Switchnet(a)
        | Command::Frontier(a)
        | Command::Diagnose(a)
        | Command::Audit(a) => (a.config.clone(), Some(a)),
    };
    let mut doc = match &file {
        Some(p) => match read_json(p)? {
            Value::Object(m) => m,
            _ => return Err(CliError::Schema { field: None, message: "config must be a JSON object".into() }),
        },
        None => Map::new(),
    };
    if let Some(kind) = cli.command.kind() {
        let named = serde_json::to_value(kind).expect("kind serializes");
        match doc.get("kind") {
            Some(k) if *k != named => {
                return Err(CliError::Usage(format!("config kind {k} does not match subcommand {}", kind.name())));
            }
            _ => {
                doc.insert("kind".into(), named);
            }
        }
    }
    if let Some(a) = args {
        let mut params = match doc.remove("parameters") {
            Some(Value::Object(m)) => m,
            Some(_) => return Err(CliError::schema("parameters", "expected an object")),
            None => Map::new(),
        };
        if let Some(text) = &a.params {
            match serde_json::from_str(text) {
                Ok(Value::Object(m)) => params.extend(m),
                Ok(_) => return Err(CliError::Usage("--params must be a JSON object".into())),
                Err(e) => return Err(CliError::Usage(format!("--params is not valid JSON: {e}"))),
            }
        }
        for kv in &a.param {
            let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Usage(format!("expected KEY=VALUE, got {kv:?}")))?;
            let value = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()));
            set_path(&mut params, k, value)?;
        }
        doc.insert("parameters".into(), Value::Object(params));
    }
    if let Some(seed) = cli.seed {
        doc.insert("seed".into(), seed.into());
    }
    if file.is_none() {
        doc.entry("seed").or_insert(0.into());
    }
    if let Some(b) = cli.budget {
        doc.insert("budget".into(), b.into());
    }
    let mut cfg = ExperimentConfig::from_json(&Value::Object(doc).to_string())?;
    if cli.output.is_some() || cli.format.is_some() {
        let out = cfg.output.get_or_insert_with(|| crate::config::OutputSpec { path: None, format: Format::Json });
        if let Some(p) = &cli.output {
            out.path = Some(p.clone());
        }
        if let Some(f) = cli.format {
            out.format = f;
        }
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> CliResult<()> {
    let cfg = build_config(cli)?;
    let report = execute(&cfg, cli.workers)?;
    let format = cfg.output.as_ref().map(|o| o.format).unwrap_or_default();
    let bytes = report.render(format)?;
    match cfg.output.as_ref().and_then(|o| o.path.as_ref()) {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| CliError::io(Some(path), e)),
        None => std::io::stdout().write_all(&bytes).map_err(|e| CliError::io(None, e)),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.record());
    ExitCode::from(e.exit_code())
}

pub fn main_with(argv: impl IntoIterator<Item = OsString>) -> ExitCode {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return fail(&CliError::Usage(e.kind().to_string()));
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ConstructParams, Parameters, Size};

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("cubesample").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn params_from_flags() {
        let c = build_config(&cli(&["construct", "-p", "what=parity", "-p", "n=8", "--seed", "4"])).unwrap();
        assert_eq!(c.parameters, Parameters::Construct(ConstructParams::Parity(Size { n: 8 })));
        assert_eq!(c.seed, 4);
        let c = build_config(&cli(&["dist", "--params", r#"{"what":"slice-union","n":4}"#, "-p", "weights=[0,1]"])).unwrap();
        assert_eq!(c.kind(), Kind::Distance);
    }

    #[test]
    fn dotted_keys_nest() {
        let c = build_config(&cli(&[
            "frontier", "-p", "m=2", "-p", "d=1", "-p", "mode=exhaustive", "-p", "target.n=2", "-p", "target.weights=[1]",
        ]))
        .unwrap();
        assert_eq!(c.kind(), Kind::Frontier);
    }

    #[test]
    fn config_kind_must_match_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"kind":"verify","parameters":{},"seed":0}"#).unwrap();
        let e = build_config(&cli(&["construct", "--config", path.to_str().unwrap()])).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
