use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::{Map, Value};

use randprod::scenarios::FAMILIES;
use randprod_cli::config::{config_from_value, Mode};
use randprod_cli::run::{run_cli, EXIT_ERROR};
use randprod_cli::CliError;

/// Random products of linear contractions on l_p spaces.
#[derive(Parser)]
#[command(name = "randprod", version)]
struct Args {
    /// Mode; overrides `mode` in the config.
    mode: Option<Mode>,
    /// Config file, or `-` for standard input.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config and RANDPROD_OUTPUT_DIR).
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Catalog family name or scenario file.
    #[arg(long)]
    scenario: Option<String>,
    /// Iterate in exact rational arithmetic.
    #[arg(long)]
    exact: bool,
}

fn load(args: &Args) -> Result<Value, CliError> {
    let text = match &args.config {
        None => return Ok(Value::Object(Map::new())),
        Some(p) if p.as_os_str() == "-" => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Io {
                    path: p.clone(),
                    source: e,
                })?;
            s
        }
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Io {
            path: p.clone(),
            source: e,
        })?,
    };
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config: {e}")))
}

fn merged(args: &Args) -> Result<Value, CliError> {
    let mut v = load(args)?;
    let obj = v
        .as_object_mut()
        .ok_or_else(|| CliError::Config("config must be a JSON object".into()))?;
    // scenario files named in a config file are relative to that file
    if let (Some(cfg), Some(Value::String(s))) = (&args.config, obj.get_mut("scenario")) {
        let base = cfg.parent().filter(|_| cfg.as_os_str() != "-");
        if let Some(base) = base {
            if !FAMILIES.contains(&s.as_str()) && Path::new(s.as_str()).is_relative() {
                *s = base.join(&*s).display().to_string();
            }
        }
    }
    if let Some(m) = args.mode {
        obj.insert("mode".into(), Value::String(m.to_string()));
    }
    if let Some(o) = &args.output {
        obj.insert("output".into(), Value::String(o.display().to_string()));
    }
    if let Some(s) = args.seed {
        obj.insert("seed".into(), Value::from(s));
    }
    if let Some(s) = &args.scenario {
        obj.insert("scenario".into(), Value::String(s.clone()));
    }
    if args.exact {
        obj.insert("exact".into(), Value::Bool(true));
    }
    Ok(v)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match merged(&args).and_then(config_from_value) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_ERROR as u8);
        }
    };
    ExitCode::from(run_cli(&config) as u8)
}
