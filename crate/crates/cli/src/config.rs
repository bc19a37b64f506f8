//! Run configuration: a JSON document, validated up front.
//!
//! Generator indices in schedules are 1-based, matching `r_n` in the trace.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use randprod::engine::StopCriteria;
use randprod::exact::{parse_rational, rational_to_f64, ExactVector};
use randprod::io::parse_scenario_file;
use randprod::rng;
use randprod::scenarios::{self, is_random_family, Scenario, ScenarioParams, FAMILIES};
use randprod::schedule::{SchedulePolicy, WordSchedule};
use randprod::{Exponent, Vector};

use crate::CliError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Run,
    Check,
    Falsify,
    Catalog,
    Certificate,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::Run => "run",
            Mode::Check => "check",
            Mode::Falsify => "falsify",
            Mode::Catalog => "catalog",
            Mode::Certificate => "certificate",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedSchedule {
    RoundRobin,
    SeededUniform,
}

/// `"round_robin"`, `"seeded_uniform"`, `{"markov": [[..]]}` or
/// `{"scripted": [1, 2], "fallback": <schedule>}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ScheduleSpec {
    Named(NamedSchedule),
    Markov {
        markov: Vec<Vec<f64>>,
    },
    Scripted {
        scripted: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fallback: Option<Box<ScheduleSpec>>,
    },
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        ScheduleSpec::Named(NamedSchedule::RoundRobin)
    }
}

impl ScheduleSpec {
    pub fn is_stochastic(&self) -> bool {
        match self {
            ScheduleSpec::Named(n) => *n == NamedSchedule::SeededUniform,
            ScheduleSpec::Markov { .. } => true,
            ScheduleSpec::Scripted { fallback, .. } => {
                fallback.as_ref().is_some_and(|f| f.is_stochastic())
            }
        }
    }

    fn policy(&self, seed: u64) -> Result<SchedulePolicy, CliError> {
        let schedule_seed = rng::child_seed(seed, rng::SCHEDULE, 0);
        Ok(match self {
            ScheduleSpec::Named(NamedSchedule::RoundRobin) => SchedulePolicy::RoundRobin,
            ScheduleSpec::Named(NamedSchedule::SeededUniform) => SchedulePolicy::SeededUniform {
                seed: schedule_seed,
            },
            ScheduleSpec::Markov { markov } => SchedulePolicy::Markov {
                transition: markov.clone(),
                seed: schedule_seed,
            },
            ScheduleSpec::Scripted { scripted, fallback } => {
                let prefix = scripted
                    .iter()
                    .map(|&i| {
                        i.checked_sub(1).ok_or_else(|| {
                            CliError::Config("scripted indices are 1-based; found 0".into())
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let fallback = match fallback {
                    Some(f) => Some(Box::new(f.policy(seed)?)),
                    None => None,
                };
                SchedulePolicy::Scripted { prefix, fallback }
            }
        })
    }
}

/// One coordinate of a literal `x0`: a number or a string such as `"1/3"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coord {
    Number(f64),
    Text(String),
}

/// A coordinate list, `"random"` (drawn from the config seed) or
/// `"random(N)"` (drawn from seed `N`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum X0Spec {
    Literal(Vec<Coord>),
    Text(String),
}

fn random_seed(text: &str) -> Result<Option<u64>, CliError> {
    let t = text.trim();
    if t == "random" {
        return Ok(None);
    }
    t.strip_prefix("random(")
        .and_then(|r| r.strip_suffix(')'))
        .and_then(|n| n.trim().parse().ok())
        .map(Some)
        .ok_or_else(|| {
            CliError::Config(format!(
                "x0 must be a list, \"random\" or \"random(N)\"; found {text:?}"
            ))
        })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_ops: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Exponent>,
}

impl Params {
    fn is_empty(&self) -> bool {
        *self == Params::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FalsifyOptions {
    pub max_word_len: usize,
    pub budget: usize,
}

impl Default for FalsifyOptions {
    fn default() -> Self {
        Self {
            max_word_len: 4,
            budget: 200,
        }
    }
}

fn default_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Mode,
    /// A catalog family name or a path to a scenario file.
    #[serde(default)]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Params::is_empty")]
    pub params: Params,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    /// Starting vector; the scenario default when absent.
    #[serde(default)]
    pub x0: Option<X0Spec>,
    #[serde(default)]
    pub stop: StopCriteria,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Iterate in exact rational arithmetic (scenarios with exact operators).
    #[serde(default)]
    pub exact: bool,
    #[serde(default)]
    pub falsify: FalsifyOptions,
    /// Fixed-point tolerance for limit classification and condition checks.
    #[serde(default = "default_tol")]
    pub tol: f64,
}

const TOP_KEYS: [&str; 11] = [
    "mode", "scenario", "params", "schedule", "x0", "stop", "output", "seed", "exact", "falsify",
    "tol",
];
const STOP_KEYS: [&str; 5] = [
    "max_iters",
    "cauchy_tol",
    "cauchy_window",
    "stagnation_tol",
    "stride",
];
const PARAM_KEYS: [&str; 3] = ["dim", "n_ops", "p"];
const FALSIFY_KEYS: [&str; 2] = ["max_word_len", "budget"];

fn unknown_keys(obj: &Map<String, Value>, known: &[&str], prefix: &str, out: &mut Vec<String>) {
    for k in obj.keys() {
        if !known.contains(&k.as_str()) {
            out.push(format!("{prefix}{k}"));
        }
    }
}

fn check_keys(v: &Value) -> Result<(), CliError> {
    let obj = v
        .as_object()
        .ok_or_else(|| CliError::Config("config must be a JSON object".into()))?;
    let mut bad = Vec::new();
    unknown_keys(obj, &TOP_KEYS, "", &mut bad);
    for (key, known) in [
        ("stop", &STOP_KEYS[..]),
        ("params", &PARAM_KEYS[..]),
        ("falsify", &FALSIFY_KEYS[..]),
    ] {
        if let Some(Value::Object(inner)) = obj.get(key) {
            unknown_keys(inner, known, &format!("{key}."), &mut bad);
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "unknown keys: {}",
            bad.join(", ")
        )))
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
    config_from_value(v)
}

pub fn config_from_value(v: Value) -> Result<RunConfig, CliError> {
    check_keys(&v)?;
    let c: RunConfig =
        serde_json::from_value(v).map_err(|e| CliError::Config(format!("config: {e}")))?;
    c.validate()?;
    Ok(c)
}

/// Scenario, schedule and start vector, ready to run.
pub struct Resolved {
    pub scenario: Scenario,
    pub schedule: WordSchedule,
    pub x0: Vector,
    /// Exact start vector when `x0` was given literally or by default.
    pub exact_x0: Option<ExactVector>,
}

impl RunConfig {
    /// Seed for anything random; only defaulted where no randomness is used.
    pub fn seed_or_zero(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn needs_seed(&self) -> Option<&'static str> {
        if self.schedule.is_stochastic() && self.mode == Mode::Run {
            return Some("a stochastic schedule");
        }
        if let Some(name) = &self.scenario {
            if is_random_family(name) {
                return Some("a random scenario family");
            }
        }
        if let Some(X0Spec::Text(t)) = &self.x0 {
            if t.trim() == "random" {
                return Some("x0 = \"random\"");
            }
        }
        if self.mode == Mode::Falsify {
            return Some("falsify mode");
        }
        None
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.seed.is_none() {
            if let Some(why) = self.needs_seed() {
                return Err(CliError::Config(format!("seed is required for {why}")));
            }
        }
        self.stop.validate()?;
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Config("tol must be positive".into()));
        }
        if self.falsify.max_word_len == 0 || self.falsify.budget == 0 {
            return Err(CliError::Config(
                "falsify.max_word_len and falsify.budget must be at least 1".into(),
            ));
        }
        if self.mode == Mode::Catalog {
            return Ok(());
        }
        let r = self.resolve()?;
        if self.exact && r.scenario.exact_ops.is_none() {
            return Err(CliError::Config(format!(
                "scenario {} has no exact operators",
                r.scenario.label
            )));
        }
        if self.exact && r.exact_x0.is_none() {
            return Err(CliError::Config("exact mode needs a literal x0".into()));
        }
        Ok(())
    }

    fn load_scenario(&self) -> Result<Scenario, CliError> {
        let name = self
            .scenario
            .as_deref()
            .ok_or_else(|| CliError::Config(format!("mode {} needs a scenario", self.mode)))?;
        if FAMILIES.contains(&name) {
            let params = ScenarioParams {
                dim: self.params.dim,
                n_ops: self.params.n_ops,
                p: self.params.p,
            };
            return Ok(scenarios::build(name, params, self.seed_or_zero())?);
        }
        let path = Path::new(name);
        if !path.is_file() {
            return Err(CliError::Config(format!(
                "unknown scenario {name:?}: not a catalog family ({}) and not a file",
                FAMILIES.join(", ")
            )));
        }
        if !self.params.is_empty() {
            return Err(CliError::Config(
                "params apply only to catalog families".into(),
            ));
        }
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Ok(parse_scenario_file(&text)?)
    }

    /// Builds the scenario, schedule and start vector this config names.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let scenario = self.load_scenario()?;
        let n = scenario.n_ops();
        let dim = scenario.space.dim();
        let policy = self.schedule.policy(self.seed_or_zero())?;
        let schedule = WordSchedule::new(policy, n)?;
        let (x0, exact_x0) = match &self.x0 {
            None => {
                let e = ExactVector::from_vector(&scenario.default_x0).ok();
                (scenario.default_x0.clone(), e)
            }
            Some(X0Spec::Literal(coords)) => {
                if coords.len() != dim {
                    return Err(CliError::Config(format!(
                        "x0 has {} coordinates but the scenario has dimension {dim}",
                        coords.len()
                    )));
                }
                let exact = coords
                    .iter()
                    .map(|c| match c {
                        Coord::Number(v) => randprod::exact::rational_from_f64(*v),
                        Coord::Text(t) => parse_rational(t),
                    })
                    .collect::<randprod::Result<Vec<_>>>()?;
                let v = Vector::new(exact.iter().map(rational_to_f64).collect())?;
                (v, Some(ExactVector::new(exact)?))
            }
            Some(X0Spec::Text(t)) => {
                let s = random_seed(t)?.unwrap_or(self.seed_or_zero());
                let mut r = rng::stream(s, rng::START_VECTOR);
                (Vector::new(rng::gaussian_vec(&mut r, dim))?, None)
            }
        };
        Ok(Resolved {
            scenario,
            schedule,
            x0,
            exact_x0,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
