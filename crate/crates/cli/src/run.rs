use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use randprod::conditions::{
    adjoint_support_invariance, check_w_prime_seeded, semigroup_w_falsifier, SupportInvariance,
    WVerdict,
};
use randprod::engine::{iterate, Trace};
use randprod::exact::{iterate_exact, ExactVector};
use randprod::io::{trace_csv_string, Summary};
use randprod::operator::{
    common_fixed_space, is_contraction, ContractionVerdict, NormBracket, CONTRACTION_TOL,
    DEFAULT_KERNEL_TOL,
};
use randprod::scenarios::{self, commuting_projection_certificate, FAMILIES};
use randprod::{NormSpec, Vector};

use crate::config::{Mode, RunConfig};
use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUTPUT_ENV: &str = "RANDPROD_OUTPUT_DIR";
pub const DEFAULT_OUTPUT: &str = "randprod-out";

/// Monotonicity breaches above this exit with code 2.
pub const AUDIT_TOL: f64 = 1e-12;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_AUDIT: i32 = 2;

/// Output directory: the config value (which flags overwrite), then
/// `RANDPROD_OUTPUT_DIR`, then `randprod-out`.
pub fn output_dir(config: &RunConfig) -> PathBuf {
    config
        .output
        .clone()
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT))
}

/// What a mode produced.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    /// JSON report printed on standard output.
    pub report: String,
    pub files: Vec<PathBuf>,
}

#[derive(Serialize)]
struct OperatorCheck {
    /// 1-based, as `T1`, `T2`, ...
    operator: String,
    norm: NormBracket,
    contraction: ContractionVerdict,
    w_prime: Option<WVerdict>,
    adjoint_w_prime: Option<WVerdict>,
    /// One entry per basis vector of the common fixed space.
    support_invariance: Vec<SupportInvariance>,
}

#[derive(Serialize)]
struct CheckReport {
    scenario: String,
    space: NormSpec,
    common_fixed_dim: usize,
    operators: Vec<OperatorCheck>,
}

#[derive(Serialize)]
struct FalsifyReport {
    scenario: String,
    /// 1-based generator indices; the first letter acts first.
    best_word: Vec<usize>,
    best_x: Vector,
    norm_gap: f64,
    displacement: f64,
    verdict_hint: randprod::conditions::FalsifierHint,
    words_searched: usize,
}

#[derive(Serialize)]
struct CertificateReport {
    scenario: String,
    constraints: BTreeMap<String, Option<String>>,
    consistent: bool,
    certificate: scenarios::ImpossibilityCertificate,
}

/// Written next to `summary.json` by exact runs.
#[derive(Serialize)]
struct ExactLimit {
    limit: Option<ExactVector>,
    final_iterate: ExactVector,
}

#[derive(Serialize)]
struct CatalogReport {
    families: Vec<&'static str>,
    scenarios: Vec<scenarios::Scenario>,
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

fn write(dir: &Path, name: &str, text: &str, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let io = |e| CliError::Io {
        path: dir.to_path_buf(),
        source: e,
    };
    fs::create_dir_all(dir).map_err(io)?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| CliError::Io {
        path: path.clone(),
        source: e,
    })?;
    files.push(path);
    Ok(())
}

/// Runs the configured mode, writing its files under `out`.
pub fn execute(config: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let mut files = Vec::new();
    if config.mode == Mode::Catalog {
        let report = to_json(&CatalogReport {
            families: FAMILIES.to_vec(),
            scenarios: scenarios::catalog(),
        });
        write(out, "catalog.json", &report, &mut files)?;
        return Ok(Outcome {
            code: EXIT_OK,
            report,
            files,
        });
    }
    let r = config.resolve()?;
    let s = &r.scenario;
    let (code, report) = match config.mode {
        Mode::Run => {
            let trace: Trace = if config.exact {
                let ops = s.exact_ops.as_ref().expect("validated");
                let x0 = r.exact_x0.as_ref().expect("validated");
                let t = iterate_exact(ops, &r.schedule, x0, &config.stop)?;
                let exact = ExactLimit {
                    limit: t.limit_estimate.clone(),
                    final_iterate: t.final_iterate.clone(),
                };
                write(out, "exact_limit.json", &to_json(&exact), &mut files)?;
                t.to_trace()
            } else {
                iterate(&s.ops, &r.schedule, &r.x0, &config.stop)?
            };
            for w in &trace.warnings {
                eprintln!("warning: {w}");
            }
            let summary = Summary::from_trace(&s.label, config.seed, &trace, &s.ops, config.tol)?;
            write(out, "trace.csv", &trace_csv_string(&trace)?, &mut files)?;
            let json = summary.to_json();
            write(out, "summary.json", &json, &mut files)?;
            let code = if summary.monotonicity_max_violation > AUDIT_TOL {
                EXIT_AUDIT
            } else {
                EXIT_OK
            };
            (code, json)
        }
        Mode::Check => {
            let y = common_fixed_space(&s.ops, DEFAULT_KERNEL_TOL)?;
            let seed = config.seed_or_zero();
            let mut operators = Vec::new();
            for (i, t) in s.ops.iter().enumerate() {
                let contraction = is_contraction(t, CONTRACTION_TOL);
                let (w_prime, adjoint_w_prime, support_invariance) = if contraction.is_yes() {
                    let mut inv = Vec::new();
                    for b in y.basis() {
                        inv.push(adjoint_support_invariance(t, b, config.tol)?);
                    }
                    (
                        Some(check_w_prime_seeded(t, config.tol, seed)?),
                        Some(check_w_prime_seeded(&t.adjoint(), config.tol, seed)?),
                        inv,
                    )
                } else {
                    (None, None, Vec::new())
                };
                operators.push(OperatorCheck {
                    operator: format!("T{}", i + 1),
                    norm: t.norm_bracket().clone(),
                    contraction,
                    w_prime,
                    adjoint_w_prime,
                    support_invariance,
                });
            }
            let report = to_json(&CheckReport {
                scenario: s.label.clone(),
                space: s.space,
                common_fixed_dim: y.dim(),
                operators,
            });
            (EXIT_OK, report)
        }
        Mode::Falsify => {
            let f = semigroup_w_falsifier(
                &s.ops,
                config.falsify.max_word_len,
                config.falsify.budget,
                config.seed_or_zero(),
            )?;
            let report = to_json(&FalsifyReport {
                scenario: s.label.clone(),
                best_word: f.best_word.iter().map(|i| i + 1).collect(),
                best_x: f.best_x,
                norm_gap: f.norm_gap,
                displacement: f.displacement,
                verdict_hint: f.verdict_hint,
                words_searched: f.words_searched,
            });
            (EXIT_OK, report)
        }
        Mode::Certificate => {
            let exact = s.exact_ops.as_ref().ok_or_else(|| {
                CliError::Config(format!("scenario {} has no exact operators", s.label))
            })?;
            let c = commuting_projection_certificate(exact)?;
            let constraints = c
                .parameter_constraints
                .iter()
                .map(|k| (k.generator.clone(), k.beta.clone()))
                .collect();
            let report = to_json(&CertificateReport {
                scenario: s.label.clone(),
                constraints,
                consistent: c.consistent,
                certificate: c,
            });
            (EXIT_OK, report)
        }
        Mode::Catalog => unreachable!(),
    };
    if config.mode != Mode::Run {
        write(out, &format!("{}.json", config.mode), &report, &mut files)?;
    }
    Ok(Outcome {
        code,
        report,
        files,
    })
}

/// Runs a config and reports errors on standard error. Returns the exit code.
pub fn run_cli(config: &RunConfig) -> i32 {
    match execute(config, &output_dir(config)) {
        Ok(o) => {
            print!("{}", o.report);
            o.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
