//! Trace CSV, run summaries, and the scenario file format.
//!
//! Serialized generator indices are 1-based (`r_n = 1` is the first
//! operator); the library itself counts from 0.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::engine::{classify_limit, monotonicity_audit, Trace};
use crate::error::{check_dim, Error, Result};
use crate::exact::{parse_rational, rational_to_f64, ExactOperator, ExactVector};
use crate::operator::LinearOperator;
use crate::scenarios::{custom, Scenario};
use crate::space::{Exponent, NormSpec, Vector};

pub const TRACE_HEADER: [&str; 4] = ["n", "r_n", "norm", "increment"];

/// Writes one row per step: `n, r_n, norm, increment`.
pub fn write_trace_csv<W: Write>(trace: &Trace, out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Invalid(format!("writing trace: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER).map_err(io)?;
    for s in &trace.steps {
        w.write_record([
            s.n.to_string(),
            (s.generator + 1).to_string(),
            s.norm.to_string(),
            s.increment.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Invalid(format!("writing trace: {e}")))?;
    Ok(())
}

pub fn trace_csv_string(trace: &Trace) -> Result<String> {
    let mut buf = Vec::new();
    write_trace_csv(trace, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Run summary. Field order is the serialized key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: String,
    pub seed: Option<u64>,
    pub stop_reason: String,
    pub iters: usize,
    /// The limit estimate, or `null` when the run did not converge.
    pub limit: Option<Vec<f64>>,
    pub monotonicity_max_violation: f64,
    /// Whether the limit (or the last iterate) is fixed by every generator.
    pub limit_in_fixed_set: bool,
    /// Euclidean distance from that vector to the common fixed space.
    pub distance_to_fixed_set: f64,
}

impl Summary {
    pub fn from_trace(
        scenario: &str,
        seed: Option<u64>,
        trace: &Trace,
        ops: &[LinearOperator],
        tol: f64,
    ) -> Result<Summary> {
        let report = classify_limit(trace.best_estimate(), ops, tol)?;
        Ok(Summary {
            scenario: scenario.to_string(),
            seed,
            stop_reason: trace.stop_reason.as_str().to_string(),
            iters: trace.iters(),
            limit: trace.limit_estimate.as_ref().map(|v| v.coords().to_vec()),
            monotonicity_max_violation: monotonicity_audit(trace),
            limit_in_fixed_set: report.in_common_fixed_set,
            distance_to_fixed_set: report.distance,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes") + "\n"
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    p: Exponent,
    operators: Vec<Vec<Vec<Value>>>,
    #[serde(default)]
    x0: Option<Vec<Value>>,
}

fn entry_text(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(Error::Invalid(format!(
            "matrix entries must be numbers or strings like \"1/3\", found {other}"
        ))),
    }
}

/// Parses a scenario file:
///
/// ```json
/// {"name": "shear", "p": 1, "operators": [[["1", "1/2"], ["0", "0"]]], "x0": [0, 1]}
/// ```
///
/// Entries are parsed as exact rationals, so the returned scenario carries
/// both float and exact operators. `x0` defaults to the all-ones vector.
pub fn parse_scenario_file(text: &str) -> Result<Scenario> {
    let f: ScenarioFile =
        serde_json::from_str(text).map_err(|e| Error::Invalid(format!("scenario file: {e}")))?;
    let dim = f
        .operators
        .first()
        .map(|m| m.len())
        .ok_or(Error::EmptyOperators)?;
    if dim == 0 {
        return Err(Error::Invalid(
            "scenario file: operators must be nonempty".into(),
        ));
    }
    let space = NormSpec::new(dim, f.p)?;
    let mut exact = Vec::new();
    for m in &f.operators {
        check_dim(dim, m.len())?;
        let rows = m
            .iter()
            .map(|r| {
                r.iter()
                    .map(|v| parse_rational(&entry_text(v)?))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        exact.push(ExactOperator::new(rows, space)?);
    }
    let ops = exact
        .iter()
        .map(|t| t.to_float())
        .collect::<Result<Vec<_>>>()?;
    let x0 = match &f.x0 {
        Some(v) => {
            let coords = v
                .iter()
                .map(|c| parse_rational(&entry_text(c)?))
                .collect::<Result<Vec<_>>>()?;
            check_dim(dim, coords.len())?;
            Vector::new(coords.iter().map(rational_to_f64).collect())?
        }
        None => Vector::new(vec![1.0; dim])?,
    };
    Ok(custom(&f.name, space, ops, Some(exact), x0))
}

/// Exact starting vector for a scenario, from its float coordinates.
pub fn exact_start(x0: &Vector) -> Result<ExactVector> {
    ExactVector::from_vector(x0)
}
