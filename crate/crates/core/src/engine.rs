//! The product iteration `S_n x = T_{r(n)} ⋯ T_{r(1)} x` and its audits.
//!
//! In finite dimensions weak and norm convergence coincide, so every
//! convergence test here is a norm test. Convergence is detected with a
//! windowed Cauchy rule because the limit is not known in advance;
//! [`classify_limit`] then checks the estimate against the common fixed
//! space.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::matvec;
use crate::operator::{
    common_fixed_space, is_contraction, ContractionVerdict, LinearOperator, CONTRACTION_TOL,
    DEFAULT_KERNEL_TOL,
};
use crate::rng;
use crate::schedule::WordSchedule;
use crate::space::{lp_norm, NormSpec, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StopCriteria {
    pub max_iters: usize,
    /// Increment threshold `‖S_n x − S_{n−1} x‖ < cauchy_tol`.
    pub cauchy_tol: f64,
    /// Number of consecutive steps that must meet `cauchy_tol`.
    pub cauchy_window: usize,
    /// Relative distance at which a revisited iterate counts as a cycle.
    pub stagnation_tol: f64,
    /// Snapshot every `snapshot_stride` steps (1 keeps the full history).
    #[serde(rename = "stride")]
    pub snapshot_stride: usize,
}

impl Default for StopCriteria {
    fn default() -> Self {
        Self {
            max_iters: 100_000,
            cauchy_tol: 1e-10,
            cauchy_window: 50,
            stagnation_tol: 1e-12,
            snapshot_stride: 100,
        }
    }
}

impl StopCriteria {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.cauchy_window == 0 || self.snapshot_stride == 0 {
            return Err(Error::Invalid(
                "max_iters, cauchy_window and stride must be at least 1".into(),
            ));
        }
        if !(self.cauchy_tol > 0.0 && self.stagnation_tol > 0.0) {
            return Err(Error::Invalid("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn with_full_history(mut self) -> Self {
        self.snapshot_stride = 1;
        self
    }
}

pub(crate) fn fairness_warnings(fair: bool) -> Vec<String> {
    if fair {
        return Vec::new();
    }
    vec!["schedule does not use every generator infinitely often; \
          a limit need not be fixed by the unused ones"
        .to_string()]
}

/// One step of the iteration. `generator` is 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub n: usize,
    pub generator: usize,
    pub norm: f64,
    pub increment: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    Budget,
    /// The iterate came back to an earlier value while still moving: the
    /// orbit cycles and will not converge.
    Stagnated,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::Budget => "budget",
            StopReason::Stagnated => "stagnated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub space: NormSpec,
    pub initial_norm: f64,
    pub steps: Vec<StepRecord>,
    /// `(n, S_n x)`, starting with `n = 0`.
    pub snapshots: Vec<(usize, Vector)>,
    pub snapshot_stride: usize,
    /// The final iterate when the run converged.
    pub limit_estimate: Option<Vector>,
    pub final_iterate: Vector,
    pub stop_reason: StopReason,
    pub fair_schedule: bool,
    pub warnings: Vec<String>,
}

impl Trace {
    pub fn iters(&self) -> usize {
        self.steps.len()
    }

    /// Limit estimate if converged, else the last iterate.
    pub fn best_estimate(&self) -> &Vector {
        self.limit_estimate.as_ref().unwrap_or(&self.final_iterate)
    }
}

/// Checks that `ops` share a space and are certified contractions.
pub fn certify_generators(ops: &[LinearOperator]) -> Result<NormSpec> {
    let first = ops.first().ok_or(Error::EmptyOperators)?;
    for (index, t) in ops.iter().enumerate() {
        if t.space() != first.space() {
            return Err(Error::SpaceMismatch);
        }
        if !matches!(is_contraction(t, CONTRACTION_TOL), ContractionVerdict::Yes) {
            let b = t.norm_bracket();
            return Err(Error::NotContraction {
                index,
                lower: b.lower,
                upper: b.upper,
            });
        }
    }
    Ok(first.space())
}

/// Runs the product iteration from `x0` until the Cauchy rule fires, the
/// orbit is seen to cycle, or `max_iters` steps have been taken.
pub fn iterate(
    ops: &[LinearOperator],
    schedule: &WordSchedule,
    x0: &Vector,
    stop: &StopCriteria,
) -> Result<Trace> {
    let space = certify_generators(ops)?;
    stop.validate()?;
    if schedule.n_generators() != ops.len() {
        return Err(Error::Schedule(format!(
            "schedule has {} generators but {} operators were given",
            schedule.n_generators(),
            ops.len()
        )));
    }
    check_dim(space.dim(), x0.dim())?;
    let p = space.p();
    let window = stop.cauchy_window;

    let mut x = x0.coords().to_vec();
    let initial_norm = lp_norm(&x, p);
    let mut steps = Vec::with_capacity(stop.max_iters.min(1 << 16));
    let mut snapshots = vec![(0, x0.clone())];
    // Last `window` iterates with their step numbers, for cycle detection.
    let mut recent: VecDeque<(usize, Vec<f64>)> = VecDeque::with_capacity(window);
    let mut calm = 0usize;
    let mut last_move = 0usize;
    let mut reason = StopReason::Budget;
    let mut gens = schedule.indices();

    for n in 1..=stop.max_iters {
        let k = gens.next().expect("schedules are infinite");
        let y = matvec(ops[k].matrix(), &x);
        let diff: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let increment = lp_norm(&diff, p);
        let norm = lp_norm(&y, p);
        steps.push(StepRecord {
            n,
            generator: k,
            norm,
            increment,
        });
        x = y;
        if n % stop.snapshot_stride == 0 {
            snapshots.push((n, Vector::from_raw(x.clone())));
        }

        calm = if increment < stop.cauchy_tol {
            calm + 1
        } else {
            0
        };
        if calm >= window {
            reason = StopReason::Converged;
            break;
        }

        if increment >= stop.cauchy_tol {
            last_move = n;
        }
        // A cycle: an earlier iterate recurs although the orbit moved since.
        if n % window == 0 && norm > 0.0 {
            let cycled = recent.iter().any(|(m, r)| {
                let d: Vec<f64> = r.iter().zip(&x).map(|(a, b)| a - b).collect();
                *m < last_move && lp_norm(&d, p) <= stop.stagnation_tol * norm
            });
            if cycled {
                reason = StopReason::Stagnated;
                break;
            }
        }
        if recent.len() == window {
            recent.pop_front();
        }
        recent.push_back((n, x.clone()));
    }

    let final_iterate = Vector::from_raw(x);
    let last_n = steps.last().map_or(0, |s| s.n);
    if snapshots.last().map(|s| s.0) != Some(last_n) {
        snapshots.push((last_n, final_iterate.clone()));
    }
    let fair = schedule.is_fair();
    let warnings = fairness_warnings(fair);
    Ok(Trace {
        space,
        initial_norm,
        steps,
        snapshots,
        snapshot_stride: stop.snapshot_stride,
        limit_estimate: (reason == StopReason::Converged).then(|| final_iterate.clone()),
        final_iterate,
        stop_reason: reason,
        fair_schedule: fair,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub in_common_fixed_set: bool,
    /// Euclidean distance to the common fixed space.
    pub distance: f64,
    /// `‖T_j z − z‖` in the space norm.
    pub residuals: Vec<f64>,
}

/// Whether `z` is fixed by every generator, with residuals measured
/// relative to `max(1, ‖z‖)`.
pub fn classify_limit(z: &Vector, ops: &[LinearOperator], tol: f64) -> Result<LimitReport> {
    let y = common_fixed_space(ops, DEFAULT_KERNEL_TOL)?;
    let space = ops[0].space();
    check_dim(space.dim(), z.dim())?;
    let scale = space.norm(z)?.max(1.0);
    let residuals: Vec<f64> = ops
        .iter()
        .map(|t| space.distance(&t.apply(z)?, z))
        .collect::<Result<_>>()?;
    Ok(LimitReport {
        in_common_fixed_set: residuals.iter().all(|&r| r <= tol * scale),
        distance: y.distance(z)?,
        residuals,
    })
}

/// Largest one-step increase of `‖S_n x‖`, or 0 if the norms never
/// increase.
pub fn monotonicity_audit(trace: &Trace) -> f64 {
    let mut prev = trace.initial_norm;
    let mut worst = 0.0f64;
    for s in &trace.steps {
        worst = worst.max(s.norm - prev);
        prev = s.norm;
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsequenceReport {
    pub z_is_common_fixed: bool,
    /// `n ↦ ‖S_n x − z‖` never rose by more than `tol`. Only a consequence
    /// of contractivity when `z_is_common_fixed` holds.
    pub distance_monotone: bool,
    pub max_increase: f64,
}

/// Checks that the distance from the orbit to `z` does not increase. This
/// is what forces the full sequence to converge to `z` once a subsequence
/// does.
pub fn subsequence_lemma_check(
    trace: &Trace,
    z: &Vector,
    ops: &[LinearOperator],
    tol: f64,
) -> Result<SubsequenceReport> {
    if trace.snapshot_stride != 1 {
        return Err(Error::MissingSnapshots(trace.snapshot_stride));
    }
    let fixed = classify_limit(z, ops, tol)?.in_common_fixed_set;
    let space = trace.space;
    let mut prev: Option<f64> = None;
    let mut worst = 0.0f64;
    for (_, v) in &trace.snapshots {
        let d = space.distance(v, z)?;
        if let Some(p) = prev {
            worst = worst.max(d - p);
        }
        prev = Some(d);
    }
    Ok(SubsequenceReport {
        z_is_common_fixed: fixed,
        distance_monotone: worst <= tol,
        max_increase: worst,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderReport {
    /// One estimate per schedule (the last iterate if a run did not
    /// converge).
    pub limits: Vec<Vector>,
    /// Largest pairwise distance between the estimates, in the space norm.
    pub diameter: f64,
    /// Indices of runs that did not converge.
    pub unconverged: Vec<usize>,
}

/// Runs `n_schedules` independent uniform schedules from `x0`. Schedule `i`
/// is seeded from `(seed, i)`, so results do not depend on thread count.
pub fn order_sensitivity(
    ops: &[LinearOperator],
    x0: &Vector,
    n_schedules: usize,
    seed: u64,
    stop: &StopCriteria,
) -> Result<OrderReport> {
    let schedules: Vec<WordSchedule> = (0..n_schedules)
        .map(|i| {
            WordSchedule::seeded_uniform(rng::child_seed(seed, rng::TRIALS, i as u64), ops.len())
        })
        .collect::<Result<_>>()?;
    order_sensitivity_with(ops, x0, &schedules, stop)
}

/// [`order_sensitivity`] over caller-chosen schedules.
pub fn order_sensitivity_with(
    ops: &[LinearOperator],
    x0: &Vector,
    schedules: &[WordSchedule],
    stop: &StopCriteria,
) -> Result<OrderReport> {
    let space = certify_generators(ops)?;
    let traces: Vec<Trace> = schedules
        .par_iter()
        .map(|s| iterate(ops, s, x0, stop))
        .collect::<Result<_>>()?;
    let unconverged = traces
        .iter()
        .enumerate()
        .filter(|(_, t)| t.stop_reason != StopReason::Converged)
        .map(|(i, _)| i)
        .collect();
    let limits: Vec<Vector> = traces.iter().map(|t| t.best_estimate().clone()).collect();
    let mut diameter = 0.0f64;
    for i in 0..limits.len() {
        for j in i + 1..limits.len() {
            diameter = diameter.max(space.distance(&limits[i], &limits[j])?);
        }
    }
    Ok(OrderReport {
        limits,
        diameter,
        unconverged,
    })
}
