//! Exact rational arithmetic for small operators such as the ℓ₁² example,
//! whose entries (1/2, 1/3) are not binary floats.
//!
//! Exact norms are available for `p = 1` and `p = ∞` only; the ℓ₂ norm of
//! a rational vector is in general irrational.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::engine::{StepRecord, StopCriteria, StopReason, Trace};
use crate::error::{check_dim, Error, Result};
use crate::operator::LinearOperator;
use crate::schedule::WordSchedule;
use crate::space::{Exponent, NormSpec, Vector};

pub type Rational = BigRational;

/// Parses `"3"`, `"-1/3"`, `"0.125"` or `"2.5e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::Exact(format!("cannot parse {s:?} as a rational number"));
    if let Some((a, b)) = t.split_once('/') {
        let num: BigInt = a.trim().parse().map_err(|_| bad())?;
        let den: BigInt = b.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Exact(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(num, den));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part
            .chars()
            .chain(frac_part.chars())
            .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: BigInt = format!("0{int_part}{frac_part}")
        .parse()
        .map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(all);
    if scale >= 0 {
        r *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

/// Exact value of a finite float (every finite double is a dyadic rational).
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::Exact(format!("{x} is not finite")))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn exact_norm(x: &[Rational], p: Exponent) -> Result<Rational> {
    if p.is_one() {
        Ok(x.iter()
            .map(|c| c.abs())
            .fold(Rational::zero(), |a, b| a + b))
    } else if p.is_infinite() {
        Ok(x.iter()
            .map(|c| c.abs())
            .fold(Rational::zero(), |a, b| a.max(b)))
    } else {
        Err(Error::Exact(format!(
            "exact norms are available for p = 1 and p = inf, not p = {p}"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct ExactVector {
    #[serde(serialize_with = "ser_rationals")]
    coords: Vec<Rational>,
}

fn ser_rationals<S: serde::Serializer>(
    v: &[Rational],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.to_string()))
}

impl ExactVector {
    pub fn new(coords: Vec<Rational>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Invalid(
                "vectors must have at least one coordinate".into(),
            ));
        }
        Ok(Self { coords })
    }

    pub fn parse(entries: &[&str]) -> Result<Self> {
        Self::new(
            entries
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<_>>()?,
        )
    }

    pub fn from_vector(v: &Vector) -> Result<Self> {
        Self::new(
            v.iter()
                .map(|&c| rational_from_f64(c))
                .collect::<Result<_>>()?,
        )
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn to_vector(&self) -> Vector {
        Vector::from_raw(self.coords.iter().map(rational_to_f64).collect())
    }

    pub fn norm(&self, p: Exponent) -> Result<Rational> {
        exact_norm(&self.coords, p)
    }

    pub fn sub(&self, other: &ExactVector) -> Result<ExactVector> {
        check_dim(self.dim(), other.dim())?;
        Ok(ExactVector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }
}

/// A square rational matrix on a fixed space.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactOperator {
    rows: Vec<Vec<Rational>>,
    space: NormSpec,
}

impl ExactOperator {
    pub fn new(rows: Vec<Vec<Rational>>, space: NormSpec) -> Result<Self> {
        check_dim(space.dim(), rows.len())?;
        for r in &rows {
            check_dim(space.dim(), r.len())?;
        }
        Ok(Self { rows, space })
    }

    /// Builds an operator from entries such as `"1/3"` or `"0.5"`.
    pub fn parse(rows: &[Vec<&str>], space: NormSpec) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| parse_rational(s))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows, space)
    }

    pub fn space(&self) -> NormSpec {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn apply(&self, v: &ExactVector) -> Result<ExactVector> {
        check_dim(self.dim(), v.dim())?;
        Ok(ExactVector {
            coords: self.apply_raw(&v.coords),
        })
    }

    fn apply_raw(&self, v: &[Rational]) -> Vec<Rational> {
        self.rows
            .iter()
            .map(|r| {
                r.iter()
                    .zip(v)
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &ExactOperator) -> Result<ExactOperator> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        let n = self.dim();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n).fold(Rational::zero(), |acc, k| {
                            acc + &self.rows[i][k] * &other.rows[k][j]
                        })
                    })
                    .collect()
            })
            .collect();
        Ok(ExactOperator {
            rows,
            space: self.space,
        })
    }

    /// Exact induced norm (max column sum for `p = 1`, max row sum for
    /// `p = ∞`).
    pub fn norm(&self) -> Result<Rational> {
        let p = self.space.p();
        let n = self.dim();
        if p.is_one() {
            Ok((0..n)
                .map(|j| {
                    self.rows
                        .iter()
                        .fold(Rational::zero(), |a, r| a + r[j].abs())
                })
                .fold(Rational::zero(), |a, b| a.max(b)))
        } else if p.is_infinite() {
            Ok(self
                .rows
                .iter()
                .map(|r| r.iter().fold(Rational::zero(), |a, b| a + b.abs()))
                .fold(Rational::zero(), |a, b| a.max(b)))
        } else {
            Err(Error::Exact(format!(
                "exact operator norms are available for p = 1 and p = inf, not p = {p}"
            )))
        }
    }

    pub fn is_contraction(&self) -> Result<bool> {
        Ok(self.norm()? <= Rational::one())
    }

    /// `T² = T` exactly.
    pub fn is_idempotent(&self) -> bool {
        self.compose(self).map(|sq| sq == *self).unwrap_or(false)
    }

    /// `TS = ST` exactly.
    pub fn commutes_with(&self, other: &ExactOperator) -> Result<bool> {
        Ok(self.compose(other)? == other.compose(self)?)
    }

    pub fn fixes(&self, v: &ExactVector) -> Result<bool> {
        Ok(self.apply(v)? == *v)
    }

    pub fn to_float(&self) -> Result<LinearOperator> {
        let rows: Vec<Vec<f64>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(rational_to_f64).collect())
            .collect();
        LinearOperator::from_rows(&rows, self.space)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactStep {
    pub n: usize,
    pub generator: usize,
    #[serde(serialize_with = "ser_rational")]
    pub norm: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub increment: Rational,
}

fn ser_rational<S: serde::Serializer>(v: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactTrace {
    pub space: NormSpec,
    pub initial: ExactVector,
    pub steps: Vec<ExactStep>,
    pub limit_estimate: Option<ExactVector>,
    pub final_iterate: ExactVector,
    pub stop_reason: StopReason,
    pub fair_schedule: bool,
    /// Iterates at multiples of the snapshot stride (and the last one).
    pub snapshots: Vec<(usize, ExactVector)>,
    pub snapshot_stride: usize,
}

impl ExactTrace {
    /// Float view with the same steps, for reporting and audits.
    pub fn to_trace(&self) -> Trace {
        let p = self.space.p();
        let initial_norm =
            rational_to_f64(&self.initial.norm(p).unwrap_or_else(|_| Rational::zero()));
        let warnings = crate::engine::fairness_warnings(self.fair_schedule);
        Trace {
            space: self.space,
            initial_norm,
            steps: self
                .steps
                .iter()
                .map(|s| StepRecord {
                    n: s.n,
                    generator: s.generator,
                    norm: rational_to_f64(&s.norm),
                    increment: rational_to_f64(&s.increment),
                })
                .collect(),
            snapshots: self
                .snapshots
                .iter()
                .map(|(n, v)| (*n, v.to_vector()))
                .collect(),
            snapshot_stride: self.snapshot_stride,
            limit_estimate: self.limit_estimate.as_ref().map(|v| v.to_vector()),
            final_iterate: self.final_iterate.to_vector(),
            stop_reason: self.stop_reason,
            fair_schedule: self.fair_schedule,
            warnings,
        }
    }
}

fn certify_exact(ops: &[ExactOperator]) -> Result<NormSpec> {
    let first = ops.first().ok_or(Error::EmptyOperators)?;
    for (index, t) in ops.iter().enumerate() {
        if t.space() != first.space() {
            return Err(Error::SpaceMismatch);
        }
        let norm = t.norm()?;
        if norm > Rational::one() {
            let v = rational_to_f64(&norm);
            return Err(Error::NotContraction {
                index,
                lower: v,
                upper: v,
            });
        }
    }
    Ok(first.space())
}

/// The product iteration in exact arithmetic. Stops after `cauchy_window`
/// consecutive increments below `cauchy_tol`, on an exact revisit of a
/// recent iterate after the orbit moved, or at `max_iters`.
pub fn iterate_exact(
    ops: &[ExactOperator],
    schedule: &WordSchedule,
    x0: &ExactVector,
    stop: &StopCriteria,
) -> Result<ExactTrace> {
    let space = certify_exact(ops)?;
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
    let tol = rational_from_f64(stop.cauchy_tol)?;
    let window = stop.cauchy_window;

    let mut x = x0.clone();
    let mut steps = Vec::new();
    let mut snapshots = vec![(0, x0.clone())];
    let mut recent: VecDeque<(usize, ExactVector)> = VecDeque::with_capacity(window);
    let mut calm = 0usize;
    let mut last_move = 0usize;
    let mut reason = StopReason::Budget;
    let mut gens = schedule.indices();
    for n in 1..=stop.max_iters {
        let k = gens.next().expect("schedules are infinite");
        let y = ops[k].apply(&x)?;
        let increment = y.sub(&x)?.norm(p)?;
        let norm = y.norm(p)?;
        let moved = increment >= tol;
        calm = if moved { 0 } else { calm + 1 };
        if moved {
            last_move = n;
        }
        steps.push(ExactStep {
            n,
            generator: k,
            norm,
            increment,
        });
        x = y;
        if n % stop.snapshot_stride == 0 {
            snapshots.push((n, x.clone()));
        }
        if calm >= window {
            reason = StopReason::Converged;
            break;
        }
        if recent.iter().any(|(m, r)| *m < last_move && *r == x) {
            reason = StopReason::Stagnated;
            break;
        }
        if recent.len() == window {
            recent.pop_front();
        }
        recent.push_back((n, x.clone()));
    }
    let last_n = steps.last().map_or(0, |s| s.n);
    if snapshots.last().map(|s| s.0) != Some(last_n) {
        snapshots.push((last_n, x.clone()));
    }
    Ok(ExactTrace {
        space,
        initial: x0.clone(),
        steps,
        limit_estimate: (reason == StopReason::Converged).then(|| x.clone()),
        final_iterate: x,
        stop_reason: reason,
        fair_schedule: schedule.is_fair(),
        snapshots,
        snapshot_stride: stop.snapshot_stride,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactOrderReport {
    pub limits: Vec<ExactVector>,
    #[serde(serialize_with = "ser_rational")]
    pub diameter: Rational,
    pub unconverged: Vec<usize>,
}

/// Runs each schedule exactly and measures the spread of the limits in the
/// space norm.
pub fn order_sensitivity_exact(
    ops: &[ExactOperator],
    x0: &ExactVector,
    schedules: &[WordSchedule],
    stop: &StopCriteria,
) -> Result<ExactOrderReport> {
    let space = certify_exact(ops)?;
    let mut limits = Vec::new();
    let mut unconverged = Vec::new();
    for (i, s) in schedules.iter().enumerate() {
        let t = iterate_exact(ops, s, x0, stop)?;
        if t.stop_reason != StopReason::Converged {
            unconverged.push(i);
        }
        limits.push(t.final_iterate);
    }
    let mut diameter = Rational::zero();
    for i in 0..limits.len() {
        for j in i + 1..limits.len() {
            diameter = diameter.max(limits[i].sub(&limits[j])?.norm(space.p())?);
        }
    }
    Ok(ExactOrderReport {
        limits,
        diameter,
        unconverged,
    })
}
