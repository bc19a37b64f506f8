//! Built-in scenarios and the commuting-projection certificate for the ℓ₁²
//! two-operator example.
//!
//! In that example `T₁(a, b) = (a + b/2, 0)` and `T₂(a, b) = (a + b/3, 0)`
//! on ℓ₁². Both are exactly idempotent (`T₁² = T₁`, `T₂² = T₂`, checked in
//! rational arithmetic by the tests below): each is a norm-one projection
//! onto the common fixed line `span{e₁}`, along different kernels. Which one
//! acts first decides the limit of the product, and no norm-one projection
//! onto `span{e₁}` commutes with both.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::conditions::WStatus;
use crate::error::{Error, Result};
use crate::exact::{parse_rational, ExactOperator, Rational};
use crate::linalg::orthonormalize;
use crate::operator::{LinearOperator, Subspace};
use crate::rng;
use crate::space::{Exponent, NormSpec, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Example1,
    VonNeumannTwoProjections,
    RandomProjections,
    DiagonalContractions,
    RotationCounterexample,
    Custom,
}

/// What a scenario is known to satisfy, by construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expectation {
    pub fixed_space_dim: Option<usize>,
    /// (W′) status of every generator (`fails` if any generator fails).
    pub generators_w_prime: Option<WStatus>,
    /// (W′) status of every adjoint.
    pub adjoints_w_prime: Option<WStatus>,
    /// Whether the limit is the same for every fair schedule.
    pub order_independent_limit: Option<bool>,
}

impl Expectation {
    fn unknown() -> Self {
        Self {
            fixed_space_dim: None,
            generators_w_prime: None,
            adjoints_w_prime: None,
            order_independent_limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    /// Family identifier, e.g. `von_neumann_2proj`.
    pub name: String,
    /// Identifier with parameters, e.g. `von_neumann_2proj(dim=6, seed=1)`.
    pub label: String,
    pub kind: ScenarioKind,
    pub space: NormSpec,
    #[serde(skip)]
    pub ops: Vec<LinearOperator>,
    #[serde(skip)]
    pub exact_ops: Option<Vec<ExactOperator>>,
    pub default_x0: Vector,
    /// Common fixed space as built, for families where it is known.
    pub known_fixed_space: Option<Subspace>,
    pub expected: Expectation,
}

impl Scenario {
    pub fn n_ops(&self) -> usize {
        self.ops.len()
    }
}

pub const FAMILIES: [&str; 5] = [
    "example1",
    "von_neumann_2proj",
    "random_projections",
    "diagonal_contractions",
    "rotation_counterexample",
];

/// Optional family parameters; `None` selects the family default.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ScenarioParams {
    pub dim: Option<usize>,
    pub n_ops: Option<usize>,
    pub p: Option<Exponent>,
}

/// Whether the family draws random numbers (and so needs a seed).
pub fn is_random_family(name: &str) -> bool {
    matches!(
        name,
        "von_neumann_2proj" | "random_projections" | "diagonal_contractions"
    )
}

/// Builds a catalog family by name.
pub fn build(name: &str, params: ScenarioParams, seed: u64) -> Result<Scenario> {
    let reject = |field: &str| {
        Err(Error::Invalid(format!(
            "scenario {name} does not take the parameter {field}"
        )))
    };
    match name {
        "example1" | "rotation_counterexample" => {
            if params.dim.is_some() {
                return reject("dim");
            }
            if params.n_ops.is_some() {
                return reject("n_ops");
            }
            if params.p.is_some() {
                return reject("p");
            }
            Ok(if name == "example1" {
                example1()
            } else {
                rotation_counterexample()
            })
        }
        "von_neumann_2proj" => {
            if params.n_ops.is_some() {
                return reject("n_ops");
            }
            if params.p.is_some_and(|p| !p.is_two()) {
                return Err(Error::Invalid(
                    "von_neumann_2proj lives in l_2 (p = 2)".into(),
                ));
            }
            von_neumann_2proj(params.dim.unwrap_or(6), seed)
        }
        "random_projections" => {
            if params.p.is_some_and(|p| !p.is_two()) {
                return Err(Error::Invalid(
                    "random_projections lives in l_2 (p = 2)".into(),
                ));
            }
            random_projections(params.n_ops.unwrap_or(4), params.dim.unwrap_or(10), seed)
        }
        "diagonal_contractions" => {
            if params.n_ops.is_some() {
                return reject("n_ops");
            }
            diagonal_contractions(
                params.dim.unwrap_or(6),
                params.p.unwrap_or(Exponent::TWO),
                seed,
            )
        }
        other => Err(Error::Invalid(format!(
            "unknown scenario {other:?}; known scenarios: {}",
            FAMILIES.join(", ")
        ))),
    }
}

/// The default catalog (random families use seed 1).
pub fn catalog() -> Vec<Scenario> {
    let mut out = vec![example1()];
    out.push(von_neumann_2proj(6, 1).expect("valid parameters"));
    out.push(random_projections(4, 10, 1).expect("valid parameters"));
    for p in [
        Exponent::ONE,
        Exponent::TWO,
        Exponent::Infinity,
        Exponent::Finite(3.0),
    ] {
        out.push(diagonal_contractions(6, p, 1).expect("valid parameters"));
    }
    out.push(rotation_counterexample());
    out
}

fn example1_exact() -> Vec<ExactOperator> {
    let s = NormSpec::new(2, Exponent::ONE).expect("valid space");
    vec![
        ExactOperator::parse(&[vec!["1", "1/2"], vec!["0", "0"]], s).expect("valid"),
        ExactOperator::parse(&[vec!["1", "1/3"], vec!["0", "0"]], s).expect("valid"),
    ]
}

/// ℓ₁² with `T₁ = [[1, 1/2], [0, 0]]` and `T₂ = [[1, 1/3], [0, 0]]`.
pub fn example1() -> Scenario {
    let exact = example1_exact();
    let ops = exact.iter().map(|t| t.to_float().expect("valid")).collect();
    Scenario {
        name: "example1".into(),
        label: "example1".into(),
        kind: ScenarioKind::Example1,
        space: exact[0].space(),
        ops,
        exact_ops: Some(exact),
        default_x0: Vector::basis(2, 1),
        known_fixed_space: Some(Subspace::from_orthonormal(2, vec![vec![1.0, 0.0]])),
        expected: Expectation {
            fixed_space_dim: Some(1),
            generators_w_prime: Some(WStatus::Holds),
            adjoints_w_prime: Some(WStatus::Fails),
            order_independent_limit: Some(false),
        },
    }
}

/// The quarter turn on ℓ₂²: an isometry with no nonzero fixed vector.
pub fn rotation_counterexample() -> Scenario {
    let s = NormSpec::new(2, Exponent::TWO).expect("valid space");
    let r = LinearOperator::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]], s).expect("valid");
    Scenario {
        name: "rotation_counterexample".into(),
        label: "rotation_counterexample".into(),
        kind: ScenarioKind::RotationCounterexample,
        space: s,
        ops: vec![r],
        exact_ops: None,
        default_x0: Vector::basis(2, 0),
        known_fixed_space: Some(Subspace::zero(2)),
        expected: Expectation {
            fixed_space_dim: Some(0),
            generators_w_prime: Some(WStatus::Fails),
            adjoints_w_prime: Some(WStatus::Fails),
            order_independent_limit: None,
        },
    }
}

fn gaussian_cols<R: Rng>(r: &mut R, dim: usize, k: usize) -> Vec<Vec<f64>> {
    (0..k).map(|_| rng::gaussian_vec(r, dim)).collect()
}

/// Orthonormal `extra` vectors orthogonal to the orthonormal set `shared`.
fn extend_basis<R: Rng>(r: &mut R, shared: &[Vec<f64>], dim: usize, extra: usize) -> Vec<Vec<f64>> {
    loop {
        let mut cols = shared.to_vec();
        cols.extend(gaussian_cols(r, dim, extra));
        let q = orthonormalize(&cols, 1e-6);
        if q.len() == shared.len() + extra {
            return q[shared.len()..].to_vec();
        }
    }
}

fn projector(basis: &[Vec<f64>], space: NormSpec) -> LinearOperator {
    let n = space.dim();
    let mut m = nalgebra::DMatrix::zeros(n, n);
    for b in basis {
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += b[i] * b[j];
            }
        }
    }
    LinearOperator::new(m, space).expect("finite entries")
}

fn start_vector(seed: u64, dim: usize) -> Vector {
    Vector::from_raw(rng::gaussian_vec(
        &mut rng::stream(seed, rng::START_VECTOR),
        dim,
    ))
}

fn projection_scenario(
    name: &str,
    label: String,
    kind: ScenarioKind,
    space: NormSpec,
    shared: Vec<Vec<f64>>,
    ranges: Vec<Vec<Vec<f64>>>,
    seed: u64,
) -> Scenario {
    let ops = ranges.iter().map(|b| projector(b, space)).collect();
    Scenario {
        name: name.into(),
        label,
        kind,
        space,
        ops,
        exact_ops: None,
        default_x0: start_vector(seed, space.dim()),
        expected: Expectation {
            fixed_space_dim: Some(shared.len()),
            generators_w_prime: Some(WStatus::Holds),
            adjoints_w_prime: Some(WStatus::Holds),
            order_independent_limit: Some(true),
        },
        known_fixed_space: Some(Subspace::from_orthonormal(space.dim(), shared)),
    }
}

/// Two orthogonal projections on ℓ₂^dim onto `M = S ⊕ A` and `N = S ⊕ B`,
/// where `S` has dimension `max(1, dim/4)` and `A`, `B` are random with the
/// same dimension. With `dim(S) + dim(A) + dim(B) ≤ dim` the ranges meet in
/// exactly `S` (almost surely).
pub fn von_neumann_2proj(dim: usize, seed: u64) -> Result<Scenario> {
    if dim < 3 {
        return Err(Error::Invalid("von_neumann_2proj needs dim ≥ 3".into()));
    }
    let space = NormSpec::new(dim, Exponent::TWO)?;
    let k = (dim / 4).max(1);
    let e = (dim / 4).max(1);
    let mut r = rng::stream(seed, rng::SCENARIO);
    let shared = extend_basis(&mut r, &[], dim, k);
    let a = extend_basis(&mut r, &shared, dim, e);
    let b = extend_basis(&mut r, &shared, dim, e);
    let m: Vec<Vec<f64>> = shared.iter().chain(&a).cloned().collect();
    let n: Vec<Vec<f64>> = shared.iter().chain(&b).cloned().collect();
    Ok(projection_scenario(
        "von_neumann_2proj",
        format!("von_neumann_2proj(dim={dim}, seed={seed})"),
        ScenarioKind::VonNeumannTwoProjections,
        space,
        shared,
        vec![m, n],
        seed,
    ))
}

/// `n_ops` orthogonal projections on ℓ₂^dim whose ranges share a random
/// subspace `S` of dimension `max(1, dim/5)`; each range adds
/// `max(1, (dim − dim S)/3)` further random directions.
pub fn random_projections(n_ops: usize, dim: usize, seed: u64) -> Result<Scenario> {
    if n_ops == 0 {
        return Err(Error::Invalid("random_projections needs n_ops ≥ 1".into()));
    }
    if dim < 3 {
        return Err(Error::Invalid("random_projections needs dim ≥ 3".into()));
    }
    let space = NormSpec::new(dim, Exponent::TWO)?;
    let k = (dim / 5).max(1);
    let e = ((dim - k) / 3).max(1);
    let mut r = rng::stream(seed, rng::SCENARIO);
    let shared = extend_basis(&mut r, &[], dim, k);
    let ranges = (0..n_ops)
        .map(|_| {
            let extra = extend_basis(&mut r, &shared, dim, e);
            shared.iter().chain(&extra).cloned().collect()
        })
        .collect();
    Ok(projection_scenario(
        "random_projections",
        format!("random_projections(n_ops={n_ops}, dim={dim}, seed={seed})"),
        ScenarioKind::RandomProjections,
        space,
        shared,
        ranges,
        seed,
    ))
}

/// Three diagonal contractions on ℓ_p^dim with entries in (0, 1]. A random
/// set `F` of `max(1, dim/3)` coordinates has entry 1 in every operator;
/// each other coordinate is below 1 in at least one operator, so the common
/// fixed space is `span{e_i : i ∈ F}`.
pub fn diagonal_contractions(dim: usize, p: Exponent, seed: u64) -> Result<Scenario> {
    if dim == 0 {
        return Err(Error::Invalid("diagonal_contractions needs dim ≥ 1".into()));
    }
    let space = NormSpec::new(dim, p)?;
    let n_ops = 3;
    let mut r = rng::stream(seed, rng::SCENARIO);
    let mut idx: Vec<usize> = (0..dim).collect();
    idx.shuffle(&mut r);
    let mut fixed: Vec<usize> = idx[..(dim / 3).max(1)].to_vec();
    fixed.sort_unstable();
    let mut diags = vec![vec![1.0; dim]; n_ops];
    for i in (0..dim).filter(|i| !fixed.contains(i)) {
        for d in diags.iter_mut() {
            if r.random::<f64>() >= 1.0 / 3.0 {
                d[i] = r.random_range(0.05..0.95);
            }
        }
        if diags.iter().all(|d| d[i] == 1.0) {
            let k = r.random_range(0..n_ops);
            diags[k][i] = r.random_range(0.05..0.95);
        }
    }
    let ops = diags
        .iter()
        .map(|d| LinearOperator::diagonal(d, space))
        .collect::<Result<Vec<_>>>()?;
    let basis = fixed
        .iter()
        .map(|&i| Vector::basis(dim, i).into_coords())
        .collect();
    // In l_inf every diagonal with a unit entry and an entry below 1 moves
    // the all-ones vector without shrinking it.
    let gen_status = if p.is_infinite() {
        WStatus::Fails
    } else {
        WStatus::Holds
    };
    let adj_status = if p.is_one() {
        WStatus::Fails
    } else {
        WStatus::Holds
    };
    Ok(Scenario {
        name: "diagonal_contractions".into(),
        label: format!("diagonal_contractions(dim={dim}, p={p}, seed={seed})"),
        kind: ScenarioKind::DiagonalContractions,
        space,
        ops,
        exact_ops: None,
        default_x0: start_vector(seed, dim),
        known_fixed_space: Some(Subspace::from_orthonormal(dim, basis)),
        expected: Expectation {
            fixed_space_dim: Some(fixed.len()),
            generators_w_prime: Some(gen_status),
            adjoints_w_prime: Some(adj_status),
            order_independent_limit: Some(true),
        },
    })
}

/// A user-supplied scenario.
pub fn custom(
    name: &str,
    space: NormSpec,
    ops: Vec<LinearOperator>,
    exact_ops: Option<Vec<ExactOperator>>,
    default_x0: Vector,
) -> Scenario {
    Scenario {
        name: name.into(),
        label: name.into(),
        kind: ScenarioKind::Custom,
        space,
        ops,
        exact_ops,
        default_x0,
        known_fixed_space: None,
        expected: Expectation::unknown(),
    }
}

/// The schedule-independent limit `P_Y x0` (Euclidean projection onto the
/// common fixed space) for the Hilbert projection families; `None` for
/// every other scenario.
pub fn expected_limit_oracle(s: &Scenario, x0: &Vector) -> Option<Vector> {
    match s.kind {
        ScenarioKind::VonNeumannTwoProjections | ScenarioKind::RandomProjections => {
            s.known_fixed_space.as_ref()?.project(x0).ok()
        }
        _ => None,
    }
}

/// An affine expression `c0 + c1·β` in the projection parameter.
#[derive(Debug, Clone, PartialEq)]
struct Affine {
    c0: Rational,
    c1: Rational,
}

impl Affine {
    fn constant(c: Rational) -> Self {
        Self {
            c0: c,
            c1: Rational::zero(),
        }
    }

    fn beta() -> Self {
        Self {
            c0: Rational::zero(),
            c1: Rational::one(),
        }
    }

    fn add(&self, o: &Affine) -> Affine {
        Affine {
            c0: &self.c0 + &o.c0,
            c1: &self.c1 + &o.c1,
        }
    }

    fn scale(&self, k: &Rational) -> Affine {
        Affine {
            c0: &self.c0 * k,
            c1: &self.c1 * k,
        }
    }

    fn sub(&self, o: &Affine) -> Affine {
        self.add(&o.scale(&-Rational::one()))
    }
}

/// How idempotence pins the `e₁` coefficient of `Q = [[q, β], [0, 0]]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdempotenceStep {
    /// Roots of `q² = q`.
    pub roots: Vec<String>,
    /// Root excluded because it forces `Q = 0`.
    pub rejected: String,
    pub reason: String,
    pub coefficient: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterConstraint {
    pub generator: String,
    /// The equations `QT = TQ` reduced to the parameter.
    pub equation: String,
    /// The unique admissible `β`, if the equations pin one.
    pub beta: Option<String>,
    pub within_contraction_bound: bool,
    #[serde(skip)]
    pub value: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Explanation {
    pub values: BTreeMap<String, String>,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpossibilityCertificate {
    pub parameterization: String,
    pub idempotence: IdempotenceStep,
    pub contraction_bound: String,
    pub parameter_constraints: Vec<ParameterConstraint>,
    pub consistent: bool,
    pub explanation: Explanation,
}

/// Whether some norm-one projection of ℓ₁² onto `span{e₁}` commutes with
/// every operator in `ops`, decided in exact arithmetic.
///
/// A projection with range `span{e₁}` has zero second row, so
/// `Q = [[q, β], [0, 0]]`. Idempotence gives `q² = q` and `qβ = β`; the root
/// `q = 0` forces `β = 0` and `Q = 0`, so `q = 1` and `Q(a, b) = (a + βb, 0)`.
/// Its ℓ₁ norm is `max(1, |β|)`, so `Q` is a contraction iff `|β| ≤ 1`.
/// Each entry of `QT − TQ` is affine in `β` and must vanish.
pub fn commuting_projection_certificate(ops: &[ExactOperator]) -> Result<ImpossibilityCertificate> {
    let space = NormSpec::new(2, Exponent::ONE)?;
    if ops.is_empty() {
        return Err(Error::EmptyOperators);
    }
    if ops.iter().any(|t| t.space() != space) {
        return Err(Error::Invalid(
            "the certificate concerns operators on l_1^2".into(),
        ));
    }

    // q² = q over the candidates {0, 1} (its only roots); q·β = β then
    // decides whether β is free.
    let roots: Vec<Rational> = [Rational::zero(), Rational::one()]
        .into_iter()
        .filter(|q| q * q == *q)
        .collect();
    // (q − 1)·β = 0 with q ≠ 1 forces β = 0, hence Q = 0.
    let rejected = roots
        .iter()
        .find(|q| !(*q - Rational::one()).is_zero())
        .cloned()
        .expect("q = 0 is a root");
    let coefficient = roots
        .iter()
        .find(|q| **q != rejected)
        .cloned()
        .expect("q = 1 is a root");

    let q = [
        [Affine::constant(coefficient.clone()), Affine::beta()],
        [
            Affine::constant(Rational::zero()),
            Affine::constant(Rational::zero()),
        ],
    ];
    let mut constraints = Vec::new();
    let mut values = BTreeMap::new();
    for (g, t) in ops.iter().enumerate() {
        let tr = t.rows();
        let mut eqs = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                // (QT)_ij − (TQ)_ij
                let mut qt = Affine::constant(Rational::zero());
                let mut tq = Affine::constant(Rational::zero());
                for k in 0..2 {
                    qt = qt.add(&q[i][k].scale(&tr[k][j]));
                    tq = tq.add(&q[k][j].scale(&tr[i][k]));
                }
                eqs.push(qt.sub(&tq));
            }
        }
        let mut value: Option<Rational> = None;
        let mut satisfiable = true;
        let mut pinned = false;
        for e in &eqs {
            if e.c1.is_zero() {
                satisfiable &= e.c0.is_zero();
            } else {
                let v = -&e.c0 / &e.c1;
                match &value {
                    Some(prev) if *prev != v => satisfiable = false,
                    _ => value = Some(v),
                }
                pinned = true;
            }
        }
        let label = format!("T{}", g + 1);
        let equation = match (&value, satisfiable, pinned) {
            (Some(v), true, _) => format!("beta = {v}"),
            (_, true, false) => "no condition on beta".to_string(),
            _ => "no solution".to_string(),
        };
        let value = if satisfiable { value } else { None };
        let within = match &value {
            Some(v) => v.abs() <= Rational::one(),
            None => satisfiable,
        };
        if let Some(v) = &value {
            values.insert(label.clone(), v.to_string());
        }
        constraints.push(ParameterConstraint {
            generator: label,
            equation,
            beta: value.as_ref().map(|v| v.to_string()),
            within_contraction_bound: within,
            value,
        });
    }

    let all_satisfiable = constraints
        .iter()
        .all(|c| c.equation != "no solution" && c.within_contraction_bound);
    let pinned: Vec<&Rational> = constraints
        .iter()
        .filter_map(|c| c.value.as_ref())
        .collect();
    let agree = pinned.windows(2).all(|w| w[0] == w[1]);
    let consistent = all_satisfiable && agree;
    let summary = if consistent {
        "a norm-one projection onto span{e1} commuting with every operator exists".to_string()
    } else if !agree {
        let parts: Vec<String> = constraints
            .iter()
            .filter_map(|c| {
                c.beta
                    .as_ref()
                    .map(|b| format!("{} forces beta = {b}", c.generator))
            })
            .collect();
        format!(
            "{}; no single beta satisfies all constraints",
            parts.join(", ")
        )
    } else {
        "some commutation constraint has no admissible beta".to_string()
    };
    Ok(ImpossibilityCertificate {
        parameterization: "Q(a, b) = (q*a + beta*b, 0)".into(),
        idempotence: IdempotenceStep {
            roots: roots.iter().map(|r| r.to_string()).collect(),
            rejected: rejected.to_string(),
            reason: "q = 0 and q*beta = beta give beta = 0, so Q = 0 is not onto span{e1}".into(),
            coefficient: coefficient.to_string(),
        },
        contraction_bound: "|beta| <= 1".into(),
        parameter_constraints: constraints,
        consistent,
        explanation: Explanation { values, summary },
    })
}

/// The certificate for the ℓ₁² two-operator example: `β = 1/2` from `T₁`,
/// `β = 1/3` from `T₂`, so no commuting norm-one projection exists.
pub fn example1_no_commuting_projection() -> ImpossibilityCertificate {
    commuting_projection_certificate(&example1_exact()).expect("example operators are valid")
}

/// Parses a row-major matrix of rational strings into an exact operator on
/// `space`.
pub fn exact_operator_from_strings(rows: &[Vec<String>], space: NormSpec) -> Result<ExactOperator> {
    let rows = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|s| parse_rational(s))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ExactOperator::new(rows, space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::check_w_prime;
    use crate::operator::{common_fixed_space, is_contraction};

    #[test]
    fn example_operators_act_as_stated() {
        let s = example1();
        let e2 = Vector::basis(2, 1);
        assert_eq!(s.ops[0].apply(&e2).unwrap().coords(), &[0.5, 0.0]);
        assert_eq!(s.ops[1].apply(&e2).unwrap().coords(), &[1.0 / 3.0, 0.0]);
        for t in s.exact_ops.as_ref().unwrap() {
            assert!(t.is_idempotent());
        }
    }

    #[test]
    fn certificate_is_exact_and_inconsistent() {
        let c = example1_no_commuting_projection();
        assert!(!c.consistent);
        let half = parse_rational("1/2").unwrap();
        let third = parse_rational("1/3").unwrap();
        assert_eq!(c.parameter_constraints[0].value, Some(half));
        assert_eq!(c.parameter_constraints[1].value, Some(third));
        assert_eq!(c.explanation.values["T1"], "1/2");
        assert_eq!(c.explanation.values["T2"], "1/3");
        assert_eq!(c.idempotence.coefficient, "1");
        assert_eq!(c.idempotence.rejected, "0");
    }

    #[test]
    fn certificate_is_consistent_for_a_single_operator() {
        let ops = example1_exact();
        let c = commuting_projection_certificate(&ops[..1]).unwrap();
        assert!(c.consistent);
        let twice = vec![ops[1].clone(), ops[1].clone()];
        assert!(commuting_projection_certificate(&twice).unwrap().consistent);
    }

    #[test]
    fn catalog_operators_are_certified_contractions() {
        for s in catalog() {
            for t in &s.ops {
                assert!(is_contraction(t, 1e-10).is_yes(), "{}", s.label);
                assert!(t.norm_bracket().width() <= 1e-10 || s.space.p().value() == 3.0);
            }
        }
    }

    #[test]
    fn known_fixed_spaces_match_kernel_computation() {
        for s in catalog() {
            let y = common_fixed_space(&s.ops, 1e-10).unwrap();
            let known = s.known_fixed_space.as_ref().unwrap();
            assert_eq!(y.dim(), known.dim(), "{}", s.label);
            for b in known.basis() {
                assert!(y.distance(b).unwrap() < 1e-9, "{}", s.label);
            }
        }
    }

    #[test]
    fn generator_verdicts_match_expectations() {
        for s in catalog() {
            let statuses: Vec<WStatus> = s
                .ops
                .iter()
                .map(|t| check_w_prime(t, 1e-10).unwrap().status)
                .collect();
            let agg = if statuses.contains(&WStatus::Fails) {
                WStatus::Fails
            } else {
                WStatus::Holds
            };
            assert_eq!(Some(agg), s.expected.generators_w_prime, "{}", s.label);
        }
    }

    #[test]
    fn random_families_are_seeded() {
        assert_eq!(
            von_neumann_2proj(8, 4).unwrap(),
            von_neumann_2proj(8, 4).unwrap()
        );
        assert_ne!(
            von_neumann_2proj(8, 4).unwrap().ops,
            von_neumann_2proj(8, 5).unwrap().ops
        );
    }

    #[test]
    fn oracle_only_for_projection_families() {
        let s = example1();
        assert!(expected_limit_oracle(&s, &s.default_x0).is_none());
        let s = random_projections(4, 10, 2).unwrap();
        assert!(expected_limit_oracle(&s, &s.default_x0).is_some());
    }

    #[test]
    fn build_validates_names_and_parameters() {
        assert!(build("nope", ScenarioParams::default(), 0).is_err());
        let with_dim = ScenarioParams {
            dim: Some(3),
            ..Default::default()
        };
        assert!(build("example1", with_dim, 0).is_err());
        assert_eq!(
            build("von_neumann_2proj", with_dim, 0).unwrap().space.dim(),
            3
        );
    }
}
