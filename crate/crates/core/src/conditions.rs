//! Checking the norm-preservation conditions (W′) and (W).
//!
//! A contraction `T` satisfies (W′) when `‖Tx‖ = ‖x‖` forces `Tx = x`. It
//! satisfies (W) when every bounded sequence with `‖x_n‖ − ‖Tx_n‖ → 0` has
//! `x_n − Tx_n → 0` weakly. On a finite-dimensional space the two coincide:
//!
//! * (W) ⇒ (W′). If `‖Tx‖ = ‖x‖`, the constant sequence `x_n = x` has zero
//!   norm gap, so `x − Tx → 0`, i.e. `Tx = x`.
//! * (W′) ⇒ (W). Weak and norm convergence agree, so suppose (W′) holds but
//!   some bounded `(x_n)` has gap → 0 while `‖x_n − Tx_n‖ ≥ ε` along a
//!   subsequence. Bounded sets are relatively compact, so a further
//!   subsequence converges to some `x`. By continuity `‖x‖ − ‖Tx‖ = 0` and
//!   `‖x − Tx‖ ≥ ε`, contradicting (W′).
//!
//! [`check_w`] therefore delegates to [`check_w_prime`]. The exact routes:
//!
//! * `p = 2`: `‖Tx‖ = ‖x‖` iff `x` is in the eigenspace of `TᵀT` at 1, so
//!   (W′) holds iff `T − I` vanishes there.
//! * `p = 1`: `‖Tx‖₁ ≤ Σ|x_j|‖Te_j‖₁`, so a norm-preserved `x` is supported
//!   on unit columns. If each such `e_j` is fixed then so is `x`; hence (W′)
//!   fails iff some unit column `e_j` has `Te_j ≠ e_j`, and `e_j` is the
//!   witness.
//! * `p = ∞`: `‖Tx‖∞ = ‖x‖∞ = 1` needs a row `k` of unit absolute sum with
//!   `x_i = ±sign(T_ki)` on the row's support. Each such row cuts out a face
//!   of the unit cube on which every point is norm preserved; `T − I` is
//!   affine there, so it vanishes on the face iff it vanishes at the face
//!   center and at the center moved along each free coordinate.
//! * diagonal `T`, any finite `p`: `‖Tx‖ = ‖x‖` iff `x` lives on the unit
//!   diagonal entries, so (W′) holds iff all of those equal `+1`.
//!
//! For other exponents a seeded search hunts for violations and reports
//! `inconclusive` when none is found.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{matvec, matvec_t, p_norm_ascent};
use crate::operator::{is_contraction, ContractionVerdict, LinearOperator, CONTRACTION_TOL};
use crate::rng;
use crate::space::{duality_map, lp_norm, support_face, Exponent, Functional, Vector};

/// Norm-equality tolerance for witnesses: `|‖Tx‖ − ‖x‖| ≤ NORM_EQUALITY_TOL`.
pub const NORM_EQUALITY_TOL: f64 = 1e-10;

/// Continuation levels for the constraint `‖Tx‖ ≥ 1 − δ`.
pub const SEARCH_DELTAS: [f64; 3] = [1e-2, 1e-4, 1e-6];

/// Restarts per continuation level in [`check_w_prime_numeric`].
pub const SEARCH_RESTARTS: usize = 20;

/// Restarts per word in [`semigroup_w_falsifier`].
pub const FALSIFIER_RESTARTS: usize = 4;

/// Norm gap below which a falsifier candidate counts as norm preserving.
pub const FALSIFIER_GAP: f64 = 1e-6;

/// Displacement above which a norm-preserving candidate is reported.
pub const FALSIFIER_DISPLACEMENT: f64 = 0.1;

/// Smallest displacement the numeric search will call a violation.
const SEARCH_MIN_DISPLACEMENT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WStatus {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WMethod {
    AlgebraicP2,
    SignEnumeration,
    Diagonal,
    /// `‖T‖ < 1` is certified, so no nonzero vector keeps its norm.
    StrictContraction,
    NumericSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    #[serde(rename = "W'")]
    WPrime,
    #[serde(rename = "W")]
    W,
}

/// Verdict of a (W′) or (W) check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WVerdict {
    pub status: WStatus,
    /// For `fails`: a unit vector with `‖Tx‖ = ‖x‖` (to
    /// [`NORM_EQUALITY_TOL`]) and `Tx ≠ x`.
    pub witness: Option<Vector>,
    /// `‖x − Tx‖` at the witness. For an inconclusive search, the largest
    /// displacement seen among norm-preserving candidates.
    pub gap: f64,
    pub method: WMethod,
    pub condition: Condition,
}

impl WVerdict {
    fn holds(method: WMethod) -> Self {
        Self {
            status: WStatus::Holds,
            witness: None,
            gap: 0.0,
            method,
            condition: Condition::WPrime,
        }
    }

    fn fails(witness: Vec<f64>, gap: f64, method: WMethod) -> Self {
        Self {
            status: WStatus::Fails,
            witness: Some(Vector::from_raw(witness)),
            gap,
            method,
            condition: Condition::WPrime,
        }
    }
}

fn require_contraction(t: &LinearOperator, index: usize) -> Result<()> {
    match is_contraction(t, CONTRACTION_TOL) {
        ContractionVerdict::Yes => Ok(()),
        _ => {
            let b = t.norm_bracket();
            Err(Error::NotContraction {
                index,
                lower: b.lower,
                upper: b.upper,
            })
        }
    }
}

/// Decides (W′) for a certified contraction. `tol` is the displacement
/// (in the space norm) below which a vector counts as fixed.
pub fn check_w_prime(t: &LinearOperator, tol: f64) -> Result<WVerdict> {
    check_w_prime_seeded(t, tol, 0)
}

/// [`check_w_prime`] with an explicit seed for the numeric route.
pub fn check_w_prime_seeded(t: &LinearOperator, tol: f64, seed: u64) -> Result<WVerdict> {
    require_contraction(t, 0)?;
    let p = t.space().p();
    let m = t.matrix();
    if p.is_two() {
        return Ok(algebraic_p2(m, tol));
    }
    if p.is_one() {
        return Ok(l1_columns(m, tol));
    }
    if p.is_infinite() {
        return Ok(linf_faces(m, tol));
    }
    if is_diagonal(m) {
        return Ok(diagonal_route(m, tol));
    }
    if t.norm_bracket().upper < 1.0 - NORM_EQUALITY_TOL {
        return Ok(WVerdict::holds(WMethod::StrictContraction));
    }
    check_w_prime_numeric(t, tol, seed)
}

/// Decides (W) by way of (W′); the two agree in finite dimensions.
pub fn check_w(t: &LinearOperator, tol: f64) -> Result<WVerdict> {
    let mut v = check_w_prime(t, tol)?;
    v.condition = Condition::W;
    Ok(v)
}

fn algebraic_p2(m: &DMatrix<f64>, tol: f64) -> WVerdict {
    let n = m.ncols();
    let eig = SymmetricEigen::new(m.transpose() * m);
    let cols: Vec<usize> = (0..n)
        .filter(|&i| eig.eigenvalues[i] >= 1.0 - NORM_EQUALITY_TOL)
        .collect();
    if cols.is_empty() {
        return WVerdict::holds(WMethod::AlgebraicP2);
    }
    let e = eig.eigenvectors.select_columns(&cols);
    let d = (m - DMatrix::identity(n, n)) * &e;
    let svd = SVD::new(d, false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let mut top = 0;
    for i in 1..svd.singular_values.len() {
        if svd.singular_values[i] > svd.singular_values[top] {
            top = i;
        }
    }
    let coeffs: Vec<f64> = vt.row(top).iter().copied().collect();
    let mut w: Vec<f64> = (0..n)
        .map(|i| (0..cols.len()).map(|k| e[(i, k)] * coeffs[k]).sum())
        .collect();
    let wn = lp_norm(&w, Exponent::TWO);
    w.iter_mut().for_each(|c| *c /= wn);
    let gap = displacement(m, &w, Exponent::TWO);
    if gap > tol {
        WVerdict::fails(w, gap, WMethod::AlgebraicP2)
    } else {
        WVerdict::holds(WMethod::AlgebraicP2)
    }
}

fn l1_columns(m: &DMatrix<f64>, tol: f64) -> WVerdict {
    let n = m.ncols();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for j in 0..n {
        let s: f64 = m.column(j).iter().map(|v| v.abs()).sum();
        if s < 1.0 - NORM_EQUALITY_TOL {
            continue;
        }
        let e = Vector::basis(n, j).into_coords();
        let gap = displacement(m, &e, Exponent::ONE);
        if gap > tol && best.as_ref().is_none_or(|b| gap > b.1) {
            best = Some((e, gap));
        }
    }
    match best {
        Some((w, gap)) => WVerdict::fails(w, gap, WMethod::SignEnumeration),
        None => WVerdict::holds(WMethod::SignEnumeration),
    }
}

fn linf_faces(m: &DMatrix<f64>, tol: f64) -> WVerdict {
    let n = m.ncols();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut consider = |x: Vec<f64>| {
        let gap = displacement(m, &x, Exponent::Infinity);
        if gap > tol && best.as_ref().is_none_or(|b| gap > b.1) {
            best = Some((x, gap));
        }
    };
    for k in 0..n {
        let row = m.row(k);
        let s: f64 = row.iter().map(|v| v.abs()).sum();
        if s < 1.0 - NORM_EQUALITY_TOL {
            continue;
        }
        let center: Vec<f64> = row
            .iter()
            .map(|&v| if v == 0.0 { 0.0 } else { v.signum() })
            .collect();
        consider(center.clone());
        for j in (0..n).filter(|&j| row[j] == 0.0) {
            for s in [1.0, -1.0] {
                let mut x = center.clone();
                x[j] = s;
                consider(x);
            }
        }
    }
    match best {
        Some((w, gap)) => WVerdict::fails(w, gap, WMethod::SignEnumeration),
        None => WVerdict::holds(WMethod::SignEnumeration),
    }
}

fn is_diagonal(m: &DMatrix<f64>) -> bool {
    let n = m.ncols();
    (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == 0.0))
}

fn diagonal_route(m: &DMatrix<f64>, tol: f64) -> WVerdict {
    let n = m.ncols();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for i in 0..n {
        let d = m[(i, i)];
        if d.abs() >= 1.0 - NORM_EQUALITY_TOL {
            let gap = (d - 1.0).abs();
            if gap > tol && best.as_ref().is_none_or(|b| gap > b.1) {
                best = Some((Vector::basis(n, i).into_coords(), gap));
            }
        }
    }
    match best {
        Some((w, gap)) => WVerdict::fails(w, gap, WMethod::Diagonal),
        None => WVerdict::holds(WMethod::Diagonal),
    }
}

fn displacement(m: &DMatrix<f64>, x: &[f64], p: Exponent) -> f64 {
    let tx = matvec(m, x);
    let d: Vec<f64> = x.iter().zip(&tx).map(|(a, b)| a - b).collect();
    lp_norm(&d, p)
}

/// A unit vector from the search, with `norm_gap = 1 − ‖Mx‖` and
/// `displacement = ‖x − Mx‖`.
#[derive(Debug, Clone)]
struct Candidate {
    x: Vec<f64>,
    norm_gap: f64,
    displacement: f64,
}

fn evaluate(m: &DMatrix<f64>, p: Exponent, x: &[f64]) -> Candidate {
    let n = lp_norm(x, p);
    let x: Vec<f64> = x.iter().map(|c| c / n).collect();
    let tx = matvec(m, &x);
    Candidate {
        norm_gap: 1.0 - lp_norm(&tx, p),
        displacement: lp_norm(
            &x.iter().zip(&tx).map(|(a, b)| a - b).collect::<Vec<_>>(),
            p,
        ),
        x,
    }
}

fn normalized(x: Vec<f64>, p: Exponent) -> Option<Vec<f64>> {
    let n = lp_norm(&x, p);
    (n > 0.0 && n.is_finite()).then(|| x.into_iter().map(|c| c / n).collect())
}

/// Gradient ascent of `‖x − Mx‖` over the unit sphere, keeping
/// `‖Mx‖ ≥ 1 − δ`, with backtracking.
fn displacement_ascent(m: &DMatrix<f64>, p: Exponent, x: Vec<f64>, delta: f64) -> Vec<f64> {
    let n = m.ncols();
    let im = DMatrix::identity(n, n) - m;
    let mut x = x;
    let mut d = lp_norm(&matvec(&im, &x), p);
    let mut eta = 0.5;
    for _ in 0..200 {
        let r = matvec(&im, &x);
        let g = matvec_t(&im, &duality_map(&r, p));
        if lp_norm(&g, Exponent::TWO) == 0.0 {
            break;
        }
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + eta * b).collect();
            if let Some(y) = normalized(trial, p) {
                let ty = lp_norm(&matvec(m, &y), p);
                let dy = lp_norm(&matvec(&im, &y), p);
                if ty >= 1.0 - delta && dy > d {
                    x = y;
                    d = dy;
                    accepted = true;
                    eta = (eta * 2.0).min(1.0);
                    break;
                }
            }
            eta *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    x
}

/// One seeded restart through all continuation levels.
fn search_restart(m: &DMatrix<f64>, p: Exponent, rng: &mut ChaCha8Rng) -> Vec<Candidate> {
    let n = m.ncols();
    let mut out = Vec::new();
    let Some(mut x) = normalized(rng::gaussian_vec(rng, n), p) else {
        return out;
    };
    for delta in SEARCH_DELTAS {
        if 1.0 - lp_norm(&matvec(m, &x), p) > delta {
            x = p_norm_ascent(m, p, &x, 500).1;
            if 1.0 - lp_norm(&matvec(m, &x), p) > delta {
                break;
            }
        }
        x = displacement_ascent(m, p, x, delta);
        out.push(evaluate(m, p, &x));
        let polished = p_norm_ascent(m, p, &x, 1000).1;
        out.push(evaluate(m, p, &polished));
    }
    out
}

fn search_candidates(
    m: &DMatrix<f64>,
    p: Exponent,
    seed: u64,
    family: u64,
    base_index: u64,
    restarts: usize,
) -> Vec<Candidate> {
    let per_restart: Vec<Vec<Candidate>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut g = rng::substream(seed, family, base_index * restarts as u64 + r as u64);
            search_restart(m, p, &mut g)
        })
        .collect();
    per_restart.into_iter().flatten().collect()
}

/// Falsification-only search for a (W′) violation, usable for any `p`.
/// Returns `fails` with a witness or `inconclusive`, never `holds`.
pub fn check_w_prime_numeric(t: &LinearOperator, tol: f64, seed: u64) -> Result<WVerdict> {
    require_contraction(t, 0)?;
    let p = t.space().p();
    let cands = search_candidates(t.matrix(), p, seed, rng::SEARCH, 0, SEARCH_RESTARTS);
    let mut best: Option<&Candidate> = None;
    let mut seen = 0.0f64;
    for c in &cands {
        if c.norm_gap.abs() > NORM_EQUALITY_TOL {
            continue;
        }
        seen = seen.max(c.displacement);
        // Near a fixed direction the displacement can shrink like the square
        // root of the norm gap, so a tiny but nonzero gap must come with a
        // displacement well above that scale.
        let threshold = tol
            .max(SEARCH_MIN_DISPLACEMENT)
            .max(100.0 * c.norm_gap.abs().sqrt());
        if c.displacement > threshold && best.is_none_or(|b| c.displacement > b.displacement) {
            best = Some(c);
        }
    }
    Ok(match best {
        Some(c) => WVerdict::fails(c.x.clone(), c.displacement, WMethod::NumericSearch),
        None => WVerdict {
            status: WStatus::Inconclusive,
            witness: None,
            gap: seen,
            method: WMethod::NumericSearch,
            condition: Condition::WPrime,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FalsifierHint {
    NoViolationFound,
    CandidateViolation,
}

/// Best pair `(word, x)` found by [`semigroup_w_falsifier`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FalsifierReport {
    /// Generator indices (0-based) in application order: `best_word[0]`
    /// acts first.
    pub best_word: Vec<usize>,
    pub best_x: Vector,
    /// `‖x‖ − ‖Wx‖` with `‖x‖ = 1`.
    pub norm_gap: f64,
    /// `‖x − Wx‖`.
    pub displacement: f64,
    pub verdict_hint: FalsifierHint,
    pub words_searched: usize,
}

/// Words over `n` letters in shortlex order, lengths `1..=max_len`, at most
/// `budget` of them.
pub fn shortlex_words(n: usize, max_len: usize, budget: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    'outer: for len in 1..=max_len {
        let mut w = vec![0usize; len];
        loop {
            if out.len() >= budget {
                break 'outer;
            }
            out.push(w.clone());
            let mut k = len;
            loop {
                if k == 0 {
                    continue 'outer;
                }
                k -= 1;
                w[k] += 1;
                if w[k] < n {
                    break;
                }
                w[k] = 0;
            }
        }
    }
    out
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    let (qa, qb) = (a.norm_gap < FALSIFIER_GAP, b.norm_gap < FALSIFIER_GAP);
    match (qa, qb) {
        (true, false) => true,
        (false, true) => false,
        (true, true) => a.displacement > b.displacement,
        (false, false) => a.norm_gap < b.norm_gap,
    }
}

/// Searches words of the semigroup generated by `ops` for a vector whose
/// norm is (nearly) preserved but which moves by a lot. This hunts for
/// counterexamples to the semigroup form of (W); finding none is evidence,
/// not proof.
pub fn semigroup_w_falsifier(
    ops: &[LinearOperator],
    max_word_len: usize,
    budget: usize,
    seed: u64,
) -> Result<FalsifierReport> {
    let first = ops.first().ok_or(Error::EmptyOperators)?;
    for (i, t) in ops.iter().enumerate() {
        if t.space() != first.space() {
            return Err(Error::SpaceMismatch);
        }
        require_contraction(t, i)?;
    }
    let p = first.space().p();
    let words = shortlex_words(ops.len(), max_word_len, budget);
    if words.is_empty() {
        return Err(Error::Invalid(
            "falsifier needs max_word_len ≥ 1 and budget ≥ 1".into(),
        ));
    }
    let per_word: Vec<Candidate> = words
        .par_iter()
        .enumerate()
        .map(|(wi, word)| {
            let mut m = ops[word[0]].matrix().clone();
            for &k in &word[1..] {
                m = ops[k].matrix() * m;
            }
            let mut cands =
                search_candidates(&m, p, seed, rng::FALSIFIER, wi as u64, FALSIFIER_RESTARTS);
            if p.is_one() || p.is_two() || p.is_infinite() {
                let fallback = first.space();
                if let Ok(w) = LinearOperator::new(m.clone(), fallback) {
                    if let Ok(v) = check_w_prime(&w, NORM_EQUALITY_TOL) {
                        if let Some(x) = v.witness {
                            cands.push(evaluate(&m, p, x.coords()));
                        }
                    }
                }
            }
            let mut best = cands
                .first()
                .cloned()
                .unwrap_or_else(|| evaluate(&m, p, &Vector::basis(m.ncols(), 0).into_coords()));
            for c in &cands[1.min(cands.len())..] {
                if better(c, &best) {
                    best = c.clone();
                }
            }
            best
        })
        .collect();
    let mut bi = 0;
    for i in 1..per_word.len() {
        if better(&per_word[i], &per_word[bi]) {
            bi = i;
        }
    }
    let best = &per_word[bi];
    let hint = if best.displacement > FALSIFIER_DISPLACEMENT && best.norm_gap < FALSIFIER_GAP {
        FalsifierHint::CandidateViolation
    } else {
        FalsifierHint::NoViolationFound
    };
    Ok(FalsifierReport {
        best_word: words[bi].clone(),
        best_x: Vector::from_raw(best.x.clone()),
        norm_gap: best.norm_gap,
        displacement: best.displacement,
        verdict_hint: hint,
        words_searched: words.len(),
    })
}

/// Result of [`adjoint_support_invariance`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportInvariance {
    /// `T*` maps every tested functional of `J(y)` back into `J(y)`.
    pub face_preserved: bool,
    /// `T*f = f` for every tested functional.
    pub pointwise_fixed: bool,
    /// `T*f` for the first tested `f` that broke a property, otherwise for
    /// the base functional.
    pub sample: Functional,
    pub tested: usize,
}

/// Tests how the adjoint of `T` acts on the support face of a fixed vector
/// `y`. The base functional and every vertex of a polyhedral face are
/// tested; by linearity that covers the whole face.
pub fn adjoint_support_invariance(
    t: &LinearOperator,
    y: &Vector,
    tol: f64,
) -> Result<SupportInvariance> {
    let s = t.space();
    let ny = s.norm(y)?;
    if ny == 0.0 {
        return Err(Error::ZeroVector);
    }
    let resid = s.distance(&t.apply(y)?, y)? / ny;
    if resid > tol {
        return Err(Error::NotFixed(resid));
    }
    let face = support_face(y, &s)?;
    let mut points = vec![face.base().clone()];
    if face.affine_dim() > 0 {
        points.extend(face.vertices()?);
    }
    let q = s.p().conjugate();
    let mut face_preserved = true;
    let mut pointwise_fixed = true;
    let mut sample = None;
    for f in &points {
        let g = Functional::from_raw(matvec_t(t.matrix(), f.coords()), q);
        let inside = face.contains(&g, tol)?;
        let fixed = g.max_abs_diff(f)? <= tol;
        face_preserved &= inside;
        pointwise_fixed &= fixed;
        if sample.is_none() && !(inside && fixed) {
            sample = Some(g);
        }
    }
    let sample = sample
        .unwrap_or_else(|| Functional::from_raw(matvec_t(t.matrix(), face.base().coords()), q));
    Ok(SupportInvariance {
        face_preserved,
        pointwise_fixed,
        sample,
        tested: points.len(),
    })
}
