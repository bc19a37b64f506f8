//! Finite-dimensional ℓ_p spaces.
//!
//! A [`NormSpec`] fixes the dimension and the exponent `p ∈ [1, ∞]`. Its dual
//! is identified with ℓ_q of the same dimension, `1/p + 1/q = 1`, so a
//! [`Functional`] is a plain coordinate vector tagged with the dual exponent.
//!
//! [`support_face`] returns the full set of norming functionals of a nonzero
//! vector, `J(x) = {f : ‖f‖_q = 1, f(x) = ‖x‖_p}`, in closed form:
//!
//! * `1 < p < ∞`: the space is smooth and `J(x)` is a single point;
//! * `p = 1`: a box, coordinates pinned to `sign(x_i)` off the zero set and
//!   free in `[-1, 1]` on it;
//! * `p = ∞`: a simplex spanned by the signed unit vectors on the set where
//!   `|x_i|` attains the maximum.
//!
//! Every face is a compact polytope (or a point), which is what the
//! convergence theory built on top of this module requires of the space.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_dim, Error, Result};

/// Relative threshold under which a coordinate counts as zero (p = 1) or as
/// tied with the maximum (p = ∞) when building support faces.
pub const FACE_TOL: f64 = 1e-12;

/// Upper bound on the number of free coordinates of a box face whose
/// vertices may be enumerated.
pub const MAX_FACE_FREE_COORDS: usize = 20;

/// Exponent of an ℓ_p norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub const ONE: Exponent = Exponent::Finite(1.0);
    pub const TWO: Exponent = Exponent::Finite(2.0);

    /// Validates `p >= 1`; `f64::INFINITY` maps to [`Exponent::Infinity`].
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    /// Hölder conjugate: `1 ↔ ∞`, otherwise `p / (p - 1)`.
    pub fn conjugate(self) -> Self {
        match self {
            Exponent::Infinity => Exponent::ONE,
            Exponent::Finite(1.0) => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_one(self) -> bool {
        self == Exponent::ONE
    }

    pub fn is_two(self) -> bool {
        self == Exponent::TWO
    }

    pub fn is_infinite(self) -> bool {
        self == Exponent::Infinity
    }

    /// `1 < p < ∞`: the unit sphere is smooth and strictly convex.
    pub fn is_smooth(self) -> bool {
        matches!(self, Exponent::Finite(p) if p > 1.0)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let p = match Raw::deserialize(d)? {
            Raw::Num(p) => p,
            Raw::Text(t) => match t.trim() {
                "inf" | "infinity" | "Infinity" | "∞" => f64::INFINITY,
                other => other.parse::<f64>().map_err(serde::de::Error::custom)?,
            },
        };
        Exponent::new(p).map_err(serde::de::Error::custom)
    }
}

/// A finite-dimensional ℓ_p space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    dim: usize,
    p: Exponent,
}

impl NormSpec {
    pub fn new(dim: usize, p: Exponent) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("dimension must be positive".into()));
        }
        Ok(Self { dim, p })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    /// The dual space, ℓ_q with the conjugate exponent.
    pub fn dual(&self) -> NormSpec {
        NormSpec {
            dim: self.dim,
            p: self.p.conjugate(),
        }
    }

    pub fn norm(&self, v: &Vector) -> Result<f64> {
        norm(v, self)
    }

    /// Distance `‖a - b‖` in this norm.
    pub fn distance(&self, a: &Vector, b: &Vector) -> Result<f64> {
        check_dim(self.dim, a.dim())?;
        check_dim(self.dim, b.dim())?;
        let diff: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
        Ok(lp_norm(&diff, self.p))
    }
}

/// A point of ℝⁿ with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Vector {
    coords: Vec<f64>,
}

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Invalid(
                "vector must have at least one coordinate".into(),
            ));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { coords })
    }

    /// Internal constructor for results of arithmetic on valid vectors.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Self { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            coords: vec![0.0; dim],
        }
    }

    /// The `i`-th standard basis vector (0-based).
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut coords = vec![0.0; dim];
        coords[i] = 1.0;
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.coords.iter()
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0.0)
    }

    pub fn scaled(&self, s: f64) -> Vector {
        Vector::from_raw(self.coords.iter().map(|c| c * s).collect())
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        check_dim(self.dim(), other.dim())?;
        Ok(Vector::from_raw(
            self.iter().zip(other.iter()).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        check_dim(self.dim(), other.dim())?;
        Ok(Vector::from_raw(
            self.iter().zip(other.iter()).map(|(a, b)| a + b).collect(),
        ))
    }

    /// Euclidean length, used for coordinate geometry (subspace distances).
    pub fn euclidean_norm(&self) -> f64 {
        lp_norm(&self.coords, Exponent::TWO)
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let coords = Vec::<f64>::deserialize(d)?;
        Vector::new(coords).map_err(serde::de::Error::custom)
    }
}

/// A linear functional on ℓ_p, stored as coordinates in the dual ℓ_q.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Functional {
    coords: Vec<f64>,
    dual_p: Exponent,
}

impl Functional {
    pub fn new(coords: Vec<f64>, dual_p: Exponent) -> Result<Self> {
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { coords, dual_p })
    }

    pub(crate) fn from_raw(coords: Vec<f64>, dual_p: Exponent) -> Self {
        Self { coords, dual_p }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Exponent of the space the functional lives in (the conjugate of the
    /// primal exponent).
    pub fn dual_p(&self) -> Exponent {
        self.dual_p
    }

    pub fn dual_norm(&self) -> f64 {
        lp_norm(&self.coords, self.dual_p)
    }

    /// View the functional as a vector of the dual space.
    pub fn to_vector(&self) -> Vector {
        Vector::from_raw(self.coords.clone())
    }

    /// Largest coordinate difference, `‖self - other‖_∞`.
    pub fn max_abs_diff(&self, other: &Functional) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// ℓ_p norm of a raw coordinate slice. Rescales by the largest magnitude so
/// large exponents neither overflow nor underflow.
pub(crate) fn lp_norm(x: &[f64], p: Exponent) -> f64 {
    match p {
        Exponent::Infinity => x.iter().fold(0.0, |m, c| m.max(c.abs())),
        Exponent::Finite(1.0) => x.iter().map(|c| c.abs()).sum(),
        Exponent::Finite(p) => {
            let scale = x.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            if scale == 0.0 {
                return 0.0;
            }
            let s: f64 = if p == 2.0 {
                x.iter().map(|c| (c / scale) * (c / scale)).sum()
            } else {
                x.iter().map(|c| (c.abs() / scale).powf(p)).sum()
            };
            scale * s.powf(1.0 / p)
        }
    }
}

/// The canonical norming functional of a nonzero `x`: the single element of
/// `J(x)` for smooth exponents, the box center for `p = 1`, and the
/// barycenter of the simplex for `p = ∞`. Returns zeros for `x = 0`.
pub(crate) fn duality_map(x: &[f64], p: Exponent) -> Vec<f64> {
    let max = x.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if max == 0.0 {
        return vec![0.0; x.len()];
    }
    match p {
        Exponent::Finite(1.0) => x
            .iter()
            .map(|&c| {
                if c.abs() <= FACE_TOL * max {
                    0.0
                } else {
                    c.signum()
                }
            })
            .collect(),
        Exponent::Infinity => {
            let support: Vec<usize> = argmax_set(x, max);
            let w = 1.0 / support.len() as f64;
            let mut f = vec![0.0; x.len()];
            for i in support {
                f[i] = x[i].signum() * w;
            }
            f
        }
        Exponent::Finite(p) => {
            let n = lp_norm(x, Exponent::Finite(p));
            if p == 2.0 {
                x.iter().map(|c| c / n).collect()
            } else {
                x.iter()
                    .map(|&c| c.signum() * (c.abs() / n).powf(p - 1.0))
                    .collect()
            }
        }
    }
}

fn argmax_set(x: &[f64], max: f64) -> Vec<usize> {
    (0..x.len())
        .filter(|&i| x[i].abs() >= max * (1.0 - FACE_TOL))
        .collect()
}

/// `‖v‖_p`.
pub fn norm(v: &Vector, s: &NormSpec) -> Result<f64> {
    check_dim(s.dim(), v.dim())?;
    Ok(lp_norm(v.coords(), s.p()))
}

/// The duality pairing `f(v) = Σ f_i v_i`.
pub fn pair(f: &Functional, v: &Vector) -> Result<f64> {
    check_dim(f.dim(), v.dim())?;
    Ok(f.coords.iter().zip(v.iter()).map(|(a, b)| a * b).sum())
}

/// One free coordinate of a box face and its admissible interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeCoordinate {
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceKind {
    Singleton,
    Box,
    Simplex,
}

/// Geometry of a support face relative to its base functional.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceShape {
    Singleton,
    /// Base coordinates are pinned except on `free`, where each coordinate
    /// ranges over its interval.
    Box {
        free: Vec<FreeCoordinate>,
    },
    /// Convex hull of `signs[k] · e_{support[k]}`.
    Simplex {
        support: Vec<usize>,
        signs: Vec<f64>,
    },
}

/// The set `J(x)` of norm-one functionals attaining `‖x‖` at `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportFace {
    base: Functional,
    shape: FaceShape,
}

impl SupportFace {
    pub fn kind(&self) -> FaceKind {
        match self.shape {
            FaceShape::Singleton => FaceKind::Singleton,
            FaceShape::Box { .. } => FaceKind::Box,
            FaceShape::Simplex { .. } => FaceKind::Simplex,
        }
    }

    /// Canonical representative: the point itself, the box center, or the
    /// simplex barycenter.
    pub fn base(&self) -> &Functional {
        &self.base
    }

    pub fn shape(&self) -> &FaceShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Affine dimension of the face.
    pub fn affine_dim(&self) -> usize {
        match &self.shape {
            FaceShape::Singleton => 0,
            FaceShape::Box { free } => free.len(),
            FaceShape::Simplex { support, .. } => support.len() - 1,
        }
    }

    /// All extreme points of the face.
    pub fn vertices(&self) -> Result<Vec<Functional>> {
        let q = self.base.dual_p;
        match &self.shape {
            FaceShape::Singleton => Ok(vec![self.base.clone()]),
            FaceShape::Box { free } => {
                if free.len() > MAX_FACE_FREE_COORDS {
                    return Err(Error::FaceTooLarge(free.len()));
                }
                let mut out = Vec::with_capacity(1 << free.len());
                for mask in 0u64..(1u64 << free.len()) {
                    let mut c = self.base.coords.clone();
                    for (k, fc) in free.iter().enumerate() {
                        c[fc.index] = if mask >> k & 1 == 1 { fc.hi } else { fc.lo };
                    }
                    out.push(Functional::from_raw(c, q));
                }
                Ok(out)
            }
            FaceShape::Simplex { support, signs } => Ok(support
                .iter()
                .zip(signs)
                .map(|(&i, &s)| {
                    let mut c = vec![0.0; self.dim()];
                    c[i] = s;
                    Functional::from_raw(c, q)
                })
                .collect()),
        }
    }

    /// Whether `f` satisfies every defining constraint of the face within
    /// `tol`.
    pub fn contains(&self, f: &Functional, tol: f64) -> Result<bool> {
        check_dim(self.dim(), f.dim())?;
        let base = &self.base.coords;
        let fc = &f.coords;
        Ok(match &self.shape {
            FaceShape::Singleton => fc.iter().zip(base).all(|(a, b)| (a - b).abs() <= tol),
            FaceShape::Box { free } => {
                let mut is_free = vec![None; fc.len()];
                for c in free {
                    is_free[c.index] = Some((c.lo, c.hi));
                }
                (0..fc.len()).all(|i| match is_free[i] {
                    Some((lo, hi)) => fc[i] >= lo - tol && fc[i] <= hi + tol,
                    None => (fc[i] - base[i]).abs() <= tol,
                })
            }
            FaceShape::Simplex { support, signs } => {
                let mut sign_of = vec![0.0; fc.len()];
                for (&i, &s) in support.iter().zip(signs) {
                    sign_of[i] = s;
                }
                let mut total = 0.0;
                let mut ok = true;
                for i in 0..fc.len() {
                    if sign_of[i] == 0.0 {
                        ok &= fc[i].abs() <= tol;
                    } else {
                        let w = sign_of[i] * fc[i];
                        ok &= w >= -tol;
                        total += w;
                    }
                }
                ok && (total - 1.0).abs() <= tol
            }
        })
    }
}

/// The exact support set `J(v)` of a nonzero vector.
pub fn support_face(v: &Vector, s: &NormSpec) -> Result<SupportFace> {
    check_dim(s.dim(), v.dim())?;
    let x = v.coords();
    let max = x.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if max == 0.0 {
        return Err(Error::ZeroVector);
    }
    let q = s.p().conjugate();
    let base = Functional::from_raw(duality_map(x, s.p()), q);
    let shape = match s.p() {
        Exponent::Infinity => {
            let support = argmax_set(x, max);
            if support.len() == 1 {
                FaceShape::Singleton
            } else {
                let signs = support.iter().map(|&i| x[i].signum()).collect();
                FaceShape::Simplex { support, signs }
            }
        }
        p if p.is_one() => {
            let free: Vec<FreeCoordinate> = (0..x.len())
                .filter(|&i| x[i].abs() <= FACE_TOL * max)
                .map(|index| FreeCoordinate {
                    index,
                    lo: -1.0,
                    hi: 1.0,
                })
                .collect();
            if free.is_empty() {
                FaceShape::Singleton
            } else {
                FaceShape::Box { free }
            }
        }
        _ => FaceShape::Singleton,
    };
    Ok(SupportFace { base, shape })
}

/// Free-function form of [`SupportFace::contains`].
pub fn face_contains(face: &SupportFace, f: &Functional, tol: f64) -> Result<bool> {
    face.contains(f, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn spec(dim: usize, p: f64) -> NormSpec {
        NormSpec::new(dim, Exponent::new(p).unwrap()).unwrap()
    }

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm(&v(&[3.0, 4.0]), &spec(2, 2.0)).unwrap(), 5.0);
        assert_eq!(norm(&v(&[1.0, -2.0]), &spec(2, 1.0)).unwrap(), 3.0);
        assert_eq!(
            norm(&v(&[1.0, -2.0]), &spec(2, f64::INFINITY)).unwrap(),
            2.0
        );
        assert_eq!(norm(&Vector::zeros(3), &spec(3, 3.5)).unwrap(), 0.0);
    }

    #[test]
    fn norm_rejects_bad_input() {
        assert_eq!(
            norm(&v(&[1.0, 2.0]), &spec(3, 2.0)),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 2
            })
        );
        assert_eq!(Vector::new(vec![1.0, f64::NAN]), Err(Error::NonFinite(1)));
        assert!(Exponent::new(0.5).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
    }

    #[test]
    fn conjugate_exponents() {
        assert_eq!(Exponent::ONE.conjugate(), Exponent::Infinity);
        assert_eq!(Exponent::Infinity.conjugate(), Exponent::ONE);
        assert_eq!(Exponent::TWO.conjugate(), Exponent::TWO);
        assert_eq!(Exponent::Finite(3.0).conjugate(), Exponent::Finite(1.5));
    }

    #[test]
    fn pair_examples() {
        let q = Exponent::Infinity;
        let f = Functional::new(vec![1.0, -1.0], q).unwrap();
        assert_eq!(pair(&f, &v(&[1.0, -2.0])).unwrap(), 3.0);
        let zero = Functional::new(vec![0.0, 0.0], q).unwrap();
        assert_eq!(pair(&zero, &v(&[7.0, -2.0])).unwrap(), 0.0);
        let g = Functional::new(vec![0.6, 0.8], Exponent::TWO).unwrap();
        assert_abs_diff_eq!(pair(&g, &v(&[3.0, 4.0])).unwrap(), 5.0, epsilon = 1e-15);
    }

    #[test]
    fn euclidean_face_is_normalized_vector() {
        let face = support_face(&v(&[3.0, 4.0]), &spec(2, 2.0)).unwrap();
        assert_eq!(face.kind(), FaceKind::Singleton);
        assert_abs_diff_eq!(face.base().coords()[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(face.base().coords()[1], 0.8, epsilon = 1e-15);
        let f = Functional::new(vec![0.6, 0.8], Exponent::TWO).unwrap();
        assert!(face.contains(&f, 1e-12).unwrap());
    }

    #[test]
    fn l1_face_of_basis_vector_is_a_box() {
        // f·e1 = f_1 = 1 with |f_2| <= 1 leaves f_2 free.
        let face = support_face(&v(&[1.0, 0.0]), &spec(2, 1.0)).unwrap();
        assert_eq!(face.kind(), FaceKind::Box);
        assert_eq!(face.base().coords(), &[1.0, 0.0]);
        assert_eq!(
            face.shape(),
            &FaceShape::Box {
                free: vec![FreeCoordinate {
                    index: 1,
                    lo: -1.0,
                    hi: 1.0
                }]
            }
        );
        let q = Exponent::Infinity;
        let inside = Functional::new(vec![1.0, 0.5], q).unwrap();
        let outside = Functional::new(vec![1.0, 2.0], q).unwrap();
        assert!(face.contains(&inside, 1e-12).unwrap());
        assert!(!face.contains(&outside, 1e-12).unwrap());
        let verts = face.vertices().unwrap();
        assert_eq!(verts.len(), 2);
        assert_eq!(verts[0].coords(), &[1.0, -1.0]);
        assert_eq!(verts[1].coords(), &[1.0, 1.0]);
    }

    #[test]
    fn linf_face_of_tied_vector_is_a_simplex() {
        // 2 f_1 + 2 f_2 = 2 with |f_1| + |f_2| = 1 forces f = (t, 1 - t).
        let face = support_face(&v(&[2.0, 2.0]), &spec(2, f64::INFINITY)).unwrap();
        assert_eq!(face.kind(), FaceKind::Simplex);
        assert_eq!(face.base().coords(), &[0.5, 0.5]);
        assert_eq!(face.affine_dim(), 1);
        let q = Exponent::ONE;
        for t in [0.0, 0.25, 1.0] {
            let f = Functional::new(vec![t, 1.0 - t], q).unwrap();
            assert!(face.contains(&f, 1e-12).unwrap());
        }
        let off = Functional::new(vec![-0.5, 1.5], q).unwrap();
        assert!(!face.contains(&off, 1e-12).unwrap());
    }

    #[test]
    fn linf_face_respects_signs() {
        let face = support_face(&v(&[-3.0, 1.0, 3.0]), &spec(3, f64::INFINITY)).unwrap();
        let verts = face.vertices().unwrap();
        assert_eq!(verts.len(), 2);
        assert_eq!(verts[0].coords(), &[-1.0, 0.0, 0.0]);
        assert_eq!(verts[1].coords(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn zero_vector_has_no_face() {
        assert_eq!(
            support_face(&Vector::zeros(2), &spec(2, 2.0)),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn large_exponent_does_not_overflow() {
        let s = spec(3, 400.0);
        let x = v(&[1e3, -2e3, 5e2]);
        let n = norm(&x, &s).unwrap();
        assert!((2e3..2.01e3).contains(&n));
        let face = support_face(&x, &s).unwrap();
        assert_abs_diff_eq!(face.base().dual_norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(pair(face.base(), &x).unwrap(), n, epsilon = 1e-9);
    }

    fn exponent() -> impl Strategy<Value = Exponent> {
        prop_oneof![
            Just(Exponent::ONE),
            Just(Exponent::TWO),
            Just(Exponent::Infinity),
            (1.05f64..8.0).prop_map(Exponent::Finite),
        ]
    }

    fn coords(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, dim)
    }

    proptest! {
        #[test]
        fn face_members_attain_the_norm(
            p in exponent(),
            (x, weights) in (1usize..6).prop_flat_map(|d| (coords(d), proptest::collection::vec(1e-3f64..1.0, 64))),
        ) {
            let s = NormSpec::new(x.len(), p).unwrap();
            let x = Vector::new(x).unwrap();
            prop_assume!(!x.is_zero());
            let n = norm(&x, &s).unwrap();
            let face = support_face(&x, &s).unwrap();
            let verts = face.vertices().unwrap();
            let total: f64 = weights.iter().take(verts.len()).sum();
            let mut mix = vec![0.0; x.dim()];
            for (vert, w) in verts.iter().zip(&weights) {
                for (m, vi) in mix.iter_mut().zip(vert.coords()) {
                    *m += vi * w / total;
                }
            }
            let mut members = verts.clone();
            members.push(face.base().clone());
            members.push(Functional::new(mix, p.conjugate()).unwrap());
            for f in &members {
                prop_assert!(face.contains(f, 1e-9).unwrap());
                prop_assert!((f.dual_norm() - 1.0).abs() <= 1e-12);
                prop_assert!((pair(f, &x).unwrap() - n).abs() <= 1e-12 * n.max(1.0));
            }
        }

        #[test]
        fn norm_axioms(
            p in exponent(),
            (a, b) in (1usize..7).prop_flat_map(|d| (coords(d), coords(d))),
            t in -5.0f64..5.0,
        ) {
            let s = NormSpec::new(a.len(), p).unwrap();
            let a = Vector::new(a).unwrap();
            let b = Vector::new(b).unwrap();
            let na = norm(&a, &s).unwrap();
            let nb = norm(&b, &s).unwrap();
            let nab = norm(&a.add(&b).unwrap(), &s).unwrap();
            prop_assert!(nab <= na + nb + 1e-12 * (na + nb).max(1.0));
            let nta = norm(&a.scaled(t), &s).unwrap();
            prop_assert!((nta - t.abs() * na).abs() <= 1e-12 * na.max(1.0) * t.abs().max(1.0));
        }

        #[test]
        fn smooth_exponents_give_singletons(
            p in 1.05f64..8.0,
            x in (1usize..6).prop_flat_map(coords),
        ) {
            let x = Vector::new(x).unwrap();
            prop_assume!(!x.is_zero());
            let s = NormSpec::new(x.dim(), Exponent::Finite(p)).unwrap();
            prop_assert_eq!(support_face(&x, &s).unwrap().kind(), FaceKind::Singleton);
        }
    }

    #[test]
    fn nonsmooth_faces_have_positive_dimension() {
        let l1 = support_face(&v(&[1.0, 0.0, -2.0]), &spec(3, 1.0)).unwrap();
        assert_eq!(l1.affine_dim(), 1);
        let linf = support_face(&v(&[5.0, -5.0, 5.0]), &spec(3, f64::INFINITY)).unwrap();
        assert_eq!(linf.affine_dim(), 2);
    }

    #[test]
    fn exponent_serde() {
        let p: Exponent = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(p, Exponent::Infinity);
        let p: Exponent = serde_json::from_str("3").unwrap();
        assert_eq!(p, Exponent::Finite(3.0));
        assert_eq!(
            serde_json::to_string(&Exponent::Infinity).unwrap(),
            "\"inf\""
        );
        assert!(serde_json::from_str::<Exponent>("0.5").is_err());
    }
}
