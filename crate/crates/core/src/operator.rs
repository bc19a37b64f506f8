//! Dense linear operators on ℓ_p spaces.
//!
//! The induced norm is carried as a certified bracket `[lower, upper]`. It is
//! exact (collapsed up to rounding) for `p ∈ {1, 2, ∞}`; for other exponents
//! the lower end is an attained value found by multi-start ascent and the
//! upper end comes from Riesz–Thorin interpolation, so callers branch on
//! [`ContractionVerdict`] rather than on a single estimate.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    kernel_basis, matvec, max_col_sum, max_row_sum, orthonormalize, p_norm_ascent, spectral_bracket,
};
use crate::rng;
use crate::space::{Exponent, NormSpec, Vector};

/// Default relative tolerance for numerical kernels.
pub const DEFAULT_KERNEL_TOL: f64 = 1e-10;

/// Slack allowed above 1 when certifying `‖T‖ ≤ 1` as a precondition.
pub const CONTRACTION_TOL: f64 = 1e-10;

/// Number of random starts used by the general-p norm ascent, on top of the
/// coordinate vectors and the all-ones vector.
pub const NORM_ASCENT_RANDOM_STARTS: usize = 24;

/// Certified bracket for an induced operator norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
    /// Unit vector at which `‖Tx‖ = lower` was attained.
    pub witness: Vector,
}

impl NormBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// A square real matrix acting on a fixed ℓ_p space.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    matrix: DMatrix<f64>,
    space: NormSpec,
    bracket: NormBracket,
}

impl LinearOperator {
    pub fn new(matrix: DMatrix<f64>, space: NormSpec) -> Result<Self> {
        check_dim(space.dim(), matrix.nrows())?;
        check_dim(space.dim(), matrix.ncols())?;
        if let Some(i) = matrix.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let bracket = compute_bracket(&matrix, space.p());
        Ok(Self {
            matrix,
            space,
            bracket,
        })
    }

    /// Builds an operator from row-major entries.
    pub fn from_rows(rows: &[Vec<f64>], space: NormSpec) -> Result<Self> {
        check_dim(space.dim(), rows.len())?;
        for r in rows {
            check_dim(space.dim(), r.len())?;
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(
            DMatrix::from_row_slice(space.dim(), space.dim(), &flat),
            space,
        )
    }

    pub fn identity(space: NormSpec) -> Self {
        Self::new(DMatrix::identity(space.dim(), space.dim()), space)
            .expect("identity is well formed")
    }

    pub fn diagonal(entries: &[f64], space: NormSpec) -> Result<Self> {
        check_dim(space.dim(), entries.len())?;
        Self::new(
            DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries)),
            space,
        )
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn space(&self) -> NormSpec {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn norm_bracket(&self) -> &NormBracket {
        &self.bracket
    }

    /// Row-major copy of the entries.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.matrix.row(i).iter().copied().collect())
            .collect()
    }

    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        check_dim(self.dim(), v.dim())?;
        Ok(Vector::from_raw(matvec(&self.matrix, v.coords())))
    }

    /// The Banach adjoint: the transpose acting on the dual space ℓ_q.
    pub fn adjoint(&self) -> LinearOperator {
        let matrix = self.matrix.transpose();
        let space = self.space.dual();
        let mut bracket = compute_bracket(&matrix, space.p());
        // ‖T*‖ = ‖T‖, so the primal upper bound also applies.
        bracket.upper = bracket.upper.min(self.bracket.upper).max(bracket.lower);
        LinearOperator {
            matrix,
            space,
            bracket,
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &LinearOperator) -> Result<LinearOperator> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        LinearOperator::new(&self.matrix * &other.matrix, self.space)
    }

    /// `T − I` as a raw matrix.
    pub(crate) fn minus_identity(&self) -> DMatrix<f64> {
        &self.matrix - DMatrix::identity(self.dim(), self.dim())
    }
}

fn compute_bracket(m: &DMatrix<f64>, p: Exponent) -> NormBracket {
    let n = m.ncols();
    match p {
        Exponent::Infinity => {
            let (s, i) = max_row_sum(m);
            let w: Vec<f64> = m
                .row(i)
                .iter()
                .map(|&v| if v < 0.0 { -1.0 } else { 1.0 })
                .collect();
            NormBracket {
                lower: s,
                upper: s,
                witness: Vector::from_raw(w),
            }
        }
        p if p.is_one() => {
            let (s, j) = max_col_sum(m);
            NormBracket {
                lower: s,
                upper: s,
                witness: Vector::basis(n, j),
            }
        }
        p if p.is_two() => {
            let (lower, upper, v) = spectral_bracket(m);
            NormBracket {
                lower,
                upper,
                witness: Vector::from_raw(v),
            }
        }
        p => {
            let mut starts: Vec<Vec<f64>> =
                (0..n).map(|i| Vector::basis(n, i).into_coords()).collect();
            starts.push(vec![1.0; n]);
            let mut r = rng::stream(0, rng::NORM_ASCENT);
            for _ in 0..NORM_ASCENT_RANDOM_STARTS {
                starts.push(rng::gaussian_vec(&mut r, n));
            }
            let mut lower = 0.0;
            let mut witness = Vector::basis(n, 0);
            for s in &starts {
                let (val, x) = p_norm_ascent(m, p, s, 300);
                if val > lower {
                    lower = val;
                    witness = Vector::from_raw(x);
                }
            }
            let pv = p.value();
            let n1 = max_col_sum(m).0;
            let ninf = max_row_sum(m).0;
            let (_, n2, _) = spectral_bracket(m);
            let mut upper = n1.powf(1.0 / pv) * ninf.powf(1.0 - 1.0 / pv);
            let refined = if pv < 2.0 {
                let theta = 2.0 * (1.0 - 1.0 / pv);
                n1.powf(1.0 - theta) * n2.powf(theta)
            } else {
                let theta = 2.0 / pv;
                n2.powf(theta) * ninf.powf(1.0 - theta)
            };
            upper = upper.min(refined);
            // Interpolation bounds are evaluated in floating point; keep a
            // few ulps of headroom so the bracket stays an enclosure.
            upper = (upper * (1.0 + 8.0 * f64::EPSILON)).max(lower);
            NormBracket {
                lower,
                upper,
                witness,
            }
        }
    }
}

/// Certified operator-norm bracket.
pub fn operator_norm(t: &LinearOperator) -> NormBracket {
    t.bracket.clone()
}

/// Outcome of certifying `‖T‖ ≤ 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ContractionVerdict {
    Yes,
    /// `witness` is a unit vector with `‖T witness‖ = norm > 1 + tol`.
    No {
        witness: Vector,
        norm: f64,
    },
    Unknown {
        lower: f64,
        upper: f64,
    },
}

impl ContractionVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, ContractionVerdict::Yes)
    }
}

pub fn is_contraction(t: &LinearOperator, tol: f64) -> ContractionVerdict {
    let b = &t.bracket;
    if b.upper <= 1.0 + tol {
        ContractionVerdict::Yes
    } else if b.lower > 1.0 + tol {
        ContractionVerdict::No {
            witness: b.witness.clone(),
            norm: b.lower,
        }
    } else {
        ContractionVerdict::Unknown {
            lower: b.lower,
            upper: b.upper,
        }
    }
}

/// A linear subspace of ℝⁿ described by a Euclidean-orthonormal basis. The
/// basis is a coordinate description only; the ambient norm plays no role.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Vector>,
}

impl Subspace {
    /// Span of `vectors`; fails if they are linearly dependent.
    pub fn span(ambient_dim: usize, vectors: &[Vector]) -> Result<Self> {
        for v in vectors {
            check_dim(ambient_dim, v.dim())?;
        }
        let cols: Vec<Vec<f64>> = vectors.iter().map(|v| v.coords().to_vec()).collect();
        let q = orthonormalize(&cols, 1e-10);
        if q.len() != vectors.len() {
            return Err(Error::Invalid(
                "spanning vectors are linearly dependent".into(),
            ));
        }
        Ok(Self::from_orthonormal(ambient_dim, q))
    }

    pub(crate) fn from_orthonormal(ambient_dim: usize, basis: Vec<Vec<f64>>) -> Self {
        Self {
            ambient_dim,
            basis: basis.into_iter().map(Vector::from_raw).collect(),
        }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    /// Euclidean orthogonal projection onto the subspace.
    pub fn project(&self, v: &Vector) -> Result<Vector> {
        check_dim(self.ambient_dim, v.dim())?;
        let mut out = vec![0.0; self.ambient_dim];
        for b in &self.basis {
            let c: f64 = b.iter().zip(v.iter()).map(|(x, y)| x * y).sum();
            for (o, bi) in out.iter_mut().zip(b.iter()) {
                *o += c * bi;
            }
        }
        Ok(Vector::from_raw(out))
    }

    /// Euclidean distance from `v` to the subspace.
    pub fn distance(&self, v: &Vector) -> Result<f64> {
        Ok(v.sub(&self.project(v)?)?.euclidean_norm())
    }

    /// Intersection with another subspace (kernel of `[Q₁ | −Q₂]`).
    pub fn intersect(&self, other: &Subspace, tol: f64) -> Result<Subspace> {
        check_dim(self.ambient_dim, other.ambient_dim)?;
        let (k1, k2) = (self.dim(), other.dim());
        if k1 == 0 || k2 == 0 {
            return Ok(Subspace::zero(self.ambient_dim));
        }
        let n = self.ambient_dim;
        let mut m = DMatrix::zeros(n, k1 + k2);
        for (j, b) in self.basis.iter().enumerate() {
            for i in 0..n {
                m[(i, j)] = b[i];
            }
        }
        for (j, b) in other.basis.iter().enumerate() {
            for i in 0..n {
                m[(i, k1 + j)] = -b[i];
            }
        }
        let coeffs = kernel_basis(&m, tol);
        let vecs: Vec<Vec<f64>> = coeffs
            .iter()
            .map(|c| {
                let mut v = vec![0.0; n];
                for (j, b) in self.basis.iter().enumerate() {
                    for i in 0..n {
                        v[i] += c[j] * b[i];
                    }
                }
                v
            })
            .collect();
        Ok(Subspace::from_orthonormal(n, orthonormalize(&vecs, 1e-8)))
    }
}

/// Fixed vectors of `T`: the numerical kernel of `T − I`, with singular
/// values up to `tol · ‖T − I‖₂` treated as zero.
pub fn fixed_space(t: &LinearOperator, tol: f64) -> Subspace {
    Subspace::from_orthonormal(t.dim(), kernel_basis(&t.minus_identity(), tol))
}

/// Common fixed vectors of all operators, from the kernel of the stacked
/// matrix `[T₁ − I; …; T_N − I]`.
pub fn common_fixed_space(ops: &[LinearOperator], tol: f64) -> Result<Subspace> {
    let first = ops.first().ok_or(Error::EmptyOperators)?;
    if ops.iter().any(|t| t.space() != first.space()) {
        return Err(Error::SpaceMismatch);
    }
    let n = first.dim();
    let mut stacked = DMatrix::zeros(n * ops.len(), n);
    for (k, t) in ops.iter().enumerate() {
        stacked
            .view_mut((k * n, 0), (n, n))
            .copy_from(&t.minus_identity());
    }
    Ok(Subspace::from_orthonormal(n, kernel_basis(&stacked, tol)))
}
