//! Dense kernels shared by the operator and condition modules.

use nalgebra::{DMatrix, SymmetricEigen, SVD};

use crate::space::{duality_map, lp_norm, Exponent};

pub(crate) fn matvec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let (r, c) = m.shape();
    debug_assert_eq!(c, x.len());
    (0..r)
        .map(|i| (0..c).map(|j| m[(i, j)] * x[j]).sum())
        .collect()
}

pub(crate) fn matvec_t(m: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
    let (r, c) = m.shape();
    debug_assert_eq!(r, y.len());
    (0..c)
        .map(|j| (0..r).map(|i| m[(i, j)] * y[i]).sum())
        .collect()
}

pub(crate) fn max_col_sum(m: &DMatrix<f64>) -> (f64, usize) {
    let mut best = (0.0, 0);
    for j in 0..m.ncols() {
        let s: f64 = m.column(j).iter().map(|v| v.abs()).sum();
        if s > best.0 {
            best = (s, j);
        }
    }
    best
}

pub(crate) fn max_row_sum(m: &DMatrix<f64>) -> (f64, usize) {
    let mut best = (0.0, 0);
    for i in 0..m.nrows() {
        let s: f64 = m.row(i).iter().map(|v| v.abs()).sum();
        if s > best.0 {
            best = (s, i);
        }
    }
    best
}

fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest singular value as a bracket `(lower, upper, top right singular
/// vector)`.
///
/// The lower bound is the attained ratio `‖Mv‖/‖v‖` at the computed top
/// eigenvector of `MᵀM`. The upper bound follows from Weyl's inequality
/// applied to the decomposition residual `E = MᵀM − VΛVᵀ`:
/// `λ_max(MᵀM) ≤ λ_max⁺ · ‖V‖² + ‖E‖₂`, with `‖V‖² ≤ 1 + ‖VᵀV − I‖_F`
/// and `‖E‖₂ ≤ ‖E‖_F`.
pub(crate) fn spectral_bracket(m: &DMatrix<f64>) -> (f64, f64, Vec<f64>) {
    let n = m.ncols();
    let a = m.transpose() * m;
    let eig = SymmetricEigen::new(a.clone());
    let mut k = 0;
    for i in 1..n {
        if eig.eigenvalues[i] > eig.eigenvalues[k] {
            k = i;
        }
    }
    let lmax = eig.eigenvalues[k].max(0.0);
    let v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    let vn = lp_norm(&v, Exponent::TWO);
    let v: Vec<f64> = v.iter().map(|c| c / vn).collect();
    let lower = lp_norm(&matvec(m, &v), Exponent::TWO);

    let vmat = &eig.eigenvectors;
    let recon = vmat * DMatrix::from_diagonal(&eig.eigenvalues) * vmat.transpose();
    let resid = frobenius(&(a - recon));
    let orth = frobenius(&(vmat.transpose() * vmat - DMatrix::identity(n, n)));
    let upper = (lmax * (1.0 + orth) + resid).sqrt().max(lower);
    (lower, upper, v)
}

/// Orthonormal basis (as rows of `Vᵀ`) for the numerical kernel of `m`:
/// right singular vectors whose singular value is at most `rel_tol · σ_max`.
pub(crate) fn kernel_basis(m: &DMatrix<f64>, rel_tol: f64) -> Vec<Vec<f64>> {
    let n = m.ncols();
    let smax = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if smax == 0.0 {
        return (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
    }
    // Pad wide matrices so that Vᵀ is square and spans all of ℝⁿ.
    let m = if m.nrows() < n {
        let mut padded = DMatrix::zeros(n, n);
        padded.view_mut((0, 0), m.shape()).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = SVD::new(m, false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let top = sigma.iter().fold(0.0f64, |a, &s| a.max(s));
    let thresh = rel_tol * top;
    let mut out = Vec::new();
    for (i, &s) in sigma.iter().enumerate() {
        if s <= thresh {
            out.push(vt.row(i).iter().copied().collect());
        }
    }
    out
}

/// Modified Gram–Schmidt with reorthogonalization. Columns whose remaining
/// norm falls below `drop_tol` times their original norm are discarded.
pub(crate) fn orthonormalize(cols: &[Vec<f64>], drop_tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for c in cols {
        let orig = lp_norm(c, Exponent::TWO);
        if orig == 0.0 {
            continue;
        }
        let mut v = c.clone();
        for _ in 0..2 {
            for q in &out {
                let d: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= d * qi;
                }
            }
        }
        let n = lp_norm(&v, Exponent::TWO);
        if n > drop_tol * orig {
            out.push(v.iter().map(|x| x / n).collect());
        }
    }
    out
}

/// Ascent of `‖Mx‖_p` over the unit p-sphere by the nonlinear power
/// iteration `x ← J_q(Mᵀ J_p(Mx))`, where `J` is the duality map. Each step
/// does not decrease the objective. Returns the best value and its unit
/// argument.
pub(crate) fn p_norm_ascent(
    m: &DMatrix<f64>,
    p: Exponent,
    start: &[f64],
    max_steps: usize,
) -> (f64, Vec<f64>) {
    let q = p.conjugate();
    let n0 = lp_norm(start, p);
    if n0 == 0.0 {
        return (0.0, start.to_vec());
    }
    let mut x: Vec<f64> = start.iter().map(|c| c / n0).collect();
    let mut best_val = lp_norm(&matvec(m, &x), p);
    let mut best_x = x.clone();
    for _ in 0..max_steps {
        let y = matvec(m, &x);
        if lp_norm(&y, p) == 0.0 {
            break;
        }
        let z = matvec_t(m, &duality_map(&y, p));
        let zq = lp_norm(&z, q);
        let zx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
        if zq <= zx * (1.0 + 1e-15) {
            break;
        }
        x = duality_map(&z, q);
        let xn = lp_norm(&x, p);
        if xn == 0.0 {
            break;
        }
        x.iter_mut().for_each(|c| *c /= xn);
        let val = lp_norm(&matvec(m, &x), p);
        if val > best_val {
            best_val = val;
            best_x = x.clone();
        } else if val <= best_val * (1.0 + 1e-15) && val >= best_val * (1.0 - 1e-15) {
            break;
        }
    }
    (best_val, best_x)
}
