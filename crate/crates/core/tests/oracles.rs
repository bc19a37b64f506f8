//! Checks library answers against small brute-force computations that share
//! no code with the routes under test.

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;

use randprod::conditions::{check_w, check_w_prime, WStatus};
use randprod::operator::{common_fixed_space, operator_norm, Subspace, DEFAULT_KERNEL_TOL};
use randprod::scenarios;
use randprod::space::{norm, pair};
use randprod::{rng, Exponent, Functional, LinearOperator, NormSpec, Vector};

const DYADIC: [f64; 7] = [-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0];

fn linf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, c| a.max(c.abs()))
}

fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c.abs()).sum()
}

fn mul(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

// On a polytope unit ball, ‖T·‖ is convex, so if it reaches 1 at a relative
// interior point of a face it equals 1 on the whole face. Hence (W′) holds
// exactly when every norm-preserved vertex of the ball is fixed.
fn vertex_oracle(m: &[Vec<f64>], p: Exponent) -> bool {
    let n = m.len();
    let vertices: Vec<Vec<f64>> = if p.is_infinite() {
        (0..1u32 << n)
            .map(|mask| {
                (0..n)
                    .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
                    .collect()
            })
            .collect()
    } else {
        (0..2 * n)
            .map(|k| {
                let mut v = vec![0.0; n];
                v[k / 2] = if k % 2 == 0 { 1.0 } else { -1.0 };
                v
            })
            .collect()
    };
    let nrm = if p.is_infinite() { linf_norm } else { l1_norm };
    vertices.iter().all(|v| {
        let tv = mul(m, v);
        (nrm(&tv) - 1.0).abs() > 1e-12 || tv.iter().zip(v).all(|(a, b)| (a - b).abs() <= 1e-12)
    })
}

fn dyadic_contraction(r: &mut rand_chacha::ChaCha8Rng, n: usize, p: Exponent) -> Vec<Vec<f64>> {
    loop {
        let mut m: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| DYADIC[r.random_range(0..DYADIC.len())])
                    .collect()
            })
            .collect();
        // plant identity rows or columns so fixed vectors and ties are common
        for i in 0..n {
            if r.random_bool(0.3) {
                if p.is_infinite() {
                    m[i] = (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect();
                } else {
                    for (j, row) in m.iter_mut().enumerate() {
                        row[i] = if i == j { 1.0 } else { 0.0 };
                    }
                }
            }
        }
        let worst = if p.is_infinite() {
            m.iter().map(|r| l1_norm(r)).fold(0.0, f64::max)
        } else {
            (0..n)
                .map(|j| m.iter().map(|r| r[j].abs()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        if worst <= 1.0 {
            return m;
        }
    }
}

#[test]
fn polytope_routes_match_vertex_enumeration() {
    let mut r = rng::stream(31, 0);
    for p in [Exponent::ONE, Exponent::Infinity] {
        let mut seen = [0usize; 2];
        for i in 0..400 {
            let n = 1 + i % 4;
            let m = dyadic_contraction(&mut r, n, p);
            let t = LinearOperator::from_rows(&m, NormSpec::new(n, p).unwrap()).unwrap();
            let v = check_w_prime(&t, 1e-10).unwrap();
            let expect = vertex_oracle(&m, p);
            assert_ne!(v.status, WStatus::Inconclusive);
            assert_eq!(v.status == WStatus::Holds, expect, "p={p}, m={m:?}");
            seen[expect as usize] += 1;
        }
        assert!(seen[0] > 20 && seen[1] > 20, "p={p}: {seen:?}");
    }
}

#[test]
fn w_agrees_with_w_prime_and_failures_give_constant_sequences() {
    let mut r = rng::stream(32, 0);
    for i in 0..200 {
        let n = 1 + i % 4;
        let p = [Exponent::ONE, Exponent::Infinity][i % 2];
        let m = dyadic_contraction(&mut r, n, p);
        let t = LinearOperator::from_rows(&m, NormSpec::new(n, p).unwrap()).unwrap();
        let wp = check_w_prime(&t, 1e-10).unwrap();
        let w = check_w(&t, 1e-10).unwrap();
        assert_eq!(wp.status, w.status);
        if let Some(x) = &w.witness {
            // x_n = x for all n: norms match exactly, displacement does not vanish
            let s = t.space();
            let tx = t.apply(x).unwrap();
            assert!((s.norm(&tx).unwrap() - s.norm(x).unwrap()).abs() <= 1e-10);
            assert!(s.distance(x, &tx).unwrap() > 1e-10);
        }
    }
}

// For symmetric T with spectrum in [0, 1] and largest non-unit eigenvalue λ,
// ‖x‖² − ‖Tx‖² ≥ (1 − λ²)‖x − P x‖² ≥ (1 − λ²)‖x − Tx‖², where P projects onto
// the unit eigenspace. With ‖x‖ = 1 that bounds the displacement by
// sqrt(2 · gap / (1 − λ²)), so vanishing gaps force vanishing displacement.
#[test]
fn small_norm_gaps_force_small_displacement_on_l2() {
    let mut r = rng::stream(34, 0);
    for trial in 0..20 {
        let n = 2 + trial % 5;
        let g = DMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0));
        let q = g.qr().q();
        let k = 1 + trial % (n - 1);
        let lam: Vec<f64> = (0..n)
            .map(|i| if i < k { 1.0 } else { r.random_range(0.0..0.9) })
            .collect();
        let top = lam[k..].iter().cloned().fold(0.0, f64::max);
        let m = &q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(lam)) * q.transpose();
        let t = LinearOperator::new(m, NormSpec::new(n, Exponent::TWO).unwrap()).unwrap();
        assert_eq!(check_w_prime(&t, 1e-10).unwrap().status, WStatus::Holds);
        let mut smallest = f64::INFINITY;
        for i in 0..2000 {
            // half the samples sit near the fixed space, where gaps are tiny
            let scale = if i % 2 == 0 {
                1.0
            } else {
                10f64.powi(-(i % 7))
            };
            let mut x: Vec<f64> = (0..n).map(|_| scale * r.random_range(-1.0..1.0)).collect();
            for (c, j) in x.iter_mut().zip(0..n) {
                *c += q[(j, 0)];
            }
            let nx = l2(&x);
            let x = Vector::new(x.iter().map(|c| c / nx).collect()).unwrap();
            let tx = t.apply(&x).unwrap();
            let gap = 1.0 - tx.euclidean_norm();
            let disp = x.sub(&tx).unwrap().euclidean_norm();
            assert!(
                disp <= (2.0 * gap.max(0.0) / (1.0 - top * top)).sqrt() + 1e-7,
                "{disp} {gap}"
            );
            smallest = smallest.min(gap);
        }
        assert!(smallest < 1e-10);
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

#[test]
fn projections_on_l2_hold_and_satisfy_pythagoras() {
    let mut r = rng::stream(33, 0);
    for seed in 0..10 {
        let s = scenarios::random_projections(3, 8, seed).unwrap();
        for t in &s.ops {
            assert_eq!(check_w(t, 1e-10).unwrap().status, WStatus::Holds);
            for _ in 0..20 {
                let x: Vec<f64> = (0..8).map(|_| r.random_range(-1.0..1.0)).collect();
                let x = Vector::new(x).unwrap();
                let px = t.apply(&x).unwrap();
                let gap = x.euclidean_norm().powi(2) - px.euclidean_norm().powi(2);
                let d = x.sub(&px).unwrap().euclidean_norm().powi(2);
                assert!((gap - d).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn common_fixed_space_is_the_range_intersection() {
    for seed in 0..10 {
        let s = scenarios::von_neumann_2proj(12, seed).unwrap();
        let ranges: Vec<Subspace> = s
            .ops
            .iter()
            .map(|t| {
                let m = t.matrix();
                let cols: Vec<Vector> = m
                    .clone()
                    .svd(true, false)
                    .u
                    .unwrap()
                    .column_iter()
                    .zip(m.clone().svd(false, false).singular_values.iter())
                    .filter(|(_, s)| **s > 0.5)
                    .map(|(c, _)| Vector::new(c.iter().copied().collect()).unwrap())
                    .collect();
                Subspace::span(12, &cols).unwrap()
            })
            .collect();
        let inter = ranges[0].intersect(&ranges[1], 1e-9).unwrap();
        let y = common_fixed_space(&s.ops, DEFAULT_KERNEL_TOL).unwrap();
        assert_eq!(inter.dim(), y.dim());
        for b in y.basis() {
            assert!(inter.distance(b).unwrap() <= 1e-9);
        }
        let known = s.known_fixed_space.as_ref().unwrap();
        for b in known.basis() {
            assert!(y.distance(b).unwrap() <= 1e-9);
        }
    }
}

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![
        Just(Exponent::ONE),
        Just(Exponent::TWO),
        Just(Exponent::Infinity),
        (1.05f64..8.0).prop_map(Exponent::Finite),
    ]
}

fn square(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, n * n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_contains_every_ratio(
        (n, entries, xs) in (1usize..6).prop_flat_map(|n| {
            (Just(n), square(n), prop::collection::vec(prop::collection::vec(-1.0f64..1.0, n), 1..40))
        }),
        p in exponent(),
    ) {
        let s = NormSpec::new(n, p).unwrap();
        let t = LinearOperator::new(DMatrix::from_row_slice(n, n, &entries), s).unwrap();
        let b = operator_norm(&t);
        prop_assert!(b.lower <= b.upper + 1e-12);
        let wn = norm(&t.apply(&b.witness).unwrap(), &s).unwrap();
        prop_assert!((wn - b.lower).abs() <= 1e-9 * b.lower.max(1.0));
        for x in xs {
            let x = Vector::new(x).unwrap();
            let nx = norm(&x, &s).unwrap();
            if nx > 1e-9 {
                let ratio = norm(&t.apply(&x).unwrap(), &s).unwrap() / nx;
                prop_assert!(ratio <= b.upper * (1.0 + 1e-10) + 1e-12);
            }
        }
    }

    #[test]
    fn adjoint_pairing(
        (n, entries, f, x) in (1usize..7).prop_flat_map(|n| {
            (Just(n), square(n), prop::collection::vec(-2.0f64..2.0, n), prop::collection::vec(-2.0f64..2.0, n))
        }),
        p in exponent(),
    ) {
        let s = NormSpec::new(n, p).unwrap();
        let t = LinearOperator::new(DMatrix::from_row_slice(n, n, &entries), s).unwrap();
        let f = Functional::new(f, p.conjugate()).unwrap();
        let x = Vector::new(x).unwrap();
        let tf = t.adjoint().apply(&f.to_vector()).unwrap();
        let tf = Functional::new(tf.into_coords(), p.conjugate()).unwrap();
        let lhs = pair(&tf, &x).unwrap();
        let rhs = pair(&f, &t.apply(&x).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
        prop_assert!(t.adjoint().norm_bracket().upper <= t.norm_bracket().upper);
    }
}
