//! Random products of linear contractions on finite-dimensional ℓ_p spaces.
//!
//! Given contractions `T_1, …, T_N` on ℓ_p^n and an index map `r` that uses
//! every generator infinitely often, the crate iterates
//! `S_n x = T_{r(n)} ⋯ T_{r(1)} x` and checks when and where it converges.
//! Convergence hinges on the norm-preservation condition (W′): `‖Tx‖ = ‖x‖`
//! only for fixed vectors.
//!
//! * [`space`]: norms, dual exponents, pairings and exact support faces `J(x)`.
//! * [`operator`]: matrices with certified norm brackets, adjoints, fixed spaces.
//! * [`conditions`]: (W′)/(W) checkers, a semigroup falsifier, adjoint support tests.
//! * [`schedule`] and [`engine`]: index maps, the iteration, and its audits.
//! * [`exact`]: rational arithmetic for operators such as `[[1, 1/3], [0, 0]]`.
//! * [`scenarios`]: the built-in catalog and the commuting-projection certificate.
//! * [`io`]: trace CSV, run summaries, scenario files.
//!
//! ```
//! use randprod::{engine, scenarios, schedule::WordSchedule};
//!
//! let s = scenarios::example1();
//! let first_t1 = WordSchedule::scripted(vec![0, 1], 2).unwrap();
//! let trace = engine::iterate(&s.ops, &first_t1, &s.default_x0, &Default::default()).unwrap();
//! assert_eq!(trace.limit_estimate.unwrap().coords(), &[0.5, 0.0]);
//! ```

pub mod conditions;
pub mod engine;
pub mod error;
pub mod exact;
pub mod io;
mod linalg;
pub mod operator;
pub mod rng;
pub mod scenarios;
pub mod schedule;
pub mod space;

pub use error::{Error, Result};
pub use operator::{LinearOperator, Subspace};
pub use space::{Exponent, Functional, NormSpec, SupportFace, Vector};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spaces.md")]
    mod spaces {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/conditions.md")]
    mod conditions {}
    #[doc = include_str!("../../../book/src/products.md")]
    mod products {}
    #[doc = include_str!("../../../book/src/l1_example.md")]
    mod l1_example {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
