//! Exact computations with finite conformal algebras.
//!
//! Algebras are free modules of finite rank over `C[∂]` whose λ-product is
//! given by a table of structure polynomials. On top of the product kernel
//! the crate builds module actions, matched pairs and their bicrossed
//! products, deformation maps and the algebras they induce, module-theoretic
//! invariants over `C[∂]`, and a compiler that turns the deformation-map
//! identity into polynomial constraints on unknown coefficients.
//!
//! Everything is generic over the coefficient field (see [`Scalar`]); the
//! aliases at the crate root fix it to arbitrary-precision rationals.

pub mod actions;
pub mod algebra;
pub mod constraints;
pub mod deform;
pub mod error;
pub mod poly;
pub mod scalar;
pub mod structure;

pub use error::{Error, Result};
pub use poly::{Monomial, MultiPoly, VarId};
pub use scalar::Scalar;

/// Exact rational scalar used throughout the tooling.
pub type Rational = num_rational::BigRational;
pub type Poly = MultiPoly<Rational>;
pub type Algebra = algebra::ConformalAlgebra<Rational>;
pub type Element = algebra::Element<Rational>;
pub type Pair = actions::MatchedPair<Rational>;
pub type Map = deform::ModuleMap<Rational>;
