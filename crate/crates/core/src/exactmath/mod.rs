//! Exact scalars and linear algebra: `Q`, `Q(i)`, integer matrices with
//! Hermite normal forms, Fourier–Motzkin feasibility and minimal polynomials.

mod fm;
mod gauss;
mod intmat;
mod poly;
mod qimat;

pub use fm::{
    linear_feasible, primitive_integer_vector, projection_bounds, Feasibility, Inequality,
    Relation,
};
pub(crate) use fm::int_q;
pub use gauss::{GaussRational, ParseGaussError};
pub use intmat::{hnf, kernel_basis, solve_integer, unimodular_inverse, IntMatrix};
pub use poly::{minimal_polynomial, roots_in_qi, Poly, RootSplit};
pub use qimat::{nullspace, rank, rref, solve_combination, QIMatrix};

/// Arbitrary-precision rational with normalized sign and reduced terms.
pub type Rational = num_rational::BigRational;

pub use num_bigint::BigInt;
