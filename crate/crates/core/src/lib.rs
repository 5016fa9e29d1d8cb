//! Exact construction and verification of soft noncommutative toric schemes.
//!
//! The crate is organised bottom-up: [`exactmath`] supplies exact scalars and
//! linear algebra, [`toricfan`] and [`freeword`] the commutative and
//! noncommutative lattices, [`deltasystem`] the structure sheaf, and the
//! remaining modules sheaves, subschemes and matrix morphisms built on top.

pub mod exactmath;
pub mod toricfan;
pub mod freeword;
pub mod deltasystem;
pub mod ncalgebra;
pub mod sheaves;
pub mod azumaya;
