//! Energy-budgeted coverage sampling on a hexagonal lattice, with universal
//! Kriging for mapping the sampled field.

pub mod corpus;
pub mod coverage;
pub mod density;
pub mod eval;
pub mod field;
pub mod geometry;
pub mod io;
