//! Abelian flag functions: certificate-producing decision procedures,
//! finite projective geometry harnesses and logarithmic functions on
//! small function-field models.

pub mod af;
pub mod classes;
pub mod error;
pub mod field;
pub mod function;
pub mod geometry;
pub mod io;
pub mod lattice;
pub mod padic;

pub use error::{Error, ParseError, Result};
pub use function::{InvariantFunction, Value, ValueSet, Window};
pub use lattice::{Lattice, ScalarDomain, Subgroup, Vector};
pub use padic::Padic;
