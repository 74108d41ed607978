//! Exact computations for finite-dimensional protori through their duals:
//! finite-rank torsion-free groups Z^n ⊆ X ⊆ Q^n given by divisibility
//! directives, their profinite quotient data, and an independent oracle.

pub mod arith;
pub mod error;
pub mod oracle;
pub mod profinite;
pub mod protorus;
pub mod qlattice;
pub mod supernat;
pub mod tfgroup;

pub use error::{Error, Result};
pub use profinite::{FiniteAbelian, StdRep};
pub use qlattice::{HemispherePoint, Lattice};
pub use supernat::{Exp, Supernatural, TypeClass};
pub use tfgroup::{Directive, GroupDescription};
