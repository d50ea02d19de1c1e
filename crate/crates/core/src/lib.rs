//! Exact symbolic algebra on graded symplectic (QP) manifolds.
//!
//! The crate is organised bottom-up:
//!
//! * [`chart`] declares graded coordinates and formal coefficient functions,
//! * [`poly`] is the graded-commutative polynomial algebra over a chart, with
//!   Koszul-sign normalization, graded derivations and substitution,
//! * [`relations`] imposes user-declared side conditions by leading-term rewriting,
//! * [`symplectic`] turns a constant generator table into the graded Poisson bracket,
//! * [`qp`] adds homological functions, derived brackets, twisting and QP pairs,
//! * [`currents`] splits current commutators into algebraic and anomalous parts.
//!
//! Everything is exact over the rationals. No floating point is used anywhere.
#![no_std]

extern crate alloc;

pub mod chart;
pub mod currents;
pub mod error;
pub mod mutation;
pub mod poly;
pub mod qp;
pub mod relations;
mod render;
pub mod symbol;
pub mod symplectic;

pub use chart::{Chart, ChartBuilder, CoordId, Coordinate, IndexBlock, SymbolDecl, SymbolId, Symmetry};
pub use currents::{
    commutator_table, current_commutator, current_commutator_unreduced, render_classical, twist_current_basis, CommutatorTable,
    CurrentCommutator, CurrentFunction,
};
pub use error::{EntryError, Error};
pub use poly::{Monomial, Poly, Scalar, Side};
pub use qp::{cotangent_lift, twist, CotangentLift, LiftFamily, Obstruction, QPManifold, QPPair, Twisted, DEFAULT_MAX_TWIST_ORDER};
pub use relations::{closedness_relations, Relation, RelationSet};
pub use symbol::Sym;
pub use symplectic::{Block, SymplecticStructure};

pub type Result<T, E = Error> = core::result::Result<T, E>;
