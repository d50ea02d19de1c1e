//! Scenario language, catalog and report layer on top of `qpcurrent-core`.
//!
//! A `.qp` file declares graded coordinates, coefficient symbols, a
//! symplectic structure, `theta`, `alpha`, a Lagrangian, relations and
//! current functions, followed by commands. [`exec::run_source`] parses,
//! elaborates and runs such a file into a [`report::RunReport`].

pub mod catalog;
pub mod dsl;
pub mod exec;
pub mod report;
pub mod session;

pub use exec::run_source;
pub use report::{Report, RunReport};
pub use session::Options;
