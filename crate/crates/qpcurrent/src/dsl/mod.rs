//! The `.qp` scenario language: lexer, parser and pretty-printer.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod span;

pub use parser::{parse, parse_expr};
pub use printer::print_session;
pub use span::{Diagnostic, Span};
