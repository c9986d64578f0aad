//! Frontend for the covariant-Hamiltonian engine: a small theory-definition
//! language (lexer, parser, index-notation elaborator), verification suites,
//! and structured report output shared by the `multiphase` binary and its
//! integration tests.

pub mod ast;
pub mod checks;
pub mod diag;
pub mod elaborate;
pub mod examples;
pub mod lexer;
pub mod parser;
pub mod report;

pub use diag::{Diagnostic, Severity, Span};
pub use elaborate::{elaborate, ElabTheory};
pub use parser::parse;
