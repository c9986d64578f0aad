//! Symbolic engine for covariant Hamiltonian field theory.
//!
//! Builds jet-bundle and multiphase-space charts from a bundle description,
//! derives Legendre transforms, Cartan forms, Euler-Lagrange equations,
//! covariant momentum maps and Noether currents, and verifies the identities
//! relating them both symbolically and against finite-difference oracles.

pub mod error;
pub mod expr;
pub mod geometry;
pub mod jets;
pub mod numcheck;
pub mod symbol;
pub mod symmetry;
pub mod theories;
pub mod variational;

pub use error::{EvalError, GeomError, JetError, SampleError, SymmetryError};
pub use expr::{equal_symbolic, Expr};
pub use geometry::{Chart, ChartMap, DiffForm, VectorField};
pub use jets::{BundleSpec, FieldSpec, IndexStructure, JetCharts, SymbolicSection};
pub use numcheck::Plan;
pub use symbol::{IndexTag, SymbolData, SymbolId, SymbolKind};
pub use symmetry::GeneratorFamily;
pub use variational::{LagrangianDensity, MetricKind, Theory};
