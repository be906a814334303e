//! Normalization of vector-space and bilinear expressions by rewriting
//! modulo associativity and commutativity.
//!
//! The [`engine`] combines a vector system ([`RewriteSystem::linear`] or
//! [`RewriteSystem::bilinear`]) with a pluggable [`ScalarSystem`]. The
//! [`analysis`] and [`denotation`] modules check the termination,
//! confluence, classification, and universality properties of the result
//! on generated terms.

pub mod analysis;
pub mod denotation;
pub mod engine;
pub mod measure;
pub mod scalar;
pub mod suite;
pub mod syntax;
pub mod term;

pub use engine::{
    normalize, reducts, vector_system, NormalizeError, Part, RewriteSystem, Rewriter, Rule, Step, Strategy, Trace,
};
pub use scalar::{scalar_requirements_check, ScalarSystem};
pub use syntax::{parse_program, parse_system, parse_term, print_program, print_term};
pub use term::{ac_equal, canonicalize, substitute, well_sorted, AcSet, Rational, Signature, Sort, Substitution, Symbol, Term, Var};
