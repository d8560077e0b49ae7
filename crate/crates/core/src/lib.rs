//! Exact certification of tropical independence for the distinguished
//! piecewise-linear functions attached to a vertex-avoiding divisor on a
//! chain of loops.
//!
//! The crate is organized bottom-up:
//!
//! - [`parameters`]: `(r, s, rho, m)` bookkeeping and range classification.
//! - [`graph`]: the metric chain of loops with exact rational edge lengths.
//! - [`series`]: tableaux, lingering lattice paths, slope tables and the
//!   divisor `D` together with its representatives `D_i`.
//! - [`plfun`]: exact piecewise-linear functions, divisors of functions and
//!   lower envelopes.
//! - [`independence`]: dependence checking, dependence search and the
//!   slope-profile certifier.
//! - [`constructions`]: inductive case transformations and the case library.
//! - [`report`]: serializable case reports shared with the command-line tool.

pub mod constructions;
pub mod error;
pub mod exact;
pub mod graph;
pub mod independence;
pub mod parameters;
pub mod plfun;
pub mod report;
pub mod series;

pub use constructions::{case_library, CaseSpec};
pub use error::{Error, Result};
pub use exact::Q;
pub use graph::{ChainOfLoops, Edge, GraphPoint, PieceRange};
pub use independence::{
    certify_independence, check_dependence, search_dependence, verdict, CaseContext,
    DependenceWitness, IndependenceCertificate, Rule, RuleSet, Verdict,
};
pub use parameters::{ParameterQuadruple, RangeClass, RangeKind};
pub use plfun::{Envelope, EnvelopeCell, PLFunction};
pub use series::{DivisorModel, LingeringLatticePath, MultiSetIndex, SlopeTable, Step, Tableau};

/// Version string embedded in every report.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
