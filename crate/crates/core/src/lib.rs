//! Identification of controlled and natural micro direct effects from
//! summary causal graphs (SCGs).
//!
//! The crate is layered bottom-up:
//!
//! - [`graph`]: mixed graphs with directed and bidirected edges, closures,
//!   strongly connected components, mutilation and d-separation.
//! - [`temporal`]: summary causal graphs, full-time graphs over a finite
//!   window of time slices, projection and possible parents.
//! - [`identification`]: the CDE/NDE deciders, adjustment estimands and
//!   do-calculus rule checks.
//! - [`oracle`]: brute-force enumeration of the full-time graphs compatible
//!   with an SCG, used to confirm or refute separation claims.
//! - [`simulation`]: linear-Gaussian and discrete structural models used to
//!   compute ground-truth effects and to evaluate estimands numerically.
//! - [`io`] and [`cli`]: JSON graph files, DOT export and the `scgid` binary.

pub mod cli;
pub mod graph;
pub mod identification;
pub mod io;
pub mod oracle;
pub mod simulation;
pub mod temporal;

pub use graph::{GraphError, MixedGraph};
pub use identification::{
    check_cde, check_nde, parent_reduction, rule_applicable, EffectKind, EffectQuery,
    Estimand, IdentifyError, IdentifyOptions, Identification, Rule, Status, Verdict,
};
pub use oracle::{Claim, CompatibilityClass, OracleError, Outcome, Strategy};
pub use simulation::{Dataset, Model, ModelSpec, MonteCarlo, SimulationError};
pub use temporal::{
    EdgeKind, FullTimeGraph, SummaryCausalGraph, TemporalEdge, TemporalError, TemporalVertex,
    Window,
};
