//! Abductive inference over event networks.
//!
//! An event network is a probabilistic network whose nodes are unary
//! predicates (event types) rather than propositions. Types form a
//! generalization hierarchy, feature links encode structural and causal
//! tendencies (and may form cycles), attribute-value constraints keep
//! hypotheses consistent, and category statistics supply the probabilities.
//! Given a knowledge base and a set of observed event descriptions, the
//! search returns the most probable consistent scenario trees that entail
//! every observation.
//!
//! The crate is organized around the pipeline:
//!
//! * [`kbdsl`] — parse and serialize the knowledge-base DSL and observation
//!   files;
//! * [`network`] — the validated in-memory knowledge base, hierarchy and
//!   preemption queries, statistic lookup;
//! * [`scenario`] — scenario trees, attribute percolation and consistency,
//!   entailment, probability, renderers;
//! * [`search`] — ranked explanation search plus a brute-force enumerator
//!   used as its oracle;
//! * [`cli`] — the command-line front end (`validate`, `explain`,
//!   `enumerate`, `paths`).
//!
//! The `examples/` directory of this crate walks through each capability;
//! start with `cargo run --example explain_flu`.

pub mod cli;
mod json;
pub mod kbdsl;
pub mod names;
pub mod network;
pub mod scenario;
pub mod search;
mod span;

pub use names::{AttrName, ConstValue, FeatureName, TypeName};
pub use network::{EventDescription, EventNetwork, NetworkBuilder, ValidationReport};
pub use span::SourceSpan;
