//! In-memory representation of an event network: event types organized in a
//! generalization hierarchy, feature links between them, attribute-value
//! constraints, and category statistics.
//!
//! An [`EventNetwork`] is immutable once built and safe to share between any
//! number of reader threads. Networks are assembled either by the
//! [`NetworkBuilder`] or by parsing the knowledge-base DSL
//! (see [`crate::kbdsl`]).

mod build;
mod inherit;
mod stats;

pub use build::{NetworkBuilder, PercolationDecl, ValidationReport, Violation};
pub use inherit::{FeaturePath, PathVerdict};
pub use stats::StatLookupError;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::names::{AttrName, ConstValue, FeatureName, TypeName};

/// An event type declaration. `parents` are the direct generalizations; the
/// hierarchy as a whole must be a DAG (multiple parents are allowed).
/// Culprit-marked types are the only ones allowed to root explanations
/// whenever any culprits are declared at all.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TypeDecl {
    pub name: TypeName,
    pub parents: Vec<TypeName>,
    pub is_culprit: bool,
}

/// A feature link declaration: `label` maps events of `source` to events of
/// `target`. A type declares each label at most once.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FeatureDecl {
    pub label: FeatureName,
    pub source: TypeName,
    pub target: TypeName,
}

/// Relation vocabulary for local constraints.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConstraintRelation {
    AttrEqConst(AttrName, ConstValue),
    AttrNeqConst(AttrName, ConstValue),
    AttrEqAttr(AttrName, AttrName),
    AttrNeqAttr(AttrName, AttrName),
}

impl fmt::Display for ConstraintRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintRelation::AttrEqConst(a, v) => write!(f, "{a} = {v}"),
            ConstraintRelation::AttrNeqConst(a, v) => write!(f, "{a} != {v}"),
            ConstraintRelation::AttrEqAttr(a, b) => write!(f, "{a} = {b}"),
            ConstraintRelation::AttrNeqAttr(a, b) => write!(f, "{a} != {b}"),
        }
    }
}

/// A constraint among the attributes of a single event of type `owner`
/// (and, through the abstraction axioms, of every subtype of `owner`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LocalConstraint {
    pub owner: TypeName,
    pub relation: ConstraintRelation,
}

impl fmt::Display for LocalConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "constraint {} : {}", self.owner, self.relation)
    }
}

/// An attribute equality tied across a feature edge: whenever an event of
/// `parent_type` has an f-child of `child_type`, the child's `child_attr`
/// and the parent's `parent_attr` denote the same value.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PercolationConstraint {
    pub parent_type: TypeName,
    pub feature: FeatureName,
    pub child_type: TypeName,
    pub child_attr: AttrName,
    pub parent_attr: AttrName,
}

impl fmt::Display for PercolationConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "percolate {}.{} : {} => {}",
            self.parent_type, self.feature, self.child_attr, self.parent_attr
        )
    }
}

/// A partial description of an event: its type plus zero or more attribute
/// bindings.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct EventDescription {
    pub event_type: TypeName,
    pub bindings: BTreeMap<AttrName, ConstValue>,
}

impl EventDescription {
    pub fn new(event_type: impl Into<TypeName>) -> Self {
        EventDescription { event_type: event_type.into(), bindings: BTreeMap::new() }
    }

    /// Builder-style helper adding one binding.
    pub fn bind(mut self, attr: impl Into<AttrName>, value: impl Into<ConstValue>) -> Self {
        self.bindings.insert(attr.into(), value.into());
        self
    }

    /// True when every binding of `self` also appears in `other`.
    pub fn bindings_subset_of(&self, other: &EventDescription) -> bool {
        self.bindings.iter().all(|(a, v)| other.bindings.get(a) == Some(v))
    }
}

impl fmt::Display for EventDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.event_type)?;
        if !self.bindings.is_empty() {
            let body: Vec<String> =
                self.bindings.iter().map(|(a, v)| format!("{a}={v}")).collect();
            write!(f, "{{{}}}", body.join(", "))?;
        }
        Ok(())
    }
}

/// A prior or conditional probability over event descriptions.
#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub enum CategoryStatistic {
    /// Probability that a random event matches `desc`.
    Prior { desc: EventDescription, p: f64 },
    /// Probability that an event matching `parent` has a `feature`-child
    /// matching `child`.
    FeatureCond { parent: EventDescription, feature: FeatureName, child: EventDescription, p: f64 },
    /// Probability that an event of type `general` is in fact of the strictly
    /// more specific type `specific`.
    SpecCond { general: TypeName, specific: TypeName, p: f64 },
}

impl CategoryStatistic {
    pub fn p(&self) -> f64 {
        match self {
            CategoryStatistic::Prior { p, .. }
            | CategoryStatistic::FeatureCond { p, .. }
            | CategoryStatistic::SpecCond { p, .. } => *p,
        }
    }
}

/// Which reading of the specialization-preemption condition to apply.
///
/// The two variants differ in which node of the candidate preempting path is
/// compared against the preempted path's feature target: `Primed` compares
/// the preemptor's feature target (the reading that mirrors generalization
/// preemption), `Literal` compares the preemptor's feature source.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SpecPreemptionVariant {
    #[default]
    Primed,
    Literal,
}

/// Errors from hierarchy and preemption queries.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum NetworkError {
    #[error("unknown type name: {0}")]
    UnknownType(TypeName),
    #[error("type {source_type} has no legal feature {feature}")]
    FeatureNotReachable { source_type: TypeName, feature: FeatureName },
    #[error("{refined} does not refine the target of {feature} from {source_type}")]
    NotARefinement { source_type: TypeName, feature: FeatureName, refined: TypeName },
}

/// A non-preempted inherited feature: type `c` reaches `feature` through the
/// declaration on `via` (which is `c` itself or one of its ancestors).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LegalFeatureLink {
    pub via: TypeName,
    pub feature: FeatureName,
    pub target: TypeName,
    pub(crate) decl_idx: usize,
}

/// The validated, immutable knowledge base.
///
/// Declaration order is preserved; in particular the order of feature
/// declarations is the canonical order of feature children in scenarios.
/// Equality is structural and insensitive to declaration order.
#[derive(Clone, Debug)]
pub struct EventNetwork {
    pub(crate) types: Vec<TypeDecl>,
    pub(crate) features: Vec<FeatureDecl>,
    pub(crate) local_constraints: Vec<LocalConstraint>,
    pub(crate) percolation_constraints: Vec<PercolationConstraint>,
    pub(crate) statistics: Vec<CategoryStatistic>,
    pub(crate) variant: SpecPreemptionVariant,

    // Derived at build time.
    pub(crate) type_idx: HashMap<TypeName, usize>,
    /// Strict ancestors per type, in topological order with name ties.
    pub(crate) ancestors: Vec<Vec<usize>>,
    /// Membership form of `ancestors`.
    pub(crate) ancestor_set: Vec<Vec<bool>>,
    /// Strict descendants per type, sorted by name.
    pub(crate) descendants: Vec<Vec<usize>>,
    /// Feature declarations made directly on each type, in declaration order.
    pub(crate) features_of: Vec<Vec<usize>>,
    /// Non-preempted feature links per type, sorted by (label, via name).
    pub(crate) legal_links: Vec<Vec<LegalFeatureLink>>,
}

impl EventNetwork {
    pub fn types(&self) -> &[TypeDecl] {
        &self.types
    }

    pub fn features(&self) -> &[FeatureDecl] {
        &self.features
    }

    pub fn local_constraints(&self) -> &[LocalConstraint] {
        &self.local_constraints
    }

    pub fn percolation_constraints(&self) -> &[PercolationConstraint] {
        &self.percolation_constraints
    }

    pub fn statistics(&self) -> &[CategoryStatistic] {
        &self.statistics
    }

    pub fn spec_preemption_variant(&self) -> SpecPreemptionVariant {
        self.variant
    }

    /// Returns a copy of the network with a different preemption reading.
    /// The reading does not affect validity, only refinement queries.
    pub fn with_spec_preemption_variant(mut self, variant: SpecPreemptionVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn has_type(&self, name: &TypeName) -> bool {
        self.type_idx.contains_key(name)
    }

    pub fn type_decl(&self, name: &TypeName) -> Option<&TypeDecl> {
        self.type_idx.get(name).map(|&i| &self.types[i])
    }

    /// Culprit-marked types, in declaration order.
    pub fn culprits(&self) -> impl Iterator<Item = &TypeDecl> {
        self.types.iter().filter(|t| t.is_culprit)
    }

    pub fn has_culprits(&self) -> bool {
        self.types.iter().any(|t| t.is_culprit)
    }

    pub(crate) fn idx(&self, name: &TypeName) -> Result<usize, NetworkError> {
        self.type_idx.get(name).copied().ok_or_else(|| NetworkError::UnknownType(name.clone()))
    }

    /// True when `general` is a strict ancestor of `specific`.
    pub(crate) fn is_strict_ancestor_idx(&self, general: usize, specific: usize) -> bool {
        self.ancestor_set[specific][general]
    }

    /// True when `general` equals `specific` or is a strict ancestor of it.
    pub(crate) fn subsumes_idx(&self, general: usize, specific: usize) -> bool {
        general == specific || self.ancestor_set[specific][general]
    }
}

impl PartialEq for EventNetwork {
    fn eq(&self, other: &Self) -> bool {
        fn sorted<T: Clone + Ord>(xs: &[T]) -> Vec<T> {
            let mut v = xs.to_vec();
            v.sort();
            v
        }
        // Statistics hold f64 probabilities; sort by display form for a total
        // order, then compare structurally.
        fn sorted_stats(xs: &[CategoryStatistic]) -> Vec<&CategoryStatistic> {
            let mut v: Vec<&CategoryStatistic> = xs.iter().collect();
            v.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
            v
        }
        self.variant == other.variant
            && sorted(&self.types) == sorted(&other.types)
            && sorted(&self.features) == sorted(&other.features)
            && sorted(&self.local_constraints) == sorted(&other.local_constraints)
            && sorted(&self.percolation_constraints) == sorted(&other.percolation_constraints)
            && sorted_stats(&self.statistics) == sorted_stats(&other.statistics)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn description_display_and_subset() {
        let d = EventDescription::new("flu").bind("agent", "Bob").bind("time", "1");
        assert_eq!(d.to_string(), "flu{agent=Bob, time=1}");
        let partial = EventDescription::new("flu").bind("agent", "Bob");
        assert!(partial.bindings_subset_of(&d));
        assert!(!d.bindings_subset_of(&partial));
    }
}
