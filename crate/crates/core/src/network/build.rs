//! Assembly and validation of event networks.
//!
//! A [`NetworkBuilder`] accumulates declarations (optionally tagged with the
//! source position they were parsed from), checks the well-formedness rules,
//! and produces an immutable [`EventNetwork`]. Violations are data, not
//! failures: `validate` always returns a report.

use std::collections::HashMap;
use std::fmt;

use super::inherit;
use super::{
    CategoryStatistic, EventNetwork, FeatureDecl, LocalConstraint, PercolationConstraint,
    SpecPreemptionVariant, TypeDecl,
};
use crate::names::{AttrName, FeatureName, TypeName};
use crate::span::SourceSpan;

/// A percolation declaration as written: the child type is implied by the
/// feature's target and resolved during validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PercolationDecl {
    pub parent_type: TypeName,
    pub feature: FeatureName,
    pub child_attr: AttrName,
    pub parent_attr: AttrName,
}

impl fmt::Display for PercolationDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "percolate {}.{} : {} => {}",
            self.parent_type, self.feature, self.child_attr, self.parent_attr
        )
    }
}

/// One well-formedness violation, naming the offending declaration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub message: String,
    pub decl: String,
    pub span: Option<SourceSpan>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(span) = self.span {
            write!(f, "{span}: ")?;
        }
        write!(f, "{} (in `{}`)", self.message, self.decl)
    }
}

/// The outcome of validating a candidate network. Empty means ok.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Accumulates declarations for an [`EventNetwork`].
#[derive(Clone, Debug, Default)]
pub struct NetworkBuilder {
    types: Vec<(TypeName, Vec<TypeName>, Option<SourceSpan>)>,
    culprit_marks: Vec<(TypeName, Option<SourceSpan>)>,
    features: Vec<(FeatureDecl, Option<SourceSpan>)>,
    local_constraints: Vec<(LocalConstraint, Option<SourceSpan>)>,
    percolations: Vec<(PercolationDecl, Option<SourceSpan>)>,
    statistics: Vec<(CategoryStatistic, Option<SourceSpan>)>,
    variant: SpecPreemptionVariant,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        NetworkBuilder::default()
    }

    pub fn add_type(
        &mut self,
        name: impl Into<TypeName>,
        parents: Vec<TypeName>,
        span: Option<SourceSpan>,
    ) -> &mut Self {
        self.types.push((name.into(), parents, span));
        self
    }

    pub fn mark_culprit(&mut self, name: impl Into<TypeName>, span: Option<SourceSpan>) -> &mut Self {
        self.culprit_marks.push((name.into(), span));
        self
    }

    pub fn add_feature(&mut self, decl: FeatureDecl, span: Option<SourceSpan>) -> &mut Self {
        self.features.push((decl, span));
        self
    }

    pub fn add_local_constraint(
        &mut self,
        decl: LocalConstraint,
        span: Option<SourceSpan>,
    ) -> &mut Self {
        self.local_constraints.push((decl, span));
        self
    }

    pub fn add_percolation(&mut self, decl: PercolationDecl, span: Option<SourceSpan>) -> &mut Self {
        self.percolations.push((decl, span));
        self
    }

    pub fn add_statistic(&mut self, stat: CategoryStatistic, span: Option<SourceSpan>) -> &mut Self {
        self.statistics.push((stat, span));
        self
    }

    pub fn set_spec_preemption_variant(&mut self, variant: SpecPreemptionVariant) -> &mut Self {
        self.variant = variant;
        self
    }

    /// Checks every well-formedness rule and reports all violations found.
    pub fn validate(&self) -> ValidationReport {
        self.check().0
    }

    /// Validates and, when clean, produces the immutable network.
    pub fn build(&self) -> Result<EventNetwork, ValidationReport> {
        let (report, net) = self.check();
        match net {
            Some(net) if report.is_ok() => Ok(net),
            _ => Err(report),
        }
    }

    fn check(&self) -> (ValidationReport, Option<EventNetwork>) {
        let mut violations = Vec::new();

        // Type table; first occurrence wins on duplicates.
        let mut type_idx: HashMap<TypeName, usize> = HashMap::new();
        let mut types: Vec<TypeDecl> = Vec::new();
        for (name, parents, span) in &self.types {
            if type_idx.contains_key(name) {
                violations.push(Violation {
                    message: format!("duplicate type name: {name}"),
                    decl: format!("type {name}"),
                    span: *span,
                });
                continue;
            }
            type_idx.insert(name.clone(), types.len());
            let mut ps = parents.clone();
            ps.sort();
            ps.dedup();
            types.push(TypeDecl { name: name.clone(), parents: ps, is_culprit: false });
        }

        // Parent references.
        for (ti, decl) in types.iter().enumerate() {
            for p in &decl.parents {
                if !type_idx.contains_key(p) {
                    let span = self.types.get(ti).and_then(|(_, _, s)| *s);
                    violations.push(Violation {
                        message: format!("unknown parent type: {p}"),
                        decl: format!("type {}", decl.name),
                        span,
                    });
                }
            }
        }

        // Culprit marks.
        for (name, span) in &self.culprit_marks {
            match type_idx.get(name) {
                Some(&i) => types[i].is_culprit = true,
                None => violations.push(Violation {
                    message: format!("unknown type name: {name}"),
                    decl: format!("culprit {name}"),
                    span: *span,
                }),
            }
        }

        // Resolved parent edges (child index -> parent indices).
        let parents_idx: Vec<Vec<usize>> = types
            .iter()
            .map(|t| t.parents.iter().filter_map(|p| type_idx.get(p).copied()).collect())
            .collect();

        // Cycle check: one violation per strongly connected component.
        let mut cyclic = false;
        for scc in strongly_connected(&parents_idx) {
            let is_cycle = scc.len() > 1
                || parents_idx[scc[0]].contains(&scc[0]);
            if is_cycle {
                cyclic = true;
                let mut names: Vec<&str> = scc.iter().map(|&i| types[i].name.as_str()).collect();
                names.sort_unstable();
                let span = self
                    .types
                    .iter()
                    .find(|(n, _, _)| n.as_str() == names[0])
                    .and_then(|(_, _, s)| *s);
                violations.push(Violation {
                    message: format!("isa cycle: {}", names.join(",")),
                    decl: format!("type {}", names[0]),
                    span,
                });
            }
        }

        // Feature declarations.
        let mut seen_features: HashMap<(TypeName, FeatureName), ()> = HashMap::new();
        for (decl, span) in &self.features {
            for t in [&decl.source, &decl.target] {
                if !type_idx.contains_key(t) {
                    violations.push(Violation {
                        message: format!("unknown type name: {t}"),
                        decl: format!("feature {} : {} -> {}", decl.label, decl.source, decl.target),
                        span: *span,
                    });
                }
            }
            let key = (decl.source.clone(), decl.label.clone());
            if seen_features.insert(key, ()).is_some() {
                violations.push(Violation {
                    message: format!(
                        "type {} declares feature {} more than once",
                        decl.source, decl.label
                    ),
                    decl: format!("feature {} : {} -> {}", decl.label, decl.source, decl.target),
                    span: *span,
                });
            }
        }

        // Local constraints.
        for (decl, span) in &self.local_constraints {
            if !type_idx.contains_key(&decl.owner) {
                violations.push(Violation {
                    message: format!("unknown type name: {}", decl.owner),
                    decl: decl.to_string(),
                    span: *span,
                });
            }
        }

        // Hierarchy-dependent checks need an acyclic, resolved isa graph.
        let hierarchy = if cyclic || !violations.iter().all(|v| !v.message.starts_with("unknown parent")) {
            None
        } else {
            Some(inherit::Hierarchy::compute(&types, &parents_idx))
        };

        let features: Vec<FeatureDecl> = self.features.iter().map(|(d, _)| d.clone()).collect();

        // Declarations of `label` visible from type `i` (own or inherited).
        let reachable_decls = |h: &inherit::Hierarchy, i: usize, label: &FeatureName| -> Vec<usize> {
            let mut out = Vec::new();
            for (fi, f) in features.iter().enumerate() {
                if f.label != *label {
                    continue;
                }
                if let Some(&si) = type_idx.get(&f.source) {
                    if si == i || h.ancestor_set[i][si] {
                        out.push(fi);
                    }
                }
            }
            out
        };

        // Percolation constraints: the (parent, feature) pair must match a
        // feature declared on the parent type or one of its ancestors.
        let mut percolations: Vec<PercolationConstraint> = Vec::new();
        for (decl, span) in &self.percolations {
            let Some(&pi) = type_idx.get(&decl.parent_type) else {
                violations.push(Violation {
                    message: format!("unknown type name: {}", decl.parent_type),
                    decl: decl.to_string(),
                    span: *span,
                });
                continue;
            };
            let Some(h) = &hierarchy else { continue };
            let decls = reachable_decls(h, pi, &decl.feature);
            match decls.first() {
                None => violations.push(Violation {
                    message: format!(
                        "feature {} is not declared on {} or any ancestor",
                        decl.feature, decl.parent_type
                    ),
                    decl: decl.to_string(),
                    span: *span,
                }),
                Some(&fi) => {
                    // The child type is the target of the nearest declaration:
                    // prefer the parent type's own, then ancestors in order.
                    let nearest = decls
                        .iter()
                        .copied()
                        .min_by_key(|&fi| {
                            let si = type_idx[&features[fi].source];
                            if si == pi {
                                0
                            } else {
                                1 + h.ancestors[pi].iter().position(|&a| a == si).unwrap_or(usize::MAX - 1)
                            }
                        })
                        .unwrap_or(fi);
                    percolations.push(PercolationConstraint {
                        parent_type: decl.parent_type.clone(),
                        feature: decl.feature.clone(),
                        child_type: features[nearest].target.clone(),
                        child_attr: decl.child_attr.clone(),
                        parent_attr: decl.parent_attr.clone(),
                    });
                }
            }
        }

        // Statistics.
        for (stat, span) in &self.statistics {
            let p = stat.p();
            if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                violations.push(Violation {
                    message: format!("probability {p} is not in [0, 1]"),
                    decl: format!("{stat:?}"),
                    span: *span,
                });
            }
            match stat {
                CategoryStatistic::Prior { desc, .. } => {
                    if !type_idx.contains_key(&desc.event_type) {
                        violations.push(Violation {
                            message: format!("unknown type name: {}", desc.event_type),
                            decl: format!("prior {desc}"),
                            span: *span,
                        });
                    }
                }
                CategoryStatistic::FeatureCond { parent, feature, child, .. } => {
                    let decl = format!("cond {parent} -{feature}-> {child}");
                    let pi = type_idx.get(&parent.event_type).copied();
                    if pi.is_none() {
                        violations.push(Violation {
                            message: format!("unknown type name: {}", parent.event_type),
                            decl: decl.clone(),
                            span: *span,
                        });
                    }
                    if !type_idx.contains_key(&child.event_type) {
                        violations.push(Violation {
                            message: format!("unknown type name: {}", child.event_type),
                            decl: decl.clone(),
                            span: *span,
                        });
                    }
                    if let (Some(pi), Some(h)) = (pi, &hierarchy) {
                        let decls = reachable_decls(h, pi, feature);
                        if decls.is_empty() {
                            violations.push(Violation {
                                message: format!(
                                    "feature {} is not declared on {} or any ancestor",
                                    feature, parent.event_type
                                ),
                                decl,
                                span: *span,
                            });
                        } else if !decls.iter().any(|&fi| features[fi].target == child.event_type) {
                            let targets: Vec<&str> =
                                decls.iter().map(|&fi| features[fi].target.as_str()).collect();
                            violations.push(Violation {
                                message: format!(
                                    "FeatureCond target mismatch: {} maps {} to {}, not {}",
                                    feature,
                                    parent.event_type,
                                    targets.join("/"),
                                    child.event_type
                                ),
                                decl,
                                span: *span,
                            });
                        }
                    }
                }
                CategoryStatistic::SpecCond { general, specific, .. } => {
                    let decl = format!("speccond {general} => {specific}");
                    let gi = type_idx.get(general).copied();
                    let si = type_idx.get(specific).copied();
                    for (t, i) in [(general, gi), (specific, si)] {
                        if i.is_none() {
                            violations.push(Violation {
                                message: format!("unknown type name: {t}"),
                                decl: decl.clone(),
                                span: *span,
                            });
                        }
                    }
                    if let (Some(gi), Some(si), Some(h)) = (gi, si, &hierarchy) {
                        if !h.ancestor_set[si][gi] {
                            violations.push(Violation {
                                message: format!(
                                    "{specific} is not a strict descendant of {general}"
                                ),
                                decl,
                                span: *span,
                            });
                        }
                    }
                }
            }
        }

        // Every culprit needs at least one prior of its exact type.
        for t in &types {
            if !t.is_culprit {
                continue;
            }
            let has_prior = self.statistics.iter().any(|(s, _)| {
                matches!(s, CategoryStatistic::Prior { desc, .. } if desc.event_type == t.name)
            });
            if !has_prior {
                let span = self
                    .culprit_marks
                    .iter()
                    .find(|(n, _)| *n == t.name)
                    .and_then(|(_, s)| *s);
                violations.push(Violation {
                    message: format!("culprit type {} has no prior statistic", t.name),
                    decl: format!("culprit {}", t.name),
                    span,
                });
            }
        }

        let report = ValidationReport { violations };
        if !report.is_ok() {
            return (report, None);
        }

        let hierarchy = hierarchy.expect("clean network has a hierarchy");
        let features_of = {
            let mut by_type: Vec<Vec<usize>> = vec![Vec::new(); types.len()];
            for (fi, f) in features.iter().enumerate() {
                by_type[type_idx[&f.source]].push(fi);
            }
            by_type
        };
        let legal_links =
            inherit::compute_legal_links(&types, &features, &features_of, &hierarchy, &type_idx);

        let net = EventNetwork {
            types,
            features,
            local_constraints: self.local_constraints.iter().map(|(d, _)| d.clone()).collect(),
            percolation_constraints: percolations,
            statistics: self.statistics.iter().map(|(s, _)| s.clone()).collect(),
            variant: self.variant,
            type_idx,
            ancestors: hierarchy.ancestors,
            ancestor_set: hierarchy.ancestor_set,
            descendants: hierarchy.descendants,
            features_of,
            legal_links,
        };
        (report, Some(net))
    }
}

/// Tarjan's strongly connected components over `edges` (node -> successors).
/// Components come out in a deterministic order.
fn strongly_connected(edges: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct State<'a> {
        edges: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        lowlink: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next_index: usize,
        out: Vec<Vec<usize>>,
    }

    fn visit(s: &mut State, v: usize) {
        s.index[v] = Some(s.next_index);
        s.lowlink[v] = s.next_index;
        s.next_index += 1;
        s.stack.push(v);
        s.on_stack[v] = true;
        for &w in s.edges[v].iter() {
            if s.index[w].is_none() {
                visit(s, w);
                s.lowlink[v] = s.lowlink[v].min(s.lowlink[w]);
            } else if s.on_stack[w] {
                s.lowlink[v] = s.lowlink[v].min(s.index[w].unwrap());
            }
        }
        if s.lowlink[v] == s.index[v].unwrap() {
            let mut comp = Vec::new();
            loop {
                let w = s.stack.pop().unwrap();
                s.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            s.out.push(comp);
        }
    }

    let n = edges.len();
    let mut s = State {
        edges,
        index: vec![None; n],
        lowlink: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next_index: 0,
        out: Vec::new(),
    };
    for v in 0..n {
        if s.index[v].is_none() {
            visit(&mut s, v);
        }
    }
    s.out
}
