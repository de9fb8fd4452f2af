//! Hierarchy queries and path preemption.
//!
//! Two preemption rules keep inherited information maximally specific:
//!
//! * generalization preemption: a feature inherited from an ancestor is
//!   excluded when a strictly more specific type on the way also declares
//!   the same label;
//! * specialization preemption: refining a feature child down the spec
//!   hierarchy is excluded when a refinement of the source type provides an
//!   intermediate, more specific feature target to go through.

use std::collections::{BTreeSet, HashMap};

use super::{EventNetwork, FeatureDecl, LegalFeatureLink, NetworkError, SpecPreemptionVariant, TypeDecl};
use crate::names::{FeatureName, TypeName};

/// Precomputed hierarchy tables shared by validation and the built network.
pub(crate) struct Hierarchy {
    pub ancestors: Vec<Vec<usize>>,
    pub ancestor_set: Vec<Vec<bool>>,
    pub descendants: Vec<Vec<usize>>,
}

impl Hierarchy {
    /// Requires an acyclic, fully resolved parent relation.
    pub fn compute(types: &[TypeDecl], parents_idx: &[Vec<usize>]) -> Self {
        let n = types.len();
        let mut ancestors = Vec::with_capacity(n);
        let mut ancestor_set = vec![vec![false; n]; n];
        for c in 0..n {
            let ordered = ordered_ancestors(c, parents_idx, types);
            for &a in &ordered {
                ancestor_set[c][a] = true;
            }
            ancestors.push(ordered);
        }
        let mut descendants: Vec<Vec<usize>> = vec![Vec::new(); n];
        for d in 0..n {
            for a in 0..n {
                if ancestor_set[d][a] {
                    descendants[a].push(d);
                }
            }
        }
        for list in &mut descendants {
            list.sort_by(|&x, &y| types[x].name.cmp(&types[y].name));
        }
        Hierarchy { ancestors, ancestor_set, descendants }
    }
}

/// Strict ancestors of `c` in topological order (most specific first),
/// name-ordered among incomparable types.
fn ordered_ancestors(c: usize, parents_idx: &[Vec<usize>], types: &[TypeDecl]) -> Vec<usize> {
    let mut members: BTreeSet<usize> = BTreeSet::new();
    let mut stack: Vec<usize> = parents_idx[c].clone();
    while let Some(t) = stack.pop() {
        if members.insert(t) {
            stack.extend(parents_idx[t].iter().copied());
        }
    }

    // Kahn over the induced subgraph: a type is ready once every child of it
    // within {c} + members has been emitted.
    let mut pending: HashMap<usize, usize> = members.iter().map(|&m| (m, 0)).collect();
    for &q in members.iter().chain(std::iter::once(&c)) {
        for &p in &parents_idx[q] {
            if let Some(count) = pending.get_mut(&p) {
                *count += 1;
            }
        }
    }
    fn emit<'a>(
        t: usize,
        parents_idx: &[Vec<usize>],
        types: &'a [TypeDecl],
        pending: &mut HashMap<usize, usize>,
        ready: &mut BTreeSet<(&'a TypeName, usize)>,
    ) {
        for &p in &parents_idx[t] {
            if let Some(count) = pending.get_mut(&p) {
                *count -= 1;
                if *count == 0 {
                    ready.insert((&types[p].name, p));
                }
            }
        }
    }

    let mut ready: BTreeSet<(&TypeName, usize)> = BTreeSet::new();
    emit(c, parents_idx, types, &mut pending, &mut ready);
    let mut out = Vec::with_capacity(members.len());
    while let Some(&(_, t)) = ready.iter().next() {
        ready.remove(&(&types[t].name, t));
        out.push(t);
        emit(t, parents_idx, types, &mut pending, &mut ready);
    }
    debug_assert_eq!(out.len(), members.len());
    out
}

/// Non-preempted feature links per type. A candidate inherited from `via` is
/// dropped when any strictly more specific candidate source declares the same
/// label; the type's own declarations are never dropped.
pub(crate) fn compute_legal_links(
    types: &[TypeDecl],
    features: &[FeatureDecl],
    features_of: &[Vec<usize>],
    h: &Hierarchy,
    type_idx: &HashMap<TypeName, usize>,
) -> Vec<Vec<LegalFeatureLink>> {
    let _ = type_idx;
    let mut out = Vec::with_capacity(types.len());
    for c in 0..types.len() {
        let mut sources: Vec<usize> = Vec::with_capacity(1 + h.ancestors[c].len());
        sources.push(c);
        sources.extend(h.ancestors[c].iter().copied());

        let mut candidates: Vec<(usize, usize)> = Vec::new(); // (via, feature decl)
        for &via in &sources {
            for &fi in &features_of[via] {
                candidates.push((via, fi));
            }
        }
        let mut kept: Vec<LegalFeatureLink> = Vec::new();
        for &(via, fi) in &candidates {
            let preempted = candidates.iter().any(|&(via2, fj)| {
                via2 != via
                    && features[fj].label == features[fi].label
                    && h.ancestor_set[via2][via]
            });
            if !preempted {
                kept.push(LegalFeatureLink {
                    via: types[via].name.clone(),
                    feature: features[fi].label.clone(),
                    target: features[fi].target.clone(),
                    decl_idx: fi,
                });
            }
        }
        kept.sort_by(|a, b| (&a.feature, &a.via).cmp(&(&b.feature, &b.via)));
        out.push(kept);
    }
    out
}

/// One candidate feature path of a type, with its preemption verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeaturePath {
    pub via: TypeName,
    pub feature: FeatureName,
    pub target: TypeName,
    pub verdict: PathVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PathVerdict {
    Kept,
    /// Preempted by the feature declared on `via` (targeting `target`).
    PreemptedBy { via: TypeName, target: TypeName },
}

impl EventNetwork {
    /// All types reachable from `c` through isa links, excluding `c` itself.
    /// Most specific first; incomparable types ordered by name.
    pub fn isa_ancestors(&self, c: &TypeName) -> Result<Vec<TypeName>, NetworkError> {
        let i = self.idx(c)?;
        Ok(self.ancestors[i].iter().map(|&a| self.types[a].name.clone()).collect())
    }

    /// All strict isa-descendants of `c`, sorted by name.
    pub fn strict_descendants(&self, c: &TypeName) -> Result<Vec<TypeName>, NetworkError> {
        let i = self.idx(c)?;
        Ok(self.descendants[i].iter().map(|&d| self.types[d].name.clone()).collect())
    }

    /// True when `specific` is a strict isa-descendant of `general`.
    pub fn is_strict_descendant(
        &self,
        specific: &TypeName,
        general: &TypeName,
    ) -> Result<bool, NetworkError> {
        let s = self.idx(specific)?;
        let g = self.idx(general)?;
        Ok(self.is_strict_ancestor_idx(g, s))
    }

    /// The non-preempted feature links available to `c`, own or inherited,
    /// sorted by (feature, via).
    pub fn legal_feature_links(&self, c: &TypeName) -> Result<Vec<LegalFeatureLink>, NetworkError> {
        let i = self.idx(c)?;
        Ok(self.legal_links[i].clone())
    }

    /// Every candidate feature path of `c` with a kept/preempted verdict.
    /// Preempted entries name the declaration that preempts them.
    pub fn feature_paths(&self, c: &TypeName) -> Result<Vec<FeaturePath>, NetworkError> {
        let i = self.idx(c)?;
        let mut sources: Vec<usize> = Vec::with_capacity(1 + self.ancestors[i].len());
        sources.push(i);
        sources.extend(self.ancestors[i].iter().copied());
        let mut candidates: Vec<(usize, usize)> = Vec::new();
        for &via in &sources {
            for &fi in &self.features_of[via] {
                candidates.push((via, fi));
            }
        }
        candidates.sort_by(|&(va, fa), &(vb, fb)| {
            (&self.features[fa].label, &self.types[va].name)
                .cmp(&(&self.features[fb].label, &self.types[vb].name))
        });
        let mut out = Vec::with_capacity(candidates.len());
        for &(via, fi) in &candidates {
            let preemptor = candidates.iter().find(|&&(via2, fj)| {
                via2 != via
                    && self.features[fj].label == self.features[fi].label
                    && self.ancestor_set[via2][via]
            });
            let verdict = match preemptor {
                None => PathVerdict::Kept,
                Some(&(via2, fj)) => PathVerdict::PreemptedBy {
                    via: self.types[via2].name.clone(),
                    target: self.features[fj].target.clone(),
                },
            };
            out.push(FeaturePath {
                via: self.types[via].name.clone(),
                feature: self.features[fi].label.clone(),
                target: self.features[fi].target.clone(),
                verdict,
            });
        }
        Ok(out)
    }

    /// Whether refining the `feature`-child of `source` down to
    /// `refined_target` is allowed under the network's preemption reading.
    pub fn legal_spec_refinements(
        &self,
        source: &TypeName,
        feature: &FeatureName,
        refined_target: &TypeName,
    ) -> Result<bool, NetworkError> {
        let si = self.idx(source)?;
        let ri = self.idx(refined_target)?;
        let entries: Vec<&LegalFeatureLink> =
            self.legal_links[si].iter().filter(|l| l.feature == *feature).collect();
        if entries.is_empty() {
            return Err(NetworkError::FeatureNotReachable {
                source_type: source.clone(),
                feature: feature.clone(),
            });
        }
        let applicable: Vec<usize> = entries
            .iter()
            .filter_map(|l| {
                let ti = self.type_idx[&l.target];
                self.is_strict_ancestor_idx(ti, ri).then_some(ti)
            })
            .collect();
        if applicable.is_empty() {
            return Err(NetworkError::NotARefinement {
                source_type: source.clone(),
                feature: feature.clone(),
                refined: refined_target.clone(),
            });
        }
        Ok(applicable.iter().any(|&target| !self.spec_preempted(si, feature, target, ri)))
    }

    /// True when the path source -f-> target -spec+-> refined is preempted by
    /// some refinement of the source declaring `f` with an intermediate,
    /// strictly more specific target.
    fn spec_preempted(&self, source: usize, feature: &FeatureName, target: usize, refined: usize) -> bool {
        let mut candidates: Vec<usize> = Vec::with_capacity(1 + self.descendants[source].len());
        candidates.push(source);
        candidates.extend(self.descendants[source].iter().copied());
        for c1 in candidates {
            for &fi in &self.features_of[c1] {
                if self.features[fi].label != *feature {
                    continue;
                }
                let c1_target = self.type_idx[&self.features[fi].target];
                if !self.is_strict_ancestor_idx(c1_target, refined) {
                    continue;
                }
                let condition = match self.variant {
                    SpecPreemptionVariant::Primed => self.is_strict_ancestor_idx(target, c1_target),
                    SpecPreemptionVariant::Literal => self.is_strict_ancestor_idx(target, c1),
                };
                if condition {
                    return true;
                }
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::super::build::NetworkBuilder;
    use super::*;
    use crate::names::TypeName;

    fn tn(s: &str) -> TypeName {
        TypeName::from(s)
    }

    fn diamond() -> EventNetwork {
        let mut b = NetworkBuilder::new();
        b.add_type("d", vec![], None);
        b.add_type("b", vec![tn("d")], None);
        b.add_type("c", vec![tn("d")], None);
        b.add_type("a", vec![tn("b"), tn("c")], None);
        b.build().expect("valid diamond")
    }

    #[test]
    fn diamond_ancestor_order() {
        let net = diamond();
        let anc = net.isa_ancestors(&tn("a")).unwrap();
        assert_eq!(anc, vec![tn("b"), tn("c"), tn("d")]);
        assert_eq!(net.isa_ancestors(&tn("d")).unwrap(), Vec::<TypeName>::new());
        assert!(matches!(
            net.isa_ancestors(&tn("zzz")),
            Err(NetworkError::UnknownType(_))
        ));
    }

    fn abstract_spec_kb() -> EventNetwork {
        // a -f-> b; a1 isa a declares f -> b1; b1 isa b; b2 isa b1.
        let mut builder = NetworkBuilder::new();
        builder.add_type("a", vec![], None);
        builder.add_type("a1", vec![tn("a")], None);
        builder.add_type("b", vec![], None);
        builder.add_type("b1", vec![tn("b")], None);
        builder.add_type("b2", vec![tn("b1")], None);
        builder.add_feature(
            FeatureDecl { label: "f".into(), source: tn("a"), target: tn("b") },
            None,
        );
        builder.add_feature(
            FeatureDecl { label: "f".into(), source: tn("a1"), target: tn("b1") },
            None,
        );
        builder.build().expect("valid abstract kb")
    }

    #[test]
    fn own_declaration_preempts_inherited() {
        let net = abstract_spec_kb();
        let links = net.legal_feature_links(&tn("a1")).unwrap();
        assert_eq!(links.len(), 1);
        assert_eq!(links[0].via, tn("a1"));
        assert_eq!(links[0].target, tn("b1"));

        let paths = net.feature_paths(&tn("a1")).unwrap();
        assert_eq!(paths.len(), 2);
        assert_eq!(paths[0].via, tn("a"));
        assert_eq!(
            paths[0].verdict,
            PathVerdict::PreemptedBy { via: tn("a1"), target: tn("b1") }
        );
        assert_eq!(paths[1].verdict, PathVerdict::Kept);
    }

    #[test]
    fn spec_refinement_preemption_variants() {
        let net = abstract_spec_kb();
        // Primed reading: the deeper declaration of f on a1 provides the
        // intermediate stop b1, so jumping a's child b straight to b2 is
        // preempted, while refining to b1 or refining from a1 is fine.
        assert_eq!(net.legal_spec_refinements(&tn("a"), &"f".into(), &tn("b1")).unwrap(), true);
        assert_eq!(net.legal_spec_refinements(&tn("a"), &"f".into(), &tn("b2")).unwrap(), false);
        assert_eq!(net.legal_spec_refinements(&tn("a1"), &"f".into(), &tn("b2")).unwrap(), true);

        let literal = net
            .clone()
            .with_spec_preemption_variant(SpecPreemptionVariant::Literal);
        assert_eq!(literal.legal_spec_refinements(&tn("a"), &"f".into(), &tn("b2")).unwrap(), true);

        // Refining below a type with no feature at all is a precondition error.
        assert!(matches!(
            net.legal_spec_refinements(&tn("b"), &"f".into(), &tn("b2")),
            Err(NetworkError::FeatureNotReachable { .. })
        ));
        // So is "refining" to a non-descendant of the target.
        assert!(matches!(
            net.legal_spec_refinements(&tn("a"), &"f".into(), &tn("a1")),
            Err(NetworkError::NotARefinement { .. })
        ));
    }
}
