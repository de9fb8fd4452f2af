//! Category-statistic lookup: most-specific match over declared priors and
//! conditionals.
//!
//! Matching uses exact type equality plus subset bindings; among the matches
//! the one with the most bindings wins. Ties in binding count are only an
//! error when the tied statistics disagree on the probability.

use std::collections::HashMap;

use super::{CategoryStatistic, EventDescription, EventNetwork};
use crate::names::{FeatureName, TypeName};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StatLookupError {
    #[error("no applicable statistic for {0}")]
    NoStatistic(String),
    #[error("ambiguous statistics for {0}: tied specificity with different probabilities")]
    AmbiguousStatistic(String),
}

fn most_specific(
    candidates: Vec<(usize, f64)>,
    subject: impl Fn() -> String,
) -> Result<f64, StatLookupError> {
    let best = match candidates.iter().map(|&(s, _)| s).max() {
        None => return Err(StatLookupError::NoStatistic(subject())),
        Some(b) => b,
    };
    let mut tied = candidates.iter().filter(|&&(s, _)| s == best).map(|&(_, p)| p);
    let first = tied.next().expect("max implies at least one candidate");
    if tied.all(|p| p == first) {
        Ok(first)
    } else {
        Err(StatLookupError::AmbiguousStatistic(subject()))
    }
}

impl EventNetwork {
    /// Prior probability of a description: the most specific `Prior` whose
    /// type matches exactly and whose bindings are a subset of `desc`'s.
    pub fn lookup_prior(&self, desc: &EventDescription) -> Result<f64, StatLookupError> {
        let candidates: Vec<(usize, f64)> = self
            .statistics
            .iter()
            .filter_map(|s| match s {
                CategoryStatistic::Prior { desc: d, p }
                    if d.event_type == desc.event_type && d.bindings_subset_of(desc) =>
                {
                    Some((d.bindings.len(), *p))
                }
                _ => None,
            })
            .collect();
        most_specific(candidates, || format!("prior {desc}"))
    }

    /// Conditional probability of a feature child: most specific
    /// `FeatureCond` over both descriptions, specificity counted as the total
    /// number of matched bindings.
    pub fn lookup_feature_cond(
        &self,
        parent: &EventDescription,
        feature: &FeatureName,
        child: &EventDescription,
    ) -> Result<f64, StatLookupError> {
        let candidates: Vec<(usize, f64)> = self
            .statistics
            .iter()
            .filter_map(|s| match s {
                CategoryStatistic::FeatureCond { parent: sp, feature: sf, child: sc, p }
                    if sf == feature
                        && sp.event_type == parent.event_type
                        && sc.event_type == child.event_type
                        && sp.bindings_subset_of(parent)
                        && sc.bindings_subset_of(child) =>
                {
                    Some((sp.bindings.len() + sc.bindings.len(), *p))
                }
                _ => None,
            })
            .collect();
        most_specific(candidates, || format!("cond {parent} -{feature}-> {child}"))
    }

    /// Probability of a specialization step. A directly declared statistic for
    /// the pair wins; otherwise declared steps multiply along a chain from
    /// `general` down to `specific` (the most probable chain when several are
    /// declared).
    pub fn lookup_spec_cond(
        &self,
        general: &TypeName,
        specific: &TypeName,
    ) -> Result<f64, StatLookupError> {
        let mut steps: HashMap<&TypeName, Vec<(&TypeName, f64)>> = HashMap::new();
        for s in &self.statistics {
            if let CategoryStatistic::SpecCond { general: g, specific: sp, p } = s {
                steps.entry(g).or_default().push((sp, *p));
            }
        }

        fn best(
            steps: &HashMap<&TypeName, Vec<(&TypeName, f64)>>,
            from: &TypeName,
            to: &TypeName,
            memo: &mut HashMap<(TypeName, TypeName), Option<f64>>,
        ) -> Option<f64> {
            let key = (from.clone(), to.clone());
            if let Some(&cached) = memo.get(&key) {
                return cached;
            }
            let mut result: Option<f64> = None;
            if let Some(outgoing) = steps.get(from) {
                if let Some(&(_, p)) = outgoing.iter().find(|(t, _)| *t == to) {
                    result = Some(p);
                } else {
                    for &(mid, p) in outgoing {
                        if let Some(rest) = best(steps, mid, to, memo) {
                            let total = p * rest;
                            result = Some(result.map_or(total, |r: f64| r.max(total)));
                        }
                    }
                }
            }
            memo.insert(key, result);
            result
        }

        best(&steps, general, specific, &mut HashMap::new())
            .ok_or_else(|| StatLookupError::NoStatistic(format!("speccond {general} => {specific}")))
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

    fn kb_with_stats() -> EventNetwork {
        let mut b = NetworkBuilder::new();
        b.add_type("flu", vec![], None);
        b.add_type("sneezing", vec![], None);
        b.add_feature(
            super::super::FeatureDecl {
                label: "sneeze-effect".into(),
                source: tn("flu"),
                target: tn("sneezing"),
            },
            None,
        );
        b.add_statistic(
            CategoryStatistic::Prior { desc: EventDescription::new("flu"), p: 0.001 },
            None,
        );
        b.add_statistic(
            CategoryStatistic::Prior {
                desc: EventDescription::new("flu").bind("severity", "high"),
                p: 0.0001,
            },
            None,
        );
        b.add_statistic(
            CategoryStatistic::FeatureCond {
                parent: EventDescription::new("flu"),
                feature: "sneeze-effect".into(),
                child: EventDescription::new("sneezing"),
                p: 0.6,
            },
            None,
        );
        b.build().expect("valid")
    }

    #[test]
    fn prior_ignores_extra_bindings() {
        let net = kb_with_stats();
        let desc = EventDescription::new("flu").bind("agent", "Bob").bind("time", "1");
        assert_eq!(net.lookup_prior(&desc).unwrap(), 0.001);
    }

    #[test]
    fn prior_prefers_most_bindings() {
        let net = kb_with_stats();
        let desc = EventDescription::new("flu").bind("severity", "high");
        assert_eq!(net.lookup_prior(&desc).unwrap(), 0.0001);
    }

    #[test]
    fn prior_missing_is_an_error() {
        let net = kb_with_stats();
        let desc = EventDescription::new("sneezing");
        assert!(matches!(net.lookup_prior(&desc), Err(StatLookupError::NoStatistic(_))));
    }

    #[test]
    fn feature_cond_matches_with_bindings() {
        let net = kb_with_stats();
        let p = EventDescription::new("flu").bind("agent", "Bob");
        let c = EventDescription::new("sneezing").bind("agent", "Bob");
        assert_eq!(net.lookup_feature_cond(&p, &"sneeze-effect".into(), &c).unwrap(), 0.6);
    }

    #[test]
    fn refined_feature_cond_wins() {
        let mut b = NetworkBuilder::new();
        b.add_type("alarm", vec![], None);
        b.add_type("neighbour-call", vec![], None);
        b.add_feature(
            super::super::FeatureDecl {
                label: "call".into(),
                source: tn("alarm"),
                target: tn("neighbour-call"),
            },
            None,
        );
        b.add_statistic(
            CategoryStatistic::FeatureCond {
                parent: EventDescription::new("alarm"),
                feature: "call".into(),
                child: EventDescription::new("neighbour-call"),
                p: 0.8,
            },
            None,
        );
        b.add_statistic(
            CategoryStatistic::FeatureCond {
                parent: EventDescription::new("alarm"),
                feature: "call".into(),
                child: EventDescription::new("neighbour-call").bind("caller", "Jack"),
                p: 0.016,
            },
            None,
        );
        let net = b.build().expect("valid");
        let parent = EventDescription::new("alarm");
        let bare = EventDescription::new("neighbour-call");
        let jack = EventDescription::new("neighbour-call").bind("caller", "Jack");
        assert_eq!(net.lookup_feature_cond(&parent, &"call".into(), &bare).unwrap(), 0.8);
        assert_eq!(net.lookup_feature_cond(&parent, &"call".into(), &jack).unwrap(), 0.016);
    }

    #[test]
    fn spec_cond_direct_and_chain() {
        let mut b = NetworkBuilder::new();
        b.add_type("a", vec![], None);
        b.add_type("b", vec![tn("a")], None);
        b.add_type("c", vec![tn("b")], None);
        b.add_statistic(
            CategoryStatistic::SpecCond { general: tn("a"), specific: tn("b"), p: 0.5 },
            None,
        );
        b.add_statistic(
            CategoryStatistic::SpecCond { general: tn("b"), specific: tn("c"), p: 0.4 },
            None,
        );
        let net = b.build().expect("valid");
        assert_eq!(net.lookup_spec_cond(&tn("a"), &tn("b")).unwrap(), 0.5);
        let chained = net.lookup_spec_cond(&tn("a"), &tn("c")).unwrap();
        assert!((chained - 0.2).abs() < 1e-15);
        assert!(matches!(
            net.lookup_spec_cond(&tn("c"), &tn("a")),
            Err(StatLookupError::NoStatistic(_))
        ));
    }
}
