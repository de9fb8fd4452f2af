//! The knowledge-base DSL: a line-oriented text format for event networks
//! and observation files.
//!
//! One declaration per line, `#` comments:
//!
//! ```text
//! type NAME [isa NAME (, NAME)*]
//! feature NAME : NAME -> NAME
//! constraint NAME : ATTR != ATTR | ATTR = ATTR | ATTR = CONST | ATTR != CONST
//! percolate NAME . FEATURE : CHILDATTR => PARENTATTR
//! prior NAME [BINDINGS] = P
//! cond NAME [BINDINGS] -FEATURE-> NAME [BINDINGS] = P
//! speccond NAME => NAME = P
//! culprit NAME
//! ```
//!
//! where `BINDINGS := { ATTR = CONST (, ATTR = CONST)* }` and `P` is a
//! decimal in `[0, 1]`. Observation files hold `obs [LABEL] NAME [BINDINGS]`
//! lines. Constants are opaque atoms: quoting is stripped, so `"1"` and `1`
//! are the same constant, while `01` and `1` are different ones. On the
//! right-hand side of a constraint a quoted or numeric atom is a constant
//! and a bare alphabetic one names an attribute.

mod lex;
mod parse;
mod serialize;

pub use parse::{parse_kb, parse_observations};
pub use serialize::serialize_kb;

use std::fmt;

use crate::network::{EventDescription, ValidationReport};
use crate::span::SourceSpan;

/// A parse problem, positioned in the input text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: SourceSpan,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

/// Why a knowledge-base text was rejected: it either failed to parse or
/// parsed into an ill-formed network.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum KbError {
    Syntax(Vec<Diagnostic>),
    Invalid(ValidationReport),
}

impl fmt::Display for KbError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KbError::Syntax(diags) => {
                for (i, d) in diags.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "{d}")?;
                }
                Ok(())
            }
            KbError::Invalid(report) => write!(f, "{report}"),
        }
    }
}

/// An observed event: an identifier plus the existentially quantified
/// description it asserts. The type is resolved against a knowledge base at
/// query time, not at parse time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    pub id: String,
    pub desc: EventDescription,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::CategoryStatistic;

    const FLU: &str = include_str!("../../../../corpus/flu.ekb");

    #[test]
    fn flu_fixture_counts() {
        let net = parse_kb(FLU).expect("flu fixture parses");
        assert_eq!(net.types().len(), 4);
        assert_eq!(net.features().len(), 3);
        assert_eq!(net.local_constraints().len(), 1);
        assert_eq!(net.percolation_constraints().len(), 4 + 1);
        assert_eq!(net.statistics().len(), 4);
        assert_eq!(net.culprits().count(), 1);
        assert_eq!(
            net.isa_ancestors(&"flu".into()).unwrap(),
            vec![crate::names::TypeName::from("disease")]
        );
        let links = net.legal_feature_links(&"flu".into()).unwrap();
        assert_eq!(links.len(), 3);
        assert!(net.legal_feature_links(&"disease".into()).unwrap().is_empty());
    }

    #[test]
    fn empty_input_is_an_empty_network() {
        let net = parse_kb("").expect("empty network");
        assert!(net.types().is_empty());
        assert_eq!(serialize_kb(&net), "");
    }

    #[test]
    fn truncated_feature_line_reports_position() {
        let err = parse_kb("feature f : flu -> ").unwrap_err();
        let KbError::Syntax(diags) = err else { panic!("expected syntax error") };
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].span, SourceSpan::new(1, 20));
        assert!(diags[0].message.contains("expected target type name"));
    }

    #[test]
    fn isa_cycle_is_a_validation_error() {
        let err = parse_kb("type a isa b\ntype b isa a\n").unwrap_err();
        let KbError::Invalid(report) = err else { panic!("expected validation error") };
        assert!(report.violations.iter().any(|v| v.message == "isa cycle: a,b"));
    }

    #[test]
    fn feature_cond_target_mismatch() {
        let text = "type flu\ntype sneezing\nfeature infect : flu -> flu\ncond flu -infect-> sneezing = 0.3\n";
        let err = parse_kb(text).unwrap_err();
        let KbError::Invalid(report) = err else { panic!("expected validation error") };
        assert!(report
            .violations
            .iter()
            .any(|v| v.message.starts_with("FeatureCond target mismatch")));
        assert_eq!(report.violations[0].span, Some(SourceSpan::new(4, 6)));
    }

    #[test]
    fn observations_parse_in_order() {
        let obs = parse_observations(include_str!("../../../../corpus/arnold-bob.obs")).unwrap();
        assert_eq!(obs.len(), 4);
        assert_eq!(obs[0].id, "obs1");
        assert_eq!(obs[0].desc.event_type.as_str(), "sneezing");
        assert_eq!(obs[0].desc.bindings.len(), 2);
        assert_eq!(obs[3].id, "obs4");
        assert_eq!(
            obs[2].desc.bindings.get("agent"),
            Some(&crate::names::ConstValue::from("Arnold"))
        );
    }

    #[test]
    fn labeled_observation_keeps_its_label() {
        let obs = parse_observations("obs first sneezing { agent = Bob }\nobs headache\n").unwrap();
        assert_eq!(obs[0].id, "first");
        assert_eq!(obs[0].desc.event_type.as_str(), "sneezing");
        assert_eq!(obs[1].id, "obs2");
    }

    #[test]
    fn observation_missing_type_is_rejected() {
        let diags = parse_observations("obs { agent = Bob }\n").unwrap_err();
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("expected observation type name"));
        assert_eq!(diags[0].span.line, 1);
    }

    #[test]
    fn constants_are_opaque() {
        let obs = parse_observations("obs t { a = 1, b = \"1\", c = 01 }\n").unwrap();
        let b = &obs[0].desc.bindings;
        assert_eq!(b.get("a"), b.get("b"));
        assert_ne!(b.get("a"), b.get("c"));
    }

    #[test]
    fn constraint_rhs_disambiguation() {
        let net = parse_kb(
            "type t\nconstraint t : occ = \"cont\"\nconstraint t : agent != infectee\nconstraint t : count = 3\n",
        )
        .unwrap();
        use crate::network::ConstraintRelation::*;
        let rels: Vec<_> = net.local_constraints().iter().map(|c| &c.relation).collect();
        assert!(matches!(rels[0], AttrEqConst(_, _)));
        assert!(matches!(rels[1], AttrNeqAttr(_, _)));
        assert!(matches!(rels[2], AttrEqConst(_, _)));
    }

    #[test]
    fn roundtrip_is_order_insensitive() {
        let a = "type t\ntype u isa t\nfeature f : t -> u\nprior t = 0.25\nculprit t\n";
        let b = "culprit t\nprior t = 0.25\nfeature f : t -> u\ntype u isa t\ntype t\n";
        let na = parse_kb(a).unwrap();
        let nb = parse_kb(b).unwrap();
        assert_eq!(na, nb);
        assert_eq!(serialize_kb(&na), serialize_kb(&nb));
        let reparsed = parse_kb(&serialize_kb(&na)).unwrap();
        assert_eq!(na, reparsed);
    }

    #[test]
    fn spec_cond_requires_strict_descent() {
        let err = parse_kb("type a\ntype b\nspeccond a => b = 0.5\n").unwrap_err();
        let KbError::Invalid(report) = err else { panic!("expected validation error") };
        assert!(report.violations[0].message.contains("not a strict descendant"));
    }

    #[test]
    fn statistics_survive_roundtrip() {
        let net = parse_kb(FLU).unwrap();
        let text = serialize_kb(&net);
        let reparsed = parse_kb(&text).unwrap();
        assert_eq!(net, reparsed);
        assert!(matches!(
            reparsed.statistics().iter().find(
                |s| matches!(s, CategoryStatistic::Prior { p, .. } if *p == 0.001)
            ),
            Some(_)
        ));
    }
}
