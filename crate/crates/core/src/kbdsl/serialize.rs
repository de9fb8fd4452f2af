//! Canonical serialization of knowledge bases.
//!
//! Declarations are emitted sorted by kind and then by name, so two networks
//! that differ only in declaration order print identically, and parsing the
//! output yields a network equal to the input. The preemption reading is not
//! part of the text form.

use std::collections::BTreeMap;

use super::lex::{lex_line, Tok};
use crate::names::{AttrName, ConstValue};
use crate::network::{CategoryStatistic, ConstraintRelation, EventDescription, EventNetwork};

fn bare_safe(s: &str) -> bool {
    match lex_line(s, 1) {
        Ok(lexemes) => {
            lexemes.len() == 1
                && matches!(&lexemes[0].tok, Tok::Atom { text, quoted: false } if text == s)
        }
        Err(_) => false,
    }
}

fn atom(s: &str) -> String {
    if bare_safe(s) {
        s.to_owned()
    } else {
        format!("\"{s}\"")
    }
}

fn bindings(b: &BTreeMap<AttrName, ConstValue>) -> String {
    let body: Vec<String> =
        b.iter().map(|(a, v)| format!("{} = {}", atom(a.as_str()), atom(v.as_str()))).collect();
    format!("{{{}}}", body.join(", "))
}

fn described(d: &EventDescription) -> String {
    if d.bindings.is_empty() {
        atom(d.event_type.as_str())
    } else {
        format!("{} {}", atom(d.event_type.as_str()), bindings(&d.bindings))
    }
}

/// Renders the canonical text form of a network.
pub fn serialize_kb(net: &EventNetwork) -> String {
    let mut lines: Vec<String> = Vec::new();

    let mut types: Vec<_> = net.types().to_vec();
    types.sort_by(|a, b| a.name.cmp(&b.name));
    for t in &types {
        if t.parents.is_empty() {
            lines.push(format!("type {}", atom(t.name.as_str())));
        } else {
            let parents: Vec<String> = t.parents.iter().map(|p| atom(p.as_str())).collect();
            lines.push(format!("type {} isa {}", atom(t.name.as_str()), parents.join(", ")));
        }
    }

    let mut features: Vec<_> = net.features().to_vec();
    features.sort_by(|a, b| (&a.source, &a.label).cmp(&(&b.source, &b.label)));
    for f in &features {
        lines.push(format!(
            "feature {} : {} -> {}",
            atom(f.label.as_str()),
            atom(f.source.as_str()),
            atom(f.target.as_str())
        ));
    }

    let mut constraints: Vec<String> = net
        .local_constraints()
        .iter()
        .map(|c| {
            let rel = match &c.relation {
                ConstraintRelation::AttrEqConst(a, v) => {
                    format!("{} = \"{}\"", atom(a.as_str()), v)
                }
                ConstraintRelation::AttrNeqConst(a, v) => {
                    format!("{} != \"{}\"", atom(a.as_str()), v)
                }
                ConstraintRelation::AttrEqAttr(a, b) => {
                    format!("{} = {}", atom(a.as_str()), atom(b.as_str()))
                }
                ConstraintRelation::AttrNeqAttr(a, b) => {
                    format!("{} != {}", atom(a.as_str()), atom(b.as_str()))
                }
            };
            format!("constraint {} : {}", atom(c.owner.as_str()), rel)
        })
        .collect();
    constraints.sort();
    lines.extend(constraints);

    let mut percolations: Vec<String> = net
        .percolation_constraints()
        .iter()
        .map(|p| {
            format!(
                "percolate {}.{} : {} => {}",
                atom(p.parent_type.as_str()),
                atom(p.feature.as_str()),
                atom(p.child_attr.as_str()),
                atom(p.parent_attr.as_str())
            )
        })
        .collect();
    percolations.sort();
    lines.extend(percolations);

    let mut priors: Vec<String> = Vec::new();
    let mut conds: Vec<String> = Vec::new();
    let mut specs: Vec<String> = Vec::new();
    for s in net.statistics() {
        match s {
            CategoryStatistic::Prior { desc, p } => {
                priors.push(format!("prior {} = {}", described(desc), p));
            }
            CategoryStatistic::FeatureCond { parent, feature, child, p } => {
                conds.push(format!(
                    "cond {} -{}-> {} = {}",
                    described(parent),
                    atom(feature.as_str()),
                    described(child),
                    p
                ));
            }
            CategoryStatistic::SpecCond { general, specific, p } => {
                specs.push(format!(
                    "speccond {} => {} = {}",
                    atom(general.as_str()),
                    atom(specific.as_str()),
                    p
                ));
            }
        }
    }
    priors.sort();
    conds.sort();
    specs.sort();
    lines.extend(priors);
    lines.extend(conds);
    lines.extend(specs);

    for t in &types {
        if t.is_culprit {
            lines.push(format!("culprit {}", atom(t.name.as_str())));
        }
    }

    let mut out = lines.join("\n");
    if !out.is_empty() {
        out.push('\n');
    }
    out
}
