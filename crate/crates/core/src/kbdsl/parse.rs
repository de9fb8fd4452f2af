//! Line-oriented parser for knowledge bases and observation files.

use std::collections::BTreeMap;
use std::collections::HashSet;

use super::lex::{lex_line, Lexeme, Tok};
use super::{Diagnostic, KbError, Observation};
use crate::names::{AttrName, ConstValue, FeatureName, TypeName};
use crate::network::{
    CategoryStatistic, ConstraintRelation, EventDescription, EventNetwork, FeatureDecl,
    LocalConstraint, NetworkBuilder, PercolationDecl,
};
use crate::span::SourceSpan;

struct Cursor {
    lexemes: Vec<Lexeme>,
    pos: usize,
    eol: SourceSpan,
}

impl Cursor {
    fn new(lexemes: Vec<Lexeme>, line_no: u32, line_len: usize) -> Self {
        Cursor { lexemes, pos: 0, eol: SourceSpan::new(line_no, (line_len + 1) as u32) }
    }

    fn peek(&self) -> Option<&Tok> {
        self.lexemes.get(self.pos).map(|l| &l.tok)
    }

    fn here(&self) -> SourceSpan {
        self.lexemes.get(self.pos).map(|l| l.span).unwrap_or(self.eol)
    }

    fn advance(&mut self) -> Option<Lexeme> {
        let l = self.lexemes.get(self.pos).cloned();
        if l.is_some() {
            self.pos += 1;
        }
        l
    }

    fn expect_atom(&mut self, what: &str) -> Result<(String, bool, SourceSpan), Diagnostic> {
        match self.advance() {
            Some(Lexeme { tok: Tok::Atom { text, quoted }, span }) => Ok((text, quoted, span)),
            Some(Lexeme { tok, span }) => Err(Diagnostic {
                span,
                message: format!("expected {what}, found {}", tok.describe()),
            }),
            None => Err(Diagnostic { span: self.eol, message: format!("expected {what}") }),
        }
    }

    fn expect_tok(&mut self, tok: Tok, what: &str) -> Result<SourceSpan, Diagnostic> {
        match self.advance() {
            Some(l) if l.tok == tok => Ok(l.span),
            Some(l) => Err(Diagnostic {
                span: l.span,
                message: format!("expected {what}, found {}", l.tok.describe()),
            }),
            None => Err(Diagnostic { span: self.eol, message: format!("expected {what}") }),
        }
    }

    fn finish(&mut self) -> Result<(), Diagnostic> {
        match self.peek() {
            None => Ok(()),
            Some(tok) => Err(Diagnostic {
                span: self.here(),
                message: format!("unexpected {} after declaration", tok.describe()),
            }),
        }
    }
}

fn parse_bindings(cur: &mut Cursor) -> Result<BTreeMap<AttrName, ConstValue>, Diagnostic> {
    cur.expect_tok(Tok::LBrace, "`{`")?;
    let mut out = BTreeMap::new();
    loop {
        let (attr, _, attr_span) = cur.expect_atom("attribute name")?;
        cur.expect_tok(Tok::Eq, "`=`")?;
        let (value, _, _) = cur.expect_atom("constant")?;
        if out.insert(AttrName::from(attr.clone()), ConstValue::from(value)).is_some() {
            return Err(Diagnostic {
                span: attr_span,
                message: format!("attribute {attr} bound twice"),
            });
        }
        match cur.advance() {
            Some(Lexeme { tok: Tok::Comma, .. }) => continue,
            Some(Lexeme { tok: Tok::RBrace, .. }) => return Ok(out),
            Some(Lexeme { tok, span }) => {
                return Err(Diagnostic {
                    span,
                    message: format!("expected `,` or `}}`, found {}", tok.describe()),
                })
            }
            None => return Err(Diagnostic { span: cur.eol, message: "expected `}`".into() }),
        }
    }
}

fn parse_described(cur: &mut Cursor, what: &str) -> Result<EventDescription, Diagnostic> {
    let (name, _, _) = cur.expect_atom(what)?;
    let mut desc = EventDescription::new(name);
    if cur.peek() == Some(&Tok::LBrace) {
        desc.bindings = parse_bindings(cur)?;
    }
    Ok(desc)
}

fn expect_probability(cur: &mut Cursor) -> Result<f64, Diagnostic> {
    cur.expect_tok(Tok::Eq, "`=`")?;
    let (text, _, span) = cur.expect_atom("probability")?;
    match text.parse::<f64>() {
        Ok(p) if p.is_finite() && (0.0..=1.0).contains(&p) => Ok(p),
        _ => Err(Diagnostic {
            span,
            message: format!("probability must be a decimal in [0, 1], found `{text}`"),
        }),
    }
}

fn parse_kb_line(cur: &mut Cursor, builder: &mut NetworkBuilder) -> Result<(), Diagnostic> {
    let (keyword, _, kw_span) = cur.expect_atom("declaration keyword")?;
    match keyword.as_str() {
        "type" => {
            let (name, _, span) = cur.expect_atom("type name")?;
            let mut parents = Vec::new();
            if cur.peek().is_some() {
                let (isa, _, isa_span) = cur.expect_atom("`isa`")?;
                if isa != "isa" {
                    return Err(Diagnostic {
                        span: isa_span,
                        message: format!("expected `isa`, found `{isa}`"),
                    });
                }
                loop {
                    let (p, _, _) = cur.expect_atom("parent type name")?;
                    parents.push(TypeName::from(p));
                    match cur.peek() {
                        Some(Tok::Comma) => {
                            cur.advance();
                        }
                        _ => break,
                    }
                }
            }
            cur.finish()?;
            builder.add_type(name, parents, Some(span));
        }
        "feature" => {
            let (label, _, span) = cur.expect_atom("feature name")?;
            cur.expect_tok(Tok::Colon, "`:`")?;
            let (source, _, _) = cur.expect_atom("source type name")?;
            cur.expect_tok(Tok::Arrow, "`->`")?;
            let (target, _, _) = cur.expect_atom("target type name")?;
            cur.finish()?;
            builder.add_feature(
                FeatureDecl {
                    label: FeatureName::from(label),
                    source: TypeName::from(source),
                    target: TypeName::from(target),
                },
                Some(span),
            );
        }
        "constraint" => {
            let (owner, _, span) = cur.expect_atom("type name")?;
            cur.expect_tok(Tok::Colon, "`:`")?;
            let (attr, _, _) = cur.expect_atom("attribute name")?;
            let negated = match cur.advance() {
                Some(Lexeme { tok: Tok::Eq, .. }) => false,
                Some(Lexeme { tok: Tok::Neq, .. }) => true,
                Some(Lexeme { tok, span }) => {
                    return Err(Diagnostic {
                        span,
                        message: format!("expected `=` or `!=`, found {}", tok.describe()),
                    })
                }
                None => {
                    return Err(Diagnostic { span: cur.eol, message: "expected `=` or `!=`".into() })
                }
            };
            let (rhs, rhs_quoted, _) = cur.expect_atom("attribute name or constant")?;
            cur.finish()?;
            // A quoted or numeric right-hand side is a constant; a bare
            // alphabetic one names an attribute.
            let is_const = rhs_quoted || rhs.chars().next().is_some_and(|c| c.is_ascii_digit());
            let a = AttrName::from(attr);
            let relation = match (is_const, negated) {
                (true, false) => ConstraintRelation::AttrEqConst(a, ConstValue::from(rhs)),
                (true, true) => ConstraintRelation::AttrNeqConst(a, ConstValue::from(rhs)),
                (false, false) => ConstraintRelation::AttrEqAttr(a, AttrName::from(rhs)),
                (false, true) => ConstraintRelation::AttrNeqAttr(a, AttrName::from(rhs)),
            };
            builder.add_local_constraint(
                LocalConstraint { owner: TypeName::from(owner), relation },
                Some(span),
            );
        }
        "percolate" => {
            let (parent, _, span) = cur.expect_atom("type name")?;
            cur.expect_tok(Tok::Dot, "`.`")?;
            let (feature, _, _) = cur.expect_atom("feature name")?;
            cur.expect_tok(Tok::Colon, "`:`")?;
            let (child_attr, _, _) = cur.expect_atom("child attribute name")?;
            cur.expect_tok(Tok::DArrow, "`=>`")?;
            let (parent_attr, _, _) = cur.expect_atom("parent attribute name")?;
            cur.finish()?;
            builder.add_percolation(
                PercolationDecl {
                    parent_type: TypeName::from(parent),
                    feature: FeatureName::from(feature),
                    child_attr: AttrName::from(child_attr),
                    parent_attr: AttrName::from(parent_attr),
                },
                Some(span),
            );
        }
        "prior" => {
            let span = cur.here();
            let desc = parse_described(cur, "type name")?;
            let p = expect_probability(cur)?;
            cur.finish()?;
            builder.add_statistic(CategoryStatistic::Prior { desc, p }, Some(span));
        }
        "cond" => {
            let span = cur.here();
            let parent = parse_described(cur, "type name")?;
            cur.expect_tok(Tok::Dash, "`-FEATURE->`")?;
            let (feature, _, _) = cur.expect_atom("feature name")?;
            cur.expect_tok(Tok::Arrow, "`->`")?;
            let child = parse_described(cur, "type name")?;
            let p = expect_probability(cur)?;
            cur.finish()?;
            builder.add_statistic(
                CategoryStatistic::FeatureCond {
                    parent,
                    feature: FeatureName::from(feature),
                    child,
                    p,
                },
                Some(span),
            );
        }
        "speccond" => {
            let (general, _, span) = cur.expect_atom("type name")?;
            cur.expect_tok(Tok::DArrow, "`=>`")?;
            let (specific, _, _) = cur.expect_atom("type name")?;
            let p = expect_probability(cur)?;
            cur.finish()?;
            builder.add_statistic(
                CategoryStatistic::SpecCond {
                    general: TypeName::from(general),
                    specific: TypeName::from(specific),
                    p,
                },
                Some(span),
            );
        }
        "culprit" => {
            let (name, _, span) = cur.expect_atom("type name")?;
            cur.finish()?;
            builder.mark_culprit(name, Some(span));
        }
        "obs" => {
            return Err(Diagnostic {
                span: kw_span,
                message: "observations belong in an observation file, not the knowledge base".into(),
            })
        }
        other => {
            return Err(Diagnostic {
                span: kw_span,
                message: format!("unknown declaration keyword `{other}`"),
            })
        }
    }
    Ok(())
}

/// Parses a knowledge base. Syntax problems are reported with their source
/// spans; a syntactically clean text is then validated as a network, and any
/// well-formedness violations are returned instead.
pub fn parse_kb(text: &str) -> Result<EventNetwork, KbError> {
    let mut builder = NetworkBuilder::new();
    let mut diags = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = (idx + 1) as u32;
        match lex_line(line, line_no) {
            Err(d) => diags.push(d),
            Ok(lexemes) => {
                if lexemes.is_empty() {
                    continue;
                }
                let mut cur = Cursor::new(lexemes, line_no, line.chars().count());
                if let Err(d) = parse_kb_line(&mut cur, &mut builder) {
                    diags.push(d);
                }
            }
        }
    }
    if !diags.is_empty() {
        return Err(KbError::Syntax(diags));
    }
    builder.build().map_err(KbError::Invalid)
}

/// Parses an observation file: one `obs [LABEL] TYPE [{...}]` per line.
/// Unlabeled observations are numbered `obs1`, `obs2`, ... in file order.
pub fn parse_observations(text: &str) -> Result<Vec<Observation>, Vec<Diagnostic>> {
    let mut out: Vec<Observation> = Vec::new();
    let mut diags = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = (idx + 1) as u32;
        let lexemes = match lex_line(line, line_no) {
            Err(d) => {
                diags.push(d);
                continue;
            }
            Ok(l) => l,
        };
        if lexemes.is_empty() {
            continue;
        }
        let mut cur = Cursor::new(lexemes, line_no, line.chars().count());
        let parsed = (|| -> Result<Observation, Diagnostic> {
            let (kw, _, kw_span) = cur.expect_atom("`obs`")?;
            if kw != "obs" {
                return Err(Diagnostic {
                    span: kw_span,
                    message: format!("expected `obs`, found `{kw}`"),
                });
            }
            let (first, _, _) = cur.expect_atom("observation type name")?;
            let (label, type_name) = match cur.peek() {
                Some(Tok::Atom { .. }) => {
                    let (ty, _, _) = cur.expect_atom("observation type name")?;
                    (Some(first), ty)
                }
                _ => (None, first),
            };
            let mut desc = EventDescription::new(type_name);
            if cur.peek() == Some(&Tok::LBrace) {
                desc.bindings = parse_bindings(&mut cur)?;
            }
            cur.finish()?;
            let id = label.unwrap_or_else(|| format!("obs{}", out.len() + 1));
            if !seen.insert(id.clone()) {
                return Err(Diagnostic {
                    span: kw_span,
                    message: format!("duplicate observation label: {id}"),
                });
            }
            Ok(Observation { id, desc })
        })();
        match parsed {
            Ok(obs) => out.push(obs),
            Err(d) => diags.push(d),
        }
    }
    if diags.is_empty() {
        Ok(out)
    } else {
        Err(diags)
    }
}
