//! Line tokenizer for the knowledge-base DSL.
//!
//! Atoms are runs of `[A-Za-z0-9_-]`, with two wrinkles: a `-` immediately
//! followed by `>` terminates the atom (so `flu->flu` and `sneeze-effect->`
//! lex as expected), and a single `.` continues a digit-initial atom when a
//! digit follows (so `0.001` is one atom while `flu.infect` is three tokens).
//! Quoted atoms may contain anything except a quote; quoting is stripped and
//! only remembered for the constraint right-hand-side rule.

use super::Diagnostic;
use crate::span::SourceSpan;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Atom { text: String, quoted: bool },
    Colon,
    Dot,
    Comma,
    LBrace,
    RBrace,
    Eq,
    Neq,
    Arrow,
    DArrow,
    Dash,
}

impl Tok {
    pub(crate) fn describe(&self) -> &'static str {
        match self {
            Tok::Atom { .. } => "name",
            Tok::Colon => "`:`",
            Tok::Dot => "`.`",
            Tok::Comma => "`,`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Eq => "`=`",
            Tok::Neq => "`!=`",
            Tok::Arrow => "`->`",
            Tok::DArrow => "`=>`",
            Tok::Dash => "`-`",
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Lexeme {
    pub tok: Tok,
    pub span: SourceSpan,
}

fn is_atom_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

/// Tokenizes one line (1-based `line_no`); `#` starts a comment.
pub(crate) fn lex_line(line: &str, line_no: u32) -> Result<Vec<Lexeme>, Diagnostic> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        let col = (i + 1) as u32;
        let span = SourceSpan::new(line_no, col);
        match c {
            ' ' | '\t' | '\r' => i += 1,
            '#' => break,
            '"' => {
                let mut text = String::new();
                let mut j = i + 1;
                loop {
                    match chars.get(j) {
                        None => {
                            return Err(Diagnostic {
                                span,
                                message: "unterminated quoted constant".into(),
                            })
                        }
                        Some('"') => break,
                        Some(&ch) => {
                            text.push(ch);
                            j += 1;
                        }
                    }
                }
                out.push(Lexeme { tok: Tok::Atom { text, quoted: true }, span });
                i = j + 1;
            }
            ':' => {
                out.push(Lexeme { tok: Tok::Colon, span });
                i += 1;
            }
            '.' => {
                out.push(Lexeme { tok: Tok::Dot, span });
                i += 1;
            }
            ',' => {
                out.push(Lexeme { tok: Tok::Comma, span });
                i += 1;
            }
            '{' => {
                out.push(Lexeme { tok: Tok::LBrace, span });
                i += 1;
            }
            '}' => {
                out.push(Lexeme { tok: Tok::RBrace, span });
                i += 1;
            }
            '=' => {
                if chars.get(i + 1) == Some(&'>') {
                    out.push(Lexeme { tok: Tok::DArrow, span });
                    i += 2;
                } else {
                    out.push(Lexeme { tok: Tok::Eq, span });
                    i += 1;
                }
            }
            '!' => {
                if chars.get(i + 1) == Some(&'=') {
                    out.push(Lexeme { tok: Tok::Neq, span });
                    i += 2;
                } else {
                    return Err(Diagnostic { span, message: "expected `!=`".into() });
                }
            }
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    out.push(Lexeme { tok: Tok::Arrow, span });
                    i += 2;
                } else {
                    out.push(Lexeme { tok: Tok::Dash, span });
                    i += 1;
                }
            }
            c if is_atom_char(c) => {
                let starts_with_digit = c.is_ascii_digit();
                let mut text = String::new();
                let mut seen_dot = false;
                let mut j = i;
                while j < chars.len() {
                    let ch = chars[j];
                    if ch == '-' && chars.get(j + 1) == Some(&'>') {
                        break;
                    }
                    if is_atom_char(ch) {
                        text.push(ch);
                        j += 1;
                        continue;
                    }
                    if ch == '.'
                        && starts_with_digit
                        && !seen_dot
                        && chars.get(j + 1).is_some_and(|d| d.is_ascii_digit())
                    {
                        seen_dot = true;
                        text.push(ch);
                        j += 1;
                        continue;
                    }
                    break;
                }
                out.push(Lexeme { tok: Tok::Atom { text, quoted: false }, span });
                i = j;
            }
            other => {
                return Err(Diagnostic {
                    span,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atoms(line: &str) -> Vec<String> {
        lex_line(line, 1)
            .unwrap()
            .into_iter()
            .filter_map(|l| match l.tok {
                Tok::Atom { text, .. } => Some(text),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn feature_arrows_split_correctly() {
        let toks: Vec<Tok> =
            lex_line("cond flu -sneeze-effect-> sneezing = 0.6", 1).unwrap().into_iter().map(|l| l.tok).collect();
        assert_eq!(
            toks,
            vec![
                Tok::Atom { text: "cond".into(), quoted: false },
                Tok::Atom { text: "flu".into(), quoted: false },
                Tok::Dash,
                Tok::Atom { text: "sneeze-effect".into(), quoted: false },
                Tok::Arrow,
                Tok::Atom { text: "sneezing".into(), quoted: false },
                Tok::Eq,
                Tok::Atom { text: "0.6".into(), quoted: false },
            ]
        );
    }

    #[test]
    fn numbers_keep_their_decimal_point() {
        assert_eq!(atoms("prior flu = 0.001"), vec!["prior", "flu", "0.001"]);
        assert_eq!(atoms("x = 1e-4"), vec!["x", "1e-4"]);
    }

    #[test]
    fn dots_separate_identifiers() {
        let toks: Vec<Tok> =
            lex_line("percolate flu.infect : agent => infectee", 1).unwrap().into_iter().map(|l| l.tok).collect();
        assert!(toks.contains(&Tok::Dot));
        assert!(toks.contains(&Tok::DArrow));
    }

    #[test]
    fn arrow_without_spaces() {
        assert_eq!(atoms("feature infect : flu->flu"), vec!["feature", "infect", "flu", "flu"]);
    }

    #[test]
    fn comments_and_errors() {
        assert!(lex_line("  # just a comment", 3).unwrap().is_empty());
        let err = lex_line("obs \"unterminated", 7).unwrap_err();
        assert_eq!(err.span, SourceSpan::new(7, 5));
    }
}
