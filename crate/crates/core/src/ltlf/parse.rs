use std::fmt;

use super::Formula;

/// Syntax error with a 1-based source position and the tokens that would
/// have been accepted there.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at {line}:{column}: found {found}, expected one of {}", .expected.join(", "))]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub found: String,
    pub expected: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Next,
    WeakNext,
    Eventually,
    Always,
    Until,
    WeakUntil,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(name) => write!(f, "identifier `{name}`"),
            Tok::True => f.write_str("`true`"),
            Tok::False => f.write_str("`false`"),
            Tok::Not => f.write_str("`!`"),
            Tok::And => f.write_str("`&`"),
            Tok::Or => f.write_str("`|`"),
            Tok::Implies => f.write_str("`->`"),
            Tok::Next => f.write_str("`X`"),
            Tok::WeakNext => f.write_str("`WX`"),
            Tok::Eventually => f.write_str("`F`"),
            Tok::Always => f.write_str("`G`"),
            Tok::Until => f.write_str("`U`"),
            Tok::WeakUntil => f.write_str("`W`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, column);
        let push = |out: &mut Vec<Spanned>, tok| {
            out.push(Spanned {
                tok,
                line: tline,
                column: tcol,
            })
        };
        if c == '\n' {
            chars.next();
            line += 1;
            column = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            column += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut ident = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    ident.push(c);
                    chars.next();
                    column += 1;
                } else {
                    break;
                }
            }
            let tok = match ident.as_str() {
                "true" => Tok::True,
                "false" => Tok::False,
                "X" => Tok::Next,
                "WX" => Tok::WeakNext,
                "F" => Tok::Eventually,
                "G" => Tok::Always,
                "U" => Tok::Until,
                "W" => Tok::WeakUntil,
                _ => Tok::Ident(ident),
            };
            push(&mut out, tok);
            continue;
        }
        chars.next();
        column += 1;
        let tok = match c {
            '!' => Tok::Not,
            '&' => Tok::And,
            '|' => Tok::Or,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '-' if chars.peek() == Some(&'>') => {
                chars.next();
                column += 1;
                Tok::Implies
            }
            other => {
                return Err(ParseError {
                    line: tline,
                    column: tcol,
                    found: format!("character `{other}`"),
                    expected: vec!["a token".into()],
                })
            }
        };
        push(&mut out, tok);
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

const OPERAND_START: &[&str] = &[
    "identifier",
    "`true`",
    "`false`",
    "`!`",
    "`X`",
    "`WX`",
    "`F`",
    "`G`",
    "`(`",
];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let at = &self.toks[self.pos];
        ParseError {
            line: at.line,
            column: at.column,
            found: at.tok.to_string(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.conjunction()?];
        while *self.peek() == Tok::Or {
            self.bump();
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::disjunction(parts)
        })
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.binary_temporal()?];
        while *self.peek() == Tok::And {
            self.bump();
            parts.push(self.binary_temporal()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::conjunction(parts)
        })
    }

    fn binary_temporal(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        match self.peek() {
            Tok::Until => {
                self.bump();
                Ok(Formula::until(lhs, self.binary_temporal()?))
            }
            Tok::WeakUntil => {
                self.bump();
                Ok(Formula::weak_until(lhs, self.binary_temporal()?))
            }
            _ => Ok(lhs),
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let wrap: fn(Formula) -> Formula = match self.peek() {
            Tok::Not => Formula::not,
            Tok::Next => Formula::next,
            Tok::WeakNext => Formula::weak_next,
            Tok::Eventually => Formula::eventually,
            Tok::Always => Formula::always,
            _ => return self.primary(),
        };
        self.bump();
        Ok(wrap(self.unary()?))
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(Formula::Atom(name))
            }
            Tok::True => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::False => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::LParen => {
                self.bump();
                let inner = self.implication()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error(&["`)`", "`&`", "`|`", "`->`", "`U`", "`W`"]));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.error(OPERAND_START)),
        }
    }
}

/// Parses the ASCII formula syntax.
///
/// Precedence from tightest: unary operators (`!`, `X`, `WX`, `F`, `G`),
/// then `U`/`W` (right-associative), `&`, `|`, and `->` (right-associative).
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut parser = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let formula = parser.implication()?;
    if *parser.peek() != Tok::Eof {
        return Err(parser.error(&["end of input", "`&`", "`|`", "`->`", "`U`", "`W`"]));
    }
    Ok(formula)
}
