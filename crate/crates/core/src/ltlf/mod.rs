//! LTLf formulas over action propositions.
//!
//! Traces follow the single-action-per-instant convention: every position of
//! a trace is one action name, so an atom holds at a position iff the action
//! at that position carries its name. Actions that no atom mentions are legal
//! and simply falsify every atom.

mod eval;
mod nnf;
mod parse;

use std::collections::BTreeSet;
use std::fmt;

pub use eval::{evaluate, truth_table};
pub use nnf::to_nnf;
pub use parse::{parse, ParseError};

/// A finite sequence of action names.
pub type ActionTrace = Vec<String>;

/// LTLf abstract syntax.
///
/// `And`/`Or` are n-ary and kept canonical by [`Formula::and`] and
/// [`Formula::or`]: nested nodes of the same kind are flattened, children are
/// sorted and deduplicated, and boolean constants are absorbed. Build
/// conjunctions and disjunctions through those constructors; the variants are
/// public for pattern matching.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Next(Box<Formula>),
    WeakNext(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    WeakUntil(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn next(f: Formula) -> Self {
        Formula::Next(Box::new(f))
    }

    pub fn weak_next(f: Formula) -> Self {
        Formula::WeakNext(Box::new(f))
    }

    pub fn until(lhs: Formula, rhs: Formula) -> Self {
        Formula::Until(Box::new(lhs), Box::new(rhs))
    }

    pub fn weak_until(lhs: Formula, rhs: Formula) -> Self {
        Formula::WeakUntil(Box::new(lhs), Box::new(rhs))
    }

    pub fn eventually(f: Formula) -> Self {
        Formula::Eventually(Box::new(f))
    }

    pub fn always(f: Formula) -> Self {
        Formula::Always(Box::new(f))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Self {
        Formula::or(Formula::not(lhs), rhs)
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Self {
        Formula::conjunction([lhs, rhs])
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Self {
        Formula::disjunction([lhs, rhs])
    }

    /// Canonical n-ary conjunction; the empty conjunction is `True`.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut children = Vec::new();
        for part in parts {
            match part {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => children.extend(inner),
                other => children.push(other),
            }
        }
        children.sort();
        children.dedup();
        match children.len() {
            0 => Formula::True,
            1 => children.pop().unwrap(),
            _ => Formula::And(children),
        }
    }

    /// Canonical n-ary disjunction; the empty disjunction is `False`.
    pub fn disjunction(parts: impl IntoIterator<Item = Formula>) -> Self {
        let mut children = Vec::new();
        for part in parts {
            match part {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => children.extend(inner),
                other => children.push(other),
            }
        }
        children.sort();
        children.dedup();
        match children.len() {
            0 => Formula::False,
            1 => children.pop().unwrap(),
            _ => Formula::Or(children),
        }
    }

    /// Atom names occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(f)
            | Formula::Next(f)
            | Formula::WeakNext(f)
            | Formula::Eventually(f)
            | Formula::Always(f) => f.collect_atoms(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_atoms(out)),
            Formula::Until(l, r) | Formula::WeakUntil(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    /// Nesting depth; constants and atoms have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(f)
            | Formula::Next(f)
            | Formula::WeakNext(f)
            | Formula::Eventually(f)
            | Formula::Always(f) => 1 + f.depth(),
            Formula::And(fs) | Formula::Or(fs) => {
                1 + fs.iter().map(Formula::depth).max().unwrap_or(0)
            }
            Formula::Until(l, r) | Formula::WeakUntil(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// True when negation only occurs directly above atoms and no `F`/`G`
    /// sugar is left.
    pub fn is_nnf(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(f) => matches!(**f, Formula::Atom(_)),
            Formula::Next(f) | Formula::WeakNext(f) => f.is_nnf(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_nnf),
            Formula::Until(l, r) | Formula::WeakUntil(l, r) => l.is_nnf() && r.is_nnf(),
            Formula::Eventually(_) | Formula::Always(_) => false,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Or(_) => 1,
            Formula::And(_) => 2,
            Formula::Until(..) | Formula::WeakUntil(..) => 3,
            Formula::Not(_)
            | Formula::Next(_)
            | Formula::WeakNext(_)
            | Formula::Eventually(_)
            | Formula::Always(_) => 4,
            Formula::True | Formula::False | Formula::Atom(_) => 5,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, child: &Formula, min_precedence: u8) -> fmt::Result {
    if child.precedence() < min_precedence {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

/// Prints the concrete syntax accepted by [`parse`], with the fewest
/// parentheses that preserve the tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(a) => f.write_str(a),
            Formula::Not(c) => {
                f.write_str("!")?;
                write_operand(f, c, 4)
            }
            Formula::Next(c) => {
                f.write_str("X ")?;
                write_operand(f, c, 4)
            }
            Formula::WeakNext(c) => {
                f.write_str("WX ")?;
                write_operand(f, c, 4)
            }
            Formula::Eventually(c) => {
                f.write_str("F ")?;
                write_operand(f, c, 4)
            }
            Formula::Always(c) => {
                f.write_str("G ")?;
                write_operand(f, c, 4)
            }
            Formula::And(cs) | Formula::Or(cs) => {
                let (sep, prec) = if matches!(self, Formula::And(_)) {
                    (" & ", 2)
                } else {
                    (" | ", 1)
                };
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    // same-kind children cannot occur in canonical form, but
                    // hand-built trees may nest them
                    write_operand(f, c, prec + 1)?;
                }
                Ok(())
            }
            Formula::Until(l, r) | Formula::WeakUntil(l, r) => {
                let op = if matches!(self, Formula::Until(..)) {
                    " U "
                } else {
                    " W "
                };
                write_operand(f, l, 4)?;
                f.write_str(op)?;
                write_operand(f, r, 3)
            }
        }
    }
}

/// Result of checking a formula's atoms against an action set.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct AlphabetReport {
    /// Atoms of the formula that are not declared actions, sorted.
    pub violations: Vec<String>,
}

impl AlphabetReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_alphabet<S: AsRef<str>>(formula: &Formula, actions: &[S]) -> AlphabetReport {
    let declared: BTreeSet<&str> = actions.iter().map(AsRef::as_ref).collect();
    let violations = formula
        .atoms()
        .into_iter()
        .filter(|a| !declared.contains(a.as_str()))
        .collect();
    AlphabetReport { violations }
}
