use super::Formula;

/// Negation normal form.
///
/// Pushes negation down to atoms using the finite-trace dualities: `!X f`
/// becomes `WX !f` (and back), `!(f U g)` becomes `!g W (!f & !g)`, and
/// `!(f W g)` becomes `!g U (!f & !g)`. `F f` and `G f` are expanded to
/// `true U f` and `f W false`.
pub fn to_nnf(f: &Formula) -> Formula {
    push(f, false)
}

fn push(f: &Formula, negated: bool) -> Formula {
    match f {
        Formula::True => {
            if negated {
                Formula::False
            } else {
                Formula::True
            }
        }
        Formula::False => {
            if negated {
                Formula::True
            } else {
                Formula::False
            }
        }
        Formula::Atom(_) => {
            if negated {
                Formula::not(f.clone())
            } else {
                f.clone()
            }
        }
        Formula::Not(inner) => push(inner, !negated),
        Formula::And(cs) => {
            let parts = cs.iter().map(|c| push(c, negated));
            if negated {
                Formula::disjunction(parts)
            } else {
                Formula::conjunction(parts)
            }
        }
        Formula::Or(cs) => {
            let parts = cs.iter().map(|c| push(c, negated));
            if negated {
                Formula::conjunction(parts)
            } else {
                Formula::disjunction(parts)
            }
        }
        Formula::Next(inner) => {
            if negated {
                Formula::weak_next(push(inner, true))
            } else {
                Formula::next(push(inner, false))
            }
        }
        Formula::WeakNext(inner) => {
            if negated {
                Formula::next(push(inner, true))
            } else {
                Formula::weak_next(push(inner, false))
            }
        }
        Formula::Until(l, r) => {
            if negated {
                let (nl, nr) = (push(l, true), push(r, true));
                Formula::weak_until(nr.clone(), Formula::and(nl, nr))
            } else {
                Formula::until(push(l, false), push(r, false))
            }
        }
        Formula::WeakUntil(l, r) => {
            if negated {
                let (nl, nr) = (push(l, true), push(r, true));
                Formula::until(nr.clone(), Formula::and(nl, nr))
            } else {
                Formula::weak_until(push(l, false), push(r, false))
            }
        }
        Formula::Eventually(inner) => {
            if negated {
                Formula::weak_until(push(inner, true), Formula::False)
            } else {
                Formula::until(Formula::True, push(inner, false))
            }
        }
        Formula::Always(inner) => {
            if negated {
                Formula::until(Formula::True, push(inner, true))
            } else {
                Formula::weak_until(push(inner, false), Formula::False)
            }
        }
    }
}
