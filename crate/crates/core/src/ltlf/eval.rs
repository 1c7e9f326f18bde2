use super::Formula;

/// Truth of `f` at every position of `trace`.
///
/// Index `i < len` is the usual finite-trace semantics at position `i`. The
/// extra last index `len` is the value on the empty suffix: atoms, `X` and
/// `U` are false there; `WX` and `W` are true; boolean connectives are
/// homomorphic.
pub fn truth_table<S: AsRef<str>>(f: &Formula, trace: &[S]) -> Vec<bool> {
    let n = trace.len();
    match f {
        Formula::True => vec![true; n + 1],
        Formula::False => vec![false; n + 1],
        Formula::Atom(a) => {
            let mut v: Vec<bool> = trace.iter().map(|t| t.as_ref() == a).collect();
            v.push(false);
            v
        }
        Formula::Not(inner) => truth_table(inner, trace).into_iter().map(|b| !b).collect(),
        Formula::And(cs) => {
            let mut v = vec![true; n + 1];
            for c in cs {
                for (acc, b) in v.iter_mut().zip(truth_table(c, trace)) {
                    *acc &= b;
                }
            }
            v
        }
        Formula::Or(cs) => {
            let mut v = vec![false; n + 1];
            for c in cs {
                for (acc, b) in v.iter_mut().zip(truth_table(c, trace)) {
                    *acc |= b;
                }
            }
            v
        }
        Formula::Next(inner) => {
            let sub = truth_table(inner, trace);
            (0..=n).map(|i| i + 1 < n && sub[i + 1]).collect()
        }
        Formula::WeakNext(inner) => {
            let sub = truth_table(inner, trace);
            (0..=n).map(|i| i + 1 >= n || sub[i + 1]).collect()
        }
        Formula::Until(l, r) => until_table(&truth_table(l, trace), &truth_table(r, trace), false),
        Formula::WeakUntil(l, r) => {
            until_table(&truth_table(l, trace), &truth_table(r, trace), true)
        }
        Formula::Eventually(inner) => {
            until_table(&vec![true; n + 1], &truth_table(inner, trace), false)
        }
        Formula::Always(inner) => {
            until_table(&truth_table(inner, trace), &vec![false; n + 1], true)
        }
    }
}

// `weak` selects what happens once the trace runs out while the left operand
// still holds.
fn until_table(lhs: &[bool], rhs: &[bool], weak: bool) -> Vec<bool> {
    let n = lhs.len() - 1;
    let mut v = vec![weak; n + 1];
    for i in (0..n).rev() {
        let rest = if i + 1 < n { v[i + 1] } else { weak };
        v[i] = rhs[i] || (lhs[i] && rest);
    }
    v
}

/// Truth of `f` at position `pos` of `trace` (`pos == trace.len()` evaluates
/// on the empty suffix).
pub fn evaluate<S: AsRef<str>>(f: &Formula, trace: &[S], pos: usize) -> bool {
    assert!(
        pos <= trace.len(),
        "position {pos} beyond trace of length {}",
        trace.len()
    );
    truth_table(f, trace)[pos]
}
