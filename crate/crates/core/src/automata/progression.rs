//! Formula progression over an interned closure of NNF subformulas.

use std::collections::HashMap;

use crate::ltlf::Formula;

pub(crate) type NodeId = u32;

/// A conjunction of closure literals, sorted and duplicate-free. The empty
/// clause is `true`.
pub(crate) type Clause = Vec<NodeId>;

/// A disjunction of clauses. The empty DNF is `false`.
pub(crate) type Dnf = Vec<Clause>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    True,
    False,
    Atom(usize),
    NegAtom(usize),
    And(Vec<NodeId>),
    Or(Vec<NodeId>),
    Next(NodeId),
    WeakNext(NodeId),
    Until(NodeId, NodeId),
    WeakUntil(NodeId, NodeId),
    // pending strong next: progresses to true, false at trace end
    NotEnd,
    // pending weak next: progresses to false, true at trace end
    End,
}

pub(crate) struct Closure {
    nodes: Vec<Node>,
    labels: Vec<String>,
    index: HashMap<Node, NodeId>,
    cache: HashMap<(NodeId, usize), Dnf>,
    not_end: NodeId,
    end: NodeId,
}

impl Closure {
    pub(crate) fn new() -> Self {
        let mut c = Closure {
            nodes: Vec::new(),
            labels: Vec::new(),
            index: HashMap::new(),
            cache: HashMap::new(),
            not_end: 0,
            end: 0,
        };
        c.not_end = c.intern(Node::NotEnd, "@ne".into());
        c.end = c.intern(Node::End, "@end".into());
        c
    }

    /// Number of interned nodes, markers included.
    pub(crate) fn len(&self) -> usize {
        self.nodes.len()
    }

    fn intern(&mut self, node: Node, label: String) -> NodeId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(node.clone());
        self.labels.push(label);
        self.index.insert(node, id);
        id
    }

    /// Interns an NNF formula; `symbol` maps atom names to action indices.
    pub(crate) fn add(&mut self, f: &Formula, symbol: &dyn Fn(&str) -> usize) -> NodeId {
        let node = match f {
            Formula::True => Node::True,
            Formula::False => Node::False,
            Formula::Atom(a) => Node::Atom(symbol(a)),
            Formula::Not(inner) => match &**inner {
                Formula::Atom(a) => Node::NegAtom(symbol(a)),
                _ => panic!("formula is not in negation normal form: {f}"),
            },
            Formula::And(cs) => {
                let mut ids: Vec<NodeId> = cs.iter().map(|c| self.add(c, symbol)).collect();
                ids.sort_unstable();
                Node::And(ids)
            }
            Formula::Or(cs) => {
                let mut ids: Vec<NodeId> = cs.iter().map(|c| self.add(c, symbol)).collect();
                ids.sort_unstable();
                Node::Or(ids)
            }
            Formula::Next(c) => Node::Next(self.add(c, symbol)),
            Formula::WeakNext(c) => Node::WeakNext(self.add(c, symbol)),
            Formula::Until(l, r) => Node::Until(self.add(l, symbol), self.add(r, symbol)),
            Formula::WeakUntil(l, r) => Node::WeakUntil(self.add(l, symbol), self.add(r, symbol)),
            Formula::Eventually(_) | Formula::Always(_) => {
                panic!("formula is not in negation normal form: {f}")
            }
        };
        self.intern(node, f.to_string())
    }

    pub(crate) fn label(&self, id: NodeId) -> &str {
        &self.labels[id as usize]
    }

    pub(crate) fn clause_label(&self, clause: &[NodeId]) -> String {
        if clause.is_empty() {
            return "{true}".into();
        }
        let parts: Vec<&str> = clause.iter().map(|&id| self.label(id)).collect();
        format!("{{{}}}", parts.join(", "))
    }

    /// Value on the empty suffix.
    pub(crate) fn eps(&self, id: NodeId) -> bool {
        match &self.nodes[id as usize] {
            Node::True | Node::NegAtom(_) | Node::WeakNext(_) | Node::WeakUntil(..) | Node::End => {
                true
            }
            Node::False | Node::Atom(_) | Node::Next(_) | Node::Until(..) | Node::NotEnd => false,
            Node::And(cs) => cs.iter().all(|&c| self.eps(c)),
            Node::Or(cs) => cs.iter().any(|&c| self.eps(c)),
        }
    }

    pub(crate) fn clause_eps(&self, clause: &[NodeId]) -> bool {
        clause.iter().all(|&id| self.eps(id))
    }

    /// Boolean structure of a node as DNF over temporal literals.
    fn dnf_of(&self, id: NodeId) -> Dnf {
        match &self.nodes[id as usize] {
            Node::True => vec![vec![]],
            Node::False => vec![],
            Node::And(cs) => cs
                .iter()
                .fold(vec![vec![]], |acc, &c| product(&acc, &self.dnf_of(c))),
            Node::Or(cs) => normalize(cs.iter().flat_map(|&c| self.dnf_of(c)).collect()),
            _ => vec![vec![id]],
        }
    }

    /// Obligations left after reading `action` at the current position.
    pub(crate) fn progress(&mut self, id: NodeId, action: usize) -> Dnf {
        if let Some(d) = self.cache.get(&(id, action)) {
            return d.clone();
        }
        let result = match self.nodes[id as usize].clone() {
            Node::True | Node::NotEnd => vec![vec![]],
            Node::False | Node::End => vec![],
            Node::Atom(s) => truth(s == action),
            Node::NegAtom(s) => truth(s != action),
            Node::And(cs) => {
                let mut acc = vec![vec![]];
                for c in cs {
                    if acc.is_empty() {
                        break;
                    }
                    acc = product(&acc, &self.progress(c, action));
                }
                acc
            }
            Node::Or(cs) => {
                let mut all = Vec::new();
                for c in cs {
                    all.extend(self.progress(c, action));
                }
                normalize(all)
            }
            Node::Next(c) => product(&[vec![self.not_end]], &self.dnf_of(c)),
            Node::WeakNext(c) => {
                let mut all = vec![vec![self.end]];
                all.extend(self.dnf_of(c));
                normalize(all)
            }
            Node::Until(l, r) | Node::WeakUntil(l, r) => {
                let mut all = self.progress(r, action);
                let keep = product(&self.progress(l, action), &[vec![id]]);
                all.extend(keep);
                normalize(all)
            }
        };
        self.cache.insert((id, action), result.clone());
        result
    }

    pub(crate) fn progress_clause(&mut self, clause: &[NodeId], action: usize) -> Dnf {
        let mut acc: Dnf = vec![vec![]];
        for &id in clause {
            if acc.is_empty() {
                break;
            }
            acc = product(&acc, &self.progress(id, action));
        }
        acc
    }
}

fn truth(b: bool) -> Dnf {
    if b {
        vec![vec![]]
    } else {
        vec![]
    }
}

fn product(a: &[Clause], b: &[Clause]) -> Dnf {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            let mut merged = Vec::with_capacity(x.len() + y.len());
            merged.extend_from_slice(x);
            merged.extend_from_slice(y);
            merged.sort_unstable();
            merged.dedup();
            out.push(merged);
        }
    }
    normalize(out)
}

/// Sorts, deduplicates and drops clauses subsumed by a smaller one.
fn normalize(mut dnf: Dnf) -> Dnf {
    dnf.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    dnf.dedup();
    let mut kept: Dnf = Vec::with_capacity(dnf.len());
    for clause in dnf {
        if !kept.iter().any(|k| is_subset(k, &clause)) {
            kept.push(clause);
        }
    }
    kept.sort();
    kept
}

fn is_subset(small: &[NodeId], big: &[NodeId]) -> bool {
    let mut it = big.iter();
    small.iter().all(|s| it.any(|b| b == s))
}
