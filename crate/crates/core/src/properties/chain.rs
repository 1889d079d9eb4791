use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::oracle::{Database, OracleDomain};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainKind {
    /// y ◁ x iff y and x have the same index.
    Equality,
    /// The bit string of y is a prefix of the label of x.
    Prefix,
    /// The bit string of y occurs somewhere in the label of x.
    Substring,
    Custom(String),
}

impl fmt::Display for ChainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainKind::Equality => write!(f, "equality"),
            ChainKind::Prefix => write!(f, "prefix"),
            ChainKind::Substring => write!(f, "substring"),
            ChainKind::Custom(name) => write!(f, "{name}"),
        }
    }
}

/// The link relation y ◁ x between range values and inputs, tabulated for
/// one domain.
#[derive(Clone)]
pub struct ChainRelation {
    kind: ChainKind,
    inputs: usize,
    /// successors[y] = {x : y ◁ x}, sorted.
    successors: Arc<Vec<Vec<usize>>>,
    t_bound: usize,
}

impl fmt::Debug for ChainRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChainRelation({}, T={})", self.kind, self.t_bound)
    }
}

impl PartialEq for ChainRelation {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.successors == other.successors
    }
}

/// Binary rendering of a range value, width ⌈log₂ M⌉.
pub fn range_bits(spec: GroupSpec, y: usize) -> String {
    let width = (usize::BITS - (spec.order() - 1).leading_zeros()).max(1) as usize;
    format!("{y:0width$b}")
}

impl ChainRelation {
    pub fn custom(name: &str, domain: &OracleDomain, relates: impl Fn(usize, usize) -> bool) -> Self {
        Self::tabulate(ChainKind::Custom(name.to_string()), domain, relates)
    }

    pub fn equality(domain: &OracleDomain) -> Self {
        Self::tabulate(ChainKind::Equality, domain, |y, x| y == x)
    }

    pub fn prefix(domain: &OracleDomain) -> Self {
        let spec = domain.spec();
        let labels = domain.labels().to_vec();
        Self::tabulate(ChainKind::Prefix, domain, move |y, x| labels[x].starts_with(&range_bits(spec, y)))
    }

    pub fn substring(domain: &OracleDomain) -> Self {
        let spec = domain.spec();
        let labels = domain.labels().to_vec();
        Self::tabulate(ChainKind::Substring, domain, move |y, x| labels[x].contains(&range_bits(spec, y)))
    }

    pub fn by_name(name: &str, domain: &OracleDomain) -> Result<Self> {
        match name {
            "equality" | "eq" => Ok(Self::equality(domain)),
            "prefix" => Ok(Self::prefix(domain)),
            "substring" => Ok(Self::substring(domain)),
            other => Err(Error::Parse(format!("unknown chain relation '{other}'"))),
        }
    }

    fn tabulate(kind: ChainKind, domain: &OracleDomain, relates: impl Fn(usize, usize) -> bool) -> Self {
        let m = domain.spec().order();
        let inputs = domain.len();
        let successors: Vec<Vec<usize>> = (0..m).map(|y| (0..inputs).filter(|&x| relates(y, x)).collect()).collect();
        let t_bound = (0..inputs).map(|x| successors.iter().filter(|s| s.contains(&x)).count()).max().unwrap_or(0);
        Self { kind, inputs, successors: Arc::new(successors), t_bound }
    }

    pub fn kind(&self) -> &ChainKind {
        &self.kind
    }

    pub fn relates(&self, y: usize, x: usize) -> bool {
        self.successors.get(y).is_some_and(|s| s.binary_search(&x).is_ok())
    }

    pub fn successors(&self, y: usize) -> &[usize] {
        self.successors.get(y).map(Vec::as_slice).unwrap_or(&[])
    }

    /// T = max_x |{y : y ◁ x}|.
    pub fn t_bound(&self) -> usize {
        self.t_bound
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ChainLength {
    Finite(usize),
    /// A cycle exists, so chains of every length exist.
    Unbounded,
}

impl ChainLength {
    pub fn at_least(self, s: usize) -> bool {
        match self {
            ChainLength::Finite(n) => n >= s,
            ChainLength::Unbounded => true,
        }
    }
}

/// Longest chain over `nodes` nodes, counted in links: a path v₁ → … → v_r
/// along `edge` whose last node satisfies `terminal` has r links (the final
/// link leaves the node set). Any cycle makes the result unbounded.
pub fn longest_chain(nodes: usize, edge: impl Fn(usize, usize) -> bool, terminal: impl Fn(usize) -> bool) -> ChainLength {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done(usize),
    }
    let adj: Vec<Vec<usize>> = (0..nodes).map(|a| (0..nodes).filter(|&b| edge(a, b)).collect()).collect();
    let mut marks = vec![Mark::New; nodes];
    // Iterative DFS so large databases do not exhaust the stack.
    let mut best = 0;
    for start in 0..nodes {
        if marks[start] != Mark::New {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        marks[start] = Mark::Active;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if *next < adj[v].len() {
                let w = adj[v][*next];
                *next += 1;
                match marks[w] {
                    Mark::Active => return ChainLength::Unbounded,
                    Mark::New => {
                        marks[w] = Mark::Active;
                        stack.push((w, 0));
                    }
                    Mark::Done(_) => {}
                }
            } else {
                let mut value = usize::from(terminal(v));
                for &w in &adj[v] {
                    if let Mark::Done(b) = marks[w] {
                        if b > 0 {
                            value = value.max(b + 1);
                        }
                    }
                }
                marks[v] = Mark::Done(value);
                best = best.max(value);
                stack.pop();
            }
        }
    }
    ChainLength::Finite(best)
}

/// Longest chain x₀, x₁, … with D(x_{i−1}) ◁ x_i.
pub fn chain_length(d: &Database, rel: &ChainRelation) -> ChainLength {
    let support = d.support();
    longest_chain(
        support.len(),
        |a, b| rel.relates(d.get(support[a]), support[b]),
        |a| !rel.successors(d.get(support[a])).is_empty(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(d: &Database, rel: &ChainRelation, cap: usize) -> usize {
        // Longest chain up to `cap` links by enumerating all sequences.
        let n = d.len();
        let mut best = 0;
        let mut frontier: Vec<Vec<usize>> = (0..n).map(|x| vec![x]).collect();
        for links in 1..=cap {
            let mut next = Vec::new();
            for seq in &frontier {
                let last = *seq.last().unwrap();
                if d.is_bottom(last) {
                    continue;
                }
                for x in 0..n {
                    if rel.relates(d.get(last), x) {
                        let mut s = seq.clone();
                        s.push(x);
                        next.push(s);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            best = links;
            frontier = next;
        }
        best
    }

    #[test]
    fn two_node_equality_example() {
        let dom = OracleDomain::with_size(2, GroupSpec::bits(1).unwrap()).unwrap();
        let rel = ChainRelation::equality(&dom);
        // a ↦ b, b ↦ b: the self-loop at b gives unbounded chains.
        let d = Database::from_values(vec![1, 1], 2).unwrap();
        assert_eq!(chain_length(&d, &rel), ChainLength::Unbounded);
        assert_eq!(brute_force(&d, &rel, 5), 5);
        // a ↦ b, b ⊥: a → b is one link.
        let d = Database::from_values(vec![1, 2], 2).unwrap();
        assert_eq!(chain_length(&d, &rel), ChainLength::Finite(1));
        assert_eq!(chain_length(&Database::empty(2, 2), &rel), ChainLength::Finite(0));
    }

    #[test]
    fn agrees_with_brute_force_on_small_domains() {
        for m in [1u32, 2] {
            let spec = GroupSpec::bits(m).unwrap();
            for inputs in 1..=3 {
                let dom = OracleDomain::with_size(inputs, spec).unwrap();
                for rel in [ChainRelation::equality(&dom), ChainRelation::custom("lt", &dom, |y, x| y < x)] {
                    for d in Database::all(inputs, spec.order()) {
                        let cap = 2 * inputs + 2;
                        let got = chain_length(&d, &rel);
                        let brute = brute_force(&d, &rel, cap);
                        match got {
                            ChainLength::Finite(n) => assert_eq!(n, brute, "{d}"),
                            ChainLength::Unbounded => assert_eq!(brute, cap, "{d}"),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn prefix_and_substring_tables() {
        let dom = OracleDomain::bit_strings(3, GroupSpec::bits(2).unwrap()).unwrap();
        let p = ChainRelation::prefix(&dom);
        assert_eq!(p.t_bound(), 1);
        assert!(p.relates(0b01, 0b011));
        assert!(!p.relates(0b11, 0b011));
        let s = ChainRelation::substring(&dom);
        assert!(s.relates(0b11, 0b011));
        assert_eq!(s.t_bound(), 2);
        assert_eq!(ChainRelation::equality(&dom).t_bound(), 1);
    }
}
