use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Deepest tree the prover accepts.
pub const MAX_DEPTH: u32 = 24;

/// A bit string of length at most the tree depth. Ordered by length, then
/// lexicographically.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    len: u8,
    bits: u32,
}

impl Vertex {
    pub const ROOT: Vertex = Vertex { len: 0, bits: 0 };

    pub fn new(len: u32, bits: u32) -> Result<Self> {
        if len > MAX_DEPTH || (len < 32 && bits >> len != 0) {
            return Err(Error::Parameter(format!("{bits:b} does not fit in {len} bits")));
        }
        Ok(Self { len: len as u8, bits })
    }

    pub fn parse(s: &str) -> Result<Self> {
        if s == "ε" || s.is_empty() {
            return Ok(Self::ROOT);
        }
        if !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::Parse(format!("vertex '{s}' is not a bit string")));
        }
        let bits = u32::from_str_radix(s, 2).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(s.len() as u32, bits)
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(self) -> u32 {
        self.len as u32
    }

    pub fn is_root(self) -> bool {
        self.len == 0
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn child(self, b: u32) -> Vertex {
        Vertex { len: self.len + 1, bits: (self.bits << 1) | b }
    }

    pub fn parent(self) -> Option<Vertex> {
        (!self.is_root()).then(|| Vertex { len: self.len - 1, bits: self.bits >> 1 })
    }

    pub fn sibling(self) -> Option<Vertex> {
        (!self.is_root()).then_some(Vertex { len: self.len, bits: self.bits ^ 1 })
    }

    pub fn is_right_child(self) -> bool {
        !self.is_root() && self.bits & 1 == 1
    }

    /// v and all its ancestors up to the root, starting at v.
    pub fn ancestors(self) -> Vec<Vertex> {
        let mut out = vec![self];
        let mut cur = self;
        while let Some(p) = cur.parent() {
            out.push(p);
            cur = p;
        }
        out
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            f.write_str("ε")
        } else {
            write!(f, "{:0width$b}", self.bits, width = self.len as usize)
        }
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Vertex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The PoSW graph: a complete binary tree of depth n with edges pointing to
/// the parent, plus an edge from every left sibling of an ancestor of a leaf
/// into that leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Dag {
    n: u32,
}

impl Dag {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 || n > MAX_DEPTH {
            return Err(Error::Parameter(format!("tree depth must lie in 1..={MAX_DEPTH}, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn depth(&self) -> u32 {
        self.n
    }

    /// N = 2^{n+1} − 1.
    pub fn vertex_count(&self) -> usize {
        (1usize << (self.n + 1)) - 1
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v.len() <= self.n
    }

    pub fn is_leaf(&self, v: Vertex) -> bool {
        v.len() == self.n
    }

    pub fn leaves(&self) -> impl Iterator<Item = Vertex> {
        let n = self.n;
        (0..1u32 << n).map(move |bits| Vertex { len: n as u8, bits })
    }

    /// All vertices ordered by (length, lexicographic).
    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        let n = self.n;
        (0..=n).flat_map(|len| (0..1u32 << len).map(move |bits| Vertex { len: len as u8, bits }))
    }

    /// in(v): the two children of an internal vertex, or for a leaf the left
    /// siblings of its right-child ancestors, sorted by (length, lex).
    pub fn in_neighbors(&self, v: Vertex) -> Vec<Vertex> {
        if !self.is_leaf(v) {
            return vec![v.child(0), v.child(1)];
        }
        let mut out: Vec<Vertex> =
            v.ancestors().into_iter().filter(|u| u.is_right_child()).filter_map(Vertex::sibling).collect();
        out.sort();
        out
    }

    /// ap(v): the non-root ancestors of leaf v from v upward, then their
    /// siblings in the same order.
    pub fn authentication_path(&self, v: Vertex) -> Result<Vec<Vertex>> {
        if !self.is_leaf(v) {
            return Err(Error::Domain(format!("{v} is not a leaf of the depth-{} tree", self.n)));
        }
        let anc: Vec<Vertex> = v.ancestors().into_iter().filter(|u| !u.is_root()).collect();
        let sibs: Vec<Vertex> = anc.iter().filter_map(|u| u.sibling()).collect();
        Ok(anc.into_iter().chain(sibs).collect())
    }

    /// Post-order from the leftmost leaf: every vertex after its in-neighbors.
    pub fn evaluation_order(&self) -> Vec<Vertex> {
        fn go(dag: &Dag, v: Vertex, out: &mut Vec<Vertex>) {
            if !dag.is_leaf(v) {
                go(dag, v.child(0), out);
                go(dag, v.child(1), out);
            }
            out.push(v);
        }
        let mut out = Vec::with_capacity(self.vertex_count());
        go(self, Vertex::ROOT, &mut out);
        out
    }
}
