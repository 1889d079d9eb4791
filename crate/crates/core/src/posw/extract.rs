//! Labeling extraction from a query database and the lemma checkers built on
//! it.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use super::backend::{parse_label_input, Label, TableOracle};
use super::dag::{Dag, Vertex};
use super::protocol::LabelMap;
use crate::error::{Error, Result};
use crate::properties::{longest_chain, ChainLength};

/// A label query (v, λ₁, …, λ_d) with χ fixed.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct LabelQuery {
    pub vertex: Vertex,
    pub inputs: Vec<Label>,
}

impl LabelQuery {
    pub fn new(vertex: Vertex, inputs: Vec<Label>) -> Self {
        Self { vertex, inputs }
    }
}

/// A finite database of label queries, iterated in canonical order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelDb {
    entries: BTreeMap<LabelQuery, Label>,
}

impl LabelDb {
    pub fn new() -> Self {
        Self::default()
    }

    /// The label queries a table backend answered under χ.
    pub fn from_table(oracle: &TableOracle, chi: &Label) -> Self {
        use super::backend::RandomOracle;
        let w = oracle.width();
        let entries = oracle
            .table()
            .iter()
            .filter_map(|(input, out)| parse_label_input(input, chi, w).map(|(v, ins)| (LabelQuery::new(v, ins), out.clone())))
            .collect();
        Self { entries }
    }

    pub fn insert(&mut self, x: LabelQuery, y: Label) {
        self.entries.insert(x, y);
    }

    /// D[x ↦ u], where None removes x.
    pub fn set(&mut self, x: LabelQuery, u: Option<Label>) {
        match u {
            Some(y) => {
                self.entries.insert(x, y);
            }
            None => {
                self.entries.remove(&x);
            }
        }
    }

    pub fn get(&self, x: &LabelQuery) -> Option<&Label> {
        self.entries.get(x)
    }

    pub fn lookup(&self, v: Vertex, inputs: &[Label]) -> Option<&Label> {
        self.entries.get(&LabelQuery::new(v, inputs.to_vec()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LabelQuery, &Label)> {
        self.entries.iter()
    }

    /// Entries whose query is at vertex v.
    pub fn at_vertex(&self, v: Vertex) -> impl Iterator<Item = (&LabelQuery, &Label)> {
        self.entries.range(LabelQuery::new(v, Vec::new())..).take_while(move |(x, _)| x.vertex == v)
    }

    pub fn has_collision(&self) -> bool {
        let mut seen = BTreeSet::new();
        !self.entries.values().all(|y| seen.insert(y))
    }

    /// Longest chain under y ◁ (v, λ₁..λ_d) iff y = λⱼ for some j. Every
    /// label has a successor in the full input space, so each entry ends a
    /// chain.
    pub fn chain_length(&self) -> ChainLength {
        let entries: Vec<(&LabelQuery, &Label)> = self.entries.iter().collect();
        longest_chain(entries.len(), |a, b| entries[b].0.inputs.contains(entries[a].1), |_| true)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Extraction {
    pub tree: BTreeSet<Vertex>,
    /// The extracted labeling before the leaf check, so it may also label
    /// dropped leaves.
    pub labels: LabelMap,
    /// Some vertex had more than one matching child decomposition.
    pub collision: bool,
}

impl Extraction {
    /// T ∩ leaves(V_n).
    pub fn leaves(&self, dag: &Dag) -> Vec<Vertex> {
        self.tree.iter().copied().filter(|&v| dag.is_leaf(v)).collect()
    }
}

fn labels_of(labels: &LabelMap, vs: &[Vertex]) -> Option<Vec<Label>> {
    vs.iter().map(|u| labels.get(u).cloned()).collect()
}

/// Breadth-first labeling from ℓ_rt = φ: an internal v gets children labels
/// (x, y) when D(v, x, y) = ℓ_v, taking the first match. Afterwards every
/// leaf v with ℓ_v ≠ D(v, ℓ_in(v)) is dropped from T.
pub fn extract(db: &LabelDb, dag: &Dag, phi: &Label) -> Extraction {
    let mut labels = LabelMap::from([(Vertex::ROOT, phi.clone())]);
    let mut collision = false;
    let mut queue = VecDeque::from([Vertex::ROOT]);
    while let Some(v) = queue.pop_front() {
        if dag.is_leaf(v) {
            continue;
        }
        let lv = &labels[&v];
        let mut matches = db.at_vertex(v).filter(|(x, y)| *y == lv && x.inputs.len() == 2);
        if let Some((x, _)) = matches.next() {
            collision |= matches.next().is_some();
            let (l0, l1) = (x.inputs[0].clone(), x.inputs[1].clone());
            labels.insert(v.child(0), l0);
            labels.insert(v.child(1), l1);
            queue.push_back(v.child(0));
            queue.push_back(v.child(1));
        }
    }
    let mut tree: BTreeSet<Vertex> = labels.keys().copied().collect();
    for &v in labels.keys().filter(|&&v| dag.is_leaf(v)) {
        if labels_of(&labels, &dag.in_neighbors(v)).and_then(|ins| db.lookup(v, &ins)) != Some(&labels[&v]) {
            tree.remove(&v);
        }
    }
    Extraction { tree, labels, collision }
}

/// Whether some labeling ℓ′ with ℓ′_rt = φ satisfies ℓ′_u = D(u, ℓ′_in(u))
/// for every u ∈ anc(leaf). Searches all matching entries, not just the
/// first.
pub fn consistent_ancestry_exists(db: &LabelDb, dag: &Dag, phi: &Label, leaf: Vertex) -> bool {
    let path: Vec<Vertex> = leaf.ancestors().into_iter().rev().collect();
    fn go(db: &LabelDb, dag: &Dag, path: &[Vertex], depth: usize, labels: &mut LabelMap) -> bool {
        let v = path[depth];
        if dag.is_leaf(v) {
            return labels_of(labels, &dag.in_neighbors(v)).and_then(|ins| db.lookup(v, &ins)) == Some(&labels[&v]);
        }
        let lv = labels[&v].clone();
        let candidates: Vec<Vec<Label>> =
            db.at_vertex(v).filter(|(x, y)| **y == lv && x.inputs.len() == 2).map(|(x, _)| x.inputs.clone()).collect();
        for ins in candidates {
            labels.insert(v.child(0), ins[0].clone());
            labels.insert(v.child(1), ins[1].clone());
            if go(db, dag, path, depth + 1, labels) {
                return true;
            }
        }
        labels.remove(&v.child(0));
        labels.remove(&v.child(1));
        false
    }
    let mut labels = LabelMap::from([(Vertex::ROOT, phi.clone())]);
    go(db, dag, &path, 0, &mut labels)
}

/// Which postcondition of an extraction failed, if any.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ExtractViolation {
    RootLabel,
    Inconsistent(Vertex),
    AncestorEquation { leaf: Vertex, vertex: Vertex },
    MissedLeaf(Vertex),
}

/// For collision-free D: ℓ is consistent on T with ℓ_rt = φ, every leaf in T
/// satisfies its ancestor equations, and no leaf outside T admits a
/// consistent ancestor labeling. Returns None when D has a collision.
pub fn check_extract_lemma(db: &LabelDb, dag: &Dag, phi: &Label) -> Option<Vec<ExtractViolation>> {
    if db.has_collision() {
        return None;
    }
    let ext = extract(db, dag, phi);
    let mut out = Vec::new();
    if ext.labels.get(&Vertex::ROOT) != Some(phi) {
        out.push(ExtractViolation::RootLabel);
    }
    for &v in &ext.tree {
        let ins = dag.in_neighbors(v);
        if ins.iter().all(|u| ext.tree.contains(u)) {
            let labels = labels_of(&ext.labels, &ins).expect("T is labeled");
            if db.lookup(v, &labels) != Some(&ext.labels[&v]) {
                out.push(ExtractViolation::Inconsistent(v));
            }
        }
    }
    for leaf in dag.leaves() {
        if ext.tree.contains(&leaf) {
            for u in leaf.ancestors() {
                let ok = labels_of(&ext.labels, &dag.in_neighbors(u)).and_then(|ins| db.lookup(u, &ins)) == ext.labels.get(&u);
                if !ok {
                    out.push(ExtractViolation::AncestorEquation { leaf, vertex: u });
                }
            }
        } else if consistent_ancestry_exists(db, dag, phi, leaf) {
            out.push(ExtractViolation::MissedLeaf(leaf));
        }
    }
    Some(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LeavesCheck {
    pub chain: Option<usize>,
    pub leaves: usize,
    /// None when D has a cycle, so no finite chain bound applies.
    pub holds: Option<bool>,
}

/// With q the longest chain in D, the extracted tree has at most (q+2)/2
/// leaves.
pub fn check_leaves_lemma(db: &LabelDb, dag: &Dag, phi: &Label) -> LeavesCheck {
    let leaves = extract(db, dag, phi).leaves(dag).len();
    match db.chain_length() {
        ChainLength::Finite(q) => LeavesCheck { chain: Some(q), leaves, holds: Some(2 * leaves <= q + 2) },
        ChainLength::Unbounded => LeavesCheck { chain: None, leaves, holds: None },
    }
}

/// For collision-free D and D′ = D[x⃗ ↦ u⃗]: every leaf of T′ \ T has an
/// ancestor z and an index j with D(xⱼ) ≠ D′(xⱼ) = ℓ′_z. Returns None when D
/// has a collision.
pub fn check_newpath_lemma(db: &LabelDb, xs: &[LabelQuery], us: &[Option<Label>], dag: &Dag, phi: &Label) -> Result<Option<bool>> {
    if xs.len() != us.len() {
        return Err(Error::Dimension(format!("{} inputs but {} values", xs.len(), us.len())));
    }
    if db.has_collision() {
        return Ok(None);
    }
    let mut updated = db.clone();
    for (x, u) in xs.iter().zip(us) {
        updated.set(x.clone(), u.clone());
    }
    let before = extract(db, dag, phi);
    let after = extract(&updated, dag, phi);
    let changed: Vec<&Label> = xs
        .iter()
        .filter(|x| db.get(x) != updated.get(x))
        .filter_map(|x| updated.get(x))
        .collect();
    let holds = after.leaves(dag).into_iter().filter(|v| !before.tree.contains(v)).all(|v| {
        v.ancestors().iter().any(|z| after.labels.get(z).is_some_and(|lz| changed.contains(&lz)))
    });
    Ok(Some(holds))
}

/// Maps a path v₀ → … → v_r to the inputs xᵢ = (vᵢ, ℓ_in(vᵢ)), checking that
/// each edge is in the graph, each xᵢ is answered by ℓ_{vᵢ}, and
/// D(x_{i−1}) ◁ xᵢ.
pub fn path_to_chain(db: &LabelDb, dag: &Dag, labels: &LabelMap, path: &[Vertex]) -> Result<Vec<LabelQuery>> {
    let mut chain: Vec<LabelQuery> = Vec::with_capacity(path.len());
    for (i, &v) in path.iter().enumerate() {
        if i > 0 && !dag.in_neighbors(v).contains(&path[i - 1]) {
            return Err(Error::Domain(format!("({}, {v}) is not an edge", path[i - 1])));
        }
        let ins = labels_of(labels, &dag.in_neighbors(v)).ok_or_else(|| Error::Domain(format!("in-neighbors of {v} are unlabeled")))?;
        let lv = labels.get(&v).ok_or_else(|| Error::Domain(format!("{v} is unlabeled")))?;
        let x = LabelQuery::new(v, ins);
        if db.get(&x) != Some(lv) {
            return Err(Error::Domain(format!("label of {v} is inconsistent with the database")));
        }
        if let Some(prev) = chain.last() {
            if !x.inputs.contains(db.get(prev).expect("checked above")) {
                return Err(Error::Domain(format!("link into {v} is broken")));
            }
        }
        chain.push(x);
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posw::backend::RandomOracle;
    use crate::posw::protocol::compute_labeling;

    fn honest(n: u32, w: u32, seed: u64) -> (Dag, Label, LabelDb, Label) {
        let dag = Dag::new(n).unwrap();
        let chi = Label::from_u64(3, w);
        let mut oracle = TableOracle::new(seed, w).unwrap();
        let (labels, _) = compute_labeling(&chi, n, &mut oracle).unwrap();
        (dag, chi.clone(), LabelDb::from_table(&oracle, &chi), labels[&Vertex::ROOT].clone())
    }

    #[test]
    fn empty_database_gives_root_only() {
        let dag = Dag::new(2).unwrap();
        let phi = Label::from_u64(0, 8);
        let ext = extract(&LabelDb::new(), &dag, &phi);
        assert_eq!(ext.tree.into_iter().collect::<Vec<_>>(), [Vertex::ROOT]);
        let check = check_leaves_lemma(&LabelDb::new(), &dag, &phi);
        assert_eq!((check.chain, check.leaves, check.holds), (Some(0), 0, Some(true)));
    }

    #[test]
    fn honest_database_gives_full_tree() {
        for n in 1..=4 {
            let (dag, _, db, phi) = honest(n, 16, n as u64);
            assert_eq!(db.len(), dag.vertex_count());
            let ext = extract(&db, &dag, &phi);
            assert_eq!(ext.tree.len(), dag.vertex_count());
            assert_eq!(ext.leaves(&dag).len(), 1 << n);
            assert!(!ext.collision);
            assert_eq!(check_extract_lemma(&db, &dag, &phi), Some(vec![]));
            let check = check_leaves_lemma(&db, &dag, &phi);
            assert_eq!(check.holds, Some(true));
            // The evaluation order is a chain of length N.
            assert_eq!(check.chain, Some(dag.vertex_count()));
        }
    }

    #[test]
    fn table_view_ignores_other_chi_and_challenges() {
        let w = 8;
        let mut oracle = TableOracle::new(1, w).unwrap();
        let chi = Label::from_u64(1, w);
        compute_labeling(&chi, 1, &mut oracle).unwrap();
        compute_labeling(&Label::from_u64(2, w), 1, &mut oracle).unwrap();
        oracle.query(&crate::posw::backend::challenge_input(&chi, &chi, 1));
        assert_eq!(LabelDb::from_table(&oracle, &chi).len(), 3);
    }

    #[test]
    fn path_to_chain_examples() {
        let (dag, _, db, phi) = honest(1, 16, 5);
        let ext = extract(&db, &dag, &phi);
        let zero = Vertex::parse("0").unwrap();
        assert_eq!(path_to_chain(&db, &dag, &ext.labels, &[zero]).unwrap().len(), 1);
        let chain = path_to_chain(&db, &dag, &ext.labels, &[zero, Vertex::ROOT]).unwrap();
        assert_eq!(chain.len(), 2);
        assert!(chain[1].inputs.contains(db.get(&chain[0]).unwrap()));
        assert!(path_to_chain(&db, &dag, &ext.labels, &[Vertex::ROOT, zero]).is_err());
        let mut bad = ext.labels.clone();
        bad.insert(zero, Label::from_u64(0, 16));
        assert!(path_to_chain(&db, &dag, &bad, &[zero]).is_err());
    }

    #[test]
    fn newpath_single_update_at_n1() {
        let w = 4;
        let dag = Dag::new(1).unwrap();
        let (a, b, c, phi) = (Label::from_u64(1, w), Label::from_u64(2, w), Label::from_u64(3, w), Label::from_u64(4, w));
        let zero = Vertex::parse("0").unwrap();
        let one = Vertex::parse("1").unwrap();
        let mut db = LabelDb::new();
        db.insert(LabelQuery::new(Vertex::ROOT, vec![a.clone(), b.clone()]), phi.clone());
        db.insert(LabelQuery::new(zero, vec![]), a.clone());
        db.insert(LabelQuery::new(one, vec![a.clone()]), c.clone());
        assert_eq!(extract(&db, &dag, &phi).leaves(&dag), [zero]);
        // Reprogramming leaf 1 to answer b opens it; the witness is z = 1.
        let x = LabelQuery::new(one, vec![a.clone()]);
        assert_eq!(check_newpath_lemma(&db, std::slice::from_ref(&x), &[Some(b.clone())], &dag, &phi).unwrap(), Some(true));
        // Unchanged values give T′ = T.
        assert_eq!(check_newpath_lemma(&db, &[x], &[Some(c)], &dag, &phi).unwrap(), Some(true));
    }

    #[test]
    fn collisions_raise_the_flag() {
        let w = 4;
        let dag = Dag::new(1).unwrap();
        let phi = Label::from_u64(9, w);
        let mut db = LabelDb::new();
        db.insert(LabelQuery::new(Vertex::ROOT, vec![Label::from_u64(1, w), Label::from_u64(2, w)]), phi.clone());
        db.insert(LabelQuery::new(Vertex::ROOT, vec![Label::from_u64(3, w), Label::from_u64(4, w)]), phi.clone());
        let ext = extract(&db, &dag, &phi);
        assert!(ext.collision);
        assert_eq!(ext.labels[&Vertex::parse("0").unwrap()], Label::from_u64(1, w));
        assert_eq!(check_extract_lemma(&db, &dag, &phi), None);
    }
}
