use crate::error::{domain, Error, Result};
use crate::linalg::CMatrix;
use crate::oracle::Database;

use super::{ChainRelation, DatabaseProperty};

/// Largest tuple space (M+1)^k handled densely.
pub const MAX_TUPLE_SPACE: usize = 4096;

/// Ȳ^k with ⊥ = M, first coordinate most significant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TupleSpace {
    pub k: usize,
    pub range: usize,
}

impl TupleSpace {
    pub fn new(k: usize, range: usize) -> Result<Self> {
        let size = (range + 1).checked_pow(k as u32).unwrap_or(usize::MAX);
        if size > MAX_TUPLE_SPACE {
            return Err(Error::Budget { needed: size as u128, budget: MAX_TUPLE_SPACE as u128 });
        }
        Ok(Self { k, range })
    }

    pub fn base(&self) -> usize {
        self.range + 1
    }

    pub fn size(&self) -> usize {
        self.base().pow(self.k as u32)
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut t = vec![0; self.k];
        for slot in t.iter_mut().rev() {
            *slot = index % self.base();
            index /= self.base();
        }
        t
    }

    pub fn encode(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &v| acc * self.base() + v)
    }

    pub fn tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.size()).map(|i| self.decode(i))
    }
}

/// P|_{D|x⃗} identified with a subset of Ȳ^k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictedSet {
    space: TupleSpace,
    members: Vec<bool>,
}

impl RestrictedSet {
    pub fn from_members(space: TupleSpace, members: Vec<bool>) -> Result<Self> {
        if members.len() != space.size() {
            return Err(Error::Dimension("membership vector does not match the tuple space".into()));
        }
        Ok(Self { space, members })
    }

    pub fn space(&self) -> TupleSpace {
        self.space
    }

    pub fn contains_index(&self, index: usize) -> bool {
        self.members[index]
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.members[self.space.encode(tuple)]
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.members.len()).filter(|&i| self.members[i]).collect()
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&b| b)
    }

    pub fn is_full(&self) -> bool {
        self.members.iter().all(|&b| b)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a && b)
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a || b)
    }

    pub fn complement(&self) -> Self {
        Self { space: self.space, members: self.members.iter().map(|b| !b).collect() }
    }

    fn zip(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Self {
        Self { space: self.space, members: self.members.iter().zip(&other.members).map(|(&a, &b)| f(a, b)).collect() }
    }
}

pub(crate) fn check_distinct(xs: &[usize], inputs: usize) -> Result<()> {
    if xs.iter().any(|&x| x >= inputs) {
        return domain("query input outside the domain");
    }
    let mut s = xs.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != xs.len() {
        return domain("query inputs must be pairwise distinct");
    }
    Ok(())
}

/// {r⃗ ∈ Ȳ^k : D[x⃗ ↦ r⃗] ∈ P}.
pub fn restrict(p: &DatabaseProperty, d: &Database, xs: &[usize]) -> Result<RestrictedSet> {
    check_distinct(xs, d.len())?;
    let space = TupleSpace::new(xs.len(), d.range())?;
    let members = space.tuples().map(|r| p.contains(&d.with_many(xs, &r))).collect();
    Ok(RestrictedSet { space, members })
}

/// Diagonal 0/1 projector in the canonical tuple order (⊥ last per coordinate).
pub fn projector(set: &RestrictedSet) -> CMatrix {
    let n = set.members.len();
    CMatrix::from_fn(n, n, |i, j| if i == j && set.members[i] { 1.0.into() } else { 0.0.into() })
}

/// A local property of a query window x⃗: support positions into x⃗ and a
/// member set over Ȳ^{|support|}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalProperty {
    support: Vec<usize>,
    range: usize,
    members: Vec<bool>,
}

impl LocalProperty {
    pub fn from_predicate(support: Vec<usize>, range: usize, pred: impl Fn(&[usize]) -> bool) -> Result<Self> {
        let space = TupleSpace::new(support.len(), range)?;
        let members = space.tuples().map(|t| pred(&t)).collect();
        Ok(Self { support, range, members })
    }

    /// Constant property with empty support.
    pub fn constant(value: bool, range: usize) -> Self {
        Self { support: Vec::new(), range, members: vec![value] }
    }

    /// 1-local property {u ∈ values} at position `pos`.
    pub fn one_local(pos: usize, range: usize, values: &[usize]) -> Self {
        let mut members = vec![false; range + 1];
        for &v in values {
            members[v] = true;
        }
        Self { support: vec![pos], range, members }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn locality(&self) -> usize {
        self.support.len()
    }

    /// Some(v) if the property is constant v.
    pub fn constant_value(&self) -> Option<bool> {
        let first = self.members[0];
        self.members.iter().all(|&b| b == first).then_some(first)
    }

    /// Membership of the full window tuple u⃗.
    pub fn contains(&self, window: &[usize]) -> bool {
        let space = TupleSpace { k: self.support.len(), range: self.range };
        let sub: Vec<usize> = self.support.iter().map(|&p| window[p]).collect();
        self.members[space.encode(&sub)]
    }

    pub fn members_local(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let space = TupleSpace { k: self.support.len(), range: self.range };
        (0..self.members.len()).filter(|&i| self.members[i]).map(move |i| space.decode(i))
    }

    /// P[U ∈ L] for a 1-local property: |L ∩ Y| / M. A 0-local property
    /// counts as Ȳ or ∅.
    pub fn probability(&self) -> f64 {
        match self.support.len() {
            0 => f64::from(u8::from(self.members[0])),
            1 => self.members[..self.range].iter().filter(|&&b| b).count() as f64 / self.range as f64,
            _ => f64::NAN,
        }
    }

    /// For each position p of the support and each assignment of the other
    /// support positions, the slice {u : (…, u at p, …) ∈ L} ⊆ Ȳ.
    pub fn slices(&self) -> Vec<Vec<bool>> {
        let l = self.support.len();
        let space = TupleSpace { k: l, range: self.range };
        let mut out = Vec::new();
        for p in 0..l {
            let others = TupleSpace { k: l - 1, range: self.range };
            for idx in 0..others.size() {
                let rest = others.decode(idx);
                let slice = (0..=self.range)
                    .map(|u| {
                        let mut t = rest.clone();
                        t.insert(p, u);
                        self.members[space.encode(&t)]
                    })
                    .collect();
                out.push(slice);
            }
        }
        out
    }
}

/// Validates ⊥-monotonicity: a member with ⊥ at position i stays a member
/// under every substitution of position i.
pub fn check_locality(l: &LocalProperty) -> Result<()> {
    let space = TupleSpace { k: l.support.len(), range: l.range };
    for t in l.members_local() {
        for (i, &v) in t.iter().enumerate() {
            if v == l.range {
                for y in 0..l.range {
                    let mut s = t.clone();
                    s[i] = y;
                    if !l.members[space.encode(&s)] {
                        return domain(format!("local property is not ⊥-monotone at {t:?}"));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Local properties over one window x⃗ with pairwise distinct supports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalFamily {
    xs: Vec<usize>,
    props: Vec<LocalProperty>,
}

impl LocalFamily {
    pub fn new(xs: Vec<usize>, props: Vec<LocalProperty>) -> Result<Self> {
        let k = xs.len();
        let mut supports: Vec<Vec<usize>> = Vec::new();
        for p in &props {
            if p.support.iter().any(|&i| i >= k) {
                return Err(Error::Dimension("support position outside the window".into()));
            }
            let mut s = p.support.clone();
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return domain("support lists a position twice");
            }
            if supports.contains(&s) {
                return domain("local properties in a family must have distinct supports");
            }
            check_locality(p)?;
            supports.push(s);
        }
        Ok(Self { xs, props })
    }

    /// The family {constant v} with empty support.
    pub fn constant(xs: Vec<usize>, value: bool, range: usize) -> Self {
        Self { xs, props: vec![LocalProperty::constant(value, range)] }
    }

    pub fn xs(&self) -> &[usize] {
        &self.xs
    }

    pub fn properties(&self) -> &[LocalProperty] {
        &self.props
    }

    /// ℓ = largest support size.
    pub fn locality(&self) -> usize {
        self.props.iter().map(LocalProperty::locality).max().unwrap_or(0)
    }

    pub fn union_contains(&self, window: &[usize]) -> bool {
        self.props.iter().any(|p| p.contains(window))
    }

    /// The family as a subset of Ȳ^k.
    pub fn union_set(&self, range: usize) -> Result<RestrictedSet> {
        let space = TupleSpace::new(self.xs.len(), range)?;
        let members = space.tuples().map(|t| self.union_contains(&t)).collect();
        Ok(RestrictedSet { space, members })
    }
}

/// L_i = {0} at position i.
pub fn prmg_local_family(xs: &[usize], range: usize) -> LocalFamily {
    let props = (0..xs.len()).map(|i| LocalProperty::one_local(i, range, &[0])).collect();
    LocalFamily { xs: xs.to_vec(), props }
}

/// L_i = {y : y ◁ x for some x with D(x) ≠ ⊥ or x ∈ x⃗}.
pub fn chain_local_family(d: &Database, xs: &[usize], rel: &ChainRelation) -> Result<LocalFamily> {
    check_distinct(xs, d.len())?;
    let m = d.range();
    let targets: Vec<usize> = (0..d.len()).filter(|&x| !d.is_bottom(x) || xs.contains(&x)).collect();
    let values: Vec<usize> = (0..m).filter(|&y| targets.iter().any(|&x| rel.relates(y, x))).collect();
    let props = (0..xs.len()).map(|i| LocalProperty::one_local(i, m, &values)).collect();
    Ok(LocalFamily { xs: xs.to_vec(), props })
}

/// CL_{i,j} = {(y, y)} for i < j, and CL_i = {D(x̄) : x̄ ∉ x⃗, D(x̄) ≠ ⊥}.
pub fn collision_local_family(d: &Database, xs: &[usize]) -> Result<LocalFamily> {
    check_distinct(xs, d.len())?;
    let m = d.range();
    let k = xs.len();
    let mut props = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            props.push(LocalProperty::from_predicate(vec![i, j], m, |t| t[0] == t[1] && t[0] != m)?);
        }
    }
    let outside: Vec<usize> = (0..d.len()).filter(|x| !xs.contains(x) && !d.is_bottom(*x)).map(|x| d.get(x)).collect();
    for i in 0..k {
        props.push(LocalProperty::one_local(i, m, &outside));
    }
    Ok(LocalFamily { xs: xs.to_vec(), props })
}

fn check_window(fam: &LocalFamily, xs: &[usize]) -> Result<()> {
    if fam.xs != xs {
        return domain("family window differs from x⃗");
    }
    Ok(())
}

/// P′|_{D|x⃗} ⊆ ⋃ L_i ⊆ P|_{D|x⃗}, checked over all of Ȳ^k.
pub fn check_strong_recognizes(
    fam: &LocalFamily,
    p: &DatabaseProperty,
    p_prime: &DatabaseProperty,
    xs: &[usize],
    d: &Database,
) -> Result<bool> {
    check_window(fam, xs)?;
    let p_set = restrict(p, d, xs)?;
    let pp_set = restrict(p_prime, d, xs)?;
    let u = fam.union_set(d.range())?;
    Ok((0..u.members.len()).all(|i| (!pp_set.members[i] || u.members[i]) && (!u.members[i] || p_set.members[i])))
}

/// For all r⃗ in P|_{D|x⃗} and u⃗ in P′|_{D|x⃗}, some L_i contains u⃗ and
/// r⃗, u⃗ differ on Supp(L_i).
pub fn check_weak_recognizes(
    fam: &LocalFamily,
    p: &DatabaseProperty,
    p_prime: &DatabaseProperty,
    xs: &[usize],
    d: &Database,
) -> Result<bool> {
    check_window(fam, xs)?;
    let p_set = restrict(p, d, xs)?;
    let pp_set = restrict(p_prime, d, xs)?;
    let space = p_set.space;
    let rs: Vec<Vec<usize>> = p_set.indices().into_iter().map(|i| space.decode(i)).collect();
    for ui in pp_set.indices() {
        let u = space.decode(ui);
        let hits: Vec<&LocalProperty> = fam.props.iter().filter(|l| l.contains(&u)).collect();
        for r in &rs {
            if !hits.iter().any(|l| l.support.iter().any(|&j| r[j] != u[j])) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
