//! Exact checks of the capacity manipulation rules.

use std::cell::RefCell;
use std::collections::BTreeMap;

use serde::Serialize;

use super::{quantum_capacity_exact, CapacityQuery, TOLERANCE};
use crate::error::{Error, Result};
use crate::oracle::OracleDomain;
use crate::properties::DatabaseProperty;

/// Properties and splits for one calculus check. The two parallel
/// conditioning forms use P₀ = ¬P, P₁ = P′, P₂ = P″ and Q ∪ P in place of Q.
#[derive(Clone, Debug)]
pub struct CalculusInstance {
    pub p: DatabaseProperty,
    pub p_prime: DatabaseProperty,
    pub p_dprime: DatabaseProperty,
    pub q: DatabaseProperty,
    pub k: usize,
    /// (k′, k″) with k′ + k″ = k, both at least 1.
    pub k_splits: Vec<(usize, usize)>,
    /// (X′, X″) with X′ ∪ X″ = X, both nonempty.
    pub x_splits: Vec<(Vec<usize>, Vec<usize>)>,
    pub domain: OracleDomain,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs, or −|lhs − rhs| for equalities.
    pub slack: f64,
    pub holds: bool,
}

impl InequalityCheck {
    fn le(name: String, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        Self { name, lhs, rhs, slack, holds: slack >= -TOLERANCE }
    }

    fn eq(name: String, lhs: f64, rhs: f64) -> Self {
        let slack = -(lhs - rhs).abs();
        Self { name, lhs, rhs, slack, holds: slack >= -TOLERANCE }
    }
}

type MemoKey = (String, String, usize, Vec<usize>);

struct Engine<'a> {
    domain: &'a OracleDomain,
    memo: RefCell<BTreeMap<MemoKey, f64>>,
}

impl Engine<'_> {
    /// ⟦src → dst⟧ with k clamped to |X|, as padding with ŷ = 0 shows the
    /// capacity is nondecreasing in k.
    fn cap(&self, src: &DatabaseProperty, dst: &DatabaseProperty, k: usize, xs: &[usize]) -> Result<f64> {
        let k = k.min(xs.len());
        let key = (src.to_string(), dst.to_string(), k, xs.to_vec());
        if let Some(&v) = self.memo.borrow().get(&key) {
            return Ok(v);
        }
        let q = CapacityQuery::new(src.clone(), dst.clone(), k, self.domain).restricted(xs.to_vec());
        let v = quantum_capacity_exact(&q)?.value;
        self.memo.borrow_mut().insert(key, v);
        Ok(v)
    }
}

fn covers(split: &(Vec<usize>, Vec<usize>), n: usize) -> bool {
    let mut all: Vec<usize> = split.0.iter().chain(&split.1).copied().collect();
    all.sort_unstable();
    all.dedup();
    !split.0.is_empty() && !split.1.is_empty() && all == (0..n).collect::<Vec<_>>()
}

pub fn verify_calculus(inst: &CalculusInstance) -> Result<Vec<InequalityCheck>> {
    let n = inst.domain.len();
    let k = inst.k;
    if k == 0 || k > n {
        return Err(Error::Parameter(format!("k = {k} must lie in 1..={n}")));
    }
    for &(a, b) in &inst.k_splits {
        if a == 0 || b == 0 || a + b != k {
            return Err(Error::Parameter(format!("split {a}+{b} does not partition k = {k}")));
        }
    }
    if let Some(bad) = inst.x_splits.iter().find(|s| !covers(s, n)) {
        return Err(Error::Parameter(format!("input split {:?} | {:?} does not cover X", bad.0, bad.1)));
    }
    let e = Engine { domain: &inst.domain, memo: RefCell::new(BTreeMap::new()) };
    let all: Vec<usize> = (0..n).collect();
    let (p, pp, ppp, q) = (&inst.p, &inst.p_prime, &inst.p_dprime, &inst.q);
    let cap = |s: &DatabaseProperty, d: &DatabaseProperty, k: usize| e.cap(s, d, k, &all);
    let mut out = Vec::new();

    out.push(InequalityCheck::eq("symmetry".into(), cap(p, pp, k)?, cap(pp, p, k)?));

    let p_and_q = p.clone().and(q.clone());
    let p_or_q = p.clone().or(q.clone());
    let (a, b) = (cap(p, pp, k)?, cap(q, pp, k)?);
    let inter = cap(&p_and_q, pp, k)?;
    let union = cap(&p_or_q, pp, k)?;
    out.push(InequalityCheck::le("shrink.intersection".into(), inter, a.min(b)));
    out.push(InequalityCheck::le("shrink.union-lower".into(), a.max(b), union));
    out.push(InequalityCheck::le("shrink.union-upper".into(), union, a + b));

    out.push(InequalityCheck::le("subset.source".into(), inter, b));
    out.push(InequalityCheck::le("subset.target".into(), cap(pp, &p_and_q, k)?, cap(pp, q, k)?));

    let q_and_ppp = q.clone().and(ppp.clone());
    let not_q = q.clone().not();
    let q_and_pp = q.clone().and(pp.clone());
    let q_minus_pp = q.clone().minus(pp.clone());
    let lhs_main = cap(p, &q_and_ppp, k)?;
    out.push(InequalityCheck::le(
        "cond1".into(),
        cap(p, ppp, k)?,
        cap(p, &ppp.clone().minus(q.clone()), k)? + lhs_main,
    ));
    for &(k1, k2) in &inst.k_splits {
        let rhs = cap(p, &not_q, k1)? + cap(p, &q_and_pp, k1)? + cap(&q_minus_pp, &q_and_ppp, k2)?;
        out.push(InequalityCheck::le(format!("cond2[{k1}+{k2}]"), lhs_main, rhs));
    }
    for (x1, x2) in &inst.x_splits {
        let rhs = e.cap(p, &not_q, k, x1)? + e.cap(p, &q_and_pp, k, x1)? + e.cap(&q_minus_pp, &q_and_ppp, k, x2)?;
        out.push(InequalityCheck::le(format!("cond3[{x1:?}|{x2:?}]"), lhs_main, rhs));
    }

    // Parallel conditioning with h = 2.
    let qt = q.clone().or(p.clone());
    let not_qt = qt.clone().not();
    let step1 = (qt.clone().and(p.clone()), qt.clone().and(pp.clone()));
    let step2 = (qt.clone().minus(pp.clone()), qt.clone().and(ppp.clone()));
    let lhs = cap(p, ppp, k)?;
    for &(k1, k2) in &inst.k_splits {
        let rhs = cap(p, &not_qt, k1)? + cap(p, &not_qt, k)? + cap(&step1.0, &step1.1, k1)? + cap(&step2.0, &step2.1, k2)?;
        out.push(InequalityCheck::le(format!("parcond.k[{k1}+{k2}]"), lhs, rhs));
    }
    for (x1, x2) in &inst.x_splits {
        let rhs = e.cap(p, &not_qt, k, x1)?
            + e.cap(p, &not_qt, k, &all)?
            + e.cap(&step1.0, &step1.1, k, x1)?
            + e.cap(&step2.0, &step2.1, k, x2)?;
        out.push(InequalityCheck::le(format!("parcond.x[{x1:?}|{x2:?}]"), lhs, rhs));
    }
    Ok(out)
}
