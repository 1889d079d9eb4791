//! Exact one-round transition capacities on micro instances.
//!
//! The quantum capacity ⟦P→P′⟧_k is the largest operator norm of
//! P′|_{D|x⃗} · cO_{x⃗ŷ⃗} · P|_{D|x⃗} over distinct x⃗, ŷ⃗ and D. The classical
//! capacity is the largest probability that lazily sampling the fresh
//! coordinates of x⃗ moves a database in P into P′.

mod calculus;
mod theorems;

use std::collections::BTreeMap;

use serde::Serialize;

pub use calculus::{verify_calculus, CalculusInstance, InequalityCheck};
pub use theorems::{
    bound_thm_general, bound_thm_simple, bound_thm_tricky, families_over, qtc_bound2_extra, FamilyGrid, Recognition,
};

use crate::error::{domain, Error, Result};
use crate::group::TransitionCache;
use crate::linalg::{kron, largest_singular_value, CMatrix};
use crate::oracle::{Database, OracleDomain};
use crate::properties::{restrict, DatabaseProperty, TupleSpace};

/// Slack used when comparing capacities with bounds.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct CapacityQuery {
    pub p: DatabaseProperty,
    pub p_prime: DatabaseProperty,
    pub k: usize,
    /// Inputs x⃗ may draw from; `None` means all of X.
    pub restrict: Option<Vec<usize>>,
    pub domain: OracleDomain,
}

impl CapacityQuery {
    pub fn new(p: DatabaseProperty, p_prime: DatabaseProperty, k: usize, domain: &OracleDomain) -> Self {
        Self { p, p_prime, k, restrict: None, domain: domain.clone() }
    }

    pub fn restricted(mut self, inputs: Vec<usize>) -> Self {
        self.restrict = Some(inputs);
        self
    }

    /// Sorted, deduplicated input set.
    pub fn inputs(&self) -> Result<Vec<usize>> {
        let mut xs = match &self.restrict {
            Some(r) => r.clone(),
            None => (0..self.domain.len()).collect(),
        };
        xs.sort_unstable();
        xs.dedup();
        if xs.iter().any(|&x| x >= self.domain.len()) {
            return domain("restricted input outside the domain");
        }
        Ok(xs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub xs: Vec<usize>,
    pub yhats: Vec<usize>,
    pub database: Database,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityReport {
    pub value: f64,
    pub witness: Option<Witness>,
    /// min(bound_raw, 1).
    pub bound: Option<f64>,
    pub bound_raw: Option<f64>,
    pub bound_source: Option<String>,
    pub holds: Option<bool>,
}

impl CapacityReport {
    fn new(value: f64, witness: Option<Witness>) -> Self {
        Self { value, witness, bound: None, bound_raw: None, bound_source: None, holds: None }
    }

    /// Attaches a closed-form comparison value.
    pub fn with_bound(mut self, raw: f64, source: &str) -> Self {
        self.bound = Some(raw.min(1.0));
        self.bound_raw = Some(raw);
        self.bound_source = Some(source.to_string());
        self.holds = Some(self.value <= raw + TOLERANCE);
        self
    }
}

/// All ordered k-tuples of distinct entries of `set`, lexicographic.
pub(crate) fn ordered_tuples(set: &[usize], k: usize) -> Vec<Vec<usize>> {
    fn go(set: &[usize], k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for &x in set {
            if !cur.contains(&x) {
                cur.push(x);
                go(set, k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(set, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Databases that are ⊥ on `xs`, in canonical order.
pub(crate) fn exteriors(inputs: usize, range: usize, xs: &[usize]) -> Vec<Database> {
    let free: Vec<usize> = (0..inputs).filter(|x| !xs.contains(x)).collect();
    Database::all(free.len(), range)
        .map(|sub| {
            let mut d = Database::empty(inputs, range);
            for (i, &x) in free.iter().enumerate() {
                d.set(x, sub.get(i));
            }
            d
        })
        .collect()
}

fn falling(n: usize, k: usize) -> u128 {
    (0..k).map(|i| n.saturating_sub(i) as u128).product()
}

fn check_work(needed: Option<u128>, budget: u128) -> Result<()> {
    let needed = needed.unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::Budget { needed, budget });
    }
    Ok(())
}

/// ŷ⃗ in canonical order with its tensor-product transition matrix.
fn product_matrices(cache: &TransitionCache, k: usize) -> Vec<(Vec<usize>, CMatrix)> {
    let m = cache.spec().order();
    let space = TupleSpace { k, range: m - 1 };
    (0..m.pow(k as u32))
        .map(|idx| {
            let yhats = space.decode(idx);
            let mut mat = CMatrix::identity(1, 1);
            for &y in &yhats {
                mat = kron(&mat, cache.get(y).entries());
            }
            (yhats, mat)
        })
        .collect()
}

/// ⟦P→P′⟧_k by exhaustive enumeration.
pub fn quantum_capacity_exact(q: &CapacityQuery) -> Result<CapacityReport> {
    let inputs = q.inputs()?;
    let dom = &q.domain;
    let m = dom.spec().order();
    if q.k == 0 {
        return Err(Error::Parameter("parallelism k must be at least 1".into()));
    }
    if q.k > inputs.len() {
        return Err(Error::Parameter(format!("k = {} exceeds the {} available inputs", q.k, inputs.len())));
    }
    TupleSpace::new(q.k, m)?;
    let exterior_count = ((m + 1) as u128).checked_pow((dom.len() - q.k) as u32);
    let yhat_count = (m as u128).checked_pow(q.k as u32);
    let work = exterior_count.and_then(|e| e.checked_mul(falling(inputs.len(), q.k))).zip(yhat_count).and_then(|(a, b)| a.checked_mul(b));
    check_work(work, dom.budget())?;

    let cache = TransitionCache::new(dom.spec());
    let products = product_matrices(&cache, q.k);
    // The maximum over ŷ⃗ depends only on the two restricted sets.
    let mut memo: BTreeMap<(Vec<usize>, Vec<usize>), (f64, usize)> = BTreeMap::new();
    let mut best: Option<(f64, Witness)> = None;
    for xs in ordered_tuples(&inputs, q.k) {
        for d in exteriors(dom.len(), m, &xs) {
            let cols = restrict(&q.p, &d, &xs)?.indices();
            let rows = restrict(&q.p_prime, &d, &xs)?.indices();
            let (value, arg) = *memo.entry((rows.clone(), cols.clone())).or_insert_with(|| {
                if rows.is_empty() || cols.is_empty() {
                    return (0.0, 0);
                }
                let mut top = (f64::NEG_INFINITY, 0);
                for (i, (_, mat)) in products.iter().enumerate() {
                    let sub = CMatrix::from_fn(rows.len(), cols.len(), |a, b| mat[(rows[a], cols[b])]);
                    let s = largest_singular_value(&sub);
                    if s > top.0 + 1e-12 {
                        top = (s, i);
                    }
                }
                top
            });
            if best.as_ref().is_none_or(|(b, _)| value > b + 1e-12) {
                let witness = Witness { xs: xs.clone(), yhats: products[arg].0.clone(), database: d.clone() };
                best = Some((value, witness));
            }
        }
    }
    Ok(match best {
        Some((v, w)) => CapacityReport::new(v, Some(w)),
        None => CapacityReport::new(0.0, None),
    })
}

/// Classical capacity: max over D ∈ P and distinct x⃗ of the probability
/// that D with its ⊥-coordinates on x⃗ sampled uniformly lies in P′.
pub fn classical_capacity_exact(
    p: &DatabaseProperty,
    p_prime: &DatabaseProperty,
    k: usize,
    domain: &OracleDomain,
) -> Result<CapacityReport> {
    let m = domain.spec().order();
    let n = domain.len();
    if k == 0 || k > n {
        return Err(Error::Parameter(format!("k = {k} must lie in 1..={n}")));
    }
    let dbs = ((m + 1) as u128).checked_pow(n as u32);
    let work = dbs
        .and_then(|d| d.checked_mul(falling(n, k)))
        .and_then(|w| w.checked_mul((m as u128).checked_pow(k as u32)?));
    check_work(work, domain.budget())?;

    let inputs: Vec<usize> = (0..n).collect();
    let tuples = ordered_tuples(&inputs, k);
    let mut best: Option<(f64, Witness)> = None;
    for d in Database::all(n, m).filter(|d| p.contains(d)) {
        for xs in &tuples {
            let fresh: Vec<usize> = xs.iter().copied().filter(|&x| d.is_bottom(x)).collect();
            let samples = TupleSpace { k: fresh.len(), range: m - 1 };
            let hits = samples.tuples().filter(|ys| p_prime.contains(&d.with_many(&fresh, ys))).count();
            let prob = hits as f64 / samples.size() as f64;
            if best.as_ref().is_none_or(|(b, _)| prob > b + 1e-12) {
                best = Some((prob, Witness { xs: xs.clone(), yhats: Vec::new(), database: d.clone() }));
            }
        }
    }
    Ok(match best {
        Some((v, w)) => CapacityReport::new(v, Some(w)),
        None => CapacityReport::new(0.0, None),
    })
}

/// 1 − (1 − 1/M)^k: chance that k fresh uniform values include 0.
pub fn classical_preimage_capacity(k: usize, m: usize) -> f64 {
    1.0 - (1.0 - 1.0 / m as f64).powi(k as i32)
}

/// Sum of one-round capacities, which bounds the q-round capacity.
pub fn multi_step_bound(step_capacities: &[f64]) -> f64 {
    step_capacities.iter().sum()
}
