use super::{SuiteOutcome, Tally};
use crate::bounds::{evaluate, monotonicity_violations, posw_asymptotic, posw_bound, BoundInput, Problem};
use crate::capacity::{
    bound_thm_general, bound_thm_tricky, classical_capacity_exact, classical_preimage_capacity, families_over,
    quantum_capacity_exact, verify_calculus, CalculusInstance, CapacityQuery, Recognition, TOLERANCE,
};
use crate::error::Result;
use crate::group::GroupSpec;
use crate::oracle::OracleDomain;
use crate::properties::{chain_local_family, collision_local_family, ChainRelation, DatabaseProperty};

/// Exact ⟦¬PRMG → PRMG⟧ against √(10k/M) for (M, k) ∈ {2, 4} × {1, 2} and
/// |X| ≤ 3, plus the √3/2 value at M = 2, k = 1, |X| = 2.
pub fn prmg_capacity_suite() -> Result<SuiteOutcome> {
    let mut t = Tally::default();
    for m_bits in 1..=2 {
        let spec = GroupSpec::bits(m_bits)?;
        let m = spec.order();
        for k in 1..=2 {
            for n in k..=3 {
                let domain = OracleDomain::with_size(n, spec)?;
                let q = CapacityQuery::new(DatabaseProperty::prmg().not(), DatabaseProperty::prmg(), k, &domain);
                let bound = (10.0 * k as f64 / m as f64).sqrt();
                let r = quantum_capacity_exact(&q)?.with_bound(bound, "simple");
                t.metric(&format!("value[M={m},k={k},|X|={n}]"), r.value);
                t.check(r.holds == Some(true), || format!("M={m} k={k} |X|={n}: {} > {bound}", r.value));
                if (m, k, n) == (2, 1, 2) {
                    let target = 3f64.sqrt() / 2.0;
                    t.check((r.value - target).abs() <= 1e-9, || format!("M=2 k=1 |X|=2: {} ≠ √3/2", r.value));
                }
            }
        }
    }
    Ok(t.finish("prmg-capacity", None))
}

/// Chain (equality relation, weak recognition) and collision (strong
/// recognition) transitions at M = 2, |X| ≤ 3, k ≤ 2: the family is checked
/// on every window, then the exact capacity is compared with the bound.
pub fn recognized_capacity_suite() -> Result<SuiteOutcome> {
    let mut t = Tally::default();
    let spec = GroupSpec::bits(1)?;
    for n in 1..=3 {
        let domain = OracleDomain::with_size(n, spec)?;
        let rel = ChainRelation::equality(&domain);
        for k in 1..=n.min(2) {
            for s in 0..=2 {
                let src = DatabaseProperty::chn(s, rel.clone()).not();
                let dst = DatabaseProperty::chn(s + 1, rel.clone());
                let grid = families_over(&src, &dst, k, None, &domain, Recognition::Weak, |xs, d| chain_local_family(d, xs, &rel))?;
                let cell = format!("chain s={s} |X|={n} k={k}");
                t.check(grid.recognized(), || format!("{cell}: not weakly recognized at {} windows", grid.failures.len()));
                let bound = bound_thm_tricky(&grid.families)?;
                let value = quantum_capacity_exact(&CapacityQuery::new(src, dst, k, &domain))?.value;
                t.metric(&cell, [value, bound]);
                t.check(value <= bound + TOLERANCE, || format!("{cell}: {value} > {bound}"));
            }
            let src = DatabaseProperty::cl().not();
            let dst = DatabaseProperty::cl();
            let grid = families_over(&src, &dst, k, None, &domain, Recognition::Strong, |xs, d| collision_local_family(d, xs))?;
            let cell = format!("collision |X|={n} k={k}");
            t.check(grid.recognized(), || format!("{cell}: not strongly recognized at {} windows", grid.failures.len()));
            let bound = bound_thm_general(&grid.families)?;
            let value = quantum_capacity_exact(&CapacityQuery::new(src, dst, k, &domain))?.value;
            t.metric(&cell, [value, bound]);
            t.check(value <= bound + TOLERANCE, || format!("{cell}: {value} > {bound}"));
        }
    }
    Ok(t.finish("recognized-capacity", None))
}

/// 24 instances over |X| = 3, M = 2 built from PRMG, CL, CHN and SIZE.
pub fn calculus_instances() -> Result<Vec<CalculusInstance>> {
    let domain = OracleDomain::with_size(3, GroupSpec::bits(1)?)?;
    let chn = |s| DatabaseProperty::chn(s, ChainRelation::equality(&domain));
    let sources = [
        DatabaseProperty::prmg().not(),
        DatabaseProperty::cl().not(),
        chn(1).not(),
        DatabaseProperty::size_at_most(1),
        DatabaseProperty::prmg().not().and(DatabaseProperty::cl().not()),
    ];
    let targets = [DatabaseProperty::prmg(), DatabaseProperty::cl(), chn(2), DatabaseProperty::size_at_most(1).not()];
    let seconds = [DatabaseProperty::cl(), DatabaseProperty::prmg(), chn(2)];
    let conds = [DatabaseProperty::size_at_most(1), DatabaseProperty::prmg(), DatabaseProperty::cl()];
    let x_splits = vec![(vec![0, 1], vec![2]), (vec![0], vec![1, 2]), (vec![0, 1], vec![1, 2])];
    Ok((0..24)
        .map(|i| {
            let (k, k_splits) = if i < 18 { (2, vec![(1, 1)]) } else { (3, vec![(1, 2), (2, 1)]) };
            CalculusInstance {
                p: sources[i % 5].clone(),
                p_prime: targets[i % 4].clone(),
                p_dprime: seconds[i % 3].clone(),
                q: conds[(i / 3) % 3].clone(),
                k,
                k_splits,
                x_splits: x_splits.clone(),
                domain: domain.clone(),
            }
        })
        .collect())
}

pub fn calculus_suite() -> Result<SuiteOutcome> {
    let mut t = Tally::default();
    let instances = calculus_instances()?;
    t.metric("instances", instances.len());
    let mut worst = f64::INFINITY;
    for (i, inst) in instances.iter().enumerate() {
        for c in verify_calculus(inst)? {
            worst = worst.min(c.slack);
            t.check(c.holds, || format!("instance {i} {}: {} vs {}", c.name, c.lhs, c.rhs));
        }
    }
    t.metric("min_slack", worst);
    Ok(t.finish("calculus", None))
}

#[derive(Clone, Debug)]
pub struct ClassicalInstance {
    pub name: String,
    pub p: DatabaseProperty,
    pub p_prime: DatabaseProperty,
    pub k: usize,
    pub domain: OracleDomain,
}

/// Preimage, collision and chain transitions at |X| ≤ 3, M ∈ {2, 4}, k ≤ 2.
pub fn classical_instances() -> Result<Vec<ClassicalInstance>> {
    let mut out = Vec::new();
    for m_bits in 1..=2 {
        let spec = GroupSpec::bits(m_bits)?;
        for n in 1..=3 {
            let domain = OracleDomain::with_size(n, spec)?;
            let rel = ChainRelation::equality(&domain);
            let pairs = [
                ("preimage", DatabaseProperty::prmg().not(), DatabaseProperty::prmg()),
                ("collision", DatabaseProperty::cl().not(), DatabaseProperty::cl()),
                ("chain", DatabaseProperty::chn(1, rel.clone()).not(), DatabaseProperty::chn(2, rel)),
            ];
            for k in 1..=n.min(2) {
                for (name, p, pp) in &pairs {
                    out.push(ClassicalInstance {
                        name: format!("{name} M={} |X|={n} k={k}", spec.order()),
                        p: p.clone(),
                        p_prime: pp.clone(),
                        k,
                        domain: domain.clone(),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Exact classical capacities on the grid; the preimage cells equal
/// 1 − (1 − 1/M)^k and stay below k/M.
pub fn classical_suite() -> Result<SuiteOutcome> {
    let mut t = Tally::default();
    for inst in classical_instances()? {
        let v = classical_capacity_exact(&inst.p, &inst.p_prime, inst.k, &inst.domain)?.value;
        t.metric(&inst.name, v);
        t.check((0.0..=1.0).contains(&v), || format!("{}: {v} is not a probability", inst.name));
        if inst.name.starts_with("preimage") {
            let m = inst.domain.spec().order();
            let exact = classical_preimage_capacity(inst.k, m);
            t.check((v - exact).abs() <= 1e-12, || format!("{}: {v} ≠ {exact}", inst.name));
            t.check(v <= inst.k as f64 / m as f64 + 1e-12, || format!("{}: {v} > k/M", inst.name));
        }
    }
    Ok(t.finish("classical", None))
}

/// Monotonicity of every evaluator and the PoSW bound against 2000 times its
/// asymptotic shape on a 100-point grid.
pub fn bounds_suite() -> Result<SuiteOutcome> {
    let mut t = Tally::default();
    for v in monotonicity_violations() {
        t.check(false, || v);
    }
    t.check(true, String::new);
    let mut worst = 0.0f64;
    for q in [0u64, 1, 4, 16, 64] {
        for k in [1u64, 2] {
            for n in [8u32, 10, 12, 16, 20] {
                for tt in [1u32, 2] {
                    let w = 64;
                    let b = posw_bound(q, k, w, n, tt)?;
                    let shape = posw_asymptotic(q, k, w, n, tt);
                    worst = worst.max(b.value / shape);
                    t.check(b.value <= 2000.0 * shape, || format!("q={q} k={k} n={n} t={tt}: {} > 2000·{shape}", b.value));
                }
            }
        }
    }
    t.metric("max_ratio_to_shape", worst);
    for problem in Problem::ALL {
        let r = evaluate(problem, &BoundInput::default())?;
        t.check(r.value <= 1.0 && r.value >= 0.0, || format!("{problem}: value {} outside [0, 1]", r.value));
    }
    Ok(t.finish("bounds", None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_suites_pass() {
        for s in [prmg_capacity_suite(), classical_suite(), bounds_suite()] {
            let s = s.unwrap();
            assert!(s.passed, "{s:?}");
        }
    }

    #[test]
    fn calculus_grid_is_large_enough() {
        assert!(calculus_instances().unwrap().len() >= 20);
    }
}
