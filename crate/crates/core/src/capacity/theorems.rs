//! Capacity bounds from families of local properties.

use std::f64::consts::E;

use super::{exteriors, ordered_tuples, quantum_capacity_exact, CapacityQuery, CapacityReport};
use crate::error::{Error, Result};
use crate::oracle::{Database, OracleDomain};
use crate::properties::{check_strong_recognizes, check_weak_recognizes, restrict, DatabaseProperty, LocalFamily, TupleSpace};

fn require_one_local(fam: &LocalFamily) -> Result<()> {
    if fam.locality() > 1 {
        return Err(Error::Parameter(format!("family has locality {}, expected at most 1", fam.locality())));
    }
    Ok(())
}

/// max over families of √(10 Σᵢ P[U ∈ Lᵢ]), trivial properties counting 0.
pub fn bound_thm_simple(fams: &[LocalFamily]) -> Result<f64> {
    let mut best = 0.0f64;
    for fam in fams {
        require_one_local(fam)?;
        let sum: f64 = fam
            .properties()
            .iter()
            .filter(|l| l.constant_value().is_none())
            .map(|l| l.probability())
            .sum();
        best = best.max((10.0 * sum).sqrt());
    }
    Ok(best)
}

/// max over families of e Σᵢ √(10 P[U ∈ Lᵢ]).
pub fn bound_thm_tricky(fams: &[LocalFamily]) -> Result<f64> {
    let mut best = 0.0f64;
    for fam in fams {
        require_one_local(fam)?;
        let sum: f64 = fam.properties().iter().map(|l| (10.0 * l.probability()).sqrt()).sum();
        best = best.max(E * sum);
    }
    Ok(best)
}

/// max over families of e ℓ √(10 Σ_t max P[U ∈ L_t|_{D′|x}]), where the inner
/// max runs over support positions and assignments of the other support
/// positions, trivial slices counting 0. ℓ is the largest locality present.
pub fn bound_thm_general(fams: &[LocalFamily]) -> Result<f64> {
    let ell = fams.iter().map(LocalFamily::locality).max().unwrap_or(0);
    let mut best = 0.0f64;
    for fam in fams {
        let mut sum = 0.0;
        for l in fam.properties() {
            let slices = l.slices();
            let range = slices.first().map_or(0, |s| s.len() - 1);
            let top = slices
                .iter()
                .filter(|s| s.iter().any(|&b| b) && !s.iter().all(|&b| b))
                .map(|s| s[..range].iter().filter(|&&b| b).count() as f64 / range as f64)
                .fold(0.0f64, f64::max);
            sum += top;
        }
        best = best.max(E * ell as f64 * (10.0 * sum).sqrt());
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Recognition {
    /// The transition source → target is checked as ¬P → P′ with P = ¬source.
    Strong,
    Weak,
}

/// Families built for every distinct x⃗ and every D that is ⊥ on x⃗.
#[derive(Clone, Debug)]
pub struct FamilyGrid {
    pub families: Vec<LocalFamily>,
    /// Windows where the family failed to recognize the transition.
    pub failures: Vec<(Vec<usize>, Database)>,
}

impl FamilyGrid {
    pub fn recognized(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Builds and checks a family for every window. When the source restricted
/// to a window is empty, the constant-true (strong) or constant-false (weak)
/// family with empty support is used instead of `build`.
pub fn families_over(
    source: &DatabaseProperty,
    target: &DatabaseProperty,
    k: usize,
    restrict_to: Option<&[usize]>,
    domain: &OracleDomain,
    mode: Recognition,
    build: impl Fn(&[usize], &Database) -> Result<LocalFamily>,
) -> Result<FamilyGrid> {
    let m = domain.spec().order();
    let inputs: Vec<usize> = match restrict_to {
        Some(r) => r.to_vec(),
        None => (0..domain.len()).collect(),
    };
    let complement = source.clone().not();
    let mut grid = FamilyGrid { families: Vec::new(), failures: Vec::new() };
    for xs in ordered_tuples(&inputs, k) {
        for d in exteriors(domain.len(), m, &xs) {
            let fam = if restrict(source, &d, &xs)?.is_empty() {
                LocalFamily::constant(xs.clone(), mode == Recognition::Strong, m)
            } else {
                build(&xs, &d)?
            };
            let ok = match mode {
                Recognition::Strong => check_strong_recognizes(&fam, &complement, target, &xs, &d)?,
                Recognition::Weak => check_weak_recognizes(&fam, source, target, &xs, &d)?,
            };
            if !ok {
                grid.failures.push((xs.clone(), d));
            }
            grid.families.push(fam);
        }
    }
    Ok(grid)
}

/// max over x⃗ ∈ X^ℓ of ⟦¬P^R_x → P^R_x⟧ with the query restricted to the
/// coordinates of x⃗. `relation_at(x⃗)` returns P^R_x.
pub fn qtc_bound2_extra(
    relation_at: impl Fn(&[usize]) -> DatabaseProperty,
    ell: usize,
    domain: &OracleDomain,
) -> Result<CapacityReport> {
    let n = domain.len();
    let space = TupleSpace { k: ell, range: n - 1 };
    let mut best: Option<CapacityReport> = None;
    for xs in space.tuples() {
        let mut coords = xs.clone();
        coords.sort_unstable();
        coords.dedup();
        let prop = relation_at(&xs);
        let q = CapacityQuery::new(prop.clone().not(), prop, coords.len(), domain).restricted(coords);
        let r = quantum_capacity_exact(&q)?;
        if best.as_ref().is_none_or(|b| r.value > b.value + 1e-12) {
            best = Some(r);
        }
    }
    best.ok_or_else(|| Error::Parameter("ℓ must be at least 1".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::properties::{collision_local_family, prmg_local_family, LocalProperty};

    #[test]
    fn simple_bound_examples() {
        assert_eq!(bound_thm_simple(&[]).unwrap(), 0.0);
        let trivial = LocalFamily::constant(vec![0], true, 2);
        assert_eq!(bound_thm_simple(&[trivial]).unwrap(), 0.0);
        for (k, m) in [(1, 2), (2, 4), (3, 8)] {
            let xs: Vec<usize> = (0..k).collect();
            let v = bound_thm_simple(&[prmg_local_family(&xs, m)]).unwrap();
            assert!((v - (10.0 * k as f64 / m as f64).sqrt()).abs() < 1e-12);
        }
        assert!((bound_thm_simple(&[prmg_local_family(&[0], 2)]).unwrap() - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn tricky_bound_examples() {
        assert_eq!(bound_thm_tricky(&[LocalFamily::constant(vec![], false, 2)]).unwrap(), 0.0);
        let fam = prmg_local_family(&[0, 1], 8);
        let v = bound_thm_tricky(&[fam]).unwrap();
        assert!((v - 2.0 * E * (10.0f64 / 8.0).sqrt()).abs() < 1e-12);
        assert!((v - 6.078).abs() < 1e-3);
    }

    #[test]
    fn general_bound_examples() {
        let fam = prmg_local_family(&[0, 1], 4);
        let simple = bound_thm_simple(std::slice::from_ref(&fam)).unwrap();
        let general = bound_thm_general(&[fam]).unwrap();
        assert!((general - E * simple).abs() < 1e-12);
        // The collision diagonal slices have probability 1/M.
        let d = Database::empty(3, 4);
        let fam = collision_local_family(&d, &[0, 1]).unwrap();
        let v = bound_thm_general(&[fam]).unwrap();
        assert!((v - E * 2.0 * (10.0 / 4.0f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn one_local_required() {
        let pair = LocalProperty::from_predicate(vec![0, 1], 2, |t| t[0] == t[1] && t[0] < 2).unwrap();
        let fam = LocalFamily::new(vec![0, 1], vec![pair]).unwrap();
        assert!(bound_thm_simple(std::slice::from_ref(&fam)).is_err());
        assert!(bound_thm_tricky(&[fam]).is_err());
    }
}
