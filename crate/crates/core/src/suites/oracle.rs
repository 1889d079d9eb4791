use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SuiteOutcome, Tally};
use crate::bounds::preimage_bound;
use crate::error::Result;
use crate::group::{build_transition_matrix, connection_bound_check, GroupSpec};
use crate::oracle::{
    gap_report, run_adversary, success_probability, total_variation, AdversaryCircuit, OracleDomain, OracleKind, OutputSpec,
    Register, Relation, Step, Wire,
};

/// Unitarity of every transition matrix for M ∈ {2, 4, 8, 16}, and the
/// identity at ŷ = 0.
pub fn fidelity_suite() -> Result<SuiteOutcome> {
    let mut t = Tally::default();
    for m_bits in 1..=4 {
        let spec = GroupSpec::bits(m_bits)?;
        let m = spec.order();
        for yhat in 0..m {
            let mat = build_transition_matrix(yhat, spec)?;
            let defect = mat.unitarity_defect();
            t.max_metric("max_unitarity_defect", defect);
            t.check(defect <= 1e-9, || format!("M={m} ŷ={yhat}: unitarity defect {defect:e}"));
            if yhat == 0 {
                let id = DMatrix::<Complex64>::identity(m + 1, m + 1);
                t.check(*mat.entries() == id, || format!("M={m}: ŷ=0 matrix is not the identity"));
            }
        }
    }
    Ok(t.finish("fidelity", None))
}

/// Σ_r P̃[r ≠ U ∈ L | r, ŷ] ≤ 10|L|/M for every L ⊆ Y and ŷ, M ∈ {2, 4, 8}.
pub fn connection_suite() -> Result<SuiteOutcome> {
    let mut t = Tally::default();
    for m_bits in 1..=3 {
        let spec = GroupSpec::bits(m_bits)?;
        let m = spec.order();
        let mats: Vec<_> = (0..m).map(|y| build_transition_matrix(y, spec)).collect::<Result<_>>()?;
        for mask in 0u32..1 << m {
            let set: Vec<usize> = (0..m).filter(|&u| mask >> u & 1 == 1).collect();
            for (yhat, mat) in mats.iter().enumerate() {
                let c = connection_bound_check(&set, mat)?;
                t.max_metric("max_ratio", if c.rhs > 0.0 { c.lhs / c.rhs } else { 0.0 });
                t.check(c.holds, || format!("M={m} ŷ={yhat} L={set:?}: {} > {}", c.lhs, c.rhs));
            }
        }
    }
    Ok(t.finish("connection", None))
}

fn random_unitary(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<[f64; 2]>> {
    let a = DMatrix::<Complex64>::from_fn(dim, dim, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let q = a.qr().q();
    (0..dim).map(|i| (0..dim).map(|j| [q[(i, j)].re, q[(i, j)].im]).collect()).collect()
}

fn random_local_step(regs: &[Register], rng: &mut ChaCha8Rng) -> Step {
    let r = rng.gen_range(0..regs.len());
    let dim = regs[r].dim;
    match rng.gen_range(0..4) {
        0 => Step::Unitary { registers: vec![r], matrix: random_unitary(dim, rng) },
        1 => Step::Fourier { registers: vec![r] },
        2 => Step::PhaseFlip { conditions: vec![(r, rng.gen_range(0..dim))] },
        _ => Step::Shift { register: r, by: rng.gen_range(0..dim) },
    }
}

/// A random circuit with `arity` (input, response) register pairs, a work
/// qubit and `rounds` query rounds separated by random local steps.
pub fn random_circuit(inputs: usize, m: usize, arity: usize, rounds: usize, rng: &mut ChaCha8Rng) -> AdversaryCircuit {
    let mut registers = Vec::new();
    for i in 0..arity {
        registers.push(Register { name: format!("x{i}"), dim: inputs });
        registers.push(Register { name: format!("y{i}"), dim: m });
    }
    registers.push(Register { name: "work".into(), dim: 2 });
    let mut steps = vec![Step::Fourier { registers: (0..arity).map(|i| 2 * i).collect() }];
    let wires: Vec<Wire> = (0..arity).map(|i| Wire { input: 2 * i, response: 2 * i + 1 }).collect();
    for _ in 0..rounds {
        for _ in 0..rng.gen_range(1..=3) {
            steps.push(random_local_step(&registers, rng));
        }
        steps.push(Step::Query { wires: wires.clone() });
    }
    for _ in 0..rng.gen_range(1..=2) {
        steps.push(random_local_step(&registers, rng));
    }
    AdversaryCircuit { registers, steps }
}

/// Standard and compressed runs of random circuits (≤ 3 rounds, |X| ≤ 4,
/// M = 2) give the same adversary distribution.
pub fn purification_suite(trials: u64, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    let spec = GroupSpec::bits(1)?;
    for i in 0..trials {
        let inputs = rng.gen_range(1..=4);
        let arity = rng.gen_range(1..=2);
        let rounds = rng.gen_range(1..=3);
        let circuit = random_circuit(inputs, 2, arity, rounds, &mut rng);
        let domain = OracleDomain::with_size(inputs, spec)?;
        let a = run_adversary(&circuit, &domain, OracleKind::Standard)?;
        let b = run_adversary(&circuit, &domain, OracleKind::Compressed)?;
        let tv = total_variation(&a.distribution, &b.distribution);
        t.max_metric("max_total_variation", tv);
        t.check(tv <= 1e-8, || format!("trial {i}: |X|={inputs} k={arity} q={rounds}: distance {tv:e}"));
    }
    Ok(t.finish("purification", Some(seed)))
}

/// √p ≤ √p′ + √(ℓ/M) for random preimage-style adversaries at |X| = 4.
pub fn gap_suite(trials: u64, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    for i in 0..trials {
        let m_bits = rng.gen_range(1..=2);
        let spec = GroupSpec::bits(m_bits)?;
        let rounds = rng.gen_range(1..=2);
        let circuit = random_circuit(4, spec.order(), 1, rounds, &mut rng);
        let domain = OracleDomain::with_size(4, spec)?;
        let out = OutputSpec { x_registers: vec![0], y_registers: None, relation: Relation::Preimage { target: 0 } };
        let g = gap_report(&circuit, &domain, &out)?;
        t.max_metric("max_p", g.p);
        t.check(g.holds, || format!("trial {i}: M={} p={} p′={} bound={}", spec.order(), g.p, g.p_prime, g.gap_bound));
    }
    Ok(t.finish("gap", Some(seed)))
}

/// Amplitude amplification for the preimage of 0 with `rounds` queries.
pub fn grover_circuit(inputs: usize, rounds: usize) -> AdversaryCircuit {
    let mut steps = vec![
        Step::Shift { register: 1, by: 1 },
        Step::Fourier { registers: vec![1] },
        Step::Fourier { registers: vec![0] },
    ];
    for _ in 0..rounds {
        steps.push(Step::Query { wires: vec![Wire { input: 0, response: 1 }] });
        steps.push(Step::ReflectMean { registers: vec![0] });
    }
    AdversaryCircuit {
        registers: vec![Register { name: "x".into(), dim: inputs }, Register { name: "y".into(), dim: 2 }],
        steps,
    }
}

/// Exact success of 1- and 2-round amplitude amplification at |X| ∈ {4, 8},
/// M = 2, against the preimage bound.
pub fn grover_suite() -> Result<SuiteOutcome> {
    let mut t = Tally::default();
    let spec = GroupSpec::bits(1)?;
    let out = OutputSpec { x_registers: vec![0], y_registers: None, relation: Relation::Preimage { target: 0 } };
    for inputs in [4, 8] {
        let domain = OracleDomain::with_size(inputs, spec)?;
        for rounds in 1..=2 {
            let run = run_adversary(&grover_circuit(inputs, rounds), &domain, OracleKind::Standard)?;
            let p = success_probability(&run.state, &out)?;
            let bound = preimage_bound(rounds as u64, 1, 2.0)?.value;
            t.metric(&format!("p[|X|={inputs},q={rounds}]"), p);
            t.check(p <= bound + 1e-12, || format!("|X|={inputs} q={rounds}: p={p} > {bound}"));
        }
    }
    Ok(t.finish("grover", None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_suites_pass() {
        assert!(fidelity_suite().unwrap().passed);
        assert!(connection_suite().unwrap().passed);
        assert!(grover_suite().unwrap().passed);
    }

    #[test]
    fn random_suites_are_seeded() {
        let a = purification_suite(5, 1).unwrap();
        assert!(a.passed, "{a:?}");
        assert_eq!(a, purification_suite(5, 1).unwrap());
        assert!(gap_suite(5, 2).unwrap().passed);
    }

    #[test]
    fn grover_one_round_on_four_inputs() {
        let d = OracleDomain::with_size(4, GroupSpec::bits(1).unwrap()).unwrap();
        let out = OutputSpec { x_registers: vec![0], y_registers: None, relation: Relation::Preimage { target: 0 } };
        let s = run_adversary(&grover_circuit(4, 1), &d, OracleKind::Standard).unwrap();
        let c = run_adversary(&grover_circuit(4, 1), &d, OracleKind::Compressed).unwrap();
        let p = success_probability(&s.state, &out).unwrap();
        assert!(p > 0.0 && p <= 1.0);
        assert!(total_variation(&s.distribution, &c.distribution) < 1e-9);
    }
}
