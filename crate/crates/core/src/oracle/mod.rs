//! Exact simulation of the purified standard oracle and the compressed oracle.
//!
//! Both pictures store a sparse map from (database, adversary basis index) to
//! an amplitude. In the purified picture every database is a full function
//! table; in the compressed picture entries may be ⊥.

mod circuit;
mod database;
mod state;

use serde::{Deserialize, Serialize};

pub use circuit::{dft, reflect_about_mean, AdversaryCircuit, Register, Step, Wire};
pub use database::Database;
pub use state::{comp, comp_dagger, measure_database, AdversaryLayout, CompressedState, JointState, PurifiedState, PRUNE_THRESHOLD};

use circuit::Compiled;
use num_complex::Complex64;
use state::{Amplitudes, InputSource};

use crate::error::{domain, Error, Result};
use crate::group::{GroupSpec, TransitionCache};

/// Default cap on stored amplitudes.
pub const DEFAULT_BUDGET: u128 = 1 << 24;

/// Environment variable that overrides [`DEFAULT_BUDGET`] in the CLI.
pub const BUDGET_ENV: &str = "QROM_LAB_BUDGET";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleDomain {
    labels: Vec<String>,
    spec: GroupSpec,
    budget: u128,
}

impl OracleDomain {
    /// Inputs labelled x0, x1, ….
    pub fn with_size(inputs: usize, spec: GroupSpec) -> Result<Self> {
        Self::explicit((0..inputs).map(|i| format!("x{i}")).collect(), spec)
    }

    /// All bit strings of length exactly `bits`, in lexicographic order.
    pub fn bit_strings(bits: u32, spec: GroupSpec) -> Result<Self> {
        if bits > 16 {
            return Err(Error::Parameter(format!("input length {bits} is beyond desk scale")));
        }
        let labels = (0..1usize << bits)
            .map(|i| if bits == 0 { "ε".to_string() } else { format!("{:0width$b}", i, width = bits as usize) })
            .collect();
        Self::explicit(labels, spec)
    }

    pub fn explicit(labels: Vec<String>, spec: GroupSpec) -> Result<Self> {
        if labels.is_empty() {
            return domain("input domain must be nonempty");
        }
        Ok(Self { labels, spec, budget: DEFAULT_BUDGET })
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    pub fn budget(&self) -> u128 {
        self.budget
    }

    /// (M+1)^{|X|} × adversary_dim must fit the budget.
    pub fn check_budget(&self, adversary_dim: usize) -> Result<()> {
        let base = self.spec.order() as u128 + 1;
        let needed = base
            .checked_pow(self.len() as u32)
            .and_then(|v| v.checked_mul(adversary_dim as u128))
            .unwrap_or(u128::MAX);
        if needed > self.budget {
            return Err(Error::Budget { needed, budget: self.budget });
        }
        Ok(())
    }

    pub fn empty_database(&self) -> Database {
        Database::empty(self.len(), self.spec.order())
    }
}

pub fn initial_compressed_state(domain: &OracleDomain, adversary_dims: Vec<usize>) -> Result<CompressedState> {
    let layout = AdversaryLayout::new(adversary_dims)?;
    domain.check_budget(layout.total())?;
    let mut amps = Amplitudes::new();
    amps.insert((domain.empty_database(), 0), Complex64::new(1.0, 0.0));
    Ok(CompressedState { domain: domain.clone(), joint: JointState { layout, amps } })
}

/// Uniform superposition over all function tables, adversary in |0⟩.
pub fn initial_purified_state(domain: &OracleDomain, adversary_dims: Vec<usize>) -> Result<PurifiedState> {
    let layout = AdversaryLayout::new(adversary_dims)?;
    domain.check_budget(layout.total())?;
    let m = domain.spec.order();
    let count = m.pow(domain.len() as u32);
    let amp = Complex64::new(1.0 / (count as f64).sqrt(), 0.0);
    let mut amps = Amplitudes::new();
    for db in Database::all(domain.len(), m).filter(|d| d.support_size() == d.len()) {
        amps.insert((db, 0), amp);
    }
    Ok(PurifiedState { domain: domain.clone(), joint: JointState { layout, amps } })
}

fn check_response_regs(layout: &AdversaryLayout, regs: &[usize], m: usize) -> Result<()> {
    for &r in regs {
        if r >= layout.dims().len() || layout.dims()[r] != m {
            return Err(Error::Dimension(format!("register {r} is not a response register of dimension {m}")));
        }
    }
    Ok(())
}

/// cO^k with classical inputs x⃗, each answered into its response register.
pub fn apply_parallel_query(state: &CompressedState, xs: &[usize], response_regs: &[usize]) -> Result<CompressedState> {
    if xs.len() != response_regs.len() {
        return Err(Error::Dimension("one response register per input".into()));
    }
    let mut seen = xs.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != xs.len() {
        return domain("parallel query inputs must be pairwise distinct");
    }
    if xs.iter().any(|&x| x >= state.domain.len()) {
        return domain("query input outside the domain");
    }
    check_response_regs(&state.joint.layout, response_regs, state.domain.spec.order())?;
    let cache = TransitionCache::new(state.domain.spec);
    let wires: Vec<_> = xs.iter().zip(response_regs).map(|(&x, &r)| (InputSource::Fixed(x), r)).collect();
    let mut out = state.clone();
    out.query(&cache, &wires);
    Ok(out)
}

/// cO for wires whose inputs are read from adversary registers.
pub fn apply_compressed_query(state: &CompressedState, wires: &[Wire]) -> Result<CompressedState> {
    let cache = TransitionCache::new(state.domain.spec);
    let mut out = state.clone();
    out.query(&cache, &register_wires(&state.joint.layout, &state.domain, wires)?);
    Ok(out)
}

/// O: |x, y⟩ ⊗ |H⟩ ↦ |x, y + H(x)⟩ ⊗ |H⟩ for each wire.
pub fn apply_standard_query(state: &PurifiedState, wires: &[Wire]) -> Result<PurifiedState> {
    let mut out = state.clone();
    out.query(&register_wires(&state.joint.layout, &state.domain, wires)?);
    Ok(out)
}

fn register_wires(layout: &AdversaryLayout, domain: &OracleDomain, wires: &[Wire]) -> Result<Vec<(InputSource, usize)>> {
    let dims = layout.dims();
    for w in wires {
        if w.input >= dims.len() || dims[w.input] != domain.len() {
            return Err(Error::Dimension(format!("register {} is not an input register", w.input)));
        }
    }
    check_response_regs(layout, &wires.iter().map(|w| w.response).collect::<Vec<_>>(), domain.spec.order())?;
    Ok(wires.iter().map(|w| (InputSource::Register(w.input), w.response)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    Standard,
    Compressed,
}

#[derive(Clone, Debug)]
pub enum FinalState {
    Standard(PurifiedState),
    Compressed(CompressedState),
}

impl FinalState {
    pub fn joint(&self) -> &JointState {
        match self {
            FinalState::Standard(s) => &s.joint,
            FinalState::Compressed(s) => &s.joint,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub state: FinalState,
    /// Born distribution over adversary basis states.
    pub distribution: Vec<f64>,
}

fn apply_compiled(joint: &mut JointState, step: &Compiled) {
    match step {
        Compiled::Local { registers, matrix } => joint.apply_local(registers, matrix),
        Compiled::PhaseFlip(conds) => joint.apply_phase_flip(conds),
        Compiled::Shift { register, by } => joint.apply_shift(*register, *by),
        Compiled::Query(_) => unreachable!("queries are dispatched by the caller"),
    }
}

pub fn run_adversary(circuit: &AdversaryCircuit, domain: &OracleDomain, oracle: OracleKind) -> Result<RunOutcome> {
    let steps = circuit.compile(domain)?;
    let state = match oracle {
        OracleKind::Compressed => {
            let cache = TransitionCache::new(domain.spec);
            let mut s = initial_compressed_state(domain, circuit.dims())?;
            for step in &steps {
                match step {
                    Compiled::Query(wires) => {
                        let w: Vec<_> = wires.iter().map(|w| (InputSource::Register(w.input), w.response)).collect();
                        s.query(&cache, &w);
                    }
                    other => apply_compiled(&mut s.joint, other),
                }
            }
            FinalState::Compressed(s)
        }
        OracleKind::Standard => {
            let mut s = initial_purified_state(domain, circuit.dims())?;
            for step in &steps {
                match step {
                    Compiled::Query(wires) => {
                        let w: Vec<_> = wires.iter().map(|w| (InputSource::Register(w.input), w.response)).collect();
                        s.query(&w);
                    }
                    other => apply_compiled(&mut s.joint, other),
                }
            }
            FinalState::Standard(s)
        }
    };
    let distribution = state.joint().adversary_distribution();
    Ok(RunOutcome { state, distribution })
}

/// Total-variation distance between two distributions of equal length.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// √p ≤ √p′ + √(ℓ/M), with 1e-12 slack.
pub fn zhandry_gap_check(p: f64, p_prime: f64, ell: usize, m: usize) -> bool {
    p.sqrt() <= p_prime.sqrt() + (ell as f64 / m as f64).sqrt() + 1e-12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Relation {
    /// Every claimed output equals `target`.
    Preimage { target: usize },
    /// Two distinct inputs with equal outputs.
    Collision,
}

impl Relation {
    pub fn holds(&self, xs: &[usize], ys: &[usize]) -> bool {
        match self {
            Relation::Preimage { target } => ys.iter().all(|y| y == target),
            Relation::Collision => xs.len() == 2 && xs[0] != xs[1] && ys[0] == ys[1],
        }
    }
}

/// Which adversary registers form the output (x⃗, y⃗). Without y registers the
/// claimed outputs are the preimage target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub x_registers: Vec<usize>,
    #[serde(default)]
    pub y_registers: Option<Vec<usize>>,
    pub relation: Relation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub p: f64,
    pub p_prime: f64,
    pub ell: usize,
    pub gap_bound: f64,
    pub holds: bool,
}

fn outputs(joint: &JointState, out: &OutputSpec, adv: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let layout = joint.layout();
    let xs: Vec<usize> = out.x_registers.iter().map(|&r| layout.digit(adv, r)).collect();
    let ys = match (&out.y_registers, &out.relation) {
        (Some(regs), _) => regs.iter().map(|&r| layout.digit(adv, r)).collect(),
        (None, Relation::Preimage { target }) => vec![*target; xs.len()],
        (None, Relation::Collision) => return domain("collision relation needs y registers"),
    };
    Ok((xs, ys))
}

/// Probability that the measured output satisfies R and is consistent with
/// the oracle register (H for the purified picture, D for the compressed one).
pub fn success_probability(state: &FinalState, out: &OutputSpec) -> Result<f64> {
    let joint = state.joint();
    let regs = joint.layout().dims().len();
    if out.x_registers.iter().chain(out.y_registers.iter().flatten()).any(|&r| r >= regs) {
        return Err(Error::Dimension("output register does not exist".into()));
    }
    if out.y_registers.as_ref().is_some_and(|y| y.len() != out.x_registers.len()) {
        return Err(Error::Dimension("x and y register lists differ in length".into()));
    }
    let mut p = 0.0;
    for (db, adv, amp) in joint.entries() {
        let (xs, ys) = outputs(joint, out, adv)?;
        if xs.iter().any(|&x| x >= db.len()) {
            continue;
        }
        if xs.iter().zip(&ys).all(|(&x, &y)| db.get(x) == y) && out.relation.holds(&xs, &ys) {
            p += amp.norm_sqr();
        }
    }
    Ok(p)
}

/// Runs the circuit against both oracles and compares exact p and p′.
pub fn gap_report(circuit: &AdversaryCircuit, domain: &OracleDomain, out: &OutputSpec) -> Result<GapReport> {
    let std_run = run_adversary(circuit, domain, OracleKind::Standard)?;
    let cmp_run = run_adversary(circuit, domain, OracleKind::Compressed)?;
    let p = success_probability(&std_run.state, out)?.min(1.0);
    let p_prime = success_probability(&cmp_run.state, out)?.min(1.0);
    let ell = out.x_registers.len();
    let m = domain.spec.order();
    let gap_bound = p_prime.sqrt() + (ell as f64 / m as f64).sqrt();
    Ok(GapReport { p, p_prime, ell, gap_bound, holds: zhandry_gap_check(p, p_prime, ell, m) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bits1() -> GroupSpec {
        GroupSpec::bits(1).unwrap()
    }

    #[test]
    fn initial_state_is_point_mass() {
        let d = OracleDomain::with_size(2, bits1()).unwrap();
        let s = initial_compressed_state(&d, vec![2, 2]).unwrap();
        assert_eq!(s.joint().len(), 1);
        assert!((s.joint().norm() - 1.0).abs() < 1e-12);
        assert_eq!(s.max_support_size(), 0);
        let dist = measure_database(&s);
        assert_eq!(dist.get(&d.empty_database()), Some(&1.0));
    }

    #[test]
    fn budget_is_enforced() {
        let d = OracleDomain::with_size(10, bits1()).unwrap().with_budget(1000);
        assert!(matches!(initial_compressed_state(&d, vec![2]), Err(Error::Budget { .. })));
    }

    #[test]
    fn comp_maps_uniform_to_all_bottom() {
        let d = OracleDomain::with_size(3, GroupSpec::bits(2).unwrap()).unwrap();
        let s = initial_purified_state(&d, vec![1]).unwrap();
        let c = comp(&s).unwrap();
        assert_eq!(c.joint().len(), 1);
        assert!((c.joint().amplitude(&d.empty_database(), 0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn comp_keeps_nonzero_fourier_vectors() {
        // |X| = 1, M = 2: |1̂⟩ = (|0⟩ − |1⟩)/√2 stays the same vector over Ȳ.
        let d = OracleDomain::with_size(1, bits1()).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let p = PurifiedState::from_entries(
            d.clone(),
            vec![1],
            [
                ((Database::from_values(vec![0], 2).unwrap(), 0), Complex64::new(s, 0.0)),
                ((Database::from_values(vec![1], 2).unwrap(), 0), Complex64::new(-s, 0.0)),
            ],
        )
        .unwrap();
        let c = comp(&p).unwrap();
        assert!(c.joint().distance(p.joint()) < 1e-12);
    }

    fn random_purified(d: &OracleDomain, dims: Vec<usize>, rng: &mut ChaCha8Rng) -> PurifiedState {
        let total: usize = dims.iter().product();
        let mut entries = Vec::new();
        for db in Database::all(d.len(), d.spec().order()).filter(|x| x.support_size() == x.len()) {
            for a in 0..total {
                entries.push(((db.clone(), a), Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
            }
        }
        let norm: f64 = entries.iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt();
        for e in entries.iter_mut() {
            e.1 /= norm;
        }
        PurifiedState::from_entries(d.clone(), dims, entries).unwrap()
    }

    #[test]
    fn comp_round_trip_and_commuting_diagram() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for spec in [bits1(), GroupSpec::bits(2).unwrap(), GroupSpec::cyclic(3).unwrap()] {
            let d = OracleDomain::with_size(2, spec).unwrap();
            let dims = vec![2, spec.order()];
            let psi = random_purified(&d, dims, &mut rng);
            let back = comp_dagger(&comp(&psi).unwrap()).unwrap();
            assert!(back.joint().distance(psi.joint()) < 1e-9);
            let wires = [Wire { input: 0, response: 1 }];
            let left = comp(&apply_standard_query(&psi, &wires).unwrap()).unwrap();
            let right = apply_compressed_query(&comp(&psi).unwrap(), &wires).unwrap();
            assert!(left.joint().distance(right.joint()) < 1e-8, "{spec:?}");
        }
    }

    #[test]
    fn single_query_spreads_per_bottom_column() {
        // Response register prepared in |1̂⟩ so only ŷ = 1 contributes.
        let d = OracleDomain::with_size(2, bits1()).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let start = CompressedState::from_entries(
            d.clone(),
            vec![2],
            [((d.empty_database(), 0), Complex64::new(s, 0.0)), ((d.empty_database(), 1), Complex64::new(-s, 0.0))],
        )
        .unwrap();
        let after = apply_parallel_query(&start, &[1], &[0]).unwrap();
        assert!((after.joint().norm() - 1.0).abs() < 1e-12);
        let dist = measure_database(&after);
        assert_eq!(dist.len(), 2);
        for u in 0..2 {
            let db = d.empty_database().with(1, u);
            assert!((dist[&db] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_dual_component_leaves_database_alone() {
        let d = OracleDomain::with_size(2, bits1()).unwrap();
        let s = 1.0 / 2f64.sqrt();
        // |0̂⟩ on the response register.
        let start = CompressedState::from_entries(
            d.clone(),
            vec![2],
            [((d.empty_database(), 0), Complex64::new(s, 0.0)), ((d.empty_database(), 1), Complex64::new(s, 0.0))],
        )
        .unwrap();
        let after = apply_parallel_query(&start, &[0], &[0]).unwrap();
        assert!(after.joint().distance(start.joint()) < 1e-12);
    }

    #[test]
    fn duplicate_parallel_inputs_rejected() {
        let d = OracleDomain::with_size(2, bits1()).unwrap();
        let s = initial_compressed_state(&d, vec![2, 2]).unwrap();
        assert!(apply_parallel_query(&s, &[1, 1], &[0, 1]).is_err());
    }

    #[test]
    fn disjoint_queries_commute() {
        let d = OracleDomain::with_size(3, GroupSpec::bits(2).unwrap()).unwrap();
        let mut s = initial_compressed_state(&d, vec![4, 4]).unwrap();
        s.joint.apply_local(&[0], &dft(4));
        s.joint.apply_local(&[1], &dft(4));
        let ab = apply_parallel_query(&apply_parallel_query(&s, &[0], &[0]).unwrap(), &[2], &[1]).unwrap();
        let ba = apply_parallel_query(&apply_parallel_query(&s, &[2], &[1]).unwrap(), &[0], &[0]).unwrap();
        let both = apply_parallel_query(&s, &[0, 2], &[0, 1]).unwrap();
        assert!(ab.joint().distance(ba.joint()) < 1e-9);
        assert!(ab.joint().distance(both.joint()) < 1e-9);
    }

    #[test]
    fn standard_query_xors_response() {
        let d = OracleDomain::with_size(2, bits1()).unwrap();
        let h = Database::from_values(vec![0, 1], 2).unwrap();
        let layout = AdversaryLayout::new(vec![2, 2]).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                let a = layout.encode(&[x, y]);
                let s = PurifiedState::from_entries(d.clone(), vec![2, 2], [((h.clone(), a), Complex64::new(1.0, 0.0))]).unwrap();
                let out = apply_standard_query(&s, &[Wire { input: 0, response: 1 }]).unwrap();
                let expect = layout.encode(&[x, y ^ h.get(x)]);
                assert_eq!(out.joint().amplitude(&h, expect), Complex64::new(1.0, 0.0));
            }
        }
    }

    #[test]
    fn gap_check_worked_values() {
        assert!(zhandry_gap_check(0.0, 0.0, 1, 2));
        assert!(zhandry_gap_check(0.25, 0.0, 1, 4));
        assert!(!zhandry_gap_check(0.3, 0.0, 1, 4));
    }

    #[test]
    fn empty_circuit_keeps_initial_distribution() {
        let d = OracleDomain::with_size(2, bits1()).unwrap();
        let c = AdversaryCircuit { registers: vec![Register { name: "x".into(), dim: 2 }], steps: vec![] };
        for kind in [OracleKind::Standard, OracleKind::Compressed] {
            let run = run_adversary(&c, &d, kind).unwrap();
            assert!((run.distribution[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn circuit_validation_catches_mismatches() {
        let d = OracleDomain::with_size(4, bits1()).unwrap();
        let bad = AdversaryCircuit {
            registers: vec![Register { name: "x".into(), dim: 2 }, Register { name: "y".into(), dim: 2 }],
            steps: vec![Step::Query { wires: vec![Wire { input: 0, response: 1 }] }],
        };
        assert!(matches!(run_adversary(&bad, &d, OracleKind::Compressed), Err(Error::Dimension(_))));
    }
}
