use std::collections::BTreeMap;

use num_complex::Complex64;

use super::database::Database;
use super::OracleDomain;
use crate::error::{self, Error, Result};
use crate::group::TransitionCache;
use crate::linalg::CMatrix;

/// Amplitudes smaller than this are dropped after each query round.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

pub(crate) type Amplitudes = BTreeMap<(Database, usize), Complex64>;

/// Mixed-radix layout of the adversary's registers; the first register is the
/// most significant digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdversaryLayout {
    dims: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl AdversaryLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::Dimension("register of dimension 0".into()));
        }
        let mut strides = vec![1; dims.len()];
        let mut total: usize = 1;
        for i in (0..dims.len()).rev() {
            strides[i] = total;
            total = total
                .checked_mul(dims[i])
                .ok_or_else(|| Error::Dimension("adversary dimension overflows".into()))?;
        }
        Ok(Self { dims, strides, total })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn digit(&self, index: usize, reg: usize) -> usize {
        index / self.strides[reg] % self.dims[reg]
    }

    pub fn with_digit(&self, index: usize, reg: usize, value: usize) -> usize {
        index - self.digit(index, reg) * self.strides[reg] + value * self.strides[reg]
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }
}

fn accumulate(map: &mut Amplitudes, key: (Database, usize), amp: Complex64) {
    *map.entry(key).or_insert(Complex64::new(0.0, 0.0)) += amp;
}

pub(crate) fn prune(map: &mut Amplitudes) {
    map.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
}

/// Joint oracle/adversary amplitudes shared by both oracle pictures.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    pub(crate) layout: AdversaryLayout,
    pub(crate) amps: Amplitudes,
}

impl JointState {
    pub fn layout(&self) -> &AdversaryLayout {
        &self.layout
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Database, usize, Complex64)> {
        self.amps.iter().map(|((d, a), amp)| (d, *a, *amp))
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn amplitude(&self, db: &Database, adv: usize) -> Complex64 {
        self.amps.get(&(db.clone(), adv)).copied().unwrap_or_default()
    }

    /// Born distribution of the adversary registers in the computational basis.
    pub fn adversary_distribution(&self) -> Vec<f64> {
        let mut dist = vec![0.0; self.layout.total()];
        for ((_, a), amp) in &self.amps {
            dist[*a] += amp.norm_sqr();
        }
        dist
    }

    /// ℓ2 distance, treating missing keys as zero.
    pub fn distance(&self, other: &JointState) -> f64 {
        let mut sum = 0.0;
        for (k, a) in &self.amps {
            let b = other.amps.get(k).copied().unwrap_or_default();
            sum += (a - b).norm_sqr();
        }
        for (k, b) in &other.amps {
            if !self.amps.contains_key(k) {
                sum += b.norm_sqr();
            }
        }
        sum.sqrt()
    }

    /// Applies `matrix` to the product space of `regs` (first listed register
    /// most significant).
    pub(crate) fn apply_local(&mut self, regs: &[usize], matrix: &CMatrix) {
        let dims: Vec<usize> = regs.iter().map(|&r| self.layout.dims[r]).collect();
        let sub = AdversaryLayout::new(dims).expect("register dims are positive");
        let mut out = Amplitudes::new();
        for ((db, a), amp) in std::mem::take(&mut self.amps) {
            let digits: Vec<usize> = regs.iter().map(|&r| self.layout.digit(a, r)).collect();
            let col = sub.encode(&digits);
            for row in 0..sub.total() {
                let coef = matrix[(row, col)];
                if coef.norm_sqr() == 0.0 {
                    continue;
                }
                let mut target = a;
                for (i, &r) in regs.iter().enumerate() {
                    target = self.layout.with_digit(target, r, sub.digit(row, i));
                }
                accumulate(&mut out, (db.clone(), target), amp * coef);
            }
        }
        self.amps = out;
    }

    pub(crate) fn apply_phase_flip(&mut self, conditions: &[(usize, usize)]) {
        for ((_, a), amp) in self.amps.iter_mut() {
            if conditions.iter().all(|&(r, v)| self.layout.digit(*a, r) == v) {
                *amp = -*amp;
            }
        }
    }

    pub(crate) fn apply_shift(&mut self, reg: usize, by: usize) {
        let dim = self.layout.dims[reg];
        let mut out = Amplitudes::new();
        for ((db, a), amp) in std::mem::take(&mut self.amps) {
            let v = (self.layout.digit(a, reg) + by) % dim;
            out.insert((db, self.layout.with_digit(a, reg, v)), amp);
        }
        self.amps = out;
    }
}

/// Where a query takes its input from.
#[derive(Clone, Copy, Debug)]
pub(crate) enum InputSource {
    Register(usize),
    Fixed(usize),
}

/// Compressed-oracle state: superposition over databases joint with the
/// adversary registers.
#[derive(Clone, Debug, PartialEq)]
pub struct CompressedState {
    pub(crate) domain: OracleDomain,
    pub(crate) joint: JointState,
}

/// Purified standard-oracle state: superposition over full function tables.
#[derive(Clone, Debug, PartialEq)]
pub struct PurifiedState {
    pub(crate) domain: OracleDomain,
    pub(crate) joint: JointState,
}

impl CompressedState {
    pub fn domain(&self) -> &OracleDomain {
        &self.domain
    }

    pub fn joint(&self) -> &JointState {
        &self.joint
    }

    /// Builds a state from explicit amplitudes (not renormalized).
    pub fn from_entries(
        domain: OracleDomain,
        adversary_dims: Vec<usize>,
        entries: impl IntoIterator<Item = ((Database, usize), Complex64)>,
    ) -> Result<Self> {
        let joint = joint_from_entries(&domain, adversary_dims, entries, true)?;
        Ok(Self { domain, joint })
    }

    /// Largest |support(D)| among databases carrying amplitude.
    pub fn max_support_size(&self) -> usize {
        self.joint.amps.keys().map(|(d, _)| d.support_size()).max().unwrap_or(0)
    }

    /// One compressed query per wire, applied in sequence. All wires of a round
    /// commute, so the order does not matter.
    pub(crate) fn query(&mut self, cache: &TransitionCache, wires: &[(InputSource, usize)]) {
        for &(src, resp) in wires {
            self.query_wire(cache, src, resp);
        }
        prune(&mut self.joint.amps);
    }

    fn query_wire(&mut self, cache: &TransitionCache, src: InputSource, resp: usize) {
        let spec = cache.spec();
        let m = spec.order();
        let inv_m = 1.0 / m as f64;
        let layout = self.joint.layout.clone();
        let mut out = Amplitudes::new();
        for ((db, a), amp) in std::mem::take(&mut self.joint.amps) {
            let x = match src {
                InputSource::Register(r) => layout.digit(a, r),
                InputSource::Fixed(x) => x,
            };
            let y = layout.digit(a, resp);
            let r = db.get(x);
            for yh in 0..m {
                // |y⟩ = M^{-1/2} Σ_ŷ ŷ(y)|ŷ⟩, and back with ŷ*(y′).
                let c1 = amp * spec.chi(yh, y) * inv_m;
                let gamma = cache.get(yh);
                for u in 0..=m {
                    let g = gamma.get(u, r);
                    if g.norm_sqr() == 0.0 {
                        continue;
                    }
                    let db2 = if u == r { db.clone() } else { db.with(x, u) };
                    for y2 in 0..m {
                        let coef = c1 * g * spec.chi(yh, y2).conj();
                        accumulate(&mut out, (db2.clone(), layout.with_digit(a, resp, y2)), coef);
                    }
                }
            }
        }
        self.joint.amps = out;
    }
}

impl PurifiedState {
    pub fn domain(&self) -> &OracleDomain {
        &self.domain
    }

    pub fn joint(&self) -> &JointState {
        &self.joint
    }

    pub fn from_entries(
        domain: OracleDomain,
        adversary_dims: Vec<usize>,
        entries: impl IntoIterator<Item = ((Database, usize), Complex64)>,
    ) -> Result<Self> {
        let joint = joint_from_entries(&domain, adversary_dims, entries, false)?;
        Ok(Self { domain, joint })
    }

    pub(crate) fn query(&mut self, wires: &[(InputSource, usize)]) {
        let spec = self.domain.spec();
        let layout = self.joint.layout.clone();
        for &(src, resp) in wires {
            let mut out = Amplitudes::new();
            for ((h, a), amp) in std::mem::take(&mut self.joint.amps) {
                let x = match src {
                    InputSource::Register(r) => layout.digit(a, r),
                    InputSource::Fixed(x) => x,
                };
                let y = spec.add(layout.digit(a, resp), h.get(x));
                out.insert((h, layout.with_digit(a, resp, y)), amp);
            }
            self.joint.amps = out;
        }
    }
}

fn joint_from_entries(
    domain: &OracleDomain,
    adversary_dims: Vec<usize>,
    entries: impl IntoIterator<Item = ((Database, usize), Complex64)>,
    allow_bottom: bool,
) -> Result<JointState> {
    let layout = AdversaryLayout::new(adversary_dims)?;
    let m = domain.spec().order();
    let mut amps = Amplitudes::new();
    for ((db, a), amp) in entries {
        if db.len() != domain.len() || db.range() != m {
            return Err(Error::Dimension("database shape does not match the domain".into()));
        }
        if !allow_bottom && db.support_size() != db.len() {
            return error::domain("function tables cannot contain ⊥");
        }
        if a >= layout.total() {
            return Err(Error::Dimension(format!("adversary index {a} out of range")));
        }
        accumulate(&mut amps, (db, a), amp);
    }
    Ok(JointState { layout, amps })
}

/// Entry (u, h) of the per-register compression unitary on C^{M+1}. It is real
/// symmetric and squares to the identity, so it also serves as its adjoint.
fn comp_entry(u: usize, h: usize, m: usize) -> f64 {
    let mf = m as f64;
    match (u == m, h == m) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0 / mf.sqrt(),
        (false, false) => (if u == h { 1.0 } else { 0.0 }) - 1.0 / mf,
    }
}

fn apply_comp_all(domain: &OracleDomain, joint: &mut JointState) -> Result<()> {
    let m = domain.spec().order();
    domain.check_budget(joint.layout.total())?;
    for x in 0..domain.len() {
        let mut out = Amplitudes::new();
        for ((db, a), amp) in std::mem::take(&mut joint.amps) {
            let r = db.get(x);
            for u in 0..=m {
                let c = comp_entry(u, r, m);
                if c != 0.0 {
                    let db2 = if u == r { db.clone() } else { db.with(x, u) };
                    accumulate(&mut out, (db2, a), amp * c);
                }
            }
        }
        prune(&mut out);
        joint.amps = out;
    }
    Ok(())
}

/// Comp: purified picture → compressed picture.
pub fn comp(state: &PurifiedState) -> Result<CompressedState> {
    let mut joint = state.joint.clone();
    apply_comp_all(&state.domain, &mut joint)?;
    Ok(CompressedState { domain: state.domain.clone(), joint })
}

/// Comp†: compressed picture → purified picture. Fails if the state has
/// weight outside the image of Comp (some ⊥ survives the basis change).
pub fn comp_dagger(state: &CompressedState) -> Result<PurifiedState> {
    let mut joint = state.joint.clone();
    apply_comp_all(&state.domain, &mut joint)?;
    let mut stray = 0.0;
    joint.amps.retain(|(db, _), amp| {
        let keep = db.support_size() == db.len();
        if !keep {
            stray += amp.norm_sqr();
        }
        keep
    });
    if stray > 1e-12 {
        return error::domain(format!("state has weight {stray:.3e} outside the image of Comp"));
    }
    Ok(PurifiedState { domain: state.domain.clone(), joint })
}

/// Born probabilities of the database register.
pub fn measure_database(state: &CompressedState) -> BTreeMap<Database, f64> {
    let mut dist = BTreeMap::new();
    for ((db, _), amp) in &state.joint.amps {
        *dist.entry(db.clone()).or_insert(0.0) += amp.norm_sqr();
    }
    dist
}
