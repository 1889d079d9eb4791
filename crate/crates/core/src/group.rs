//! Finite abelian range groups, their characters, and the single-register
//! transition matrix of the compressed oracle.
//!
//! Range values are plain indices in `0..M`; the undefined symbol ⊥ is the
//! index `M`, so every matrix over Ȳ has ⊥ as its last row and column.

use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Largest range size the simulator and capacity engine accept.
pub const MAX_RANGE: usize = 1 << 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupKind {
    /// Z_M with characters e^{2πi ŷy/M}.
    Cyclic,
    /// (Z_2)^m with characters (−1)^{popcount(ŷ & y)}.
    BitGroup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    kind: GroupKind,
    order: usize,
}

impl GroupSpec {
    /// The bit group of order 2^m.
    pub fn bits(m: u32) -> Result<Self> {
        if m == 0 || (1usize << m) > MAX_RANGE {
            return Err(Error::Parameter(format!("bit group needs 1 <= m <= 12, got {m}")));
        }
        Ok(Self { kind: GroupKind::BitGroup, order: 1 << m })
    }

    pub fn cyclic(order: usize) -> Result<Self> {
        if !(2..=MAX_RANGE).contains(&order) {
            return Err(Error::Parameter(format!("cyclic group order must be in 2..={MAX_RANGE}, got {order}")));
        }
        Ok(Self { kind: GroupKind::Cyclic, order })
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    /// M = |Y|.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Index of ⊥ in Ȳ.
    pub fn bottom(&self) -> usize {
        self.order
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        match self.kind {
            GroupKind::Cyclic => (a + b) % self.order,
            GroupKind::BitGroup => a ^ b,
        }
    }

    pub fn neg(&self, a: usize) -> usize {
        match self.kind {
            GroupKind::Cyclic => (self.order - a) % self.order,
            GroupKind::BitGroup => a,
        }
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg(b))
    }

    /// ŷ(y), checked.
    pub fn character(&self, yhat: usize, y: usize) -> Result<Complex64> {
        if yhat >= self.order || y >= self.order {
            return domain(format!("character({yhat}, {y}) outside group of order {}", self.order));
        }
        Ok(self.chi(yhat, y))
    }

    /// ŷ(y) without range checks. Quarter turns are returned exactly.
    pub(crate) fn chi(&self, yhat: usize, y: usize) -> Complex64 {
        match self.kind {
            GroupKind::BitGroup => {
                if (yhat & y).count_ones().is_multiple_of(2) {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(-1.0, 0.0)
                }
            }
            GroupKind::Cyclic => {
                let a = (yhat * y) % self.order;
                if (4 * a).is_multiple_of(self.order) {
                    match 4 * a / self.order {
                        0 => Complex64::new(1.0, 0.0),
                        1 => Complex64::new(0.0, 1.0),
                        2 => Complex64::new(-1.0, 0.0),
                        _ => Complex64::new(0.0, -1.0),
                    }
                } else {
                    Complex64::from_polar(1.0, 2.0 * PI * a as f64 / self.order as f64)
                }
            }
        }
    }
}

/// The matrix γ^ŷ of `cO_{xŷ}` on C^{M+1}, indexed `(u, r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    yhat: usize,
    spec: GroupSpec,
    entries: DMatrix<Complex64>,
}

impl TransitionMatrix {
    pub fn yhat(&self) -> usize {
        self.yhat
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// γ^ŷ_{u,r}.
    pub fn get(&self, u: usize, r: usize) -> Complex64 {
        self.entries[(u, r)]
    }

    /// max |(C†C − I)_{ij}|.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.entries.nrows();
        let prod = self.entries.adjoint() * &self.entries;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

impl fmt::Display for TransitionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dim = self.entries.nrows();
        let label = |i: usize| if i == self.spec.bottom() { "⊥".to_string() } else { i.to_string() };
        write!(f, "{:>6}", "")?;
        for r in 0..dim {
            write!(f, " {:>17}", label(r))?;
        }
        writeln!(f)?;
        for u in 0..dim {
            write!(f, "{:>6}", label(u))?;
            for r in 0..dim {
                let z = self.entries[(u, r)];
                write!(f, " {:>8.5}{:+8.5}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub fn build_transition_matrix(yhat: usize, spec: GroupSpec) -> Result<TransitionMatrix> {
    let m = spec.order();
    if yhat >= m {
        return domain(format!("dual value {yhat} outside group of order {m}"));
    }
    let dim = m + 1;
    let bot = spec.bottom();
    let entries = if yhat == 0 {
        DMatrix::identity(dim, dim)
    } else {
        let mf = m as f64;
        let sqrt_m = mf.sqrt();
        let one = Complex64::new(1.0, 0.0);
        DMatrix::from_fn(dim, dim, |u, r| {
            if u == bot && r == bot {
                Complex64::new(0.0, 0.0)
            } else if u == bot {
                // The basis change yields ŷ(r) here; for real characters this
                // coincides with the conjugated form ŷ*(r).
                spec.chi(yhat, r) / sqrt_m
            } else if r == bot {
                spec.chi(yhat, u) / sqrt_m
            } else if u == r {
                spec.chi(yhat, u) * (1.0 - 2.0 / mf) + one / mf
            } else {
                (one - spec.chi(yhat, r) - spec.chi(yhat, u)) / mf
            }
        })
    };
    Ok(TransitionMatrix { yhat, spec, entries })
}

/// P̃[U ∈ S | r, ŷ] = Σ_{u∈S} |γ^ŷ_{u,r}|².
pub fn tilde_prob(matrix: &TransitionMatrix, r: usize, set: &[usize]) -> Result<f64> {
    let dim = matrix.entries.nrows();
    if r >= dim || set.iter().any(|&u| u >= dim) {
        return domain("tilde_prob index outside Ȳ");
    }
    Ok(set.iter().map(|&u| matrix.get(u, r).norm_sqr()).sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConnectionCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compares Σ_r P̃[r ≠ U ∈ L | r, ŷ] against 10·|L|/M.
pub fn connection_bound_check(set: &[usize], matrix: &TransitionMatrix) -> Result<ConnectionCheck> {
    let m = matrix.spec.order();
    if set.iter().any(|&u| u >= m) {
        return domain("connection bound set must be a subset of Y (no ⊥)");
    }
    let mut lhs = 0.0;
    for r in 0..=m {
        for &u in set {
            if u != r {
                lhs += matrix.get(u, r).norm_sqr();
            }
        }
    }
    let rhs = 10.0 * set.len() as f64 / m as f64;
    Ok(ConnectionCheck { lhs, rhs, holds: lhs <= rhs + 1e-12 })
}

/// Lazily built transition matrices for every ŷ of one group, shareable
/// across threads.
pub struct TransitionCache {
    spec: GroupSpec,
    slots: Vec<OnceLock<TransitionMatrix>>,
}

impl TransitionCache {
    pub fn new(spec: GroupSpec) -> Self {
        Self { spec, slots: (0..spec.order()).map(|_| OnceLock::new()).collect() }
    }

    pub fn spec(&self) -> GroupSpec {
        self.spec
    }

    pub fn get(&self, yhat: usize) -> &TransitionMatrix {
        self.slots[yhat].get_or_init(|| {
            build_transition_matrix(yhat, self.spec).expect("dual value checked by slot index")
        })
    }
}
