//! Closed-form success-probability bounds.
//!
//! Each evaluator returns the raw square of the amplitude-form bound together
//! with its clamp to [0, 1].

use std::f64::consts::E;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    Preimage,
    Collision,
    Gencol,
    Chain,
    Posw,
}

impl Problem {
    pub const ALL: [Problem; 5] = [Problem::Preimage, Problem::Collision, Problem::Gencol, Problem::Chain, Problem::Posw];
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Preimage => "preimage",
            Problem::Collision => "collision",
            Problem::Gencol => "gencol",
            Problem::Chain => "chain",
            Problem::Posw => "posw",
        })
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Problem::ALL
            .into_iter()
            .find(|p| p.to_string() == s)
            .ok_or_else(|| Error::Parse(format!("unknown problem '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bound {
    pub raw: f64,
    pub value: f64,
}

impl Bound {
    fn from_sqrt(amplitude: f64) -> Self {
        let raw = amplitude * amplitude;
        Self { raw, value: raw.clamp(0.0, 1.0) }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be positive, got {v}")))
    }
}

/// (q√(10k/M) + 1/√M)².
pub fn preimage_bound(q: u64, k: u64, m: f64) -> Result<Bound> {
    positive("k", k as f64)?;
    positive("M", m)?;
    let (q, k) = (q as f64, k as f64);
    Ok(Bound::from_sqrt(q * (10.0 * k / m).sqrt() + 1.0 / m.sqrt()))
}

/// (2(q+1)ek√(10(q+1)/M) + √(2/M))².
pub fn collision_bound(q: u64, k: u64, m: f64) -> Result<Bound> {
    positive("k", k as f64)?;
    positive("M", m)?;
    let (q1, k) = (q as f64 + 1.0, k as f64);
    Ok(Bound::from_sqrt(2.0 * q1 * E * k * (10.0 * q1 / m).sqrt() + (2.0 / m).sqrt()))
}

/// (2(q+1)ek√(10Γ(q+1)/M) + 2/√M)² for collisions of f(x, H(x)) with fan-in Γ.
pub fn gencol_bound(q: u64, k: u64, m: f64, gamma: f64) -> Result<Bound> {
    positive("k", k as f64)?;
    positive("M", m)?;
    positive("Γ", gamma)?;
    let (q1, k) = (q as f64 + 1.0, k as f64);
    Ok(Bound::from_sqrt(2.0 * q1 * E * k * (10.0 * gamma * q1 / m).sqrt() + 2.0 / m.sqrt()))
}

/// (qke√(10qkT/M) + e(q+2)√(10T(q+2)/M) + √((q+2)/M))² for a (q+1)-chain.
pub fn chain_bound(q: u64, k: u64, m: f64, t_fanin: f64) -> Result<Bound> {
    positive("k", k as f64)?;
    positive("M", m)?;
    positive("T", t_fanin)?;
    let (q, k) = (q as f64, k as f64);
    let q2 = q + 2.0;
    let amp = q * k * E * (10.0 * q * k * t_fanin / m).sqrt()
        + E * q2 * (10.0 * t_fanin * q2 / m).sqrt()
        + (q2 / m).sqrt();
    Ok(Bound::from_sqrt(amp))
}

/// Label of the PoSW evaluator: the assembled constant is read off the
/// security proof rather than stated as one closed form.
pub const POSW_BOUND_SOURCE: &str = "derived-from-proof";

/// √p ≤ q[4ek√(10(q+1)/2^w) + 3ek√(10kqn/2^w) + ek√(10((q+2)/2^{n+1})^t)]
///       + √((t(n+1)+1)/2^w).
pub fn posw_bound(q: u64, k: u64, w: u32, n: u32, t: u32) -> Result<Bound> {
    positive("k", k as f64)?;
    positive("n", n as f64)?;
    positive("t", t as f64)?;
    if (w as u64) < t as u64 * n as u64 {
        return Err(Error::Parameter(format!("label width w = {w} must be at least t·n = {}", t as u64 * n as u64)));
    }
    let (q, k, n, t) = (q as f64, k as f64, n as f64, t as f64);
    let two_w = 2f64.powi(w as i32);
    let leaf = ((q + 2.0) / 2f64.powf(n + 1.0)).powf(t);
    let per_round = 4.0 * E * k * (10.0 * (q + 1.0) / two_w).sqrt()
        + 3.0 * E * k * (10.0 * k * q * n / two_w).sqrt()
        + E * k * (10.0 * leaf).sqrt();
    Ok(Bound::from_sqrt(q * per_round + ((t * (n + 1.0) + 1.0) / two_w).sqrt()))
}

/// k²q²((q+2)/2^{n+1})^t + k³q³n/2^w + tn/2^w, the asymptotic shape of
/// [`posw_bound`].
pub fn posw_asymptotic(q: u64, k: u64, w: u32, n: u32, t: u32) -> f64 {
    let (q, k, n, t) = (q as f64, k as f64, n as f64, t as f64);
    let two_w = 2f64.powi(w as i32);
    k * k * q * q * ((q + 2.0) / 2f64.powf(n + 1.0)).powf(t) + k.powi(3) * q.powi(3) * n / two_w + t * n / two_w
}

/// Parameters shared by all evaluators; unused fields are ignored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundInput {
    pub q: u64,
    pub k: u64,
    pub m_bits: u32,
    pub t_fanin: f64,
    pub gamma: f64,
    pub w: u32,
    pub n: u32,
    pub t: u32,
}

impl Default for BoundInput {
    fn default() -> Self {
        Self { q: 1, k: 1, m_bits: 20, t_fanin: 1.0, gamma: 1.0, w: 256, n: 20, t: 10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRecord {
    pub problem: Problem,
    pub input: BoundInput,
    pub raw: f64,
    pub value: f64,
    pub source: &'static str,
}

pub fn evaluate(problem: Problem, input: &BoundInput) -> Result<BoundRecord> {
    let m = 2f64.powi(input.m_bits as i32);
    let b = match problem {
        Problem::Preimage => preimage_bound(input.q, input.k, m)?,
        Problem::Collision => collision_bound(input.q, input.k, m)?,
        Problem::Gencol => gencol_bound(input.q, input.k, m, input.gamma)?,
        Problem::Chain => chain_bound(input.q, input.k, m, input.t_fanin)?,
        Problem::Posw => posw_bound(input.q, input.k, input.w, input.n, input.t)?,
    };
    let source = if problem == Problem::Posw { POSW_BOUND_SOURCE } else { "closed-form" };
    Ok(BoundRecord { problem, input: *input, raw: b.raw, value: b.value, source })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub empirical: f64,
    pub bound: f64,
    pub holds: bool,
    pub context: String,
}

pub fn compare_report(empirical: f64, bound: f64, context: &str) -> Comparison {
    Comparison { empirical, bound, holds: empirical <= bound + 1e-9, context: context.to_string() }
}

/// Inputs where increasing q or k, or decreasing M, 2^w or 2^n, lowers the
/// raw value. Empty when every bound is monotone on the grid. The PoSW bound
/// is swept in n only for q ≥ 1: at q = 0 only the output-length term
/// √((t(n+1)+1)/2^w) remains, and it grows with n.
pub fn monotonicity_violations() -> Vec<String> {
    let mut bad = Vec::new();
    let mut check = |label: String, lo: f64, hi: f64| {
        if hi < lo * (1.0 - 1e-12) {
            bad.push(format!("{label}: {lo} then {hi}"));
        }
    };
    for problem in Problem::ALL {
        for q in [0u64, 1, 2, 5, 16, 100] {
            for k in [1u64, 2, 4] {
                for m_bits in [8u32, 16, 32] {
                    let base = BoundInput { q, k, m_bits, t_fanin: 2.0, gamma: 2.0, w: 64, n: 8, t: 4 };
                    let raw = |i: &BoundInput| evaluate(problem, i).expect("grid inputs are valid").raw;
                    let v = raw(&base);
                    check(format!("{problem} q+1 at {base:?}"), v, raw(&BoundInput { q: q + 1, ..base }));
                    check(format!("{problem} k+1 at {base:?}"), v, raw(&BoundInput { k: k + 1, ..base }));
                    match problem {
                        Problem::Posw => {
                            check(format!("{problem} w-1 at {base:?}"), v, raw(&BoundInput { w: base.w - 1, ..base }));
                            if q >= 1 {
                                check(format!("{problem} n-1 at {base:?}"), v, raw(&BoundInput { n: base.n - 1, ..base }));
                            }
                        }
                        _ => check(format!("{problem} M/2 at {base:?}"), v, raw(&BoundInput { m_bits: m_bits - 1, ..base })),
                    }
                }
            }
        }
    }
    bad
}
