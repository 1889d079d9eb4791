//! Reference computations written independently of the library code paths
//! they check.

#![allow(dead_code)]

use std::f64::consts::{E, FRAC_1_SQRT_2};

use qrom_lab::oracle::Database;
use qrom_lab::posw::{Label, LabelDb, LabelQuery, Vertex};
use qrom_lab::properties::DatabaseProperty;

/// The M = 2 transition matrix at ŷ = 1, worked by hand. Rows and columns
/// are ordered 0, 1, ⊥.
pub const HAND_M2_YHAT1: [[f64; 3]; 3] = [
    [0.5, 0.5, FRAC_1_SQRT_2],
    [0.5, 0.5, -FRAC_1_SQRT_2],
    [FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0],
];

/// Every vector in {0, …, base − 1}^len, first coordinate fastest.
pub fn odometer(len: usize, base: usize) -> Vec<Vec<usize>> {
    let mut digits = vec![0usize; len];
    let mut out = Vec::new();
    loop {
        out.push(digits.clone());
        let mut i = 0;
        loop {
            if i == len {
                return out;
            }
            digits[i] += 1;
            if digits[i] < base {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Classical capacity by resampling the whole function: for every D ∈ P and
/// distinct x⃗, draw every H ∈ Y^X, overwrite the ⊥ entries of D on x⃗ with
/// H and count landings in P′.
pub fn brute_force_classical(p: &DatabaseProperty, p_prime: &DatabaseProperty, k: usize, n: usize, m: usize) -> f64 {
    let functions = odometer(n, m);
    let tuples: Vec<Vec<usize>> = odometer(k, n)
        .into_iter()
        .filter(|xs| (0..k).all(|a| (a + 1..k).all(|b| xs[a] != xs[b])))
        .collect();
    let mut best = 0.0f64;
    for values in odometer(n, m + 1) {
        let d = Database::from_values(values.clone(), m).expect("valid");
        if !p.contains(&d) {
            continue;
        }
        for xs in &tuples {
            let hits = functions
                .iter()
                .filter(|h| {
                    let mut v = values.clone();
                    for &x in xs {
                        if v[x] == m {
                            v[x] = h[x];
                        }
                    }
                    p_prime.contains(&Database::from_values(v, m).expect("valid"))
                })
                .count();
            best = best.max(hits as f64 / functions.len() as f64);
        }
    }
    best
}

/// q = 0 values of the five bound evaluators, substituted by hand.
pub fn q0_preimage(m: f64) -> f64 {
    1.0 / m
}

pub fn q0_collision(k: f64, m: f64) -> f64 {
    let a = 2.0 * E * k * (10.0 / m).sqrt() + (2.0 / m).sqrt();
    a * a
}

pub fn q0_gencol(k: f64, m: f64, gamma: f64) -> f64 {
    let a = 2.0 * E * k * (10.0 * gamma / m).sqrt() + 2.0 / m.sqrt();
    a * a
}

pub fn q0_chain(m: f64, t: f64) -> f64 {
    let a = 2.0 * E * (20.0 * t / m).sqrt() + (2.0 / m).sqrt();
    a * a
}

pub fn q0_posw(w: u32, n: u32, t: u32) -> f64 {
    (t as f64 * (n as f64 + 1.0) + 1.0) / 2f64.powi(w as i32)
}

/// Leaves of the n = 1 tree that some labelling consistent with D opens
/// under φ: leaf 0 needs D(0) = a and D(ε, a, b) = φ; leaf 1 needs
/// D(1, a) = b and D(ε, a, b) = φ.
pub fn openable_leaves_n1(db: &LabelDb, phi: &Label, w: u32) -> Vec<Vertex> {
    let labels: Vec<Label> = (0..1u64 << w).map(|i| Label::from_u64(i, w)).collect();
    let (zero, one) = (Vertex::ROOT.child(0), Vertex::ROOT.child(1));
    let mut out = Vec::new();
    let mut open0 = false;
    let mut open1 = false;
    for a in &labels {
        for b in &labels {
            if db.get(&LabelQuery::new(Vertex::ROOT, vec![a.clone(), b.clone()])) != Some(phi) {
                continue;
            }
            open0 |= db.get(&LabelQuery::new(zero, vec![])) == Some(a);
            open1 |= db.get(&LabelQuery::new(one, vec![a.clone()])) == Some(b);
        }
    }
    if open0 {
        out.push(zero);
    }
    if open1 {
        out.push(one);
    }
    out
}
