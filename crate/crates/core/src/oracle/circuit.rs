use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::OracleDomain;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub dim: usize,
}

/// Connects an input register and a response register to one oracle slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wire {
    pub input: usize,
    pub response: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum Step {
    /// Discrete Fourier transform on each listed register (Hadamard for dim 2).
    Fourier { registers: Vec<usize> },
    /// 2|s⟩⟨s| − I with |s⟩ uniform over the joint space of the registers.
    ReflectMean { registers: Vec<usize> },
    /// Multiplies by −1 where every (register, value) condition holds.
    PhaseFlip { conditions: Vec<(usize, usize)> },
    /// |v⟩ ↦ |v + by mod dim⟩.
    Shift { register: usize, by: usize },
    /// Explicit matrix on the product of the listed registers, entries as [re, im].
    Unitary { registers: Vec<usize>, matrix: Vec<Vec<[f64; 2]>> },
    /// One round of parallel queries.
    Query { wires: Vec<Wire> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AdversaryCircuit {
    pub registers: Vec<Register>,
    pub steps: Vec<Step>,
}

/// A step with its matrix materialized.
#[derive(Clone, Debug)]
pub(crate) enum Compiled {
    Local { registers: Vec<usize>, matrix: CMatrix },
    PhaseFlip(Vec<(usize, usize)>),
    Shift { register: usize, by: usize },
    Query(Vec<Wire>),
}

pub fn dft(dim: usize) -> CMatrix {
    let scale = 1.0 / (dim as f64).sqrt();
    CMatrix::from_fn(dim, dim, |j, k| {
        let turn = ((j * k) % dim) as f64 / dim as f64;
        Complex64::from_polar(scale, 2.0 * std::f64::consts::PI * turn)
    })
}

pub fn reflect_about_mean(dim: usize) -> CMatrix {
    let two_over = 2.0 / dim as f64;
    CMatrix::from_fn(dim, dim, |i, j| Complex64::new(two_over - if i == j { 1.0 } else { 0.0 }, 0.0))
}

impl AdversaryCircuit {
    pub fn dims(&self) -> Vec<usize> {
        self.registers.iter().map(|r| r.dim).collect()
    }

    /// Number of query rounds.
    pub fn rounds(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Query { .. })).count()
    }

    /// Query arity k, or 0 without queries.
    pub fn arity(&self) -> usize {
        self.steps
            .iter()
            .find_map(|s| match s {
                Step::Query { wires } => Some(wires.len()),
                _ => None,
            })
            .unwrap_or(0)
    }

    pub(crate) fn compile(&self, domain: &OracleDomain) -> Result<Vec<Compiled>> {
        let n = self.registers.len();
        let dims = self.dims();
        if dims.contains(&0) {
            return Err(Error::Dimension("register of dimension 0".into()));
        }
        let check_reg = |r: usize| -> Result<()> {
            if r >= n {
                Err(Error::Dimension(format!("register {r} does not exist")))
            } else {
                Ok(())
            }
        };
        let distinct = |regs: &[usize]| -> Result<()> {
            let mut sorted = regs.to_vec();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != regs.len() {
                Err(Error::Dimension("register listed twice in one step".into()))
            } else {
                Ok(())
            }
        };
        let arity = self.arity();
        let mut out = Vec::new();
        for step in &self.steps {
            match step {
                Step::Fourier { registers } => {
                    for &r in registers {
                        check_reg(r)?;
                        out.push(Compiled::Local { registers: vec![r], matrix: dft(dims[r]) });
                    }
                }
                Step::ReflectMean { registers } => {
                    registers.iter().try_for_each(|&r| check_reg(r))?;
                    distinct(registers)?;
                    let dim = registers.iter().map(|&r| dims[r]).product();
                    out.push(Compiled::Local { registers: registers.clone(), matrix: reflect_about_mean(dim) });
                }
                Step::PhaseFlip { conditions } => {
                    for &(r, v) in conditions {
                        check_reg(r)?;
                        if v >= dims[r] {
                            return Err(Error::Dimension(format!("value {v} outside register {r}")));
                        }
                    }
                    out.push(Compiled::PhaseFlip(conditions.clone()));
                }
                Step::Shift { register, by } => {
                    check_reg(*register)?;
                    out.push(Compiled::Shift { register: *register, by: *by % dims[*register] });
                }
                Step::Unitary { registers, matrix } => {
                    registers.iter().try_for_each(|&r| check_reg(r))?;
                    distinct(registers)?;
                    let dim: usize = registers.iter().map(|&r| dims[r]).product();
                    if matrix.len() != dim || matrix.iter().any(|row| row.len() != dim) {
                        return Err(Error::Dimension(format!("unitary must be {dim}x{dim}")));
                    }
                    let m = CMatrix::from_fn(dim, dim, |i, j| Complex64::new(matrix[i][j][0], matrix[i][j][1]));
                    let defect = (m.adjoint() * &m - CMatrix::identity(dim, dim)).iter().map(|z| z.norm()).fold(0.0, f64::max);
                    if defect > 1e-9 {
                        return Err(Error::Dimension(format!("matrix is not unitary (defect {defect:.2e})")));
                    }
                    out.push(Compiled::Local { registers: registers.clone(), matrix: m });
                }
                Step::Query { wires } => {
                    if wires.is_empty() || wires.len() != arity {
                        return Err(Error::Dimension("query rounds must share the same arity k >= 1".into()));
                    }
                    let mut regs = Vec::new();
                    for w in wires {
                        check_reg(w.input)?;
                        check_reg(w.response)?;
                        if dims[w.input] != domain.len() {
                            return Err(Error::Dimension(format!(
                                "input register {} has dim {}, domain has {} inputs",
                                w.input,
                                dims[w.input],
                                domain.len()
                            )));
                        }
                        if dims[w.response] != domain.spec().order() {
                            return Err(Error::Dimension(format!(
                                "response register {} has dim {}, range has {} values",
                                w.response,
                                dims[w.response],
                                domain.spec().order()
                            )));
                        }
                        regs.push(w.input);
                        regs.push(w.response);
                    }
                    distinct(&regs)?;
                    out.push(Compiled::Query(wires.clone()));
                }
            }
        }
        Ok(out)
    }
}
