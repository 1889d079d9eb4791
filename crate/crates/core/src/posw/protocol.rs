use std::collections::BTreeMap;

use serde::Serialize;

use super::backend::{challenge_input, check_width, label_bytes, label_input, Label, RandomOracle};
use super::dag::{Dag, Vertex};
use crate::error::{Error, Result};

pub type LabelMap = BTreeMap<Vertex, Label>;

/// Tree depth n, challenge count t and label width w.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PoswParams {
    pub n: u32,
    pub t: u32,
    pub w: u32,
}

impl PoswParams {
    pub fn new(n: u32, t: u32, w: u32) -> Result<Self> {
        Dag::new(n)?;
        check_width(w)?;
        if t == 0 || t > u16::MAX as u32 {
            return Err(Error::Parameter(format!("challenge count must lie in 1..=65535, got {t}")));
        }
        Ok(Self { n, t, w })
    }

    pub fn dag(&self) -> Dag {
        Dag::new(self.n).expect("validated depth")
    }

    /// Oracle blocks needed for t·n challenge bits.
    pub fn challenge_blocks(&self) -> u32 {
        (self.t * self.n).div_ceil(self.w)
    }

    /// w(1 + 2tn) bits.
    pub fn proof_bits(&self) -> u64 {
        self.w as u64 * (1 + 2 * self.t as u64 * self.n as u64)
    }
}

/// One logical query of the honest prover.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TraceEntry {
    Label { vertex: Vertex },
    /// Counts as a single query although it may take several oracle calls.
    Challenge { invocations: u32 },
}

/// Labels every vertex in evaluation order, one sequential query each.
pub fn compute_labeling(chi: &Label, n: u32, oracle: &mut impl RandomOracle) -> Result<(LabelMap, Vec<TraceEntry>)> {
    let dag = Dag::new(n)?;
    let mut labels = LabelMap::new();
    let mut trace = Vec::with_capacity(dag.vertex_count());
    for v in dag.evaluation_order() {
        let ins: Vec<Label> = dag
            .in_neighbors(v)
            .iter()
            .map(|u| labels.get(u).cloned())
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Domain(format!("in-neighbors of {v} are not labeled yet")))?;
        let l = oracle.query(&label_input(chi, v, &ins));
        labels.insert(v, l);
        trace.push(TraceEntry::Label { vertex: v });
    }
    Ok((labels, trace))
}

/// Checks that a trace labels each vertex once, after all its in-neighbors,
/// and ends with exactly one challenge query.
pub fn trace_is_sequential(dag: &Dag, trace: &[TraceEntry]) -> bool {
    let mut seen = std::collections::BTreeSet::new();
    let (last, body) = match trace.split_last() {
        Some(x) => x,
        None => return false,
    };
    if !matches!(last, TraceEntry::Challenge { .. }) || body.len() != dag.vertex_count() {
        return false;
    }
    for e in body {
        let TraceEntry::Label { vertex } = e else { return false };
        if !dag.contains(*vertex) || !dag.in_neighbors(*vertex).iter().all(|u| seen.contains(u)) {
            return false;
        }
        if !seen.insert(*vertex) {
            return false;
        }
    }
    true
}

/// The t challenge leaves: the first t·n bits of H(1‖χ‖φ‖1) ‖ H(1‖χ‖φ‖2) ‖ …,
/// cut into big-endian n-bit leaf ids. Duplicates are kept.
pub fn derive_challenge(chi: &Label, phi: &Label, params: &PoswParams, oracle: &mut impl RandomOracle) -> Vec<Vertex> {
    let w = params.w;
    let mut bits = Vec::with_capacity((params.t * params.n) as usize);
    for counter in 1..=params.challenge_blocks() {
        let block = oracle.query(&challenge_input(chi, phi, counter));
        bits.extend((0..w).map(|i| block.bit(i, w)));
    }
    bits.chunks(params.n as usize)
        .take(params.t as usize)
        .map(|c| {
            let id = c.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
            Vertex::new(params.n, id).expect("n-bit leaf id")
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PoswProof {
    pub params: PoswParams,
    pub phi: Label,
    /// Labels of ap(vᵢ) in canonical order, one group per challenge leaf.
    pub tau: Vec<Vec<Label>>,
}

pub fn prove_with_trace(
    chi: &Label,
    params: &PoswParams,
    oracle: &mut impl RandomOracle,
) -> Result<(PoswProof, Vec<TraceEntry>)> {
    if oracle.width() != params.w || label_bytes(params.w) != chi.as_bytes().len() {
        return Err(Error::Parameter(format!("backend and χ must both have width {}", params.w)));
    }
    let dag = params.dag();
    let (labels, mut trace) = compute_labeling(chi, params.n, oracle)?;
    let phi = labels[&Vertex::ROOT].clone();
    let leaves = derive_challenge(chi, &phi, params, oracle);
    trace.push(TraceEntry::Challenge { invocations: params.challenge_blocks() });
    let mut tau = Vec::with_capacity(leaves.len());
    for leaf in leaves {
        tau.push(dag.authentication_path(leaf)?.iter().map(|u| labels[u].clone()).collect());
    }
    Ok((PoswProof { params: *params, phi, tau }, trace))
}

pub fn prove(chi: &Label, params: &PoswParams, oracle: &mut impl RandomOracle) -> Result<PoswProof> {
    Ok(prove_with_trace(chi, params, oracle)?.0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "lowercase")]
pub enum Rejection {
    Malformed { detail: String },
    Inconsistent { leaf: Vertex, vertex: Vertex },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject(Rejection),
}

impl Verdict {
    pub fn accepted(&self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

fn malformed(detail: String) -> Verdict {
    Verdict::Reject(Rejection::Malformed { detail })
}

/// Recomputes the challenge from φ and checks every ancestor equation of
/// each challenge leaf against the opened labels.
pub fn verify(chi: &Label, params: &PoswParams, proof: &PoswProof, oracle: &mut impl RandomOracle) -> Verdict {
    let w = params.w;
    if proof.params != *params {
        return malformed(format!("proof parameters {:?} differ from expected {:?}", proof.params, params));
    }
    if oracle.width() != w || chi.as_bytes().len() != label_bytes(w) {
        return malformed(format!("backend and χ must both have width {w}"));
    }
    if proof.tau.len() != params.t as usize {
        return malformed(format!("expected {} openings, found {}", params.t, proof.tau.len()));
    }
    let all = std::iter::once(&proof.phi).chain(proof.tau.iter().flatten());
    if all.clone().any(|l| l.as_bytes().len() != label_bytes(w)) {
        return malformed(format!("label of the wrong width, expected {w} bits"));
    }
    let dag = params.dag();
    let leaves = derive_challenge(chi, &proof.phi, params, oracle);
    for (leaf, opened) in leaves.into_iter().zip(&proof.tau) {
        let ap = dag.authentication_path(leaf).expect("challenge leaves are leaves");
        if opened.len() != ap.len() {
            return malformed(format!("opening for {leaf} has {} labels, expected {}", opened.len(), ap.len()));
        }
        let mut known: LabelMap = ap.into_iter().zip(opened.iter().cloned()).collect();
        known.insert(Vertex::ROOT, proof.phi.clone());
        for u in leaf.ancestors() {
            let ins: Vec<Label> = dag.in_neighbors(u).iter().map(|x| known[x].clone()).collect();
            if oracle.query(&label_input(chi, u, &ins)) != known[&u] {
                return Verdict::Reject(Rejection::Inconsistent { leaf, vertex: u });
            }
        }
    }
    Verdict::Accept
}

const MAGIC: &[u8; 4] = b"QPSW";
const VERSION: u8 = 1;
const HEADER: usize = 4 + 1 + 1 + 2 + 2;

/// "QPSW" | version | n u8 | t u16 BE | w u16 BE | φ | τ.
pub fn serialize_proof(proof: &PoswProof) -> Vec<u8> {
    let p = &proof.params;
    let mut out = Vec::with_capacity(HEADER + p.proof_bits().div_ceil(8) as usize);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(p.n as u8);
    out.extend_from_slice(&(p.t as u16).to_be_bytes());
    out.extend_from_slice(&(p.w as u16).to_be_bytes());
    out.extend_from_slice(proof.phi.as_bytes());
    for l in proof.tau.iter().flatten() {
        out.extend_from_slice(l.as_bytes());
    }
    out
}

pub fn deserialize_proof(bytes: &[u8]) -> Result<PoswProof> {
    if bytes.len() < HEADER {
        return Err(Error::Format(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    if bytes[4] != VERSION {
        return Err(Error::Format(format!("unsupported version {}", bytes[4])));
    }
    let n = bytes[5] as u32;
    let t = u16::from_be_bytes([bytes[6], bytes[7]]) as u32;
    let w = u16::from_be_bytes([bytes[8], bytes[9]]) as u32;
    let params = PoswParams::new(n, t, w).map_err(|e| Error::Format(e.to_string()))?;
    let lb = label_bytes(w);
    let count = 1 + (t * 2 * n) as usize;
    let body = &bytes[HEADER..];
    if body.len() != count * lb {
        return Err(Error::Format(format!("body has {} bytes, expected {}", body.len(), count * lb)));
    }
    let mut labels = body.chunks(lb).map(|c| Label::from_bytes(c.to_vec(), w));
    let phi = labels.next().expect("count ≥ 1")?;
    let rest: Vec<Label> = labels.collect::<Result<_>>()?;
    let tau = rest.chunks(2 * n as usize).map(<[Label]>::to_vec).collect();
    Ok(PoswProof { params, phi, tau })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::posw::backend::{Backend, BackendKind, TableOracle};

    fn names(vs: &[TraceEntry]) -> Vec<String> {
        vs.iter()
            .map(|e| match e {
                TraceEntry::Label { vertex } => vertex.to_string(),
                TraceEntry::Challenge { .. } => "ch".into(),
            })
            .collect()
    }

    #[test]
    fn completeness_both_backends() {
        for kind in [BackendKind::Table, BackendKind::Crypto] {
            for n in 1..=6 {
                for t in 1..=4 {
                    let params = PoswParams::new(n, t, 16).unwrap();
                    let chi = Label::from_u64(0xbeef, 16);
                    let mut oracle = Backend::new(kind, 3, 16).unwrap();
                    let (proof, trace) = prove_with_trace(&chi, &params, &mut oracle).unwrap();
                    assert!(trace_is_sequential(&params.dag(), &trace));
                    assert_eq!(trace.len(), (1 << (n + 1)) as usize);
                    assert!(verify(&chi, &params, &proof, &mut oracle).accepted(), "{kind:?} n={n} t={t}");
                    assert_eq!(serialize_proof(&proof).len() * 8 - HEADER * 8, params.proof_bits() as usize);
                }
            }
        }
    }

    #[test]
    fn trace_order_n2() {
        let chi = Label::from_u64(1, 8);
        let mut oracle = TableOracle::new(0, 8).unwrap();
        let (proof, trace) = prove_with_trace(&chi, &PoswParams::new(2, 1, 8).unwrap(), &mut oracle).unwrap();
        assert_eq!(names(&trace), ["00", "01", "0", "10", "11", "1", "ε", "ch"]);
        assert_eq!(proof.tau[0].len(), 4);
    }

    #[test]
    fn trace_checker_rejects_reordering() {
        let dag = Dag::new(2).unwrap();
        let chi = Label::from_u64(1, 8);
        let mut oracle = TableOracle::new(0, 8).unwrap();
        let (_, mut trace) = prove_with_trace(&chi, &PoswParams::new(2, 1, 8).unwrap(), &mut oracle).unwrap();
        assert!(trace_is_sequential(&dag, &trace));
        trace.swap(1, 2);
        assert!(!trace_is_sequential(&dag, &trace));
        trace.swap(1, 2);
        trace.pop();
        assert!(!trace_is_sequential(&dag, &trace));
    }

    #[test]
    fn challenge_parsing() {
        let chi = Label::from_u64(0, 8);
        let phi = Label::from_u64(5, 8);
        let mut oracle = TableOracle::new(11, 8).unwrap();
        let p = PoswParams::new(1, 1, 8).unwrap();
        let leaf = derive_challenge(&chi, &phi, &p, &mut oracle)[0];
        let block = oracle.query(&challenge_input(&chi, &phi, 1));
        assert_eq!(leaf.bits(), block.bit(0, 8) as u32);
        // t·n = 20 bits over w = 8 needs three blocks.
        let p = PoswParams::new(5, 4, 8).unwrap();
        assert_eq!(p.challenge_blocks(), 3);
        let leaves = derive_challenge(&chi, &phi, &p, &mut oracle);
        assert_eq!(leaves.len(), 4);
        assert!(leaves.iter().all(|v| v.len() == 5));
        assert_eq!(leaves, derive_challenge(&chi, &phi, &p, &mut TableOracle::new(11, 8).unwrap()));
    }

    #[test]
    fn wire_format_round_trip_and_rejections() {
        let chi = Label::from_u64(9, 12);
        let params = PoswParams::new(3, 2, 12).unwrap();
        let proof = prove(&chi, &params, &mut TableOracle::new(1, 12).unwrap()).unwrap();
        let bytes = serialize_proof(&proof);
        assert_eq!(&bytes[..10], &[b'Q', b'P', b'S', b'W', 1, 3, 0, 2, 0, 12]);
        assert_eq!(deserialize_proof(&bytes).unwrap(), proof);

        let mut long = bytes.clone();
        long.push(0);
        assert!(deserialize_proof(&long).is_err());
        assert!(deserialize_proof(&bytes[..bytes.len() - 1]).is_err());
        let mut bad_t = bytes.clone();
        bad_t[7] = 3;
        assert!(deserialize_proof(&bad_t).is_err());
        let mut bad_version = bytes.clone();
        bad_version[4] = 2;
        assert!(deserialize_proof(&bad_version).is_err());
        let mut padding = bytes.clone();
        padding[HEADER] |= 0x80;
        assert!(deserialize_proof(&padding).is_err());
    }

    #[test]
    fn verify_rejections() {
        let chi = Label::from_u64(9, 16);
        let params = PoswParams::new(2, 2, 16).unwrap();
        let mut oracle = TableOracle::new(4, 16).unwrap();
        let proof = prove(&chi, &params, &mut oracle).unwrap();
        let mut short = proof.clone();
        short.tau[1].pop();
        assert!(matches!(verify(&chi, &params, &short, &mut oracle), Verdict::Reject(Rejection::Malformed { .. })));
        let other = PoswParams::new(2, 1, 16).unwrap();
        assert!(!verify(&chi, &other, &proof, &mut oracle).accepted());
        let mut bent = proof.clone();
        bent.tau[0][0].flip_bit(3, 16);
        assert!(matches!(verify(&chi, &params, &bent, &mut oracle), Verdict::Reject(Rejection::Inconsistent { .. })));
        let wrong_chi = Label::from_u64(8, 16);
        assert!(!verify(&wrong_chi, &params, &proof, &mut oracle).accepted());
    }
}
