//! Simple proof of sequential work: graph labeling, Fiat–Shamir challenge,
//! opening and verification, plus extraction from a query database.

mod backend;
mod dag;
mod extract;
mod protocol;

pub use backend::{
    challenge_input, label_bytes, label_input, parse_label_input, Backend, BackendKind, CryptoOracle, Label, RandomOracle,
    TableOracle, MAX_WIDTH, MIN_WIDTH,
};
pub use dag::{Dag, Vertex, MAX_DEPTH};
pub use extract::{
    check_extract_lemma, check_leaves_lemma, check_newpath_lemma, consistent_ancestry_exists, extract, path_to_chain,
    ExtractViolation, Extraction, LabelDb, LabelQuery, LeavesCheck,
};
pub use protocol::{
    compute_labeling, derive_challenge, deserialize_proof, prove, prove_with_trace, serialize_proof, trace_is_sequential,
    verify, LabelMap, PoswParams, PoswProof, Rejection, TraceEntry, Verdict,
};
