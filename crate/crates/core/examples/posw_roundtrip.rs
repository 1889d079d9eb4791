//! Proves and verifies with the hash backend, round-trips the proof through
//! the wire format and shows that a flipped bit is rejected.

use qrom_lab::posw::{deserialize_proof, prove, serialize_proof, verify, CryptoOracle, Label, PoswParams};

fn main() -> qrom_lab::Result<()> {
    let params = PoswParams::new(10, 8, 256)?;
    let chi = Label::parse_hex(&"ab".repeat(32), 256)?;
    let mut oracle = CryptoOracle::new(256)?;
    let proof = prove(&chi, &params, &mut oracle)?;
    let bytes = serialize_proof(&proof);
    println!("n = 10, t = 8: {} vertices labelled, proof is {} bytes", params.dag().vertex_count(), bytes.len());
    let decoded = deserialize_proof(&bytes)?;
    println!("verify: {:?}", verify(&chi, &params, &decoded, &mut oracle));
    let mut bent = decoded.clone();
    bent.tau[3][1].flip_bit(7, 256);
    println!("after one bit flip: {:?}", verify(&chi, &params, &bent, &mut oracle));
    Ok(())
}
