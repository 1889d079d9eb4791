//! Loads a circuit description and compares exact success against the
//! purified and compressed oracles.

use qrom_lab::group::GroupSpec;
use qrom_lab::oracle::{gap_report, AdversaryCircuit, OracleDomain, OutputSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = include_str!("data/preimage_circuit.json");
    let file: serde_json::Value = serde_json::from_str(text)?;
    let circuit: AdversaryCircuit = serde_json::from_value(file["circuit"].clone())?;
    let out: OutputSpec = serde_json::from_value(file["output"].clone())?;
    let domain = OracleDomain::with_size(4, GroupSpec::bits(1)?)?;
    let g = gap_report(&circuit, &domain, &out)?;
    println!("p = {:.6}, p' = {:.6}, √p' + √(ℓ/M) = {:.6}, holds = {}", g.p, g.p_prime, g.gap_bound, g.holds);
    Ok(())
}
