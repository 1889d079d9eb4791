//! Runs one round of amplitude amplification against the standard and the
//! compressed oracle and compares the output distributions.

use qrom_lab::group::GroupSpec;
use qrom_lab::oracle::{run_adversary, success_probability, total_variation, OracleDomain, OracleKind, OutputSpec, Relation};
use qrom_lab::suites::grover_circuit;

fn main() -> qrom_lab::Result<()> {
    let domain = OracleDomain::with_size(4, GroupSpec::bits(1)?)?;
    let circuit = grover_circuit(4, 1);
    let out = OutputSpec { x_registers: vec![0], y_registers: None, relation: Relation::Preimage { target: 0 } };
    let standard = run_adversary(&circuit, &domain, OracleKind::Standard)?;
    let compressed = run_adversary(&circuit, &domain, OracleKind::Compressed)?;
    println!("success (standard)   = {:.6}", success_probability(&standard.state, &out)?);
    println!("success (compressed) = {:.6}", success_probability(&compressed.state, &out)?);
    println!("total variation      = {:.2e}", total_variation(&standard.distribution, &compressed.distribution));
    Ok(())
}
