//! Prints the compressed-oracle transition matrix for M = 2 and checks
//! unitarity for every ŷ at M = 8.

use qrom_lab::group::{build_transition_matrix, GroupSpec};

fn main() -> qrom_lab::Result<()> {
    let spec = GroupSpec::bits(1)?;
    let mat = build_transition_matrix(1, spec)?;
    println!("M = 2, ŷ = 1 (rows u, columns r; index 2 is ⊥):");
    for u in 0..3 {
        let row: Vec<String> = (0..3).map(|r| format!("{:+.4}{:+.4}i", mat.get(u, r).re, mat.get(u, r).im)).collect();
        println!("  {}", row.join("  "));
    }
    let spec = GroupSpec::bits(3)?;
    for yhat in 0..spec.order() {
        let defect = build_transition_matrix(yhat, spec)?.unitarity_defect();
        println!("M = 8, ŷ = {yhat}: unitarity defect {defect:.2e}");
    }
    Ok(())
}
