//! Exact quantum and classical capacities of ¬PRMG → PRMG next to the
//! simple bound √(10k/M).

use qrom_lab::capacity::{classical_capacity_exact, quantum_capacity_exact, CapacityQuery};
use qrom_lab::group::GroupSpec;
use qrom_lab::oracle::OracleDomain;
use qrom_lab::properties::DatabaseProperty;

fn main() -> qrom_lab::Result<()> {
    println!("{:>3} {:>3} {:>3} {:>10} {:>10} {:>10}", "M", "k", "|X|", "quantum", "classical", "bound");
    for m_bits in 1..=2 {
        let spec = GroupSpec::bits(m_bits)?;
        for k in 1..=2 {
            let domain = OracleDomain::with_size(2, spec)?;
            let (p, pp) = (DatabaseProperty::prmg().not(), DatabaseProperty::prmg());
            let q = quantum_capacity_exact(&CapacityQuery::new(p.clone(), pp.clone(), k, &domain))?;
            let c = classical_capacity_exact(&p, &pp, k, &domain)?;
            let bound = (10.0 * k as f64 / spec.order() as f64).sqrt();
            println!("{:>3} {:>3} {:>3} {:>10.6} {:>10.6} {:>10.6}", spec.order(), k, 2, q.value, c.value, bound);
        }
    }
    Ok(())
}
