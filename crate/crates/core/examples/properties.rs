//! Parses property expressions and lists which databases over two inputs
//! and M = 2 satisfy them.

use qrom_lab::group::GroupSpec;
use qrom_lab::oracle::{Database, OracleDomain};
use qrom_lab::properties::parse_property;

fn main() -> qrom_lab::Result<()> {
    let domain = OracleDomain::bit_strings(1, GroupSpec::bits(1)?)?;
    for text in ["PRMG", "CL", "!PRMG & SIZE<=1", "CHN[s=2,rel=equality]"] {
        let p = parse_property(text, &domain)?;
        let members: Vec<String> = Database::all(2, 2).filter(|d| p.contains(d)).map(|d| format!("{d:?}")).collect();
        println!("{text:<24} {}", members.join(" "));
    }
    Ok(())
}
