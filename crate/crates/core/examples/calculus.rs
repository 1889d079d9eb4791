//! Checks the capacity calculus on the built-in instance grid and prints the
//! tightest inequality.

use qrom_lab::capacity::verify_calculus;
use qrom_lab::suites::calculus_instances;

fn main() -> qrom_lab::Result<()> {
    let mut tightest: Option<(usize, qrom_lab::capacity::InequalityCheck)> = None;
    let mut total = 0;
    for (i, inst) in calculus_instances()?.iter().enumerate() {
        for c in verify_calculus(inst)? {
            total += 1;
            assert!(c.holds, "instance {i}: {c:?}");
            if tightest.as_ref().is_none_or(|(_, t)| c.slack < t.slack) {
                tightest = Some((i, c));
            }
        }
    }
    let (i, c) = tightest.expect("nonempty grid");
    println!("{total} inequalities hold; tightest is {} on instance {i}: {:.9} ≤ {:.9}", c.name, c.lhs, c.rhs);
    Ok(())
}
