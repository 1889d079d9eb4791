//! Tabulates the five closed-form bounds over q and writes the table as CSV
//! to standard output.

use qrom_lab::bounds::{evaluate, BoundInput, Problem};
use qrom_lab::report::render_csv;

fn main() -> qrom_lab::Result<()> {
    let mut records = Vec::new();
    for problem in Problem::ALL {
        for q in [1, 4, 16, 64, 256] {
            let input = BoundInput { q, k: 1, m_bits: 32, w: 128, n: 20, t: 4, ..BoundInput::default() };
            let r = evaluate(problem, &input)?;
            records.push(serde_json::json!({ "problem": problem.to_string(), "q": q, "raw": r.raw, "value": r.value }));
        }
    }
    print!("{}", render_csv(&records)?);
    Ok(())
}
