//! Estimates the success rate of a cheating prover that labels half the
//! tree, with a Wilson interval.

fn main() -> qrom_lab::Result<()> {
    let s = qrom_lab::suites::run_suite("forgery", Some(20_000), 11)?;
    for key in ["queries", "trials", "successes", "wilson", "analytic", "classical_estimate", "bound"] {
        println!("{key:<19} {}", s.metrics[key]);
    }
    println!("passed              {}", s.passed);
    Ok(())
}
