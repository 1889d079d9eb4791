//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use qrom_lab::bounds::{chain_bound, collision_bound, gencol_bound, posw_bound, preimage_bound};
use qrom_lab::capacity::classical_capacity_exact;
use qrom_lab::group::{build_transition_matrix, GroupSpec};
use qrom_lab::posw::{extract, Dag, Label};
use qrom_lab::report::Report;
use qrom_lab::suites::{calculus_instances, classical_instances, exhaustive_databases, run_suite, SuiteOutcome, SUITES};

const SEED: u64 = 20_240_601;

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn suite(name: &str, trials: Option<u64>) -> Result<SuiteOutcome, String> {
    let s = run_suite(name, trials, SEED).map_err(|e| format!("{name}: {e}"))?;
    if s.passed {
        Ok(s)
    } else {
        Err(format!("{name}: {} of {} checks failed: {:?}", s.failures, s.checks, s.notes))
    }
}

fn summary(s: &SuiteOutcome) -> String {
    format!("{} checks", s.checks)
}

fn hand_matrix() -> Check {
    let mat = build_transition_matrix(1, GroupSpec::bits(1).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    for (u, row) in common::HAND_M2_YHAT1.iter().enumerate() {
        for (r, &want) in row.iter().enumerate() {
            let got = mat.get(u, r);
            if (got.re - want).abs() > 1e-12 || got.im.abs() > 1e-12 {
                return Err(format!("M=2 entry ({u},{r}) is {got}, expected {want}"));
            }
        }
    }
    Ok(String::new())
}

fn c1() -> Check {
    let s = suite("fidelity", None)?;
    hand_matrix()?;
    Ok(format!("{}, hand M=2 instance matches", summary(&s)))
}

fn c2() -> Check {
    suite("connection", None).map(|s| summary(&s))
}

fn c3() -> Check {
    suite("purification", Some(100)).map(|s| format!("{}, max distance {}", summary(&s), s.metrics["max_total_variation"]))
}

fn c4() -> Check {
    suite("gap", Some(50)).map(|s| summary(&s))
}

fn c5() -> Check {
    suite("prmg-capacity", None).map(|s| summary(&s))
}

fn c6() -> Check {
    suite("recognized-capacity", None).map(|s| summary(&s))
}

fn c7() -> Check {
    let n = calculus_instances().map_err(|e| e.to_string())?.len();
    if n < 20 {
        return Err(format!("only {n} instances"));
    }
    suite("calculus", None).map(|s| format!("{n} instances, {}", summary(&s)))
}

fn c8() -> Check {
    let s = suite("classical", None)?;
    let instances = classical_instances().map_err(|e| e.to_string())?;
    for inst in &instances {
        let got = classical_capacity_exact(&inst.p, &inst.p_prime, inst.k, &inst.domain).map_err(|e| e.to_string())?.value;
        let want = common::brute_force_classical(&inst.p, &inst.p_prime, inst.k, inst.domain.len(), inst.domain.spec().order());
        if (got - want).abs() > 1e-12 {
            return Err(format!("{}: engine {got}, resampling {want}", inst.name));
        }
    }
    Ok(format!("{} instances agree with resampling, {}", instances.len(), summary(&s)))
}

fn c9() -> Check {
    suite("grover", None).map(|s| summary(&s))
}

fn c10() -> Check {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
    for m_bits in [1, 8, 20] {
        let m = 2f64.powi(m_bits);
        let pairs = [
            ("preimage", preimage_bound(0, 1, m).map(|b| b.raw), common::q0_preimage(m)),
            ("collision", collision_bound(0, 2, m).map(|b| b.raw), common::q0_collision(2.0, m)),
            ("gencol", gencol_bound(0, 2, m, 3.0).map(|b| b.raw), common::q0_gencol(2.0, m, 3.0)),
            ("chain", chain_bound(0, 2, m, 4.0).map(|b| b.raw), common::q0_chain(m, 4.0)),
        ];
        for (name, got, want) in pairs {
            let got = got.map_err(|e| e.to_string())?;
            if !close(got, want) {
                return Err(format!("{name} at q=0, M=2^{m_bits}: {got} vs {want}"));
            }
        }
    }
    let got = posw_bound(0, 1, 64, 10, 3).map_err(|e| e.to_string())?.raw;
    if !close(got, common::q0_posw(64, 10, 3)) {
        return Err(format!("posw at q=0: {got}"));
    }
    suite("bounds", None).map(|s| format!("q=0 values match, {}", summary(&s)))
}

fn c11() -> Check {
    suite("posw-completeness", None).map(|s| summary(&s))
}

fn c12() -> Check {
    suite("posw-soundness", Some(100_000))
        .map(|s| format!("{} bit flips rejected, {} / {} guesses", s.metrics["bit_flips"], s.metrics["guess_successes"], s.metrics["guess_trials"]))
}

fn c13() -> Check {
    let e = suite("extract", Some(10_000))?;
    let l = suite("leaves", Some(10_000))?;
    let n = suite("newpath", Some(10_000))?;
    let dag = Dag::new(1).map_err(|e| e.to_string())?;
    for db in &exhaustive_databases(2) {
        for phi in (0..4).map(|i| Label::from_u64(i, 2)) {
            if extract(db, &dag, &phi).leaves(&dag) != common::openable_leaves_n1(db, &phi, 2) {
                return Err(format!("extracted leaves differ from brute force at φ={phi}"));
            }
        }
    }
    Ok(format!(
        "{} exhaustive databases, {} + {} + {} checks",
        e.metrics["exhaustive_databases"], e.checks, l.checks, n.checks
    ))
}

fn c14() -> Check {
    let render = || -> Result<String, String> {
        let mut r = Report::new("lemmas", Some(SEED));
        for (name, _) in SUITES {
            let s = run_suite(name, None, SEED).map_err(|e| e.to_string())?;
            r.push(&s, s.passed).map_err(|e| e.to_string())?;
        }
        r.to_json().map_err(|e| e.to_string())
    };
    let (a, b) = (render()?, render()?);
    if a != b {
        return Err("reports differ between identical runs".into());
    }
    Ok(format!("{} suites, {} bytes identical", SUITES.len(), a.len()))
}

fn main() {
    let criteria: [Criterion; 14] = [
        ("transition-matrix fidelity", Duration::from_secs(1), c1),
        ("connection sweep", Duration::from_secs(10), c2),
        ("purification equivalence", Duration::from_secs(120), c3),
        ("compressed gap", Duration::from_secs(120), c4),
        ("exact capacity vs simple bound", Duration::from_secs(60), c5),
        ("exact capacity vs recognized bounds", Duration::from_secs(300), c6),
        ("capacity calculus", Duration::from_secs(600), c7),
        ("classical capacities", Duration::from_secs(60), c8),
        ("amplitude amplification vs bound", Duration::from_secs(120), c9),
        ("bound formulas", Duration::from_secs(600), c10),
        ("posw completeness and accounting", Duration::from_secs(600), c11),
        ("posw soundness smoke", Duration::from_secs(600), c12),
        ("extraction lemmas", Duration::from_secs(600), c13),
        ("determinism", Duration::from_secs(600), c14),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > *limit => Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}")),
            other => other,
        };
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({elapsed:.2?}) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({elapsed:.2?}) {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
