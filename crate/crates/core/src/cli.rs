//! Command-line front end. [`dispatch`] parses argv, runs one subcommand,
//! prints a human summary and optionally writes a machine report.
//!
//! Exit codes: 0 when every check holds, 1 when a check fails or the command
//! errors, 2 on a usage error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::bounds::{evaluate, BoundInput, Problem};
use crate::capacity::{
    bound_thm_general, bound_thm_simple, bound_thm_tricky, families_over, quantum_capacity_exact, CapacityQuery, Recognition,
};
use crate::error::{Error, Result};
use crate::group::GroupSpec;
use crate::oracle::{gap_report, AdversaryCircuit, OracleDomain, OutputSpec, BUDGET_ENV};
use crate::posw::{deserialize_proof, prove, serialize_proof, verify, Backend, BackendKind, Label, PoswParams, Verdict};
use crate::properties::{chain_local_family, collision_local_family, parse_property, prmg_local_family, DatabaseProperty};
use crate::report::Report;
use crate::suites::{run_suite, SUITES};

#[derive(Debug, Parser)]
#[command(name = "qrom-lab", version, about = "Compressed-oracle simulation, transition capacities and Simple PoSW")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a circuit against the standard and compressed oracles.
    Simulate(SimulateArgs),
    /// Exact one-round quantum transition capacity.
    Capacity(CapacityArgs),
    /// Evaluate a closed-form bound, optionally over a sweep.
    Bounds(BoundsArgs),
    /// Prove, verify or test the PoSW implementation.
    #[command(subcommand)]
    Posw(PoswCommand),
    /// Run check suites.
    Lemmas(LemmasArgs),
    /// Re-render a JSON report as CSV or JSON.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Circuit description (JSON).
    circuit: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CapacityArgs {
    #[arg(long)]
    p: String,
    #[arg(long)]
    pprime: String,
    #[arg(long)]
    k: usize,
    /// n = input bits, m = output bits, e.g. `n=1,m=1`.
    #[arg(long)]
    domain: String,
    /// Comma-separated input indices x⃗ may draw from.
    #[arg(long)]
    restrict: Option<String>,
    /// simple | tricky | general.
    #[arg(long)]
    bound: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value_t = 1)]
    q: u64,
    #[arg(long, default_value_t = 1)]
    k: u64,
    #[arg(long = "m-bits", default_value_t = 20)]
    m_bits: u32,
    /// Fan-in of the chain relation.
    #[arg(long = "T", default_value_t = 1.0)]
    t_fanin: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 256)]
    w: u32,
    #[arg(long, default_value_t = 20)]
    n: u32,
    #[arg(long, default_value_t = 10)]
    t: u32,
    /// `param=a,b,c` or `param=a..b`; repeat for a product grid.
    #[arg(long)]
    sweep: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum PoswCommand {
    Prove(ProveArgs),
    Verify(VerifyArgs),
    Lemmas(LemmasArgs),
}

#[derive(Debug, Args)]
struct ProveArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    t: u32,
    #[arg(long, default_value_t = 256)]
    w: u32,
    /// Statement as hex.
    #[arg(long, required_unless_present = "random", conflicts_with = "random")]
    chi: Option<String>,
    /// Draw the statement from the seed.
    #[arg(long)]
    random: bool,
    #[arg(long, default_value = "crypto")]
    backend: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    chi: String,
    #[arg(long, default_value = "crypto")]
    backend: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LemmasArgs {
    /// Suite name or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// Parses `argv` (program name first), runs the command and returns the exit
/// code. The human summary goes to standard output.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let mut stdout = std::io::stdout().lock();
    dispatch_to(argv, &mut stdout)
}

/// [`dispatch`] with the summary written to `out`.
pub fn dispatch_to<I, T>(argv: I, out: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Error::Parse(msg)) | Err(Error::Parameter(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run(cli: Cli, out: &mut impl Write) -> Result<bool> {
    let seed = cli.seed;
    match cli.command {
        Command::Simulate(a) => simulate(a, out),
        Command::Capacity(a) => capacity(a, out),
        Command::Bounds(a) => bounds(a, out),
        Command::Posw(PoswCommand::Prove(a)) => posw_prove(a, seed, out),
        Command::Posw(PoswCommand::Verify(a)) => posw_verify(a, seed, out),
        Command::Posw(PoswCommand::Lemmas(a)) => lemmas(a, seed, &["extract", "leaves", "newpath"], out),
        Command::Lemmas(a) => {
            let all: Vec<&str> = SUITES.iter().map(|(n, _)| *n).collect();
            lemmas(a, seed, &all, out)
        }
        Command::Report(a) => rerender(a, out),
    }
}

fn budget() -> Result<Option<u128>> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Parameter(format!("{BUDGET_ENV} must be a nonnegative integer, got '{v}'"))),
        Err(_) => Ok(None),
    }
}

fn with_budget(d: OracleDomain) -> Result<OracleDomain> {
    Ok(match budget()? {
        Some(b) => d.with_budget(b),
        None => d,
    })
}

fn finish(report: &Report, path: Option<&Path>) -> Result<bool> {
    if let Some(p) = path {
        report.write(p)?;
    }
    Ok(report.passed)
}

fn io(e: std::io::Error) -> Error {
    Error::Io(e)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainFile {
    /// Explicit input count; otherwise 2^bits inputs.
    #[serde(default)]
    inputs: Option<usize>,
    #[serde(default)]
    bits: Option<u32>,
    m_bits: u32,
}

/// Input file of `simulate`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitFile {
    domain: DomainFile,
    circuit: AdversaryCircuit,
    output: OutputSpec,
}

fn simulate(a: SimulateArgs, out: &mut impl Write) -> Result<bool> {
    let text = std::fs::read_to_string(&a.circuit)?;
    let file: CircuitFile = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", a.circuit.display())))?;
    let spec = GroupSpec::bits(file.domain.m_bits)?;
    let domain = match (file.domain.inputs, file.domain.bits) {
        (Some(n), None) => OracleDomain::with_size(n, spec)?,
        (None, Some(b)) => OracleDomain::bit_strings(b, spec)?,
        _ => return Err(Error::Parse("domain needs exactly one of 'inputs' and 'bits'".into())),
    };
    let domain = with_budget(domain)?;
    let g = gap_report(&file.circuit, &domain, &file.output)?;
    writeln!(out, "p = {:.12}  p' = {:.12}  gap bound = {:.12}  holds = {}", g.p, g.p_prime, g.gap_bound, g.holds).map_err(io)?;
    let mut report = Report::new("simulate", None);
    report.push(&g, g.holds)?;
    finish(&report, a.out.as_deref())
}

fn parse_domain(text: &str) -> Result<OracleDomain> {
    let (mut n, mut m) = (None, None);
    for part in text.split(',') {
        let (key, value) = part.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value in '{part}'")))?;
        let value: u32 = value.trim().parse().map_err(|_| Error::Parse(format!("bad integer in '{part}'")))?;
        match key.trim() {
            "n" => n = Some(value),
            "m" => m = Some(value),
            other => return Err(Error::Parse(format!("unknown domain key '{other}'"))),
        }
    }
    let (n, m) = n.zip(m).ok_or_else(|| Error::Parse("domain needs n and m".into()))?;
    with_budget(OracleDomain::bit_strings(n, GroupSpec::bits(m)?)?)
}

fn parse_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| Error::Parse(format!("bad index '{s}'"))))
        .collect()
}

/// Local families and recognizability for the CLI bound, keyed by target.
fn bound_for(q: &CapacityQuery, which: &str) -> Result<(f64, bool)> {
    let m = q.domain.spec().order();
    let restrict = q.restrict.as_deref();
    let grid = match &q.p_prime {
        DatabaseProperty::Prmg => {
            families_over(&q.p, &q.p_prime, q.k, restrict, &q.domain, Recognition::Strong, |xs, _| Ok(prmg_local_family(xs, m)))?
        }
        DatabaseProperty::Cl => {
            families_over(&q.p, &q.p_prime, q.k, restrict, &q.domain, Recognition::Strong, |xs, d| collision_local_family(d, xs))?
        }
        DatabaseProperty::Chn { rel, .. } => {
            families_over(&q.p, &q.p_prime, q.k, restrict, &q.domain, Recognition::Weak, |xs, d| chain_local_family(d, xs, rel))?
        }
        _ => return Err(Error::Parameter("bounds are available for targets PRMG, CL and CHN[...] only".into())),
    };
    let value = match which {
        "simple" => bound_thm_simple(&grid.families)?,
        "tricky" => bound_thm_tricky(&grid.families)?,
        "general" => bound_thm_general(&grid.families)?,
        other => return Err(Error::Parameter(format!("unknown bound '{other}', expected simple, tricky or general"))),
    };
    Ok((value, grid.recognized()))
}

fn capacity(a: CapacityArgs, out: &mut impl Write) -> Result<bool> {
    let domain = parse_domain(&a.domain)?;
    let p = parse_property(&a.p, &domain)?;
    let p_prime = parse_property(&a.pprime, &domain)?;
    let mut q = CapacityQuery::new(p, p_prime, a.k, &domain);
    if let Some(r) = &a.restrict {
        q = q.restricted(parse_list(r)?);
    }
    let mut r = quantum_capacity_exact(&q)?;
    let mut recognized = None;
    if let Some(which) = &a.bound {
        let (value, rec) = bound_for(&q, which)?;
        r = r.with_bound(value, which);
        recognized = Some(rec);
    }
    let ok = r.holds != Some(false) && recognized != Some(false);
    write!(out, "capacity [{} -> {}]_{} = {:.12}", a.p, a.pprime, a.k, r.value).map_err(io)?;
    if let (Some(b), Some(h)) = (r.bound_raw, r.holds) {
        write!(out, "  bound = {b:.12}  holds = {h}").map_err(io)?;
    }
    if recognized == Some(false) {
        write!(out, "  (family does not recognize the transition)").map_err(io)?;
    }
    writeln!(out).map_err(io)?;
    let mut report = Report::new("capacity", None);
    let mut record = serde_json::to_value(&r)?;
    if let (Value::Object(o), Some(rec)) = (&mut record, recognized) {
        o.insert("recognized".into(), json!(rec));
    }
    report.push(record, ok)?;
    finish(&report, a.out.as_deref())
}

fn sweep_values(spec: &str) -> Result<(String, Vec<f64>)> {
    let (key, values) = spec.split_once('=').ok_or_else(|| Error::Parse(format!("sweep '{spec}' needs param=values")))?;
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{s}' in sweep")));
    let values = if let Some((lo, hi)) = values.split_once("..") {
        let (lo, hi) = (num(lo)? as i64, num(hi)? as i64);
        (lo..=hi).map(|v| v as f64).collect()
    } else {
        values.split(',').map(num).collect::<Result<_>>()?
    };
    Ok((key.trim().to_string(), values))
}

fn set_param(input: &mut BoundInput, key: &str, v: f64) -> Result<()> {
    if v < 0.0 || !v.is_finite() {
        return Err(Error::Parameter(format!("{key} must be a nonnegative number")));
    }
    match key {
        "q" => input.q = v as u64,
        "k" => input.k = v as u64,
        "m-bits" | "m_bits" => input.m_bits = v as u32,
        "T" => input.t_fanin = v,
        "gamma" => input.gamma = v,
        "w" => input.w = v as u32,
        "n" => input.n = v as u32,
        "t" => input.t = v as u32,
        other => return Err(Error::Parse(format!("unknown sweep parameter '{other}'"))),
    }
    Ok(())
}

fn bounds(a: BoundsArgs, out: &mut impl Write) -> Result<bool> {
    let problem: Problem = a.problem.parse()?;
    let base = BoundInput { q: a.q, k: a.k, m_bits: a.m_bits, t_fanin: a.t_fanin, gamma: a.gamma, w: a.w, n: a.n, t: a.t };
    let mut grid = vec![base];
    for s in &a.sweep {
        let (key, values) = sweep_values(s)?;
        let mut next = Vec::with_capacity(grid.len() * values.len());
        for g in &grid {
            for &v in &values {
                let mut i = *g;
                set_param(&mut i, &key, v)?;
                next.push(i);
            }
        }
        grid = next;
    }
    let mut report = Report::new("bounds", None);
    for input in &grid {
        let r = evaluate(problem, input)?;
        if grid.len() == 1 {
            writeln!(out, "{:.12}", r.value).map_err(io)?;
        } else {
            writeln!(out, "{problem} q={} k={} m_bits={} w={} n={} t={}: {:.12}", input.q, input.k, input.m_bits, input.w, input.n, input.t, r.value)
                .map_err(io)?;
        }
        report.push(
            json!({
                "problem": problem.to_string(),
                "q": input.q,
                "k": input.k,
                "m_bits": input.m_bits,
                "T": input.t_fanin,
                "gamma": input.gamma,
                "w": input.w,
                "n": input.n,
                "t": input.t,
                "raw": r.raw,
                "value": r.value,
                "source": r.source,
            }),
            true,
        )?;
    }
    finish(&report, a.out.as_deref())
}

fn backend(name: &str, seed: u64, w: u32) -> Result<Backend> {
    let kind: BackendKind = name.parse()?;
    Backend::new(kind, seed, w)
}

fn posw_prove(a: ProveArgs, seed: u64, out: &mut impl Write) -> Result<bool> {
    let params = PoswParams::new(a.n, a.t, a.w)?;
    let chi = match &a.chi {
        Some(h) => Label::parse_hex(h, a.w)?,
        None => Label::random(&mut ChaCha8Rng::seed_from_u64(seed), a.w),
    };
    let mut oracle = backend(&a.backend, seed, a.w)?;
    let proof = prove(&chi, &params, &mut oracle)?;
    let bytes = serialize_proof(&proof);
    std::fs::write(&a.out, &bytes)?;
    writeln!(out, "chi = {chi}").map_err(io)?;
    writeln!(out, "phi = {}", proof.phi).map_err(io)?;
    writeln!(out, "wrote {} bytes to {}", bytes.len(), a.out.display()).map_err(io)?;
    Ok(true)
}

fn posw_verify(a: VerifyArgs, seed: u64, out: &mut impl Write) -> Result<bool> {
    let bytes = std::fs::read(&a.input)?;
    let mut report = Report::new("posw-verify", Some(seed));
    let verdict = match deserialize_proof(&bytes) {
        Ok(proof) => {
            let chi = Label::parse_hex(&a.chi, proof.params.w)?;
            let mut oracle = backend(&a.backend, seed, proof.params.w)?;
            verify(&chi, &proof.params, &proof, &mut oracle)
        }
        Err(Error::Format(detail)) => Verdict::Reject(crate::posw::Rejection::Malformed { detail }),
        Err(e) => return Err(e),
    };
    let ok = verdict.accepted();
    match &verdict {
        Verdict::Accept => writeln!(out, "accept").map_err(io)?,
        Verdict::Reject(r) => writeln!(out, "reject: {r:?}").map_err(io)?,
    }
    report.push(json!({ "accepted": ok, "verdict": format!("{verdict:?}") }), ok)?;
    finish(&report, a.out.as_deref())
}

fn lemmas(a: LemmasArgs, seed: u64, allowed: &[&str], out: &mut impl Write) -> Result<bool> {
    let names: Vec<&str> = if a.suite == "all" {
        allowed.to_vec()
    } else if allowed.contains(&a.suite.as_str()) {
        vec![a.suite.as_str()]
    } else {
        return Err(Error::Parameter(format!("unknown suite '{}', expected one of: all, {}", a.suite, allowed.join(", "))));
    };
    let mut report = Report::new("lemmas", Some(seed));
    for name in names {
        let s = run_suite(name, a.trials, seed)?;
        writeln!(
            out,
            "{:<20} {}  checks={} failures={} skipped={}",
            s.suite,
            if s.passed { "pass" } else { "FAIL" },
            s.checks,
            s.failures,
            s.skipped
        )
        .map_err(io)?;
        for note in &s.notes {
            writeln!(out, "    {note}").map_err(io)?;
        }
        let ok = s.passed;
        report.push(&s, ok)?;
    }
    finish(&report, a.out.as_deref())
}

fn rerender(a: ReportArgs, out: &mut impl Write) -> Result<bool> {
    let text = std::fs::read_to_string(&a.input)?;
    let value: Value = serde_json::from_str(&text)?;
    let mut report = Report::new(value.get("command").and_then(Value::as_str).unwrap_or("report"), value.get("seed").and_then(Value::as_u64));
    let records = value
        .get("records")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("report has no 'records' array".into()))?;
    for r in records {
        report.push(r, true)?;
    }
    report.passed = value.get("passed").and_then(Value::as_bool).unwrap_or(true);
    report.write(&a.out)?;
    writeln!(out, "wrote {} records to {}", records.len(), a.out.display()).map_err(io)?;
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_cli(args: &[&str]) -> (i32, String) {
        let mut buf = Vec::new();
        let code = dispatch_to(std::iter::once("qrom-lab").chain(args.iter().copied()), &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn bounds_single_value() {
        let (code, out) = run_cli(&["bounds", "--problem", "preimage", "--q", "16", "--k", "4", "--m-bits", "20"]);
        assert_eq!(code, 0);
        let v: f64 = out.trim().parse().unwrap();
        assert!((v - 0.00996).abs() < 1e-4, "{v}");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_cli(&["bounds", "--nope"]).0, 2);
        assert_eq!(run_cli(&["frobnicate"]).0, 2);
        assert_eq!(run_cli(&["bounds", "--problem", "nope"]).0, 2);
        assert_eq!(run_cli(&["lemmas", "--suite", "nope"]).0, 2);
    }

    #[test]
    fn capacity_example() {
        let (code, out) = run_cli(&["capacity", "--p", "!PRMG", "--pprime", "PRMG", "--k", "1", "--domain", "n=1,m=1", "--bound", "simple"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("0.866025403784"), "{out}");
    }

    #[test]
    fn sweep_product() {
        let (code, out) = run_cli(&["bounds", "--problem", "collision", "--sweep", "q=1..3", "--sweep", "k=1,2"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 6);
    }

    #[test]
    fn domain_parsing() {
        assert_eq!(parse_domain("n=2,m=1").unwrap().len(), 4);
        assert!(parse_domain("n=2").is_err());
        assert!(parse_domain("n=2,m=1,z=3").is_err());
    }
}
