use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{within_sigma, SuiteOutcome, Tally};
use crate::bounds::posw_bound;
use crate::error::Result;
use crate::report::wilson;
use crate::posw::{
    check_extract_lemma, check_leaves_lemma, check_newpath_lemma, compute_labeling, derive_challenge, extract,
    label_input, prove, prove_with_trace, trace_is_sequential, verify, Backend, BackendKind, Dag, Label, LabelDb,
    LabelMap, LabelQuery, PoswParams, PoswProof, RandomOracle, TableOracle, TraceEntry, Vertex,
};

/// prove → verify at n ≤ 6, t ≤ 4 on both backends, with the trace checked
/// for order, label count and a single challenge entry.
pub fn completeness_suite() -> Result<SuiteOutcome> {
    let mut t = Tally::default();
    let w = 16;
    for kind in [BackendKind::Table, BackendKind::Crypto] {
        for n in 1..=6 {
            for tt in 1..=4 {
                let params = PoswParams::new(n, tt, w)?;
                let chi = Label::from_u64(0x5157 ^ (n as u64) << 4 ^ tt as u64, w);
                let mut oracle = Backend::new(kind, 17 * n as u64 + tt as u64, w)?;
                let (proof, trace) = prove_with_trace(&chi, &params, &mut oracle)?;
                let cell = format!("{kind:?} n={n} t={tt}");
                t.check(verify(&chi, &params, &proof, &mut oracle).accepted(), || format!("{cell}: honest proof rejected"));
                let labels = trace.iter().filter(|e| matches!(e, TraceEntry::Label { .. })).count();
                t.check(labels == (1 << (n + 1)) - 1, || format!("{cell}: {labels} label queries"));
                let challenges = trace.iter().filter(|e| matches!(e, TraceEntry::Challenge { .. })).count();
                t.check(challenges == 1 && trace.len() == labels + 1, || format!("{cell}: {challenges} challenge queries"));
                t.check(trace_is_sequential(&params.dag(), &trace), || format!("{cell}: trace out of order"));
            }
        }
    }
    let order: Vec<String> = Dag::new(2)?.evaluation_order().iter().map(Vertex::to_string).collect();
    t.check(order == ["00", "01", "0", "10", "11", "1", "ε"], || format!("n=2 order {order:?}"));
    Ok(t.finish("posw-completeness", None))
}

fn flipped_proofs(proof: &PoswProof) -> Vec<(String, PoswProof)> {
    let w = proof.params.w;
    let mut out = Vec::new();
    for bit in 0..w {
        let mut p = proof.clone();
        p.phi.flip_bit(bit, w);
        out.push((format!("φ bit {bit}"), p));
    }
    for (i, group) in proof.tau.iter().enumerate() {
        for j in 0..group.len() {
            for bit in 0..w {
                let mut p = proof.clone();
                p.tau[i][j].flip_bit(bit, w);
                out.push((format!("τ[{i}][{j}] bit {bit}"), p));
            }
        }
    }
    out
}

/// Every single-bit flip of an honest proof at n = 2, t = 1, w = 64 is
/// rejected, and φ-guessing attackers with one query at n = 3, w = 16, t = 2
/// succeed at the analytic rate 2^{−wt(n+1)}.
pub fn soundness_suite(trials: u64, seed: u64) -> Result<SuiteOutcome> {
    let mut t = Tally::default();
    let params = PoswParams::new(2, 1, 64)?;
    let chi = Label::from_u64(seed, 64);
    let mut oracle = TableOracle::new(seed, 64)?;
    let proof = prove(&chi, &params, &mut oracle)?;
    t.check(verify(&chi, &params, &proof, &mut oracle).accepted(), || "honest proof rejected".into());
    let flips = flipped_proofs(&proof);
    t.metric("bit_flips", flips.len());
    for (what, bent) in flips {
        t.check(!verify(&chi, &params, &bent, &mut oracle).accepted(), || format!("{what}: corrupted proof accepted"));
    }

    let (n, w, tt) = (3, 16, 2);
    let params = PoswParams::new(n, tt, w)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wins = 0u64;
    for _ in 0..trials {
        let mut oracle = TableOracle::new(rng.gen(), w)?;
        let chi = Label::random(&mut rng, w);
        let phi = Label::random(&mut rng, w);
        derive_challenge(&chi, &phi, &params, &mut oracle);
        let tau = (0..tt).map(|_| (0..2 * n).map(|_| Label::random(&mut rng, w)).collect()).collect();
        let forged = PoswProof { params, phi, tau };
        wins += verify(&chi, &params, &forged, &mut oracle).accepted() as u64;
    }
    let analytic = 2f64.powi(-((w * tt * (n + 1)) as i32));
    let bound = posw_bound(1, 1, w, n, tt)?.value;
    let rate = wins as f64 / trials.max(1) as f64;
    t.metric("guess_trials", trials);
    t.metric("guess_successes", wins);
    t.metric("guess_wilson", wilson(wins, trials));
    t.metric("guess_analytic", analytic);
    t.metric("guess_bound", bound);
    t.check(within_sigma(wins, trials, analytic, 3.0), || format!("{wins}/{trials} outside 3σ of {analytic:e}"));
    t.check(rate <= bound, || format!("rate {rate} above the bound {bound}"));
    Ok(t.finish("posw-soundness", Some(seed)))
}

/// Labels the left subtree honestly, guesses the right child of the root and
/// opens whatever leaves it can. Returns the number of oracle queries made
/// and whether the proof verified.
fn half_tree_attack(params: &PoswParams, oracle: &mut TableOracle, rng: &mut ChaCha8Rng) -> (u64, bool) {
    let dag = params.dag();
    let w = params.w;
    let chi = Label::random(rng, w);
    let left = Vertex::ROOT.child(0);
    let mut labels = LabelMap::new();
    let mut queries = 0;
    for v in dag.evaluation_order() {
        let in_left = v.ancestors().contains(&left);
        if !in_left {
            continue;
        }
        let ins: Vec<Label> = dag.in_neighbors(v).iter().map(|u| labels[u].clone()).collect();
        labels.insert(v, oracle.query(&label_input(&chi, v, &ins)));
        queries += 1;
    }
    labels.insert(Vertex::ROOT.child(1), Label::random(rng, w));
    let ins = [labels[&left].clone(), labels[&Vertex::ROOT.child(1)].clone()];
    let phi = oracle.query(&label_input(&chi, Vertex::ROOT, &ins));
    labels.insert(Vertex::ROOT, phi.clone());
    queries += 1;
    let leaves = derive_challenge(&chi, &phi, params, oracle);
    queries += 1;
    let tau = leaves
        .iter()
        .map(|&leaf| {
            let ap = dag.authentication_path(leaf).expect("leaf");
            ap.iter().map(|u| labels.get(u).cloned().unwrap_or_else(|| Label::random(rng, w))).collect()
        })
        .collect();
    let proof = PoswProof { params: *params, phi, tau };
    (queries, verify(&chi, params, &proof, oracle).accepted())
}

/// A classical attacker with q < N queries that labels half the tree wins
/// with probability about 2^{−t}, within 3σ, and stays below the classical
/// estimate ((q+2)/2^{n+1})^t + q²/2^w and the clamped quantum bound.
pub fn forgery_suite(trials: u64, seed: u64) -> Result<SuiteOutcome> {
    let mut t = Tally::default();
    let (n, w, tt) = (3u32, 16u32, 2u32);
    let params = PoswParams::new(n, tt, w)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wins = 0u64;
    let mut q = 0;
    for _ in 0..trials {
        let mut oracle = TableOracle::new(rng.gen(), w)?;
        let (used, ok) = half_tree_attack(&params, &mut oracle, &mut rng);
        q = used;
        wins += ok as u64;
    }
    let vertices = (1u64 << (n + 1)) - 1;
    t.check(q < vertices, || format!("attacker used {q} ≥ N = {vertices} queries"));
    let analytic = 0.5f64.powi(tt as i32);
    let classical = (((q + 2) as f64 / 2f64.powi(n as i32 + 1)).powi(tt as i32) + (q * q) as f64 / 2f64.powi(w as i32)).min(1.0);
    let quantum = posw_bound(q, 1, w, n, tt)?.value;
    let rate = wins as f64 / trials.max(1) as f64;
    let sigma = (classical * (1.0 - classical) / trials.max(1) as f64).sqrt();
    t.metric("queries", q);
    t.metric("trials", trials);
    t.metric("successes", wins);
    t.metric("wilson", wilson(wins, trials));
    t.metric("analytic", analytic);
    t.metric("classical_estimate", classical);
    t.metric("bound", quantum);
    t.check(within_sigma(wins, trials, analytic, 3.0), || format!("{wins}/{trials} outside 3σ of {analytic}"));
    t.check(rate <= classical + 3.0 * sigma, || format!("rate {rate} above classical estimate {classical}"));
    t.check(rate <= quantum, || format!("rate {rate} above bound {quantum}"));
    Ok(t.finish("forgery", Some(seed)))
}

/// A random label database for the lemma suites.
#[derive(Clone, Debug)]
pub struct RandomDb {
    pub db: LabelDb,
    /// The honest labeling the database was cut from.
    pub honest: LabelMap,
    /// Candidate root labels: the honest one, every value stored at the
    /// root, and one random label.
    pub phis: Vec<Label>,
    /// Labels present in the database, as inputs or outputs.
    pub pool: Vec<Label>,
}

/// Keeps a random fraction of an honest labeling's queries and adds up to six
/// noise entries whose inputs reuse earlier labels. With `reuse` a noise
/// value may repeat an existing label, otherwise values are fresh.
pub fn random_database(dag: &Dag, w: u32, reuse: bool, rng: &mut ChaCha8Rng) -> Result<RandomDb> {
    let chi = Label::from_u64(0, w);
    let mut oracle = TableOracle::new(rng.gen(), w)?;
    let (honest, _) = compute_labeling(&chi, dag.depth(), &mut oracle)?;
    let keep = rng.gen_range(0.2..1.0);
    let mut db = LabelDb::new();
    for v in dag.vertices() {
        if rng.gen_bool(keep) {
            let ins = dag.in_neighbors(v).iter().map(|u| honest[u].clone()).collect();
            db.insert(LabelQuery::new(v, ins), honest[&v].clone());
        }
    }
    let mut pool: Vec<Label> = honest.values().cloned().collect();
    let vertices: Vec<Vertex> = dag.vertices().collect();
    for _ in 0..rng.gen_range(0..=6) {
        let v = *vertices.choose(rng).expect("nonempty");
        let ins: Vec<Label> = (0..dag.in_neighbors(v).len()).map(|_| pool.choose(rng).expect("nonempty").clone()).collect();
        let y = if reuse && rng.gen_bool(0.3) { pool.choose(rng).expect("nonempty").clone() } else { Label::random(rng, w) };
        db.insert(LabelQuery::new(v, ins), y.clone());
        pool.push(y);
    }
    let mut phis = vec![honest[&Vertex::ROOT].clone()];
    phis.extend(db.at_vertex(Vertex::ROOT).map(|(_, y)| y.clone()));
    phis.push(Label::random(rng, w));
    phis.sort();
    phis.dedup();
    Ok(RandomDb { db, honest, phis, pool })
}

fn collision_free_database(dag: &Dag, w: u32, rng: &mut ChaCha8Rng) -> Result<RandomDb> {
    loop {
        let r = random_database(dag, w, false, rng)?;
        if !r.db.has_collision() {
            return Ok(r);
        }
    }
}

/// Every collision-free database over the label queries of the n = 1 tree
/// with w-bit labels: injective partial maps from the queries (0), (1, a)
/// and (ε, a, b) to labels.
pub fn exhaustive_databases(w: u32) -> Vec<LabelDb> {
    let labels: Vec<Label> = (0..1u64 << w).map(|i| Label::from_u64(i, w)).collect();
    let (zero, one) = (Vertex::ROOT.child(0), Vertex::ROOT.child(1));
    let mut queries = vec![LabelQuery::new(zero, vec![])];
    queries.extend(labels.iter().map(|a| LabelQuery::new(one, vec![a.clone()])));
    for a in &labels {
        for b in &labels {
            queries.push(LabelQuery::new(Vertex::ROOT, vec![a.clone(), b.clone()]));
        }
    }
    fn go(queries: &[LabelQuery], labels: &[Label], i: usize, used: &mut Vec<bool>, cur: &mut LabelDb, out: &mut Vec<LabelDb>) {
        if i == queries.len() {
            out.push(cur.clone());
            return;
        }
        go(queries, labels, i + 1, used, cur, out);
        for (j, y) in labels.iter().enumerate() {
            if !used[j] {
                used[j] = true;
                cur.insert(queries[i].clone(), y.clone());
                go(queries, labels, i + 1, used, cur, out);
                cur.set(queries[i].clone(), None);
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&queries, &labels, 0, &mut vec![false; labels.len()], &mut LabelDb::new(), &mut out);
    out
}

/// Extraction postconditions: exhaustively over collision-free databases at
/// n = 1, w = 2 with every root label, then on `trials` random collision-free
/// databases at n = 2, w = 8.
pub fn extract_suite(trials: u64, seed: u64) -> Result<SuiteOutcome> {
    let mut t = Tally::default();
    let one = Dag::new(1)?;
    let dbs = exhaustive_databases(2);
    t.metric("exhaustive_databases", dbs.len());
    for db in &dbs {
        for phi in (0..4).map(|i| Label::from_u64(i, 2)) {
            let v = check_extract_lemma(db, &one, &phi).expect("collision-free by construction");
            t.check(v.is_empty(), || format!("n=1 φ={phi}: {v:?}"));
        }
    }
    let two = Dag::new(2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut leaves_seen = 0usize;
    for i in 0..trials {
        let r = collision_free_database(&two, 8, &mut rng)?;
        let phi = r.phis.choose(&mut rng).expect("nonempty").clone();
        leaves_seen += extract(&r.db, &two, &phi).leaves(&two).len();
        let v = check_extract_lemma(&r.db, &two, &phi).expect("collision-free");
        t.check(v.is_empty(), || format!("n=2 trial {i}: {v:?}"));
    }
    t.metric("random_databases", trials);
    t.metric("mean_leaves", leaves_seen as f64 / trials.max(1) as f64);
    Ok(t.finish("extract", Some(seed)))
}

/// Leaf count of the extracted tree against the longest chain in D, at all
/// candidate root labels, until `trials` random databases at n = 2, w = 8
/// have been checked. Databases with a cycle are skipped and redrawn.
pub fn leaves_suite(trials: u64, seed: u64) -> Result<SuiteOutcome> {
    let mut t = Tally::default();
    let dag = Dag::new(2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tight = 0u64;
    let mut checked = 0u64;
    while checked < trials {
        let r = random_database(&dag, 8, true, &mut rng)?;
        let mut any = false;
        for phi in &r.phis {
            let c = check_leaves_lemma(&r.db, &dag, phi);
            match (c.holds, c.chain) {
                (Some(ok), Some(q)) => {
                    any = true;
                    tight += (2 * c.leaves + 1 >= q + 2) as u64;
                    t.check(ok, || format!("database {checked} φ={phi}: {} leaves with chain {q}", c.leaves));
                }
                _ => t.skip(),
            }
        }
        checked += any as u64;
    }
    t.metric("databases", checked);
    t.metric("near_tight", tight);
    Ok(t.finish("leaves", Some(seed)))
}

/// New leaves after reprogramming one or two queries of a random
/// collision-free database at n = 2, w = 8 are explained by a changed value
/// on their ancestor path.
pub fn newpath_suite(trials: u64, seed: u64) -> Result<SuiteOutcome> {
    let mut t = Tally::default();
    let dag = Dag::new(2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertices: Vec<Vertex> = dag.vertices().collect();
    let mut opened = 0u64;
    for i in 0..trials {
        let r = collision_free_database(&dag, 8, &mut rng)?;
        let phi = r.phis.choose(&mut rng).expect("nonempty").clone();
        let count = rng.gen_range(1..=2);
        let mut xs = Vec::with_capacity(count);
        let mut us = Vec::with_capacity(count);
        for _ in 0..count {
            let v = *vertices.choose(&mut rng).expect("nonempty");
            let ins: Vec<Label> = if rng.gen_bool(0.5) {
                dag.in_neighbors(v).iter().map(|u| r.honest[u].clone()).collect()
            } else {
                (0..dag.in_neighbors(v).len()).map(|_| r.pool.choose(&mut rng).expect("nonempty").clone()).collect()
            };
            let u = match rng.gen_range(0..4) {
                0 => Some(r.honest[&v].clone()),
                1 => Some(r.pool.choose(&mut rng).expect("nonempty").clone()),
                2 => Some(Label::random(&mut rng, 8)),
                _ => None,
            };
            xs.push(LabelQuery::new(v, ins));
            us.push(u);
        }
        let before = extract(&r.db, &dag, &phi).leaves(&dag).len();
        let mut updated = r.db.clone();
        for (x, u) in xs.iter().zip(&us) {
            updated.set(x.clone(), u.clone());
        }
        opened += (extract(&updated, &dag, &phi).leaves(&dag).len() > before) as u64;
        match check_newpath_lemma(&r.db, &xs, &us, &dag, &phi)? {
            Some(ok) => t.check(ok, || format!("trial {i} φ={phi}: update {xs:?} ↦ {us:?}")),
            None => t.skip(),
        }
    }
    t.metric("updates_opening_leaves", opened);
    Ok(t.finish("newpath", Some(seed)))
}
