use proptest::prelude::*;
use qrom_lab::posw::{deserialize_proof, prove, serialize_proof, verify, Dag, Label, PoswParams, TableOracle, Vertex};
use qrom_lab::report::{render_csv, round_sig};
use serde_json::json;

fn params() -> impl Strategy<Value = (u32, u32, u32)> {
    (1u32..=4, 1u32..=3).prop_flat_map(|(n, t)| ((t * n).max(8)..=64u32).prop_map(move |w| (n, t, w)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn honest_proofs_verify_and_round_trip((n, t, w) in params(), seed in any::<u64>(), chi in any::<u64>()) {
        let params = PoswParams::new(n, t, w).unwrap();
        let chi = Label::from_u64(chi, w);
        let mut oracle = TableOracle::new(seed, w).unwrap();
        let proof = prove(&chi, &params, &mut oracle).unwrap();
        prop_assert!(verify(&chi, &params, &proof, &mut oracle).accepted());
        let bytes = serialize_proof(&proof);
        let label = w.div_ceil(8) as usize;
        prop_assert_eq!(bytes.len(), 10 + label * (1 + 2 * (n * t) as usize));
        prop_assert_eq!(deserialize_proof(&bytes).unwrap(), proof);
    }

    #[test]
    fn any_single_bit_flip_is_rejected((n, t, w) in params(), seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let params = PoswParams::new(n, t, w).unwrap();
        let chi = Label::from_u64(seed.rotate_left(7), w);
        let mut oracle = TableOracle::new(seed, w).unwrap();
        let proof = prove(&chi, &params, &mut oracle).unwrap();
        let slots = 1 + proof.tau.iter().map(Vec::len).sum::<usize>();
        let bit = pick.index(slots * w as usize);
        let (slot, b) = (bit / w as usize, (bit % w as usize) as u32);
        let mut bent = proof.clone();
        if slot == 0 {
            bent.phi.flip_bit(b, w);
        } else {
            let flat = slot - 1;
            let per = 2 * n as usize;
            bent.tau[flat / per][flat % per].flip_bit(b, w);
        }
        prop_assert!(!verify(&chi, &params, &bent, &mut oracle).accepted());
    }

    #[test]
    fn truncated_or_padded_proofs_fail_to_parse((n, t, w) in params(), cut in 1usize..40) {
        let params = PoswParams::new(n, t, w).unwrap();
        let chi = Label::from_u64(1, w);
        let proof = prove(&chi, &params, &mut TableOracle::new(0, w).unwrap()).unwrap();
        let bytes = serialize_proof(&proof);
        let short = &bytes[..bytes.len().saturating_sub(cut)];
        prop_assert!(deserialize_proof(short).is_err());
        let mut long = bytes.clone();
        long.extend(std::iter::repeat_n(0u8, cut));
        prop_assert!(deserialize_proof(&long).is_err());
    }

    #[test]
    fn authentication_paths_have_2n_entries(n in 1u32..=8, leaf in any::<u32>()) {
        let dag = Dag::new(n).unwrap();
        let v = Vertex::new(n, leaf & ((1 << n) - 1)).unwrap();
        let ap = dag.authentication_path(v).unwrap();
        prop_assert_eq!(ap.len(), 2 * n as usize);
        prop_assert!(!ap.contains(&Vertex::ROOT));
    }

    #[test]
    fn evaluation_order_respects_edges(n in 1u32..=6) {
        let dag = Dag::new(n).unwrap();
        let order = dag.evaluation_order();
        prop_assert_eq!(order.len(), (1usize << (n + 1)) - 1);
        for (i, v) in order.iter().enumerate() {
            for u in dag.in_neighbors(*v) {
                prop_assert!(order[..i].contains(&u));
            }
        }
    }

    #[test]
    fn rounding_is_idempotent(x in proptest::num::f64::NORMAL) {
        let once = round_sig(x, 12);
        prop_assert_eq!(round_sig(once, 12), once);
        prop_assert!((once - x).abs() <= x.abs() * 1e-11);
    }

    #[test]
    fn csv_has_one_row_per_record(rows in proptest::collection::vec((any::<i32>(), "[a-z,\"]{0,6}"), 1..20)) {
        let records: Vec<_> = rows.iter().map(|(a, s)| json!({"a": a, "s": s})).collect();
        let out = render_csv(&records).unwrap();
        let mut reader = csv::Reader::from_reader(out.as_bytes());
        prop_assert_eq!(reader.records().count(), records.len());
    }
}
