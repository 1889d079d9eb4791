//! Builds a database from a partial honest labelling, extracts the labelled
//! subtree and checks the extraction postconditions.

use qrom_lab::posw::{check_extract_lemma, check_leaves_lemma, compute_labeling, extract, Dag, Label, LabelDb, LabelQuery, TableOracle};

fn main() -> qrom_lab::Result<()> {
    let dag = Dag::new(3)?;
    let chi = Label::from_u64(0, 16);
    let mut oracle = TableOracle::new(5, 16)?;
    let (labels, _) = compute_labeling(&chi, 3, &mut oracle)?;
    let mut db = LabelDb::new();
    // Drop every query whose vertex sits under 01.
    for v in dag.vertices().filter(|v| !v.to_string().starts_with("01")) {
        let inputs = dag.in_neighbors(v).iter().map(|u| labels[u].clone()).collect();
        db.insert(LabelQuery::new(v, inputs), labels[&v].clone());
    }
    let phi = &labels[&qrom_lab::posw::Vertex::ROOT];
    let ext = extract(&db, &dag, phi);
    let leaves: Vec<String> = ext.leaves(&dag).iter().map(ToString::to_string).collect();
    println!("{} of {} queries kept; extracted leaves: {}", db.len(), dag.vertex_count(), leaves.join(" "));
    println!("postcondition violations: {:?}", check_extract_lemma(&db, &dag, phi));
    println!("leaves vs chain: {:?}", check_leaves_lemma(&db, &dag, phi));
    Ok(())
}
