//! Drives the command-line front end in process and writes a JSON report and
//! its CSV rendering to a temporary directory.

fn main() {
    let dir = std::env::temp_dir().join("qrom-lab-example");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let json = dir.join("bounds.json");
    let csv = dir.join("bounds.csv");
    let json_s = json.to_str().expect("utf-8 path");
    let code = qrom_lab::cli::dispatch(["qrom-lab", "bounds", "--problem", "chain", "--T", "2", "--sweep", "q=1..4", "--out", json_s]);
    assert_eq!(code, 0);
    let code = qrom_lab::cli::dispatch(["qrom-lab", "report", "--in", json_s, "--out", csv.to_str().expect("utf-8 path")]);
    assert_eq!(code, 0);
    print!("{}", std::fs::read_to_string(&csv).expect("csv written"));
}
