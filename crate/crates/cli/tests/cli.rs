use std::path::PathBuf;
use std::process::{Command, Output};

use modalkit::semantics::{eval, KripkeModel, ModelDocument};
use modalkit::syntax::parse;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modalkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn temp_file(name: &str, body: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("modalkit-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, body).expect("temp dir is writable");
    path
}

#[test]
fn decide_exit_codes() {
    assert_eq!(run(&["decide", "--phi", "!(p0 & !p0)"]).status.code(), Some(0));
    assert_eq!(run(&["decide", "--phi", "[]p0 -> [][]p0", "--sigma", "4"]).status.code(), Some(0));
    assert_eq!(run(&["decide", "--phi", "[]([]p0 -> p0) -> []p0", "--gl"]).status.code(), Some(0));
    assert_eq!(run(&["decide", "--phi", "[]p0 -> p0"]).status.code(), Some(1));
    assert_eq!(run(&["decide", "--phi", "<>p0", "--mode", "sat"]).status.code(), Some(0));
    assert_eq!(run(&["decide", "--phi", "p0 &"]).status.code(), Some(2));
    assert_eq!(run(&["decide", "--phi", "p0", "--sigma", "T,L"]).status.code(), Some(2));
}

#[test]
fn emitted_countermodel_reverifies() {
    let phi = "[]([]p0 -> p0) -> []p0";
    let out = run(&["decide", "--phi", phi, "--emit", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["verdict"], "invalid");
    let world = report["witness"]["world"].as_u64().unwrap() as usize;
    let doc: ModelDocument = serde_json::from_value(report["witness"]["model"].clone()).unwrap();
    let (frame, val) = doc.to_frame_and_valuation().unwrap();
    let f = parse(phi).unwrap();
    let model = KripkeModel::for_formulas(&frame, &val, [&f]).unwrap();
    assert_eq!(eval(&model, world, &f), Ok(false));
}

#[test]
fn model_and_canonical() {
    let out = run(&["model", "--phi", "p0", "--sigma", "T", "--emit", "dot"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("w0 -> w0;"));
    let out = run(&["model", "--phi", "<>p0 & []!p0", "--sigma", "T"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["canonical", "--h", "2", "--n", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2^64·4"));
    let out = run(&["canonical", "--h", "1", "--n", "1", "--sigma", "T"]);
    assert_eq!(stdout(&out).lines().count(), 64);
}

#[test]
fn translate_oracle_parse() {
    let out = run(&["translate", "--phi", "[]p0", "--var", "w"]);
    assert_eq!(stdout(&out).trim(), "∀y0 (r(w, y0) → P0(y0))");
    let out = run(&["translate", "--sigma", "T,4", "--conditions"]);
    assert_eq!(stdout(&out).lines().count(), 2);
    let out = run(&["oracle", "--phi", "[]p0 -> p0", "--sigma", "T", "--max-worlds", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["parse", "--phi", "<>p0"]);
    assert_eq!(stdout(&out), "<>p0\nheight 1 order 0\n");
    let a = run(&["parse", "--random", "--seed", "3"]);
    let b = run(&["parse", "--random", "--seed", "3"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn prove_check_files() {
    let proof = temp_file(
        "nec.json",
        r#"{"sigma":["T"],"gamma":[],"lines":[
            {"f":"[]p0 -> p0","j":{"kind":"SigmaAxiom","ax":"T"}},
            {"f":"[]([]p0 -> p0)","j":{"kind":"Necessitation","i":0}}]}"#,
    );
    let path = proof.to_str().unwrap();
    assert_eq!(run(&["prove-check", "--proof", path]).status.code(), Some(0));
    assert_eq!(run(&["prove-check", "--proof", path, "--sigma", "4"]).status.code(), Some(1));
    assert_eq!(run(&["prove-check", "--proof", path, "--phi", "[]p0 -> p0"]).status.code(), Some(0));
    assert_eq!(run(&["prove-check", "--proof", path, "--phi", "p0"]).status.code(), Some(1));

    let premise = temp_file(
        "premise.json",
        r#"{"lines":[{"f":"p0","j":{"kind":"Premise"}},{"f":"[]p0","j":{"kind":"Necessitation","i":0}}]}"#,
    );
    let gamma = temp_file("gamma.json", r#"["p0"]"#);
    let premise_path = premise.to_str().unwrap();
    assert_eq!(run(&["prove-check", "--proof", premise_path]).status.code(), Some(1));
    let with_gamma = run(&["prove-check", "--proof", premise_path, "--gamma", gamma.to_str().unwrap()]);
    assert_eq!(with_gamma.status.code(), Some(0));
    assert_eq!(run(&["prove-check", "--proof", "/nonexistent/proof.json"]).status.code(), Some(2));
    for p in [proof, premise, gamma] {
        let _ = std::fs::remove_file(p);
    }
}
