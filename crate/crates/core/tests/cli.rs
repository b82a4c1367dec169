mod common;

use std::fs;
use std::process::{Command, Output};

use lineq::generator::read_jsonl;
use lineq::{axiom_table, verify, Expr, Proof};

const MOTIVATION_P1: &str = "( *s a ( +s ( *s 1 b ) ( *s 1 c ) ) )";
const MOTIVATION_P2: &str = "( +s ( *s a c ) ( *s a b ) )";
const MOTIVATION_PROOF: &str = "right left NeutralOp;right right NeutralOp;DistributeRight;Commute";

fn lineq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lineq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_motivation() {
    let o = lineq(&[
        "verify",
        "--p1",
        MOTIVATION_P1,
        "--p2",
        MOTIVATION_P2,
        "--proof",
        MOTIVATION_PROOF,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 5);
    assert_eq!(out.lines().last(), Some("PROVEN"));
}

#[test]
fn verify_reports_illegal_step() {
    let swapped = "right left NeutralOp;right right NeutralOp;Commute;DistributeRight";
    let o = lineq(&[
        "verify",
        "--p1",
        MOTIVATION_P1,
        "--p2",
        MOTIVATION_P2,
        "--proof",
        swapped,
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).lines().last().unwrap().starts_with("ILLEGAL 4"));
}

#[test]
fn prove_noncommuting_product_fails() {
    let o = lineq(&["prove", "--p1", "( *m A B )", "--p2", "( *m B A )"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("NOT PROVEN"));
}

#[test]
fn prove_output_reverifies() {
    for (a, b) in common::PROVABLE {
        let o = lineq(&["prove", "--p1", a, "--p2", b, "--beam", "10"]);
        assert_eq!(o.status.code(), Some(0), "{a}");
        let out = stdout(&o);
        let proof = out.lines().next().unwrap();
        let v = lineq(&["verify", "--p1", a, "--p2", b, "--proof", proof]);
        assert_eq!(v.status.code(), Some(0), "{a}: {proof}");
    }
}

#[test]
fn oracle_finds_shortest() {
    let o = lineq(&[
        "oracle",
        "--p1",
        "( +s a b )",
        "--p2",
        "( +s b a )",
        "--max-depth",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("Commute"));
    let o = lineq(&[
        "oracle",
        "--p1",
        "( *m A B )",
        "--p2",
        "( *m B A )",
        "--max-depth",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        lineq(&["prove", "--p1", "( +s a A )", "--p2", "a"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        lineq(&["verify", "--p1", "a", "--p2", "a", "--proof", "up Commute"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(lineq(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        lineq(&["prove", "--p1", "a", "--p2", "a", "--proposer", "oracle"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn axioms_csv() {
    let o = lineq(&["axioms"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("id,category,lhs,rhs"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), axiom_table().len());
    assert_eq!(rows[0], "1,Cancel,( -s ?a ?a ),0");
}

#[test]
fn census_csv() {
    let o = lineq(&["census"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("operator nodes,63,63"));
    assert!(out.contains("grandparent nodes,31,31"));
    assert!(out.contains("63*43+31*104=5933"));
}

#[test]
fn gen_is_deterministic_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.jsonl");
    let four = dir.path().join("four.jsonl");
    for (path, jobs) in [(&one, "1"), (&four, "4")] {
        let o = lineq(&[
            "gen",
            "--preset",
            "AxiomStep10",
            "--count",
            "300",
            "--seed",
            "17",
            "--out",
            path.to_str().unwrap(),
            "--jobs",
            jobs,
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let a = fs::read(&one).unwrap();
    assert_eq!(a, fs::read(&four).unwrap());
    let samples = read_jsonl(a.as_slice()).unwrap();
    assert_eq!(samples.len(), 300);
    assert!(samples
        .iter()
        .all(|s| verify(&s.p1, &s.p2, &s.proof).is_proven()));

    let o = lineq(&["stats", "--in", one.to_str().unwrap(), "--reach", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("category,Samples with (%)"));
    assert!(out.contains("Sample Node + Legal Axiom"));
}

#[test]
fn gen_reads_json_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"max_proof_len": 5, "max_nodes": 25, "max_depth": 6, "seed": 3}"#,
    )
    .unwrap();
    let out = dir.path().join("d.jsonl");
    let o = lineq(&[
        "gen",
        "--config",
        cfg.to_str().unwrap(),
        "--count",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let samples = read_jsonl(fs::read(&out).unwrap().as_slice()).unwrap();
    assert!(samples
        .iter()
        .all(|s| s.proof.len() <= 5 && s.p1.node_count() <= 25));

    fs::write(&cfg, r#"{"max_proof_len": 5, "colour": "red"}"#).unwrap();
    let o = lineq(&[
        "gen",
        "--config",
        cfg.to_str().unwrap(),
        "--count",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn export_src_tgt() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    fs::write(
        &data,
        format!(
            "{{\"p1\":\"{MOTIVATION_P1}\",\"p2\":\"{MOTIVATION_P2}\",\"proof\":[\"right left NeutralOp\",\"right right NeutralOp\",\"DistributeRight\",\"Commute\"],\"equivalent\":true}}\n"
        ),
    )
    .unwrap();
    let prefix = dir.path().join("out");
    let o = lineq(&[
        "export",
        "--in",
        data.to_str().unwrap(),
        "--format",
        "src-tgt",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let src = fs::read_to_string(dir.path().join("out.src")).unwrap();
    let tgt = fs::read_to_string(dir.path().join("out.tgt")).unwrap();
    assert_eq!(src, format!("{MOTIVATION_P1} | {MOTIVATION_P2}\n"));
    assert_eq!(
        tgt,
        "right left NeutralOp ; right right NeutralOp ; DistributeRight ; Commute\n"
    );

    let o = lineq(&[
        "export",
        "--in",
        data.to_str().unwrap(),
        "--out",
        prefix.to_str().unwrap(),
        "--expand",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let tgt = fs::read_to_string(dir.path().join("out.tgt")).unwrap();
    assert_eq!(tgt.lines().count(), 4);
    assert!(tgt.lines().all(|l| !l.contains(';')));
}

#[test]
fn external_proposer_round_trip() {
    let proposer = env!("CARGO_BIN_EXE_lineq-proposer");
    for (a, b) in common::PROVABLE {
        let o = lineq(&[
            "prove",
            "--p1",
            a,
            "--p2",
            b,
            "--proposer",
            &format!("external:{proposer}"),
        ]);
        assert_eq!(o.status.code(), Some(0), "{a}");
        let out = stdout(&o);
        let proof = Proof::parse(out.lines().next().unwrap()).unwrap();
        let (pa, pb) = (Expr::parse(a).unwrap(), Expr::parse(b).unwrap());
        assert!(verify(&pa, &pb, &proof).is_proven());
    }
    let o = lineq(&[
        "prove",
        "--p1",
        "( *m A B )",
        "--p2",
        "( *m B A )",
        "--proposer",
        &format!("external:{proposer}"),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn misbehaving_proposer_is_survived() {
    // answers every request with an illegal move; the search gives up cleanly
    let script = r#"while read line; do echo '{"proposals":[{"path":["left","left","left"],"category":"Cancel","score":1.0}]}'; done"#;
    let o = lineq(&[
        "prove",
        "--p1",
        "( +s a b )",
        "--p2",
        "( +s b a )",
        "--proposer",
        &format!("external:{script}"),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("NOT PROVEN"));
}

#[test]
fn random_proposer_is_seeded() {
    let run = |seed: &str| {
        stdout(&lineq(&[
            "prove",
            "--p1",
            MOTIVATION_P1,
            "--p2",
            MOTIVATION_P2,
            "--proposer",
            "random",
            "--seed",
            seed,
            "--beam",
            "5",
        ]))
    };
    assert_eq!(run("4"), run("4"));
}
