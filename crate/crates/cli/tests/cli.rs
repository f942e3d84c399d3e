use std::path::Path;
use std::process::{Command, Output};

fn ssg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ssg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// The `order` column of a quotient table.
fn orders(o: &Output) -> Vec<String> {
    stdout(o)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().to_string())
        .collect()
}

#[test]
fn quotient_orders() {
    let o = ssg(&["quotient", "--group", "grigorchuk", "--levels", "1..3", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(orders(&o), ["2", "8", "128"]);
    let o = ssg(&["quotient", "--group", "adding_machine", "--levels", "1..4", "--format", "csv"]);
    assert_eq!(orders(&o), ["2", "4", "8", "16"]);
}

#[test]
fn trivial_custom_group() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trivial.json");
    std::fs::write(
        &path,
        r#"{"alphabet_size": 2, "generators": [{"name": "e1", "perm": [1, 2], "sections": ["e1", "e1"]}]}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let o = ssg(&["quotient", "--system", p, "--levels", "1..4", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(orders(&o), ["1", "1", "1", "1"]);
}

#[test]
fn exit_codes() {
    let pass = ssg(&["verify", "branching-lemma", "--group", "grigorchuk"]);
    assert_eq!(pass.status.code(), Some(0));
    let fail = ssg(&["verify", "branching-lemma", "--group", "grigorchuk", "--m", "0", "--levels", "4"]);
    assert_eq!(fail.status.code(), Some(1));
    assert!(stdout(&fail).contains("witness"));
    let inconclusive = ssg(&["tower", "--group", "grigorchuk", "--quotient-limit", "10"]);
    assert_eq!(inconclusive.status.code(), Some(2));
    assert_eq!(ssg(&["quotient", "--group", "nope", "--levels", "1"]).status.code(), Some(3));
    assert_eq!(ssg(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(ssg(&["quotient", "--group", "grigorchuk", "--levels", "3..1"]).status.code(), Some(3));
    assert_eq!(ssg(&["--help"]).status.code(), Some(0));
}

#[test]
fn samestabs_and_dihedral() {
    let o = ssg(&["verify", "samestabs", "--group", "grigorchuk", "--n", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let o = ssg(&["dihedral", "--n", "4", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let row = stdout(&o).lines().last().unwrap().to_string();
    assert_eq!(row.split(',').nth(3), Some("3"));
}

fn replay_code(path: &Path) -> Option<i32> {
    ssg(&["replay", path.to_str().unwrap()]).status.code()
}

#[test]
fn reports_repeat_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = ["adding-machine", "--n", "6", "--xs", "0,1,-1,5", "--out", a.to_str().unwrap()];
    assert_eq!(ssg(&args).status.code(), Some(0));
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(ssg(&args).status.code(), Some(0));
    assert_eq!(text, std::fs::read_to_string(&a).unwrap());
    assert_eq!(replay_code(&a), Some(0));
    let o = ssg(&["--replay", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));

    // a stored flag that no longer recomputes
    let mut report: serde_json::Value = serde_json::from_str(&text).unwrap();
    report["result"]["members"][0]["inverts_tau"] = serde_json::Value::Bool(false);
    std::fs::write(&b, serde_json::to_string_pretty(&report).unwrap() + "\n").unwrap();
    assert_eq!(replay_code(&b), Some(1));

    // a certificate with a wrong order
    let c = dir.path().join("c.json");
    let o = ssg(&["verify", "samestabs", "--group", "grigorchuk", "--out", c.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let mut report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&c).unwrap()).unwrap();
    report["result"]["certificates"][0]["lhs_order"] = serde_json::Value::String("1023".into());
    std::fs::write(&c, serde_json::to_string_pretty(&report).unwrap() + "\n").unwrap();
    let o = ssg(&["replay", c.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("does not replay"));
}

#[test]
fn csv_reports_replay() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.csv");
    let o = ssg(&[
        "quotient", "--group", "gupta_sidki", "--p", "3", "--levels", "1..3", "--format", "csv",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(replay_code(&path), Some(0));
    let text = std::fs::read_to_string(&path).unwrap().replace(",true", ",false");
    std::fs::write(&path, text).unwrap();
    assert_eq!(replay_code(&path), Some(1));
}

#[test]
fn law_checks_follow_the_seed() {
    let a = ssg(&["verify", "laws", "--count", "100", "--seed", "9"]);
    let b = ssg(&["verify", "laws", "--count", "100", "--seed", "9"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("\"seed\": 9"));
}

#[test]
fn catalog_show_emits_a_loadable_system() {
    let o = ssg(&["catalog", "show", "--group", "gupta_sidki", "--p", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let system = serde_json::to_string(&report["result"]["system"]).unwrap();
    assert!(ssg_core::recursion::parse_system(&system).is_ok());
    let o = ssg(&["catalog", "list"]);
    assert!(stdout(&o).contains("fabrykowski_gupta"));
}
