use std::path::PathBuf;

use predkit::{run, RunReport, EXIT_HOLDS, EXIT_INPUT, EXIT_NONCONVERGENT, EXIT_NOT_SHOWN, EXIT_USAGE};

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("../../fixtures");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn argv(args: &[&str]) -> Vec<String> {
    std::iter::once("predkit").chain(args.iter().copied()).map(String::from).collect()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const COUNTER: &str = "var x : int; init x = 0; transition inc: true -> x' = x + 1;";

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(&dir, "c.pm", COUNTER);
    assert_eq!(run(argv(&["check", "--model", &m, "--prop", "AG(x >= 0)"])), EXIT_HOLDS);
    assert_eq!(run(argv(&["check", "--model", &m, "--prop", "AG(x <= 3)"])), EXIT_NOT_SHOWN);
    assert_eq!(
        run(argv(&["check", "--model", &m, "--prop", "AG(x != -1)", "--max-iter", "5", "--widen-after", "0"])),
        EXIT_NONCONVERGENT
    );
    assert_eq!(run(argv(&["check", "--model", &m, "--bogus"])), EXIT_USAGE);
    assert_eq!(run(argv(&["frobnicate"])), EXIT_USAGE);
    assert_eq!(run(argv(&["check", "--model", "/nonexistent.pm", "--prop", "AG(true)"])), EXIT_INPUT);
    let bad = write(&dir, "bad.pm", "var x : int; transition t: x' = 1;");
    assert_eq!(run(argv(&["check", "--model", &bad, "--prop", "AG(true)"])), EXIT_INPUT);
    assert_eq!(run(argv(&["check", "--model", &m, "--prop", "AG(q)"])), EXIT_INPUT);
    assert_eq!(run(argv(&["--help"])), 0);
}

#[test]
fn abstracted_check_with_a_predicate_file() {
    let dir = tempfile::tempdir().unwrap();
    let preds = write(&dir, "z.preds", "// ticket\nz = 1\nz < 1\n");
    let t = fixture("ticket.pm");
    let code = run(argv(&["check", "--model", &t, "--n", "2", "--prop", "AG(z <= 1)", "--preds", &preds]));
    assert_eq!(code, EXIT_HOLDS);
    assert_eq!(run(argv(&["abstract", "--model", &t, "--n", "2", "--preds", &preds])), 0);
}

fn report_of(dir: &tempfile::TempDir, name: &str, args: &[&str]) -> (i32, RunReport) {
    let out = dir.path().join(name);
    let mut all: Vec<&str> = args.to_vec();
    let out_s = out.to_string_lossy().into_owned();
    all.extend(["--emit", &out_s]);
    let code = run(argv(&all));
    let text = std::fs::read_to_string(&out).unwrap();
    (code, serde_json::from_str(&text).unwrap())
}

#[test]
fn reports_are_deterministic_apart_from_timings() {
    let dir = tempfile::tempdir().unwrap();
    let t = fixture("ticket.pm");
    let args = ["trlimp", "--model", &t, "--n", "2", "--prop", "AG(z <= 1)"];
    let (c1, mut r1) = report_of(&dir, "a.json", &args);
    let (c2, mut r2) = report_of(&dir, "a.json", &args);
    assert_eq!((c1, c2), (0, 0));
    assert!(!r1.timings.is_empty());
    r1.timings.clear();
    r2.timings.clear();
    assert_eq!(r1, r2);
    let scores = r1.scores.as_ref().unwrap();
    assert_eq!(scores.individual.len(), r1.predicates.len());
    assert_eq!(r1.model_sha256.len(), 64);
}

#[test]
fn report_round_trip_and_rendering() {
    let dir = tempfile::tempdir().unwrap();
    let t = fixture("ticket.pm");
    let (code, r) = report_of(
        &dir,
        "c.json",
        &["compat", "--model", &t, "--small-n", "2", "--prop", "AG(z <= 1)", "--jobs", "2"],
    );
    assert_eq!(code, 0);
    let json = serde_json::to_string(&r).unwrap();
    let back: RunReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, r);
    let compat = r.compat.as_ref().unwrap();
    let n = r.predicates.len();
    assert_eq!(compat.matrix.len(), n);
    assert_eq!(compat.pairs.len(), n * (n - 1) / 2);
    let text = predkit::render(&r);
    assert!(text.contains("compatibility:"));
    assert!(text.contains('✓'));
    assert!(text.contains("chosen:"));
    let path = dir.path().join("c.json");
    assert_eq!(run(argv(&["report", &path.to_string_lossy()])), 0);
}

#[test]
fn choose_without_feasible_config() {
    let dir = tempfile::tempdir().unwrap();
    // the only candidate is imprecise and scope exclusion removes it
    let m = write(
        &dir,
        "two.pm",
        "var r : int; var pc1, pc2 : {a, c};
         relation t1: pc1 = a & r = 0 & r' = r + 1 & pc1' = c & pc2' = pc2;
         relation t2: pc2 = a & r = 0 & r' = r + 1 & pc2' = c & pc1' = pc1;",
    );
    let preds = write(&dir, "p", "r <= 1\n");
    let code = run(argv(&["trlimp", "--model", &m, "--preds", &preds]));
    assert_eq!(code, EXIT_NOT_SHOWN);
}
