use std::fs;
use std::path::Path;

use udm::format::{parse_family, render_family};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = udm::cli::run(
        std::iter::once("udm").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn generate(dir: &Path, q: u32, channels: usize, n: usize) -> String {
    let path = dir.join(format!("g{q}_{channels}_{n}.udm"));
    let p = path.to_str().unwrap().to_string();
    let (code, _, err) = run(&[
        "generate",
        "--q",
        &q.to_string(),
        "--L",
        &channels.to_string(),
        "--n",
        &n.to_string(),
        "--out",
        &p,
    ]);
    assert_eq!(code, 0, "{err}");
    p
}

#[test]
fn generate_prints_summary_and_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ex.udm");
    let (code, out, _) = run(&[
        "generate",
        "--q",
        "3",
        "--L",
        "4",
        "--n",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("alpha = 2"));
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("matrix 3\n1 2 1\n0 1 1\n0 0 1\n"));
}

#[test]
fn generate_to_stdout_is_the_file() {
    let (code, out, _) = run(&["generate", "--q", "4", "--L", "2", "--n", "5"]);
    assert_eq!(code, 0);
    let fam = parse_family(&out).unwrap();
    assert!(fam.matrix(0).is_identity());
    assert_eq!(
        fam.matrix(1),
        &udm::FieldMatrix::anti_identity(fam.field(), 5)
    );
    assert_eq!(render_family(&fam), out);
}

#[test]
fn generate_rejects_bad_parameters() {
    let (code, _, err) = run(&["generate", "--q", "2", "--L", "4", "--n", "2"]);
    assert_eq!(code, 2);
    assert!(err.contains("q+1"));
    let (code, _, _) = run(&["generate", "--q", "6", "--L", "2", "--n", "2"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["generate", "--q", "3"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("generate"));
}

#[test]
fn verify_pass_fail_and_superset() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), 3, 4, 3);
    let (code, out, _) = run(&["verify", "--in", &p]);
    assert_eq!((code, out.trim()), (0, "PASS (20 tuples)"));
    let (code, out, _) = run(&["verify", "--in", &p, "--superset", "--parallel"]);
    assert_eq!(code, 0);
    let count: usize = out
        .trim()
        .trim_start_matches("PASS (")
        .trim_end_matches(" tuples)")
        .parse()
        .unwrap();
    assert!(count > 20);

    let text = fs::read_to_string(&p)
        .unwrap()
        .replace("matrix 2\n1 1 1\n", "matrix 2\n0 0 0\n");
    let bad = dir.path().join("bad.udm");
    fs::write(&bad, text).unwrap();
    let (code, out, err) = run(&["verify", "--in", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.starts_with("FAIL at k=(0,0,1,2): rank 2 < 3"), "{out}");
    assert!(out.contains("0 0 0"));
    assert!(err.contains("not UDMs"));

    let garbage = dir.path().join("garbage.udm");
    fs::write(&garbage, "UDMv1\nfield q=3^1\nL two\n").unwrap();
    let (code, _, _) = run(&["verify", "--in", garbage.to_str().unwrap()]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&[
        "verify",
        "--in",
        dir.path().join("missing").to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn transform_operations() {
    let dir = tempfile::tempdir().unwrap();
    let ex = generate(dir.path(), 3, 4, 3);
    let out = dir.path().join("t.udm");
    let o = out.to_str().unwrap();

    let (code, stdout, _) = run(&[
        "transform",
        "--in",
        &ex,
        "--op",
        "tensor",
        "--m",
        "2",
        "--out",
        o,
        "--then-verify",
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("PASS (220 tuples)"));
    assert_eq!(
        parse_family(&fs::read_to_string(&out).unwrap())
            .unwrap()
            .block_len(),
        9
    );

    let big = generate(dir.path(), 5, 6, 4);
    let small = generate(dir.path(), 5, 6, 3);
    let (code, _, _) = run(&["transform", "--in", &big, "--op", "reduce", "--out", o]);
    assert_eq!(code, 0);
    let reduced = parse_family(&fs::read_to_string(&out).unwrap()).unwrap();
    let expected = parse_family(&fs::read_to_string(&small).unwrap()).unwrap();
    assert_eq!(reduced.matrices(), expected.matrices());

    let (code, stdout, _) = run(&["transform", "--in", &ex, "--op", "reverse-pairs"]);
    assert_eq!(code, 0);
    let rev = parse_family(&stdout).unwrap();
    let j = udm::FieldMatrix::anti_identity(rev.field(), 3);
    assert_eq!(rev.matrix(1), &j.matmul(rev.matrix(0)).unwrap());
    assert_eq!(rev.matrix(3), &j.matmul(rev.matrix(2)).unwrap());

    let (code, _, _) = run(&[
        "transform",
        "--in",
        &ex,
        "--op",
        "right-mul",
        "--matrix",
        "1 2 0;0 1 0;0 0 2",
        "--then-verify",
    ]);
    assert_eq!(code, 0);
    let (code, _, _) = run(&[
        "transform",
        "--in",
        &ex,
        "--op",
        "right-mul",
        "--matrix",
        "1 1 0;1 1 0;0 0 1",
    ]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&[
        "transform",
        "--in",
        &ex,
        "--op",
        "left-tri",
        "--index",
        "2",
        "--matrix",
        "2 0 0;1 1 0;0 2 1",
        "--then-verify",
    ]);
    assert_eq!(code, 0);
    let (code, _, _) = run(&[
        "transform",
        "--in",
        &ex,
        "--op",
        "left-tri",
        "--index",
        "2",
        "--matrix",
        "1 1 0;0 1 0;0 0 1",
    ]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["transform", "--in", &ex, "--op", "tensor"]);
    assert_eq!(code, 2);
    let rev_path = dir.path().join("rev.udm");
    fs::write(&rev_path, &stdout).unwrap();
    let (code, _, err) = run(&[
        "transform",
        "--in",
        rev_path.to_str().unwrap(),
        "--op",
        "reduce",
    ]);
    assert_eq!(code, 2, "reverse-paired family is not normalized");
    assert!(err.contains("normalized"));
}

#[test]
fn codec_commands() {
    let dir = tempfile::tempdir().unwrap();
    let ex = generate(dir.path(), 3, 4, 3);
    let (code, out, _) = run(&[
        "codec",
        "roundtrip",
        "--in",
        &ex,
        "--u",
        "1 0 0",
        "--k",
        "0 0 1 2",
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("PASS"));

    let (code, out, _) = run(&["codec", "encode", "--in", &ex, "--u", "0 0 0"]);
    assert_eq!(code, 0);
    assert_eq!(out, "k=3: 0 0 0\n".repeat(4));

    let (code, out, _) = run(&[
        "codec",
        "encode",
        "--in",
        &ex,
        "--u",
        "2 1 1",
        "--k",
        "1,0,1,1",
        "--show-erasures",
    ]);
    assert_eq!(code, 0);
    let obs = dir.path().join("obs.txt");
    fs::write(&obs, &out).unwrap();
    let (code, out, _) = run(&[
        "codec",
        "decode",
        "--in",
        &ex,
        "--obs",
        obs.to_str().unwrap(),
    ]);
    assert_eq!((code, out.as_str()), (0, "2 1 1\n"));

    fs::write(&obs, "k=1: 2\nk=0:\nk=1: 1\nk=0:\n").unwrap();
    let (code, _, err) = run(&[
        "codec",
        "decode",
        "--in",
        &ex,
        "--obs",
        obs.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("insufficient symbols"));

    fs::write(&obs, "k=1: 2\nk=0:\nk=1: x\nk=0:\n").unwrap();
    let (code, _, _) = run(&[
        "codec",
        "decode",
        "--in",
        &ex,
        "--obs",
        obs.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);

    let (code, out, _) = run(&[
        "codec",
        "roundtrip",
        "--in",
        &ex,
        "--u",
        "1 0 0",
        "--k",
        "1 0 1 0",
    ]);
    assert_eq!(code, 1);
    assert!(out.starts_with("FAIL"));
    let (code, _, _) = run(&[
        "codec",
        "roundtrip",
        "--in",
        &ex,
        "--u",
        "1 0",
        "--k",
        "1 0 1 1",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn simulate_command_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let ex = generate(dir.path(), 3, 4, 3);
    let args = ["simulate", "--in", &ex, "--trials", "2000", "--seed", "9"];
    let (code, a, _) = run(&args);
    assert_eq!(code, 0);
    let (_, b, _) = run(&args);
    assert_eq!(a, b);
    assert!(a.contains("wrong decodes: 0"));
    let (code, out, _) = run(&[
        "simulate",
        "--in",
        &ex,
        "--trials",
        "300",
        "--pattern",
        "exact",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("success rate: 1.000000"));
    let (code, out, _) = run(&[
        "simulate",
        "--in",
        &ex,
        "--trials",
        "50",
        "--pattern",
        "fixed",
        "--k",
        "0 1 1 0",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("failures (insufficient symbols): 50"));
    let (code, _, _) = run(&["simulate", "--in", &ex, "--pattern", "fixed"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&[
        "simulate",
        "--in",
        &ex,
        "--pattern",
        "geometric",
        "--erasure-prob",
        "0.2",
        "--trials",
        "100",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn oracle_commands() {
    let (code, out, _) = run(&["oracle", "hasse", "--q", "3", "--L", "4", "--n", "3"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("PASS: 36 entries compared"), "{out}");
    let (code, out, _) = run(&["oracle", "lucas", "--q", "4", "--L", "5", "--n", "6"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("PASS"));
    let (code, out, _) = run(&["oracle", "delta", "--q", "3", "--n", "3"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("PASS"));
    let (code, out, _) = run(&["oracle", "bound", "--q", "2", "--n", "2"]);
    assert_eq!(code, 0);
    assert!(
        out.starts_with("no (4,2,2)-UDMs exist; 256 candidates pruned to"),
        "{out}"
    );
    let (code, out, _) = run(&["oracle", "bound", "--q", "2", "--n", "2", "--L", "3"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("2 (3,2,2)-UDMs found"));
    let (code, _, err) = run(&["oracle", "bound", "--q", "5", "--n", "3"]);
    assert_eq!(code, 2);
    assert!(err.contains("budget"));
    let (code, _, _) = run(&["oracle", "hasse", "--q", "2", "--L", "4", "--n", "2"]);
    assert_eq!(code, 2);
}

#[test]
fn generated_files_round_trip_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    for (q, channels, n) in [
        (2, 3, 4),
        (3, 4, 3),
        (4, 5, 2),
        (7, 8, 3),
        (9, 10, 2),
        (8, 9, 1),
    ] {
        let p = generate(dir.path(), q, channels, n);
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(render_family(&parse_family(&text).unwrap()), text);
    }
}
