//! End-to-end runs of the command-line interface.

use std::fs;
use std::path::Path;

use netgrowth::cli::run_cli;
use netgrowth::fixtures::worked_example_log;
use netgrowth::io::render_log;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_cli(
        std::iter::once("netgrowth").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn evaluate_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("ex.log");
    fs::write(&log, render_log(&worked_example_log())).unwrap();
    let (code, out, err) = run(&[
        "evaluate",
        "--log",
        p(&log),
        "--newnode",
        "degree",
        "--inneredge",
        "degree",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("1.7321"), "{out}");
    let (code, out, _) = run(&[
        "evaluate",
        "--log",
        p(&log),
        "--newnode",
        "degree",
        "--format",
        "machine",
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("format-version\t1\n"));
    let c0: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("overall.c0\t"))
        .unwrap()
        .parse()
        .unwrap();
    assert!((c0 - 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn evaluate_model_file_and_bad_specs() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("ex.log");
    fs::write(&log, render_log(&worked_example_log())).unwrap();
    let model = dir.path().join("model.txt");
    fs::write(&model, "newnode: 0.5*degree+0.5*null\ninneredge: null\n").unwrap();
    assert_eq!(
        run(&["evaluate", "--log", p(&log), "--model", p(&model)]).0,
        0
    );
    let (code, _, err) = run(&[
        "evaluate",
        "--log",
        p(&log),
        "--newnode",
        "0.6*degree+0.6*null",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("1.2"), "{err}");
    assert_eq!(
        run(&[
            "evaluate",
            "--log",
            p(&log),
            "--newnode",
            "degree",
            "--model",
            p(&model)
        ])
        .0,
        2
    );
    assert_eq!(run(&["evaluate", "--log", p(&log)]).0, 2);
    assert_eq!(
        run(&[
            "evaluate",
            "--log",
            p(&log),
            "--newnode",
            "degree",
            "--from",
            "3",
            "--to",
            "9"
        ])
        .0,
        1
    );
}

#[test]
fn grow_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (
        dir.path().join("a.log"),
        dir.path().join("b.log"),
        dir.path().join("c.log"),
    );
    let args = |out: &Path| {
        vec![
            "grow",
            "--seed-edge",
            "--newnode",
            "null",
            "--target-edges",
            "100",
            "--rng",
            "7",
            "--out",
        ]
        .into_iter()
        .map(str::to_owned)
        .chain([p(out).to_owned()])
        .collect::<Vec<_>>()
    };
    for path in [&a, &b] {
        let argv = args(path);
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        assert_eq!(run(&argv).0, 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let (code, _, _) = run(&[
        "grow",
        "--seed-edge",
        "--newnode",
        "null",
        "--target-edges",
        "100",
        "--rng",
        "8",
        "--out",
        p(&c),
    ]);
    assert_eq!(code, 0);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn grow_with_manifest_outer_model_and_log_seed() {
    let dir = tempfile::tempdir().unwrap();
    let base = dir.path().join("base.log");
    let manifest = dir.path().join("run.manifest");
    let grown = dir.path().join("grown.log");
    assert_eq!(
        run(&[
            "grow",
            "--seed-edge",
            "--newnode",
            "degree",
            "--attach",
            "1:1,2:1",
            "--inner-per-arrival",
            "1",
            "--target-edges",
            "300",
            "--rng",
            "1",
            "--out",
            p(&base)
        ])
        .0,
        0
    );
    let (code, _, err) = run(&[
        "grow",
        "--seed-log",
        p(&base),
        "--seed-events",
        "50",
        "--outer-from",
        p(&base),
        "--newnode",
        "pfp(0.1)",
        "--inneredge",
        "degree",
        "--target-edges",
        "600",
        "--rng",
        "2",
        "--out",
        p(&grown),
        "--manifest",
        p(&manifest),
    ]);
    assert_eq!(code, 0, "{err}");
    let m = fs::read_to_string(&manifest).unwrap();
    assert!(
        m.contains("rng.seed\t2\n") && m.contains("rng.algorithm\t") && m.contains("edges\t600\n"),
        "{m}"
    );
    assert!(m.contains("seed\tlog-prefix 50\n"));
    let (code, out, _) = run(&["stats", "--graph", p(&grown), "--format", "machine"]);
    assert_eq!(code, 0);
    assert!(out.contains("row0.edges\t600\n"));
}

#[test]
fn stats_of_k3() {
    let dir = tempfile::tempdir().unwrap();
    let k3 = dir.path().join("k3.log");
    fs::write(&k3, "1 2\n2 3\n3 1\n").unwrap();
    let (code, out, _) = run(&["stats", "--graph", p(&k3)]);
    assert_eq!(code, 0);
    let row = out.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(fields[0], "k3.log");
    assert_eq!(fields[8], "undefined");
    assert_eq!(fields[9], "1.00");
}

#[test]
fn preprocess_is_idempotent_and_reports_counts() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.txt");
    fs::write(&raw, "5 a b\n6 c d\n6 b a\n7 b c\n7 x x\n8 e f\n").unwrap();
    let (once, twice) = (dir.path().join("once.log"), dir.path().join("twice.log"));
    let (code, out, err) = run(&[
        "preprocess",
        "--input",
        p(&raw),
        "--format",
        "timestamped",
        "--seed-before",
        "7",
        "--out",
        p(&once),
    ]);
    assert_eq!(code, 0, "{err}");
    for needle in [
        "duplicates\t1\n",
        "self_loops\t1\n",
        "delayed\t2\n",
        "unplaced\t1\n",
        "seed_size\t1\n",
    ] {
        assert!(out.contains(needle), "{needle} missing from {out}");
    }
    assert!(err.contains("unplaced edge: e f"));
    assert_eq!(
        run(&["preprocess", "--input", p(&once), "--out", p(&twice)]).0,
        0
    );
    assert_eq!(fs::read(&once).unwrap(), fs::read(&twice).unwrap());
    assert_eq!(
        fs::read_to_string(&once).unwrap(),
        "# netgrowth-log format-version 1\n# seed_size 1\na b\nc b\nd c\n"
    );

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "a b\nthree fields here\n").unwrap();
    let (code, _, err) = run(&["preprocess", "--input", p(&bad), "--out", p(&twice)]);
    assert_eq!(code, 1);
    assert!(err.contains(":2:"), "{err}");
    assert_eq!(
        run(&[
            "preprocess",
            "--input",
            p(&bad),
            "--out",
            p(&twice),
            "--lenient"
        ])
        .0,
        0
    );
}

#[test]
fn evaluate_rejects_unnormalised_logs() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.txt");
    fs::write(&raw, "a b\nc d\nb c\n").unwrap();
    let (code, _, err) = run(&["evaluate", "--log", p(&raw), "--newnode", "degree"]);
    assert_eq!(code, 1);
    assert!(err.contains("preprocess"), "{err}");
}

#[test]
fn fit_and_scan_commands() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("g.log");
    let model = dir.path().join("fitted.txt");
    assert_eq!(
        run(&[
            "grow",
            "--seed-edge",
            "--newnode",
            "0.7*degree+0.3*null",
            "--inner-per-arrival",
            "1",
            "--target-edges",
            "4000",
            "--rng",
            "5",
            "--out",
            p(&log)
        ])
        .0,
        0
    );
    let (code, out, err) = run(&[
        "fit",
        "--log",
        p(&log),
        "--components",
        "degree,null",
        "--model-out",
        p(&model),
        "--format",
        "machine",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("new_node.degree.beta\t") && out.contains("rng.seed\t0\n"));
    let fitted = fs::read_to_string(&model).unwrap();
    assert!(fitted.starts_with("newnode: ") && fitted.contains("\ninneredge: "));
    assert_eq!(
        run(&["evaluate", "--log", p(&log), "--model", p(&model)]).0,
        0
    );
    let (code, out, _) = run(&[
        "fit",
        "--log",
        p(&log),
        "--components",
        "degree,null",
        "--negatives",
        "5",
        "--rng",
        "3",
        "--stream",
        "newnode",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("negatives were sampled"));

    let (code, out, err) = run(&[
        "scan",
        "--log",
        p(&log),
        "--template",
        "pfp(0)",
        "--lo",
        "-0.5",
        "--hi",
        "0.5",
        "--refine",
        "1",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("best delta"));
    assert_eq!(
        run(&["scan", "--log", p(&log), "--template", "degree"]).0,
        1
    );
    assert_eq!(
        run(&["fit", "--log", p(&log), "--components", "degree,bogus"]).0,
        1
    );
    assert_eq!(
        run(&[
            "fit",
            "--log",
            p(&log),
            "--components",
            "degree",
            "--negatives",
            "3",
            "--exhaustive"
        ])
        .0,
        2
    );
}
