mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn classimap<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_classimap"))
        .args(args)
        .output()
        .unwrap()
}

fn arg(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

/// Two well separated 2-D clusters written as a feature CSV.
fn clusters(dir: &TempDir) -> PathBuf {
    let path = dir.path().join("features.csv");
    let mut text = String::from("x,y,label\n");
    for i in 0..12 {
        let (cx, label) = if i % 2 == 0 { (0.0, "left") } else { (10.0, "right") };
        text.push_str(&format!(
            "{},{},{label}\n",
            cx + (i as f64 * 0.37).sin(),
            (i as f64 * 0.61).cos()
        ));
    }
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn map_writes_coordinates_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let input = clusters(&dir);
    let coords = dir.path().join("coords.csv");
    let trace = dir.path().join("trace.tsv");
    let out = classimap(&[
        "map",
        "--input",
        &arg(&input),
        "--epochs",
        "20",
        "--init",
        "mds",
        "--out-coords",
        &arg(&coords),
        "--out-trace",
        &arg(&trace),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = fs::read_to_string(&coords).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,x,y,label"));
    assert_eq!(lines.count(), 12);

    let trace = fs::read_to_string(&trace).unwrap();
    assert!(trace.contains("# method=classimap"));
    assert!(trace.contains("# init=mds"));
    let rows: Vec<&str> = trace.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "epoch\tlambda\tlearning_rate\ttotal_stress");
    assert_eq!(rows.len(), 21);
}

#[test]
fn eval_of_identity_map_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let input = clusters(&dir);
    // The features are already 2-D, so they are their own perfect map.
    let coords = dir.path().join("coords.csv");
    let features = fs::read_to_string(&input).unwrap();
    let mut text = String::from("index,x,y,label\n");
    for (i, line) in features.lines().skip(1).enumerate() {
        text.push_str(&format!("{i},{line}\n"));
    }
    fs::write(&coords, text).unwrap();

    let out = classimap(&["eval", "--input", &arg(&input), "--coords", &arg(&coords), "--k", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = String::from_utf8(out.stdout).unwrap();
    for expected in [
        "k=3",
        "trustworthiness=1.000000000000",
        "continuity=1.000000000000",
        "knn_accuracy=1.000000000000",
        "fn_within=0",
        "tear_between=0",
    ] {
        assert!(report.lines().any(|l| l == expected), "missing {expected} in\n{report}");
    }
}

#[test]
fn plot_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let input = clusters(&dir);
    let coords = dir.path().join("coords.csv");
    let svg = dir.path().join("map.svg");
    assert!(classimap(&[
        "map",
        "--input",
        &arg(&input),
        "--epochs",
        "5",
        "--out-coords",
        &arg(&coords)
    ])
    .status
    .success());
    let out = classimap(&[
        "plot",
        "--coords",
        &arg(&coords),
        "--out-svg",
        &arg(&svg),
        "--width",
        "300",
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.contains(r#"width="300""#));
    assert!(text.contains(">left</text>") && text.contains(">right</text>"));
}

#[test]
fn distance_matrix_input_with_labels() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("d.csv");
    let labels = dir.path().join("labels.txt");
    let coords = dir.path().join("coords.csv");
    fs::write(&matrix, "0,1,10,3\n1,0,1,2\n10,1,0,4\n3,2,4,0\n").unwrap();
    fs::write(&labels, "a\nb\na\nb\n").unwrap();
    let out = classimap(&[
        "map",
        "--input",
        &arg(&matrix),
        "--labels",
        &arg(&labels),
        "--normalize",
        "mean",
        "--out-coords",
        &arg(&coords),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (e, l) = classimap::io::read_embedding(&coords).unwrap();
    assert!(e.is_finite());
    assert_eq!(l.iter().collect::<Vec<_>>(), ["a", "b", "a", "b"]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let input = clusters(&dir);
    let coords = arg(&dir.path().join("coords.csv"));

    let bad_lambda = classimap(&[
        "map",
        "--input",
        &arg(&input),
        "--lambda-start",
        "1.5",
        "--out-coords",
        &coords,
    ]);
    assert_eq!(bad_lambda.status.code(), Some(1));
    assert_eq!(String::from_utf8_lossy(&bad_lambda.stderr).lines().count(), 1);

    assert_eq!(classimap(&["map", "--input", &arg(&input)]).status.code(), Some(1));
    assert_eq!(classimap(&["frobnicate"]).status.code(), Some(1));

    let missing = classimap(&["map", "--input", "/nonexistent.csv", "--out-coords", &coords]);
    assert_eq!(missing.status.code(), Some(2));

    let ragged = dir.path().join("ragged.csv");
    fs::write(&ragged, "x,y,label\n1,2,a\n3,b\n").unwrap();
    assert_eq!(
        classimap(&["map", "--input", &arg(&ragged), "--out-coords", &coords])
            .status
            .code(),
        Some(2)
    );

    assert!(
        classimap(&["map", "--input", &arg(&input), "--epochs", "3", "--out-coords", &coords])
            .status
            .success()
    );
    let big_k = classimap(&["eval", "--input", &arg(&input), "--coords", &coords, "--k", "6"]);
    assert_eq!(big_k.status.code(), Some(1));

    let other = dir.path().join("other.csv");
    fs::write(&other, "x,y,label\n0,0,a\n1,1,b\n").unwrap();
    let mismatch = classimap(&["eval", "--input", &arg(&other), "--coords", &coords]);
    assert_eq!(mismatch.status.code(), Some(2));

    assert_eq!(classimap(&["--help"]).status.code(), Some(0));
}

#[test]
fn seed_and_workers_reproduce_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = clusters(&dir);
    let run = |name: &str, workers: &str| {
        let coords = dir.path().join(name);
        let out = classimap(&[
            "map",
            "--input",
            &arg(&input),
            "--epochs",
            "30",
            "--seed",
            "3",
            "--workers",
            workers,
            "--out-coords",
            &arg(&coords),
        ]);
        assert!(out.status.success());
        fs::read(coords).unwrap()
    };
    let one = run("a.csv", "1");
    assert_eq!(one, run("b.csv", "1"));
    assert_eq!(one, run("c.csv", "3"));
}
