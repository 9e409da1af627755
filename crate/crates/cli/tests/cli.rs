use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use semloss_cli::report::{ReportBody, ReportDocument};

fn semloss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semloss")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_doc(dir: &Path, file: &str) -> ReportDocument {
    let text = fs::read_to_string(dir.join(file)).unwrap();
    let doc: ReportDocument = serde_json::from_str(&text).unwrap();
    // Lossless: re-serializing gives the same bytes.
    assert_eq!(doc.to_json().unwrap(), text);
    doc
}

fn assert_finite_tsv(path: &Path) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let width = lines.next().unwrap().split('\t').count();
    for line in lines {
        let cells: Vec<&str> = line.split('\t').collect();
        assert_eq!(cells.len(), width, "{line}");
        for c in cells {
            let v: f64 = c.parse().unwrap_or_else(|_| panic!("{c:?} in {}", path.display()));
            assert!(v.is_finite());
        }
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(semloss(&[]).status.code(), Some(2));
    assert_eq!(semloss(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(semloss(&["fit2d", "--nc", "x"]).status.code(), Some(2));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "q\\s,0.41\n10,abc\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["gradcheck", "--seeds", "0", "--out", out],
        vec!["fit2d", "--nc", "0", "--out", out],
        vec!["sweep", "--nc-min", "3", "--nc-max", "2", "--out", out],
        vec!["fit2d", "--csv", bad.to_str().unwrap(), "--out", out],
        vec!["fit2d", "--csv", "/definitely/not/here.csv", "--out", out],
        vec!["fit1d", "--fixture", "nope", "--out", out],
        vec!["fit1d", "--family", "quartic", "--out", out],
        vec!["fit1d", "--s-col", "9", "--out", out],
        vec!["linkcalc", "--rate", "0"],
        vec!["linkcalc", "--rate", "1", "--gamma-db", "3"],
        vec!["export-fixture", "--name", "table9"],
    ];
    for args in cases {
        let o = semloss(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = semloss(&["fit2d", "--csv", bad.to_str().unwrap(), "--out", out]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("row 2") && err.contains("column 2"), "{err}");
}

#[test]
fn linkcalc_prints_and_reports() {
    let o = semloss(&["linkcalc", "--rate", "2", "--gamma-db", "9.5424"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "gamma_shannon_db = 4.7712\ns = 2.0000\n");

    let dir = tempfile::tempdir().unwrap();
    let o = semloss(&["linkcalc", "--rate", "1", "--out", dir.path().to_str().unwrap(), "--no-timestamp"]);
    assert_eq!(stdout(&o), "gamma_shannon_db = 0.0000\n");
    match read_doc(dir.path(), "linkcalc.json").report {
        ReportBody::Linkcalc { gamma_shannon_db, ratio, .. } => {
            assert_eq!(gamma_shannon_db, 0.0);
            assert_eq!(ratio, None);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn fit1d_writes_curves_and_ranks() {
    let dir = tempfile::tempdir().unwrap();
    let o = semloss(&["fit1d", "--fixture", "table1", "--s-col", "0", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("best: exp2"), "{}", stdout(&o));
    for fam in ["poly2", "poly3", "log", "exp1", "exp2"] {
        assert_finite_tsv(&dir.path().join(format!("fit1d_{fam}.tsv")));
    }
    let doc = read_doc(dir.path(), "fit1d.json");
    assert!(doc.timestamps.is_some());
    match doc.report {
        ReportBody::Fit1d { s_value, fits, .. } => {
            assert_eq!(s_value, Some(0.41));
            assert_eq!(fits.len(), 5);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn fit1d_sigmoid_on_table2() {
    let dir = tempfile::tempdir().unwrap();
    let o = semloss(&["fit1d", "--fixture", "table2", "--family", "sigmoid", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_finite_tsv(&dir.path().join("fit1d_sigmoid.tsv"));
}

#[test]
fn fit2d_and_sweep_short_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = semloss(&["fit2d", "--nc", "2", "--iters", "3000", "--starts", "2", "--out", out, "--no-timestamp"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_finite_tsv(&dir.path().join("fit2d_surface.tsv"));
    match read_doc(dir.path(), "fit2d.json").report {
        ReportBody::Fit2d { n_terms, report } => {
            assert_eq!(n_terms, 2);
            assert_eq!(report.residuals.len(), 40);
        }
        other => panic!("{other:?}"),
    }

    let o = semloss(&["sweep", "--nc-min", "1", "--nc-max", "3", "--iters", "2000", "--starts", "2", "--out", out]);
    assert!(o.status.success());
    assert_finite_tsv(&dir.path().join("sweep.tsv"));
    match read_doc(dir.path(), "sweep.json").report {
        ReportBody::Sweep { entries } => {
            let sse: Vec<f64> = entries.iter().map(|e| e.report.as_ref().unwrap().sse).collect();
            assert!(sse.windows(2).all(|w| w[1] <= w[0]), "{sse:?}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn csv_input_matches_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let o = semloss(&["export-fixture", "--name", "table1", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let csv = dir.path().join("table1.csv");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let args = ["fit1d", "--family", "exp2", "--s-col", "2", "--no-timestamp"];
    assert!(semloss(&[&args[..], &["--csv", csv.to_str().unwrap(), "--out", a.to_str().unwrap()]].concat()).status.success());
    assert!(semloss(&[&args[..], &["--fixture", "table1", "--out", b.to_str().unwrap()]].concat()).status.success());
    let exp2 = |dir: &Path| match read_doc(dir, "fit1d.json").report {
        ReportBody::Fit1d { mut fits, .. } => {
            let mut r = fits.remove(0).report.unwrap();
            r.data_label.clear();
            r
        }
        other => panic!("{other:?}"),
    };
    assert_eq!(exp2(&a), exp2(&b));
}

#[test]
fn export_fixtures_to_stdout() {
    for name in ["table1", "table2", "table3", "sigmoid_fig5"] {
        let o = semloss(&["export-fixture", "--name", name]);
        assert!(o.status.success(), "{name}");
        assert!(!stdout(&o).is_empty());
    }
    let t3 = stdout(&semloss(&["export-fixture", "--name", "table3"]));
    assert!(t3.starts_with("param,term,value\nmu0,,"));
    assert_eq!(t3.lines().filter(|l| l.starts_with("mu5_printed_x1e3,")).count(), 4);
}

#[test]
fn diagnose_table3_flags_raw_q() {
    let dir = tempfile::tempdir().unwrap();
    let o = semloss(&["diagnose-table3", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    match read_doc(dir.path(), "diagnose_table3.json").report {
        ReportBody::DiagnoseTable3 { hypotheses } => {
            assert_eq!(hypotheses.len(), 6);
            let raw = &hypotheses[0];
            assert_eq!(raw.q_divisor, 1.0);
            assert!(raw.max_abs_prediction.unwrap() > 1e20);
            assert_eq!(raw.dominant_term, Some(3));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn gradcheck_small_and_failing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = semloss(&["gradcheck", "--seeds", "10", "--out", out]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("PASS"));
    // A huge step makes the finite differences useless: exit 4, component named.
    let o = semloss(&["gradcheck", "--seeds", "3", "--step", "0.5", "--out", out]);
    assert_eq!(o.status.code(), Some(4));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("[term "), "{err}");
}
