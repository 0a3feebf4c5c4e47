use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topo-trojan"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = run(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn version_lists_every_format() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&["--version"], dir.path());
    for name in ["network", "trace", "features", "detector", "diagram", "cycles"] {
        assert!(text.contains(&format!("{name} v1")), "{text}");
    }
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(run(&["--help"], p).status.code(), Some(0));
    assert_eq!(run(&["no-such-command"], p).status.code(), Some(1));
    assert_eq!(run(&[], p).status.code(), Some(1));
    // randomized commands refuse to run without a seed
    assert_eq!(run(&["gen-gaussian", "--which", "D1", "--n", "5"], p).status.code(), Some(1));
    assert_eq!(run(&["persist", "--corr", "missing.csv"], p).status.code(), Some(2));
    std::fs::write(p.join("bad.csv"), "dim,birth,death\n1,0.9,0.1\n").unwrap();
    assert_eq!(run(&["bottleneck", "--a", "bad.csv", "--b", "bad.csv"], p).status.code(), Some(2));
}

#[test]
fn seeded_outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    for out in ["a.csv", "b.csv"] {
        ok(&["gen-gaussian", "--which", "D3", "--n", "300", "--seed", "11", "--out", out], p);
    }
    let a = std::fs::read(p.join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(p.join("b.csv")).unwrap());
    let other = ok(&["gen-gaussian", "--which", "D3", "--n", "300", "--seed", "12"], p);
    assert_ne!(a, other.into_bytes());
}

#[test]
fn single_model_chain() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(&["gen-zoo", "--models-per-class", "2", "--train-samples", "200", "--seed", "3", "--dir", "zoo"], p);
    ok(&["perturb", "--in", "zoo/clean.csv", "--trials", "40", "--lo", "-6", "--hi", "6", "--seed", "1", "--out", "p.csv"], p);
    ok(&["trace", "--net", "zoo/net_000.txt", "--in", "p.csv", "--out", "t.atrc"], p);
    ok(&["trace", "--net", "zoo/net_000.txt", "--in", "p.csv", "--out", "t.csv", "--csv"], p);
    let from_bin = ok(&["corr", "--trace", "t.atrc"], p);
    assert_eq!(from_bin, ok(&["corr", "--trace", "t.csv"], p));
    std::fs::write(p.join("c.csv"), &from_bin).unwrap();

    ok(&["persist", "--corr", "c.csv", "--out", "dg.csv"], p);
    let db = ok(&["bottleneck", "--a", "dg.csv", "--b", "dg.csv", "--dim", "0"], p);
    assert_eq!(db.lines().nth(1), Some("0,0"));

    let filt = ok(&["complex", "--corr", "c.csv", "--cutoff", "1.0"], p);
    assert_eq!(filt.lines().next(), Some("dim,v0,v1,v2,filter"));

    ok(&["cycles", "--corr", "c.csv", "--top-k", "5", "--out", "cy.txt"], p);
    let cycles = std::fs::read_to_string(p.join("cy.txt")).unwrap();
    let shortcut = ok(&["shortcut", "--cycles", "cy.txt", "--corr", "c.csv", "--top-k", "5"], p);
    assert_eq!(
        shortcut.lines().filter(|l| l.starts_with("cycle_edge")).count(),
        cycles.lines().filter(|l| l.starts_with("CYCLE")).count()
    );
    assert!(run(&["cycles", "--corr", "c.csv"], p).status.code() == Some(1));

    let feats = ok(&["features", "--dg", "dg.csv", "--corr", "c.csv", "--baseline", "--label", "1"], p);
    let mut lines = feats.lines();
    assert!(lines.next().unwrap().ends_with("fr75"));
    assert!(lines.next().unwrap().starts_with("dg,1,"));

    let bench = ok(&["bench", "--corr", "c.csv", "c.csv"], p);
    assert_eq!(bench.lines().count(), 3);
}

#[test]
fn compare_reports_a_welch_row() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let header = "model,label,f01,f02,f03,f04,f05,f06,f11,f12,f13,f14,f15,f16\n";
    let table = |vals: &[f64]| {
        let mut s = header.to_string();
        for (k, v) in vals.iter().enumerate() {
            s += &format!("m{k},0,0,0,0,{v},0,0,0,0,0,0,0,0\n");
        }
        s
    };
    std::fs::write(p.join("a.csv"), table(&[1.0, 2.0, 3.0])).unwrap();
    std::fs::write(p.join("b.csv"), table(&[1.0, 2.0, 3.0, 4.0])).unwrap();
    let out = ok(&["compare", "--features-a", "a.csv", "--features-b", "b.csv", "--feature", "f04"], p);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "f04");
    assert_eq!(row[4].parse::<f64>().unwrap(), 2.0);
    assert_eq!(row[5].parse::<f64>().unwrap(), 2.5);
    assert_eq!(run(&["compare", "--features-a", "a.csv", "--features-b", "b.csv", "--feature", "f99"], p).status.code(), Some(2));
}

#[test]
fn detector_round_trip_is_independent_of_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(&["gen-zoo", "--models-per-class", "4", "--train-samples", "200", "--seed", "5", "--dir", "zoo"], p);
    let common = ["--zoo", "zoo/zoo.csv", "--samples", "zoo/clean.csv", "--trials", "40", "--seed", "9"];
    let train = |jobs: &str, out: &str| {
        let mut args = vec!["detect-train", "--epochs", "100", "--jobs", jobs, "--out", out];
        args.extend(common);
        ok(&args, p);
    };
    train("1", "d1.bin");
    train("3", "d3.bin");
    assert_eq!(std::fs::read(p.join("d1.bin")).unwrap(), std::fs::read(p.join("d3.bin")).unwrap());
    let mut args = vec!["detect-eval", "--detector", "d1.bin"];
    args.extend(common);
    let report = ok(&args, p);
    assert_eq!(report.lines().next(), Some("acc,auc,n_test,threshold"));
    let row: Vec<f64> = report.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[2], 8.0);
    assert!((0.0..=1.0).contains(&row[1]));
}

#[test]
fn theorem_and_convergence_reports() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let out = ok(&["theorem1", "--samples", "4000", "--seed", "2"], p);
    let value = |key: &str| -> f64 {
        out.lines()
            .find_map(|l| l.strip_prefix(&format!("{key},")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((value("bottleneck_analytic_cosine") - 1.0 / 8f64.sqrt()).abs() < 1e-12);
    assert!((value("risk_f2_d2") - 0.5).abs() < 0.05);

    let conv = run(&["convergence", "--grid", "400,1600,6400,25600", "--seeds", "3", "--seed", "5"], p);
    assert_eq!(conv.status.code(), Some(0), "{}", String::from_utf8_lossy(&conv.stderr));
    assert_eq!(String::from_utf8_lossy(&conv.stdout).lines().count(), 5);
    // a flat grid cannot show the expected decay; the table is still printed
    let flat = run(&["convergence", "--grid", "400,401,402,403", "--seeds", "1", "--seed", "5"], p);
    assert_eq!(flat.status.code(), Some(3));
    assert_eq!(String::from_utf8_lossy(&flat.stdout).lines().count(), 5);
    assert_eq!(run(&["convergence", "--grid", "400,100", "--seed", "1"], p).status.code(), Some(2));
}
