use std::process::{Command, Output};

fn tqsync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tqsync")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn simulate_is_reproducible() {
    let args = [
        "simulate",
        "--protocol",
        "improved",
        "--bits",
        "4",
        "--eps",
        "0.1",
        "--eta",
        "1",
        "--seed",
        "7",
    ];
    let a = tqsync(&args);
    let b = tqsync(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let json = stdout(&a).lines().last().unwrap().to_string();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["outcome"]["report"]["bits"].as_array().unwrap().len(), 4);
}

#[test]
fn simulate_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = tqsync(&[
        "simulate",
        "--protocol",
        "hybrid",
        "--bits",
        "6",
        "--eta",
        "0.9",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["outcome"]["report"]["k1"].as_u64().is_some());
}

#[test]
fn config_errors_exit_2() {
    let o = tqsync(&[
        "simulate",
        "--protocol",
        "simple-one-way",
        "--shots",
        "10",
        "--offset",
        "0.95",
        "--seed",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("fringe"));
    // no seed
    assert_eq!(tqsync(&["simulate", "--bits", "3"]).status.code(), Some(2));
    // dead channel
    assert_eq!(
        tqsync(&["simulate", "--bits", "3", "--eta", "0", "--seed", "1"])
            .status
            .code(),
        Some(2)
    );
    // lists are for sweeps
    assert_eq!(
        tqsync(&["simulate", "--bits", "3,4", "--seed", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(tqsync(&["simulate", "--mode", "sideways"]).status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(
        &path,
        r#"{"protocol":"simple-two-way","shots":500,"seed":9,"offset":0.2}"#,
    )
    .unwrap();
    let a = tqsync(&["simulate", "--config", path.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    let b = tqsync(&["simulate", "--config", path.to_str().unwrap(), "--shots", "800"]);
    assert!(stdout(&b).contains("one-way sends         1600"));
    std::fs::write(&path, r#"{"nonsense":true}"#).unwrap();
    assert_eq!(
        tqsync(&["simulate", "--config", path.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn sweep_bytes_independent_of_workers() {
    let base = [
        "sweep",
        "--protocol",
        "improved,hybrid",
        "--bits",
        "3,5",
        "--eta",
        "1,0.95",
        "--runs",
        "6",
        "--seed",
        "11",
        "--offset",
        "uniform:0:1",
    ];
    let one = tqsync(&[&base[..], &["--workers", "1"]].concat());
    let many = tqsync(&[&base[..], &["--workers", "6"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
    let text = stdout(&one);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(&rdr.headers().unwrap()[0], "row");
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| &r[22] == "ok"));
}

#[test]
fn sweep_records_bad_rows_and_rejects_empty_grid() {
    let o = tqsync(&["sweep", "--bits", "3", "--eta", "1,0", "--runs", "2", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().nth(2).unwrap().contains(",error,"));
    let o = tqsync(&["sweep", "--bits", "3", "--eta", "", "--seed", "1"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn fig1_csv_contract() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig1.csv");
    let o = tqsync(&[
        "fig1",
        "--etas",
        "0.9,0.99,0.999",
        "--kmax",
        "20",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["eta", "k", "cost_improved", "cost_sql", "ratio"]
    );
    let mut etas = std::collections::BTreeSet::new();
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        for field in [0, 2, 3, 4] {
            rec[field].parse::<f64>().unwrap();
        }
        etas.insert(rec[0].to_string());
        n += 1;
    }
    assert_eq!(n, 60);
    assert_eq!(etas.len(), 3);
    // pure analytic: rerun is byte-identical
    let again = tqsync(&["fig1", "--etas", "0.9,0.99,0.999", "--kmax", "20"]);
    assert_eq!(again.stdout, std::fs::read(&path).unwrap());
    assert_eq!(tqsync(&["fig1", "--etas", "0"]).status.code(), Some(2));
}

#[test]
fn costs_table() {
    let o = tqsync(&["costs", "--bits", "11", "--eta", "0.99"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("quantity,value\n"));
    let k1 = text.lines().find(|l| l.starts_with("k1,")).unwrap();
    assert_eq!(k1, "k1,6");
}

#[test]
fn selftest_passes() {
    let o = tqsync(&["selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("10 of 10 checks passed"));
}
