use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

const UNIT_SQUARE_ENERGY: f64 = 2.9732095982473787;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polyriesz"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

fn square_file() -> PathBuf {
    let p = scratch("square.json");
    std::fs::write(&p, r#"{"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}"#).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout_json(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn diagnostic(o: &Output) -> String {
    let err = String::from_utf8_lossy(&o.stderr);
    err.lines().last().unwrap_or_default().to_string()
}

#[test]
fn energy_of_the_unit_square() {
    let sq = square_file();
    let v = stdout_json(&run(&["energy", sq.to_str().unwrap(), "--kernel", "riesz", "--alpha", "1"]));
    assert!((v["energy"].as_f64().unwrap() - UNIT_SQUARE_ENERGY).abs() < 1e-7);
}

#[test]
fn polygon_from_stdin() {
    let mut child = bin().args(["--out", "csv", "energy", "-"]).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(br#"{"vertices": [[0, 0], [0, 1], [1, 1], [1, 0]]}"#).unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!((row[2].parse::<f64>().unwrap() - UNIT_SQUARE_ENERGY).abs() < 1e-7);
}

#[test]
fn square_is_stationary_under_both_constraints() {
    let sq = square_file();
    for c in ["area", "perimeter"] {
        let v = stdout_json(&run(&["stationarity", sq.to_str().unwrap(), "--constraint", c]));
        assert_eq!(v["status"], "stationary", "{c}");
        assert_eq!(v["sides"][0]["i"], 1);
    }
}

#[test]
fn polya_szego_triangle_limit() {
    let v = stdout_json(&run(&["polya-szego", "--shape", "triangle", "--a0", "1", "--steps", "100"]));
    assert!((v["last"].as_f64().unwrap() - 1.5196713713).abs() < 1e-9);
    let v = stdout_json(&run(&["polya-szego", "--shape", "quad", "--a0", "2", "--steps", "50"]));
    assert_eq!(v["first_index"], 3);
    assert!((v["last"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn variation_table_compares_analytic_and_fd() {
    let p = scratch("pentagon.json");
    std::fs::write(&p, r#"{"vertices": [[0, 0], [2, 0.3], [2.3, 1.4], [1.1, 2], [-0.2, 1.2]]}"#).unwrap();
    let flow = r#"{"family": "sliding", "side": 2, "constraint": "perimeter"}"#;
    let args = ["--kernel", "regularized-riesz", "--delta", "0.05", "variation", p.to_str().unwrap(), "--flow", flow];
    let v = stdout_json(&run(&args));
    let e = &v["rows"][0];
    let (a, r) = (e["analytic"].as_f64().unwrap(), e["richardson"].as_f64().unwrap());
    assert!((a - r).abs() <= 5e-4 * a.abs(), "{a} vs {r}");
    assert_eq!(v["flow"]["side"], 2);
}

#[test]
fn symmetrize_emits_a_csv_trace() {
    let t = scratch("triangle.json");
    std::fs::write(&t, r#"{"vertices": [[0, 0], [2.5, 0.4], [0.3, 0.9]]}"#).unwrap();
    let o = run(&["--out", "csv", "symmetrize", t.to_str().unwrap(), "--steps", "3"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "step,x1,y1,x2,y2,x3,y3,area,energy,error_bound");
    assert_eq!(lines.len(), 5);
}

#[test]
fn optimize_writes_a_reloadable_polygon_and_trace() {
    let poly = scratch("optimum.json");
    let trace = scratch("trace.csv");
    let v = stdout_json(&run(&[
        "optimize",
        "--n",
        "4",
        "--seed",
        "2",
        "--polygon-out",
        poly.to_str().unwrap(),
        "--trace-out",
        trace.to_str().unwrap(),
    ]));
    assert_eq!(v["converged"], true);
    assert_eq!(v["stationary"], true);
    let header = std::fs::read_to_string(&trace).unwrap();
    assert!(header.starts_with("iter,energy,error_bound,grad_norm,max_side_dev,max_angle_dev\n"));
    let e = stdout_json(&run(&["energy", poly.to_str().unwrap()]));
    assert!((e["energy"].as_f64().unwrap() - v["energy"]["value"].as_f64().unwrap()).abs() < 1e-12);
    assert!((e["area"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let sq = square_file();
    let t = scratch("skew.json");
    std::fs::write(&t, r#"{"vertices": [[0, 0], [2, 0.3], [2.3, 1.4], [1.1, 2], [-0.2, 1.2]]}"#).unwrap();
    for args in [
        vec!["energy", sq.to_str().unwrap()],
        vec!["stationarity", t.to_str().unwrap(), "--constraint", "perimeter"],
        vec!["optimize", "--n", "5", "--seed", "4", "--max-iters", "10"],
    ] {
        let one = run(&[&["--threads", "1"], args.as_slice()].concat());
        let eight = run(&[&["--threads", "8"], args.as_slice()].concat());
        assert_eq!(one.stdout, eight.stdout, "{args:?}");
        assert!(!one.stdout.is_empty());
    }
}

#[test]
fn exit_codes_and_diagnostics() {
    let sq = square_file();
    let o = run(&["energy"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(diagnostic(&o).starts_with("error code=2 kind=usage msg=\""));

    let o = run(&["--kernel", "regularized-riesz", "energy", sq.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["energy", "does-not-exist.json"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(diagnostic(&o).starts_with("error code=3 kind=io"));

    let bad = scratch("bowtie.json");
    std::fs::write(&bad, r#"{"vertices": [[0, 0], [1, 1], [1, 0], [0, 1]]}"#).unwrap();
    let o = run(&["energy", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let o = run(&["--alpha", "2.5", "energy", sq.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let o = run(&["--quad-tol", "1e-9", "energy", sq.to_str().unwrap(), "--method", "area"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(diagnostic(&o).starts_with("error code=4 kind=accuracy"));

    let o = run(&["optimize", "--n", "5", "--max-iters", "1"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(diagnostic(&o).starts_with("error code=5 kind=optimization"));
}
