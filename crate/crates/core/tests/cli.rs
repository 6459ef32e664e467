use geodint::cli::{run, EXIT_CONFIG, EXIT_NUMERICAL};
use geodint::exact_linear::exact_step_linear;
use geodint::matfun::Vector;
use geodint::model::registry;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("geodint").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn row(line: &str) -> Vec<f64> {
    line.split(',').map(|v| v.parse().unwrap()).collect()
}

#[test]
fn integrate_csv_contract() {
    let (code, out, _) = call(&[
        "integrate",
        "--problem",
        "pendulum",
        "--scheme",
        "gr1d-sym",
        "--policy",
        "midpoint",
        "--h",
        "0.1",
        "--steps",
        "100",
        "--y0",
        "2,0",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,t,x1,p1,H,iters,residual");
    assert_eq!(lines.len(), 102);
    let first = row(lines[1]);
    assert_eq!(first[..4], [0.0, 0.0, 2.0, 0.0]);
    let last = row(lines[101]);
    assert_eq!(last[0], 100.0);
    assert!((last[1] - 10.0).abs() < 1e-12);
    assert!((last[4] - first[4]).abs() < 1e-12);
}

#[test]
fn integrate_header_for_two_degrees_of_freedom() {
    let (code, out, _) = call(&[
        "integrate",
        "--problem",
        "henon-heiles",
        "--scheme",
        "grmulti-sym",
        "--h",
        "0.1",
        "--steps",
        "3",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next(), Some("n,t,x1,x2,p1,p2,H,iters,residual"));
}

#[test]
fn integrate_linear_endpoint_is_exact() {
    let (code, out, _) = call(&[
        "integrate",
        "--problem",
        "coupled-linear",
        "--scheme",
        "midpoint",
        "--locally-exact",
        "--h",
        "0.5",
        "--steps",
        "10",
    ]);
    assert_eq!(code, 0);
    let last = row(out.lines().last().unwrap());
    let prob = registry("coupled-linear").unwrap();
    let lin = prob.system.linear_part().unwrap();
    let exact = exact_step_linear(&lin, &prob.default_y0, 5.0).unwrap();
    let got = Vector::from_slice(&last[2..6]);
    assert!((&got - &exact).max_abs() < 1e-11);
}

#[test]
fn output_is_byte_identical() {
    let args = [
        "integrate",
        "--problem",
        "quartic",
        "--scheme",
        "grmulti-incre",
        "--policy",
        "next",
        "--T",
        "3",
        "--h",
        "0.05",
    ];
    assert_eq!(call(&args).1, call(&args).1);
    let verify = ["verify", "linear", "--seed", "3"];
    assert_eq!(call(&verify).1, call(&verify).1);
}

#[test]
fn output_file_and_schedule() {
    let dir = std::env::temp_dir().join(format!("geodint-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let sched = dir.join("steps.txt");
    std::fs::write(&sched, "0.1\n0.2\n").unwrap();
    let out = dir.join("run.csv");
    let (code, stdout, _) = call(&[
        "integrate",
        "--problem",
        "pendulum",
        "--scheme",
        "exp-euler",
        "--schedule",
        sched.to_str().unwrap(),
        "--T",
        "0.9",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let ts: Vec<f64> = text.lines().skip(1).map(|l| row(l)[1]).collect();
    assert_eq!(ts.len(), 7);
    assert!((ts[6] - 0.9).abs() < 1e-12);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_errors_exit_one() {
    let (code, _, err) = call(&[
        "integrate",
        "--problem",
        "pendulum",
        "--scheme",
        "rk4",
        "--h",
        "0.1",
        "--steps",
        "5",
    ]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("unknown scheme: rk4"));
    let (code, _, err) = call(&[
        "integrate",
        "--problem",
        "moon",
        "--scheme",
        "midpoint",
        "--h",
        "0.1",
        "--steps",
        "5",
    ]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("unknown problem: moon"));
    let (code, _, err) = call(&[
        "order",
        "--problem",
        "pendulum",
        "--scheme",
        "gr1d-sym",
        "--h",
        "0.1",
    ]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("need ≥ 4 step sizes"));
    let (code, _, _) = call(&[
        "drift",
        "--problem",
        "pendulum",
        "--scheme",
        "gr1d-sym",
        "--h",
        "0.1",
        "--steps",
        "0",
    ]);
    assert_eq!(code, EXIT_CONFIG);
    let (code, _, _) = call(&[
        "integrate",
        "--problem",
        "pendulum",
        "--scheme",
        "midpoint",
        "--h",
        "0.1",
    ]);
    assert_eq!(code, EXIT_CONFIG);
    let (code, _, _) = call(&[
        "integrate",
        "--problem",
        "pendulum",
        "--scheme",
        "midpoint",
        "--h",
        "0",
        "--steps",
        "3",
    ]);
    assert_eq!(code, EXIT_CONFIG);
    let (code, _, _) = call(&[
        "integrate",
        "--problem",
        "henon-heiles",
        "--scheme",
        "gr1d-sym",
        "--h",
        "0.1",
        "--steps",
        "3",
    ]);
    assert_eq!(code, EXIT_CONFIG);
    let (code, _, _) = call(&[
        "integrate",
        "--problem",
        "pendulum",
        "--scheme",
        "midpoint",
        "--h",
        "0.1",
        "--steps",
        "3",
        "--y0",
        "1,2,3",
    ]);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn step_failure_flushes_partial_output() {
    let (code, out, err) = call(&[
        "integrate",
        "--problem",
        "kepler",
        "--scheme",
        "grmulti-sym",
        "--h",
        "0.5",
        "--steps",
        "100",
        "--y0",
        "0.001,0,0,0",
    ]);
    assert_eq!(code, EXIT_NUMERICAL);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "n,t,x1,x2,p1,p2,H,iters,residual");
    assert!(lines.len() >= 3);
    assert!(lines.last().unwrap().starts_with("# failed: step "));
    assert!(err.contains("step "));
}

#[test]
fn order_json_keys() {
    let (code, out, _) = call(&[
        "order",
        "--problem",
        "pendulum",
        "--scheme",
        "gr1d-sym",
        "--policy",
        "midpoint",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let obj = v.as_object().unwrap();
    let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["errors", "fit_residual", "slope"]);
    let slope = obj["slope"].as_f64().unwrap();
    assert!((3.7..=4.3).contains(&slope), "slope {slope}");
    assert_eq!(obj["errors"].as_array().unwrap().len(), 4);

    let (_, out, _) = call(&["order", "--problem", "pendulum", "--scheme", "gr1d-sym"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let slope = v["slope"].as_f64().unwrap();
    assert!((1.8..=2.2).contains(&slope), "slope {slope}");
}

#[test]
fn drift_json() {
    let (code, out, _) = call(&[
        "drift",
        "--problem",
        "henon-heiles",
        "--scheme",
        "grmulti-incre",
        "--h",
        "0.05",
        "--steps",
        "100000",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["argmax_step", "drift"]);
    assert!(v["drift"].as_f64().unwrap() <= 1e-9);

    let (code, out, _) = call(&[
        "drift",
        "--problem",
        "pendulum",
        "--scheme",
        "midpoint",
        "--h",
        "0.05",
        "--steps",
        "100000",
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    println!("classical midpoint pendulum drift: {}", v["drift"]);
}

#[test]
fn verify_suites_pass() {
    for suite in [
        "linear",
        "theta-form",
        "fixed-points",
        "local-exactness",
        "gradient-identity",
        "reversibility",
    ] {
        let (code, out, _) = call(&["verify", suite, "--seed", "7"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.starts_with(&format!("suite {suite} seed 7\n")));
        assert!(out.lines().skip(1).all(|l| l.starts_with("PASS")), "{out}");
    }
    let (code, _, _) = call(&["verify", "nonsense"]);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn listings() {
    let (code, out, _) = call(&["list-problems"]);
    assert_eq!(code, 0);
    for name in [
        "pendulum",
        "quartic",
        "henon-heiles",
        "kepler",
        "coupled-linear",
        "nonseparable",
    ] {
        assert!(out.lines().any(|l| l.starts_with(name)), "{name}");
    }
    let (_, out, _) = call(&["list-schemes"]);
    assert!(out.lines().any(|l| l.starts_with("grmulti-sep\t")));
}

#[test]
fn default_state_energy_in_first_row() {
    let (_, out, _) = call(&[
        "integrate",
        "--problem",
        "nonseparable",
        "--scheme",
        "grmulti-sym",
        "--h",
        "0.1",
        "--steps",
        "1",
    ]);
    let first = row(out.lines().nth(1).unwrap());
    let prob = registry("nonseparable").unwrap();
    assert_eq!(
        first[4],
        prob.system.energy(prob.default_y0.as_slice()).unwrap()
    );
}
