//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the report is always printed. Exits
//! nonzero when a criterion fails that is not on the known-failure list, or
//! when a listed one starts passing.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use geodint::cli::verify::{gradient_rules, run_suite, Suite};
use geodint::exact_linear::LinearSystem;
use geodint::integrators::{integrate, step, Rule, Scheme, SolverConfig};
use geodint::matfun::{Matrix, Vector};
use geodint::model::{registry, Pendulum, RefPolicy, System};
use geodint::oracle::{convergence_order, energy_drift_argmax, reference_solve};

/// Criteria expected to fail, with the reason printed next to them.
const KNOWN_FAILURES: [(usize, &str); 1] = [(
    5,
    "GR/GR-SLEX ratio at amplitude 2 is ~3.5e2; the gain grows like 1/amplitude^2 and reaches 1e4 only near amplitude 0.5",
)];

struct Outcome {
    pass: bool,
    detail: String,
}

fn suite_outcome(suites: &[Suite]) -> Outcome {
    let mut total = 0;
    let mut failed = Vec::new();
    for &s in suites {
        let report = run_suite(s, 0);
        total += report.checks.len();
        failed.extend(
            report
                .checks
                .iter()
                .filter(|c| !c.passed())
                .map(|c| c.to_string()),
        );
    }
    Outcome {
        pass: failed.is_empty(),
        detail: if failed.is_empty() {
            format!("{total} checks passed (seed 0)")
        } else {
            format!(
                "{} of {total} checks failed: {}",
                failed.len(),
                failed.join("; ")
            )
        },
    }
}

fn criterion_1() -> Outcome {
    suite_outcome(&[Suite::Linear])
}

fn criterion_2() -> Outcome {
    let lin = LinearSystem::new(Matrix::diag(&[-10.0]), Vector::zeros(1)).unwrap();
    let sys = System::Field(&lin);
    let y0 = Vector::from_slice(&[1.0]);
    let cfg = SolverConfig::default();
    let mut worst: f64 = 0.0;
    for rule in [Rule::ImplicitMidpoint, Rule::Trapezoidal] {
        for policy in [RefPolicy::Current, RefPolicy::Next, RefPolicy::Midpoint] {
            let scheme = Scheme::locally_exact(rule, policy).unwrap();
            let traj = integrate(&scheme, sys, &y0, &[1.0; 20], &cfg).unwrap();
            for (n, y) in traj.states.iter().enumerate() {
                let exact = (-10.0 * n as f64).exp();
                worst = worst.max((y[0] - exact).abs() / exact);
            }
        }
    }
    let classical = integrate(
        &Scheme::classical(Rule::ImplicitMidpoint).unwrap(),
        sys,
        &y0,
        &[1.0; 20],
        &cfg,
    )
    .unwrap();
    let c20 = classical.last().unwrap()[0];
    Outcome {
        pass: worst <= 1e-12,
        detail: format!(
            "max relative error {worst:.2e} (<= 1e-12); classical midpoint x20 = {c20:.3e} vs exact {:.3e}",
            (-200.0f64).exp()
        ),
    }
}

type RunResult = (String, Result<(f64, usize), String>);

fn criterion_3() -> Outcome {
    let cfg = SolverConfig::with_tol(1e-13);
    let mut runs: Vec<(&'static str, Scheme, f64)> = Vec::new();
    for (name, h) in [("pendulum", 0.05), ("henon-heiles", 0.05), ("kepler", 0.01)] {
        let prob = registry(name).unwrap();
        let sys = prob.system.as_ref();
        let fixed = prob.equilibria.first().cloned();
        for rule in gradient_rules(sys) {
            let mut policies = vec![RefPolicy::Current, RefPolicy::Next, RefPolicy::Midpoint];
            policies.extend(fixed.clone().map(RefPolicy::Fixed));
            runs.push((name, Scheme::classical(rule).unwrap(), h));
            for p in policies {
                runs.push((name, Scheme::locally_exact(rule, p).unwrap(), h));
            }
        }
    }
    let results: Vec<RunResult> = runs
        .par_iter()
        .map(|(name, scheme, h)| {
            let prob = registry(name).unwrap();
            let sys = prob.system.as_ref();
            let res = integrate(
                scheme,
                System::Hamiltonian(sys),
                &prob.default_y0,
                &vec![*h; 100_000],
                &cfg,
            )
            .map(|traj| energy_drift_argmax(&traj, sys))
            .map_err(|e| e.to_string());
            (format!("{name} {}", scheme.label()), res)
        })
        .collect();
    let mut worst = (0.0, String::new());
    let mut errors = Vec::new();
    for (label, res) in results {
        match res {
            Ok((d, _)) if d > worst.0 || d.is_nan() => worst = (d, label),
            Ok(_) => {}
            Err(e) => errors.push(format!("{label}: {e}")),
        }
    }
    Outcome {
        pass: errors.is_empty() && worst.0 <= 1e-9,
        detail: if errors.is_empty() {
            format!(
                "{} runs, max drift {:.2e} ({}) (<= 1e-9)",
                runs.len(),
                worst.0,
                worst.1
            )
        } else {
            format!("failed runs: {}", errors.join("; "))
        },
    }
}

fn criterion_4() -> Outcome {
    let cfg = SolverConfig::default();
    let y0 = Vector::from_slice(&[2.0, 0.0]);
    let hs = [0.2, 0.1, 0.05, 0.025];
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, scheme, want, tol) in [
        ("GR", Scheme::gr(), 2.0, 0.2),
        ("GR-LEX", Scheme::gr_lex(), 3.0, 0.25),
        ("GR-SLEX", Scheme::gr_slex(), 4.0, 0.3),
    ] {
        let est = convergence_order(&scheme, System::Hamiltonian(&Pendulum), &y0, 2.0, &hs, &cfg)
            .unwrap();
        let ok = (est.slope - want).abs() <= tol;
        pass &= ok;
        parts.push(format!(
            "{label} {:.3} ({want} ± {tol}, fit residual {:.1e})",
            est.slope, est.fit_residual
        ));
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

/// Endpoint errors of GR and GR-SLEX on the pendulum at `h = 0.1`.
fn gr_vs_slex(y0: &Vector, t: f64) -> (f64, f64) {
    let cfg = SolverConfig::default();
    let sys = System::Hamiltonian(&Pendulum);
    let reference = reference_solve(sys, y0, t, 1e-13).unwrap();
    let n = (t / 0.1).round() as usize;
    let err = |s: &Scheme| {
        let traj = integrate(s, sys, y0, &vec![0.1; n], &cfg).unwrap();
        (traj.last().unwrap() - &reference).norm()
    };
    (err(&Scheme::gr()), err(&Scheme::gr_slex()))
}

fn criterion_5() -> Outcome {
    let (gr, slex) = gr_vs_slex(&Vector::from_slice(&[2.0, 0.0]), 100.0);
    let ratio = gr / slex;
    let sweep: Vec<String> = [0.5, 1.0, 1.5]
        .iter()
        .map(|&a| {
            let (g, s) = gr_vs_slex(&Vector::from_slice(&[a, 0.0]), 100.0);
            format!("{a}: {:.2e}", g / s)
        })
        .collect();
    Outcome {
        pass: ratio >= 1e4,
        detail: format!(
            "y0 = (2,0): GR error {gr:.3e}, GR-SLEX error {slex:.3e}, ratio {ratio:.3e} (>= 1e4); ratio by amplitude {}",
            sweep.join(", ")
        ),
    }
}

fn criterion_6() -> Outcome {
    suite_outcome(&[Suite::FixedPoints])
}

fn criterion_7() -> Outcome {
    suite_outcome(&[Suite::LocalExactness])
}

fn criterion_8() -> Outcome {
    suite_outcome(&[Suite::GradientIdentity, Suite::ThetaForm])
}

fn criterion_9() -> Outcome {
    suite_outcome(&[Suite::Reversibility])
}

fn criterion_10() -> Outcome {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let cfg = SolverConfig::default();
    let mut worst: f64 = 0.0;
    let mut samples = 0;
    for name in ["pendulum", "quartic", "nonseparable"] {
        let prob = registry(name).unwrap();
        let sys = prob.system.as_ref();
        for _ in 0..100 {
            let y = Vector::from_vec(vec![rng.gen_range(-1.5..=1.5), rng.gen_range(-1.5..=1.5)]);
            let h = rng.gen_range(0.01..=0.5);
            let policy = match rng.gen_range(0..4) {
                0 => RefPolicy::Current,
                1 => RefPolicy::Next,
                2 => RefPolicy::Midpoint,
                _ => RefPolicy::Fixed(prob.equilibria[0].clone()),
            };
            for (one, multi) in [
                (Rule::Gr1dSymmetric, Rule::GrMultiSymmetric),
                (Rule::Gr1dIncrement, Rule::GrMultiIncrement),
            ] {
                let a = step(
                    &Scheme::locally_exact(one, policy.clone()).unwrap(),
                    System::Hamiltonian(sys),
                    &y,
                    h,
                    &cfg,
                );
                let b = step(
                    &Scheme::locally_exact(multi, policy.clone()).unwrap(),
                    System::Hamiltonian(sys),
                    &y,
                    h,
                    &cfg,
                );
                let gap = match (a, b) {
                    (Ok(a), Ok(b)) => (&a.y_next - &b.y_next).max_abs(),
                    _ => f64::INFINITY,
                };
                worst = worst.max(gap);
                samples += 1;
            }
        }
    }
    Outcome {
        pass: worst <= 1e-12,
        detail: format!("{samples} step pairs, max gap {worst:.2e} (<= 1e-12)"),
    }
}

/// Regression values from an independent implementation of GR and GR-SLEX
/// at `y0 = (2, 0)`, `h = 0.1`, `T = 10`.
fn regression_check() -> Outcome {
    const GR: f64 = 0.002125699389767164;
    const SLEX: f64 = 7.3783190142320446e-06;
    let (gr, slex) = gr_vs_slex(&Vector::from_slice(&[2.0, 0.0]), 10.0);
    let dev = ((gr - GR) / GR).abs().max(((slex - SLEX) / SLEX).abs());
    Outcome {
        pass: dev <= 1e-5,
        detail: format!("T = 10 errors GR {gr:.10e}, GR-SLEX {slex:.10e}, max relative deviation {dev:.1e} (<= 1e-5)"),
    }
}

type Criterion = (usize, &'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("GEODINT_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    let criteria: [Criterion; 10] = [
        (1, "linear exactness", Duration::from_secs(5), criterion_1),
        (
            2,
            "A-stability witness",
            Duration::from_secs(1),
            criterion_2,
        ),
        (
            3,
            "energy conservation",
            Duration::from_secs(60),
            criterion_3,
        ),
        (
            4,
            "convergence orders",
            Duration::from_secs(10),
            criterion_4,
        ),
        (
            5,
            "accuracy gain GR/GR-SLEX",
            Duration::from_secs(5),
            criterion_5,
        ),
        (
            6,
            "fixed-point preservation",
            Duration::from_secs(5),
            criterion_6,
        ),
        (
            7,
            "local-exactness probes",
            Duration::from_secs(10),
            criterion_7,
        ),
        (
            8,
            "structural identities",
            Duration::from_secs(10),
            criterion_8,
        ),
        (9, "reversibility", Duration::from_secs(5), criterion_9),
        (
            10,
            "1-D/multi-D reduction",
            Duration::from_secs(2),
            criterion_10,
        ),
    ];
    let mut unexpected = Vec::new();
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed <= budget;
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == id);
        println!(
            "criterion {id:>2} {}: {name}: {} [{:.2}s, budget {}s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
        match (pass, known) {
            (false, Some((_, why))) => println!("             known failure: {why}"),
            (false, None) => unexpected.push(format!("criterion {id} failed")),
            (true, Some(_)) => unexpected.push(format!(
                "criterion {id} passed but is listed as a known failure"
            )),
            (true, None) => {}
        }
    }
    let reg = regression_check();
    println!(
        "regression {}: {}",
        if reg.pass { "PASS" } else { "FAIL" },
        reg.detail
    );
    if !reg.pass {
        unexpected.push("regression values changed".into());
    }
    if unexpected.is_empty() {
        println!("acceptance: all criteria as expected");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {}", unexpected.join("; "));
        ExitCode::FAILURE
    }
}
