//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the terminal.
//! The process fails if any criterion outside `KNOWN_DEVIATIONS` fails, or if
//! a known deviation unexpectedly starts passing (so the list stays honest).
//! `--ignored` or `--include-ignored` adds the full-resolution 2D check.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use fraccable::fem::FemSpace;
use fraccable::harness::{
    error_profile, observed_order, profile_argmax, sweep, BenchmarkCase, BenchmarkId, GridEntry,
};
use fraccable::solver::{run, CableProblem, SchemeConfig};
use fraccable::specfun::rl_power_derivative;
use fraccable::spectral::{h_contour, szego_epsilon0, toeplitz_min_eigen};
use fraccable::weights::{
    apply_discrete_operator, gf_expand_oracle, weights_for, Family, StartingWeights, ThetaScheme,
};

/// Criteria whose failure is understood and recorded; see the README.
const KNOWN_DEVIATIONS: &[&str] = &["9", "10"];

struct Outcome {
    id: &'static str,
    passed: bool,
    detail: String,
}

fn outcome(id: &'static str, passed: bool, detail: String) -> Outcome {
    Outcome { id, passed, detail }
}

fn within_rel(v: f64, expected: f64, tol: f64) -> bool {
    (v - expected).abs() <= tol * expected.abs()
}

fn fmt_list(v: &[f64], digits: usize) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.digits$}")).collect();
    format!("[{}]", parts.join(", "))
}

fn fmt_sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.5e}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Errors of one refinement column, finest level last.
fn column(
    case: BenchmarkCase,
    family: Family,
    thetas: (f64, f64),
    steps: &[usize],
    cells: &[usize],
    corrected: bool,
) -> Vec<f64> {
    let mut grid = Vec::new();
    for &n_cells in cells {
        for &s in steps {
            grid.push(GridEntry {
                case,
                family,
                theta_gamma: thetas.0,
                theta_kappa: thetas.1,
                steps: s,
                n_cells,
                corrected,
                reference_error: None,
            });
        }
    }
    let report = sweep("acceptance", &grid, 1).expect("sweep");
    report
        .rows
        .iter()
        .map(|r| r.error.unwrap_or_else(|| panic!("run failed: {:?}", r.failure)))
        .collect()
}

fn orders(errors: &[f64]) -> Vec<f64> {
    observed_order(errors).into_iter().flatten().collect()
}

fn orders_within(measured: &[f64], expected: &[f64], tol: f64) -> bool {
    measured.len() == expected.len() && measured.iter().zip(expected).all(|(m, e)| (m - e).abs() <= tol)
}

fn weight_grid() -> Vec<ThetaScheme> {
    let mut grid = Vec::new();
    for &(a, t) in &[(0.1, -2.0), (0.3, 0.0), (0.5, 0.25), (0.7, 0.49), (1.0, -0.5)] {
        grid.push(ThetaScheme::new(Family::Fbt, a, t).unwrap());
    }
    for &(a, t) in &[(0.2, 0.3), (0.45, -0.2), (0.9, 0.45), (1.0, 0.1), (0.6, -1.0)] {
        grid.push(ThetaScheme::new(Family::Fbt, a, t).unwrap());
    }
    for &(a, t) in &[(0.1, -4.0), (0.35, 0.0), (0.5, -1.0), (0.8, 0.5), (1.0, 1.0)] {
        grid.push(ThetaScheme::new(Family::Fbn, a, t).unwrap());
    }
    for &(a, t) in &[(0.25, 0.75), (0.55, -0.9), (0.65, 0.1), (0.95, -0.5), (0.4, 0.3)] {
        grid.push(ThetaScheme::new(Family::Fbn, a, t).unwrap());
    }
    grid
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let grid = weight_grid();
    for scheme in &grid {
        let w = weights_for(*scheme, 50).unwrap();
        let o = gf_expand_oracle(*scheme, 50).unwrap();
        for k in 0..=50 {
            let scale = o.omega[k].abs().max(1.0);
            worst = worst.max((w.omega[k] - o.omega[k]).abs() / scale);
        }
    }
    let mut bdf2_err: f64 = 0.0;
    for family in [Family::Fbt, Family::Fbn] {
        let w = weights_for(ThetaScheme::new(family, 1.0, 0.0).unwrap(), 50).unwrap();
        for k in 0..=50 {
            let expected = match k {
                0 => 1.5,
                1 => -2.0,
                2 => 0.5,
                _ => 0.0,
            };
            bdf2_err = bdf2_err.max((w.omega[k] - expected).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        "1",
        grid.len() == 20 && worst <= 1e-12 && bdf2_err <= 1e-14 && secs < 1.0,
        format!("{} schemes, max deviation {worst:.2e}, BDF2 deviation {bdf2_err:.2e}, {secs:.2} s", grid.len()),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let eps = szego_epsilon0(ThetaScheme::new(Family::Fbt, 1.0, 0.0).unwrap(), 1e-10).unwrap();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        "2",
        (eps - 0.25).abs() <= 1e-6 && secs < 1.0,
        format!("epsilon0 = {eps:.10}, {secs:.2} s"),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let alphas = [0.2, 0.4, 0.6, 0.8, 1.0];
    let mut worst = f64::INFINITY;
    let mut count = 0;
    for family in [Family::Fbt, Family::Fbn] {
        for &a in &alphas {
            let (lo, hi) = match family {
                Family::Fbt => (-1.0, 0.49),
                Family::Fbn => (-1.0 / (2.0 * a), 1.0),
            };
            for j in 0..5 {
                let theta = lo + (hi - lo) * j as f64 / 4.0;
                let w = weights_for(ThetaScheme::new(family, a, theta).unwrap(), 256).unwrap();
                for n in [4, 16, 64, 256] {
                    worst = worst.min(toeplitz_min_eigen(&w, n, 0.0).unwrap());
                    count += 1;
                }
            }
        }
    }
    let w = weights_for(ThetaScheme::new(Family::Fbt, 1.0, 0.0).unwrap(), 256).unwrap();
    let shifted = [4, 16, 64, 128, 256]
        .iter()
        .map(|&n| toeplitz_min_eigen(&w, n, 0.25).unwrap())
        .fold(f64::INFINITY, f64::min);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        "3",
        worst >= -1e-10 && shifted >= -1e-10 && secs < 30.0,
        format!("{count} matrices, min eigenvalue {worst:.3e}, shifted {shifted:.3e}, {secs:.2} s"),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let points = h_contour(Family::Fbn, 41, 41, 0.0).unwrap();
    let min = points.iter().map(|p| p.h).fold(f64::INFINITY, f64::min);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        "4",
        points.len() == 41 * 41 && min >= -1e-9 && secs < 10.0,
        format!("{} grid points, min H {min:.3e}, {secs:.2} s", points.len()),
    )
}

fn criterion_5() -> Outcome {
    let (gamma, kappa) = (0.3, 0.9);
    let sigma = [gamma, kappa];
    let tau = 0.01;
    let n_max = 100;
    let mut worst: f64 = 0.0;
    let schemes = [
        ThetaScheme::new(Family::Fbt, 1.0, 0.0).unwrap(),
        ThetaScheme::new(Family::Fbt, 1.0 - gamma, 0.0).unwrap(),
        ThetaScheme::new(Family::Fbt, 1.0 - kappa, -0.5).unwrap(),
        ThetaScheme::new(Family::Fbn, 1.0 - gamma, 0.5).unwrap(),
        ThetaScheme::new(Family::Fbn, 1.0 - kappa, 1.0).unwrap(),
    ];
    for scheme in schemes {
        let w = weights_for(scheme, n_max).unwrap();
        let start = StartingWeights::build(&w, &sigma, n_max).unwrap();
        for &p in &sigma {
            let samples: Vec<f64> = (0..=n_max).map(|k| (k as f64 * tau).powf(p)).collect();
            for n in 1..=n_max {
                let approx = apply_discrete_operator(&w, Some(&start), &samples, n, tau).unwrap();
                let exact = rl_power_derivative(scheme.alpha, p, n as f64 * tau);
                worst = worst.max((approx - exact).abs() / exact.abs());
            }
        }
    }
    outcome("5", worst <= 1e-9, format!("max relative residual {worst:.2e}"))
}

fn criterion_6() -> Outcome {
    let case = BenchmarkCase::new(BenchmarkId::Weak1d, 0.3, 0.9);
    let steps = [10, 20, 40, 80];
    let ec = column(case, Family::Fbt, (0.0, 0.0), &steps, &[5000], true);
    let eo = column(case, Family::Fbt, (0.0, 0.0), &steps, &[5000], false);
    let expected = [1.05368e-2, 1.89214e-3, 5.54574e-4, 1.47119e-4];
    let values_ok = ec.iter().zip(&expected).all(|(v, e)| within_rel(*v, *e, 0.02));
    let rc = orders(&ec);
    let ro = orders(&eo);
    let rates_ok = orders_within(&rc, &[2.4773, 1.7706, 1.9144], 0.05);
    let eo_ok = ro.iter().all(|&r| r < 0.5);
    outcome(
        "6",
        values_ok && rates_ok && eo_ok,
        format!("E_c {} rates {} | E_o rates {}", fmt_sci(&ec), fmt_list(&rc, 4), fmt_list(&ro, 4)),
    )
}

fn criterion_7() -> Outcome {
    let case = BenchmarkCase::new(BenchmarkId::Weak1d, 0.4, 0.8);
    let ec = column(case, Family::Fbn, (0.0, 0.0), &[10, 20, 40, 80], &[5000], true);
    let expected = [6.80886e-3, 1.83124e-3, 5.00615e-4, 1.29413e-4];
    let values_ok = ec.iter().zip(&expected).all(|(v, e)| within_rel(*v, *e, 0.02));
    let expected_rates: Vec<f64> = expected.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let rc = orders(&ec);
    outcome(
        "7",
        values_ok && orders_within(&rc, &expected_rates, 0.05),
        format!("E_c {} rates {}", fmt_sci(&ec), fmt_list(&rc, 4)),
    )
}

fn criterion_8() -> Outcome {
    let cells = [10, 20, 40, 80];
    let mut passed = true;
    let mut detail = Vec::new();
    for (family, (g, k), e10) in [(Family::Fbt, (0.6, 0.2), 9.73080e-2), (Family::Fbn, (0.3, 0.9), 9.67827e-2)] {
        let case = BenchmarkCase::new(BenchmarkId::Weak1d, g, k);
        let ec = column(case, family, (0.0, 0.0), &[1000], &cells, true);
        let r = orders(&ec);
        passed &= within_rel(ec[0], e10, 0.02) && orders_within(&r, &[1.9932, 1.9984, 2.0], 0.02);
        detail.push(format!("{}: E(1/10) {:.5e} orders {}", family.name(), ec[0], fmt_list(&r, 4)));
    }
    outcome("8", passed, detail.join(" | "))
}

fn criterion_9() -> Outcome {
    let case = BenchmarkCase::new(BenchmarkId::MittagLeffler, 0.8, 0.8);
    let steps = [20, 40, 80, 160];
    let ec = column(case, Family::Fbt, (0.0, 0.0), &steps, &[5000], true);
    let eo = column(case, Family::Fbt, (0.0, 0.0), &steps, &[5000], false);
    let rc = orders(&ec);
    let ro = orders(&eo);
    let c_ok = orders_within(&rc, &[1.7695, 1.8613, 1.9202], 0.05);
    let o_ok = orders_within(&ro, &[0.8061, 0.8097, 0.8080], 0.05);
    outcome(
        "9",
        c_ok && o_ok,
        format!(
            "corrected rates {} ({}) | uncorrected rates {} ({})",
            fmt_list(&rc, 4),
            if c_ok { "ok" } else { "off" },
            fmt_list(&ro, 4),
            if o_ok { "ok" } else { "off" }
        ),
    )
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let case = BenchmarkCase::new(BenchmarkId::Smooth2d, 0.8, 0.9);
    let e = column(case, Family::Fbt, (0.0, 0.0), &[10, 20, 40], &[100], false);
    let r = orders(&e);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        "10",
        orders_within(&r, &[2.0, 2.0], 0.15),
        format!("errors {} orders {} at 100 cells per axis, {secs:.1} s", fmt_sci(&e), fmt_list(&r, 4)),
    )
}

fn criterion_10_paper_scale() -> Outcome {
    let start = Instant::now();
    let case = BenchmarkCase::new(BenchmarkId::Smooth2d, 0.8, 0.9);
    let e = column(case, Family::Fbt, (0.0, 0.0), &[10, 20, 40], &[400], false);
    let expected = [5.80147e-3, 1.47696e-3, 3.47434e-4];
    let r = orders(&e);
    let passed = e.iter().zip(&expected).all(|(v, x)| within_rel(*v, *x, 0.05))
        && orders_within(&r, &[1.97, 2.09], 0.1);
    let secs = start.elapsed().as_secs_f64();
    outcome(
        "10 (full resolution)",
        passed,
        format!("errors {} orders {} at 400 cells per axis, {secs:.0} s", fmt_sci(&e), fmt_list(&r, 4)),
    )
}

fn criterion_11() -> Outcome {
    let case = BenchmarkCase::new(BenchmarkId::Weak1d, 0.6, 0.5);
    let problem = case.problem().unwrap();
    let space = FemSpace::new(case.mesh(5000).unwrap()).unwrap();
    let steps = 20;
    let argmax = |corrected: bool| {
        let mut cfg = SchemeConfig::new(Family::Fbt, 0.0, 0.49, steps);
        if corrected {
            cfg = cfg.with_correction(case.default_sigma());
        }
        let result = run(&problem, &space, &cfg).unwrap();
        profile_argmax(&error_profile(&result).unwrap()).unwrap()
    };
    let (ac, ao) = (argmax(true), argmax(false));
    outcome(
        "11",
        ac == steps && ao >= 1 && ao <= steps / 4,
        format!("corrected argmax n = {ac} of {steps}, uncorrected argmax n = {ao}"),
    )
}

fn criterion_12() -> Outcome {
    let k = 2.0 * PI;
    let norm_u0 = 0.5f64.sqrt();
    let norm_lap = k * k * norm_u0;
    let bound = 10.0 * (norm_u0 + norm_lap);
    let configs = [
        (Family::Fbt, 0.3, 0.9, 0.0, 0.0),
        (Family::Fbt, 0.7, 0.3, -1.0, 0.4),
        (Family::Fbn, 0.4, 0.8, 0.0, 0.0),
        (Family::Fbn, 0.5, 0.6, -1.0, 1.0),
    ];
    let mut passed = true;
    let mut largest: f64 = 0.0;
    let mut worst_growth: f64 = 0.0;
    for (family, gamma, kappa, tg, tk) in configs {
        let problem = CableProblem {
            gamma,
            kappa,
            mu: 1.0,
            final_time: 1.0,
            source: Arc::new(|_, _| 0.0),
            u0: Arc::new(move |p| (k * p[0]).sin()),
            grad_u0: Arc::new(move |p| [k * (k * p[0]).cos(), 0.0]),
            laplacian_u0: Some(Arc::new(move |p| -k * k * (k * p[0]).sin())),
            exact: None,
        };
        let space = FemSpace::new(BenchmarkCase::new(BenchmarkId::Weak1d, gamma, kappa).mesh(1000).unwrap())
            .unwrap();
        let mut previous: Option<f64> = None;
        for steps in [5, 10, 20, 40, 80, 160, 320] {
            let result = run(&problem, &space, &SchemeConfig::new(family, tg, tk, steps)).unwrap();
            let peak = result.solutions.iter().map(|u| space.l2_norm(u)).fold(0.0, f64::max);
            largest = largest.max(peak);
            passed &= peak.is_finite() && peak <= bound;
            if let Some(prev) = previous {
                worst_growth = worst_growth.max(peak / prev - 1.0);
                passed &= peak <= 1.01 * prev;
            }
            previous = Some(peak);
        }
    }
    outcome(
        "12",
        passed,
        format!(
            "largest max_n norm {largest:.4e} against bound {bound:.4e}, worst growth under halving {:.3}%",
            100.0 * worst_growth
        ),
    )
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let full = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }

    let criteria: [fn() -> Outcome; 12] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
        criterion_11,
        criterion_12,
    ];
    let mut unexpected = Vec::new();
    let mut report = |o: Outcome| {
        let known = KNOWN_DEVIATIONS.contains(&o.id);
        let tag = match (o.passed, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known deviation)",
            (false, false) => "FAIL",
        };
        println!("criterion {}: {tag} - {}", o.id, o.detail);
        if o.passed == known {
            unexpected.push(o.id);
        }
    };
    for c in criteria {
        report(c());
    }
    if full {
        let o = criterion_10_paper_scale();
        // The full-resolution check is expected to pass.
        println!(
            "criterion {}: {} - {}",
            o.id,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.passed {
            unexpected.push(o.id);
        }
    } else {
        println!("criterion 10 (full resolution): skipped, pass --ignored to run it");
    }

    if unexpected.is_empty() {
        println!("acceptance: all outcomes as expected");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
