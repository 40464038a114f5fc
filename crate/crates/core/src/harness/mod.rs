//! Benchmark problems, convergence sweeps and report emission.

mod config;
mod presets;

pub use config::{
    write_solve_outputs, CorrectionSpec, MeshSpec, ProblemSpec, SchemeSpec, SolveConfig, SolveSummary,
};
pub use presets::{preset, Check, Preset, PRESET_IDS};

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{FemSpace, Mesh, Point};
use crate::solver::{run, CableProblem, SchemeConfig, SolveResult, Timings};
use crate::specfun::{gamma_fn, mittag_leffler_neg, rl_power_derivative, MLSeriesParams};
use crate::weights::Family;

/// The three benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkId {
    /// u = (1 + t^γ + t^κ + t³) sin(2πx) on (0, 1), μ = 1.
    Weak1d,
    /// u = E_γ(−t^γ) sin x on (0, π), μ = 0, f = 0.
    MittagLeffler,
    /// u = (1 + 3t³) sin(2πx) sin(2πy) on (0, 1)², μ = 1.
    Smooth2d,
}

impl BenchmarkId {
    pub fn name(self) -> &'static str {
        match self {
            BenchmarkId::Weak1d => "weak1d",
            BenchmarkId::MittagLeffler => "mittag_leffler",
            BenchmarkId::Smooth2d => "smooth2d",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            BenchmarkId::Smooth2d => 2,
            _ => 1,
        }
    }

    pub fn length(self) -> f64 {
        match self {
            BenchmarkId::MittagLeffler => PI,
            _ => 1.0,
        }
    }

    pub fn default_mu(self) -> f64 {
        match self {
            BenchmarkId::MittagLeffler => 0.0,
            _ => 1.0,
        }
    }
}

impl std::str::FromStr for BenchmarkId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weak1d" => Ok(Self::Weak1d),
            "mittag_leffler" | "ml" => Ok(Self::MittagLeffler),
            "smooth2d" => Ok(Self::Smooth2d),
            _ => Err(Error::Config(format!("unknown benchmark case '{s}'"))),
        }
    }
}

/// A benchmark with its physical parameters bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkCase {
    pub id: BenchmarkId,
    pub gamma: f64,
    pub kappa: f64,
    pub mu: f64,
    pub final_time: f64,
}

impl BenchmarkCase {
    pub fn new(id: BenchmarkId, gamma: f64, kappa: f64) -> Self {
        Self {
            id,
            gamma,
            kappa,
            mu: id.default_mu(),
            final_time: 1.0,
        }
    }

    pub fn mesh(&self, n_cells: usize) -> Result<Mesh> {
        Mesh::new(self.id.dim(), self.id.length(), n_cells)
    }

    /// Correction exponents used for the E_c columns: {γ, κ} for the weak
    /// problem, {γ, 2γ, 3γ} for the Mittag-Leffler problem (the leading
    /// powers of its expansion), none for the smooth 2D problem.
    pub fn default_sigma(&self) -> Vec<f64> {
        match self.id {
            BenchmarkId::Weak1d => {
                let mut s = vec![self.gamma, self.kappa];
                s.sort_by(f64::total_cmp);
                s.dedup();
                s
            }
            BenchmarkId::MittagLeffler => vec![self.gamma, 2.0 * self.gamma, 3.0 * self.gamma],
            BenchmarkId::Smooth2d => Vec::new(),
        }
    }

    pub fn problem(&self) -> Result<CableProblem> {
        let (g, k, mu) = (self.gamma, self.kappa, self.mu);
        let w = 2.0 * PI;
        let p = match self.id {
            BenchmarkId::Weak1d => {
                let time_part = memo_in_time(move |t| manufactured_time_factor_1d(g, k, mu, t));
                CableProblem {
                    gamma: g,
                    kappa: k,
                    mu,
                    final_time: self.final_time,
                    source: Arc::new(move |p, t| time_part(t) * (w * p[0]).sin()),
                    u0: Arc::new(move |p| (w * p[0]).sin()),
                    grad_u0: Arc::new(move |p| [w * (w * p[0]).cos(), 0.0]),
                    laplacian_u0: Some(Arc::new(move |p| -w * w * (w * p[0]).sin())),
                    exact: Some(Arc::new(move |p, t| {
                        (1.0 + t.powf(g) + t.powf(k) + t.powi(3)) * (w * p[0]).sin()
                    })),
                }
            }
            BenchmarkId::MittagLeffler => {
                let params = MLSeriesParams::new(g);
                params.validate()?;
                let ml = memo_in_time(move |t| {
                    mittag_leffler_neg(&params, t).expect("series converges for t ≤ 2")
                });
                if self.final_time > 2.0 {
                    return Err(Error::Parameter(
                        "the Mittag-Leffler benchmark supports final times up to 2".into(),
                    ));
                }
                CableProblem {
                    gamma: g,
                    kappa: k,
                    mu,
                    final_time: self.final_time,
                    source: Arc::new(|_, _| 0.0),
                    u0: Arc::new(|p| p[0].sin()),
                    grad_u0: Arc::new(|p| [p[0].cos(), 0.0]),
                    laplacian_u0: Some(Arc::new(|p| -p[0].sin())),
                    exact: Some(Arc::new(move |p, t| ml(t) * p[0].sin())),
                }
            }
            BenchmarkId::Smooth2d => {
                let time_part = memo_in_time(move |t| manufactured_time_factor_2d(g, k, mu, t));
                let s2 = move |p: Point| (w * p[0]).sin() * (w * p[1]).sin();
                CableProblem {
                    gamma: g,
                    kappa: k,
                    mu,
                    final_time: self.final_time,
                    source: Arc::new(move |p, t| time_part(t) * s2(p)),
                    u0: Arc::new(s2),
                    grad_u0: Arc::new(move |p| {
                        [
                            w * (w * p[0]).cos() * (w * p[1]).sin(),
                            w * (w * p[0]).sin() * (w * p[1]).cos(),
                        ]
                    }),
                    laplacian_u0: Some(Arc::new(move |p| -2.0 * w * w * s2(p))),
                    exact: Some(Arc::new(move |p, t| (1.0 + 3.0 * t.powi(3)) * s2(p))),
                }
            }
        };
        p.validate()?;
        Ok(p)
    }
}

/// Wraps a function of time with a one-entry cache. Loads and error norms
/// evaluate the same time level at every quadrature point.
fn memo_in_time(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> impl Fn(f64) -> f64 + Send + Sync {
    let last = Mutex::new((f64::NAN, 0.0));
    move |t| {
        let mut guard = last.lock().unwrap_or_else(|e| e.into_inner());
        if guard.0 != t {
            *guard = (t, f(t));
        }
        guard.1
    }
}

// time powers present in the weak solution
fn weak_powers(gamma: f64, kappa: f64) -> [f64; 4] {
    [0.0, gamma, kappa, 3.0]
}

// f(x, t) / sin(2πx) for the weak 1D solution
fn manufactured_time_factor_1d(gamma: f64, kappa: f64, mu: f64, t: f64) -> f64 {
    let ut = gamma * t.powf(gamma - 1.0) + kappa * t.powf(kappa - 1.0) + 3.0 * t * t;
    let powers = weak_powers(gamma, kappa);
    let dg: f64 = powers.iter().map(|&s| rl_power_derivative(1.0 - gamma, s, t)).sum();
    let dk: f64 = powers.iter().map(|&s| rl_power_derivative(1.0 - kappa, s, t)).sum();
    ut + 4.0 * PI * PI * dg + mu * mu * dk
}

/// Source for u = (1 + t^γ + t^κ + t³) sin(2πx), from the power rule
/// D^β t^σ = Γ(σ+1)/Γ(σ+1−β) t^{σ−β}.
pub fn manufactured_source_1d(gamma: f64, kappa: f64, mu: f64, x: f64, t: f64) -> f64 {
    manufactured_time_factor_1d(gamma, kappa, mu, t) * (2.0 * PI * x).sin()
}

fn manufactured_time_factor_2d(gamma: f64, kappa: f64, mu: f64, t: f64) -> f64 {
    let g3 = gamma_fn(gamma + 3.0).expect("positive argument");
    let k3 = gamma_fn(kappa + 3.0).expect("positive argument");
    let t3 = t.powi(3);
    9.0 * t * t
        + 8.0 * t.powf(gamma - 1.0) * PI * PI * (gamma.powi(3) + 3.0 * gamma * gamma + 2.0 * gamma + 18.0 * t3)
            / g3
        + mu * mu * t.powf(kappa - 1.0) * (kappa.powi(3) + 3.0 * kappa * kappa + 2.0 * kappa + 18.0 * t3) / k3
}

/// Source for u = (1 + 3t³) sin(2πx) sin(2πy), in the closed form
/// `[9t² + 8π² t^{γ−1}(γ³+3γ²+2γ+18t³)/Γ(γ+3) + μ² t^{κ−1}(κ³+3κ²+2κ+18t³)/Γ(κ+3)] sin sin`.
pub fn manufactured_source_2d(gamma: f64, kappa: f64, mu: f64, x: f64, y: f64, t: f64) -> f64 {
    manufactured_time_factor_2d(gamma, kappa, mu, t) * (2.0 * PI * x).sin() * (2.0 * PI * y).sin()
}

/// `log₂(E_i / E_{i+1})` for each adjacent pair; `None` if either error is
/// not a positive finite number.
pub fn observed_order(errors: &[f64]) -> Vec<Option<f64>> {
    errors
        .windows(2)
        .map(|w| {
            let ok = |v: f64| v > 0.0 && v.is_finite();
            (ok(w[0]) && ok(w[1])).then(|| (w[0] / w[1]).log2())
        })
        .collect()
}

/// One point of a per-level error profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub n: usize,
    pub t: f64,
    pub error: f64,
}

/// Per-level errors ‖uⁿ − Uⁿ‖ of a run with a known exact solution.
pub fn error_profile(result: &SolveResult) -> Result<Vec<ProfilePoint>> {
    let errors = result
        .errors
        .as_ref()
        .ok_or_else(|| Error::Usage("the run has no exact solution to compare against".into()))?;
    Ok(errors
        .iter()
        .zip(&result.times)
        .enumerate()
        .map(|(n, (&error, &t))| ProfilePoint { n, t, error })
        .collect())
}

/// Level with the largest error; the first one on ties.
pub fn profile_argmax(profile: &[ProfilePoint]) -> Option<usize> {
    profile
        .iter()
        .fold(None, |best: Option<&ProfilePoint>, p| match best {
            Some(b) if b.error >= p.error => Some(b),
            _ => Some(p),
        })
        .map(|p| p.n)
}

pub fn profile_csv(profile: &[ProfilePoint]) -> String {
    let mut out = String::from("n,t_n,error\n");
    for p in profile {
        let _ = writeln!(out, "{},{},{}", p.n, sci(p.t), sci(p.error));
    }
    out
}

/// Six significant digits in scientific notation.
pub fn sci(v: f64) -> String {
    format!("{v:.5e}")
}

/// One run of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub case: BenchmarkCase,
    pub family: Family,
    pub theta_gamma: f64,
    pub theta_kappa: f64,
    pub steps: usize,
    pub n_cells: usize,
    pub corrected: bool,
    /// Reference value this run is compared against, if any.
    #[serde(default)]
    pub reference_error: Option<f64>,
}

impl GridEntry {
    pub fn scheme(&self) -> SchemeConfig {
        let mut cfg = SchemeConfig::new(self.family, self.theta_gamma, self.theta_kappa, self.steps);
        if self.corrected {
            cfg.correction = Some(self.case.default_sigma()).filter(|s| !s.is_empty());
        }
        cfg
    }

    fn same_series(&self, other: &GridEntry) -> bool {
        self.case == other.case
            && self.family == other.family
            && self.theta_gamma == other.theta_gamma
            && self.theta_kappa == other.theta_kappa
            && self.corrected == other.corrected
    }

    /// True when `self` refines `prev` by a factor 2 in exactly one of τ, h.
    fn refines(&self, prev: &GridEntry) -> bool {
        self.same_series(prev)
            && ((self.steps == 2 * prev.steps && self.n_cells == prev.n_cells)
                || (self.n_cells == 2 * prev.n_cells && self.steps == prev.steps))
    }
}

/// A solved grid entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub index: usize,
    pub entry: GridEntry,
    pub tau: f64,
    pub h: f64,
    pub h_diameter: f64,
    pub error: Option<f64>,
    pub order: Option<f64>,
    pub reference_order: Option<f64>,
    pub argmax_level: Option<usize>,
    pub failure: Option<String>,
    pub timings: Option<Timings>,
    #[serde(skip)]
    pub profile: Vec<ProfilePoint>,
}

/// Outcome of one acceptance check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub description: String,
    pub measured: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub title: String,
    pub norm: String,
    pub rows: Vec<ReportRow>,
    pub checks: Vec<CheckOutcome>,
}

impl ConvergenceReport {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Rows in table order; deterministic (no timings).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "row,case,family,gamma,kappa,mu,theta_gamma,theta_kappa,corrected,steps,tau,n_cells,h,h_diameter,error,order,reference_error,reference_order,argmax_level,status\n",
        );
        let opt = |v: Option<f64>| v.map_or_else(|| "--".to_string(), sci);
        for r in &self.rows {
            let e = &r.entry;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.index,
                e.case.id.name(),
                e.family,
                e.case.gamma,
                e.case.kappa,
                e.case.mu,
                e.theta_gamma,
                e.theta_kappa,
                e.corrected,
                e.steps,
                sci(r.tau),
                e.n_cells,
                sci(r.h),
                sci(r.h_diameter),
                opt(r.error),
                opt(r.order),
                opt(e.reference_error),
                opt(r.reference_order),
                r.argmax_level.map_or_else(|| "--".to_string(), |v| v.to_string()),
                r.failure.as_deref().map_or("ok".to_string(), |f| format!("failed: {}", f.replace(',', ";"))),
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// Writes `report.csv`, `report.json` and one `profile_<row>.csv` per run.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.csv"), self.to_csv())?;
        std::fs::write(dir.join("report.json"), self.to_json()?)?;
        for r in &self.rows {
            if !r.profile.is_empty() {
                std::fs::write(dir.join(format!("profile_{:03}.csv", r.index)), profile_csv(&r.profile))?;
            }
        }
        Ok(())
    }
}

fn solve_entry(entry: &GridEntry) -> Result<SolveResult> {
    let problem = entry.case.problem()?;
    let space = FemSpace::new(entry.case.mesh(entry.n_cells)?)?;
    run(&problem, &space, &entry.scheme())
}

/// Runs every grid entry (up to `workers` at a time) and assembles the
/// report in grid order. A failing run is reported and does not stop the sweep.
pub fn sweep(title: &str, grid: &[GridEntry], workers: usize) -> Result<ConvergenceReport> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Resource(e.to_string()))?;
    let outcomes: Vec<Result<SolveResult>> = pool.install(|| grid.par_iter().map(solve_entry).collect());

    let mut rows: Vec<ReportRow> = Vec::with_capacity(grid.len());
    for (index, (entry, outcome)) in grid.iter().zip(outcomes).enumerate() {
        let mesh = entry.case.mesh(entry.n_cells).ok();
        let mut row = ReportRow {
            index,
            entry: entry.clone(),
            tau: entry.case.final_time / entry.steps as f64,
            h: mesh.map_or(f64::NAN, |m| m.h()),
            h_diameter: mesh.map_or(f64::NAN, |m| m.h_diameter()),
            error: None,
            order: None,
            reference_order: None,
            argmax_level: None,
            failure: None,
            timings: None,
            profile: Vec::new(),
        };
        match outcome.and_then(|r| Ok((error_profile(&r)?, r))) {
            Ok((profile, result)) => {
                row.error = result.max_error;
                row.argmax_level = profile_argmax(&profile);
                row.timings = Some(result.timings);
                row.profile = profile;
            }
            Err(e) => row.failure = Some(e.to_string()),
        }
        if let Some(prev) = rows.last() {
            if entry.refines(&prev.entry) {
                let pair = |a: Option<f64>, b: Option<f64>| match (a, b) {
                    (Some(a), Some(b)) => observed_order(&[a, b])[0],
                    _ => None,
                };
                row.order = pair(prev.error, row.error);
                row.reference_order = pair(prev.entry.reference_error, entry.reference_error);
            }
        }
        rows.push(row);
    }
    Ok(ConvergenceReport {
        title: title.to_string(),
        norm: "L2 by Gauss quadrature (5 points per cell in 1D, 4x4 per cell in 2D), max over all time levels"
            .to_string(),
        rows,
        checks: Vec::new(),
    })
}

/// Runs a preset table and evaluates its acceptance checks.
pub fn run_preset(preset: &Preset, workers: usize) -> Result<ConvergenceReport> {
    let mut report = sweep(&preset.title, &preset.grid, workers)?;
    report.checks = preset.checks.iter().map(|c| c.evaluate(&report.rows)).collect();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn observed_order_examples() {
        let o = observed_order(&[1.05368e-2, 1.89214e-3]);
        assert!((o[0].unwrap() - 2.4773).abs() < 5e-5);
        assert_eq!(observed_order(&[4e-4, 1e-4]), vec![Some(2.0)]);
        let o = observed_order(&[2.64217e-2, 1.51117e-2]);
        assert!((o[0].unwrap() - 0.8061).abs() < 5e-5);
        assert_eq!(observed_order(&[1.0, 0.0]), vec![None]);
        assert!(observed_order(&[1.0]).is_empty());
    }

    #[test]
    fn source_1d_residual() {
        // u_t − D^{1−γ}Δu + μ² D^{1−κ}u − f, term by term
        let (g, k, mu) = (0.3, 0.9, 1.0);
        for i in 0..20 {
            let x = 0.05 * i as f64 + 0.01;
            let t = 0.05 + 0.047 * i as f64;
            let s = (2.0 * PI * x).sin();
            let powers = [0.0, g, k, 3.0];
            let ut = (g * t.powf(g - 1.0) + k * t.powf(k - 1.0) + 3.0 * t * t) * s;
            let lap: f64 = powers
                .iter()
                .map(|&p| -4.0 * PI * PI * s * rl_power_derivative(1.0 - g, p, t))
                .sum();
            let react: f64 = powers.iter().map(|&p| s * rl_power_derivative(1.0 - k, p, t)).sum();
            let r = ut - lap + mu * mu * react - manufactured_source_1d(g, k, mu, x, t);
            assert!(r.abs() <= 1e-10 * (1.0 + ut.abs()), "residual {r}");
        }
    }

    #[test]
    fn source_1d_continuous_in_parameters() {
        let a = manufactured_source_1d(0.5, 0.5, 1.0, 0.3, 0.7);
        for k in [0.5 - 1e-6, 0.5 + 1e-6] {
            assert!((manufactured_source_1d(0.5, k, 1.0, 0.3, 0.7) - a).abs() <= 1e-4);
        }
    }

    #[test]
    fn source_2d_matches_rederivation() {
        let (g, k, mu) = (0.8, 0.9, 1.0);
        for i in 0..20 {
            let (x, y, t) = (0.037 * i as f64, 0.9 - 0.041 * i as f64, 0.1 + 0.045 * i as f64);
            let s = (2.0 * PI * x).sin() * (2.0 * PI * y).sin();
            // u = (1 + 3t³) s, Δu = −8π² u
            let d = |beta: f64| rl_power_derivative(beta, 0.0, t) + 3.0 * rl_power_derivative(beta, 3.0, t);
            let want = (9.0 * t * t + 8.0 * PI * PI * d(1.0 - g) + mu * mu * d(1.0 - k)) * s;
            let got = manufactured_source_2d(g, k, mu, x, y, t);
            assert!((got - want).abs() <= 1e-10 * (1.0 + want.abs()), "{got} vs {want}");
        }
        // 40-digit reference value
        let v = manufactured_source_2d(0.8, 0.9, 1.0, 0.25, 0.25, 1.0);
        assert!((v - 383.914_547_133_859_133_6).abs() < 1e-9, "{v}");
        assert!(manufactured_source_2d(0.8, 0.9, 1.0, 0.0, 0.3, 0.5).abs() < 1e-12);
    }

    #[test]
    fn memo_tracks_time() {
        let f = memo_in_time(|t| t * t);
        assert_eq!(f(2.0), 4.0);
        assert_eq!(f(2.0), 4.0);
        assert_eq!(f(3.0), 9.0);
    }

    #[test]
    fn empty_sweep() {
        let r = sweep("empty", &[], 2).unwrap();
        assert!(r.rows.is_empty());
        assert_eq!(r.to_csv().lines().count(), 1);
    }

    #[test]
    fn profile_argmax_prefers_first() {
        let p: Vec<ProfilePoint> = [0.0, 2.0, 2.0, 1.0]
            .iter()
            .enumerate()
            .map(|(n, &e)| ProfilePoint { n, t: n as f64, error: e })
            .collect();
        assert_eq!(profile_argmax(&p), Some(1));
        assert_eq!(profile_argmax(&[]), None);
    }

    #[test]
    fn sigma_sets() {
        assert_eq!(BenchmarkCase::new(BenchmarkId::Weak1d, 0.7, 0.3).default_sigma(), vec![0.3, 0.7]);
        assert_eq!(BenchmarkCase::new(BenchmarkId::Weak1d, 0.5, 0.5).default_sigma(), vec![0.5]);
        assert!(BenchmarkCase::new(BenchmarkId::Smooth2d, 0.8, 0.9).default_sigma().is_empty());
    }
}
