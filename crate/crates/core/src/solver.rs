//! Fully discrete time stepping for
//! `u_t = D^{1−γ} Δu − μ² D^{1−κ} u + f` with homogeneous Dirichlet data.
//!
//! The solver works with `v = u − u₀`, which starts from zero, so the
//! convolution weights never see a jump at `t = 0`. The time derivative uses
//! BDF2 weights and the two fractional derivatives use θ-method weights of
//! orders `1 − γ` and `1 − κ`; all three may carry starting-weight
//! corrections with the same exponent set. Levels `1..=s` couple through the
//! starting part and are solved together as one block system. Every later
//! level shares the same matrix, which is factorized once.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{FemSpace, Point};
use crate::linalg::{cholesky_banded_owned, BandedCholesky, BandedMatrix, BandedSymMatrix};
use crate::specfun::gamma_fn;
use crate::weights::{validate_sigma, weights_for, Family, StartingWeights, ThetaScheme, WeightTable};

pub type SpaceFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;
pub type SpaceTimeFn = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;

/// Largest number of f64 entries the early-level block factorization may use.
pub const BLOCK_STORAGE_LIMIT: usize = 150_000_000;

/// Problem data. `u0` must vanish on the boundary.
#[derive(Clone)]
pub struct CableProblem {
    pub gamma: f64,
    pub kappa: f64,
    pub mu: f64,
    pub final_time: f64,
    pub source: SpaceTimeFn,
    pub u0: SpaceFn,
    pub grad_u0: GradFn,
    /// Analytic Δu₀. Without it the solver falls back to the discrete
    /// Laplacian of the Ritz projection and flags the result.
    pub laplacian_u0: Option<SpaceFn>,
    pub exact: Option<SpaceTimeFn>,
}

impl std::fmt::Debug for CableProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CableProblem")
            .field("gamma", &self.gamma)
            .field("kappa", &self.kappa)
            .field("mu", &self.mu)
            .field("final_time", &self.final_time)
            .field("analytic_laplacian", &self.laplacian_u0.is_some())
            .field("has_exact", &self.exact.is_some())
            .finish_non_exhaustive()
    }
}

impl CableProblem {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma", self.gamma), ("kappa", self.kappa)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Parameter(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::Parameter(format!("mu must be nonnegative, got {}", self.mu)));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(Error::Parameter(format!(
                "final time must be positive, got {}",
                self.final_time
            )));
        }
        Ok(())
    }

    /// Returns a copy with every datum multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let f = self.source.clone();
        let u0 = self.u0.clone();
        let g = self.grad_u0.clone();
        let mut out = self.clone();
        out.source = Arc::new(move |p, t| c * f(p, t));
        out.u0 = Arc::new(move |p| c * u0(p));
        out.grad_u0 = Arc::new(move |p| {
            let v = g(p);
            [c * v[0], c * v[1]]
        });
        out.laplacian_u0 = self.laplacian_u0.clone().map(|l| -> SpaceFn { Arc::new(move |p| c * l(p)) });
        out.exact = self.exact.clone().map(|e| -> SpaceTimeFn { Arc::new(move |p, t| c * e(p, t)) });
        out
    }
}

/// Source of the transformed problem:
/// `F = f + Δu₀ t^{γ−1}/Γ(γ) − μ² u₀ t^{κ−1}/Γ(κ)`.
pub fn transform_rhs(problem: &CableProblem, t: f64, p: Point) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain {
            function: "transform_rhs",
            value: t,
        });
    }
    let lap = problem
        .laplacian_u0
        .as_ref()
        .ok_or_else(|| Error::Usage("transform_rhs needs an analytic Laplacian of u0".into()))?;
    let (cg, ck) = initial_factors(problem, t)?;
    Ok((problem.source)(p, t) + cg * lap(p) - ck * (problem.u0)(p))
}

// t^{γ−1}/Γ(γ) and μ² t^{κ−1}/Γ(κ)
fn initial_factors(problem: &CableProblem, t: f64) -> Result<(f64, f64)> {
    let cg = t.powf(problem.gamma - 1.0) / gamma_fn(problem.gamma)?;
    let ck = problem.mu * problem.mu * t.powf(problem.kappa - 1.0) / gamma_fn(problem.kappa)?;
    Ok((cg, ck))
}

fn default_true() -> bool {
    true
}

/// Time discretization settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub family: Family,
    pub theta_gamma: f64,
    pub theta_kappa: f64,
    /// Exponents σ of the starting-weight correction; `None` or empty for
    /// the plain convolution.
    #[serde(default)]
    pub correction: Option<Vec<f64>>,
    /// Number of steps N; τ = T / N.
    pub steps: usize,
    /// Reuse one factorization for all levels after the starting block.
    #[serde(default = "default_true")]
    pub cache_factorization: bool,
    /// Gauss points per element axis for loads and errors.
    #[serde(default)]
    pub quad_order: Option<usize>,
}

impl SchemeConfig {
    pub fn new(family: Family, theta_gamma: f64, theta_kappa: f64, steps: usize) -> Self {
        Self {
            family,
            theta_gamma,
            theta_kappa,
            correction: None,
            steps,
            cache_factorization: true,
            quad_order: None,
        }
    }

    pub fn with_correction(mut self, sigma: Vec<f64>) -> Self {
        self.correction = Some(sigma);
        self
    }

    pub fn sigma(&self) -> &[f64] {
        self.correction.as_deref().unwrap_or(&[])
    }

    pub fn tau(&self, final_time: f64) -> f64 {
        final_time / self.steps as f64
    }
}

/// Weight tables and the scalar factors multiplying M and A in the scheme.
#[derive(Debug, Clone)]
pub struct StepCoefficients {
    pub tau: f64,
    pub first: WeightTable,
    pub frac_gamma: WeightTable,
    pub frac_kappa: WeightTable,
    pub start_first: Option<StartingWeights>,
    pub start_gamma: Option<StartingWeights>,
    pub start_kappa: Option<StartingWeights>,
    c_first: f64,
    c_gamma: f64,
    c_kappa: f64,
}

impl StepCoefficients {
    pub fn new(problem: &CableProblem, config: &SchemeConfig) -> Result<Self> {
        problem.validate()?;
        if config.steps == 0 {
            return Err(Error::Parameter("number of steps must be positive".into()));
        }
        let n = config.steps;
        let tau = config.tau(problem.final_time);
        let sg = ThetaScheme::new(config.family, 1.0 - problem.gamma, config.theta_gamma)?;
        let sk = ThetaScheme::new(config.family, 1.0 - problem.kappa, config.theta_kappa)?;
        let first = weights_for(ThetaScheme::bdf2(), n)?;
        let frac_gamma = weights_for(sg, n)?;
        let frac_kappa = weights_for(sk, n)?;
        let sigma = config.sigma();
        let (start_first, start_gamma, start_kappa) = if sigma.is_empty() {
            (None, None, None)
        } else {
            validate_sigma(sigma)?;
            if sigma.len() > n {
                return Err(Error::Parameter(format!(
                    "{} correction terms need at least as many steps, got {n}",
                    sigma.len()
                )));
            }
            (
                Some(StartingWeights::build(&first, sigma, n)?),
                Some(StartingWeights::build(&frac_gamma, sigma, n)?),
                Some(StartingWeights::build(&frac_kappa, sigma, n)?),
            )
        };
        Ok(Self {
            tau,
            first,
            frac_gamma,
            frac_kappa,
            start_first,
            start_gamma,
            start_kappa,
            c_first: 1.0 / tau,
            c_gamma: tau.powf(problem.gamma - 1.0),
            c_kappa: problem.mu * problem.mu * tau.powf(problem.kappa - 1.0),
        })
    }

    /// Number of starting terms s.
    pub fn s(&self) -> usize {
        self.start_first.as_ref().map_or(0, |w| w.s())
    }

    /// (mass, stiffness) factors of the convolution weight with index `k`.
    pub fn convolution(&self, k: usize) -> (f64, f64) {
        (
            self.c_first * self.first.omega[k] + self.c_kappa * self.frac_kappa.omega[k],
            self.c_gamma * self.frac_gamma.omega[k],
        )
    }

    /// (mass, stiffness) factors of the starting weight ω_{n,j}.
    pub fn starting(&self, n: usize, j: usize) -> (f64, f64) {
        match (&self.start_first, &self.start_gamma, &self.start_kappa) {
            (Some(a), Some(g), Some(k)) => (
                self.c_first * a.weight(n, j) + self.c_kappa * k.weight(n, j),
                self.c_gamma * g.weight(n, j),
            ),
            _ => (0.0, 0.0),
        }
    }

    pub fn worst_starting_condition(&self) -> Option<f64> {
        [&self.start_first, &self.start_gamma, &self.start_kappa]
            .iter()
            .filter_map(|w| w.as_ref().map(|w| w.worst_condition))
            .reduce(f64::max)
    }
}

/// The matrix multiplying Vⁿ at every level n > s:
/// `(ω₀/τ) M + τ^{γ−1} ω₀^{(1−γ)} A + μ² τ^{κ−1} ω₀^{(1−κ)} M`.
pub fn step_matrix(space: &FemSpace, coeffs: &StepCoefficients) -> BandedSymMatrix {
    let (cm, ca) = coeffs.convolution(0);
    BandedSymMatrix::combination(&[(cm, space.mass()), (ca, space.stiffness())])
}

/// Right-hand side for level `n > s`: the load minus all known history terms.
///
/// `history[k - 1]` holds V^k; at least `n − 1` levels must be present.
pub fn history_rhs(
    space: &FemSpace,
    coeffs: &StepCoefficients,
    history: &[Vec<f64>],
    load: &[f64],
    n: usize,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Usage("levels start at 1".into()));
    }
    if history.len() < n - 1 {
        return Err(Error::MissingHistory(history.len() + 1));
    }
    let s = coeffs.s();
    if n <= s {
        return Err(Error::Usage(format!(
            "level {n} belongs to the coupled starting block (s = {s})"
        )));
    }
    let nd = space.n_dofs();
    let mut ym = vec![0.0; nd];
    let mut ya = vec![0.0; nd];
    let mut axpy2 = |cm: f64, ca: f64, v: &[f64]| {
        for ((m, a), x) in ym.iter_mut().zip(ya.iter_mut()).zip(v) {
            *m += cm * x;
            *a += ca * x;
        }
    };
    for k in 1..n {
        let (cm, ca) = coeffs.convolution(n - k);
        axpy2(cm, ca, &history[k - 1]);
    }
    for j in 1..=s {
        let (cm, ca) = coeffs.starting(n, j);
        axpy2(cm, ca, &history[j - 1]);
    }
    let mut b = load.to_vec();
    space.mass().matvec_add(-1.0, &ym, &mut b);
    space.stiffness().matvec_add(-1.0, &ya, &mut b);
    Ok(b)
}

/// Solves levels 1..=s jointly. Unknown `i·s + (n−1)` is dof `i` at level `n`.
fn solve_starting_block(
    space: &FemSpace,
    coeffs: &StepCoefficients,
    loads: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    let s = coeffs.s();
    let nd = space.n_dofs();
    let bw = space.mesh().bandwidth();
    let half = s * bw + s - 1;
    let order = s * nd;
    if order.saturating_mul(3 * half + 1) > BLOCK_STORAGE_LIMIT {
        return Err(Error::Resource(format!(
            "starting block of {order} unknowns with half-bandwidth {half} exceeds storage limit"
        )));
    }
    let mut big = BandedMatrix::zeros(order, half, half);
    let (mass, stiff) = (space.mass(), space.stiffness());
    for n in 1..=s {
        for k in 1..=s {
            let (mut cm, mut ca) = coeffs.starting(n, k);
            if k <= n {
                let (m0, a0) = coeffs.convolution(n - k);
                cm += m0;
                ca += a0;
            }
            for i in 0..nd {
                for j in i.saturating_sub(bw)..(i + bw + 1).min(nd) {
                    let v = cm * mass.get(i, j) + ca * stiff.get(i, j);
                    if v != 0.0 {
                        big.add(i * s + n - 1, j * s + k - 1, v);
                    }
                }
            }
        }
    }
    let mut rhs = vec![0.0; order];
    for n in 1..=s {
        for i in 0..nd {
            rhs[i * s + n - 1] = loads[n - 1][i];
        }
    }
    let lu = big.lu().map_err(|e| Error::LevelSolve {
        level: 1,
        source: Box::new(e),
    })?;
    let x = lu.solve(&rhs);
    Ok((1..=s)
        .map(|n| (0..nd).map(|i| x[i * s + n - 1]).collect())
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub setup_s: f64,
    pub stepping_s: f64,
    pub error_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub dofs: usize,
    pub steps: usize,
    pub starting_terms: usize,
    pub factorizations: usize,
    pub triangular_solves: usize,
    /// Largest 1-norm condition number of the starting-weight systems.
    pub starting_condition: Option<f64>,
}

/// Output of [`run`]. Index `n` of every per-level vector refers to t_n = nτ.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub tau: f64,
    pub times: Vec<f64>,
    /// Uⁿ = Vⁿ + R_h u₀ for n = 0..=N.
    pub solutions: Vec<Vec<f64>>,
    /// R_h u₀.
    pub initial_projection: Vec<f64>,
    pub errors: Option<Vec<f64>>,
    pub max_error: Option<f64>,
    /// True when Δu₀ came from the discrete Laplacian.
    pub approximate_laplacian: bool,
    pub timings: Timings,
    pub stats: SolveStats,
}

impl SolveResult {
    /// Vⁿ = Uⁿ − R_h u₀.
    pub fn transformed(&self, n: usize) -> Vec<f64> {
        self.solutions[n]
            .iter()
            .zip(&self.initial_projection)
            .map(|(u, p)| u - p)
            .collect()
    }
}

/// Runs the scheme from t = 0 to T.
pub fn run(problem: &CableProblem, space: &FemSpace, config: &SchemeConfig) -> Result<SolveResult> {
    let t_start = Instant::now();
    let coeffs = StepCoefficients::new(problem, config)?;
    let n_steps = config.steps;
    let tau = coeffs.tau;
    let q = config.quad_order.unwrap_or_else(|| space.default_quad_order());
    if q == 0 {
        return Err(Error::Parameter("quadrature order must be positive".into()));
    }
    let nd = space.n_dofs();
    let s = coeffs.s();
    let mut stats = SolveStats {
        dofs: nd,
        steps: n_steps,
        starting_terms: s,
        starting_condition: coeffs.worst_starting_condition(),
        ..Default::default()
    };

    let u0h = space.ritz_project(|p| (problem.grad_u0)(p), q)?;
    stats.factorizations += 1;
    stats.triangular_solves += 1;

    // Load vectors of the transformed source. Without an analytic Δu₀ the
    // term (Δu₀, φ) is replaced by −A R_h u₀.
    let approximate_laplacian = problem.laplacian_u0.is_none();
    let fallback = if approximate_laplacian {
        let mut neg_a_u0 = vec![0.0; nd];
        space.stiffness().matvec_add(-1.0, &u0h, &mut neg_a_u0);
        Some((neg_a_u0, space.load_vector(|p| (problem.u0)(p), q)))
    } else {
        None
    };
    let load_at = |n: usize| -> Result<Vec<f64>> {
        let t = n as f64 * tau;
        match &fallback {
            None => {
                let (cg, ck) = initial_factors(problem, t)?;
                let lap = problem.laplacian_u0.as_ref().expect("analytic Laplacian present");
                Ok(space.load_vector(
                    |p| (problem.source)(p, t) + cg * lap(p) - ck * (problem.u0)(p),
                    q,
                ))
            }
            Some((neg_a_u0, load_u0)) => {
                let (cg, ck) = initial_factors(problem, t)?;
                let mut b = space.load_vector(|p| (problem.source)(p, t), q);
                for ((bi, a), m) in b.iter_mut().zip(neg_a_u0).zip(load_u0) {
                    *bi += cg * a - ck * m;
                }
                Ok(b)
            }
        }
    };
    let setup_s = t_start.elapsed().as_secs_f64();

    let t_step = Instant::now();
    let mut history: Vec<Vec<f64>> = Vec::with_capacity(n_steps);
    if s > 0 {
        let loads = (1..=s).map(load_at).collect::<Result<Vec<_>>>()?;
        history = solve_starting_block(space, &coeffs, &loads)?;
        stats.factorizations += 1;
        stats.triangular_solves += 1;
    }
    let factor = |level: usize| -> Result<BandedCholesky> {
        cholesky_banded_owned(step_matrix(space, &coeffs)).map_err(|e| Error::LevelSolve {
            level,
            source: Box::new(e),
        })
    };
    let mut cached: Option<BandedCholesky> = None;
    for n in (s + 1)..=n_steps {
        let load = load_at(n)?;
        let mut b = history_rhs(space, &coeffs, &history, &load, n)?;
        if config.cache_factorization {
            if cached.is_none() {
                cached = Some(factor(n)?);
                stats.factorizations += 1;
            }
            cached.as_ref().expect("factor cached").solve_in_place(&mut b);
        } else {
            factor(n)?.solve_in_place(&mut b);
            stats.factorizations += 1;
        }
        stats.triangular_solves += 1;
        history.push(b);
    }
    let stepping_s = t_step.elapsed().as_secs_f64();

    let t_err = Instant::now();
    let mut solutions = Vec::with_capacity(n_steps + 1);
    solutions.push(u0h.clone());
    for v in &history {
        solutions.push(v.iter().zip(&u0h).map(|(a, b)| a + b).collect());
    }
    let times: Vec<f64> = (0..=n_steps).map(|n| n as f64 * tau).collect();
    let errors = match &problem.exact {
        Some(exact) => Some(
            solutions
                .iter()
                .zip(&times)
                .map(|(u, &t)| space.l2_norm_error(u, |p| exact(p, t), q))
                .collect::<Result<Vec<f64>>>()?,
        ),
        None => None,
    };
    let max_error = errors
        .as_ref()
        .map(|e| e.iter().copied().fold(0.0, f64::max));
    let error_s = t_err.elapsed().as_secs_f64();

    Ok(SolveResult {
        tau,
        times,
        solutions,
        initial_projection: u0h,
        errors,
        max_error,
        approximate_laplacian,
        timings: Timings {
            setup_s,
            stepping_s,
            error_s,
            total_s: t_start.elapsed().as_secs_f64(),
        },
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Mesh;
    use std::f64::consts::PI;

    fn zero_problem(gamma: f64, kappa: f64, mu: f64) -> CableProblem {
        CableProblem {
            gamma,
            kappa,
            mu,
            final_time: 1.0,
            source: Arc::new(|_, _| 0.0),
            u0: Arc::new(|_| 0.0),
            grad_u0: Arc::new(|_| [0.0, 0.0]),
            laplacian_u0: Some(Arc::new(|_| 0.0)),
            exact: Some(Arc::new(|_, _| 0.0)),
        }
    }

    fn sine_start(gamma: f64, kappa: f64, mu: f64) -> CableProblem {
        let w = 2.0 * PI;
        CableProblem {
            u0: Arc::new(move |p| (w * p[0]).sin()),
            grad_u0: Arc::new(move |p| [w * (w * p[0]).cos(), 0.0]),
            laplacian_u0: Some(Arc::new(move |p| -w * w * (w * p[0]).sin())),
            exact: None,
            ..zero_problem(gamma, kappa, mu)
        }
    }

    #[test]
    fn transform_rhs_cases() {
        let p = zero_problem(0.4, 0.6, 1.0);
        assert_eq!(transform_rhs(&p, 0.5, [0.3, 0.0]).unwrap(), 0.0);
        assert!(transform_rhs(&p, 0.0, [0.3, 0.0]).is_err());

        let ml = CableProblem {
            u0: Arc::new(|p| p[0].sin()),
            grad_u0: Arc::new(|p| [p[0].cos(), 0.0]),
            laplacian_u0: Some(Arc::new(|p| -p[0].sin())),
            ..zero_problem(0.8, 0.5, 0.0)
        };
        let (t, x) = (0.3f64, 1.1f64);
        let want = -x.sin() * t.powf(-0.2) / gamma_fn(0.8).unwrap();
        assert!((transform_rhs(&ml, t, [x, 0.0]).unwrap() - want).abs() < 1e-14);

        let gen = CableProblem {
            source: Arc::new(|p, _| p[0] * p[0]),
            ..sine_start(0.5, 0.5, 1.0)
        };
        let x = 0.2f64;
        let s = (2.0 * PI * x).sin();
        let g = PI.sqrt();
        let want = x * x - 4.0 * PI * PI * s / g - s / g;
        assert!((transform_rhs(&gen, 1.0, [x, 0.0]).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn leading_coefficients() {
        let p = zero_problem(0.3, 0.7, 0.0);
        let cfg = SchemeConfig::new(Family::Fbt, 0.2, 0.0, 10);
        let c = StepCoefficients::new(&p, &cfg).unwrap();
        assert_eq!(c.first.omega[0], 1.5);
        let (cm, ca) = c.convolution(0);
        assert!((cm - 15.0).abs() < 1e-12);
        let want = 0.1f64.powf(-0.7) * ((3.0 - 0.4) / (2.0 - 0.4f64)).powf(0.7);
        assert!((ca - want).abs() < 1e-12);
    }

    #[test]
    fn step_matrix_is_spd() {
        let space = FemSpace::new(Mesh::square(1.0, 6).unwrap()).unwrap();
        let p = zero_problem(0.3, 0.7, 1.0);
        for fam in [Family::Fbt, Family::Fbn] {
            let c = StepCoefficients::new(&p, &SchemeConfig::new(fam, 0.0, 0.0, 8)).unwrap();
            assert!(crate::linalg::cholesky_banded(&step_matrix(&space, &c)).is_ok());
        }
    }

    #[test]
    fn single_dof_recursion() {
        // one interior node at x = 1/2: M = h·2/3, A = 2/h with h = 1/2
        let space = FemSpace::new(Mesh::interval(1.0, 2).unwrap()).unwrap();
        let p = zero_problem(0.5, 0.5, 1.0);
        let cfg = SchemeConfig::new(Family::Fbt, 0.0, 0.0, 6).with_correction(vec![0.5]);
        let c = StepCoefficients::new(&p, &cfg).unwrap();
        let (m, a) = (1.0 / 3.0, 4.0);
        let hist = vec![vec![0.7], vec![-0.2], vec![0.4]];
        let load = [1.3];
        let n = 4;
        let mut want = load[0];
        for k in 1..n {
            let tau = 1.0 / 6.0;
            let w = c.first.omega[n - k] / tau * m
                + tau.powf(-0.5) * c.frac_gamma.omega[n - k] * a
                + tau.powf(-0.5) * c.frac_kappa.omega[n - k] * m;
            want -= w * hist[k - 1][0];
        }
        let (sm, sa) = c.starting(n, 1);
        want -= (sm * m + sa * a) * hist[0][0];
        let got = history_rhs(&space, &c, &hist, &load, n).unwrap();
        assert!((got[0] - want).abs() < 1e-12, "{} vs {want}", got[0]);

        assert!(matches!(
            history_rhs(&space, &c, &hist[..1], &load, n),
            Err(Error::MissingHistory(2))
        ));
    }

    #[test]
    fn history_is_linear() {
        let space = FemSpace::new(Mesh::interval(1.0, 8).unwrap()).unwrap();
        let p = zero_problem(0.3, 0.9, 1.0);
        let cfg = SchemeConfig::new(Family::Fbn, 0.5, -0.5, 5).with_correction(vec![0.3, 0.9]);
        let c = StepCoefficients::new(&p, &cfg).unwrap();
        let hist: Vec<Vec<f64>> = (0..4)
            .map(|k| (0..7).map(|i| ((i * 3 + k) as f64).cos()).collect())
            .collect();
        let load: Vec<f64> = (0..7).map(|i| i as f64 * 0.1).collect();
        let b1 = history_rhs(&space, &c, &hist, &load, 5).unwrap();
        let hist2: Vec<Vec<f64>> = hist.iter().map(|v| v.iter().map(|x| 2.0 * x).collect()).collect();
        let load2: Vec<f64> = load.iter().map(|x| 2.0 * x).collect();
        let b2 = history_rhs(&space, &c, &hist2, &load2, 5).unwrap();
        for (x, y) in b1.iter().zip(&b2) {
            assert!((2.0 * x - y).abs() < 1e-12 * (1.0 + y.abs()));
        }
        let empty = history_rhs(&space, &StepCoefficients::new(&p, &SchemeConfig::new(Family::Fbn, 0.0, 0.0, 3)).unwrap(), &[], &[0.0; 7], 1).unwrap();
        assert!(empty.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_data_stays_zero() {
        let space = FemSpace::new(Mesh::interval(1.0, 16).unwrap()).unwrap();
        let p = zero_problem(0.3, 0.9, 1.0);
        let cfg = SchemeConfig::new(Family::Fbt, 0.0, 0.0, 10).with_correction(vec![0.3, 0.9]);
        let r = run(&p, &space, &cfg).unwrap();
        assert!(r.solutions.iter().flatten().all(|v| v.abs() <= 1e-12));
        assert_eq!(r.max_error, Some(0.0));
    }

    #[test]
    fn caching_does_not_change_results() {
        let space = FemSpace::new(Mesh::interval(1.0, 20).unwrap()).unwrap();
        let p = sine_start(0.6, 0.5, 1.0);
        let mut cfg = SchemeConfig::new(Family::Fbt, 0.0, 0.49, 12).with_correction(vec![0.5, 0.6]);
        let a = run(&p, &space, &cfg).unwrap();
        cfg.cache_factorization = false;
        let b = run(&p, &space, &cfg).unwrap();
        assert_eq!(b.stats.factorizations, 1 + 1 + 10);
        for (x, y) in a.solutions.iter().flatten().zip(b.solutions.iter().flatten()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn discrete_laplacian_fallback_is_flagged() {
        let space = FemSpace::new(Mesh::interval(1.0, 32).unwrap()).unwrap();
        let p = sine_start(0.4, 0.7, 1.0);
        let cfg = SchemeConfig::new(Family::Fbn, 0.0, 0.0, 8);
        let exact = run(&p, &space, &cfg).unwrap();
        let approx = run(&CableProblem { laplacian_u0: None, ..p }, &space, &cfg).unwrap();
        assert!(!exact.approximate_laplacian);
        assert!(approx.approximate_laplacian);
        let diff = exact.solutions[8]
            .iter()
            .zip(&approx.solutions[8])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-6, "{diff}");
    }

    #[test]
    fn rejects_bad_parameters() {
        let space = FemSpace::new(Mesh::interval(1.0, 4).unwrap()).unwrap();
        let p = zero_problem(0.3, 0.9, 1.0);
        assert!(run(&p, &space, &SchemeConfig::new(Family::Fbt, 0.5, 0.0, 4)).is_err());
        assert!(run(&zero_problem(1.0, 0.5, 1.0), &space, &SchemeConfig::new(Family::Fbt, 0.0, 0.0, 4)).is_err());
        let c = SchemeConfig::new(Family::Fbt, 0.0, 0.0, 1).with_correction(vec![0.3, 0.9]);
        assert!(run(&p, &space, &c).is_err());
    }
}
