//! Convolution weights of the fractional θ-methods and their starting
//! (correction) weights.
//!
//! Both families share the quadratic factor
//! `P(ξ) = (3/2 − θ) − (2 − 2θ)ξ + (1/2 − θ)ξ²`:
//!
//! * FBT: `ω(ξ) = (1 − θ + θξ)^(−α) P(ξ)^α`, admissible for θ < 1/2;
//! * FBN: `ω(ξ) = (1 + αθ − αθξ) P(ξ)^α`, admissible for −1/(2α) ≤ θ ≤ 1.
//!
//! The weights ω_k are the Taylor coefficients of ω(ξ). [`fbt_weights`] and
//! [`fbn_weights`] produce them with an O(n) three-term recursion derived
//! from the logarithmic derivative of ω; [`gf_expand_oracle`] expands the
//! factored form by brute-force series multiplication and is kept as an
//! independent cross-check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dense_inverse, dense_solve, DenseMatrix};
use crate::specfun::rl_power_derivative;

/// Which θ-family a weight sequence belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Fbt,
    Fbn,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Fbt => "fbt",
            Family::Fbn => "fbn",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fbt" => Ok(Family::Fbt),
            "fbn" => Ok(Family::Fbn),
            other => Err(Error::Parameter(format!("unknown family '{other}'"))),
        }
    }
}

/// A validated (family, α, θ) triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaScheme {
    pub family: Family,
    pub alpha: f64,
    pub theta: f64,
}

/// Coefficients of the recursion `k ψ₀ ω_k = Σ_{j=1..3} [φ_{j−1} − (k−j) ψ_j] ω_{k−j}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecursionConstants {
    pub phi: [f64; 3],
    pub psi: [f64; 4],
}

impl ThetaScheme {
    pub fn new(family: Family, alpha: f64, theta: f64) -> Result<Self> {
        let s = Self {
            family,
            alpha,
            theta,
        };
        s.validate()?;
        Ok(s)
    }

    /// Classical BDF2 (α = 1, θ = 0).
    pub fn bdf2() -> Self {
        Self {
            family: Family::Fbt,
            alpha: 1.0,
            theta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, t) = (self.alpha, self.theta);
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::Parameter(format!("alpha must lie in (0, 1], got {a}")));
        }
        if !t.is_finite() {
            return Err(Error::Parameter(format!("theta must be finite, got {t}")));
        }
        match self.family {
            Family::Fbt if t >= 0.5 => Err(Error::Parameter(format!(
                "FBT requires theta < 1/2, got {t}"
            ))),
            Family::Fbn if t < -1.0 / (2.0 * a) || t > 1.0 => Err(Error::Parameter(format!(
                "FBN requires -1/(2 alpha) <= theta <= 1, got theta = {t} with alpha = {a}"
            ))),
            _ => Ok(()),
        }
    }

    /// ω₀ in closed form.
    pub fn leading_weight(&self) -> f64 {
        let (a, t) = (self.alpha, self.theta);
        match self.family {
            Family::Fbt => ((3.0 - 2.0 * t) / (2.0 - 2.0 * t)).powf(a),
            Family::Fbn => 2f64.powf(-a) * (1.0 + a * t) * (3.0 - 2.0 * t).powf(a),
        }
    }

    pub fn recursion_constants(&self) -> RecursionConstants {
        let (a, t) = (self.alpha, self.theta);
        match self.family {
            Family::Fbt => RecursionConstants {
                phi: [
                    -0.5 * a * (2.0 * t * t - 5.0 * t + 4.0),
                    -a * (2.0 * t - 1.0) * (1.0 - t),
                    -0.5 * a * t * (2.0 * t - 1.0),
                ],
                psi: [
                    0.5 * (3.0 - 2.0 * t) * (1.0 - t),
                    0.5 * (1.0 - 2.0 * t) * (3.0 * t - 4.0),
                    0.5 * (1.0 - t) * (1.0 - 6.0 * t),
                    0.5 * t * (1.0 - 2.0 * t),
                ],
            },
            Family::Fbn => RecursionConstants {
                phi: [
                    2.0 * a * (t - 1.0) * (a * t + 1.0) + a * t * (t - 1.5),
                    -a * (2.0 * t * t - 3.0 * a * t + 4.0 * a * t * t - 1.0),
                    -a * t * (0.5 - t + a - 2.0 * a * t),
                ],
                psi: [
                    0.5 * (3.0 - 2.0 * t) * (1.0 + a * t),
                    -0.5 * a * t * (3.0 - 2.0 * t) - 2.0 * (1.0 - t) * (a * t + 1.0),
                    -0.5 * (a * t + 1.0) * (2.0 * t - 1.0) - 2.0 * a * t * (t - 1.0),
                    -0.5 * a * t * (1.0 - 2.0 * t),
                ],
            },
        }
    }
}

/// The convolution weights ω₀ … ω_{n_max} of one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    pub scheme: ThetaScheme,
    pub omega: Vec<f64>,
}

impl WeightTable {
    pub fn n_max(&self) -> usize {
        self.omega.len() - 1
    }

    pub fn alpha(&self) -> f64 {
        self.scheme.alpha
    }

    pub fn get(&self, k: usize) -> f64 {
        self.omega[k]
    }
}

/// FBT-θ weights by the three-term recursion.
pub fn fbt_weights(alpha: f64, theta: f64, n_max: usize) -> Result<WeightTable> {
    weights_for(ThetaScheme::new(Family::Fbt, alpha, theta)?, n_max)
}

/// FBN-θ weights by the three-term recursion.
pub fn fbn_weights(alpha: f64, theta: f64, n_max: usize) -> Result<WeightTable> {
    weights_for(ThetaScheme::new(Family::Fbn, alpha, theta)?, n_max)
}

/// Recursion-generated weights for any validated scheme.
pub fn weights_for(scheme: ThetaScheme, n_max: usize) -> Result<WeightTable> {
    scheme.validate()?;
    let RecursionConstants { phi, psi } = scheme.recursion_constants();
    let mut omega = Vec::with_capacity(n_max + 1);
    omega.push(scheme.leading_weight());
    for k in 1..=n_max {
        let mut acc = 0.0;
        for j in 1..=3.min(k) {
            acc += (phi[j - 1] - (k - j) as f64 * psi[j]) * omega[k - j];
        }
        omega.push(acc / (k as f64 * psi[0]));
    }
    Ok(WeightTable { scheme, omega })
}

/// Coefficients of `(1 − λξ)^p` up to degree `n`.
fn binomial_series(lambda: f64, p: f64, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n + 1];
    c[0] = 1.0;
    for k in 1..=n {
        c[k] = c[k - 1] * ((k as f64 - 1.0 - p) / k as f64) * lambda;
    }
    c
}

fn truncated_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    (0..n)
        .map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum())
        .collect()
}

/// Weights by direct expansion of the factored generating function.
///
/// FBT: `((3−2θ)/(2−2θ))^α (1−ξ)^α (1−λ₁ξ)^(−α) (1−λ₂ξ)^α` with
/// λ₁ = θ/(θ−1), λ₂ = (1−2θ)/(3−2θ).
/// FBN: `(3/2−θ)^α (1+αθ) (1−ξ)^α (1−λ₁'ξ) (1−λ₂ξ)^α` with λ₁' = αθ/(1+αθ).
///
/// O(n_max²); meant as an oracle, not for production use.
pub fn gf_expand_oracle(scheme: ThetaScheme, n_max: usize) -> Result<WeightTable> {
    scheme.validate()?;
    let (a, t) = (scheme.alpha, scheme.theta);
    let lambda2 = (1.0 - 2.0 * t) / (3.0 - 2.0 * t);
    let base = binomial_series(1.0, a, n_max);
    let tail = binomial_series(lambda2, a, n_max);
    let (scale, middle) = match scheme.family {
        Family::Fbt => {
            let lambda1 = t / (t - 1.0);
            (
                ((3.0 - 2.0 * t) / (2.0 - 2.0 * t)).powf(a),
                binomial_series(lambda1, -a, n_max),
            )
        }
        Family::Fbn => {
            let lambda1 = a * t / (1.0 + a * t);
            let mut lin = vec![0.0; n_max + 1];
            lin[0] = 1.0;
            if n_max >= 1 {
                lin[1] = -lambda1;
            }
            ((1.5 - t).powf(a) * (1.0 + a * t), lin)
        }
    };
    let omega = truncated_product(&truncated_product(&base, &middle), &tail)
        .into_iter()
        .map(|w| scale * w)
        .collect();
    Ok(WeightTable { scheme, omega })
}

/// Condition numbers above this flag a starting-weight system as ill-conditioned.
pub const STARTING_CONDITION_LIMIT: f64 = 1e12;

/// Largest supported number of correction exponents.
pub const MAX_CORRECTION_TERMS: usize = 4;

/// Checks that correction exponents are positive, strictly increasing and at
/// most [`MAX_CORRECTION_TERMS`] long.
pub fn validate_sigma(sigma: &[f64]) -> Result<()> {
    if sigma.is_empty() || sigma.len() > MAX_CORRECTION_TERMS {
        return Err(Error::Parameter(format!(
            "correction needs between 1 and {MAX_CORRECTION_TERMS} exponents, got {}",
            sigma.len()
        )));
    }
    if sigma.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(Error::Parameter(format!(
            "correction exponents must be positive, got {sigma:?}"
        )));
    }
    if sigma.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter(format!(
            "correction exponents must be strictly increasing, got {sigma:?}"
        )));
    }
    Ok(())
}

/// Starting weights ω_{n,1..s} of a single time level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelStartingWeights {
    pub values: Vec<f64>,
    /// 1-norm condition number of the s×s system.
    pub condition: f64,
}

impl LevelStartingWeights {
    pub fn is_ill_conditioned(&self) -> bool {
        !(self.condition <= STARTING_CONDITION_LIMIT)
    }
}

/// Starting weights at level `n`, making the discrete operator exact on
/// t^σ for every σ in `sigma`.
///
/// Solves `Σ_j j^{σ_i} ω_{n,j} = Γ(σ_i+1)/Γ(σ_i+1−α) n^{σ_i−α} − Σ_{k=0}^{n} ω_{n−k} k^{σ_i}`.
pub fn starting_weights(
    weights: &WeightTable,
    sigma: &[f64],
    n: usize,
) -> Result<LevelStartingWeights> {
    validate_sigma(sigma)?;
    if n == 0 {
        return Err(Error::Usage("starting weights are defined for n >= 1".into()));
    }
    if n > weights.n_max() {
        return Err(Error::Usage(format!(
            "level {n} exceeds the weight table length {}",
            weights.n_max()
        )));
    }
    let s = sigma.len();
    let alpha = weights.alpha();
    let a = DenseMatrix::from_fn(s, s, |i, j| ((j + 1) as f64).powf(sigma[i]));
    let nf = n as f64;
    let rhs: Vec<f64> = sigma
        .iter()
        .map(|&sg| {
            let exact = rl_power_derivative(alpha, sg, nf);
            let conv: f64 = (1..=n)
                .map(|k| weights.omega[n - k] * (k as f64).powf(sg))
                .sum();
            exact - conv
        })
        .collect();
    let values = dense_solve(&a, &rhs)?;
    let condition = norm_one(&a) * norm_one(&dense_inverse(&a)?);
    Ok(LevelStartingWeights { values, condition })
}

fn norm_one(m: &DenseMatrix) -> f64 {
    (0..m.cols())
        .map(|j| (0..m.rows()).map(|i| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Starting weights for every level 1 … n_max of one weight table.
#[derive(Debug, Clone, PartialEq)]
pub struct StartingWeights {
    pub sigma: Vec<f64>,
    /// `per_level[n - 1]` holds ω_{n,1..s}.
    pub per_level: Vec<Vec<f64>>,
    /// Largest condition number seen over all levels.
    pub worst_condition: f64,
}

impl StartingWeights {
    pub fn build(weights: &WeightTable, sigma: &[f64], n_max: usize) -> Result<Self> {
        let mut per_level = Vec::with_capacity(n_max);
        let mut worst = 0.0_f64;
        for n in 1..=n_max {
            let lvl = starting_weights(weights, sigma, n)?;
            worst = worst.max(lvl.condition);
            per_level.push(lvl.values);
        }
        Ok(Self {
            sigma: sigma.to_vec(),
            per_level,
            worst_condition: worst,
        })
    }

    pub fn s(&self) -> usize {
        self.sigma.len()
    }

    pub fn levels(&self) -> usize {
        self.per_level.len()
    }

    /// ω_{n,j} with 1-based `n` and `j`.
    pub fn weight(&self, n: usize, j: usize) -> f64 {
        self.per_level[n - 1][j - 1]
    }

    pub fn is_ill_conditioned(&self) -> bool {
        !(self.worst_condition <= STARTING_CONDITION_LIMIT)
    }
}

/// τ^(−α) [Σ_{k=0}^{n} ω_{n−k} φ^k + Σ_{j=1}^{s} ω_{n,j} φ^j] at level `n`.
///
/// `samples[k]` is φ^k. Entries past index max(n, s) are ignored; below
/// level s the starting part reaches ahead of n.
pub fn apply_discrete_operator(
    weights: &WeightTable,
    starting: Option<&StartingWeights>,
    samples: &[f64],
    n: usize,
    tau: f64,
) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::Usage(format!("tau must be positive, got {tau}")));
    }
    if n > weights.n_max() {
        return Err(Error::Usage(format!(
            "level {n} requested but weights only cover index {}",
            weights.n_max()
        )));
    }
    let needed = n.max(starting.filter(|_| n >= 1).map_or(0, |sw| sw.s()));
    if samples.len() <= needed {
        return Err(Error::Usage(format!(
            "need samples up to index {needed}, only {} given",
            samples.len()
        )));
    }
    let mut acc: f64 = (0..=n).map(|k| weights.omega[n - k] * samples[k]).sum();
    if let Some(sw) = starting {
        if n >= 1 {
            if n > sw.levels() {
                return Err(Error::Usage(format!(
                    "starting weights cover {} levels, level {n} requested",
                    sw.levels()
                )));
            }
            acc += (1..=sw.s()).map(|j| sw.weight(n, j) * samples[j]).sum::<f64>();
        }
    }
    Ok(tau.powf(-weights.alpha()) * acc)
}
