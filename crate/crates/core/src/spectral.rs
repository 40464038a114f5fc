//! Generating-function symbols, Toeplitz-form positivity and the Szegő
//! constant of the θ-method weights.
//!
//! With `c₀ = ω₀` and `c_{±k} = ω_k / 2`, the quadratic form
//! `Σ_j v^j Σ_{k≤j} ω_{j−k} v^k` equals `vᵀ D_n v` for the symmetric Toeplitz
//! matrix `D_n = (c_{j−k})`. Its symbol is `f(x) = Re ω(e^{ix})`, and the form
//! is nonnegative whenever `f ≥ 0` on `[0, π]`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen_dense, DenseMatrix, MAX_EIGEN_ORDER};
use crate::weights::{weights_for, Family, ThetaScheme, WeightTable};

/// The symbol and its phase factors at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolEvaluation {
    pub scheme: ThetaScheme,
    pub x: f64,
    pub f_value: f64,
    /// Cosine phase factor g_{α,θ}(x).
    pub g_value: f64,
    /// FBT phase h_θ(x) = x/2 − π/2 + φ₂ − φ₁; `None` for FBN.
    pub h_value: Option<f64>,
}

/// Truncated cosine series ω₀ + Σ_{k=1}^{k_max} ω_k cos(kx).
pub fn symbol_series(scheme: ThetaScheme, x: f64, k_max: usize) -> Result<f64> {
    let w = weights_for(scheme, k_max)?;
    Ok(symbol_series_from(&w, x))
}

/// Cosine series over a precomputed weight table (all available terms).
pub fn symbol_series_from(w: &WeightTable, x: f64) -> f64 {
    w.omega
        .iter()
        .enumerate()
        .map(|(k, wk)| wk * (k as f64 * x).cos())
        .sum()
}

/// Cosine series after `order` rounds of summation by parts.
///
/// Uses Σ ω_k ξ^k = Σ (Δ^m ω)_k ξ^k / (1 − ξ²)^m with ξ = e^{ix}, where
/// (Δω)_k = ω_k − ω_{k−2}. The symbols can have branch points at both
/// ξ = 1 and ξ = −1 (FBN with θ = 1), and each round removes one power of
/// the tail at both. Valid for x in (0, π) ∪ (π, 2π).
pub fn symbol_series_differenced(w: &WeightTable, x: f64, order: usize) -> Result<f64> {
    if !(x > 0.0 && x < 2.0 * PI) || x == PI {
        return Err(Error::Domain {
            function: "symbol_series_differenced",
            value: x,
        });
    }
    let mut c = w.omega.clone();
    for _ in 0..order {
        for k in (2..c.len()).rev() {
            c[k] -= c[k - 2];
        }
    }
    let (mut re, mut im) = (0.0, 0.0);
    for (k, ck) in c.iter().enumerate() {
        let (sn, cs) = (k as f64 * x).sin_cos();
        re += ck * cs;
        im += ck * sn;
    }
    // (1 − e^{2ix})^m = (2 sin x)^m e^{i m (2x − π)/2}, with sin x signed
    let m = order as f64;
    let modulus = (2.0 * x.sin()).powi(order as i32);
    let (sn, cs) = (-m * (2.0 * x - PI) / 2.0).sin_cos();
    Ok((re * cs - im * sn) / modulus)
}

// arg(1 − λ e^{ix}); the real part 1 − λ cos x is nonnegative for |λ| ≤ 1.
fn phase(lambda: f64, x: f64) -> f64 {
    (-lambda * x.sin()).atan2(1.0 - lambda * x.cos())
}

fn modulus_sq(lambda: f64, x: f64) -> f64 {
    1.0 + lambda * lambda - 2.0 * lambda * x.cos()
}

/// Symbol in magnitude–phase form.
///
/// At x = 0 and x = 2π the symbol vanishes; the phase factors are their
/// one-sided limits there.
pub fn symbol_closed_form(scheme: ThetaScheme, x: f64) -> Result<SymbolEvaluation> {
    scheme.validate()?;
    if !(0.0..=2.0 * PI).contains(&x) {
        return Err(Error::Domain {
            function: "symbol_closed_form",
            value: x,
        });
    }
    let (a, t) = (scheme.alpha, scheme.theta);
    let lambda2 = (1.0 - 2.0 * t) / (3.0 - 2.0 * t);
    let at_endpoint = x == 0.0 || x == 2.0 * PI;
    // (1 − e^{ix})^α = (2 sin(x/2))^α e^{iα(x−π)/2}
    let half_sin = if at_endpoint { 0.0 } else { 2.0 * (x / 2.0).sin() };
    let lambda1 = match scheme.family {
        Family::Fbt => t / (t - 1.0),
        Family::Fbn => a * t / (1.0 + a * t),
    };
    let (phi1, phi2) = if at_endpoint {
        (0.0, 0.0)
    } else {
        (phase(lambda1, x), phase(lambda2, x))
    };

    let eval = match scheme.family {
        Family::Fbt => {
            let r = x / 2.0 + phi2 - phi1;
            let h = r - PI / 2.0;
            // cos(α h) written as a sine so that α = 1 keeps relative accuracy near x = 0
            let g = ((1.0 - a) * PI / 2.0 + a * r).sin();
            let f = if at_endpoint {
                0.0
            } else {
                ((3.0 - 2.0 * t) / (2.0 - 2.0 * t)).powf(a)
                    * half_sin.powf(a)
                    * (modulus_sq(lambda2, x) / modulus_sq(lambda1, x)).powf(a / 2.0)
                    * g
            };
            SymbolEvaluation {
                scheme,
                x,
                f_value: f,
                g_value: g,
                h_value: Some(h),
            }
        }
        Family::Fbn => {
            let g = ((1.0 - a) * PI / 2.0 + a * x / 2.0 + phi1 + a * phi2).sin();
            let f = if at_endpoint {
                0.0
            } else {
                (1.5 - t).powf(a)
                    * (1.0 + a * t)
                    * half_sin.powf(a)
                    * modulus_sq(lambda1, x).sqrt()
                    * modulus_sq(lambda2, x).powf(a / 2.0)
                    * g
            };
            SymbolEvaluation {
                scheme,
                x,
                f_value: f,
                g_value: g,
                h_value: None,
            }
        }
    };
    Ok(eval)
}

/// Extremes and monotonicity of the FBT phase h_θ sampled on [0, π].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRange {
    pub min_h: f64,
    pub max_h: f64,
    pub monotone: bool,
}

pub fn h_theta_range_check(theta: f64, n_samples: usize) -> Result<PhaseRange> {
    if n_samples < 2 {
        return Err(Error::Usage("need at least two samples".into()));
    }
    // h_θ does not depend on α; any admissible α will do.
    let scheme = ThetaScheme::new(Family::Fbt, 1.0, theta)?;
    let mut hs = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let x = PI * i as f64 / (n_samples - 1) as f64;
        let e = symbol_closed_form(scheme, x)?;
        hs.push(e.h_value.expect("FBT evaluation carries h"));
    }
    let min_h = hs.iter().copied().fold(f64::INFINITY, f64::min);
    let max_h = hs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let monotone = hs.windows(2).all(|w| w[1] >= w[0] - 1e-13);
    Ok(PhaseRange {
        min_h,
        max_h,
        monotone,
    })
}

/// Default number of uniform samples used by [`h_min`].
pub const H_DEFAULT_GRID: usize = 2001;

/// H(α, θ) = min over x ∈ [0, π] of g_{α,θ}(x): grid search, optionally
/// polished by golden-section search around the best grid point.
pub fn h_min(scheme: ThetaScheme, x_grid: usize, refine: bool) -> Result<f64> {
    if x_grid < 2 {
        return Err(Error::Usage("grid needs at least two points".into()));
    }
    let g = |x: f64| symbol_closed_form(scheme, x).map(|e| e.g_value);
    let step = PI / (x_grid - 1) as f64;
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in 0..x_grid {
        let v = g(i as f64 * step)?;
        if v < best {
            best = v;
            best_i = i;
        }
    }
    if !refine {
        return Ok(best);
    }
    let lo = best_i.saturating_sub(1) as f64 * step;
    let hi = ((best_i + 1).min(x_grid - 1)) as f64 * step;
    let refined = golden_section_min(|x| g(x).unwrap_or(f64::INFINITY), lo, hi, 1e-12);
    Ok(best.min(refined))
}

fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    f(0.5 * (a + b)).min(fc).min(fd)
}

/// One row of the H(α, θ) contour table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourPoint {
    pub alpha: f64,
    pub theta: f64,
    pub h: f64,
}

/// H(α, θ) on an `n_alpha × n_theta` grid of the admissible region.
///
/// α runs over (0, 1] as `i / n_alpha`; θ spans `[−1/(2α), 1]` for FBN and
/// `[theta_floor, 0.49]` for FBT.
pub fn h_contour(
    family: Family,
    n_alpha: usize,
    n_theta: usize,
    theta_floor: f64,
) -> Result<Vec<ContourPoint>> {
    if n_alpha == 0 || n_theta < 2 {
        return Err(Error::Usage("contour grid too small".into()));
    }
    let mut rows = Vec::with_capacity(n_alpha * n_theta);
    for i in 1..=n_alpha {
        let alpha = i as f64 / n_alpha as f64;
        let (lo, hi) = match family {
            Family::Fbn => (-1.0 / (2.0 * alpha), 1.0),
            Family::Fbt => (theta_floor, 0.49),
        };
        for j in 0..n_theta {
            let theta = (lo + (hi - lo) * j as f64 / (n_theta - 1) as f64).clamp(lo, hi);
            let scheme = ThetaScheme::new(family, alpha, theta)?;
            rows.push(ContourPoint {
                alpha,
                theta,
                h: h_min(scheme, H_DEFAULT_GRID, true)?,
            });
        }
    }
    Ok(rows)
}

/// Coefficients of the symmetric Toeplitz matrix D_n built from a weight table.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzSpec {
    pub c0: f64,
    /// `ck[k - 1] = ω_k / 2` for k ≥ 1.
    pub ck: Vec<f64>,
    pub n: usize,
}

impl ToeplitzSpec {
    pub fn from_weights(w: &WeightTable, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Usage("Toeplitz order must be positive".into()));
        }
        if w.n_max() + 1 < n {
            return Err(Error::Usage(format!(
                "order {n} needs weights up to index {}, table stops at {}",
                n - 1,
                w.n_max()
            )));
        }
        Ok(Self {
            c0: w.omega[0],
            ck: w.omega[1..n].iter().map(|v| v / 2.0).collect(),
            n,
        })
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let d = i.abs_diff(j);
        if d == 0 {
            self.c0
        } else {
            self.ck[d - 1]
        }
    }

    pub fn dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n, self.n, |i, j| self.entry(i, j))
    }
}

/// Smallest eigenvalue of D_n − shift_last · E_n, where E_n is zero except
/// for a one in the last diagonal entry.
pub fn toeplitz_min_eigen(weights: &WeightTable, n: usize, shift_last: f64) -> Result<f64> {
    if n > MAX_EIGEN_ORDER {
        return Err(Error::Resource(format!(
            "Toeplitz order {n} exceeds the dense eigensolver limit {MAX_EIGEN_ORDER}"
        )));
    }
    let mut d = ToeplitzSpec::from_weights(weights, n)?.dense();
    d[(n - 1, n - 1)] -= shift_last;
    let ev = sym_eigen_dense(&d)?;
    Ok(ev[0])
}

/// det(D_m) / det(D_{m−1}) for m = 2 … n_max, from eigenvalue log-sums.
pub fn toeplitz_det_ratios(weights: &WeightTable, n_max: usize) -> Result<Vec<f64>> {
    let mut log_dets = Vec::with_capacity(n_max);
    for m in 1..=n_max {
        let d = ToeplitzSpec::from_weights(weights, m)?.dense();
        let ev = sym_eigen_dense(&d)?;
        if ev[0] <= 0.0 {
            return Err(Error::PositivityViolation {
                x: f64::NAN,
                value: ev[0],
            });
        }
        log_dets.push(ev.iter().map(|v| v.ln()).sum::<f64>());
    }
    Ok(log_dets.windows(2).map(|w| (w[1] - w[0]).exp()).collect())
}

// 16-point Gauss–Legendre rule on [-1, 1].
fn gauss16() -> &'static crate::quadrature::GaussRule {
    use std::sync::OnceLock;
    static RULE: OnceLock<crate::quadrature::GaussRule> = OnceLock::new();
    RULE.get_or_init(|| crate::quadrature::GaussRule::new(16))
}

/// Number of geometric refinement levels toward each zero of the symbol.
pub const SZEGO_LEVELS: usize = 40;

fn log_symbol_integral(scheme: ThetaScheme, splits: usize) -> Result<f64> {
    let rule = gauss16();
    let mut total = 0.0;
    let mut integrate = |a: f64, b: f64| -> Result<()> {
        let w = (b - a) / splits as f64;
        for p in 0..splits {
            let (lo, hi) = (a + p as f64 * w, a + (p + 1) as f64 * w);
            for (node, weight) in rule.mapped(lo, hi) {
                let f = symbol_closed_form(scheme, node)?.f_value;
                if f < -1e-12 {
                    return Err(Error::PositivityViolation { x: node, value: f });
                }
                total += weight * f.max(f64::MIN_POSITIVE).ln();
            }
        }
        Ok(())
    };
    // f is symmetric about π; panels shrink geometrically toward 0 and toward
    // π (FBN symbols can vanish at π on the admissibility boundary).
    let mid = PI / 2.0;
    let mut width = mid;
    for _ in 0..SZEGO_LEVELS {
        integrate(width / 2.0, width)?;
        integrate(PI - width, PI - width / 2.0)?;
        width /= 2.0;
    }
    integrate(0.0, width)?;
    integrate(PI - width, PI)?;
    Ok(total / PI)
}

/// ε₀ = exp((1/2π) ∫₀^{2π} ln f(x) dx), the Szegő limit of
/// det(D_n)/det(D_{n−1}).
///
/// The panel count per level is doubled until successive estimates of the
/// mean log-symbol agree to `quad_tol`.
pub fn szego_epsilon0(scheme: ThetaScheme, quad_tol: f64) -> Result<f64> {
    if !(quad_tol > 0.0) {
        return Err(Error::Usage("quad_tol must be positive".into()));
    }
    let mut splits = 1;
    let mut prev = log_symbol_integral(scheme, splits)?;
    loop {
        splits *= 2;
        let next = log_symbol_integral(scheme, splits)?;
        if (next - prev).abs() <= quad_tol || splits >= 64 {
            return Ok(next.exp());
        }
        prev = next;
    }
}
