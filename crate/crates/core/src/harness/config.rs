//! Configuration files for single runs (TOML or JSON).
//!
//! ```toml
//! snapshots = [10, 20]
//!
//! [problem]
//! case = "weak1d"        # weak1d | mittag_leffler | smooth2d
//! gamma = 0.3
//! kappa = 0.9
//!
//! [mesh]
//! n_cells = 5000
//!
//! [scheme]
//! family = "fbt"
//! theta_gamma = 0.0
//! theta_kappa = 0.0
//! steps = 20
//! correction = true      # or an explicit exponent list
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{error_profile, profile_argmax, profile_csv, sci, BenchmarkCase, BenchmarkId};
use crate::error::{Error, Result};
use crate::fem::FemSpace;
use crate::solver::{run, SchemeConfig, SolveResult, SolveStats, Timings};
use crate::weights::Family;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub case: BenchmarkId,
    pub gamma: f64,
    /// Defaults to γ for the Mittag-Leffler case, where it has no effect.
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub final_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub n_cells: usize,
}

/// `true` selects the case's default exponents, a list gives them explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CorrectionSpec {
    Flag(bool),
    Exponents(Vec<f64>),
}

impl Default for CorrectionSpec {
    fn default() -> Self {
        CorrectionSpec::Flag(false)
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSpec {
    pub family: Family,
    pub theta_gamma: f64,
    pub theta_kappa: f64,
    pub steps: usize,
    #[serde(default)]
    pub correction: CorrectionSpec,
    #[serde(default = "default_true")]
    pub cache_factorization: bool,
    #[serde(default)]
    pub quad_order: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub problem: ProblemSpec,
    pub mesh: MeshSpec,
    pub scheme: SchemeSpec,
    /// Time levels whose solutions are written out.
    #[serde(default)]
    pub snapshots: Vec<usize>,
}

impl SolveConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a `.json` file as JSON and anything else as TOML.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn case(&self) -> Result<BenchmarkCase> {
        let p = &self.problem;
        let kappa = match (p.kappa, p.case) {
            (Some(k), _) => k,
            (None, BenchmarkId::MittagLeffler) => p.gamma,
            (None, _) => return Err(Error::Config("problem.kappa is required for this case".into())),
        };
        let mut case = BenchmarkCase::new(p.case, p.gamma, kappa);
        if let Some(mu) = p.mu {
            case.mu = mu;
        }
        if let Some(t) = p.final_time {
            case.final_time = t;
        }
        Ok(case)
    }

    pub fn scheme(&self) -> Result<SchemeConfig> {
        let s = &self.scheme;
        let mut cfg = SchemeConfig::new(s.family, s.theta_gamma, s.theta_kappa, s.steps);
        cfg.cache_factorization = s.cache_factorization;
        cfg.quad_order = s.quad_order;
        cfg.correction = match &s.correction {
            CorrectionSpec::Flag(false) => None,
            CorrectionSpec::Flag(true) => Some(self.case()?.default_sigma()).filter(|v| !v.is_empty()),
            CorrectionSpec::Exponents(v) if v.is_empty() => None,
            CorrectionSpec::Exponents(v) => Some(v.clone()),
        };
        Ok(cfg)
    }

    /// Builds everything and runs the solver.
    pub fn execute(&self) -> Result<(FemSpace, SolveResult)> {
        let case = self.case()?;
        let scheme = self.scheme()?;
        for &n in &self.snapshots {
            if n > scheme.steps {
                return Err(Error::Config(format!(
                    "snapshot level {n} exceeds the number of steps {}",
                    scheme.steps
                )));
            }
        }
        let problem = case.problem()?;
        let space = FemSpace::new(case.mesh(self.mesh.n_cells)?)?;
        let result = run(&problem, &space, &scheme)?;
        Ok((space, result))
    }
}

/// JSON summary of a single run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub config: SolveConfig,
    pub correction: Option<Vec<f64>>,
    pub tau: f64,
    pub h: f64,
    pub h_diameter: f64,
    pub max_error: Option<f64>,
    pub argmax_level: Option<usize>,
    pub final_error: Option<f64>,
    pub approximate_laplacian: bool,
    pub timings: Timings,
    pub stats: SolveStats,
}

/// Writes `errors.csv`, `summary.json` and `snapshot_<n>.csv` files.
pub fn write_solve_outputs(dir: &Path, config: &SolveConfig, space: &FemSpace, result: &SolveResult) -> Result<SolveSummary> {
    std::fs::create_dir_all(dir)?;
    let (argmax, final_error) = match error_profile(result) {
        Ok(profile) => {
            std::fs::write(dir.join("errors.csv"), profile_csv(&profile))?;
            (profile_argmax(&profile), profile.last().map(|p| p.error))
        }
        Err(_) => (None, None),
    };
    for &n in &config.snapshots {
        let mut csv = if space.mesh().dim == 1 {
            String::from("x,u\n")
        } else {
            String::from("x,y,u\n")
        };
        for (p, v) in space.nodal_values(&result.solutions[n]) {
            if space.mesh().dim == 1 {
                csv.push_str(&format!("{},{}\n", sci(p[0]), sci(v)));
            } else {
                csv.push_str(&format!("{},{},{}\n", sci(p[0]), sci(p[1]), sci(v)));
            }
        }
        std::fs::write(dir.join(format!("snapshot_{n}.csv")), csv)?;
    }
    let summary = SolveSummary {
        config: config.clone(),
        correction: config.scheme()?.correction,
        tau: result.tau,
        h: space.mesh().h(),
        h_diameter: space.mesh().h_diameter(),
        max_error: result.max_error,
        argmax_level: argmax,
        final_error,
        approximate_laplacian: result.approximate_laplacian,
        timings: result.timings.clone(),
        stats: result.stats.clone(),
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(dir.join("summary.json"), json)?;
    Ok(summary)
}
