use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fraccable::harness::{preset, run_preset, write_solve_outputs, SolveConfig, PRESET_IDS};
use fraccable::spectral::{h_contour, h_min, szego_epsilon0, toeplitz_min_eigen, H_DEFAULT_GRID};
use fraccable::weights::{weights_for, Family, ThetaScheme};
use fraccable::Error;

#[derive(Parser)]
#[command(name = "fraccable", version, about = "Fractional Cable equation solver and weight analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Fbt,
    Fbn,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Fbt => Family::Fbt,
            FamilyArg::Fbn => Family::Fbn,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print convolution weights ω_0..ω_n as CSV.
    Weights {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Symbol and Toeplitz positivity diagnostics.
    Spectral {
        /// Tabulate min over x of the FBN phase product on a grid over (α, θ).
        #[arg(long)]
        contour: bool,
        /// Szegő constant of the weights at the given α and θ.
        #[arg(long)]
        epsilon0: bool,
        /// Smallest eigenvalue of the order-n Toeplitz matrix.
        #[arg(long)]
        mineig: bool,
        #[arg(long, value_enum, default_value = "fbt")]
        family: FamilyArg,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Diagonal shift subtracted from the last entry (mineig).
        #[arg(long, default_value_t = 0.0)]
        shift: f64,
        /// Grid points per axis (contour).
        #[arg(long, default_value_t = 41)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one configured problem.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one of the benchmark tables.
    Sweep {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESET_IDS))]
        table: String,
        /// Run the 2D temporal tables at 400 instead of 100 cells per axis.
        #[arg(long)]
        paper_scale: bool,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        out: PathBuf,
        /// Exit with status 2 if an acceptance tolerance is violated.
        #[arg(long)]
        check: bool,
    },
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Weights {
            family,
            alpha,
            theta,
            n,
            out,
        } => {
            let w = weights_for(ThetaScheme::new(family.into(), alpha, theta)?, n)?;
            let mut csv = String::from("k,omega_k\n");
            for (k, v) in w.omega.iter().enumerate() {
                let _ = writeln!(csv, "{k},{v:.17e}");
            }
            emit(&csv, out.as_deref())?;
        }
        Command::Spectral {
            contour,
            epsilon0,
            mineig,
            family,
            alpha,
            theta,
            n,
            shift,
            grid,
            out,
        } => {
            if !(contour || epsilon0 || mineig) {
                return Err(Error::Usage(
                    "choose at least one of --contour, --epsilon0, --mineig".into(),
                ));
            }
            let mut text = String::new();
            if contour {
                text.push_str("alpha,theta,h_min\n");
                for p in h_contour(Family::Fbn, grid, grid, 0.0)? {
                    let _ = writeln!(text, "{:.6},{:.6},{:.6e}", p.alpha, p.theta, p.h);
                }
            }
            let scheme = ThetaScheme::new(family.into(), alpha, theta)?;
            if epsilon0 {
                let _ = writeln!(text, "epsilon0,{:.12e}", szego_epsilon0(scheme, 1e-10)?);
            }
            if mineig {
                let w = weights_for(scheme, n)?;
                let _ = writeln!(text, "mineig,{n},{:.12e}", toeplitz_min_eigen(&w, n, shift)?);
                if Family::from(family) == Family::Fbn {
                    let _ = writeln!(text, "h_min,{:.12e}", h_min(scheme, H_DEFAULT_GRID, true)?);
                }
            }
            emit(&text, out.as_deref())?;
        }
        Command::Solve { config, out } => {
            let cfg = SolveConfig::from_path(&config)?;
            let (space, result) = cfg.execute()?;
            let summary = write_solve_outputs(&out, &cfg, &space, &result)?;
            match summary.max_error {
                Some(e) => println!(
                    "max error {e:.6e} at level {} (tau = {:.6e}, h = {:.6e})",
                    summary.argmax_level.unwrap_or(0),
                    summary.tau,
                    summary.h
                ),
                None => println!("solved {} levels", result.solutions.len() - 1),
            }
        }
        Command::Sweep {
            table,
            paper_scale,
            workers,
            out,
            check,
        } => {
            let p = preset(&table, paper_scale)?;
            let report = run_preset(&p, workers)?;
            report.write_to(&out)?;
            print!("{}", summarize(&report));
            if check && !report.all_checks_pass() {
                eprintln!("acceptance tolerances violated");
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn summarize(report: &fraccable::harness::ConvergenceReport) -> String {
    let mut s = format!("{}\n", report.title);
    let _ = writeln!(
        s,
        "{:>4} {:>12} {:>5} {:>6} {:>9} {:>7} {:>12} {:>8} {:>12} {:>8}",
        "row", "(gamma,kappa)", "corr", "theta", "tau", "cells", "error", "order", "reference", "ref.ord"
    );
    let o = |v: Option<f64>, p: usize| v.map_or("--".to_string(), |x| format!("{x:.p$}"));
    let e = |v: Option<f64>| v.map_or("--".to_string(), |x| format!("{x:.5e}"));
    for r in &report.rows {
        let en = &r.entry;
        let _ = writeln!(
            s,
            "{:>4} {:>12} {:>5} {:>6} {:>9.3e} {:>7} {:>12} {:>8} {:>12} {:>8}{}",
            r.index,
            format!("({},{})", en.case.gamma, en.case.kappa),
            if en.corrected { "yes" } else { "no" },
            format!("{},{}", en.theta_gamma, en.theta_kappa),
            r.tau,
            en.n_cells,
            e(r.error),
            o(r.order, 4),
            e(en.reference_error),
            o(r.reference_order, 4),
            r.failure.as_deref().map(|f| format!("  FAILED: {f}")).unwrap_or_default(),
        );
    }
    for c in &report.checks {
        let _ = writeln!(
            s,
            "[{}] {} (measured {})",
            if c.passed { "PASS" } else { "FAIL" },
            c.description,
            c.measured.map_or("--".to_string(), |m| format!("{m:.6}"))
        );
    }
    s
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
