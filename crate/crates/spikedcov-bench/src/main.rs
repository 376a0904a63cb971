//! `bench` — Monte Carlo benchmarks for spiked-covariance estimators.
//!
//! Subcommands:
//!
//! * `bench run --config exp.ini --out results/` — run a seeded experiment
//!   and write `trials.csv` + `summary.csv`.
//! * `bench bounds --p 16 --k 4 --n 100 --alpha-pp 1.0 --spectrum iso` —
//!   print Cramér-Rao bound values as CSV rows.
//! * `bench estimate --input samples.csv --k 4 --method rtr --dof 3` — fit
//!   one estimate and write its factors plus a JSON report.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for I/O errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spikedcov::crb::{
    assemble_fim, bound_subspace, bound_subspace_closed, bound_total, bound_total_tilde,
    FisherSpec,
};
use spikedcov::manifold::{norm, ManifoldPoint, MetricParams};
use spikedcov::model::{pscm, pscm_init, SampleSet, TylerObjective};
use spikedcov::numkernel::{C64, CMat};
use spikedcov::optim::{solve_rgd, solve_rtr, Objective};

use spikedcov_bench::config::{ExperimentConfig, Method, MetricRule, SolverSettings};
use spikedcov_bench::experiment::run_experiment;
use spikedcov_bench::io::{
    write_bounds_csv, write_complex_matrix_csv, write_file, write_report_json, write_summary_csv,
    write_trials_csv, BoundsRow, EstimateReport,
};
use spikedcov_bench::{BenchError, BenchResult};

#[derive(Parser)]
#[command(
    name = "bench",
    version,
    about = "Monte Carlo benchmarks for robust spiked-covariance estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded experiment from an INI config and write CSV results.
    Run {
        /// Path to the experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Override the trial count from the config.
        #[arg(long)]
        trials: Option<usize>,
        /// Override the base seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Draw one truth per tail index instead of a fresh truth per trial.
        #[arg(long)]
        fixed_truth: bool,
        /// Output directory (takes precedence over `[output] dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print Cramér-Rao bound values for one problem configuration.
    Bounds {
        /// Ambient dimension.
        #[arg(long)]
        p: usize,
        /// Spike rank.
        #[arg(long)]
        k: usize,
        /// Sample count.
        #[arg(long)]
        n: usize,
        /// Density-generator constant of the sampling distribution.
        #[arg(long = "alpha-pp")]
        alpha_pp: f64,
        /// Spike spectrum: `iso` for Σ = I_k, or k comma-separated values.
        #[arg(long)]
        spectrum: String,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit one estimate from a sample CSV; write factors and a JSON report.
    Estimate {
        /// Sample CSV (one column per observation, re/im row pairs).
        #[arg(long)]
        input: PathBuf,
        /// Spike rank.
        #[arg(long)]
        k: usize,
        /// Estimator: pscm, rgd or rtr.
        #[arg(long)]
        method: String,
        /// Student-t tail index for the metric weights (defaults to
        /// Gaussian weights when absent).
        #[arg(long)]
        dof: Option<f64>,
        /// Output directory for the factors and report.
        #[arg(long, default_value = "estimate-out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            trials,
            seed,
            fixed_truth,
            out,
        } => cmd_run(config, trials, seed, fixed_truth, out),
        Command::Bounds {
            p,
            k,
            n,
            alpha_pp,
            spectrum,
            out,
        } => cmd_bounds(p, k, n, alpha_pp, &spectrum, out),
        Command::Estimate {
            input,
            k,
            method,
            dof,
            out,
        } => cmd_estimate(input, k, &method, dof, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn cmd_run(
    config_path: PathBuf,
    trials: Option<usize>,
    seed: Option<u64>,
    fixed_truth: bool,
    out: Option<PathBuf>,
) -> BenchResult<()> {
    let text = fs::read_to_string(&config_path)?;
    let mut config = ExperimentConfig::from_ini_str(&text)?;
    if let Some(t) = trials {
        config.trials = t;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    if fixed_truth {
        config.fixed_truth = true;
    }
    config.validate()?;
    let out_dir = out.or_else(|| config.output_dir.clone()).ok_or_else(|| {
        BenchError::Config("no output directory: pass --out or set [output] dir".into())
    })?;

    let output = run_experiment(&config)?;

    fs::create_dir_all(&out_dir)?;
    write_file(out_dir.join("trials.csv"), |w| {
        write_trials_csv(w, &output.trials)
    })?;
    write_file(out_dir.join("summary.csv"), |w| {
        write_summary_csv(w, &output.summary)
    })?;

    let excluded = output.excluded_count();
    if excluded > 0 {
        eprintln!(
            "note: {excluded} of {} trial records had degenerate error \
             measures and were excluded from the means",
            output.trials.len()
        );
    }
    println!(
        "wrote {} trial records and {} summary rows to {}",
        output.trials.len(),
        output.summary.len(),
        out_dir.display()
    );
    Ok(())
}

fn parse_spectrum(k: usize, text: &str) -> BenchResult<Vec<f64>> {
    if text.trim().eq_ignore_ascii_case("iso") {
        return Ok(vec![1.0; k]);
    }
    let values: Vec<f64> = text
        .split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|e| {
                BenchError::Config(format!("spectrum: bad number '{}' ({e})", s.trim()))
            })
        })
        .collect::<BenchResult<Vec<_>>>()?;
    if values.len() != k {
        return Err(BenchError::Config(format!(
            "spectrum needs exactly k = {k} values, got {}",
            values.len()
        )));
    }
    for &v in &values {
        if !(v > 0.0) || !v.is_finite() {
            return Err(BenchError::Config(format!(
                "spectrum values must be positive, got {v}"
            )));
        }
    }
    Ok(values)
}

/// Canonical representative with the given spike spectrum: the frame is the
/// first `k` coordinate axes. All reported bounds are invariant under the
/// choice of frame and gauge, so the spectrum determines them.
fn canonical_point(p: usize, k: usize, eigs: &[f64]) -> BenchResult<ManifoldPoint> {
    let mut u = CMat::zeros(p, k);
    for j in 0..k {
        u[(j, j)] = C64::new(1.0, 0.0);
    }
    let sigma = CMat::from_fn(k, k, |i, j| {
        if i == j {
            C64::new(eigs[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(ManifoldPoint::new(u, sigma)?)
}

struct BoundSet {
    total: f64,
    tilde: f64,
    subspace: f64,
    closed: f64,
}

fn bounds_at(p: usize, k: usize, n: usize, alpha_pp: f64, eigs: &[f64]) -> BenchResult<BoundSet> {
    let point = canonical_point(p, k, eigs)?;
    let params = MetricParams::new(p, k, 1.0, 0.0)?;
    let fspec = FisherSpec::new(n, alpha_pp)?;
    let bundle = assemble_fim(&fspec, &params, &point)?;
    Ok(BoundSet {
        total: bound_total(&bundle)?,
        tilde: bound_total_tilde(&bundle)?,
        subspace: bound_subspace(&bundle)?,
        closed: bound_subspace_closed(&fspec, p, k, eigs)?,
    })
}

fn cmd_bounds(
    p: usize,
    k: usize,
    n: usize,
    alpha_pp: f64,
    spectrum: &str,
    out: Option<PathBuf>,
) -> BenchResult<()> {
    if p < 2 || k < 1 || k >= p {
        return Err(BenchError::Config(format!(
            "need 1 <= k < p with p >= 2, got p={p}, k={k}"
        )));
    }
    if n < 1 {
        return Err(BenchError::Config("n must be at least 1".into()));
    }
    if !(alpha_pp > 0.0) || !alpha_pp.is_finite() {
        return Err(BenchError::Config(format!(
            "alpha-pp must be positive, got {alpha_pp}"
        )));
    }
    let eigs = parse_spectrum(k, spectrum)?;

    let bounds = bounds_at(p, k, n, alpha_pp, &eigs)?;
    let rows = vec![
        BoundsRow {
            p,
            k,
            n,
            alpha_pp,
            bound_name: "total_pseudoinverse".into(),
            value: bounds.total,
        },
        BoundsRow {
            p,
            k,
            n,
            alpha_pp,
            bound_name: "total_tilde_conjectured".into(),
            value: bounds.tilde,
        },
        BoundsRow {
            p,
            k,
            n,
            alpha_pp,
            bound_name: "subspace".into(),
            value: bounds.subspace,
        },
        BoundsRow {
            p,
            k,
            n,
            alpha_pp,
            bound_name: "subspace_closed_form".into(),
            value: bounds.closed,
        },
    ];
    match out {
        Some(path) => write_file(path, |w| write_bounds_csv(w, &rows))?,
        None => {
            let stdout = std::io::stdout();
            write_bounds_csv(stdout.lock(), &rows)?;
        }
    }

    // Self-checks, reported on stderr so the CSV stream stays clean.
    let rel = (bounds.subspace - bounds.closed).abs() / bounds.closed.abs().max(f64::MIN_POSITIVE);
    let closed_ok = rel <= 1e-8;
    eprintln!(
        "check closed_form_vs_assembled: {} (rel {rel:.3e})",
        if closed_ok { "OK" } else { "FAIL" }
    );
    let doubled = bounds_at(p, k, 2 * n, alpha_pp, &eigs)?;
    let half_rel = (doubled.subspace * 2.0 - bounds.subspace).abs() / bounds.subspace
        + (doubled.total * 2.0 - bounds.total).abs() / bounds.total
        + (doubled.tilde * 2.0 - bounds.tilde).abs() / bounds.tilde;
    let halving_ok = half_rel <= 1e-9;
    eprintln!(
        "check doubling_n_halves_bounds: {} (residual {half_rel:.3e})",
        if halving_ok { "OK" } else { "FAIL" }
    );
    if !closed_ok || !halving_ok {
        return Err(BenchError::Core(spikedcov::CoreError::Structural(
            "bound self-check failed; see stderr".into(),
        )));
    }
    Ok(())
}

fn cmd_estimate(
    input: PathBuf,
    k: usize,
    method: &str,
    dof: Option<f64>,
    out: PathBuf,
) -> BenchResult<()> {
    let data = SampleSet::read_csv_path(&input)?;
    let p = data.p();
    let n = data.n();
    if k < 1 || k >= p {
        return Err(BenchError::Config(format!(
            "need 1 <= k < p, got k={k} with p={p} columns of data"
        )));
    }
    if let Some(d) = dof {
        if !(d > 0.0) || !d.is_finite() {
            return Err(BenchError::Config(format!("dof must be positive, got {d}")));
        }
    }
    let method = Method::parse(method)?;
    let (alpha, beta) = match dof {
        Some(d) => MetricRule::StudentMatched.resolve(p, d),
        None => MetricRule::Gaussian.resolve(p, 0.0),
    };
    let params = MetricParams::new(p, k, alpha, beta)?;
    let objective = TylerObjective::new(params, &data)?;

    let (point, status, iterations) = match method {
        Method::Pscm => (pscm(&data, k)?, "direct".to_string(), 0),
        Method::TRgd => {
            let result = solve_rgd(
                &objective,
                &pscm_init(&data, k)?,
                &params,
                &SolverSettings::rgd_default().to_solver_config(),
            )?;
            (result.point, result.status.as_str().to_string(), result.iterations)
        }
        Method::TRtr => {
            let result = solve_rtr(
                &objective,
                &pscm_init(&data, k)?,
                &params,
                &SolverSettings::rtr_default().to_solver_config(),
            )?;
            (result.point, result.status.as_str().to_string(), result.iterations)
        }
    };

    let cost = objective.cost(&point)?;
    let grad = objective.rgrad(&point)?;
    let grad_norm = norm(&params, &point, &grad);

    fs::create_dir_all(&out)?;
    write_file(out.join("estimate_u.csv"), |w| {
        write_complex_matrix_csv(w, &point.u)
    })?;
    write_file(out.join("estimate_sigma.csv"), |w| {
        write_complex_matrix_csv(w, &point.sigma)
    })?;
    let report = EstimateReport {
        method: method.as_str().to_string(),
        p,
        k,
        n,
        dof,
        alpha,
        beta,
        cost,
        grad_norm,
        iterations,
        status,
    };
    write_file(out.join("report.json"), |w| write_report_json(w, &report))?;
    println!("wrote estimate factors and report to {}", out.display());
    Ok(())
}
