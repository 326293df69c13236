use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use coherence_core::distill::{distill_exact, distill_simulate};
use coherence_core::io::{read_state_file, StateFile};
use coherence_core::measures::{c_l1, c_rel_ent, r_pure, r_qubit_analytic, MeasureId};
use coherence_core::properties::{run_property_suite, SuiteConfig};
use coherence_core::qrng::{empirical_entropy, pipeline_compare, sample_distribution, EntropyKind, DEFAULT_MARGIN};
use coherence_core::roof::{optimize_roof, RoofConfig};
use coherence_core::state::VALIDATION_TOL;
use coherence_core::{PureState, Result};

/// Coherence measures, convex-roof optimization and distillation.
#[derive(Parser)]
#[command(name = "coherence", version)]
struct Cli {
    /// Tolerance for validating input states.
    #[arg(long, global = true, default_value_t = VALIDATION_TOL)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Every applicable measure of a state file.
    Measures { state: PathBuf },
    /// Numerical convex roof with the best decomposition found.
    Roof {
        state: PathBuf,
        /// Ensemble size; defaults to rank squared.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        max_iterations: usize,
    },
    /// Seeded property sweep; exits nonzero on any violation.
    Verify {
        #[arg(long, default_value_t = 6)]
        max_dim: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated measure names.
        #[arg(long, value_delimiter = ',', default_values_t = [MeasureId::RelEnt, MeasureId::L1, MeasureId::QubitAnalytic])]
        measures: Vec<MeasureId>,
    },
    /// Distill copies of sqrt(a)|0> + sqrt(1-a)|1>.
    Distill {
        #[arg(long)]
        alpha_sq: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// State-vector mode (N <= 20, M ignored).
        #[arg(long)]
        exact: bool,
    },
    /// Measure a state in the computational basis and write the outcomes.
    Sample {
        state: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Compare extract-after-measure with measure-after-distill.
    Pipeline {
        #[arg(long)]
        alpha_sq: f64,
        #[arg(long, default_value_t = 200)]
        n_groups: usize,
        #[arg(long, default_value_t = 50)]
        group_n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
        /// shannon or min.
        #[arg(long, default_value = "shannon")]
        entropy: EntropyKind,
    },
}

fn measures(state: &Path, tol: f64) -> Result<Value> {
    let doc = read_state_file(state, tol)?;
    let rho = doc.state.density();
    let mut out = json!({
        "dim": rho.dim(),
        MeasureId::RelEnt.name(): c_rel_ent(&rho).value,
        MeasureId::L1.name(): c_l1(&rho).value,
    });
    let (roof, exact) = if let Some(psi) = doc.state.pure() {
        (r_pure(psi).value, true)
    } else if rho.dim() == 2 {
        (r_qubit_analytic(&rho)?.value, true)
    } else {
        (optimize_roof(&rho, &RoofConfig::default())?.value, false)
    };
    if rho.dim() == 2 {
        out[MeasureId::QubitAnalytic.name()] = json!(r_qubit_analytic(&rho)?.value);
    }
    out[MeasureId::RoofRandomness.name()] = json!(roof);
    out["roof-randomness-exact"] = json!(exact);
    Ok(out)
}

fn run(cli: Cli) -> Result<(Value, bool)> {
    let tol = cli.tol;
    match cli.command {
        Command::Measures { state } => Ok((measures(&state, tol)?, true)),
        Command::Roof { state, m, restarts, tolerance, seed, max_iterations } => {
            let rho = read_state_file(&state, tol)?.state.density();
            let config = RoofConfig { ensemble_size: m, restarts, max_iterations, tolerance, seed, ..RoofConfig::default() };
            let result = optimize_roof(&rho, &config)?;
            let file = StateFile::from_density(&rho).with_decomposition(&result.best_decomposition);
            Ok((
                json!({
                    "value": result.value,
                    "converged": result.converged,
                    "restarts_used": result.restarts_used,
                    "restart_values": result.restart_values,
                    "best_restart": result.best_restart,
                    "iterations": result.iterations,
                    "state": file,
                }),
                true,
            ))
        }
        Command::Verify { max_dim, samples, seed, measures } => {
            let reports = run_property_suite(&SuiteConfig { max_dim, samples, seed, measures })?;
            let ok = reports.iter().all(|r| r.passed);
            Ok((serde_json::to_value(reports).expect("reports serialize"), ok))
        }
        Command::Distill { alpha_sq, n, m, seed, exact } => {
            let psi = PureState::qubit_from_population(alpha_sq)?;
            let value = if exact {
                serde_json::to_value(distill_exact(&psi, n)?)
            } else {
                serde_json::to_value(distill_simulate(&psi, n, m, seed)?)
            };
            Ok((value.expect("reports serialize"), true))
        }
        Command::Sample { state, n, seed, output } => {
            let rho = read_state_file(&state, tol)?.state.density();
            let stream = sample_distribution(&rho.diagonal(), n, seed);
            stream.write_file(&output)?;
            let entropy = if stream.is_empty() { None } else { Some(empirical_entropy(&stream)?) };
            Ok((json!({ "n": n, "dim": rho.dim(), "seed": seed, "empirical_entropy": entropy, "output": output }), true))
        }
        Command::Pipeline { alpha_sq, n_groups, group_n, seed, margin, entropy } => {
            let psi = PureState::qubit_from_population(alpha_sq)?;
            let report = pipeline_compare(&psi, n_groups, group_n, seed, margin, entropy)?;
            Ok((serde_json::to_value(report).expect("reports serialize"), true))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((value, ok)) => {
            println!("{}", serde_json::to_string_pretty(&value).expect("JSON values serialize"));
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
