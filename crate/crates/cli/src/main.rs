use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use log::warn;
use serde::Serialize;

use eprnet::io::{
    factors_from_json, factors_to_json, network_from_json, network_to_json, report_to_json,
    DB_DECIMALS,
};
use eprnet::linalg::round_decimals;
use eprnet::synthesis::quantized_network;
use eprnet::{
    build_state_space, decompose, optimize, quadrature_form, reconstruct, stability_check,
    sweep_spectrum, two_mode_squeezing, NopaParams, OptimizerConfig, PassiveNetwork,
    PermutationVector, SynthesisReport, DEFAULT_GAMMA_REF,
};

/// Passive-network design for dual-NOPA EPR entanglement.
#[derive(Debug, Parser)]
#[command(name = "eprnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Two-mode squeezing at one frequency, as JSON.
    Eval {
        #[command(flatten)]
        net: NetworkArg,
        #[command(flatten)]
        rates: RateArgs,
        #[command(flatten)]
        point: PointArgs,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Squeezing over a uniform frequency grid, as CSV.
    Sweep {
        #[command(flatten)]
        net: NetworkArg,
        #[command(flatten)]
        rates: RateArgs,
        /// Upper end of the grid, rad/s.
        #[arg(long)]
        omega_max: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        psi1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        psi2: f64,
        /// CSV destination (standard output if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Steepest descent of V(0) over the unitary group.
    Optimize {
        /// Starting network: builtin name or matrix file.
        #[arg(long, default_value = "cfb")]
        init: String,
        #[command(flatten)]
        rates: RateArgs,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        /// Per-iteration CSV trace.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Matrix file for the final network.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-level factorization into a factor file.
    Decompose {
        #[command(flatten)]
        net: NetworkArg,
        /// Comma-separated permutation of 1..6.
        #[arg(long, default_value = "6,5,4,3,2,1")]
        perm: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multiply a factor file back into a matrix file.
    Recompose {
        #[arg(long)]
        factors: PathBuf,
        /// Round beamsplitter α to this many decimals first.
        #[arg(long)]
        digits: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// V(0) after rounding the beamsplitter coefficients.
    Sensitivity {
        /// Factor file; if absent, `--network` is decomposed with `--perm`.
        #[arg(long, conflicts_with = "network")]
        factors: Option<PathBuf>,
        #[arg(long)]
        network: Option<String>,
        #[arg(long, default_value = "6,5,4,3,2,1")]
        perm: String,
        /// Decimals kept in each α (all digits if omitted).
        #[arg(long)]
        digits: Option<u32>,
        #[command(flatten)]
        rates: RateArgs,
    },
    /// Check unitarity, symplecticity and closed-loop stability.
    Validate {
        #[command(flatten)]
        net: NetworkArg,
        #[command(flatten)]
        rates: RateArgs,
    },
}

#[derive(Debug, Args)]
struct NetworkArg {
    /// Builtin name (cfb, lm-paper, identity) or path to a matrix file.
    #[arg(long, default_value = "cfb")]
    network: String,
}

#[derive(Debug, Args)]
struct RateArgs {
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    kappa: f64,
    #[arg(long, default_value_t = 0.4)]
    epsilon: f64,
    /// Reference rate in Hz.
    #[arg(long, default_value_t = DEFAULT_GAMMA_REF)]
    gamma_ref: f64,
    /// Read gamma, kappa, epsilon as Hz instead of multiples of gamma-ref.
    #[arg(long)]
    hz: bool,
}

impl RateArgs {
    fn params(&self) -> eprnet::Result<NopaParams> {
        let scale = if self.hz { 1.0 } else { self.gamma_ref };
        NopaParams::new(
            self.gamma * scale,
            self.kappa * scale,
            self.epsilon * scale,
            self.gamma_ref,
        )
    }
}

#[derive(Debug, Args)]
struct PointArgs {
    /// Angular frequency, rad/s.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    omega: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    psi1: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    psi2: f64,
}

/// A is not Hurwitz; mapped to exit code 3.
#[derive(Debug)]
struct Unstable {
    max_re_eig: f64,
}

impl std::fmt::Display for Unstable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "closed loop is unstable: max Re eig(A) = {:.6e} (in units of gamma_ref)",
            self.max_re_eig
        )
    }
}

impl std::error::Error for Unstable {}

fn load_network(source: &str) -> anyhow::Result<PassiveNetwork> {
    if let Some(net) = PassiveNetwork::builtin(source) {
        return Ok(net);
    }
    let text =
        fs::read_to_string(source).with_context(|| format!("cannot read network {source:?}"))?;
    network_from_json(&text).with_context(|| format!("invalid network file {source:?}"))
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n"))
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn csv_writer(out: Option<&Path>) -> anyhow::Result<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(
            fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?,
        ),
        None => Box::new(std::io::stdout()),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn stable_state_space(
    net: &PassiveNetwork,
    params: &NopaParams,
) -> anyhow::Result<eprnet::StateSpace> {
    let ss = build_state_space(net, params)?;
    let report = stability_check(&ss);
    if !report.hurwitz {
        return Err(Unstable {
            max_re_eig: report.max_re_eig,
        }
        .into());
    }
    Ok(ss)
}

#[derive(Serialize)]
struct SweepRow {
    omega_rad_s: f64,
    v_plus: f64,
    v_minus: f64,
    v_total: f64,
    db: f64,
    entangled: u8,
}

#[derive(Serialize)]
struct TraceRow {
    iter: usize,
    v0: f64,
    db: f64,
    z_norm: f64,
    rho: f64,
    feasibility_rejections: usize,
}

#[derive(Serialize)]
struct OptimizeSummary {
    status: eprnet::Status,
    iterations: usize,
    v0: f64,
    db: f64,
    z_norm: f64,
}

fn synthesis_for(
    factors: Option<&Path>,
    network: Option<&str>,
    perm: &str,
) -> anyhow::Result<SynthesisReport> {
    if let Some(path) = factors {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read factors {}", path.display()))?;
        let (factors, order) = factors_from_json(&text)?;
        return Ok(SynthesisReport {
            factors,
            order,
            reconstruction_error: f64::NAN,
        });
    }
    let Some(source) = network else {
        bail!("either --factors or --network is required");
    };
    let net = load_network(source)?;
    Ok(decompose(&net, &PermutationVector::parse(perm)?)?)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Eval {
            net,
            rates,
            point,
            out,
        } => {
            let params = rates.params()?;
            let ss = stable_state_space(&load_network(&net.network)?, &params)?;
            let report = two_mode_squeezing(&ss, point.omega, point.psi1, point.psi2)?;
            let text = report_to_json(&report)?;
            println!("{text}");
            if let Some(path) = out {
                emit(&text, Some(&path))?;
            }
        }
        Command::Sweep {
            net,
            rates,
            omega_max,
            points,
            psi1,
            psi2,
            out,
        } => {
            let params = rates.params()?;
            let ss = stable_state_space(&load_network(&net.network)?, &params)?;
            let sweep = sweep_spectrum(&ss, omega_max, points, psi1, psi2)?;
            for omega in &sweep.resonant {
                warn!("skipped resonant frequency {omega} rad/s");
            }
            let mut writer = csv_writer(out.as_deref())?;
            for r in &sweep.reports {
                writer.serialize(SweepRow {
                    omega_rad_s: r.omega,
                    v_plus: r.v_plus,
                    v_minus: r.v_minus,
                    v_total: r.v_total,
                    db: round_decimals(r.db, DB_DECIMALS),
                    entangled: r.entangled as u8,
                })?;
            }
            writer.flush()?;
        }
        Command::Optimize {
            init,
            rates,
            tol,
            max_iters,
            trace,
            out,
        } => {
            let params = rates.params()?;
            let cfg = OptimizerConfig {
                tol,
                max_iters,
                ..OptimizerConfig::default()
            };
            let run = optimize(&load_network(&init)?, &params, &cfg)?;
            if let Some(path) = trace {
                let mut writer = csv_writer(Some(&path))?;
                for r in &run.trace {
                    writer.serialize(TraceRow {
                        iter: r.iter,
                        v0: r.v0,
                        db: round_decimals(r.db, DB_DECIMALS),
                        z_norm: r.z_norm,
                        rho: r.rho,
                        feasibility_rejections: r.feasibility_rejections,
                    })?;
                }
                writer.flush()?;
            }
            if let Some(path) = out {
                let result = run.result.clone().with_label("optimized");
                emit(&network_to_json(&result)?, Some(&path))?;
            }
            let last = run.trace.last().expect("trace holds at least the start");
            let summary = OptimizeSummary {
                status: run.status,
                iterations: last.iter,
                v0: last.v0,
                db: round_decimals(last.db, DB_DECIMALS),
                z_norm: last.z_norm,
            };
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Decompose { net, perm, out } => {
            let report = decompose(
                &load_network(&net.network)?,
                &PermutationVector::parse(&perm)?,
            )?;
            emit(&factors_to_json(&report)?, out.as_deref())?;
        }
        Command::Recompose {
            factors,
            digits,
            out,
        } => {
            let report = synthesis_for(Some(&factors), None, "")?;
            let net = match digits {
                Some(_) => quantized_network(&report, digits)?,
                None => reconstruct(&report.factors, report.order)?,
            };
            emit(
                &network_to_json(&net.with_label("recomposed"))?,
                out.as_deref(),
            )?;
        }
        Command::Sensitivity {
            factors,
            network,
            perm,
            digits,
            rates,
        } => {
            let params = rates.params()?;
            let report = synthesis_for(factors.as_deref(), network.as_deref(), &perm)?;
            let net = quantized_network(&report, digits)?;
            let ss = stable_state_space(&net, &params)?;
            let squeezing = two_mode_squeezing(&ss, 0.0, 0.0, 0.0)?;
            println!("{}", report_to_json(&squeezing)?);
        }
        Command::Validate { net, rates } => {
            let params = rates.params()?;
            let net = load_network(&net.network)?;
            let q = quadrature_form(&net);
            let mut all = true;
            let mut line = |name: &str, ok: bool, value: String| {
                all &= ok;
                println!("{} {name}: {value}", if ok { "PASS" } else { "FAIL" });
            };
            let unitary = net.unitarity_residual();
            line(
                "unitarity",
                unitary <= 1e-10,
                format!("residual {unitary:.3e}"),
            );
            let orth = q.orthogonality_residual();
            line(
                "orthogonality",
                orth <= 1e-10,
                format!("residual {orth:.3e}"),
            );
            let symp = q.symplectic_residual();
            line("symplectic", symp <= 1e-10, format!("residual {symp:.3e}"));
            match build_state_space(&net, &params) {
                Ok(ss) => {
                    line("feedback", true, "I - S22 invertible".into());
                    let report = stability_check(&ss);
                    line(
                        "stability",
                        report.hurwitz && report.a_invertible,
                        format!("max Re eig(A) = {:.6e}", report.max_re_eig),
                    );
                }
                Err(e) => {
                    line("feedback", false, e.to_string());
                    line("stability", false, "not evaluated".into());
                }
            }
            return Ok(all);
        }
    }
    Ok(true)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Unstable>().is_some() {
        return 3;
    }
    for cause in err.chain() {
        if let Some(eprnet::Error::IllPosedFeedback { .. }) = cause.downcast_ref::<eprnet::Error>()
        {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(64)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
