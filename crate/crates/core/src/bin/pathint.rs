//! Command-line front end: simulation, fractional operators, norms,
//! variations, integrals and verification experiments.
//!
//! Exit codes: 0 on success, 1 on invalid input, 2 on numeric failure.
//! Errors are reported as one line `error kind=<kind> message="<text>"` on
//! stderr.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use pathint::convexbv::BVFunction;
use pathint::fracops::{
    besov_norm_w1_with, besov_norm_w2_with, frac_deriv_left, frac_deriv_right, frac_integral_left,
    grr_check, FracOrder, Reconstruction,
};
use pathint::glsint::{gls_integral, rs_sum, GlsConfig, HolderWindow};
use pathint::harness::{
    ito_convex_residual, ito_smooth_residual, ito_tanaka_residual, ExperimentOptions, ToleranceRule,
};
use pathint::paths::{io, JumpDistribution};
use pathint::variation::{p_variation, sup_p_variation_with, SupOptions, TagRule, TaggedPartition};
use pathint::{generate, Error, ProcessKind, ProcessSpec, Result, SampledPath};

/// Schema version stamped on every JSON output.
const OUTPUT_SCHEMA_VERSION: u32 = 1;
/// Environment variable overriding the default seed.
const SEED_ENV: &str = "PATHINT_SEED";

#[derive(Debug, Parser)]
#[command(name = "pathint", version, about = "Pathwise stochastic integration toolkit")]
struct Cli {
    /// Cap on worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print progress information to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a path and write it as CSV.
    Simulate(SimulateArgs),
    /// Fractional derivative (or integral) of a sampled path.
    FracDeriv(FracDerivArgs),
    /// Fractional Besov-type norm of a sampled path.
    BesovNorm(BesovNormArgs),
    /// p-variation along a partition or its supremum over sub-partitions.
    Pvar(PvarArgs),
    /// Generalized Lebesgue–Stieltjes integral of f against g.
    Gls(GlsArgs),
    /// Riemann–Stieltjes sum of f against g along a tagged partition.
    RsSum(RsSumArgs),
    /// Run an Itô-formula verification experiment.
    VerifyIto(VerifyItoArgs),
    /// Empirical Garsia–Rodemich–Rumsey comparison.
    GrrCheck(GrrArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SimKind {
    Fbm,
    Brownian,
    Poisson,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Process kind (ignored when --spec is given).
    #[arg(long, value_enum, default_value = "fbm")]
    kind: SimKind,
    /// Hurst index for fbm.
    #[arg(long, default_value_t = 0.75)]
    hurst: f64,
    /// Jump rate for poisson (standard normal jump sizes).
    #[arg(long, default_value_t = 1.0)]
    rate: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = 4097)]
    n: usize,
    /// Time horizon T.
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    /// JSON process spec; overrides --kind, --hurst, --rate, --n and --horizon.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Random seed (default: $PATHINT_SEED or 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Args)]
struct FracDerivArgs {
    /// Input path CSV (`t,value`).
    #[arg(long)]
    input: PathBuf,
    /// Order in (0, 1).
    #[arg(long)]
    beta: f64,
    /// Left (from 0) or right (towards --t) operator.
    #[arg(long, value_enum, default_value = "left")]
    side: SideArg,
    /// End point of the right operator (default: horizon).
    #[arg(long)]
    t: Option<f64>,
    /// Reconstruction between grid points: linear or const.
    #[arg(long, default_value = "linear")]
    recon: String,
    /// Compute the left fractional integral instead of the derivative.
    #[arg(long)]
    integral: bool,
    /// Output CSV file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NormKind {
    W1,
    W2,
}

#[derive(Debug, Args)]
struct BesovNormArgs {
    /// Input path CSV.
    #[arg(long)]
    input: PathBuf,
    /// Order in (0, 1).
    #[arg(long)]
    beta: f64,
    /// Which norm.
    #[arg(long, value_enum, default_value = "w2")]
    norm: NormKind,
    /// Reconstruction: linear or const.
    #[arg(long, default_value = "linear")]
    recon: String,
    /// Output JSON file (stdout when omitted).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PvarArgs {
    /// Input path CSV.
    #[arg(long)]
    input: PathBuf,
    /// Exponent p >= 1.
    #[arg(long)]
    p: f64,
    /// Report the supremum over sub-partitions of the grid.
    #[arg(long)]
    sup: bool,
    /// Above the size cap, use the approximate extrema preselection.
    #[arg(long)]
    approximate: bool,
    /// Partition: full, uniform:N or dyadic:K.
    #[arg(long, default_value = "full")]
    partition: String,
    /// Output JSON file (stdout when omitted).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GlsArgs {
    /// Integrand path CSV.
    #[arg(long)]
    f: PathBuf,
    /// Integrator path CSV on the same grid.
    #[arg(long)]
    g: PathBuf,
    /// Order in (0, 1); required unless both Hölder estimates are given.
    #[arg(long)]
    beta: Option<f64>,
    /// Upper end of integration (default: horizon).
    #[arg(long)]
    t: Option<f64>,
    /// Integrand reconstruction: linear or const.
    #[arg(long, default_value = "linear")]
    recon_f: String,
    /// Integrator reconstruction: linear or const.
    #[arg(long, default_value = "linear")]
    recon_g: String,
    /// Hölder estimate of the integrand's driving path.
    #[arg(long, requires = "gamma_hat")]
    alpha_hat: Option<f64>,
    /// Hölder estimate of the integrator.
    #[arg(long, requires = "alpha_hat")]
    gamma_hat: Option<f64>,
    /// Output JSON file (stdout when omitted).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RsSumArgs {
    /// Integrand path CSV.
    #[arg(long)]
    f: PathBuf,
    /// Integrator path CSV on the same grid.
    #[arg(long)]
    g: PathBuf,
    /// Tag rule: forward, backward or midpoint.
    #[arg(long, default_value = "forward")]
    tags: String,
    /// Partition: full, uniform:N or dyadic:K.
    #[arg(long, default_value = "full")]
    partition: String,
    /// Output JSON file (stdout when omitted).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ItoKind {
    Smooth,
    Convex,
    Tanaka,
}

#[derive(Debug, Args)]
struct VerifyItoArgs {
    /// Which formula to check.
    #[arg(long, value_enum)]
    kind: ItoKind,
    /// JSON process spec (grid_size is replaced by the --grids range).
    #[arg(long)]
    spec: PathBuf,
    /// Dyadic levels as LO..HI; grids have 2^level + 1 points.
    #[arg(long, default_value = "8..14")]
    grids: String,
    /// Number of seeds, starting at the base seed.
    #[arg(long, default_value_t = 50)]
    seeds: u64,
    /// Base seed (default: $PATHINT_SEED or 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Order used by the gLS integrals.
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// JSON BV function for convex and tanaka (default: indicator of x > 0).
    #[arg(long)]
    fprime: Option<PathBuf>,
    /// Mollifier scales for the convex experiment, comma separated.
    #[arg(long, default_value = "4,16,64,256")]
    mollifier_scales: String,
    /// Residual tolerance at the finest grid; the verdict is diagnostic without it.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Output report JSON (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GrrArgs {
    /// Input path CSV.
    #[arg(long)]
    input: PathBuf,
    /// Exponent p >= 1.
    #[arg(long)]
    p: f64,
    /// Hölder-type exponent with alpha * p > 1.
    #[arg(long)]
    alpha: f64,
    /// Output JSON file (stdout when omitted).
    #[arg(long)]
    json: Option<PathBuf>,
}

fn default_seed(explicit: Option<u64>) -> Result<u64> {
    if let Some(s) = explicit {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Validation(format!("{SEED_ENV}={v} is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn order(beta: f64) -> Result<FracOrder> {
    FracOrder::new(beta)
}

fn write_output(target: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match target {
        Some(p) => fs::write(p, bytes)?,
        None => std::io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn write_json(target: Option<&Path>, command: &str, body: impl Serialize) -> Result<()> {
    let mut value = serde_json::to_value(body)?;
    if let serde_json::Value::Object(map) = &mut value {
        map.insert("schema_version".into(), json!(OUTPUT_SCHEMA_VERSION));
        map.insert("command".into(), json!(command));
    }
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    write_output(target, text.as_bytes())
}

fn write_path(target: Option<&Path>, path: &SampledPath) -> Result<()> {
    let mut buf = Vec::new();
    io::write_csv(path, &mut buf)?;
    write_output(target, &buf)
}

fn parse_partition(spec: &str, grid_len: usize, rule: TagRule) -> Result<TaggedPartition> {
    match spec.split_once(':') {
        None if spec == "full" => TaggedPartition::full(grid_len, rule),
        Some(("uniform", n)) => TaggedPartition::uniform(grid_len, parse_num(n)?, rule),
        Some(("dyadic", k)) => TaggedPartition::dyadic(grid_len, parse_num(k)?, rule),
        _ => Err(Error::Validation(format!("unknown partition '{spec}' (full, uniform:N, dyadic:K)"))),
    }
}

fn parse_num<T: FromStr>(s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Validation(format!("'{s}' is not a valid number")))
}

fn parse_levels(s: &str) -> Result<(u32, u32)> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| Error::Validation(format!("grid range '{s}' must look like 8..14")))?;
    Ok((parse_num(lo)?, parse_num(hi.trim_start_matches('='))?))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Simulate(a) => {
            let seed = default_seed(a.seed)?;
            let spec = match &a.spec {
                Some(p) => read_json::<ProcessSpec>(p)?.with_seed(seed),
                None => {
                    let kind = match a.kind {
                        SimKind::Fbm => ProcessKind::Fbm { hurst: a.hurst },
                        SimKind::Brownian => ProcessKind::Brownian,
                        SimKind::Poisson => ProcessKind::CompoundPoisson {
                            rate: a.rate,
                            jump_dist: JumpDistribution::Normal { mean: 0.0, std: 1.0 },
                        },
                    };
                    ProcessSpec::new(kind, a.horizon, a.n, seed)
                }
            };
            if cli.verbose {
                eprintln!("simulating {} points with seed {}", spec.grid_size, spec.seed);
            }
            write_path(a.out.as_deref(), &generate(&spec)?)
        }
        Command::FracDeriv(a) => {
            let f = io::load(&a.input)?;
            let beta = order(a.beta)?;
            let recon: Reconstruction = a.recon.parse()?;
            let out = match (a.integral, a.side) {
                (true, SideArg::Left) => frac_integral_left(&f, beta, recon)?,
                (true, SideArg::Right) => {
                    return Err(Error::Validation("--integral is only available for --side left".into()))
                }
                (false, SideArg::Left) => frac_deriv_left(&f, beta, recon)?,
                (false, SideArg::Right) => frac_deriv_right(&f, beta, a.t.unwrap_or(f.horizon()), recon)?,
            };
            write_path(a.out.as_deref(), &out)
        }
        Command::BesovNorm(a) => {
            let f = io::load(&a.input)?;
            let beta = order(a.beta)?;
            let recon: Reconstruction = a.recon.parse()?;
            let report = match a.norm {
                NormKind::W1 => besov_norm_w1_with(&f, beta, recon),
                NormKind::W2 => besov_norm_w2_with(&f, beta, recon),
            };
            let norm = format!("{:?}", a.norm).to_lowercase();
            write_json(
                a.json.as_deref(),
                "besov-norm",
                json!({ "norm": norm, "beta": a.beta, "recon": recon, "value": report.value, "saturated": report.saturated }),
            )
        }
        Command::Pvar(a) => {
            let f = io::load(&a.input)?;
            if a.sup {
                let opts = SupOptions { allow_approximate: a.approximate, ..SupOptions::default() };
                write_json(a.json.as_deref(), "pvar", sup_p_variation_with(&f, a.p, opts)?)
            } else {
                let part = parse_partition(&a.partition, f.len(), TagRule::Forward)?;
                let value = p_variation(&f, &part, a.p)?;
                write_json(a.json.as_deref(), "pvar", json!({ "p": a.p, "partition": a.partition, "value": value }))
            }
        }
        Command::Gls(a) => {
            let f = io::load(&a.f)?;
            let g = io::load(&a.g)?;
            let recon_f: Reconstruction = a.recon_f.parse()?;
            let recon_g: Reconstruction = a.recon_g.parse()?;
            let window = match (a.alpha_hat, a.gamma_hat) {
                (Some(integrand_alpha), Some(integrator_gamma)) => {
                    Some(HolderWindow { integrand_alpha, integrator_gamma })
                }
                _ => None,
            };
            let cfg = GlsConfig {
                beta: a.beta.map(order).transpose()?,
                integrand_recon: recon_f,
                integrator_recon: recon_g,
                window,
            };
            let t = a.t.unwrap_or(f.horizon());
            write_json(a.json.as_deref(), "gls", gls_integral(&f, &g, &cfg, t)?)
        }
        Command::RsSum(a) => {
            let f = io::load(&a.f)?;
            let g = io::load(&a.g)?;
            let rule: TagRule = a.tags.parse()?;
            let part = parse_partition(&a.partition, g.len(), rule)?;
            let value = rs_sum(&f, &g, &part)?;
            write_json(
                a.json.as_deref(),
                "rs-sum",
                json!({ "tags": rule, "partition": a.partition, "value": value }),
            )
        }
        Command::VerifyIto(a) => {
            let spec: ProcessSpec = read_json(&a.spec)?;
            let (lo, hi) = parse_levels(&a.grids)?;
            let base = default_seed(a.seed)?;
            let seeds: Vec<u64> = (base..base + a.seeds).collect();
            let mut opts = ExperimentOptions::new(lo, hi, seeds);
            if let Some(tol) = a.tolerance {
                opts = opts.with_tolerance(ToleranceRule::absolute(tol).with_trend(0.2));
            }
            let fprime = match &a.fprime {
                Some(p) => read_json(p)?,
                None => BVFunction::indicator_above(0.0),
            };
            let beta = order(a.beta)?;
            if cli.verbose {
                eprintln!("verify-ito {:?}: levels {lo}..={hi}, {} seeds", a.kind, a.seeds);
            }
            let report = match a.kind {
                ItoKind::Smooth => ito_smooth_residual(|x| x * x, |x| 2.0 * x, &spec, &GlsConfig::new(beta), &opts)?,
                ItoKind::Convex => {
                    let scales = a
                        .mollifier_scales
                        .split(',')
                        .filter(|s| !s.trim().is_empty())
                        .map(parse_num)
                        .collect::<Result<Vec<u32>>>()?;
                    ito_convex_residual(&fprime, &spec, &GlsConfig::bv_image(beta), &scales, &opts)?
                }
                ItoKind::Tanaka => ito_tanaka_residual(&fprime, &spec, &opts.allow_nonzero_qv())?,
            };
            write_json(a.out.as_deref(), "verify-ito", report)
        }
        Command::GrrCheck(a) => {
            let f = io::load(&a.input)?;
            let check = grr_check(&f, a.p, a.alpha)?;
            write_json(
                a.json.as_deref(),
                "grr-check",
                json!({
                    "p": a.p, "alpha": a.alpha,
                    "lhs_max_ratio": check.lhs_max_ratio,
                    "rhs_integral": check.rhs_integral,
                    "constant": check.constant(),
                }),
            )
        }
    }
}

fn report_error(kind: &str, message: &str) {
    let flat = message.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("error kind={kind} message={:?}", flat);
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            report_error("usage", &e.kind().to_string());
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(e.kind(), &e.to_string());
            ExitCode::from(if e.is_numeric() { 2 } else { 1 })
        }
    }
}
