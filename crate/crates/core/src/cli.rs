//! Command-line front end: configuration, subcommand dispatch and report files.
//!
//! Exit codes: 0 when the run certifies or passes, 2 when a violation is
//! detected, 1 on input or I/O errors, 64 on command-line usage errors.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::coefficients::{gamma_threshold, validate, CoefficientPair, ComplexSymmetricMatrix, ScalarModulation};
use crate::error::{Error, Result};
use crate::grid::{synthesize, Family, FieldSpec, JumpSpec};
use crate::harness::{tau_sweep, EstimateId, SweepSpec};
use crate::partition::audit;
use crate::pseudoconvexity::{calibrate_epsilon, certify};
use crate::symbol::{factor_at, a_lower_bound, magnitude_cap};
use crate::transmission::{alpha_ratio, certify_transmission, log_grid};
use crate::weights::WeightParameters;
use crate::Side;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "carleman", version, about = "Numerical checks for interface Carleman estimates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Validate coefficients; certify the symbol bounds, transmission and pseudoconvexity.
    Analyze,
    /// Compute the weight parameters and the gamma threshold.
    Weights,
    /// Sweep tau for a Carleman estimate on a synthesized field.
    Verify,
    /// Audit the lattice partition of unity.
    Partition,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Weights => "weights",
            Command::Verify => "verify",
            Command::Partition => "partition",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory receiving the JSON and CSV reports.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub tau_min: Option<f64>,
    #[arg(long, global = true)]
    pub tau_max: Option<f64>,
    #[arg(long, global = true)]
    pub tau_points: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub grid_h: Option<f64>,
    #[arg(long, global = true)]
    pub sphere_samples: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    #[serde(rename = "M")]
    pub m: Vec<Vec<f64>>,
    #[serde(rename = "N")]
    pub n: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialSpec {
    pub amplitude: f64,
    pub wavevector: Vec<f64>,
}

/// Optional weight overrides; missing entries are auto-configured.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightOverrides {
    pub alpha_plus: Option<f64>,
    pub alpha_minus: Option<f64>,
    pub beta: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    #[serde(default = "default_sphere")]
    pub sphere: usize,
    #[serde(default = "default_null_set")]
    pub null_set: usize,
    #[serde(default = "default_symbol")]
    pub symbol: usize,
    #[serde(default = "default_tau_points")]
    pub transmission_tau_points: usize,
}

fn default_sphere() -> usize {
    512
}
fn default_null_set() -> usize {
    1024
}
fn default_symbol() -> usize {
    2000
}
fn default_tau_points() -> usize {
    24
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self {
            sphere: default_sphere(),
            null_set: default_null_set(),
            symbol: default_symbol(),
            transmission_tau_points: default_tau_points(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    pub mu: f64,
    pub dim: usize,
    pub lo: f64,
    pub hi: f64,
    pub nodes: usize,
    pub per_cell: usize,
}

impl Default for PartitionSpec {
    fn default() -> Self {
        Self { mu: 4.0, dim: 2, lo: -1.0, hi: 1.0, nodes: 10_000, per_cell: 16 }
    }
}

/// Full run configuration (JSON).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub gamma: f64,
    pub plus: MatrixSpec,
    pub minus: MatrixSpec,
    #[serde(default)]
    pub lambda0: Option<f64>,
    #[serde(default, rename = "Lambda0")]
    pub big_lambda0: Option<f64>,
    #[serde(default, rename = "M0")]
    pub m0: Option<f64>,
    #[serde(default)]
    pub spatial: Option<SpatialSpec>,
    #[serde(default)]
    pub weights: WeightOverrides,
    #[serde(default)]
    pub grid: Option<FieldSpec>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub estimate: Option<EstimateId>,
    #[serde(default)]
    pub sampling: SamplingSpec,
    #[serde(default)]
    pub partition: Option<PartitionSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn to_matrix(rows: &[Vec<f64>], n: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Config(format!("{what} must be a {n}x{n} matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("cannot parse configuration: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn pair(&self) -> Result<CoefficientPair> {
        let side = |s: &MatrixSpec, name: &str| {
            ComplexSymmetricMatrix::new(
                to_matrix(&s.m, self.n, &format!("{name}.M"))?,
                to_matrix(&s.n, self.n, &format!("{name}.N"))?,
                self.gamma,
            )
        };
        let plus = side(&self.plus, "plus")?;
        let minus = side(&self.minus, "minus")?;
        let bounds = match (self.lambda0, self.big_lambda0) {
            (Some(l), Some(u)) => Some((l, u)),
            (None, None) => None,
            _ => return Err(Error::Config("lambda0 and Lambda0 must be given together".into())),
        };
        let pair = CoefficientPair::new(plus.clone(), minus.clone(), bounds, self.m0.unwrap_or(0.0))?;
        Ok(match &self.spatial {
            Some(s) => {
                if s.wavevector.len() != self.n {
                    return Err(Error::Config(format!("spatial.wavevector must have length {}", self.n)));
                }
                let field = ScalarModulation { plus, minus, amplitude: s.amplitude, wavevector: s.wavevector.clone() };
                let m0 = self.m0.unwrap_or_else(|| field.lipschitz_constant());
                pair.with_spatial(Arc::new(field), m0)
            }
            None => pair,
        })
    }
}

/// Weights with the automatic choices `beta = 1`, `alpha_minus = 1`,
/// `alpha_plus = alpha_ratio`, `epsilon` the smaller per-side calibration and
/// `delta = epsilon`; any override replaces the automatic value.
#[derive(Debug, Clone, Serialize)]
pub struct WeightChoice {
    pub weights: WeightParameters,
    pub alpha_ratio: f64,
    pub epsilon_plus: f64,
    pub epsilon_minus: f64,
    pub gamma0: f64,
    pub gamma: f64,
    pub sphere_samples: usize,
    pub null_set_samples: usize,
}

pub fn auto_weights(
    pair: &CoefficientPair,
    overrides: &WeightOverrides,
    sphere_samples: usize,
    null_set_samples: usize,
) -> Result<WeightChoice> {
    let ratio = alpha_ratio(pair, sphere_samples)?;
    let beta = overrides.beta.unwrap_or(1.0);
    let alpha_minus = overrides.alpha_minus.unwrap_or(1.0);
    let alpha_plus = overrides.alpha_plus.unwrap_or(ratio * alpha_minus);
    let eps_plus = calibrate_epsilon(&pair.plus, Side::Plus, alpha_plus, beta, null_set_samples)?;
    let eps_minus = calibrate_epsilon(&pair.minus, Side::Minus, alpha_minus, beta, null_set_samples)?;
    let epsilon = overrides.epsilon.unwrap_or(eps_plus.min(eps_minus));
    let delta = overrides.delta.unwrap_or(epsilon.min(1.0));
    let weights = WeightParameters::new(alpha_plus, alpha_minus, beta, epsilon, delta)?;
    Ok(WeightChoice {
        weights,
        alpha_ratio: ratio,
        epsilon_plus: eps_plus,
        epsilon_minus: eps_minus,
        gamma0: gamma_threshold(pair.lambda0, pair.big_lambda0, pair.dim())?,
        gamma: pair.gamma(),
        sphere_samples,
        null_set_samples,
    })
}

/// Result of one subcommand: the JSON body and whether it passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub pass: bool,
    pub summary: String,
}

fn settings(cfg: &RunConfig, opts: &Options) -> (usize, u64) {
    (opts.sphere_samples.unwrap_or(cfg.sampling.sphere), opts.seed.or(cfg.seed).unwrap_or(0))
}

/// Monte-Carlo check of the symbol bounds at random unit `xi'`.
fn symbol_section(pair: &CoefficientPair, samples: usize, seed: u64) -> Result<Value> {
    let derived = pair.derived()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = pair.dim();
    let (mut fails_lower, mut fails_cap) = (0usize, 0usize);
    let (mut min_lower, mut min_cap) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..samples {
        let mut xi: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        xi.iter_mut().for_each(|v| *v /= norm);
        for side in Side::BOTH {
            let f = factor_at(pair, side, &xi)?;
            let lower = a_lower_bound(&f, &derived);
            let cap = magnitude_cap(&f, &derived);
            min_lower = min_lower.min(lower.lhs - lower.rhs);
            min_cap = min_cap.min(cap.rhs - cap.lhs);
            fails_lower += usize::from(!lower.pass);
            fails_cap += usize::from(!cap.pass);
        }
    }
    let e1: Vec<f64> = (0..n - 1).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
    Ok(json!({
        "samples": samples,
        "seed": seed,
        "lower_bound_failures": fails_lower,
        "lower_bound_min_margin": min_lower,
        "cap_failures": fails_cap,
        "cap_min_margin": min_cap,
        "factorization_at_e1": {
            "minus": factor_at(pair, Side::Minus, &e1)?,
            "plus": factor_at(pair, Side::Plus, &e1)?,
        },
        "pass": fails_lower == 0 && fails_cap == 0,
    }))
}

pub fn analyze(cfg: &RunConfig, opts: &Options) -> Result<Outcome> {
    let pair = cfg.pair()?;
    let validation = validate(&pair)?;
    if !validation.pass {
        return Err(Error::InvalidInput(format!(
            "coefficients fail the ellipticity hypotheses: {}",
            serde_json::to_string(&validation)?
        )));
    }
    let (sphere, seed) = settings(cfg, opts);
    let choice = auto_weights(&pair, &cfg.weights, sphere, cfg.sampling.null_set)?;
    let w = choice.weights;
    let symbol = symbol_section(&pair, cfg.sampling.symbol, seed)?;
    let taus = log_grid(
        opts.tau_min.unwrap_or(0.01),
        opts.tau_max.unwrap_or(100.0),
        opts.tau_points.unwrap_or(cfg.sampling.transmission_tau_points),
    );
    let transmission = certify_transmission(&pair, &w, sphere, &taus)?;
    let derived = pair.derived()?;
    let mut pseudo = serde_json::Map::new();
    let mut pseudo_ok = true;
    for side in Side::BOTH {
        let key = if side == Side::Plus { "plus" } else { "minus" };
        let delta_prime = 0.5 * w.localization_bound(side);
        match certify(pair.side(side), side, &w, &derived, delta_prime, cfg.sampling.null_set) {
            Ok(c) => {
                pseudo_ok &= c.lower_bound_holds;
                pseudo.insert(key.into(), serde_json::to_value(c)?);
            }
            Err(e @ Error::PseudoconvexityFailed { .. }) => {
                pseudo_ok = false;
                pseudo.insert(key.into(), json!({ "violation": e.to_string() }));
            }
            Err(e) => return Err(e),
        }
    }
    let symbol_ok = symbol["pass"].as_bool().unwrap_or(false);
    let certified = symbol_ok && transmission.certified && pseudo_ok;
    let mut named: Vec<String> = transmission.violations.iter().map(|v| v.kind.clone()).collect();
    named.sort();
    named.dedup();
    if !pseudo_ok {
        named.push("pseudoconvexity".into());
    }
    if !symbol_ok {
        named.push("symbol_bounds".into());
    }
    let summary = if certified {
        format!("analyze: certified (alpha ratio {:.6}, gamma {} < gamma0 {:.6e})", choice.alpha_ratio, choice.gamma, choice.gamma0)
    } else {
        format!("analyze: violation detected [{}]", named.join(", "))
    };
    Ok(Outcome {
        report: json!({
            "certified": certified,
            "violations": named,
            "validation": validation,
            "weights": choice,
            "symbol": symbol,
            "transmission": transmission,
            "pseudoconvexity": pseudo,
        }),
        pass: certified,
        summary,
    })
}

pub fn weights(cfg: &RunConfig, opts: &Options) -> Result<Outcome> {
    let pair = cfg.pair()?;
    let (sphere, _) = settings(cfg, opts);
    let c = auto_weights(&pair, &cfg.weights, sphere, cfg.sampling.null_set)?;
    let w = c.weights;
    let summary = format!(
        "weights: alpha_plus {:.6} alpha_minus {:.6} beta {} epsilon {} delta {} gamma0 {:.6e}",
        w.alpha_plus, w.alpha_minus, w.beta, w.epsilon, w.delta, c.gamma0
    );
    Ok(Outcome {
        report: json!({
            "alpha_plus": w.alpha_plus,
            "alpha_minus": w.alpha_minus,
            "beta": w.beta,
            "epsilon": w.epsilon,
            "delta": w.delta,
            "gamma0": c.gamma0,
            "details": c,
        }),
        pass: true,
        summary,
    })
}

/// Sweep result plus the CSV text.
pub fn verify(cfg: &RunConfig, opts: &Options) -> Result<(Outcome, String)> {
    let pair = cfg.pair()?;
    let (sphere, _) = settings(cfg, opts);
    let choice = auto_weights(&pair, &cfg.weights, sphere, cfg.sampling.null_set)?;
    let w = choice.weights;
    let estimate = cfg.estimate.unwrap_or(EstimateId::Frozen);
    let mut sweep = cfg.sweep.unwrap_or_default();
    if let Some(v) = opts.tau_min {
        sweep.tau_min = v;
    }
    if let Some(v) = opts.tau_max {
        sweep.tau_max = v;
    }
    if let Some(v) = opts.tau_points {
        sweep.points = v;
    }
    let mut spec = cfg.grid.clone().unwrap_or(FieldSpec {
        rho: 0.4,
        h: 1.0 / 64.0,
        family: Family::BumpPoly,
        jump: JumpSpec { h0_amp: 0.5, h1_amp: 0.5 },
        half_width: None,
        center: None,
    });
    if let Some(h) = opts.grid_h {
        spec.h = h;
    }
    let limit = match estimate {
        EstimateId::Full => w.delta * sweep.r0,
        _ => sweep.r0,
    };
    let offset = spec.center.as_ref().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).unwrap_or(0.0);
    let mut shrunk = None;
    if spec.rho + offset > limit {
        let rho = limit - offset;
        if rho <= 2.0 * spec.h {
            return Err(Error::Constraint(format!("support limit {limit} leaves no room for a field at h = {}", spec.h)));
        }
        log::warn!("support radius {} shrunk to {rho} to meet the limit {limit}", spec.rho);
        shrunk = Some(spec.rho);
        spec.rho = rho;
        spec.half_width = None;
    }
    let field = if estimate == EstimateId::Interior {
        let grid = spec.grid(pair.dim())?;
        let height = 0.25 * spec.rho;
        crate::grid::synthesize_offset(grid, 0.5 * spec.rho, 0.5 * spec.rho, height, spec.family)?
    } else {
        synthesize(&spec, &pair)?
    };
    let report = tau_sweep(estimate, &field, &pair, &w, &sweep)?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    let summary = format!(
        "verify[{}]: max R = {:.6e} at tau = {:.3} over [{:.3}, {:.3}] (h = {}, bounded = {})",
        estimate.as_str(),
        report.max_ratio,
        report.argmax_tau,
        report.tau0,
        sweep.tau_max,
        spec.h,
        report.bounded
    );
    let pass = report.bounded;
    Ok((
        Outcome {
            report: json!({
                "field": spec,
                "rho_requested": shrunk,
                "sweep": sweep,
                "weights": choice,
                "report": report,
            }),
            pass,
            summary,
        },
        String::from_utf8(csv).expect("csv output is utf-8"),
    ))
}

pub fn partition(cfg: Option<&RunConfig>) -> Result<(Outcome, String)> {
    let spec = cfg.and_then(|c| c.partition.clone()).unwrap_or_default();
    let audits = [audit(spec.mu, spec.dim, spec.lo, spec.hi, spec.nodes, spec.per_cell)?, audit(
        2.0 * spec.mu,
        spec.dim,
        spec.lo,
        spec.hi,
        spec.nodes,
        spec.per_cell,
    )?];
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "mu",
        "dim",
        "audit_nodes",
        "max_sum_deviation",
        "min_theta_bar",
        "c1",
        "c2",
        "c3",
        "support_leak",
        "plateau_gradient",
        "overlap_cardinality",
    ])?;
    for a in &audits {
        w.write_record([
            a.mu.to_string(),
            a.dim.to_string(),
            a.audit_nodes.to_string(),
            format!("{:e}", a.max_sum_deviation),
            format!("{:e}", a.min_theta_bar),
            format!("{:e}", a.c1),
            format!("{:e}", a.c2),
            format!("{:e}", a.c3),
            format!("{:e}", a.support_leak),
            format!("{:e}", a.plateau_gradient),
            a.overlap_cardinality.to_string(),
        ])?;
    }
    let csv = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?).expect("utf-8");
    let stable = ["c1", "c2", "c3"].iter().enumerate().all(|(k, _)| {
        let pick = |a: &crate::partition::PartitionAudit| [a.c1, a.c2, a.c3][k];
        ((pick(&audits[1]) - pick(&audits[0])) / pick(&audits[0])).abs() <= 0.1
    });
    let pass = audits.iter().all(|a| a.max_sum_deviation <= 1e-12 && a.overlap_cardinality == 5usize.pow(a.dim as u32))
        && stable;
    let summary = format!(
        "partition: max sum deviation {:.3e}, overlap {}, constants stable under mu -> 2 mu: {}",
        audits[0].max_sum_deviation.max(audits[1].max_sum_deviation),
        audits[0].overlap_cardinality,
        stable
    );
    Ok((Outcome { report: json!({ "spec": spec, "audits": audits, "constants_stable": stable }), pass, summary }, csv))
}

fn timestamp() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn write_report(dir: &Path, cmd: Command, body: Value, pass: bool) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let doc = json!({
        "command": cmd.name(),
        "pass": pass,
        "timestamp": timestamp(),
        "result": body,
    });
    let path = dir.join(format!("{}.json", cmd.name()));
    fs::write(&path, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(path)
}

/// Runs one subcommand and returns the exit code.
pub fn execute(cli: &Cli) -> Result<i32> {
    let opts = &cli.options;
    let cfg = match &opts.config {
        Some(p) => Some(RunConfig::load(p)?),
        None => None,
    };
    let need = |c: &Option<RunConfig>| {
        c.clone().ok_or_else(|| Error::Config(format!("subcommand '{}' requires --config", cli.command.name())))
    };
    let (outcome, csv) = match cli.command {
        Command::Analyze => (analyze(&need(&cfg)?, opts)?, None),
        Command::Weights => (weights(&need(&cfg)?, opts)?, None),
        Command::Verify => {
            let (o, c) = verify(&need(&cfg)?, opts)?;
            (o, Some(c))
        }
        Command::Partition => {
            let (o, c) = partition(cfg.as_ref())?;
            (o, Some(c))
        }
    };
    write_report(&opts.out, cli.command, outcome.report, outcome.pass)?;
    if let Some(c) = csv {
        fs::write(opts.out.join(format!("{}.csv", cli.command.name())), c)?;
    }
    println!("{}", outcome.summary);
    Ok(if outcome.pass { EXIT_OK } else { EXIT_VIOLATION })
}

/// Parses arguments, runs, and maps every failure to an exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ISO: &str = r#"{"n": 2, "gamma": 0.01,
        "plus": {"M": [[1,0],[0,1]], "N": [[1,0],[0,1]]},
        "minus": {"M": [[1,0],[0,1]], "N": [[1,0],[0,1]]}}"#;

    #[test]
    fn config_parses_and_builds_pair() {
        let c = RunConfig::from_json(ISO).unwrap();
        let p = c.pair().unwrap();
        assert_eq!(p.dim(), 2);
        assert!(p.bounds_inferred);
        assert_eq!((p.lambda0, p.big_lambda0), (1.0, 1.0));
    }

    #[test]
    fn missing_side_is_a_parse_error() {
        let bad = r#"{"n": 2, "gamma": 0.1, "plus": {"M": [[1,0],[0,1]], "N": [[1,0],[0,1]]}}"#;
        match RunConfig::from_json(bad) {
            Err(Error::Config(msg)) => assert!(msg.contains("minus"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_matrix_shape_is_rejected() {
        let bad = ISO.replace("[[1,0],[0,1]], \"N\"", "[[1,0]], \"N\"");
        let c = RunConfig::from_json(&bad).unwrap();
        assert!(matches!(c.pair(), Err(Error::Config(_))));
    }

    #[test]
    fn auto_weights_isotropic() {
        let c = RunConfig::from_json(ISO).unwrap();
        let w = auto_weights(&c.pair().unwrap(), &WeightOverrides::default(), 128, 256).unwrap();
        assert!((w.alpha_ratio - 2.0).abs() < 1e-9);
        assert_eq!(w.weights.alpha_minus, 1.0);
        assert_eq!(w.weights.delta, w.weights.epsilon);
    }

    #[test]
    fn usage_errors_map_to_64() {
        assert_eq!(run(["carleman", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["carleman"]), EXIT_USAGE);
    }

    #[test]
    fn verify_without_config_is_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        assert_eq!(run(["carleman", "verify", "--out", out]), EXIT_INPUT);
    }
}
