//! Argument definitions and dispatch.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bernlab::approximation::{self, CoeffFunction, Phi, Weight};
use bernlab::experiments::{self, Family, GFactor, SweepConfig, Theorem};
use bernlab::functions::FunctionSpec;
use bernlab::norms::{self, GridOverrides};
use bernlab::valence::{self, ValenceOptions};
use bernlab::{AnalyticFunction, Error};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::output::{self, RunManifest};

#[derive(Debug)]
pub enum Failure {
    Parameter(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_parameter() {
            Failure::Parameter(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn param(msg: impl Into<String>) -> Failure {
    Failure::Parameter(msg.into())
}

#[derive(Parser, Debug)]
#[command(name = "bernlab", version, about = "Integral means of derivatives on the unit disk")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one functional of one function.
    Norm(NormArgs),
    /// Run an inequality sweep over a function family.
    Sweep(SweepArgs),
    /// Mean valence and the mean n-valent certificate.
    Valence(ValenceArgs),
    /// Search for a radius satisfying Hayman's inequality.
    Hayman(HaymanArgs),
    /// Build the lacunary counterexample and its certificates.
    Counterexample(CounterexampleArgs),
    /// Convergence diagnosis of the weighted best-approximation series.
    Inverse(InverseArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GridArgs {
    /// Number of geometric radial panels.
    #[arg(long)]
    pub panels: Option<u32>,
    /// Gauss nodes per panel.
    #[arg(long)]
    pub order: Option<usize>,
    /// Fixed number of angular samples per circle.
    #[arg(long)]
    pub angular: Option<usize>,
    /// Angular scale κ in M(r) = κ/(1 − reach·r).
    #[arg(long)]
    pub angular_scale: Option<f64>,
}

impl GridArgs {
    fn overrides(&self) -> GridOverrides {
        GridOverrides {
            depth: self.panels,
            order: self.order,
            angular: self.angular,
            angular_scale: self.angular_scale,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Functional {
    Hardy,
    A1Deriv,
    ApDeriv,
    Besov,
    Lp,
    Pommerenke,
    Bmoa,
}

#[derive(Args, Debug, Serialize)]
pub struct NormArgs {
    /// Function spec (JSON).
    #[arg(long)]
    pub function: PathBuf,
    #[arg(long, value_enum)]
    pub functional: Functional,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Output JSON path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TheoremArg {
    #[value(name = "1")]
    One,
    #[value(name = "1-sup")]
    OneSup,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    Pommerenke,
    Lemma32,
}

impl From<TheoremArg> for Theorem {
    fn from(t: TheoremArg) -> Self {
        match t {
            TheoremArg::One => Theorem::One,
            TheoremArg::OneSup => Theorem::OneSup,
            TheoremArg::Two => Theorem::Two,
            TheoremArg::Three => Theorem::Three,
            TheoremArg::Pommerenke => Theorem::Pommerenke,
            TheoremArg::Lemma32 => Theorem::Lemma32,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    Power,
    Lacunary,
    ClusteredBlaschke,
    UniformBlaschke,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Power => Family::Power,
            FamilyArg::Lacunary => Family::Lacunary,
            FamilyArg::ClusteredBlaschke => Family::ClusteredBlaschke,
            FamilyArg::UniformBlaschke => Family::UniformBlaschke,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GArg {
    One,
    GeometricHalf,
    RandomPolynomial,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub theorem: TheoremArg,
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Family parameters: `a..b`, `2^a..2^b`, or a comma list; defaults to
    /// 2^4..2^12 (m = 4..13 for lacunary).
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Multiplier g for theorem 3.
    #[arg(long, value_enum, default_value = "one")]
    pub g: GArg,
    /// Degree of the random polynomial multiplier.
    #[arg(long, default_value_t = 4)]
    pub g_degree: usize,
    /// Radii for lemma32, comma separated.
    #[arg(long, default_value = "0.5,0.9,0.99,0.999")]
    pub r_list: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also report refinement error estimates (doubles the cost).
    #[arg(long)]
    pub error_estimates: bool,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Write a log–log SVG plot.
    #[arg(long)]
    pub plot: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct ValenceArgs {
    #[arg(long)]
    pub function: PathBuf,
    /// Outer radius of the w-disks.
    #[arg(long = "R")]
    pub outer_radius: f64,
    /// Claimed (real) valence n.
    #[arg(long)]
    pub claim: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct HaymanArgs {
    #[arg(long)]
    pub function: PathBuf,
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub lambda: f64,
    /// Valence bound fed to the right-hand side.
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiArg {
    /// 1/log(x+2)
    Log,
    /// 1/sqrt(log(x+2))
    Sqrtlog,
    /// 1/log(log(x+16))
    Loglog,
    /// φ ≡ 1 (does not decay)
    One,
}

#[derive(Args, Debug, Serialize)]
pub struct CounterexampleArgs {
    #[arg(long, value_enum)]
    pub phi: PhiArg,
    #[arg(long, default_value_t = 6)]
    pub blocks: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightArg {
    /// 1/(n sqrt(log n))
    Sqrtlog,
    /// n^(-1/p)
    Power,
}

#[derive(Args, Debug, Serialize)]
pub struct InverseArgs {
    /// Coefficients: a JSON array of [re, im] pairs, or a serialized coefficient function.
    #[arg(long)]
    pub coeffs: PathBuf,
    #[arg(long, value_enum, default_value = "sqrtlog")]
    pub weight: WeightArg,
    /// Exponent for the power weight.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Norm(a) => cmd_norm(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Valence(a) => cmd_valence(&a),
        Command::Hayman(a) => cmd_hayman(&a),
        Command::Counterexample(a) => cmd_counterexample(&a),
        Command::Inverse(a) => cmd_inverse(&a),
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("BERNLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| param(format!("BERNLAB_THREADS must be a positive integer, got {v:?}")))?;
    // a second initialization (tests calling run twice) keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn echo<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).unwrap_or(serde_json::Value::Null)
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Numerical(format!("cannot read {}: {e}", path.display())))
}

fn load_function(path: &Path) -> Result<AnalyticFunction, Failure> {
    let spec: FunctionSpec = serde_json::from_str(&read_text(path)?)
        .map_err(|e| param(format!("invalid function spec {}: {e}", path.display())))?;
    Ok(spec.build()?)
}

fn finish<T: Serialize>(mut manifest: RunManifest, start: Instant, result: &T, out: Option<&Path>) -> Result<(), Failure> {
    manifest.elapsed_seconds = start.elapsed().as_secs_f64();
    output::write_or_print(out, &output::json_document(&manifest, result)?)
}

fn require(v: Option<f64>, name: &str, functional: &str) -> Result<f64, Failure> {
    v.ok_or_else(|| param(format!("--{name} is required for {functional}")))
}

fn cmd_norm(a: &NormArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let f = load_function(&a.function)?;
    let grid = a.grid.overrides();
    let report = match a.functional {
        Functional::Hardy => norms::hardy_norm(&f, require(a.p, "p", "hardy")?, &grid)?,
        Functional::A1Deriv => norms::bergman_deriv_norm(&f, 1.0, &grid)?,
        Functional::ApDeriv => norms::bergman_deriv_norm(&f, require(a.p, "p", "ap-deriv")?, &grid)?,
        Functional::Besov => norms::besov_seminorm(
            &f,
            require(a.sigma, "sigma", "besov")?,
            require(a.alpha, "alpha", "besov")?,
            &grid,
        )?,
        Functional::Lp => norms::littlewood_paley_norm(&f, require(a.p, "p", "lp")?, &grid)?,
        Functional::Pommerenke => norms::pommerenke_mixed_norm(&f, require(a.p, "p", "pommerenke")?, &grid)?,
        Functional::Bmoa => norms::bmoa_surrogate(&f, &grid)?,
    };
    finish(RunManifest::new("norm", echo(a), None), start, &report, a.out.as_deref())
}

/// `a..b`, `2^a..2^b` or `x,y,z`.
pub fn parse_params(s: &str) -> Result<Vec<u64>, Failure> {
    let bad = || param(format!("cannot parse --n {s:?}; use a..b, 2^a..2^b or a comma list"));
    let one = |t: &str| -> Result<(u64, bool), Failure> {
        let t = t.trim();
        if let Some(e) = t.strip_prefix("2^") {
            let e: u32 = e.parse().map_err(|_| bad())?;
            if e > 62 {
                return Err(bad());
            }
            Ok((1u64 << e, true))
        } else {
            Ok((t.parse().map_err(|_| bad())?, false))
        }
    };
    if let Some((lo, hi)) = s.split_once("..") {
        let (a, pa) = one(lo)?;
        let (b, pb) = one(hi)?;
        if a > b {
            return Err(param(format!("empty range {s:?}")));
        }
        if pa && pb {
            let (ea, eb) = (a.trailing_zeros(), b.trailing_zeros());
            return Ok((ea..=eb).map(|e| 1u64 << e).collect());
        }
        if b - a > 100_000 {
            return Err(param(format!("range {s:?} has too many entries")));
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| one(t).map(|v| v.0)).collect()
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| param(format!("cannot parse {what} entry {t:?}"))))
        .collect()
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let family: Family = a.family.into();
    let mut cfg = SweepConfig::new(a.theorem.into(), family);
    if let Some(n) = &a.n {
        cfg.params = parse_params(n)?;
    }
    cfg.seed = a.seed;
    cfg.p = a.p;
    cfg.sigma = a.sigma;
    cfg.alpha = a.alpha;
    cfg.g = match a.g {
        GArg::One => GFactor::One,
        GArg::GeometricHalf => GFactor::GeometricHalf,
        GArg::RandomPolynomial => GFactor::RandomPolynomial { degree: a.g_degree, seed: a.seed },
    };
    cfg.r_list = parse_list(&a.r_list, "--r-list")?;
    cfg.grid = a.grid.overrides();
    cfg.error_estimates = a.error_estimates;
    let res = experiments::run_sweep(&cfg)?;

    let csv = output::sweep_csv(&res)?;
    output::write_file(&a.out.join("sweep.csv"), &csv)?;
    if a.plot {
        // plotting never changes the exit status
        if let Err(Failure::Numerical(e) | Failure::Parameter(e)) =
            output::write_file(&a.out.join("sweep.svg"), output::sweep_svg(&res).as_bytes())
        {
            eprintln!("bernlab: plot skipped: {e}");
        }
    }
    let mut manifest = RunManifest::new("sweep", echo(a), Some(a.seed));
    manifest.elapsed_seconds = start.elapsed().as_secs_f64();
    let summary = json!({
        "csv": "sweep.csv",
        "csv_schema": output::SWEEP_SCHEMA,
        "config": res.config,
        "fit": res.fit,
        "fit_note": res.fit_note,
        "max_ratio": res.max_ratio,
        "min_ratio": res.min_ratio,
        "rows": res.rows.len(),
    });
    output::write_file(&a.out.join("summary.json"), output::json_document(&manifest, &summary)?.as_bytes())
}

fn cmd_valence(a: &ValenceArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let f = load_function(&a.function)?;
    let opts = ValenceOptions { seed: a.seed, ..ValenceOptions::default() };
    let cert = valence::certify_mean_valent(&f, a.claim, &[a.outer_radius], &opts)?;
    let result = json!({
        "outer_radius": a.outer_radius,
        "mean_valence": cert.rows[0].mean_valence,
        "claim": a.claim,
        "bound": cert.rows[0].bound,
        "pass": cert.pass,
        "certificate": cert,
    });
    finish(RunManifest::new("valence", echo(a), Some(a.seed)), start, &result, a.out.as_deref())
}

fn cmd_hayman(a: &HaymanArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let f = load_function(&a.function)?;
    let w = experiments::hayman_witness_search(&f, a.r, a.lambda, a.n)?;
    let found = w.found;
    finish(RunManifest::new("hayman", echo(a), None), start, &w, a.out.as_deref())?;
    if found {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("no witness radius found; minimal ratio {}", w.min_ratio)))
    }
}

fn cmd_counterexample(a: &CounterexampleArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let phi = match a.phi {
        PhiArg::Log => Phi::inv_log(),
        PhiArg::Sqrtlog => Phi::inv_sqrt_log(),
        PhiArg::Loglog => Phi::inv_log_log(),
        PhiArg::One => Phi::constant(1.0),
    };
    let (f, report) = approximation::littlewood_counterexample(&phi, a.blocks)?;
    let result = json!({ "report": report, "coefficients": f });
    finish(RunManifest::new("counterexample", echo(a), None), start, &result, a.out.as_deref())
}

fn load_coeffs(path: &Path) -> Result<CoeffFunction, Failure> {
    let text = read_text(path)?;
    if let Ok(pairs) = serde_json::from_str::<Vec<[f64; 2]>>(&text) {
        return Ok(CoeffFunction::dense(pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect())?);
    }
    let f: CoeffFunction = serde_json::from_str(&text)
        .map_err(|e| param(format!("invalid coefficient file {}: {e}", path.display())))?;
    // re-validate through the constructors
    Ok(match f {
        CoeffFunction::Dense { coeffs, tail_mass_sq } => CoeffFunction::dense_with_tail(coeffs, tail_mass_sq)?,
        CoeffFunction::Lacunary { terms, tail_mass_sq } => CoeffFunction::lacunary(terms, tail_mass_sq)?,
    })
}

fn cmd_inverse(a: &InverseArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let f = load_coeffs(&a.coeffs)?;
    let weight = match a.weight {
        WeightArg::Sqrtlog => Weight::LogSqrt,
        WeightArg::Power => {
            let p = require(a.p, "p", "the power weight")?;
            if !(p > 0.0) {
                return Err(param(format!("p = {p} must be positive")));
            }
            Weight::Power(p)
        }
    };
    let diag = approximation::inverse_series_test(&f, &weight);
    let e_n: Vec<(u64, f64)> = (0..=f.support().min(1 << 20))
        .filter(|n| n.is_power_of_two() || *n == 0)
        .map(|n| (n, approximation::best_poly_approx_h2(&f, n)))
        .collect();
    let result = json!({
        "diagnosis": diag,
        "best_approximation_h2": e_n,
        "note": "E_n(f, H^2) is used as an upper bound for the best rational approximation error",
    });
    finish(RunManifest::new("inverse", echo(a), None), start, &result, a.out.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params() {
        assert_eq!(parse_params("4..7").unwrap(), vec![4, 5, 6, 7]);
        assert_eq!(parse_params("2^4..2^6").unwrap(), vec![16, 32, 64]);
        assert_eq!(parse_params("8").unwrap(), vec![8]);
        assert_eq!(parse_params("16, 2^6").unwrap(), vec![16, 64]);
        assert!(matches!(parse_params("x..3"), Err(Failure::Parameter(_))));
        assert!(matches!(parse_params("9..3"), Err(Failure::Parameter(_))));
    }
}
