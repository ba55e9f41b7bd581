//! Config-driven experiment runners: filter-curve dumps, the 1D deconvolution
//! benchmark and the 2D multi-frequency inverse source benchmark, all emitting
//! deterministic CSV/JSON artifacts.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::deconv1d::{
    make_test_function, relative_error, residual_norm, synthesize_measurement, BoxKernel, Grid1D,
    Signal1D, TestFunctionId,
};
use crate::error::{Error, Result};
use crate::filter::{FilterSpec, SingularSystem};
use crate::isp2d::{
    assemble_joint, build_geometry, make_ground_truth, reconstruct_with_system, spectrum_report,
    FrequencySet, IspGeometry, SourceField,
};
use crate::numerics::gaussian_noise;
use crate::param_select::{
    log_grid, morozov_alpha, optimal_alpha, MorozovConfig, SweepConfig,
};
use crate::report::{fmt_g17, ExperimentReport};

/// How alpha is chosen for a reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaRule {
    Morozov,
    Optimal,
    Fixed(f64),
}

impl fmt::Display for AlphaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaRule::Morozov => write!(f, "morozov"),
            AlphaRule::Optimal => write!(f, "optimal"),
            AlphaRule::Fixed(v) => write!(f, "fixed:{v}"),
        }
    }
}

impl FromStr for AlphaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "morozov" => Ok(AlphaRule::Morozov),
            "optimal" => Ok(AlphaRule::Optimal),
            other => {
                if let Some(v) = other.strip_prefix("fixed:") {
                    let v: f64 = v
                        .parse()
                        .map_err(|_| Error::Config(format!("bad fixed alpha {v:?}")))?;
                    if !(v > 0.0) || !v.is_finite() {
                        return Err(Error::Config(format!("fixed alpha must be positive: {v}")));
                    }
                    Ok(AlphaRule::Fixed(v))
                } else {
                    Err(Error::Config(format!(
                        "unknown alpha rule {other:?} (expected morozov | optimal | fixed:VALUE)"
                    )))
                }
            }
        }
    }
}

impl Serialize for AlphaRule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AlphaRule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl<'de> Deserialize<'de> for TestFunctionId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Serialize for TestFunctionId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn default_taus() -> Vec<f64> {
    vec![0.0, 2.0, 10.0, 100.0]
}

fn default_rules() -> Vec<AlphaRule> {
    vec![AlphaRule::Morozov, AlphaRule::Optimal]
}

fn default_oversample() -> usize {
    10
}

fn default_safety() -> f64 {
    1.1
}

fn default_alpha_lo() -> f64 {
    1e-8
}

fn default_alpha_hi() -> f64 {
    10.0
}

fn default_tol() -> f64 {
    1e-3
}

fn default_sweep_points() -> usize {
    200
}

fn default_seed() -> u64 {
    1
}

/// Configuration of a 1D deconvolution run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeconvConfig {
    pub function: TestFunctionId,
    pub n: usize,
    pub s_blur: f64,
    pub noise_std: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
    #[serde(default = "default_rules")]
    pub rules: Vec<AlphaRule>,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default = "default_alpha_lo")]
    pub alpha_lo: f64,
    #[serde(default = "default_alpha_hi")]
    pub alpha_hi: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_sweep_points")]
    pub sweep_points: usize,
}

impl DeconvConfig {
    pub fn new(function: TestFunctionId, n: usize, s_blur: f64, noise_std: f64, seed: u64) -> Self {
        Self {
            function,
            n,
            s_blur,
            noise_std,
            seed,
            taus: default_taus(),
            rules: default_rules(),
            oversample: default_oversample(),
            safety: default_safety(),
            alpha_lo: default_alpha_lo(),
            alpha_hi: default_alpha_hi(),
            tol: default_tol(),
            sweep_points: default_sweep_points(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("n must be >= 2, got {}", self.n)));
        }
        if !(self.s_blur > 0.0 && self.s_blur < 1.0) {
            return Err(Error::Config(format!("s_blur out of (0,1): {}", self.s_blur)));
        }
        if !(self.noise_std >= 0.0) || !self.noise_std.is_finite() {
            return Err(Error::Config(format!("bad noise_std {}", self.noise_std)));
        }
        if self.taus.is_empty() {
            return Err(Error::Config("tau list must be nonempty".into()));
        }
        if self.taus.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
            return Err(Error::Config("taus must be nonnegative".into()));
        }
        if self.rules.is_empty() {
            return Err(Error::Config("rule list must be nonempty".into()));
        }
        if self.oversample < 1 {
            return Err(Error::Config("oversample must be >= 1".into()));
        }
        if !(0.0 < self.alpha_lo && self.alpha_lo < self.alpha_hi) {
            return Err(Error::Config(format!(
                "bad alpha bracket [{}, {}]",
                self.alpha_lo, self.alpha_hi
            )));
        }
        if self.sweep_points < 2 {
            return Err(Error::Config("sweep_points must be >= 2".into()));
        }
        Ok(())
    }

    fn sweep(&self) -> SweepConfig {
        SweepConfig {
            alpha_grid: log_grid(self.alpha_lo, self.alpha_hi, self.sweep_points),
        }
    }
}

/// One selected reconstruction within a run.
#[derive(Debug, Clone)]
pub struct DeconvSelection {
    pub tau: f64,
    pub rule: AlphaRule,
    pub alpha: f64,
    pub error: f64,
    pub residual: f64,
    pub saturated: bool,
    pub reconstruction: Signal1D,
    /// (alpha, residual-or-error) pairs evaluated by the selection rule.
    pub trace: Vec<(f64, f64)>,
}

/// Output of a full deconvolution run.
#[derive(Debug, Clone)]
pub struct DeconvRunOutput {
    pub report: ExperimentReport,
    pub truth: Signal1D,
    pub clean: Signal1D,
    pub noisy: Signal1D,
    pub selections: Vec<DeconvSelection>,
}

/// Shared per-seed problem data, reusable across (tau, rule) pairs.
pub struct DeconvProblem {
    pub kernel: BoxKernel,
    pub truth: Signal1D,
    pub clean: Signal1D,
    pub noisy: Signal1D,
    pub noise_std: f64,
}

pub fn prepare_deconv(cfg: &DeconvConfig) -> Result<DeconvProblem> {
    cfg.validate()?;
    let tf = make_test_function(cfg.function);
    let kernel = BoxKernel::new(cfg.s_blur)?;
    let (clean, noisy) =
        synthesize_measurement(&tf, &kernel, cfg.n, cfg.noise_std, cfg.seed, cfg.oversample)?;
    let truth = tf.sample(Grid1D::new(cfg.n)?)?;
    Ok(DeconvProblem {
        kernel,
        truth,
        clean,
        noisy,
        noise_std: cfg.noise_std,
    })
}

/// Select alpha for one (tau, rule) pair and return the reconstruction.
pub fn deconv_select(
    problem: &DeconvProblem,
    cfg: &DeconvConfig,
    tau: f64,
    rule: AlphaRule,
) -> Result<DeconvSelection> {
    let spec_at = |alpha: f64| FilterSpec::interpolating(tau, alpha);
    let recon_at = |alpha: f64| -> Result<Signal1D> {
        crate::deconv1d::reconstruct(&problem.noisy, &problem.kernel, &spec_at(alpha)?)
    };
    let (alpha, trace, saturated) = match rule {
        AlphaRule::Fixed(alpha) => (alpha, Vec::new(), false),
        AlphaRule::Optimal => {
            let res = optimal_alpha(
                |a| relative_error(&recon_at(a)?, &problem.truth),
                &cfg.sweep(),
            )?;
            (res.alpha, res.trace, false)
        }
        AlphaRule::Morozov => {
            let mcfg = MorozovConfig {
                safety: cfg.safety,
                noise_std: problem.noise_std,
                n: cfg.n,
                alpha_lo: cfg.alpha_lo,
                alpha_hi: cfg.alpha_hi,
                tol: cfg.tol,
            };
            let res = morozov_alpha(
                |a| residual_norm(&recon_at(a)?, &problem.kernel, &problem.noisy),
                &mcfg,
            )?;
            (res.alpha, res.trace, res.saturated)
        }
    };
    let reconstruction = recon_at(alpha)?;
    let error = relative_error(&reconstruction, &problem.truth)?;
    let residual = residual_norm(&reconstruction, &problem.kernel, &problem.noisy)?;
    Ok(DeconvSelection {
        tau,
        rule,
        alpha,
        error,
        residual,
        saturated,
        reconstruction,
        trace,
    })
}

fn run_pairs<T, F>(pairs: Vec<T>, jobs: usize, f: F) -> Result<Vec<DeconvSelection>>
where
    T: Send + Sync,
    F: Fn(&T) -> Result<DeconvSelection> + Sync,
{
    if jobs <= 1 {
        pairs.iter().map(&f).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        // gather in pair order so output is deterministic regardless of jobs
        pool.install(|| pairs.par_iter().map(&f).collect())
    }
}

/// Run a full deconvolution experiment: every (tau, rule) pair, one report.
pub fn run_deconv(cfg: &DeconvConfig, config_hash: &str, jobs: usize) -> Result<DeconvRunOutput> {
    let problem = prepare_deconv(cfg)?;
    let pairs: Vec<(f64, AlphaRule)> = cfg
        .taus
        .iter()
        .flat_map(|&t| cfg.rules.iter().map(move |&r| (t, r)))
        .collect();
    let selections = run_pairs(pairs, jobs, |&(tau, rule)| {
        deconv_select(&problem, cfg, tau, rule)
    })?;

    let mut report = ExperimentReport::new("deconv1d", cfg.seed, config_hash);
    for sel in &selections {
        report.push(sel.tau, sel.rule.to_string(), sel.alpha, sel.error);
    }
    let rules: Vec<String> = cfg.rules.iter().map(|r| r.to_string()).collect();
    report.check_complete(&cfg.taus, &rules)?;
    Ok(DeconvRunOutput {
        report,
        truth: problem.truth,
        clean: problem.clean,
        noisy: problem.noisy,
        selections,
    })
}

/// Per-run signal table: columns (x, truth, measurement_noisy, reconstruction).
pub fn signal_csv(truth: &Signal1D, noisy: &Signal1D, recon: &Signal1D) -> String {
    let mut out = String::from("x,truth,measurement_noisy,reconstruction\n");
    let grid = truth.grid();
    for j in 0..grid.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_g17(grid.point(j)),
            fmt_g17(truth.values()[j]),
            fmt_g17(noisy.values()[j]),
            fmt_g17(recon.values()[j])
        ));
    }
    out
}

/// Selection trace table: columns (alpha, value).
pub fn trace_csv(trace: &[(f64, f64)]) -> String {
    let mut out = String::from("alpha,value\n");
    for &(a, v) in trace {
        out.push_str(&format!("{},{}\n", fmt_g17(a), fmt_g17(v)));
    }
    out
}

/// Configuration of the filter-curve dump.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiltersConfig {
    #[serde(default = "FiltersConfig::default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
    #[serde(default = "FiltersConfig::default_sigma_lo")]
    pub sigma_lo: f64,
    #[serde(default = "FiltersConfig::default_sigma_hi")]
    pub sigma_hi: f64,
    #[serde(default = "FiltersConfig::default_sigma_points")]
    pub sigma_points: usize,
}

impl FiltersConfig {
    fn default_alphas() -> Vec<f64> {
        vec![0.005, 0.05]
    }

    fn default_sigma_lo() -> f64 {
        1e-3
    }

    fn default_sigma_hi() -> f64 {
        10.0
    }

    fn default_sigma_points() -> usize {
        200
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.taus.is_empty() {
            return Err(Error::Config("alphas and taus must be nonempty".into()));
        }
        if self.alphas.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::Config("alphas must be positive".into()));
        }
        if !(0.0 < self.sigma_lo && self.sigma_lo < self.sigma_hi) || self.sigma_points < 2 {
            return Err(Error::Config("bad sigma grid".into()));
        }
        Ok(())
    }
}

impl Default for FiltersConfig {
    fn default() -> Self {
        Self {
            alphas: Self::default_alphas(),
            taus: default_taus(),
            sigma_lo: Self::default_sigma_lo(),
            sigma_hi: Self::default_sigma_hi(),
            sigma_points: Self::default_sigma_points(),
        }
    }
}

/// Dump filter curves as CSV rows (sigma, tau, alpha, q) on a log sigma grid.
pub fn run_filters(cfg: &FiltersConfig) -> Result<String> {
    cfg.validate()?;
    let sigmas = log_grid(cfg.sigma_lo, cfg.sigma_hi, cfg.sigma_points);
    let mut out = String::from("sigma,tau,alpha,q\n");
    for &alpha in &cfg.alphas {
        for &tau in &cfg.taus {
            let spec = FilterSpec::interpolating(tau, alpha)?;
            for &sigma in &sigmas {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_g17(sigma),
                    fmt_g17(tau),
                    fmt_g17(alpha),
                    fmt_g17(spec.filter_value(sigma)?)
                ));
            }
        }
    }
    Ok(out)
}

/// Configuration of an inverse source run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IspConfig {
    #[serde(default = "IspConfig::default_r0")]
    pub r0: f64,
    #[serde(default = "IspConfig::default_r")]
    pub r: f64,
    #[serde(default = "IspConfig::default_cells_across")]
    pub cells_across: usize,
    #[serde(default = "IspConfig::default_sensors")]
    pub sensors: usize,
    #[serde(default = "IspConfig::default_j_lo")]
    pub j_lo: usize,
    #[serde(default = "IspConfig::default_j_hi")]
    pub j_hi: usize,
    #[serde(default = "IspConfig::default_noise_ratio")]
    pub noise_ratio: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "IspConfig::default_taus")]
    pub taus: Vec<f64>,
    #[serde(default = "IspConfig::default_rules")]
    pub rules: Vec<AlphaRule>,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default = "default_alpha_lo")]
    pub alpha_lo: f64,
    #[serde(default = "default_alpha_hi")]
    pub alpha_hi: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_sweep_points")]
    pub sweep_points: usize,
}

impl IspConfig {
    fn default_r0() -> f64 {
        0.99
    }

    fn default_r() -> f64 {
        1.0
    }

    fn default_cells_across() -> usize {
        48
    }

    fn default_sensors() -> usize {
        128
    }

    fn default_j_lo() -> usize {
        2
    }

    fn default_j_hi() -> usize {
        30
    }

    fn default_noise_ratio() -> f64 {
        0.01
    }

    fn default_taus() -> Vec<f64> {
        vec![0.0, 3.0, 100.0]
    }

    fn default_rules() -> Vec<AlphaRule> {
        vec![AlphaRule::Optimal]
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.r0 && self.r0 < self.r) {
            return Err(Error::Config(format!(
                "radii must satisfy 0 < r0 < r: {} vs {}",
                self.r0, self.r
            )));
        }
        if self.cells_across < 8 {
            return Err(Error::Config("cells_across must be >= 8".into()));
        }
        if self.j_lo == 0 || self.j_lo > self.j_hi {
            return Err(Error::Config(format!(
                "bad frequency index range {}..{}",
                self.j_lo, self.j_hi
            )));
        }
        if !(self.noise_ratio >= 0.0) || !self.noise_ratio.is_finite() {
            return Err(Error::Config(format!("bad noise_ratio {}", self.noise_ratio)));
        }
        if self.taus.is_empty() || self.rules.is_empty() {
            return Err(Error::Config("taus and rules must be nonempty".into()));
        }
        Ok(())
    }

    fn sweep(&self) -> SweepConfig {
        SweepConfig {
            alpha_grid: log_grid(self.alpha_lo, self.alpha_hi, self.sweep_points),
        }
    }
}

impl Default for IspConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

/// Shared ISP problem data: joint operator SVD, truth and noisy data.
pub struct IspProblem {
    pub geometry: IspGeometry,
    pub system: SingularSystem,
    pub truth: SourceField,
    pub data_clean: Vec<f64>,
    pub data_noisy: Vec<f64>,
    pub noise_std: f64,
    pub spectrum: Vec<(usize, f64, f64)>,
    joint: crate::isp2d::JointOperator,
}

impl IspProblem {
    pub fn forward(&self, source: &SourceField) -> Result<Vec<f64>> {
        self.joint.apply(source)
    }
}

/// Assemble the joint operator, compute its SVD once, synthesize noisy data.
pub fn prepare_isp(cfg: &IspConfig) -> Result<IspProblem> {
    cfg.validate()?;
    let geometry = build_geometry(cfg.r0, cfg.r, cfg.cells_across, cfg.sensors)?;
    let freqs = FrequencySet::harmonic(cfg.r0, cfg.j_lo, cfg.j_hi)?;
    let joint = assemble_joint(&geometry, &freqs)?;
    let truth = make_ground_truth(&geometry);
    let data_clean = joint.apply(&truth)?;
    let norm: f64 = data_clean.iter().map(|v| v * v).sum::<f64>().sqrt();
    let noise_std = cfg.noise_ratio * norm / (data_clean.len() as f64).sqrt();
    let data_noisy = if noise_std > 0.0 {
        let eps = gaussian_noise(data_clean.len(), noise_std, cfg.seed)?;
        data_clean.iter().zip(&eps).map(|(d, e)| d + e).collect()
    } else {
        data_clean.clone()
    };
    let system = joint.svd()?;
    let spectrum = spectrum_report(&system, &truth)?;
    Ok(IspProblem {
        geometry,
        system,
        truth,
        data_clean,
        data_noisy,
        noise_std,
        spectrum,
        joint,
    })
}

/// One selected ISP reconstruction.
#[derive(Debug, Clone)]
pub struct IspSelection {
    pub tau: f64,
    pub rule: AlphaRule,
    pub alpha: f64,
    pub error: f64,
    pub field: SourceField,
    pub trace: Vec<(f64, f64)>,
}

fn field_rel_error(recon: &SourceField, truth: &SourceField) -> Result<f64> {
    let denom: f64 = truth.values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if denom == 0.0 {
        return Err(Error::Contract("relative error against zero truth".into()));
    }
    let num: f64 = recon
        .values
        .iter()
        .zip(&truth.values)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(num / denom)
}

/// Select alpha and reconstruct for one (tau, rule) pair on a prepared problem.
pub fn isp_select(
    problem: &IspProblem,
    cfg: &IspConfig,
    tau: f64,
    rule: AlphaRule,
) -> Result<IspSelection> {
    let recon_at = |alpha: f64| -> Result<SourceField> {
        reconstruct_with_system(
            &problem.system,
            &problem.data_noisy,
            &FilterSpec::interpolating(tau, alpha)?,
        )
    };
    let (alpha, trace) = match rule {
        AlphaRule::Fixed(alpha) => (alpha, Vec::new()),
        AlphaRule::Optimal => {
            let res = optimal_alpha(
                |a| field_rel_error(&recon_at(a)?, &problem.truth),
                &cfg.sweep(),
            )?;
            (res.alpha, res.trace)
        }
        AlphaRule::Morozov => {
            if !(problem.noise_std > 0.0) {
                return Err(Error::Config(
                    "Morozov rule needs a positive noise level".into(),
                ));
            }
            let mcfg = MorozovConfig {
                safety: cfg.safety,
                noise_std: problem.noise_std,
                n: problem.data_noisy.len(),
                alpha_lo: cfg.alpha_lo,
                alpha_hi: cfg.alpha_hi,
                tol: cfg.tol,
            };
            let res = morozov_alpha(
                |a| {
                    let fwd = problem.forward(&recon_at(a)?)?;
                    Ok(fwd
                        .iter()
                        .zip(&problem.data_noisy)
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt())
                },
                &mcfg,
            )?;
            (res.alpha, res.trace)
        }
    };
    let field = recon_at(alpha)?;
    let error = field_rel_error(&field, &problem.truth)?;
    Ok(IspSelection {
        tau,
        rule,
        alpha,
        error,
        field,
        trace,
    })
}

/// Output of a full ISP run.
pub struct IspRunOutput {
    pub report: ExperimentReport,
    pub problem: IspProblem,
    pub selections: Vec<IspSelection>,
}

pub fn run_isp(cfg: &IspConfig, config_hash: &str, jobs: usize) -> Result<IspRunOutput> {
    let problem = prepare_isp(cfg)?;
    let pairs: Vec<(f64, AlphaRule)> = cfg
        .taus
        .iter()
        .flat_map(|&t| cfg.rules.iter().map(move |&r| (t, r)))
        .collect();
    let select = |&(tau, rule): &(f64, AlphaRule)| isp_select(&problem, cfg, tau, rule);
    let selections: Vec<IspSelection> = if jobs <= 1 {
        pairs.iter().map(select).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        pool.install(|| pairs.par_iter().map(select).collect::<Result<_>>())?
    };

    let mut report = ExperimentReport::new("isp2d", cfg.seed, config_hash);
    for sel in &selections {
        report.push(sel.tau, sel.rule.to_string(), sel.alpha, sel.error);
    }
    let rules: Vec<String> = cfg.rules.iter().map(|r| r.to_string()).collect();
    report.check_complete(&cfg.taus, &rules)?;
    Ok(IspRunOutput {
        report,
        problem,
        selections,
    })
}

/// Spectrum table: columns (index, sigma, projection).
pub fn spectrum_csv(spectrum: &[(usize, f64, f64)]) -> String {
    let mut out = String::from("index,sigma,projection\n");
    for &(i, s, p) in spectrum {
        out.push_str(&format!("{i},{},{}\n", fmt_g17(s), fmt_g17(p)));
    }
    out
}

/// Source field table: columns (x, y, value) over quadrature cell centers.
pub fn field_csv(geometry: &IspGeometry, field: &SourceField) -> String {
    let mut out = String::from("x,y,value\n");
    for (cell, &v) in geometry.cells().iter().zip(&field.values) {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_g17(cell.center[0]),
            fmt_g17(cell.center[1]),
            fmt_g17(v)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_rule_parsing() {
        assert_eq!("morozov".parse::<AlphaRule>().unwrap(), AlphaRule::Morozov);
        assert_eq!("optimal".parse::<AlphaRule>().unwrap(), AlphaRule::Optimal);
        assert_eq!(
            "fixed:0.01".parse::<AlphaRule>().unwrap(),
            AlphaRule::Fixed(0.01)
        );
        assert!("fixed:-1".parse::<AlphaRule>().is_err());
        assert!("lcurve".parse::<AlphaRule>().is_err());
    }

    #[test]
    fn filters_csv_row_count() {
        let cfg = FiltersConfig::default();
        let csv = run_filters(&cfg).unwrap();
        let rows = csv.lines().count() - 1;
        assert_eq!(rows, 2 * 4 * 200);
    }

    #[test]
    fn deconv_run_shapes_and_determinism() {
        let mut cfg = DeconvConfig::new(TestFunctionId::F1, 251, 0.1, 0.05, 3);
        cfg.taus = vec![0.0, 2.0];
        cfg.oversample = 4;
        cfg.sweep_points = 40;
        let a = run_deconv(&cfg, "h", 1).unwrap();
        assert_eq!(a.report.rows.len(), 4);
        let b = run_deconv(&cfg, "h", 1).unwrap();
        assert_eq!(a.report.to_csv(), b.report.to_csv());
        // parallel execution yields the identical report
        let c = run_deconv(&cfg, "h", 4).unwrap();
        assert_eq!(a.report.to_csv(), c.report.to_csv());
    }

    #[test]
    fn deconv_sweep_dominates_morozov() {
        let mut cfg = DeconvConfig::new(TestFunctionId::F1, 251, 0.1, 0.05, 5);
        cfg.taus = vec![0.0, 2.0];
        cfg.oversample = 4;
        let out = run_deconv(&cfg, "h", 1).unwrap();
        for &tau in &cfg.taus {
            let get = |rule: &str| {
                out.report
                    .rows
                    .iter()
                    .find(|r| r.tau == tau && r.rule == rule)
                    .unwrap()
                    .relative_error
            };
            assert!(get("optimal") <= get("morozov") + 1e-12, "tau={tau}");
        }
    }

    #[test]
    fn deconv_morozov_feasibility() {
        let mut cfg = DeconvConfig::new(TestFunctionId::F2, 251, 0.1, 0.05, 9);
        cfg.taus = vec![2.0];
        cfg.rules = vec![AlphaRule::Morozov];
        cfg.oversample = 4;
        let out = run_deconv(&cfg, "h", 1).unwrap();
        let sel = &out.selections[0];
        let threshold = cfg.safety * crate::param_select::expected_noise_norm(0.05, 251);
        assert!(!sel.saturated);
        assert!(sel.residual <= threshold);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = DeconvConfig::new(TestFunctionId::F1, 1, 0.1, 0.05, 1);
        assert!(cfg.validate().is_err());
        cfg.n = 100;
        cfg.taus.clear();
        assert!(cfg.validate().is_err());

        let mut icfg = IspConfig::default();
        icfg.r0 = 2.0;
        assert!(icfg.validate().is_err());
    }

    #[test]
    fn isp_small_run_end_to_end() {
        let cfg = IspConfig {
            cells_across: 10,
            sensors: 16,
            j_lo: 2,
            j_hi: 3,
            r0: 0.9,
            r: 1.0,
            noise_ratio: 0.01,
            seed: 4,
            taus: vec![0.0, 3.0],
            rules: vec![AlphaRule::Optimal],
            sweep_points: 40,
            ..IspConfig::default()
        };
        let out = run_isp(&cfg, "h", 1).unwrap();
        assert_eq!(out.report.rows.len(), 2);
        for row in &out.report.rows {
            assert!(row.relative_error.is_finite() && row.relative_error >= 0.0);
        }
        // spectrum rows cover every retained singular triplet
        assert_eq!(out.problem.spectrum.len(), out.problem.system.rank());
    }
}
