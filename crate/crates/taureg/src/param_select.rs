//! Parameter-choice rules for the regularization weight alpha: the Morozov
//! discrepancy principle (log-bisection for the sup) and the oracle optimal
//! sweep over a log-spaced grid.

use crate::error::{Error, Result};

/// Configuration of the discrepancy search.
#[derive(Debug, Clone, Copy)]
pub struct MorozovConfig {
    /// Safety multiplier on the expected noise norm (>= 1).
    pub safety: f64,
    /// Noise standard deviation of the measurement.
    pub noise_std: f64,
    /// Sample count of the measurement.
    pub n: usize,
    /// Lower bracket endpoint for alpha.
    pub alpha_lo: f64,
    /// Upper bracket endpoint for alpha.
    pub alpha_hi: f64,
    /// Relative bisection tolerance in alpha.
    pub tol: f64,
}

impl MorozovConfig {
    pub fn new(noise_std: f64, n: usize) -> Result<Self> {
        let cfg = Self {
            safety: 1.1,
            noise_std,
            n,
            alpha_lo: 1e-8,
            alpha_hi: 10.0,
            tol: 1e-3,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.safety < 1.0 {
            return Err(Error::Contract(format!(
                "safety factor must be >= 1, got {}",
                self.safety
            )));
        }
        if !(self.noise_std > 0.0) || !self.noise_std.is_finite() {
            return Err(Error::Contract(format!(
                "noise_std must be positive, got {}",
                self.noise_std
            )));
        }
        if self.n == 0 {
            return Err(Error::Contract("sample count must be >= 1".into()));
        }
        if !(0.0 < self.alpha_lo && self.alpha_lo < self.alpha_hi) {
            return Err(Error::Contract(format!(
                "invalid alpha bracket [{}, {}]",
                self.alpha_lo, self.alpha_hi
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Contract(format!("invalid tolerance {}", self.tol)));
        }
        Ok(())
    }

    /// The discrepancy threshold safety * E||eps||_2.
    pub fn threshold(&self) -> f64 {
        self.safety * expected_noise_norm(self.noise_std, self.n)
    }
}

/// Outcome of a discrepancy search.
#[derive(Debug, Clone)]
pub struct MorozovResult {
    /// The selected alpha (largest feasible value in the bracket, to tolerance).
    pub alpha: f64,
    /// Residual at the selected alpha.
    pub residual: f64,
    /// True when the threshold exceeds the residual at the upper bracket end,
    /// so the sup is capped at alpha_hi.
    pub saturated: bool,
    /// All (alpha, residual) evaluations, in evaluation order.
    pub trace: Vec<(f64, f64)>,
}

/// Expected noise norm surrogate sigma * sqrt(N).
///
/// The exact mean of a chi-distributed norm differs by an O(1/N) factor;
/// the surrogate is the normative choice here.
pub fn expected_noise_norm(noise_std: f64, n: usize) -> f64 {
    noise_std * (n as f64).sqrt()
}

// Residuals are monotone in alpha for this filter family; tiny float wiggle
// in a near-flat region is tolerated, anything larger is a caller bug.
const MONOTONE_SLACK: f64 = 1e-9;

fn check_monotone(trace: &[(f64, f64)]) -> Result<()> {
    let mut sorted = trace.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for w in sorted.windows(2) {
        let (a_lo, r_lo) = w[0];
        let (a_hi, r_hi) = w[1];
        if r_lo > r_hi * (1.0 + MONOTONE_SLACK) + MONOTONE_SLACK {
            return Err(Error::NonMonotone {
                alpha_lo: a_lo,
                alpha_hi: a_hi,
                residual_lo: r_lo,
                residual_hi: r_hi,
            });
        }
    }
    Ok(())
}

/// Morozov discrepancy principle: the largest alpha in the bracket whose
/// residual stays below `safety * sigma * sqrt(N)`, located by bisection in
/// log(alpha).
///
/// Preconditions: residual(alpha_lo) <= threshold and the residual is
/// nondecreasing in alpha. A threshold above residual(alpha_hi) returns
/// alpha_hi with the `saturated` flag set.
pub fn morozov_alpha<F>(mut residual: F, cfg: &MorozovConfig) -> Result<MorozovResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    cfg.validate()?;
    let threshold = cfg.threshold();
    let mut trace = Vec::new();
    let mut eval = |alpha: f64, trace: &mut Vec<(f64, f64)>| -> Result<f64> {
        let r = residual(alpha)?;
        trace.push((alpha, r));
        Ok(r)
    };

    let r_lo = eval(cfg.alpha_lo, &mut trace)?;
    let r_hi = eval(cfg.alpha_hi, &mut trace)?;
    if r_hi <= threshold {
        return Ok(MorozovResult {
            alpha: cfg.alpha_hi,
            residual: r_hi,
            saturated: true,
            trace,
        });
    }
    if r_lo > threshold {
        return Err(Error::Bracket {
            lo: cfg.alpha_lo,
            hi: cfg.alpha_hi,
            residual_lo: r_lo,
            residual_hi: r_hi,
            threshold,
        });
    }

    let mut lo = cfg.alpha_lo;
    let mut hi = cfg.alpha_hi;
    let mut r_at_lo = r_lo;
    while hi / lo > 1.0 + cfg.tol {
        let mid = (0.5 * (lo.ln() + hi.ln())).exp();
        let r_mid = eval(mid, &mut trace)?;
        if r_mid <= threshold {
            lo = mid;
            r_at_lo = r_mid;
        } else {
            hi = mid;
        }
    }
    check_monotone(&trace)?;
    Ok(MorozovResult {
        alpha: lo,
        residual: r_at_lo,
        saturated: false,
        trace,
    })
}

/// The alpha grid swept by the oracle rule.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub alpha_grid: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            alpha_grid: log_grid(1e-8, 10.0, 200),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha_grid.is_empty() {
            return Err(Error::Contract("empty alpha grid".into()));
        }
        for w in self.alpha_grid.windows(2) {
            if !(w[0] > 0.0 && w[0] < w[1]) {
                return Err(Error::Contract(
                    "alpha grid must be strictly increasing and positive".into(),
                ));
            }
        }
        if !(*self.alpha_grid.first().unwrap() > 0.0) {
            return Err(Error::Contract("alpha grid must be positive".into()));
        }
        Ok(())
    }
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && lo < hi);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (llo + (lhi - llo) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Outcome of the oracle sweep.
#[derive(Debug, Clone)]
pub struct OptimalResult {
    pub alpha: f64,
    pub error: f64,
    /// All (alpha, error) evaluations in grid order.
    pub trace: Vec<(f64, f64)>,
}

/// Oracle rule: argmin of the reconstruction error over the grid, ties broken
/// toward larger alpha (stronger regularization at equal error).
pub fn optimal_alpha<F>(mut error: F, cfg: &SweepConfig) -> Result<OptimalResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    cfg.validate()?;
    let mut trace = Vec::with_capacity(cfg.alpha_grid.len());
    let mut best: Option<(f64, f64)> = None;
    for &alpha in &cfg.alpha_grid {
        let e = error(alpha)?;
        trace.push((alpha, e));
        // grid is ascending, so <= moves ties to the larger alpha
        if best.map_or(true, |(_, be)| e <= be) {
            best = Some((alpha, e));
        }
    }
    let (alpha, error) = best.unwrap();
    Ok(OptimalResult { alpha, error, trace })
}
