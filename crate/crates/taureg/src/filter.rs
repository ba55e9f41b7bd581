//! A one-parameter family of spectral filter functions interpolating between
//! Tikhonov regularization and spectral cutoff (TSVD), together with the
//! filtered-inverse action in diagonal-multiplier and discrete-SVD form.
//!
//! The interpolating filter is
//!
//! ```text
//! q_tau(alpha, sigma) = 1 / (1 + (sqrt(alpha)/sigma)^(2+tau))
//! ```
//!
//! tau = 0 is exactly Tikhonov, q = sigma^2/(alpha + sigma^2); tau -> infinity
//! approaches the hard cutoff at sigma = sqrt(alpha). The filtered inverse
//! applies the gain sigma^{-1} q(alpha, sigma) on each spectral component.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Which member of the filter family to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    /// The interpolating family q_tau; tau is taken from the spec.
    Interpolating,
    /// Closed-form Tikhonov filter sigma^2/(alpha + sigma^2).
    TikhonovExact,
    /// Hard spectral cutoff: 1 above sqrt(alpha), 1/2 at it, 0 below.
    CutoffExact,
}

/// Filter parameters: interpolation exponent tau and regularization weight alpha.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    tau: f64,
    alpha: f64,
    kind: FilterKind,
}

/// Exponents beyond this are flushed: exp(700) overflows f64, so the filter
/// value underflows to 0 (or saturates at 1) before the exponent gets there.
const EXP_FLUSH: f64 = 700.0;

impl FilterSpec {
    pub fn new(tau: f64, alpha: f64, kind: FilterKind) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::Domain(format!("tau must be nonnegative, got {tau}")));
        }
        Ok(Self { tau, alpha, kind })
    }

    /// Interpolating filter with the given exponent.
    pub fn interpolating(tau: f64, alpha: f64) -> Result<Self> {
        Self::new(tau, alpha, FilterKind::Interpolating)
    }

    /// Closed-form Tikhonov filter (equals `interpolating(0.0, alpha)`).
    pub fn tikhonov(alpha: f64) -> Result<Self> {
        Self::new(0.0, alpha, FilterKind::TikhonovExact)
    }

    /// Hard spectral cutoff at sqrt(alpha).
    pub fn cutoff(alpha: f64) -> Result<Self> {
        Self::new(0.0, alpha, FilterKind::CutoffExact)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    /// Same filter, different alpha.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.tau, alpha, self.kind)
    }

    fn check_sigma(sigma: f64) -> Result<()> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::Domain(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        Ok(())
    }

    /// The filter value q(alpha, sigma) in [0, 1].
    ///
    /// The power (sqrt(alpha)/sigma)^(2+tau) is evaluated as
    /// exp((2+tau)(ln(alpha)/2 - ln(sigma))) so that tau = 100 with tiny
    /// sigma does not overflow; exponents above 700 flush q to 0.
    pub fn filter_value(&self, sigma: f64) -> Result<f64> {
        Self::check_sigma(sigma)?;
        let q = match self.kind {
            FilterKind::Interpolating => {
                let expo = (2.0 + self.tau) * (0.5 * self.alpha.ln() - sigma.ln());
                if expo > EXP_FLUSH {
                    0.0
                } else {
                    1.0 / (1.0 + expo.exp())
                }
            }
            FilterKind::TikhonovExact => {
                let s2 = sigma * sigma;
                s2 / (self.alpha + s2)
            }
            FilterKind::CutoffExact => {
                let root = self.alpha.sqrt();
                if sigma > root {
                    1.0
                } else if sigma == root {
                    0.5
                } else {
                    0.0
                }
            }
        };
        Ok(q)
    }

    /// The gain sigma^{-1} q(alpha, sigma) actually applied to data coefficients.
    pub fn filter_gain(&self, sigma: f64) -> Result<f64> {
        Ok(self.filter_value(sigma)? / sigma)
    }

    /// Diagonal entry of the penalty operator in the right singular basis:
    /// sqrt(alpha) * (sqrt(alpha)/sigma)^(tau/2).
    pub fn penalty_multiplier(&self, sigma: f64) -> Result<f64> {
        Self::check_sigma(sigma)?;
        let half_ln_alpha = 0.5 * self.alpha.ln();
        let expo = half_ln_alpha + 0.5 * self.tau * (half_ln_alpha - sigma.ln());
        Ok(expo.exp())
    }
}

/// Finite singular triplets (sigma_n, u_n, v_n) of a discretized operator.
///
/// Columns of `left` and `right` are the left/right singular vectors;
/// singular values are sorted nonincreasing and strictly positive. Triplets
/// with sigma_n below 1e-12 * sigma_1 are dropped at construction.
#[derive(Debug, Clone)]
pub struct SingularSystem {
    sigma: Vec<f64>,
    left: DMatrix<f64>,
    right: DMatrix<f64>,
}

/// Relative cutoff below which singular triplets are treated as rank noise.
const RANK_FLOOR: f64 = 1e-12;

/// Frobenius tolerance for orthonormality of the singular vector blocks.
const ORTHO_TOL: f64 = 1e-10;

impl SingularSystem {
    pub fn new(sigma: Vec<f64>, left: DMatrix<f64>, right: DMatrix<f64>) -> Result<Self> {
        if sigma.is_empty() {
            return Err(Error::Contract("empty singular system".into()));
        }
        if left.ncols() != sigma.len() || right.ncols() != sigma.len() {
            return Err(Error::Dimension(format!(
                "singular system: {} values, {} left columns, {} right columns",
                sigma.len(),
                left.ncols(),
                right.ncols()
            )));
        }
        for (i, &s) in sigma.iter().enumerate() {
            if !s.is_finite() || s <= 0.0 {
                return Err(Error::Contract(format!("sigma[{i}] = {s} is not positive")));
            }
            if i > 0 && sigma[i - 1] < s {
                return Err(Error::Contract(format!(
                    "singular values not nonincreasing at index {i}: {} < {s}",
                    sigma[i - 1]
                )));
            }
        }

        // Drop triplets below double-precision rank.
        let floor = RANK_FLOOR * sigma[0];
        let rank = sigma.iter().take_while(|&&s| s >= floor).count().max(1);
        let sigma: Vec<f64> = sigma[..rank].to_vec();
        let left = left.columns(0, rank).into_owned();
        let right = right.columns(0, rank).into_owned();

        let gram_dev = |m: &DMatrix<f64>| -> f64 {
            let g = m.transpose() * m;
            let n = g.nrows();
            (g - DMatrix::<f64>::identity(n, n)).norm()
        };
        let dl = gram_dev(&left);
        let dr = gram_dev(&right);
        if dl > ORTHO_TOL || dr > ORTHO_TOL {
            return Err(Error::Contract(format!(
                "singular vectors not orthonormal: left deviation {dl:e}, right deviation {dr:e}"
            )));
        }

        Ok(Self { sigma, left, right })
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn left(&self) -> &DMatrix<f64> {
        &self.left
    }

    pub fn right(&self) -> &DMatrix<f64> {
        &self.right
    }

    /// Number of retained singular triplets.
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// Filtered inverse: sum_n sigma_n^{-1} q(alpha, sigma_n) <u_n, data> v_n.
    pub fn apply_filtered_inverse(&self, spec: &FilterSpec, data: &[f64]) -> Result<Vec<f64>> {
        if data.len() != self.left.nrows() {
            return Err(Error::Dimension(format!(
                "data length {} does not match left row count {}",
                data.len(),
                self.left.nrows()
            )));
        }
        let g = DVector::from_column_slice(data);
        let mut coeffs = self.left.transpose() * g;
        for (i, &s) in self.sigma.iter().enumerate() {
            coeffs[i] *= spec.filter_gain(s)?;
        }
        let out = &self.right * coeffs;
        Ok(out.as_slice().to_vec())
    }
}

/// The diagonal multiplier of a unitarily diagonalized operator, e.g. the
/// (scaled) DFT of a convolution kernel.
#[derive(Debug, Clone)]
pub struct DiagonalMultiplier {
    values: Vec<Complex64>,
}

impl DiagonalMultiplier {
    /// Rejects zero entries: a vanishing multiplier means the discrete forward
    /// operator is not injective and the filtered inverse is undefined there.
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Contract("empty multiplier".into()));
        }
        for (index, v) in values.iter().enumerate() {
            let magnitude = v.norm();
            if !magnitude.is_finite() || magnitude == 0.0 {
                return Err(Error::SingularMultiplier { index, magnitude });
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Elementwise filtered inverse: out_k = (1/m_k) q(alpha, |m_k|) d_k.
    ///
    /// The filter argument is the modulus |m_k|; dividing by the full complex
    /// value inverts the phase exactly while the magnitude is regularized.
    pub fn apply_filtered_inverse(
        &self,
        spec: &FilterSpec,
        data_hat: &[Complex64],
    ) -> Result<Vec<Complex64>> {
        if data_hat.len() != self.values.len() {
            return Err(Error::Dimension(format!(
                "data length {} does not match multiplier length {}",
                data_hat.len(),
                self.values.len()
            )));
        }
        self.values
            .iter()
            .zip(data_hat)
            .map(|(m, d)| Ok(d / m * spec.filter_value(m.norm())?))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interp(tau: f64, alpha: f64) -> FilterSpec {
        FilterSpec::interpolating(tau, alpha).unwrap()
    }

    #[test]
    fn filter_value_midpoint_is_half() {
        // sigma = sqrt(alpha) gives exactly 1/2 for every tau
        for tau in [0.0, 1.0, 2.0, 10.0, 100.0] {
            let q = interp(tau, 0.01).filter_value(0.1).unwrap();
            assert!((q - 0.5).abs() < 1e-14, "tau={tau}: q={q}");
        }
    }

    #[test]
    fn filter_value_matches_tikhonov_closed_form() {
        let q = interp(0.0, 2.0).filter_value(1.0).unwrap();
        assert!((q - 1.0 / 3.0).abs() < 1e-15);
        let q = FilterSpec::tikhonov(2.0).unwrap().filter_value(1.0).unwrap();
        assert!((q - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn large_tau_matches_cutoff_above_threshold() {
        let q = interp(100.0, 0.01).filter_value(0.2).unwrap();
        assert!((q - 1.0).abs() < 1e-15, "q={q}");
    }

    #[test]
    fn cutoff_tie_value_is_half() {
        let spec = FilterSpec::cutoff(0.04).unwrap();
        assert_eq!(spec.filter_value(0.2).unwrap(), 0.5);
        assert_eq!(spec.filter_value(0.21).unwrap(), 1.0);
        assert_eq!(spec.filter_value(0.19).unwrap(), 0.0);
    }

    #[test]
    fn filter_value_rejects_bad_sigma() {
        let spec = interp(0.0, 1.0);
        assert!(spec.filter_value(0.0).is_err());
        assert!(spec.filter_value(-1.0).is_err());
        assert!(spec.filter_value(f64::NAN).is_err());
    }

    #[test]
    fn spec_rejects_bad_parameters() {
        assert!(FilterSpec::interpolating(0.0, 0.0).is_err());
        assert!(FilterSpec::interpolating(0.0, -1.0).is_err());
        assert!(FilterSpec::interpolating(-1.0, 1.0).is_err());
    }

    #[test]
    fn tikhonov_gain_peak() {
        // peak gain 1/(2 sqrt(alpha)) attained at sigma = sqrt(alpha)
        let g = FilterSpec::tikhonov(0.04).unwrap().filter_gain(0.2).unwrap();
        assert!((g - 2.5).abs() < 1e-12, "g={g}");
    }

    #[test]
    fn gain_approaches_plain_inverse_for_large_sigma() {
        for tau in [0.0, 2.0, 100.0] {
            // for tau = 0 the gap is alpha / (sigma (alpha + sigma^2)) ~ 4e-5;
            // larger tau converges much faster
            let g = interp(tau, 0.04).filter_gain(10.0).unwrap();
            assert!((g - 0.1).abs() < 1e-4, "tau={tau}: g={g}");
        }
    }

    #[test]
    fn gain_bound_brute_force_sweep() {
        // max over a log grid of sigma^{-1} q stays below 1/sqrt(alpha)
        let spec = interp(100.0, 1.0);
        let mut max_gain: f64 = 0.0;
        for i in 0..=1200 {
            let sigma = 10f64.powf(-6.0 + 12.0 * i as f64 / 1200.0);
            max_gain = max_gain.max(spec.filter_gain(sigma).unwrap());
        }
        assert!(max_gain <= 1.0 + 1e-12, "max gain {max_gain}");
    }

    #[test]
    fn penalty_multiplier_values() {
        // tau = 0: constant sqrt(alpha)
        let spec = interp(0.0, 0.25);
        for sigma in [0.01, 1.0, 100.0] {
            assert!((spec.penalty_multiplier(sigma).unwrap() - 0.5).abs() < 1e-14);
        }
        // sigma = sqrt(alpha): sqrt(alpha) for any tau
        for tau in [0.0, 3.0, 50.0] {
            let spec = interp(tau, 0.25);
            assert!((spec.penalty_multiplier(0.5).unwrap() - 0.5).abs() < 1e-13);
        }
        // direct arithmetic: tau=2, alpha=0.01, sigma=0.05 -> 0.1 * (0.1/0.05) = 0.2
        let spec = interp(2.0, 0.01);
        assert!((spec.penalty_multiplier(0.05).unwrap() - 0.2).abs() < 1e-14);
    }

    #[test]
    fn identity_system_scales_data() {
        let n = 4;
        let sys = SingularSystem::new(
            vec![1.0; n],
            DMatrix::identity(n, n),
            DMatrix::identity(n, n),
        )
        .unwrap();
        let spec = interp(0.0, 1.0);
        let c = spec.filter_value(1.0).unwrap();
        let data = vec![1.0, -2.0, 3.0, 0.5];
        let out = sys.apply_filtered_inverse(&spec, &data).unwrap();
        for (o, d) in out.iter().zip(&data) {
            assert!((o - c * d).abs() < 1e-14);
        }
    }

    #[test]
    fn rank_one_action() {
        // data in span(u1) maps to v1 scaled by the first gain
        let left = DMatrix::from_columns(&[
            DVector::from_vec(vec![1.0, 0.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0, 0.0]),
        ]);
        let right = DMatrix::from_columns(&[
            DVector::from_vec(vec![0.0, 1.0]),
            DVector::from_vec(vec![1.0, 0.0]),
        ]);
        let sys = SingularSystem::new(vec![2.0, 0.5], left, right).unwrap();
        let spec = interp(1.0, 0.1);
        let out = sys
            .apply_filtered_inverse(&spec, &[3.0, 0.0, 0.0])
            .unwrap();
        let expect = spec.filter_gain(2.0).unwrap() * 3.0;
        assert!((out[1] - expect).abs() < 1e-14);
        assert!(out[0].abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch_is_error() {
        let sys = SingularSystem::new(
            vec![1.0, 1.0],
            DMatrix::identity(2, 2),
            DMatrix::identity(2, 2),
        )
        .unwrap();
        let spec = interp(0.0, 1.0);
        assert!(sys.apply_filtered_inverse(&spec, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn system_truncates_below_rank_floor() {
        let mut left = DMatrix::zeros(3, 3);
        let mut right = DMatrix::zeros(3, 3);
        for i in 0..3 {
            left[(i, i)] = 1.0;
            right[(i, i)] = 1.0;
        }
        let sys = SingularSystem::new(vec![1.0, 0.5, 1e-14], left, right).unwrap();
        assert_eq!(sys.rank(), 2);
    }

    #[test]
    fn system_rejects_unsorted_or_nonpositive() {
        let id = DMatrix::<f64>::identity(2, 2);
        assert!(SingularSystem::new(vec![1.0, 2.0], id.clone(), id.clone()).is_err());
        assert!(SingularSystem::new(vec![1.0, 0.0], id.clone(), id.clone()).is_err());
        assert!(SingularSystem::new(vec![1.0, -1.0], id.clone(), id).is_err());
    }

    #[test]
    fn system_rejects_nonorthonormal_vectors() {
        let skew = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        let id = DMatrix::<f64>::identity(2, 2);
        assert!(SingularSystem::new(vec![2.0, 1.0], skew, id).is_err());
    }

    #[test]
    fn diagonal_unit_multiplier_scales_by_filter_value() {
        let mult = DiagonalMultiplier::new(vec![Complex64::new(1.0, 0.0); 3]).unwrap();
        let spec = interp(2.0, 0.5);
        let q = spec.filter_value(1.0).unwrap();
        let data = vec![
            Complex64::new(1.0, 1.0),
            Complex64::new(-2.0, 0.0),
            Complex64::new(0.0, 3.0),
        ];
        let out = mult.apply_filtered_inverse(&spec, &data).unwrap();
        for (o, d) in out.iter().zip(&data) {
            assert!((o - d * q).norm() < 1e-14);
        }
    }

    #[test]
    fn diagonal_zero_data_gives_zero() {
        let mult =
            DiagonalMultiplier::new(vec![Complex64::new(0.3, -0.2), Complex64::new(2.0, 1.0)])
                .unwrap();
        let spec = interp(0.0, 0.1);
        let out = mult
            .apply_filtered_inverse(&spec, &[Complex64::ZERO, Complex64::ZERO])
            .unwrap();
        assert!(out.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn diagonal_phase_is_retained() {
        // m = i*sigma with sigma = sqrt(alpha): out = 0.5 * d / (i*sigma)
        let alpha = 0.09;
        let sigma = 0.3;
        let m = Complex64::new(0.0, sigma);
        let mult = DiagonalMultiplier::new(vec![m]).unwrap();
        let spec = interp(5.0, alpha);
        let d = Complex64::new(2.0, -1.0);
        let out = mult.apply_filtered_inverse(&spec, &[d]).unwrap();
        let expect = d / m * 0.5;
        assert!((out[0] - expect).norm() < 1e-14);
    }

    #[test]
    fn diagonal_rejects_zero_entry() {
        let err = DiagonalMultiplier::new(vec![Complex64::new(1.0, 0.0), Complex64::ZERO])
            .unwrap_err();
        match err {
            Error::SingularMultiplier { index, .. } => assert_eq!(index, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
