//! Numerical kernels: DFT, dense SVD, seeded Gaussian sampling, and the
//! order-zero Bessel/Hankel functions used by the radiation integral.

pub mod bessel;

pub use bessel::{hankel1_0, j0, y0};

use std::sync::Mutex;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::filter::SingularSystem;

// A single shared planner so repeated transforms of the same length reuse
// their twiddle tables. rustfft handles arbitrary lengths (1001 = 7*11*13)
// with mixed-radix/Bluestein plans.
static PLANNER: Mutex<Option<FftPlanner<f64>>> = Mutex::new(None);

fn with_planner<R>(f: impl FnOnce(&mut FftPlanner<f64>) -> R) -> R {
    let mut guard = PLANNER.lock().unwrap();
    f(guard.get_or_insert_with(FftPlanner::new))
}

/// Forward DFT, X_k = sum_j x_j exp(-2 pi i j k / n), no normalization.
pub fn dft_forward(x: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(Error::Contract("dft of empty vector".into()));
    }
    let fft = with_planner(|p| p.plan_fft_forward(x.len()));
    let mut buf = x.to_vec();
    fft.process(&mut buf);
    Ok(buf)
}

/// Inverse DFT with 1/n normalization; `dft_inverse(dft_forward(x)) == x`
/// to roundoff.
pub fn dft_inverse(x: &[Complex64]) -> Result<Vec<Complex64>> {
    if x.is_empty() {
        return Err(Error::Contract("dft of empty vector".into()));
    }
    let fft = with_planner(|p| p.plan_fft_inverse(x.len()));
    let mut buf = x.to_vec();
    fft.process(&mut buf);
    let scale = 1.0 / x.len() as f64;
    for v in &mut buf {
        *v *= scale;
    }
    Ok(buf)
}

/// Dense SVD of a real matrix, returned as a [`SingularSystem`].
///
/// Exactly-zero singular values and triplets below the system's rank floor
/// are dropped. Reconstruction error is bounded by ~1e-9 * ||A||_F for
/// desk-scale matrices.
pub fn svd(a: &DMatrix<f64>) -> Result<SingularSystem> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("matrix has non-finite entries".into()));
    }
    let svd = nalgebra::SVD::try_new(a.clone(), true, true, f64::EPSILON, 0)
        .ok_or(Error::SvdFailed)?;
    let u = svd.u.ok_or(Error::SvdFailed)?;
    let vt = svd.v_t.ok_or(Error::SvdFailed)?;

    // nalgebra sorts descending; drop exact zeros before constructing.
    let mut sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let rank = sigma.iter().take_while(|&&s| s > 0.0).count();
    if rank == 0 {
        return Err(Error::Contract("matrix is exactly zero".into()));
    }
    sigma.truncate(rank);
    let left = u.columns(0, rank).into_owned();
    let right = vt.rows(0, rank).transpose();
    SingularSystem::new(sigma, left, right)
}

/// Seeded Gaussian sampler: splitmix64 driving a Box-Muller transform.
///
/// The generator is fixed by this implementation (not a library RNG) so that
/// fixtures remain byte-stable across dependency upgrades.
pub fn gaussian_noise(n: usize, stddev: f64, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Contract("noise vector length must be >= 1".into()));
    }
    if !stddev.is_finite() || stddev <= 0.0 {
        return Err(Error::Contract(format!(
            "noise stddev must be positive, got {stddev}"
        )));
    }
    let mut state = seed;
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        // u1 in (0, 1], u2 in [0, 1)
        let u1 = ((splitmix64(&mut state) >> 11) + 1) as f64 / (1u64 << 53) as f64;
        let u2 = (splitmix64(&mut state) >> 11) as f64 / (1u64 << 53) as f64;
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        out.push(stddev * r * theta.cos());
        out.push(stddev * r * theta.sin());
    }
    out.truncate(n);
    Ok(out)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cvec(re: &[f64]) -> Vec<Complex64> {
        re.iter().map(|&r| Complex64::new(r, 0.0)).collect()
    }

    #[test]
    fn dft_of_delta_is_constant() {
        let x = cvec(&[1.0, 0.0, 0.0, 0.0]);
        let big_x = dft_forward(&x).unwrap();
        for v in big_x {
            assert!((v - Complex64::ONE).norm() < 1e-14);
        }
    }

    #[test]
    fn dft_of_constant_is_scaled_delta() {
        let c = 0.7;
        let x = cvec(&[c; 8]);
        let big_x = dft_forward(&x).unwrap();
        assert!((big_x[0] - Complex64::new(8.0 * c, 0.0)).norm() < 1e-13);
        for v in &big_x[1..] {
            assert!(v.norm() < 1e-13);
        }
    }

    #[test]
    fn dft_matches_direct_summation_n64() {
        // direct O(n^2) oracle
        let n = 64;
        let mut state = 123u64;
        let x: Vec<Complex64> = (0..n)
            .map(|_| {
                Complex64::new(
                    (splitmix64(&mut state) >> 11) as f64 / (1u64 << 53) as f64 - 0.5,
                    (splitmix64(&mut state) >> 11) as f64 / (1u64 << 53) as f64 - 0.5,
                )
            })
            .collect();
        let fast = dft_forward(&x).unwrap();
        for k in 0..n {
            let mut acc = Complex64::ZERO;
            for (j, xj) in x.iter().enumerate() {
                let phi = -2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                acc += xj * Complex64::new(phi.cos(), phi.sin());
            }
            assert!((fast[k] - acc).norm() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn dft_round_trip_and_parseval_n1001() {
        let n = 1001;
        let noise = gaussian_noise(2 * n, 1.0, 9).unwrap();
        let x: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(noise[2 * i], noise[2 * i + 1]))
            .collect();
        let big_x = dft_forward(&x).unwrap();
        let back = dft_inverse(&big_x).unwrap();
        let norm_x: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let err: f64 = x
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err / norm_x.sqrt() < 1e-12);
        let norm_big: f64 = big_x.iter().map(|v| v.norm_sqr()).sum();
        assert!((norm_x - norm_big / n as f64).abs() / norm_x < 1e-12);
    }

    #[test]
    fn dft_rejects_empty_input() {
        assert!(dft_forward(&[]).is_err());
        assert!(dft_inverse(&[]).is_err());
    }

    #[test]
    fn svd_of_identity() {
        let sys = svd(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(sys.sigma(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn svd_of_rectangular_diagonal() {
        let mut a = DMatrix::zeros(3, 2);
        a[(0, 0)] = 3.0;
        a[(1, 1)] = 1.0;
        let sys = svd(&a).unwrap();
        assert!((sys.sigma()[0] - 3.0).abs() < 1e-12);
        assert!((sys.sigma()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn svd_squared_values_match_gram_eigenvalues() {
        // oracle: Jacobi eigensolver for the symmetric Gram matrix
        let m = 8;
        let n = 5;
        let noise = gaussian_noise(m * n, 1.0, 31).unwrap();
        let a = DMatrix::from_row_slice(m, n, &noise);
        let sys = svd(&a).unwrap();
        let mut eig = jacobi_eigenvalues(&(a.transpose() * &a));
        eig.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for (s, e) in sys.sigma().iter().zip(&eig) {
            assert!((s * s - e).abs() < 1e-8, "sigma^2={} eig={}", s * s, e);
        }
    }

    #[test]
    fn svd_reconstructs_matrix() {
        let m = 7;
        let n = 4;
        let noise = gaussian_noise(m * n, 1.0, 77).unwrap();
        let a = DMatrix::from_row_slice(m, n, &noise);
        let sys = svd(&a).unwrap();
        let recon = sys.left()
            * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(sys.sigma()))
            * sys.right().transpose();
        assert!((&a - recon).norm() <= 1e-9 * a.norm());
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut a = DMatrix::zeros(2, 2);
        a[(0, 0)] = f64::NAN;
        assert!(svd(&a).is_err());
    }

    /// Cyclic Jacobi eigenvalue iteration for small symmetric matrices.
    /// Test-only oracle, independent of the SVD path under test.
    fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
        let n = a.nrows();
        let mut a = a.clone();
        for _ in 0..100 {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)] * a[(p, q)];
                }
            }
            if off.sqrt() < 1e-14 * a.norm() {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    if a[(p, q)].abs() < 1e-300 {
                        continue;
                    }
                    let theta = 0.5 * (a[(q, q)] - a[(p, p)]) / a[(p, q)];
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        (0..n).map(|i| a[(i, i)]).collect()
    }

    #[test]
    fn noise_is_deterministic() {
        let a = gaussian_noise(100, 0.05, 7).unwrap();
        let b = gaussian_noise(100, 0.05, 7).unwrap();
        assert_eq!(a, b);
        let c = gaussian_noise(100, 0.05, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noise_vanishes_with_stddev() {
        let v = gaussian_noise(64, 1e-305, 3).unwrap();
        assert!(v.iter().all(|x| x.abs() < 1e-300));
    }

    #[test]
    fn noise_norm_matches_stddev() {
        let n = 100_000;
        let stddev = 0.05;
        let v = gaussian_noise(n, stddev, 42).unwrap();
        let rms = (v.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
        assert!((0.0495..=0.0505).contains(&rms), "rms={rms}");
        let mean = v.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 * stddev / (n as f64).sqrt(), "mean={mean}");
    }

    #[test]
    fn noise_rejects_bad_arguments() {
        assert!(gaussian_noise(0, 1.0, 0).is_err());
        assert!(gaussian_noise(10, 0.0, 0).is_err());
        assert!(gaussian_noise(10, -1.0, 0).is_err());
    }
}
