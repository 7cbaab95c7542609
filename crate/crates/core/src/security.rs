//! Approximation and security levels.
//!
//! With `s = Σ γ_m`, the receiver sees `y = c s + n_y` and the eavesdropper
//! sees `z = c Σ (g_m/h_m) γ_m + V A g + n_z`. Both are jointly Gaussian with
//! `s`, so the conditional mean is linear and its error covariance is
//! `Cov[s] − Cov[s,r] Cov[r]⁻¹ Cov[r,s]`. Its trace gives the approximation
//! level `D` at the receiver and the security level `S` at the eavesdropper:
//!
//! ```text
//! D = M − c² M² tr(Σ (c² M Σ + σ_y² I)⁻¹ Σ)
//! S = M − c² (Σ g_m/h_m)² tr(Σ R⁻¹ Σ),  R = c² (Σ g_m²/h_m²) Σ + ν I
//! ```
//!
//! where `ν = ‖A g‖²/k + σ_z²` is the per-coordinate white-noise variance at
//! the eavesdropper (the artificial noise `V A g` carries total power
//! `‖A g‖²` spread over the `k` channel uses).
//!
//! The closed forms are evaluated on the cached eigenvalues of `Σ`; the
//! estimators go through a Cholesky factorization of the receive covariance,
//! which keeps the two routes independent.

use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;

use crate::channel::{transmit, ChannelRealization};
use crate::math::{mean_and_standard_error, pairwise_sum, sqrt};
use crate::model::{sample_inputs, InputBatch, SystemConfig};
use crate::precoding::{realized_noise_power_at_eve, sample_artificial_noise, Precoder, POWER_TOL};
use crate::scaling::snr_of;
use crate::{Error, Result};

/// Relative pivot threshold below which a receive covariance is singular.
const SINGULAR_RTOL: f64 = 1e-12;

/// `D` for scaling `c²`; independent of the channel and the precoder.
pub fn approximation_level(cfg: &SystemConfig, c_sq: f64) -> Result<f64> {
    let m = cfg.num_users() as f64;
    let s2 = cfg.sigma_y_sq();
    if c_sq == 0.0 {
        if s2 == 0.0 {
            return Err(Error::Degenerate(
                "c = 0 and σ_y² = 0 leave the receive covariance singular",
            ));
        }
        return Ok(m);
    }
    let terms: Vec<f64> = cfg.eigenvalues().iter().map(|l| l * l / (c_sq * m * l + s2)).collect();
    Ok(m - c_sq * m * m * pairwise_sum(&terms))
}

/// `S` for scaling `c²`, channel `(h, g)` and eavesdropper artificial-noise
/// power `‖A g‖²`. A singular `R` (no signal and no noise reach the
/// eavesdropper) yields `S = M`.
pub fn security_level(cfg: &SystemConfig, c_sq: f64, channel: &ChannelRealization, eve_noise_power: f64) -> f64 {
    let m = cfg.num_users() as f64;
    let (cross, gain) = eve_channel_sums(channel);
    let signal = c_sq * gain;
    let white = eve_noise_power / cfg.dimension() as f64 + cfg.sigma_z_sq();
    if signal == 0.0 && white == 0.0 {
        return m;
    }
    let terms: Vec<f64> = cfg.eigenvalues().iter().map(|l| l * l / (signal * l + white)).collect();
    m - c_sq * cross * cross * pairwise_sum(&terms)
}

/// `(Σ g_m/h_m, Σ g_m²/h_m²)`.
fn eve_channel_sums(channel: &ChannelRealization) -> (f64, f64) {
    channel
        .h()
        .iter()
        .zip(channel.g())
        .fold((0.0, 0.0), |(a, b), (h, g)| (a + g / h, b + (g / h) * (g / h)))
}

/// Linear MMSE estimator `r ↦ Cov[s,r] Cov[r]⁻¹ r` for zero-mean jointly
/// Gaussian `(s, r)`.
#[derive(Debug, Clone)]
pub struct LinearMmse {
    gain: DMatrix<f64>,
}

impl LinearMmse {
    /// `cross = Cov[s, r]`, `cov = Cov[r]`. A zero cross-covariance gives
    /// the prior-mean estimator without touching `cov`.
    pub fn new(cross: &DMatrix<f64>, cov: &DMatrix<f64>) -> Result<Self> {
        if cross.iter().all(|x| *x == 0.0) {
            return Ok(LinearMmse {
                gain: DMatrix::zeros(cross.nrows(), cov.nrows()),
            });
        }
        let chol = spd_factor(cov)?;
        Ok(LinearMmse {
            gain: chol.solve(&cross.transpose()).transpose(),
        })
    }

    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }

    pub fn estimate(&self, received: &DVector<f64>) -> DVector<f64> {
        &self.gain * received
    }
}

fn spd_factor(cov: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    let chol = Cholesky::new(cov.clone()).ok_or(Error::Degenerate("receive covariance is not positive definite"))?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d * d), hi.max(d * d)));
    if lo <= SINGULAR_RTOL * hi {
        return Err(Error::Degenerate("receive covariance is numerically singular"));
    }
    Ok(chol)
}

/// `tr(Cov[s] − Cov[s,r] Cov[r]⁻¹ Cov[r,s])`, the MSE of the linear MMSE
/// estimator, by direct matrix algebra.
pub fn mmse_error_trace(cov_s: &DMatrix<f64>, cross: &DMatrix<f64>, cov_r: &DMatrix<f64>) -> Result<f64> {
    let chol = spd_factor(cov_r)?;
    let explained = cross * chol.solve(&cross.transpose());
    Ok((cov_s - explained).trace())
}

/// Covariance of the eavesdropper's effective noise
/// `n_e = c Σ (g_m/h_m − 1) γ_m + V A g + n_z`, split into its `Σ`-shaped
/// channel-mismatch part and its white part.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveNoiseCovariance {
    /// `c² Σ_m (g_m/h_m − 1)² Σ`.
    pub mismatch: DMatrix<f64>,
    /// Per-coordinate variance `‖A g‖²/k + σ_z²`.
    pub white: f64,
}

impl EffectiveNoiseCovariance {
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let k = self.mismatch.nrows();
        &self.mismatch + DMatrix::identity(k, k) * self.white
    }
}

/// Per-user power split `E‖x_m‖² = c²/h_m² + ‖a_m‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserPower {
    pub signal: f64,
    pub noise: f64,
}

impl UserPower {
    pub fn total(&self) -> f64 {
        self.signal + self.noise
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalMse {
    pub draws: usize,
    pub d_mean: f64,
    pub d_se: f64,
    pub s_mean: f64,
    pub s_se: f64,
}

/// Closed-form and (optionally) sampled figures for one design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecurityReport {
    pub d_closed: f64,
    pub s_closed: f64,
    /// Linear receive SNR.
    pub snr: f64,
    /// `‖A g‖²`.
    pub eve_noise_power: f64,
    pub empirical: Option<EmpiricalMse>,
}

impl SecurityReport {
    pub fn empirical_d(&self) -> Option<f64> {
        self.empirical.map(|e| e.d_mean)
    }
    pub fn empirical_s(&self) -> Option<f64> {
        self.empirical.map(|e| e.s_mean)
    }
}

/// A complete transmission scheme: scaling, precoder and channel.
#[derive(Debug, Clone)]
pub struct SchemeDesign<'a> {
    config: &'a SystemConfig,
    channel: ChannelRealization,
    c_sq: f64,
    precoder: Precoder,
}

impl<'a> SchemeDesign<'a> {
    /// Checks that `A h = 0` and that every user meets its power limit,
    /// `c² <= h_m² (P − ‖a_m‖²)`, up to `1e-9`.
    pub fn new(config: &'a SystemConfig, channel: ChannelRealization, c_sq: f64, precoder: Precoder) -> Result<Self> {
        let m = config.num_users();
        for (what, found) in [
            ("channel users", channel.num_users()),
            ("precoder columns", precoder.num_users()),
        ] {
            if found != m {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: m,
                    found,
                });
            }
        }
        if !(c_sq >= 0.0) || !c_sq.is_finite() {
            return Err(Error::Domain(alloc::format!(
                "c² must be finite and nonnegative, got {c_sq}"
            )));
        }
        if !precoder.is_zero_forcing(channel.h())? {
            return Err(Error::Precondition("precoder does not null the legitimate channel"));
        }
        let limit = channel
            .h()
            .iter()
            .zip(precoder.column_norms_sq())
            .map(|(h, a)| h * h * (config.power_limit() - a))
            .fold(f64::INFINITY, f64::min);
        if c_sq > limit + POWER_TOL {
            return Err(Error::InfeasibleScaling { c_sq, limit });
        }
        Ok(SchemeDesign {
            config,
            channel,
            c_sq,
            precoder,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        self.config
    }
    pub fn channel(&self) -> &ChannelRealization {
        &self.channel
    }
    pub fn c_sq(&self) -> f64 {
        self.c_sq
    }
    pub fn precoder(&self) -> &Precoder {
        &self.precoder
    }
    pub fn snr(&self) -> f64 {
        snr_of(self.config, self.c_sq)
    }

    /// `‖A g‖²`, the total artificial-noise power reaching the eavesdropper.
    pub fn eve_noise_power(&self) -> f64 {
        realized_noise_power_at_eve(self.precoder.matrix(), self.channel.g()).expect("shapes checked at construction")
    }

    pub fn per_user_power(&self) -> Vec<UserPower> {
        self.channel
            .h()
            .iter()
            .zip(self.precoder.column_norms_sq())
            .map(|(h, noise)| UserPower {
                signal: self.c_sq / (h * h),
                noise,
            })
            .collect()
    }

    pub fn approximation_level(&self) -> Result<f64> {
        approximation_level(self.config, self.c_sq)
    }

    pub fn security_level(&self) -> f64 {
        security_level(self.config, self.c_sq, &self.channel, self.eve_noise_power())
    }

    /// Scalar formulas for `Σ = I/k`; errors for any other covariance.
    pub fn corollary_levels(&self) -> Result<(f64, f64)> {
        if !self.config.is_isotropic() {
            return Err(Error::Precondition("the scalar formulas need Σ = I/k"));
        }
        let m = self.config.num_users() as f64;
        let k = self.config.dimension() as f64;
        let c2 = self.c_sq;
        let s2 = self.config.sigma_y_sq();
        if c2 == 0.0 && s2 == 0.0 {
            return Err(Error::Degenerate(
                "c = 0 and σ_y² = 0 leave the receive covariance singular",
            ));
        }
        let d = m - c2 * m * m / (c2 * m + k * s2);
        let (cross, gain) = eve_channel_sums(&self.channel);
        let denom = c2 * gain + self.eve_noise_power() + k * self.config.sigma_z_sq();
        let s = if denom == 0.0 {
            m
        } else {
            m - c2 * cross * cross / denom
        };
        Ok((d, s))
    }

    pub fn effective_noise_covariance(&self) -> EffectiveNoiseCovariance {
        let mismatch: f64 = self
            .channel
            .h()
            .iter()
            .zip(self.channel.g())
            .map(|(h, g)| (g / h - 1.0) * (g / h - 1.0))
            .sum();
        EffectiveNoiseCovariance {
            mismatch: self.config.covariance() * (self.c_sq * mismatch),
            white: self.eve_noise_power() / self.config.dimension() as f64 + self.config.sigma_z_sq(),
        }
    }

    /// `Cov[s] = M Σ`.
    pub fn target_covariance(&self) -> DMatrix<f64> {
        self.config.covariance() * self.config.num_users() as f64
    }

    /// `(Cov[s, y], Cov[y]) = (c M Σ, c² M Σ + σ_y² I)`.
    pub fn legit_covariances(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let sigma = self.config.covariance();
        let m = self.config.num_users() as f64;
        let k = self.config.dimension();
        let c = sqrt(self.c_sq);
        (
            sigma * (c * m),
            sigma * (self.c_sq * m) + DMatrix::identity(k, k) * self.config.sigma_y_sq(),
        )
    }

    /// `(Cov[s, z], Cov[z]) = (c (Σ g/h) Σ, c² (Σ g²/h²) Σ + ν I)`.
    pub fn eve_covariances(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let sigma = self.config.covariance();
        let k = self.config.dimension();
        let c = sqrt(self.c_sq);
        let (cross, gain) = eve_channel_sums(&self.channel);
        let white = self.eve_noise_power() / k as f64 + self.config.sigma_z_sq();
        (
            sigma * (c * cross),
            sigma * (self.c_sq * gain) + DMatrix::identity(k, k) * white,
        )
    }

    pub fn legit_estimator(&self) -> Result<LinearMmse> {
        let (cross, cov) = self.legit_covariances();
        LinearMmse::new(&cross, &cov)
    }

    pub fn eve_estimator(&self) -> Result<LinearMmse> {
        let (cross, cov) = self.eve_covariances();
        LinearMmse::new(&cross, &cov)
    }

    pub fn mmse_estimate_legit(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.legit_estimator()?.estimate(y))
    }

    pub fn mmse_estimate_eve(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.eve_estimator()?.estimate(z))
    }

    /// Transmit matrix with column `m` equal to `c/h_m · γ_m + w_m`, the
    /// artificial noise drawn from `rng`.
    pub fn build_transmit_matrix<R: Rng + ?Sized>(&self, batch: &InputBatch, rng: &mut R) -> Result<DMatrix<f64>> {
        let m = self.config.num_users();
        let k = self.config.dimension();
        if batch.gammas().len() != m {
            return Err(Error::DimensionMismatch {
                what: "input batch users",
                expected: m,
                found: batch.gammas().len(),
            });
        }
        let mut x = sample_artificial_noise(self.precoder.matrix(), k, rng);
        let c = sqrt(self.c_sq);
        for (col, (gamma, h)) in batch.gammas().iter().zip(self.channel.h()).enumerate() {
            if gamma.len() != k {
                return Err(Error::DimensionMismatch {
                    what: "input vector",
                    expected: k,
                    found: gamma.len(),
                });
            }
            let mut column = x.column_mut(col);
            column.axpy(c / h, gamma, 1.0);
        }
        Ok(x)
    }

    /// Runs the whole chain `draws` times (inputs, artificial noise, channel,
    /// both estimators) and reports the mean squared errors with their
    /// standard errors.
    pub fn empirical_mse<R: Rng + ?Sized>(&self, draws: usize, rng: &mut R) -> Result<EmpiricalMse> {
        let legit = self.legit_estimator()?;
        let eve = self.eve_estimator()?;
        let mut err_d = Vec::with_capacity(draws);
        let mut err_s = Vec::with_capacity(draws);
        for _ in 0..draws {
            let batch = sample_inputs(self.config, rng);
            let x = self.build_transmit_matrix(&batch, rng)?;
            let out = transmit(&x, &self.channel, self.config, rng)?;
            err_d.push((legit.estimate(&out.y) - batch.target()).norm_squared());
            err_s.push((eve.estimate(&out.z) - batch.target()).norm_squared());
        }
        let (d_mean, d_se) = mean_and_standard_error(&err_d);
        let (s_mean, s_se) = mean_and_standard_error(&err_s);
        Ok(EmpiricalMse {
            draws,
            d_mean,
            d_se,
            s_mean,
            s_se,
        })
    }

    /// Closed-form report without sampling.
    pub fn report(&self) -> Result<SecurityReport> {
        Ok(SecurityReport {
            d_closed: self.approximation_level()?,
            s_closed: self.security_level(),
            snr: self.snr(),
            eve_noise_power: self.eve_noise_power(),
            empirical: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;
    use crate::precoding::{no_noise_precoder, noise_budget, optimize_unknown_csi};
    use crate::rng::{stream, Purpose};
    use alloc::vec;

    fn scalar_cfg(m: usize, s2y: f64, s2z: f64) -> SystemConfig {
        SystemConfig::new(SystemParams::isotropic(m, 1, 1.0, s2y, s2z)).unwrap()
    }

    #[test]
    fn approximation_level_examples() {
        let cfg = scalar_cfg(10, 0.1, 0.0);
        assert!((approximation_level(&cfg, 0.09).unwrap() - 1.0).abs() < 1e-13);
        assert_eq!(approximation_level(&cfg, 0.0).unwrap(), 10.0);
        let quiet = scalar_cfg(10, 1e-15, 0.0);
        assert!(approximation_level(&quiet, 0.09).unwrap() < 1e-10);
        let silent = scalar_cfg(10, 0.0, 0.0);
        assert!(matches!(approximation_level(&silent, 0.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn security_level_scalar_example() {
        // M = 2, k = 1, c² = 0.1, h = (1, 1), g = (1, 2), ‖Ag‖² = 0.5, σ_z² = 0.
        let cfg = scalar_cfg(2, 0.1, 0.0);
        let ch = ChannelRealization::new(vec![1.0, 1.0], vec![1.0, 2.0]).unwrap();
        let s = security_level(&cfg, 0.1, &ch, 0.5);
        assert!((s - 1.1).abs() < 1e-14);

        // Same value from the conditional-covariance trace.
        let sigma = DMatrix::from_element(1, 1, 1.0);
        let cov_s = &sigma * 2.0;
        let cross = &sigma * (sqrt(0.1) * 3.0);
        let cov_z = &sigma * (0.1 * 5.0) + DMatrix::identity(1, 1) * 0.5;
        assert!((mmse_error_trace(&cov_s, &cross, &cov_z).unwrap() - 1.1).abs() < 1e-14);
    }

    #[test]
    fn security_level_limits() {
        let cfg = scalar_cfg(3, 0.1, 0.0);
        let ch = ChannelRealization::new(vec![0.5, 1.0, 2.0], vec![0.7, 0.1, 3.0]).unwrap();
        assert_eq!(security_level(&cfg, 0.0, &ch, 0.0), 3.0);
        assert!(3.0 - security_level(&cfg, 0.2, &ch, 1e12) < 1e-9);
        let mut prev = security_level(&cfg, 0.2, &ch, 0.0);
        for i in 1..50 {
            let s = security_level(&cfg, 0.2, &ch, i as f64 * 0.1);
            assert!(s >= prev);
            prev = s;
        }
    }

    #[test]
    fn cauchy_schwarz_floor() {
        let cfg = scalar_cfg(3, 0.1, 0.0);
        let aligned = ChannelRealization::new(vec![0.5, 1.0, 2.0], vec![1.0, 2.0, 4.0]).unwrap();
        assert!(security_level(&cfg, 0.2, &aligned, 0.0).abs() < 1e-12);
        let skew = ChannelRealization::new(vec![0.5, 1.0, 2.0], vec![1.0, 0.5, 4.0]).unwrap();
        assert!(security_level(&cfg, 0.2, &skew, 0.0) > 1e-3);
    }

    fn design_for<'a>(cfg: &'a SystemConfig, h: Vec<f64>, g: Vec<f64>, c_sq: f64) -> SchemeDesign<'a> {
        let ch = ChannelRealization::new(h, g).unwrap();
        let budget = noise_budget(cfg, ch.h(), c_sq).unwrap();
        let p = optimize_unknown_csi(ch.h(), &budget).unwrap();
        SchemeDesign::new(cfg, ch, c_sq, p).unwrap()
    }

    #[test]
    fn identical_channels_give_equal_levels() {
        let mut p = SystemParams::isotropic(4, 2, 1.0, 0.2, 0.2);
        p.covariance = DMatrix::from_row_slice(2, 2, &[0.7, 0.1, 0.1, 0.3]);
        let cfg = SystemConfig::new(p).unwrap();
        let h = vec![0.6, 0.9, 1.3, 2.0];
        let ch = ChannelRealization::new(h.clone(), h).unwrap();
        let d = SchemeDesign::new(&cfg, ch, 0.3, no_noise_precoder(4).unwrap()).unwrap();
        assert_eq!(d.security_level(), d.approximation_level().unwrap());
    }

    #[test]
    fn degenerate_scaling_gives_prior() {
        let cfg = scalar_cfg(3, 0.1, 0.0);
        let d = design_for(&cfg, vec![0.5, 1.0, 2.0], vec![1.0, 1.0, 1.0], 0.0);
        assert_eq!(d.corollary_levels().unwrap(), (3.0, 3.0));
        let y = DVector::from_element(1, 0.7);
        assert_eq!(d.mmse_estimate_legit(&y).unwrap(), DVector::zeros(1));
        assert_eq!(d.mmse_estimate_eve(&y).unwrap(), DVector::zeros(1));
    }

    #[test]
    fn effective_noise_examples() {
        let cfg = scalar_cfg(3, 0.1, 0.05);
        let h = vec![0.5, 1.0, 2.0];
        let d = design_for(&cfg, h.clone(), h.clone(), 0.2);
        let cov = d.effective_noise_covariance();
        assert!(cov.mismatch.amax() < 1e-15);
        assert!((cov.white - (d.eve_noise_power() + 0.05)).abs() < 1e-15);

        let cfg0 = scalar_cfg(3, 0.1, 0.0);
        let ch = ChannelRealization::new(h.clone(), h).unwrap();
        let d0 = SchemeDesign::new(&cfg0, ch, 0.2, no_noise_precoder(3).unwrap()).unwrap();
        assert_eq!(d0.effective_noise_covariance().to_matrix(), DMatrix::zeros(1, 1));
    }

    #[test]
    fn transmit_matrix_example() {
        let cfg = scalar_cfg(2, 0.1, 0.0);
        let ch = ChannelRealization::new(vec![0.5, 1.0], vec![1.0, 1.0]).unwrap();
        let d = SchemeDesign::new(&cfg, ch, 0.01, no_noise_precoder(2).unwrap()).unwrap();
        let batch = InputBatch::new(vec![DVector::from_element(1, 1.0), DVector::from_element(1, 2.0)]).unwrap();
        let x = d
            .build_transmit_matrix(&batch, &mut stream(0, Purpose::ArtificialNoise, &[]))
            .unwrap();
        assert!((x[(0, 0)] - 0.2).abs() < 1e-15 && (x[(0, 1)] - 0.2).abs() < 1e-15);
        let y = x * DVector::from_column_slice(d.channel().h());
        assert!((y[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn noiseless_receive_is_scaled_target() {
        let cfg = SystemConfig::new(SystemParams::isotropic(5, 3, 1.0, 0.1, 0.0)).unwrap();
        let d = design_for(&cfg, vec![0.6, 0.8, 1.1, 1.9, 2.4], vec![1.0, 0.2, 1.4, 0.9, 1.1], 0.3);
        let mut rng = stream(11, Purpose::Inputs, &[]);
        for _ in 0..200 {
            let batch = sample_inputs(&cfg, &mut rng);
            let x = d.build_transmit_matrix(&batch, &mut rng).unwrap();
            let y = x * DVector::from_column_slice(d.channel().h());
            let cs = batch.target() * sqrt(0.3);
            assert!((y - &cs).norm() <= 1e-9 * (1.0 + cs.norm()));
        }
    }

    #[test]
    fn scheme_rejects_power_violation_and_non_nulling() {
        let cfg = scalar_cfg(3, 0.1, 0.0);
        let ch = ChannelRealization::new(vec![0.5, 1.0, 2.0], vec![1.0, 1.0, 1.0]).unwrap();
        let budget = noise_budget(&cfg, ch.h(), 0.2).unwrap();
        let p = optimize_unknown_csi(ch.h(), &budget).unwrap();
        assert!(matches!(
            SchemeDesign::new(&cfg, ch.clone(), 0.21, p.clone()),
            Err(Error::InfeasibleScaling { .. })
        ));
        let tampered = Precoder::from_matrix(
            DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.1]),
            p.method(),
        );
        assert!(SchemeDesign::new(&cfg, ch, 0.0, tampered).is_err());
    }

    #[test]
    fn corollary_requires_isotropy() {
        let mut p = SystemParams::isotropic(3, 2, 1.0, 0.1, 0.0);
        p.covariance = DMatrix::from_diagonal(&DVector::from_vec(vec![0.6, 0.4]));
        let cfg = SystemConfig::new(p).unwrap();
        let d = design_for(&cfg, vec![0.5, 1.0, 2.0], vec![1.0, 1.0, 1.0], 0.1);
        assert!(matches!(d.corollary_levels(), Err(Error::Precondition(_))));
    }
}
