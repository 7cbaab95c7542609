//! Rayleigh block fading and the multiple-access wiretap channel.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::math::{exp, ln_1p, sqrt, PI};
use crate::model::SystemConfig;
use crate::{Error, Result};

/// Rayleigh mean minus one standard deviation, `σ (√π − √(4 − π)) / √2`.
/// This is where the simulations pin the weakest legitimate coefficient.
pub fn rayleigh_mean_minus_std(scale: f64) -> f64 {
    scale * (sqrt(PI) - sqrt(4.0 - PI)) / sqrt(2.0)
}

/// A quarter of [`rayleigh_mean_minus_std`]; the value printed alongside the
/// scaling-bound figure. Kept as an alternative setting.
pub fn rayleigh_mean_minus_std_quarter(scale: f64) -> f64 {
    0.25 * rayleigh_mean_minus_std(scale)
}

pub fn rayleigh_cdf(x: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        1.0 - exp(-x * x / (2.0 * scale * scale))
    }
}

/// Inverse Rayleigh CDF, `scale · sqrt(−2 ln(1 − u))`, for `u ∈ [0, 1)`.
pub fn rayleigh_inverse_cdf(u: f64, scale: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::Domain(format!("Rayleigh quantile needs u in [0, 1), got {u}")));
    }
    if !(scale > 0.0) {
        return Err(Error::Domain(format!("Rayleigh scale must be positive, got {scale}")));
    }
    Ok(scale * sqrt(-2.0 * ln_1p(-u)))
}

/// Quantile of a Rayleigh variable conditioned on `X >= lower`.
///
/// The truncated CDF is `1 − exp(−(x² − lower²) / 2σ²)`, which inverts to
/// `sqrt(lower² − 2σ² ln(1 − u))`; this equals the plain quantile evaluated at
/// `F(lower) + u (1 − F(lower))` but never returns less than `lower`.
pub fn truncated_rayleigh_inverse_cdf(u: f64, scale: f64, lower: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::Domain(format!("Rayleigh quantile needs u in [0, 1), got {u}")));
    }
    Ok(sqrt(lower * lower - 2.0 * scale * scale * ln_1p(-u)))
}

/// One block-fading draw: legitimate coefficients `h` sorted ascending and
/// eavesdropper coefficients `g` permuted along with them.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    h: Vec<f64>,
    g: Vec<f64>,
}

impl ChannelRealization {
    /// Sorts `h` ascending (stable, lower index first on ties) and applies the
    /// same permutation to `g`.
    pub fn new(h: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if h.len() != g.len() {
            return Err(Error::DimensionMismatch {
                what: "eavesdropper channel",
                expected: h.len(),
                found: g.len(),
            });
        }
        if h.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::Domain(
                "legitimate channel coefficients must be positive and finite".into(),
            ));
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("eavesdropper channel coefficients must be finite".into()));
        }
        let mut order: Vec<usize> = (0..h.len()).collect();
        order.sort_by(|&a, &b| h[a].total_cmp(&h[b]));
        let h_sorted = order.iter().map(|&i| h[i]).collect();
        let g_sorted = order.iter().map(|&i| g[i]).collect();
        Ok(ChannelRealization {
            h: h_sorted,
            g: g_sorted,
        })
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }
    pub fn g(&self) -> &[f64] {
        &self.g
    }
    pub fn num_users(&self) -> usize {
        self.h.len()
    }
    /// The weakest legitimate coefficient `h_1`.
    pub fn weakest(&self) -> f64 {
        self.h[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelMode {
    /// All coefficients i.i.d. Rayleigh.
    FreeRayleigh,
    /// `h_1` fixed, the other legitimate coefficients conditioned to be at
    /// least `h_1`.
    FixedWeakest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelProtocol {
    pub mode: ChannelMode,
    /// Only used in [`ChannelMode::FixedWeakest`].
    pub h1_fixed: f64,
}

impl ChannelProtocol {
    pub fn free_rayleigh() -> Self {
        ChannelProtocol {
            mode: ChannelMode::FreeRayleigh,
            h1_fixed: 0.0,
        }
    }

    pub fn fixed_weakest(h1_fixed: f64) -> Self {
        ChannelProtocol {
            mode: ChannelMode::FixedWeakest,
            h1_fixed,
        }
    }

    /// Fixed weakest user at one standard deviation below the unit Rayleigh
    /// mean.
    pub fn reference() -> Self {
        Self::fixed_weakest(rayleigh_mean_minus_std(1.0))
    }
}

/// Draws `h` then `g`, user by user, from `rng`.
pub fn sample_channel<R: Rng + ?Sized>(cfg: &SystemConfig, proto: &ChannelProtocol, rng: &mut R) -> ChannelRealization {
    let m = cfg.num_users();
    let mut uniform = || rng.random::<f64>();
    let h: Vec<f64> =
        match proto.mode {
            ChannelMode::FreeRayleigh => (0..m)
                .map(|_| rayleigh_inverse_cdf(uniform(), cfg.sigma_h()).expect("u in [0,1)"))
                .collect(),
            ChannelMode::FixedWeakest => core::iter::once(proto.h1_fixed)
                .chain((1..m).map(|_| {
                    truncated_rayleigh_inverse_cdf(uniform(), cfg.sigma_h(), proto.h1_fixed).expect("u in [0,1)")
                }))
                .collect(),
        };
    let g: Vec<f64> = (0..m)
        .map(|_| rayleigh_inverse_cdf(uniform(), cfg.sigma_g()).expect("u in [0,1)"))
        .collect();
    // Free mode can produce an exact zero only for u = 0; nudge to keep h > 0.
    let h = h
        .into_iter()
        .map(|x| if x > 0.0 { x } else { f64::MIN_POSITIVE })
        .collect();
    ChannelRealization::new(h, g).expect("sampled coefficients are valid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOutputs {
    /// Legitimate receiver output `X h + n_y`.
    pub y: DVector<f64>,
    /// Eavesdropper output `X g + n_z`.
    pub z: DVector<f64>,
}

/// Applies the wiretap channel to the `n × M` transmit matrix. Draws `n`
/// receiver-noise samples followed by `n` eavesdropper-noise samples.
pub fn transmit<R: Rng + ?Sized>(
    x: &DMatrix<f64>,
    ch: &ChannelRealization,
    cfg: &SystemConfig,
    rng: &mut R,
) -> Result<ChannelOutputs> {
    let (y, z) = transmit_noiseless(x, ch)?;
    let n = x.nrows();
    let sy = sqrt(cfg.sigma_y_sq());
    let sz = sqrt(cfg.sigma_z_sq());
    let ny = DVector::from_fn(n, |_, _| sy * rng.sample::<f64, _>(StandardNormal));
    let nz = DVector::from_fn(n, |_, _| sz * rng.sample::<f64, _>(StandardNormal));
    Ok(ChannelOutputs { y: y + ny, z: z + nz })
}

/// `(X h, X g)` without noise.
pub fn transmit_noiseless(x: &DMatrix<f64>, ch: &ChannelRealization) -> Result<(DVector<f64>, DVector<f64>)> {
    if x.ncols() != ch.num_users() {
        return Err(Error::DimensionMismatch {
            what: "transmit matrix columns",
            expected: ch.num_users(),
            found: x.ncols(),
        });
    }
    let h = DVector::from_column_slice(ch.h());
    let g = DVector::from_column_slice(ch.g());
    Ok((x * h, x * g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;
    use crate::rng::{stream, Purpose};
    use alloc::vec;

    fn cfg(m: usize, k: usize) -> SystemConfig {
        SystemConfig::new(SystemParams::isotropic(m, k, 1.0, 0.1, 0.0)).unwrap()
    }

    #[test]
    fn inverse_cdf_reference_points() {
        assert_eq!(rayleigh_inverse_cdf(0.0, 1.0).unwrap(), 0.0);
        let u = 1.0 - exp(-0.5);
        assert!((rayleigh_inverse_cdf(u, 1.0).unwrap() - 1.0).abs() < 1e-14);
        let u = 1.0 - exp(-2.0);
        assert!((rayleigh_inverse_cdf(u, 2.0).unwrap() - 4.0).abs() < 1e-13);
    }

    #[test]
    fn inverse_cdf_domain() {
        assert!(rayleigh_inverse_cdf(1.0, 1.0).is_err());
        assert!(rayleigh_inverse_cdf(-0.1, 1.0).is_err());
        assert!(rayleigh_inverse_cdf(0.5, 0.0).is_err());
    }

    #[test]
    fn inverse_cdf_is_increasing_and_inverts_cdf() {
        let mut prev = -1.0;
        for i in 0..1000 {
            let u = i as f64 / 1000.0;
            let x = rayleigh_inverse_cdf(u, 1.7).unwrap();
            assert!(x > prev);
            assert!((rayleigh_cdf(x, 1.7) - u).abs() < 1e-12);
            prev = x;
        }
    }

    #[test]
    fn truncated_quantile_matches_restricted_range_inversion() {
        let lower = rayleigh_mean_minus_std(1.0);
        let f_lower = rayleigh_cdf(lower, 1.0);
        for i in 0..100 {
            let u = i as f64 / 100.0;
            let direct = truncated_rayleigh_inverse_cdf(u, 1.0, lower).unwrap();
            let restricted = rayleigh_inverse_cdf(f_lower + u * (1.0 - f_lower), 1.0).unwrap();
            assert!((direct - restricted).abs() < 1e-12);
            assert!(direct >= lower);
        }
        assert_eq!(truncated_rayleigh_inverse_cdf(0.0, 1.0, lower).unwrap(), lower);
    }

    #[test]
    fn reference_weakest_value() {
        assert!((rayleigh_mean_minus_std(1.0) - 0.598_177_76).abs() < 1e-8);
    }

    #[test]
    fn fixed_weakest_pins_h1() {
        let c = cfg(10, 1);
        let proto = ChannelProtocol::reference();
        let mut rng = stream(3, Purpose::Channel, &[]);
        for _ in 0..1000 {
            let ch = sample_channel(&c, &proto, &mut rng);
            assert_eq!(ch.weakest(), proto.h1_fixed);
            assert!(ch.h().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn sorting_keeps_pairs() {
        let ch = ChannelRealization::new(vec![2.0, 0.5, 1.0], vec![20.0, 5.0, 10.0]).unwrap();
        assert_eq!(ch.h(), &[0.5, 1.0, 2.0]);
        assert_eq!(ch.g(), &[5.0, 10.0, 20.0]);
        assert!(ChannelRealization::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(ChannelRealization::new(vec![1.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn transmit_dot_product() {
        let c = cfg(2, 1);
        let mut p = c.params().clone();
        p.sigma_y_sq = 0.0;
        let c = SystemConfig::new(p).unwrap();
        let ch = ChannelRealization::new(vec![0.5, 1.0], vec![1.0, 1.0]).unwrap();
        let x = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        let out = transmit(&x, &ch, &c, &mut stream(0, Purpose::ReceiverNoise, &[])).unwrap();
        assert_eq!(out.y[0], 2.5);
        assert_eq!(out.z[0], 3.0);
    }

    #[test]
    fn transmit_zero_signal_zero_noise() {
        let mut p = SystemParams::isotropic(3, 2, 1.0, 0.0, 0.0);
        p.sigma_z_sq = 0.0;
        let c = SystemConfig::new(p).unwrap();
        let ch = ChannelRealization::new(vec![0.5, 1.0, 3.0], vec![1.0, 1.0, 1.0]).unwrap();
        let out = transmit(
            &DMatrix::zeros(2, 3),
            &ch,
            &c,
            &mut stream(0, Purpose::ReceiverNoise, &[]),
        )
        .unwrap();
        assert_eq!(out.y, DVector::zeros(2));
    }

    #[test]
    fn transmit_common_signal_sums_gains() {
        let mut p = SystemParams::isotropic(3, 2, 1.0, 0.0, 0.0);
        p.sigma_z_sq = 0.0;
        let c = SystemConfig::new(p).unwrap();
        let ch = ChannelRealization::new(vec![0.5, 1.0, 3.0], vec![1.0, 2.0, 1.0]).unwrap();
        let v = DVector::from_vec(vec![1.5, -2.0]);
        let x = &v * DVector::from_element(3, 1.0).transpose();
        let out = transmit(&x, &ch, &c, &mut stream(0, Purpose::ReceiverNoise, &[])).unwrap();
        assert!((out.y - &v * 4.5).amax() < 1e-15);
    }

    #[test]
    fn transmit_shape_mismatch() {
        let c = cfg(3, 1);
        let ch = ChannelRealization::new(vec![0.5, 1.0, 3.0], vec![1.0, 2.0, 1.0]).unwrap();
        let r = transmit(
            &DMatrix::zeros(1, 2),
            &ch,
            &c,
            &mut stream(0, Purpose::ReceiverNoise, &[]),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn transmit_is_linear_with_shared_noise() {
        let mut p = SystemParams::isotropic(3, 2, 1.0, 0.3, 0.2);
        p.sigma_h = 1.0;
        let c = SystemConfig::new(p).unwrap();
        let ch = ChannelRealization::new(vec![0.5, 1.0, 3.0], vec![1.0, 2.0, 0.4]).unwrap();
        let x1 = DMatrix::from_row_slice(2, 3, &[1.0, -2.0, 0.5, 0.3, 0.0, 4.0]);
        let x2 = DMatrix::from_row_slice(2, 3, &[-1.0, 0.5, 2.0, 1.0, 1.0, -3.0]);
        let (a, b) = (0.7, -1.3);
        let combo = &x1 * a + &x2 * b;
        let noisy = transmit(&combo, &ch, &c, &mut stream(9, Purpose::ReceiverNoise, &[])).unwrap();
        let noise = transmit(
            &DMatrix::zeros(2, 3),
            &ch,
            &c,
            &mut stream(9, Purpose::ReceiverNoise, &[]),
        )
        .unwrap();
        let (y1, z1) = transmit_noiseless(&x1, &ch).unwrap();
        let (y2, z2) = transmit_noiseless(&x2, &ch).unwrap();
        assert!((noisy.y - (y1 * a + y2 * b + noise.y)).amax() < 1e-12);
        assert!((noisy.z - (z1 * a + z2 * b + noise.z)).amax() < 1e-12);
    }
}
