//! Choosing the signal scaling `c` from a quality-of-service target.
//!
//! The receiver's MSE requirement `μ` is turned into a squared scaling `c²`.
//! The closed-form route uses the largest input eigenvalue `λ_1`:
//!
//! ```text
//! c² = σ_y² (M − μ) / (M² k λ_1² − M (M − μ) λ_1)
//! ```
//!
//! The monotone route inverts `g(x) = Σ_i M x / ((M/λ_i) x + σ_y²/λ_k²)`
//! (with `λ_k` the smallest eigenvalue) at `1 − μ/M` by bisection. Both agree
//! when `Σ = I/k`. Every design must also respect `c² <= h_1² P`, the budget
//! of the weakest user when it sends no artificial noise.

use core::fmt;
use core::str::FromStr;

use crate::math::pairwise_sum;
use crate::model::SystemConfig;
use crate::{Error, Result};

const BISECTION_TOL: f64 = 1e-12;
const LIMIT_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScalingBound {
    /// Closed-form bound from the largest input eigenvalue.
    #[default]
    ClosedForm,
    /// Bisection on the monotone eigenvalue-sum function.
    ImprovedMonotone,
}

impl ScalingBound {
    pub fn as_str(self) -> &'static str {
        match self {
            ScalingBound::ClosedForm => "closed_form",
            ScalingBound::ImprovedMonotone => "improved_monotone",
        }
    }
}

impl fmt::Display for ScalingBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScalingBound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "closed_form" => Ok(ScalingBound::ClosedForm),
            "improved_monotone" => Ok(ScalingBound::ImprovedMonotone),
            other => Err(Error::Domain(alloc::format!("unknown scaling bound {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingDesign {
    pub c_sq: f64,
    pub mu: f64,
    pub bound: ScalingBound,
}

impl ScalingDesign {
    /// `c = 0`: nothing is transmitted and the receiver falls back to the
    /// prior mean.
    pub fn is_degenerate(&self) -> bool {
        self.c_sq == 0.0
    }
}

fn weakest(h: &[f64]) -> Result<f64> {
    let w = h.iter().copied().fold(f64::INFINITY, f64::min);
    if h.is_empty() || !(w > 0.0) {
        return Err(Error::Domain("legitimate channel must be nonempty and positive".into()));
    }
    Ok(w)
}

/// Largest admissible `c²` for the channel: `h_1² P`.
pub fn scaling_limit(cfg: &SystemConfig, h: &[f64]) -> Result<f64> {
    let h1 = weakest(h)?;
    Ok(h1 * h1 * cfg.power_limit())
}

/// Smallest achievable receiver MSE, reached at `c² = h_1² P`:
/// `M − h_1² P M² tr(Σ (h_1² P M Σ + σ_y² I)⁻¹ Σ)`.
pub fn feasible_mu_min(cfg: &SystemConfig, h: &[f64]) -> Result<f64> {
    let limit = scaling_limit(cfg, h)?;
    let m = cfg.num_users() as f64;
    let s2 = cfg.sigma_y_sq();
    if limit == 0.0 {
        return Ok(m);
    }
    let terms: alloc::vec::Vec<f64> = cfg.eigenvalues().iter().map(|l| l * l / (limit * m * l + s2)).collect();
    Ok(m - limit * m * m * pairwise_sum(&terms))
}

fn check_mu(cfg: &SystemConfig, h: &[f64], mu: f64) -> Result<()> {
    let m = cfg.num_users() as f64;
    let floor = feasible_mu_min(cfg, h)?;
    if !(mu <= m) || mu < floor - 1e-12 * m {
        return Err(Error::InfeasibleMse { mu, floor, max: m });
    }
    Ok(())
}

fn check_limit(cfg: &SystemConfig, h: &[f64], c_sq: f64) -> Result<()> {
    let limit = scaling_limit(cfg, h)?;
    if c_sq > limit * (1.0 + LIMIT_RTOL) {
        return Err(Error::InfeasibleScaling { c_sq, limit });
    }
    Ok(())
}

/// Closed-form scaling for MSE requirement `mu` (the lower end of the
/// admissible interval). `mu = M` yields the degenerate design `c = 0`.
pub fn scaling_from_mse(cfg: &SystemConfig, h: &[f64], mu: f64) -> Result<ScalingDesign> {
    check_mu(cfg, h, mu)?;
    let m = cfg.num_users() as f64;
    let k = cfg.dimension() as f64;
    let l1 = cfg.largest_eigenvalue();
    let gap = m - mu;
    let c_sq = if gap == 0.0 {
        0.0
    } else {
        let denom = m * m * k * l1 * l1 - m * gap * l1;
        if !(denom > 0.0) {
            return Err(Error::InfeasibleMse {
                mu,
                floor: feasible_mu_min(cfg, h)?,
                max: m,
            });
        }
        cfg.sigma_y_sq() * gap / denom
    };
    check_limit(cfg, h, c_sq)?;
    Ok(ScalingDesign {
        c_sq,
        mu,
        bound: ScalingBound::ClosedForm,
    })
}

/// `g(x) = Σ_i M x / ((M/λ_i) x + σ_y²/λ_k²)`, strictly increasing from
/// `g(0) = 0` towards `Σ_i λ_i`.
pub fn monotone_bound_function(cfg: &SystemConfig, x: f64) -> f64 {
    let m = cfg.num_users() as f64;
    let lk = cfg.smallest_eigenvalue();
    let offset = cfg.sigma_y_sq() / (lk * lk);
    cfg.eigenvalues()
        .iter()
        .map(|l| {
            let denom = m / l * x + offset;
            if denom == 0.0 {
                *l
            } else {
                m * x / denom
            }
        })
        .sum()
}

/// Scaling from the monotone bound: `c² = g⁻¹(1 − μ/M)`, found by bisection
/// on `[0, h_1² P]`. The upper end of the final bracket is returned, so
/// `g(c²) >= 1 − μ/M`.
pub fn scaling_improved_bound(cfg: &SystemConfig, h: &[f64], mu: f64) -> Result<ScalingDesign> {
    let m = cfg.num_users() as f64;
    if !(mu <= m) {
        return Err(Error::InfeasibleMse {
            mu,
            floor: feasible_mu_min(cfg, h)?,
            max: m,
        });
    }
    let target = 1.0 - mu / m;
    let limit = scaling_limit(cfg, h)?;
    if target <= 0.0 {
        return Ok(ScalingDesign {
            c_sq: 0.0,
            mu,
            bound: ScalingBound::ImprovedMonotone,
        });
    }
    if monotone_bound_function(cfg, limit) < target {
        return Err(Error::InfeasibleMse {
            mu,
            floor: m * (1.0 - monotone_bound_function(cfg, limit)),
            max: m,
        });
    }
    let (mut lo, mut hi) = (0.0, limit);
    for _ in 0..200 {
        if hi - lo <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if monotone_bound_function(cfg, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ScalingDesign {
        c_sq: hi,
        mu,
        bound: ScalingBound::ImprovedMonotone,
    })
}

pub fn design_scaling(cfg: &SystemConfig, h: &[f64], mu: f64, bound: ScalingBound) -> Result<ScalingDesign> {
    match bound {
        ScalingBound::ClosedForm => scaling_from_mse(cfg, h, mu),
        ScalingBound::ImprovedMonotone => scaling_improved_bound(cfg, h, mu),
    }
}

/// Receive SNR `c² M / σ_y²` (linear).
pub fn snr_of(cfg: &SystemConfig, c_sq: f64) -> f64 {
    c_sq * cfg.num_users() as f64 / cfg.sigma_y_sq()
}

/// Inverse of [`snr_of`]. With a channel supplied, errors when the result
/// exceeds `h_1² P`.
pub fn c_sq_of_snr(cfg: &SystemConfig, snr: f64, h: Option<&[f64]>) -> Result<f64> {
    if !(snr >= 0.0) {
        return Err(Error::Domain(alloc::format!("SNR must be nonnegative, got {snr}")));
    }
    let c_sq = snr * cfg.sigma_y_sq() / cfg.num_users() as f64;
    if let Some(h) = h {
        check_limit(cfg, h, c_sq)?;
    }
    Ok(c_sq)
}

/// Largest achievable receive SNR, `h_1² P M / σ_y²`.
pub fn max_snr(cfg: &SystemConfig, h: &[f64]) -> Result<f64> {
    Ok(snr_of(cfg, scaling_limit(cfg, h)?))
}
