//! System parameters and the Gaussian input model.

use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::math::sqrt;
use crate::{Error, Result};

const TRACE_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-12;
const ISOTROPY_TOL: f64 = 1e-12;

/// Raw parameters of the system. Turned into a [`SystemConfig`] with
/// [`SystemConfig::new`], which precomputes the covariance spectrum.
///
/// The signal dimension is both the input dimension `k` and the number of
/// channel uses `n`: transmission is uncoded, so the two coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub num_users: usize,
    pub dimension: usize,
    /// Per-user transmit power limit `P`.
    pub power_limit: f64,
    /// Input covariance `Σ` (k × k).
    pub covariance: DMatrix<f64>,
    /// Noise variance at the legitimate receiver.
    pub sigma_y_sq: f64,
    /// Noise variance at the eavesdropper.
    pub sigma_z_sq: f64,
    /// Rayleigh scale of the legitimate channel.
    pub sigma_h: f64,
    /// Rayleigh scale of the eavesdropper channel.
    pub sigma_g: f64,
}

impl SystemParams {
    /// Isotropic inputs (`Σ = I/k`) with unit Rayleigh scales.
    pub fn isotropic(num_users: usize, dimension: usize, power_limit: f64, sigma_y_sq: f64, sigma_z_sq: f64) -> Self {
        SystemParams {
            num_users,
            dimension,
            power_limit,
            covariance: isotropic_covariance(dimension),
            sigma_y_sq,
            sigma_z_sq,
            sigma_h: 1.0,
            sigma_g: 1.0,
        }
    }

    /// The reference simulation setup: ten users, scalar inputs, `P = 1`,
    /// `σ_y² = 0.1` and a noiseless eavesdropper.
    pub fn reference() -> Self {
        Self::isotropic(10, 1, 1.0, 0.1, 0.0)
    }
}

pub fn isotropic_covariance(dimension: usize) -> DMatrix<f64> {
    if dimension == 0 {
        return DMatrix::zeros(0, 0);
    }
    DMatrix::identity(dimension, dimension) / dimension as f64
}

/// Validated-shape system configuration with the covariance
/// eigendecomposition cached. Semantic invariants (unit trace, positive
/// definiteness, at least two users) are reported by
/// [`SystemConfig::validate`] rather than rejected, so that invalid setups can
/// still be inspected.
#[derive(Debug, Clone)]
pub struct SystemConfig {
    params: SystemParams,
    /// Eigenvalues of `Σ`, descending.
    eigenvalues: Vec<f64>,
    /// Symmetric square root of `Σ` (negative eigenvalues clamped to zero).
    sqrt_covariance: DMatrix<f64>,
    isotropic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigViolation {
    TooFewUsers(usize),
    ZeroDimension,
    NonPositivePower(f64),
    NonUnitTrace(f64),
    AsymmetricCovariance(f64),
    NotPositiveDefinite(f64),
    NegativeNoiseVariance(f64),
    NonPositiveFadingScale(f64),
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigViolation::TooFewUsers(m) => {
                write!(f, "need at least 2 users for a nonempty null-space basis, got {m}")
            }
            ConfigViolation::ZeroDimension => write!(f, "signal dimension must be positive"),
            ConfigViolation::NonPositivePower(p) => write!(f, "power limit must be positive, got {p}"),
            ConfigViolation::NonUnitTrace(t) => write!(f, "input covariance must have unit trace, got {t}"),
            ConfigViolation::AsymmetricCovariance(d) => {
                write!(f, "input covariance is not symmetric (max deviation {d:e})")
            }
            ConfigViolation::NotPositiveDefinite(l) => {
                write!(
                    f,
                    "input covariance is not positive definite (smallest eigenvalue {l:e})"
                )
            }
            ConfigViolation::NegativeNoiseVariance(v) => write!(f, "noise variance must be >= 0, got {v}"),
            ConfigViolation::NonPositiveFadingScale(s) => write!(f, "Rayleigh scale must be positive, got {s}"),
        }
    }
}

impl SystemConfig {
    /// Errors only when the covariance shape disagrees with the dimension or
    /// a parameter is not finite.
    pub fn new(params: SystemParams) -> Result<Self> {
        let k = params.dimension;
        if params.covariance.nrows() != k || params.covariance.ncols() != k {
            return Err(Error::DimensionMismatch {
                what: "input covariance",
                expected: k,
                found: params.covariance.nrows().max(params.covariance.ncols()),
            });
        }
        let scalars = [
            params.power_limit,
            params.sigma_y_sq,
            params.sigma_z_sq,
            params.sigma_h,
            params.sigma_g,
        ];
        if scalars.iter().chain(params.covariance.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("system parameters must be finite".into()));
        }

        let (eigenvalues, sqrt_covariance) = if k == 0 {
            (Vec::new(), DMatrix::zeros(0, 0))
        } else {
            let sym = (&params.covariance + params.covariance.transpose()) * 0.5;
            let eig = sym.symmetric_eigen();
            let mut order: Vec<usize> = (0..k).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
            let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
            let root = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| sqrt(l.max(0.0))));
            let sqrt_cov = &eig.eigenvectors * root * eig.eigenvectors.transpose();
            (values, sqrt_cov)
        };
        let iso = isotropic_covariance(k);
        let isotropic = k > 0 && (&params.covariance - iso).amax() <= ISOTROPY_TOL;

        Ok(SystemConfig {
            params,
            eigenvalues,
            sqrt_covariance,
            isotropic,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }
    pub fn num_users(&self) -> usize {
        self.params.num_users
    }
    pub fn dimension(&self) -> usize {
        self.params.dimension
    }
    pub fn power_limit(&self) -> f64 {
        self.params.power_limit
    }
    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.params.covariance
    }
    pub fn sigma_y_sq(&self) -> f64 {
        self.params.sigma_y_sq
    }
    pub fn sigma_z_sq(&self) -> f64 {
        self.params.sigma_z_sq
    }
    pub fn sigma_h(&self) -> f64 {
        self.params.sigma_h
    }
    pub fn sigma_g(&self) -> f64 {
        self.params.sigma_g
    }

    /// Eigenvalues of `Σ`, sorted descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
    pub fn largest_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }
    pub fn smallest_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
    pub fn sqrt_covariance(&self) -> &DMatrix<f64> {
        &self.sqrt_covariance
    }

    /// `Σ = I/k` to within 1e-12 entrywise.
    pub fn is_isotropic(&self) -> bool {
        self.isotropic
    }

    /// Every violated invariant; empty when the configuration is usable.
    pub fn validate(&self) -> Vec<ConfigViolation> {
        let p = &self.params;
        let mut out = Vec::new();
        if p.num_users < 2 {
            out.push(ConfigViolation::TooFewUsers(p.num_users));
        }
        if p.dimension == 0 {
            out.push(ConfigViolation::ZeroDimension);
        }
        if p.power_limit <= 0.0 {
            out.push(ConfigViolation::NonPositivePower(p.power_limit));
        }
        for v in [p.sigma_y_sq, p.sigma_z_sq] {
            if v < 0.0 {
                out.push(ConfigViolation::NegativeNoiseVariance(v));
            }
        }
        for s in [p.sigma_h, p.sigma_g] {
            if s <= 0.0 {
                out.push(ConfigViolation::NonPositiveFadingScale(s));
            }
        }
        if p.dimension > 0 {
            let trace = p.covariance.trace();
            if (trace - 1.0).abs() > TRACE_TOL {
                out.push(ConfigViolation::NonUnitTrace(trace));
            }
            let asym = (&p.covariance - p.covariance.transpose()).amax();
            if asym > SYMMETRY_TOL {
                out.push(ConfigViolation::AsymmetricCovariance(asym));
            }
            let smallest = self.smallest_eigenvalue();
            if smallest <= 0.0 {
                out.push(ConfigViolation::NotPositiveDefinite(smallest));
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v))
        }
    }
}

/// One realization of the users' pre-processed inputs and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct InputBatch {
    gammas: Vec<DVector<f64>>,
    target: DVector<f64>,
}

impl InputBatch {
    pub fn new(gammas: Vec<DVector<f64>>) -> Result<Self> {
        let k = gammas.first().map_or(0, |g| g.len());
        if let Some(bad) = gammas.iter().find(|g| g.len() != k) {
            return Err(Error::DimensionMismatch {
                what: "input vector",
                expected: k,
                found: bad.len(),
            });
        }
        let mut target = DVector::zeros(k);
        for g in &gammas {
            target += g;
        }
        Ok(InputBatch { gammas, target })
    }

    pub fn gammas(&self) -> &[DVector<f64>] {
        &self.gammas
    }

    /// The computation target `s = Σ_m γ_m`.
    pub fn target(&self) -> &DVector<f64> {
        &self.target
    }
}

/// Draws `γ_m ~ N(0, Σ)` independently for every user.
pub fn sample_inputs<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> InputBatch {
    let k = cfg.dimension();
    let gammas = (0..cfg.num_users())
        .map(|_| {
            let white = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
            cfg.sqrt_covariance() * white
        })
        .collect();
    InputBatch::new(gammas).expect("inputs share the configured dimension")
}
