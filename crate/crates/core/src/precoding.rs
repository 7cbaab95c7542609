//! Zero-forced artificial-noise precoders.
//!
//! The artificial noise of all users is `W = V A` where the rows of the
//! `(M−1) × M` matrix `A` span the null space of the legitimate channel, so
//! `W h = 0`. The proposed design starts from the reduced-row-echelon basis
//! `A′` and rescales its rows, `A = diag(d) A′`. The squared scalings
//! `d_m²` enter the per-user power constraints linearly, which turns the
//! power allocation into a continuous knapsack.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::ChannelRealization;
use crate::knapsack::solve_continuous_knapsack;
use crate::math::{sqrt, PI};
use crate::model::SystemConfig;
use crate::{Error, Result};

/// Relative slack for the zero-forcing check `‖A h‖ <= tol (1 + ‖A‖_F ‖h‖)`.
pub const ZERO_FORCING_TOL: f64 = 1e-9;
/// Absolute slack on the per-user power constraints.
pub const POWER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrecoderMethod {
    /// Row-scaled echelon basis maximizing the expected eavesdropper noise.
    RreUnknownCsi,
    /// Row-scaled echelon basis maximizing the realized eavesdropper noise.
    RreKnownCsi,
    /// Orthonormal null-space basis with one common scale.
    NaiveSvd,
    /// No artificial noise.
    NoNoise,
}

impl PrecoderMethod {
    pub const ALL: [PrecoderMethod; 4] = [
        PrecoderMethod::NoNoise,
        PrecoderMethod::NaiveSvd,
        PrecoderMethod::RreUnknownCsi,
        PrecoderMethod::RreKnownCsi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PrecoderMethod::RreUnknownCsi => "rre_unknown_csi",
            PrecoderMethod::RreKnownCsi => "rre_known_csi",
            PrecoderMethod::NaiveSvd => "naive_svd",
            PrecoderMethod::NoNoise => "no_noise",
        }
    }

    /// Stable numeric id used in seed derivation.
    pub fn id(self) -> u64 {
        match self {
            PrecoderMethod::RreUnknownCsi => 0,
            PrecoderMethod::RreKnownCsi => 1,
            PrecoderMethod::NaiveSvd => 2,
            PrecoderMethod::NoNoise => 3,
        }
    }

    pub fn needs_eavesdropper_csi(self) -> bool {
        self == PrecoderMethod::RreKnownCsi
    }
}

impl fmt::Display for PrecoderMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PrecoderMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PrecoderMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| Error::Domain(alloc::format!("unknown precoder method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    matrix: DMatrix<f64>,
    d_sq: Vec<f64>,
    method: PrecoderMethod,
}

impl Precoder {
    /// Wraps an externally supplied matrix (for example a loaded dump). The
    /// row scalings are unknown and left at zero.
    pub fn from_matrix(matrix: DMatrix<f64>, method: PrecoderMethod) -> Self {
        let rows = matrix.nrows();
        Precoder {
            matrix,
            d_sq: vec![0.0; rows],
            method,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
    /// Squared row scalings `d_m²`.
    pub fn d_sq(&self) -> &[f64] {
        &self.d_sq
    }
    pub fn method(&self) -> PrecoderMethod {
        self.method
    }
    pub fn num_users(&self) -> usize {
        self.matrix.ncols()
    }

    /// `‖a_m‖²` for every column, i.e. the artificial-noise power of user m.
    pub fn column_norms_sq(&self) -> Vec<f64> {
        self.matrix.column_iter().map(|c| c.norm_squared()).collect()
    }

    pub fn zero_forcing_residual(&self, h: &[f64]) -> Result<f64> {
        check_len("legitimate channel", self.num_users(), h.len())?;
        Ok((&self.matrix * DVector::from_column_slice(h)).norm())
    }

    pub fn is_zero_forcing(&self, h: &[f64]) -> Result<bool> {
        let residual = self.zero_forcing_residual(h)?;
        let scale = 1.0 + self.matrix.norm() * DVector::from_column_slice(h).norm();
        Ok(residual <= ZERO_FORCING_TOL * scale)
    }

    /// Every user's noise power stays within its budget (up to [`POWER_TOL`]).
    pub fn respects_budget(&self, budget: &NoiseBudget) -> bool {
        budget.per_user.len() == self.num_users()
            && self
                .column_norms_sq()
                .iter()
                .zip(&budget.per_user)
                .all(|(p, b)| *p <= b + POWER_TOL)
    }
}

/// Power left for artificial noise at each user, `P − c² / h_m²`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBudget {
    per_user: Vec<f64>,
}

impl NoiseBudget {
    pub fn new(per_user: Vec<f64>) -> Result<Self> {
        if let Some((user, &budget)) = per_user.iter().enumerate().find(|(_, b)| !(**b >= 0.0)) {
            return Err(Error::InfeasibleBudget { user, budget });
        }
        Ok(NoiseBudget { per_user })
    }

    pub fn per_user(&self) -> &[f64] {
        &self.per_user
    }
}

/// Computes the per-user noise budget for scaling `c²`. Rounding residue
/// within `1e-12 · max(P, 1)` below zero is clamped to zero.
pub fn noise_budget(cfg: &SystemConfig, h: &[f64], c_sq: f64) -> Result<NoiseBudget> {
    let p = cfg.power_limit();
    let clamp = 1e-12 * p.max(1.0);
    let per_user = h
        .iter()
        .map(|hm| {
            let b = p - c_sq / (hm * hm);
            if b < 0.0 && b >= -clamp {
                0.0
            } else {
                b
            }
        })
        .collect();
    NoiseBudget::new(per_user)
}

/// Reduced-row-echelon null-space basis: row `i` is `e_i` in the first `M−1`
/// coordinates with last entry `−h_i / h_M`.
pub fn build_rre_basis(h: &[f64]) -> Result<DMatrix<f64>> {
    let m = validate_channel(h)?;
    let h_last = h[m - 1];
    let mut a = DMatrix::zeros(m - 1, m);
    for i in 0..m - 1 {
        a[(i, i)] = 1.0;
        a[(i, m - 1)] = -h[i] / h_last;
    }
    Ok(a)
}

/// Per-row objective weights of the unknown-CSI program,
/// `x² − (π/2) x + 1` with `x = h_m / h_M`. Always positive.
pub fn unknown_csi_coefficients(h: &[f64]) -> Result<Vec<f64>> {
    let m = validate_channel(h)?;
    let h_last = h[m - 1];
    Ok(h[..m - 1]
        .iter()
        .map(|hm| {
            let x = hm / h_last;
            x * x - 0.5 * PI * x + 1.0
        })
        .collect())
}

/// Per-row objective weights of the known-CSI program,
/// `(h_m / h_M · g_M − g_m)²`. Values lost to cancellation (below `1e-12`
/// of the uncancelled magnitude) are reported as exactly zero.
pub fn known_csi_coefficients(h: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    let m = validate_channel(h)?;
    check_len("eavesdropper channel", m, g.len())?;
    let (h_last, g_last) = (h[m - 1], g[m - 1]);
    Ok(h[..m - 1]
        .iter()
        .zip(g)
        .map(|(hm, gm)| {
            let aligned = hm / h_last * g_last;
            let diff = aligned - gm;
            if diff.abs() <= 1e-12 * (aligned.abs() + gm.abs()) {
                0.0
            } else {
                diff * diff
            }
        })
        .collect())
}

/// Coupling weights `h_m² / h_M²` (user M's share of row m's power).
fn coupling_weights(h: &[f64]) -> Vec<f64> {
    let h_last = h[h.len() - 1];
    h[..h.len() - 1]
        .iter()
        .map(|hm| (hm / h_last) * (hm / h_last))
        .collect()
}

fn rre_from_coefficients(
    h: &[f64],
    coefficients: &[f64],
    budget: &NoiseBudget,
    method: PrecoderMethod,
) -> Result<Precoder> {
    let m = h.len();
    check_len("noise budget", m, budget.per_user.len())?;
    let weights = coupling_weights(h);
    let sol = solve_continuous_knapsack(
        coefficients,
        &weights,
        &budget.per_user[..m - 1],
        budget.per_user[m - 1],
    )?;
    let basis = build_rre_basis(h)?;
    let scale = DVector::from_iterator(m - 1, sol.x.iter().map(|d| sqrt(*d)));
    let matrix = DMatrix::from_diagonal(&scale) * basis;
    Ok(Precoder {
        matrix,
        d_sq: sol.x,
        method,
    })
}

/// Maximizes `E‖A g‖²` over Rayleigh `g` subject to the per-user budgets.
pub fn optimize_unknown_csi(h: &[f64], budget: &NoiseBudget) -> Result<Precoder> {
    let coefficients = unknown_csi_coefficients(h)?;
    rre_from_coefficients(h, &coefficients, budget, PrecoderMethod::RreUnknownCsi)
}

/// Maximizes the realized `‖A g‖²` for a known eavesdropper channel.
pub fn optimize_known_csi(h: &[f64], g: &[f64], budget: &NoiseBudget) -> Result<Precoder> {
    let coefficients = known_csi_coefficients(h, g)?;
    rre_from_coefficients(h, &coefficients, budget, PrecoderMethod::RreKnownCsi)
}

/// `E‖A g‖² = σ_g² Σ d_m² (2x² − πx + 2)` for the row-scaled echelon basis
/// and `g_m` i.i.d. Rayleigh(σ_g), with `x = h_m / h_M`.
pub fn expected_noise_power_at_eve(h: &[f64], d_sq: &[f64], sigma_g: f64) -> Result<f64> {
    let coefficients = unknown_csi_coefficients(h)?;
    check_len("row scalings", h.len() - 1, d_sq.len())?;
    Ok(2.0 * sigma_g * sigma_g * coefficients.iter().zip(d_sq).map(|(c, d)| c * d).sum::<f64>())
}

/// `E‖A g‖²` for any `A` and `g_m` i.i.d. Rayleigh(σ_g), from
/// `E[g_m²] = 2σ_g²` and `E[g_i g_j] = (π/2) σ_g²` for `i ≠ j`.
pub fn expected_noise_power_general(a: &DMatrix<f64>, sigma_g: f64) -> f64 {
    let gram = a.transpose() * a;
    let s2 = sigma_g * sigma_g;
    (PI / 2.0) * s2 * gram.sum() + (2.0 - PI / 2.0) * s2 * gram.trace()
}

/// `‖A g‖²` by direct matrix-vector evaluation.
pub fn realized_noise_power_at_eve(a: &DMatrix<f64>, g: &[f64]) -> Result<f64> {
    check_len("eavesdropper channel", a.ncols(), g.len())?;
    Ok((a * DVector::from_column_slice(g)).norm_squared())
}

/// `‖A g‖² = Σ d_m² (h_m / h_M · g_M − g_m)²` for the row-scaled echelon
/// basis, evaluated from the scalings alone.
pub fn rre_noise_power_at_eve(h: &[f64], d_sq: &[f64], g: &[f64]) -> Result<f64> {
    let m = validate_channel(h)?;
    check_len("eavesdropper channel", m, g.len())?;
    check_len("row scalings", m - 1, d_sq.len())?;
    let (h_last, g_last) = (h[m - 1], g[m - 1]);
    Ok(d_sq
        .iter()
        .zip(h)
        .zip(g)
        .map(|((d, hm), gm)| {
            let diff = hm / h_last * g_last - gm;
            d * diff * diff
        })
        .sum())
}

/// Orthonormal basis of the null space of `hᵀ` as the rows of an
/// `(M−1) × M` matrix: the trailing right singular vectors of the `1 × M`
/// matrix `hᵀ`, taken from its Householder reflector. The first nonzero entry
/// of each row is made positive.
pub fn orthonormal_null_space(h: &[f64]) -> Result<DMatrix<f64>> {
    let m = validate_channel(h)?;
    let v = DVector::from_column_slice(h).normalize();
    // u = v + e_1 (v_1 > 0); H = I − 2 u uᵀ / uᵀu maps v to −e_1.
    let mut u = v.clone();
    u[0] += 1.0;
    let reflector = DMatrix::identity(m, m) - (&u * u.transpose()) * (2.0 / u.norm_squared());
    let mut basis = reflector.rows(1, m - 1).into_owned();
    for mut row in basis.row_iter_mut() {
        if let Some(first) = row.iter().copied().find(|x| x.abs() > 1e-12) {
            if first < 0.0 {
                row.neg_mut();
            }
        }
    }
    Ok(basis)
}

/// Orthonormal null-space basis scaled by the largest common factor that
/// keeps every user within budget: `β² = min_m budget_m / ‖a′_m‖²`.
pub fn naive_svd_precoder(h: &[f64], budget: &NoiseBudget) -> Result<Precoder> {
    let m = validate_channel(h)?;
    check_len("noise budget", m, budget.per_user.len())?;
    let basis = orthonormal_null_space(h)?;
    let beta_sq = basis
        .column_iter()
        .zip(&budget.per_user)
        .filter_map(|(col, b)| {
            let norm = col.norm_squared();
            (norm > 0.0).then(|| b / norm)
        })
        .fold(f64::INFINITY, f64::min);
    let beta_sq = if beta_sq.is_finite() { beta_sq } else { 0.0 };
    Ok(Precoder {
        matrix: basis * sqrt(beta_sq),
        d_sq: vec![beta_sq; m - 1],
        method: PrecoderMethod::NaiveSvd,
    })
}

/// `A = 0`.
pub fn no_noise_precoder(num_users: usize) -> Result<Precoder> {
    if num_users < 2 {
        return Err(Error::Precondition("the null-space basis needs at least two users"));
    }
    Ok(Precoder {
        matrix: DMatrix::zeros(num_users - 1, num_users),
        d_sq: vec![0.0; num_users - 1],
        method: PrecoderMethod::NoNoise,
    })
}

/// Builds the precoder of `method` for the channel and budget. Only
/// [`PrecoderMethod::RreKnownCsi`] looks at `g`.
pub fn design_precoder(method: PrecoderMethod, channel: &ChannelRealization, budget: &NoiseBudget) -> Result<Precoder> {
    match method {
        PrecoderMethod::RreUnknownCsi => optimize_unknown_csi(channel.h(), budget),
        PrecoderMethod::RreKnownCsi => optimize_known_csi(channel.h(), channel.g(), budget),
        PrecoderMethod::NaiveSvd => naive_svd_precoder(channel.h(), budget),
        PrecoderMethod::NoNoise => no_noise_precoder(channel.num_users()),
    }
}

/// Draws `W = V A` with `V` an `n × (M−1)` matrix of i.i.d. `N(0, 1/n)`
/// entries, so that `E‖w_m‖² = ‖a_m‖²` for every `n`.
pub fn sample_artificial_noise<R: Rng + ?Sized>(a: &DMatrix<f64>, n: usize, rng: &mut R) -> DMatrix<f64> {
    let std = if n == 0 { 0.0 } else { sqrt(1.0 / n as f64) };
    let v = DMatrix::from_fn(n, a.nrows(), |_, _| std * rng.sample::<f64, _>(StandardNormal));
    v * a
}

fn validate_channel(h: &[f64]) -> Result<usize> {
    if h.len() < 2 {
        return Err(Error::Precondition("the null-space basis needs at least two users"));
    }
    if h.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::Domain("legitimate channel coefficients must be positive".into()));
    }
    Ok(h.len())
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, found })
    }
}
