//! Monte Carlo trials over the receive-SNR grid.
//!
//! A trial samples one channel, scales the inputs to hit the requested
//! receive SNR, designs the method's precoder and evaluates both levels in
//! closed form. A hash-selected subset of trials also runs the full
//! sample-and-estimate chain.
//!
//! Streams:
//!
//! * channel: `(master, Channel, trial)`, shared by every SNR point and
//!   method, so comparisons across the grid and across methods are paired;
//! * selection: `(master, Selection, trial)`, one uniform per trial;
//! * empirical draws: `(master, Empirical, snr index, method id, trial)`.
//!
//! Aggregates are pairwise sums in trial-index order, so they do not depend
//! on how trials were scheduled.

use alloc::vec::Vec;

use crate::channel::{sample_channel, ChannelMode, ChannelProtocol};
use crate::math::{db_to_linear, linear_to_db, mean_and_standard_error};
use crate::model::SystemConfig;
use crate::precoding::{design_precoder, noise_budget, PrecoderMethod};
use crate::rng::{derive_seed, stream, unit_interval, Purpose};
use crate::scaling::max_snr;
use crate::security::{SchemeDesign, SecurityReport};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrialKey {
    pub master_seed: u64,
    pub snr_index: u64,
    pub trial: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialSettings {
    /// Number of sampled draws for the empirical check; zero skips it.
    pub empirical_draws: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrialOutcome {
    Accepted(SecurityReport),
    /// The sampled channel cannot support the requested SNR.
    Rejected,
}

impl TrialOutcome {
    pub fn report(&self) -> Option<&SecurityReport> {
        match self {
            TrialOutcome::Accepted(r) => Some(r),
            TrialOutcome::Rejected => None,
        }
    }
}

/// Runs one trial at linear receive SNR `snr`.
pub fn run_trial(
    cfg: &SystemConfig,
    proto: &ChannelProtocol,
    snr: f64,
    method: PrecoderMethod,
    key: TrialKey,
    settings: TrialSettings,
) -> Result<TrialOutcome> {
    if !(snr >= 0.0) || !snr.is_finite() {
        return Err(Error::Domain(alloc::format!(
            "SNR must be finite and nonnegative, got {snr}"
        )));
    }
    let channel = sample_channel(cfg, proto, &mut stream(key.master_seed, Purpose::Channel, &[key.trial]));
    let c_sq = snr * cfg.sigma_y_sq() / cfg.num_users() as f64;
    let budget = match noise_budget(cfg, channel.h(), c_sq) {
        Ok(b) => b,
        Err(Error::InfeasibleBudget { .. }) => return Ok(TrialOutcome::Rejected),
        Err(e) => return Err(e),
    };
    let precoder = design_precoder(method, &channel, &budget)?;
    let design = SchemeDesign::new(cfg, channel, c_sq, precoder)?;
    let mut report = design.report()?;
    if settings.empirical_draws > 0 {
        let mut rng = stream(
            key.master_seed,
            Purpose::Empirical,
            &[key.snr_index, method.id(), key.trial],
        );
        report.empirical = Some(design.empirical_mse(settings.empirical_draws, &mut rng)?);
    }
    Ok(TrialOutcome::Accepted(report))
}

/// Whether `trial` is in the empirically checked subset.
pub fn is_empirical_trial(master_seed: u64, trial: u64, fraction: f64) -> bool {
    fraction >= 1.0 || unit_interval(derive_seed(master_seed, Purpose::Selection, &[trial])) < fraction
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Receive SNR grid in dB, ascending.
    pub snr_grid_db: Vec<f64>,
    pub trials: u64,
    pub master_seed: u64,
    pub methods: Vec<PrecoderMethod>,
    pub empirical_check_fraction: f64,
    pub empirical_draws: usize,
}

impl SweepSpec {
    pub fn new(snr_grid_db: Vec<f64>, trials: u64, master_seed: u64, methods: Vec<PrecoderMethod>) -> Self {
        SweepSpec {
            snr_grid_db,
            trials,
            master_seed,
            methods,
            empirical_check_fraction: 0.0,
            empirical_draws: 0,
        }
    }

    pub fn with_empirical(mut self, fraction: f64, draws: usize) -> Self {
        self.empirical_check_fraction = fraction;
        self.empirical_draws = draws;
        self
    }

    /// Integer grid `lo..=hi` dB.
    pub fn integer_grid(lo: i32, hi: i32) -> Vec<f64> {
        (lo..=hi).map(f64::from).collect()
    }

    /// In fixed-weakest mode, also checks that the top of the grid is reachable.
    pub fn validate(&self, cfg: &SystemConfig, proto: &ChannelProtocol) -> Result<()> {
        cfg.ensure_valid()?;
        if self.trials == 0 {
            return Err(Error::Domain("trials must be positive".into()));
        }
        if self.snr_grid_db.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("SNR grid entries must be finite".into()));
        }
        if self.snr_grid_db.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain("SNR grid must be strictly ascending".into()));
        }
        if !(0.0..=1.0).contains(&self.empirical_check_fraction) {
            return Err(Error::Domain(alloc::format!(
                "empirical check fraction must lie in [0, 1], got {}",
                self.empirical_check_fraction
            )));
        }
        let mut seen = Vec::new();
        for m in &self.methods {
            if seen.contains(m) {
                return Err(Error::Domain(alloc::format!("method {m} listed twice")));
            }
            seen.push(*m);
        }
        if proto.mode == ChannelMode::FixedWeakest {
            if !(proto.h1_fixed > 0.0) {
                return Err(Error::Domain("the fixed weakest coefficient must be positive".into()));
            }
            if let Some(&top) = self.snr_grid_db.last() {
                let h = [proto.h1_fixed];
                let limit = max_snr(cfg, &h)?;
                let snr = db_to_linear(top);
                if snr > limit {
                    return Err(Error::InfeasibleScaling {
                        c_sq: snr * cfg.sigma_y_sq() / cfg.num_users() as f64,
                        limit: limit * cfg.sigma_y_sq() / cfg.num_users() as f64,
                    });
                }
            }
        }
        Ok(())
    }

    /// `10 log10(h_1² P M / σ_y²)` for the fixed-weakest protocol.
    pub fn max_snr_db(cfg: &SystemConfig, proto: &ChannelProtocol) -> Result<f64> {
        Ok(linear_to_db(max_snr(cfg, &[proto.h1_fixed])?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    /// Standard error of the mean; NaN with fewer than two samples.
    pub se: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let (mean, se) = mean_and_standard_error(values);
        Stat { mean, se }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub snr_db: f64,
    pub method: PrecoderMethod,
    /// Trials attempted, including rejected ones.
    pub trials: u64,
    pub d_closed: Stat,
    pub s_closed: Stat,
    /// Over the empirically checked trials; `None` when there were none.
    pub d_emp: Option<Stat>,
    pub s_emp: Option<Stat>,
    pub rejected_fraction: f64,
}

impl SweepRow {
    /// Aggregates trial outcomes given in trial-index order.
    pub fn aggregate(snr_db: f64, method: PrecoderMethod, outcomes: &[TrialOutcome]) -> Self {
        let reports: Vec<&SecurityReport> = outcomes.iter().filter_map(TrialOutcome::report).collect();
        let d: Vec<f64> = reports.iter().map(|r| r.d_closed).collect();
        let s: Vec<f64> = reports.iter().map(|r| r.s_closed).collect();
        let emp: Vec<_> = reports.iter().filter_map(|r| r.empirical).collect();
        let (d_emp, s_emp) = if emp.is_empty() {
            (None, None)
        } else {
            let de: Vec<f64> = emp.iter().map(|e| e.d_mean).collect();
            let se: Vec<f64> = emp.iter().map(|e| e.s_mean).collect();
            (Some(Stat::of(&de)), Some(Stat::of(&se)))
        };
        let trials = outcomes.len() as u64;
        let rejected = trials - reports.len() as u64;
        SweepRow {
            snr_db,
            method,
            trials,
            d_closed: Stat::of(&d),
            s_closed: Stat::of(&s),
            d_emp,
            s_emp,
            rejected_fraction: if trials == 0 {
                0.0
            } else {
                rejected as f64 / trials as f64
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub snr_grid_db: Vec<f64>,
    pub methods: Vec<PrecoderMethod>,
    /// Grid-major: all methods for the first SNR, then the next SNR.
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, snr_index: usize, method: PrecoderMethod) -> Option<&SweepRow> {
        let j = self.methods.iter().position(|m| *m == method)?;
        self.rows.get(snr_index * self.methods.len() + j)
    }

    /// Rows of one method across the grid.
    pub fn series(&self, method: PrecoderMethod) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.method == method).collect()
    }
}

/// One `(SNR, method)` cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub snr_index: usize,
    pub snr_db: f64,
    pub method: PrecoderMethod,
}

/// The cells of `spec` in output order.
pub fn sweep_cells(spec: &SweepSpec) -> Vec<SweepCell> {
    let mut cells = Vec::with_capacity(spec.snr_grid_db.len() * spec.methods.len());
    for (snr_index, &snr_db) in spec.snr_grid_db.iter().enumerate() {
        for &method in &spec.methods {
            cells.push(SweepCell {
                snr_index,
                snr_db,
                method,
            });
        }
    }
    cells
}

/// Runs trial `trial` of `cell`.
pub fn run_cell_trial(
    cfg: &SystemConfig,
    proto: &ChannelProtocol,
    spec: &SweepSpec,
    cell: SweepCell,
    trial: u64,
) -> Result<TrialOutcome> {
    let key = TrialKey {
        master_seed: spec.master_seed,
        snr_index: cell.snr_index as u64,
        trial,
    };
    let settings = TrialSettings {
        empirical_draws: if spec.empirical_draws > 0
            && is_empirical_trial(spec.master_seed, trial, spec.empirical_check_fraction)
        {
            spec.empirical_draws
        } else {
            0
        },
    };
    run_trial(cfg, proto, db_to_linear(cell.snr_db), cell.method, key, settings)
}

/// Runs a sweep, handing each cell's trials to `map_trials`, which must
/// return the outcomes in trial-index order. This is the hook for parallel
/// executors; [`run_sweep`] uses a plain loop.
pub fn run_sweep_with<F>(
    cfg: &SystemConfig,
    proto: &ChannelProtocol,
    spec: &SweepSpec,
    mut map_trials: F,
) -> Result<SweepResult>
where
    F: FnMut(u64, &(dyn Fn(u64) -> Result<TrialOutcome> + Sync)) -> Vec<Result<TrialOutcome>>,
{
    spec.validate(cfg, proto)?;
    let mut rows = Vec::with_capacity(spec.snr_grid_db.len() * spec.methods.len());
    for cell in sweep_cells(spec) {
        let run = |trial: u64| run_cell_trial(cfg, proto, spec, cell, trial);
        let outcomes = map_trials(spec.trials, &run).into_iter().collect::<Result<Vec<_>>>()?;
        if outcomes.len() as u64 != spec.trials {
            return Err(Error::DimensionMismatch {
                what: "trial outcomes",
                expected: spec.trials as usize,
                found: outcomes.len(),
            });
        }
        rows.push(SweepRow::aggregate(cell.snr_db, cell.method, &outcomes));
    }
    Ok(SweepResult {
        snr_grid_db: spec.snr_grid_db.clone(),
        methods: spec.methods.clone(),
        rows,
    })
}

pub fn run_sweep(cfg: &SystemConfig, proto: &ChannelProtocol, spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep_with(cfg, proto, spec, |n, run| (0..n).map(run).collect())
}
