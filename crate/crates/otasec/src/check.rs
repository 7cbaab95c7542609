//! Fast structural checks behind the `check` command.

use std::fmt::Write as _;

use otasec_core::channel::{sample_channel, ChannelProtocol};
use otasec_core::math::db_to_linear;
use otasec_core::model::SystemConfig;
use otasec_core::precoding::{design_precoder, noise_budget, PrecoderMethod, POWER_TOL, ZERO_FORCING_TOL};
use otasec_core::rng::{derive_seed, stream, unit_interval, Purpose};
use otasec_core::scaling::{c_sq_of_snr, design_scaling, scaling_limit, ScalingBound};
use otasec_core::security::SchemeDesign;
use otasec_core::sim::SweepSpec;
use otasec_core::DMatrix;

/// Relative tolerance between the scalar and the eigenvalue formulas.
const COROLLARY_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckItem {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckItem {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CheckReport {
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for i in &self.items {
            let _ = writeln!(
                out,
                "[{}] {}: {}",
                if i.passed { "PASS" } else { "FAIL" },
                i.name,
                i.detail
            );
        }
        let failed = self.items.iter().filter(|i| !i.passed).count();
        let _ = writeln!(out, "{} checks, {} failed", self.items.len(), failed);
        out
    }
}

/// Largest violation seen for one invariant over all instances.
#[derive(Debug, Default)]
struct Worst {
    value: f64,
    at: Option<(u64, PrecoderMethod)>,
    error: Option<String>,
}

impl Worst {
    fn record(&mut self, value: f64, at: (u64, PrecoderMethod)) {
        if value > self.value || self.at.is_none() {
            self.value = value;
            self.at = Some(at);
        }
    }

    fn item(&self, name: &str, tol: f64) -> CheckItem {
        if let Some(e) = &self.error {
            return CheckItem::new(name, false, e.clone());
        }
        let where_ = self
            .at
            .map_or(String::from("no instances"), |(i, m)| format!("instance {i}, {m}"));
        CheckItem::new(
            name,
            self.value <= tol,
            format!("max {:.3e} (tol {tol:e}) at {where_}", self.value),
        )
    }
}

/// Runs every check on `instances` sampled channels.
#[allow(clippy::too_many_arguments)]
pub fn run_checks(
    cfg: &SystemConfig,
    proto: &ChannelProtocol,
    spec: &SweepSpec,
    target_mu: Option<f64>,
    target_snr_db: Option<f64>,
    bound: ScalingBound,
    instances: u64,
    seed: u64,
) -> CheckReport {
    let mut report = CheckReport::default();
    let violations = cfg.validate();
    report.items.push(CheckItem::new(
        "config",
        violations.is_empty(),
        if violations.is_empty() {
            "system parameters valid".to_string()
        } else {
            violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
        },
    ));

    let reference_h = sample_channel(cfg, proto, &mut stream(seed, Purpose::Channel, &[0]))
        .h()
        .to_vec();
    if let Some(mu) = target_mu {
        let item = match design_scaling(cfg, &reference_h, mu, bound) {
            Ok(d) => CheckItem::new("feasibility", true, format!("mu = {mu} reached with c^2 = {}", d.c_sq)),
            Err(e) => CheckItem::new("feasibility", false, e.to_string()),
        };
        report.items.push(item);
    }
    if let Some(db) = target_snr_db {
        let item = match c_sq_of_snr(cfg, db_to_linear(db), Some(&reference_h)) {
            Ok(c) => CheckItem::new("feasibility", true, format!("{db} dB reached with c^2 = {c}")),
            Err(e) => CheckItem::new("feasibility", false, e.to_string()),
        };
        report.items.push(item);
    }
    report.items.push(match spec.validate(cfg, proto) {
        Ok(()) => CheckItem::new("sweep", true, "sweep specification valid"),
        Err(e) => CheckItem::new("sweep", false, e.to_string()),
    });

    let mut zf = Worst::default();
    let mut budget_excess = Worst::default();
    let mut power_excess = Worst::default();
    let mut corollary = Worst::default();
    for i in 0..instances {
        let ch = sample_channel(cfg, proto, &mut stream(seed, Purpose::Channel, &[i]));
        let limit = match scaling_limit(cfg, ch.h()) {
            Ok(l) => l,
            Err(e) => {
                zf.error = Some(e.to_string());
                break;
            }
        };
        let c_sq = limit * unit_interval(derive_seed(seed, Purpose::Selection, &[i]));
        let budget = match noise_budget(cfg, ch.h(), c_sq) {
            Ok(b) => b,
            Err(e) => {
                budget_excess.error = Some(format!("instance {i}: {e}"));
                continue;
            }
        };
        for method in PrecoderMethod::ALL {
            let at = (i, method);
            let p = match design_precoder(method, &ch, &budget) {
                Ok(p) => p,
                Err(e) => {
                    zf.error = Some(format!("instance {i}, {method}: {e}"));
                    continue;
                }
            };
            zf.record(p.zero_forcing_residual(ch.h()).unwrap_or(f64::INFINITY), at);
            let norms = p.column_norms_sq();
            let excess = norms
                .iter()
                .zip(budget.per_user())
                .map(|(a, b)| a - b)
                .fold(f64::NEG_INFINITY, f64::max);
            budget_excess.record(excess.max(0.0), at);
            let power = ch
                .h()
                .iter()
                .zip(&norms)
                .map(|(h, a)| c_sq / (h * h) + a - cfg.power_limit())
                .fold(f64::NEG_INFINITY, f64::max);
            power_excess.record(power.max(0.0), at);
            if cfg.is_isotropic() {
                if let Ok(scheme) = SchemeDesign::new(cfg, ch.clone(), c_sq, p) {
                    if let (Ok((d1, s1)), Ok(d2)) = (scheme.corollary_levels(), scheme.approximation_level()) {
                        let s2 = scheme.security_level();
                        let rel = ((d1 - d2).abs() / d2.abs().max(1.0)).max((s1 - s2).abs() / s2.abs().max(1.0));
                        corollary.record(rel, at);
                    }
                }
            }
        }
    }
    report.items.push(zf.item("zero_forcing", ZERO_FORCING_TOL));
    report.items.push(budget_excess.item("noise_budget", POWER_TOL));
    report.items.push(power_excess.item("power_limit", POWER_TOL));
    if cfg.is_isotropic() {
        report.items.push(corollary.item("corollary_agreement", COROLLARY_RTOL));
    }
    report
}

/// Zero-forcing check for a stored precoder against `h`.
pub fn check_precoder(matrix: &DMatrix<f64>, h: &[f64]) -> CheckItem {
    if matrix.ncols() != h.len() {
        return CheckItem::new(
            "precoder_zero_forcing",
            false,
            format!("matrix has {} columns but h has {} entries", matrix.ncols(), h.len()),
        );
    }
    let residual = (matrix * otasec_core::DVector::from_column_slice(h)).norm();
    CheckItem::new(
        "precoder_zero_forcing",
        residual <= ZERO_FORCING_TOL,
        format!("||A h|| = {residual:.3e} (tol {ZERO_FORCING_TOL:e})"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use otasec_core::model::SystemParams;

    fn spec() -> SweepSpec {
        SweepSpec::new(SweepSpec::integer_grid(0, 15), 10, 1, PrecoderMethod::ALL.to_vec())
    }

    #[test]
    fn reference_passes() {
        let cfg = SystemConfig::new(SystemParams::reference()).unwrap();
        let r = run_checks(
            &cfg,
            &ChannelProtocol::reference(),
            &spec(),
            Some(1.0),
            None,
            ScalingBound::ClosedForm,
            50,
            9,
        );
        assert!(r.passed(), "{}", r.render());
    }

    #[test]
    fn zero_power_fails_feasibility() {
        let mut p = SystemParams::reference();
        p.power_limit = 0.0;
        let cfg = SystemConfig::new(p).unwrap();
        let r = run_checks(
            &cfg,
            &ChannelProtocol::reference(),
            &spec(),
            Some(1.0),
            None,
            ScalingBound::ClosedForm,
            5,
            9,
        );
        assert!(!r.passed());
        assert!(r.items.iter().any(|i| i.name == "feasibility" && !i.passed));
    }

    #[test]
    fn tampered_precoder_fails() {
        let h = [0.5, 1.0, 2.0];
        let good = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, -0.25, 0.0, 1.0, -0.5]);
        assert!(check_precoder(&good, &h).passed);
        let mut bad = good;
        bad[(1, 2)] = -0.49;
        assert!(!check_precoder(&bad, &h).passed);
    }
}
