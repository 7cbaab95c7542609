//! Single-design workflows behind the `design` and `evaluate` commands.

use std::fmt::Write as _;

use anyhow::{bail, Context};
use otasec_core::channel::{sample_channel, ChannelProtocol, ChannelRealization};
use otasec_core::math::{db_to_linear, linear_to_db};
use otasec_core::model::SystemConfig;
use otasec_core::precoding::{
    design_precoder, expected_noise_power_general, naive_svd_precoder, no_noise_precoder, noise_budget,
    optimize_unknown_csi, Precoder, PrecoderMethod,
};
use otasec_core::rng::{stream, Purpose};
use otasec_core::scaling::{c_sq_of_snr, design_scaling, feasible_mu_min, snr_of, ScalingBound};
use otasec_core::security::{approximation_level, EmpiricalMse, SchemeDesign, UserPower};

use crate::output::MatrixDump;

/// What fixes the signal scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Mse(f64),
    SnrDb(f64),
}

/// Where the channel comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelSource {
    /// Explicit coefficients; `g` may be unknown.
    Given { h: Vec<f64>, g: Option<Vec<f64>> },
    /// Trial 0 of the channel stream for `seed`.
    Sampled { seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignRequest {
    pub target: Target,
    pub channel: ChannelSource,
    pub method: PrecoderMethod,
    pub bound: ScalingBound,
}

#[derive(Debug, Clone)]
pub struct DesignOutcome {
    pub method: PrecoderMethod,
    pub bound: ScalingBound,
    /// Ascending.
    pub h: Vec<f64>,
    /// Permuted with `h`; `None` when not supplied.
    pub g: Option<Vec<f64>>,
    pub mu: Option<f64>,
    pub mu_floor: f64,
    pub c_sq: f64,
    pub snr: f64,
    pub precoder: Precoder,
    pub per_user: Vec<UserPower>,
    pub power_limit: f64,
    pub d_closed: f64,
    pub s_closed: Option<f64>,
    pub eve_noise_power: Option<f64>,
    pub expected_eve_noise_power: f64,
}

impl DesignOutcome {
    pub fn is_degenerate(&self) -> bool {
        self.c_sq == 0.0
    }

    pub fn dump(&self) -> MatrixDump {
        MatrixDump {
            method: Some(self.method),
            h: Some(self.h.clone()),
            matrix: self.precoder.matrix().clone(),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "method: {}", self.method);
        let _ = writeln!(out, "h (ascending): {}", list(&self.h));
        if let Some(g) = &self.g {
            let _ = writeln!(out, "g: {}", list(g));
        }
        if let Some(mu) = self.mu {
            let _ = writeln!(out, "mu: {mu} ({} bound)", self.bound);
        }
        let _ = writeln!(out, "mu floor: {}", self.mu_floor);
        let _ = writeln!(out, "c^2: {}", self.c_sq);
        let _ = writeln!(out, "snr: {} ({:.4} dB)", self.snr, linear_to_db(self.snr));
        if self.is_degenerate() {
            let _ = writeln!(out, "warning: degenerate design, c = 0 (nothing is transmitted, D = M)");
        }
        let _ = writeln!(out, "D: {}", self.d_closed);
        match self.s_closed {
            Some(s) => {
                let _ = writeln!(out, "S: {s}");
            }
            None => {
                let _ = writeln!(out, "S: unknown (no eavesdropper channel given)");
            }
        }
        if let Some(p) = self.eve_noise_power {
            let _ = writeln!(out, "||Ag||^2: {p}");
        }
        let _ = writeln!(out, "E||Ag||^2: {}", self.expected_eve_noise_power);
        let _ = writeln!(out, "d_sq: {}", list(self.precoder.d_sq()));
        let _ = writeln!(
            out,
            "per-user power (signal + noise = total, limit {}):",
            self.power_limit
        );
        for (i, p) in self.per_user.iter().enumerate() {
            let _ = writeln!(out, "  user {:>2}: {} + {} = {}", i + 1, p.signal, p.noise, p.total());
        }
        let _ = writeln!(out, "A:");
        out.push_str(&self.dump().render());
        out
    }
}

fn resolve_channel(
    cfg: &SystemConfig,
    proto: &ChannelProtocol,
    source: &ChannelSource,
) -> anyhow::Result<(Vec<f64>, Option<Vec<f64>>)> {
    let m = cfg.num_users();
    match source {
        ChannelSource::Sampled { seed } => {
            let ch = sample_channel(cfg, proto, &mut stream(*seed, Purpose::Channel, &[0]));
            Ok((ch.h().to_vec(), Some(ch.g().to_vec())))
        }
        ChannelSource::Given { h, g } => {
            if h.len() != m {
                return Err(
                    UsageError(format!("expected {m} legitimate channel coefficients, got {}", h.len())).into(),
                );
            }
            match g {
                Some(g) => {
                    if g.len() != m {
                        return Err(UsageError(format!(
                            "expected {m} eavesdropper channel coefficients, got {}",
                            g.len()
                        ))
                        .into());
                    }
                    let ch = ChannelRealization::new(h.clone(), g.clone()).map_err(|e| UsageError(e.to_string()))?;
                    Ok((ch.h().to_vec(), Some(ch.g().to_vec())))
                }
                None => {
                    let ch = ChannelRealization::new(h.clone(), h.clone()).map_err(|e| UsageError(e.to_string()))?;
                    Ok((ch.h().to_vec(), None))
                }
            }
        }
    }
}

pub fn run_design(cfg: &SystemConfig, proto: &ChannelProtocol, req: &DesignRequest) -> anyhow::Result<DesignOutcome> {
    cfg.ensure_valid()?;
    let (h, g) = resolve_channel(cfg, proto, &req.channel)?;
    if req.method.needs_eavesdropper_csi() && g.is_none() {
        bail!(UsageError(
            "the rre_known_csi method needs the eavesdropper channel (--g)".into()
        ));
    }
    let mu_floor = feasible_mu_min(cfg, &h)?;
    let (c_sq, mu) = match req.target {
        Target::Mse(mu) => (design_scaling(cfg, &h, mu, req.bound)?.c_sq, Some(mu)),
        Target::SnrDb(db) => (c_sq_of_snr(cfg, db_to_linear(db), Some(&h))?, None),
    };
    let budget = noise_budget(cfg, &h, c_sq)?;
    let precoder = match (&g, req.method) {
        (Some(g), method) => design_precoder(
            method,
            &ChannelRealization::new(h.clone(), g.clone()).map_err(|e| UsageError(e.to_string()))?,
            &budget,
        )?,
        (None, PrecoderMethod::RreUnknownCsi) => optimize_unknown_csi(&h, &budget)?,
        (None, PrecoderMethod::NaiveSvd) => naive_svd_precoder(&h, &budget)?,
        (None, PrecoderMethod::NoNoise) => no_noise_precoder(h.len())?,
        (None, PrecoderMethod::RreKnownCsi) => unreachable!("checked above"),
    };
    let expected_eve_noise_power = expected_noise_power_general(precoder.matrix(), cfg.sigma_g());
    let per_user = h
        .iter()
        .zip(precoder.column_norms_sq())
        .map(|(hm, noise)| UserPower {
            signal: c_sq / (hm * hm),
            noise,
        })
        .collect();
    let (s_closed, eve_noise_power) = match &g {
        Some(g) => {
            let scheme = SchemeDesign::new(
                cfg,
                ChannelRealization::new(h.clone(), g.clone()).map_err(|e| UsageError(e.to_string()))?,
                c_sq,
                precoder.clone(),
            )?;
            (Some(scheme.security_level()), Some(scheme.eve_noise_power()))
        }
        None => (None, None),
    };
    Ok(DesignOutcome {
        method: req.method,
        bound: req.bound,
        mu,
        mu_floor,
        c_sq,
        snr: snr_of(cfg, c_sq),
        d_closed: approximation_level(cfg, c_sq)?,
        s_closed,
        eve_noise_power,
        expected_eve_noise_power,
        per_user,
        power_limit: cfg.power_limit(),
        precoder,
        h,
        g,
    })
}

/// Closed-form levels next to their sampled estimates.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub design: DesignOutcome,
    pub empirical: EmpiricalMse,
}

impl Evaluation {
    pub fn render(&self) -> String {
        let mut out = self.design.render();
        let e = &self.empirical;
        let z = |emp: f64, closed: f64, se: f64| (emp - closed) / se;
        let _ = writeln!(out, "empirical over {} draws:", e.draws);
        let _ = writeln!(
            out,
            "  D: {} +- {} (z = {:.2})",
            e.d_mean,
            e.d_se,
            z(e.d_mean, self.design.d_closed, e.d_se)
        );
        if let Some(s) = self.design.s_closed {
            let _ = writeln!(
                out,
                "  S: {} +- {} (z = {:.2})",
                e.s_mean,
                e.s_se,
                z(e.s_mean, s, e.s_se)
            );
        }
        out
    }
}

pub fn run_evaluate(
    cfg: &SystemConfig,
    proto: &ChannelProtocol,
    req: &DesignRequest,
    draws: usize,
    seed: u64,
) -> anyhow::Result<Evaluation> {
    let design = run_design(cfg, proto, req)?;
    let g = design
        .g
        .clone()
        .ok_or_else(|| UsageError("evaluation needs the eavesdropper channel (--g)".into()))?;
    let scheme = SchemeDesign::new(
        cfg,
        ChannelRealization::new(design.h.clone(), g)?,
        design.c_sq,
        design.precoder.clone(),
    )?;
    let empirical = scheme
        .empirical_mse(draws, &mut stream(seed, Purpose::Empirical, &[]))
        .context("sampling the transmission chain")?;
    Ok(Evaluation { design, empirical })
}

/// Bad combination of command-line inputs.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

#[cfg(test)]
mod tests {
    use super::*;
    use otasec_core::model::SystemParams;
    use otasec_core::Error;

    fn reference() -> (SystemConfig, ChannelProtocol) {
        (
            SystemConfig::new(SystemParams::reference()).unwrap(),
            ChannelProtocol::reference(),
        )
    }

    fn request(target: Target) -> DesignRequest {
        DesignRequest {
            target,
            channel: ChannelSource::Sampled { seed: 3 },
            method: PrecoderMethod::RreUnknownCsi,
            bound: ScalingBound::ClosedForm,
        }
    }

    #[test]
    fn mu_one_gives_reference_scaling() {
        let (cfg, proto) = reference();
        let out = run_design(&cfg, &proto, &request(Target::Mse(1.0))).unwrap();
        assert!((out.c_sq - 0.09).abs() < 1e-12);
        assert!((linear_to_db(out.snr) - 9.542_425).abs() < 1e-6);
        assert!((out.d_closed - 1.0).abs() < 1e-12);
        assert!(out.render().contains("c^2: 0.09"));
        for p in &out.per_user {
            assert!(p.total() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn mu_below_floor_is_infeasible() {
        let (cfg, proto) = reference();
        let err = run_design(&cfg, &proto, &request(Target::Mse(0.1))).unwrap_err();
        let core = err.downcast_ref::<Error>().unwrap();
        assert!(matches!(core, Error::InfeasibleMse { .. }));
        assert!(err.to_string().contains("0.2718"));
    }

    #[test]
    fn mu_equal_m_is_degenerate() {
        let (cfg, proto) = reference();
        let out = run_design(&cfg, &proto, &request(Target::Mse(10.0))).unwrap();
        assert!(out.is_degenerate());
        assert!(out.render().contains("degenerate"));
    }

    #[test]
    fn known_csi_needs_g() {
        let (cfg, proto) = reference();
        let mut req = request(Target::SnrDb(5.0));
        req.method = PrecoderMethod::RreKnownCsi;
        req.channel = ChannelSource::Given {
            h: (1..=10).map(|i| i as f64 * 0.2).collect(),
            g: None,
        };
        assert!(run_design(&cfg, &proto, &req)
            .unwrap_err()
            .downcast_ref::<UsageError>()
            .is_some());
        req.method = PrecoderMethod::NaiveSvd;
        let out = run_design(&cfg, &proto, &req).unwrap();
        assert!(out.s_closed.is_none());
        assert!(out.precoder.is_zero_forcing(&out.h).unwrap());
    }

    #[test]
    fn evaluation_agrees_with_closed_form() {
        let (cfg, proto) = reference();
        let e = run_evaluate(&cfg, &proto, &request(Target::SnrDb(8.0)), 20_000, 1).unwrap();
        let s = e.design.s_closed.unwrap();
        assert!((e.empirical.d_mean - e.design.d_closed).abs() < 4.0 * e.empirical.d_se);
        assert!((e.empirical.s_mean - s).abs() < 4.0 * e.empirical.s_se);
    }
}
