//! Multi-threaded sweep execution.

use otasec_core::channel::ChannelProtocol;
use otasec_core::model::SystemConfig;
use otasec_core::sim::{run_sweep_with, SweepResult, SweepSpec};
use rayon::prelude::*;

/// Runs the sweep on a dedicated pool of `workers` threads (zero: one per
/// core). Outcomes are gathered in trial order before aggregation, so the
/// result does not depend on the worker count.
pub fn run_sweep_parallel(
    cfg: &SystemConfig,
    proto: &ChannelProtocol,
    spec: &SweepSpec,
    workers: usize,
) -> anyhow::Result<SweepResult> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    let result =
        pool.install(|| run_sweep_with(cfg, proto, spec, |n, run| (0..n).into_par_iter().map(run).collect()))?;
    Ok(result)
}
