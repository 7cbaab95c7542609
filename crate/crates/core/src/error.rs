use alloc::string::String;
use alloc::vec::Vec;

use crate::model::ConfigViolation;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid system configuration: {}", join_violations(.0))]
    InvalidConfig(Vec<ConfigViolation>),

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("argument out of domain: {0}")]
    Domain(String),

    /// The information signal alone exceeds user `user`'s power limit.
    #[error("infeasible noise budget: user {} has budget {budget:e} < 0", .user + 1)]
    InfeasibleBudget { user: usize, budget: f64 },

    #[error("infeasible MSE requirement {mu}: feasible range is [{floor}, {max}]")]
    InfeasibleMse { mu: f64, floor: f64, max: f64 },

    #[error("signal scaling c^2 = {c_sq:e} exceeds the channel limit {limit:e}")]
    InfeasibleScaling { c_sq: f64, limit: f64 },

    #[error("degenerate design: {0}")]
    Degenerate(&'static str),

    #[error("precondition violated: {0}")]
    Precondition(&'static str),
}

fn join_violations(v: &[ConfigViolation]) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for (i, item) in v.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        let _ = write!(out, "{item}");
    }
    out
}
