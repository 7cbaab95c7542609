//! Exact solver for the continuous (fractional) knapsack LP
//!
//! ```text
//! maximize   Σ v_i x_i
//! subject to Σ w_i x_i <= capacity,   0 <= x_i <= u_i
//! ```
//!
//! with `w_i >= 0`. Items are filled in descending order of `v_i / w_i`
//! (ties: lower index first) until the coupling row binds; the last item
//! taken may be fractional. Items with `v_i <= 0` or `u_i <= 0` stay at zero.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Coupling-row usage `Σ w_i x_i`.
    pub load: f64,
}

pub fn solve_continuous_knapsack(
    values: &[f64],
    weights: &[f64],
    upper: &[f64],
    capacity: f64,
) -> Result<KnapsackSolution> {
    let n = values.len();
    for (what, len) in [("knapsack weights", weights.len()), ("knapsack bounds", upper.len())] {
        if len != n {
            return Err(Error::DimensionMismatch {
                what,
                expected: n,
                found: len,
            });
        }
    }
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::Domain("knapsack weights must be nonnegative".into()));
    }
    if !(capacity >= 0.0) || upper.iter().any(|&u| !(u >= 0.0)) {
        return Err(Error::Domain("knapsack capacity and bounds must be nonnegative".into()));
    }

    let mut order: Vec<usize> = (0..n).filter(|&i| values[i] > 0.0 && upper[i] > 0.0).collect();
    // Compare v_i / w_i without dividing: weightless items come first.
    order.sort_by(|&a, &b| {
        let lhs = values[a] * weights[b];
        let rhs = values[b] * weights[a];
        rhs.partial_cmp(&lhs).unwrap_or(Ordering::Equal).then(a.cmp(&b))
    });

    let mut x = vec![0.0; n];
    let mut remaining = capacity;
    for i in order {
        if weights[i] == 0.0 {
            x[i] = upper[i];
            continue;
        }
        if remaining <= 0.0 {
            break;
        }
        let take = upper[i].min(remaining / weights[i]);
        x[i] = take;
        if take == upper[i] {
            remaining -= take * weights[i];
        } else {
            remaining = 0.0;
        }
    }
    let objective = values.iter().zip(&x).map(|(v, x)| v * x).sum();
    let load = weights.iter().zip(&x).map(|(w, x)| w * x).sum();
    Ok(KnapsackSolution { x, objective, load })
}
