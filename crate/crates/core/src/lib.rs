//! Design and analysis of secure over-the-air computation with zero-forced
//! artificial noise.
//!
//! `M` single-antenna users send pre-processed Gaussian inputs `γ_m` over a
//! real block-fading AWGN multiple-access channel. The legitimate receiver
//! wants `s = Σ γ_m`; a passive eavesdropper listens on an independent
//! channel. Every user scales its input by `c / h_m` and adds artificial
//! noise drawn from the null space of the legitimate channel `h`, so the
//! noise cancels at the receiver and only corrupts the eavesdropper.
//!
//! The crate is `no_std` (it needs `alloc`). Modules:
//!
//! * [`model`]: system parameters, input covariance, Gaussian inputs.
//! * [`channel`]: Rayleigh channel sampling and the wiretap channel itself.
//! * [`precoding`]: null-space bases and their power allocation.
//! * [`scaling`]: signal scaling from an MSE target or an SNR.
//! * [`security`]: closed-form MSE levels and linear MMSE estimators.
//! * [`sim`]: single Monte Carlo trials and deterministic aggregation.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channel;
mod error;
pub mod knapsack;
pub mod math;
pub mod model;
pub mod precoding;
pub mod rng;
pub mod scaling;
pub mod security;
pub mod sim;

pub use error::{Error, Result};

pub use nalgebra::{DMatrix, DVector};
