//! Closed-form predictions for clusters of M single-photon emitters
//! detected through a symmetric 4-channel multiplexer with overall
//! efficiency η.
//!
//! The two-channel covariance condition evaluates to
//! (1−η/2)^M − (1−η/4)^{2M} and the full four-channel partition to
//! (1−η)^M − (1−η/4)^{4M}. Both are computed in log space
//! (exp(b)·expm1(a−b)) since at M ~ 10⁵ the two powers agree to all
//! representable digits and the direct difference loses all significance.

use crate::error::{Error, Result};
use crate::real::Real;

/// Which of the two closed-form conditions to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClusterCondition {
    /// Covariance condition between two of the four channels.
    Covariance,
    /// Full partition of all four channels.
    FullPartition,
}

fn check_eta<F: Real>(eta: F) -> Result<()> {
    if !(eta >= F::zero() && eta <= F::one()) {
        return Err(Error::InvalidParameter(format!(
            "cluster model: efficiency {eta} outside [0, 1]"
        )));
    }
    Ok(())
}

fn log_power_difference<F: Real>(a: F, b: F) -> F {
    // e^a − e^b with a ≤ b up to rounding; stable for near-cancelling powers.
    b.exp() * (a - b).exp_m1()
}

/// (1−η/2)^M − (1−η/4)^{2M}.
pub fn cov_model<F: Real>(emitters: u64, eta: F) -> Result<F> {
    check_eta(eta)?;
    if emitters == 0 {
        return Err(Error::InvalidParameter("cluster model: M must be >= 1".into()));
    }
    if eta == F::zero() {
        return Ok(F::zero());
    }
    let m = F::from_u64(emitters).unwrap();
    let two = F::from_f64(2.0).unwrap();
    let four = F::from_f64(4.0).unwrap();
    let a = m * (-eta / two).ln_1p();
    let b = two * m * (-eta / four).ln_1p();
    Ok(log_power_difference(a, b))
}

/// (1−η)^M − (1−η/4)^{4M}.
pub fn full_model<F: Real>(emitters: u64, eta: F) -> Result<F> {
    check_eta(eta)?;
    if emitters == 0 {
        return Err(Error::InvalidParameter("cluster model: M must be >= 1".into()));
    }
    if eta == F::zero() {
        return Ok(F::zero());
    }
    let m = F::from_u64(emitters).unwrap();
    let four = F::from_f64(4.0).unwrap();
    let a = m * (-eta).ln_1p();
    let b = four * m * (-eta / four).ln_1p();
    Ok(log_power_difference(a, b))
}

/// Condition value for a cluster of `emitters` at overall efficiency `eta`.
pub fn model_value<F: Real>(condition: ClusterCondition, emitters: u64, eta: F) -> Result<F> {
    match condition {
        ClusterCondition::Covariance => cov_model(emitters, eta),
        ClusterCondition::FullPartition => full_model(emitters, eta),
    }
}

/// Both condition values over M = 1..=M_max at a fixed efficiency.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterCurve<F> {
    pub eta: F,
    pub points: Vec<ClusterPoint<F>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterPoint<F> {
    pub emitters: u64,
    pub cov_value: F,
    pub full_value: F,
}

pub const MAX_SWEEP_EMITTERS: u64 = 1_000_000;

pub fn sweep<F: Real>(eta: F, max_emitters: u64) -> Result<ClusterCurve<F>> {
    check_eta(eta)?;
    if max_emitters == 0 || max_emitters > MAX_SWEEP_EMITTERS {
        return Err(Error::InvalidParameter(format!(
            "cluster sweep: M_max = {max_emitters} out of range 1..={MAX_SWEEP_EMITTERS}"
        )));
    }
    let points = (1..=max_emitters)
        .map(|m| {
            Ok(ClusterPoint {
                emitters: m,
                cov_value: cov_model(m, eta)?,
                full_value: full_model(m, eta)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ClusterCurve { eta, points })
}

/// Integer argmin over M of the chosen condition value, found by scanning
/// until the value has risen for 8 consecutive steps past the best seen.
/// The unimodality behind the early stop is checked against an exhaustive
/// scan in the tests.
pub fn find_min<F: Real>(condition: ClusterCondition, eta: F) -> Result<(u64, F)> {
    check_eta(eta)?;
    if eta == F::zero() {
        return Err(Error::InvalidParameter(
            "cluster minimum undefined at zero efficiency".into(),
        ));
    }
    let mut best_m = 1;
    let mut best = model_value(condition, 1, eta)?;
    let mut rises = 0;
    let mut prev = best;
    let mut m = 1;
    while rises < 8 && m < MAX_SWEEP_EMITTERS {
        m += 1;
        let v = model_value(condition, m, eta)?;
        if v < best {
            best = v;
            best_m = m;
        }
        if v > prev {
            rises += 1;
        } else {
            rises = 0;
        }
        prev = v;
    }
    Ok((best_m, best))
}
