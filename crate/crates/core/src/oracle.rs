//! Exact analytic engine for no-click moments and condition values.
//!
//! For phase-insensitive input states every block no-click moment reduces
//! to the closed form
//!
//! ```text
//! ⟨:m̂_I:⟩ = e^{−ν_I} · G(1 − λ_I),    λ_I = Σ_{k∈I} η_k w_k,   ν_I = Σ_{k∈I} ν_k,
//! ```
//!
//! where G is the probability generating function of the photon-number
//! distribution. This identity is the computational backbone of the whole
//! analytic layer; the Monte Carlo simulator is validated against it.

use crate::error::{Error, Result};
use crate::network::{Partition, SplittingConfig};
use crate::real::Real;
use crate::states::PhotonNumberDistribution;

/// Per-channel linear detector response Γ_k(n) = η_k·n + ν_k.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorModel<F> {
    eta: Vec<F>,
    nu: Vec<F>,
}

impl<F: Real> DetectorModel<F> {
    pub fn new(eta: Vec<F>, nu: Vec<F>) -> Result<Self> {
        if eta.is_empty() || eta.len() != nu.len() {
            return Err(Error::InvalidParameter(format!(
                "detector model: {} efficiencies vs {} dark rates",
                eta.len(),
                nu.len()
            )));
        }
        for (k, e) in eta.iter().enumerate() {
            if !(*e >= F::zero() && *e <= F::one()) {
                return Err(Error::InvalidParameter(format!(
                    "detector model: efficiency {e} of channel {} outside [0, 1]",
                    k + 1
                )));
            }
        }
        for (k, v) in nu.iter().enumerate() {
            if !(*v >= F::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "detector model: dark rate {v} of channel {} invalid",
                    k + 1
                )));
            }
        }
        Ok(Self { eta, nu })
    }

    /// N identical channels.
    pub fn uniform(channels: usize, eta: F, nu: F) -> Result<Self> {
        Self::new(vec![eta; channels], vec![nu; channels])
    }

    pub fn channels(&self) -> usize {
        self.eta.len()
    }

    pub fn eta(&self) -> &[F] {
        &self.eta
    }

    pub fn nu(&self) -> &[F] {
        &self.nu
    }
}

/// Block exponent of the linear response: λ_I and Σν over the block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveAbsorption<F> {
    pub lambda: F,
    pub nu_sum: F,
}

/// λ_I = Σ_{k∈block} η_k w_k and ν_I = Σ_{k∈block} ν_k.
pub fn effective_absorption<F: Real>(
    block: &[usize],
    splitting: &SplittingConfig<F>,
    detectors: &DetectorModel<F>,
) -> Result<EffectiveAbsorption<F>> {
    if block.is_empty() {
        return Err(Error::InvalidParameter(
            "effective absorption of an empty block".into(),
        ));
    }
    if detectors.channels() != splitting.channels() {
        return Err(Error::InvalidParameter(format!(
            "detector model covers {} channels, splitting has {}",
            detectors.channels(),
            splitting.channels()
        )));
    }
    let mut lambda = F::zero();
    let mut nu_sum = F::zero();
    for &k in block {
        if k >= splitting.channels() {
            return Err(Error::InvalidParameter(format!(
                "channel {} out of range 1..={}",
                k + 1,
                splitting.channels()
            )));
        }
        lambda += detectors.eta[k] * splitting.weight(k);
        nu_sum += detectors.nu[k];
    }
    Ok(EffectiveAbsorption {
        lambda: lambda.min(F::one()),
        nu_sum,
    })
}

/// ⟨:m̂_I:⟩ = e^{−ν_I} · G(1 − λ_I) for the linear detector response.
pub fn noclick_moment<F: Real>(
    dist: &PhotonNumberDistribution<F>,
    absorption: EffectiveAbsorption<F>,
) -> F {
    (-absorption.nu_sum).exp() * dist.pgf(F::one() - absorption.lambda)
}

/// Extension point for general monotone responses: `survival(n)` is the
/// tabulated probability that n photons in the block cause no click. The
/// linear response corresponds to `survival(n) = (1−λ)^n`.
pub fn noclick_moment_with<F: Real>(
    dist: &PhotonNumberDistribution<F>,
    nu_sum: F,
    survival: impl Fn(usize) -> F,
) -> F {
    let sum: F = dist
        .probs()
        .iter()
        .enumerate()
        .map(|(n, &p)| p * survival(n))
        .sum();
    (-nu_sum).exp() * sum
}

/// ⟨:m̂_I:⟩ for a block of channels.
pub fn block_moment<F: Real>(
    dist: &PhotonNumberDistribution<F>,
    splitting: &SplittingConfig<F>,
    detectors: &DetectorModel<F>,
    block: &[usize],
) -> Result<F> {
    Ok(noclick_moment(
        dist,
        effective_absorption(block, splitting, detectors)?,
    ))
}

/// Two-channel covariance condition ⟨:m̂_i m̂_j:⟩ − ⟨:m̂_i:⟩⟨:m̂_j:⟩.
/// Negative values certify nonclassicality.
pub fn covariance_condition<F: Real>(
    dist: &PhotonNumberDistribution<F>,
    splitting: &SplittingConfig<F>,
    detectors: &DetectorModel<F>,
    i: usize,
    j: usize,
) -> Result<F> {
    if i == j {
        return Err(Error::InvalidParameter(format!(
            "covariance condition needs two distinct channels, got {} twice",
            i + 1
        )));
    }
    let joint = block_moment(dist, splitting, detectors, &[i, j])?;
    let mi = block_moment(dist, splitting, detectors, &[i])?;
    let mj = block_moment(dist, splitting, detectors, &[j])?;
    Ok(joint - mi * mj)
}

/// General partition condition ⟨:m̂_{I1}…m̂_{IK}:⟩ − Π_J ⟨:m̂_{IJ}:⟩.
/// A single-block partition yields exactly zero.
pub fn partition_condition<F: Real>(
    dist: &PhotonNumberDistribution<F>,
    splitting: &SplittingConfig<F>,
    detectors: &DetectorModel<F>,
    partition: &Partition,
) -> Result<F> {
    if partition.max_channel() >= splitting.channels() {
        return Err(Error::InvalidPartition(format!(
            "partition references channel {}, splitting has {}",
            partition.max_channel() + 1,
            splitting.channels()
        )));
    }
    if partition.block_count() == 1 {
        return Ok(F::zero());
    }
    let joint = block_moment(dist, splitting, detectors, &partition.union())?;
    let mut product = F::one();
    for block in partition.blocks() {
        product = product * block_moment(dist, splitting, detectors, block)?;
    }
    Ok(joint - product)
}

/// Photon-number covariance condition between channels i and j:
/// ⟨n̂_i n̂_j⟩ − ⟨n̂_i⟩⟨n̂_j⟩ = η_i w_i η_j w_j (⟨a†²a²⟩ − ⟨n̂⟩²).
pub fn photon_number_covariance<F: Real>(
    dist: &PhotonNumberDistribution<F>,
    splitting: &SplittingConfig<F>,
    detectors: &DetectorModel<F>,
    i: usize,
    j: usize,
) -> Result<F> {
    if i == j {
        return Err(Error::InvalidParameter(format!(
            "photon-number covariance needs two distinct channels, got {} twice",
            i + 1
        )));
    }
    for &k in &[i, j] {
        if k >= splitting.channels() {
            return Err(Error::InvalidParameter(format!(
                "channel {} out of range 1..={}",
                k + 1,
                splitting.channels()
            )));
        }
    }
    let gain = detectors.eta[i] * splitting.weight(i) * detectors.eta[j] * splitting.weight(j);
    let mean = dist.mean();
    Ok(gain * (dist.factorial_moment(2) - mean * mean))
}

/// One row of the photon-added-thermal comparison curves: the no-click
/// covariance condition and the photon-number covariance at the 70:30 /
/// η = 0.7 reference setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonPoint<F> {
    pub nbar: F,
    pub click_covariance: F,
    pub photon_covariance: F,
}

/// Reference setup of the photon-added-thermal example: 70:30 intensity
/// splitting, detection efficiency 0.7, no dark counts.
pub fn reference_setup<F: Real>() -> (SplittingConfig<F>, DetectorModel<F>) {
    let splitting = SplittingConfig::new(
        vec![F::from_f64(0.7).unwrap(), F::from_f64(0.3).unwrap()],
        F::zero(),
    )
    .unwrap();
    let detectors = DetectorModel::uniform(2, F::from_f64(0.7).unwrap(), F::zero()).unwrap();
    (splitting, detectors)
}

/// Both condition values for an m-photon-added thermal state over a grid
/// of mean thermal photon numbers, at the reference setup.
pub fn comparison_curves<F: Real>(m: usize, nbar_grid: &[F]) -> Result<Vec<ComparisonPoint<F>>> {
    if nbar_grid.is_empty() {
        return Err(Error::InvalidParameter("empty nbar grid".into()));
    }
    let (splitting, detectors) = reference_setup::<F>();
    nbar_grid
        .iter()
        .map(|&nbar| {
            let dist = PhotonNumberDistribution::photon_added_thermal(m, nbar)?;
            Ok(ComparisonPoint {
                nbar,
                click_covariance: covariance_condition(&dist, &splitting, &detectors, 0, 1)?,
                photon_covariance: photon_number_covariance(&dist, &splitting, &detectors, 0, 1)?,
            })
        })
        .collect()
}
