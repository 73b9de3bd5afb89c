//! Multiplexed click detection of few-photon light and nonclassicality
//! certification from no-click correlations.
//!
//! A light pulse with photon-number distribution p_n is split over N
//! detection channels; each channel carries an on-off detector whose
//! no-click probability for n incident photons is e^{-(ηn+ν)}. For any
//! grouping of the channels into disjoint blocks I_1..I_K the classical
//! bound
//!
//!   ⟨:m̂_{I_1∪…∪I_K}:⟩ − ∏_J ⟨:m̂_{I_J}:⟩ ≥ 0
//!
//! holds for all classical states regardless of detector efficiencies,
//! dark counts, and splitting ratios; a negative value certifies
//! nonclassicality. The crate provides:
//!
//! - [`states`]: photon-number distributions (coherent, thermal, Fock,
//!   photon-added thermal, emitter clusters, classical mixtures),
//! - [`network`]: splitting configurations and channel partitions,
//! - [`oracle`]: exact closed-form no-click moments and condition values,
//! - [`cluster`]: closed-form predictions for single-photon emitter
//!   clusters on a symmetric 4-channel multiplexer,
//! - [`simulate`]: Monte Carlo click sampling and the CLICKHIST format,
//! - [`estimate`]: moment estimators with delta-method errors, binary
//!   Q parameters, matrix-of-moments and asymmetric criteria,
//! - [`runner`]: uniform condition evaluation over analytic or empirical
//!   sources, producing certification reports,
//! - [`config`]: the JSON run configuration behind the CLI.
//!
//! The analytic layers are generic over the scalar type through
//! [`real::Real`] (implemented for `f32` and `f64`); simulation,
//! estimation from datasets, and the report machinery are fixed to `f64`.

pub mod cluster;
pub mod config;
pub mod error;
pub mod estimate;
pub mod network;
pub mod oracle;
pub mod real;
pub mod runner;
pub mod simulate;
pub mod states;

pub use error::{Error, Result};
pub use real::Real;

/// `f64` photon-number distribution, the common case.
pub type Distribution = states::PhotonNumberDistribution<f64>;
/// `f64` splitting configuration.
pub type Splitting = network::SplittingConfig<f64>;
/// `f64` detector model.
pub type Detectors = oracle::DetectorModel<f64>;
