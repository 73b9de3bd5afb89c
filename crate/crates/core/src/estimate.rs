//! Estimators for no-click moments and condition values from recorded
//! click datasets, plus the analytic second-moment criteria (Q parameters,
//! matrix of moments, asymmetric partitions).
//!
//! Condition errors use first-order delta-method propagation from the
//! sample covariance of the per-pulse block indicators; the bootstrap
//! serves as a validation oracle in the tests.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::network::{Partition, SplittingConfig};
use crate::oracle::{self, DetectorModel};
use crate::real::Real;
use crate::simulate::ClickDataset;
use crate::states::PhotonNumberDistribution;

/// Numerical slack around the classical boundary for analytic verdicts.
pub const CLASSICAL_SLACK: f64 = 1e-12;

/// Default verdict threshold in standard deviations.
pub const DEFAULT_THRESHOLD: f64 = 3.0;

/// Estimated no-click moment with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub stderr: f64,
    pub pulses: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Nonclassical,
    Inconclusive,
}

/// Outcome of one classicality condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub label: String,
    pub value: f64,
    pub stderr: f64,
    pub significance: f64,
    pub verdict: Verdict,
}

impl CriterionResult {
    /// Empirical result: significance = −value/stderr for negative values,
    /// verdict nonclassical iff significance reaches the threshold.
    pub fn empirical(label: String, value: f64, stderr: f64, threshold: f64) -> Self {
        let significance = if value < 0.0 && stderr > 0.0 {
            -value / stderr
        } else {
            0.0
        };
        let verdict = if significance >= threshold {
            Verdict::Nonclassical
        } else {
            Verdict::Inconclusive
        };
        Self {
            label,
            value,
            stderr,
            significance,
            verdict,
        }
    }

    /// Exact analytic result: no statistical error; verdict from the value
    /// with the numerical classical-boundary slack.
    pub fn analytic(label: String, value: f64) -> Self {
        let verdict = if value < -CLASSICAL_SLACK {
            Verdict::Nonclassical
        } else {
            Verdict::Inconclusive
        };
        Self {
            label,
            value,
            stderr: 0.0,
            significance: 0.0,
            verdict,
        }
    }
}

fn require_pulses(dataset: &ClickDataset) -> Result<f64> {
    if dataset.pulses() == 0 {
        return Err(Error::Dataset("empty dataset".into()));
    }
    Ok(dataset.pulses() as f64)
}

/// Fraction of pulses with no click on any channel of `block`, with the
/// binomial standard error √(p̂(1−p̂)/P).
pub fn block_moment(dataset: &ClickDataset, block: &[usize]) -> Result<MomentEstimate> {
    let pulses = require_pulses(dataset)?;
    let value = dataset.noclick_count(block)? as f64 / pulses;
    Ok(MomentEstimate {
        value,
        stderr: (value * (1.0 - value) / pulses).sqrt(),
        pulses: dataset.pulses(),
    })
}

fn union_of(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

/// Delta-method standard error of g(μ) given the gradient of g at the
/// estimated block-moment vector. The indicator covariance entries are
/// exact functions of union block moments: Cov(X_a, X_b) = μ_{a∪b} − μ_a μ_b.
fn delta_stderr(
    dataset: &ClickDataset,
    blocks: &[Vec<usize>],
    means: &[f64],
    grad: &[f64],
) -> Result<f64> {
    let pulses = require_pulses(dataset)?;
    let mut var = 0.0;
    for (a, block_a) in blocks.iter().enumerate() {
        for (b, block_b) in blocks.iter().enumerate() {
            let joint = if a == b {
                means[a]
            } else {
                dataset.noclick_count(&union_of(block_a, block_b))? as f64 / pulses
            };
            var += grad[a] * grad[b] * (joint - means[a] * means[b]);
        }
    }
    Ok((var.max(0.0) / pulses).sqrt())
}

/// Estimate the partition condition ⟨:m̂_{I1}…m̂_{IK}:⟩ − Π_J ⟨:m̂_{IJ}:⟩
/// with its delta-method standard error.
pub fn partition_estimate(
    dataset: &ClickDataset,
    partition: &Partition,
    threshold: f64,
) -> Result<CriterionResult> {
    require_pulses(dataset)?;
    let label = partition.to_string();
    if partition.block_count() == 1 {
        return Ok(CriterionResult::empirical(label, 0.0, 0.0, threshold));
    }
    let pulses = dataset.pulses() as f64;
    let mut blocks: Vec<Vec<usize>> = vec![partition.union()];
    blocks.extend(partition.blocks().iter().cloned());
    let means: Vec<f64> = blocks
        .iter()
        .map(|b| Ok(dataset.noclick_count(b)? as f64 / pulses))
        .collect::<Result<_>>()?;
    let product: f64 = means[1..].iter().product();
    let value = means[0] - product;

    let mut grad = vec![1.0];
    for j in 1..means.len() {
        let partial: f64 = means[1..]
            .iter()
            .enumerate()
            .filter(|(i, _)| i + 1 != j)
            .map(|(_, &m)| m)
            .product();
        grad.push(-partial);
    }
    let stderr = delta_stderr(dataset, &blocks, &means, &grad)?;
    Ok(CriterionResult::empirical(label, value, stderr, threshold))
}

/// Two-channel covariance condition estimate: the two-singleton special
/// case of the partition estimator.
pub fn covariance_estimate(
    dataset: &ClickDataset,
    i: usize,
    j: usize,
    threshold: f64,
) -> Result<CriterionResult> {
    let partition = Partition::pair(i, j)?;
    let mut result = partition_estimate(dataset, &partition, threshold)?;
    result.label = format!("pair {} {}", i.min(j) + 1, i.max(j) + 1);
    Ok(result)
}

fn q_pb_from_moments(
    channels: usize,
    single: &dyn Fn(usize) -> f64,
    pair: &dyn Fn(usize, usize) -> f64,
) -> Result<(f64, f64, f64)> {
    let mut num = 0.0;
    for i in 0..channels {
        for j in i + 1..channels {
            num += 2.0 * (pair(i, j) - single(i) * single(j));
        }
    }
    let den: f64 = (0..channels).map(|i| single(i) * (1.0 - single(i))).sum();
    if den == 0.0 {
        return Err(Error::InvalidParameter(
            "sub-Poisson-binomial parameter undefined: every channel is deterministic".into(),
        ));
    }
    Ok((num, den, num / den))
}

/// Sub-Poisson-binomial parameter from a dataset:
/// Q = Σ_{i≠j} Cov(m̂_i, m̂_j) / Σ_i ⟨:m̂_i:⟩(1−⟨:m̂_i:⟩), with a
/// delta-method error over all singleton and pair moments.
pub fn q_pb_empirical(dataset: &ClickDataset, threshold: f64) -> Result<CriterionResult> {
    let pulses = require_pulses(dataset)?;
    let n = dataset.channels();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "sub-Poisson-binomial parameter needs at least 2 channels".into(),
        ));
    }
    let mut blocks: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for i in 0..n {
        for j in i + 1..n {
            blocks.push(vec![i, j]);
        }
    }
    let means: Vec<f64> = blocks
        .iter()
        .map(|b| Ok(dataset.noclick_count(b)? as f64 / pulses))
        .collect::<Result<_>>()?;
    let mu = |i: usize| means[i];
    let mut pair_index = BTreeMap::new();
    {
        let mut idx = n;
        for i in 0..n {
            for j in i + 1..n {
                pair_index.insert((i, j), idx);
                idx += 1;
            }
        }
    }
    let (num, den, value) =
        q_pb_from_moments(n, &|i| mu(i), &|i, j| means[pair_index[&(i, j)]])?;

    let mut grad = vec![0.0; blocks.len()];
    for i in 0..n {
        let dnum = -2.0 * (0..n).filter(|&j| j != i).map(mu).sum::<f64>();
        let dden = 1.0 - 2.0 * mu(i);
        grad[i] = (dnum * den - num * dden) / (den * den);
    }
    for (&(_, _), &idx) in &pair_index {
        grad[idx] = 2.0 / den;
    }
    let stderr = delta_stderr(dataset, &blocks, &means, &grad)?;
    Ok(CriterionResult::empirical(
        "q_pb".into(),
        value,
        stderr,
        threshold,
    ))
}

/// Exact sub-Poisson-binomial parameter from the analytic oracle.
pub fn q_pb_analytic(
    dist: &PhotonNumberDistribution<f64>,
    splitting: &SplittingConfig<f64>,
    detectors: &DetectorModel<f64>,
) -> Result<CriterionResult> {
    let n = splitting.channels();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "sub-Poisson-binomial parameter needs at least 2 channels".into(),
        ));
    }
    let single: Vec<f64> = (0..n)
        .map(|i| oracle::block_moment(dist, splitting, detectors, &[i]))
        .collect::<Result<_>>()?;
    let mut pairs = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.insert(
                (i, j),
                oracle::block_moment(dist, splitting, detectors, &[i, j])?,
            );
        }
    }
    let (_, _, value) = q_pb_from_moments(n, &|i| single[i], &|i, j| pairs[&(i, j)])?;
    Ok(CriterionResult::analytic("q_pb".into(), value))
}

/// No-click moment of j pooled channels under equal splitting:
/// ⟨:m̂^j:⟩ = e^{−jν} G(1 − jη/N).
fn equal_split_moment<F: Real>(
    dist: &PhotonNumberDistribution<F>,
    channels: usize,
    eta: F,
    nu: F,
    pooled: usize,
) -> F {
    let j = F::from_usize_(pooled);
    let lambda = j * eta / F::from_usize_(channels);
    (-(j * nu)).exp() * dist.pgf(F::one() - lambda)
}

/// Sub-binomial parameter Q_B = (N−1)⟨:Var(m̂):⟩ / [⟨:m̂:⟩(1−⟨:m̂:⟩)]
/// for N equal channels with identical detectors.
pub fn q_b<F: Real>(
    dist: &PhotonNumberDistribution<F>,
    channels: usize,
    eta: F,
    nu: F,
) -> Result<F> {
    if channels < 2 {
        return Err(Error::InvalidParameter(
            "sub-binomial parameter needs at least 2 channels".into(),
        ));
    }
    let m1 = equal_split_moment(dist, channels, eta, nu, 1);
    let m2 = equal_split_moment(dist, channels, eta, nu, 2);
    let den = m1 * (F::one() - m1);
    if den == F::zero() {
        return Err(Error::InvalidParameter(
            "sub-binomial parameter undefined: deterministic channel".into(),
        ));
    }
    Ok(F::from_usize_(channels - 1) * (m2 - m1 * m1) / den)
}

/// Mandel parameter Q = ⟨:Var(n̂):⟩ / ⟨n̂⟩ = (⟨a†²a²⟩ − ⟨n̂⟩²)/⟨n̂⟩.
pub fn mandel_q<F: Real>(dist: &PhotonNumberDistribution<F>) -> Result<F> {
    let mean = dist.mean();
    if mean == F::zero() {
        return Err(Error::InvalidParameter(
            "Mandel Q undefined for zero mean photon number".into(),
        ));
    }
    Ok((dist.factorial_moment(2) - mean * mean) / mean)
}

/// Matrix of moments (⟨:m̂^{l+l'}:⟩)_{l,l'=0..⌊N/2⌋} under equal splitting,
/// with its minimum eigenvalue. A negative eigenvalue certifies
/// nonclassicality.
pub fn matrix_of_moments(
    dist: &PhotonNumberDistribution<f64>,
    channels: usize,
    eta: f64,
    nu: f64,
) -> Result<(DMatrix<f64>, f64)> {
    if channels < 2 {
        return Err(Error::InvalidParameter(
            "matrix of moments needs at least 2 channels".into(),
        ));
    }
    let size = channels / 2 + 1;
    let matrix = DMatrix::from_fn(size, size, |l, lp| {
        equal_split_moment(dist, channels, eta, nu, l + lp)
    });
    let eigen = matrix.clone().symmetric_eigen();
    let min_eigenvalue = eigen.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((matrix, min_eigenvalue))
}

/// The two asymmetric condition values for pooled exponent k under equal
/// splitting: ⟨:m̂^k:⟩ − ⟨:m̂:⟩⟨:m̂^{k−1}:⟩ and
/// ⟨:m̂^k:⟩ − ⟨:m̂:⟩⟨:m̂^{k−2}:⟩⟨:m̂:⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymmetricConditions<F> {
    pub two_block: F,
    pub three_block: F,
}

pub fn asymmetric_condition<F: Real>(
    dist: &PhotonNumberDistribution<F>,
    channels: usize,
    eta: F,
    nu: F,
    k: usize,
) -> Result<AsymmetricConditions<F>> {
    if k < 3 || k > channels {
        return Err(Error::InvalidParameter(format!(
            "asymmetric condition order k = {k} out of range 3..={channels}"
        )));
    }
    let m = |j| equal_split_moment(dist, channels, eta, nu, j);
    Ok(AsymmetricConditions {
        two_block: m(k) - m(1) * m(k - 1),
        three_block: m(k) - m(1) * m(k - 2) * m(1),
    })
}

/// Multinomial resample of the histogram with the same pulse count, for
/// bootstrap validation of the delta-method errors.
pub fn bootstrap_resample(dataset: &ClickDataset, rng: &mut impl Rng) -> Result<ClickDataset> {
    let total = dataset.pulses();
    let mut remaining = total;
    let mut remaining_prob = 1.0f64;
    let mut histogram = BTreeMap::new();
    for (&pattern, &count) in dataset.histogram() {
        if remaining == 0 {
            break;
        }
        let p = count as f64 / total as f64;
        let conditional = (p / remaining_prob).clamp(0.0, 1.0);
        let draw = if conditional >= 1.0 {
            remaining
        } else {
            Binomial::new(remaining, conditional)
                .map_err(|e| Error::Dataset(format!("bootstrap: {e}")))?
                .sample(rng)
        };
        if draw > 0 {
            histogram.insert(pattern, draw);
        }
        remaining -= draw;
        remaining_prob -= p;
    }
    if remaining > 0 {
        // leftover mass from rounding goes to the last pattern
        if let Some((&pattern, _)) = dataset.histogram().iter().next_back() {
            *histogram.entry(pattern).or_insert(0) += remaining;
        }
    }
    ClickDataset::new(dataset.channels(), histogram)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::enumerate_partitions;
    use crate::states::PhotonNumberDistribution as Dist;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn dataset(channels: usize, entries: &[(&str, u64)]) -> ClickDataset {
        let histogram = entries
            .iter()
            .map(|&(pattern, count)| (u64::from_str_radix(pattern, 2).unwrap(), count))
            .collect();
        ClickDataset::new(channels, histogram).unwrap()
    }

    #[test]
    fn block_moment_counts_directly() {
        let ds = dataset(4, &[("0000", 4)]);
        let m = block_moment(&ds, &[0, 1, 2, 3]).unwrap();
        assert_eq!(m.value, 1.0);
        assert_eq!(m.stderr, 0.0);

        let ds = dataset(4, &[("0000", 3), ("0100", 1)]);
        let m = block_moment(&ds, &[1]).unwrap();
        assert_eq!(m.value, 0.75);
        assert!(close(m.stderr, (0.75 * 0.25 / 4.0f64).sqrt(), 1e-15));

        let m = block_moment(&ds, &[0, 2]).unwrap();
        assert_eq!(m.value, 1.0);

        assert!(block_moment(&ds, &[]).is_err());
        assert!(block_moment(&ClickDataset::empty(4).unwrap(), &[0]).is_err());
    }

    #[test]
    fn single_block_partition_is_trivially_zero() {
        let ds = dataset(4, &[("0000", 2), ("1111", 2)]);
        let p = Partition::new(vec![vec![0, 1, 2, 3]]).unwrap();
        let r = partition_estimate(&ds, &p, 3.0).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.stderr, 0.0);
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn degenerate_single_pulse_dataset_is_inconclusive() {
        let ds = dataset(4, &[("0000", 1)]);
        let r = covariance_estimate(&ds, 0, 2, 3.0).unwrap();
        assert_eq!(r.stderr, 0.0);
        assert_eq!(r.significance, 0.0);
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn covariance_estimate_labels_channels() {
        let ds = dataset(4, &[("0000", 2), ("1010", 2)]);
        let r = covariance_estimate(&ds, 2, 0, 3.0).unwrap();
        assert_eq!(r.label, "pair 1 3");
    }

    #[test]
    fn partition_estimate_hand_computed() {
        // patterns: 00 x2, 01 x1, 10 x1  →  m1 = 3/4 (no click on ch1),
        // m2 = 3/4, joint = 1/2, value = 1/2 − 9/16 = −1/16
        let ds = dataset(2, &[("00", 2), ("01", 1), ("10", 1)]);
        let p = Partition::pair(0, 1).unwrap();
        let r = partition_estimate(&ds, &p, 3.0).unwrap();
        assert!(close(r.value, -1.0 / 16.0, 1e-15));
        assert!(r.stderr > 0.0);
    }

    #[test]
    fn mandel_q_reference_values() {
        assert!(close(mandel_q(&Dist::coherent(1.3).unwrap()).unwrap(), 0.0, 1e-12));
        for n in 1..=5 {
            assert!(close(mandel_q(&Dist::fock(n).unwrap()).unwrap(), -1.0, 1e-12));
        }
        assert!(close(mandel_q(&Dist::thermal(0.8).unwrap()).unwrap(), 0.8, 1e-10));
        assert!(mandel_q(&Dist::<f64>::fock(0).unwrap()).is_err());
    }

    #[test]
    fn q_pb_reduces_to_q_b_for_equal_channels() {
        let n = 4;
        let eta = 0.7;
        for dist in [
            Dist::thermal(1.2).unwrap(),
            Dist::fock(1).unwrap(),
            Dist::photon_added_thermal(1, 0.6).unwrap(),
        ] {
            let s = SplittingConfig::symmetric(n).unwrap();
            let d = DetectorModel::uniform(n, eta, 0.0).unwrap();
            let qpb = q_pb_analytic(&dist, &s, &d).unwrap().value;
            let qb = q_b(&dist, n, eta, 0.0).unwrap();
            assert!(close(qpb, qb, 1e-12), "{}: {qpb} vs {qb}", dist.label());
        }
    }

    #[test]
    fn q_b_converges_to_mandel_q() {
        // Lossless detection: with finite efficiency the limit is the
        // Mandel Q of the thinned distribution instead.
        let d = Dist::<f64>::thermal(0.5).unwrap();
        let q = mandel_q(&d).unwrap();
        let mut diffs = Vec::new();
        let mut n = 2usize;
        while n <= 1024 {
            diffs.push((q_b(&d, n, 1.0, 0.0).unwrap() - q).abs());
            n *= 2;
        }
        for w in diffs.windows(2) {
            assert!(w[1] < w[0], "{diffs:?}");
        }
        assert!(*diffs.last().unwrap() < diffs[0] / 50.0);
    }

    #[test]
    fn q_pb_signs() {
        let s = SplittingConfig::symmetric(4).unwrap();
        let d = DetectorModel::uniform(4, 1.0, 0.0).unwrap();
        let coh = q_pb_analytic(&Dist::coherent(1.0).unwrap(), &s, &d).unwrap();
        assert!(coh.value.abs() < 1e-13);
        let one = q_pb_analytic(&Dist::fock(1).unwrap(), &s, &d).unwrap();
        assert!(one.value < 0.0);
        assert_eq!(one.verdict, Verdict::Nonclassical);
    }

    #[test]
    fn matrix_of_moments_determinant_identity() {
        // det of the 2x2 sub-matrix with moments up to order 2l equals
        // ⟨:Var(m̂^l):⟩ = ⟨:m̂^{2l}:⟩ − ⟨:m̂^l:⟩².
        let dist = Dist::thermal(0.9).unwrap();
        let (n, eta, nu) = (6, 0.8, 0.01);
        for l in 1..=3usize {
            let m0 = equal_split_moment(&dist, n, eta, nu, 0);
            let ml = equal_split_moment(&dist, n, eta, nu, l);
            let m2l = equal_split_moment(&dist, n, eta, nu, 2 * l);
            let det = m0 * m2l - ml * ml;
            assert!(close(det, m2l - ml * ml, 1e-12));
            assert!(det >= -1e-12, "classical state, l = {l}");
        }

        let (matrix, min_eig) = matrix_of_moments(&Dist::coherent(1.5).unwrap(), 4, 0.7, 0.0).unwrap();
        assert_eq!(matrix.nrows(), 3);
        assert!(min_eig >= -1e-12);

        // fock(1): negative 2x2 determinant for l = 1
        let one = Dist::fock(1).unwrap();
        let m1 = equal_split_moment(&one, 4, 1.0, 0.0, 1);
        let m2 = equal_split_moment(&one, 4, 1.0, 0.0, 2);
        assert!(m2 - m1 * m1 < 0.0);
        let (_, min_eig) = matrix_of_moments(&one, 4, 1.0, 0.0).unwrap();
        assert!(min_eig < 0.0);
    }

    #[test]
    fn asymmetric_condition_cross_path_identity() {
        let one = Dist::fock(1).unwrap();
        let s = SplittingConfig::symmetric(4).unwrap();
        let d = DetectorModel::uniform(4, 1.0, 0.0).unwrap();
        let a = asymmetric_condition(&one, 4, 1.0, 0.0, 3).unwrap();
        // ⟨:m̂³:⟩ − ⟨:m̂:⟩⟨:m̂²:⟩ equals the partition {1},{2,3} on three channels
        let p = Partition::new(vec![vec![0], vec![1, 2]]).unwrap();
        let expected = oracle::partition_condition(&one, &s, &d, &p).unwrap();
        assert!(close(a.two_block, expected, 1e-12));

        // ⟨:m̂³:⟩ − ⟨:m̂:⟩⟨:m̂:⟩⟨:m̂:⟩ equals the full partition of three channels
        let p = Partition::new(vec![vec![0], vec![1], vec![2]]).unwrap();
        let expected = oracle::partition_condition(&one, &s, &d, &p).unwrap();
        assert!(close(a.three_block, expected, 1e-12));
    }

    #[test]
    fn asymmetric_condition_classical_and_coherent() {
        for k in 3..=4usize {
            let a = asymmetric_condition(&Dist::<f64>::coherent(1.1).unwrap(), 4, 0.8, 0.0, k).unwrap();
            assert!(a.two_block.abs() < 1e-13);
            assert!(a.three_block.abs() < 1e-13);
            let a = asymmetric_condition(&Dist::thermal(1.5).unwrap(), 4, 0.8, 0.0, k).unwrap();
            assert!(a.two_block >= -1e-13);
            assert!(a.three_block >= -1e-13);
        }
        assert!(asymmetric_condition(&Dist::fock(1).unwrap(), 4, 1.0, 0.0, 2).is_err());
        assert!(asymmetric_condition(&Dist::fock(1).unwrap(), 4, 1.0, 0.0, 5).is_err());
    }

    #[test]
    fn significance_zero_for_nonnegative_values() {
        let r = CriterionResult::empirical("x".into(), 0.02, 0.01, 3.0);
        assert_eq!(r.significance, 0.0);
        assert_eq!(r.verdict, Verdict::Inconclusive);
        let r = CriterionResult::empirical("x".into(), -0.05, 0.01, 3.0);
        assert_eq!(r.significance, 5.0);
        assert_eq!(r.verdict, Verdict::Nonclassical);
    }

    #[test]
    fn bootstrap_preserves_pulse_count() {
        use rand::SeedableRng;
        let ds = dataset(3, &[("000", 500), ("001", 300), ("110", 200)]);
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(1);
        for _ in 0..10 {
            let r = bootstrap_resample(&ds, &mut rng).unwrap();
            assert_eq!(r.pulses(), 1000);
            assert_eq!(r.channels(), 3);
        }
    }

    #[test]
    fn partition_estimates_cover_all_partitions_of_small_dataset() {
        let ds = dataset(3, &[("000", 50), ("001", 20), ("010", 15), ("100", 15)]);
        for p in enumerate_partitions(3, 2).unwrap() {
            let r = partition_estimate(&ds, &p, 3.0).unwrap();
            assert!(r.stderr >= 0.0);
            assert!(r.value.is_finite());
        }
    }
}
