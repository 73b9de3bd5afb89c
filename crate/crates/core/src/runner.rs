//! Certification orchestration: evaluate a configured set of conditions
//! against a moment source (exact analytic oracle or dataset estimates)
//! and assemble a report.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{self, CriterionResult, MomentEstimate, Verdict};
use crate::network::{enumerate_partitions, Partition, SplittingConfig};
use crate::oracle::{self, DetectorModel};
use crate::simulate::ClickDataset;
use crate::states::PhotonNumberDistribution;

/// A condition to evaluate. Parsed from the config syntax: a partition
/// ("1,2|3|4"), "pair i j", or one of the named criteria.
#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    Pair(usize, usize),
    Partition(Partition),
    QPb,
    QB,
    MandelQ,
    MatrixOfMoments,
    Asymmetric(usize),
}

impl Condition {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        match text {
            "q_pb" => return Ok(Self::QPb),
            "q_b" => return Ok(Self::QB),
            "mandel_q" => return Ok(Self::MandelQ),
            "matrix_of_moments" => return Ok(Self::MatrixOfMoments),
            _ => {}
        }
        if let Some(rest) = text.strip_prefix("pair ") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(Error::InvalidParameter(format!(
                    "expected `pair <i> <j>`, got {text:?}"
                )));
            }
            let parse = |s: &str| -> Result<usize> {
                let c: usize = s.parse().map_err(|_| {
                    Error::InvalidParameter(format!("bad channel index {s:?} in {text:?}"))
                })?;
                if c == 0 {
                    return Err(Error::InvalidParameter(
                        "channel indices are 1-based".into(),
                    ));
                }
                Ok(c - 1)
            };
            return Ok(Self::Pair(parse(parts[0])?, parse(parts[1])?));
        }
        if let Some(rest) = text.strip_prefix("asymmetric ") {
            let k: usize = rest.trim().parse().map_err(|_| {
                Error::InvalidParameter(format!("bad asymmetric order in {text:?}"))
            })?;
            return Ok(Self::Asymmetric(k));
        }
        Ok(Self::Partition(Partition::parse(text)?))
    }

    fn max_channel(&self) -> Option<usize> {
        match self {
            Self::Pair(i, j) => Some(*i.max(j)),
            Self::Partition(p) => Some(p.max_channel()),
            _ => None,
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Pair(i, j) => write!(f, "pair {} {}", i + 1, j + 1),
            Self::Partition(p) => write!(f, "{p}"),
            Self::QPb => write!(f, "q_pb"),
            Self::QB => write!(f, "q_b"),
            Self::MandelQ => write!(f, "mandel_q"),
            Self::MatrixOfMoments => write!(f, "matrix_of_moments"),
            Self::Asymmetric(k) => write!(f, "asymmetric {k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Analytic,
    Empirical,
}

/// Uniform access to block no-click moments and condition evaluation,
/// backed either by the analytic oracle or by a dataset.
pub trait MomentSource: Sync {
    fn kind(&self) -> SourceKind;
    fn channels(&self) -> usize;
    /// Memoized ⟨:m̂_I:⟩ with stderr (0 for analytic sources).
    fn block_moment(&self, block: &[usize]) -> Result<MomentEstimate>;
    /// One or more criterion results for the condition (the asymmetric
    /// conditions yield two values).
    fn evaluate(&self, condition: &Condition, threshold: f64) -> Result<Vec<CriterionResult>>;
}

/// Exact moments from (state, splitting, detectors).
pub struct AnalyticSource {
    dist: PhotonNumberDistribution<f64>,
    splitting: SplittingConfig<f64>,
    detectors: DetectorModel<f64>,
    memo: Mutex<HashMap<Vec<usize>, f64>>,
}

impl AnalyticSource {
    pub fn new(
        dist: PhotonNumberDistribution<f64>,
        splitting: SplittingConfig<f64>,
        detectors: DetectorModel<f64>,
    ) -> Result<Self> {
        if detectors.channels() != splitting.channels() {
            return Err(Error::InvalidParameter(format!(
                "detector model covers {} channels, splitting has {}",
                detectors.channels(),
                splitting.channels()
            )));
        }
        Ok(Self {
            dist,
            splitting,
            detectors,
            memo: Mutex::new(HashMap::new()),
        })
    }

    /// Named equal-splitting criteria require identical channels.
    fn require_equal_channels(&self, what: &str) -> Result<(f64, f64)> {
        let w0 = self.splitting.weight(0);
        let eta0 = self.detectors.eta()[0];
        let nu0 = self.detectors.nu()[0];
        let equal = self.splitting.weights().iter().all(|&w| w == w0)
            && self.detectors.eta().iter().all(|&e| e == eta0)
            && self.detectors.nu().iter().all(|&v| v == nu0);
        if !equal {
            return Err(Error::UnsupportedCondition(format!(
                "{what} assumes equal splitting and identical detectors"
            )));
        }
        Ok((eta0, nu0))
    }
}

impl MomentSource for AnalyticSource {
    fn kind(&self) -> SourceKind {
        SourceKind::Analytic
    }

    fn channels(&self) -> usize {
        self.splitting.channels()
    }

    fn block_moment(&self, block: &[usize]) -> Result<MomentEstimate> {
        let mut key = block.to_vec();
        key.sort_unstable();
        key.dedup();
        let mut memo = self.memo.lock().unwrap();
        let value = match memo.get(&key) {
            Some(&v) => v,
            None => {
                let v = oracle::block_moment(&self.dist, &self.splitting, &self.detectors, &key)?;
                memo.insert(key, v);
                v
            }
        };
        Ok(MomentEstimate {
            value,
            stderr: 0.0,
            pulses: 0,
        })
    }

    fn evaluate(&self, condition: &Condition, _threshold: f64) -> Result<Vec<CriterionResult>> {
        check_channels(self, condition)?;
        let result = match condition {
            Condition::Pair(i, j) => {
                let v =
                    oracle::covariance_condition(&self.dist, &self.splitting, &self.detectors, *i, *j)?;
                vec![CriterionResult::analytic(condition.to_string(), v)]
            }
            Condition::Partition(p) => {
                let v = oracle::partition_condition(&self.dist, &self.splitting, &self.detectors, p)?;
                vec![CriterionResult::analytic(condition.to_string(), v)]
            }
            Condition::QPb => vec![estimate::q_pb_analytic(
                &self.dist,
                &self.splitting,
                &self.detectors,
            )?],
            Condition::QB => {
                let (eta, nu) = self.require_equal_channels("q_b")?;
                let v = estimate::q_b(&self.dist, self.channels(), eta, nu)?;
                vec![CriterionResult::analytic("q_b".into(), v)]
            }
            Condition::MandelQ => {
                let v = estimate::mandel_q(&self.dist)?;
                vec![CriterionResult::analytic("mandel_q".into(), v)]
            }
            Condition::MatrixOfMoments => {
                let (eta, nu) = self.require_equal_channels("matrix_of_moments")?;
                let (_, min_eig) =
                    estimate::matrix_of_moments(&self.dist, self.channels(), eta, nu)?;
                vec![CriterionResult::analytic("matrix_of_moments".into(), min_eig)]
            }
            Condition::Asymmetric(k) => {
                let (eta, nu) = self.require_equal_channels("asymmetric")?;
                let a = estimate::asymmetric_condition(&self.dist, self.channels(), eta, nu, *k)?;
                vec![
                    CriterionResult::analytic(format!("asymmetric {k} two-block"), a.two_block),
                    CriterionResult::analytic(format!("asymmetric {k} three-block"), a.three_block),
                ]
            }
        };
        Ok(result)
    }
}

/// Estimated moments from a recorded dataset.
pub struct EmpiricalSource {
    dataset: ClickDataset,
    memo: Mutex<HashMap<Vec<usize>, MomentEstimate>>,
}

impl EmpiricalSource {
    pub fn new(dataset: ClickDataset) -> Self {
        Self {
            dataset,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn dataset(&self) -> &ClickDataset {
        &self.dataset
    }
}

impl MomentSource for EmpiricalSource {
    fn kind(&self) -> SourceKind {
        SourceKind::Empirical
    }

    fn channels(&self) -> usize {
        self.dataset.channels()
    }

    fn block_moment(&self, block: &[usize]) -> Result<MomentEstimate> {
        let mut key = block.to_vec();
        key.sort_unstable();
        key.dedup();
        let mut memo = self.memo.lock().unwrap();
        if let Some(&m) = memo.get(&key) {
            return Ok(m);
        }
        let m = estimate::block_moment(&self.dataset, &key)?;
        memo.insert(key, m);
        Ok(m)
    }

    fn evaluate(&self, condition: &Condition, threshold: f64) -> Result<Vec<CriterionResult>> {
        check_channels(self, condition)?;
        let result = match condition {
            Condition::Pair(i, j) => {
                vec![estimate::covariance_estimate(&self.dataset, *i, *j, threshold)?]
            }
            Condition::Partition(p) => {
                vec![estimate::partition_estimate(&self.dataset, p, threshold)?]
            }
            Condition::QPb => vec![estimate::q_pb_empirical(&self.dataset, threshold)?],
            other => {
                return Err(Error::UnsupportedCondition(format!(
                    "{other} needs an analytic state configuration"
                )))
            }
        };
        Ok(result)
    }
}

fn check_channels(source: &dyn MomentSource, condition: &Condition) -> Result<()> {
    if let Some(max) = condition.max_channel() {
        if max >= source.channels() {
            return Err(Error::InvalidParameter(format!(
                "condition `{condition}` references channel {}, source has {}",
                max + 1,
                source.channels()
            )));
        }
    }
    Ok(())
}

/// Full certification outcome. Wall time is kept out of the serialized
/// form so that reports are byte-identical across reruns.
#[derive(Debug, Clone, Serialize)]
pub struct CertificationReport {
    pub source: SourceKind,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub configuration: Option<serde_json::Value>,
    pub results: Vec<CriterionResult>,
    /// Label of the strongest nonclassical result, if any.
    pub best_violation: Option<String>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl CertificationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    /// CSV summary: label,value,stderr,significance,verdict.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,value,stderr,significance,verdict\n");
        for r in &self.results {
            let verdict = match r.verdict {
                Verdict::Nonclassical => "nonclassical",
                Verdict::Inconclusive => "inconclusive",
            };
            s.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{}\n",
                r.label, r.value, r.stderr, r.significance, verdict
            ));
        }
        s
    }
}

/// Rank violations: by significance for empirical sources, by value (most
/// negative first) for analytic ones.
fn violation_order(kind: SourceKind, a: &CriterionResult, b: &CriterionResult) -> std::cmp::Ordering {
    match kind {
        SourceKind::Empirical => b
            .significance
            .partial_cmp(&a.significance)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.value.partial_cmp(&b.value).unwrap_or(std::cmp::Ordering::Equal)),
        SourceKind::Analytic => a
            .value
            .partial_cmp(&b.value)
            .unwrap_or(std::cmp::Ordering::Equal),
    }
}

/// Evaluate every condition and assemble the report; results keep the
/// condition order, `best_violation` points at the strongest nonclassical result.
pub fn certify(
    source: &dyn MomentSource,
    conditions: &[Condition],
    threshold: f64,
) -> Result<CertificationReport> {
    if conditions.is_empty() {
        return Err(Error::InvalidParameter("no conditions to evaluate".into()));
    }
    let start = Instant::now();
    let mut results = Vec::new();
    for condition in conditions {
        results.extend(source.evaluate(condition, threshold)?);
    }
    let best_violation = results
        .iter()
        .filter(|r| r.verdict == Verdict::Nonclassical)
        .min_by(|a, b| violation_order(source.kind(), a, b))
        .map(|r| r.label.clone());
    Ok(CertificationReport {
        source: source.kind(),
        threshold,
        configuration: None,
        results,
        best_violation,
        wall_time: start.elapsed(),
    })
}

/// Evaluate every partition with at least two blocks and rank them.
pub fn rank_partitions(
    source: &dyn MomentSource,
    threshold: f64,
) -> Result<Vec<(Partition, CriterionResult)>> {
    let n = source.channels();
    if n > 8 {
        return Err(Error::InvalidParameter(format!(
            "partition ranking supports up to 8 channels, got {n}"
        )));
    }
    let mut ranked: Vec<(Partition, CriterionResult)> = enumerate_partitions(n, 2)?
        .into_iter()
        .map(|p| {
            let mut rs = source.evaluate(&Condition::Partition(p.clone()), threshold)?;
            Ok((p, rs.pop().unwrap()))
        })
        .collect::<Result<_>>()?;
    let kind = source.kind();
    ranked.sort_by(|a, b| violation_order(kind, &a.1, &b.1));
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::PhotonNumberDistribution as Dist;

    fn analytic(dist: Dist<f64>, n: usize, eta: f64) -> AnalyticSource {
        AnalyticSource::new(
            dist,
            SplittingConfig::symmetric(n).unwrap(),
            DetectorModel::uniform(n, eta, 0.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn condition_parsing() {
        assert_eq!(Condition::parse("pair 1 3").unwrap(), Condition::Pair(0, 2));
        assert_eq!(Condition::parse("q_pb").unwrap(), Condition::QPb);
        assert_eq!(Condition::parse("asymmetric 3").unwrap(), Condition::Asymmetric(3));
        assert_eq!(
            Condition::parse("1,2|3").unwrap(),
            Condition::Partition(Partition::parse("1,2|3").unwrap())
        );
        assert!(Condition::parse("pair 0 1").is_err());
        assert!(Condition::parse("pair x y").is_err());
        assert_eq!(Condition::parse("pair 2 4").unwrap().to_string(), "pair 2 4");
    }

    #[test]
    fn analytic_coherent_is_inconclusive_everywhere() {
        let src = analytic(Dist::coherent(1.0).unwrap(), 4, 0.7);
        let conditions: Vec<Condition> = enumerate_partitions(4, 2)
            .unwrap()
            .into_iter()
            .map(Condition::Partition)
            .collect();
        let report = certify(&src, &conditions, 3.0).unwrap();
        assert_eq!(report.results.len(), 14);
        for r in &report.results {
            assert!(r.value.abs() < 1e-14, "{}", r.label);
            assert_eq!(r.verdict, Verdict::Inconclusive);
        }
        assert!(report.best_violation.is_none() || report.results.iter().all(|r| r.value.abs() < 1e-14));
    }

    #[test]
    fn analytic_single_photon_violates_every_multiblock_partition() {
        let src = analytic(Dist::fock(1).unwrap(), 4, 1.0);
        let ranked = rank_partitions(&src, 3.0).unwrap();
        for (p, r) in &ranked {
            assert!(r.value < 0.0, "{p}");
            assert_eq!(r.verdict, Verdict::Nonclassical);
        }
        // the full partition is the most negative
        assert_eq!(ranked[0].0, Partition::full(4).unwrap());
    }

    #[test]
    fn classical_mixture_has_no_negative_partition() {
        let dist = Dist::mixture(&[
            (0.4, Dist::coherent(0.7).unwrap()),
            (0.6, Dist::thermal(1.1).unwrap()),
        ])
        .unwrap();
        let src = analytic(dist, 4, 0.8);
        for (p, r) in rank_partitions(&src, 3.0).unwrap() {
            assert!(r.value >= -1e-12, "{p}");
        }
    }

    #[test]
    fn empirical_source_answers_same_queries_as_analytic() {
        use crate::simulate::{sample_dataset, SimulationPlan};
        let dist = Dist::fock(1).unwrap();
        let splitting = SplittingConfig::symmetric(4).unwrap();
        let detectors = DetectorModel::uniform(4, 1.0, 0.0).unwrap();
        let plan = SimulationPlan::new(
            dist.clone(),
            splitting.clone(),
            detectors.clone(),
            200_000,
            3,
        )
        .unwrap();
        let empirical = EmpiricalSource::new(sample_dataset(&plan).unwrap());
        let exact = AnalyticSource::new(dist, splitting, detectors).unwrap();
        for block in [vec![0], vec![1, 3], vec![0, 1, 2, 3]] {
            let e = empirical.block_moment(&block).unwrap();
            let a = exact.block_moment(&block).unwrap();
            assert!(
                (e.value - a.value).abs() <= 4.0 * e.stderr.max(1e-6),
                "block {block:?}: {} vs {}",
                e.value,
                a.value
            );
        }
    }

    #[test]
    fn empirical_source_rejects_analytic_only_conditions() {
        let ds = ClickDataset::parse("CLICKHIST 1\nchannels 4\npulses 2\n0000 2\n").unwrap();
        let src = EmpiricalSource::new(ds);
        assert!(src.evaluate(&Condition::MandelQ, 3.0).is_err());
        assert!(src.evaluate(&Condition::QB, 3.0).is_err());
    }

    #[test]
    fn named_equal_splitting_conditions_require_equal_channels() {
        let src = AnalyticSource::new(
            Dist::fock(1).unwrap(),
            SplittingConfig::new(vec![0.7, 0.3], 0.0).unwrap(),
            DetectorModel::uniform(2, 0.7, 0.0).unwrap(),
        )
        .unwrap();
        assert!(src.evaluate(&Condition::QB, 3.0).is_err());
        assert!(src.evaluate(&Condition::QPb, 3.0).is_ok());
    }

    #[test]
    fn report_serialization_is_deterministic() {
        let src = analytic(Dist::fock(1).unwrap(), 4, 1.0);
        let conditions = vec![
            Condition::Pair(0, 2),
            Condition::Partition(Partition::full(4).unwrap()),
        ];
        let a = certify(&src, &conditions, 3.0).unwrap().to_json();
        let b = certify(&src, &conditions, 3.0).unwrap().to_json();
        assert_eq!(a, b);
        assert!(a.contains("\"best_violation\""));
    }

    #[test]
    fn certify_requires_conditions_and_known_channels() {
        let src = analytic(Dist::fock(1).unwrap(), 2, 1.0);
        assert!(certify(&src, &[], 3.0).is_err());
        assert!(certify(&src, &[Condition::Pair(0, 5)], 3.0).is_err());
    }
}
