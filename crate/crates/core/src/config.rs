//! JSON run configuration: the user-facing schema behind `--config` and
//! the manifest files. A manifest written by a run is itself a valid
//! config and reproduces the run exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::SplittingConfig;
use crate::oracle::DetectorModel;
use crate::runner::Condition;
use crate::simulate::SimulationPlan;
use crate::states::{EmitterSpec, PhotonNumberDistribution};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Coherent { mean_photons: f64 },
    Thermal { nbar: f64 },
    Fock { n: usize },
    PhotonAddedThermal { m: usize, nbar: f64 },
    EmitterCluster { emitters: usize, p0: f64, p1: f64, p2: f64 },
}

impl StateSpec {
    pub fn build(&self) -> Result<PhotonNumberDistribution<f64>> {
        match *self {
            Self::Coherent { mean_photons } => PhotonNumberDistribution::coherent(mean_photons),
            Self::Thermal { nbar } => PhotonNumberDistribution::thermal(nbar),
            Self::Fock { n } => PhotonNumberDistribution::fock(n),
            Self::PhotonAddedThermal { m, nbar } => {
                PhotonNumberDistribution::photon_added_thermal(m, nbar)
            }
            Self::EmitterCluster {
                emitters,
                p0,
                p1,
                p2,
            } => PhotonNumberDistribution::emitter_cluster(&EmitterSpec::new(emitters, p0, p1, p2)?),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SplittingSpec {
    Symmetric {
        symmetric: usize,
        #[serde(default)]
        loss_weight: f64,
    },
    Weights {
        weights: Vec<f64>,
        #[serde(default)]
        loss_weight: f64,
    },
}

impl SplittingSpec {
    pub fn build(&self) -> Result<SplittingConfig<f64>> {
        match self {
            Self::Symmetric {
                symmetric,
                loss_weight,
            } => {
                if *symmetric == 0 {
                    return Err(Error::InvalidParameter(
                        "splitting: at least one channel required".into(),
                    ));
                }
                let w = (1.0 - loss_weight) / *symmetric as f64;
                SplittingConfig::new(vec![w; *symmetric], *loss_weight)
            }
            Self::Weights {
                weights,
                loss_weight,
            } => SplittingConfig::new(weights.clone(), *loss_weight),
        }
    }

    pub fn channels(&self) -> usize {
        match self {
            Self::Symmetric { symmetric, .. } => *symmetric,
            Self::Weights { weights, .. } => weights.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DetectorSpec {
    pub eta: f64,
    #[serde(default)]
    pub nu: f64,
}

fn default_pulses() -> u64 {
    1_000_000
}

fn default_chunk_size() -> u64 {
    1 << 16
}

fn default_threshold() -> f64 {
    crate::estimate::DEFAULT_THRESHOLD
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub state: StateSpec,
    pub splitting: SplittingSpec,
    /// One entry per channel; a single entry applies to all channels.
    pub detectors: Vec<DetectorSpec>,
    #[serde(default = "default_pulses")]
    pub pulses: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_chunk_size")]
    pub chunk_size: u64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Condition syntax: partition text ("1,2|3|4"), "pair i j", or one of
    /// q_pb, q_b, mandel_q, matrix_of_moments, "asymmetric k". Empty means
    /// the default set (pair of the first two spaced channels + full
    /// partition).
    #[serde(default)]
    pub conditions: Vec<String>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serialization");
        s.push('\n');
        s
    }

    pub fn build_detectors(&self) -> Result<DetectorModel<f64>> {
        let n = self.splitting.channels();
        let specs: Vec<DetectorSpec> = if self.detectors.len() == 1 {
            vec![self.detectors[0]; n]
        } else {
            self.detectors.clone()
        };
        if specs.len() != n {
            return Err(Error::InvalidParameter(format!(
                "config: {} detector entries for {n} channels",
                self.detectors.len()
            )));
        }
        DetectorModel::new(
            specs.iter().map(|d| d.eta).collect(),
            specs.iter().map(|d| d.nu).collect(),
        )
    }

    pub fn build_plan(&self) -> Result<SimulationPlan> {
        let mut plan = SimulationPlan::new(
            self.state.build()?,
            self.splitting.build()?,
            self.build_detectors()?,
            self.pulses,
            self.seed,
        )?;
        plan.chunk_size = self.chunk_size;
        plan.validate()?;
        Ok(plan)
    }

    /// Parsed condition list, falling back to the default pair + full
    /// partition when the config leaves it empty.
    pub fn build_conditions(&self) -> Result<Vec<Condition>> {
        if self.conditions.is_empty() {
            return default_conditions(self.splitting.channels());
        }
        self.conditions.iter().map(|c| Condition::parse(c)).collect()
    }

    /// The resolved form with every default filled in; this is what goes
    /// into run manifests.
    pub fn resolved(&self) -> Result<Self> {
        let mut cfg = self.clone();
        if cfg.conditions.is_empty() {
            cfg.conditions = default_conditions(cfg.splitting.channels())?
                .iter()
                .map(|c| c.to_string())
                .collect();
        }
        if cfg.detectors.len() == 1 {
            cfg.detectors = vec![cfg.detectors[0]; cfg.splitting.channels()];
        }
        Ok(cfg)
    }
}

pub fn default_conditions(channels: usize) -> Result<Vec<Condition>> {
    let mut conditions = Vec::new();
    if channels >= 2 {
        let j = if channels >= 3 { 2 } else { 1 };
        conditions.push(Condition::Pair(0, j));
        conditions.push(Condition::Partition(
            crate::network::Partition::full(channels)?,
        ));
    } else {
        return Err(Error::InvalidParameter(
            "conditions need at least 2 channels".into(),
        ));
    }
    Ok(conditions)
}

/// The two built-in experiment presets.
pub fn preset(name: &str, emitters: Option<usize>, eta: Option<f64>) -> Result<RunConfig> {
    match name {
        // Unbalanced 70:30 beam splitter, detection efficiency 0.7,
        // one-photon-added thermal input.
        "fig2" => Ok(RunConfig {
            state: StateSpec::PhotonAddedThermal { m: 1, nbar: 1.0 },
            splitting: SplittingSpec::Weights {
                weights: vec![0.7, 0.3],
                loss_weight: 0.0,
            },
            detectors: vec![DetectorSpec { eta: 0.7, nu: 0.0 }; 2],
            pulses: default_pulses(),
            seed: 0,
            chunk_size: default_chunk_size(),
            threshold: default_threshold(),
            conditions: vec!["pair 1 2".into()],
        }),
        // Cluster of M single-photon emitters at overall efficiency
        // eta_total, detected through a symmetric 4-channel multiplexer.
        // The total efficiency is folded into the per-emitter photon
        // probability, which leaves unit-efficiency detectors.
        "cluster-experiment" => {
            let m = emitters.unwrap_or(14);
            let eta_total = eta.unwrap_or(0.009);
            if !(0.0..=1.0).contains(&eta_total) {
                return Err(Error::InvalidParameter(format!(
                    "preset: overall efficiency {eta_total} outside [0, 1]"
                )));
            }
            Ok(RunConfig {
                state: StateSpec::EmitterCluster {
                    emitters: m,
                    p0: 1.0 - eta_total,
                    p1: eta_total,
                    p2: 0.0,
                },
                splitting: SplittingSpec::Symmetric {
                    symmetric: 4,
                    loss_weight: 0.0,
                },
                detectors: vec![DetectorSpec { eta: 1.0, nu: 0.0 }; 4],
                pulses: 10_000_000,
                seed: 0,
                chunk_size: default_chunk_size(),
                threshold: default_threshold(),
                conditions: vec!["pair 1 3".into(), "1|2|3|4".into()],
            })
        }
        other => Err(Error::InvalidParameter(format!(
            "unknown preset {other:?} (available: fig2, cluster-experiment)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_json() {
        let cfg = preset("cluster-experiment", Some(14), None).unwrap();
        let text = cfg.to_json();
        let back = RunConfig::from_json(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn manifest_is_a_valid_config() {
        let cfg = preset("fig2", None, None).unwrap();
        let resolved = cfg.resolved().unwrap();
        let back = RunConfig::from_json(&resolved.to_json()).unwrap();
        assert_eq!(back.resolved().unwrap(), resolved);
    }

    #[test]
    fn splitting_spec_variants() {
        let sym: SplittingSpec =
            serde_json::from_str(r#"{"symmetric": 4, "loss_weight": 0.2}"#).unwrap();
        let s = sym.build().unwrap();
        assert_eq!(s.channels(), 4);
        assert_eq!(s.loss_weight(), 0.2);
        assert!((s.weights()[0] - 0.2).abs() < 1e-15);

        let w: SplittingSpec = serde_json::from_str(r#"{"weights": [0.7, 0.3]}"#).unwrap();
        assert_eq!(w.build().unwrap().weights(), &[0.7, 0.3]);
    }

    #[test]
    fn detector_broadcast_and_mismatch() {
        let mut cfg = preset("cluster-experiment", None, None).unwrap();
        cfg.detectors = vec![DetectorSpec { eta: 0.5, nu: 0.0 }];
        assert_eq!(cfg.build_detectors().unwrap().channels(), 4);
        cfg.detectors = vec![DetectorSpec { eta: 0.5, nu: 0.0 }; 3];
        assert!(cfg.build_detectors().is_err());
    }

    #[test]
    fn default_condition_set() {
        let conds = default_conditions(4).unwrap();
        assert_eq!(conds[0].to_string(), "pair 1 3");
        assert_eq!(conds[1].to_string(), "1|2|3|4");
        assert!(default_conditions(1).is_err());
    }

    #[test]
    fn state_specs_build() {
        let specs = [
            StateSpec::Coherent { mean_photons: 1.0 },
            StateSpec::Thermal { nbar: 1.0 },
            StateSpec::Fock { n: 2 },
            StateSpec::PhotonAddedThermal { m: 1, nbar: 0.5 },
            StateSpec::EmitterCluster {
                emitters: 3,
                p0: 0.9,
                p1: 0.1,
                p2: 0.0,
            },
        ];
        for s in specs {
            assert!(s.build().is_ok(), "{s:?}");
        }
        assert!(StateSpec::Coherent { mean_photons: -1.0 }.build().is_err());
    }

    #[test]
    fn unknown_preset_rejected() {
        assert!(preset("nope", None, None).is_err());
    }
}
