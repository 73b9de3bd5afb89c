//! Statistical soundness of the dataset estimators: consistency against
//! the analytic oracle across many seeds, and bootstrap validation of the
//! delta-method errors.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use clickmux::estimate::{self, bootstrap_resample};
use clickmux::network::{Partition, SplittingConfig};
use clickmux::oracle::{self, DetectorModel};
use clickmux::simulate::{sample_dataset, SimulationPlan};
use clickmux::states::PhotonNumberDistribution as Dist;

fn network() -> (SplittingConfig<f64>, DetectorModel<f64>) {
    (
        SplittingConfig::new(vec![0.4, 0.3, 0.2, 0.1], 0.0).unwrap(),
        DetectorModel::new(vec![0.7, 0.8, 0.6, 0.9], vec![0.01, 0.0, 0.005, 0.0]).unwrap(),
    )
}

#[test]
fn estimators_are_consistent_across_seeds() {
    let (splitting, detectors) = network();
    let pulses = 100_000u64;
    let full = Partition::full(4).unwrap();
    for dist in [
        Dist::coherent(1.0).unwrap(),
        Dist::thermal(1.0).unwrap(),
        Dist::fock(1).unwrap(),
        Dist::photon_added_thermal(1, 1.0).unwrap(),
    ] {
        let pair_oracle =
            oracle::covariance_condition(&dist, &splitting, &detectors, 0, 2).unwrap();
        let full_oracle =
            oracle::partition_condition(&dist, &splitting, &detectors, &full).unwrap();
        let mut hits = 0;
        for seed in 0..100u64 {
            let plan = SimulationPlan::new(
                dist.clone(),
                splitting.clone(),
                detectors.clone(),
                pulses,
                31_000 + seed,
            )
            .unwrap();
            let dataset = sample_dataset(&plan).unwrap();
            let pair = estimate::covariance_estimate(&dataset, 0, 2, 3.0).unwrap();
            let fullp = estimate::partition_estimate(&dataset, &full, 3.0).unwrap();
            if (pair.value - pair_oracle).abs() <= 4.0 * pair.stderr
                && (fullp.value - full_oracle).abs() <= 4.0 * fullp.stderr
            {
                hits += 1;
            }
        }
        assert!(hits >= 99, "{}: {hits}/100 seeds within 4 SE", dist.label());
    }
}

#[test]
fn delta_method_stderr_matches_bootstrap() {
    let (splitting, detectors) = network();
    let plan = SimulationPlan::new(
        Dist::thermal(1.0).unwrap(),
        splitting,
        detectors,
        200_000,
        99,
    )
    .unwrap();
    let dataset = sample_dataset(&plan).unwrap();
    let full = Partition::full(4).unwrap();
    let claimed = estimate::partition_estimate(&dataset, &full, 3.0)
        .unwrap()
        .stderr;

    let mut rng = ChaCha12Rng::seed_from_u64(5);
    let resamples: Vec<f64> = (0..200)
        .map(|_| {
            let resampled = bootstrap_resample(&dataset, &mut rng).unwrap();
            estimate::partition_estimate(&resampled, &full, 3.0)
                .unwrap()
                .value
        })
        .collect();
    let mean = resamples.iter().sum::<f64>() / resamples.len() as f64;
    let var = resamples.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
        / (resamples.len() - 1) as f64;
    let bootstrap = var.sqrt();
    assert!(
        (claimed - bootstrap).abs() <= 0.2 * bootstrap,
        "delta-method stderr {claimed:e} vs bootstrap {bootstrap:e}"
    );
}
