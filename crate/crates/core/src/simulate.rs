//! Monte Carlo generation of per-pulse click patterns.
//!
//! Each pulse draws a photon number n from the input distribution, routes
//! every photon independently to a channel (or the loss pseudo-channel)
//! according to the splitting weights, and lets channel k click with
//! probability 1 − (1−η_k)^{n_k} e^{−ν_k}.
//!
//! RNG contract: the pulse stream is split into fixed-size chunks; chunk i
//! of a run with root seed s is generated by a ChaCha12 stream keyed by
//! (s, chunk_offset + i) laid out as little-endian u64s in the first 16
//! key bytes (the tag `b"clickmux-stream!"` fills the rest). Serial and
//! parallel execution therefore produce bit-identical histograms, and a
//! long run equals the merge of shorter runs at the matching chunk
//! offsets.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::SplittingConfig;
use crate::oracle::DetectorModel;
use crate::states::PhotonNumberDistribution;

/// Largest channel count of a dataset; patterns are stored in a u64 key.
pub const MAX_CHANNELS: usize = 64;

/// Bit of channel `c` (0-based) in a pattern key. Channel 1 is the most
/// significant bit so that ascending keys match the ascending binary
/// strings of the file format.
pub fn pattern_bit(channels: usize, channel: usize) -> u64 {
    1u64 << (channels - 1 - channel)
}

/// Histogram of per-pulse click patterns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClickDataset {
    channels: usize,
    pulses: u64,
    histogram: BTreeMap<u64, u64>,
}

impl ClickDataset {
    pub fn new(channels: usize, histogram: BTreeMap<u64, u64>) -> Result<Self> {
        if channels == 0 || channels > MAX_CHANNELS {
            return Err(Error::Dataset(format!(
                "channel count {channels} out of range 1..={MAX_CHANNELS}"
            )));
        }
        let limit = if channels == 64 {
            u64::MAX
        } else {
            (1u64 << channels) - 1
        };
        let mut pulses = 0u64;
        for (&pattern, &count) in &histogram {
            if pattern > limit {
                return Err(Error::Dataset(format!(
                    "pattern {pattern:#b} does not fit {channels} channels"
                )));
            }
            pulses = pulses
                .checked_add(count)
                .ok_or_else(|| Error::Dataset("pulse count overflow".into()))?;
        }
        Ok(Self {
            channels,
            pulses,
            histogram,
        })
    }

    pub fn empty(channels: usize) -> Result<Self> {
        Self::new(channels, BTreeMap::new())
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pulses(&self) -> u64 {
        self.pulses
    }

    pub fn histogram(&self) -> &BTreeMap<u64, u64> {
        &self.histogram
    }

    /// Number of pulses with no click on any channel of `block`.
    pub fn noclick_count(&self, block: &[usize]) -> Result<u64> {
        let mask = self.block_mask(block)?;
        Ok(self
            .histogram
            .iter()
            .filter(|(&pattern, _)| pattern & mask == 0)
            .map(|(_, &count)| count)
            .sum())
    }

    pub fn block_mask(&self, block: &[usize]) -> Result<u64> {
        if block.is_empty() {
            return Err(Error::Dataset("empty channel block".into()));
        }
        let mut mask = 0u64;
        for &c in block {
            if c >= self.channels {
                return Err(Error::Dataset(format!(
                    "channel {} out of range 1..={}",
                    c + 1,
                    self.channels
                )));
            }
            mask |= pattern_bit(self.channels, c);
        }
        Ok(mask)
    }

    pub fn mean_clicks_per_pulse(&self) -> f64 {
        if self.pulses == 0 {
            return 0.0;
        }
        let clicks: u64 = self
            .histogram
            .iter()
            .map(|(&pattern, &count)| pattern.count_ones() as u64 * count)
            .sum();
        clicks as f64 / self.pulses as f64
    }

    /// Sum histograms of datasets with a common channel count.
    pub fn merge<'a>(datasets: impl IntoIterator<Item = &'a ClickDataset>) -> Result<ClickDataset> {
        let mut iter = datasets.into_iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::Dataset("merge of zero datasets".into()))?;
        let mut histogram = first.histogram.clone();
        let channels = first.channels;
        for ds in iter {
            if ds.channels != channels {
                return Err(Error::Dataset(format!(
                    "cannot merge datasets with {} and {channels} channels",
                    ds.channels
                )));
            }
            for (&pattern, &count) in &ds.histogram {
                let slot = histogram.entry(pattern).or_insert(0);
                *slot = slot
                    .checked_add(count)
                    .ok_or_else(|| Error::Dataset("count overflow on merge".into()))?;
            }
        }
        ClickDataset::new(channels, histogram)
    }

    /// Write the line-oriented CLICKHIST text format (bit-exact).
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        write!(out, "{}", self.to_clickhist())?;
        out.flush()?;
        Ok(())
    }

    pub fn to_clickhist(&self) -> String {
        let mut s = String::new();
        s.push_str("CLICKHIST 1\n");
        s.push_str(&format!("channels {}\n", self.channels));
        s.push_str(&format!("pulses {}\n", self.pulses));
        for (&pattern, &count) in &self.histogram {
            s.push_str(&format!(
                "{pattern:0width$b} {count}\n",
                width = self.channels
            ));
        }
        s
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let reader = BufReader::new(File::open(path)?);
        Self::from_clickhist_lines(reader.lines().map(|l| l.map_err(Error::from)))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_clickhist_lines(text.lines().map(|l| Ok(l.to_string())))
    }

    fn from_clickhist_lines(lines: impl Iterator<Item = Result<String>>) -> Result<Self> {
        let parse_err = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = lines.enumerate().map(|(i, l)| (i + 1, l));

        let (n1, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing CLICKHIST header"))?;
        if header? != "CLICKHIST 1" {
            return Err(parse_err(n1, "expected `CLICKHIST 1`"));
        }

        let mut field = |name: &str| -> Result<u64> {
            let (n, line) = lines
                .next()
                .ok_or_else(|| parse_err(0, &format!("missing `{name}` line")))?;
            let line = line?;
            let value = line
                .strip_prefix(name)
                .and_then(|rest| rest.strip_prefix(' '))
                .ok_or_else(|| parse_err(n, &format!("expected `{name} <value>`")))?;
            value
                .parse()
                .map_err(|_| parse_err(n, &format!("bad {name} value {value:?}")))
        };
        let channels = field("channels")? as usize;
        let declared_pulses = field("pulses")?;
        if channels == 0 || channels > MAX_CHANNELS {
            return Err(Error::Dataset(format!(
                "channel count {channels} out of range 1..={MAX_CHANNELS}"
            )));
        }

        let mut histogram = BTreeMap::new();
        let mut last_pattern = None;
        for (n, line) in lines {
            let line = line?;
            let (pattern_str, count_str) = line
                .split_once(' ')
                .ok_or_else(|| parse_err(n, "expected `<pattern> <count>`"))?;
            if pattern_str.len() != channels
                || !pattern_str.bytes().all(|b| b == b'0' || b == b'1')
            {
                return Err(parse_err(
                    n,
                    &format!("pattern {pattern_str:?} is not a {channels}-bit binary string"),
                ));
            }
            let pattern = u64::from_str_radix(pattern_str, 2).unwrap();
            if last_pattern.is_some_and(|prev| pattern <= prev) {
                return Err(parse_err(n, "patterns must be strictly ascending"));
            }
            last_pattern = Some(pattern);
            let count: u64 = count_str
                .parse()
                .map_err(|_| parse_err(n, &format!("bad count {count_str:?}")))?;
            histogram.insert(pattern, count);
        }

        let ds = ClickDataset::new(channels, histogram)?;
        if ds.pulses != declared_pulses {
            return Err(Error::Dataset(format!(
                "histogram counts sum to {}, file declares {declared_pulses} pulses",
                ds.pulses
            )));
        }
        Ok(ds)
    }
}

/// Everything needed for a reproducible simulation run.
#[derive(Debug, Clone)]
pub struct SimulationPlan {
    pub state: PhotonNumberDistribution<f64>,
    pub splitting: SplittingConfig<f64>,
    pub detectors: DetectorModel<f64>,
    pub pulses: u64,
    pub seed: u64,
    pub chunk_size: u64,
    /// Index of the first chunk of this run in the (seed-keyed) stream.
    pub chunk_offset: u64,
}

impl SimulationPlan {
    pub fn new(
        state: PhotonNumberDistribution<f64>,
        splitting: SplittingConfig<f64>,
        detectors: DetectorModel<f64>,
        pulses: u64,
        seed: u64,
    ) -> Result<Self> {
        let plan = Self {
            state,
            splitting,
            detectors,
            pulses,
            seed,
            chunk_size: 1 << 16,
            chunk_offset: 0,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pulses == 0 {
            return Err(Error::InvalidParameter("plan: pulses must be >= 1".into()));
        }
        if self.chunk_size == 0 {
            return Err(Error::InvalidParameter(
                "plan: chunk size must be >= 1".into(),
            ));
        }
        let n = self.splitting.channels();
        if n > MAX_CHANNELS {
            return Err(Error::InvalidParameter(format!(
                "plan: {n} channels exceed the dataset limit {MAX_CHANNELS}"
            )));
        }
        if self.detectors.channels() != n {
            return Err(Error::InvalidParameter(format!(
                "plan: detector model covers {} channels, splitting has {n}",
                self.detectors.channels()
            )));
        }
        Ok(())
    }
}

fn chunk_rng(seed: u64, chunk_index: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&chunk_index.to_le_bytes());
    key[16..32].copy_from_slice(b"clickmux-stream!");
    ChaCha12Rng::from_seed(key)
}

struct PulseSampler {
    channels: usize,
    state_cum: Vec<f64>,
    route_cum: Vec<f64>, // N channel entries, loss is the remainder
    one_minus_eta: Vec<f64>,
    dark_survival: Vec<f64>,
}

impl PulseSampler {
    fn new(plan: &SimulationPlan) -> Self {
        let cumsum = |probs: &[f64]| {
            let mut acc = 0.0;
            probs
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect::<Vec<f64>>()
        };
        Self {
            channels: plan.splitting.channels(),
            state_cum: cumsum(plan.state.probs()),
            route_cum: cumsum(plan.splitting.weights()),
            one_minus_eta: plan.detectors.eta().iter().map(|&e| 1.0 - e).collect(),
            dark_survival: plan.detectors.nu().iter().map(|&v| (-v).exp()).collect(),
        }
    }

    fn sample_pattern(&self, rng: &mut ChaCha12Rng, counts: &mut [u32]) -> u64 {
        counts.fill(0);
        let u: f64 = rng.gen();
        let n = self
            .state_cum
            .partition_point(|&c| c <= u)
            .min(self.state_cum.len() - 1);
        for _ in 0..n {
            let u: f64 = rng.gen();
            let k = self.route_cum.partition_point(|&c| c <= u);
            if k < self.channels {
                counts[k] += 1; // otherwise the photon is lost
            }
        }
        let mut pattern = 0u64;
        for (k, &nk) in counts.iter().enumerate() {
            let survival = self.one_minus_eta[k].powi(nk as i32) * self.dark_survival[k];
            let clicks = if nk == 0 && self.dark_survival[k] == 1.0 {
                false
            } else {
                rng.gen::<f64>() >= survival
            };
            if clicks {
                pattern |= pattern_bit(self.channels, k);
            }
        }
        pattern
    }
}

/// Simulate the plan. Deterministic for fixed (seed, chunk_size,
/// chunk_offset) regardless of thread count.
pub fn sample_dataset(plan: &SimulationPlan) -> Result<ClickDataset> {
    plan.validate()?;
    let sampler = PulseSampler::new(plan);
    let chunks = plan.pulses.div_ceil(plan.chunk_size);
    let histograms: Vec<BTreeMap<u64, u64>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(plan.seed, plan.chunk_offset + chunk);
            let pulses_in_chunk =
                plan.chunk_size.min(plan.pulses - chunk * plan.chunk_size);
            let mut counts = vec![0u32; sampler.channels];
            let mut hist = BTreeMap::new();
            for _ in 0..pulses_in_chunk {
                let pattern = sampler.sample_pattern(&mut rng, &mut counts);
                *hist.entry(pattern).or_insert(0u64) += 1;
            }
            hist
        })
        .collect();

    let mut merged = BTreeMap::new();
    for hist in histograms {
        for (pattern, count) in hist {
            *merged.entry(pattern).or_insert(0u64) += count;
        }
    }
    ClickDataset::new(plan.splitting.channels(), merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::PhotonNumberDistribution as Dist;
    use proptest::prelude::*;

    fn plan(state: Dist<f64>, channels: usize, eta: f64, pulses: u64, seed: u64) -> SimulationPlan {
        SimulationPlan::new(
            state,
            SplittingConfig::symmetric(channels).unwrap(),
            DetectorModel::uniform(channels, eta, 0.0).unwrap(),
            pulses,
            seed,
        )
        .unwrap()
    }

    #[test]
    fn vacuum_never_clicks() {
        let p = plan(Dist::fock(0).unwrap(), 4, 1.0, 10_000, 7);
        let ds = sample_dataset(&p).unwrap();
        assert_eq!(ds.histogram().len(), 1);
        assert_eq!(ds.histogram()[&0], 10_000);
    }

    #[test]
    fn single_photon_ideal_detection_gives_one_click_per_pulse() {
        let pulses = 200_000u64;
        let p = plan(Dist::fock(1).unwrap(), 4, 1.0, pulses, 11);
        let ds = sample_dataset(&p).unwrap();
        let mut per_channel = [0u64; 4];
        for (&pattern, &count) in ds.histogram() {
            assert_eq!(pattern.count_ones(), 1, "exactly one click per pulse");
            for c in 0..4 {
                if pattern & pattern_bit(4, c) != 0 {
                    per_channel[c] += count;
                }
            }
        }
        // multinomial law: frequency 1/4 within 4 standard errors
        let se = (0.25 * 0.75 / pulses as f64).sqrt();
        for c in 0..4 {
            let freq = per_channel[c] as f64 / pulses as f64;
            assert!((freq - 0.25).abs() < 4.0 * se, "channel {c}: {freq}");
        }
    }

    #[test]
    fn photon_number_conservation_with_ideal_detectors() {
        let p = plan(Dist::fock(3).unwrap(), 4, 1.0, 50_000, 3);
        let ds = sample_dataset(&p).unwrap();
        let mut collisions = 0u64;
        for (&pattern, &count) in ds.histogram() {
            let clicks = pattern.count_ones();
            assert!(clicks <= 3);
            if clicks < 3 {
                collisions += count;
            }
        }
        // P(all three photons in distinct channels) = (3/4)(2/4) = 0.375
        let freq = collisions as f64 / 50_000.0;
        let se = (0.625 * 0.375 / 50_000.0f64).sqrt();
        assert!((freq - 0.625).abs() < 4.0 * se, "{freq}");
    }

    #[test]
    fn reproducible_across_reruns() {
        let p = plan(Dist::thermal(1.0).unwrap(), 4, 0.7, 30_000, 42);
        let a = sample_dataset(&p).unwrap();
        let b = sample_dataset(&p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn merge_of_offset_runs_equals_one_long_run() {
        let mut long = plan(Dist::thermal(0.5).unwrap(), 3, 0.8, 40_000, 5);
        long.chunk_size = 10_000;
        let whole = sample_dataset(&long).unwrap();

        let mut first = long.clone();
        first.pulses = 20_000;
        let mut second = long.clone();
        second.pulses = 20_000;
        second.chunk_offset = 2;
        let merged = ClickDataset::merge([
            &sample_dataset(&first).unwrap(),
            &sample_dataset(&second).unwrap(),
        ])
        .unwrap();
        assert_eq!(whole, merged);
    }

    #[test]
    fn merge_identity_and_mismatch() {
        let p = plan(Dist::coherent(0.5).unwrap(), 2, 0.6, 5_000, 1);
        let ds = sample_dataset(&p).unwrap();
        let merged = ClickDataset::merge([&ds, &ClickDataset::empty(2).unwrap()]).unwrap();
        assert_eq!(merged, ds);

        let other = ClickDataset::empty(3).unwrap();
        assert!(ClickDataset::merge([&ds, &other]).is_err());
    }

    #[test]
    fn clickhist_format_round_trip() {
        let p = plan(Dist::thermal(2.0).unwrap(), 4, 0.9, 10_000, 9);
        let ds = sample_dataset(&p).unwrap();
        let text = ds.to_clickhist();
        assert!(text.starts_with("CLICKHIST 1\nchannels 4\npulses 10000\n"));
        let back = ClickDataset::parse(&text).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn clickhist_rejects_malformed_input() {
        assert!(ClickDataset::parse("BOGUS\n").is_err());
        // count sum does not match declared pulses
        let text = "CLICKHIST 1\nchannels 2\npulses 5\n00 3\n01 1\n";
        assert!(ClickDataset::parse(text).is_err());
        // out-of-order patterns
        let text = "CLICKHIST 1\nchannels 2\npulses 4\n01 3\n00 1\n";
        assert!(ClickDataset::parse(text).is_err());
        // wrong pattern width
        let text = "CLICKHIST 1\nchannels 2\npulses 1\n010 1\n";
        assert!(ClickDataset::parse(text).is_err());
        // empty histogram with zero pulses loads
        let text = "CLICKHIST 1\nchannels 2\npulses 0\n";
        let ds = ClickDataset::parse(text).unwrap();
        assert_eq!(ds.pulses(), 0);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.clickhist");
        let p = plan(Dist::coherent(1.0).unwrap(), 3, 0.5, 8_000, 2);
        let ds = sample_dataset(&p).unwrap();
        ds.write(&path).unwrap();
        assert_eq!(ClickDataset::read(&path).unwrap(), ds);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn parse_round_trip_any_histogram(
            entries in proptest::collection::btree_map(0u64..16, 0u64..1000, 0..10)
        ) {
            let ds = ClickDataset::new(4, entries).unwrap();
            prop_assert_eq!(ClickDataset::parse(&ds.to_clickhist()).unwrap(), ds);
        }
    }
}
