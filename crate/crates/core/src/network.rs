//! Multiport splitter weights and channel partitions.
//!
//! Only the first row of the splitting unitary matters for a single
//! occupied input mode, so the network is represented by the intensity
//! weights w_k = |u_{1,k}|² plus an optional loss pseudo-channel.
//! Channel indices are 0-based in the API; the text syntax ("1,2|3|4")
//! is 1-based.

use std::fmt;

use crate::error::{Error, Result};
use crate::real::Real;

/// Largest channel count for exhaustive partition enumeration; Bell(12)
/// is ~4.2e6, anything beyond is not desk-scale.
pub const MAX_ENUMERATION_CHANNELS: usize = 12;

/// Intensity weights of the multiport splitter.
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingConfig<F> {
    weights: Vec<F>,
    loss_weight: F,
}

impl<F: Real> SplittingConfig<F> {
    /// Validated config; the weight sum (including loss) may be off from 1
    /// by at most 1e-9, in which case it is renormalized.
    pub fn new(weights: Vec<F>, loss_weight: F) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter(
                "splitting: at least one channel required".into(),
            ));
        }
        for (k, w) in weights.iter().enumerate() {
            if !(*w >= F::zero()) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "splitting: weight {w} of channel {} invalid",
                    k + 1
                )));
            }
        }
        if !(loss_weight >= F::zero()) || !loss_weight.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "splitting: loss weight {loss_weight} invalid"
            )));
        }
        let sum = weights.iter().copied().sum::<F>() + loss_weight;
        let tol = F::from_f64(1e-9)
            .unwrap()
            .max(F::epsilon() * F::from_f64(64.0).unwrap());
        if (sum - F::one()).abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "splitting: weights sum to {sum}, expected 1"
            )));
        }
        let weights = weights.into_iter().map(|w| w / sum).collect();
        Ok(Self {
            weights,
            loss_weight: loss_weight / sum,
        })
    }

    /// Symmetric N-channel splitting with no loss.
    pub fn symmetric(channels: usize) -> Result<Self> {
        if channels == 0 {
            return Err(Error::InvalidParameter(
                "splitting: at least one channel required".into(),
            ));
        }
        let w = F::from_usize_(channels).recip();
        Ok(Self {
            weights: vec![w; channels],
            loss_weight: F::zero(),
        })
    }

    pub fn channels(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    pub fn weight(&self, channel: usize) -> F {
        self.weights[channel]
    }

    pub fn loss_weight(&self) -> F {
        self.loss_weight
    }
}

/// Disjoint, non-empty blocks of channel indices (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Canonicalized partition: indices sorted within blocks, blocks sorted
    /// by their smallest element. Rejects empty or overlapping blocks.
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidPartition("no blocks".into()));
        }
        let mut blocks: Vec<Vec<usize>> = blocks;
        let mut seen = std::collections::BTreeSet::new();
        for block in &mut blocks {
            if block.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            block.sort_unstable();
            block.dedup();
            for &c in block.iter() {
                if !seen.insert(c) {
                    return Err(Error::InvalidPartition(format!(
                        "channel {} appears in more than one block",
                        c + 1
                    )));
                }
            }
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(Self { blocks })
    }

    /// Two singleton blocks {i} and {j}.
    pub fn pair(i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(Error::InvalidPartition(format!(
                "pair channels must differ, got {} twice",
                i + 1
            )));
        }
        Self::new(vec![vec![i], vec![j]])
    }

    /// Full partition of N channels into singletons.
    pub fn full(channels: usize) -> Result<Self> {
        if channels == 0 {
            return Err(Error::InvalidPartition("no channels".into()));
        }
        Self::new((0..channels).map(|c| vec![c]).collect())
    }

    /// Parse the 1-based text syntax, e.g. "1,2|3|4".
    pub fn parse(text: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        for part in text.split('|') {
            let mut block = Vec::new();
            for idx in part.split(',') {
                let idx = idx.trim();
                let c: usize = idx.parse().map_err(|_| {
                    Error::InvalidPartition(format!("bad channel index {idx:?} in {text:?}"))
                })?;
                if c == 0 {
                    return Err(Error::InvalidPartition(
                        "channel indices are 1-based".into(),
                    ));
                }
                block.push(c - 1);
            }
            blocks.push(block);
        }
        Self::new(blocks)
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// All channels covered by the partition, sorted.
    pub fn union(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.blocks.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }

    /// Largest channel index referenced.
    pub fn max_channel(&self) -> usize {
        *self.blocks.iter().flatten().max().unwrap()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (b, block) in self.blocks.iter().enumerate() {
            if b > 0 {
                write!(f, "|")?;
            }
            for (i, c) in block.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", c + 1)?;
            }
        }
        Ok(())
    }
}

/// All set partitions of {1..N} with at least `min_blocks` blocks, in the
/// lexicographic order of their restricted-growth strings.
pub fn enumerate_partitions(channels: usize, min_blocks: usize) -> Result<Vec<Partition>> {
    if channels == 0 || channels > MAX_ENUMERATION_CHANNELS {
        return Err(Error::InvalidParameter(format!(
            "partition enumeration supports 1..={MAX_ENUMERATION_CHANNELS} channels, got {channels}"
        )));
    }
    if min_blocks == 0 || min_blocks > channels {
        return Err(Error::InvalidParameter(format!(
            "min_blocks = {min_blocks} out of range 1..={channels}"
        )));
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; channels];
    collect_rgs(&mut rgs, 1, 0, channels, min_blocks, &mut out);
    Ok(out)
}

fn collect_rgs(
    rgs: &mut Vec<usize>,
    pos: usize,
    max_label: usize,
    channels: usize,
    min_blocks: usize,
    out: &mut Vec<Partition>,
) {
    if pos == channels {
        let nblocks = max_label + 1;
        if nblocks >= min_blocks {
            let mut blocks = vec![Vec::new(); nblocks];
            for (c, &label) in rgs.iter().enumerate() {
                blocks[label].push(c);
            }
            out.push(Partition { blocks });
        }
        return;
    }
    for label in 0..=max_label + 1 {
        rgs[pos] = label;
        collect_rgs(rgs, pos + 1, max_label.max(label), channels, min_blocks, out);
    }
    rgs[pos] = 0;
}
