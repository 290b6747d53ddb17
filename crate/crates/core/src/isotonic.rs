//! Weighted isotonic regression and the per-ranking feature map.
//!
//! For an exhaustive ordered partition `A_1 ≺ … ≺ A_l` and a set function
//! `F`, each block gets the target `a_i = −(F(B_i) − F(B_{i−1})) / |A_i|`
//! with weight `β_i = |A_i|`, where `B_i` is the union of the first `i`
//! blocks. The feature map is the weighted projection of these targets onto
//! sequences that are non-decreasing from least to most preferred block,
//! spread back onto the objects of each block.

use crate::error::{Error, Result};
use crate::ranking::OrderedPartition;
use crate::rng::{self, Stream};
use crate::submodular::SetFunction;

/// Largest number of blocks accepted by [`isotonic_bruteforce`].
pub const BRUTEFORCE_MAX_BLOCKS: usize = 12;

/// Per-block regression targets and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTargets {
    targets: Vec<f64>,
    weights: Vec<f64>,
}

impl BlockTargets {
    pub fn new(targets: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidArgument("at least one block target is required".into()));
        }
        if targets.len() != weights.len() {
            return Err(Error::DimensionMismatch { left: targets.len(), right: weights.len() });
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument(format!("block weight {w} must be positive")));
        }
        if let Some(a) = targets.iter().find(|a| !a.is_finite()) {
            return Err(Error::NonFinite(format!("block target {a}")));
        }
        Ok(BlockTargets { targets, weights })
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// `Σ β_i (v_i − a_i)²`.
    pub fn objective(&self, fitted: &[f64]) -> f64 {
        self.targets.iter().zip(&self.weights).zip(fitted).map(|((a, b), v)| b * (v - a) * (v - a)).sum()
    }
}

/// One pooled run `[start, end)` of consecutive blocks.
#[derive(Debug, Clone, Copy)]
struct Run {
    start: usize,
    end: usize,
    weighted_sum: f64,
    weight: f64,
    value: f64,
}

/// Fitted values plus the pooled runs that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotonicFit {
    pub values: Vec<f64>,
    /// Half-open block ranges pooled into one value, in order.
    pub runs: Vec<(usize, usize)>,
}

/// Pool-adjacent-violators for `min Σ β_i (v_i − a_i)²` subject to
/// `v_1 ≤ … ≤ v_l`.
///
/// Runs are pooled only on a strict violation, and an unpooled block keeps
/// its target unchanged, so already-monotone input is returned verbatim.
pub fn pava_fit(t: &BlockTargets) -> IsotonicFit {
    let mut stack: Vec<Run> = Vec::with_capacity(t.len());
    for (i, (&a, &b)) in t.targets.iter().zip(&t.weights).enumerate() {
        let mut run = Run { start: i, end: i + 1, weighted_sum: b * a, weight: b, value: a };
        while let Some(prev) = stack.last() {
            if prev.value <= run.value {
                break;
            }
            let prev = stack.pop().expect("non-empty stack");
            let weighted_sum = prev.weighted_sum + run.weighted_sum;
            let weight = prev.weight + run.weight;
            run = Run { start: prev.start, end: run.end, weighted_sum, weight, value: weighted_sum / weight };
        }
        stack.push(run);
    }
    let mut values = vec![0.0; t.len()];
    for run in &stack {
        values[run.start..run.end].fill(run.value);
    }
    IsotonicFit { values, runs: stack.iter().map(|r| (r.start, r.end)).collect() }
}

pub fn pava(t: &BlockTargets) -> Vec<f64> {
    pava_fit(t).values
}

/// Reference solver: tries every way of pooling adjacent blocks into runs,
/// keeps the monotone candidates and returns the one with least objective.
pub fn isotonic_bruteforce(t: &BlockTargets) -> Result<Vec<f64>> {
    let l = t.len();
    if l > BRUTEFORCE_MAX_BLOCKS {
        return Err(Error::TooLarge { n: l, limit: BRUTEFORCE_MAX_BLOCKS });
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    // bit k set: blocks k and k+1 are in the same run
    for pattern in 0u32..1 << (l - 1) {
        let mut candidate = vec![0.0; l];
        let mut start = 0;
        let mut previous = f64::NEG_INFINITY;
        let mut feasible = true;
        for end in 1..=l {
            if end < l && pattern >> (end - 1) & 1 == 1 {
                continue;
            }
            let (mut num, mut den) = (0.0, 0.0);
            for k in start..end {
                num += t.weights[k] * t.targets[k];
                den += t.weights[k];
            }
            let mean = if end - start == 1 { t.targets[start] } else { num / den };
            if mean < previous {
                feasible = false;
                break;
            }
            candidate[start..end].fill(mean);
            previous = mean;
            start = end;
        }
        if !feasible {
            continue;
        }
        let obj = t.objective(&candidate);
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, candidate));
        }
    }
    Ok(best.expect("the fully pooled pattern is always feasible").1)
}

/// Block targets `a_i = −(F(B_i) − F(B_{i−1})) / |A_i|`, weights `|A_i|`.
pub fn block_targets<F: SetFunction + ?Sized>(f: &F, a: &OrderedPartition) -> Result<BlockTargets> {
    a.require_exhaustive()?;
    if f.n() != a.n() {
        return Err(Error::UniverseMismatch { expected: f.n(), found: a.n() });
    }
    let chain = f.chain_values(a.blocks());
    let mut previous = 0.0;
    let mut targets = Vec::with_capacity(a.len());
    let mut weights = Vec::with_capacity(a.len());
    for (block, &value) in a.blocks().iter().zip(&chain) {
        let size = block.len() as f64;
        targets.push(-(value - previous) / size);
        weights.push(size);
        previous = value;
    }
    BlockTargets::new(targets, weights)
}

/// An `n`-vector with one value per object.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    values: Vec<f64>,
}

impl FeatureMap {
    pub fn new(values: Vec<f64>) -> Self {
        FeatureMap { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn dot(&self, other: &FeatureMap) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(dot(&self.values, &other.values))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn spread(a: &OrderedPartition, block_values: &[f64]) -> FeatureMap {
    let mut values = vec![0.0; a.n()];
    for (block, &v) in a.blocks().iter().zip(block_values) {
        for &j in block {
            values[j] = v;
        }
    }
    FeatureMap { values }
}

/// Feature map of an exhaustive ranking: isotonic block values copied onto
/// each block's objects. More preferred objects get larger values.
pub fn feature_map<F: SetFunction + ?Sized>(f: &F, a: &OrderedPartition) -> Result<FeatureMap> {
    let targets = block_targets(f, a)?;
    Ok(spread(a, &pava(&targets)))
}

/// Coarsening of `a` whose blocks carry strictly increasing isotonic values.
pub fn basic_partition<F: SetFunction + ?Sized>(f: &F, a: &OrderedPartition) -> Result<OrderedPartition> {
    let targets = block_targets(f, a)?;
    let fit = pava_fit(&targets);
    let mut merged: Vec<(Vec<usize>, f64)> = Vec::with_capacity(fit.runs.len());
    for &(start, end) in &fit.runs {
        let value = fit.values[start];
        let objects: Vec<usize> = a.blocks()[start..end].iter().flatten().copied().collect();
        match merged.last_mut() {
            // adjacent runs may tie exactly; they share one value already
            Some((prev, v)) if *v == value => prev.extend(objects),
            _ => merged.push((objects, value)),
        }
    }
    OrderedPartition::new(a.n(), merged.into_iter().map(|(b, _)| b).collect())
}

/// How non-exhaustive rankings are averaged over their coherent extensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionMode {
    /// Enumerate every extension, up to `budget` of them.
    Exact { budget: u64 },
    /// Average over `samples` uniform draws from a stream seeded by `seed`.
    Sampled { samples: usize, seed: u64 },
}

impl ExtensionMode {
    pub fn exact() -> Self {
        ExtensionMode::Exact { budget: crate::ranking::DEFAULT_ENUMERATION_BUDGET }
    }
}

fn mean_of(maps: impl Iterator<Item = Result<FeatureMap>>, n: usize) -> Result<FeatureMap> {
    let mut sum = vec![0.0; n];
    let mut count = 0usize;
    for map in maps {
        for (s, v) in sum.iter_mut().zip(map?.values) {
            *s += v;
        }
        count += 1;
    }
    let scale = 1.0 / count as f64;
    Ok(FeatureMap { values: sum.into_iter().map(|s| s * scale).collect() })
}

/// Feature maps of `samples` uniform coherent extensions of `a`.
pub fn sample_feature_maps<F: SetFunction + ?Sized>(
    f: &F,
    a: &OrderedPartition,
    samples: usize,
    stream: &mut Stream,
) -> Result<Vec<FeatureMap>> {
    (0..samples).map(|_| feature_map(f, &a.sample_extension(stream))).collect()
}

/// Mean feature map over the coherent extensions of `a`. Exhaustive
/// rankings return their own feature map in either mode.
pub fn mean_feature_map<F: SetFunction + ?Sized>(
    f: &F,
    a: &OrderedPartition,
    mode: ExtensionMode,
) -> Result<FeatureMap> {
    if a.is_exhaustive() {
        return feature_map(f, a);
    }
    match mode {
        ExtensionMode::Exact { budget } => {
            let ext = a.coherent_extensions(budget)?;
            mean_of(ext.iter().map(|e| feature_map(f, e)), a.n())
        }
        ExtensionMode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidArgument("sample count must be positive".into()));
            }
            let mut stream = rng::seeded(seed);
            mean_of((0..samples).map(|_| feature_map(f, &a.sample_extension(&mut stream))), a.n())
        }
    }
}
