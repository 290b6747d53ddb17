//! Synthetic food-preference rankings and censoring transforms.
//!
//! Eight dishes are described by three features (sweet, savouriness,
//! juicy). Two user types weigh the features in opposite priority orders
//! with importance weights 1, 0.17 and 0.09. A user's ranking is the
//! argsort of the reference per-type scores plus iid Gaussian noise.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::classify::{Label, LabeledRankingDataset};
use crate::error::{Error, Result};
use crate::ranking::{OrderedPartition, Universe};
use crate::rng;

pub const FOOD_NAMES: [&str; 8] = ["cake", "biscuit", "gelato", "steak", "burger", "sausage", "pasta", "pizza"];

pub const FEATURE_NAMES: [&str; 3] = ["sweet", "savouriness", "juicy"];

/// Per-dish (sweet, savouriness, juicy).
pub const FOOD_FEATURES: [[f64; 3]; 8] = [
    [0.9, 0.0, 0.3],
    [0.7, 0.1, 0.0],
    [1.0, 0.0, 0.7],
    [0.0, 0.8, 0.8],
    [0.2, 0.8, 0.9],
    [0.1, 1.0, 1.0],
    [0.4, 0.7, 0.7],
    [0.4, 0.9, 0.6],
];

/// Importance weights by priority rank.
pub const IMPORTANCE_WEIGHTS: [f64; 3] = [1.0, 0.17, 0.09];

/// Reference two-decimal scores per user type, used by the sampler.
const REFERENCE_SCORES: [[f64; 8]; 2] =
    [[0.93, 0.72, 1.06, 0.21, 0.42, 0.36, 0.58, 0.6], [0.38, 0.08, 0.79, 0.93, 1.05, 1.18, 0.85, 0.79]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UserType {
    /// sweet > savouriness > juicy
    One,
    /// juicy > savouriness > sweet
    Two,
}

impl UserType {
    /// Feature indices from most to least important.
    pub fn priority(self) -> [usize; 3] {
        match self {
            UserType::One => [0, 1, 2],
            UserType::Two => [2, 1, 0],
        }
    }

    pub fn label(self) -> Label {
        match self {
            UserType::One => 1,
            UserType::Two => -1,
        }
    }

    fn index(self) -> usize {
        match self {
            UserType::One => 0,
            UserType::Two => 1,
        }
    }
}

/// The food universe with dish names and feature rows.
pub fn food_universe() -> Universe {
    Universe::new(8)
        .and_then(|u| u.with_labels(FOOD_NAMES.iter().map(|s| s.to_string()).collect()))
        .and_then(|u| u.with_features(FOOD_FEATURES.iter().map(|r| r.to_vec()).collect()))
        .expect("static food table is consistent")
}

pub fn food_features() -> Vec<Vec<f64>> {
    FOOD_FEATURES.iter().map(|r| r.to_vec()).collect()
}

/// Importance-weighted feature sum per dish.
pub fn food_scores(user: UserType) -> [f64; 8] {
    let priority = user.priority();
    let mut scores = [0.0; 8];
    for (score, features) in scores.iter_mut().zip(&FOOD_FEATURES) {
        *score = priority.iter().zip(IMPORTANCE_WEIGHTS).map(|(&f, w)| features[f] * w).sum();
    }
    scores
}

/// The two-decimal score table the sampler perturbs.
pub fn reference_scores(user: UserType) -> [f64; 8] {
    REFERENCE_SCORES[user.index()]
}

/// Stable argsort, ascending; equal keys keep id order.
fn argsort(keys: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
    order
}

/// Noise-free rank of each dish (0 = least preferred, 7 = most).
pub fn noise_free_preferences(user: UserType) -> [usize; 8] {
    let mut ranks = [0; 8];
    for (rank, dish) in argsort(&reference_scores(user)).into_iter().enumerate() {
        ranks[dish] = rank;
    }
    ranks
}

/// Dishes listed from least to most preferred without noise.
pub fn noise_free_ranking(user: UserType) -> OrderedPartition {
    OrderedPartition::from_permutation(&argsort(&reference_scores(user))).expect("argsort is a permutation")
}

/// Full ranking by ascending jittered score, least preferred first.
pub fn sample_food_ranking<R: Rng + ?Sized>(user: UserType, sigma: f64, rng: &mut R) -> Result<OrderedPartition> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise level {sigma} must be >= 0")));
    }
    let jittered: Vec<f64> = reference_scores(user).iter().map(|&s| s + sigma * rng::standard_normal(rng)).collect();
    OrderedPartition::from_permutation(&argsort(&jittered))
}

/// How a full ranking is reduced before entering a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CensorKind {
    Full,
    /// Keep the `k` most preferred objects; the rest tie at the bottom.
    TopK(usize),
    /// Cut the full ranking into `l` contiguous blocks at uniform random
    /// boundaries.
    ExhaustiveInterleave(usize),
    /// Keep a uniform random subset of `l` objects in their relative order.
    Interleave(usize),
}

impl fmt::Display for CensorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CensorKind::Full => f.write_str("full"),
            CensorKind::TopK(k) => write!(f, "top{k}"),
            CensorKind::ExhaustiveInterleave(l) => write!(f, "exh-interleave{l}"),
            CensorKind::Interleave(l) => write!(f, "interleave{l}"),
        }
    }
}

impl FromStr for CensorKind {
    type Err = Error;

    /// Accepts `full`, `top<k>`, `exh-interleave<l>` and `interleave<l>`.
    fn from_str(s: &str) -> Result<Self> {
        let parse = |digits: &str| {
            digits.parse::<usize>().map_err(|_| Error::InvalidArgument(format!("bad censoring kind {s:?}")))
        };
        if s == "full" {
            Ok(CensorKind::Full)
        } else if let Some(rest) = s.strip_prefix("top") {
            parse(rest).map(CensorKind::TopK)
        } else if let Some(rest) = s.strip_prefix("exh-interleave") {
            parse(rest).map(CensorKind::ExhaustiveInterleave)
        } else if let Some(rest) = s.strip_prefix("interleave") {
            parse(rest).map(CensorKind::Interleave)
        } else {
            Err(Error::InvalidArgument(format!("bad censoring kind {s:?}")))
        }
    }
}

/// Applies a censoring transform to a full ranking.
pub fn censor<R: Rng + ?Sized>(full: &OrderedPartition, kind: CensorKind, rng: &mut R) -> Result<OrderedPartition> {
    if !full.is_full() {
        return Err(Error::InvalidArgument("censoring needs a full ranking".into()));
    }
    let n = full.n();
    let order = full.ordered_objects();
    let check = |size: usize| {
        if size == 0 || size > n {
            Err(Error::InvalidArgument(format!("censoring size {size} not in 1..={n}")))
        } else {
            Ok(())
        }
    };
    match kind {
        CensorKind::Full => Ok(full.clone()),
        CensorKind::TopK(k) => {
            check(k)?;
            OrderedPartition::from_topk(&order[n - k..], n)
        }
        CensorKind::ExhaustiveInterleave(l) => {
            check(l)?;
            let mut cuts: Vec<usize> =
                if l > 1 { index::sample(rng, n - 1, l - 1).into_iter().map(|c| c + 1).collect() } else { Vec::new() };
            cuts.sort_unstable();
            cuts.push(n);
            let mut start = 0;
            let blocks = cuts
                .into_iter()
                .map(|end| {
                    let block = order[start..end].to_vec();
                    start = end;
                    block
                })
                .collect();
            OrderedPartition::new(n, blocks)
        }
        CensorKind::Interleave(l) => {
            check(l)?;
            let mut keep: Vec<usize> = index::sample(rng, n, l).into_iter().collect();
            // positions in preference order keep the original relative order
            keep.sort_unstable();
            OrderedPartition::new(n, keep.into_iter().map(|p| vec![order[p]]).collect())
        }
    }
}

/// `m / 2` users of each type (type one first, label `+1`), each ranking
/// sampled and then censored from a single stream seeded by `seed`. An odd
/// `m` is rounded down.
pub fn generate_dataset(m: usize, sigma: f64, kind: CensorKind, seed: u64) -> Result<LabeledRankingDataset> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("dataset size {m} must be at least 2")));
    }
    let per_class = m / 2;
    let mut stream = rng::seeded(seed);
    let mut rankings = Vec::with_capacity(2 * per_class);
    let mut labels = Vec::with_capacity(2 * per_class);
    for user in [UserType::One, UserType::Two] {
        for _ in 0..per_class {
            let full = sample_food_ranking(user, sigma, &mut stream)?;
            rankings.push(censor(&full, kind, &mut stream)?);
            labels.push(user.label());
        }
    }
    LabeledRankingDataset::new(rankings, labels)
}
