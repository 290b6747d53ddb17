//! Kernels on rankings and Gram-matrix assembly.
//!
//! The submodular kernel is the inner product of feature maps. For
//! non-exhaustive rankings it becomes the convolution kernel, the average
//! over pairs of coherent extensions, which factors into the inner product
//! of mean feature maps. The Kendall and Mallows baselines do not factor, so
//! their convolution is evaluated as an explicit double average.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::isotonic::{dot, mean_feature_map, ExtensionMode, FeatureMap};
use crate::ranking::OrderedPartition;
use crate::rng::{self, derive_seed, Stream};
use crate::submodular::SetFunction;

/// Which kernel produced a Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    Submodular,
    Kendall,
    Mallows { lambda: f64 },
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelKind::Submodular => f.write_str("submodular"),
            KernelKind::Kendall => f.write_str("kendall"),
            KernelKind::Mallows { lambda } => write!(f, "mallows({lambda})"),
        }
    }
}

/// Baseline kernels on exhaustive rankings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineKind {
    Kendall,
    Mallows { lambda: f64 },
}

impl From<BaselineKind> for KernelKind {
    fn from(kind: BaselineKind) -> Self {
        match kind {
            BaselineKind::Kendall => KernelKind::Kendall,
            BaselineKind::Mallows { lambda } => KernelKind::Mallows { lambda },
        }
    }
}

/// Square kernel matrix over a ranking dataset, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    m: usize,
    values: Vec<f64>,
    ranking_ids: Vec<usize>,
    kind: KernelKind,
}

impl GramMatrix {
    pub fn new(m: usize, values: Vec<f64>, kind: KernelKind) -> Result<Self> {
        if values.len() != m * m {
            return Err(Error::DimensionMismatch { left: m * m, right: values.len() });
        }
        Ok(GramMatrix { m, values, ranking_ids: (0..m).collect(), kind })
    }

    pub fn with_ranking_ids(mut self, ids: Vec<usize>) -> Result<Self> {
        if ids.len() != self.m {
            return Err(Error::DimensionMismatch { left: self.m, right: ids.len() });
        }
        self.ranking_ids = ids;
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ranking_ids(&self) -> &[usize] {
        &self.ranking_ids
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    /// Rows `rows`, columns `cols`, row-major.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Vec<f64> {
        rows.iter().flat_map(|&i| cols.iter().map(move |&j| self.get(i, j))).collect()
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.m {
            for j in i + 1..self.m {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.m, self.m, &self.values)
    }
}

/// Linear kernel on feature maps.
pub fn k_s(phi: &FeatureMap, phi_prime: &FeatureMap) -> Result<f64> {
    phi.dot(phi_prime)
}

/// Convolution kernel: inner product of the two mean feature maps. In
/// sampled mode each side draws from its own stream derived from the seed.
pub fn k_c<F: SetFunction + ?Sized>(
    f: &F,
    a: &OrderedPartition,
    b: &OrderedPartition,
    mode: ExtensionMode,
) -> Result<f64> {
    let phi_a = mean_feature_map(f, a, side_mode(mode, 0))?;
    let phi_b = mean_feature_map(f, b, side_mode(mode, 1))?;
    k_s(&phi_a, &phi_b)
}

fn side_mode(mode: ExtensionMode, index: u64) -> ExtensionMode {
    match mode {
        ExtensionMode::Sampled { samples, seed } => {
            ExtensionMode::Sampled { samples, seed: derive_seed(seed, &[index]) }
        }
        exact => exact,
    }
}

fn check_universe(rankings: &[OrderedPartition], n: usize) -> Result<()> {
    match rankings.iter().find(|r| r.n() != n) {
        Some(r) => Err(Error::UniverseMismatch { expected: n, found: r.n() }),
        None => Ok(()),
    }
}

fn with_threads<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Mean feature map of every ranking. Ranking `i` samples from a stream
/// derived from `(seed, i)`.
pub fn feature_maps<F: SetFunction + ?Sized>(
    f: &F,
    rankings: &[OrderedPartition],
    mode: ExtensionMode,
) -> Result<Vec<FeatureMap>> {
    check_universe(rankings, f.n())?;
    rankings.par_iter().enumerate().map(|(i, r)| mean_feature_map(f, r, side_mode(mode, i as u64))).collect()
}

/// Gram matrix of explicit feature vectors. Only the upper triangle is
/// computed; the lower one is mirrored.
pub fn gram_from_maps(maps: &[FeatureMap]) -> Result<Vec<f64>> {
    let m = maps.len();
    if let Some(first) = maps.first() {
        if let Some(bad) = maps.iter().find(|p| p.dim() != first.dim()) {
            return Err(Error::DimensionMismatch { left: first.dim(), right: bad.dim() });
        }
    }
    let mut values = vec![0.0; m * m];
    values.par_chunks_mut(m.max(1)).enumerate().for_each(|(i, row)| {
        let left = maps[i].values();
        for j in i..m {
            row[j] = dot(left, maps[j].values());
        }
    });
    for i in 0..m {
        for j in 0..i {
            values[i * m + j] = values[j * m + i];
        }
    }
    Ok(values)
}

/// Wall-clock split of a submodular Gram computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTimings {
    pub feature_maps: Duration,
    pub products: Duration,
}

/// Submodular (or convolution) Gram matrix with per-phase timings.
pub fn gram_submodular_timed<F: SetFunction + ?Sized>(
    f: &F,
    rankings: &[OrderedPartition],
    mode: ExtensionMode,
    threads: Option<usize>,
) -> Result<(GramMatrix, PhaseTimings)> {
    with_threads(threads, || {
        let start = Instant::now();
        let maps = feature_maps(f, rankings, mode)?;
        let mid = Instant::now();
        let values = gram_from_maps(&maps)?;
        let end = Instant::now();
        let gram = GramMatrix::new(rankings.len(), values, KernelKind::Submodular)?;
        Ok((gram, PhaseTimings { feature_maps: mid - start, products: end - mid }))
    })?
}

/// Submodular (or convolution) Gram matrix. The result does not depend on
/// `threads`.
pub fn gram_submodular<F: SetFunction + ?Sized>(
    f: &F,
    rankings: &[OrderedPartition],
    mode: ExtensionMode,
    threads: Option<usize>,
) -> Result<GramMatrix> {
    gram_submodular_timed(f, rankings, mode, threads).map(|(g, _)| g)
}

fn check_pair(a: &OrderedPartition, b: &OrderedPartition) -> Result<()> {
    a.require_exhaustive()?;
    b.require_exhaustive()?;
    if a.n() != b.n() {
        return Err(Error::UniverseMismatch { expected: a.n(), found: b.n() });
    }
    Ok(())
}

/// Inversion count by merge sort.
fn count_inversions(values: &mut [usize], scratch: &mut [usize]) -> u64 {
    let n = values.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (left, right) = values.split_at_mut(mid);
        let (sl, sr) = scratch.split_at_mut(mid);
        count_inversions(left, sl) + count_inversions(right, sr)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if values[i] <= values[j] {
            scratch[k] = values[i];
            i += 1;
        } else {
            scratch[k] = values[j];
            count += (mid - i) as u64;
            j += 1;
        }
        k += 1;
    }
    scratch[k..k + mid - i].copy_from_slice(&values[i..mid]);
    k += mid - i;
    scratch[k..k + n - j].copy_from_slice(&values[j..n]);
    values.copy_from_slice(&scratch[..n]);
    count
}

/// Pair counts between two exhaustive rankings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    pub concordant: u64,
    pub discordant: u64,
    /// Pairs tied in the first ranking.
    pub ties_first: u64,
    /// Pairs tied in the second ranking.
    pub ties_second: u64,
    pub total: u64,
}

fn pair_counts_enumerated(a: &OrderedPartition, b: &OrderedPartition) -> PairCounts {
    let (pa, pb) = (a.block_of(), b.block_of());
    let n = a.n();
    let mut c = PairCounts { concordant: 0, discordant: 0, ties_first: 0, ties_second: 0, total: 0 };
    for x in 0..n {
        for y in x + 1..n {
            let da = pa[x].cmp(&pa[y]);
            let db = pb[x].cmp(&pb[y]);
            c.total += 1;
            if da.is_eq() {
                c.ties_first += 1;
            }
            if db.is_eq() {
                c.ties_second += 1;
            }
            if !da.is_eq() && !db.is_eq() {
                if da == db {
                    c.concordant += 1;
                } else {
                    c.discordant += 1;
                }
            }
        }
    }
    c
}

fn pair_counts_full(a: &OrderedPartition, b: &OrderedPartition) -> PairCounts {
    let n = a.n();
    let pb = b.block_of();
    let mut seq: Vec<usize> = a.ordered_objects().iter().map(|&j| pb[j].expect("exhaustive")).collect();
    let mut scratch = vec![0; n];
    let discordant = count_inversions(&mut seq, &mut scratch);
    let total = (n as u64) * (n as u64 - 1) / 2;
    PairCounts { concordant: total - discordant, discordant, ties_first: 0, ties_second: 0, total }
}

/// Concordance counts; `O(n log n)` when both rankings are full, pair
/// enumeration otherwise.
pub fn pair_counts(a: &OrderedPartition, b: &OrderedPartition) -> Result<PairCounts> {
    check_pair(a, b)?;
    Ok(if a.is_full() && b.is_full() { pair_counts_full(a, b) } else { pair_counts_enumerated(a, b) })
}

/// Kendall's tau between exhaustive rankings. With ties this is tau-b;
/// when either ranking ties every pair the value is 0. A single object
/// gives 1.
pub fn kendall_tau(a: &OrderedPartition, b: &OrderedPartition) -> Result<f64> {
    let c = pair_counts(a, b)?;
    Ok(tau_from_counts(&c))
}

fn tau_from_counts(c: &PairCounts) -> f64 {
    if c.total == 0 {
        return 1.0;
    }
    let diff = c.concordant as f64 - c.discordant as f64;
    if c.ties_first == 0 && c.ties_second == 0 {
        return diff / c.total as f64;
    }
    let denom = ((c.total - c.ties_first) as f64 * (c.total - c.ties_second) as f64).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        diff / denom
    }
}

/// Mallows kernel `exp(−λ · d / C(n, 2))` for `d` discordant pairs.
pub fn mallows(a: &OrderedPartition, b: &OrderedPartition, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("mallows bandwidth {lambda} must be >= 0")));
    }
    let c = pair_counts(a, b)?;
    Ok(mallows_from_counts(&c, lambda))
}

fn mallows_from_counts(c: &PairCounts, lambda: f64) -> f64 {
    if c.total == 0 {
        return 1.0;
    }
    (-lambda * c.discordant as f64 / c.total as f64).exp()
}

fn baseline_exhaustive(kind: BaselineKind, a: &OrderedPartition, b: &OrderedPartition) -> Result<f64> {
    match kind {
        BaselineKind::Kendall => kendall_tau(a, b),
        BaselineKind::Mallows { lambda } => mallows(a, b, lambda),
    }
}

/// Baseline kernel values for `samples` independent pairs of uniform
/// coherent extensions of `a` and `b`.
pub fn baseline_samples(
    kind: BaselineKind,
    a: &OrderedPartition,
    b: &OrderedPartition,
    samples: usize,
    stream: &mut Stream,
) -> Result<Vec<f64>> {
    (0..samples)
        .map(|_| {
            let ea = a.sample_extension(stream);
            let eb = b.sample_extension(stream);
            baseline_exhaustive(kind, &ea, &eb)
        })
        .collect()
}

/// Baseline kernel averaged over coherent extensions of both rankings.
/// `pair_seed` seeds the sampled mode directly.
pub fn baseline_convolution(
    kind: BaselineKind,
    a: &OrderedPartition,
    b: &OrderedPartition,
    mode: ExtensionMode,
    pair_seed: u64,
) -> Result<f64> {
    if a.is_exhaustive() && b.is_exhaustive() {
        return baseline_exhaustive(kind, a, b);
    }
    match mode {
        ExtensionMode::Exact { budget } => {
            let ea = a.coherent_extensions(budget)?;
            let eb = b.coherent_extensions(budget)?;
            baseline_double_average(kind, &ea, &eb)
        }
        ExtensionMode::Sampled { samples, .. } => {
            if samples == 0 {
                return Err(Error::InvalidArgument("sample count must be positive".into()));
            }
            let draws = baseline_samples(kind, a, b, samples, &mut rng::seeded(pair_seed))?;
            Ok(draws.iter().sum::<f64>() / samples as f64)
        }
    }
}

fn baseline_double_average(kind: BaselineKind, ea: &[OrderedPartition], eb: &[OrderedPartition]) -> Result<f64> {
    let mut sum = 0.0;
    for x in ea {
        for y in eb {
            sum += baseline_exhaustive(kind, x, y)?;
        }
    }
    Ok(sum / (ea.len() * eb.len()) as f64)
}

/// Gram matrix of a baseline kernel. Pairs involving a non-exhaustive
/// ranking are averaged over coherent extensions; in sampled mode pair
/// `(i, j)`, `i ≤ j`, uses a stream derived from `(seed, i, j)`.
pub fn gram_baseline(
    kind: BaselineKind,
    rankings: &[OrderedPartition],
    mode: ExtensionMode,
    threads: Option<usize>,
) -> Result<GramMatrix> {
    let m = rankings.len();
    if let Some(first) = rankings.first() {
        check_universe(rankings, first.n())?;
    }
    if let BaselineKind::Mallows { lambda } = kind {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("mallows bandwidth {lambda} must be >= 0")));
        }
    }
    with_threads(threads, || {
        let extensions: Vec<Option<Vec<OrderedPartition>>> = match mode {
            ExtensionMode::Exact { budget } => {
                rankings.par_iter().map(|r| r.coherent_extensions(budget).map(Some)).collect::<Result<_>>()?
            }
            ExtensionMode::Sampled { .. } => vec![None; m],
        };
        let seed = match mode {
            ExtensionMode::Sampled { seed, .. } => seed,
            ExtensionMode::Exact { .. } => 0,
        };
        let rows: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|i| {
                (i..m)
                    .map(|j| match (&extensions[i], &extensions[j]) {
                        (Some(ei), Some(ej)) => baseline_double_average(kind, ei, ej),
                        _ => baseline_convolution(
                            kind,
                            &rankings[i],
                            &rankings[j],
                            mode,
                            derive_seed(seed, &[i as u64, j as u64]),
                        ),
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        let mut values = vec![0.0; m * m];
        for (i, row) in rows.into_iter().enumerate() {
            for (offset, v) in row.into_iter().enumerate() {
                let j = i + offset;
                values[i * m + j] = v;
                values[j * m + i] = v;
            }
        }
        GramMatrix::new(m, values, kind.into())
    })?
}

/// True when a Cholesky factorization of `K + jitter·I` succeeds.
pub fn psd_check(k: &GramMatrix, jitter: f64) -> Result<bool> {
    let deviation = k.max_asymmetry();
    if deviation > 1e-9 {
        return Err(Error::Asymmetric { deviation });
    }
    let m = k.size();
    let shifted = k.to_dmatrix() + DMatrix::<f64>::identity(m, m) * jitter;
    Ok(shifted.cholesky().is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::InformationGraph;
    use crate::isotonic::feature_map;

    fn complete(n: usize) -> InformationGraph {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v, 1.0))).collect();
        InformationGraph::from_edges(n, &edges).unwrap()
    }

    fn full(p: &[usize]) -> OrderedPartition {
        OrderedPartition::from_permutation(p).unwrap()
    }

    #[test]
    fn linear_kernel_examples() {
        let g = complete(5);
        let a = full(&[2, 4, 0, 1, 3]);
        let rev = full(&[3, 1, 0, 4, 2]);
        let pa = feature_map(&g, &a).unwrap();
        let pr = feature_map(&g, &rev).unwrap();
        let self_k = k_s(&pa, &pa).unwrap();
        assert!(self_k > 0.0);
        assert_eq!(k_s(&pa, &pr).unwrap(), -self_k);
        assert_eq!(k_s(&FeatureMap::new(vec![0.0; 5]), &pa).unwrap(), 0.0);
        assert!(k_s(&pa, &FeatureMap::new(vec![0.0; 4])).is_err());
    }

    #[test]
    fn convolution_reduces_to_linear_kernel() {
        let g = complete(4);
        let a = full(&[0, 1, 2, 3]);
        let b = full(&[1, 3, 0, 2]);
        let direct = k_s(&feature_map(&g, &a).unwrap(), &feature_map(&g, &b).unwrap()).unwrap();
        assert_eq!(k_c(&g, &a, &b, ExtensionMode::exact()).unwrap(), direct);
        assert_eq!(k_c(&g, &a, &b, ExtensionMode::Sampled { samples: 4, seed: 3 }).unwrap(), direct);
    }

    #[test]
    fn gram_small_cases() {
        let g = complete(4);
        let a = full(&[0, 2, 1, 3]);
        let one = gram_submodular(&g, std::slice::from_ref(&a), ExtensionMode::exact(), None).unwrap();
        let phi = feature_map(&g, &a).unwrap();
        assert_eq!(one.values(), &[k_s(&phi, &phi).unwrap()]);
        let rep = gram_submodular(&g, &vec![a; 4], ExtensionMode::exact(), Some(2)).unwrap();
        assert!(rep.values().iter().all(|&v| v == rep.get(0, 0)));
        let mixed = vec![full(&[0, 1, 2, 3]), full(&[0, 1, 2])];
        assert!(gram_submodular(&g, &mixed, ExtensionMode::exact(), None).is_err());
    }

    #[test]
    fn kendall_examples() {
        let a = full(&[0, 1, 2, 3, 4]);
        assert_eq!(kendall_tau(&a, &a).unwrap(), 1.0);
        assert_eq!(kendall_tau(&a, &full(&[4, 3, 2, 1, 0])).unwrap(), -1.0);
        assert_eq!(kendall_tau(&full(&[0, 1, 2]), &full(&[0, 2, 1])).unwrap(), 1.0 / 3.0);
        let partial = OrderedPartition::new(5, vec![vec![0, 1]]).unwrap();
        assert!(kendall_tau(&a, &partial).is_err());
        assert!(kendall_tau(&a, &full(&[0, 1, 2])).is_err());
    }

    #[test]
    fn kendall_tau_b_with_ties() {
        // x: 0,1 tied below 2; y: 0 < 1 < 2
        let x = OrderedPartition::new(3, vec![vec![0, 1], vec![2]]).unwrap();
        let y = full(&[0, 1, 2]);
        // concordant 2, discordant 0, ties 1 and 0 out of 3 pairs
        let expected = 2.0 / (2.0f64 * 3.0).sqrt();
        assert!((kendall_tau(&x, &y).unwrap() - expected).abs() < 1e-15);
        let all_tied = OrderedPartition::new(3, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(kendall_tau(&all_tied, &y).unwrap(), 0.0);
    }

    #[test]
    fn mallows_examples() {
        let a = full(&[0, 1, 2, 3]);
        let r = full(&[3, 2, 1, 0]);
        assert_eq!(mallows(&a, &a, 2.5).unwrap(), 1.0);
        assert_eq!(mallows(&a, &r, 0.0).unwrap(), 1.0);
        assert!((mallows(&a, &r, 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!(mallows(&a, &r, -1.0).is_err());
    }

    #[test]
    fn baseline_gram_examples() {
        let a = full(&[0, 1, 2, 3]);
        let r = full(&[3, 2, 1, 0]);
        let same = gram_baseline(BaselineKind::Kendall, &vec![a.clone(); 3], ExtensionMode::exact(), None).unwrap();
        assert!(same.values().iter().all(|&v| v == 1.0));
        let pair = gram_baseline(BaselineKind::Kendall, &[a, r], ExtensionMode::exact(), None).unwrap();
        assert_eq!(pair.values(), &[1.0, -1.0, -1.0, 1.0]);
    }

    #[test]
    fn baseline_sampled_matches_exact() {
        let a = OrderedPartition::new(4, vec![vec![0], vec![1]]).unwrap();
        let b = OrderedPartition::new(4, vec![vec![2], vec![3]]).unwrap();
        let exact = baseline_convolution(BaselineKind::Kendall, &a, &b, ExtensionMode::exact(), 0).unwrap();
        let s = 5000;
        let draws = baseline_samples(BaselineKind::Kendall, &a, &b, s, &mut rng::seeded(8)).unwrap();
        let sampled =
            baseline_convolution(BaselineKind::Kendall, &a, &b, ExtensionMode::Sampled { samples: s, seed: 0 }, 8)
                .unwrap();
        let mean = draws.iter().sum::<f64>() / s as f64;
        assert_eq!(mean, sampled);
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (s - 1) as f64;
        assert!((sampled - exact).abs() <= 3.0 * (var / s as f64).sqrt());
    }

    #[test]
    fn psd_examples() {
        let eye = GramMatrix::new(2, vec![1.0, 0.0, 0.0, 1.0], KernelKind::Kendall).unwrap();
        assert!(psd_check(&eye, 0.0).unwrap());
        let indefinite = GramMatrix::new(2, vec![1.0, 2.0, 2.0, 1.0], KernelKind::Kendall).unwrap();
        assert!(!psd_check(&indefinite, 1e-8).unwrap());
        let skew = GramMatrix::new(2, vec![1.0, 0.5, 0.0, 1.0], KernelKind::Kendall).unwrap();
        assert!(matches!(psd_check(&skew, 0.0), Err(Error::Asymmetric { .. })));
    }

    #[test]
    fn inversion_count_small() {
        let mut v = vec![3, 1, 2, 0];
        let mut s = vec![0; 4];
        assert_eq!(count_inversions(&mut v, &mut s), 5);
        assert_eq!(v, vec![0, 1, 2, 3]);
    }
}
