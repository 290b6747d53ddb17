//! Information graphs over objects and their cut functions.

use crate::error::{Error, Result};
use crate::submodular::SetFunction;

/// Symmetric, nonnegative object-similarity weights with a zero diagonal.
///
/// The cut function `F(S) = Σ_{u∈S, v∉S} w(u, v)` is evaluated over the
/// stored list of nonzero edges, so one evaluation costs `O(p)` for `p`
/// edges.
#[derive(Debug, Clone, PartialEq)]
pub struct InformationGraph {
    n: usize,
    weights: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
    lengthscale: Option<f64>,
}

impl InformationGraph {
    /// Builds from a row-major `n × n` weight matrix.
    pub fn from_dense(n: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != n * n {
            return Err(Error::DimensionMismatch { left: n * n, right: weights.len() });
        }
        for u in 0..n {
            if weights[u * n + u] != 0.0 {
                return Err(Error::InvalidArgument(format!("nonzero diagonal at {u}")));
            }
            for v in u + 1..n {
                let w = weights[u * n + v];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidArgument(format!("weight ({u},{v}) = {w}")));
                }
                if w != weights[v * n + u] {
                    return Err(Error::InvalidArgument(format!("asymmetric weight at ({u},{v})")));
                }
            }
        }
        let mut g = InformationGraph { n, weights, edges: Vec::new(), lengthscale: None };
        g.rebuild_edges();
        Ok(g)
    }

    /// Builds from an undirected edge list; repeated edges are summed.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut weights = vec![0.0; n * n];
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::IdOutOfRange { id: u.max(v), n, offset: 0 });
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self loop at {u}")));
            }
            weights[u * n + v] += w;
            weights[v * n + u] += w;
        }
        Self::from_dense(n, weights)
    }

    fn rebuild_edges(&mut self) {
        let n = self.n;
        self.edges = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter_map(|(u, v)| {
                let w = self.weights[u * n + v];
                (w > 0.0).then_some((u, v, w))
            })
            .collect();
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.weights[u * self.n + v]
    }

    /// Nonzero edges `(u, v, w)` with `u < v`, sorted by `(u, v)`.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Lengthscale used at construction, when built from features.
    pub fn lengthscale(&self) -> Option<f64> {
        self.lengthscale
    }

    /// Cut value of the subset `ids`.
    pub fn cut_eval(&self, ids: &[usize]) -> Result<f64> {
        self.eval_ids(ids)
    }

    /// Applies an object relabeling `j -> perm[j]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: perm.len() });
        }
        let edges: Vec<_> = self.edges.iter().map(|&(u, v, w)| (perm[u], perm[v], w)).collect();
        let mut g = Self::from_edges(self.n, &edges)?;
        g.lengthscale = self.lengthscale;
        Ok(g)
    }
}

impl SetFunction for InformationGraph {
    fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, members: &[bool]) -> f64 {
        self.edges.iter().filter(|&&(u, v, _)| members[u] != members[v]).map(|&(_, _, w)| w).sum()
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Builds the similarity graph `w(u, v) = exp(−½‖x_u − x_v‖² / ℓ²)` from
/// per-object feature rows.
///
/// Without an explicit `lengthscale`, `ℓ` is the median pairwise Euclidean
/// distance. Afterwards only the `⌈keep_fraction · n(n−1)/2⌉` heaviest edges
/// are kept; equal weights are ordered by `(u, v)`.
pub fn build_graph(features: &[Vec<f64>], lengthscale: Option<f64>, keep_fraction: f64) -> Result<InformationGraph> {
    let n = features.len();
    if n < 2 {
        return Err(Error::InvalidArgument("an information graph needs at least two objects".into()));
    }
    if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("keep_fraction {keep_fraction} not in (0, 1]")));
    }
    let d = features[0].len();
    for (j, row) in features.iter().enumerate() {
        if row.len() != d {
            return Err(Error::DimensionMismatch { left: d, right: row.len() });
        }
        if let Some(x) = row.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("feature of object {j} = {x}")));
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let sq_dist: Vec<f64> = pairs
        .iter()
        .map(|&(u, v)| features[u].iter().zip(&features[v]).map(|(a, b)| (a - b) * (a - b)).sum())
        .collect();
    let ell = match lengthscale {
        Some(l) if l > 0.0 && l.is_finite() => l,
        Some(l) => return Err(Error::InvalidArgument(format!("lengthscale {l} must be positive"))),
        None => {
            let mut dists: Vec<f64> = sq_dist.iter().map(|d| d.sqrt()).collect();
            let m = median(&mut dists);
            if m <= 0.0 {
                return Err(Error::InvalidArgument("median pairwise distance is zero; supply a lengthscale".into()));
            }
            m
        }
    };
    let mut scored: Vec<(usize, f64)> =
        sq_dist.iter().enumerate().map(|(k, &d2)| (k, (-0.5 * d2 / (ell * ell)).exp())).collect();
    let keep = (keep_fraction * pairs.len() as f64).ceil() as usize;
    // heaviest first, pair order breaks ties
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut weights = vec![0.0; n * n];
    for &(k, w) in scored.iter().take(keep) {
        let (u, v) = pairs[k];
        weights[u * n + v] = w;
        weights[v * n + u] = w;
    }
    let mut g = InformationGraph::from_dense(n, weights)?;
    g.lengthscale = Some(ell);
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::submodular::is_submodular;

    #[test]
    fn cut_examples() {
        let tri = InformationGraph::from_edges(3, &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(tri.cut_eval(&[0]).unwrap(), 2.0);
        assert_eq!(tri.cut_eval(&[]).unwrap(), 0.0);
        assert_eq!(tri.cut_eval(&[0, 1, 2]).unwrap(), 0.0);
        let path = InformationGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(path.cut_eval(&[0, 2]).unwrap(), 2.0);
        assert!(path.cut_eval(&[3]).is_err());
    }

    #[test]
    fn squared_exponential_weights() {
        let g = build_graph(&[vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 1.0]], Some(1.0), 1.0).unwrap();
        assert_eq!(g.weight(0, 1), 1.0);
        assert!((g.weight(0, 2) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((g.weight(0, 2) - 0.3679).abs() < 1e-4);
        assert_eq!(g.lengthscale(), Some(1.0));
    }

    #[test]
    fn median_heuristic_lengthscale() {
        // distances 1, 2, 3 -> median 2
        let g = build_graph(&[vec![0.0], vec![1.0], vec![3.0]], None, 1.0).unwrap();
        assert_eq!(g.lengthscale(), Some(2.0));
        assert!((g.weight(0, 1) - (-0.5f64 / 4.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_features_are_rejected() {
        assert!(build_graph(&[vec![1.0], vec![1.0]], None, 1.0).is_err());
        assert!(build_graph(&[vec![1.0], vec![f64::NAN]], Some(1.0), 1.0).is_err());
        assert!(build_graph(&[vec![1.0]], Some(1.0), 1.0).is_err());
        assert!(build_graph(&[vec![0.0], vec![1.0]], Some(1.0), 0.0).is_err());
    }

    #[test]
    fn sparsification_keeps_heaviest_edges() {
        let feats = vec![vec![0.0], vec![0.1], vec![5.0], vec![5.3]];
        let g = build_graph(&feats, Some(1.0), 0.34).unwrap();
        // ceil(0.34 * 6) = 3 edges survive
        assert_eq!(g.edges().len(), 3);
        assert!(g.weight(0, 1) > 0.0 && g.weight(2, 3) > 0.0);
        assert_eq!(g.weight(0, 3), 0.0);
        // ties fall back to pair order
        let flat = build_graph(&[vec![0.0], vec![0.0], vec![0.0]], Some(1.0), 0.5).unwrap();
        assert_eq!(flat.edges().iter().map(|e| (e.0, e.1)).collect::<Vec<_>>(), vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn cut_is_symmetric_and_submodular() {
        let feats: Vec<Vec<f64>> = (0..7).map(|j| vec![(j * j % 5) as f64, j as f64 * 0.3]).collect();
        let g = build_graph(&feats, None, 1.0).unwrap();
        for bits in 0..128u64 {
            let s: Vec<usize> = (0..7).filter(|j| bits >> j & 1 == 1).collect();
            let c: Vec<usize> = (0..7).filter(|j| bits >> j & 1 == 0).collect();
            assert!((g.cut_eval(&s).unwrap() - g.cut_eval(&c).unwrap()).abs() < 1e-12);
        }
        assert!(is_submodular(&g).unwrap());
    }

    #[test]
    fn rejects_invalid_dense_weights() {
        assert!(InformationGraph::from_dense(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(InformationGraph::from_dense(2, vec![0.0, -1.0, -1.0, 0.0]).is_err());
        assert!(InformationGraph::from_dense(2, vec![1.0, 0.0, 0.0, 0.0]).is_err());
    }
}
