//! Set functions, the Lovász extension, and polyhedral membership checks.
//!
//! Subsets are passed as membership masks of length `n`. The exhaustive
//! checks ([`in_base_polytope`], [`is_submodular`]) tabulate all `2^n`
//! values once and are guarded by a size limit.

use crate::error::{Error, Result};
use crate::ranking::OrderedPartition;

/// Largest ground set accepted by [`in_base_polytope`].
pub const BASE_POLYTOPE_MAX_N: usize = 20;
/// Largest ground set accepted by [`is_submodular`].
pub const SUBMODULARITY_MAX_N: usize = 12;

/// A real-valued function on subsets of `{0, …, n-1}` with `F(∅) = 0`.
pub trait SetFunction: Sync {
    fn n(&self) -> usize;

    fn eval(&self, members: &[bool]) -> f64;

    /// `F(B_1), …, F(B_l)` for the prefix unions `B_i` of `blocks`.
    fn chain_values(&self, blocks: &[Vec<usize>]) -> Vec<f64> {
        let mut members = vec![false; self.n()];
        blocks
            .iter()
            .map(|block| {
                for &j in block {
                    members[j] = true;
                }
                self.eval(&members)
            })
            .collect()
    }

    fn eval_ids(&self, ids: &[usize]) -> Result<f64> {
        let n = self.n();
        let mut members = vec![false; n];
        for &j in ids {
            if j >= n {
                return Err(Error::IdOutOfRange { id: j, n, offset: 0 });
            }
            members[j] = true;
        }
        Ok(self.eval(&members))
    }
}

impl<T: SetFunction + ?Sized> SetFunction for &T {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn eval(&self, members: &[bool]) -> f64 {
        (**self).eval(members)
    }
    fn chain_values(&self, blocks: &[Vec<usize>]) -> Vec<f64> {
        (**self).chain_values(blocks)
    }
}

/// `F(S) = Σ_{j∈S} weights[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModularFunction {
    weights: Vec<f64>,
}

impl ModularFunction {
    pub fn new(weights: Vec<f64>) -> Self {
        ModularFunction { weights }
    }

    /// `F(S) = c·|S|`.
    pub fn uniform(n: usize, c: f64) -> Self {
        ModularFunction { weights: vec![c; n] }
    }
}

impl SetFunction for ModularFunction {
    fn n(&self) -> usize {
        self.weights.len()
    }
    fn eval(&self, members: &[bool]) -> f64 {
        self.weights.iter().zip(members).filter(|(_, &m)| m).map(|(w, _)| w).sum()
    }
}

type BoxedEval = Box<dyn Fn(&[bool]) -> f64 + Send + Sync>;

/// A user-supplied set function, shifted so that `F(∅) = 0`.
pub struct CustomSetFunction {
    n: usize,
    offset: f64,
    eval: BoxedEval,
}

impl CustomSetFunction {
    pub fn new(n: usize, eval: impl Fn(&[bool]) -> f64 + Send + Sync + 'static) -> Self {
        let offset = eval(&vec![false; n]);
        CustomSetFunction { n, offset, eval: Box::new(eval) }
    }
}

impl std::fmt::Debug for CustomSetFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CustomSetFunction").field("n", &self.n).field("offset", &self.offset).finish_non_exhaustive()
    }
}

impl SetFunction for CustomSetFunction {
    fn n(&self) -> usize {
        self.n
    }
    fn eval(&self, members: &[bool]) -> f64 {
        (self.eval)(members) - self.offset
    }
}

pub(crate) fn mask_from_bits(bits: u64, n: usize) -> Vec<bool> {
    (0..n).map(|j| bits >> j & 1 == 1).collect()
}

fn tabulate<F: SetFunction + ?Sized>(f: &F) -> Vec<f64> {
    let n = f.n();
    (0..1u64 << n).map(|bits| f.eval(&mask_from_bits(bits, n))).collect()
}

fn check_finite(w: &[f64]) -> Result<()> {
    match w.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::NonFinite(format!("entry {i} = {}", w[i]))),
        None => Ok(()),
    }
}

fn check_len(n: usize, len: usize) -> Result<()> {
    if n == len {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left: n, right: len })
    }
}

/// Indices sorted by decreasing `w`, ties by ascending id.
fn decreasing_order(w: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    order
}

/// Lovász extension
/// `f(w) = w_{j_n} F(V) + Σ_{k<n} (w_{j_k} − w_{j_{k+1}}) F({j_1, …, j_k})`
/// with `w_{j_1} ≥ … ≥ w_{j_n}`.
pub fn lovasz_extension<F: SetFunction + ?Sized>(f: &F, w: &[f64]) -> Result<f64> {
    let n = f.n();
    check_len(n, w.len())?;
    check_finite(w)?;
    let order = decreasing_order(w);
    let mut members = vec![false; n];
    let mut total = 0.0;
    for k in 0..n {
        members[order[k]] = true;
        let coef = if k + 1 < n { w[order[k]] - w[order[k + 1]] } else { w[order[k]] };
        if coef != 0.0 || k + 1 == n {
            total += coef * f.eval(&members);
        }
    }
    Ok(total)
}

/// Greedy base vertex: `s_{j_k} = F({j_1..j_k}) − F({j_1..j_{k−1}})`.
pub fn greedy_vertex<F: SetFunction + ?Sized>(f: &F, perm: &[usize]) -> Result<Vec<f64>> {
    let n = f.n();
    check_len(n, perm.len())?;
    let mut members = vec![false; n];
    for &j in perm {
        if j >= n || std::mem::replace(&mut members[j], true) {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation of 0..{n}")));
        }
    }
    members.iter_mut().for_each(|m| *m = false);
    let mut s = vec![0.0; n];
    let mut prev = 0.0;
    for &j in perm {
        members[j] = true;
        let value = f.eval(&members);
        s[j] = value - prev;
        prev = value;
    }
    Ok(s)
}

/// Membership in the outer cone of the base polytope kept by the prefix
/// sets of `a`: `s(B_i) ≤ F(B_i)` for `i < l` and `s(V) = F(V)`.
pub fn in_tangent_cone<F: SetFunction + ?Sized>(f: &F, a: &OrderedPartition, s: &[f64], tol: f64) -> Result<bool> {
    a.require_exhaustive()?;
    check_len(f.n(), a.n())?;
    check_len(f.n(), s.len())?;
    let values = f.chain_values(a.blocks());
    let l = a.len();
    let mut prefix = 0.0;
    for (i, block) in a.blocks().iter().enumerate() {
        prefix += block.iter().map(|&j| s[j]).sum::<f64>();
        if i + 1 < l {
            if prefix > values[i] + tol {
                return Ok(false);
            }
        } else if (prefix - values[i]).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exhaustive check of `s(B) ≤ F(B)` for every `B` and `s(V) = F(V)`.
pub fn in_base_polytope<F: SetFunction + ?Sized>(f: &F, s: &[f64], tol: f64) -> Result<bool> {
    let n = f.n();
    if n > BASE_POLYTOPE_MAX_N {
        return Err(Error::TooLarge { n, limit: BASE_POLYTOPE_MAX_N });
    }
    check_len(n, s.len())?;
    let full = (1u64 << n) - 1;
    for bits in 1..=full {
        let members = mask_from_bits(bits, n);
        let sb: f64 = (0..n).filter(|&j| members[j]).map(|j| s[j]).sum();
        let fb = f.eval(&members);
        if bits == full {
            if (sb - fb).abs() > tol {
                return Ok(false);
            }
        } else if sb > fb + tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exhaustive pairwise check of `F(S) + F(T) ≥ F(S∪T) + F(S∩T) − 1e−9`.
pub fn is_submodular<F: SetFunction + ?Sized>(f: &F) -> Result<bool> {
    let n = f.n();
    if n > SUBMODULARITY_MAX_N {
        return Err(Error::TooLarge { n, limit: SUBMODULARITY_MAX_N });
    }
    let table = tabulate(f);
    let size = table.len();
    for s in 0..size {
        for t in s + 1..size {
            if table[s] + table[t] < table[s | t] + table[s & t] - 1e-9 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True when `w` is constant on every block of `a` and the block values do
/// not increase from the first block to the last.
pub fn is_compatible(w: &[f64], a: &OrderedPartition, tol: f64) -> Result<bool> {
    a.require_exhaustive()?;
    check_len(a.n(), w.len())?;
    let mut previous: Option<f64> = None;
    for block in a.blocks() {
        let first = w[block[0]];
        if block.iter().any(|&j| (w[j] - first).abs() > tol) {
            return Ok(false);
        }
        if let Some(p) = previous {
            if first > p + tol {
                return Ok(false);
            }
        }
        previous = Some(first);
    }
    Ok(true)
}
