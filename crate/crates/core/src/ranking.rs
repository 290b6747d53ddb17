//! Rankings encoded as ordered partitions.
//!
//! An [`OrderedPartition`] is a sequence of disjoint, non-empty blocks of
//! object ids. Block 0 holds the least preferred objects and the last block
//! the most preferred ones; objects sharing a block are tied. A partition is
//! *exhaustive* when its blocks cover the whole universe.
//!
//! Text form: blocks separated by `<`, ids inside a block separated by `,`,
//! least preferred first, e.g. `3,4,0 < 1 < 2`.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// Default cap on the number of coherent extensions enumerated at once.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 20;

/// The set of objects being ranked.
#[derive(Debug, Clone, PartialEq)]
pub struct Universe {
    n: usize,
    labels: Option<Vec<String>>,
    features: Option<Vec<Vec<f64>>>,
}

impl Universe {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("universe must hold at least one object".into()));
        }
        Ok(Universe { n, labels: None, features: None })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: labels.len() });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_features(mut self, features: Vec<Vec<f64>>) -> Result<Self> {
        if features.len() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: features.len() });
        }
        self.features = Some(features);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn features(&self) -> Option<&[Vec<f64>]> {
        self.features.as_deref()
    }
}

/// A ranking over `n` objects as blocks ordered from least to most preferred.
///
/// Ids inside each block are kept sorted, so equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderedPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl OrderedPartition {
    /// Validates and builds a partition from blocks listed least preferred first.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("universe must hold at least one object".into()));
        }
        if blocks.is_empty() {
            return Err(Error::EmptyBlock { offset: 0 });
        }
        let mut seen = vec![false; n];
        let mut blocks = blocks;
        for block in blocks.iter_mut() {
            if block.is_empty() {
                return Err(Error::InvalidRanking("empty block".into()));
            }
            for &id in block.iter() {
                if id >= n {
                    return Err(Error::InvalidRanking(format!("object id {id} out of range for n = {n}")));
                }
                if std::mem::replace(&mut seen[id], true) {
                    return Err(Error::InvalidRanking(format!("duplicate object id {id}")));
                }
            }
            block.sort_unstable();
        }
        Ok(OrderedPartition { n, blocks })
    }

    /// A full ranking: `perm` lists every id once, least preferred first.
    pub fn from_permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty permutation".into()));
        }
        Self::new(n, perm.iter().map(|&j| vec![j]).collect())
    }

    /// Top-k ranking: `ranked` lists the k best objects, least preferred
    /// first; every other object goes into one tied block at the bottom.
    pub fn from_topk(ranked: &[usize], n: usize) -> Result<Self> {
        if ranked.is_empty() || ranked.len() > n {
            return Err(Error::InvalidArgument(format!(
                "top-k needs 1 <= k <= n, got k = {} with n = {n}",
                ranked.len()
            )));
        }
        let mut in_top = vec![false; n];
        for &id in ranked {
            if id >= n {
                return Err(Error::InvalidRanking(format!("object id {id} out of range for n = {n}")));
            }
            if std::mem::replace(&mut in_top[id], true) {
                return Err(Error::InvalidRanking(format!("duplicate object id {id}")));
            }
        }
        let rest: Vec<usize> = (0..n).filter(|&j| !in_top[j]).collect();
        let mut blocks = Vec::with_capacity(ranked.len() + 1);
        if !rest.is_empty() {
            blocks.push(rest);
        }
        blocks.extend(ranked.iter().map(|&j| vec![j]));
        Self::new(n, blocks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Number of blocks.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Number of objects that appear in some block.
    pub fn covered(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_exhaustive(&self) -> bool {
        self.covered() == self.n
    }

    /// True when every block is a singleton and the partition is exhaustive.
    pub fn is_full(&self) -> bool {
        self.blocks.len() == self.n
    }

    pub fn require_exhaustive(&self) -> Result<()> {
        if self.is_exhaustive() {
            Ok(())
        } else {
            Err(Error::NotExhaustive { covered: self.covered(), n: self.n })
        }
    }

    /// Block position of each object, `None` for unranked objects.
    pub fn block_of(&self) -> Vec<Option<usize>> {
        let mut pos = vec![None; self.n];
        for (i, block) in self.blocks.iter().enumerate() {
            for &j in block {
                pos[j] = Some(i);
            }
        }
        pos
    }

    /// Objects not covered by any block, ascending.
    pub fn unranked(&self) -> Vec<usize> {
        let pos = self.block_of();
        (0..self.n).filter(|&j| pos[j].is_none()).collect()
    }

    /// Objects in preference order, least preferred first; ties listed by id.
    pub fn ordered_objects(&self) -> Vec<usize> {
        self.blocks.iter().flatten().copied().collect()
    }

    /// Applies an object relabeling `j -> perm[j]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch { left: self.n, right: perm.len() });
        }
        let blocks = self.blocks.iter().map(|b| b.iter().map(|&j| perm[j]).collect()).collect();
        Self::new(self.n, blocks)
    }

    /// Number of coherent exhaustive extensions, `(l+1)^u` for `u` unranked
    /// objects, or `None` on overflow.
    pub fn extension_count(&self) -> Option<u64> {
        let u = (self.n - self.covered()) as u32;
        (self.blocks.len() as u64 + 1).checked_pow(u)
    }

    /// Places each unranked object at a gap: gap `g` sits just after block
    /// `g - 1` (gap 0 is below everything, gap `l` above everything). Objects
    /// sharing a gap form one tied block.
    fn insert_at_gaps(&self, unranked: &[usize], gaps: &[usize]) -> OrderedPartition {
        let l = self.blocks.len();
        let mut at_gap: Vec<Vec<usize>> = vec![Vec::new(); l + 1];
        for (&j, &g) in unranked.iter().zip(gaps) {
            at_gap[g].push(j);
        }
        let mut blocks = Vec::with_capacity(2 * l + 1);
        for (g, group) in at_gap.into_iter().enumerate() {
            if !group.is_empty() {
                blocks.push(group);
            }
            if g < l {
                blocks.push(self.blocks[g].clone());
            }
        }
        // Gap grouping keeps blocks disjoint and ids in range.
        let mut out = OrderedPartition { n: self.n, blocks };
        out.blocks.iter_mut().for_each(|b| b.sort_unstable());
        out
    }

    /// All exhaustive partitions consistent with this ranking, in
    /// lexicographic order of the gap assignment (unranked objects ascending,
    /// first object most significant). An exhaustive ranking yields itself.
    pub fn coherent_extensions(&self, budget: u64) -> Result<Vec<OrderedPartition>> {
        if self.is_exhaustive() {
            return Ok(vec![self.clone()]);
        }
        let count = self.extension_count().filter(|&c| c <= budget).ok_or_else(|| Error::BudgetExceeded {
            requested: format!("({})^{}", self.blocks.len() + 1, self.n - self.covered()),
            budget,
        })?;
        let unranked = self.unranked();
        let base = self.blocks.len() + 1;
        let mut gaps = vec![0usize; unranked.len()];
        let mut out = Vec::with_capacity(count as usize);
        loop {
            out.push(self.insert_at_gaps(&unranked, &gaps));
            // odometer increment, last position least significant
            let mut pos = gaps.len();
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                gaps[pos] += 1;
                if gaps[pos] < base {
                    break;
                }
                gaps[pos] = 0;
            }
        }
    }

    /// One coherent extension drawn uniformly: each unranked object picks a
    /// gap independently and uniformly.
    pub fn sample_extension<R: Rng + ?Sized>(&self, rng: &mut R) -> OrderedPartition {
        if self.is_exhaustive() {
            return self.clone();
        }
        let unranked = self.unranked();
        let base = self.blocks.len() + 1;
        let gaps: Vec<usize> = unranked.iter().map(|_| rng.random_range(0..base)).collect();
        self.insert_at_gaps(&unranked, &gaps)
    }
}

impl fmt::Display for OrderedPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, block) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str(" < ")?;
            }
            for (k, id) in block.iter().enumerate() {
                if k > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{id}")?;
            }
        }
        Ok(())
    }
}

/// Parses one ranking line such as `3,4,0 < 1 < 2` over `n` objects.
///
/// Errors carry the byte offset of the offending token.
pub fn parse_ranking(text: &str, n: usize) -> Result<OrderedPartition> {
    let bytes = text.as_bytes();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let mut seen = vec![false; n];
    // true when the next token must be an id
    let mut expect_id = true;
    let mut block_start = 0;
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let token = &text[start..i];
            if !expect_id {
                return Err(Error::MalformedToken { offset: start, token: token.to_string() });
            }
            let id: usize =
                token.parse().map_err(|_| Error::MalformedToken { offset: start, token: token.to_string() })?;
            if id >= n {
                return Err(Error::IdOutOfRange { id, n, offset: start });
            }
            if std::mem::replace(&mut seen[id], true) {
                return Err(Error::DuplicateId { id, offset: start });
            }
            current.push(id);
            expect_id = false;
        } else if c == b',' {
            if expect_id {
                return Err(Error::MalformedToken { offset: i, token: ",".into() });
            }
            expect_id = true;
            i += 1;
        } else if c == b'<' {
            if current.is_empty() {
                return Err(Error::EmptyBlock { offset: block_start });
            }
            if expect_id {
                return Err(Error::MalformedToken { offset: i, token: "<".into() });
            }
            blocks.push(std::mem::take(&mut current));
            expect_id = true;
            i += 1;
            block_start = i;
        } else {
            let ch = text[i..].chars().next().unwrap_or('?');
            return Err(Error::MalformedToken { offset: i, token: ch.to_string() });
        }
    }
    if current.is_empty() {
        return Err(Error::EmptyBlock { offset: block_start });
    }
    if expect_id {
        return Err(Error::MalformedToken { offset: bytes.len(), token: String::new() });
    }
    blocks.push(current);
    OrderedPartition::new(n, blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;

    fn op(n: usize, blocks: &[&[usize]]) -> OrderedPartition {
        OrderedPartition::new(n, blocks.iter().map(|b| b.to_vec()).collect()).unwrap()
    }

    #[test]
    fn parses_interleaving_ranking() {
        let a = parse_ranking("2 < 1 < 3 < 4", 5).unwrap();
        assert_eq!(a, op(5, &[&[2], &[1], &[3], &[4]]));
        assert!(!a.is_exhaustive());
    }

    #[test]
    fn parses_single_object() {
        let a = parse_ranking("0", 1).unwrap();
        assert_eq!(a.blocks(), &[vec![0]]);
        assert!(a.is_exhaustive());
    }

    #[test]
    fn parses_top2_encoding() {
        let a = parse_ranking("3,4,0 < 1 < 2", 5).unwrap();
        assert_eq!(a, op(5, &[&[0, 3, 4], &[1], &[2]]));
        assert!(a.is_exhaustive());
    }

    #[test]
    fn parse_errors_report_offsets() {
        assert_eq!(parse_ranking("0 < 1 < 1", 3), Err(Error::DuplicateId { id: 1, offset: 8 }));
        assert_eq!(parse_ranking("0 < 7", 3), Err(Error::IdOutOfRange { id: 7, n: 3, offset: 4 }));
        assert_eq!(parse_ranking("0 <  < 1", 3), Err(Error::EmptyBlock { offset: 3 }));
        assert_eq!(parse_ranking("", 3), Err(Error::EmptyBlock { offset: 0 }));
        assert_eq!(parse_ranking("0 < x", 3), Err(Error::MalformedToken { offset: 4, token: "x".into() }));
        assert_eq!(parse_ranking("0,,1", 3), Err(Error::MalformedToken { offset: 2, token: ",".into() }));
        assert!(matches!(parse_ranking("0 1", 3), Err(Error::MalformedToken { offset: 2, .. })));
        assert!(matches!(parse_ranking("0 < 1 <", 3), Err(Error::EmptyBlock { offset: 7 })));
    }

    #[test]
    fn permutation_rows() {
        let a = OrderedPartition::from_permutation(&[1, 0, 2, 3, 4]).unwrap();
        assert_eq!(a, op(5, &[&[1], &[0], &[2], &[3], &[4]]));
        assert!(a.is_full());
        let b = OrderedPartition::from_permutation(&[0]).unwrap();
        assert_eq!(b.len(), 1);
        // 5≺8≺3≺4≺1≺2≺9≺10≺7≺6, shifted to 0-indexed ids
        let c = OrderedPartition::from_permutation(&[4, 7, 2, 3, 0, 1, 8, 9, 6, 5]).unwrap();
        assert_eq!(c.len(), 10);
        assert_eq!(c.blocks()[0], vec![4]);
        assert_eq!(c.blocks()[9], vec![5]);
        assert!(OrderedPartition::from_permutation(&[0, 0]).is_err());
        assert!(OrderedPartition::from_permutation(&[0, 2]).is_err());
    }

    #[test]
    fn topk_encoding() {
        assert_eq!(OrderedPartition::from_topk(&[1, 2], 5).unwrap(), op(5, &[&[0, 3, 4], &[1], &[2]]));
        assert_eq!(OrderedPartition::from_topk(&[0, 1, 2], 3).unwrap(), op(3, &[&[0], &[1], &[2]]));
        assert_eq!(OrderedPartition::from_topk(&[2], 4).unwrap(), op(4, &[&[0, 1, 3], &[2]]));
        assert!(OrderedPartition::from_topk(&[2, 2], 4).is_err());
        assert!(OrderedPartition::from_topk(&[4], 4).is_err());
        assert!(OrderedPartition::from_topk(&[], 4).is_err());
    }

    #[test]
    fn exhaustiveness() {
        assert!(OrderedPartition::from_permutation(&[4, 3, 2, 1, 0]).unwrap().is_exhaustive());
        assert!(!op(5, &[&[2], &[1], &[4]]).is_exhaustive());
        assert!(OrderedPartition::from_topk(&[1, 2], 5).unwrap().is_exhaustive());
    }

    #[test]
    fn extensions_of_two_block_ranking() {
        let a = op(3, &[&[0], &[1]]);
        let ext = a.coherent_extensions(DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(ext, vec![op(3, &[&[2], &[0], &[1]]), op(3, &[&[0], &[2], &[1]]), op(3, &[&[0], &[1], &[2]]),]);
    }

    #[test]
    fn extensions_group_shared_gaps() {
        let a = op(3, &[&[0]]);
        let ext = a.coherent_extensions(DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(
            ext,
            vec![
                op(3, &[&[1, 2], &[0]]),
                op(3, &[&[1], &[0], &[2]]),
                op(3, &[&[2], &[0], &[1]]),
                op(3, &[&[0], &[1, 2]]),
            ]
        );
        assert_eq!(a.extension_count(), Some(4));
    }

    #[test]
    fn exhaustive_extends_to_itself() {
        let a = OrderedPartition::from_permutation(&[2, 0, 1]).unwrap();
        assert_eq!(a.coherent_extensions(1).unwrap(), vec![a.clone()]);
        let mut rng = seeded(0);
        assert_eq!(a.sample_extension(&mut rng), a);
    }

    #[test]
    fn budget_is_enforced() {
        let a = op(12, &[&[0], &[1]]);
        assert!(matches!(a.coherent_extensions(1000), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn sampled_extensions_are_uniform() {
        let a = op(3, &[&[0], &[1]]);
        let ext = a.coherent_extensions(DEFAULT_ENUMERATION_BUDGET).unwrap();
        let mut rng = seeded(17);
        let draws = 30_000;
        let mut counts = [0usize; 3];
        for _ in 0..draws {
            let e = a.sample_extension(&mut rng);
            counts[ext.iter().position(|x| *x == e).unwrap()] += 1;
        }
        let p = 1.0 / 3.0;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - draws as f64 * p).abs() <= 3.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn samples_are_enumerated_members() {
        let a = op(8, &[&[3], &[5]]);
        let ext = a.coherent_extensions(DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(ext.len(), 729);
        let set: std::collections::HashSet<_> = ext.into_iter().collect();
        assert_eq!(set.len(), 729);
        let mut rng = seeded(5);
        for _ in 0..2000 {
            assert!(set.contains(&a.sample_extension(&mut rng)));
        }
    }

    fn arb_partition(max_n: usize) -> impl Strategy<Value = OrderedPartition> {
        (1..=max_n)
            .prop_flat_map(|n| {
                (Just(n), Just((0..n).collect::<Vec<_>>()).prop_shuffle(), proptest::collection::vec(0..4usize, n))
            })
            .prop_map(|(n, order, tags)| {
                // tag 0 drops the object, 1 opens a new block, otherwise joins
                let mut blocks: Vec<Vec<usize>> = Vec::new();
                for (&j, &t) in order.iter().zip(&tags) {
                    match t {
                        0 => {}
                        1 => blocks.push(vec![j]),
                        _ => match blocks.last_mut() {
                            Some(b) => b.push(j),
                            None => blocks.push(vec![j]),
                        },
                    }
                }
                if blocks.is_empty() {
                    blocks.push(vec![order[0]]);
                }
                OrderedPartition::new(n, blocks).unwrap()
            })
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(a in arb_partition(12)) {
            prop_assert_eq!(parse_ranking(&a.to_string(), a.n()).unwrap(), a);
        }

        #[test]
        fn extensions_are_distinct_consistent_and_counted(a in arb_partition(8)) {
            prop_assume!(!a.is_exhaustive());
            let ext = a.coherent_extensions(DEFAULT_ENUMERATION_BUDGET).unwrap();
            let u = a.unranked().len() as u32;
            prop_assert_eq!(ext.len() as u64, (a.len() as u64 + 1).pow(u));
            let set: std::collections::HashSet<_> = ext.iter().cloned().collect();
            prop_assert_eq!(set.len(), ext.len());
            let orig = a.block_of();
            for e in &ext {
                prop_assert!(e.is_exhaustive());
                let pos = e.block_of();
                // restricted to A's objects the block order is unchanged
                for x in 0..a.n() {
                    for y in 0..a.n() {
                        if let (Some(bx), Some(by)) = (orig[x], orig[y]) {
                            prop_assert_eq!(bx.cmp(&by), pos[x].unwrap().cmp(&pos[y].unwrap()));
                        }
                    }
                }
            }
        }

        #[test]
        fn sampled_extension_is_enumerated(a in arb_partition(7), seed in any::<u64>()) {
            let ext = a.coherent_extensions(DEFAULT_ENUMERATION_BUDGET).unwrap();
            let s = a.sample_extension(&mut seeded(seed));
            prop_assert!(ext.contains(&s));
        }
    }
}
