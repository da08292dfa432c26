//! Set partitions of `{1, …, n}`: enumeration, the non-crossing test, nesting
//! depth and the depth-restricted counting recurrences.
//!
//! Enumeration and the recurrences are independent routes to the same numbers
//! and are tested against each other.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::Hash;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::{Error, Result, ENUMERATION_CAP};

/// A partition of `{1, …, n}` in canonical form: blocks sorted internally and
/// ordered by their least element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Builds a partition from arbitrary blocks, validating coverage and
    /// disjointness and putting the blocks into canonical order.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Size("ground set must be non-empty".into()));
        }
        let mut seen = vec![false; n + 1];
        let mut blocks = blocks;
        for block in &mut blocks {
            if block.is_empty() {
                return Err(Error::Domain("empty block".into()));
            }
            block.sort_unstable();
            for &e in block.iter() {
                if e == 0 || e > n {
                    return Err(Error::Domain(format!("element {e} outside 1..={n}")));
                }
                if seen[e] {
                    return Err(Error::Domain(format!("element {e} appears twice")));
                }
                seen[e] = true;
            }
        }
        if let Some(missing) = (1..=n).find(|&e| !seen[e]) {
            return Err(Error::Domain(format!("element {missing} not covered")));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(SetPartition { n, blocks })
    }

    /// Partition from a restricted growth string (`rgs[i]` is the block of
    /// element `i + 1`).
    fn from_rgs(rgs: &[usize]) -> Self {
        let nblocks = rgs.iter().copied().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); nblocks];
        for (i, &b) in rgs.iter().enumerate() {
            blocks[b].push(i + 1);
        }
        SetPartition {
            n: rgs.len(),
            blocks,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block index of every element, 0-based positions.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &e in block {
                labels[e - 1] = b;
            }
        }
        labels
    }

    pub fn is_pair_partition(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 2)
    }

    pub fn has_singleton(&self) -> bool {
        self.blocks.iter().any(|b| b.len() == 1)
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, block) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{{")?;
            for (j, e) in block.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, "}}")?;
        }
        write!(f, "}}")
    }
}

/// A set partition all of whose blocks are pairs `(α(j), β(j))`, `α(j) < β(j)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PairPartition(SetPartition);

impl PairPartition {
    pub fn new(p: SetPartition) -> Result<Self> {
        if !p.is_pair_partition() {
            return Err(Error::Domain(format!("{p} is not a pair partition")));
        }
        Ok(PairPartition(p))
    }

    pub fn from_pairs(pairs: &[(usize, usize)]) -> Result<Self> {
        let blocks = pairs.iter().map(|&(a, b)| vec![a, b]).collect();
        Self::new(SetPartition::new(2 * pairs.len(), blocks)?)
    }

    /// Pairs `(α(j), β(j))` ordered by `α`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.0.blocks.iter().map(|b| (b[0], b[1])).collect()
    }

    pub fn partition(&self) -> &SetPartition {
        &self.0
    }

    /// Depth as the longest chain `α(s_1) < … < α(s_d)`, `β(s_1) > … > β(s_d)`.
    ///
    /// This is a longest-decreasing-subsequence computation over the closing
    /// points, independent of the general block-nesting routine in [`depth`].
    pub fn chain_depth(&self) -> Result<usize> {
        if !is_noncrossing(&self.0) {
            return Err(Error::Domain(format!("{} is crossing", self.0)));
        }
        // pairs are sorted by α, so a chain is a strictly decreasing run of β
        let betas: Vec<usize> = self.pairs().iter().map(|&(_, b)| b).collect();
        let mut best = vec![1usize; betas.len()];
        for i in 0..betas.len() {
            for j in 0..i {
                if betas[j] > betas[i] {
                    best[i] = best[i].max(best[j] + 1);
                }
            }
        }
        Ok(best.into_iter().max().unwrap_or(0))
    }
}

/// Iterator over all partitions of `{1, …, n}` in restricted-growth-string
/// lexicographic order.
pub struct Partitions {
    rgs: Vec<usize>,
    prefix_max: Vec<usize>,
    done: bool,
}

impl Iterator for Partitions {
    type Item = SetPartition;

    fn next(&mut self) -> Option<SetPartition> {
        if self.done {
            return None;
        }
        let current = SetPartition::from_rgs(&self.rgs);
        let n = self.rgs.len();
        // advance: rightmost position that can grow without breaking the
        // restricted growth condition
        let mut i = n;
        loop {
            if i <= 1 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.rgs[i] <= self.prefix_max[i - 1] {
                self.rgs[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.rgs[i]);
                for j in i + 1..n {
                    self.rgs[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
                break;
            }
        }
        Some(current)
    }
}

/// Streams every set partition of `{1, …, n}` exactly once.
pub fn enumerate_partitions(n: usize) -> Result<Partitions> {
    if n == 0 || n > ENUMERATION_CAP {
        return Err(Error::Size(format!(
            "enumeration needs 1 <= n <= {ENUMERATION_CAP}, got {n}"
        )));
    }
    Ok(Partitions {
        rgs: vec![0; n],
        prefix_max: vec![0; n],
        done: false,
    })
}

/// All pair partitions of `{1, …, n}` (empty for odd `n`).
pub fn enumerate_pair_partitions(n: usize) -> Vec<PairPartition> {
    fn rec(free: &mut Vec<usize>, acc: &mut Vec<(usize, usize)>, out: &mut Vec<PairPartition>) {
        if free.is_empty() {
            out.push(PairPartition::from_pairs(acc).expect("valid pairing"));
            return;
        }
        let first = free.remove(0);
        for idx in 0..free.len() {
            let partner = free.remove(idx);
            acc.push((first, partner));
            rec(free, acc, out);
            acc.pop();
            free.insert(idx, partner);
        }
        free.insert(0, first);
    }
    let mut out = Vec::new();
    if n % 2 == 1 {
        return out;
    }
    if n == 0 {
        return out;
    }
    rec(&mut (1..=n).collect(), &mut Vec::new(), &mut out);
    out
}

/// True iff no two blocks interleave as `a < b < c < d` with `a, c` in one
/// block and `b, d` in the other.
pub fn is_noncrossing(p: &SetPartition) -> bool {
    let labels = p.labels();
    let nb = p.num_blocks();
    for x in 0..nb {
        for y in x + 1..nb {
            // restrict the label word to {x, y}; four or more runs means a crossing
            let mut runs = 0;
            let mut last = usize::MAX;
            for &l in &labels {
                if (l == x || l == y) && l != last {
                    runs += 1;
                    last = l;
                }
            }
            if runs >= 4 {
                return false;
            }
        }
    }
    true
}

/// Longest chain of strictly nested blocks. `B'` is nested in `B` iff
/// `min B < min B'` and `max B' < max B`.
pub fn depth(p: &SetPartition) -> Result<usize> {
    if !is_noncrossing(p) {
        return Err(Error::Domain(format!("{p} is crossing")));
    }
    let spans: Vec<(usize, usize)> = p
        .blocks()
        .iter()
        .map(|b| (b[0], *b.last().unwrap()))
        .collect();
    // wider spans first, so every potential outer block is settled before its
    // inner blocks
    let mut order: Vec<usize> = (0..spans.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(spans[i].1 - spans[i].0));
    let mut chain = vec![1usize; spans.len()];
    for (pos, &i) in order.iter().enumerate() {
        for &j in &order[..pos] {
            let (lo, hi) = spans[j];
            let (a, b) = spans[i];
            if lo < a && b < hi {
                chain[i] = chain[i].max(chain[j] + 1);
            }
        }
    }
    Ok(chain.into_iter().max().unwrap_or(0))
}

/// Partition of positions induced by equal labels: `p` and `q` share a block
/// iff `t[p] == t[q]`.
pub fn partition_of_tuple<T: Eq + Hash>(t: &[T]) -> Result<SetPartition> {
    if t.is_empty() {
        return Err(Error::Size("tuple must be non-empty".into()));
    }
    let mut first_seen: HashMap<&T, usize> = HashMap::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for (i, label) in t.iter().enumerate() {
        let b = *first_seen.entry(label).or_insert_with(|| {
            blocks.push(Vec::new());
            blocks.len() - 1
        });
        blocks[b].push(i + 1);
    }
    Ok(SetPartition { n: t.len(), blocks })
}

/// `|NC^pair_n(m)|`: non-crossing pair partitions of `{1, …, n}` with depth at
/// most `m`, by the first-pair decomposition.
pub fn count_nc_pair(n: usize, m: usize) -> BigUint {
    if n % 2 == 1 {
        return BigUint::zero();
    }
    if n == 0 {
        return BigUint::one();
    }
    let m = m.min(n / 2);
    // table[d][k] = |NC^pair_{2k}(d)|
    let half = n / 2;
    let mut table = vec![vec![BigUint::zero(); half + 1]; m + 1];
    for row in table.iter_mut() {
        row[0] = BigUint::one();
    }
    for d in 1..=m {
        for k in 1..=half {
            // 1 is paired with 2j + 2; the inside holds j pairs of depth < d
            let mut total = BigUint::zero();
            for j in 0..k {
                total += &table[d - 1][j] * &table[d][k - 1 - j];
            }
            table[d][k] = total;
        }
    }
    table[m][half].clone()
}

/// Dense tables `|NC_len(c, d)|` for `len <= n_max`, `d <= m_max` and block
/// counts `c <= b_max`.
fn nc_tables(n_max: usize, m_max: usize, b_max: usize) -> Vec<Vec<Vec<BigUint>>> {
    let width = b_max.min(n_max) + 1;
    let zero_row = || vec![BigUint::zero(); width];
    let mut nc: Vec<Vec<Vec<BigUint>>> = Vec::with_capacity(m_max + 1);
    // depth 0: only the empty partition
    let mut base = vec![zero_row(); n_max + 1];
    base[0][0] = BigUint::one();
    nc.push(base);
    for d in 1..=m_max {
        let mut cur = vec![zero_row(); n_max + 1];
        cur[0][0] = BigUint::one();
        // tail[len][c]: fillings of `len` positions after the first element,
        // made of gaps (depth < d) each closed by an element of the first
        // block, followed by a final interval of depth <= d; `c` counts blocks
        let mut tail: Vec<Vec<BigUint>> = Vec::with_capacity(n_max);
        for len in 0..n_max {
            if len >= 1 {
                for b in 1..width.min(len + 1) {
                    cur[len][b] = tail[len - 1][b - 1].clone();
                }
            }
            let mut row = cur[len].clone();
            for k in 1..=len {
                let rest_row = &tail[len - k];
                for (c_gap, gap) in nc[d - 1][k - 1].iter().enumerate() {
                    if gap.is_zero() {
                        continue;
                    }
                    for (c, rest) in rest_row.iter().enumerate().take(width - c_gap) {
                        if !rest.is_zero() {
                            row[c + c_gap] += gap * rest;
                        }
                    }
                }
            }
            tail.push(row);
        }
        if n_max >= 1 {
            for b in 1..width {
                cur[n_max][b] = tail[n_max - 1][b - 1].clone();
            }
        }
        nc.push(cur);
    }
    nc
}

/// Largest depth of a non-crossing partition of `n` points: every nested
/// block but the innermost uses two of them.
fn max_depth(n: usize) -> usize {
    n.div_ceil(2)
}

/// `|NC_n(b, m)|`: non-crossing partitions of `{1, …, n}` with `b` blocks and
/// depth at most `m`, with `|NC_n(b, 0)| = δ_{n0} δ_{b0}` and
/// `|NC_n(0, m)| = δ_{n0}`.
pub fn count_nc(n: usize, b: usize, m: usize) -> BigUint {
    if b > n {
        return BigUint::zero();
    }
    if n == 0 {
        return if b == 0 { BigUint::one() } else { BigUint::zero() };
    }
    let m = m.min(max_depth(n));
    nc_tables(n, m, b)[m][n][b].clone()
}

/// `|NC_n(b, m)|` for a fixed `n` and every `b <= n`, `m <= m_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthCountTable {
    n: usize,
    entries: BTreeMap<(usize, usize), BigUint>,
}

impl DepthCountTable {
    pub fn build(n: usize, m_max: usize) -> Self {
        let capped = m_max.min(max_depth(n).max(1));
        let tables = nc_tables(n, capped, n);
        let mut entries = BTreeMap::new();
        // deeper tables repeat the last one; `get` saturates
        for (m, table) in tables.iter().enumerate() {
            for (b, c) in table[n].iter().enumerate() {
                entries.insert((b, m), c.clone());
            }
        }
        DepthCountTable { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Count for `(b, m)`; zero outside the stored range of `b`.
    pub fn get(&self, b: usize, m: usize) -> BigUint {
        match self.entries.get(&(b, m)) {
            Some(v) => v.clone(),
            None if b > self.n => BigUint::zero(),
            None => {
                // m beyond the built range saturates at depth n
                let m_top = self.entries.keys().map(|&(_, m)| m).max().unwrap_or(0);
                self.entries[&(b, m_top.min(m))].clone()
            }
        }
    }

    pub fn entries(&self) -> &BTreeMap<(usize, usize), BigUint> {
        &self.entries
    }
}

pub fn catalan(k: usize) -> BigUint {
    let mut c = BigUint::one();
    // C_{j+1} = C_j * 2(2j+1) / (j+2)
    for j in 0..k {
        c = c * BigUint::from(2 * (2 * j + 1)) / BigUint::from(j + 2);
    }
    c
}

/// Falling factorial `(N)_r = N (N-1) … (N-r+1)`.
pub fn falling_factorial(n: u64, r: usize) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..r as u64 {
        if i >= n {
            return BigUint::zero();
        }
        acc *= n - i;
    }
    acc
}
