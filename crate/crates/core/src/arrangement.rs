//! Subspace arrangements: `N` packets, each probing an `m`-subset of the
//! coordinates.
//!
//! Arrangements are unordered collections of blocks and may repeat a block.
//! Every arrangement with the allocated multiplicity vector reaches the same
//! full-availability MSE, so this module only needs to produce them; scoring
//! lives in [`crate::mse`].

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng::substream;

/// Unordered collection of equal-size coordinate blocks (0-based indices).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arrangement {
    dim: usize,
    blocks: Vec<Vec<usize>>,
}

impl Arrangement {
    /// Validates and canonicalizes (each block sorted, blocks sorted).
    pub fn new(dim: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let m = blocks.first().map_or(0, Vec::len);
        if blocks.is_empty() || m == 0 {
            return Err(Error::InvalidArrangement(
                "needs at least one nonempty block".into(),
            ));
        }
        let mut canon = Vec::with_capacity(blocks.len());
        for mut b in blocks {
            b.sort_unstable();
            if b.len() != m {
                return Err(Error::InvalidArrangement(format!(
                    "blocks must all have {m} indices, found {}",
                    b.len()
                )));
            }
            if b.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidArrangement(format!(
                    "repeated index in block {b:?}"
                )));
            }
            if let Some(&j) = b.iter().find(|&&j| j >= dim) {
                return Err(Error::InvalidArrangement(format!(
                    "index {j} outside dimension {dim}"
                )));
            }
            canon.push(b);
        }
        canon.sort();
        Ok(Self { dim, blocks: canon })
    }

    /// Builds from 1-based index lists as printed in reports.
    pub fn from_one_based(dim: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let zero = blocks
            .iter()
            .map(|b| {
                b.iter()
                    .map(|&j| {
                        j.checked_sub(1)
                            .ok_or_else(|| Error::InvalidArrangement("indices are 1-based".into()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, zero)
    }

    fn from_canonical(dim: usize, blocks: Vec<Vec<usize>>) -> Self {
        Self { dim, blocks }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn packets(&self) -> usize {
        self.blocks.len()
    }

    pub fn subspace_dim(&self) -> usize {
        self.blocks[0].len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// How many blocks contain each coordinate.
    pub fn multiplicity(&self) -> Vec<usize> {
        let mut c = vec![0; self.dim];
        for b in &self.blocks {
            for &j in b {
                c[j] += 1;
            }
        }
        c
    }

    /// Combined multiplicity of the packets in `subset`.
    pub fn subset_multiplicity(&self, subset: &[usize]) -> Result<Vec<usize>> {
        let mut c = vec![0; self.dim];
        for &k in subset {
            let b = self.blocks.get(k).ok_or(Error::PacketOutOfRange {
                index: k,
                packets: self.packets(),
            })?;
            for &j in b {
                c[j] += 1;
            }
        }
        Ok(c)
    }

    /// Stable identifier: truncated SHA-256 of the canonical form.
    pub fn id(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.dim.to_le_bytes());
        for b in &self.blocks {
            h.update((b.len() as u64).to_le_bytes());
            for &j in b {
                h.update((j as u64).to_le_bytes());
            }
        }
        h.finalize()[..8]
            .iter()
            .map(|x| format!("{x:02x}"))
            .collect()
    }

    pub fn one_based_blocks(&self) -> Vec<Vec<usize>> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|j| j + 1).collect())
            .collect()
    }

    pub fn to_record(&self) -> ArrangementRecord {
        ArrangementRecord {
            id: self.id(),
            blocks: self.one_based_blocks(),
            multiplicity: self.multiplicity(),
        }
    }
}

impl fmt::Display for Arrangement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, b) in self.blocks.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            let inner: Vec<String> = b.iter().map(|j| (j + 1).to_string()).collect();
            write!(f, "{{{}}}", inner.join(", "))?;
        }
        write!(f, "}}")
    }
}

/// JSON form with 1-based indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrangementRecord {
    pub id: String,
    pub blocks: Vec<Vec<usize>>,
    pub multiplicity: Vec<usize>,
}

/// `N` disjoint consecutive blocks covering `[0, M)`.
pub fn toy_partition(dim: usize, m: usize) -> Result<Arrangement> {
    if m == 0 || !dim.is_multiple_of(m) {
        return Err(Error::InvalidArrangement(format!(
            "{dim} is not divisible by {m}"
        )));
    }
    let blocks = (0..dim / m)
        .map(|k| (k * m..(k + 1) * m).collect())
        .collect();
    Arrangement::new(dim, blocks)
}

fn check_targets(s: &[usize], n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParams("N and m must be positive".into()));
    }
    let total: usize = s.iter().sum();
    if total != n * m {
        return Err(Error::InvalidParams(format!(
            "multiplicities sum to {total}, expected {}",
            n * m
        )));
    }
    if m > s.len() {
        return Err(Error::InvalidParams(format!(
            "m = {m} exceeds dimension {}",
            s.len()
        )));
    }
    Ok(())
}

/// Whether an arrangement may use the same block more than once.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockRule {
    #[default]
    Distinct,
    Repeated,
}

/// Streams every arrangement of distinct blocks with multiplicity vector `s`,
/// once each, in lexicographic order of the sorted block lists.
pub fn enumerate_arrangements(s: &[usize], n: usize, m: usize) -> Result<ArrangementIter> {
    enumerate_arrangements_with(s, n, m, BlockRule::Distinct)
}

pub fn enumerate_arrangements_with(
    s: &[usize],
    n: usize,
    m: usize,
    rule: BlockRule,
) -> Result<ArrangementIter> {
    check_targets(s, n, m)?;
    let support: Vec<usize> = (0..s.len()).filter(|&j| s[j] > 0).collect();
    let rem = support.iter().map(|&j| s[j]).collect();
    Ok(ArrangementIter {
        dim: s.len(),
        n,
        m,
        rule,
        // No block may hold a coordinate twice.
        feasible: s.iter().all(|&v| v <= n),
        support,
        rem,
        stack: Vec::with_capacity(n * m),
        started: false,
        finished: false,
    })
}

/// Depth-first search over the `N * m` slot choices.
///
/// Slots are filled block by block with strictly increasing support positions
/// inside a block and increasing (or, with repeats, nondecreasing) blocks. A coordinate whose remaining
/// multiplicity equals the number of blocks still open must go into the
/// current block; skipping past it prunes the branch.
pub struct ArrangementIter {
    dim: usize,
    n: usize,
    m: usize,
    rule: BlockRule,
    feasible: bool,
    support: Vec<usize>,
    rem: Vec<usize>,
    stack: Vec<usize>,
    started: bool,
    finished: bool,
}

impl ArrangementIter {
    fn lower_bound(&self, p: usize) -> usize {
        let (k, i) = (p / self.m, p % self.m);
        let mut lb = if i > 0 { self.stack[p - 1] + 1 } else { 0 };
        if k > 0 {
            let prev = (k - 1) * self.m;
            let cur = k * self.m;
            if self.stack[prev..prev + i] == self.stack[cur..cur + i] {
                let strict = i + 1 == self.m && self.rule == BlockRule::Distinct;
                lb = lb.max(self.stack[prev + i] + usize::from(strict));
            }
        }
        lb
    }

    fn next_candidate(&self, p: usize, from: usize) -> Option<usize> {
        let open = self.n - p / self.m;
        let lb = from.max(self.lower_bound(p));
        let mut forced_before = self.rem[..lb.min(self.rem.len())]
            .iter()
            .any(|&r| r >= open);
        for c in lb..self.support.len() {
            if forced_before {
                return None;
            }
            if self.rem[c] > 0 {
                return Some(c);
            }
            forced_before = self.rem[c] >= open;
        }
        None
    }

    fn block_closed_ok(&self, p: usize) -> bool {
        if !(p + 1).is_multiple_of(self.m) {
            return true;
        }
        let open_after = self.n - (p + 1) / self.m;
        self.rem.iter().all(|&r| r <= open_after)
    }

    /// Extends the stack to a full assignment, trying slot `stack.len()` from `from`.
    fn search(&mut self, mut from: usize) -> bool {
        let total = self.n * self.m;
        loop {
            let p = self.stack.len();
            if p == total {
                return true;
            }
            match self.next_candidate(p, from) {
                Some(c) => {
                    self.rem[c] -= 1;
                    if self.block_closed_ok(p) {
                        self.stack.push(c);
                        from = 0;
                    } else {
                        self.rem[c] += 1;
                        from = c + 1;
                    }
                }
                None => match self.stack.pop() {
                    Some(c) => {
                        self.rem[c] += 1;
                        from = c + 1;
                    }
                    None => return false,
                },
            }
        }
    }

    fn current(&self) -> Arrangement {
        let blocks = self
            .stack
            .chunks(self.m)
            .map(|chunk| chunk.iter().map(|&c| self.support[c]).collect())
            .collect();
        Arrangement::from_canonical(self.dim, blocks)
    }
}

impl Iterator for ArrangementIter {
    type Item = Arrangement;

    fn next(&mut self) -> Option<Arrangement> {
        if self.finished || !self.feasible {
            return None;
        }
        let found = if !self.started {
            self.started = true;
            self.search(0)
        } else {
            let c = self.stack.pop().expect("complete assignment on stack");
            self.rem[c] += 1;
            self.search(c + 1)
        };
        if found {
            Some(self.current())
        } else {
            self.finished = true;
            None
        }
    }
}

/// One feasible arrangement: each block takes the `m` coordinates with the
/// largest remaining multiplicity (lower index on ties).
pub fn greedy_arrangement(s: &[usize], n: usize, m: usize) -> Result<Arrangement> {
    check_targets(s, n, m)?;
    let mut rem = s.to_vec();
    let mut blocks = Vec::with_capacity(n);
    for _ in 0..n {
        let mut idx: Vec<usize> = (0..rem.len()).filter(|&j| rem[j] > 0).collect();
        if idx.len() < m {
            return Err(Error::Infeasible);
        }
        idx.sort_by(|&a, &b| rem[b].cmp(&rem[a]).then(a.cmp(&b)));
        idx.truncate(m);
        for &j in &idx {
            rem[j] -= 1;
        }
        blocks.push(idx);
    }
    if rem.iter().any(|&r| r > 0) {
        return Err(Error::Infeasible);
    }
    Arrangement::new(s.len(), blocks)
}

/// Settings for [`sample_arrangements`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerOptions {
    /// Swap moves per sample; `None` means `50 * N * m`.
    pub burn_in: Option<usize>,
    pub rule: BlockRule,
    /// Attempts per requested arrangement before giving up on distinctness.
    pub attempts_per_sample: usize,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self {
            burn_in: None,
            rule: BlockRule::Distinct,
            attempts_per_sample: 20,
        }
    }
}

/// Up to `count` distinct arrangements with multiplicity vector `s`.
///
/// Each attempt `i` starts from [`greedy_arrangement`] and runs a swap chain
/// on its own substream `(seed, i)`. A move exchanges a coordinate of one
/// block with a coordinate of another block. With distinct blocks, moves
/// that would repeat a block are rejected (any repeats left by the greedy
/// start are worked off first); with repeats allowed, acceptance is weighted
/// by the block repetition counts. Either way the chain targets the uniform
/// law over unordered arrangements.
pub fn sample_arrangements(
    s: &[usize],
    n: usize,
    m: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Arrangement>> {
    sample_arrangements_with(s, n, m, count, seed, SamplerOptions::default())
}

pub fn sample_arrangements_with(
    s: &[usize],
    n: usize,
    m: usize,
    count: usize,
    seed: u64,
    opts: SamplerOptions,
) -> Result<Vec<Arrangement>> {
    if count == 0 {
        return Err(Error::InvalidParams("count must be at least 1".into()));
    }
    if s.iter().any(|&v| v > n) {
        return Err(Error::Infeasible);
    }
    let start = greedy_arrangement(s, n, m)?;
    let burn_in = opts.burn_in.unwrap_or(50 * n * m);
    let max_attempts = count
        .saturating_mul(opts.attempts_per_sample.max(1))
        .max(100);

    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(count);
    for attempt in 0..max_attempts {
        if out.len() == count {
            break;
        }
        let a = swap_chain(&start, burn_in, opts.rule, seed, attempt as u64)?;
        if seen.insert(a.clone()) {
            out.push(a);
        }
    }
    Ok(out)
}

fn swap_chain(
    start: &Arrangement,
    steps: usize,
    rule: BlockRule,
    seed: u64,
    stream: u64,
) -> Result<Arrangement> {
    let mut rng = substream(seed, stream);
    let mut blocks = start.blocks.clone();
    let n = blocks.len();
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    for b in &blocks {
        *counts.entry(b.clone()).or_default() += 1;
    }
    let distinct_ok =
        |counts: &HashMap<Vec<usize>, usize>| rule == BlockRule::Repeated || counts.len() == n;
    if n < 2 {
        return Ok(start.clone());
    }
    // Leftover repeats get up to ten more burn-in lengths to clear.
    let limit = steps.saturating_mul(11).max(1000);
    let mut step = 0;
    while step < steps || !distinct_ok(&counts) {
        if step >= limit {
            return Err(Error::Infeasible);
        }
        step += 1;
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let only_a: Vec<usize> = blocks[a]
            .iter()
            .copied()
            .filter(|j| !blocks[b].contains(j))
            .collect();
        if only_a.is_empty() {
            continue;
        }
        let only_b: Vec<usize> = blocks[b]
            .iter()
            .copied()
            .filter(|j| !blocks[a].contains(j))
            .collect();
        let j = only_a[rng.random_range(0..only_a.len())];
        let jb = only_b[rng.random_range(0..only_b.len())];

        let mut new_a = blocks[a].clone();
        new_a.retain(|&x| x != j);
        new_a.push(jb);
        new_a.sort_unstable();
        let mut new_b = blocks[b].clone();
        new_b.retain(|&x| x != jb);
        new_b.push(j);
        new_b.sort_unstable();

        // Ratio of prod(count!) after / before.
        let kinds = counts.len();
        let mut ratio = 1.0;
        dec(&mut counts, &blocks[a], &mut ratio);
        dec(&mut counts, &blocks[b], &mut ratio);
        inc(&mut counts, &new_a, &mut ratio);
        inc(&mut counts, &new_b, &mut ratio);
        let accept = match rule {
            BlockRule::Distinct => counts.len() >= kinds,
            BlockRule::Repeated => ratio >= 1.0 || rng.random::<f64>() < ratio,
        };
        if accept {
            blocks[a] = new_a;
            blocks[b] = new_b;
        } else {
            let mut undo = 1.0;
            dec(&mut counts, &new_a, &mut undo);
            dec(&mut counts, &new_b, &mut undo);
            let (old_a, old_b) = (blocks[a].clone(), blocks[b].clone());
            inc(&mut counts, &old_a, &mut undo);
            inc(&mut counts, &old_b, &mut undo);
        }
    }
    blocks.sort();
    Ok(Arrangement::from_canonical(start.dim, blocks))
}

fn dec(counts: &mut HashMap<Vec<usize>, usize>, block: &[usize], ratio: &mut f64) {
    let c = counts.get_mut(block).expect("block is tracked");
    *ratio /= *c as f64;
    *c -= 1;
    if *c == 0 {
        counts.remove(block);
    }
}

fn inc(counts: &mut HashMap<Vec<usize>, usize>, block: &[usize], ratio: &mut f64) {
    let c = counts.entry(block.to_vec()).or_default();
    *c += 1;
    *ratio *= *c as f64;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_of_four() {
        let all: Vec<_> = enumerate_arrangements(&[1, 1, 1, 1], 2, 2)
            .unwrap()
            .collect();
        let shown: Vec<String> = all.iter().map(|a| a.to_string()).collect();
        assert_eq!(
            shown,
            ["{{1, 2}, {3, 4}}", "{{1, 3}, {2, 4}}", "{{1, 4}, {2, 3}}"]
        );
    }

    #[test]
    fn forced_full_blocks() {
        let rep: Vec<_> = enumerate_arrangements_with(&[3, 3, 3], 3, 3, BlockRule::Repeated)
            .unwrap()
            .collect();
        assert_eq!(rep.len(), 1);
        assert_eq!(
            rep[0].blocks(),
            &[vec![0, 1, 2], vec![0, 1, 2], vec![0, 1, 2]]
        );
        assert_eq!(enumerate_arrangements(&[3, 3, 3], 3, 3).unwrap().count(), 0);
        assert_eq!(enumerate_arrangements(&[1, 1, 1], 1, 3).unwrap().count(), 1);
    }

    #[test]
    fn infeasible_is_empty() {
        // Coordinate 0 would need to appear twice in a block.
        assert_eq!(enumerate_arrangements(&[3, 1], 2, 2).unwrap().count(), 0);
        assert!(enumerate_arrangements(&[1, 1], 2, 2).is_err());
    }

    #[test]
    fn repeated_blocks_only_under_repeated_rule() {
        let s = [2, 2, 1, 1];
        let rep: Vec<_> = enumerate_arrangements_with(&s, 3, 2, BlockRule::Repeated)
            .unwrap()
            .collect();
        let dis: Vec<_> = enumerate_arrangements(&s, 3, 2).unwrap().collect();
        assert!(rep.iter().any(|a| a.blocks()[0] == a.blocks()[1]));
        assert!(dis
            .iter()
            .all(|a| a.blocks().windows(2).all(|w| w[0] != w[1])));
        assert!(dis.len() < rep.len());
        for a in rep.iter().chain(&dis) {
            assert_eq!(a.multiplicity(), s);
        }
    }

    #[test]
    fn toy_partitions() {
        let a = toy_partition(4, 2).unwrap();
        assert_eq!(a.one_based_blocks(), vec![vec![1, 2], vec![3, 4]]);
        assert_eq!(toy_partition(6, 2).unwrap().multiplicity(), vec![1; 6]);
        assert!(toy_partition(5, 2).is_err());
    }

    #[test]
    fn validation() {
        assert!(Arrangement::new(4, vec![vec![0, 0]]).is_err());
        assert!(Arrangement::new(4, vec![vec![0, 4]]).is_err());
        assert!(Arrangement::new(4, vec![vec![0, 1], vec![2]]).is_err());
        assert!(Arrangement::from_one_based(4, &[vec![0, 1]]).is_err());
    }

    #[test]
    fn id_is_canonical() {
        let a = Arrangement::new(4, vec![vec![3, 2], vec![1, 0]]).unwrap();
        let b = Arrangement::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(a.id(), b.id());
        assert_eq!(a.id().len(), 16);
        assert_ne!(a.id(), toy_partition(4, 1).unwrap().id());
    }

    #[test]
    fn greedy_start_realizes_targets() {
        let s = [3, 3, 3, 3, 3, 2, 2, 1];
        let a = greedy_arrangement(&s, 5, 4).unwrap();
        assert_eq!(a.multiplicity(), s);
    }

    #[test]
    fn sampler_single_arrangement() {
        let opts = SamplerOptions {
            rule: BlockRule::Repeated,
            ..SamplerOptions::default()
        };
        let out = sample_arrangements_with(&[2, 2], 2, 2, 1, 9, opts).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].blocks(), &[vec![0, 1], vec![0, 1]]);
        assert!(matches!(
            sample_arrangements(&[2, 2], 2, 2, 1, 9),
            Err(Error::Infeasible)
        ));
        assert!(matches!(
            sample_arrangements(&[3, 1], 2, 2, 1, 0),
            Err(Error::Infeasible)
        ));
    }

    #[test]
    fn sampler_clears_greedy_repeats() {
        // Greedy puts {0, 1} in each of the first three blocks.
        let s = [3, 3, 1, 1, 1, 1];
        let start = greedy_arrangement(&s, 5, 2).unwrap();
        assert_eq!(start.blocks()[0], start.blocks()[1]);
        for a in sample_arrangements(&s, 5, 2, 5, 4).unwrap() {
            assert!(a.blocks().windows(2).all(|w| w[0] != w[1]));
            assert_eq!(a.multiplicity(), s);
        }
    }
}
