//! Non-crossing partitions of `{1, …, n}`: pairings, bounded block sizes
//! and the outer/interior classification of blocks.

use serde::{Deserialize, Serialize};

use crate::error::{CfreeError, Result};

/// A non-crossing partition; blocks are sorted and ordered by their minimum.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NonCrossingPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

fn validate(blocks: &[Vec<usize>]) -> Result<usize> {
    let n: usize = blocks.iter().map(Vec::len).sum();
    let mut seen = vec![false; n + 1];
    for block in blocks {
        if block.is_empty() {
            return Err(CfreeError::InvalidPartition("empty block".into()));
        }
        for &i in block {
            if i == 0 || i > n {
                return Err(CfreeError::InvalidPartition(format!("element {i} outside 1..={n}")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(CfreeError::InvalidPartition(format!("element {i} appears twice")));
            }
        }
    }
    Ok(n)
}

fn canonical(mut blocks: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    blocks.iter_mut().for_each(|b| b.sort_unstable());
    blocks.sort_by_key(|b| b[0]);
    blocks
}

/// True iff no `i < j < k < l` has `i, k` in one block and `j, l` in another.
pub fn is_noncrossing(blocks: &[Vec<usize>]) -> Result<bool> {
    let n = validate(blocks)?;
    let mut owner = vec![0; n + 1];
    for (b, block) in blocks.iter().enumerate() {
        for &i in block {
            owner[i] = b;
        }
    }
    for i in 1..=n {
        for j in i + 1..=n {
            if owner[j] == owner[i] {
                continue;
            }
            for k in j + 1..=n {
                if owner[k] != owner[i] {
                    continue;
                }
                if (k + 1..=n).any(|l| owner[l] == owner[j]) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

impl NonCrossingPartition {
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        if !is_noncrossing(&blocks)? {
            return Err(CfreeError::InvalidPartition("blocks cross".into()));
        }
        let n = blocks.iter().map(Vec::len).sum();
        Ok(Self { n, blocks: canonical(blocks) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn is_pairing(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 2)
    }

    /// `partner[i]` for a pairing (1-based, index 0 unused).
    pub fn partners(&self) -> Result<Vec<usize>> {
        if !self.is_pairing() {
            return Err(CfreeError::InvalidPartition("not a pair partition".into()));
        }
        let mut p = vec![0; self.n + 1];
        for b in &self.blocks {
            p[b[0]] = b[1];
            p[b[1]] = b[0];
        }
        Ok(p)
    }

    /// Whether block `inner` lies strictly between two elements of block `outer`.
    fn nested_in(&self, inner: usize, outer: usize) -> bool {
        let (a, b) = (&self.blocks[inner], &self.blocks[outer]);
        outer != inner && b[0] < a[0] && a[a.len() - 1] < b[b.len() - 1]
    }

    /// Indices (into [`blocks`](Self::blocks)) of blocks not interior to any other.
    pub fn outer_blocks(&self) -> Vec<usize> {
        (0..self.blocks.len()).filter(|&i| !(0..self.blocks.len()).any(|j| self.nested_in(i, j))).collect()
    }
}

impl Serialize for NonCrossingPartition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.blocks.serialize(s)
    }
}

impl<'de> Deserialize<'de> for NonCrossingPartition {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let blocks = Vec::<Vec<usize>>::deserialize(de)?;
        Self::new(blocks).map_err(serde::de::Error::custom)
    }
}

/// All of `NC₂(n)`, ordered by the partner of the first point, then recursively.
pub fn enumerate_nc_pairings(n: usize) -> Vec<NonCrossingPartition> {
    pairings_on(1, n)
        .into_iter()
        .map(|blocks| NonCrossingPartition { n, blocks: canonical(blocks) })
        .collect()
}

fn pairings_on(lo: usize, hi: usize) -> Vec<Vec<Vec<usize>>> {
    if lo > hi {
        return vec![vec![]];
    }
    if (hi + 1 - lo) % 2 == 1 {
        return vec![];
    }
    let mut out = Vec::new();
    for k in (lo + 1..=hi).step_by(2) {
        let inner = pairings_on(lo + 1, k - 1);
        let tail = pairings_on(k + 1, hi);
        for a in &inner {
            for b in &tail {
                let mut blocks = vec![vec![lo, k]];
                blocks.extend(a.iter().cloned());
                blocks.extend(b.iter().cloned());
                out.push(blocks);
            }
        }
    }
    out
}

/// All non-crossing partitions of `{1..n}` with block sizes at most `s`.
pub fn enumerate_nc_bounded(n: usize, s: usize) -> Vec<NonCrossingPartition> {
    bounded_on(1, n, s.max(1))
        .into_iter()
        .map(|blocks| NonCrossingPartition { n, blocks: canonical(blocks) })
        .collect()
}

fn bounded_on(lo: usize, hi: usize, s: usize) -> Vec<Vec<Vec<usize>>> {
    if lo > hi {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    let mut block = vec![lo];
    extend_first_block(&mut block, hi, s, &mut out);
    out
}

// Grows the block containing `block[0]`; each gap it leaves is filled independently.
fn extend_first_block(block: &mut Vec<usize>, hi: usize, s: usize, out: &mut Vec<Vec<Vec<usize>>>) {
    let last = *block.last().expect("block is nonempty");
    // close the block here: the gaps are (block[t]+1 .. block[t+1]-1) and (last+1 .. hi)
    let mut fillings: Vec<Vec<Vec<usize>>> = vec![vec![block.clone()]];
    let mut ranges: Vec<(usize, usize)> = block.windows(2).map(|w| (w[0] + 1, w[1] - 1)).collect();
    ranges.push((last + 1, hi));
    for (a, b) in ranges {
        let parts = bounded_on(a, b, s);
        let mut next = Vec::with_capacity(fillings.len() * parts.len());
        for f in &fillings {
            for p in &parts {
                let mut merged = f.clone();
                merged.extend(p.iter().cloned());
                next.push(merged);
            }
        }
        fillings = next;
    }
    out.extend(fillings);
    if block.len() < s {
        for next in last + 1..=hi {
            block.push(next);
            extend_first_block(block, hi, s, out);
            block.pop();
        }
    }
}

pub fn catalan(k: usize) -> u64 {
    let mut c = vec![1u64; k + 1];
    for m in 1..=k {
        c[m] = (0..m).map(|i| c[i] * c[m - 1 - i]).sum();
    }
    c[k]
}
