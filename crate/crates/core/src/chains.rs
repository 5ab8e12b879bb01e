//! Complete partition chains of an N-body cluster and their topological
//! classes under particle relabeling.

use std::collections::HashMap;
use std::fmt::Write;

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{FyError, Result};

pub const MIN_PARTICLES: usize = 2;
pub const MAX_PARTICLES: usize = 8;

/// A chain of set partitions of `{1..N}` from the full cluster down to one
/// pair plus singletons. Blocks are bit masks (bit `p` is particle `p + 1`);
/// level `k` holds `k + 1` blocks in ascending mask order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartitionChain {
    n: u8,
    blocks: Vec<u16>,
}

impl PartitionChain {
    /// Builds a chain from explicit levels, validating every invariant.
    pub fn from_levels(n: usize, levels: &[Vec<u16>]) -> Result<Self> {
        check_n(n)?;
        if levels.len() != n - 1 {
            return Err(FyError::Chains(format!(
                "expected {} levels, got {}",
                n - 1,
                levels.len()
            )));
        }
        let full = full_mask(n);
        let mut blocks = Vec::new();
        for (k, level) in levels.iter().enumerate() {
            let mut sorted = level.clone();
            sorted.sort_unstable();
            if sorted.len() != k + 1 {
                return Err(FyError::Chains(format!(
                    "level {k} has {} blocks",
                    sorted.len()
                )));
            }
            let union = sorted
                .iter()
                .try_fold(0u16, |acc, &b| (b != 0 && acc & b == 0).then_some(acc | b));
            if union != Some(full) {
                return Err(FyError::Chains(format!("level {k} is not a partition")));
            }
            blocks.extend(sorted);
        }
        let chain = PartitionChain { n: n as u8, blocks };
        for k in 1..n - 1 {
            if split_of(chain.level(k - 1), chain.level(k)).is_none() {
                return Err(FyError::Chains(format!(
                    "level {k} does not split one block of level {}",
                    k - 1
                )));
            }
        }
        Ok(chain)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn depth(&self) -> usize {
        self.n() - 1
    }

    pub fn level(&self, k: usize) -> &[u16] {
        let start = k * (k + 1) / 2;
        &self.blocks[start..start + k + 1]
    }

    pub fn levels(&self) -> impl Iterator<Item = &[u16]> {
        (0..self.depth()).map(|k| self.level(k))
    }

    /// `(parent, (child_a, child_b))` for each step, children in ascending order.
    pub fn splits(&self) -> Vec<(u16, (u16, u16))> {
        (1..self.depth())
            .map(|k| split_of(self.level(k - 1), self.level(k)).expect("valid chain"))
            .collect()
    }

    /// Image under the relabeling `p → perm[p]` (zero based).
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for level in self.levels() {
            let start = blocks.len();
            blocks.extend(level.iter().map(|&b| map_mask(b, perm)));
            blocks[start..].sort_unstable();
        }
        PartitionChain { n: self.n, blocks }
    }
}

fn check_n(n: usize) -> Result<()> {
    if !(MIN_PARTICLES..=MAX_PARTICLES).contains(&n) {
        return Err(FyError::Chains(format!(
            "particle count {n} outside {MIN_PARTICLES}..={MAX_PARTICLES}"
        )));
    }
    Ok(())
}

fn full_mask(n: usize) -> u16 {
    ((1u32 << n) - 1) as u16
}

fn map_mask(b: u16, perm: &[usize]) -> u16 {
    let mut out = 0u16;
    for (p, &q) in perm.iter().enumerate() {
        if b & (1 << p) != 0 {
            out |= 1 << q;
        }
    }
    out
}

fn split_of(prev: &[u16], next: &[u16]) -> Option<(u16, (u16, u16))> {
    let gone: Vec<u16> = prev.iter().copied().filter(|b| !next.contains(b)).collect();
    let new: Vec<u16> = next.iter().copied().filter(|b| !prev.contains(b)).collect();
    match (gone.as_slice(), new.as_slice()) {
        ([p], [a, b]) if a | b == *p && a & b == 0 => Some((*p, (*a.min(b), *a.max(b)))),
        _ => None,
    }
}

/// `N!(N−1)!/2^{N−1}`.
pub fn chain_count(n: usize) -> u64 {
    let fact = |k: usize| (1..=k as u64).product::<u64>();
    fact(n) * fact(n - 1) / (1u64 << (n - 1))
}

/// The approximate class-count formula `2(N−1)!/(π/2)^N`, before any rounding.
pub fn approx_class_count(n: usize) -> f64 {
    let fact: f64 = (1..n).map(|k| k as f64).product();
    2.0 * fact / std::f64::consts::FRAC_PI_2.powi(n as i32)
}

/// All complete partition chains of `n` particles, in a fixed order.
pub fn enumerate_chains(n: usize) -> Result<Vec<PartitionChain>> {
    check_n(n)?;
    let mut out = Vec::with_capacity(chain_count(n) as usize);
    let mut blocks = vec![full_mask(n)];
    extend(n, &mut blocks, 1, &mut out);
    Ok(out)
}

fn extend(n: usize, blocks: &mut Vec<u16>, level: usize, out: &mut Vec<PartitionChain>) {
    if level == n - 1 {
        out.push(PartitionChain {
            n: n as u8,
            blocks: blocks.clone(),
        });
        return;
    }
    let start = (level - 1) * level / 2;
    let prev: Vec<u16> = blocks[start..].to_vec();
    for (idx, &b) in prev.iter().enumerate() {
        if b.count_ones() < 2 {
            continue;
        }
        // Proper subsets holding the lowest bit of `b`, so each split is seen once.
        let low = b & b.wrapping_neg();
        let rest = b ^ low;
        let mut sub = rest;
        loop {
            sub = sub.wrapping_sub(1) & rest;
            let a = sub | low;
            if a != b {
                let c = b ^ a;
                let len = blocks.len();
                blocks.extend(
                    prev.iter()
                        .enumerate()
                        .filter(|&(i, _)| i != idx)
                        .map(|(_, &x)| x),
                );
                blocks.push(a);
                blocks.push(c);
                blocks[len..].sort_unstable();
                extend(n, blocks, level + 1, out);
                blocks.truncate(len);
            }
            if sub == 0 {
                break;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainClass {
    /// Lexicographically smallest relabeling.
    pub canonical_form: PartitionChain,
    /// Number of chains in the class.
    pub members: usize,
}

/// Orbits of `chains` under all `N!` relabelings, sorted by canonical form.
/// `members` counts the input chains in each orbit.
pub fn classify_chains(chains: &[PartitionChain]) -> Result<Vec<ChainClass>> {
    let Some(first) = chains.first() else {
        return Ok(Vec::new());
    };
    let n = first.n();
    if chains.iter().any(|c| c.n() != n) {
        return Err(FyError::Chains(
            "chains from different particle counts".into(),
        ));
    }
    let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    let index: HashMap<&PartitionChain, usize> =
        chains.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let mut seen = vec![false; chains.len()];
    let mut classes = Vec::new();
    for (i, c) in chains.iter().enumerate() {
        if seen[i] {
            continue;
        }
        let mut orbit: Vec<PartitionChain> = perms.par_iter().map(|p| c.relabel(p)).collect();
        orbit.sort_unstable();
        orbit.dedup();
        let mut members = 0;
        for image in &orbit {
            if let Some(&j) = index.get(image) {
                if !seen[j] {
                    seen[j] = true;
                    members += 1;
                }
            }
        }
        classes.push(ChainClass {
            canonical_form: orbit.swap_remove(0),
            members,
        });
    }
    classes.sort_by(|a, b| a.canonical_form.cmp(&b.canonical_form));
    Ok(classes)
}

/// Cluster label such as `(123)` or `4`.
pub fn block_label(b: u16) -> String {
    let digits: String = (0..16)
        .filter(|p| b & (1 << p) != 0)
        .map(|p| (p + 1).to_string())
        .collect();
    if b.count_ones() > 1 {
        format!("({digits})")
    } else {
        digits
    }
}

/// Chain in the usual `(1234)⊃(123)4⊃(12)34` notation.
pub fn chain_label(chain: &PartitionChain) -> String {
    chain
        .levels()
        .map(|level| {
            let mut l = level.to_vec();
            l.sort_by_key(|&b| (std::cmp::Reverse(b.count_ones()), b.trailing_zeros()));
            l.iter().map(|&b| block_label(b)).collect::<String>()
        })
        .join("⊃")
}

/// Tree diagram in DOT format: one node per cluster, one edge per split.
pub fn emit_tree(chain: &PartitionChain) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph chain {{");
    let _ = writeln!(out, "  label=\"{}\";", chain_label(chain));
    let full = chain.level(0)[0];
    let _ = writeln!(out, "  c{full} [label=\"{}\", level=0];", block_label(full));
    for (k, (parent, (a, b))) in chain.splits().into_iter().enumerate() {
        for child in [a, b] {
            let _ = writeln!(
                out,
                "  c{child} [label=\"{}\", level={}];",
                block_label(child),
                k + 1
            );
        }
        for child in [a, b] {
            let _ = writeln!(out, "  c{parent} -> c{child};");
        }
    }
    out.push_str("}\n");
    out
}
