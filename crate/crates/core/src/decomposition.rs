//! Chain and grid decompositions of `2^[n]`.
//!
//! The symmetric chain decomposition is the bracket-matching construction:
//! reading a member as a 0/1 string (1 = open, 0 = close), the matched
//! pairs are frozen and the chain walks the unmatched positions. Splitting
//! long chains gives partitions with side lengths in a target window, and
//! products of per-block chains tile `2^[n]` by grids. A uniform random
//! permutation of the ground set randomizes a partition; the conditional
//! pair probability it induces has an exact rational bound.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::lattice::{binomial_big, factorial_big, popcount, Mask};
use crate::rng::{random_permutation, rng_for_trial, rng_from_seed, Prng};

/// Guard for symmetric chain decomposition (walks all of `2^[n]`).
pub const SCD_GUARD: usize = 20;
/// Guard for bounded-length chain partitions.
pub const BOUNDED_PARTITION_GUARD: usize = 16;

/// A partition of `2^[n]` into inclusion chains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainPartition {
    pub n: usize,
    /// Each chain is ordered by inclusion, smallest first.
    pub chains: Vec<Vec<Mask>>,
}

impl ChainPartition {
    /// Disjointness, cover, and total order within each chain.
    pub fn verify(&self) -> Result<()> {
        let total: usize = self.chains.iter().map(|c| c.len()).sum();
        if total != 1 << self.n {
            return Err(Error::Cover(format!(
                "chains hold {} members, expected {}",
                total,
                1u64 << self.n
            )));
        }
        let mut seen = vec![false; 1 << self.n];
        for chain in &self.chains {
            for window in chain.windows(2) {
                let (a, b) = (window[0], window[1]);
                if a & b != a || a == b {
                    return Err(Error::Cover(String::from("chain not inclusion-ordered")));
                }
            }
            for &m in chain {
                if seen[m as usize] {
                    return Err(Error::Cover(format!("member {:#x} covered twice", m)));
                }
                seen[m as usize] = true;
            }
        }
        Ok(())
    }
}

/// Bracket matching of `mask` over positions `0..n`: returns the unmatched
/// positions (ascending) and whether each is set. Unmatched zeros always
/// precede unmatched ones.
fn unmatched_positions(mask: Mask, n: usize) -> Vec<usize> {
    let mut stack: Vec<usize> = Vec::new();
    let mut unmatched_zeros: Vec<usize> = Vec::new();
    for i in 0..n {
        if mask & (1 << i) != 0 {
            stack.push(i);
        } else if stack.pop().is_none() {
            unmatched_zeros.push(i);
        }
    }
    unmatched_zeros.extend(stack); // leftover ones
    unmatched_zeros
}

/// Symmetric chain decomposition of `2^[n]`. Every chain runs from level
/// `k` to level `n − k`; the number of chains is `C(n, ⌊n/2⌋)`.
pub fn scd(n: usize) -> Result<ChainPartition> {
    if n > SCD_GUARD {
        return Err(Error::SizeGuard {
            what: "scd",
            limit: SCD_GUARD,
            got: n,
        });
    }
    let mut chains: Vec<Vec<Mask>> = Vec::new();
    for mask in 0..(1u32 << n) {
        let unmatched = unmatched_positions(mask, n);
        // chain bottoms have all unmatched positions clear
        if unmatched.iter().any(|&i| mask & (1 << i) != 0) {
            continue;
        }
        let mut chain = Vec::with_capacity(unmatched.len() + 1);
        let mut member = mask;
        chain.push(member);
        // fill unmatched positions right to left; each step covers the next
        for &i in unmatched.iter().rev() {
            member |= 1 << i;
            chain.push(member);
        }
        chains.push(chain);
    }
    let partition = ChainPartition { n, chains };
    partition.verify()?;
    Ok(partition)
}

/// Split lengths for a chain of length `len` under window `[l, 2l]`:
/// `ceil(len / 2l)` segments, sizes as equal as possible, longer first.
fn split_lengths(len: usize, l: usize) -> Vec<usize> {
    if len <= 2 * l {
        return vec![len];
    }
    let segments = len.div_ceil(2 * l);
    let base = len / segments;
    let extra = len % segments;
    let mut out = vec![base + 1; extra];
    out.extend(vec![base; segments - extra]);
    out
}

/// Chain partition with every length pushed into `[l, 2l]` where possible:
/// start from the symmetric decomposition, split chains longer than `2l`,
/// report (and optionally merge away) chains shorter than `l`. Returns the
/// partition and the indices of still-violating chains. The window is
/// verified, never assumed.
pub fn chain_partition_bounded(
    n: usize,
    l: usize,
    repair: bool,
) -> Result<(ChainPartition, Vec<usize>)> {
    if n > BOUNDED_PARTITION_GUARD {
        return Err(Error::SizeGuard {
            what: "chain_partition_bounded",
            limit: BOUNDED_PARTITION_GUARD,
            got: n,
        });
    }
    if l == 0 {
        return Err(Error::Range("l must be >= 1"));
    }
    let base = scd(n)?;
    let mut chains: Vec<Vec<Mask>> = Vec::new();
    for chain in base.chains {
        let mut start = 0usize;
        for seg in split_lengths(chain.len(), l) {
            chains.push(chain[start..start + seg].to_vec());
            start += seg;
        }
    }
    if repair {
        // fold short chains into another chain when the union is still a
        // chain and fits the window
        while let Some(si) = chains.iter().position(|c| c.len() < l) {
            let candidate = (0..chains.len()).find(|&j| {
                j != si && chains[j].len() + chains[si].len() <= 2 * l && {
                    let mut merged: Vec<Mask> =
                        chains[j].iter().chain(chains[si].iter()).copied().collect();
                    merged.sort_by_key(|&m| popcount(m));
                    merged
                        .windows(2)
                        .all(|w| w[0] != w[1] && w[0] & w[1] == w[0])
                }
            });
            let Some(j) = candidate else { break };
            let mut merged: Vec<Mask> =
                chains[j].iter().chain(chains[si].iter()).copied().collect();
            merged.sort_by_key(|&m| popcount(m));
            chains[j] = merged;
            chains.remove(si);
        }
    }
    let partition = ChainPartition { n, chains };
    partition.verify()?;
    let violations: Vec<usize> = partition
        .chains
        .iter()
        .enumerate()
        .filter(|(_, c)| c.len() < l || c.len() > 2 * l)
        .map(|(i, _)| i)
        .collect();
    Ok((partition, violations))
}

/// A partition of `2^[n]` into `d`-dimensional grids: `[n]` is split into
/// `d` blocks, each block's sublattice is partitioned into chains, and the
/// grids are all ways of choosing one chain per block (members are the
/// unions of one set per chain).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPartition {
    pub n: usize,
    pub d: usize,
    /// Block masks, pairwise disjoint, union `[n]`.
    pub blocks: Vec<Mask>,
    /// Per-block chain partitions: `block_chains[b]` are chains of subsets
    /// of `blocks[b]`.
    pub block_chains: Vec<Vec<Vec<Mask>>>,
    /// Violating chain indices per block, from the bounded construction.
    pub violations: Vec<Vec<usize>>,
}

impl GridPartition {
    pub fn grid_count(&self) -> usize {
        self.block_chains.iter().map(|c| c.len()).product()
    }

    /// Chain indices per block for a flat grid index.
    pub fn grid_coords(&self, mut g: usize) -> Vec<usize> {
        let mut coords = vec![0usize; self.d];
        for b in (0..self.d).rev() {
            let k = self.block_chains[b].len();
            coords[b] = g % k;
            g /= k;
        }
        coords
    }

    pub fn grid_index(&self, coords: &[usize]) -> usize {
        let mut g = 0usize;
        for (b, &c) in coords.iter().enumerate() {
            g = g * self.block_chains[b].len() + c;
        }
        g
    }

    /// The side chains of grid `g`.
    pub fn grid_sides(&self, g: usize) -> Vec<&[Mask]> {
        self.grid_coords(g)
            .iter()
            .enumerate()
            .map(|(b, &c)| self.block_chains[b][c].as_slice())
            .collect()
    }

    /// All members of grid `g`: unions of one set per side chain, in mixed-
    /// radix order of the per-side positions.
    pub fn grid_members(&self, g: usize) -> Vec<Mask> {
        let sides = self.grid_sides(g);
        let mut members = Vec::new();
        let mut pos = vec![0usize; sides.len()];
        loop {
            let mut m: Mask = 0;
            for (b, side) in sides.iter().enumerate() {
                m |= side[pos[b]];
            }
            members.push(m);
            let mut i = sides.len();
            loop {
                if i == 0 {
                    return members;
                }
                i -= 1;
                if pos[i] + 1 < sides[i].len() {
                    pos[i] += 1;
                    break;
                }
                pos[i] = 0;
            }
        }
    }

    /// Locates the unique grid and per-side positions of a member.
    pub fn locate(&self, mask: Mask) -> Result<(usize, Vec<usize>)> {
        let mut coords = Vec::with_capacity(self.d);
        let mut positions = Vec::with_capacity(self.d);
        for b in 0..self.d {
            let sub = mask & self.blocks[b];
            let mut found = None;
            for (ci, chain) in self.block_chains[b].iter().enumerate() {
                if let Some(pi) = chain.iter().position(|&c| c == sub) {
                    found = Some((ci, pi));
                    break;
                }
            }
            let (ci, pi) = found.ok_or_else(|| {
                Error::Cover(format!("member {:#x} not covered in block {}", mask, b))
            })?;
            coords.push(ci);
            positions.push(pi);
        }
        Ok((self.grid_index(&coords), positions))
    }

    /// Exact disjoint cover of `2^[n]`, side chains totally ordered.
    pub fn verify_cover(&self) -> Result<()> {
        let mut block_union: Mask = 0;
        for &b in &self.blocks {
            if block_union & b != 0 {
                return Err(Error::Cover(String::from("blocks overlap")));
            }
            block_union |= b;
        }
        if self.n > 0 && block_union != (1u32 << self.n) - 1 {
            return Err(Error::Cover(String::from("blocks do not cover [n]")));
        }
        let mut seen = vec![false; 1 << self.n];
        let mut total = 0usize;
        for g in 0..self.grid_count() {
            for m in self.grid_members(g) {
                if seen[m as usize] {
                    return Err(Error::Cover(format!("member {:#x} in two grids", m)));
                }
                seen[m as usize] = true;
                total += 1;
            }
        }
        if total != 1 << self.n {
            return Err(Error::Cover(format!(
                "grids hold {} members, expected {}",
                total,
                1u64 << self.n
            )));
        }
        for b in 0..self.d {
            for chain in &self.block_chains[b] {
                for w in chain.windows(2) {
                    if w[0] == w[1] || w[0] & w[1] != w[0] {
                        return Err(Error::Cover(String::from("side chain not ordered")));
                    }
                }
                for &c in chain {
                    if c & !self.blocks[b] != 0 {
                        return Err(Error::Cover(String::from("chain leaves its block")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Applies a permutation of `[n]` to every member of every chain.
    /// Structure (disjoint cover, chain order, gaps) is preserved.
    pub fn permuted(&self, perm: &[usize]) -> GridPartition {
        let map = |m: Mask| -> Mask {
            let mut out: Mask = 0;
            for (i, &p) in perm.iter().enumerate() {
                if m & (1 << i) != 0 {
                    out |= 1 << p;
                }
            }
            out
        };
        GridPartition {
            n: self.n,
            d: self.d,
            blocks: self.blocks.iter().map(|&b| map(b)).collect(),
            block_chains: self
                .block_chains
                .iter()
                .map(|chains| {
                    chains
                        .iter()
                        .map(|chain| chain.iter().map(|&m| map(m)).collect())
                        .collect()
                })
                .collect(),
            violations: self.violations.clone(),
        }
    }
}

/// Partitions `[n]` into `d` consecutive blocks of sizes
/// `⌊n/d⌋`/`⌈n/d⌉`, builds a bounded chain partition of each block's
/// sublattice with window `[l, 2l]`, and forms the product grids.
pub fn grid_partition(n: usize, d: usize, l: usize) -> Result<GridPartition> {
    if d == 0 || n < d {
        return Err(Error::Range("grid_partition needs 1 <= d <= n"));
    }
    if n > SCD_GUARD {
        return Err(Error::SizeGuard {
            what: "grid_partition",
            limit: SCD_GUARD,
            got: n,
        });
    }
    let base = n / d;
    let extra = n % d;
    let mut blocks = Vec::with_capacity(d);
    let mut start = 0usize;
    for b in 0..d {
        let size = base + if b < extra { 1 } else { 0 };
        let mut mask: Mask = 0;
        for i in start..start + size {
            mask |= 1 << i;
        }
        blocks.push(mask);
        start += size;
    }
    let mut block_chains = Vec::with_capacity(d);
    let mut violations = Vec::with_capacity(d);
    for &block in &blocks {
        let size = popcount(block) as usize;
        let positions: Vec<usize> = (0..n).filter(|&i| block & (1 << i) != 0).collect();
        let (partition, viol) = chain_partition_bounded(size, l, false)?;
        // relabel the block-local chains into the global ground set
        let relabel = |m: Mask| -> Mask {
            let mut out: Mask = 0;
            for (j, &p) in positions.iter().enumerate() {
                if m & (1 << j) != 0 {
                    out |= 1 << p;
                }
            }
            out
        };
        block_chains.push(
            partition
                .chains
                .iter()
                .map(|chain| chain.iter().map(|&m| relabel(m)).collect::<Vec<Mask>>())
                .collect::<Vec<Vec<Mask>>>(),
        );
        violations.push(viol);
    }
    let gp = GridPartition {
        n,
        d,
        blocks,
        block_chains,
        violations,
    };
    gp.verify_cover()?;
    Ok(gp)
}

/// Uniformly permuted copy of the partition.
pub fn permute_partition(gp: &GridPartition, seed: u64) -> GridPartition {
    let mut rng = rng_from_seed(seed);
    let perm = random_permutation(gp.n, &mut rng);
    gp.permuted(&perm)
}

/// The exact bound on `P(B ∈ G' | A ∈ G')` for a random permutation of a
/// grid partition: `C(r+d−1, d−1) · r! · (n−|B|)! / (n−|A|)!` with
/// `r = |B| − |A|`. Can exceed 1; clamp at the call site when using it as
/// a probability.
pub fn grid_pair_probability_bound(
    size_a: usize,
    size_b: usize,
    n: usize,
    d: usize,
) -> Result<BigRational> {
    if size_a > size_b || size_b > n || d == 0 {
        return Err(Error::Range(
            "grid_pair_probability_bound needs |A| <= |B| <= n, d >= 1",
        ));
    }
    let r = size_b - size_a;
    let numer = binomial_big(r + d - 1, d - 1) * factorial_big(r) * factorial_big(n - size_b);
    let denom = factorial_big(n - size_a);
    Ok(BigRational::new(numer, denom))
}

/// Number of trials in `lo..hi` whose random permutation puts `a` and `b`
/// in the same grid. Per-trial child seeds make the count independent of
/// how the range is chunked across workers.
pub fn same_grid_hits(
    gp: &GridPartition,
    a: Mask,
    b: Mask,
    lo: u64,
    hi: u64,
    seed: u64,
) -> Result<u64> {
    if a & b != a {
        return Err(Error::InvalidInput(String::from(
            "pair probability needs A ⊆ B",
        )));
    }
    let mut hits = 0u64;
    for trial in lo..hi {
        let mut rng: Prng = rng_for_trial(seed, trial);
        let perm = random_permutation(gp.n, &mut rng);
        // A ∈ π(G) iff π⁻¹(A) ∈ G
        let mut inv = vec![0usize; gp.n];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let unmap = |m: Mask| -> Mask {
            let mut out: Mask = 0;
            for (i, &p) in inv.iter().enumerate() {
                if m & (1 << i) != 0 {
                    out |= 1 << p;
                }
            }
            out
        };
        let (ga, _) = gp.locate(unmap(a))?;
        let (gb, _) = gp.locate(unmap(b))?;
        if ga == gb {
            hits += 1;
        }
    }
    Ok(hits)
}

/// Monte-Carlo frequency that `a` and `b` land in the same grid of the
/// permuted partition.
pub fn estimate_grid_pair_probability(
    gp: &GridPartition,
    a: Mask,
    b: Mask,
    trials: u64,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Range("trials must be >= 1"));
    }
    let hits = same_grid_hits(gp, a, b, 0, trials, seed)?;
    Ok(hits as f64 / trials as f64)
}

/// DOT rendering of a partition: one cluster per grid, chains as paths.
pub fn partition_to_dot(gp: &GridPartition) -> String {
    let mut out = String::from("digraph grid_partition {\n  rankdir=BT;\n");
    for g in 0..gp.grid_count() {
        out.push_str(&format!(
            "  subgraph cluster_{} {{\n    label=\"G{}\";\n",
            g, g
        ));
        let members = gp.grid_members(g);
        for &m in &members {
            out.push_str(&format!(
                "    \"{:#x}\" [label=\"{}\"];\n",
                m,
                mask_label(m, gp.n)
            ));
        }
        // cover edges inside the grid
        for &x in &members {
            for &y in &members {
                if x != y && x & y == x && popcount(y) == popcount(x) + 1 {
                    out.push_str(&format!("    \"{:#x}\" -> \"{:#x}\";\n", x, y));
                }
            }
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

fn mask_label(m: Mask, n: usize) -> String {
    if m == 0 {
        return String::from("{}");
    }
    let elems: Vec<String> = (0..n)
        .filter(|&i| m & (1 << i) != 0)
        .map(|i| (i + 1).to_string())
        .collect();
    format!("{{{}}}", elems.join(","))
}
