//! Exact desk-scale solvers.
//!
//! A single branch-and-bound engine drives `la_star`, `ex_star` and
//! `ex_star_gapped`: elements are decided in a pinned size-then-lex order
//! (include branch first), a copy of the forbidden pattern completed by the
//! newest element kills the include branch, and `chosen + addable <= best`
//! prunes, where `addable` is the undecided count or, for chain patterns,
//! the symmetric-chain-decomposition bound. A greedy middle-out pass seeds
//! the incumbent so pruning bites early. `forb_star_count` reuses the
//! completion test to count the leaves of the same decision tree.
//!
//! Runs are deterministic. The optional budget counts search nodes, not
//! seconds; an exhausted budget yields the best value so far, flagged as a
//! lower bound.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::embedding::{GridFamily, HostPoset};
use crate::error::{Error, Result};
use crate::lattice::{popcount, Mask, SetFamily};
use crate::poset::Poset;

/// Default `n` guard for `la_star`.
pub const LA_STAR_GUARD: usize = 5;
/// `la_star` guard when the pattern is a chain (the symmetric-chain bound
/// keeps the search shallow).
pub const LA_STAR_GUARD_CHAIN: usize = 10;
/// `forb_star_count` is unconditional to here ...
pub const FORB_GUARD_UNCONDITIONAL: usize = 4;
/// ... and needs a budget beyond it.
pub const FORB_GUARD_MAX: usize = 5;
/// Grid solvers are exact and unguarded below this many points.
pub const EX_STAR_UNCONDITIONAL: u64 = 25;
/// Hard cap on grid search space.
pub const EX_STAR_GUARD: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub value: u64,
    /// Host indices of an optimal (or best-found) family, in search order.
    pub witness: Vec<usize>,
    /// False when the node budget ran out; `value` is then a lower bound.
    pub exact: bool,
    pub nodes: u64,
}

struct Engine<'a, H: HostPoset> {
    host: &'a H,
    pattern: &'a Poset,
    pattern_order: Vec<usize>,
    /// Forbid only copies with at least this gap (None = every copy).
    gap_at_least: Option<u64>,
    order: Vec<usize>,
    budget: Option<u64>,
    nodes: u64,
    exhausted: bool,
    best: Vec<usize>,
    chosen: Vec<usize>,
    chain_bound: Option<ChainBound>,
}

/// Upper bound on additions for chain patterns: a `C_k`-free family meets
/// every chain of a chain decomposition in at most `k - 1` elements, so
/// the undecided suffix can contribute at most
/// `min(k - 1 - taken_in_chain, remaining_in_chain)` per chain. With the
/// symmetric chain decomposition this closes level-union optima at the
/// root.
struct ChainBound {
    cap: usize,
    chain_of: Vec<usize>,
    /// `suffix[idx][c]`: elements of chain `c` among `order[idx..]`.
    suffix: Vec<Vec<u16>>,
    taken: Vec<u16>,
}

impl ChainBound {
    fn build(order: &[usize], chain_of: Vec<usize>, chain_count: usize, cap: usize) -> ChainBound {
        let mut suffix = vec![vec![0u16; chain_count]; order.len() + 1];
        for idx in (0..order.len()).rev() {
            suffix[idx] = suffix[idx + 1].clone();
            suffix[idx][chain_of[order[idx]]] += 1;
        }
        ChainBound {
            cap,
            chain_of,
            suffix,
            taken: vec![0; chain_count],
        }
    }

    fn addable(&self, idx: usize) -> usize {
        self.suffix[idx]
            .iter()
            .zip(&self.taken)
            .map(|(&remaining, &taken)| {
                (self.cap.saturating_sub(taken as usize)).min(remaining as usize)
            })
            .sum()
    }
}

impl<'a, H: HostPoset> Engine<'a, H> {
    fn new(
        host: &'a H,
        pattern: &'a Poset,
        gap_at_least: Option<u64>,
        order: Vec<usize>,
        budget: Option<u64>,
    ) -> Self {
        Engine {
            host,
            pattern,
            pattern_order: pattern.linear_extension(),
            gap_at_least,
            order,
            budget,
            nodes: 0,
            exhausted: false,
            best: Vec::new(),
            chosen: Vec::new(),
            chain_bound: None,
        }
    }

    fn with_chain_bound(mut self, bound: Option<ChainBound>) -> Self {
        self.chain_bound = bound;
        self
    }

    fn potential(&self, idx: usize) -> usize {
        match &self.chain_bound {
            Some(bound) => self.chosen.len() + bound.addable(idx),
            None => self.chosen.len() + (self.order.len() - idx),
        }
    }

    /// Does `chosen + newcomer` contain a forbidden copy through `newcomer`?
    fn completes_copy(&self, newcomer: usize) -> bool {
        let k = self.pattern.len();
        if k == 0 {
            return false;
        }
        if k == 1 {
            return self.gap_at_least.unwrap_or(0) == 0;
        }
        let mut images = vec![usize::MAX; k];
        // the newcomer must participate; try it at every pattern position
        for slot in 0..k {
            if self.assign(0, slot, newcomer, &mut images) {
                return true;
            }
        }
        false
    }

    fn assign(&self, pos: usize, slot: usize, newcomer: usize, images: &mut [usize]) -> bool {
        let k = self.pattern.len();
        if pos == k {
            if let Some(t) = self.gap_at_least {
                return self.host.gap(images) >= t;
            }
            return true;
        }
        let p = self.pattern_order[pos];
        let try_candidate = |cand: usize, images: &mut [usize]| -> bool {
            if images[..].contains(&cand) {
                return false;
            }
            for &q in &self.pattern_order[..pos] {
                let img = images[q];
                if self.pattern.lt(p, q) != self.host.lt(cand, img)
                    || self.pattern.lt(q, p) != self.host.lt(img, cand)
                {
                    return false;
                }
            }
            images[p] = cand;
            if self.assign(pos + 1, slot, newcomer, images) {
                return true;
            }
            images[p] = usize::MAX;
            false
        };
        if p == self.pattern_order[slot] {
            return try_candidate(newcomer, images);
        }
        for &cand in &self.chosen {
            if try_candidate(cand, images) {
                return true;
            }
        }
        false
    }

    fn greedy_seed(&mut self, preference: &[usize]) {
        for &e in preference {
            self.nodes += 1;
            if !self.completes_copy(e) {
                self.chosen.push(e);
            }
        }
        self.best = self.chosen.clone();
        self.chosen.clear();
    }

    fn dfs(&mut self, idx: usize) {
        if self.exhausted {
            return;
        }
        if let Some(b) = self.budget {
            if self.nodes >= b {
                self.exhausted = true;
                return;
            }
        }
        self.nodes += 1;
        if self.potential(idx) <= self.best.len() {
            return;
        }
        if idx == self.order.len() {
            self.best = self.chosen.clone();
            return;
        }
        let e = self.order[idx];
        if !self.completes_copy(e) {
            self.chosen.push(e);
            if let Some(bound) = &mut self.chain_bound {
                bound.taken[bound.chain_of[e]] += 1;
            }
            self.dfs(idx + 1);
            if let Some(bound) = &mut self.chain_bound {
                bound.taken[bound.chain_of[e]] -= 1;
            }
            self.chosen.pop();
        }
        self.dfs(idx + 1);
    }

    fn solve(mut self, preference: &[usize]) -> Solution {
        self.greedy_seed(preference);
        self.dfs(0);
        let mut witness = self.best;
        witness.sort_by_key(|&i| self.order.iter().position(|&o| o == i));
        Solution {
            value: witness.len() as u64,
            witness,
            exact: !self.exhausted,
            nodes: self.nodes,
        }
    }
}

fn lattice_order(host: &SetFamily) -> Vec<usize> {
    let mut order: Vec<usize> = (0..host.len()).collect();
    order.sort_by_key(|&i| (popcount(host.member(i)), host.member(i)));
    order
}

fn lattice_middle_out(host: &SetFamily) -> Vec<usize> {
    let n2 = host.ground_size() as i64;
    let mut order: Vec<usize> = (0..host.len()).collect();
    order.sort_by_key(|&i| {
        let m = host.member(i);
        ((2 * popcount(m) as i64 - n2).abs(), popcount(m), m)
    });
    order
}

fn grid_order(host: &GridFamily) -> Vec<usize> {
    let mut order: Vec<usize> = (0..host.len()).collect();
    order.sort_by_key(|&i| {
        let p = host.point(i);
        (p.iter().map(|&c| c as u64).sum::<u64>(), p.to_vec())
    });
    order
}

fn grid_middle_out(host: &GridFamily) -> Vec<usize> {
    let mid: i64 = host.sides().iter().map(|&k| (k + 1) as i64).sum::<i64>();
    let mut order: Vec<usize> = (0..host.len()).collect();
    order.sort_by_key(|&i| {
        let p = host.point(i);
        let s: i64 = p.iter().map(|&c| c as i64).sum();
        ((2 * s - mid).abs(), s, p.to_vec())
    });
    order
}

fn la_guard_for(pattern: &Poset) -> usize {
    if pattern.width() == 1 {
        LA_STAR_GUARD_CHAIN
    } else {
        LA_STAR_GUARD
    }
}

/// `La*(n, P)`: the largest induced-`P`-free subfamily of `2^[n]`, with a
/// witness. `guard_override` raises or lowers the default `n` guard.
pub fn la_star(
    n: usize,
    pattern: &Poset,
    budget: Option<u64>,
    guard_override: Option<usize>,
) -> Result<(Solution, SetFamily)> {
    let guard = guard_override.unwrap_or_else(|| la_guard_for(pattern));
    if n > guard {
        return Err(Error::SizeGuard {
            what: "la_star",
            limit: guard,
            got: n,
        });
    }
    let host = SetFamily::full_lattice(n)?;
    let order = lattice_order(&host);
    let pref = lattice_middle_out(&host);
    let bound = chain_bound_for(&host, &order, pattern)?;
    let sol = Engine::new(&host, pattern, None, order, budget)
        .with_chain_bound(bound)
        .solve(&pref);
    let witness = witness_family(&host, &sol);
    Ok((sol, witness))
}

/// Symmetric-chain pruning data when the pattern is a chain.
fn chain_bound_for(
    host: &SetFamily,
    order: &[usize],
    pattern: &Poset,
) -> crate::error::Result<Option<ChainBound>> {
    if pattern.width() != 1 || pattern.is_empty() {
        return Ok(None);
    }
    let partition = crate::decomposition::scd(host.ground_size())?;
    let mut chain_of_mask = alloc::collections::BTreeMap::new();
    for (c, chain) in partition.chains.iter().enumerate() {
        for &m in chain {
            chain_of_mask.insert(m, c);
        }
    }
    let chain_of: Vec<usize> = (0..host.len())
        .map(|i| chain_of_mask[&host.member(i)])
        .collect();
    Ok(Some(ChainBound::build(
        order,
        chain_of,
        partition.chains.len(),
        pattern.len() - 1,
    )))
}

fn witness_family(host: &SetFamily, sol: &Solution) -> SetFamily {
    let mut masks: Vec<Mask> = sol.witness.iter().map(|&i| host.member(i)).collect();
    masks.sort_by_key(|&m| (popcount(m), m));
    SetFamily::new(host.ground_size(), masks).expect("witness members are distinct")
}

fn check_grid_size(sides: &[u32]) -> Result<u64> {
    let total: u64 = sides.iter().map(|&k| k as u64).product();
    if total > EX_STAR_GUARD {
        return Err(Error::SizeGuard {
            what: "ex_star grid",
            limit: EX_STAR_GUARD as usize,
            got: total as usize,
        });
    }
    Ok(total)
}

/// `ex*(k_1..k_d, P)`: the largest induced-`P`-free subfamily of the grid.
pub fn ex_star(
    sides: &[u32],
    pattern: &Poset,
    budget: Option<u64>,
) -> Result<(Solution, GridFamily)> {
    ex_star_gapped_inner(sides, pattern, None, budget)
}

/// `ex*_t`: largest subfamily containing no induced copy of `P` that is
/// `t`-gapped with respect to the full grid. Copies with smaller gap are
/// allowed.
pub fn ex_star_gapped(
    sides: &[u32],
    pattern: &Poset,
    t: u64,
    budget: Option<u64>,
) -> Result<(Solution, GridFamily)> {
    ex_star_gapped_inner(sides, pattern, Some(t), budget)
}

fn ex_star_gapped_inner(
    sides: &[u32],
    pattern: &Poset,
    t: Option<u64>,
    budget: Option<u64>,
) -> Result<(Solution, GridFamily)> {
    check_grid_size(sides)?;
    let host = GridFamily::full_grid(sides.to_vec())?;
    let order = grid_order(&host);
    let pref = grid_middle_out(&host);
    let sol = Engine::new(&host, pattern, t, order, budget).solve(&pref);
    let mut points: Vec<Vec<u32>> = sol
        .witness
        .iter()
        .map(|&i| host.point(i).to_vec())
        .collect();
    points.sort();
    let witness = GridFamily::new(sides.to_vec(), points)?;
    Ok((sol, witness))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForbCount {
    pub count: BigUint,
    /// False when the node budget ran out; `count` is then a lower bound.
    pub exact: bool,
    pub nodes: u64,
}

/// `forb*(n, P)`: the number of induced-`P`-free subfamilies of `2^[n]`,
/// the empty family included. Depth-first over elements in size-then-lex
/// order; a branch dies the moment an inclusion completes a copy.
pub fn forb_star_count(n: usize, pattern: &Poset, budget: Option<u64>) -> Result<ForbCount> {
    if n > FORB_GUARD_MAX {
        return Err(Error::SizeGuard {
            what: "forb_star_count",
            limit: FORB_GUARD_MAX,
            got: n,
        });
    }
    if n > FORB_GUARD_UNCONDITIONAL && budget.is_none() {
        return Err(Error::SizeGuard {
            what: "forb_star_count without a budget",
            limit: FORB_GUARD_UNCONDITIONAL,
            got: n,
        });
    }
    let host = SetFamily::full_lattice(n)?;
    let order = lattice_order(&host);
    let mut engine = Engine::new(&host, pattern, None, order.clone(), budget);
    let mut count = BigUint::zero();
    forb_dfs(&mut engine, 0, &mut count);
    Ok(ForbCount {
        count,
        exact: !engine.exhausted,
        nodes: engine.nodes,
    })
}

fn forb_dfs<H: HostPoset>(engine: &mut Engine<'_, H>, idx: usize, count: &mut BigUint) {
    if engine.exhausted {
        return;
    }
    if let Some(b) = engine.budget {
        if engine.nodes >= b {
            engine.exhausted = true;
            return;
        }
    }
    engine.nodes += 1;
    if idx == engine.order.len() {
        *count += BigUint::one();
        return;
    }
    let e = engine.order[idx];
    if !engine.completes_copy(e) {
        engine.chosen.push(e);
        forb_dfs(engine, idx + 1, count);
        engine.chosen.pop();
    }
    forb_dfs(engine, idx + 1, count);
}

/// Visits every induced-`P`-free subfamily of `2^[n]` once (as member
/// masks); exhaustive-coverage oracle for the container tree.
pub fn for_each_free_family(
    n: usize,
    pattern: &Poset,
    visit: &mut dyn FnMut(&[Mask]),
) -> Result<()> {
    if n > FORB_GUARD_UNCONDITIONAL {
        return Err(Error::SizeGuard {
            what: "free-family enumeration",
            limit: FORB_GUARD_UNCONDITIONAL,
            got: n,
        });
    }
    let host = SetFamily::full_lattice(n)?;
    let order = lattice_order(&host);
    let mut engine = Engine::new(&host, pattern, None, order, None);
    fn rec<H: HostPoset>(
        engine: &mut Engine<'_, H>,
        idx: usize,
        masks: &mut Vec<Mask>,
        host: &SetFamily,
        visit: &mut dyn FnMut(&[Mask]),
    ) {
        if idx == engine.order.len() {
            visit(masks);
            return;
        }
        let e = engine.order[idx];
        if !engine.completes_copy(e) {
            engine.chosen.push(e);
            masks.push(host.member(e));
            rec(engine, idx + 1, masks, host, visit);
            masks.pop();
            engine.chosen.pop();
        }
        rec(engine, idx + 1, masks, host, visit);
    }
    let host2 = SetFamily::full_lattice(n)?;
    let mut masks = Vec::new();
    rec(&mut engine, 0, &mut masks, &host2, visit);
    Ok(())
}

/// What a cache line stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordKind {
    LaStar,
    ExStar,
    ExStarGapped,
    ForbStar,
}

impl RecordKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecordKind::LaStar => "la_star",
            RecordKind::ExStar => "ex_star",
            RecordKind::ExStarGapped => "ex_star_gapped",
            RecordKind::ForbStar => "forb_star",
        }
    }

    pub fn parse(s: &str) -> Option<RecordKind> {
        match s {
            "la_star" => Some(RecordKind::LaStar),
            "ex_star" => Some(RecordKind::ExStar),
            "ex_star_gapped" => Some(RecordKind::ExStarGapped),
            "forb_star" => Some(RecordKind::ForbStar),
            _ => None,
        }
    }
}

/// Witness payload: masks for lattice problems, points for grid problems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    None,
    Family(Vec<Mask>),
    Grid(Vec<Vec<u32>>),
}

/// One solved instance, as persisted by the cache. The codec is a
/// self-describing `key=value` line; round-trips are bit-exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtremalRecord {
    pub kind: RecordKind,
    pub poset_fingerprint: u64,
    pub n: Option<usize>,
    pub sides: Option<Vec<u32>>,
    pub t: Option<u64>,
    pub value: BigUint,
    pub exact: bool,
    pub witness: Witness,
    pub timestamp: u64,
    pub solver_version: u32,
}

pub const SOLVER_VERSION: u32 = 1;

impl ExtremalRecord {
    pub fn to_line(&self) -> String {
        let mut s = String::new();
        s.push_str("kind=");
        s.push_str(self.kind.as_str());
        s.push_str(&format!(" poset={:016x}", self.poset_fingerprint));
        if let Some(n) = self.n {
            s.push_str(&format!(" n={}", n));
        }
        if let Some(sides) = &self.sides {
            let parts: Vec<String> = sides.iter().map(|k| k.to_string()).collect();
            s.push_str(&format!(" sides={}", parts.join(",")));
        }
        if let Some(t) = self.t {
            s.push_str(&format!(" t={}", t));
        }
        s.push_str(&format!(" value={}", self.value));
        s.push_str(&format!(" exact={}", if self.exact { 1 } else { 0 }));
        match &self.witness {
            Witness::None => {}
            Witness::Family(masks) => {
                let parts: Vec<String> = masks.iter().map(|m| format!("{:x}", m)).collect();
                s.push_str(&format!(" witness={}", parts.join(",")));
            }
            Witness::Grid(points) => {
                let parts: Vec<String> = points
                    .iter()
                    .map(|p| {
                        p.iter()
                            .map(|c| c.to_string())
                            .collect::<Vec<_>>()
                            .join(".")
                    })
                    .collect();
                s.push_str(&format!(" gridwitness={}", parts.join(",")));
            }
        }
        s.push_str(&format!(
            " ts={} version={}",
            self.timestamp, self.solver_version
        ));
        s
    }

    pub fn from_line(line_no: usize, line: &str) -> Result<ExtremalRecord> {
        let corrupt = |msg: &str| Error::CorruptRecord {
            line: line_no,
            msg: String::from(msg),
        };
        let mut kind = None;
        let mut poset = None;
        let mut n = None;
        let mut sides = None;
        let mut t = None;
        let mut value = None;
        let mut exact = None;
        let mut witness = Witness::None;
        let mut ts = None;
        let mut version = None;
        for field in line.split_whitespace() {
            let (key, val) = field
                .split_once('=')
                .ok_or_else(|| corrupt("field without '='"))?;
            match key {
                "kind" => kind = RecordKind::parse(val),
                "poset" => {
                    poset =
                        Some(u64::from_str_radix(val, 16).map_err(|_| corrupt("bad poset hash"))?)
                }
                "n" => n = Some(val.parse().map_err(|_| corrupt("bad n"))?),
                "sides" => {
                    let parsed: core::result::Result<Vec<u32>, _> =
                        val.split(',').map(|p| p.parse()).collect();
                    sides = Some(parsed.map_err(|_| corrupt("bad sides"))?);
                }
                "t" => t = Some(val.parse().map_err(|_| corrupt("bad t"))?),
                "value" => value = Some(val.parse::<BigUint>().map_err(|_| corrupt("bad value"))?),
                "exact" => exact = Some(val == "1"),
                "witness" => {
                    let parsed: core::result::Result<Vec<Mask>, _> = val
                        .split(',')
                        .map(|p| Mask::from_str_radix(p, 16))
                        .collect();
                    witness = Witness::Family(parsed.map_err(|_| corrupt("bad witness"))?);
                }
                "gridwitness" => {
                    let mut points = Vec::new();
                    for part in val.split(',') {
                        let coords: core::result::Result<Vec<u32>, _> =
                            part.split('.').map(|c| c.parse()).collect();
                        points.push(coords.map_err(|_| corrupt("bad grid witness"))?);
                    }
                    witness = Witness::Grid(points);
                }
                "ts" => ts = Some(val.parse().map_err(|_| corrupt("bad ts"))?),
                "version" => version = Some(val.parse().map_err(|_| corrupt("bad version"))?),
                _ => return Err(corrupt("unknown field")),
            }
        }
        Ok(ExtremalRecord {
            kind: kind.ok_or_else(|| corrupt("missing kind"))?,
            poset_fingerprint: poset.ok_or_else(|| corrupt("missing poset"))?,
            n,
            sides,
            t,
            value: value.ok_or_else(|| corrupt("missing value"))?,
            exact: exact.unwrap_or(true),
            witness,
            timestamp: ts.unwrap_or(0),
            solver_version: version.unwrap_or(SOLVER_VERSION),
        })
    }

    /// Re-verifies a stored witness against the pattern it claims to avoid:
    /// the family must be copy-free and of the recorded size (exact records
    /// only).
    pub fn verify_witness(&self, pattern: &Poset) -> Result<()> {
        let bad = |msg: String| Error::CorruptRecord { line: 0, msg };
        match &self.witness {
            Witness::None => Ok(()),
            Witness::Family(masks) => {
                let n = self
                    .n
                    .ok_or_else(|| bad("family witness without n".into()))?;
                let fam = SetFamily::new(n, masks.clone())
                    .map_err(|e| bad(format!("witness not a family: {}", e)))?;
                if BigUint::from(fam.len()) != self.value && self.exact {
                    return Err(bad("witness size differs from value".into()));
                }
                let forbidden = match self.kind {
                    RecordKind::LaStar | RecordKind::ForbStar => {
                        crate::embedding::embeds_into(pattern, &fam)
                    }
                    _ => return Err(bad("family witness on a grid record".into())),
                };
                if forbidden {
                    return Err(bad("witness contains a forbidden copy".into()));
                }
                Ok(())
            }
            Witness::Grid(points) => {
                let sides = self
                    .sides
                    .clone()
                    .ok_or_else(|| bad("grid witness without sides".into()))?;
                let fam = GridFamily::new(sides, points.clone())
                    .map_err(|e| bad(format!("witness not a grid family: {}", e)))?;
                if BigUint::from(fam.len()) != self.value && self.exact {
                    return Err(bad("witness size differs from value".into()));
                }
                let has_copy = match self.kind {
                    RecordKind::ExStar => crate::embedding::embeds_into(pattern, &fam),
                    RecordKind::ExStarGapped => {
                        let t = self
                            .t
                            .ok_or_else(|| bad("gapped record without t".into()))?;
                        crate::embedding::find_induced_copies(pattern, &fam, None)
                            .iter()
                            .any(|c| crate::embedding::is_t_gapped(&fam, c, t))
                    }
                    _ => return Err(bad("grid witness on a lattice record".into())),
                };
                if has_copy {
                    return Err(bad("witness contains a forbidden copy".into()));
                }
                Ok(())
            }
        }
    }
}
