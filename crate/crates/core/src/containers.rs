//! Hypergraph containers at desk scale.
//!
//! The fingerprint process is the max-degree scythe: query the highest
//! degree available vertex (lowest index on ties); a queried vertex of the
//! independent set joins the fingerprint and shrinks its edges, a queried
//! outsider is discarded with its edges, and an edge shrunk to a singleton
//! expels its last vertex. The trajectory is replayable from the
//! fingerprint alone, which is what makes `f` a function of `g(I)` and
//! gives the consistency property.
//!
//! The certificate invariants are verified — exhaustively over all
//! independent sets for small vertex counts, by sampling otherwise. The
//! numeric side conditions of the container theorem are feasibility flags,
//! not gates: the algorithm runs and the contract is checked either way.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{binomial, popcount, Mask, SetFamily};
use crate::poset::Poset;
use crate::rng::{rng_for_trial, Prng};
use crate::supersat::{greedy_balanced_collection, SupersatParams, ThresholdPolicy};
use rand::Rng;

/// Vertex-count guard (independent sets are tracked as u64 masks).
pub const VERTEX_GUARD: usize = 64;
/// Exhaustive certificate verification below this; sampling above.
pub const EXHAUSTIVE_VERIFY_GUARD: usize = 20;
/// Cap on enumerated containers per hypergraph.
pub const CONTAINER_LEAF_BUDGET: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    v: usize,
    r: usize,
    edges: Vec<Vec<u32>>,
}

impl Hypergraph {
    /// `r`-uniform, duplicate-free; vertex ids below `v`.
    pub fn new(v: usize, r: usize, edges: Vec<Vec<u32>>) -> Result<Hypergraph> {
        if v > VERTEX_GUARD {
            return Err(Error::SizeGuard {
                what: "hypergraph vertices",
                limit: VERTEX_GUARD,
                got: v,
            });
        }
        if r == 0 {
            return Err(Error::Range("uniformity must be >= 1"));
        }
        let mut normalized: Vec<Vec<u32>> = Vec::with_capacity(edges.len());
        for e in edges {
            let mut e = e;
            e.sort_unstable();
            e.dedup();
            if e.len() != r {
                return Err(Error::InvalidInput(String::from(
                    "edge is not r-uniform (after deduplication)",
                )));
            }
            if e.iter().any(|&x| x as usize >= v) {
                return Err(Error::InvalidInput(String::from(
                    "edge vertex out of range",
                )));
            }
            normalized.push(e);
        }
        normalized.sort();
        normalized.dedup();
        Ok(Hypergraph {
            v,
            r,
            edges: normalized,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.v
    }

    pub fn uniformity(&self) -> usize {
        self.r
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<u32>] {
        &self.edges
    }

    pub fn is_independent(&self, set: u64) -> bool {
        self.edges
            .iter()
            .all(|e| !e.iter().all(|&x| set & (1 << x) != 0))
    }

    /// Calls `visit` once per independent set (as a vertex mask).
    pub fn for_each_independent_set(&self, visit: &mut dyn FnMut(u64)) -> Result<()> {
        if self.v > EXHAUSTIVE_VERIFY_GUARD {
            return Err(Error::SizeGuard {
                what: "independent-set enumeration",
                limit: EXHAUSTIVE_VERIFY_GUARD,
                got: self.v,
            });
        }
        // DFS with per-edge inclusion counts
        let mut touching: Vec<Vec<usize>> = vec![Vec::new(); self.v];
        for (ei, e) in self.edges.iter().enumerate() {
            for &x in e {
                touching[x as usize].push(ei);
            }
        }
        let mut counts = vec![0usize; self.edges.len()];
        fn rec(
            h: &Hypergraph,
            touching: &[Vec<usize>],
            counts: &mut [usize],
            vertex: usize,
            set: u64,
            visit: &mut dyn FnMut(u64),
        ) {
            if vertex == h.v {
                visit(set);
                return;
            }
            // exclude
            rec(h, touching, counts, vertex + 1, set, visit);
            // include, unless it completes an edge
            if touching[vertex]
                .iter()
                .all(|&ei| counts[ei] + 1 < h.edges[ei].len())
                || touching[vertex].is_empty()
            {
                for &ei in &touching[vertex] {
                    counts[ei] += 1;
                }
                rec(h, touching, counts, vertex + 1, set | (1 << vertex), visit);
                for &ei in &touching[vertex] {
                    counts[ei] -= 1;
                }
            }
        }
        rec(self, &touching, &mut counts, 0, 0, visit);
        Ok(())
    }

    /// A random maximal-ish independent set (greedy over a shuffled order).
    pub fn random_independent_set(&self, rng: &mut Prng) -> u64 {
        let order = crate::rng::random_permutation(self.v, rng);
        let mut set: u64 = 0;
        for &x in &order {
            let candidate = set | (1 << x);
            if self.is_independent(candidate) && rng.gen_range(0..4u8) != 0 {
                set = candidate;
            }
        }
        set
    }
}

/// `Δ_s`: the largest number of edges sharing a fixed `s`-subset.
pub fn max_degree(h: &Hypergraph, s: usize) -> Result<u64> {
    if s < 1 || s > h.r {
        return Err(Error::Range("max_degree needs 1 <= s <= r"));
    }
    let mut counts: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    for e in &h.edges {
        // all s-subsets of the edge
        let m = e.len();
        for mask in 1u32..(1 << m) {
            if popcount(mask) as usize != s {
                continue;
            }
            let subset: Vec<u32> = (0..m)
                .filter(|&i| mask & (1 << i) != 0)
                .map(|i| e[i])
                .collect();
            *counts.entry(subset).or_insert(0) += 1;
        }
    }
    Ok(counts.values().copied().max().unwrap_or(0))
}

/// The scythe state. Degrees count alive edges through remaining vertices.
struct Scythe<'a> {
    h: &'a Hypergraph,
    avail: Vec<bool>,
    alive: Vec<bool>,
    rem: Vec<Vec<u32>>,
    deg: Vec<u64>,
    fingerprint: Vec<u32>,
    cap: usize,
}

impl<'a> Scythe<'a> {
    fn new(h: &'a Hypergraph, cap: usize) -> Scythe<'a> {
        let mut deg = vec![0u64; h.v];
        for e in &h.edges {
            for &x in e {
                deg[x as usize] += 1;
            }
        }
        let mut s = Scythe {
            h,
            avail: vec![true; h.v],
            alive: vec![true; h.edges.len()],
            rem: h.edges.clone(),
            deg,
            fingerprint: Vec::new(),
            cap,
        };
        // a singleton edge bars its vertex from every independent set
        for ei in 0..s.rem.len() {
            if s.alive[ei] && s.rem[ei].len() == 1 {
                let w = s.rem[ei][0] as usize;
                if s.avail[w] {
                    s.avail[w] = false;
                    s.kill_edges_through(w);
                }
            }
        }
        s
    }

    fn select(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for x in 0..self.h.v {
            if self.avail[x] && self.deg[x] >= 1 {
                best = match best {
                    None => Some(x),
                    Some(b) if self.deg[x] > self.deg[b] => Some(x),
                    other => other,
                };
            }
        }
        best
    }

    fn kill_edges_through(&mut self, x: usize) {
        for ei in 0..self.rem.len() {
            if self.alive[ei] && self.rem[ei].contains(&(x as u32)) {
                self.alive[ei] = false;
                for &y in &self.rem[ei] {
                    self.deg[y as usize] -= 1;
                }
            }
        }
    }

    fn take_in(&mut self, u: usize) {
        self.fingerprint.push(u as u32);
        self.avail[u] = false;
        let mut exposed: Vec<usize> = Vec::new();
        for ei in 0..self.rem.len() {
            if self.alive[ei] {
                if let Some(pos) = self.rem[ei].iter().position(|&y| y == u as u32) {
                    self.rem[ei].swap_remove(pos);
                    self.deg[u] -= 1;
                    if self.rem[ei].len() == 1 {
                        exposed.push(self.rem[ei][0] as usize);
                    }
                    debug_assert!(
                        !self.rem[ei].is_empty(),
                        "edge completed inside a fingerprint"
                    );
                }
            }
        }
        for w in exposed {
            if self.avail[w] {
                self.avail[w] = false;
                self.kill_edges_through(w);
            }
        }
    }

    fn take_out(&mut self, u: usize) {
        self.avail[u] = false;
        self.kill_edges_through(u);
    }

    /// Runs the process with a membership oracle; returns the fingerprint
    /// and the final available set.
    fn run(mut self, member: &dyn Fn(usize) -> bool) -> (Vec<u32>, Vec<u32>) {
        while self.fingerprint.len() < self.cap {
            let Some(u) = self.select() else { break };
            if member(u) {
                self.take_in(u);
            } else {
                self.take_out(u);
            }
        }
        let f: Vec<u32> = (0..self.h.v)
            .filter(|&x| self.avail[x])
            .map(|x| x as u32)
            .collect();
        (self.fingerprint, f)
    }
}

/// `g(I)`: the fingerprint of an independent set (vertex mask).
pub fn fingerprint(h: &Hypergraph, independent: u64, cap: usize) -> Vec<u32> {
    let (g, _) = Scythe::new(h, cap).run(&|x| independent & (1 << x) != 0);
    g
}

/// Replays the process from a fingerprint alone; returns `(g, f)`. On a
/// fingerprint produced by [`fingerprint`], the replayed `g` is identical.
pub fn replay(h: &Hypergraph, g: &[u32], cap: usize) -> (Vec<u32>, Vec<u32>) {
    let set: u64 = g.iter().fold(0u64, |acc, &x| acc | (1 << x));
    Scythe::new(h, cap).run(&|x| set & (1 << x) != 0)
}

/// One container: fingerprint and extension; the container is `g ∪ f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContainerEntry {
    pub g: Vec<u32>,
    pub f: Vec<u32>,
}

impl ContainerEntry {
    pub fn g_mask(&self) -> u64 {
        self.g.iter().fold(0u64, |acc, &x| acc | (1 << x))
    }

    pub fn f_mask(&self) -> u64 {
        self.f.iter().fold(0u64, |acc, &x| acc | (1 << x))
    }

    pub fn container_mask(&self) -> u64 {
        self.g_mask() | self.f_mask()
    }
}

/// Enumerates every reachable `(g, f)` pair by branching the membership
/// decision at each step. Every branch is realized by an independent set
/// (the fingerprint itself), so this is exactly the container family.
pub fn enumerate_containers(h: &Hypergraph, cap: usize) -> Result<Vec<ContainerEntry>> {
    let mut out: Vec<ContainerEntry> = Vec::new();
    let mut stack: Vec<Scythe<'_>> = Vec::new();
    stack.push(Scythe::new(h, cap));
    while let Some(state) = stack.pop() {
        if out.len() + stack.len() > CONTAINER_LEAF_BUDGET {
            return Err(Error::SizeGuard {
                what: "container enumeration",
                limit: CONTAINER_LEAF_BUDGET,
                got: out.len() + stack.len(),
            });
        }
        if state.fingerprint.len() >= state.cap {
            out.push(entry_of(h, state));
            continue;
        }
        let Some(u) = state.select() else {
            out.push(entry_of(h, state));
            continue;
        };
        let mut in_branch = clone_scythe(h, &state);
        in_branch.take_in(u);
        let mut out_branch = state;
        out_branch.take_out(u);
        stack.push(out_branch);
        stack.push(in_branch);
    }
    out.sort_by(|a, b| a.g.cmp(&b.g));
    out.dedup();
    Ok(out)
}

fn entry_of(h: &Hypergraph, s: Scythe<'_>) -> ContainerEntry {
    let f: Vec<u32> = (0..h.v).filter(|&x| s.avail[x]).map(|x| x as u32).collect();
    ContainerEntry {
        g: s.fingerprint,
        f,
    }
}

fn clone_scythe<'a>(h: &'a Hypergraph, s: &Scythe<'a>) -> Scythe<'a> {
    Scythe {
        h,
        avail: s.avail.clone(),
        alive: s.alive.clone(),
        rem: s.rem.clone(),
        deg: s.deg.clone(),
        fingerprint: s.fingerprint.clone(),
        cap: s.cap,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityFlags {
    /// `τ v >= 10^8 r^6 A`
    pub tau_condition: bool,
    /// `Δ_s <= A (τ / 10^6 r^5)^(s-1) e/v` for each `s` in `2..=r`.
    pub degree_conditions: Vec<(usize, bool)>,
    /// `δ = (10^3 r^4 A)^{-1}`.
    pub delta: f64,
    /// Entries with `|f(g)| > (1 − δ) v`.
    pub shrink_violations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMode {
    Exhaustive,
    Sampled { count: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationSummary {
    pub mode: VerifyMode,
    pub independent_sets_checked: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContainerCertificate {
    pub entries: Vec<ContainerEntry>,
    pub cap: usize,
    pub tau: f64,
    pub a_param: f64,
    pub flags: FeasibilityFlags,
    pub verification: VerificationSummary,
}

impl ContainerCertificate {
    pub fn lookup(&self, g: &[u32]) -> Option<&ContainerEntry> {
        self.entries
            .binary_search_by(|e| e.g.as_slice().cmp(g))
            .ok()
            .map(|i| &self.entries[i])
    }
}

/// Builds the container family for `h` and verifies the certificate
/// invariants: `g(I) ⊆ I ⊆ g(I) ∪ f(g(I))`, `|g(I)| <= τ v`, and the
/// fingerprint-consistency condition. Verification is exhaustive for
/// `v <= 20` (or sampled when a mode is forced); any violation is an
/// error. Infeasible numeric parameters only set flags.
pub fn build_containers(
    h: &Hypergraph,
    tau: f64,
    a_param: f64,
    mode: Option<VerifyMode>,
) -> Result<ContainerCertificate> {
    if h.edge_count() == 0 {
        return Err(Error::InvalidInput(String::from(
            "container lemma needs a nonempty hypergraph",
        )));
    }
    if !tau.is_finite() || tau <= 0.0 || !a_param.is_finite() || a_param <= 0.0 {
        return Err(Error::Range("tau and A must be positive"));
    }
    let v = h.vertex_count();
    let r = h.uniformity();
    let cap = libm::floor(tau * v as f64) as usize;
    let entries = enumerate_containers(h, cap)?;

    // feasibility flags, read off the theorem's side conditions
    let tau_condition = tau * v as f64 >= 1e8 * libm::pow(r as f64, 6.0) * a_param;
    let mut degree_conditions = Vec::new();
    for s in 2..=r {
        let lhs = max_degree(h, s)? as f64;
        let rhs = a_param
            * libm::pow(tau / (1e6 * libm::pow(r as f64, 5.0)), (s - 1) as f64)
            * h.edge_count() as f64
            / v as f64;
        degree_conditions.push((s, lhs <= rhs));
    }
    let delta = 1.0 / (1e3 * libm::pow(r as f64, 4.0) * a_param);
    let shrink_violations = entries
        .iter()
        .filter(|e| e.f.len() as f64 > (1.0 - delta) * v as f64)
        .count();

    let mode = mode.unwrap_or(if v <= EXHAUSTIVE_VERIFY_GUARD {
        VerifyMode::Exhaustive
    } else {
        VerifyMode::Sampled {
            count: 2000,
            seed: 0,
        }
    });
    let cert = ContainerCertificate {
        entries,
        cap,
        tau,
        a_param,
        flags: FeasibilityFlags {
            tau_condition,
            degree_conditions,
            delta,
            shrink_violations,
        },
        verification: VerificationSummary {
            mode,
            independent_sets_checked: 0,
        },
    };
    let checked = verify_certificate(h, &cert, mode)?;
    Ok(ContainerCertificate {
        verification: VerificationSummary {
            mode,
            independent_sets_checked: checked,
        },
        ..cert
    })
}

/// Checks the three certificate invariants over independent sets; returns
/// how many sets were checked. Errors on the first violation.
pub fn verify_certificate(
    h: &Hypergraph,
    cert: &ContainerCertificate,
    mode: VerifyMode,
) -> Result<u64> {
    let mut sets: Vec<u64> = Vec::new();
    match mode {
        VerifyMode::Exhaustive => {
            h.for_each_independent_set(&mut |s| sets.push(s))?;
        }
        VerifyMode::Sampled { count, seed } => {
            for i in 0..count {
                let mut rng = rng_for_trial(seed, i);
                sets.push(h.random_independent_set(&mut rng));
            }
            sets.sort_unstable();
            sets.dedup();
        }
    }
    let mut class_of: BTreeMap<Vec<u32>, Vec<u64>> = BTreeMap::new();
    for &i_set in &sets {
        let g = fingerprint(h, i_set, cert.cap);
        let g_mask: u64 = g.iter().fold(0, |acc, &x| acc | (1 << x));
        if g_mask & !i_set != 0 {
            return Err(Error::Verification(format!(
                "fingerprint not inside the independent set {:#x}",
                i_set
            )));
        }
        if g.len() > cert.cap {
            return Err(Error::Verification(String::from("fingerprint exceeds cap")));
        }
        let entry = cert.lookup(&g).ok_or_else(|| {
            Error::Verification(String::from(
                "fingerprint missing from the container family",
            ))
        })?;
        if i_set & !(entry.container_mask()) != 0 {
            return Err(Error::Verification(format!(
                "independent set {:#x} escapes its container",
                i_set
            )));
        }
        class_of.entry(g).or_default().push(i_set);
    }
    // consistency: g(I) ⊆ I' and g(I') ⊆ I forces g(I) = g(I')
    let classes: Vec<(u64, &Vec<u64>)> = class_of
        .iter()
        .map(|(g, is)| (g.iter().fold(0u64, |acc, &x| acc | (1 << x)), is))
        .collect();
    for (i, (g1, is1)) in classes.iter().enumerate() {
        for (j, (g2, is2)) in classes.iter().enumerate() {
            if i >= j {
                continue;
            }
            let r12 = is1.iter().any(|&s| g2 & !s == 0); // g2 ⊆ some I with g(I)=g1
            let r21 = is2.iter().any(|&s| g1 & !s == 0);
            if r12 && r21 {
                return Err(Error::Verification(format!(
                    "consistency violated between fingerprints {:#x} and {:#x}",
                    g1, g2
                )));
            }
        }
    }
    Ok(sets.len() as u64)
}

/// Node labels of the container tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeCase {
    /// `k` below the leaf threshold.
    Leaf,
    /// `k` at or above the large-family boundary (family trimmed first).
    Case2,
    /// In between: containers built on the whole family.
    Case3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafFlag {
    BelowThreshold,
    /// No copies were collected (the family may simply be pattern-free).
    NoCopies,
    DepthCap,
    /// A container failed to shrink the family; recursion would not
    /// terminate.
    NoShrink,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub family: Vec<Mask>,
    pub k: f64,
    pub case: NodeCase,
    pub children: Vec<usize>,
    pub flag: Option<LeafFlag>,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContainerTree {
    pub n: usize,
    pub nodes: Vec<TreeNode>,
}

impl ContainerTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| n.children.is_empty())
    }

    /// Is the family a subset of some leaf?
    pub fn covers(&self, family: &[Mask]) -> bool {
        self.leaves()
            .any(|leaf| family.iter().all(|m| leaf.family.contains(m)))
    }
}

/// Desk-scale thresholds and parameters of the container-tree process. The
/// alternative `k` boundaries of the asymptotic proof are configurable
/// here; `n0` feeds the default large-family boundary `sqrt(4n/n0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeParams {
    pub t: u64,
    pub c_p: f64,
    /// Case-1 threshold on `k` (leaf when below).
    pub k_leaf: f64,
    /// Case-2 boundary on `k`; `None` means `sqrt(4n / n0)`.
    pub k_big: Option<f64>,
    pub n0: f64,
    pub tau: f64,
    pub a_param: f64,
    pub depth_cap: usize,
}

impl TreeParams {
    pub fn new() -> TreeParams {
        TreeParams {
            t: 1,
            c_p: 1.0,
            k_leaf: 16.0,
            k_big: None,
            n0: 1.0,
            tau: 0.5,
            a_param: 1.0,
            depth_cap: 16,
        }
    }

    fn big_boundary(&self, n: usize) -> f64 {
        self.k_big
            .unwrap_or_else(|| libm::sqrt(4.0 * n as f64 / self.n0))
    }
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams::new()
    }
}

/// Guard for the container-tree host size.
pub const TREE_GUARD_GENERAL: usize = 5;
pub const TREE_GUARD_CHAIN2: usize = 6;

/// The container-tree process: starting from the full lattice, each node
/// with `k = |F| / (t C_P C(n, n/2))` above the leaf threshold grows
/// children `g ∪ f` from the containers of its copies-of-`P` hypergraph.
/// Every induced-`P`-free subfamily of a node is contained in one of its
/// children, so the leaves jointly cover all `P`-free families.
pub fn container_tree(n: usize, pattern: &Poset, params: &TreeParams) -> Result<ContainerTree> {
    let guard = if pattern.len() == 2 && pattern.height() == 2 {
        TREE_GUARD_CHAIN2
    } else {
        TREE_GUARD_GENERAL
    };
    if n > guard {
        return Err(Error::SizeGuard {
            what: "container_tree",
            limit: guard,
            got: n,
        });
    }
    let full = SetFamily::full_lattice(n)?;
    let denom = params.t as f64 * params.c_p * binomial(n, n / 2) as f64;
    let mut nodes: Vec<TreeNode> = Vec::new();
    nodes.push(TreeNode {
        family: full.members().to_vec(),
        k: full.len() as f64 / denom,
        case: NodeCase::Leaf,
        children: Vec::new(),
        flag: None,
        depth: 0,
    });
    let mut queue = vec![0usize];
    while let Some(ni) = queue.pop() {
        let (family, k, depth) = {
            let node = &nodes[ni];
            (node.family.clone(), node.k, node.depth)
        };
        if k < params.k_leaf {
            nodes[ni].flag = Some(LeafFlag::BelowThreshold);
            continue;
        }
        if depth >= params.depth_cap {
            nodes[ni].flag = Some(LeafFlag::DepthCap);
            continue;
        }
        let big = params.big_boundary(n);
        let (case, working): (NodeCase, Vec<Mask>) = if k >= big {
            let trim = (big * denom) as usize;
            (NodeCase::Case2, family[..trim.min(family.len())].to_vec())
        } else {
            (NodeCase::Case3, family.clone())
        };
        nodes[ni].case = case;

        let working_fam = SetFamily::new(n, working)?;
        let mut supersat = SupersatParams::new(pattern.len(), params.t);
        supersat.k = k;
        supersat.c_p = params.c_p;
        let mu_f = crate::embedding::mu(pattern)
            .ok()
            .and_then(|m| m.to_f64())
            .unwrap_or(0.0);
        let policy = ThresholdPolicy::Formula {
            k_p: supersat.k_p,
            k,
            alpha: supersat.alpha,
            t: params.t,
            mu: mu_f,
        };
        let (collection, _) =
            greedy_balanced_collection(&working_fam, pattern, &supersat, &policy)?;
        if collection.is_empty() {
            nodes[ni].flag = Some(LeafFlag::NoCopies);
            continue;
        }
        // hypergraph on the node family; edges are the collected copies
        let index_of: BTreeMap<Mask, u32> = family
            .iter()
            .enumerate()
            .map(|(i, &m)| (m, i as u32))
            .collect();
        let edges: Vec<Vec<u32>> = collection
            .copies()
            .iter()
            .map(|copy| copy.iter().map(|m| index_of[m]).collect())
            .collect();
        let h = Hypergraph::new(family.len(), pattern.len(), edges)?;
        let cap = libm::floor(params.tau * h.vertex_count() as f64) as usize;
        let containers = enumerate_containers(&h, cap)?;

        let mut child_families: Vec<Vec<Mask>> = Vec::new();
        for entry in &containers {
            let mask = entry.container_mask();
            let mut child: Vec<Mask> = (0..family.len())
                .filter(|&i| mask & (1 << i) != 0)
                .map(|i| family[i])
                .collect();
            child.sort_by_key(|&m| (popcount(m), m));
            if !child_families.contains(&child) {
                child_families.push(child);
            }
        }
        if child_families.iter().any(|c| c.len() == family.len()) {
            nodes[ni].flag = Some(LeafFlag::NoShrink);
            continue;
        }
        for child in child_families {
            let child_k = child.len() as f64 / denom;
            let idx = nodes.len();
            nodes.push(TreeNode {
                family: child,
                k: child_k,
                case: NodeCase::Leaf,
                children: Vec::new(),
                flag: None,
                depth: depth + 1,
            });
            nodes[ni].children.push(idx);
            queue.push(idx);
        }
    }
    Ok(ContainerTree { n, nodes })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForbCertificate {
    /// `Σ over leaves of 2^|leaf|`.
    pub upper_bound: BigUint,
    pub exact: BigUint,
    /// `upper / exact`, best-effort float.
    pub ratio: f64,
}

/// The union-bound certificate `forb* <= Σ 2^|leaf|` next to the exact
/// count.
pub fn forb_certificate(tree: &ContainerTree, exact: BigUint) -> ForbCertificate {
    let mut upper = BigUint::zero();
    for leaf in tree.leaves() {
        upper += BigUint::from(1u32) << leaf.family.len();
    }
    let ratio = match (upper.to_f64(), exact.to_f64()) {
        (Some(u), Some(e)) if e > 0.0 => u / e,
        _ => f64::NAN,
    };
    ForbCertificate {
        upper_bound: upper,
        exact,
        ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::find_induced_copies;
    use crate::poset::standard_poset;
    use crate::rng::rng_from_seed;
    use crate::solver;

    fn comparability_hypergraph(n: usize) -> Hypergraph {
        let fam = SetFamily::full_lattice(n).unwrap();
        let c2 = standard_poset("chain:2").unwrap();
        let edges: Vec<Vec<u32>> = find_induced_copies(&c2, &fam, None)
            .into_iter()
            .map(|c| c.images.iter().map(|&i| i as u32).collect())
            .collect();
        Hypergraph::new(fam.len(), 2, edges).unwrap()
    }

    #[test]
    fn hypergraph_validation() {
        assert!(Hypergraph::new(3, 2, vec![vec![0, 1, 2]]).is_err());
        assert!(Hypergraph::new(3, 2, vec![vec![0, 3]]).is_err());
        assert!(Hypergraph::new(3, 2, vec![vec![1, 1]]).is_err());
        let h = Hypergraph::new(3, 2, vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(h.edge_count(), 1); // dedup after normalization
    }

    #[test]
    fn max_degree_examples() {
        let single = Hypergraph::new(4, 3, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(max_degree(&single, 3).unwrap(), 1);

        // all pairs on 4 vertices: any fixed pair lies in exactly one edge
        let mut edges = Vec::new();
        for i in 0..4u32 {
            for j in (i + 1)..4 {
                edges.push(vec![i, j]);
            }
        }
        let complete = Hypergraph::new(4, 2, edges).unwrap();
        assert_eq!(max_degree(&complete, 2).unwrap(), 1);
        assert_eq!(max_degree(&complete, 1).unwrap(), 3);

        let comp = comparability_hypergraph(3);
        assert_eq!(comp.edge_count(), 19);
        assert_eq!(max_degree(&comp, 2).unwrap(), 1);
        assert!(max_degree(&comp, 3).is_err());
    }

    #[test]
    fn independent_sets_of_comparability_graph_are_antichains() {
        let h = comparability_hypergraph(3);
        let mut count = 0u64;
        h.for_each_independent_set(&mut |_| count += 1).unwrap();
        assert_eq!(count, 20); // the Dedekind count M(3)
    }

    #[test]
    fn empty_fingerprint_for_empty_set() {
        let h = comparability_hypergraph(3);
        let g = fingerprint(&h, 0, 4);
        assert!(g.is_empty());
        let (g2, f) = replay(&h, &[], 4);
        assert!(g2.is_empty());
        // the container of the empty fingerprint absorbs every vertex it
        // never excluded
        assert!(f.len() < h.vertex_count());
    }

    #[test]
    fn replay_reproduces_fingerprint() {
        let h = comparability_hypergraph(3);
        h.for_each_independent_set(&mut |i_set| {
            let g = fingerprint(&h, i_set, 4);
            let (g2, f) = replay(&h, &g, 4);
            assert_eq!(g, g2);
            let g_mask: u64 = g.iter().fold(0, |a, &x| a | (1 << x));
            let f_mask: u64 = f.iter().fold(0, |a, &x| a | (1 << x));
            assert_eq!(g_mask & !i_set, 0, "g ⊆ I");
            assert_eq!(i_set & !(g_mask | f_mask), 0, "I ⊆ g ∪ f");
        })
        .unwrap();
    }

    #[test]
    fn certificate_on_comparability_hypergraph() {
        let h = comparability_hypergraph(3);
        let cert = build_containers(&h, 0.5, 1.0, None).unwrap();
        assert_eq!(cert.verification.independent_sets_checked, 20);
        assert!(!cert.entries.is_empty());
        // infeasible numeric side conditions only flag
        assert!(!cert.flags.tau_condition);
    }

    #[test]
    fn certificate_on_random_hypergraphs() {
        let mut rng = rng_from_seed(31);
        for trial in 0..30 {
            let v = rng.gen_range(5..=12usize);
            let r = if trial % 2 == 0 { 2 } else { 3 };
            let edge_count = rng.gen_range(1..=(2 * v));
            let mut edges = Vec::new();
            for _ in 0..edge_count {
                let mut e: Vec<u32> = Vec::new();
                while e.len() < r {
                    let x = rng.gen_range(0..v) as u32;
                    if !e.contains(&x) {
                        e.push(x);
                    }
                }
                edges.push(e);
            }
            let h = Hypergraph::new(v, r, edges).unwrap();
            if h.edge_count() == 0 {
                continue;
            }
            let tau = rng.gen_range(0.2..0.8);
            build_containers(&h, tau, 1.0, None).unwrap();
        }
    }

    #[test]
    fn unary_hypergraph_containers() {
        // r = 1: edge vertices are barred outright
        let h = Hypergraph::new(4, 1, vec![vec![0], vec![2]]).unwrap();
        let cert = build_containers(&h, 0.5, 1.0, None).unwrap();
        for entry in &cert.entries {
            assert_eq!(entry.container_mask() & 0b0101, 0);
        }
    }

    #[test]
    fn edgeless_hypergraph_rejected() {
        let h = Hypergraph::new(4, 2, vec![]).unwrap();
        assert!(build_containers(&h, 0.5, 1.0, None).is_err());
    }

    #[test]
    fn fingerprint_determinism() {
        let h = comparability_hypergraph(4);
        let mut rng = rng_from_seed(8);
        for _ in 0..20 {
            let i_set = h.random_independent_set(&mut rng);
            let g1 = fingerprint(&h, i_set, 5);
            let g2 = fingerprint(&h, i_set, 5);
            assert_eq!(g1, g2);
        }
        let e1 = enumerate_containers(&h, 5).unwrap();
        let e2 = enumerate_containers(&h, 5).unwrap();
        assert_eq!(e1, e2);
    }

    #[test]
    fn tree_trivial_leaf_when_k_small() {
        let c2 = standard_poset("chain:2").unwrap();
        let params = TreeParams::new(); // k_leaf = 16 swallows n = 3
        let tree = container_tree(3, &c2, &params).unwrap();
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.root().flag, Some(LeafFlag::BelowThreshold));
        assert_eq!(tree.root().family.len(), 8);
    }

    #[test]
    fn tree_coverage_exhaustive() {
        for (n, spec) in [(3usize, "chain:2"), (4, "chain:2"), (3, "chain:3")] {
            let pattern = standard_poset(spec).unwrap();
            let mut params = TreeParams::new();
            params.k_leaf = 1.0; // force real splits at desk scale
            let tree = container_tree(n, &pattern, &params).unwrap();
            assert!(tree.nodes.len() > 1, "tree did not split for {}", spec);
            let mut all_covered = true;
            let mut families = 0u64;
            solver::for_each_free_family(n, &pattern, &mut |fam| {
                families += 1;
                if !tree.covers(fam) {
                    all_covered = false;
                }
            })
            .unwrap();
            assert!(all_covered, "{} free families escape the leaves", spec);
            let exact = solver::forb_star_count(n, &pattern, None).unwrap().count;
            assert_eq!(BigUint::from(families), exact);
            let cert = forb_certificate(&tree, exact);
            assert!(cert.upper_bound >= cert.exact);
            assert!(cert.ratio >= 1.0);
        }
    }

    #[test]
    fn forb_certificate_trivial_tree() {
        let c2 = standard_poset("chain:2").unwrap();
        let tree = container_tree(2, &c2, &TreeParams::new()).unwrap();
        let exact = solver::forb_star_count(2, &c2, None).unwrap().count;
        let cert = forb_certificate(&tree, exact.clone());
        // single-leaf tree: upper bound is 2^(2^n)
        assert_eq!(cert.upper_bound, BigUint::from(16u32));
        assert_eq!(cert.exact, BigUint::from(6u32));
    }
}
