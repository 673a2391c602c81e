//! Supersaturation machinery: the congruence split, the greedy balanced
//! copy collection with dangerous-set bookkeeping, the constructive gapped
//! shift in grids, random-subgrid averaging, and the grid-decomposition
//! extraction pipeline.
//!
//! Bounds coming from asymptotic arguments are *reported*, never asserted:
//! each report carries the formula value next to the observed quantity and
//! leaves the comparison to the caller.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::decomposition::{grid_partition, permute_partition};
use crate::embedding::{
    contains_gapped_copy, find_gapped_copies, find_induced_copies, GridFamily, HostPoset,
};
use crate::error::{Error, Result};
use crate::lattice::{binomial, gap_d, popcount, Mask, SetFamily};
use crate::poset::Poset;
use crate::rng::{rng_from_seed, Prng};
use crate::solver;
use rand::Rng;

/// Product guard below which per-grid extremal numbers are solved exactly
/// in the pipeline report.
pub const PIPELINE_EXACT_GUARD: u64 = 25;

/// Knobs of the supersaturation routines. `k_p` follows the convention
/// `2^(|P| + log2|P| + 2)`; `alpha` switches the dangerous-threshold
/// exponent multiplier between the operative value 1 and the cap value 2.
#[derive(Debug, Clone, PartialEq)]
pub struct SupersatParams {
    pub t: u64,
    pub k: f64,
    pub k_p: f64,
    pub alpha: u8,
    pub c_p: f64,
    pub epsilon: f64,
    /// Side-length constant of the grid-partition lemma.
    pub c: f64,
}

impl SupersatParams {
    pub fn new(pattern_size: usize, t: u64) -> SupersatParams {
        SupersatParams {
            t,
            k: 8.0,
            k_p: default_k_p(pattern_size),
            alpha: 1,
            c_p: 1.0,
            epsilon: 1.0,
            c: 1.0,
        }
    }

    /// `K = sqrt(pi) / c`.
    pub fn k_const(&self) -> f64 {
        libm::sqrt(core::f64::consts::PI) / self.c
    }

    /// `t' = floor(t / (K sqrt(d)))`.
    pub fn t_prime(&self, d: usize) -> u64 {
        libm::floor(self.t as f64 / (self.k_const() * libm::sqrt(d as f64))) as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.t < 1 {
            return Err(Error::Range("t must be >= 1"));
        }
        if self.alpha != 1 && self.alpha != 2 {
            return Err(Error::Range("alpha must be 1 or 2"));
        }
        Ok(())
    }
}

pub fn default_k_p(pattern_size: usize) -> f64 {
    libm::pow(
        2.0,
        pattern_size as f64 + libm::log2(pattern_size as f64) + 2.0,
    )
}

/// Splits a family by member size mod `t`; returns the classes (index =
/// residue) and the index of the largest one (smallest residue on ties).
pub fn congruence_split(fam: &SetFamily, t: u64) -> Result<(Vec<SetFamily>, usize)> {
    if t < 1 {
        return Err(Error::Range("t must be >= 1"));
    }
    let mut classes: Vec<Vec<Mask>> = vec![Vec::new(); t as usize];
    for &m in fam.members() {
        classes[(popcount(m) as u64 % t) as usize].push(m);
    }
    let mut largest = 0usize;
    for (i, c) in classes.iter().enumerate() {
        if c.len() > classes[largest].len() {
            largest = i;
        }
    }
    let families = classes
        .into_iter()
        .map(|members| SetFamily::new(fam.ground_size(), members))
        .collect::<Result<Vec<_>>>()?;
    Ok((families, largest))
}

/// A sampled counterexample to the claim `d(S) >= t * d*(S)` inside a
/// congruence class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapClaimViolation {
    pub subset: Vec<Mask>,
    pub d_s: u32,
    pub d_star: usize,
    pub t: u64,
}

/// Samples small subsets of a congruence class and reports violations of
/// `d(S) >= t d*(S)`. Diagnostic only: nothing downstream assumes the
/// claim.
pub fn probe_gap_claim(
    class: &SetFamily,
    t: u64,
    samples: u64,
    seed: u64,
) -> Result<Vec<GapClaimViolation>> {
    if t < 1 {
        return Err(Error::Range("t must be >= 1"));
    }
    let mut rng: Prng = rng_from_seed(seed);
    let mut seen: BTreeSet<Vec<Mask>> = BTreeSet::new();
    let mut violations = Vec::new();
    if class.len() < 2 {
        return Ok(violations);
    }
    for _ in 0..samples {
        let s = rng.gen_range(2..=4usize.min(class.len()));
        let mut idx: BTreeSet<usize> = BTreeSet::new();
        while idx.len() < s {
            idx.insert(rng.gen_range(0..class.len()));
        }
        let mut masks: Vec<Mask> = idx.iter().map(|&i| class.member(i)).collect();
        masks.sort_unstable();
        if !seen.insert(masks.clone()) {
            continue;
        }
        let sub = SetFamily::new(class.ground_size(), masks.clone())?;
        let d_s = gap_d(&sub)?;
        let d_star = crate::embedding::d_star(&sub.as_poset())?;
        if (d_s as u64) < t * d_star as u64 {
            violations.push(GapClaimViolation {
                subset: masks,
                d_s,
                d_star,
                t,
            });
        }
    }
    Ok(violations)
}

/// Dangerous-set thresholds used by [`CopyCollection::try_add`].
#[derive(Debug, Clone, PartialEq)]
pub enum ThresholdPolicy {
    /// `K_P * (k/8)^(alpha * t * mu * (|P| - s))` per subset size `s`.
    Formula {
        k_p: f64,
        k: f64,
        alpha: u8,
        t: u64,
        mu: f64,
    },
    /// Explicit per-size thresholds; missing sizes are unbounded.
    PerSize(BTreeMap<usize, f64>),
    /// No set is ever dangerous.
    Unbounded,
}

impl ThresholdPolicy {
    pub fn threshold(&self, pattern_size: usize, subset_size: usize) -> f64 {
        match self {
            ThresholdPolicy::Formula {
                k_p,
                k,
                alpha,
                t,
                mu,
            } => {
                let exponent = *alpha as f64 * *t as f64 * mu * (pattern_size - subset_size) as f64;
                k_p * libm::pow(k / 8.0, exponent)
            }
            ThresholdPolicy::PerSize(map) => {
                map.get(&subset_size).copied().unwrap_or(f64::INFINITY)
            }
            ThresholdPolicy::Unbounded => f64::INFINITY,
        }
    }
}

/// A growing collection of induced copies with a degree index over subsets
/// of copy image sets: `deg(S)` counts stored copies whose image contains
/// `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopyCollection {
    pattern_size: usize,
    copies: Vec<Vec<Mask>>,
    degree: BTreeMap<Vec<Mask>, u64>,
}

impl CopyCollection {
    pub fn new(pattern_size: usize) -> CopyCollection {
        CopyCollection {
            pattern_size,
            copies: Vec::new(),
            degree: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.copies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.copies.is_empty()
    }

    pub fn copies(&self) -> &[Vec<Mask>] {
        &self.copies
    }

    /// `deg(S)` for a sorted subset of host members; zero when unindexed.
    pub fn deg(&self, subset: &[Mask]) -> u64 {
        self.degree.get(subset).copied().unwrap_or(0)
    }

    pub fn degree_entries(&self) -> impl Iterator<Item = (&Vec<Mask>, u64)> {
        self.degree.iter().map(|(k, &v)| (k, v))
    }

    /// Adds the copy unless one of its nonempty subsets is dangerous
    /// (`deg(S) >= threshold(|S|)`). Returns whether the copy was taken.
    pub fn try_add(&mut self, image: &[Mask], policy: &ThresholdPolicy) -> bool {
        debug_assert_eq!(image.len(), self.pattern_size);
        let mut sorted = image.to_vec();
        sorted.sort_unstable();
        let m = sorted.len();
        for subset in 1u32..(1 << m) {
            let members: Vec<Mask> = (0..m)
                .filter(|&i| subset & (1 << i) != 0)
                .map(|i| sorted[i])
                .collect();
            let thr = policy.threshold(self.pattern_size, members.len());
            if self.deg(&members) as f64 >= thr {
                return false;
            }
        }
        for subset in 1u32..(1 << m) {
            let members: Vec<Mask> = (0..m)
                .filter(|&i| subset & (1 << i) != 0)
                .map(|i| sorted[i])
                .collect();
            *self.degree.entry(members).or_insert(0) += 1;
        }
        self.copies.push(sorted);
        true
    }

    /// Largest degree currently indexed for each subset size.
    pub fn max_degree_by_size(&self) -> BTreeMap<usize, u64> {
        let mut out = BTreeMap::new();
        for (subset, deg) in &self.degree {
            let e = out.entry(subset.len()).or_insert(0u64);
            if *e < *deg {
                *e = *deg;
            }
        }
        out
    }

    /// Number of subsets per size whose degree reached the dangerous
    /// threshold; the implementable analogue of the proof's per-size
    /// dangerous-set counts.
    pub fn dangerous_counts(&self, policy: &ThresholdPolicy) -> BTreeMap<usize, u64> {
        let mut out = BTreeMap::new();
        for (subset, deg) in &self.degree {
            let thr = policy.threshold(self.pattern_size, subset.len());
            if *deg as f64 >= thr {
                *out.entry(subset.len()).or_insert(0u64) += 1;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyReport {
    pub class_sizes: Vec<usize>,
    pub chosen_class: usize,
    pub class_size: usize,
    pub candidates: usize,
    pub accepted: usize,
    pub mu: f64,
    /// Thresholds per subset size for the alpha in force, and the alpha=2
    /// cap the degree condition states.
    pub thresholds: BTreeMap<usize, f64>,
    pub cap_thresholds: BTreeMap<usize, f64>,
    pub max_degrees: BTreeMap<usize, u64>,
    pub dangerous_per_size: BTreeMap<usize, u64>,
    /// `(1/2t) (k/8)^(2 t mu (|P|-1)) |F|`, for comparison with `accepted`.
    pub target_size: f64,
    pub target_met: bool,
}

/// Greedy balanced collection: split `fam` by size mod `t`, stream the
/// induced copies of `pattern` in the largest class in sorted-image order,
/// and keep a copy iff none of its nonempty subsets is dangerous under
/// `policy`.
pub fn greedy_balanced_collection(
    fam: &SetFamily,
    pattern: &Poset,
    params: &SupersatParams,
    policy: &ThresholdPolicy,
) -> Result<(CopyCollection, GreedyReport)> {
    params.validate()?;
    if fam.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let (classes, largest) = congruence_split(fam, params.t)?;
    let class = &classes[largest];
    let mut candidates: Vec<Vec<Mask>> = find_induced_copies(pattern, class, None)
        .into_iter()
        .map(|c| {
            let mut masks: Vec<Mask> = c.images.iter().map(|&i| class.member(i)).collect();
            masks.sort_unstable();
            masks
        })
        .collect();
    candidates.sort();
    candidates.dedup();

    let mu_f = match policy {
        ThresholdPolicy::Formula { mu, .. } => *mu,
        _ => crate::embedding::mu(pattern)
            .ok()
            .and_then(|m| m.to_f64())
            .unwrap_or(f64::NAN),
    };
    let mut collection = CopyCollection::new(pattern.len());
    let mut accepted = 0usize;
    for copy in &candidates {
        if collection.try_add(copy, policy) {
            accepted += 1;
        }
    }

    let mut thresholds = BTreeMap::new();
    let mut cap_thresholds = BTreeMap::new();
    for s in 1..=pattern.len() {
        thresholds.insert(s, policy.threshold(pattern.len(), s));
        let exponent = 2.0 * params.t as f64 * mu_f * (pattern.len() - s) as f64;
        cap_thresholds.insert(s, 2.0 * params.k_p * libm::pow(params.k / 8.0, exponent));
    }
    let target_size = (1.0 / (2.0 * params.t as f64))
        * libm::pow(
            params.k / 8.0,
            2.0 * params.t as f64 * mu_f * (pattern.len() as f64 - 1.0),
        )
        * fam.len() as f64;
    let report = GreedyReport {
        class_sizes: classes.iter().map(|c| c.len()).collect(),
        chosen_class: largest,
        class_size: class.len(),
        candidates: candidates.len(),
        accepted,
        mu: mu_f,
        thresholds,
        cap_thresholds,
        max_degrees: collection.max_degree_by_size(),
        dangerous_per_size: collection.dangerous_counts(policy),
        target_size,
        target_met: accepted as f64 >= target_size,
    };
    Ok((collection, report))
}

/// Result of the constructive shift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShiftOutcome {
    /// `points[p]` is the image of pattern element `p`; the copy is
    /// `t`-gapped and re-verified induced.
    Found {
        points: Vec<Vec<u32>>,
    },
    NotFound,
}

/// Constructive gapped-copy shift, run literally: strip the points with
/// fewer than `t` same-column extensions above them, find a copy in the
/// rest, then swap its top-of-column element for a far extension. The
/// swapped copy is re-verified; a verification failure is an error (it
/// would falsify the argument behind the construction).
pub fn gapped_copy_via_shift(fam: &GridFamily, pattern: &Poset, t: u64) -> Result<ShiftOutcome> {
    if pattern.len() < 2 {
        return Err(Error::Range("gapped shift needs |P| >= 2"));
    }
    if t < 1 {
        return Err(Error::Range("t must be >= 1"));
    }
    // columns: points sharing all coordinates but the first
    let mut columns: BTreeMap<Vec<u32>, Vec<u32>> = BTreeMap::new();
    for p in fam.points() {
        columns.entry(p[1..].to_vec()).or_default().push(p[0]);
    }
    for firsts in columns.values_mut() {
        firsts.sort_unstable();
    }
    let extensions_above = |p: &[u32]| -> u64 {
        let col = &columns[&p[1..].to_vec()];
        col.iter().filter(|&&y| y > p[0]).count() as u64
    };
    let core_points: Vec<Vec<u32>> = fam
        .points()
        .iter()
        .filter(|p| extensions_above(p) >= t)
        .cloned()
        .collect();
    if core_points.is_empty() {
        return Ok(ShiftOutcome::NotFound);
    }
    let core = GridFamily::new(fam.sides().to_vec(), core_points)?;
    let copies = find_induced_copies(pattern, &core, Some(1));
    let Some(copy) = copies.into_iter().next() else {
        return Ok(ShiftOutcome::NotFound);
    };
    let copy_points: Vec<Vec<u32>> = copy
        .images
        .iter()
        .map(|&i| core.point(i).to_vec())
        .collect();

    // x: the largest first coordinate over the copy
    let x = copy_points.iter().map(|p| p[0]).max().unwrap();
    // A: a maximal element among those achieving x (smallest point on ties)
    let achievers: Vec<usize> = (0..copy_points.len())
        .filter(|&i| copy_points[i][0] == x)
        .collect();
    let a_idx = *achievers
        .iter()
        .filter(|&&i| {
            !achievers
                .iter()
                .any(|&j| j != i && GridFamily::leq_points(&copy_points[i], &copy_points[j]))
        })
        .min_by_key(|&&i| copy_points[i].clone())
        .expect("a maximal achiever exists");
    let a = copy_points[a_idx].clone();

    // B: the top of A's column. It has no extension above itself, so it was
    // stripped; the >= t extensions above A put it at first coordinate
    // >= x + t.
    let col = &columns[&a[1..].to_vec()];
    let top = *col.last().unwrap();
    if (top as u64) < a[0] as u64 + t {
        return Err(Error::SwapVerification(String::from(
            "column top closer than t above the copy maximum",
        )));
    }
    let mut b = a.clone();
    b[0] = top;

    let mut shifted = copy_points.clone();
    shifted[a_idx] = b;
    // re-verify: the swapped point set must induce the same pattern and be
    // t-gapped
    let host = GridFamily::new(fam.sides().to_vec(), dedup_points(&shifted))?;
    if host.len() != shifted.len() {
        return Err(Error::SwapVerification(String::from(
            "swap collided with another copy point",
        )));
    }
    let images: Vec<usize> = shifted
        .iter()
        .map(|p| host.index_of(p).expect("point present"))
        .collect();
    let host_poset = host_as_poset(&host);
    if !crate::poset::induced_hom_check(&images, pattern, &host_poset) {
        return Err(Error::SwapVerification(String::from(
            "shifted copy no longer induces the pattern",
        )));
    }
    if host.gap(&images) < t {
        return Err(Error::SwapVerification(String::from(
            "shifted copy is not t-gapped",
        )));
    }
    Ok(ShiftOutcome::Found { points: shifted })
}

fn dedup_points(points: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = Vec::new();
    for p in points {
        if !out.contains(p) {
            out.push(p.clone());
        }
    }
    out
}

fn host_as_poset(host: &GridFamily) -> Poset {
    let k = host.len();
    let mut lt = vec![false; k * k];
    for i in 0..k {
        for j in 0..k {
            if host.lt(i, j) {
                lt[i * k + j] = true;
            }
        }
    }
    Poset::from_matrix(k, lt).expect("grid order is strict")
}

/// Optional extremal cross-check for [`random_subgrid_check`].
#[derive(Debug, Clone)]
pub struct SubgridLemmaCheck {
    pub pattern: Poset,
    pub t: u64,
    pub c_p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubgridReport {
    pub expectation: f64,
    pub expectation_exact: BigRational,
    pub mean: f64,
    pub std_error: f64,
    pub within_3_sigma: bool,
    /// Set when a lemma check ran: is the family actually free of t-gapped
    /// copies, and does `|F| <= (C_P + t)/n_1 * |G|` hold?
    pub family_is_gap_free: Option<bool>,
    pub lemma_bound: Option<f64>,
    pub lemma_bound_holds: Option<bool>,
}

/// Number of `fam` points inside random subgrids `S_1 × … × S_d` with
/// `|S_i| = n_1`, summed over trials `lo..hi`. Chunk-independent seeding.
pub fn subgrid_hits(fam: &GridFamily, lo: u64, hi: u64, seed: u64) -> Result<u64> {
    let sides = fam.sides();
    if sides.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput(String::from(
            "sides must be sorted ascending",
        )));
    }
    let n1 = sides[0] as usize;
    let mut total = 0u64;
    for trial in lo..hi {
        let mut rng = crate::rng::rng_for_trial(seed, trial);
        let picks: Vec<Vec<bool>> = sides
            .iter()
            .map(|&ni| {
                let chosen = crate::rng::random_subset(ni as usize, n1, &mut rng);
                let mut mask = vec![false; ni as usize + 1];
                for c in chosen {
                    mask[c + 1] = true; // coordinates are 1-based
                }
                mask
            })
            .collect();
        total += fam
            .points()
            .iter()
            .filter(|p| p.iter().enumerate().all(|(i, &c)| picks[i][c as usize]))
            .count() as u64;
    }
    Ok(total)
}

/// Random-subgrid averaging: empirical mean of `|F ∩ (S_1 × … × S_d)|`
/// against the exact expectation `|F| ∏ (n_1/n_i)`, with an optional
/// desk-scale check of the averaging bound.
pub fn random_subgrid_check(
    fam: &GridFamily,
    trials: u64,
    seed: u64,
    lemma: Option<&SubgridLemmaCheck>,
) -> Result<SubgridReport> {
    if trials < 2 {
        return Err(Error::Range("trials must be >= 2"));
    }
    let sides = fam.sides();
    if sides.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput(String::from(
            "sides must be sorted ascending",
        )));
    }
    let n1 = sides[0];
    let mut expectation_exact = BigRational::from_integer(fam.len().into());
    for &ni in sides {
        expectation_exact *= BigRational::new(n1.into(), ni.into());
    }
    let expectation = expectation_exact.to_f64().unwrap_or(f64::NAN);

    let mut sum = 0f64;
    let mut sumsq = 0f64;
    for trial in 0..trials {
        let x = subgrid_hits(fam, trial, trial + 1, seed)? as f64;
        sum += x;
        sumsq += x * x;
    }
    let mean = sum / trials as f64;
    let var = (sumsq - sum * sum / trials as f64) / (trials as f64 - 1.0);
    let std_error = libm::sqrt(var.max(0.0) / trials as f64);
    let within = (mean - expectation).abs() <= 3.0 * std_error || mean == expectation;

    let (mut free, mut bound, mut holds) = (None, None, None);
    if let Some(check) = lemma {
        let grid_size: u64 = sides.iter().map(|&k| k as u64).product();
        let is_free = !contains_gapped_copy(&check.pattern, fam, check.t);
        let b = (check.c_p + check.t as f64) / n1 as f64 * grid_size as f64;
        free = Some(is_free);
        bound = Some(b);
        holds = Some(fam.len() as f64 <= b);
    }
    Ok(SubgridReport {
        expectation,
        expectation_exact,
        mean,
        std_error,
        within_3_sigma: within,
        family_is_gap_free: free,
        lemma_bound: bound,
        lemma_bound_holds: holds,
    })
}

/// One extracted copy of the pipeline: sorted image masks and the grid it
/// came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineCopy {
    pub grid: usize,
    pub masks: Vec<Mask>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineGridRow {
    pub grid: usize,
    pub family_size: usize,
    pub extracted: usize,
    /// Exact `ex*_t'` of the grid when small enough to solve.
    pub ex_gapped: Option<u64>,
    pub guarantee_met: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub n: usize,
    pub d: usize,
    pub t_prime: u64,
    pub k_const: f64,
    pub side_target: usize,
    pub middle_window: f64,
    pub middle_kept: usize,
    pub grid_count: usize,
    pub rows: Vec<PipelineGridRow>,
    pub total_copies: usize,
    /// `ε / (C(t'+d-1, d-1) t'! 8^(t'+1)) * n^t' * C(n, ⌊n/2⌋)`, the
    /// final lower-bound formula, for reference only.
    pub reference_bound: f64,
}

/// The supersaturation pipeline: filter to the middle levels, partition
/// `2^[n]` into permuted grids, and per grid repeatedly extract a
/// `t'`-gapped induced copy, removing its least element until none remains.
pub fn supersat_pipeline(
    fam: &SetFamily,
    pattern: &Poset,
    params: &SupersatParams,
    d: usize,
    seed: u64,
) -> Result<(Vec<PipelineCopy>, PipelineReport)> {
    params.validate()?;
    if d == 0 {
        return Err(Error::Range("d must be >= 1"));
    }
    let n = fam.ground_size();
    let t_prime = params.t_prime(d);
    let middle_window = 2.0 * libm::sqrt(n as f64 * libm::log(n.max(1) as f64));
    let middle: Vec<Mask> = fam
        .members()
        .iter()
        .copied()
        .filter(|&m| {
            let dev = popcount(m) as f64 - n as f64 / 2.0;
            libm::fabs(dev) <= middle_window
        })
        .collect();
    let kept = middle.len();
    let side_target = (libm::floor(params.c * libm::sqrt(n as f64 / d as f64)) as usize).max(1);
    let gp = grid_partition(n, d, side_target)?;
    let gp = permute_partition(&gp, seed);

    let mut copies: Vec<PipelineCopy> = Vec::new();
    let mut rows: Vec<PipelineGridRow> = Vec::new();
    for g in 0..gp.grid_count() {
        let members = gp.grid_members(g);
        let mut working: Vec<Mask> = members
            .iter()
            .copied()
            .filter(|m| middle.contains(m))
            .collect();
        working.sort_by_key(|&m| (popcount(m), m));
        let initial = working.len();
        let mut extracted = 0usize;
        loop {
            let host = SetFamily::new(n, working.clone())?;
            let found = find_gapped_copies(pattern, &host, t_prime, Some(1));
            let Some(copy) = found.into_iter().next() else {
                break;
            };
            let mut masks: Vec<Mask> = copy.images.iter().map(|&i| host.member(i)).collect();
            masks.sort_unstable();
            let least = masks[0];
            copies.push(PipelineCopy { grid: g, masks });
            working.retain(|&m| m != least);
            extracted += 1;
        }
        let sides: Vec<u32> = gp
            .grid_sides(g)
            .iter()
            .map(|side| side.len() as u32)
            .collect();
        let product: u64 = sides.iter().map(|&k| k as u64).product();
        let (ex_gapped, guarantee) = if product <= PIPELINE_EXACT_GUARD {
            let (sol, _) = solver::ex_star_gapped(&sides, pattern, t_prime, None)?;
            let met = extracted as u64 >= initial as u64 - sol.value.min(initial as u64);
            (Some(sol.value), Some(met))
        } else {
            (None, None)
        };
        rows.push(PipelineGridRow {
            grid: g,
            family_size: initial,
            extracted,
            ex_gapped,
            guarantee_met: guarantee,
        });
    }

    let total = copies.len();
    let reference_bound = params.epsilon
        / (binomial((t_prime + d as u64 - 1) as usize, d - 1) as f64
            * factorial_f64(t_prime)
            * libm::pow(8.0, t_prime as f64 + 1.0))
        * libm::pow(n as f64, t_prime as f64)
        * binomial(n, n / 2) as f64;
    let report = PipelineReport {
        n,
        d,
        t_prime,
        k_const: params.k_const(),
        side_target,
        middle_window,
        middle_kept: kept,
        grid_count: gp.grid_count(),
        rows,
        total_copies: total,
        reference_bound,
    };
    Ok((copies, report))
}

fn factorial_f64(n: u64) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}
