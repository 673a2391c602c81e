//! Induced copies of a pattern poset inside a host (a set family or a grid
//! family), the gap of a copy, and the derived invariants `d*` and `μ`.
//!
//! A copy is an image set: two assignments with the same image set count
//! once. Labeled-assignment counts relate to image-set counts by a factor
//! of |Aut(P)|, which the tests cross-check.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::lattice::{popcount, Mask, SetFamily};
use crate::poset::{mask_elements, subsets_of, Poset};

/// Default guard for the minimal-embedding-dimension search.
pub const D_STAR_GUARD: usize = 8;
/// Default guard for `mu` (scans all sub-posets, each a `d_star` call).
pub const MU_GUARD: usize = 7;

/// A host poset the copy search can run against.
pub trait HostPoset {
    fn size(&self) -> usize;
    fn lt(&self, i: usize, j: usize) -> bool;
    /// Lattice distance between the join and meet of the given elements
    /// (set-difference cardinality in `2^[n]`, coordinate-sum difference in
    /// grids).
    fn gap(&self, elems: &[usize]) -> u64;
}

impl HostPoset for SetFamily {
    fn size(&self) -> usize {
        self.len()
    }

    fn lt(&self, i: usize, j: usize) -> bool {
        let (a, b) = (self.member(i), self.member(j));
        a != b && a & b == a
    }

    fn gap(&self, elems: &[usize]) -> u64 {
        let mut join: Mask = 0;
        let mut meet: Mask = Mask::MAX;
        for &e in elems {
            join |= self.member(e);
            meet &= self.member(e);
        }
        (popcount(join) - popcount(meet)) as u64
    }
}

/// Points of a `d`-dimensional grid `[k_1] × … × [k_d]` under the
/// coordinatewise order. Coordinates are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridFamily {
    sides: Vec<u32>,
    members: Vec<Vec<u32>>,
}

impl GridFamily {
    pub fn new(sides: Vec<u32>, members: Vec<Vec<u32>>) -> Result<GridFamily> {
        if sides.is_empty() || sides.contains(&0) {
            return Err(Error::InvalidInput(String::from("sides must be positive")));
        }
        let mut seen = BTreeSet::new();
        for p in &members {
            if p.len() != sides.len() {
                return Err(Error::InvalidInput(String::from("point arity mismatch")));
            }
            for (i, &c) in p.iter().enumerate() {
                if c < 1 || c > sides[i] {
                    return Err(Error::InvalidInput(String::from(
                        "coordinate outside its side",
                    )));
                }
            }
            if !seen.insert(p.clone()) {
                return Err(Error::InvalidInput(String::from("duplicate point")));
            }
        }
        Ok(GridFamily { sides, members })
    }

    /// The whole grid, points in lexicographic order.
    pub fn full_grid(sides: Vec<u32>) -> Result<GridFamily> {
        let total: u64 = sides.iter().map(|&k| k as u64).product();
        if total > 1 << 20 {
            return Err(Error::SizeGuard {
                what: "full grid enumeration",
                limit: 1 << 20,
                got: total as usize,
            });
        }
        let d = sides.len();
        let mut members = Vec::with_capacity(total as usize);
        let mut point = vec![1u32; d];
        loop {
            members.push(point.clone());
            let mut i = d;
            loop {
                if i == 0 {
                    return GridFamily::new(sides, members);
                }
                i -= 1;
                if point[i] < sides[i] {
                    point[i] += 1;
                    break;
                }
                point[i] = 1;
            }
        }
    }

    pub fn dimension(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[u32] {
        &self.sides
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn points(&self) -> &[Vec<u32>] {
        &self.members
    }

    pub fn point(&self, i: usize) -> &[u32] {
        &self.members[i]
    }

    pub fn index_of(&self, p: &[u32]) -> Option<usize> {
        self.members.iter().position(|q| q == p)
    }

    pub fn leq_points(a: &[u32], b: &[u32]) -> bool {
        a.iter().zip(b).all(|(x, y)| x <= y)
    }
}

impl HostPoset for GridFamily {
    fn size(&self) -> usize {
        self.members.len()
    }

    fn lt(&self, i: usize, j: usize) -> bool {
        let (a, b) = (&self.members[i], &self.members[j]);
        a != b && GridFamily::leq_points(a, b)
    }

    fn gap(&self, elems: &[usize]) -> u64 {
        let d = self.sides.len();
        let mut gap = 0u64;
        for c in 0..d {
            let mut lo = u32::MAX;
            let mut hi = 0u32;
            for &e in elems {
                let v = self.members[e][c];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            gap += (hi - lo) as u64;
        }
        gap
    }
}

/// An induced copy: `images[p]` is the host index assigned to pattern
/// element `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingMap {
    pub images: Vec<usize>,
}

impl EmbeddingMap {
    pub fn image_set(&self) -> Vec<usize> {
        let mut s = self.images.clone();
        s.sort_unstable();
        s
    }
}

/// Is the copy `t`-gapped in its host?
pub fn is_t_gapped<H: HostPoset>(host: &H, copy: &EmbeddingMap, t: u64) -> bool {
    host.gap(&copy.images) >= t
}

struct CopySearch<'a, H: HostPoset> {
    pattern: &'a Poset,
    host: &'a H,
    order: Vec<usize>, // pattern elements in a linear extension
    assigned: Vec<usize>,
    used: Vec<bool>,
}

impl<'a, H: HostPoset> CopySearch<'a, H> {
    fn new(pattern: &'a Poset, host: &'a H) -> Self {
        CopySearch {
            pattern,
            host,
            order: pattern.linear_extension(),
            assigned: vec![usize::MAX; pattern.len()],
            used: vec![false; host.size()],
        }
    }

    fn consistent(&self, pos: usize, candidate: usize) -> bool {
        let p = self.order[pos];
        for &q in &self.order[..pos] {
            let img = self.assigned[q];
            if self.pattern.lt(p, q) != self.host.lt(candidate, img)
                || self.pattern.lt(q, p) != self.host.lt(img, candidate)
            {
                return false;
            }
        }
        true
    }

    /// Depth-first over assignments; calls `emit` per completed assignment.
    /// `emit` returns false to stop the search.
    fn run(&mut self, pos: usize, emit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if pos == self.pattern.len() {
            return emit(&self.assigned);
        }
        for candidate in 0..self.host.size() {
            if self.used[candidate] || !self.consistent(pos, candidate) {
                continue;
            }
            let p = self.order[pos];
            self.assigned[p] = candidate;
            self.used[candidate] = true;
            let keep_going = self.run(pos + 1, emit);
            self.used[candidate] = false;
            self.assigned[p] = usize::MAX;
            if !keep_going {
                return false;
            }
        }
        true
    }
}

/// All induced copies of `pattern` in `host`, deduplicated by image set
/// (the first assignment found represents each set), in a deterministic
/// order. `limit` stops the search after that many distinct copies.
pub fn find_induced_copies<H: HostPoset>(
    pattern: &Poset,
    host: &H,
    limit: Option<usize>,
) -> Vec<EmbeddingMap> {
    let mut out: Vec<EmbeddingMap> = Vec::new();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    if let Some(0) = limit {
        return out;
    }
    let mut search = CopySearch::new(pattern, host);
    search.run(0, &mut |assigned| {
        let copy = EmbeddingMap {
            images: assigned.to_vec(),
        };
        if seen.insert(copy.image_set()) {
            out.push(copy);
            if let Some(cap) = limit {
                if out.len() >= cap {
                    return false;
                }
            }
        }
        true
    });
    out
}

/// Number of induced copies (image sets) of `pattern` in `host`.
pub fn count_induced_copies<H: HostPoset>(pattern: &Poset, host: &H) -> u64 {
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut search = CopySearch::new(pattern, host);
    search.run(0, &mut |assigned| {
        let mut s = assigned.to_vec();
        s.sort_unstable();
        seen.insert(s);
        true
    });
    seen.len() as u64
}

/// Number of labeled assignments (not quotiented by Aut); test hook for the
/// image-set = assignments / |Aut| identity.
pub fn count_labeled_assignments<H: HostPoset>(pattern: &Poset, host: &H) -> u64 {
    let mut count = 0u64;
    let mut search = CopySearch::new(pattern, host);
    search.run(0, &mut |_| {
        count += 1;
        true
    });
    count
}

/// Does `pattern` embed into `host` at all?
pub fn embeds_into<H: HostPoset>(pattern: &Poset, host: &H) -> bool {
    !find_induced_copies(pattern, host, Some(1)).is_empty()
}

/// Induced copies whose gap in the host is at least `t`, deduplicated by
/// image set, deterministic order. `limit` as in [`find_induced_copies`].
pub fn find_gapped_copies<H: HostPoset>(
    pattern: &Poset,
    host: &H,
    t: u64,
    limit: Option<usize>,
) -> Vec<EmbeddingMap> {
    let mut out: Vec<EmbeddingMap> = Vec::new();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    if let Some(0) = limit {
        return out;
    }
    let mut search = CopySearch::new(pattern, host);
    search.run(0, &mut |assigned| {
        if host.gap(assigned) < t {
            return true;
        }
        let copy = EmbeddingMap {
            images: assigned.to_vec(),
        };
        if seen.insert(copy.image_set()) {
            out.push(copy);
            if let Some(cap) = limit {
                if out.len() >= cap {
                    return false;
                }
            }
        }
        true
    });
    out
}

/// Does `host` contain an induced copy of `pattern` with gap at least `t`?
pub fn contains_gapped_copy<H: HostPoset>(pattern: &Poset, host: &H, t: u64) -> bool {
    !find_gapped_copies(pattern, host, t, Some(1)).is_empty()
}

/// `d*(P)`: the least `d` such that `P` induced-embeds into the full
/// lattice `2^[d]`. Equivalent to the minimum gap over all embeddings into
/// any `2^[n]` (restrict to the interval spanned by the image).
pub fn d_star(pattern: &Poset) -> Result<usize> {
    if pattern.len() > D_STAR_GUARD {
        return Err(Error::SizeGuard {
            what: "d_star",
            limit: D_STAR_GUARD,
            got: pattern.len(),
        });
    }
    if pattern.len() == 1 {
        return Ok(0); // a single point sits in 2^[0]
    }
    let log2_ceil = (usize::BITS - (pattern.len() - 1).leading_zeros()) as usize;
    let lower = core::cmp::max(pattern.height().saturating_sub(1), log2_ceil);
    // canonical embedding bounds d* by |P|
    for d in lower..=pattern.len() {
        let host = SetFamily::full_lattice(d)?;
        if embeds_into(pattern, &host) {
            return Ok(d);
        }
    }
    unreachable!("canonical embedding guarantees d* <= |P|")
}

/// `μ(P) = min over sub-posets D with |D| >= 2 of d*(D)/(|D|-1)`, exact.
pub fn mu(pattern: &Poset) -> Result<BigRational> {
    if pattern.len() > MU_GUARD {
        return Err(Error::SizeGuard {
            what: "mu",
            limit: MU_GUARD,
            got: pattern.len(),
        });
    }
    if pattern.len() < 2 {
        return Err(Error::Range("mu needs |P| >= 2"));
    }
    let mut best: Option<BigRational> = None;
    for mask in subsets_of(pattern.len()) {
        let elems = mask_elements(mask);
        if elems.len() < 2 {
            continue;
        }
        let sub = pattern.induced(&elems);
        let ratio = BigRational::new(BigInt::from(d_star(&sub)?), BigInt::from(elems.len() - 1));
        best = Some(match best {
            Some(b) if b <= ratio => b,
            _ => ratio,
        });
    }
    Ok(best.expect("|P| >= 2 yields at least one sub-poset"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::{induced_hom_check, standard_poset};
    use num_traits::One;

    #[test]
    fn copies_of_chain_in_square_lattice() {
        let c2 = standard_poset("chain:2").unwrap();
        let host = SetFamily::full_lattice(2).unwrap();
        let copies = find_induced_copies(&c2, &host, None);
        assert_eq!(copies.len(), 5); // 3^2 - 2^2
    }

    #[test]
    fn copy_counts_match_formula() {
        // comparable pairs in 2^[n]: 3^n - 2^n
        let c2 = standard_poset("chain:2").unwrap();
        for n in 0..=6u32 {
            let host = SetFamily::full_lattice(n as usize).unwrap();
            let expect = 3u64.pow(n) - 2u64.pow(n);
            assert_eq!(count_induced_copies(&c2, &host), expect);
        }
    }

    #[test]
    fn chain_copies_in_a_chain() {
        let c3 = standard_poset("chain:3").unwrap();
        let host = SetFamily::new(4, vec![0b0000, 0b0001, 0b0011, 0b0111]).unwrap();
        assert_eq!(count_induced_copies(&c3, &host), 4); // C(4,3)
    }

    #[test]
    fn no_copies_in_wrong_hosts() {
        let c2 = standard_poset("chain:2").unwrap();
        let antichain_host = SetFamily::new(3, vec![0b001, 0b010, 0b100]).unwrap();
        assert!(find_induced_copies(&c2, &antichain_host, None).is_empty());

        let a2 = standard_poset("antichain:2").unwrap();
        let chain_host = SetFamily::new(2, vec![0b00, 0b01, 0b11]).unwrap();
        assert!(find_induced_copies(&a2, &chain_host, None).is_empty());
    }

    #[test]
    fn copies_pass_hom_check() {
        let v = standard_poset("v").unwrap();
        let host = SetFamily::full_lattice(3).unwrap();
        let host_poset = host.as_poset();
        for copy in find_induced_copies(&v, &host, None) {
            assert!(induced_hom_check(&copy.images, &v, &host_poset));
            let set = copy.image_set();
            let mut dedup = set.clone();
            dedup.dedup();
            assert_eq!(set.len(), dedup.len(), "copy must be injective");
        }
    }

    #[test]
    fn image_set_count_is_assignments_over_aut() {
        for spec in ["chain:2", "antichain:2", "v", "butterfly"] {
            let p = standard_poset(spec).unwrap();
            let host = SetFamily::full_lattice(3).unwrap();
            let labeled = count_labeled_assignments(&p, &host);
            let sets = count_induced_copies(&p, &host);
            let aut = p.automorphism_count().unwrap();
            assert_eq!(labeled, sets * aut, "pattern {}", spec);
        }
    }

    #[test]
    fn gap_in_lattice_and_grid() {
        let host = SetFamily::full_lattice(3).unwrap();
        let bottom = host.members().iter().position(|&m| m == 0).unwrap();
        let top = host.members().iter().position(|&m| m == 0b111).unwrap();
        let copy = EmbeddingMap {
            images: vec![bottom, top],
        };
        assert!(is_t_gapped(&host, &copy, 3));
        assert!(!is_t_gapped(&host, &copy, 4));

        let grid = GridFamily::full_grid(vec![3, 3]).unwrap();
        let a = grid.index_of(&[1, 1]).unwrap();
        let b = grid.index_of(&[2, 1]).unwrap();
        let copy = EmbeddingMap { images: vec![a, b] };
        assert!(!is_t_gapped(&grid, &copy, 2));
        assert!(is_t_gapped(&grid, &copy, 1));
    }

    #[test]
    fn every_two_element_copy_is_one_gapped() {
        let c2 = standard_poset("chain:2").unwrap();
        let host = SetFamily::full_lattice(3).unwrap();
        for copy in find_induced_copies(&c2, &host, None) {
            assert!(is_t_gapped(&host, &copy, 1));
        }
    }

    #[test]
    fn d_star_values() {
        assert_eq!(d_star(&standard_poset("chain:3").unwrap()).unwrap(), 2);
        assert_eq!(d_star(&standard_poset("antichain:2").unwrap()).unwrap(), 2);
        assert_eq!(d_star(&standard_poset("boolean:2").unwrap()).unwrap(), 2);
        assert_eq!(d_star(&standard_poset("v").unwrap()).unwrap(), 2);
        assert_eq!(d_star(&standard_poset("butterfly").unwrap()).unwrap(), 4);
        assert_eq!(d_star(&standard_poset("fork").unwrap()).unwrap(), 3);
    }

    #[test]
    fn d_star_matches_direct_minimization() {
        // min gap over all embeddings into 2^[n], n <= 5, equals d_star
        for spec in [
            "chain:2",
            "chain:3",
            "antichain:2",
            "v",
            "lambda",
            "diamond",
        ] {
            let p = standard_poset(spec).unwrap();
            let ds = d_star(&p).unwrap();
            let mut best = u64::MAX;
            for n in 0..=5 {
                let host = SetFamily::full_lattice(n).unwrap();
                for copy in find_induced_copies(&p, &host, None) {
                    best = best.min(host.gap(&copy.images));
                }
            }
            assert_eq!(best, ds as u64, "pattern {}", spec);
        }
    }

    #[test]
    fn mu_values() {
        for k in 2..=5 {
            let c = standard_poset(&alloc::format!("chain:{}", k)).unwrap();
            assert!(mu(&c).unwrap().is_one());
        }
        let b2 = standard_poset("boolean:2").unwrap();
        assert_eq!(
            mu(&b2).unwrap(),
            BigRational::new(BigInt::from(2), BigInt::from(3))
        );
        let a2 = standard_poset("antichain:2").unwrap();
        assert_eq!(
            mu(&a2).unwrap(),
            BigRational::new(BigInt::from(2), BigInt::from(1))
        );
    }

    #[test]
    fn mu_bounds_for_non_antichains() {
        // log2(|P|)/(|P|-1) <= mu(P) <= 1 for non-antichains
        for spec in [
            "chain:2",
            "chain:6",
            "v",
            "lambda",
            "diamond",
            "butterfly",
            "fork",
            "boolean:2",
        ] {
            let p = standard_poset(spec).unwrap();
            if p.is_antichain() {
                continue;
            }
            let m = mu(&p).unwrap();
            assert!(m <= BigRational::one(), "mu({}) > 1", spec);
            let m_f = num_traits::ToPrimitive::to_f64(&m).unwrap();
            let lb = (p.len() as f64).log2() / (p.len() as f64 - 1.0);
            assert!(m_f >= lb - 1e-12, "mu({}) below log bound", spec);
        }
    }

    #[test]
    fn grid_rejects_bad_points() {
        assert!(GridFamily::new(vec![2, 2], vec![vec![0, 1]]).is_err());
        assert!(GridFamily::new(vec![2, 2], vec![vec![3, 1]]).is_err());
        assert!(GridFamily::new(vec![2, 2], vec![vec![1, 1], vec![1, 1]]).is_err());
        assert!(GridFamily::new(vec![], vec![]).is_err());
    }

    #[test]
    fn full_grid_order() {
        let g = GridFamily::full_grid(vec![2, 3]).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.point(0), &[1, 1]);
        assert_eq!(g.point(5), &[2, 3]);
        assert!(g.lt(0, 5));
        assert!(!g.lt(1, 3)); // (1,2) vs (2,1) incomparable
    }
}
