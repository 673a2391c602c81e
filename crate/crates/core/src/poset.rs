//! Finite posets as explicit strict-order matrices, plus the small-scale
//! parameter computations (height, width, order dimension) and a catalog of
//! standard patterns.
//!
//! The strict relation is stored, not the reflexive one: the induced-copy
//! definition is a biconditional on `<`, and keeping the diagonal out of the
//! matrix removes a class of off-by-one bugs.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lattice::{popcount, Mask, SetFamily};
use crate::rng::Prng;
use rand::Rng;

/// Default guard for brute-force order-dimension search.
pub const DIMENSION_GUARD: usize = 8;
/// Default guard for automorphism counting by permutation scan.
pub const AUTOMORPHISM_GUARD: usize = 8;

/// A finite strict partial order on elements `0..size`.
#[derive(Clone, PartialEq, Eq)]
pub struct Poset {
    size: usize,
    lt: Vec<bool>, // row-major: lt[x*size + y] means x < y
}

impl core::fmt::Debug for Poset {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Poset({}; ", self.size)?;
        let mut first = true;
        for x in 0..self.size {
            for y in 0..self.size {
                if self.lt(x, y) {
                    if !first {
                        write!(f, " ")?;
                    }
                    write!(f, "{}<{}", x, y)?;
                    first = false;
                }
            }
        }
        write!(f, ")")
    }
}

/// Basic parameters of a poset. `dimension` is present only when it was
/// actually computed (the search is exponential).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PosetParams {
    pub height: usize,
    pub width: usize,
    pub dimension: Option<usize>,
}

impl Poset {
    /// Builds a poset from pairs `(i, j)` meaning `i < j`, with elements
    /// `1..=k`. Pairs may be cover relations or any generating set; the
    /// transitive closure is taken. Rejects cyclic input.
    pub fn from_relations(k: usize, pairs: &[(usize, usize)]) -> Result<Poset> {
        if k == 0 {
            return Err(Error::InvalidInput(String::from("poset must be nonempty")));
        }
        let mut lt = vec![false; k * k];
        for &(a, b) in pairs {
            if a < 1 || a > k || b < 1 || b > k {
                return Err(Error::InvalidInput(String::from(
                    "relation pair references an element outside 1..=k",
                )));
            }
            if a == b {
                return Err(Error::Cycle { a: a - 1, b: b - 1 });
            }
            lt[(a - 1) * k + (b - 1)] = true;
        }
        // Warshall closure
        for m in 0..k {
            for x in 0..k {
                if lt[x * k + m] {
                    for y in 0..k {
                        if lt[m * k + y] {
                            lt[x * k + y] = true;
                        }
                    }
                }
            }
        }
        for x in 0..k {
            if lt[x * k + x] {
                // find a partner to report
                let y = (0..k)
                    .find(|&y| y != x && lt[x * k + y] && lt[y * k + x])
                    .unwrap_or(x);
                return Err(Error::Cycle { a: x, b: y });
            }
        }
        Ok(Poset { size: k, lt })
    }

    /// Builds directly from a 0-based strict relation matrix, verifying the
    /// three poset axioms.
    pub fn from_matrix(size: usize, lt: Vec<bool>) -> Result<Poset> {
        if size == 0 || lt.len() != size * size {
            return Err(Error::InvalidInput(String::from("bad matrix shape")));
        }
        let p = Poset { size, lt };
        for x in 0..size {
            if p.lt(x, x) {
                return Err(Error::Cycle { a: x, b: x });
            }
            for y in 0..size {
                if p.lt(x, y) && p.lt(y, x) {
                    return Err(Error::Cycle { a: x, b: y });
                }
                for z in 0..size {
                    if p.lt(x, y) && p.lt(y, z) && !p.lt(x, z) {
                        return Err(Error::InvalidInput(String::from(
                            "relation is not transitive",
                        )));
                    }
                }
            }
        }
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    #[inline]
    pub fn lt(&self, x: usize, y: usize) -> bool {
        self.lt[x * self.size + y]
    }

    #[inline]
    pub fn comparable(&self, x: usize, y: usize) -> bool {
        self.lt(x, y) || self.lt(y, x)
    }

    pub fn is_antichain(&self) -> bool {
        !self.lt.iter().any(|&b| b)
    }

    /// Longest chain size, by DP over the (already closed) relation.
    pub fn height(&self) -> usize {
        let order = self.linear_extension();
        let mut h = vec![1usize; self.size];
        for &x in &order {
            for &y in &order {
                if self.lt(y, x) && h[y] + 1 > h[x] {
                    h[x] = h[y] + 1;
                }
            }
        }
        h.into_iter().max().unwrap_or(0)
    }

    /// Largest antichain size, via Dilworth: width = |P| minus a maximum
    /// matching in the bipartite comparability graph.
    pub fn width(&self) -> usize {
        let n = self.size;
        let mut match_right: Vec<Option<usize>> = vec![None; n];
        let mut matched = 0usize;
        for x in 0..n {
            let mut seen = vec![false; n];
            if self.augment(x, &mut seen, &mut match_right) {
                matched += 1;
            }
        }
        n - matched
    }

    fn augment(&self, x: usize, seen: &mut [bool], match_right: &mut [Option<usize>]) -> bool {
        for y in 0..self.size {
            if self.lt(x, y) && !seen[y] {
                seen[y] = true;
                if match_right[y].is_none()
                    || self.augment(match_right[y].unwrap(), seen, match_right)
                {
                    match_right[y] = Some(x);
                    return true;
                }
            }
        }
        false
    }

    pub fn params(&self, dimension: Option<usize>) -> PosetParams {
        PosetParams {
            height: self.height(),
            width: self.width(),
            dimension,
        }
    }

    /// Elements in some linear extension: y before x whenever y < x.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.size).collect();
        // sort by down-set size; ties by index. Down-set sizes strictly grow
        // along the order, so this is an extension.
        let down: Vec<usize> = (0..self.size)
            .map(|x| (0..self.size).filter(|&y| self.lt(y, x)).count())
            .collect();
        order.sort_by_key(|&x| (down[x], x));
        order
    }

    /// Induced subposet on the given (distinct) elements, in the given order.
    pub fn induced(&self, elems: &[usize]) -> Poset {
        let k = elems.len();
        let mut lt = vec![false; k * k];
        for (i, &x) in elems.iter().enumerate() {
            for (j, &y) in elems.iter().enumerate() {
                if self.lt(x, y) {
                    lt[i * k + j] = true;
                }
            }
        }
        Poset { size: k, lt }
    }

    /// Number of automorphisms, by scanning all permutations.
    pub fn automorphism_count(&self) -> Result<u64> {
        if self.size > AUTOMORPHISM_GUARD {
            return Err(Error::SizeGuard {
                what: "automorphism_count",
                limit: AUTOMORPHISM_GUARD,
                got: self.size,
            });
        }
        let mut count = 0u64;
        let mut perm: Vec<usize> = (0..self.size).collect();
        loop {
            if self.is_automorphism(&perm) {
                count += 1;
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        Ok(count)
    }

    fn is_automorphism(&self, perm: &[usize]) -> bool {
        for x in 0..self.size {
            for y in 0..self.size {
                if self.lt(x, y) != self.lt(perm[x], perm[y]) {
                    return false;
                }
            }
        }
        true
    }

    /// FNV-1a over the relation matrix; used as the cache key for records.
    /// Label-sensitive by design: canonization up to isomorphism is out of
    /// scope at this size.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |byte: u8| {
            h ^= byte as u64;
            h = h.wrapping_mul(0x1000_0000_01b3);
        };
        for b in self.size.to_le_bytes() {
            eat(b);
        }
        for chunk in self.lt.chunks(8) {
            let mut byte = 0u8;
            for (i, &bit) in chunk.iter().enumerate() {
                if bit {
                    byte |= 1 << i;
                }
            }
            eat(byte);
        }
        h
    }
}

fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// `f(x) < f(y)` in `q` if and only if `x < y` in `p`, for all pairs.
/// `f[x]` is the image of `x`. Injectivity is the caller's concern.
pub fn induced_hom_check(f: &[usize], p: &Poset, q: &Poset) -> bool {
    if f.len() != p.len() {
        return false;
    }
    for x in 0..p.len() {
        for y in 0..p.len() {
            if p.lt(x, y) != q.lt(f[x], f[y]) {
                return false;
            }
        }
    }
    true
}

/// Down-set embedding `x -> {y : y <= x}` into the Boolean lattice on
/// `|P|` points. Always an induced embedding; gives the cheap upper bound
/// for the minimal-dimension search.
pub fn canonical_embedding(p: &Poset) -> SetFamily {
    let n = p.len();
    let members: Vec<Mask> = (0..n)
        .map(|x| {
            let mut m: Mask = 1 << x;
            for y in 0..n {
                if p.lt(y, x) {
                    m |= 1 << y;
                }
            }
            m
        })
        .collect();
    SetFamily::new(n, members).expect("down-sets are distinct")
}

/// Smallest `d <= max_d` such that the order is the intersection of `d`
/// linear extensions, or `None` if no realizer of size `<= max_d` exists.
///
/// Brute force: enumerate all linear extensions, record for each the set of
/// incomparable ordered pairs it reverses, then search for a minimum cover.
pub fn dimension_of(p: &Poset, max_d: usize) -> Result<Option<usize>> {
    if p.len() > DIMENSION_GUARD {
        return Err(Error::SizeGuard {
            what: "dimension_of",
            limit: DIMENSION_GUARD,
            got: p.len(),
        });
    }
    if max_d == 0 {
        return Err(Error::Range("max_d must be >= 1"));
    }
    // ordered incomparable pairs (x, y), x != y
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for x in 0..p.len() {
        for y in 0..p.len() {
            if x != y && !p.comparable(x, y) {
                pairs.push((x, y));
            }
        }
    }
    if pairs.is_empty() {
        return Ok(Some(1)); // total order (or a single point)
    }
    debug_assert!(pairs.len() <= 64);
    let full: u64 = if pairs.len() == 64 {
        u64::MAX
    } else {
        (1u64 << pairs.len()) - 1
    };

    // coverage mask of every linear extension: bit i set when the extension
    // places pairs[i].1 before pairs[i].0 (so the pair is absent from the
    // intersection)
    let mut masks: Vec<u64> = Vec::new();
    enumerate_extensions(p, &mut |position| {
        let mut m = 0u64;
        for (i, &(x, y)) in pairs.iter().enumerate() {
            if position[y] < position[x] {
                m |= 1 << i;
            }
        }
        masks.push(m);
    });
    masks.sort_unstable();
    masks.dedup();
    if masks.len() <= 4096 {
        // drop dominated masks
        let kept: Vec<u64> = masks
            .iter()
            .copied()
            .filter(|&m| !masks.iter().any(|&o| o != m && o & m == m))
            .collect();
        masks = kept;
    }

    for d in 1..=max_d {
        if cover_search(&masks, full, 0, d) {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

fn cover_search(masks: &[u64], remaining: u64, covered: u64, depth: usize) -> bool {
    if remaining & !covered == 0 {
        return true;
    }
    if depth == 0 {
        return false;
    }
    // branch on the lowest uncovered pair
    let target = (remaining & !covered).trailing_zeros();
    for &m in masks {
        if m & (1 << target) != 0 && cover_search(masks, remaining, covered | m, depth - 1) {
            return true;
        }
    }
    false
}

/// Calls `visit` with `position[x]` = rank of x, for every linear extension.
fn enumerate_extensions(p: &Poset, visit: &mut dyn FnMut(&[usize])) {
    let n = p.len();
    let mut position = vec![usize::MAX; n];
    let mut placed = vec![false; n];
    fn rec(
        p: &Poset,
        rank: usize,
        position: &mut [usize],
        placed: &mut [bool],
        visit: &mut dyn FnMut(&[usize]),
    ) {
        let n = p.len();
        if rank == n {
            visit(position);
            return;
        }
        for x in 0..n {
            if !placed[x] && (0..n).all(|y| !p.lt(y, x) || placed[y]) {
                placed[x] = true;
                position[x] = rank;
                rec(p, rank + 1, position, placed, visit);
                placed[x] = false;
                position[x] = usize::MAX;
            }
        }
    }
    rec(p, 0, &mut position, &mut placed, visit);
}

/// Catalog posets. Accepts `chain:k`, `antichain:k`, `boolean:k`, and the
/// fixed shapes `diamond`, `v`, `lambda`, `butterfly`, `fork`.
pub fn standard_poset(spec: &str) -> Result<Poset> {
    let lower = spec.to_ascii_lowercase();
    let (name, param) = match lower.split_once(':') {
        Some((n, p)) => {
            let k: usize = p
                .parse()
                .map_err(|_| Error::UnknownPoset(String::from(spec)))?;
            (n, Some(k))
        }
        None => (lower.as_str(), None),
    };
    let need = |p: Option<usize>| -> Result<usize> {
        match p {
            Some(k) if k >= 1 => Ok(k),
            _ => Err(Error::UnknownPoset(String::from(spec))),
        }
    };
    match name {
        "chain" | "c" => {
            let k = need(param)?;
            let pairs: Vec<(usize, usize)> = (1..k).map(|i| (i, i + 1)).collect();
            Poset::from_relations(k, &pairs)
        }
        "antichain" | "a" => {
            let k = need(param)?;
            Poset::from_relations(k, &[])
        }
        "boolean" | "b" => {
            let k = need(param)?;
            if k > 5 {
                return Err(Error::SizeGuard {
                    what: "boolean catalog poset",
                    limit: 5,
                    got: k,
                });
            }
            let n = 1usize << k;
            let mut lt = vec![false; n * n];
            for x in 0..n {
                for y in 0..n {
                    if x != y && x & y == x {
                        lt[x * n + y] = true;
                    }
                }
            }
            Poset::from_matrix(n, lt)
        }
        "diamond" => Poset::from_relations(4, &[(1, 2), (1, 3), (2, 4), (3, 4)]),
        "v" => Poset::from_relations(3, &[(1, 2), (1, 3)]),
        "lambda" => Poset::from_relations(3, &[(1, 3), (2, 3)]),
        "butterfly" => Poset::from_relations(4, &[(1, 3), (1, 4), (2, 3), (2, 4)]),
        "fork" => Poset::from_relations(4, &[(1, 2), (2, 3), (2, 4)]),
        _ => Err(Error::UnknownPoset(String::from(spec))),
    }
}

/// Random poset: each pair (i, j) with i < j becomes a relation with
/// probability `p`, then the transitive closure is taken. Acyclic by
/// construction, deterministic given the generator state.
pub fn random_poset(k: usize, p: f64, rng: &mut Prng) -> Poset {
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 1..=k {
        for j in (i + 1)..=k {
            if rng.gen_range(0.0..1.0) < p {
                pairs.push((i, j));
            }
        }
    }
    Poset::from_relations(k, &pairs).expect("index-ordered pairs cannot form a cycle")
}

/// Names every nonempty subset of elements; helper for sub-poset scans.
pub fn subsets_of(size: usize) -> impl Iterator<Item = Mask> {
    (1..(1u32 << size)).map(|m| m as Mask)
}

pub fn mask_elements(mask: Mask) -> Vec<usize> {
    (0..32).filter(|&i| mask & (1 << i) != 0).collect()
}

pub fn mask_len(mask: Mask) -> usize {
    popcount(mask) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn closure_infers_chain_relation() {
        let p = Poset::from_relations(3, &[(1, 2), (2, 3)]).unwrap();
        assert!(p.lt(0, 2));
        assert_eq!(p.height(), 3);
        assert_eq!(p.width(), 1);
    }

    #[test]
    fn empty_relation_is_antichain() {
        let p = Poset::from_relations(2, &[]).unwrap();
        assert!(p.is_antichain());
        assert_eq!(p.height(), 1);
        assert_eq!(p.width(), 2);
    }

    #[test]
    fn two_cycle_rejected() {
        assert!(matches!(
            Poset::from_relations(2, &[(1, 2), (2, 1)]),
            Err(Error::Cycle { .. })
        ));
    }

    #[test]
    fn longer_cycle_rejected() {
        assert!(matches!(
            Poset::from_relations(3, &[(1, 2), (2, 3), (3, 1)]),
            Err(Error::Cycle { .. })
        ));
    }

    #[test]
    fn catalog_heights_and_widths() {
        assert_eq!(standard_poset("chain:3").unwrap().height(), 3);
        assert_eq!(standard_poset("antichain:4").unwrap().width(), 4);
        assert_eq!(standard_poset("antichain:4").unwrap().height(), 1);
        assert_eq!(standard_poset("boolean:2").unwrap().height(), 3);
        assert_eq!(standard_poset("boolean:3").unwrap().width(), 3);
        assert_eq!(standard_poset("chain:5").unwrap().width(), 1);
        assert!(!standard_poset("v").unwrap().is_antichain());
        assert!(standard_poset("antichain:3").unwrap().is_antichain());
        assert!(!standard_poset("chain:2").unwrap().is_antichain());
    }

    #[test]
    fn catalog_height_width_product_covers_size() {
        for spec in [
            "chain:4",
            "antichain:5",
            "boolean:2",
            "boolean:3",
            "diamond",
            "v",
            "lambda",
            "butterfly",
            "fork",
        ] {
            let p = standard_poset(spec).unwrap();
            assert!(
                p.height() * p.width() >= p.len(),
                "Mirsky/Dilworth consequence fails for {}",
                spec
            );
        }
    }

    #[test]
    fn unknown_name_rejected() {
        assert!(matches!(
            standard_poset("zigzag"),
            Err(Error::UnknownPoset(_))
        ));
    }

    #[test]
    fn dimension_of_chains_is_one() {
        for k in 1..=6 {
            let c = standard_poset(&alloc::format!("chain:{}", k)).unwrap();
            assert_eq!(dimension_of(&c, 3).unwrap(), Some(1));
        }
    }

    #[test]
    fn dimension_of_antichain_pair() {
        let a2 = standard_poset("antichain:2").unwrap();
        assert_eq!(dimension_of(&a2, 4).unwrap(), Some(2));
    }

    #[test]
    fn dimension_of_butterfly() {
        let b = standard_poset("butterfly").unwrap();
        assert_eq!(dimension_of(&b, 4).unwrap(), Some(2));
    }

    #[test]
    fn dimension_of_nontotal_order_exceeds_one() {
        for spec in ["v", "lambda", "diamond", "boolean:2", "antichain:3"] {
            let p = standard_poset(spec).unwrap();
            let d = dimension_of(&p, 4).unwrap().unwrap();
            assert!(d >= 2, "{} has dimension {}", spec, d);
        }
    }

    #[test]
    fn dimension_respects_max_d() {
        let a3 = standard_poset("antichain:3").unwrap();
        assert_eq!(dimension_of(&a3, 1).unwrap(), None);
    }

    #[test]
    fn dimension_guard_fires() {
        let big = standard_poset("antichain:9").unwrap();
        assert!(matches!(
            dimension_of(&big, 2),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn hom_check_identity_and_collapse() {
        let c3 = standard_poset("chain:3").unwrap();
        assert!(induced_hom_check(&[0, 1, 2], &c3, &c3));
        let c2 = standard_poset("chain:2").unwrap();
        let a2 = standard_poset("antichain:2").unwrap();
        assert!(!induced_hom_check(&[0, 1], &c2, &a2));
    }

    #[test]
    fn hom_check_v_into_boolean() {
        // V = one bottom under two incomparable tops; images 0=∅, 1={1}, 2={2} in B_2.
        let v = standard_poset("v").unwrap();
        let b2 = standard_poset("boolean:2").unwrap();
        assert!(induced_hom_check(&[0, 1, 2], &v, &b2));
    }

    #[test]
    fn canonical_embedding_is_induced() {
        for spec in [
            "chain:2",
            "antichain:2",
            "v",
            "lambda",
            "butterfly",
            "fork",
            "boolean:2",
        ] {
            let p = standard_poset(spec).unwrap();
            let fam = canonical_embedding(&p);
            let q = fam.as_poset();
            let f: Vec<usize> = (0..p.len()).collect();
            assert!(
                induced_hom_check(&f, &p, &q),
                "down-set map fails for {}",
                spec
            );
        }
    }

    #[test]
    fn canonical_embedding_small_shapes() {
        let c2 = standard_poset("chain:2").unwrap();
        assert_eq!(canonical_embedding(&c2).members(), &[0b01, 0b11]);
        let a2 = standard_poset("antichain:2").unwrap();
        assert_eq!(canonical_embedding(&a2).members(), &[0b01, 0b10]);
        let v = standard_poset("v").unwrap();
        assert_eq!(canonical_embedding(&v).members(), &[0b001, 0b011, 0b101]);
    }

    #[test]
    fn canonical_embedding_random_posets() {
        let mut rng = rng_from_seed(11);
        for _ in 0..100 {
            let k = rng.gen_range(1..=7);
            let p = random_poset(k, 0.4, &mut rng);
            let fam = canonical_embedding(&p);
            let q = fam.as_poset();
            let f: Vec<usize> = (0..k).collect();
            assert!(induced_hom_check(&f, &p, &q));
        }
    }

    #[test]
    fn automorphisms_of_small_posets() {
        assert_eq!(
            standard_poset("chain:4")
                .unwrap()
                .automorphism_count()
                .unwrap(),
            1
        );
        assert_eq!(
            standard_poset("antichain:3")
                .unwrap()
                .automorphism_count()
                .unwrap(),
            6
        );
        assert_eq!(
            standard_poset("v").unwrap().automorphism_count().unwrap(),
            2
        );
        assert_eq!(
            standard_poset("butterfly")
                .unwrap()
                .automorphism_count()
                .unwrap(),
            4
        );
    }

    #[test]
    fn induced_subposet() {
        let diamond = standard_poset("diamond").unwrap();
        let sub = diamond.induced(&[1, 2]); // the two middle elements
        assert!(sub.is_antichain());
        let sub2 = diamond.induced(&[0, 3]);
        assert!(sub2.lt(0, 1));
    }

    #[test]
    fn fingerprint_distinguishes_relations() {
        let c2 = standard_poset("chain:2").unwrap();
        let a2 = standard_poset("antichain:2").unwrap();
        assert_ne!(c2.fingerprint(), a2.fingerprint());
        assert_eq!(
            c2.fingerprint(),
            standard_poset("chain:2").unwrap().fingerprint()
        );
    }

    #[test]
    fn random_poset_deterministic() {
        let mut r1 = rng_from_seed(5);
        let mut r2 = rng_from_seed(5);
        let p1 = random_poset(6, 0.5, &mut r1);
        let p2 = random_poset(6, 0.5, &mut r2);
        assert_eq!(p1, p2);
    }
}
