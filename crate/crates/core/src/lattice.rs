//! The Boolean lattice `2^[n]` as bitmasks: set families, interval
//! sublattices, the gap statistic `d(S)`, uniform interval sampling, and
//! exact verification of the interval-containment probability.

use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poset::Poset;
use crate::rng::{random_subset, Prng};
use rand::Rng;

/// One-word ground-set guard: members of `2^[n]` fit a `u32` for `n <= 30`.
pub const GROUND_SET_GUARD: usize = 30;
/// Full-lattice enumeration guard (routines that walk all `2^n` members or
/// all intervals).
pub const ENUMERATION_GUARD: usize = 12;

pub type Mask = u32;

#[inline]
pub fn popcount(m: Mask) -> u32 {
    m.count_ones()
}

/// A family `F ⊆ 2^[n]`: distinct bitmasks over ground set `[n]`, in a
/// caller-chosen order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetFamily {
    n: usize,
    members: Vec<Mask>,
}

impl SetFamily {
    pub fn new(n: usize, members: Vec<Mask>) -> Result<SetFamily> {
        if n > GROUND_SET_GUARD {
            return Err(Error::SizeGuard {
                what: "ground set",
                limit: GROUND_SET_GUARD,
                got: n,
            });
        }
        let top: Mask = (1 << n) - 1;
        let mut seen = alloc::collections::BTreeSet::new();
        for &m in &members {
            if m & !top != 0 {
                return Err(Error::InvalidInput(String::from(
                    "member uses elements outside the ground set",
                )));
            }
            if !seen.insert(m) {
                return Err(Error::InvalidInput(String::from("duplicate member")));
            }
        }
        Ok(SetFamily { n, members })
    }

    /// All of `2^[n]`, in size-then-lexicographic order.
    pub fn full_lattice(n: usize) -> Result<SetFamily> {
        if n > ENUMERATION_GUARD {
            return Err(Error::SizeGuard {
                what: "full lattice enumeration",
                limit: ENUMERATION_GUARD,
                got: n,
            });
        }
        let mut members: Vec<Mask> = (0..(1u32 << n)).collect();
        members.sort_by_key(|&m| (popcount(m), m));
        SetFamily::new(n, members)
    }

    /// The level `{A : |A| = k}`, in lexicographic order.
    pub fn level(n: usize, k: usize) -> Result<SetFamily> {
        if n > ENUMERATION_GUARD {
            return Err(Error::SizeGuard {
                what: "level enumeration",
                limit: ENUMERATION_GUARD,
                got: n,
            });
        }
        let members: Vec<Mask> = (0..(1u32 << n))
            .filter(|&m| popcount(m) as usize == k)
            .collect();
        SetFamily::new(n, members)
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[Mask] {
        &self.members
    }

    pub fn member(&self, i: usize) -> Mask {
        self.members[i]
    }

    pub fn contains(&self, m: Mask) -> bool {
        self.members.contains(&m)
    }

    /// The inclusion order among members, as an explicit poset.
    pub fn as_poset(&self) -> Poset {
        let k = self.members.len();
        let mut lt = alloc::vec![false; k * k];
        for i in 0..k {
            for j in 0..k {
                let (a, b) = (self.members[i], self.members[j]);
                if a != b && a & b == a {
                    lt[i * k + j] = true;
                }
            }
        }
        Poset::from_matrix(k, lt).expect("inclusion is a strict order")
    }
}

/// The interval `[A, B] = {C : A ⊆ C ⊆ B}`; its dimension is `|B \ A|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalSublattice {
    a: Mask,
    b: Mask,
}

impl IntervalSublattice {
    pub fn new(a: Mask, b: Mask) -> Result<IntervalSublattice> {
        if a & b != a {
            return Err(Error::InvalidInput(String::from("interval needs A ⊆ B")));
        }
        Ok(IntervalSublattice { a, b })
    }

    pub fn bottom(&self) -> Mask {
        self.a
    }

    pub fn top(&self) -> Mask {
        self.b
    }

    pub fn dim(&self) -> u32 {
        popcount(self.b & !self.a)
    }

    pub fn contains_mask(&self, c: Mask) -> bool {
        self.a & c == self.a && c & self.b == c
    }

    pub fn contains_family(&self, s: &SetFamily) -> bool {
        s.members().iter().all(|&c| self.contains_mask(c))
    }
}

/// Join and meet of a nonempty family: bitwise union and intersection.
pub fn family_join_meet(s: &SetFamily) -> Result<(Mask, Mask)> {
    let mut it = s.members().iter();
    let &first = it.next().ok_or(Error::EmptyFamily)?;
    let mut join = first;
    let mut meet = first;
    for &m in it {
        join |= m;
        meet &= m;
    }
    Ok((join, meet))
}

/// The gap `d(S) = |∪S| − |∩S|`.
pub fn gap_d(s: &SetFamily) -> Result<u32> {
    let (join, meet) = family_join_meet(s)?;
    Ok(popcount(join) - popcount(meet))
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

pub fn binomial_big(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k.min(n - k) {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn factorial_big(n: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

/// Number of dimension-`m` interval sublattices of `2^[n]`:
/// `C(n,m) * 2^(n-m)`.
pub fn count_intervals(n: usize, m: usize) -> Result<u128> {
    if m > n || n > GROUND_SET_GUARD {
        return Err(Error::Range("count_intervals needs 0 <= m <= n <= 30"));
    }
    Ok(binomial(n, m) << (n - m) as u128)
}

/// Uniform dimension-`m` interval: pick the difference set `B \ A`
/// uniformly among m-subsets, then each remaining coordinate joins `A`
/// independently with probability 1/2. This hits each of the
/// `C(n,m)·2^(n-m)` intervals with equal probability.
pub fn sample_interval(n: usize, m: usize, rng: &mut Prng) -> Result<IntervalSublattice> {
    if m > n || n > GROUND_SET_GUARD {
        return Err(Error::Range("sample_interval needs 0 <= m <= n <= 30"));
    }
    let diff_positions = random_subset(n, m, rng);
    let mut diff: Mask = 0;
    for &p in &diff_positions {
        diff |= 1 << p;
    }
    let mut a: Mask = 0;
    for i in 0..n {
        if diff & (1 << i) == 0 && rng.gen::<bool>() {
            a |= 1 << i;
        }
    }
    IntervalSublattice::new(a, a | diff)
}

/// Exact probability that a fixed family with gap `d` lies in a uniform
/// dimension-`m` interval: `C(m,d) / (C(n,d) * 2^(n-m))`. Zero when the
/// family cannot fit (`d > m`).
pub fn containment_probability(n: usize, m: usize, d: usize) -> Result<BigRational> {
    if m > n || d > n || n > GROUND_SET_GUARD {
        return Err(Error::Range(
            "containment_probability needs d <= n, m <= n <= 30",
        ));
    }
    if d > m {
        return Ok(BigRational::zero());
    }
    let numer = binomial_big(m, d);
    let denom = binomial_big(n, d) * (BigInt::one() << (n - m));
    Ok(BigRational::new(numer, denom))
}

/// Enumerates every dimension-`m` interval of `2^[n]` and counts those
/// containing `S`; returns `(count/total, formula)`. The two rationals must
/// agree — that is the point of the routine.
pub fn verify_containment_lemma(s: &SetFamily, m: usize) -> Result<(BigRational, BigRational)> {
    let n = s.ground_size();
    if n > ENUMERATION_GUARD {
        return Err(Error::SizeGuard {
            what: "interval enumeration",
            limit: ENUMERATION_GUARD,
            got: n,
        });
    }
    if m > n {
        return Err(Error::Range("verify_containment_lemma needs m <= n"));
    }
    if s.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut hits: u64 = 0;
    let mut total: u64 = 0;
    for_each_interval(n, m, &mut |iv| {
        total += 1;
        if iv.contains_family(s) {
            hits += 1;
        }
    });
    debug_assert_eq!(total as u128, count_intervals(n, m)?);
    let enumerated = BigRational::new(BigInt::from(hits), BigInt::from(total));
    let formula = containment_probability(n, m, gap_d(s)? as usize)?;
    Ok((enumerated, formula))
}

/// Visits every dimension-`m` interval of `2^[n]`, in (difference-set,
/// bottom) lexicographic order.
pub fn for_each_interval(n: usize, m: usize, visit: &mut dyn FnMut(IntervalSublattice)) {
    let top: Mask = if n == 0 { 0 } else { (1u32 << n) - 1 };
    for diff in 0..=top {
        if popcount(diff) as usize != m {
            continue;
        }
        let free = top & !diff;
        // all submasks of `free` serve as bottoms
        let mut bottom = free;
        loop {
            visit(IntervalSublattice::new(bottom, bottom | diff).expect("disjoint parts"));
            if bottom == 0 {
                break;
            }
            bottom = (bottom - 1) & free;
        }
    }
}
