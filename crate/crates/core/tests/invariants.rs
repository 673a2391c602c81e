//! Property tests for the cross-module invariants.

use forbstar_core::embedding::{self, GridFamily};
use forbstar_core::lattice::{
    self, containment_probability, count_intervals, gap_d, sample_interval,
    verify_containment_lemma, SetFamily,
};
use forbstar_core::poset::{canonical_embedding, induced_hom_check, random_poset, standard_poset};
use forbstar_core::rng::rng_from_seed;
use forbstar_core::solver::{ExtremalRecord, RecordKind, Witness, SOLVER_VERSION};
use num_bigint::BigUint;
use proptest::prelude::*;

proptest! {
    // the interval-containment formula agrees with exhaustive enumeration
    // on arbitrary families
    #[test]
    fn containment_lemma_exact(
        n in 1usize..=7,
        m_frac in 0usize..=7,
        seed in 0u64..5000,
        size in 1usize..=4,
    ) {
        let m = m_frac.min(n);
        let size = size.min(1 << n);
        let mut rng = rng_from_seed(seed);
        let mut members = Vec::new();
        use rand::Rng;
        while members.len() < size {
            let cand: u32 = rng.gen_range(0..(1u32 << n));
            if !members.contains(&cand) {
                members.push(cand);
            }
        }
        let fam = SetFamily::new(n, members).unwrap();
        let (enumerated, formula) = verify_containment_lemma(&fam, m).unwrap();
        prop_assert_eq!(enumerated, formula);
    }

    // sampled intervals have the right dimension and nest properly
    #[test]
    fn sampled_interval_well_formed(n in 0usize..=10, m_raw in 0usize..=10, seed in 0u64..1000) {
        let m = m_raw.min(n);
        let mut rng = rng_from_seed(seed);
        let iv = sample_interval(n, m, &mut rng).unwrap();
        prop_assert_eq!(iv.dim(), m as u32);
        prop_assert_eq!(iv.bottom() & iv.top(), iv.bottom());
    }

    // interval counts satisfy the Pascal-style recurrence implied by the
    // closed form
    #[test]
    fn interval_count_consistent(n in 1usize..=20, m_raw in 0usize..=20) {
        let m = m_raw.min(n);
        let total = count_intervals(n, m).unwrap();
        prop_assert_eq!(total, lattice::binomial(n, m) << (n - m));
    }

    // random posets: closure is a strict order and the down-set embedding
    // is induced
    #[test]
    fn random_poset_invariants(k in 1usize..=7, p in 0.0f64..1.0, seed in 0u64..2000) {
        let mut rng = rng_from_seed(seed);
        let poset = random_poset(k, p, &mut rng);
        prop_assert!(poset.height() * poset.width() >= poset.len());
        let fam = canonical_embedding(&poset);
        let q = fam.as_poset();
        let f: Vec<usize> = (0..k).collect();
        prop_assert!(induced_hom_check(&f, &poset, &q));
    }

    // gap never exceeds the ground size, and equals the popcount spread
    #[test]
    fn gap_bounds(n in 1usize..=10, seed in 0u64..1000, size in 1usize..=6) {
        let mut rng = rng_from_seed(seed);
        use rand::Rng;
        let mut members = Vec::new();
        while members.len() < size.min(1 << n) {
            let cand: u32 = rng.gen_range(0..(1u32 << n));
            if !members.contains(&cand) {
                members.push(cand);
            }
        }
        let fam = SetFamily::new(n, members).unwrap();
        prop_assert!(gap_d(&fam).unwrap() as usize <= n);
    }

    // cache records survive the line codec bit-exactly
    #[test]
    fn record_codec_roundtrip(
        fp in any::<u64>(),
        n in 1usize..=6,
        value in 0u64..1_000_000,
        exact in any::<bool>(),
        ts in any::<u64>(),
        masks in proptest::collection::btree_set(0u32..64, 0..6),
    ) {
        let rec = ExtremalRecord {
            kind: RecordKind::LaStar,
            poset_fingerprint: fp,
            n: Some(n),
            sides: None,
            t: None,
            value: BigUint::from(value),
            exact,
            witness: if masks.is_empty() {
                Witness::None
            } else {
                Witness::Family(masks.into_iter().collect())
            },
            timestamp: ts,
            solver_version: SOLVER_VERSION,
        };
        let line = rec.to_line();
        let back = ExtremalRecord::from_line(0, &line).unwrap();
        prop_assert_eq!(&back, &rec);
        prop_assert_eq!(back.to_line(), line);
    }

    // containment probability is monotone nonincreasing in the gap
    #[test]
    fn containment_monotone(n in 1usize..=12, m_raw in 0usize..=12, d in 0usize..=12) {
        let m = m_raw.min(n);
        let d = d.min(m);
        if d >= 1 {
            let lo = containment_probability(n, m, d).unwrap();
            let hi = containment_probability(n, m, d - 1).unwrap();
            prop_assert!(lo <= hi);
        }
    }
}

#[test]
fn copies_in_grids_match_lattice_view() {
    // the 2x2 grid is order-isomorphic to 2^[2]; copy counts must agree
    let c2 = standard_poset("chain:2").unwrap();
    let grid = GridFamily::full_grid(vec![2, 2]).unwrap();
    let lattice = SetFamily::full_lattice(2).unwrap();
    assert_eq!(
        embedding::count_induced_copies(&c2, &grid),
        embedding::count_induced_copies(&c2, &lattice)
    );
    let v = standard_poset("v").unwrap();
    assert_eq!(
        embedding::count_induced_copies(&v, &grid),
        embedding::count_induced_copies(&v, &lattice)
    );
}

#[test]
fn butterfly_catalog_dimension_and_d_star_disagree() {
    // order dimension 2 but minimal lattice embedding dimension 4: the two
    // notions are genuinely different
    let b = standard_poset("butterfly").unwrap();
    assert_eq!(forbstar_core::poset::dimension_of(&b, 4).unwrap(), Some(2));
    assert_eq!(embedding::d_star(&b).unwrap(), 4);
}
