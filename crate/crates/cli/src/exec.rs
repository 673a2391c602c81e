//! Command handlers. Every handler assembles a [`Report`] in a fixed key
//! order; anything randomized echoes its seed, anything that consumes a
//! tunable constant echoes the value used.

use num_traits::ToPrimitive;

use forbstar_core::containers::{
    build_containers, container_tree, forb_certificate, Hypergraph, TreeParams, VerifyMode,
};
use forbstar_core::decomposition::{
    grid_pair_probability_bound, grid_partition, partition_to_dot, permute_partition,
    same_grid_hits, scd,
};
use forbstar_core::embedding::{d_star, find_induced_copies, mu};
use forbstar_core::lattice::{
    binomial, gap_d, sample_interval, verify_containment_lemma, SetFamily,
};
use forbstar_core::poset::{dimension_of, DIMENSION_GUARD};
use forbstar_core::rng::{child_seed, rng_for_trial, rng_from_seed};
use forbstar_core::solver::{
    ex_star, ex_star_gapped, forb_star_count, la_star, ExtremalRecord, RecordKind, Witness,
    SOLVER_VERSION,
};
use forbstar_core::supersat::{
    gapped_copy_via_shift, greedy_balanced_collection, probe_gap_claim, supersat_pipeline,
    ShiftOutcome, SupersatParams, ThresholdPolicy,
};
use num_bigint::BigUint;
use rand::Rng;

use crate::formats::{self, AnyResult};
use crate::parallel::parallel_sum;
use crate::report::{Report, Table};
use crate::{CacheCommand, Cli, Command, VerifyCommand};

pub struct Outcome {
    pub report: Report,
    pub code: i32,
}

fn ok(report: Report) -> AnyResult<Outcome> {
    Ok(Outcome { report, code: 0 })
}

fn flagged(report: Report) -> AnyResult<Outcome> {
    Ok(Outcome { report, code: 2 })
}

pub fn dispatch(cli: &Cli) -> AnyResult<Outcome> {
    match &cli.command {
        Command::PosetInfo { poset, max_dim } => poset_info(poset, *max_dim),
        Command::LaStar {
            poset,
            n,
            budget,
            guard,
            sweep,
            cache,
            timestamp,
        } => la_star_cmd(
            poset,
            *n,
            *budget,
            *guard,
            *sweep,
            cache.as_deref(),
            *timestamp,
        ),
        Command::ExStar {
            poset,
            sides,
            budget,
            cache,
            timestamp,
        } => ex_star_cmd(poset, sides, None, *budget, cache.as_deref(), *timestamp),
        Command::ExStarGapped {
            poset,
            sides,
            t,
            budget,
            cache,
            timestamp,
        } => ex_star_cmd(
            poset,
            sides,
            Some(*t),
            *budget,
            cache.as_deref(),
            *timestamp,
        ),
        Command::ForbCount {
            poset,
            n,
            budget,
            cache,
            timestamp,
        } => forb_count_cmd(poset, *n, *budget, cache.as_deref(), *timestamp),
        Command::DStar { poset } => d_star_cmd(poset),
        Command::Mu { poset } => mu_cmd(poset),
        Command::Verify { which } => match which {
            VerifyCommand::IntervalLemma {
                n,
                m,
                instances,
                trials,
                seed,
            } => verify_interval(*n, *m, *instances, *trials, *seed, cli.threads),
            VerifyCommand::GridLemma {
                n,
                d,
                l,
                instances,
                trials,
                seed,
            } => verify_grid(*n, *d, *l, *instances, *trials, *seed, cli.threads),
        },
        Command::ProbeGapClaim {
            family,
            t,
            samples,
            seed,
        } => probe_gap_claim_cmd(family, *t, *samples, *seed),
        Command::Scd { n } => scd_cmd(*n),
        Command::GridPartition {
            n,
            d,
            l,
            permute_seed,
            dot,
        } => grid_partition_cmd(*n, *d, *l, *permute_seed, *dot),
        Command::GreedyCollection {
            family,
            poset,
            t,
            k,
            k_p,
            alpha,
            c_p,
            unbounded,
        } => greedy_cmd(family, poset, *t, *k, *k_p, *alpha, *c_p, *unbounded),
        Command::GappedShift { grid, poset, t } => gapped_shift_cmd(grid, poset, *t),
        Command::Supersat {
            family,
            poset,
            t,
            d,
            c,
            c_p,
            epsilon,
            seed,
        } => supersat_cmd(family, poset, *t, *d, *c, *c_p, *epsilon, *seed),
        Command::Containers {
            family,
            poset,
            hypergraph,
            tau,
            a,
            sample,
            sample_seed,
        } => containers_cmd(
            family.as_deref(),
            poset.as_deref(),
            hypergraph.as_deref(),
            *tau,
            *a,
            *sample,
            *sample_seed,
        ),
        Command::ContainerTree {
            n,
            poset,
            t,
            c_p,
            k_leaf,
            k_big,
            n0,
            tau,
            a,
            depth_cap,
        } => container_tree_cmd(
            *n, poset, *t, *c_p, *k_leaf, *k_big, *n0, *tau, *a, *depth_cap,
        ),
        Command::Cache { op } => cache_cmd(op),
    }
}

fn poset_info(source: &str, max_dim: usize) -> AnyResult<Outcome> {
    let p = formats::load_poset(source)?;
    let mut r = Report::new();
    r.push("poset", source);
    r.push("size", p.len());
    r.push("height", p.height());
    r.push("width", p.width());
    r.push("is_antichain", p.is_antichain() as u8);
    if p.len() <= DIMENSION_GUARD {
        match dimension_of(&p, max_dim)? {
            Some(d) => r.push("dimension", d),
            None => r.push("dimension", format!("none<={}", max_dim)),
        }
    } else {
        r.push("dimension", "skipped(size-guard)");
    }
    r.push("fingerprint", format!("{:016x}", p.fingerprint()));
    ok(r)
}

fn witness_masks_string(members: &[u32]) -> String {
    let parts: Vec<String> = members.iter().map(|m| format!("0x{:x}", m)).collect();
    parts.join(";")
}

fn points_string(points: &[Vec<u32>]) -> String {
    let parts: Vec<String> = points
        .iter()
        .map(|p| {
            p.iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(".")
        })
        .collect();
    parts.join(";")
}

fn la_star_cmd(
    source: &str,
    n: usize,
    budget: Option<u64>,
    guard: Option<usize>,
    sweep: bool,
    cache: Option<&str>,
    timestamp: u64,
) -> AnyResult<Outcome> {
    let p = formats::load_poset(source)?;
    let mut r = Report::new();
    r.push("poset", source);
    if sweep {
        let mut table = Table::new(&["n", "value"]);
        let mut all_exact = true;
        for n_cur in 1..=n {
            let (sol, _) = la_star(n_cur, &p, budget, guard)?;
            all_exact &= sol.exact;
            table.push_row(vec![n_cur.to_string(), sol.value.to_string()]);
        }
        r.push("sweep", format!("1..{}", n));
        r.push("exact", all_exact as u8);
        r.set_table(table);
        return if all_exact { ok(r) } else { flagged(r) };
    }
    let (sol, witness) = la_star(n, &p, budget, guard)?;
    r.push("n", n);
    r.push("value", sol.value);
    r.push("exact", sol.exact as u8);
    r.push("nodes", sol.nodes);
    r.push("witness", witness_masks_string(witness.members()));
    if let Some(path) = cache {
        let record = ExtremalRecord {
            kind: RecordKind::LaStar,
            poset_fingerprint: p.fingerprint(),
            n: Some(n),
            sides: None,
            t: None,
            value: BigUint::from(sol.value),
            exact: sol.exact,
            witness: Witness::Family(witness.members().to_vec()),
            timestamp,
            solver_version: SOLVER_VERSION,
        };
        formats::append_cache(path, &record)?;
        r.push("cached", path);
    }
    if sol.exact {
        ok(r)
    } else {
        flagged(r)
    }
}

fn ex_star_cmd(
    source: &str,
    sides_text: &str,
    t: Option<u64>,
    budget: Option<u64>,
    cache: Option<&str>,
    timestamp: u64,
) -> AnyResult<Outcome> {
    let p = formats::load_poset(source)?;
    let sides = formats::parse_sides(sides_text)?;
    let (sol, witness) = match t {
        None => ex_star(&sides, &p, budget)?,
        Some(t) => ex_star_gapped(&sides, &p, t, budget)?,
    };
    let mut r = Report::new();
    r.push("poset", source);
    r.push("sides", sides_text);
    if let Some(t) = t {
        r.push("t", t);
    }
    r.push("value", sol.value);
    r.push("exact", sol.exact as u8);
    r.push("nodes", sol.nodes);
    r.push("witness", points_string(witness.points()));
    if let Some(path) = cache {
        let record = ExtremalRecord {
            kind: if t.is_some() {
                RecordKind::ExStarGapped
            } else {
                RecordKind::ExStar
            },
            poset_fingerprint: p.fingerprint(),
            n: None,
            sides: Some(sides.clone()),
            t,
            value: BigUint::from(sol.value),
            exact: sol.exact,
            witness: Witness::Grid(witness.points().to_vec()),
            timestamp,
            solver_version: SOLVER_VERSION,
        };
        formats::append_cache(path, &record)?;
        r.push("cached", path);
    }
    if sol.exact {
        ok(r)
    } else {
        flagged(r)
    }
}

fn forb_count_cmd(
    source: &str,
    n: usize,
    budget: Option<u64>,
    cache: Option<&str>,
    timestamp: u64,
) -> AnyResult<Outcome> {
    let p = formats::load_poset(source)?;
    let res = forb_star_count(n, &p, budget)?;
    let mut r = Report::new();
    r.push("poset", source);
    r.push("n", n);
    r.push("count", &res.count);
    r.push("exact", res.exact as u8);
    r.push("nodes", res.nodes);
    if let Some(path) = cache {
        let record = ExtremalRecord {
            kind: RecordKind::ForbStar,
            poset_fingerprint: p.fingerprint(),
            n: Some(n),
            sides: None,
            t: None,
            value: res.count.clone(),
            exact: res.exact,
            witness: Witness::None,
            timestamp,
            solver_version: SOLVER_VERSION,
        };
        formats::append_cache(path, &record)?;
        r.push("cached", path);
    }
    if res.exact {
        ok(r)
    } else {
        flagged(r)
    }
}

fn d_star_cmd(source: &str) -> AnyResult<Outcome> {
    let p = formats::load_poset(source)?;
    let mut r = Report::new();
    r.push("poset", source);
    r.push("d_star", d_star(&p)?);
    ok(r)
}

fn mu_cmd(source: &str) -> AnyResult<Outcome> {
    let p = formats::load_poset(source)?;
    let value = mu(&p)?;
    let mut r = Report::new();
    r.push("poset", source);
    r.push("mu", &value);
    r.push("mu_float", value.to_f64().unwrap_or(f64::NAN));
    ok(r)
}

fn verify_interval(
    n: usize,
    m_fixed: Option<usize>,
    instances: u64,
    trials: u64,
    seed: u64,
    threads: usize,
) -> AnyResult<Outcome> {
    let mut r = Report::new();
    r.push("n", n);
    r.push("instances", instances);
    r.push("trials", trials);
    r.push("seed", seed);
    let mut table = Table::new(&[
        "instance",
        "m",
        "family",
        "gap",
        "formula",
        "enumerated",
        "equal",
        "mc_freq",
        "pass",
    ]);
    let mut all_equal = true;
    let mut all_pass = true;
    for inst in 0..instances {
        let instance_seed = child_seed(seed, inst);
        let mut rng = rng_from_seed(child_seed(instance_seed, 0));
        let m = match m_fixed {
            Some(m) => m,
            None => rng.gen_range(0..=n),
        };
        let size = rng.gen_range(1..=4usize.min(1 << n));
        let mut members: Vec<u32> = Vec::new();
        while members.len() < size {
            let cand = rng.gen_range(0..(1u32 << n));
            if !members.contains(&cand) {
                members.push(cand);
            }
        }
        let fam = SetFamily::new(n, members.clone())?;
        let (enumerated, formula) = verify_containment_lemma(&fam, m)?;
        let equal = enumerated == formula;
        all_equal &= equal;

        let mc_master = child_seed(instance_seed, 1);
        let hits = parallel_sum(0, trials, threads, |lo, hi| {
            let mut count = 0u64;
            for trial in lo..hi {
                let mut trng = rng_for_trial(mc_master, trial);
                let iv = sample_interval(n, m, &mut trng)?;
                if iv.contains_family(&fam) {
                    count += 1;
                }
            }
            Ok(count)
        })?;
        let freq = hits as f64 / trials as f64;
        let p_exact = formula.to_f64().unwrap_or(f64::NAN);
        let sigma = (p_exact * (1.0 - p_exact) / trials as f64).sqrt();
        let pass = (freq - p_exact).abs() <= 3.0 * sigma;
        all_pass &= pass;
        table.push_row(vec![
            inst.to_string(),
            m.to_string(),
            witness_masks_string(&members),
            gap_d(&fam)?.to_string(),
            formula.to_string(),
            enumerated.to_string(),
            (equal as u8).to_string(),
            freq.to_string(),
            (pass as u8).to_string(),
        ]);
    }
    r.push("all_equal", all_equal as u8);
    r.push("all_within_3_sigma", all_pass as u8);
    r.push(
        "result",
        if all_equal && all_pass {
            "PASS"
        } else {
            "FAIL"
        },
    );
    r.set_table(table);
    ok(r)
}

fn verify_grid(
    n: usize,
    d: usize,
    l: usize,
    instances: u64,
    trials: u64,
    seed: u64,
    threads: usize,
) -> AnyResult<Outcome> {
    let gp = grid_partition(n, d, l)?;
    let mut r = Report::new();
    r.push("n", n);
    r.push("d", d);
    r.push("l", l);
    r.push("grids", gp.grid_count());
    r.push("instances", instances);
    r.push("trials", trials);
    r.push("seed", seed);
    let mut table = Table::new(&["instance", "a", "b", "bound", "freq", "pass"]);
    let mut all_pass = true;
    for inst in 0..instances {
        let instance_seed = child_seed(seed, inst);
        let mut rng = rng_from_seed(child_seed(instance_seed, 0));
        let size_a = rng.gen_range(0..=n);
        let size_b = rng.gen_range(size_a..=n);
        let positions = forbstar_core::rng::random_subset(n, size_b, &mut rng);
        let b_mask: u32 = positions.iter().fold(0, |acc, &p| acc | (1 << p));
        let a_positions = forbstar_core::rng::random_subset(size_b, size_a, &mut rng);
        let a_mask: u32 = a_positions
            .iter()
            .fold(0, |acc, &i| acc | (1 << positions[i]));

        let bound = grid_pair_probability_bound(size_a, size_b, n, d)?;
        let bound_f = bound.to_f64().unwrap_or(f64::NAN).min(1.0);
        let mc_master = child_seed(instance_seed, 1);
        let hits = parallel_sum(0, trials, threads, |lo, hi| {
            Ok(same_grid_hits(&gp, a_mask, b_mask, lo, hi, mc_master)?)
        })?;
        let freq = hits as f64 / trials as f64;
        let sigma = (freq * (1.0 - freq) / trials as f64).sqrt();
        let pass = freq <= bound_f + 3.0 * sigma;
        all_pass &= pass;
        table.push_row(vec![
            inst.to_string(),
            format!("0x{:x}", a_mask),
            format!("0x{:x}", b_mask),
            bound_f.to_string(),
            freq.to_string(),
            (pass as u8).to_string(),
        ]);
    }
    r.push("all_pass", all_pass as u8);
    r.push("result", if all_pass { "PASS" } else { "FAIL" });
    r.set_table(table);
    ok(r)
}

fn probe_gap_claim_cmd(family: &str, t: u64, samples: u64, seed: u64) -> AnyResult<Outcome> {
    let fam = formats::load_family(family)?;
    let violations = probe_gap_claim(&fam, t, samples, seed)?;
    let mut r = Report::new();
    r.push("family", family);
    r.push("family_size", fam.len());
    r.push("t", t);
    r.push("samples", samples);
    r.push("seed", seed);
    r.push("violations", violations.len());
    let mut table = Table::new(&["subset", "d_s", "d_star", "t_times_d_star"]);
    for v in &violations {
        table.push_row(vec![
            witness_masks_string(&v.subset),
            v.d_s.to_string(),
            v.d_star.to_string(),
            (v.t * v.d_star as u64).to_string(),
        ]);
    }
    r.set_table(table);
    ok(r)
}

fn scd_cmd(n: usize) -> AnyResult<Outcome> {
    let partition = scd(n)?;
    let mut r = Report::new();
    r.push("n", n);
    r.push("chains", partition.chains.len());
    let mut sizes: Vec<usize> = partition.chains.iter().map(|c| c.len()).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    let sizes_str: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
    r.push("sizes", sizes_str.join(";"));
    let mut blob = String::new();
    for (i, chain) in partition.chains.iter().enumerate() {
        let masks: Vec<String> = chain.iter().map(|m| format!("0x{:x}", m)).collect();
        blob.push_str(&format!("chain {}: {}\n", i, masks.join(" ")));
    }
    r.set_blob(blob);
    ok(r)
}

fn grid_partition_cmd(
    n: usize,
    d: usize,
    l: usize,
    permute_seed: Option<u64>,
    dot: bool,
) -> AnyResult<Outcome> {
    let mut gp = grid_partition(n, d, l)?;
    let mut r = Report::new();
    r.push("n", n);
    r.push("d", d);
    r.push("l", l);
    if let Some(seed) = permute_seed {
        gp = permute_partition(&gp, seed);
        gp.verify_cover()?;
        r.push("permute_seed", seed);
    }
    r.push("grids", gp.grid_count());
    let violation_total: usize = gp.violations.iter().map(|v| v.len()).sum();
    r.push("chain_window_violations", violation_total);
    let per_block: Vec<String> = gp.violations.iter().map(|v| v.len().to_string()).collect();
    r.push("violations_per_block", per_block.join(";"));
    r.set_blob(if dot {
        partition_to_dot(&gp)
    } else {
        formats::write_partition(&gp)
    });
    ok(r)
}

#[allow(clippy::too_many_arguments)]
fn greedy_cmd(
    family: &str,
    poset: &str,
    t: u64,
    k: Option<f64>,
    k_p: Option<f64>,
    alpha: u8,
    c_p: f64,
    unbounded: bool,
) -> AnyResult<Outcome> {
    let fam = formats::load_family(family)?;
    let pattern = formats::load_poset(poset)?;
    let n = fam.ground_size();
    let k_value =
        k.unwrap_or_else(|| fam.len() as f64 / (t as f64 * c_p * binomial(n, n / 2) as f64));
    let mut params = SupersatParams::new(pattern.len(), t);
    params.k = k_value;
    params.c_p = c_p;
    params.alpha = alpha;
    if let Some(kp) = k_p {
        params.k_p = kp;
    }
    let policy = if unbounded {
        ThresholdPolicy::Unbounded
    } else {
        let mu_f = mu(&pattern)?.to_f64().unwrap_or(f64::NAN);
        ThresholdPolicy::Formula {
            k_p: params.k_p,
            k: params.k,
            alpha,
            t,
            mu: mu_f,
        }
    };
    let (collection, report) = greedy_balanced_collection(&fam, &pattern, &params, &policy)?;
    let mut r = Report::new();
    r.push("family", family);
    r.push("poset", poset);
    r.push("t", t);
    r.push("k", params.k);
    r.push("k_p", params.k_p);
    r.push("alpha", alpha);
    r.push("c_p", c_p);
    r.push("mu", report.mu);
    r.push("unbounded", unbounded as u8);
    let class_sizes: Vec<String> = report.class_sizes.iter().map(|s| s.to_string()).collect();
    r.push("class_sizes", class_sizes.join(";"));
    r.push("chosen_class", report.chosen_class);
    r.push("candidates", report.candidates);
    r.push("accepted", report.accepted);
    r.push("target_size", report.target_size);
    r.push("target_met", report.target_met as u8);
    let mut table = Table::new(&[
        "subset_size",
        "threshold",
        "cap_threshold",
        "max_degree",
        "dangerous",
    ]);
    for s in 1..=pattern.len() {
        table.push_row(vec![
            s.to_string(),
            report
                .thresholds
                .get(&s)
                .copied()
                .unwrap_or(f64::NAN)
                .to_string(),
            report
                .cap_thresholds
                .get(&s)
                .copied()
                .unwrap_or(f64::NAN)
                .to_string(),
            report.max_degrees.get(&s).copied().unwrap_or(0).to_string(),
            report
                .dangerous_per_size
                .get(&s)
                .copied()
                .unwrap_or(0)
                .to_string(),
        ]);
    }
    r.set_table(table);
    let mut blob = String::new();
    for copy in collection.copies() {
        blob.push_str(&witness_masks_string(copy));
        blob.push('\n');
    }
    r.set_blob(blob);
    ok(r)
}

fn gapped_shift_cmd(grid: &str, poset: &str, t: u64) -> AnyResult<Outcome> {
    let fam = formats::load_grid(grid)?;
    let pattern = formats::load_poset(poset)?;
    let mut r = Report::new();
    r.push("grid", grid);
    r.push("family_size", fam.len());
    r.push("poset", poset);
    r.push("t", t);
    match gapped_copy_via_shift(&fam, &pattern, t)? {
        ShiftOutcome::Found { points } => {
            r.push("found", 1);
            r.push("copy", points_string(&points));
            r.push("verified", 1);
        }
        ShiftOutcome::NotFound => {
            r.push("found", 0);
        }
    }
    ok(r)
}

#[allow(clippy::too_many_arguments)]
fn supersat_cmd(
    family: &str,
    poset: &str,
    t: u64,
    d: usize,
    c: f64,
    c_p: f64,
    epsilon: f64,
    seed: u64,
) -> AnyResult<Outcome> {
    let fam = formats::load_family(family)?;
    let pattern = formats::load_poset(poset)?;
    let mut params = SupersatParams::new(pattern.len(), t);
    params.c = c;
    params.c_p = c_p;
    params.epsilon = epsilon;
    let (copies, report) = supersat_pipeline(&fam, &pattern, &params, d, seed)?;
    let mut r = Report::new();
    r.push("family", family);
    r.push("poset", poset);
    r.push("n", report.n);
    r.push("d", d);
    r.push("t", t);
    r.push("c", c);
    r.push("c_p", c_p);
    r.push("epsilon", epsilon);
    r.push("seed", seed);
    r.push("k_const", report.k_const);
    r.push("t_prime", report.t_prime);
    r.push("side_target", report.side_target);
    r.push("middle_window", report.middle_window);
    r.push("middle_kept", report.middle_kept);
    r.push("grids", report.grid_count);
    r.push("total_copies", report.total_copies);
    r.push("reference_bound", report.reference_bound);
    let mut table = Table::new(&["grid", "family_size", "extracted", "ex_gapped", "guarantee"]);
    for row in &report.rows {
        table.push_row(vec![
            row.grid.to_string(),
            row.family_size.to_string(),
            row.extracted.to_string(),
            row.ex_gapped.map(|v| v.to_string()).unwrap_or_default(),
            row.guarantee_met
                .map(|v| (v as u8).to_string())
                .unwrap_or_default(),
        ]);
    }
    r.set_table(table);
    let mut blob = String::new();
    for copy in &copies {
        blob.push_str(&format!(
            "grid {}: {}\n",
            copy.grid,
            witness_masks_string(&copy.masks)
        ));
    }
    r.set_blob(blob);
    ok(r)
}

fn containers_cmd(
    family: Option<&str>,
    poset: Option<&str>,
    hypergraph: Option<&str>,
    tau: f64,
    a: f64,
    sample: u64,
    sample_seed: u64,
) -> AnyResult<Outcome> {
    let mut r = Report::new();
    let h: Hypergraph = match (family, poset, hypergraph) {
        (Some(fam_src), Some(poset_src), None) => {
            let fam = formats::load_family(fam_src)?;
            let pattern = formats::load_poset(poset_src)?;
            r.push("family", fam_src);
            r.push("poset", poset_src);
            let edges: Vec<Vec<u32>> = find_induced_copies(&pattern, &fam, None)
                .into_iter()
                .map(|c| c.images.iter().map(|&i| i as u32).collect())
                .collect();
            Hypergraph::new(fam.len(), pattern.len(), edges)?
        }
        (None, None, Some(path)) => {
            r.push("hypergraph", path);
            formats::load_hypergraph(path)?
        }
        _ => {
            return Err("pass either --family with --poset, or --hypergraph".into());
        }
    };
    let v = h.vertex_count();
    let mode = if v <= forbstar_core::containers::EXHAUSTIVE_VERIFY_GUARD {
        VerifyMode::Exhaustive
    } else {
        VerifyMode::Sampled {
            count: sample,
            seed: sample_seed,
        }
    };
    let cert = build_containers(&h, tau, a, Some(mode))?;
    r.push("vertices", v);
    r.push("uniformity", h.uniformity());
    r.push("edges", h.edge_count());
    r.push("tau", tau);
    r.push("a", a);
    r.push("fingerprint_cap", cert.cap);
    r.push("containers", cert.entries.len());
    r.push(
        "verify_mode",
        match mode {
            VerifyMode::Exhaustive => "exhaustive".to_string(),
            VerifyMode::Sampled { count, seed } => format!("sampled:{}:{}", count, seed),
        },
    );
    r.push(
        "independent_sets_checked",
        cert.verification.independent_sets_checked,
    );
    r.push("tau_condition", cert.flags.tau_condition as u8);
    let degs: Vec<String> = cert
        .flags
        .degree_conditions
        .iter()
        .map(|(s, ok)| format!("{}:{}", s, *ok as u8))
        .collect();
    r.push("degree_conditions", degs.join(";"));
    r.push("delta", cert.flags.delta);
    r.push("shrink_violations", cert.flags.shrink_violations);
    let mut table = Table::new(&["g", "f_size", "container_size"]);
    for entry in &cert.entries {
        let g: Vec<String> = entry.g.iter().map(|x| x.to_string()).collect();
        table.push_row(vec![
            g.join(";"),
            entry.f.len().to_string(),
            (entry.g.len() + entry.f.len()).to_string(),
        ]);
    }
    r.set_table(table);
    ok(r)
}

#[allow(clippy::too_many_arguments)]
fn container_tree_cmd(
    n: usize,
    poset: &str,
    t: u64,
    c_p: f64,
    k_leaf: f64,
    k_big: Option<f64>,
    n0: f64,
    tau: f64,
    a: f64,
    depth_cap: usize,
) -> AnyResult<Outcome> {
    let pattern = formats::load_poset(poset)?;
    let params = TreeParams {
        t,
        c_p,
        k_leaf,
        k_big,
        n0,
        tau,
        a_param: a,
        depth_cap,
    };
    let tree = container_tree(n, &pattern, &params)?;
    let mut r = Report::new();
    r.push("n", n);
    r.push("poset", poset);
    r.push("t", t);
    r.push("c_p", c_p);
    r.push("k_leaf", k_leaf);
    r.push("tau", tau);
    r.push("a", a);
    r.push("nodes", tree.nodes.len());
    let leaf_count = tree.leaves().count();
    r.push("leaves", leaf_count);
    let max_depth = tree.nodes.iter().map(|x| x.depth).max().unwrap_or(0);
    r.push("max_depth", max_depth);
    let exact = if n <= forbstar_core::solver::FORB_GUARD_UNCONDITIONAL {
        Some(forb_star_count(n, &pattern, None)?.count)
    } else {
        None
    };
    let cert = forb_certificate(&tree, exact.clone().unwrap_or_default());
    r.push("upper_bound", &cert.upper_bound);
    match exact {
        Some(e) => {
            r.push("exact", &e);
            r.push("ratio", cert.ratio);
        }
        None => r.push("exact", "skipped(n-guard)"),
    }
    let mut table = Table::new(&["leaf", "size", "k", "flag"]);
    for (i, node) in tree.nodes.iter().enumerate() {
        if !node.children.is_empty() {
            continue;
        }
        table.push_row(vec![
            i.to_string(),
            node.family.len().to_string(),
            node.k.to_string(),
            flag_label(node.flag).to_string(),
        ]);
    }
    r.set_table(table);
    r.set_blob(tree_to_text(&tree));
    ok(r)
}

fn flag_label(flag: Option<forbstar_core::containers::LeafFlag>) -> &'static str {
    match flag {
        Some(forbstar_core::containers::LeafFlag::BelowThreshold) => "below-threshold",
        Some(forbstar_core::containers::LeafFlag::NoCopies) => "no-copies",
        Some(forbstar_core::containers::LeafFlag::DepthCap) => "depth-cap",
        Some(forbstar_core::containers::LeafFlag::NoShrink) => "no-shrink",
        None => "",
    }
}

fn case_label(case: forbstar_core::containers::NodeCase) -> &'static str {
    match case {
        forbstar_core::containers::NodeCase::Leaf => "1",
        forbstar_core::containers::NodeCase::Case2 => "2",
        forbstar_core::containers::NodeCase::Case3 => "3",
    }
}

/// Indented tree rendering: case label, family size, and child count per
/// node; leaves carry their family in member notation.
fn tree_to_text(tree: &forbstar_core::containers::ContainerTree) -> String {
    use std::fmt::Write as _;
    fn rec(
        tree: &forbstar_core::containers::ContainerTree,
        node: usize,
        depth: usize,
        out: &mut String,
    ) {
        let n = &tree.nodes[node];
        let indent = "  ".repeat(depth);
        let _ = write!(
            out,
            "{}node {}: case={} size={} children={}",
            indent,
            node,
            case_label(n.case),
            n.family.len(),
            n.children.len()
        );
        let flag = flag_label(n.flag);
        if !flag.is_empty() {
            let _ = write!(out, " flag={}", flag);
        }
        out.push('\n');
        if n.children.is_empty() {
            let _ = writeln!(
                out,
                "{}  family: {}",
                indent,
                witness_masks_string(&n.family)
            );
        }
        for &c in &n.children {
            rec(tree, c, depth + 1, out);
        }
    }
    let mut out = String::new();
    rec(tree, 0, 0, &mut out);
    out
}

fn parse_kind(kind: &str) -> AnyResult<RecordKind> {
    RecordKind::parse(kind).ok_or_else(|| format!("unknown record kind: {}", kind).into())
}

fn cache_cmd(op: &CacheCommand) -> AnyResult<Outcome> {
    match op {
        CacheCommand::Put {
            file,
            kind,
            poset,
            n,
            sides,
            t,
            budget,
            timestamp,
        } => {
            let pattern = formats::load_poset(poset)?;
            let kind = parse_kind(kind)?;
            let record = match kind {
                RecordKind::LaStar => {
                    let n = n.ok_or("la_star needs --n")?;
                    let (sol, witness) = la_star(n, &pattern, *budget, None)?;
                    ExtremalRecord {
                        kind,
                        poset_fingerprint: pattern.fingerprint(),
                        n: Some(n),
                        sides: None,
                        t: None,
                        value: BigUint::from(sol.value),
                        exact: sol.exact,
                        witness: Witness::Family(witness.members().to_vec()),
                        timestamp: *timestamp,
                        solver_version: SOLVER_VERSION,
                    }
                }
                RecordKind::ExStar | RecordKind::ExStarGapped => {
                    let sides_text = sides.as_deref().ok_or("grid kinds need --sides")?;
                    let sides = formats::parse_sides(sides_text)?;
                    let (sol, witness) = match kind {
                        RecordKind::ExStar => ex_star(&sides, &pattern, *budget)?,
                        _ => {
                            let t = t.ok_or("ex_star_gapped needs --t")?;
                            ex_star_gapped(&sides, &pattern, t, *budget)?
                        }
                    };
                    ExtremalRecord {
                        kind,
                        poset_fingerprint: pattern.fingerprint(),
                        n: None,
                        sides: Some(sides),
                        t: *t,
                        value: BigUint::from(sol.value),
                        exact: sol.exact,
                        witness: Witness::Grid(witness.points().to_vec()),
                        timestamp: *timestamp,
                        solver_version: SOLVER_VERSION,
                    }
                }
                RecordKind::ForbStar => {
                    let n = n.ok_or("forb_star needs --n")?;
                    let res = forb_star_count(n, &pattern, *budget)?;
                    ExtremalRecord {
                        kind,
                        poset_fingerprint: pattern.fingerprint(),
                        n: Some(n),
                        sides: None,
                        t: None,
                        value: res.count,
                        exact: res.exact,
                        witness: Witness::None,
                        timestamp: *timestamp,
                        solver_version: SOLVER_VERSION,
                    }
                }
            };
            formats::append_cache(file, &record)?;
            let mut r = Report::new();
            r.push("file", file);
            r.push("record", record.to_line());
            if record.exact {
                ok(r)
            } else {
                flagged(r)
            }
        }
        CacheCommand::Get {
            file,
            kind,
            poset,
            n,
            sides,
            t,
        } => {
            let pattern = formats::load_poset(poset)?;
            let kind = parse_kind(kind)?;
            let sides_parsed = match sides {
                Some(s) => Some(formats::parse_sides(s)?),
                None => None,
            };
            let records = formats::load_cache(file)?;
            let found = records.into_iter().rev().find(|rec| {
                rec.kind == kind
                    && rec.poset_fingerprint == pattern.fingerprint()
                    && rec.n == *n
                    && rec.sides == sides_parsed
                    && rec.t == *t
            });
            let mut r = Report::new();
            r.push("file", file);
            match found {
                Some(rec) => {
                    rec.verify_witness(&pattern)?;
                    r.push("found", 1);
                    r.push("witness_verified", 1);
                    r.push("record", rec.to_line());
                }
                None => {
                    r.push("found", 0);
                }
            }
            ok(r)
        }
        CacheCommand::List { file } => {
            let records = formats::load_cache(file)?;
            let mut r = Report::new();
            r.push("file", file);
            r.push("records", records.len());
            let mut blob = String::new();
            for rec in &records {
                blob.push_str(&rec.to_line());
                blob.push('\n');
            }
            r.set_blob(blob);
            ok(r)
        }
    }
}
