//! `forbstar`: command-line front end over the core library. One
//! subcommand per library operation, explicit seeds for anything
//! randomized, and byte-deterministic primary output (identical inputs,
//! identical bytes, any thread count).

pub mod exec;
pub mod formats;
pub mod parallel;
pub mod report;

use clap::{Parser, Subcommand};
use report::Format;

#[derive(Debug, Parser)]
#[command(
    name = "forbstar",
    about = "Exact desk-scale toolkit for induced-subposet extremal problems",
    version,
    max_term_width = 100
)]
pub struct Cli {
    /// Worker threads for Monte-Carlo loops (results do not depend on this)
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    /// Output format: text, json, or csv
    #[arg(long, global = true, default_value = "text")]
    pub format: String,

    /// Also write the primary output to this file
    #[arg(long, global = true)]
    pub output: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Size, height, width, antichain test, and order dimension of a poset
    PosetInfo {
        /// Catalog name (chain:3, boolean:2, v, butterfly, ...) or file
        #[arg(long)]
        poset: String,
        /// Largest dimension tried by the realizer search
        #[arg(long, default_value_t = 4)]
        max_dim: usize,
    },
    /// Largest induced-P-free subfamily of the Boolean lattice on n points
    LaStar {
        #[arg(long)]
        poset: String,
        #[arg(long)]
        n: usize,
        /// Search-node budget; exceeding it flags the value as a lower bound
        #[arg(long)]
        budget: Option<u64>,
        /// Raise or lower the n guard
        #[arg(long)]
        guard: Option<usize>,
        /// Emit the series n' = 1..=n as a two-column table
        #[arg(long, default_value_t = false)]
        sweep: bool,
        /// Append the result to this cache file
        #[arg(long)]
        cache: Option<String>,
        /// Timestamp recorded in the cache line (0 keeps runs reproducible)
        #[arg(long, default_value_t = 0)]
        timestamp: u64,
    },
    /// Largest induced-P-free subfamily of a grid
    ExStar {
        #[arg(long)]
        poset: String,
        /// Comma-separated side lengths, e.g. 3,3
        #[arg(long)]
        sides: String,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        cache: Option<String>,
        #[arg(long, default_value_t = 0)]
        timestamp: u64,
    },
    /// Largest subfamily of a grid with no t-gapped induced copy of P
    ExStarGapped {
        #[arg(long)]
        poset: String,
        #[arg(long)]
        sides: String,
        #[arg(long)]
        t: u64,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        cache: Option<String>,
        #[arg(long, default_value_t = 0)]
        timestamp: u64,
    },
    /// Exact number of induced-P-free subfamilies of the n-point Boolean lattice
    ForbCount {
        #[arg(long)]
        poset: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        cache: Option<String>,
        #[arg(long, default_value_t = 0)]
        timestamp: u64,
    },
    /// Least d such that P induced-embeds into the full d-point Boolean lattice
    DStar {
        #[arg(long)]
        poset: String,
    },
    /// min over sub-posets D, |D| >= 2, of d*(D)/(|D|-1), exact
    Mu {
        #[arg(long)]
        poset: String,
    },
    /// Statistical and exhaustive verification of the probability lemmas
    Verify {
        #[command(subcommand)]
        which: VerifyCommand,
    },
    /// Sample subsets of a congruence class and report d(S) < t d*(S)
    ProbeGapClaim {
        /// Family source: full:N, level:N:K, middle:N, or a file
        #[arg(long)]
        family: String,
        #[arg(long)]
        t: u64,
        #[arg(long, default_value_t = 200)]
        samples: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Symmetric chain decomposition of the Boolean lattice on n points
    Scd {
        #[arg(long)]
        n: usize,
    },
    /// Partition of the Boolean lattice into d-dimensional grids of chains
    GridPartition {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Chain-length window target [l, 2l]
        #[arg(long, default_value_t = 1)]
        l: usize,
        /// Permute the partition by a seeded uniform permutation
        #[arg(long)]
        permute_seed: Option<u64>,
        /// Emit DOT instead of the stanza export
        #[arg(long, default_value_t = false)]
        dot: bool,
    },
    /// Greedy balanced copy collection with dangerous-set bookkeeping
    GreedyCollection {
        #[arg(long)]
        family: String,
        #[arg(long)]
        poset: String,
        #[arg(long, default_value_t = 1)]
        t: u64,
        /// Density parameter k; default |F| / (t C_P C(n, n/2))
        #[arg(long)]
        k: Option<f64>,
        /// Degree-cap constant K_P; default 2^(|P| + log2|P| + 2)
        #[arg(long)]
        k_p: Option<f64>,
        /// Dangerous-threshold exponent multiplier (1 or 2)
        #[arg(long, default_value_t = 1)]
        alpha: u8,
        #[arg(long, default_value_t = 1.0)]
        c_p: f64,
        /// Disable the caps entirely (every candidate copy is taken)
        #[arg(long, default_value_t = false)]
        unbounded: bool,
    },
    /// Constructive t-gapped copy via the first-coordinate shift
    GappedShift {
        /// Grid family source: full:K1,K2,... or a file
        #[arg(long)]
        grid: String,
        #[arg(long)]
        poset: String,
        #[arg(long)]
        t: u64,
    },
    /// Middle-levels filter, permuted grid partition, per-grid extraction
    Supersat {
        #[arg(long)]
        family: String,
        #[arg(long)]
        poset: String,
        #[arg(long, default_value_t = 1)]
        t: u64,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        c_p: f64,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Container certificate for a copies-of-P hypergraph or a file
    Containers {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        poset: Option<String>,
        /// Hypergraph file: first line `v r`, then one edge per line
        #[arg(long)]
        hypergraph: Option<String>,
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// Sampled verification size when v > 20
        #[arg(long, default_value_t = 2000)]
        sample: u64,
        #[arg(long, default_value_t = 0)]
        sample_seed: u64,
    },
    /// The iterated container process over the full Boolean lattice
    ContainerTree {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        poset: String,
        #[arg(long, default_value_t = 1)]
        t: u64,
        #[arg(long, default_value_t = 1.0)]
        c_p: f64,
        /// Case-1 leaf threshold on k
        #[arg(long, default_value_t = 16.0)]
        k_leaf: f64,
        /// Case-2 boundary on k; default sqrt(4n/n0)
        #[arg(long)]
        k_big: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        n0: f64,
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 16)]
        depth_cap: usize,
    },
    /// Durable result records: compute-and-append, fetch-and-verify, list
    Cache {
        #[command(subcommand)]
        op: CacheCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Interval-containment probability: exhaustive enumeration vs the
    /// exact formula vs Monte-Carlo frequency
    IntervalLemma {
        #[arg(long)]
        n: usize,
        /// Interval dimension; random per instance when omitted
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 1)]
        instances: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Random-permutation pair probability against the rational bound
    GridLemma {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        l: usize,
        #[arg(long, default_value_t = 1)]
        instances: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum CacheCommand {
    /// Solve the given instance and append the record
    Put {
        #[arg(long)]
        file: String,
        /// la_star, ex_star, ex_star_gapped, or forb_star
        #[arg(long)]
        kind: String,
        #[arg(long)]
        poset: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        sides: Option<String>,
        #[arg(long)]
        t: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, default_value_t = 0)]
        timestamp: u64,
    },
    /// Fetch the most recent matching record and re-verify its witness
    Get {
        #[arg(long)]
        file: String,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        poset: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        sides: Option<String>,
        #[arg(long)]
        t: Option<u64>,
    },
    /// Print every record in the file
    List {
        #[arg(long)]
        file: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs one CLI invocation in-process. `argv` excludes the binary name.
pub fn run(argv: &[&str]) -> RunOutput {
    let mut full = vec!["forbstar"];
    full.extend_from_slice(argv);
    let cli = match Cli::try_parse_from(&full) {
        Ok(cli) => cli,
        Err(e) => {
            // clap help/version requests are not usage errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let rendered = e.render().to_string();
            return if code == 0 {
                RunOutput {
                    code,
                    stdout: rendered,
                    stderr: String::new(),
                }
            } else {
                RunOutput {
                    code,
                    stdout: String::new(),
                    stderr: rendered,
                }
            };
        }
    };
    let format = match Format::parse(&cli.format) {
        Some(f) => f,
        None => {
            return RunOutput {
                code: 1,
                stdout: String::new(),
                stderr: format!(
                    "unknown format: {} (expected text, json, or csv)\n",
                    cli.format
                ),
            }
        }
    };
    match exec::dispatch(&cli) {
        Ok(outcome) => {
            let rendered = outcome.report.render(format);
            let mut stderr = String::new();
            let mut code = outcome.code;
            if let Some(path) = &cli.output {
                if let Err(e) = std::fs::write(path, &rendered) {
                    stderr = format!("cannot write {}: {}\n", path, e);
                    code = 1;
                }
            }
            RunOutput {
                code,
                stdout: rendered,
                stderr,
            }
        }
        Err(e) => {
            let code = match e.downcast_ref::<forbstar_core::Error>() {
                Some(forbstar_core::Error::SizeGuard { .. }) => 2,
                _ => 1,
            };
            RunOutput {
                code,
                stdout: String::new(),
                stderr: format!("error: {}\n", e),
            }
        }
    }
}
