//! Text formats: posets, set families, grid families, hypergraphs,
//! partition exports, and the append-only result cache.
//!
//! Poset files: first line `k`, then `i j` lines meaning `i < j` (1-based;
//! cover or full relations, closure taken). Family files: first line `n`,
//! then one member per line, either comma-separated elements or a hex
//! bitmask prefixed `0x`. Grid files: first line `d k_1 ... k_d`, then one
//! point per line as comma-separated coordinates. Catalog names are
//! accepted wherever a poset file is accepted.

use std::fs;
use std::path::Path;

use forbstar_core::containers::Hypergraph;
use forbstar_core::decomposition::GridPartition;
use forbstar_core::embedding::GridFamily;
use forbstar_core::lattice::{Mask, SetFamily};
use forbstar_core::poset::{standard_poset, Poset};
use forbstar_core::solver::ExtremalRecord;

pub type AnyError = Box<dyn std::error::Error + Send + Sync>;
pub type AnyResult<T> = Result<T, AnyError>;

fn bad(msg: impl Into<String>) -> AnyError {
    msg.into().into()
}

/// A poset from a catalog name (`chain:3`, `butterfly`, ...) or a file.
pub fn load_poset(source: &str) -> AnyResult<Poset> {
    match standard_poset(source) {
        Ok(p) => Ok(p),
        Err(catalog_err) => {
            if Path::new(source).exists() {
                parse_poset(&fs::read_to_string(source)?)
            } else {
                Err(bad(format!("{} (and no such file exists)", catalog_err)))
            }
        }
    }
}

pub fn parse_poset(text: &str) -> AnyResult<Poset> {
    let mut lines = nonempty_lines(text);
    let k: usize = lines
        .next()
        .ok_or_else(|| bad("empty poset file"))?
        .trim()
        .parse()
        .map_err(|_| bad("first line must be the element count"))?;
    let mut pairs = Vec::new();
    for line in lines {
        let mut parts = line.split_whitespace();
        let a: usize = parts
            .next()
            .ok_or_else(|| bad("relation line needs two numbers"))?
            .parse()
            .map_err(|_| bad("bad relation element"))?;
        let b: usize = parts
            .next()
            .ok_or_else(|| bad("relation line needs two numbers"))?
            .parse()
            .map_err(|_| bad("bad relation element"))?;
        if parts.next().is_some() {
            return Err(bad("relation line has trailing tokens"));
        }
        pairs.push((a, b));
    }
    Ok(Poset::from_relations(k, &pairs)?)
}

/// A family from `full:N`, `level:N:K`, `middle:N`, or a file.
pub fn load_family(source: &str) -> AnyResult<SetFamily> {
    if let Some(rest) = source.strip_prefix("full:") {
        let n: usize = rest.parse().map_err(|_| bad("bad full:N"))?;
        return Ok(SetFamily::full_lattice(n)?);
    }
    if let Some(rest) = source.strip_prefix("level:") {
        let (n, k) = rest
            .split_once(':')
            .ok_or_else(|| bad("level source needs level:N:K"))?;
        return Ok(SetFamily::level(n.parse()?, k.parse()?)?);
    }
    if let Some(rest) = source.strip_prefix("middle:") {
        let n: usize = rest.parse().map_err(|_| bad("bad middle:N"))?;
        return Ok(SetFamily::level(n, n / 2)?);
    }
    parse_family(&fs::read_to_string(source)?)
}

pub fn parse_family(text: &str) -> AnyResult<SetFamily> {
    let mut lines = nonempty_lines(text);
    let n: usize = lines
        .next()
        .ok_or_else(|| bad("empty family file"))?
        .trim()
        .parse()
        .map_err(|_| bad("first line must be the ground-set size"))?;
    let mut members = Vec::new();
    for line in lines {
        members.push(parse_member(line.trim())?);
    }
    Ok(SetFamily::new(n, members)?)
}

fn parse_member(token: &str) -> AnyResult<Mask> {
    if let Some(hex) = token.strip_prefix("0x") {
        return Mask::from_str_radix(hex, 16).map_err(|_| bad("bad hex member"));
    }
    let mut mask: Mask = 0;
    for part in token.split(',') {
        let e: usize = part.trim().parse().map_err(|_| bad("bad element"))?;
        if e == 0 {
            return Err(bad("elements are 1-based"));
        }
        mask |= 1 << (e - 1);
    }
    Ok(mask)
}

pub fn write_family(fam: &SetFamily) -> String {
    let mut out = format!("{}\n", fam.ground_size());
    for &m in fam.members() {
        out.push_str(&format!("0x{:x}\n", m));
    }
    out
}

/// A grid family from `full:K1,K2,...` or a file.
pub fn load_grid(source: &str) -> AnyResult<GridFamily> {
    if let Some(rest) = source.strip_prefix("full:") {
        let sides = parse_sides(rest)?;
        return Ok(GridFamily::full_grid(sides)?);
    }
    parse_grid(&fs::read_to_string(source)?)
}

pub fn parse_sides(text: &str) -> AnyResult<Vec<u32>> {
    text.split(',')
        .map(|p| p.trim().parse::<u32>().map_err(|_| bad("bad side length")))
        .collect()
}

pub fn parse_grid(text: &str) -> AnyResult<GridFamily> {
    let mut lines = nonempty_lines(text);
    let header = lines.next().ok_or_else(|| bad("empty grid file"))?;
    let mut parts = header.split_whitespace();
    let d: usize = parts
        .next()
        .ok_or_else(|| bad("grid header needs d"))?
        .parse()
        .map_err(|_| bad("bad dimension"))?;
    let sides: Vec<u32> = parts
        .map(|p| p.parse::<u32>().map_err(|_| bad("bad side")))
        .collect::<AnyResult<_>>()?;
    if sides.len() != d {
        return Err(bad("grid header side count differs from d"));
    }
    let mut members = Vec::new();
    for line in lines {
        let point: Vec<u32> = line
            .split(',')
            .map(|p| p.trim().parse::<u32>().map_err(|_| bad("bad coordinate")))
            .collect::<AnyResult<_>>()?;
        members.push(point);
    }
    Ok(GridFamily::new(sides, members)?)
}

pub fn write_grid(fam: &GridFamily) -> String {
    let mut out = format!("{}", fam.dimension());
    for &k in fam.sides() {
        out.push_str(&format!(" {}", k));
    }
    out.push('\n');
    for p in fam.points() {
        let coords: Vec<String> = p.iter().map(|c| c.to_string()).collect();
        out.push_str(&coords.join(","));
        out.push('\n');
    }
    out
}

/// Hypergraph files: first line `v r`, then one edge per line as vertex
/// ids separated by whitespace.
pub fn parse_hypergraph(text: &str) -> AnyResult<Hypergraph> {
    let mut lines = nonempty_lines(text);
    let header = lines.next().ok_or_else(|| bad("empty hypergraph file"))?;
    let mut parts = header.split_whitespace();
    let v: usize = parts
        .next()
        .ok_or_else(|| bad("hypergraph header needs v"))?
        .parse()?;
    let r: usize = parts
        .next()
        .ok_or_else(|| bad("hypergraph header needs r"))?
        .parse()?;
    let mut edges = Vec::new();
    for line in lines {
        let edge: Vec<u32> = line
            .split_whitespace()
            .map(|p| p.parse::<u32>().map_err(|_| bad("bad vertex id")))
            .collect::<AnyResult<_>>()?;
        edges.push(edge);
    }
    Ok(Hypergraph::new(v, r, edges)?)
}

pub fn load_hypergraph(path: &str) -> AnyResult<Hypergraph> {
    parse_hypergraph(&fs::read_to_string(path)?)
}

/// Partition export: one stanza per grid, sides listed as chains of hex
/// masks.
pub fn write_partition(gp: &GridPartition) -> String {
    let mut out = format!("n {} d {} grids {}\n", gp.n, gp.d, gp.grid_count());
    for g in 0..gp.grid_count() {
        out.push_str(&format!("grid {}\n", g));
        for (b, side) in gp.grid_sides(g).iter().enumerate() {
            let masks: Vec<String> = side.iter().map(|m| format!("0x{:x}", m)).collect();
            out.push_str(&format!("  side {}: {}\n", b, masks.join(" ")));
        }
    }
    out
}

pub fn mask_pretty(m: Mask, n: usize) -> String {
    if m == 0 {
        return "{}".into();
    }
    let elems: Vec<String> = (0..n)
        .filter(|&i| m & (1 << i) != 0)
        .map(|i| (i + 1).to_string())
        .collect();
    format!("{{{}}}", elems.join(","))
}

/// Loads every record of a cache file, with 1-based line numbers in
/// errors.
pub fn load_cache(path: &str) -> AnyResult<Vec<ExtremalRecord>> {
    if !Path::new(path).exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        records.push(ExtremalRecord::from_line(i + 1, line)?);
    }
    Ok(records)
}

pub fn append_cache(path: &str, record: &ExtremalRecord) -> AnyResult<()> {
    use std::io::Write;
    let mut file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    writeln!(file, "{}", record.to_line())?;
    Ok(())
}

fn nonempty_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poset_from_text_with_closure() {
        let p = parse_poset("3\n1 2\n2 3\n").unwrap();
        assert!(p.lt(0, 2));
        assert_eq!(p.height(), 3);
    }

    #[test]
    fn poset_catalog_or_file() {
        assert_eq!(load_poset("chain:4").unwrap().len(), 4);
        assert!(load_poset("no_such_poset_or_file").is_err());
    }

    #[test]
    fn family_roundtrip_both_notations() {
        let fam = parse_family("4\n0x0\n1,3\n0xf\n").unwrap();
        assert_eq!(fam.members(), &[0b0000, 0b0101, 0b1111]);
        let text = write_family(&fam);
        let back = parse_family(&text).unwrap();
        assert_eq!(back, fam);
    }

    #[test]
    fn family_sources() {
        assert_eq!(load_family("full:3").unwrap().len(), 8);
        assert_eq!(load_family("level:4:2").unwrap().len(), 6);
        assert_eq!(load_family("middle:4").unwrap().len(), 6);
    }

    #[test]
    fn grid_roundtrip() {
        let g = parse_grid("2 3 3\n1,1\n2,3\n").unwrap();
        assert_eq!(g.len(), 2);
        let text = write_grid(&g);
        assert_eq!(parse_grid(&text).unwrap(), g);
        assert_eq!(load_grid("full:2,2").unwrap().len(), 4);
    }

    #[test]
    fn hypergraph_from_text() {
        let h = parse_hypergraph("4 2\n0 1\n2 3\n").unwrap();
        assert_eq!(h.edge_count(), 2);
        assert!(parse_hypergraph("4 2\n0 1 2\n").is_err());
    }

    #[test]
    fn pretty_masks() {
        assert_eq!(mask_pretty(0, 3), "{}");
        assert_eq!(mask_pretty(0b101, 3), "{1,3}");
    }
}
