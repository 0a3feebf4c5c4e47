//! Persistence diagrams, representative cycles and the bottleneck distance,
//! all over Z/2.
//!
//! Zero-dimensional pairs come from union-find, one-dimensional pairs from
//! coboundary reduction with clearing, and cycles from a pruned boundary
//! reduction seeded by the cohomology result. [`naive_reduce`] is the
//! independent reference for all three.

mod bittree;
mod bottleneck;
mod cohomology;
mod cycles;
mod naive;
mod union_find;

use std::io::{BufRead, Write};

pub use bittree::BitTree;
pub use cycles::{CycleSelection, TwoPhaseStats, PRUNE_SLACK};
pub use naive::{boundary_matrix, reduce_boundary, ReducedMatrix};

use crate::complex::{build_filtration, Filtration, Simplex};
use crate::error::{Error, Result};
use crate::trace::DissimilarityMatrix;

pub const DIAGRAM_FORMAT_VERSION: u32 = 1;
pub const CYCLE_FORMAT_VERSION: u32 = 1;

/// A birth/death pairing of two simplices (or an unpaired essential simplex).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PersistencePair {
    pub dim: usize,
    pub birth_simplex: usize,
    pub death_simplex: Option<usize>,
    pub birth: f64,
    pub death: f64,
}

impl PersistencePair {
    pub(crate) fn finite(dim: usize, birth: usize, death: usize, simplices: &[Simplex]) -> Self {
        Self {
            dim,
            birth_simplex: birth,
            death_simplex: Some(death),
            birth: simplices[birth].filter,
            death: simplices[death].filter,
        }
    }

    pub(crate) fn essential(dim: usize, simplex: usize, birth: f64) -> Self {
        Self {
            dim,
            birth_simplex: simplex,
            death_simplex: None,
            birth,
            death: f64::INFINITY,
        }
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn dot(&self) -> Dot {
        Dot {
            dim: self.dim,
            birth: self.birth,
            death: self.death,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dot {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
}

impl Dot {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_essential(&self) -> bool {
        self.death == f64::INFINITY
    }

    fn key(&self) -> (usize, u64, u64) {
        (self.dim, self.birth.to_bits(), self.death.to_bits())
    }
}

/// A multiset of dots, kept sorted by `(dim, birth, death)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PersistenceDiagram {
    dots: Vec<Dot>,
}

impl PersistenceDiagram {
    pub fn new(mut dots: Vec<Dot>) -> Self {
        dots.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then(a.birth.total_cmp(&b.birth))
                .then(a.death.total_cmp(&b.death))
        });
        Self { dots }
    }

    /// Diagram of `pairs`; zero-persistence pairs are dropped unless
    /// `keep_zero` is set.
    pub fn from_pairs(pairs: &[PersistencePair], keep_zero: bool) -> Self {
        Self::new(
            pairs
                .iter()
                .filter(|p| keep_zero || p.death > p.birth)
                .map(PersistencePair::dot)
                .collect(),
        )
    }

    pub fn dots(&self) -> &[Dot] {
        &self.dots
    }

    pub fn len(&self) -> usize {
        self.dots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dots.is_empty()
    }

    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &Dot> + '_ {
        self.dots.iter().filter(move |d| d.dim == dim)
    }

    /// Finite dots of one dimension as `(birth, death)`.
    pub fn finite(&self, dim: usize) -> Vec<(f64, f64)> {
        self.in_dim(dim)
            .filter(|d| !d.is_essential())
            .map(|d| (d.birth, d.death))
            .collect()
    }

    pub fn essential_births(&self, dim: usize) -> Vec<f64> {
        self.in_dim(dim)
            .filter(|d| d.is_essential())
            .map(|d| d.birth)
            .collect()
    }

    /// Union of two diagrams.
    pub fn merged(&self, other: &Self) -> Self {
        Self::new(self.dots.iter().chain(&other.dots).copied().collect())
    }

    /// Bitwise multiset equality.
    pub fn same_multiset(&self, other: &Self) -> bool {
        let mut a: Vec<_> = self.dots.iter().map(Dot::key).collect();
        let mut b: Vec<_> = other.dots.iter().map(Dot::key).collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }
}

/// A representative 1-cycle as a list of edges.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleRepresentative {
    pub birth: f64,
    pub death: f64,
    pub edges: Vec<CycleEdge>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleEdge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
    pub layer_i: usize,
    pub layer_j: usize,
}

impl CycleRepresentative {
    /// True when every vertex has even degree.
    pub fn is_closed(&self) -> bool {
        let mut degree = std::collections::HashMap::new();
        for e in &self.edges {
            *degree.entry(e.i).or_insert(0usize) += 1;
            *degree.entry(e.j).or_insert(0usize) += 1;
        }
        degree.values().all(|d| d % 2 == 0)
    }

    pub fn max_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// All 0-dimensional pairs, zero-persistence and essential ones included.
pub fn zero_dim_pairs(f: &Filtration) -> Vec<PersistencePair> {
    union_find::zero_dim_pairs(f)
}

/// All 1-dimensional pairs, zero-persistence and essential ones included.
pub fn one_dim_pairs(f: &Filtration) -> Vec<PersistencePair> {
    let cleared: Vec<usize> = zero_dim_pairs(f).iter().filter_map(|p| p.death_simplex).collect();
    cohomology::one_dim_cohomology(f, &cleared).pairs
}

/// Every 0- and 1-dimensional pair from the textbook reduction.
pub fn naive_pairs(f: &Filtration) -> Vec<PersistencePair> {
    naive::naive_pairs(f).0
}

pub fn zero_dim_diagram(f: &Filtration) -> PersistenceDiagram {
    PersistenceDiagram::from_pairs(&zero_dim_pairs(f), false)
}

pub fn one_dim_diagram(f: &Filtration) -> PersistenceDiagram {
    PersistenceDiagram::from_pairs(&one_dim_pairs(f), false)
}

/// Both dimensions through the optimized routines.
pub fn diagram(f: &Filtration, keep_zero: bool) -> PersistenceDiagram {
    let mut pairs = zero_dim_pairs(f);
    pairs.extend(one_dim_pairs(f));
    PersistenceDiagram::from_pairs(&pairs, keep_zero)
}

/// Both dimensions through the textbook reduction.
pub fn naive_reduce(f: &Filtration) -> PersistenceDiagram {
    PersistenceDiagram::from_pairs(&naive_pairs(f), false)
}

/// Representative cycles of the selected 1-dimensional dots, highest
/// persistence first.
pub fn extract_cycles(f: &Filtration, selection: CycleSelection) -> Result<Vec<CycleRepresentative>> {
    Ok(cycles::two_phase(f, Some(selection))?.cycles)
}

/// Runs the two-phase computation over every positive-persistence dot and
/// reports sizes and timings.
pub fn two_phase_stats(f: &Filtration) -> Result<TwoPhaseStats> {
    Ok(cycles::two_phase(f, None)?.stats)
}

/// Bottleneck distance restricted to dimension `dim`.
pub fn bottleneck_distance(a: &PersistenceDiagram, b: &PersistenceDiagram, dim: usize) -> f64 {
    let ess = bottleneck::essential_bottleneck(&a.essential_births(dim), &b.essential_births(dim));
    if ess.is_infinite() {
        return ess;
    }
    ess.max(bottleneck::finite_bottleneck(&a.finite(dim), &b.finite(dim)))
}

/// Both sides of the stability inequality for 1-dimensional diagrams:
/// `(d_b(Dg1(W1), Dg1(W2)), ‖W1 − W2‖∞)`.
pub fn diagram_stability_check(
    w1: &DissimilarityMatrix,
    w2: &DissimilarityMatrix,
    cutoff: f64,
) -> Result<(f64, f64)> {
    let winf = w1.sup_distance(w2)?;
    let d1 = one_dim_diagram(&build_filtration(w1, cutoff)?);
    let d2 = one_dim_diagram(&build_filtration(w2, cutoff)?);
    Ok((bottleneck_distance(&d1, &d2, 1), winf))
}

fn format_value(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        v.to_string()
    }
}

fn parse_value(s: &str, line: usize) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" | "Inf" | "infinity" => Ok(f64::INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|_| Error::parse(line, format!("bad number {t:?}"))),
    }
}

/// Writes `dim,birth,death` rows with `inf` for essential dots.
pub fn write_diagram_csv<W: Write>(dg: &PersistenceDiagram, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dim", "birth", "death"])?;
    for d in dg.dots() {
        w.write_record([d.dim.to_string(), format_value(d.birth), format_value(d.death)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_diagram_csv<R: std::io::Read>(input: R) -> Result<PersistenceDiagram> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().map(str::trim).collect::<Vec<_>>() != ["dim", "birth", "death"] {
        return Err(Error::Format("diagram header must be dim,birth,death".into()));
    }
    let mut dots = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        if rec.len() != 3 {
            return Err(Error::parse(line, "expected 3 fields"));
        }
        let dim: usize = rec[0]
            .trim()
            .parse()
            .map_err(|_| Error::parse(line, "bad dimension"))?;
        if dim > 1 {
            return Err(Error::parse(line, format!("dimension {dim} not supported")));
        }
        let (birth, death) = (parse_value(&rec[1], line)?, parse_value(&rec[2], line)?);
        if !birth.is_finite() || death < birth || death.is_nan() {
            return Err(Error::parse(line, "need finite birth and death >= birth"));
        }
        dots.push(Dot { dim, birth, death });
    }
    Ok(PersistenceDiagram::new(dots))
}

/// Writes `CYCLE id=k birth=b death=d` blocks, each followed by
/// `EDGE i j w layer_i layer_j` lines.
pub fn write_cycles<W: Write>(cycles: &[CycleRepresentative], mut out: W) -> Result<()> {
    for (k, c) in cycles.iter().enumerate() {
        writeln!(out, "CYCLE id={k} birth={} death={}", c.birth, c.death)?;
        for e in &c.edges {
            writeln!(out, "EDGE {} {} {} {} {}", e.i, e.j, e.weight, e.layer_i, e.layer_j)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_cycles<R: BufRead>(input: R) -> Result<Vec<CycleRepresentative>> {
    let mut cycles: Vec<CycleRepresentative> = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        let n = k + 1;
        let mut parts = line.split_whitespace();
        match parts.next() {
            None => continue,
            Some("CYCLE") => {
                let mut birth = None;
                let mut death = None;
                for p in parts {
                    match p.split_once('=') {
                        Some(("id", _)) => {}
                        Some(("birth", v)) => birth = Some(parse_value(v, n)?),
                        Some(("death", v)) => death = Some(parse_value(v, n)?),
                        _ => return Err(Error::parse(n, format!("unexpected token {p:?}"))),
                    }
                }
                let (Some(birth), Some(death)) = (birth, death) else {
                    return Err(Error::parse(n, "CYCLE needs birth= and death="));
                };
                cycles.push(CycleRepresentative {
                    birth,
                    death,
                    edges: Vec::new(),
                });
            }
            Some("EDGE") => {
                let fields: Vec<&str> = parts.collect();
                if fields.len() != 5 {
                    return Err(Error::parse(n, "EDGE needs 5 fields"));
                }
                let int = |s: &str| s.parse::<usize>().map_err(|_| Error::parse(n, "bad integer"));
                let edge = CycleEdge {
                    i: int(fields[0])?,
                    j: int(fields[1])?,
                    weight: parse_value(fields[2], n)?,
                    layer_i: int(fields[3])?,
                    layer_j: int(fields[4])?,
                };
                cycles
                    .last_mut()
                    .ok_or_else(|| Error::parse(n, "EDGE before any CYCLE"))?
                    .edges
                    .push(edge);
            }
            Some(tok) => return Err(Error::parse(n, format!("unknown record {tok:?}"))),
        }
    }
    Ok(cycles)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Filtration {
        // AB, AC, AD, BC, BD, CD
        let w = DissimilarityMatrix::from_upper(4, &[0.3, 0.8, 0.3, 0.3, 0.8, 0.3]).unwrap();
        build_filtration(&w, 2.0).unwrap()
    }

    #[test]
    fn three_point_zero_dim() {
        let w = DissimilarityMatrix::from_upper(3, &[0.2, 0.5, 0.9]).unwrap();
        let f = build_filtration(&w, 1.0).unwrap();
        let dg = zero_dim_diagram(&f);
        assert_eq!(dg.finite(0), vec![(0.0, 0.2), (0.0, 0.5)]);
        assert_eq!(dg.essential_births(0), vec![0.0]);
        assert!(one_dim_diagram(&f).is_empty());
    }

    #[test]
    fn single_edge() {
        let w = DissimilarityMatrix::from_upper(2, &[0.7]).unwrap();
        let f = build_filtration(&w, 1.0).unwrap();
        let dg = naive_reduce(&f);
        assert_eq!(dg.finite(0), vec![(0.0, 0.7)]);
        assert_eq!(dg.in_dim(1).count(), 0);
    }

    #[test]
    fn square_has_one_loop() {
        let f = square();
        assert_eq!(one_dim_diagram(&f).finite(1), vec![(0.3, 0.8)]);
        let naive = naive_reduce(&f);
        assert_eq!(naive.finite(0), vec![(0.0, 0.3); 3]);
        assert!(naive.same_multiset(&diagram(&f, false)));
    }

    #[test]
    fn square_cycle_is_the_four_sides() {
        let cycles = extract_cycles(&square(), CycleSelection::TopK(1)).unwrap();
        assert_eq!(cycles.len(), 1);
        let c = &cycles[0];
        assert_eq!((c.birth, c.death), (0.3, 0.8));
        let mut edges: Vec<(usize, usize)> = c.edges.iter().map(|e| (e.i, e.j)).collect();
        edges.sort_unstable();
        assert_eq!(edges, vec![(0, 1), (0, 3), (1, 2), (2, 3)]);
        assert!(c.is_closed());
        assert_eq!(c.max_weight(), c.birth);
    }

    #[test]
    fn empty_selection_yields_no_cycles() {
        let cycles = extract_cycles(&square(), CycleSelection::DeathCutoff(0.5)).unwrap();
        assert!(cycles.is_empty());
    }

    #[test]
    fn zero_persistence_dots_kept_on_request() {
        let f = square();
        let all = diagram(&f, true);
        assert!(all.len() > diagram(&f, false).len());
        assert!(all.dots().iter().any(|d| d.persistence() == 0.0));
    }

    #[test]
    fn bottleneck_examples() {
        let a = PersistenceDiagram::new(vec![Dot { dim: 1, birth: 0.0, death: 2.0 }]);
        assert_eq!(bottleneck_distance(&a, &PersistenceDiagram::default(), 1), 1.0);
        assert_eq!(bottleneck_distance(&a, &a, 1), 0.0);
        let e = PersistenceDiagram::new(vec![Dot { dim: 0, birth: 0.0, death: f64::INFINITY }]);
        assert_eq!(bottleneck_distance(&e, &PersistenceDiagram::default(), 0), f64::INFINITY);
        assert_eq!(bottleneck_distance(&e, &e, 0), 0.0);
    }

    #[test]
    fn stability_check_on_identical_matrices() {
        let f = DissimilarityMatrix::from_upper(4, &[0.3, 0.8, 0.3, 0.3, 0.8, 0.3]).unwrap();
        assert_eq!(diagram_stability_check(&f, &f, 2.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn diagram_csv_round_trip() {
        let dg = diagram(&square(), false);
        let mut buf = Vec::new();
        write_diagram_csv(&dg, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("0,0,inf"));
        assert_eq!(read_diagram_csv(&buf[..]).unwrap(), dg);
    }

    #[test]
    fn cycle_file_round_trip() {
        let cycles = extract_cycles(&square(), CycleSelection::TopK(5)).unwrap();
        let mut buf = Vec::new();
        write_cycles(&cycles, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("CYCLE id=0 birth=0.3 death=0.8\nEDGE "));
        assert_eq!(read_cycles(&buf[..]).unwrap(), cycles);
        assert!(read_cycles(&b"EDGE 0 1 0.3 0 0\n"[..]).is_err());
    }
}
