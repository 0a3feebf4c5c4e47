//! Vietoris–Rips filtrations up to dimension 2.
//!
//! Vertices enter at 0, an edge at its dissimilarity, and a triangle at the
//! largest of its three edge values. Simplices are totally ordered by
//! `(filter value, dimension, vertex tuple)`, which makes every face precede
//! its cofaces and fixes a reproducible tie order.

use std::cmp::Ordering;
use std::io::Write;

use crate::error::{Error, Result};
use crate::trace::DissimilarityMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Simplex {
    verts: [u32; 3],
    dim: u8,
    pub filter: f64,
}

impl Simplex {
    pub fn vertex(v: usize) -> Self {
        Self {
            verts: [v as u32, 0, 0],
            dim: 0,
            filter: 0.0,
        }
    }

    pub fn edge(a: usize, b: usize, filter: f64) -> Self {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        Self {
            verts: [a as u32, b as u32, 0],
            dim: 1,
            filter,
        }
    }

    pub fn triangle(mut v: [usize; 3], filter: f64) -> Self {
        v.sort_unstable();
        Self {
            verts: [v[0] as u32, v[1] as u32, v[2] as u32],
            dim: 2,
            filter,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// Vertex indices, strictly increasing.
    pub fn vertices(&self) -> &[u32] {
        &self.verts[..=self.dim as usize]
    }

    /// The filtration order: filter value, then dimension, then vertices.
    pub fn order(&self, other: &Self) -> Ordering {
        self.filter
            .total_cmp(&other.filter)
            .then(self.dim.cmp(&other.dim))
            .then_with(|| self.vertices().cmp(other.vertices()))
    }
}

#[derive(Clone, Debug)]
pub struct Filtration {
    simplices: Vec<Simplex>,
    neuron_count: usize,
    cutoff: f64,
    layer_of: Vec<usize>,
    weights: Vec<f64>,
}

impl Filtration {
    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn neuron_count(&self) -> usize {
        self.neuron_count
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn layer_of(&self) -> &[usize] {
        &self.layer_of
    }

    /// Dissimilarity between two neurons, whether or not the edge passed the
    /// cutoff.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.neuron_count + j]
    }

    /// Vertex, edge and triangle counts.
    pub fn counts(&self) -> (usize, usize, usize) {
        let mut c = [0usize; 3];
        for s in &self.simplices {
            c[s.dim()] += 1;
        }
        (c[0], c[1], c[2])
    }

    /// Debug dump as `dim,v0,v1,v2,filter`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["dim", "v0", "v1", "v2", "filter"])?;
        for s in &self.simplices {
            let mut rec = vec![s.dim().to_string()];
            for k in 0..3 {
                rec.push(s.vertices().get(k).map_or(String::new(), u32::to_string));
            }
            rec.push(s.filter.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Builds the Rips filtration of `w`, keeping edges and triangles whose value
/// does not exceed `cutoff`.
pub fn build_filtration(w: &DissimilarityMatrix, cutoff: f64) -> Result<Filtration> {
    let m = w.size();
    if m < 2 {
        return Err(Error::TooSmall {
            what: "neurons in a filtration",
            needed: 2,
            got: m,
        });
    }
    if !(cutoff > 0.0) {
        return Err(Error::InvalidConfig(format!("cutoff must be positive, got {cutoff}")));
    }

    let mut edges: Vec<Simplex> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let v = w.get(i, j);
            if v <= cutoff {
                edges.push(Simplex::edge(i, j, v));
            }
        }
    }
    edges.sort_unstable_by(Simplex::order);

    // Rank of each edge in filtration order; a triangle is emitted once, from
    // its latest edge.
    let mut rank = vec![u32::MAX; m * m];
    for (r, e) in edges.iter().enumerate() {
        let (a, b) = (e.verts[0] as usize, e.verts[1] as usize);
        rank[a * m + b] = r as u32;
        rank[b * m + a] = r as u32;
    }
    let mut triangles = Vec::new();
    for (r, e) in edges.iter().enumerate() {
        let r = r as u32;
        let (a, b) = (e.verts[0] as usize, e.verts[1] as usize);
        let (row_a, row_b) = (&rank[a * m..(a + 1) * m], &rank[b * m..(b + 1) * m]);
        for k in 0..m {
            if row_a[k] < r && row_b[k] < r {
                triangles.push(Simplex::triangle([a, b, k], e.filter));
            }
        }
    }
    triangles.sort_unstable_by(Simplex::order);

    let mut simplices = Vec::with_capacity(m + edges.len() + triangles.len());
    simplices.extend((0..m).map(Simplex::vertex));
    merge_sorted(&mut simplices, edges, triangles);

    Ok(Filtration {
        simplices,
        neuron_count: m,
        cutoff,
        layer_of: w.layer_of().to_vec(),
        weights: w.values().to_vec(),
    })
}

fn merge_sorted(out: &mut Vec<Simplex>, a: Vec<Simplex>, b: Vec<Simplex>) {
    let mut ia = a.into_iter().peekable();
    let mut ib = b.into_iter().peekable();
    loop {
        let take_a = match (ia.peek(), ib.peek()) {
            (Some(x), Some(y)) => x.order(y) != Ordering::Greater,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => break,
        };
        out.push(if take_a { ia.next() } else { ib.next() }.unwrap());
    }
}

pub fn simplex_counts(f: &Filtration) -> (usize, usize, usize) {
    f.counts()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> DissimilarityMatrix {
        DissimilarityMatrix::from_upper(3, &[0.2, 0.5, 0.9]).unwrap()
    }

    #[test]
    fn three_point_example() {
        let f = build_filtration(&abc(), 1.0).unwrap();
        assert_eq!(f.counts(), (3, 3, 1));
        let tri = f.simplices().last().unwrap();
        assert_eq!(tri.dim(), 2);
        assert_eq!(tri.filter, 0.9);
        // the triangle comes right after its latest edge
        assert_eq!(f.simplices()[f.len() - 2].vertices(), &[1, 2]);
    }

    #[test]
    fn cutoff_drops_long_edge_and_triangle() {
        let f = build_filtration(&abc(), 0.6).unwrap();
        assert_eq!(f.counts(), (3, 2, 0));
    }

    #[test]
    fn cutoff_below_every_edge_leaves_vertices() {
        assert_eq!(simplex_counts(&build_filtration(&abc(), 0.1).unwrap()), (3, 0, 0));
    }

    #[test]
    fn four_points_give_four_triangles() {
        let w = DissimilarityMatrix::from_upper(4, &[0.1, 0.6, 0.3, 0.4, 0.2, 0.5]).unwrap();
        let f = build_filtration(&w, 2.0).unwrap();
        assert_eq!(f.counts(), (4, 6, 4));
        for s in f.simplices().iter().filter(|s| s.dim() == 2) {
            let v: Vec<usize> = s.vertices().iter().map(|&x| x as usize).collect();
            let expect = w.get(v[0], v[1]).max(w.get(v[0], v[2])).max(w.get(v[1], v[2]));
            assert_eq!(s.filter, expect);
        }
    }

    #[test]
    fn ties_order_by_dimension_then_vertices() {
        let w = DissimilarityMatrix::from_upper(3, &[0.5, 0.5, 0.5]).unwrap();
        let f = build_filtration(&w, 1.0).unwrap();
        let order: Vec<(usize, Vec<u32>)> = f
            .simplices()
            .iter()
            .map(|s| (s.dim(), s.vertices().to_vec()))
            .collect();
        assert_eq!(
            order,
            vec![
                (0, vec![0]),
                (0, vec![1]),
                (0, vec![2]),
                (1, vec![0, 1]),
                (1, vec![0, 2]),
                (1, vec![1, 2]),
                (2, vec![0, 1, 2]),
            ]
        );
    }

    #[test]
    fn rejects_tiny_or_bad_input() {
        let one = DissimilarityMatrix::from_upper(1, &[]).unwrap();
        assert!(build_filtration(&one, 1.0).is_err());
        assert!(build_filtration(&abc(), 0.0).is_err());
    }

    #[test]
    fn csv_dump_leaves_unused_slots_blank() {
        let f = build_filtration(&abc(), 1.0).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "dim,v0,v1,v2,filter");
        assert_eq!(lines[1], "0,0,,,0");
        assert_eq!(lines[4], "1,0,1,,0.2");
        assert_eq!(lines[7], "2,0,1,2,0.9");
    }
}
