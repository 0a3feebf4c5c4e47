//! One-dimensional persistence by reducing the coboundary matrix.
//!
//! The coboundary matrix is the boundary matrix anti-transposed: its columns
//! are edges taken in reverse filtration order, its rows are triangles, and
//! "lowest" means earliest in the filtration. Edges that kill a connected
//! component are cleared up front (the twist), because their coboundary
//! columns are known to reduce to zero. A nonzero reduced column for edge `e`
//! with pivot triangle `t` is the persistence pair `(e, t)`: `e` gives birth
//! to a 1-cycle that `t` fills in.

use std::time::{Duration, Instant};

use super::bittree::BitTree;
use super::PersistencePair;
use crate::complex::Filtration;

const NONE: u32 = u32::MAX;

/// Lookup tables over a filtration: global index of every edge, triangle
/// faces and the edge-to-triangle incidence (CSR, triangles ascending).
pub(crate) struct SimplexIndex {
    pub m: usize,
    /// `edge_at[i * m + j]`: global index of edge `{i, j}` or `NONE`.
    edge_at: Vec<u32>,
    /// Global indices of the edges, ascending.
    pub edges: Vec<u32>,
    /// Local edge number of a global index (edges only).
    local_edge: Vec<u32>,
    cob_offsets: Vec<usize>,
    cob_rows: Vec<u32>,
}

impl SimplexIndex {
    pub fn new(f: &Filtration) -> Self {
        let m = f.neuron_count();
        let n = f.len();
        let mut edge_at = vec![NONE; m * m];
        let mut edges = Vec::new();
        let mut local_edge = vec![NONE; n];
        let mut degree = Vec::new();
        for (idx, s) in f.simplices().iter().enumerate() {
            if s.dim() == 1 {
                let v = s.vertices();
                let (a, b) = (v[0] as usize, v[1] as usize);
                edge_at[a * m + b] = idx as u32;
                edge_at[b * m + a] = idx as u32;
                local_edge[idx] = edges.len() as u32;
                edges.push(idx as u32);
                degree.push(0usize);
            }
        }
        let mut index = Self {
            m,
            edge_at,
            edges,
            local_edge,
            cob_offsets: Vec::new(),
            cob_rows: Vec::new(),
        };
        for s in f.simplices().iter().filter(|s| s.dim() == 2) {
            for e in index.triangle_edges(s.vertices()) {
                degree[index.local_edge[e as usize] as usize] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(degree.len() + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets.clone();
        let mut rows = vec![0u32; *offsets.last().unwrap()];
        for (idx, s) in f.simplices().iter().enumerate() {
            if s.dim() == 2 {
                for e in index.triangle_edges(s.vertices()) {
                    let local = index.local_edge[e as usize] as usize;
                    rows[fill[local]] = idx as u32;
                    fill[local] += 1;
                }
            }
        }
        index.cob_offsets = offsets;
        index.cob_rows = rows;
        index
    }

    pub fn edge(&self, a: usize, b: usize) -> u32 {
        self.edge_at[a * self.m + b]
    }

    /// Global indices of the three edges of triangle `v`.
    pub fn triangle_edges(&self, v: &[u32]) -> [u32; 3] {
        let (a, b, c) = (v[0] as usize, v[1] as usize, v[2] as usize);
        [self.edge(a, b), self.edge(a, c), self.edge(b, c)]
    }

    pub fn local_edge(&self, global: usize) -> usize {
        self.local_edge[global] as usize
    }

    /// Cofacet triangles of the `local`-th edge, ascending.
    pub fn coboundary(&self, local: usize) -> &[u32] {
        &self.cob_rows[self.cob_offsets[local]..self.cob_offsets[local + 1]]
    }
}

pub(crate) struct CohomologyOutput {
    pub pairs: Vec<PersistencePair>,
    pub index: SimplexIndex,
    /// Time spent building the coboundary matrix and reducing it.
    pub elapsed: Duration,
}

/// Reduces the dimension-1 coboundary matrix, clearing the columns of edges
/// listed in `cleared` (global indices of edges that killed a component).
pub(crate) fn one_dim_cohomology(f: &Filtration, cleared: &[usize]) -> CohomologyOutput {
    let start = Instant::now();
    let index = SimplexIndex::new(f);
    let n = f.len();
    let simplices = f.simplices();

    let mut skip = vec![false; index.edges.len()];
    for &e in cleared {
        skip[index.local_edge(e)] = true;
    }

    // keys are reversed so the bit tree's maximum is the earliest triangle
    let key = |t: u32| n - 1 - t as usize;
    let mut work = BitTree::new(n);
    let mut owner = vec![NONE; n];
    let mut reduced: Vec<Vec<u32>> = Vec::new();
    let mut pairs = Vec::new();

    for local in (0..index.edges.len()).rev() {
        if skip[local] {
            continue;
        }
        let cob = index.coboundary(local);
        let e = index.edges[local] as usize;
        if cob.is_empty() {
            pairs.push(PersistencePair::essential(1, e, simplices[e].filter));
            continue;
        }
        // apparent pivot: the earliest cofacet is free, no additions needed
        let first = cob[0] as usize;
        if owner[first] == NONE {
            owner[first] = reduced.len() as u32;
            reduced.push(cob.to_vec());
            pairs.push(PersistencePair::finite(1, e, first, simplices));
            continue;
        }
        for &t in cob {
            work.flip(key(t));
        }
        let mut pivot = None;
        while let Some(top) = work.max() {
            let t = n - 1 - top;
            match owner[t] {
                NONE => {
                    pivot = Some(t);
                    break;
                }
                col => {
                    for &r in &reduced[col as usize] {
                        work.flip(key(r));
                    }
                }
            }
        }
        match pivot {
            None => pairs.push(PersistencePair::essential(1, e, simplices[e].filter)),
            Some(t) => {
                let mut column = Vec::with_capacity(work.count());
                work.drain_desc(&mut column);
                for r in column.iter_mut() {
                    *r = (n - 1 - *r as usize) as u32;
                }
                owner[t] = reduced.len() as u32;
                reduced.push(column);
                pairs.push(PersistencePair::finite(1, e, t, simplices));
            }
        }
    }
    pairs.reverse();
    CohomologyOutput {
        pairs,
        index,
        elapsed: start.elapsed(),
    }
}
