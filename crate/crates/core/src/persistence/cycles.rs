//! Representative cycles through a pruned boundary matrix.
//!
//! Phase one (coboundary reduction) yields every 1-dimensional pair and the
//! largest finite death `ε*`. Phase two keeps only the triangles that phase
//! one identified as deaths and whose value is at most `ε* + slack`, reduces
//! that sparse boundary matrix left to right, and reads each selected cycle
//! off the reduced column of its death triangle. Columns of triangles that
//! do not kill a cycle reduce to zero in the full matrix and are never added
//! to other columns, so dropping them leaves every remaining reduced column
//! unchanged.

use std::time::{Duration, Instant};

use super::bittree::BitTree;
use super::cohomology::{one_dim_cohomology, CohomologyOutput};
use super::union_find::zero_dim_pairs;
use super::{CycleEdge, CycleRepresentative, PersistencePair};
use crate::complex::Filtration;
use crate::error::{Error, Result};

/// Slack added to `ε*` when pruning, so death triangles at exactly `ε*` stay.
pub const PRUNE_SLACK: f64 = 1e-9;

/// Which 1-dimensional dots to extract cycles for.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CycleSelection {
    /// The `k` dots with the highest persistence.
    TopK(usize),
    /// Every dot dying no later than the given value.
    DeathCutoff(f64),
}

/// Timing and size statistics of one two-phase run.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoPhaseStats {
    pub num_simplices: usize,
    /// Largest finite 1-dimensional death (`ε*`), `None` when there is none.
    pub max_death: Option<f64>,
    pub coboundary_time: Duration,
    pub boundary_time: Duration,
    /// Nonzero entries of the pruned boundary matrix before reduction.
    pub pruned_nonzeros: usize,
    /// Nonzero entries of the full boundary matrix (edges and triangles).
    pub full_nonzeros: usize,
}

pub(crate) struct TwoPhase {
    pub cycles: Vec<CycleRepresentative>,
    pub stats: TwoPhaseStats,
}

fn persistence_order(a: &PersistencePair, b: &PersistencePair) -> std::cmp::Ordering {
    b.persistence()
        .total_cmp(&a.persistence())
        .then(a.death_simplex.cmp(&b.death_simplex))
}

/// Runs both phases. With `selection == None` every finite positive-persistence
/// dot gets a cycle (used for benchmarking the full pruned reduction).
pub(crate) fn two_phase(f: &Filtration, selection: Option<CycleSelection>) -> Result<TwoPhase> {
    let cleared: Vec<usize> = zero_dim_pairs(f)
        .iter()
        .filter_map(|p| p.death_simplex)
        .collect();
    let CohomologyOutput {
        pairs,
        index,
        elapsed: coboundary_time,
    } = one_dim_cohomology(f, &cleared);
    let simplices = f.simplices();

    let finite: Vec<&PersistencePair> = pairs.iter().filter(|p| p.death_simplex.is_some()).collect();
    let max_death = finite.iter().map(|p| p.death).reduce(f64::max);

    let mut selected: Vec<&PersistencePair> = finite
        .iter()
        .copied()
        .filter(|p| p.persistence() > 0.0)
        .collect();
    selected.sort_by(|a, b| persistence_order(a, b));
    match selection {
        Some(CycleSelection::TopK(k)) => selected.truncate(k),
        Some(CycleSelection::DeathCutoff(c)) => selected.retain(|p| p.death <= c),
        None => {}
    }

    let (_, n_edges, n_triangles) = f.counts();
    let full_nonzeros = 2 * n_edges + 3 * n_triangles;

    let start = Instant::now();
    let limit = max_death.map_or(f64::NEG_INFINITY, |d| d + PRUNE_SLACK);
    let mut columns: Vec<(usize, usize)> = finite
        .iter()
        .filter(|p| p.death <= limit)
        .map(|p| (p.death_simplex.unwrap(), p.birth_simplex))
        .collect();
    columns.sort_unstable();
    let pruned_nonzeros = 3 * columns.len();
    // columns after the last selected death cannot change earlier ones
    let last_needed = selected.iter().filter_map(|p| p.death_simplex).max();
    if let Some(last) = last_needed {
        columns.retain(|(t, _)| *t <= last);
    } else {
        columns.clear();
    }

    let mut work = BitTree::new(index.edges.len());
    let mut owner = vec![u32::MAX; index.edges.len()];
    let mut reduced: Vec<Vec<u32>> = Vec::with_capacity(columns.len());
    let mut column_of_triangle = std::collections::HashMap::with_capacity(columns.len());
    for &(t, birth) in &columns {
        for e in index.triangle_edges(simplices[t].vertices()) {
            work.flip(index.local_edge(e as usize));
        }
        loop {
            let Some(top) = work.max() else {
                return Err(Error::Numeric(format!(
                    "death triangle {t} reduced to zero in the pruned boundary matrix"
                )));
            };
            match owner[top] {
                u32::MAX => {
                    if index.edges[top] as usize != birth {
                        return Err(Error::Numeric(format!(
                            "pruned boundary pivot of triangle {t} disagrees with coboundary pairing"
                        )));
                    }
                    owner[top] = reduced.len() as u32;
                    break;
                }
                col => {
                    for &r in &reduced[col as usize] {
                        work.flip(r as usize);
                    }
                }
            }
        }
        let mut col = Vec::with_capacity(work.count());
        work.drain_desc(&mut col);
        column_of_triangle.insert(t, reduced.len());
        reduced.push(col);
    }
    let boundary_time = start.elapsed();

    let layer_of = f.layer_of();
    let cycles = selected
        .iter()
        .map(|p| {
            let col = &reduced[column_of_triangle[&p.death_simplex.unwrap()]];
            let mut edges: Vec<CycleEdge> = col
                .iter()
                .rev()
                .map(|&local| {
                    let s = &simplices[index.edges[local as usize] as usize];
                    let (i, j) = (s.vertices()[0] as usize, s.vertices()[1] as usize);
                    CycleEdge {
                        i,
                        j,
                        weight: s.filter,
                        layer_i: layer_of[i],
                        layer_j: layer_of[j],
                    }
                })
                .collect();
            edges.shrink_to_fit();
            CycleRepresentative {
                birth: p.birth,
                death: p.death,
                edges,
            }
        })
        .collect();

    Ok(TwoPhase {
        cycles,
        stats: TwoPhaseStats {
            num_simplices: f.len(),
            max_death,
            coboundary_time,
            boundary_time,
            pruned_nonzeros,
            full_nonzeros,
        },
    })
}
