//! Exact bottleneck distance by binary search over candidate distances with a
//! Hopcroft–Karp perfect-matching test.

use std::collections::VecDeque;

const FREE: usize = usize::MAX;

fn linf(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn half_persistence(p: (f64, f64)) -> f64 {
    (p.1 - p.0) / 2.0
}

/// Maximum matching size of a bipartite graph with `adj[left] = rights`.
fn hopcroft_karp(adj: &[Vec<usize>], right_count: usize) -> usize {
    let left_count = adj.len();
    let mut match_left = vec![FREE; left_count];
    let mut match_right = vec![FREE; right_count];
    let mut dist = vec![0usize; left_count];
    let mut matched = 0;
    loop {
        // layered BFS from every free left vertex
        let mut queue = VecDeque::new();
        for u in 0..left_count {
            if match_left[u] == FREE {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut reachable_free = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match match_right[v] {
                    FREE => reachable_free = true,
                    w if dist[w] == usize::MAX => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        if !reachable_free {
            return matched;
        }
        let mut next = vec![0usize; left_count];
        for u in 0..left_count {
            if match_left[u] == FREE
                && augment(u, adj, &mut match_left, &mut match_right, &mut dist, &mut next)
            {
                matched += 1;
            }
        }
    }
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    match_left: &mut [usize],
    match_right: &mut [usize],
    dist: &mut [usize],
    next: &mut [usize],
) -> bool {
    while next[u] < adj[u].len() {
        let v = adj[u][next[u]];
        next[u] += 1;
        let w = match_right[v];
        let ok = w == FREE
            || (dist[w] == dist[u] + 1 && augment(w, adj, match_left, match_right, dist, next));
        if ok {
            match_left[u] = v;
            match_right[v] = u;
            return true;
        }
    }
    dist[u] = usize::MAX;
    false
}

/// Whether every dot can be matched within `eps`.
///
/// Left vertices: dots of `a`, then diagonal copies of the dots of `b`.
/// Right vertices: dots of `b`, then diagonal copies of the dots of `a`.
fn feasible(a: &[(f64, f64)], b: &[(f64, f64)], eps: f64) -> bool {
    let (na, nb) = (a.len(), b.len());
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); na + nb];
    for (i, &p) in a.iter().enumerate() {
        for (j, &q) in b.iter().enumerate() {
            if linf(p, q) <= eps {
                adj[i].push(j);
            }
        }
        if half_persistence(p) <= eps {
            adj[i].push(nb + i);
        }
    }
    for (j, &q) in b.iter().enumerate() {
        let row = &mut adj[na + j];
        if half_persistence(q) <= eps {
            row.push(j);
        }
        row.extend(nb..nb + na);
    }
    hopcroft_karp(&adj, nb + na) == na + nb
}

/// Bottleneck distance between two multisets of finite dots.
pub(crate) fn finite_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    // diagonal dots match the diagonal at zero cost
    let a: Vec<(f64, f64)> = a.iter().copied().filter(|p| p.1 > p.0).collect();
    let b: Vec<(f64, f64)> = b.iter().copied().filter(|p| p.1 > p.0).collect();
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let mut candidates = vec![0.0];
    for &p in &a {
        candidates.push(half_persistence(p));
        candidates.extend(b.iter().map(|&q| linf(p, q)));
    }
    candidates.extend(b.iter().map(|&q| half_persistence(q)));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // the largest candidate is always feasible
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if feasible(&a, &b, candidates[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    candidates[lo]
}

/// Distance contributed by essential dots: matched by sorted birth, infinite
/// when the counts differ.
pub(crate) fn essential_bottleneck(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_sets_are_at_zero() {
        let a = [(0.1, 0.5), (0.2, 0.9)];
        assert_eq!(finite_bottleneck(&a, &a), 0.0);
    }

    #[test]
    fn lone_dot_goes_to_diagonal() {
        assert_eq!(finite_bottleneck(&[(0.0, 2.0)], &[]), 1.0);
        assert_eq!(finite_bottleneck(&[], &[(0.0, 2.0)]), 1.0);
    }

    #[test]
    fn small_mixed_example() {
        let d = finite_bottleneck(&[(0.0, 1.0), (0.0, 3.0)], &[(0.5, 3.2)]);
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn essential_counts_must_agree() {
        assert_eq!(essential_bottleneck(&[0.0], &[]), f64::INFINITY);
        assert_eq!(essential_bottleneck(&[0.0, 0.5], &[0.25, 0.0]), 0.25);
    }

    #[test]
    fn matching_counts_simple_graphs() {
        let adj = vec![vec![0, 1], vec![0], vec![1]];
        assert_eq!(hopcroft_karp(&adj, 2), 2);
        let adj = vec![vec![1], vec![0], vec![2]];
        assert_eq!(hopcroft_karp(&adj, 3), 3);
    }
}
