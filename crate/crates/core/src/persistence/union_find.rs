//! Zero-dimensional persistence by Kruskal-style union-find.

use super::PersistencePair;
use crate::complex::Filtration;

#[derive(Clone, Debug)]
struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
    /// Earliest simplex (vertex) index of each root's component.
    oldest: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
            oldest: (0..n).collect(),
        }
    }

    fn find(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    /// Merges the two roots and returns the `oldest` marker of the component
    /// that dies (the younger one).
    fn union_roots(&mut self, a: usize, b: usize) -> usize {
        let (old_a, old_b) = (self.oldest[a], self.oldest[b]);
        let (survivor_oldest, dying) = if old_a < old_b { (old_a, old_b) } else { (old_b, old_a) };
        let (hi, lo) = if self.rank[a] >= self.rank[b] { (a, b) } else { (b, a) };
        self.parent[lo] = hi;
        if self.rank[hi] == self.rank[lo] {
            self.rank[hi] = self.rank[hi].saturating_add(1);
        }
        self.oldest[hi] = survivor_oldest;
        dying
    }
}

/// All 0-dimensional pairs, including zero-persistence ones. Under the elder
/// rule the component whose first vertex enters later is the one that dies.
pub(crate) fn zero_dim_pairs(f: &Filtration) -> Vec<PersistencePair> {
    let simplices = f.simplices();
    let m = f.neuron_count();
    let mut sets = DisjointSet::new(m);
    let mut pairs = Vec::new();
    for (idx, s) in simplices.iter().enumerate() {
        match s.dim() {
            0 => {
                sets.oldest[s.vertices()[0] as usize] = idx;
            }
            1 => {
                let v = s.vertices();
                let (ra, rb) = (sets.find(v[0] as usize), sets.find(v[1] as usize));
                if ra != rb {
                    let dying = sets.union_roots(ra, rb);
                    pairs.push(PersistencePair {
                        dim: 0,
                        birth_simplex: dying,
                        death_simplex: Some(idx),
                        birth: simplices[dying].filter,
                        death: s.filter,
                    });
                }
            }
            _ => {}
        }
    }
    for v in 0..m {
        if sets.find(v) == v {
            let born = sets.oldest[v];
            pairs.push(PersistencePair {
                dim: 0,
                birth_simplex: born,
                death_simplex: None,
                birth: simplices[born].filter,
                death: f64::INFINITY,
            });
        }
    }
    pairs
}
