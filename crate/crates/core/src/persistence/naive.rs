//! Textbook left-to-right reduction of the full boundary matrix over Z/2.
//! Slow, explicit, and independent of the optimized paths; it is the
//! reference the other routines are checked against.

use std::collections::HashMap;

use super::PersistencePair;
use crate::complex::Filtration;

/// A reduced boundary matrix: sparse sorted columns (row indices over Z/2)
/// and the row-to-column pivot map.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReducedMatrix {
    pub columns: Vec<Vec<usize>>,
    pub pivot_of: HashMap<usize, usize>,
}

impl ReducedMatrix {
    pub fn low(&self, col: usize) -> Option<usize> {
        self.columns[col].last().copied()
    }
}

/// Symmetric difference of two sorted index lists.
fn add_columns(target: &[usize], source: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(target.len() + source.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() && j < source.len() {
        match target[i].cmp(&source[j]) {
            std::cmp::Ordering::Less => {
                out.push(target[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(source[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&target[i..]);
    out.extend_from_slice(&source[j..]);
    out
}

/// The boundary matrix of `f` in filtration order.
pub fn boundary_matrix(f: &Filtration) -> Vec<Vec<usize>> {
    let mut position: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut columns = Vec::with_capacity(f.len());
    for (idx, s) in f.simplices().iter().enumerate() {
        let v = s.vertices();
        let mut col: Vec<usize> = (0..v.len())
            .filter(|_| v.len() > 1)
            .map(|skip| {
                let face: Vec<u32> = v
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != skip)
                    .map(|(_, x)| *x)
                    .collect();
                position[&face]
            })
            .collect();
        col.sort_unstable();
        position.insert(v.to_vec(), idx);
        columns.push(col);
    }
    columns
}

/// Reduces the full boundary matrix of `f`.
pub fn reduce_boundary(f: &Filtration) -> ReducedMatrix {
    let mut columns = boundary_matrix(f);
    let mut pivot_of: HashMap<usize, usize> = HashMap::new();
    for j in 0..columns.len() {
        while let Some(&low) = columns[j].last() {
            match pivot_of.get(&low) {
                Some(&i) => columns[j] = add_columns(&columns[j], &columns[i]),
                None => {
                    pivot_of.insert(low, j);
                    break;
                }
            }
        }
    }
    ReducedMatrix { columns, pivot_of }
}

/// Every 0- and 1-dimensional pair read from the reduced boundary matrix,
/// including zero-persistence and essential ones.
pub(crate) fn naive_pairs(f: &Filtration) -> (Vec<PersistencePair>, ReducedMatrix) {
    let reduced = reduce_boundary(f);
    let simplices = f.simplices();
    let mut pairs = Vec::new();
    for (birth, s) in simplices.iter().enumerate() {
        if s.dim() > 1 {
            continue;
        }
        if let Some(&death) = reduced.pivot_of.get(&birth) {
            pairs.push(PersistencePair::finite(s.dim(), birth, death, simplices));
        } else if reduced.columns[birth].is_empty() {
            pairs.push(PersistencePair::essential(s.dim(), birth, s.filter));
        }
    }
    (pairs, reduced)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_addition_is_symmetric_difference() {
        assert_eq!(add_columns(&[1, 3, 5], &[3, 4]), vec![1, 4, 5]);
        assert_eq!(add_columns(&[2], &[2]), Vec::<usize>::new());
    }
}
