//! Fixed-capacity bitset with a 64-ary summary tree for the working column of
//! a matrix reduction: O(1) flips (plus summary maintenance) and a
//! maximum-set-index query in one word scan per level.

#[derive(Clone, Debug)]
pub struct BitTree {
    /// `levels[0]` holds the bits; `levels[k + 1]` has bit `w` set iff word
    /// `w` of `levels[k]` is nonzero. The last level is a single word.
    levels: Vec<Vec<u64>>,
    len: usize,
}

impl BitTree {
    pub fn new(capacity: usize) -> Self {
        let mut levels = Vec::new();
        let mut size = capacity.max(1);
        loop {
            let words = size.div_ceil(64);
            levels.push(vec![0u64; words]);
            if words == 1 {
                break;
            }
            size = words;
        }
        Self { levels, len: 0 }
    }

    pub fn capacity(&self) -> usize {
        self.levels[0].len() * 64
    }

    /// Number of set bits.
    pub fn count(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, index: usize) -> bool {
        self.levels[0][index / 64] >> (index % 64) & 1 == 1
    }

    pub fn flip(&mut self, index: usize) {
        let mut idx = index;
        let word = &mut self.levels[0][idx / 64];
        let was_set = *word >> (idx % 64) & 1 == 1;
        *word ^= 1u64 << (idx % 64);
        if was_set {
            self.len -= 1;
        } else {
            self.len += 1;
        }
        // propagate emptiness changes upwards
        for level in 1..self.levels.len() {
            let child_word = self.levels[level - 1][idx / 64];
            let parent = idx / 64;
            let bit = 1u64 << (parent % 64);
            let slot = &mut self.levels[level][parent / 64];
            let marked = *slot & bit != 0;
            if (child_word != 0) == marked {
                break;
            }
            *slot ^= bit;
            idx = parent;
        }
    }

    /// Largest set index, if any.
    pub fn max(&self) -> Option<usize> {
        if self.len == 0 {
            return None;
        }
        let mut idx = 0usize;
        for level in self.levels.iter().rev() {
            let word = level[idx];
            debug_assert!(word != 0);
            idx = idx * 64 + (63 - word.leading_zeros() as usize);
        }
        Some(idx)
    }

    /// Removes every set bit, appending them to `out` in decreasing order.
    pub fn drain_desc(&mut self, out: &mut Vec<u32>) {
        while let Some(i) = self.max() {
            out.push(i as u32);
            self.flip(i);
        }
    }

    pub fn clear(&mut self) {
        while let Some(i) = self.max() {
            self.flip(i);
        }
    }
}
