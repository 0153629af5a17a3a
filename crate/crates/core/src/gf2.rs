//! Sparse GF(2) vectors and an incremental echelon form.

/// Symmetric difference of two sorted index lists.
pub fn xor_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Rows kept in echelon form: every row's smallest column is its pivot and no
/// two rows share a pivot.
#[derive(Debug, Clone)]
pub struct SparseEchelon {
    columns: usize,
    rows: Vec<Vec<u32>>,
    pivot_row: Vec<u32>,
}

const NO_ROW: u32 = u32::MAX;

impl SparseEchelon {
    pub fn new(columns: usize) -> Self {
        Self { columns, rows: Vec::new(), pivot_row: vec![NO_ROW; columns] }
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn is_pivot(&self, column: u32) -> bool {
        self.pivot_row[column as usize] != NO_ROW
    }

    /// Reduces `v` until its leading column is not a pivot. Empty means `v`
    /// lies in the row space.
    pub fn reduce(&self, mut v: Vec<u32>) -> Vec<u32> {
        while let Some(&lead) = v.first() {
            let r = self.pivot_row[lead as usize];
            if r == NO_ROW {
                break;
            }
            v = xor_sorted(&v, &self.rows[r as usize]);
        }
        v
    }

    /// Adds `v` if it is independent of the current rows.
    pub fn insert(&mut self, v: Vec<u32>) -> bool {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        let reduced = self.reduce(v);
        match reduced.first() {
            None => false,
            Some(&lead) => {
                self.pivot_row[lead as usize] = self.rows.len() as u32;
                self.rows.push(reduced);
                true
            }
        }
    }

    /// Basis of the orthogonal complement of the row space, one vector per
    /// free column, as dense bitsets.
    pub fn complement_basis(&self) -> Vec<BitVec> {
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|&r| std::cmp::Reverse(self.rows[r][0]));
        (0..self.columns as u32)
            .filter(|&c| !self.is_pivot(c))
            .map(|free| {
                let mut s = BitVec::zeros(self.columns);
                s.set(free as usize, true);
                // Each row's tail holds larger columns only, so decreasing
                // pivot order sees every dependency already settled.
                for &r in &order {
                    let row = &self.rows[r];
                    let parity = row[1..].iter().filter(|&&c| s.get(c as usize)).count() % 2 == 1;
                    s.set(row[0] as usize, parity);
                }
                s
            })
            .collect()
    }
}

/// Dense bitset used for de Pina witnesses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Parity of the overlap with a sparse index list.
    pub fn dot_sparse(&self, indices: &[u32]) -> bool {
        indices.iter().filter(|&&i| self.get(i as usize)).count() % 2 == 1
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + t)
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_of_sorted_lists() {
        assert_eq!(xor_sorted(&[1, 3, 5], &[3, 4]), vec![1, 4, 5]);
        assert!(xor_sorted(&[2, 7], &[2, 7]).is_empty());
    }

    #[test]
    fn dependent_rows_are_rejected() {
        let mut m = SparseEchelon::new(4);
        assert!(m.insert(vec![0, 1]));
        assert!(m.insert(vec![1, 2]));
        assert!(!m.insert(vec![0, 2]));
        assert!(m.insert(vec![3]));
        assert_eq!(m.rank(), 3);
    }

    #[test]
    fn complement_is_orthogonal_to_rows() {
        let rows = [vec![0, 2, 5], vec![1, 2], vec![2, 3, 6], vec![4, 5, 6]];
        let mut m = SparseEchelon::new(7);
        for r in rows.iter() {
            m.insert(r.clone());
        }
        let comp = m.complement_basis();
        assert_eq!(comp.len(), 7 - m.rank());
        for s in &comp {
            for r in rows.iter() {
                assert!(!s.dot_sparse(r));
            }
        }
    }

    #[test]
    fn bitvec_ones() {
        let mut b = BitVec::zeros(130);
        for i in [0, 63, 64, 129] {
            b.set(i, true);
        }
        assert_eq!(b.ones().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
    }
}
