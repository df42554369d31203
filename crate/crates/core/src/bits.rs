//! Packed GF(2) bit vectors and row-echelon solving.
//!
//! Everything downstream (Pauli algebra, group membership, frame
//! syndromes) reduces to XOR and parity-of-AND on machine words, so the
//! representation is a plain `Vec<u64>` with an explicit logical length.

const WORD_BITS: usize = 64;

/// A fixed-length bit vector over GF(2), packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD_BITS)],
            len,
        }
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut b = Self::zeros(len);
        for &i in indices {
            b.set(i, true);
        }
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn xor_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.len, other.len);
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= o;
        }
    }

    /// Parity of the AND of two vectors: the GF(2) dot product.
    #[inline]
    pub fn dot(&self, other: &Self) -> bool {
        debug_assert_eq!(self.len, other.len);
        let mut acc = 0u64;
        for (w, o) in self.words.iter().zip(&other.words) {
            acc ^= w & o;
        }
        acc.count_ones() % 2 == 1
    }

    /// Popcount of the AND of two vectors.
    pub fn overlap(&self, other: &Self) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(w, o)| (w & o).count_ones() as usize)
            .sum()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn clear(&mut self) {
        for w in &mut self.words {
            *w = 0;
        }
    }

    /// Indices of the set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD_BITS + b)
                }
            })
        })
    }

    pub fn lowest_set(&self) -> Option<usize> {
        self.ones().next()
    }
}

impl std::fmt::Debug for Bits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        Ok(())
    }
}

/// Row-echelon form over GF(2) with combination tracking.
///
/// Rows are inserted one at a time; each stored row remembers which of
/// the inserted rows were XORed to produce it, so `reduce` can report an
/// exact decomposition of a query vector over the original rows.
pub struct GaussSolver {
    ncols: usize,
    /// (pivot column, reduced row, combination over inserted rows)
    rows: Vec<(usize, Bits, Bits)>,
    inserted: usize,
    capacity: usize,
}

impl GaussSolver {
    pub fn new(ncols: usize, capacity: usize) -> Self {
        Self {
            ncols,
            rows: Vec::new(),
            inserted: 0,
            capacity,
        }
    }

    pub fn from_rows(rows: &[Bits]) -> Self {
        let ncols = rows.first().map_or(0, Bits::len);
        let mut s = Self::new(ncols, rows.len());
        for r in rows {
            s.insert(r);
        }
        s
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Inserts a row; returns false if it was linearly dependent on the
    /// rows already present.
    pub fn insert(&mut self, row: &Bits) -> bool {
        assert_eq!(row.len(), self.ncols);
        assert!(self.inserted < self.capacity, "solver capacity exceeded");
        let mut r = row.clone();
        let mut combo = Bits::zeros(self.capacity);
        combo.set(self.inserted, true);
        self.inserted += 1;
        for (pivot, prow, pcombo) in &self.rows {
            if r.get(*pivot) {
                r.xor_assign(prow);
                combo.xor_assign(pcombo);
            }
        }
        match r.lowest_set() {
            Some(pivot) => {
                self.rows.push((pivot, r, combo));
                // keep rows sorted by pivot so reduce stays a single pass
                self.rows.sort_by_key(|(p, _, _)| *p);
                true
            }
            None => false,
        }
    }

    /// Reduces `v` against the echelon rows. Returns the residual and the
    /// combination of inserted rows that was subtracted.
    pub fn reduce(&self, v: &Bits) -> (Bits, Bits) {
        assert_eq!(v.len(), self.ncols);
        let mut r = v.clone();
        let mut combo = Bits::zeros(self.capacity);
        for (pivot, prow, pcombo) in &self.rows {
            if r.get(*pivot) {
                r.xor_assign(prow);
                combo.xor_assign(pcombo);
            }
        }
        (r, combo)
    }

    /// True if `v` lies in the row space.
    pub fn contains(&self, v: &Bits) -> bool {
        self.reduce(v).0.is_zero()
    }
}

/// Rank of a set of rows over GF(2).
pub fn rank(rows: &[Bits]) -> usize {
    GaussSolver::from_rows(rows).rank()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_flip() {
        let mut b = Bits::zeros(130);
        b.set(0, true);
        b.set(64, true);
        b.set(129, true);
        assert!(b.get(0) && b.get(64) && b.get(129));
        assert!(!b.get(1));
        b.flip(64);
        assert!(!b.get(64));
        assert_eq!(b.count_ones(), 2);
        assert_eq!(b.ones().collect::<Vec<_>>(), vec![0, 129]);
    }

    #[test]
    fn dot_is_parity_of_overlap() {
        let a = Bits::from_indices(70, &[0, 3, 65]);
        let b = Bits::from_indices(70, &[3, 65, 69]);
        assert_eq!(a.overlap(&b), 2);
        assert!(!a.dot(&b));
        let c = Bits::from_indices(70, &[3]);
        assert!(a.dot(&c));
    }

    #[test]
    fn solver_rank_and_membership() {
        let rows = vec![
            Bits::from_indices(4, &[0, 1]),
            Bits::from_indices(4, &[1, 2]),
            Bits::from_indices(4, &[0, 2]), // dependent
        ];
        let s = GaussSolver::from_rows(&rows);
        assert_eq!(s.rank(), 2);
        assert!(s.contains(&Bits::from_indices(4, &[0, 2])));
        assert!(!s.contains(&Bits::from_indices(4, &[0])));
    }

    #[test]
    fn reduce_reports_exact_combination() {
        let rows = vec![
            Bits::from_indices(5, &[0, 1]),
            Bits::from_indices(5, &[1, 2]),
            Bits::from_indices(5, &[3]),
        ];
        let s = GaussSolver::from_rows(&rows);
        let v = Bits::from_indices(5, &[0, 2, 3]);
        let (res, combo) = s.reduce(&v);
        assert!(res.is_zero());
        let mut rebuilt = Bits::zeros(5);
        for i in combo.ones() {
            rebuilt.xor_assign(&rows[i]);
        }
        assert_eq!(rebuilt, v);
    }
}
