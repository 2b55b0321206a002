//! Per-row column lookup used by the numeric factorization to locate the
//! storage offset of a column inside a filled row.
//!
//! Compact rows use a bitmap with per-word prefix ranks; rows whose column
//! span is large relative to their length use an open-addressing hash table.

const EMPTY: usize = usize::MAX;

/// Column index to in-row offset map for one row of the filled pattern.
#[derive(Debug, Clone, PartialEq)]
pub enum RowLookup {
    Empty,
    Bitmap {
        base: usize,
        last: usize,
        words: Vec<u64>,
        ranks: Vec<u32>,
    },
    Hash {
        shift: u32,
        keys: Vec<usize>,
        offsets: Vec<u32>,
    },
}

impl RowLookup {
    /// Builds the lookup for a sorted, duplicate-free column list.
    ///
    /// A bitmap is used when `max - min + 1 <= 64 * len`, a hash table otherwise.
    pub fn build(cols: &[usize]) -> Self {
        let (Some(&first), Some(&last)) = (cols.first(), cols.last()) else {
            return RowLookup::Empty;
        };
        debug_assert!(cols.windows(2).all(|w| w[0] < w[1]));
        let span = last - first + 1;
        if span <= 64 * cols.len() {
            let nwords = span.div_ceil(64);
            let mut words = vec![0u64; nwords];
            for &c in cols {
                let bit = c - first;
                words[bit / 64] |= 1u64 << (bit % 64);
            }
            let mut ranks = Vec::with_capacity(nwords);
            let mut acc = 0u32;
            for w in &words {
                ranks.push(acc);
                acc += w.count_ones();
            }
            RowLookup::Bitmap {
                base: first,
                last,
                words,
                ranks,
            }
        } else {
            let capacity = (2 * cols.len()).next_power_of_two().max(2);
            let shift = 64 - capacity.trailing_zeros();
            let mut keys = vec![EMPTY; capacity];
            let mut offsets = vec![0u32; capacity];
            let mask = capacity - 1;
            for (k, &c) in cols.iter().enumerate() {
                let mut slot = hash(c, shift);
                while keys[slot] != EMPTY {
                    slot = (slot + 1) & mask;
                }
                keys[slot] = c;
                offsets[slot] = k as u32;
            }
            RowLookup::Hash {
                shift,
                keys,
                offsets,
            }
        }
    }

    /// Offset of `col` within the row, or `None` when absent.
    #[inline]
    pub fn get(&self, col: usize) -> Option<usize> {
        match self {
            RowLookup::Empty => None,
            RowLookup::Bitmap {
                base,
                last,
                words,
                ranks,
            } => {
                if col < *base || col > *last {
                    return None;
                }
                let bit = col - base;
                let (w, b) = (bit / 64, bit % 64);
                let word = words[w];
                if word >> b & 1 == 0 {
                    return None;
                }
                let below = word & ((1u64 << b) - 1);
                Some(ranks[w] as usize + below.count_ones() as usize)
            }
            RowLookup::Hash {
                shift,
                keys,
                offsets,
            } => {
                let mask = keys.len() - 1;
                let mut slot = hash(col, *shift);
                loop {
                    let k = keys[slot];
                    if k == col {
                        return Some(offsets[slot] as usize);
                    }
                    if k == EMPTY {
                        return None;
                    }
                    slot = (slot + 1) & mask;
                }
            }
        }
    }

    pub fn is_bitmap(&self) -> bool {
        matches!(self, RowLookup::Bitmap { .. })
    }

    pub fn is_hash(&self) -> bool {
        matches!(self, RowLookup::Hash { .. })
    }
}

#[inline]
fn hash(col: usize, shift: u32) -> usize {
    ((col as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> shift) as usize
}

/// Builds the lookup for one row.
pub fn build_lookup(cols: &[usize]) -> RowLookup {
    RowLookup::build(cols)
}
