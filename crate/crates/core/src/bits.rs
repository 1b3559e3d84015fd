//! Small bitsets used for sieves, subpresheaves and down-sets.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use smallvec::SmallVec;

/// A growable bitset; up to 128 bits are stored inline.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Bits {
    words: SmallVec<[u64; 2]>,
    len: usize,
}

impl Bits {
    pub fn empty(len: usize) -> Self {
        let mut words = SmallVec::new();
        words.resize(len.div_ceil(64), 0);
        Bits { words, len }
    }

    pub fn full(len: usize) -> Self {
        let mut b = Bits::empty(len);
        for i in 0..len {
            b.insert(i);
        }
        b
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut b = Bits::empty(len);
        for i in idx {
            b.insert(i);
        }
        b
    }

    pub fn from_mask(len: usize, mask: u64) -> Self {
        debug_assert!(len <= 64);
        let mut b = Bits::empty(len);
        if len > 0 {
            b.words[0] = mask;
        }
        b
    }

    /// Low 64 bits; only meaningful when `len() <= 64`.
    pub fn mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] & (1u64 << (i % 64)) != 0
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range {}", self.len);
        self.words[i / 64] |= 1u64 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        if i < self.len {
            self.words[i / 64] &= !(1u64 << (i % 64));
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.len
    }

    pub fn is_subset(&self, other: &Bits) -> bool {
        self.words.iter().zip(other.words.iter()).all(|(a, b)| a & !b == 0)
    }

    pub fn union_with(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a |= *b;
        }
    }

    pub fn intersect_with(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a &= *b;
        }
    }

    pub fn union(&self, other: &Bits) -> Bits {
        let mut r = self.clone();
        r.union_with(other);
        r
    }

    pub fn intersection(&self, other: &Bits) -> Bits {
        let mut r = self.clone();
        r.intersect_with(other);
        r
    }

    pub fn intersects(&self, other: &Bits) -> bool {
        self.words.iter().zip(other.words.iter()).any(|(a, b)| a & b != 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            core::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let i = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + i)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Renders `{a,b,c}` from a list of names.
pub fn brace_list<'a>(names: impl IntoIterator<Item = &'a str>) -> String {
    let mut s = String::from("{");
    for (i, n) in names.into_iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(n);
    }
    s.push('}');
    s
}

/// All subsets of `0..n` closed downward in the preorder given by
/// `down[i]`, the set of elements below `i` (including `i`). Each set is
/// produced once, by deciding elements in index order and propagating the
/// choice to everything below (inclusion) or above (exclusion).
pub fn down_closed_sets(down: &[Bits]) -> Vec<Bits> {
    let n = down.len();
    let mut up = alloc::vec![Bits::empty(n); n];
    for (j, d) in down.iter().enumerate() {
        for i in d.iter() {
            up[i].insert(j);
        }
    }
    let mut out = Vec::new();
    fn go(i: usize, inc: &mut Bits, exc: &mut Bits, down: &[Bits], up: &[Bits], out: &mut Vec<Bits>) {
        let n = down.len();
        let mut i = i;
        while i < n && (inc.contains(i) || exc.contains(i)) {
            i += 1;
        }
        if i == n {
            out.push(inc.clone());
            return;
        }
        if !down[i].intersects(exc) {
            let saved = inc.clone();
            inc.union_with(&down[i]);
            go(i + 1, inc, exc, down, up, out);
            *inc = saved;
        }
        if !up[i].intersects(inc) {
            let saved = exc.clone();
            exc.union_with(&up[i]);
            go(i + 1, inc, exc, down, up, out);
            *exc = saved;
        }
    }
    go(0, &mut Bits::empty(n), &mut Bits::empty(n), down, &up, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn down_sets_of_a_chain_and_an_antichain() {
        // chain 0 < 1 < 2: down-sets are the 4 initial segments
        let chain: Vec<Bits> = (0..3).map(|i| Bits::from_indices(3, 0..=i)).collect();
        assert_eq!(down_closed_sets(&chain).len(), 4);
        let anti: Vec<Bits> = (0..4).map(|i| Bits::from_indices(4, [i])).collect();
        assert_eq!(down_closed_sets(&anti).len(), 16);
    }

    #[test]
    fn wide_sets() {
        let mut a = Bits::empty(130);
        a.insert(0);
        a.insert(129);
        let b = Bits::from_indices(130, [0, 5, 129]);
        assert!(a.is_subset(&b));
        assert!(!b.is_subset(&a));
        assert_eq!(b.count(), 3);
        assert_eq!(a.union(&b), b);
        assert_eq!(a.intersection(&b), a);
        assert_eq!(b.to_vec(), alloc::vec![0, 5, 129]);
    }

    #[test]
    fn full_and_empty() {
        assert!(Bits::full(3).is_full());
        assert!(Bits::empty(3).is_empty());
        assert!(Bits::empty(0).is_full());
    }
}
