use std::sync::atomic::{AtomicU64, Ordering};

use crate::graph::VertexId;

/// Outcome of [`DedupTable::lookup_or_claim`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Claim {
    /// Another embedding of the chunk already requested the list.
    Shared(u32),
    /// The caller now owns the entry and schedules the only fetch.
    Claimed,
    /// The slot is held by a different vertex; the caller fetches on its own.
    Dropped,
}

/// Fixed-size, open-addressed table mapping a vertex to the embedding that
/// requested its edge list within one chunk.
///
/// There is no collision chaining: when `hash(v)` is occupied by another
/// vertex the insertion is dropped. Entries pack `(v + 1) << 32 | embedding`
/// into one atomic word; zero marks an empty slot.
pub struct DedupTable {
    entries: Box<[AtomicU64]>,
    bits: u32,
}

impl DedupTable {
    pub const DEFAULT_BITS: u32 = 16;

    pub fn new(bits: u32) -> Self {
        assert!(bits <= 30, "table too large");
        let entries = (0..1usize << bits).map(|_| AtomicU64::new(0)).collect();
        Self { entries, bits }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    #[inline]
    fn slot(&self, v: VertexId) -> usize {
        if self.bits == 0 {
            return 0;
        }
        // multiplicative fold, top bits
        (u64::from(v).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> (64 - self.bits)) as usize
    }

    #[inline]
    fn pack(v: VertexId, owner: u32) -> u64 {
        (u64::from(v) + 1) << 32 | u64::from(owner)
    }

    fn decode(word: u64, v: VertexId) -> Claim {
        if word >> 32 == u64::from(v) + 1 {
            Claim::Shared(word as u32)
        } else {
            Claim::Dropped
        }
    }

    /// Looks `v` up, claiming the slot for embedding `owner` when it is free.
    pub fn lookup_or_claim(&self, v: VertexId, owner: u32) -> Claim {
        let entry = &self.entries[self.slot(v)];
        match entry.compare_exchange(0, Self::pack(v, owner), Ordering::AcqRel, Ordering::Acquire) {
            Ok(_) => Claim::Claimed,
            Err(current) => Self::decode(current, v),
        }
    }

    /// Undoes a claim made by `owner` whose insertion was abandoned.
    pub fn unclaim(&self, v: VertexId, owner: u32) {
        let entry = &self.entries[self.slot(v)];
        let _ = entry.compare_exchange(Self::pack(v, owner), 0, Ordering::AcqRel, Ordering::Acquire);
    }

    pub fn get(&self, v: VertexId) -> Option<u32> {
        match Self::decode(self.entries[self.slot(v)].load(Ordering::Acquire), v) {
            Claim::Shared(owner) => Some(owner),
            _ => None,
        }
    }

    /// Empties the table; called when the owning chunk is sealed.
    pub fn clear(&mut self) {
        for e in self.entries.iter_mut() {
            *e.get_mut() = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_claims_second_shares() {
        let t = DedupTable::new(DedupTable::DEFAULT_BITS);
        assert_eq!(t.lookup_or_claim(42, 0), Claim::Claimed);
        assert_eq!(t.lookup_or_claim(42, 1), Claim::Shared(0));
        assert_eq!(t.get(42), Some(0));
    }

    #[test]
    fn collisions_are_dropped_not_chained() {
        let t = DedupTable::new(0);
        assert_eq!(t.len(), 1);
        assert_eq!(t.lookup_or_claim(7, 3), Claim::Claimed);
        assert_eq!(t.lookup_or_claim(9, 4), Claim::Dropped);
        assert_eq!(t.lookup_or_claim(9, 5), Claim::Dropped);
        assert_eq!(t.lookup_or_claim(7, 6), Claim::Shared(3));
    }

    #[test]
    fn clear_and_unclaim() {
        let mut t = DedupTable::new(4);
        t.lookup_or_claim(1, 0);
        t.unclaim(1, 0);
        assert_eq!(t.get(1), None);
        t.lookup_or_claim(1, 2);
        t.clear();
        assert_eq!(t.lookup_or_claim(1, 9), Claim::Claimed);
    }

    #[test]
    fn concurrent_claims_pick_one_owner() {
        let t = DedupTable::new(8);
        let outcomes: Vec<Claim> = std::thread::scope(|s| {
            let hs: Vec<_> = (0..8).map(|i| { let t = &t; s.spawn(move || t.lookup_or_claim(100, i)) }).collect();
            hs.into_iter().map(|h| h.join().unwrap()).collect()
        });
        assert_eq!(outcomes.iter().filter(|c| **c == Claim::Claimed).count(), 1);
        let owner = t.get(100).unwrap();
        assert!(outcomes.iter().all(|c| *c == Claim::Claimed || *c == Claim::Shared(owner)));
    }
}
