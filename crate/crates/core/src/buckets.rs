//! Read-only hash table from integer keys to posting lists of point ids.
//!
//! Postings are stored sorted by `(key, id)` in two parallel arrays, so a
//! bucket is a contiguous run and only non-empty buckets take space. A
//! directory over the key range narrows each lookup to a short run before
//! a binary search.

use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketTable {
    keys: Vec<u64>,
    ids: Vec<u32>,
    key_limit: u64,
    directory: Vec<u32>,
}

impl BucketTable {
    /// `keys[id]` is the bucket of point `id`. Every key must be at most
    /// `key_limit`.
    pub fn from_keys(keys: Vec<u64>, key_limit: u64) -> Self {
        let mut ids: Vec<u32> = (0..keys.len() as u32).collect();
        ids.sort_unstable_by_key(|&id| (keys[id as usize], id));
        let sorted: Vec<u64> = ids.iter().map(|&id| keys[id as usize]).collect();
        drop(keys);
        Self::from_sorted(sorted, ids, key_limit)
    }

    /// Builds from `(key, id)` pairs in any order.
    pub fn from_pairs(mut pairs: Vec<(u64, u32)>, key_limit: u64) -> Self {
        pairs.sort_unstable();
        let (keys, ids) = pairs.into_iter().unzip();
        Self::from_sorted(keys, ids, key_limit)
    }

    fn from_sorted(keys: Vec<u64>, ids: Vec<u32>, key_limit: u64) -> Self {
        debug_assert!(keys.iter().all(|&k| k <= key_limit));
        let slots = (keys.len() / 4).max(1).next_power_of_two();
        let mut directory = Vec::with_capacity(slots + 1);
        let mut pos = 0;
        for slot in 0..slots {
            while pos < keys.len() && slot_of(keys[pos], key_limit, slots) < slot {
                pos += 1;
            }
            directory.push(pos as u32);
        }
        directory.push(keys.len() as u32);
        BucketTable {
            keys,
            ids,
            key_limit,
            directory,
        }
    }

    /// Ids stored under `key`, ascending; empty if the bucket does not exist.
    #[inline]
    pub fn lookup(&self, key: u64) -> &[u32] {
        if key > self.key_limit {
            return &[];
        }
        let slots = self.directory.len() - 1;
        let slot = slot_of(key, self.key_limit, slots);
        let lo = self.directory[slot] as usize;
        let hi = self.directory[slot + 1] as usize;
        let run = &self.keys[lo..hi];
        let start = run.partition_point(|&k| k < key);
        let end = start + run[start..].partition_point(|&k| k == key);
        &self.ids[lo + start..lo + end]
    }

    /// Total postings.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Number of distinct non-empty buckets.
    pub fn bucket_count(&self) -> usize {
        if self.keys.is_empty() {
            return 0;
        }
        1 + self.keys.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Iterates `(key, ids)` over non-empty buckets in key order.
    pub fn buckets(&self) -> impl Iterator<Item = (u64, &[u32])> + '_ {
        let mut start = 0;
        core::iter::from_fn(move || {
            if start >= self.keys.len() {
                return None;
            }
            let key = self.keys[start];
            let len = self.keys[start..].partition_point(|&k| k == key);
            let ids = &self.ids[start..start + len];
            start += len;
            Some((key, ids))
        })
    }

    /// Heap bytes held by the table.
    pub fn heap_bytes(&self) -> usize {
        self.keys.capacity() * 8 + self.ids.capacity() * 4 + self.directory.capacity() * 4
    }
}

#[inline]
fn slot_of(key: u64, key_limit: u64, slots: usize) -> usize {
    ((key as u128 * slots as u128) / (key_limit as u128 + 1)) as usize
}
