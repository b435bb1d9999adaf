//! Size-bounded LRU cache whose entries expire after a fixed time-to-live.
//!
//! Time is passed in by the caller (seconds on any monotone clock), never read
//! from the environment.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

/// 24 hours in seconds.
pub const DEFAULT_TTL: f64 = 24.0 * 3600.0;
pub const DEFAULT_CAPACITY: usize = 1024;

#[derive(Debug, Clone)]
struct Entry<V> {
    value: V,
    inserted_at: f64,
    tick: u64,
}

#[derive(Debug, Clone)]
pub struct LruTtlCache<K, V> {
    capacity: usize,
    ttl: f64,
    map: HashMap<K, Entry<V>>,
    recency: BTreeMap<u64, K>,
    next_tick: u64,
}

impl<K: Eq + Hash + Clone, V: Clone> LruTtlCache<K, V> {
    /// # Panics
    /// If `capacity` is zero.
    pub fn new(capacity: usize, ttl: f64) -> Self {
        assert!(capacity > 0, "cache capacity must be positive");
        Self {
            capacity,
            ttl,
            map: HashMap::with_capacity(capacity),
            recency: BTreeMap::new(),
            next_tick: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn ttl(&self) -> f64 {
        self.ttl
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn bump(&mut self) -> u64 {
        self.next_tick += 1;
        self.next_tick
    }

    fn expired(&self, e: &Entry<V>, now: f64) -> bool {
        now - e.inserted_at > self.ttl
    }

    fn remove(&mut self, key: &K) {
        if let Some(e) = self.map.remove(key) {
            self.recency.remove(&e.tick);
        }
    }

    /// Fresh value for `key`, refreshing its recency. Expired entries are purged.
    pub fn get(&mut self, key: &K, now: f64) -> Option<V> {
        let e = self.map.get(key)?;
        if self.expired(e, now) {
            self.remove(key);
            return None;
        }
        let old = e.tick;
        let tick = self.bump();
        let e = self.map.get_mut(key).expect("present");
        e.tick = tick;
        let value = e.value.clone();
        self.recency.remove(&old);
        self.recency.insert(tick, key.clone());
        Some(value)
    }

    pub fn contains_fresh(&self, key: &K, now: f64) -> bool {
        self.map.get(key).is_some_and(|e| !self.expired(e, now))
    }

    pub fn put(&mut self, key: K, value: V, now: f64) {
        self.remove(&key);
        let tick = self.bump();
        self.recency.insert(tick, key.clone());
        self.map.insert(
            key,
            Entry {
                value,
                inserted_at: now,
                tick,
            },
        );
        if self.map.len() > self.capacity {
            self.purge_expired(now);
        }
        while self.map.len() > self.capacity {
            let (_, lru) = self.recency.pop_first().expect("non-empty");
            self.map.remove(&lru);
        }
    }

    pub fn purge_expired(&mut self, now: f64) {
        let stale: Vec<K> = self
            .map
            .iter()
            .filter(|(_, e)| self.expired(e, now))
            .map(|(k, _)| k.clone())
            .collect();
        for k in stale {
            self.remove(&k);
        }
    }

    /// Keys from least to most recently used.
    pub fn keys_by_recency(&self) -> impl Iterator<Item = &K> {
        self.recency.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lru_order() {
        let mut c = LruTtlCache::new(2, DEFAULT_TTL);
        c.put("A", 1, 0.0);
        c.put("B", 2, 0.0);
        assert_eq!(c.get(&"A", 0.0), Some(1));
        c.put("C", 3, 0.0);
        assert_eq!(c.get(&"B", 0.0), None);
        assert_eq!(c.get(&"A", 0.0), Some(1));
        assert_eq!(c.get(&"C", 0.0), Some(3));
    }

    #[test]
    fn ttl_boundary() {
        let mut c = LruTtlCache::new(4, DEFAULT_TTL);
        c.put("A", 1, 0.0);
        assert_eq!(c.get(&"A", 1.0), Some(1));
        assert_eq!(c.get(&"A", DEFAULT_TTL), Some(1));
        assert_eq!(c.get(&"A", DEFAULT_TTL + 1.0), None);
        assert!(c.is_empty());
    }

    #[test]
    fn get_does_not_extend_lifetime() {
        let mut c = LruTtlCache::new(4, 10.0);
        c.put("A", 1, 0.0);
        assert_eq!(c.get(&"A", 9.0), Some(1));
        assert_eq!(c.get(&"A", 10.5), None);
    }

    #[test]
    fn expired_entries_go_before_lru_victims() {
        let mut c = LruTtlCache::new(2, 10.0);
        c.put("old", 1, 0.0);
        c.put("B", 2, 5.0);
        c.get(&"old", 5.0);
        c.put("C", 3, 11.0);
        assert_eq!(c.len(), 2);
        assert_eq!(c.get(&"B", 11.0), Some(2));
        assert_eq!(c.get(&"old", 11.0), None);
    }

    #[test]
    fn overwrite_resets_insertion_time() {
        let mut c = LruTtlCache::new(2, 10.0);
        c.put("A", 1, 0.0);
        c.put("A", 7, 8.0);
        assert_eq!(c.get(&"A", 15.0), Some(7));
        assert_eq!(c.len(), 1);
    }
}
