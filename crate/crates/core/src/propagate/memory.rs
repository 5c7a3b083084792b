//! Memory bank and readout.
//!
//! The bank pins the key-frame entry, keeps a FIFO of at most
//! [`WORKING_CAPACITY`] recent entries, and optionally folds evicted entries
//! into at most [`LONG_TERM_CAPACITY`] cell prototypes by repeatedly merging
//! the two most similar prototypes.
//!
//! Readout: for every query cell, the [`TOP_K`] most similar memory cells
//! (over all entries) vote with `softmax(similarity / TEMPERATURE)` weights on
//! their stored foreground fractions.

use rayon::prelude::*;

use super::features::{Descriptor, FeatureGrid, DESCRIPTOR_DIM};

pub const TOP_K: usize = 16;
pub const TEMPERATURE: f32 = 0.05;
pub const WORKING_CAPACITY: usize = 8;
pub const LONG_TERM_CAPACITY: usize = 64;

#[inline]
pub fn similarity(a: &Descriptor, b: &Descriptor) -> f32 {
    let mut s = 0.0;
    for i in 0..DESCRIPTOR_DIM {
        s += a[i] * b[i];
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prototype {
    pub key: Descriptor,
    pub label: f32,
    /// Number of cells merged into this prototype.
    pub weight: f32,
}

#[derive(Debug, Clone)]
pub struct MemoryBank {
    reference: FeatureGrid,
    working: std::collections::VecDeque<FeatureGrid>,
    long_term: LongTermMemory,
    long_term_enabled: bool,
}

impl MemoryBank {
    /// `reference` must carry labels.
    pub fn new(reference: FeatureGrid, long_term_enabled: bool) -> Self {
        assert!(reference.labels.is_some(), "memory entries carry labels");
        Self {
            reference,
            working: Default::default(),
            long_term: LongTermMemory::default(),
            long_term_enabled,
        }
    }

    pub fn reference(&self) -> &FeatureGrid {
        &self.reference
    }

    pub fn working(&self) -> impl ExactSizeIterator<Item = &FeatureGrid> {
        self.working.iter()
    }

    pub fn working_len(&self) -> usize {
        self.working.len()
    }

    pub fn long_term(&self) -> &[Prototype] {
        &self.long_term.items
    }

    pub fn long_term_len(&self) -> usize {
        self.long_term.items.len()
    }

    pub fn long_term_enabled(&self) -> bool {
        self.long_term_enabled
    }

    /// Appends a labeled entry, evicting the oldest working entry on
    /// overflow (folded into long-term memory when enabled).
    pub fn insert(&mut self, entry: FeatureGrid) {
        assert!(entry.labels.is_some(), "memory entries carry labels");
        self.working.push_back(entry);
        if self.working.len() > WORKING_CAPACITY {
            let evicted = self
                .working
                .pop_front()
                .expect("working memory is non-empty");
            if self.long_term_enabled {
                self.long_term.consolidate(&evicted);
            }
        }
    }

    fn cells(&self) -> (Vec<Descriptor>, Vec<f32>) {
        let mut keys = Vec::new();
        let mut labels = Vec::new();
        for grid in std::iter::once(&self.reference).chain(self.working.iter()) {
            keys.extend_from_slice(&grid.keys);
            labels.extend_from_slice(grid.labels.as_deref().expect("labeled entry"));
        }
        for p in &self.long_term.items {
            keys.push(p.key);
            labels.push(p.label);
        }
        (keys, labels)
    }
}

/// Writes `entry` (features with labels) when `step` is a multiple of
/// `interval`. Steps count frames processed after the key frame, from 1.
pub fn memory_write(
    bank: &mut MemoryBank,
    entry: FeatureGrid,
    step: usize,
    interval: usize,
) -> bool {
    if !step.is_multiple_of(interval) {
        return false;
    }
    bank.insert(entry);
    true
}

/// Soft foreground label per query cell, each in `[0, 1]`.
pub fn memory_read(query: &FeatureGrid, bank: &MemoryBank) -> Vec<f32> {
    let (keys, labels) = bank.cells();
    query
        .keys
        .par_iter()
        .map(|q| readout_cell(q, &keys, &labels))
        .collect()
}

fn readout_cell(q: &Descriptor, keys: &[Descriptor], labels: &[f32]) -> f32 {
    // Top-K by similarity, kept sorted descending; earlier cells win ties.
    let mut top: [(f32, usize); TOP_K] = [(f32::NEG_INFINITY, usize::MAX); TOP_K];
    let mut filled = 0;
    for (i, k) in keys.iter().enumerate() {
        let s = similarity(q, k);
        if filled == TOP_K && s <= top[TOP_K - 1].0 {
            continue;
        }
        let mut pos = filled.min(TOP_K - 1);
        while pos > 0 && top[pos - 1].0 < s {
            top[pos] = top[pos - 1];
            pos -= 1;
        }
        top[pos] = (s, i);
        filled = (filled + 1).min(TOP_K);
    }
    let best = top[0].0;
    let (mut num, mut den) = (0.0f32, 0.0f32);
    for &(s, i) in &top[..filled] {
        let w = ((s - best) / TEMPERATURE).exp();
        num += w * labels[i];
        den += w;
    }
    (num / den).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Default)]
struct LongTermMemory {
    items: Vec<Prototype>,
    /// Pairwise similarities, `sim[i][j]` for `i != j`.
    sim: Vec<Vec<f32>>,
}

impl LongTermMemory {
    fn consolidate(&mut self, evicted: &FeatureGrid) {
        let labels = evicted.labels.as_deref().expect("labeled entry");
        for (key, &label) in evicted.keys.iter().zip(labels) {
            self.push(Prototype {
                key: *key,
                label,
                weight: 1.0,
            });
            if self.items.len() > LONG_TERM_CAPACITY {
                self.merge_closest();
            }
        }
    }

    fn push(&mut self, p: Prototype) {
        let row: Vec<f32> = self
            .items
            .iter()
            .map(|q| similarity(&p.key, &q.key))
            .collect();
        for (r, &s) in self.sim.iter_mut().zip(&row) {
            r.push(s);
        }
        let mut row = row;
        row.push(f32::NEG_INFINITY);
        self.sim.push(row);
        self.items.push(p);
    }

    fn merge_closest(&mut self) {
        let n = self.items.len();
        let (mut bi, mut bj, mut best) = (0, 1, f32::NEG_INFINITY);
        for i in 0..n {
            for j in i + 1..n {
                if self.sim[i][j] > best {
                    (bi, bj, best) = (i, j, self.sim[i][j]);
                }
            }
        }
        let b = self.items[bj].clone();
        let a = &mut self.items[bi];
        let total = a.weight + b.weight;
        for d in 0..DESCRIPTOR_DIM {
            a.key[d] = (a.key[d] * a.weight + b.key[d] * b.weight) / total;
        }
        a.label = (a.label * a.weight + b.label * b.weight) / total;
        a.weight = total;

        self.items.swap_remove(bj);
        self.sim.swap_remove(bj);
        for row in &mut self.sim {
            row.swap_remove(bj);
        }
        let key = self.items[bi].key;
        for j in 0..self.items.len() {
            let s = if j == bi {
                f32::NEG_INFINITY
            } else {
                similarity(&key, &self.items[j].key)
            };
            self.sim[bi][j] = s;
            self.sim[j][bi] = s;
        }
    }
}
