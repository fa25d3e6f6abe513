//! Uniform ring-buffer replay.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// One stored transition in network coordinates: observations and the
/// normalized action, with the option length for multi-step discounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub obs: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_obs: Vec<f64>,
    pub steps: u32,
    pub done: bool,
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    rows: Vec<Row>,
    capacity: usize,
    write: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        ReplayBuffer { rows: Vec::with_capacity(capacity.min(1 << 20)), capacity, write: 0 }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, row: Row) {
        if self.rows.len() < self.capacity {
            self.rows.push(row);
        } else {
            self.rows[self.write] = row;
            self.write = (self.write + 1) % self.capacity;
        }
    }

    pub fn get(&self, i: usize) -> &Row {
        &self.rows[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter()
    }

    /// Uniform sample with replacement.
    pub fn sample_indices(&self, rng: &mut impl Rng, n: usize) -> Vec<usize> {
        assert!(!self.rows.is_empty());
        (0..n).map(|_| rng.random_range(0..self.rows.len())).collect()
    }

    /// Histogram of stored option lengths, for buffer-composition checks.
    pub fn step_histogram(&self) -> std::collections::BTreeMap<u32, usize> {
        let mut h = std::collections::BTreeMap::new();
        for r in &self.rows {
            *h.entry(r.steps).or_insert(0) += 1;
        }
        h
    }
}
