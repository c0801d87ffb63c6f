//! Ring replay memory with proportional prioritized sampling and a
//! fidelity-aware overwrite rule.
//!
//! The overwrite rule: when the ring is full and the resident sample at
//! the write pointer has strictly higher fidelity than the incoming one,
//! the pointer skips forward (with probability μ₁) so the better sample
//! survives one more generation. Skips only ever move the pointer; the
//! ring never exceeds its capacity.

use rand::Rng;

use crate::dynamics::AgentState;

/// One stored experience: (s, a, r, s′, F) plus the terminal flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: AgentState,
    pub action: usize,
    pub reward: f64,
    pub next_state: AgentState,
    pub fidelity: f64,
    pub terminal: bool,
}

/// Prioritized-replay knobs.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerParams {
    /// Priority exponent a in P(i) ∝ p_i^a.
    pub exponent: f64,
    /// Importance-weight exponent β at the start of a run.
    pub beta_start: f64,
    /// β at the end of the run (annealed linearly in between).
    pub beta_end: f64,
    /// Additive floor ε_p so no priority is ever zero.
    pub epsilon: f64,
}

impl Default for PerParams {
    fn default() -> Self {
        Self { exponent: 0.6, beta_start: 0.4, beta_end: 1.0, epsilon: 1e-3 }
    }
}

impl PerParams {
    pub fn beta_at(&self, progress: f64) -> f64 {
        self.beta_start + (self.beta_end - self.beta_start) * progress.clamp(0.0, 1.0)
    }
}

/// Indices and normalized importance weights of one sampled batch.
pub struct SampledBatch {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ReplayMemory {
    capacity: usize,
    slots: Vec<Transition>,
    pointer: usize,
    /// Binary sum tree over p_i^a; leaves at [capacity, 2·capacity).
    tree: Vec<f64>,
    max_priority: f64,
    exponent: f64,
    epsilon: f64,
    smart_threshold: f64,
}

impl ReplayMemory {
    pub fn new(capacity: usize, per: PerParams, smart_threshold: f64) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            slots: Vec::with_capacity(capacity),
            pointer: 0,
            tree: vec![0.0; 2 * capacity],
            max_priority: 1.0,
            exponent: per.exponent,
            epsilon: per.epsilon,
            smart_threshold,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.slots.len() == self.capacity
    }

    pub fn pointer(&self) -> usize {
        self.pointer
    }

    pub fn get(&self, index: usize) -> &Transition {
        &self.slots[index]
    }

    fn set_leaf(&mut self, index: usize, priority: f64) {
        let mut node = self.capacity + index;
        let value = (priority + self.epsilon).powf(self.exponent);
        let delta = value - self.tree[node];
        while node >= 1 {
            self.tree[node] += delta;
            node /= 2;
        }
    }

    fn leaf_value(&self, index: usize) -> f64 {
        self.tree[self.capacity + index]
    }

    fn total(&self) -> f64 {
        self.tree[1]
    }

    /// Store a transition. Inserts append until the ring is full; after
    /// that the fidelity-aware pointer rule above applies. The random
    /// stream is consulted only when the resident sample outranks the
    /// incoming one.
    pub fn store(&mut self, transition: Transition, rng: &mut impl Rng) {
        if self.is_full() {
            let resident = self.slots[self.pointer].fidelity;
            if resident > transition.fidelity && rng.gen::<f64>() < self.smart_threshold {
                self.pointer = (self.pointer + 1) % self.capacity;
            }
            let p = self.max_priority;
            self.slots[self.pointer] = transition;
            self.set_leaf(self.pointer, p);
        } else {
            self.slots.push(transition);
            let p = self.max_priority;
            self.set_leaf(self.pointer, p);
        }
        self.pointer = (self.pointer + 1) % self.capacity;
    }

    /// Proportional sample of `batch` indices with max-normalized
    /// importance weights. Returns `None` while fewer than `batch`
    /// transitions are stored.
    pub fn sample(&self, batch: usize, beta: f64, rng: &mut impl Rng) -> Option<SampledBatch> {
        if self.len() < batch || batch == 0 {
            return None;
        }
        let total = self.total();
        let n = self.len() as f64;
        let mut indices = Vec::with_capacity(batch);
        let mut weights = Vec::with_capacity(batch);
        for _ in 0..batch {
            let target = rng.gen::<f64>() * total;
            let index = self.descend(target);
            let prob = self.leaf_value(index) / total;
            indices.push(index);
            weights.push((n * prob).powf(-beta));
        }
        let max_w = weights.iter().copied().fold(f64::MIN, f64::max);
        for w in &mut weights {
            *w /= max_w;
        }
        Some(SampledBatch { indices, weights })
    }

    fn descend(&self, mut target: f64) -> usize {
        let mut node = 1usize;
        while node < self.capacity {
            let left = 2 * node;
            if target <= self.tree[left] || self.tree[left + 1] == 0.0 {
                node = left;
            } else {
                target -= self.tree[left];
                node = left + 1;
            }
        }
        (node - self.capacity).min(self.len().saturating_sub(1))
    }

    /// Refresh priorities of just-trained samples from their new
    /// absolute TD errors.
    pub fn update_priorities(&mut self, indices: &[usize], td_abs: &[f64]) {
        for (&i, &delta) in indices.iter().zip(td_abs) {
            self.set_leaf(i, delta);
            if delta > self.max_priority {
                self.max_priority = delta;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn transition(fidelity: f64) -> Transition {
        Transition {
            state: vec![0.0],
            action: 0,
            reward: 0.0,
            next_state: vec![0.0],
            fidelity,
            terminal: false,
        }
    }

    fn tagged(fidelity: f64, tag: usize) -> Transition {
        Transition { action: tag, ..transition(fidelity) }
    }

    #[test]
    fn append_until_full_then_wrap() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut mem = ReplayMemory::new(3, PerParams::default(), 0.8);
        mem.store(transition(0.1), &mut rng);
        assert_eq!((mem.len(), mem.pointer()), (1, 1));
        mem.store(transition(0.2), &mut rng);
        mem.store(transition(0.3), &mut rng);
        assert!(mem.is_full());
        assert_eq!(mem.pointer(), 0);
    }

    #[test]
    fn resident_with_higher_fidelity_is_preserved_on_skip() {
        // Capacity 2, residents F = 0.99 (slot 0) and F = 0.10 (slot 1).
        // Incoming F = 0.30 with a sub-threshold draw must skip slot 0
        // and overwrite slot 1.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut mem = ReplayMemory::new(2, PerParams::default(), 1.0); // always skip when outranked
        mem.store(tagged(0.99, 100), &mut rng);
        mem.store(tagged(0.10, 101), &mut rng);
        mem.store(tagged(0.30, 102), &mut rng);
        assert_eq!(mem.get(0).action, 100, "high-fidelity resident must survive");
        assert_eq!(mem.get(1).action, 102);
        assert_eq!(mem.pointer(), 0);
    }

    #[test]
    fn incoming_with_higher_fidelity_overwrites_in_place() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut mem = ReplayMemory::new(2, PerParams::default(), 1.0);
        mem.store(tagged(0.2, 100), &mut rng);
        mem.store(tagged(0.5, 101), &mut rng);
        mem.store(tagged(0.9, 102), &mut rng);
        assert_eq!(mem.get(0).action, 102, "resident 0.2 < incoming 0.9: no skip");
        assert_eq!(mem.pointer(), 1);
    }

    #[test]
    fn skip_respects_the_probability_threshold() {
        // With μ₁ = 0 the skip never fires even when outranked.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut mem = ReplayMemory::new(2, PerParams::default(), 0.0);
        mem.store(tagged(0.99, 100), &mut rng);
        mem.store(tagged(0.10, 101), &mut rng);
        mem.store(tagged(0.30, 102), &mut rng);
        assert_eq!(mem.get(0).action, 102);
    }

    #[test]
    fn capacity_and_pointer_invariants_under_load() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut mem = ReplayMemory::new(16, PerParams::default(), 0.8);
        for k in 0..500 {
            mem.store(transition(rng.gen::<f64>()), &mut rng);
            assert!(mem.len() <= 16);
            assert!(mem.pointer() < 16, "pointer escaped at step {k}");
        }
        assert!(mem.is_full());
    }

    #[test]
    fn equal_priorities_sample_uniformly() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let n = 8usize;
        let mut mem = ReplayMemory::new(n, PerParams::default(), 0.8);
        for i in 0..n {
            mem.store(tagged(0.5, i), &mut rng);
        }
        let draws = 100_000usize;
        let mut counts = vec![0usize; n];
        for _ in 0..draws {
            let b = mem.sample(1, 0.4, &mut rng).unwrap();
            counts[b.indices[0]] += 1;
        }
        let expect = draws as f64 / n as f64;
        let sigma = (draws as f64 * (1.0 / n as f64) * (1.0 - 1.0 / n as f64)).sqrt();
        for (i, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - expect).abs() < 3.0 * sigma,
                "slot {i}: {c} vs {expect} ± {sigma}"
            );
        }
    }

    #[test]
    fn dominant_priority_dominates_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 8usize;
        let mut mem = ReplayMemory::new(n, PerParams { exponent: 1.0, ..PerParams::default() }, 0.8);
        for i in 0..n {
            mem.store(tagged(0.5, i), &mut rng);
        }
        let mut priorities = vec![1e-3; n];
        priorities[5] = 1e3; // 10⁶× the rest
        mem.update_priorities(&(0..n).collect::<Vec<_>>(), &priorities);
        let mut hits = 0usize;
        for _ in 0..1000 {
            if mem.sample(1, 1.0, &mut rng).unwrap().indices[0] == 5 {
                hits += 1;
            }
        }
        assert!(hits > 990, "dominant sample hit only {hits}/1000 draws");
    }

    #[test]
    fn weights_are_max_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut mem = ReplayMemory::new(32, PerParams::default(), 0.8);
        for i in 0..32 {
            mem.store(tagged(0.5, i), &mut rng);
        }
        mem.update_priorities(&(0..32).collect::<Vec<_>>(), &(0..32).map(|i| i as f64).collect::<Vec<_>>());
        for _ in 0..50 {
            let b = mem.sample(8, 0.7, &mut rng).unwrap();
            assert!(b.weights.iter().all(|&w| w <= 1.0 + 1e-12 && w > 0.0));
            assert!(b.weights.iter().any(|&w| (w - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn sample_returns_none_until_batch_available() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut mem = ReplayMemory::new(8, PerParams::default(), 0.8);
        mem.store(transition(0.5), &mut rng);
        assert!(mem.sample(2, 0.4, &mut rng).is_none());
        mem.store(transition(0.6), &mut rng);
        assert!(mem.sample(2, 0.4, &mut rng).is_some());
    }
}
