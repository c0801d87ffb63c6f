//! From-scratch deep Q-network agent: MLP + Adam, target network,
//! ε-greedy policy, prioritized replay with the fidelity-aware store
//! rule, and the piecewise-logarithmic reward table.

mod net;
mod replay;
mod reward;

pub use net::{AdamParams, Batch, QNetwork, TdOutcome, Trainer};
pub use replay::{PerParams, ReplayMemory, SampledBatch, Transition};
pub use reward::{EpsilonSchedule, RewardBand, RewardSchedule};

use rand::Rng;

use crate::error::Result;

/// Everything needed to assemble one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct DqnConfig {
    pub hidden: [usize; 2],
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub memory_size: usize,
    pub replace_iteration: usize,
    pub epsilon_initial: f64,
    pub epsilon_decay: f64,
    pub decay_period: usize,
    /// μ₁: probability that a higher-fidelity resident survives an overwrite.
    pub store_threshold: f64,
    pub per: PerParams,
}

impl DqnConfig {
    /// Shared defaults; memory size, replace iteration and ε-decay come
    /// from the per-system table.
    pub fn standard(memory_size: usize, replace_iteration: usize, epsilon_decay: f64) -> Self {
        Self {
            hidden: [256, 256],
            gamma: 0.95,
            learning_rate: 1e-4,
            batch_size: 128,
            memory_size,
            replace_iteration,
            epsilon_initial: 0.2,
            epsilon_decay,
            decay_period: 10,
            store_threshold: 0.8,
            per: PerParams::default(),
        }
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Deep Q-network agent. Single-writer: only its owning training loop
/// mutates the network, memory and schedules.
pub struct DqnAgent {
    net: QNetwork,
    target: QNetwork,
    trainer: Trainer,
    memory: ReplayMemory,
    epsilon: EpsilonSchedule,
    batch_size: usize,
    replace_iteration: usize,
    updates: u64,
}

impl DqnAgent {
    pub fn new(obs_dim: usize, n_actions: usize, config: &DqnConfig, rng: &mut impl Rng) -> Self {
        assert!(
            config.memory_size >= config.batch_size,
            "memory size {} below batch size {}",
            config.memory_size,
            config.batch_size
        );
        let sizes = [obs_dim, config.hidden[0], config.hidden[1], n_actions];
        let net = QNetwork::new(&sizes, rng);
        let mut target = QNetwork::zeroed(&sizes);
        target.copy_from(&net);
        let trainer = Trainer::new(config.gamma, AdamParams::with_learning_rate(config.learning_rate), net.param_count());
        Self {
            net,
            target,
            trainer,
            memory: ReplayMemory::new(config.memory_size, config.per, config.store_threshold),
            epsilon: EpsilonSchedule::new(config.epsilon_initial, config.epsilon_decay, config.decay_period),
            batch_size: config.batch_size,
            replace_iteration: config.replace_iteration,
            updates: 0,
        }
    }

    pub fn network(&self) -> &QNetwork {
        &self.net
    }

    pub fn target_network(&self) -> &QNetwork {
        &self.target
    }

    pub fn memory(&self) -> &ReplayMemory {
        &self.memory
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.epsilon()
    }

    pub fn epsilon_schedule(&self) -> &EpsilonSchedule {
        &self.epsilon
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn q_values(&self, obs: &[f64]) -> Result<Vec<f64>> {
        self.net.forward(obs)
    }

    /// ε-greedy selection: uniform with probability ε, otherwise the
    /// greedy action with lowest-index tie-breaking.
    pub fn select_action(&self, obs: &[f64], rng: &mut impl Rng) -> Result<usize> {
        let n = self.net.output_dim();
        if rng.gen::<f64>() < self.epsilon.epsilon() {
            return Ok(rng.gen_range(0..n));
        }
        Ok(argmax(&self.net.forward(obs)?))
    }

    pub fn store(&mut self, transition: Transition, rng: &mut impl Rng) {
        self.memory.store(transition, rng);
    }

    /// One training update, gated on a full memory pool. `beta` is the
    /// importance-sampling exponent for this point of the run.
    pub fn train_step(&mut self, beta: f64, rng: &mut impl Rng) -> Result<Option<f64>> {
        if !self.memory.is_full() {
            return Ok(None);
        }
        let sampled = match self.memory.sample(self.batch_size, beta, rng) {
            Some(s) => s,
            None => return Ok(None),
        };
        let outcome = {
            let mut batch = Batch {
                states: Vec::with_capacity(sampled.indices.len()),
                actions: Vec::with_capacity(sampled.indices.len()),
                rewards: Vec::with_capacity(sampled.indices.len()),
                next_states: Vec::with_capacity(sampled.indices.len()),
                terminals: Vec::with_capacity(sampled.indices.len()),
                weights: sampled.weights.clone(),
            };
            for &i in &sampled.indices {
                let t = self.memory.get(i);
                batch.states.push(t.state.as_slice());
                batch.actions.push(t.action);
                batch.rewards.push(t.reward);
                batch.next_states.push(t.next_state.as_slice());
                batch.terminals.push(t.terminal);
            }
            self.trainer.td_update(&mut self.net, &self.target, &batch)?
        };
        self.memory.update_priorities(&sampled.indices, &outcome.td_abs);
        self.updates += 1;
        if self.updates % self.replace_iteration as u64 == 0 {
            self.target.copy_from(&self.net);
        }
        Ok(Some(outcome.loss))
    }

    /// Periodic ε decay; the caller drives this once per decay period.
    pub fn decay_epsilon(&mut self) {
        self.epsilon.decay();
    }

    /// Excitation at a task boundary: restore ε to its initial value.
    /// Network weights, optimizer state and memory all persist.
    pub fn excite(&mut self) {
        self.epsilon.reset();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn config(memory: usize) -> DqnConfig {
        DqnConfig {
            hidden: [16, 16],
            batch_size: 8,
            ..DqnConfig::standard(memory, 10, 0.999)
        }
    }

    fn transition(rng: &mut impl Rng, obs_dim: usize, n_actions: usize) -> Transition {
        Transition {
            state: (0..obs_dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            action: rng.gen_range(0..n_actions),
            reward: rng.gen_range(-1.0..1.0),
            next_state: (0..obs_dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            fidelity: rng.gen::<f64>(),
            terminal: rng.gen::<f64>() < 0.1,
        }
    }

    #[test]
    fn pure_exploration_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let mut cfg = config(64);
        cfg.epsilon_initial = 1.0;
        let agent = DqnAgent::new(3, 4, &cfg, &mut rng);
        let obs = [0.1, 0.2, 0.3];
        let draws = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..draws {
            counts[agent.select_action(&obs, &mut rng).unwrap()] += 1;
        }
        let expect = draws as f64 / 4.0;
        let sigma = (draws as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - expect).abs() < 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn greedy_action_and_tie_breaking() {
        assert_eq!(argmax(&[0.1, 0.9, 0.3]), 1);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[-1.0]), 0);
    }

    #[test]
    fn greedy_choice_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let q: Vec<f64> = (0..6).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let scale = rng.gen_range(1e-3..1e3);
            let scaled: Vec<f64> = q.iter().map(|v| v * scale).collect();
            assert_eq!(argmax(&q), argmax(&scaled));
        }
    }

    #[test]
    fn training_waits_for_a_full_pool() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let cfg = config(32);
        let mut agent = DqnAgent::new(3, 4, &cfg, &mut rng);
        for k in 0..31 {
            let t = transition(&mut rng, 3, 4);
            agent.store(t, &mut rng);
            assert!(agent.train_step(0.4, &mut rng).unwrap().is_none(), "trained early at {k}");
        }
        let t = transition(&mut rng, 3, 4);
        agent.store(t, &mut rng);
        assert!(agent.train_step(0.4, &mut rng).unwrap().is_some());
    }

    #[test]
    fn target_syncs_on_schedule() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let mut cfg = config(16);
        cfg.replace_iteration = 5;
        let mut agent = DqnAgent::new(3, 4, &cfg, &mut rng);
        for _ in 0..16 {
            let t = transition(&mut rng, 3, 4);
            agent.store(t, &mut rng);
        }
        for step in 1..=10u64 {
            agent.train_step(0.4, &mut rng).unwrap().unwrap();
            let synced = agent.network().params() == agent.target_network().params();
            if step % 5 == 0 {
                assert!(synced, "target must sync at update {step}");
            } else {
                assert!(!synced, "target must stay frozen at update {step}");
            }
        }
    }

    #[test]
    fn fixed_seed_gives_bitwise_identical_trajectories() {
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(34);
            let cfg = config(16);
            let mut agent = DqnAgent::new(3, 4, &cfg, &mut rng);
            let mut stream = ChaCha8Rng::seed_from_u64(99);
            for _ in 0..200 {
                let t = transition(&mut stream, 3, 4);
                agent.store(t, &mut rng);
                agent.train_step(0.4, &mut rng).unwrap();
            }
            agent.network().params().to_vec()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn parameters_stay_finite_under_training() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let cfg = config(16);
        let mut agent = DqnAgent::new(3, 4, &cfg, &mut rng);
        for _ in 0..300 {
            let t = transition(&mut rng, 3, 4);
            agent.store(t, &mut rng);
            agent.train_step(0.7, &mut rng).unwrap();
        }
        assert!(agent.network().finite());
    }
}
