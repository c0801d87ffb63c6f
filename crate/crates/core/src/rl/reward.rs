//! Piecewise-logarithmic reward and the ε-greedy decay schedule.

/// One fidelity interval with its (bias, slope) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardBand {
    pub lower: f64,
    pub upper: f64,
    pub bias: f64,
    pub slope: f64,
}

/// Terminal reward r = k₁ + k₂·log₁₀(1−F), fired when F exceeds the
/// episode's target difficulty or the step budget runs out; zero
/// otherwise. The (k₁, k₂) pair depends on which fidelity interval F
/// falls into, arranged so the terminal reward increases strictly with
/// fidelity across the whole [0, 1) range.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardSchedule {
    bands: Vec<RewardBand>,
    n_max: usize,
}

/// 1−F is clamped here so F = 1 keeps the reward finite.
const INFIDELITY_FLOOR: f64 = 1e-12;

impl RewardSchedule {
    /// The four-band production table.
    pub fn standard(n_max: usize) -> Self {
        Self {
            bands: vec![
                RewardBand { lower: 0.0, upper: 0.9, bias: 0.0, slope: -10.0 },
                RewardBand { lower: 0.9, upper: 0.99, bias: 60.0, slope: -10.0 },
                RewardBand { lower: 0.99, upper: 0.999, bias: -10.0, slope: -100.0 },
                RewardBand { lower: 0.999, upper: f64::INFINITY, bias: -800.0, slope: -400.0 },
            ],
            n_max,
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn bands(&self) -> &[RewardBand] {
        &self.bands
    }

    fn band(&self, fidelity: f64) -> &RewardBand {
        self.bands
            .iter()
            .rev()
            .find(|b| fidelity >= b.lower)
            .unwrap_or(&self.bands[0])
    }

    /// Terminal value of the table at fidelity F (no gating).
    pub fn terminal_value(&self, fidelity: f64) -> f64 {
        let band = self.band(fidelity);
        band.bias + band.slope * (1.0 - fidelity).max(INFIDELITY_FLOOR).log10()
    }

    /// Reward for step `step` (1-based count of pulses applied so far)
    /// against task difficulty `difficulty`.
    pub fn reward(&self, fidelity: f64, step: usize, difficulty: f64) -> f64 {
        if fidelity > difficulty || step == self.n_max {
            self.terminal_value(fidelity)
        } else {
            0.0
        }
    }
}

/// ε-greedy exploration rate with periodic decay (1−ε) ← (1−ε)/λ, driven
/// every `period` episodes; clamped to [0, ε₀]. Excitation resets ε to
/// ε₀ at task boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSchedule {
    epsilon: f64,
    initial: f64,
    decay: f64,
    period: usize,
}

impl EpsilonSchedule {
    pub fn new(initial: f64, decay: f64, period: usize) -> Self {
        assert!(decay > 0.0 && decay < 1.0, "decay factor must lie in (0, 1)");
        assert!(period >= 1, "decay period must be ≥ 1");
        Self { epsilon: initial, initial, decay, period }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn initial(&self) -> f64 {
        self.initial
    }

    pub fn period(&self) -> usize {
        self.period
    }

    /// One decay application.
    pub fn decay(&mut self) {
        self.epsilon = (1.0 - (1.0 - self.epsilon) / self.decay).clamp(0.0, self.initial);
    }

    /// Reset to ε₀ for a new task.
    pub fn reset(&mut self) {
        self.epsilon = self.initial;
    }
}
