//! Curriculum-driven DQN training: fidelity-defined tasks, static and
//! dynamic task chains, smart episodes with early termination, the
//! success-count stop criterion, excitation at task boundaries, and the
//! two ablation modes (fixed-length and fixed-target training).
//!
//! Knowledge transfers between tasks through persistence: one agent, one
//! replay memory and one optimizer live across the whole chain; only the
//! exploration rate is re-excited when a task closes.

use std::time::Instant;

use rand::Rng;

use crate::dynamics::ControlEnv;
use crate::error::{Error, Result};
use crate::numerics::StateVector;
use crate::rl::{DqnAgent, DqnConfig, RewardSchedule, Transition};
use crate::systems::SystemSpec;

/// Task-generation mode for the curriculum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurriculumMode {
    Static,
    Dynamic,
}

/// The three DQN training variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DrlMethod {
    /// Curriculum of escalating fidelity targets.
    Cdrl,
    /// Fixed-length episodes: always exactly N_max pulses, reward only at the end.
    Drl1,
    /// Fixed empirical fidelity target for the whole run.
    Drl2,
}

/// Which static difficulty ladder a system uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemClass {
    TwoQubit,
    ThreeQubit,
    Other,
}

impl SystemClass {
    pub fn of(spec: &SystemSpec) -> Self {
        match spec.name.as_str() {
            "q2" => SystemClass::TwoQubit,
            "q3" => SystemClass::ThreeQubit,
            _ => SystemClass::Other,
        }
    }
}

/// Preset difficulty ladder: coarse steps up to 0.99, then 0.001 steps
/// up to 0.999. The 2-qubit ladder uses 0.02 below 0.99, everything
/// else 0.01.
pub fn static_schedule(class: SystemClass) -> Vec<f64> {
    let mut millis: Vec<u32> = Vec::new();
    let coarse_step = match class {
        SystemClass::TwoQubit => 20,
        _ => 10,
    };
    let mut v = 900;
    while v < 990 {
        millis.push(v);
        v += coarse_step;
    }
    millis.push(990);
    millis.extend(991..=999);
    millis.into_iter().map(|m| m as f64 / 1000.0).collect()
}

/// Median of a non-empty slice (mean of the central pair for even counts).
pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Outcome of dynamic task generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NextTask {
    Difficulty(f64),
    /// The difficulty increment fell below the finish threshold.
    Finished,
}

/// Derive the next task difficulty from the closed task's episode
/// fidelities: the median, clamped to at least `previous + delta_min`,
/// capped just below 1. Signals the end of the curriculum when the
/// resulting increment is below `finish_threshold`.
pub fn next_dynamic_task(
    log: &[f64],
    previous: f64,
    delta_min: f64,
    finish_threshold: f64,
) -> Result<NextTask> {
    if log.is_empty() {
        return Err(Error::dim("next_dynamic_task", "empty performance log".to_string()));
    }
    let candidate = median(log);
    let next = candidate.max(previous + delta_min).min(1.0 - 1e-6);
    if next - previous < finish_threshold {
        Ok(NextTask::Finished)
    } else {
        Ok(NextTask::Difficulty(next))
    }
}

/// Early-failure probe for static chains: a task that has never been hit
/// within the probe window marks the previous task as final.
pub fn early_failure_check(
    mode: CurriculumMode,
    hits: usize,
    episodes_in_task: usize,
    probe_window: usize,
) -> bool {
    mode == CurriculumMode::Static && hits == 0 && episodes_in_task >= probe_window
}

/// Settings for one DRL training run (any of the three methods).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSettings {
    pub dqn: DqnConfig,
    pub mode: CurriculumMode,
    /// SC: a task closes once its hit count exceeds this.
    pub success_threshold: usize,
    pub initial_difficulty: f64,
    pub delta_min: f64,
    pub finish_threshold: f64,
    pub probe_window: usize,
    pub episode_budget: usize,
    /// Fixed target for the drl2 ablation.
    pub drl2_target: f64,
}

/// Per-episode record in emission order.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub task_index: usize,
    pub difficulty: f64,
    pub fidelity: f64,
    pub steps: usize,
    pub cum_reward: f64,
    pub mean_reward: f64,
    pub epsilon: f64,
    pub wall_ms: f64,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    /// Dynamic chain converged (increment below threshold).
    CurriculumFinished,
    /// Static ladder exhausted.
    ListExhausted,
    /// Episode budget ran out.
    BudgetExhausted,
    /// Static probe window elapsed with zero hits; previous task is final.
    FinalTaskReached,
}

/// Complete log of one training run.
#[derive(Debug, Clone)]
pub struct RunLog {
    pub episodes: Vec<EpisodeRecord>,
    pub best_fidelity: f64,
    pub best_actions: Vec<usize>,
    pub best_steps: usize,
    pub tasks_closed: usize,
    pub end: EndReason,
}

/// Result of one smart episode.
#[derive(Debug, Clone)]
pub struct EpisodeOutcome {
    pub steps: usize,
    pub final_fidelity: f64,
    pub cum_reward: f64,
    pub actions: Vec<usize>,
}

/// Run one smart episode: act, propagate, reward, store, train (one
/// update per step once the pool is full). Terminates on F ≥ target or
/// at the step cap; the fixed-length mode always runs exactly N_max
/// steps and is rewarded only at the last one.
pub fn run_smart_episode(
    env: &ControlEnv,
    agent: &mut DqnAgent,
    schedule: &RewardSchedule,
    target: f64,
    method: DrlMethod,
    beta: f64,
    initial: Option<&StateVector>,
    rng: &mut impl Rng,
) -> Result<EpisodeOutcome> {
    // Gate for the reward table: fixed-length episodes only ever see the
    // end-of-episode branch.
    let reward_target = match method {
        DrlMethod::Drl1 => 2.0,
        _ => target,
    };
    let n_max = env.max_steps();
    let mut state = match initial {
        Some(psi) => env.reset_from(psi)?,
        None => env.reset(),
    };
    let mut obs = env.observe(&state);
    let mut actions = Vec::new();
    let mut cum_reward = 0.0;
    let mut fidelity = env.fidelity(&state);

    for step in 1..=n_max {
        let action = agent.select_action(&obs, rng)?;
        let next_state = env.step(&state, action);
        let next_obs = env.observe(&next_state);
        fidelity = env.fidelity(&next_state);
        let terminal = match method {
            DrlMethod::Drl1 => step == n_max,
            _ => fidelity >= target || step == n_max,
        };
        let reward = schedule.reward(fidelity, step, reward_target);
        cum_reward += reward;
        agent.train_step(beta, rng)?;
        agent.store(
            Transition { state: obs, action, reward, next_state: next_obs.clone(), fidelity, terminal },
            rng,
        );
        actions.push(action);
        state = next_state;
        obs = next_obs;
        if terminal {
            break;
        }
    }
    let steps = actions.len();
    Ok(EpisodeOutcome { steps, final_fidelity: fidelity, cum_reward, actions })
}

/// Train one agent on one system with the chosen method. Tasks close
/// once their hit count exceeds SC; the next difficulty comes from the
/// static ladder or the median rule; ε is re-excited at every task
/// boundary while network, memory and optimizer persist.
pub fn run_drl(
    env: &ControlEnv,
    class: SystemClass,
    settings: &TrainSettings,
    method: DrlMethod,
    initial: Option<&StateVector>,
    rng: &mut impl Rng,
) -> Result<RunLog> {
    let started = Instant::now();
    let schedule = RewardSchedule::standard(env.max_steps());
    let mut agent = DqnAgent::new(env.observation_dim(), env.action_count(), &settings.dqn, rng);

    let ladder = static_schedule(class);
    let mut task_index = 0usize;
    let mut difficulty = match (method, settings.mode) {
        (DrlMethod::Cdrl, CurriculumMode::Static) => ladder[0],
        (DrlMethod::Cdrl, CurriculumMode::Dynamic) => settings.initial_difficulty,
        (DrlMethod::Drl1, _) => 2.0,
        (DrlMethod::Drl2, _) => settings.drl2_target,
    };

    let mut episodes = Vec::new();
    let mut hits = 0usize;
    let mut performance_log: Vec<f64> = Vec::new();
    let mut episodes_in_task = 0usize;
    let mut best_fidelity = f64::NEG_INFINITY;
    let mut best_actions = Vec::new();
    let mut end = EndReason::BudgetExhausted;
    let mut tasks_closed = 0usize;

    for episode in 0..settings.episode_budget {
        let beta = settings.dqn.per.beta_at(episode as f64 / settings.episode_budget.max(1) as f64);
        let outcome = run_smart_episode(env, &mut agent, &schedule, difficulty, method, beta, initial, rng)?;

        episodes_in_task += 1;
        if episodes_in_task % agent.epsilon_schedule().period() == 0 {
            agent.decay_epsilon();
        }
        performance_log.push(outcome.final_fidelity);
        if outcome.final_fidelity >= difficulty {
            hits += 1;
        }
        if outcome.final_fidelity > best_fidelity {
            best_fidelity = outcome.final_fidelity;
            best_actions = outcome.actions.clone();
        }
        episodes.push(EpisodeRecord {
            episode,
            task_index,
            difficulty,
            fidelity: outcome.final_fidelity,
            steps: outcome.steps,
            cum_reward: outcome.cum_reward,
            mean_reward: outcome.cum_reward / outcome.steps.max(1) as f64,
            epsilon: agent.epsilon(),
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        });

        if method != DrlMethod::Cdrl {
            continue;
        }

        if hits > settings.success_threshold {
            tasks_closed += 1;
            match settings.mode {
                CurriculumMode::Static => {
                    if task_index + 1 >= ladder.len() {
                        end = EndReason::ListExhausted;
                        break;
                    }
                    task_index += 1;
                    difficulty = ladder[task_index];
                }
                CurriculumMode::Dynamic => {
                    match next_dynamic_task(
                        &performance_log,
                        difficulty,
                        settings.delta_min,
                        settings.finish_threshold,
                    )? {
                        NextTask::Difficulty(next) => {
                            task_index += 1;
                            difficulty = next;
                        }
                        NextTask::Finished => {
                            end = EndReason::CurriculumFinished;
                            break;
                        }
                    }
                }
            }
            hits = 0;
            performance_log.clear();
            episodes_in_task = 0;
            agent.excite();
        } else if early_failure_check(settings.mode, hits, episodes_in_task, settings.probe_window) {
            end = EndReason::FinalTaskReached;
            break;
        }
    }

    let best_steps = best_actions.len();
    Ok(RunLog { episodes, best_fidelity, best_actions, best_steps, tasks_closed, end })
}
