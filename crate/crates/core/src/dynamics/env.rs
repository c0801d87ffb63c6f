//! Episode-stepping facade over a system and its propagator cache.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{gell_mann_basis, GeneratorBasis, StateVector};
use crate::systems::SystemSpec;

use super::{cost_open, AgentState, PropagatorTable, PulseSequence};

/// Raw evolving state: n amplitudes (closed) or n² density entries
/// (open, column-stacked).
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState(pub Vec<Complex64>);

enum Repr {
    Closed { target: StateVector },
    Open { basis_entries: Vec<Vec<Complex64>>, target_y: Vec<f64> },
}

/// Single-system environment: owns the propagator cache and the target,
/// maps actions to segments and states to observations and fidelities.
pub struct ControlEnv {
    spec: SystemSpec,
    table: PropagatorTable,
    repr: Repr,
    initial: EnvState,
    dt_value: f64,
}

impl ControlEnv {
    pub fn new(spec: &SystemSpec) -> Result<Self> {
        Self::with_dt(spec, spec.dt)
    }

    pub fn with_dt(spec: &SystemSpec, dt: f64) -> Result<Self> {
        let table = PropagatorTable::build(spec, dt)?;
        let (repr, initial) = if spec.is_open() {
            let basis = gell_mann_basis(spec.dim)?;
            // y_l = Re Σ_k rowmajor(Y_l)[k] · vec(ρ)[k]; see bloch_vector.
            let basis_entries: Vec<Vec<Complex64>> =
                basis.generators().iter().map(|y| y.entries().to_vec()).collect();
            let target_rho = spec.target.outer();
            let target_y = basis.coefficients(&target_rho)?;
            let initial = EnvState(spec.initial.outer().vec());
            (Repr::Open { basis_entries, target_y }, initial)
        } else {
            (Repr::Closed { target: spec.target.clone() }, EnvState(spec.initial.0.clone()))
        };
        Ok(Self { spec: spec.clone(), table, repr, initial, dt_value: dt })
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn action_count(&self) -> usize {
        self.table.len()
    }

    pub fn observation_dim(&self) -> usize {
        match &self.repr {
            Repr::Closed { .. } => 2 * self.spec.dim,
            Repr::Open { basis_entries, .. } => basis_entries.len(),
        }
    }

    pub fn max_steps(&self) -> usize {
        self.spec.n_max
    }

    pub fn dt(&self) -> f64 {
        self.dt_value
    }

    pub fn reset(&self) -> EnvState {
        self.initial.clone()
    }

    /// Start from a caller-provided pure state (closed systems only;
    /// the open benchmarks fix their initial state).
    pub fn reset_from(&self, psi: &StateVector) -> Result<EnvState> {
        match &self.repr {
            Repr::Closed { .. } => {
                if psi.dim() != self.spec.dim {
                    return Err(Error::dim("reset_from", format!("{} vs {}", psi.dim(), self.spec.dim)));
                }
                Ok(EnvState(psi.0.clone()))
            }
            Repr::Open { .. } => Err(Error::validation(
                "initial",
                "open-system benchmarks use the fixed initial state",
            )),
        }
    }

    pub fn step(&self, state: &EnvState, action: usize) -> EnvState {
        EnvState(self.table.apply(action, &state.0))
    }

    pub fn observe(&self, state: &EnvState) -> AgentState {
        match &self.repr {
            Repr::Closed { .. } => {
                let mut out = Vec::with_capacity(2 * state.0.len());
                for z in &state.0 {
                    out.push(z.re);
                    out.push(z.im);
                }
                out
            }
            Repr::Open { basis_entries, .. } => basis_entries
                .iter()
                .map(|row| row.iter().zip(&state.0).map(|(a, b)| a * b).sum::<Complex64>().re)
                .collect(),
        }
    }

    /// Fidelity of the current state against the target: |⟨ψ|ψ_f⟩|² for
    /// closed systems, the Bloch-distance functional for open ones.
    pub fn fidelity(&self, state: &EnvState) -> f64 {
        match &self.repr {
            Repr::Closed { target } => {
                let inner: Complex64 = target.0.iter().zip(&state.0).map(|(t, s)| t.conj() * s).sum();
                inner.norm_sqr()
            }
            Repr::Open { basis_entries, target_y } => {
                let y: Vec<f64> = basis_entries
                    .iter()
                    .map(|row| row.iter().zip(&state.0).map(|(a, b)| a * b).sum::<Complex64>().re)
                    .collect();
                cost_open(&y, target_y, self.spec.dim).expect("matching bloch dimensions")
            }
        }
    }

    /// Decode a list of action indices into the pulse sequence they apply.
    pub fn decode_actions(&self, actions: &[usize]) -> Result<PulseSequence> {
        let segments = actions
            .iter()
            .map(|&a| self.table.actions().controls_for(a))
            .collect::<Result<Vec<_>>>()?;
        Ok(PulseSequence { segments, dt: self.dt_value })
    }

    pub fn generator_basis(&self) -> Option<GeneratorBasis> {
        if self.spec.is_open() {
            gell_mann_basis(self.spec.dim).ok()
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{encode_closed, ClosedState};
    use crate::systems::builtin;

    #[test]
    fn closed_env_observation_matches_encoding() {
        let spec = builtin("q2").unwrap();
        let env = ControlEnv::new(&spec).unwrap();
        let s = env.reset();
        let obs = env.observe(&s);
        let direct = encode_closed(&ClosedState::new(spec.initial.clone()).unwrap());
        assert_eq!(obs, direct);
        assert_eq!(env.observation_dim(), 8);
        assert_eq!(env.action_count(), 16);
    }

    #[test]
    fn open_env_fidelity_starts_below_one_and_is_bounded() {
        let spec = builtin("open3").unwrap();
        let env = ControlEnv::new(&spec).unwrap();
        let mut s = env.reset();
        let f0 = env.fidelity(&s);
        assert!(f0 >= 0.0 && f0 < 1.0, "initial J = {f0}");
        for a in [0usize, 1, 2, 3, 0, 1] {
            s = env.step(&s, a);
            let f = env.fidelity(&s);
            assert!((0.0..=1.0 + 1e-12).contains(&f), "J = {f}");
        }
        assert_eq!(env.observation_dim(), 8);
    }

    #[test]
    fn closed_env_reaches_unit_fidelity_on_known_pulse() {
        // Single-qubit σx spec: π rotation in one dt = π/2 segment.
        let spec = crate::systems::SystemSpec {
            name: "sx".into(),
            kind: crate::systems::SystemKind::Closed,
            dim: 2,
            h0: crate::numerics::ComplexMatrix::zeros(2, 2),
            controls: vec![crate::systems::ControlTerm {
                hamiltonian: crate::numerics::sigma_x(),
                bound: 1.0,
            }],
            lindblads: vec![],
            n_max: 4,
            dt: std::f64::consts::FRAC_PI_2,
            initial: StateVector::basis_state(2, 0),
            target: StateVector::basis_state(2, 1),
        };
        let env = ControlEnv::new(&spec).unwrap();
        let s = env.step(&env.reset(), 1); // +G = +1 on σx
        assert!((env.fidelity(&s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decode_actions_round_trip() {
        let spec = builtin("q2").unwrap();
        let env = ControlEnv::new(&spec).unwrap();
        let pulses = env.decode_actions(&[0, 15, 5]).unwrap();
        assert_eq!(pulses.segments[0], vec![-4.0, -4.0, -4.0, -4.0]);
        assert_eq!(pulses.segments[1], vec![4.0, 4.0, 4.0, 4.0]);
        assert_eq!(pulses.segments[2], vec![4.0, -4.0, 4.0, -4.0]);
        assert_eq!(pulses.dt, spec.dt);
    }
}
