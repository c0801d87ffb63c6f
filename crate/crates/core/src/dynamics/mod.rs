//! Piecewise-constant-pulse time evolution, fidelity functionals, RL
//! state encodings and the bang-bang action alphabet.
//!
//! Closed states evolve under e^{−iH(u)·dt}; open states evolve as
//! column-stacked density matrices under e^{G(u)·dt} with G the Lindblad
//! generator. Because the bang-bang alphabet is finite (2^M actions), a
//! [`PropagatorTable`] precomputes every per-segment propagator once and
//! episode stepping reduces to matrix–vector products.

mod bloch;
mod env;

pub use bloch::BlochAffineGenerator;
pub use env::{ControlEnv, EnvState};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{build_liouvillian, expm, ComplexMatrix, GeneratorBasis, StateVector};
use crate::systems::SystemSpec;

/// RL observation: a real-vector encoding of a quantum state.
pub type AgentState = Vec<f64>;

/// Ordered per-segment control vectors with a fixed segment duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub segments: Vec<Vec<f64>>,
    pub dt: f64,
}

impl PulseSequence {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.segments.len() as f64
    }

    /// Check amplitude bounds and the segment-count cap of `spec`.
    pub fn validate(&self, spec: &SystemSpec) -> Result<()> {
        if self.segments.len() > spec.n_max {
            return Err(Error::ControlBounds(format!(
                "{} segments exceeds n_max={}",
                self.segments.len(),
                spec.n_max
            )));
        }
        for (s, seg) in self.segments.iter().enumerate() {
            check_controls(spec, seg).map_err(|e| Error::ControlBounds(format!("segment {s}: {e}")))?;
        }
        Ok(())
    }
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedState {
    amplitudes: StateVector,
}

impl ClosedState {
    pub fn new(amplitudes: StateVector) -> Result<Self> {
        if (amplitudes.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::validation("state", format!("norm {} is not 1", amplitudes.norm())));
        }
        Ok(Self { amplitudes })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        Self { amplitudes: StateVector::basis_state(dim, index) }
    }

    pub fn amplitudes(&self) -> &StateVector {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.dim()
    }
}

/// Density matrix with unit trace, bounded purity and non-negative
/// spectrum (to tolerance).
#[derive(Debug, Clone, PartialEq)]
pub struct OpenState {
    density: ComplexMatrix,
}

impl OpenState {
    pub fn new(density: ComplexMatrix) -> Result<Self> {
        if !density.is_square() {
            return Err(Error::validation("density", "not square"));
        }
        if !density.is_hermitian(1e-10) {
            return Err(Error::validation(
                "density",
                format!("not Hermitian (residue {:.3e})", density.hermiticity_residue()),
            ));
        }
        let tr = density.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::validation("density", format!("trace {tr} is not 1")));
        }
        let purity = density.matmul(&density).trace().re;
        if purity > 1.0 + 1e-10 {
            return Err(Error::validation("density", format!("purity {purity} exceeds 1")));
        }
        let min_eig = density.hermitian_eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -1e-9 {
            return Err(Error::validation("density", format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { density })
    }

    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        Self::new(psi.outer())
    }

    pub fn density(&self) -> &ComplexMatrix {
        &self.density
    }

    pub fn dim(&self) -> usize {
        self.density.rows()
    }
}

/// The 2^M bang-bang action alphabet for control bounds (G_1, …, G_M).
///
/// Bit m of the action index (least-significant bit ↔ control 1) selects
/// +G_m when set and −G_m when clear, so action 0 is (−G_1, …, −G_M) and
/// action 2^M − 1 is (+G_1, …, +G_M).
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSet {
    bounds: Vec<f64>,
}

impl ActionSet {
    pub fn new(bounds: Vec<f64>) -> Self {
        Self { bounds }
    }

    pub fn from_spec(spec: &SystemSpec) -> Self {
        Self { bounds: spec.controls.iter().map(|c| c.bound).collect() }
    }

    pub fn control_count(&self) -> usize {
        self.bounds.len()
    }

    pub fn size(&self) -> usize {
        1 << self.bounds.len()
    }

    /// Decode an action index into a control vector.
    pub fn controls_for(&self, action: usize) -> Result<Vec<f64>> {
        if action >= self.size() {
            return Err(Error::ControlBounds(format!("action {action} out of range [0, {})", self.size())));
        }
        Ok(self
            .bounds
            .iter()
            .enumerate()
            .map(|(m, g)| if (action >> m) & 1 == 1 { *g } else { -*g })
            .collect())
    }
}

/// Decode an action index against an action set.
pub fn action_to_controls(action: usize, set: &ActionSet) -> Result<Vec<f64>> {
    set.controls_for(action)
}

fn check_controls(spec: &SystemSpec, controls: &[f64]) -> Result<()> {
    if controls.len() != spec.controls.len() {
        return Err(Error::ControlBounds(format!(
            "got {} control amplitudes, system has {}",
            controls.len(),
            spec.controls.len()
        )));
    }
    for (m, (u, term)) in controls.iter().zip(&spec.controls).enumerate() {
        if u.abs() > term.bound + 1e-12 {
            return Err(Error::ControlBounds(format!("|u_{}| = {} exceeds bound {}", m + 1, u.abs(), term.bound)));
        }
    }
    Ok(())
}

/// Total Hamiltonian H0 + Σ u_m H_m.
pub fn hamiltonian(spec: &SystemSpec, controls: &[f64]) -> ComplexMatrix {
    let mut h = spec.h0.clone();
    for (u, term) in controls.iter().zip(&spec.controls) {
        h.axpy((*u).into(), &term.hamiltonian);
    }
    h
}

/// One piecewise-constant segment of Schrödinger evolution (ħ = 1).
pub fn evolve_closed(spec: &SystemSpec, state: &ClosedState, controls: &[f64], dt: f64) -> Result<ClosedState> {
    check_controls(spec, controls)?;
    let u = expm(&hamiltonian(spec, controls).scale(Complex64::new(0.0, -dt)))?;
    Ok(ClosedState { amplitudes: StateVector(u.matvec(&state.amplitudes.0)) })
}

/// Drift and per-control Lindblad generators for one system; the full
/// generator for a control vector u is drift + Σ u_m · control_m.
#[derive(Debug, Clone)]
pub struct OpenGenerator {
    dim: usize,
    drift: ComplexMatrix,
    controls: Vec<ComplexMatrix>,
}

impl OpenGenerator {
    pub fn from_spec(spec: &SystemSpec) -> Result<Self> {
        let lindblads: Vec<ComplexMatrix> = spec.lindblads.iter().map(|d| d.operator.clone()).collect();
        let rates: Vec<f64> = spec.lindblads.iter().map(|d| d.rate).collect();
        let drift = build_liouvillian(&spec.h0, &lindblads, &rates)?.generator().clone();
        let controls = spec
            .controls
            .iter()
            .map(|c| Ok(build_liouvillian(&c.hamiltonian, &[], &[])?.generator().clone()))
            .collect::<Result<_>>()?;
        Ok(Self { dim: spec.dim, drift, controls })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn drift(&self) -> &ComplexMatrix {
        &self.drift
    }

    pub fn control_parts(&self) -> &[ComplexMatrix] {
        &self.controls
    }

    pub fn generator(&self, controls: &[f64]) -> ComplexMatrix {
        let mut g = self.drift.clone();
        for (u, part) in controls.iter().zip(&self.controls) {
            g.axpy((*u).into(), part);
        }
        g
    }
}

/// One piecewise-constant segment of Lindblad evolution.
pub fn evolve_open(spec: &SystemSpec, state: &OpenState, controls: &[f64], dt: f64) -> Result<OpenState> {
    check_controls(spec, controls)?;
    let gen = OpenGenerator::from_spec(spec)?;
    let prop = expm(&gen.generator(controls).scale(dt.into()))?;
    let rho = ComplexMatrix::unvec(&prop.matvec(&state.density.vec()), spec.dim);
    Ok(OpenState { density: rho })
}

/// |⟨ψ|ψ_f⟩|², invariant under global phase.
pub fn fidelity_closed(state: &ClosedState, target: &ClosedState) -> Result<f64> {
    if state.dim() != target.dim() {
        return Err(Error::dim("fidelity_closed", format!("{} vs {}", state.dim(), target.dim())));
    }
    Ok(state.amplitudes.inner(&target.amplitudes).norm_sqr())
}

/// Coherence vector y_l = tr(Y_l ρ).
pub fn bloch_vector(state: &OpenState, basis: &GeneratorBasis) -> Result<Vec<f64>> {
    basis.coefficients(&state.density)
}

/// Open-system performance J = 1 − n/(8(n−1))·‖y_f − y‖²; equals 1 iff
/// y = y_f and stays within [0, 1] for valid states.
pub fn cost_open(y: &[f64], y_target: &[f64], n: usize) -> Result<f64> {
    if y.len() != y_target.len() {
        return Err(Error::dim("cost_open", format!("{} vs {}", y.len(), y_target.len())));
    }
    let dist2: f64 = y.iter().zip(y_target).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(1.0 - n as f64 / (8.0 * (n as f64 - 1.0)) * dist2)
}

/// Real encoding of a pure state: (Re⟨0|ψ⟩, Im⟨0|ψ⟩, …), length 2n.
pub fn encode_closed(state: &ClosedState) -> AgentState {
    let mut out = Vec::with_capacity(2 * state.dim());
    for z in &state.amplitudes.0 {
        out.push(z.re);
        out.push(z.im);
    }
    out
}

/// Real encoding of a density matrix: its Bloch vector, length n²−1.
pub fn encode_open(state: &OpenState, basis: &GeneratorBasis) -> Result<AgentState> {
    bloch_vector(state, basis)
}

/// Precomputed per-action propagators: 2^M unitaries for closed systems
/// or 2^M Liouvillian exponentials for open ones.
#[derive(Debug, Clone)]
pub struct PropagatorTable {
    open: bool,
    dim: usize,
    actions: ActionSet,
    propagators: Vec<ComplexMatrix>,
}

impl PropagatorTable {
    pub fn build(spec: &SystemSpec, dt: f64) -> Result<Self> {
        let actions = ActionSet::from_spec(spec);
        let mut propagators = Vec::with_capacity(actions.size());
        if spec.is_open() {
            let gen = OpenGenerator::from_spec(spec)?;
            for a in 0..actions.size() {
                let u = actions.controls_for(a)?;
                propagators.push(expm(&gen.generator(&u).scale(dt.into()))?);
            }
        } else {
            for a in 0..actions.size() {
                let u = actions.controls_for(a)?;
                propagators.push(expm(&hamiltonian(spec, &u).scale(Complex64::new(0.0, -dt)))?);
            }
        }
        Ok(Self { open: spec.is_open(), dim: spec.dim, actions, propagators })
    }

    pub fn len(&self) -> usize {
        self.propagators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.propagators.is_empty()
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn actions(&self) -> &ActionSet {
        &self.actions
    }

    pub fn propagator(&self, action: usize) -> &ComplexMatrix {
        &self.propagators[action]
    }

    /// Apply action `a` to a raw state vector (length n closed, n² open).
    pub fn apply(&self, action: usize, state: &[Complex64]) -> Vec<Complex64> {
        self.propagators[action].matvec(state)
    }
}
