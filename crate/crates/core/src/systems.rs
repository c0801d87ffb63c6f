//! Catalog of the four benchmark control problems plus a JSON file
//! format for user-defined systems.
//!
//! Builtin names: `q2`, `q3`, `open3`, `open4`. The 2- and 3-qubit
//! benchmarks default to the |0…0⟩ → |1…1⟩ preparation pair and the open
//! benchmarks to |1⟩ → |n⟩; both can be overridden through system files.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{sigma_x, sigma_y, sigma_z, ComplexMatrix, StateVector};

const HERMITICITY_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Closed,
    Open,
}

/// One control Hamiltonian with its amplitude bound G > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlTerm {
    pub hamiltonian: ComplexMatrix,
    pub bound: f64,
}

/// One dissipation channel: jump operator plus rate γ ≥ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipationTerm {
    pub operator: ComplexMatrix,
    pub rate: f64,
}

/// Complete definition of one control problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub name: String,
    pub kind: SystemKind,
    pub dim: usize,
    pub h0: ComplexMatrix,
    pub controls: Vec<ControlTerm>,
    pub lindblads: Vec<DissipationTerm>,
    pub n_max: usize,
    pub dt: f64,
    pub initial: StateVector,
    pub target: StateVector,
}

/// Per-system training defaults (replay capacity, target-network cadence,
/// ε-decay factor, empirical fixed target for the drl2 ablation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemDefaults {
    pub memory_size: usize,
    pub replace_iteration: usize,
    pub epsilon_decay: f64,
    pub drl2_target: f64,
}

impl SystemSpec {
    /// Number of control fields M.
    pub fn control_count(&self) -> usize {
        self.controls.len()
    }

    /// Size of the bang-bang action alphabet, 2^M.
    pub fn action_count(&self) -> usize {
        1 << self.controls.len()
    }

    pub fn is_open(&self) -> bool {
        self.kind == SystemKind::Open
    }

    /// Validate every structural invariant, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim;
        let check_square = |m: &ComplexMatrix, field: &str| -> Result<()> {
            if m.rows() != n || m.cols() != n {
                return Err(Error::validation(
                    field,
                    format!("expected {n}x{n}, got {}x{}", m.rows(), m.cols()),
                ));
            }
            Ok(())
        };
        check_square(&self.h0, "h0")?;
        if !self.h0.is_hermitian(HERMITICITY_TOL) {
            return Err(Error::validation(
                "h0",
                format!("not Hermitian (residue {:.3e})", self.h0.hermiticity_residue()),
            ));
        }
        for (m, ctrl) in self.controls.iter().enumerate() {
            let field = format!("controls[{m}]");
            check_square(&ctrl.hamiltonian, &field)?;
            if !ctrl.hamiltonian.is_hermitian(HERMITICITY_TOL) {
                return Err(Error::validation(
                    field,
                    format!("not Hermitian (residue {:.3e})", ctrl.hamiltonian.hermiticity_residue()),
                ));
            }
            if !(ctrl.bound > 0.0) || !ctrl.bound.is_finite() {
                return Err(Error::validation(format!("controls[{m}].bound"), format!("must be > 0, got {}", ctrl.bound)));
            }
        }
        for (k, diss) in self.lindblads.iter().enumerate() {
            check_square(&diss.operator, &format!("lindblads[{k}]"))?;
            if !(diss.rate >= 0.0) {
                return Err(Error::validation(format!("lindblads[{k}].rate"), format!("must be ≥ 0, got {}", diss.rate)));
            }
        }
        if self.kind == SystemKind::Closed && !self.lindblads.is_empty() {
            return Err(Error::validation("lindblads", "closed systems must have no Lindblad operators"));
        }
        if self.n_max < 1 {
            return Err(Error::validation("n_max", "must be ≥ 1"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::validation("dt", format!("must be > 0, got {}", self.dt)));
        }
        for (field, state) in [("initial", &self.initial), ("target", &self.target)] {
            if state.dim() != n {
                return Err(Error::validation(field, format!("expected length {n}, got {}", state.dim())));
            }
            if (state.norm() - 1.0).abs() > NORM_TOL {
                return Err(Error::validation(field, format!("not normalized (norm {})", state.norm())));
            }
        }
        Ok(())
    }

    /// Table of per-system training defaults; file-loaded systems get the
    /// 2-qubit row as a conservative fallback.
    pub fn defaults(&self) -> SystemDefaults {
        match self.name.as_str() {
            "q3" => SystemDefaults {
                memory_size: 200_000,
                replace_iteration: 500,
                epsilon_decay: 0.9995,
                drl2_target: 0.99,
            },
            "open3" => SystemDefaults {
                memory_size: 20_000,
                replace_iteration: 100,
                epsilon_decay: 0.999,
                drl2_target: 0.99,
            },
            "open4" => SystemDefaults {
                memory_size: 100_000,
                replace_iteration: 300,
                epsilon_decay: 0.999,
                drl2_target: 0.97,
            },
            _ => SystemDefaults {
                memory_size: 20_000,
                replace_iteration: 100,
                epsilon_decay: 0.999,
                drl2_target: if self.is_open() { 0.99 } else { 0.999 },
            },
        }
    }

    /// Clone with a different segment duration.
    pub fn with_dt(&self, dt: f64) -> Self {
        let mut out = self.clone();
        out.dt = dt;
        out
    }
}

/// Load one of the four benchmark systems by name.
pub fn builtin(name: &str) -> Result<SystemSpec> {
    let spec = match name {
        "q2" => two_qubit(),
        "q3" => three_qubit(),
        "open3" => open_three_level(),
        "open4" => open_four_level(),
        other => return Err(Error::UnknownSystem(other.to_string())),
    };
    spec.validate()?;
    Ok(spec)
}

fn two_qubit() -> SystemSpec {
    let i2 = ComplexMatrix::identity(2);
    let controls = [sigma_x().kron(&i2), i2.kron(&sigma_x()), sigma_y().kron(&i2), i2.kron(&sigma_y())]
        .into_iter()
        .map(|hamiltonian| ControlTerm { hamiltonian, bound: 4.0 })
        .collect();
    SystemSpec {
        name: "q2".into(),
        kind: SystemKind::Closed,
        dim: 4,
        h0: sigma_z().kron(&sigma_z()),
        controls,
        lindblads: vec![],
        n_max: 40,
        dt: 0.0275,
        initial: StateVector::basis_state(4, 0),
        target: StateVector::basis_state(4, 3),
    }
}

fn three_qubit() -> SystemSpec {
    let i2 = ComplexMatrix::identity(2);
    let sx = sigma_x();
    let sz = sigma_z();
    let xx_i = sx.kron(&sx).kron(&i2);
    let i_xx = i2.kron(&sx.kron(&sx));
    let x_i_x = sx.kron(&i2).kron(&sx);
    let mut h0 = xx_i.add(&i_xx).add(&x_i_x);
    h0 = h0.scale(0.1.into());
    let singles = [
        sx.kron(&i2).kron(&i2),
        i2.kron(&sx).kron(&i2),
        i2.kron(&i2).kron(&sx),
        sz.kron(&i2).kron(&i2),
        i2.kron(&sz).kron(&i2),
        i2.kron(&i2).kron(&sz),
    ];
    SystemSpec {
        name: "q3".into(),
        kind: SystemKind::Closed,
        dim: 8,
        h0,
        controls: singles.into_iter().map(|hamiltonian| ControlTerm { hamiltonian, bound: 1.0 }).collect(),
        lindblads: vec![],
        n_max: 100,
        dt: 0.14,
        initial: StateVector::basis_state(8, 0),
        target: StateVector::basis_state(8, 7),
    }
}

fn ladder_coupling(n: usize, pairs: &[(usize, usize)]) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for &(a, b) in pairs {
        m[(a, b)] = Complex64::new(1.0, 0.0);
        m[(b, a)] = Complex64::new(1.0, 0.0);
    }
    m
}

fn open_three_level() -> SystemSpec {
    let h0 = ComplexMatrix::diag(&[0.4, 1.2, 2.4]); // 0.2·j(j+1), j = 1..3
    let h1 = ladder_coupling(3, &[(0, 1), (1, 2)]);
    let h2 = ladder_coupling(3, &[(0, 2)]);
    let lindblads = vec![
        DissipationTerm { operator: ComplexMatrix::unit(3, 0, 1).scale(0.4.into()), rate: 1.0 },
        DissipationTerm { operator: ComplexMatrix::unit(3, 0, 2).scale(0.2.into()), rate: 1.0 },
        DissipationTerm { operator: ComplexMatrix::unit(3, 1, 2).scale(0.3.into()), rate: 1.0 },
    ];
    SystemSpec {
        name: "open3".into(),
        kind: SystemKind::Open,
        dim: 3,
        h0,
        controls: vec![
            ControlTerm { hamiltonian: h1, bound: 1.0 },
            ControlTerm { hamiltonian: h2, bound: 1.0 },
        ],
        lindblads,
        n_max: 100,
        dt: 0.05,
        initial: StateVector::basis_state(3, 0),
        target: StateVector::basis_state(3, 2),
    }
}

fn open_four_level() -> SystemSpec {
    let h0 = ComplexMatrix::diag(&[0.5, 1.5, 3.0, 5.0]); // 0.25·j(j+1), j = 1..4
    let h1 = ladder_coupling(4, &[(0, 1), (1, 2), (2, 3)]);
    let h2 = ladder_coupling(4, &[(0, 2), (1, 3)]);
    let h3 = ladder_coupling(4, &[(0, 3)]);
    let (t12, t13, t14) = (0.4, 0.3, 0.2);
    let lindblads = vec![
        DissipationTerm { operator: ComplexMatrix::unit(4, 0, 1).scale(t12.into()), rate: 1.0 },
        DissipationTerm { operator: ComplexMatrix::unit(4, 0, 2).scale(t13.into()), rate: 1.0 },
        DissipationTerm { operator: ComplexMatrix::unit(4, 0, 3).scale(t14.into()), rate: 1.0 },
        DissipationTerm { operator: ComplexMatrix::unit(4, 1, 2).scale(t12.into()), rate: 1.0 },
        DissipationTerm { operator: ComplexMatrix::unit(4, 1, 3).scale(t13.into()), rate: 1.0 },
        DissipationTerm { operator: ComplexMatrix::unit(4, 2, 3).scale(t12.into()), rate: 1.0 },
    ];
    SystemSpec {
        name: "open4".into(),
        kind: SystemKind::Open,
        dim: 4,
        h0,
        controls: vec![
            ControlTerm { hamiltonian: h1, bound: 1.0 },
            ControlTerm { hamiltonian: h2, bound: 1.0 },
            ControlTerm { hamiltonian: h3, bound: 1.0 },
        ],
        lindblads,
        n_max: 100,
        dt: 0.06,
        initial: StateVector::basis_state(4, 0),
        target: StateVector::basis_state(4, 3),
    }
}

// ---------------------------------------------------------------------------
// File schema. Complex entries are [re, im] pairs; unknown fields are
// rejected so typos cannot silently change a system.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    kind: SystemKind,
    n: usize,
    h0: Vec<Vec<[f64; 2]>>,
    controls: Vec<ControlFile>,
    lindblads: Vec<LindbladFile>,
    n_max: usize,
    dt: f64,
    initial: Vec<[f64; 2]>,
    target: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControlFile {
    matrix: Vec<Vec<[f64; 2]>>,
    bound: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LindbladFile {
    matrix: Vec<Vec<[f64; 2]>>,
    rate: f64,
}

fn matrix_to_pairs(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows()).map(|r| (0..m.cols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect()
}

fn pairs_to_matrix(rows: &[Vec<[f64; 2]>], field: &str) -> Result<ComplexMatrix> {
    let converted: Vec<Vec<Complex64>> =
        rows.iter().map(|r| r.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()).collect();
    ComplexMatrix::from_rows(&converted).map_err(|_| Error::validation(field, "ragged matrix rows"))
}

fn pairs_to_state(v: &[[f64; 2]]) -> StateVector {
    StateVector(v.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
}

/// Load and validate a system file.
pub fn load(path: impl AsRef<Path>) -> Result<SystemSpec> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    let file: SystemFile = serde_json::from_str(&text)
        .map_err(|e| Error::Parse { path: path.display().to_string(), detail: e.to_string() })?;
    let name = path.file_stem().map_or_else(|| "custom".to_string(), |s| s.to_string_lossy().into_owned());
    let spec = SystemSpec {
        name,
        kind: file.kind,
        dim: file.n,
        h0: pairs_to_matrix(&file.h0, "h0")?,
        controls: file
            .controls
            .iter()
            .enumerate()
            .map(|(m, c)| {
                Ok(ControlTerm { hamiltonian: pairs_to_matrix(&c.matrix, &format!("controls[{m}]"))?, bound: c.bound })
            })
            .collect::<Result<_>>()?,
        lindblads: file
            .lindblads
            .iter()
            .enumerate()
            .map(|(k, l)| {
                Ok(DissipationTerm { operator: pairs_to_matrix(&l.matrix, &format!("lindblads[{k}]"))?, rate: l.rate })
            })
            .collect::<Result<_>>()?,
        n_max: file.n_max,
        dt: file.dt,
        initial: pairs_to_state(&file.initial),
        target: pairs_to_state(&file.target),
    };
    spec.validate()?;
    Ok(spec)
}

/// Write a spec in the file schema (full f64 precision).
pub fn save(spec: &SystemSpec, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = SystemFile {
        kind: spec.kind,
        n: spec.dim,
        h0: matrix_to_pairs(&spec.h0),
        controls: spec
            .controls
            .iter()
            .map(|c| ControlFile { matrix: matrix_to_pairs(&c.hamiltonian), bound: c.bound })
            .collect(),
        lindblads: spec
            .lindblads
            .iter()
            .map(|l| LindbladFile { matrix: matrix_to_pairs(&l.operator), rate: l.rate })
            .collect(),
        n_max: spec.n_max,
        dt: spec.dt,
        initial: spec.initial.0.iter().map(|z| [z.re, z.im]).collect(),
        target: spec.target.0.iter().map(|z| [z.re, z.im]).collect(),
    };
    let text = serde_json::to_string_pretty(&file).expect("system schema serializes");
    fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}
