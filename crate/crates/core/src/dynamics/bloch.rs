//! Affine Bloch-space form of the open-system flow.
//!
//! Expanding ρ in a traceless generator basis turns the Lindblad
//! equation into ẏ = (A_drift + Σ_m u_m A_m)·y + b with real matrices.
//! Segment propagation uses the exact exponential of the augmented
//! matrix [[A, b], [0, 0]]. The density-matrix route in
//! [`super::evolve_open`] is the production path; this form exists so
//! the two can be cross-checked against each other.

use num_complex::Complex64;

use crate::error::Result;
use crate::numerics::{build_liouvillian, expm, gell_mann_basis, ComplexMatrix, GeneratorBasis};
use crate::systems::SystemSpec;

#[derive(Debug, Clone)]
pub struct BlochAffineGenerator {
    basis: GeneratorBasis,
    drift: Vec<Vec<f64>>,
    controls: Vec<Vec<Vec<f64>>>,
    source: Vec<f64>,
}

impl BlochAffineGenerator {
    pub fn from_spec(spec: &SystemSpec) -> Result<Self> {
        let n = spec.dim;
        let basis = gell_mann_basis(n)?;
        let lindblads: Vec<ComplexMatrix> = spec.lindblads.iter().map(|d| d.operator.clone()).collect();
        let rates: Vec<f64> = spec.lindblads.iter().map(|d| d.rate).collect();
        let drift_gen = build_liouvillian(&spec.h0, &lindblads, &rates)?;
        let drift = superoperator_matrix(drift_gen.generator(), &basis)?;
        let mixed = ComplexMatrix::identity(n).scale(Complex64::new(1.0 / n as f64, 0.0));
        let source_matrix = ComplexMatrix::unvec(&drift_gen.apply(&mixed.vec()), n);
        let source = basis.coefficients(&source_matrix)?;
        let controls = spec
            .controls
            .iter()
            .map(|c| {
                let gen = build_liouvillian(&c.hamiltonian, &[], &[])?;
                superoperator_matrix(gen.generator(), &basis)
            })
            .collect::<Result<_>>()?;
        Ok(Self { basis, drift, controls, source })
    }

    pub fn basis(&self) -> &GeneratorBasis {
        &self.basis
    }

    pub fn drift_matrix(&self) -> &Vec<Vec<f64>> {
        &self.drift
    }

    pub fn source_term(&self) -> &[f64] {
        &self.source
    }

    /// A_drift + Σ u_m A_m for a control vector.
    pub fn coefficient_matrix(&self, controls: &[f64]) -> Vec<Vec<f64>> {
        let size = self.basis.len();
        let mut a = self.drift.clone();
        for (u, part) in controls.iter().zip(&self.controls) {
            for r in 0..size {
                for c in 0..size {
                    a[r][c] += u * part[r][c];
                }
            }
        }
        a
    }

    /// Exact segment propagation of ẏ = A·y + b over duration `dt`.
    pub fn propagate(&self, y0: &[f64], controls: &[f64], dt: f64) -> Result<Vec<f64>> {
        let size = self.basis.len();
        let a = self.coefficient_matrix(controls);
        let mut augmented = ComplexMatrix::zeros(size + 1, size + 1);
        for r in 0..size {
            for c in 0..size {
                augmented[(r, c)] = Complex64::new(a[r][c] * dt, 0.0);
            }
            augmented[(r, size)] = Complex64::new(self.source[r] * dt, 0.0);
        }
        let prop = expm(&augmented)?;
        let mut input: Vec<Complex64> = y0.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        input.push(Complex64::new(1.0, 0.0));
        let out = prop.matvec(&input);
        Ok(out[..size].iter().map(|z| z.re).collect())
    }
}

/// Project a vectorized superoperator onto the generator basis:
/// A[l][m] = ½ tr(Y_l · G(Y_m)).
fn superoperator_matrix(generator: &ComplexMatrix, basis: &GeneratorBasis) -> Result<Vec<Vec<f64>>> {
    let n = basis.dimension();
    let size = basis.len();
    let mut a = vec![vec![0.0; size]; size];
    for (m, ym) in basis.generators().iter().enumerate() {
        let image = ComplexMatrix::unvec(&generator.matvec(&ym.vec()), n);
        let column = basis.coefficients(&image)?;
        for l in 0..size {
            a[l][m] = 0.5 * column[l];
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{bloch_vector, evolve_open, OpenState};
    use crate::systems::builtin;

    #[test]
    fn drift_is_antisymmetric_without_dissipation() {
        let mut spec = builtin("open3").unwrap();
        spec.lindblads.clear();
        spec.kind = crate::systems::SystemKind::Open;
        let gen = BlochAffineGenerator::from_spec(&spec).unwrap();
        let a = gen.drift_matrix();
        for r in 0..a.len() {
            for c in 0..a.len() {
                assert!((a[r][c] + a[c][r]).abs() < 1e-10, "A[{r}][{c}] = {}", a[r][c]);
            }
        }
        // The unitary part carries no inhomogeneous source.
        assert!(gen.source_term().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn affine_propagation_matches_density_route() {
        for name in ["open3", "open4"] {
            let spec = builtin(name).unwrap();
            let gen = BlochAffineGenerator::from_spec(&spec).unwrap();
            let rho0 = OpenState::from_pure(&spec.initial).unwrap();
            let y0 = bloch_vector(&rho0, gen.basis()).unwrap();
            let controls: Vec<f64> = spec.controls.iter().map(|c| 0.6 * c.bound).collect();

            let rho1 = evolve_open(&spec, &rho0, &controls, spec.dt).unwrap();
            let y_direct = bloch_vector(&rho1, gen.basis()).unwrap();
            let y_affine = gen.propagate(&y0, &controls, spec.dt).unwrap();

            let diff = y_direct
                .iter()
                .zip(&y_affine)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(diff < 1e-8, "{name}: max diff {diff}");
        }
    }
}
