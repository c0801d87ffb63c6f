//! Generalized Gell-Mann generator basis.

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Traceless orthogonal Hermitian generator set for an n-level system.
///
/// The basis holds the n²−1 generalized Gell-Mann matrices, ordered as
/// all symmetric pair matrices (j < k, lexicographic), then all
/// antisymmetric pair matrices, then the n−1 diagonal matrices. For
/// n = 2 this yields exactly {σx, σy, σz}. Each generator Y satisfies
/// tr(Y) = 0, Y = Y†, and tr(Y_l Y_m) = 2δ_lm.
#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    dimension: usize,
    generators: Vec<ComplexMatrix>,
}

impl GeneratorBasis {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    /// Expansion coefficients y_l = tr(Y_l ρ), real for Hermitian ρ.
    pub fn coefficients(&self, rho: &ComplexMatrix) -> Result<Vec<f64>> {
        if rho.rows() != self.dimension || rho.cols() != self.dimension {
            return Err(Error::dim(
                "bloch_vector",
                format!("state is {}x{}, basis dimension is {}", rho.rows(), rho.cols(), self.dimension),
            ));
        }
        Ok(self
            .generators
            .iter()
            .map(|y| {
                let t = y.matmul(rho).trace();
                debug_assert!(t.im.abs() <= 1e-12, "imaginary residue {} in tr(Yρ)", t.im);
                t.re
            })
            .collect())
    }

    /// Reconstruct ρ = I/n + ½ Σ_l y_l Y_l.
    pub fn reconstruct(&self, y: &[f64]) -> Result<ComplexMatrix> {
        if y.len() != self.generators.len() {
            return Err(Error::dim(
                "reconstruct",
                format!("got {} coefficients for {} generators", y.len(), self.generators.len()),
            ));
        }
        let n = self.dimension;
        let mut rho = ComplexMatrix::identity(n).scale(Complex64::new(1.0 / n as f64, 0.0));
        for (coeff, gen) in y.iter().zip(&self.generators) {
            rho.axpy(Complex64::new(0.5 * coeff, 0.0), gen);
        }
        Ok(rho)
    }
}

/// The n²−1 generalized Gell-Mann matrices for dimension n ≥ 2.
pub fn gell_mann_basis(n: usize) -> Result<GeneratorBasis> {
    if n < 2 {
        return Err(Error::validation("dimension", format!("generator basis needs n ≥ 2, got {n}")));
    }
    let mut generators = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = ComplexMatrix::zeros(n, n);
            m[(j, k)] = Complex64::new(1.0, 0.0);
            m[(k, j)] = Complex64::new(1.0, 0.0);
            generators.push(m);
        }
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = ComplexMatrix::zeros(n, n);
            m[(j, k)] = Complex64::new(0.0, -1.0);
            m[(k, j)] = Complex64::new(0.0, 1.0);
            generators.push(m);
        }
    }
    for l in 1..n {
        let scale = (2.0 / (l as f64 * (l + 1) as f64)).sqrt();
        let mut m = ComplexMatrix::zeros(n, n);
        for j in 0..l {
            m[(j, j)] = Complex64::new(scale, 0.0);
        }
        m[(l, l)] = Complex64::new(-scale * l as f64, 0.0);
        generators.push(m);
    }
    Ok(GeneratorBasis { dimension: n, generators })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{sigma_x, sigma_y, sigma_z, StateVector};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_density(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        // ρ = G G† / tr(G G†) is Hermitian PSD with unit trace.
        let g = ComplexMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let p = g.matmul(&g.dagger());
        p.scale(Complex64::new(1.0 / p.trace().re, 0.0))
    }

    #[test]
    fn qubit_basis_is_the_pauli_triple() {
        let basis = gell_mann_basis(2).unwrap();
        assert_eq!(basis.len(), 3);
        assert!(basis.generators()[0].sub(&sigma_x()).max_abs() < 1e-15);
        assert!(basis.generators()[1].sub(&sigma_y()).max_abs() < 1e-15);
        assert!(basis.generators()[2].sub(&sigma_z()).max_abs() < 1e-15);
    }

    #[test]
    fn generators_are_traceless_and_hermitian() {
        for n in 2..=6 {
            let basis = gell_mann_basis(n).unwrap();
            assert_eq!(basis.len(), n * n - 1);
            for y in basis.generators() {
                assert!(y.trace().norm() <= 1e-12);
                assert!(y.is_hermitian(1e-12));
            }
        }
    }

    #[test]
    fn generators_are_orthogonal_with_norm_two() {
        for n in [2usize, 3, 4] {
            let basis = gell_mann_basis(n).unwrap();
            for (l, yl) in basis.generators().iter().enumerate() {
                for (m, ym) in basis.generators().iter().enumerate() {
                    let overlap = yl.matmul(ym).trace();
                    let expect = if l == m { 2.0 } else { 0.0 };
                    assert!(
                        (overlap.re - expect).abs() <= 1e-12 && overlap.im.abs() <= 1e-12,
                        "n={n} tr(Y_{l} Y_{m}) = {overlap}"
                    );
                }
            }
        }
    }

    #[test]
    fn density_matrix_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2usize, 3, 4] {
            let basis = gell_mann_basis(n).unwrap();
            let rho = random_density(&mut rng, n);
            let y = basis.coefficients(&rho).unwrap();
            let back = basis.reconstruct(&y).unwrap();
            assert!(back.sub(&rho).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn ground_state_qubit_coefficients() {
        let basis = gell_mann_basis(2).unwrap();
        let rho = StateVector::basis_state(2, 0).outer();
        let y = basis.coefficients(&rho).unwrap();
        assert!((y[0] - 0.0).abs() < 1e-15);
        assert!((y[1] - 0.0).abs() < 1e-15);
        assert!((y[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_dimension_below_two() {
        assert!(gell_mann_basis(1).is_err());
        assert!(gell_mann_basis(0).is_err());
    }
}
