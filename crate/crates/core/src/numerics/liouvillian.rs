//! Vectorized Lindblad generators.
//!
//! The master equation ρ̇ = −i[H,ρ] + Σ_k γ_k D[L_k](ρ) becomes a linear
//! system vec(ρ̇) = G·vec(ρ) under column-stacking, with
//!
//!   G = −i(I⊗H − Hᵀ⊗I) + Σ_k γ_k ( L̄_k⊗L_k − ½ I⊗L_k†L_k − ½ (L_k†L_k)ᵀ⊗I ).
//!
//! Column-stacking is fixed globally; see [`ComplexMatrix::vec`].

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Generator of the vectorized open-system flow.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dimension: usize,
    generator: ComplexMatrix,
}

impl Liouvillian {
    /// Hilbert-space dimension n; the generator acts on n²-vectors.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// The n²×n² generator matrix G.
    pub fn generator(&self) -> &ComplexMatrix {
        &self.generator
    }

    /// vec(ρ̇) for a given vec(ρ).
    pub fn apply(&self, vec_rho: &[Complex64]) -> Vec<Complex64> {
        self.generator.matvec(vec_rho)
    }
}

/// Assemble the Lindblad generator for Hamiltonian `h`, jump operators
/// `lindblads` and rates `rates` (one per operator).
pub fn build_liouvillian(
    h: &ComplexMatrix,
    lindblads: &[ComplexMatrix],
    rates: &[f64],
) -> Result<Liouvillian> {
    if !h.is_square() {
        return Err(Error::dim("build_liouvillian", "Hamiltonian is not square".to_string()));
    }
    let n = h.rows();
    if !h.is_hermitian(1e-10) {
        return Err(Error::validation(
            "hamiltonian",
            format!("not Hermitian (residue {:.3e})", h.hermiticity_residue()),
        ));
    }
    if lindblads.len() != rates.len() {
        return Err(Error::dim(
            "build_liouvillian",
            format!("{} Lindblad operators but {} rates", lindblads.len(), rates.len()),
        ));
    }
    for (k, rate) in rates.iter().enumerate() {
        if *rate < 0.0 {
            return Err(Error::validation(format!("rates[{k}]"), format!("negative rate {rate}")));
        }
    }
    for (k, l) in lindblads.iter().enumerate() {
        if l.rows() != n || l.cols() != n {
            return Err(Error::dim(
                "build_liouvillian",
                format!("lindblads[{k}] is {}x{}, expected {n}x{n}", l.rows(), l.cols()),
            ));
        }
    }

    let eye = ComplexMatrix::identity(n);
    // −i(I⊗H − Hᵀ⊗I)
    let mut g = eye.kron(h).sub(&h.transpose().kron(&eye)).scale(Complex64::new(0.0, -1.0));
    for (l, &rate) in lindblads.iter().zip(rates) {
        if rate == 0.0 {
            continue;
        }
        let ldl = l.dagger().matmul(l);
        g.axpy(rate.into(), &l.conj().kron(l));
        g.axpy(Complex64::new(-0.5 * rate, 0.0), &eye.kron(&ldl));
        g.axpy(Complex64::new(-0.5 * rate, 0.0), &ldl.transpose().kron(&eye));
    }
    Ok(Liouvillian { dimension: n, generator: g })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{expm, sigma_x, sigma_z};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_density(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let p = g.matmul(&g.dagger());
        p.scale(Complex64::new(1.0 / p.trace().re, 0.0))
    }

    #[test]
    fn zero_rates_reduce_to_commutator() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h = sigma_x().add(&sigma_z().scale(0.7.into()));
        let liouv = build_liouvillian(&h, &[sigma_x()], &[0.0]).unwrap();
        let rho = random_density(&mut rng, 2);
        let lhs = ComplexMatrix::unvec(&liouv.apply(&rho.vec()), 2);
        let comm = h.matmul(&rho).sub(&rho.matmul(&h)).scale(Complex64::new(0.0, -1.0));
        assert!(lhs.sub(&comm).max_abs() < 1e-13);
    }

    #[test]
    fn amplitude_damping_rate_on_excited_level() {
        // H = 0, L = τ|1⟩⟨2| ⇒ d/dt ρ₂₂ = −τ² ρ₂₂.
        let tau = 0.4;
        let l = ComplexMatrix::unit(3, 0, 1).scale(tau.into());
        let liouv = build_liouvillian(&ComplexMatrix::zeros(3, 3), &[l], &[1.0]).unwrap();
        let rho = crate::numerics::StateVector::basis_state(3, 1).outer();
        let deriv = ComplexMatrix::unvec(&liouv.apply(&rho.vec()), 3);
        assert!((deriv[(1, 1)].re + tau * tau).abs() < 1e-14);
        assert!(deriv[(1, 1)].im.abs() < 1e-14);
    }

    #[test]
    fn generator_output_is_traceless() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let h = sigma_z();
        let liouv = build_liouvillian(&h, &[sigma_x(), ComplexMatrix::unit(2, 0, 1)], &[0.3, 1.2]).unwrap();
        for _ in 0..20 {
            let rho = random_density(&mut rng, 2);
            let deriv = ComplexMatrix::unvec(&liouv.apply(&rho.vec()), 2);
            assert!(deriv.trace().norm() <= 1e-12);
        }
    }

    #[test]
    fn zero_rates_exponential_matches_unitary_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let h = sigma_x().add(&sigma_z().scale(0.4.into()));
        let liouv = build_liouvillian(&h, &[], &[]).unwrap();
        let t = 0.9;
        let prop = expm(&liouv.generator().scale(t.into())).unwrap();
        let u = expm(&h.scale(Complex64::new(0.0, -t))).unwrap();
        let rho = random_density(&mut rng, 2);
        let via_liouville = ComplexMatrix::unvec(&prop.matvec(&rho.vec()), 2);
        let via_unitary = u.matmul(&rho).matmul(&u.dagger());
        assert!(via_liouville.sub(&via_unitary).max_abs() < 1e-9);
    }

    #[test]
    fn rejects_non_hermitian_hamiltonian() {
        let mut h = sigma_x();
        h[(0, 1)] = Complex64::new(2.0, 0.0);
        assert!(build_liouvillian(&h, &[], &[]).is_err());
    }

    #[test]
    fn rejects_negative_rate() {
        assert!(build_liouvillian(&sigma_z(), &[sigma_x()], &[-0.1]).is_err());
    }
}
