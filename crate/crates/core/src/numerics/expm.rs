//! Dense matrix exponential via scaling-and-squaring with the [13/13]
//! Padé approximant.

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

// Padé [13/13] numerator coefficients b0..b13.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Backward-error bound for the order-13 approximant.
const THETA13: f64 = 5.371920351148152;

/// e^M for a square complex matrix.
///
/// Relative accuracy is far below 1e-12 for ‖M‖₁ ≤ 10; larger norms are
/// handled by additional squaring steps.
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::dim("expm", format!("{}x{} matrix is not square", m.rows(), m.cols())));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }

    let norm = m.one_norm();
    let s = if norm <= THETA13 { 0 } else { (norm / THETA13).log2().ceil() as u32 };
    let a = m.scale(Complex64::new(0.5f64.powi(s as i32), 0.0));

    let eye = ComplexMatrix::identity(n);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a2.matmul(&a4);

    // U = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let mut inner = a6.scale(PADE13[13].into());
    inner.axpy(PADE13[11].into(), &a4);
    inner.axpy(PADE13[9].into(), &a2);
    let mut u = a6.matmul(&inner);
    u.axpy(PADE13[7].into(), &a6);
    u.axpy(PADE13[5].into(), &a4);
    u.axpy(PADE13[3].into(), &a2);
    u.axpy(PADE13[1].into(), &eye);
    let u = a.matmul(&u);

    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let mut inner = a6.scale(PADE13[12].into());
    inner.axpy(PADE13[10].into(), &a4);
    inner.axpy(PADE13[8].into(), &a2);
    let mut v = a6.matmul(&inner);
    v.axpy(PADE13[6].into(), &a6);
    v.axpy(PADE13[4].into(), &a4);
    v.axpy(PADE13[2].into(), &a2);
    v.axpy(PADE13[0].into(), &eye);

    // (V − U) F = (V + U)
    let mut f = solve(&v.sub(&u), &v.add(&u))?;
    for _ in 0..s {
        f = f.matmul(&f);
    }
    Ok(f)
}

/// Solve A·X = B by LU with partial pivoting.
fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.rows();
    let mut lu = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let (pivot_row, pivot_mag) = (col..n)
            .map(|r| (r, lu[(r, col)].norm()))
            .max_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        if pivot_mag == 0.0 {
            return Err(Error::dim("expm", "singular Padé denominator".to_string()));
        }
        if pivot_row != col {
            for c in 0..n {
                let (i, j) = (col * n + c, pivot_row * n + c);
                swap_entry(&mut lu, i, j);
                swap_entry(&mut x, i, j);
            }
        }
        let pivot = lu[(col, col)];
        for r in (col + 1)..n {
            let factor = lu[(r, col)] / pivot;
            lu[(r, col)] = factor;
            for c in (col + 1)..n {
                let v = lu[(col, c)];
                lu[(r, c)] -= factor * v;
            }
            for c in 0..n {
                let v = x[(col, c)];
                x[(r, c)] -= factor * v;
            }
        }
    }
    for col in (0..n).rev() {
        let pivot = lu[(col, col)];
        for c in 0..n {
            x[(col, c)] /= pivot;
        }
        for r in 0..col {
            let factor = lu[(r, col)];
            for c in 0..n {
                let v = x[(col, c)];
                x[(r, c)] -= factor * v;
            }
        }
    }
    Ok(x)
}

fn swap_entry(m: &mut ComplexMatrix, i: usize, j: usize) {
    let cols = m.cols();
    let (ri, ci) = (i / cols, i % cols);
    let (rj, cj) = (j / cols, j % cols);
    let tmp = m[(ri, ci)];
    m[(ri, ci)] = m[(rj, cj)];
    m[(rj, cj)] = tmp;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{sigma_x, StateVector};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn random_hermitian(rng: &mut impl Rng, n: usize, scale: f64) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let h = g.add(&g.dagger()).scale(Complex64::new(0.5, 0.0));
        h.scale(Complex64::new(scale / h.one_norm().max(1e-300), 0.0))
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = expm(&ComplexMatrix::zeros(2, 2)).unwrap();
        assert!(e.sub(&ComplexMatrix::identity(2)).max_abs() < 1e-15);
    }

    #[test]
    fn exp_of_diagonal() {
        let e = expm(&ComplexMatrix::diag(&[0.3, -1.7])).unwrap();
        assert!((e[(0, 0)].re - 0.3f64.exp()).abs() < 1e-14);
        assert!((e[(1, 1)].re - (-1.7f64).exp()).abs() < 1e-14);
        assert!(e[(0, 1)].norm() < 1e-15 && e[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn exp_of_pauli_rotation_matches_closed_form() {
        // e^{−i(π/2)σx} = cos(π/2)·I − i·sin(π/2)·σx = −i·σx
        let arg = sigma_x().scale(Complex64::new(0.0, -FRAC_PI_2));
        let e = expm(&arg).unwrap();
        let expect = sigma_x().scale(Complex64::new(0.0, -1.0));
        assert!(e.sub(&expect).max_abs() < 1e-12);
    }

    #[test]
    fn exp_times_exp_of_negation_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in [2usize, 4, 9, 16] {
            let a = random_hermitian(&mut rng, n, 5.0);
            let e = expm(&a).unwrap();
            let e_inv = expm(&a.scale(Complex64::new(-1.0, 0.0))).unwrap();
            let residue = e.matmul(&e_inv).sub(&ComplexMatrix::identity(n)).max_abs();
            assert!(residue < 1e-10, "n={n}: residue {residue}");
        }
    }

    #[test]
    fn exp_of_skew_hermitian_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for n in [2usize, 3, 8] {
            let h = random_hermitian(&mut rng, n, 3.0);
            let u = expm(&h.scale(Complex64::new(0.0, -1.0))).unwrap();
            let residue = u.dagger().matmul(&u).sub(&ComplexMatrix::identity(n)).max_abs();
            assert!(residue < 1e-10, "n={n}: residue {residue}");
        }
    }

    #[test]
    fn accuracy_against_eigenbasis_for_large_norm() {
        // σx has eigenvectors (1, ±1)/√2; exp(tσx)ψ is known in closed form.
        let t = 9.5; // close to the ‖M‖ ≤ 10 accuracy contract
        let e = expm(&sigma_x().scale(t.into())).unwrap();
        let plus = StateVector(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]).normalized();
        let out = e.matvec(&plus.0);
        let rel = (out[0].norm() - t.exp() / 2f64.sqrt()).abs() / (t.exp() / 2f64.sqrt());
        assert!(rel < 1e-12, "relative error {rel}");
    }

    #[test]
    fn non_square_input_is_rejected() {
        assert!(expm(&ComplexMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn rotation_angle_sweep_matches_closed_form() {
        // e^{−iθσx} = cos θ·I − i sin θ·σx for a grid of angles.
        for k in 0..40 {
            let theta = -PI + k as f64 * (2.0 * PI / 39.0);
            let e = expm(&sigma_x().scale(Complex64::new(0.0, -theta))).unwrap();
            let mut expect = ComplexMatrix::identity(2).scale(theta.cos().into());
            expect.axpy(Complex64::new(0.0, -theta.sin()), &sigma_x());
            assert!(e.sub(&expect).max_abs() < 1e-13);
        }
    }
}
