//! Target states against dense matrix exponentials of their generators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use paramp::theory::{displaced_state, squeezed_state, twin_beam, two_mode_squeezed};
use paramp::SingleModeSpec;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Annihilation operator on `0..dim`.
fn lowering(dim: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |i, j| if j == i + 1 { c((j as f64).sqrt(), 0.0) } else { c(0.0, 0.0) })
}

fn dagger(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    m.adjoint()
}

fn input_vector(spec: &SingleModeSpec, dim: usize) -> DVector<Complex64> {
    let (coeffs, _) = spec.coefficients(dim as u32 - 1);
    DVector::from_vec(coeffs)
}

fn assert_low_levels(got: &[Complex64], want: &DVector<Complex64>, levels: usize, tol: f64) {
    for n in 0..levels {
        assert!((got[n] - want[n]).norm() < tol, "level {n}: {} vs {}", got[n], want[n]);
    }
}

#[test]
fn displacement_matches_expm() {
    let dim = 90;
    let a = lowering(dim);
    let z = c(0.4, -1.1);
    let gen = (&dagger(&a) * z) - (&a * z.conj());
    let u = gen.exp();
    for spec in [SingleModeSpec::Vacuum, SingleModeSpec::Number(1), SingleModeSpec::Number(2), SingleModeSpec::Coherent(c(0.6, 0.2))] {
        let want = &u * input_vector(&spec, dim);
        let got = displaced_state(&spec, z, 40).unwrap();
        assert_low_levels(&got, &want, 41, 1e-10);
    }
}

#[test]
fn squeezing_matches_expm_with_stated_sign() {
    let dim = 160;
    let a = lowering(dim);
    let ad = dagger(&a);
    for zeta in [c(0.0, -0.84), c(0.7, 0.3), c(-0.5, 0.0)] {
        let gen = ((&ad * &ad) * zeta - (&a * &a) * zeta.conj()) * c(0.5, 0.0);
        let u = gen.exp();
        for spec in [SingleModeSpec::Vacuum, SingleModeSpec::Number(1), SingleModeSpec::Number(2), SingleModeSpec::Coherent(c(1.0, -0.5))] {
            let want = &u * input_vector(&spec, dim);
            let got = squeezed_state(&spec, zeta, 90).unwrap();
            assert_low_levels(&got, &want, 51, 1e-9);
        }
    }
}

#[test]
fn two_mode_squeezing_matches_expm() {
    let d = 26;
    let a1 = lowering(d);
    let id = DMatrix::<Complex64>::identity(d, d);
    let a = a1.kronecker(&id);
    let b = id.kronecker(&a1);
    let chi = c(0.25, -0.3);
    let gen = (&dagger(&a) * &dagger(&b)) * chi - (&a * &b) * chi.conj();
    let u = gen.exp();
    let pairs = [
        (SingleModeSpec::Vacuum, SingleModeSpec::Vacuum),
        (SingleModeSpec::Number(1), SingleModeSpec::Number(1)),
        (SingleModeSpec::Number(1), SingleModeSpec::Vacuum),
        (SingleModeSpec::Number(2), SingleModeSpec::Number(1)),
    ];
    for (sa, sb) in pairs {
        let va = input_vector(&sa, d);
        let vb = input_vector(&sb, d);
        let psi = va.kronecker(&vb);
        let want = &u * psi;
        let got = two_mode_squeezed((&sa, &sb), chi, 30).unwrap();
        for i in 0..10u32 {
            for j in 0..10u32 {
                let w = want[i as usize * d + j as usize];
                assert!((got.get(&[i, j]) - w).norm() < 1e-9, "{sa}/{sb} at ({i},{j})");
            }
        }
    }
    let tb = twin_beam(chi, 30).unwrap();
    let want = &u * input_vector(&SingleModeSpec::Vacuum, d).kronecker(&input_vector(&SingleModeSpec::Vacuum, d));
    for n in 0..10u32 {
        assert!((tb.get(&[n, n]) - want[n as usize * d + n as usize]).norm() < 1e-9);
    }
}
