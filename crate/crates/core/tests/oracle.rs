use approx::assert_relative_eq;
use paironlab::ed::{build_matrix, diagonalize, expectation_sx2_sy2, fock_index, spectrum};
use paironlab::{Family, ModelPoint, Parity};

// Reference values below were checked against an independent dense
// diagonalization.

#[test]
fn frozen_hyperbolic_ground_energy() {
    let p = ModelPoint::new(10, Parity::Plus, Family::Hyperbolic, 0.5, -0.02).unwrap();
    assert_relative_eq!(spectrum(&p).energies[0], -10.290_630_114_468_897, max_relative = 1e-13);
}

#[test]
fn frozen_trigonometric_spectrum() {
    let p = ModelPoint::scaled(5, Parity::Minus, Family::Trigonometric, 2.0, 0.7).unwrap();
    let expected = [-5.528_181_486_942_912, -3.791_925_176_757_696_5, -1.587_875_354_712_009_5, 0.927_837_400_310_115_4, 3.563_477_951_435_837];
    for (a, b) in spectrum(&p).energies.iter().zip(expected) {
        assert_relative_eq!(*a, b, max_relative = 1e-13);
    }
}

#[test]
fn negate_reverses_the_spectrum() {
    let (eps, lam, gam) = (1.0, 0.3, 0.1);
    let s = diagonalize(&build_matrix(1, Parity::Plus, eps, lam, gam)).energies;
    let r = (1.0f64 + lam * lam).sqrt();
    assert_relative_eq!(s[0], gam - r, epsilon = 1e-14);
    let n = diagonalize(&build_matrix(1, Parity::Plus, eps, -lam, -gam)).energies;
    assert_relative_eq!(n[0], -gam - r, epsilon = 1e-14);
    assert_relative_eq!(n[1], -gam + r, epsilon = 1e-14);

    let p = ModelPoint::new(7, Parity::Minus, Family::Hyperbolic, 0.6, 0.1).unwrap();
    let a = spectrum(&p).energies;
    let b = spectrum(&p.negate()).energies;
    for (x, y) in a.iter().zip(b.iter().rev()) {
        assert!((x + y).abs() < 1e-12);
    }
}

#[test]
fn unperturbed_spectrum() {
    let p = ModelPoint::new(4, Parity::Plus, Family::Rational, 1.0, 0.0).unwrap();
    assert_eq!(spectrum(&p).energies, vec![-4.0, -2.0, 0.0, 2.0, 4.0]);
}

#[test]
fn lowest_weight_order_parameters() {
    for j in [1, 4, 9] {
        let mut v = vec![0.0; j as usize + 1];
        v[0] = 1.0;
        let (x, y) = expectation_sx2_sy2(&v, j, Parity::Plus);
        assert_relative_eq!(x, j as f64 / 2.0, epsilon = 1e-14);
        assert_relative_eq!(y, j as f64 / 2.0, epsilon = 1e-14);
    }
}

#[test]
fn fock_map() {
    assert_eq!(fock_index(3, Parity::Plus, 0), (6, 0));
    assert_eq!(fock_index(3, Parity::Minus, 1), (3, 3));
}
