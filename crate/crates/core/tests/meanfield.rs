use approx::assert_relative_eq;
use paironlab::meanfield::{energy_surface, minimize, minimize_numeric, GridOptions, Phase};

#[test]
fn phase_b_on_the_diagonal() {
    let p = minimize(-2.0, -2.0);
    assert_relative_eq!(p.xb_min, 0.25, epsilon = 1e-15);
    assert_relative_eq!(p.energy_min, -0.25, epsilon = 1e-15);
    assert!(p.theta_free);
    // B_θ is −4 for every θ here
    for theta in [0.0, 0.7, 2.0] {
        assert_relative_eq!(energy_surface(-2.0, -2.0, theta, 0.25).unwrap(), -0.25, epsilon = 1e-14);
    }
}

#[test]
fn phase_c_row() {
    let p = minimize(0.0, -3.0);
    assert_eq!(p.phase, Phase::C);
    assert_relative_eq!(p.energy_min, -2.0 / 3.0, epsilon = 1e-15);
}

#[test]
fn phase_a_and_b_rows() {
    let a = minimize(0.0, 0.0);
    assert_eq!((a.phase, a.xb_min, a.sx2, a.sy2), (Phase::A, 0.0, 0.0, 0.0));
    let b = minimize(-2.0, -1.5);
    assert_eq!(b.phase, Phase::B);
    assert!(b.theta_min == 0.0 || (b.theta_min.abs() - std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn first_order_jump_in_order_parameters() {
    let c = minimize(-3.0, -3.0 - 1e-6);
    let b = minimize(-3.0, -3.0 + 1e-6);
    assert_eq!((c.phase, b.phase), (Phase::C, Phase::B));
    assert_eq!(c.sx2, 0.0);
    assert_eq!(b.sy2, 0.0);
}

#[test]
fn numeric_minimizer_agrees_off_grid() {
    for (gx, gy) in [(-2.7, 0.4), (0.3, -1.9), (-1.2, -1.3), (0.5, 0.5)] {
        let n = minimize_numeric(gx, gy, &GridOptions::default()).unwrap();
        let c = minimize(gx, gy);
        assert!((n.energy_min - c.energy_min).abs() < 1e-10);
        assert_eq!(n.phase, c.phase);
    }
}
