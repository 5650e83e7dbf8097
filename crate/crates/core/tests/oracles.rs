//! Solver values against independently derived references.

use std::f64::consts::PI;

use yamabe_lab::geometry::{hemisphere, quotient_product, round_sphere, schoen_product, unit_ball};
use yamabe_lab::solver::{minimize_energy, SolverOptions};

fn opts() -> SolverOptions {
    SolverOptions { mesh_nodes: 257, ..Default::default() }
}

fn y(m: &yamabe_lab::geometry::ModelManifold, a: f64, b: f64) -> f64 {
    let e = minimize_energy(m, a, b, &opts()).unwrap();
    assert!(e.converged, "residual {}", e.euler_lagrange_residual);
    e.value
}

#[test]
fn round_three_sphere() {
    // R = 6, vol = 2π², constants are optimal
    let expect = 6.0 * (2.0 * PI * PI).powf(2.0 / 3.0);
    let got = y(&round_sphere(3).unwrap(), 1.0, 0.0);
    assert!((got - expect).abs() < 1e-6 * expect, "{got} vs {expect}");
}

#[test]
fn ball_and_hemisphere_agree_at_lambda_zero() {
    // flat ball: energy of a constant is 2(n−1)·c²·|S²| with c^4·|S²| = 1,
    // i.e. 4·|S²|^{1/2} = 4·sqrt(4π)
    let expect = 4.0 * (4.0 * PI).sqrt();
    let ball = y(&unit_ball(3).unwrap(), 0.0, 1.0);
    let hemi = y(&hemisphere(3).unwrap(), 0.0, 1.0);
    assert!((ball - expect).abs() < 1e-6 * expect, "{ball}");
    assert!((hemi - expect).abs() < 1e-4 * expect, "{hemi}");
}

#[test]
fn short_product_is_constant() {
    // S²×S¹_L for small L: constants, R = 2, vol = 4πL
    for l in [1.0, 2.0] {
        let expect = 2.0 * (4.0 * PI * l).powf(2.0 / 3.0);
        let got = y(&schoen_product(3, l).unwrap(), 1.0, 0.0);
        assert!((got - expect).abs() < 1e-8 * expect, "L={l}: {got} vs {expect}");
    }
}

#[test]
fn quotient_halves_the_volume() {
    // fiber-independent minimizers descend, so the ratio is (1/2)^{2/3}
    for l in [2.0, 10.0] {
        let s = y(&schoen_product(3, l).unwrap(), 1.0, 0.0);
        let q = y(&quotient_product(3, l).unwrap(), 1.0, 0.0);
        assert!((q / s - 0.5f64.powf(2.0 / 3.0)).abs() < 1e-8, "L={l}");
    }
}
