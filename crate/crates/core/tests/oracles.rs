//! Checks against independent closed forms, plus frozen values of derived quantities.

use nondeg_core::construct::{asymptotic_table, circle_loop, make_twist, rotation_loop};
use nondeg_core::curve::nondeg_margin;
use nondeg_core::manifold::ChartedManifold;
use nondeg_core::spin::{loop_class, SpinClass};

fn basis(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

// For g = p^2 I with p = 2 / (1 + kappa |x|^2) and phi = ln p:
// Gamma^k_ij = d_ik d_j phi + d_jk d_i phi - d_ij d_k phi.
fn conformal_gamma(kappa: f64, x: &[f64], k: usize, i: usize, j: usize) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let dphi = |l: usize| -2.0 * kappa * x[l] / (1.0 + kappa * r2);
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    d(i, k) * dphi(j) + d(j, k) * dphi(i) - d(i, j) * dphi(k)
}

#[test]
fn christoffels_match_conformal_formula() {
    for (m, kappa) in [
        (ChartedManifold::sphere(3, 2.0).unwrap(), 2.0),
        (ChartedManifold::hyperbolic(3, 0.5).unwrap(), -0.5),
    ] {
        let x = [0.3, -0.2, 0.4];
        let g = m.christoffel(&x);
        for i in 0..3 {
            for j in 0..3 {
                let c = g.contract(&basis(3, i), &basis(3, j));
                for (k, v) in c.iter().enumerate() {
                    assert!((v - conformal_gamma(kappa, &x, k, i, j)).abs() < 1e-13);
                }
            }
        }
    }
}

#[test]
fn geodesics_from_origin_follow_closed_forms() {
    let v = [0.3, 0.4, 0.0];
    let speed = 0.5;
    let s = ChartedManifold::sphere(3, 1.0).unwrap();
    let (p, _) = s.geodesic(&[0.0; 3], &v, 2000).unwrap();
    let r: f64 = p.iter().map(|c| c * c).sum::<f64>().sqrt();
    assert!((r - (speed as f64).tan()).abs() < 1e-9, "{r}");
    let h = ChartedManifold::hyperbolic(3, 1.0).unwrap();
    let (p, _) = h.geodesic(&[0.0; 3], &v, 2000).unwrap();
    let r: f64 = p.iter().map(|c| c * c).sum::<f64>().sqrt();
    assert!((r - (speed as f64).tanh()).abs() < 1e-9, "{r}");
    assert!((p[0] / p[1] - 0.75).abs() < 1e-12);
}

#[test]
fn unit_circle_has_orthonormal_frame() {
    let m = ChartedManifold::euclidean(2);
    assert!((nondeg_margin(&m, &circle_loop().unwrap(), 4096.0).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn frozen_twist_margins() {
    let expect = [(2, 1.0), (3, 0.297_112_854), (4, 0.060_42)];
    for (n, v) in expect {
        let t = make_twist(n).unwrap();
        assert!((t.margin - v).abs() < 1e-4 * v.max(1.0), "n={n}: {}", t.margin);
    }
}

#[test]
fn frozen_wire_deviation_table() {
    let a = rotation_loop(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], 2.0, 1.0, 0.05, 1024.0).unwrap();
    let tw = make_twist(3).unwrap();
    let rows = asymptotic_table(&a, &tw.path, &[8, 16], 64).unwrap();
    let get = |n: usize, k: usize| rows.iter().find(|r| r.n == n && r.k == k).unwrap().deviation;
    assert!((get(8, 1) - 0.670).abs() < 5e-3);
    assert!((get(16, 1) - 0.337).abs() < 5e-3);
    // first-order deviation halves with N
    assert!((get(8, 1) / get(16, 1) - 2.0).abs() < 0.05);
}

#[test]
fn rotation_loops_have_textbook_classes() {
    for (turns, c) in [(0.0, SpinClass::Plus), (1.0, SpinClass::Minus), (2.0, SpinClass::Plus), (3.0, SpinClass::Minus)] {
        let a = rotation_loop(&[0.0, 0.6, 0.8], &[1.0, 0.0, 0.0], turns, 1.0, 0.05, 512.0).unwrap();
        assert_eq!(loop_class(&a).unwrap().class, c, "turns {turns}");
    }
}
