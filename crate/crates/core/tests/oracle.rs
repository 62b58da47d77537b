//! Jet derivatives against an independent finite-difference oracle.

mod common;

use common::fd;
use instanton::jets::{Jet2, Var};

#[test]
fn oracle_reproduces_known_derivatives() {
    // ln(x² + y) at (1.3, 0.4)
    let f = |x: f64, y: f64| (x * x + y).ln();
    let (x, y) = (1.3, 0.4);
    let s = x * x + y;
    let exact = [2.0 * x / s, 1.0 / s, (2.0 * s - 4.0 * x * x) / (s * s), -2.0 * x / (s * s), -1.0 / (s * s)];
    for (k, &ij) in fd::PAIRS.iter().enumerate() {
        let d = fd::derivative(&f, x, y, 1e-2, ij);
        assert!((d - exact[k]).abs() < 1e-9 * exact[k].abs(), "{ij:?}: {d} vs {}", exact[k]);
    }
}

#[test]
fn jets_of_elementary_functions_match_differences() {
    let (x, y) = (0.7, -0.3);
    let xj = Jet2::seed(Var::First, x, 2);
    let yj = Jet2::seed(Var::Second, y, 2);
    let j = &(&xj * &xj).sin() * &(&yj.exp() + &xj).sqrt();
    let f = |x: f64, y: f64| (x * x).sin() * (y.exp() + x).sqrt();
    assert!(fd::compare(&j, &f, x, y, 1e-3, 1e-6) < 1e-8);
}

#[test]
fn every_metric_level_derivative_matches_differences() {
    for (name, worst) in common::oracle_sweep(20, 11) {
        assert!(worst < 1e-6, "{name}: worst relative disagreement {worst:e}");
    }
}
