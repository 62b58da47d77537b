#![allow(dead_code)]

use std::f64::consts::PI;

use instanton::pd::PdParams;
use instanton::{Jet2, Mode, Nut, RodData};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GENERIC_ROOTS: [f64; 4] = [0.2, 0.4, 2.0, 6.25];
pub const SELF_DUAL_A: [f64; 4] = [0.5, 0.8, 1.25, 2.0];
pub const SELF_DUAL_B: [f64; 4] = [-4.0, -0.25, 0.5, 2.0];

pub fn eh() -> RodData {
    RodData::eguchi_hanson(1.0)
}

/// Three turning points with unequal weights; no regularity assumed.
pub fn three_nuts() -> RodData {
    RodData::new(
        -0.3,
        vec![
            Nut { z: -1.0, a: 0.2 },
            Nut { z: 0.1, a: 0.5 },
            Nut { z: 0.9, a: 0.3 },
        ],
        Mode::Ale,
    )
    .unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `(r, θ)` in the Eguchi-Hanson chart with `r ∈ (1.05, 6)` and θ off the axis.
pub fn eh_chart_points(n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut g = rng(seed);
    (0..n)
        .map(|_| (1.05 * (6.0f64 / 1.05).powf(g.gen::<f64>()), g.gen_range(0.05..PI - 0.05)))
        .collect()
}

/// Weyl-Papapetrou points away from the axis and from every nut.
pub fn interior_points(rods: &RodData, n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut g = rng(seed);
    let s = rods.scale();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let rho = s * 10f64.powf(g.gen_range(-1.0..0.5));
        let zeta = rods.centre() + s * g.gen_range(-2.5..2.5);
        if rods.nuts().iter().all(|k| f64::hypot(rho, zeta - k.z) > 0.05 * s) {
            out.push((rho, zeta));
        }
    }
    out
}

/// Points of the PD domain `p ∈ (p2, p3)`, `q ∈ (p1, p2)` with `p²q² < 0.95`,
/// kept a relative margin away from the roots.
pub fn pd_points(params: &PdParams, n: usize, seed: u64) -> Vec<(f64, f64)> {
    let [p1, p2, p3, _] = params.roots;
    let mut g = rng(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = p2 + (p3 - p2) * g.gen_range(0.05..0.95);
        let q = p1 + (p2 - p1) * g.gen_range(0.05..0.95);
        if p * p * q * q < 0.95 {
            out.push((p, q));
        }
    }
    out
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Central differences with two Richardson steps; derivatives up to order 2
/// of a scalar function of two variables, in the jet layout `(i, j)`.
pub mod fd {
    pub const PAIRS: [(usize, usize); 5] = [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];

    fn stencil<F: Fn(f64, f64) -> f64>(f: &F, x: f64, y: f64, h: f64, ij: (usize, usize)) -> f64 {
        match ij {
            (1, 0) => (f(x + h, y) - f(x - h, y)) / (2.0 * h),
            (0, 1) => (f(x, y + h) - f(x, y - h)) / (2.0 * h),
            (2, 0) => (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h),
            (0, 2) => (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h),
            (1, 1) => (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h),
            _ => unreachable!("orders above two are not used"),
        }
    }

    pub fn derivative<F: Fn(f64, f64) -> f64>(f: &F, x: f64, y: f64, h: f64, ij: (usize, usize)) -> f64 {
        let d: Vec<f64> = [h, h / 2.0, h / 4.0].iter().map(|&s| stencil(f, x, y, s, ij)).collect();
        let r1 = (4.0 * d[1] - d[0]) / 3.0;
        let r2 = (4.0 * d[2] - d[1]) / 3.0;
        (16.0 * r2 - r1) / 15.0
    }

    /// Worst relative disagreement between the jet and the differences over the
    /// five derivatives. Derivatives far below the largest one of the same
    /// order are compared against `floor` times that largest one.
    pub fn compare<F: Fn(f64, f64) -> f64>(
        jet: &super::Jet2<f64>,
        f: &F,
        x: f64,
        y: f64,
        h: f64,
        floor: f64,
    ) -> f64 {
        let fd: Vec<f64> = PAIRS.iter().map(|&ij| derivative(f, x, y, h, ij)).collect();
        let scale1 = fd[0].abs().max(fd[1].abs());
        let scale2 = fd[2].abs().max(fd[3].abs()).max(fd[4].abs());
        PAIRS
            .iter()
            .zip(&fd)
            .map(|(&(i, j), &d)| {
                let s = if i + j == 1 { scale1 } else { scale2 };
                let denom = d.abs().max(floor * s).max(1e-300);
                (jet.get(i, j) - d).abs() / denom
            })
            .fold(0.0, f64::max)
    }
}

/// Jet derivatives of every quantity the metric-level checks rely on, compared
/// with finite differences at `n` random points. Returns `(name, worst)` pairs.
pub fn oracle_sweep(n: usize, seed: u64) -> Vec<(&'static str, f64)> {
    oracle_sweep_with_step(n, seed, STEP)
}

/// Step as a fraction of the distance to the nearest singular locus.
pub const STEP: f64 = 5e-2;

pub fn oracle_sweep_with_step(n: usize, seed: u64, step: f64) -> Vec<(&'static str, f64)> {
    use instanton::harmonic::{build_h, build_v};
    use instanton::pd::{pd_metric, pd_params_from_roots};
    use instanton::tod::{eh_closed_form, eh_coord_jets, tod_fields, tod_metric};

    const FLOOR: f64 = 1e-3;
    let mut worst = vec![
        ("V", 0.0f64),
        ("H", 0.0),
        ("W", 0.0),
        ("F", 0.0),
        ("e2nu", 0.0),
        ("z", 0.0),
        ("Omega", 0.0),
        ("tod_metric", 0.0),
        ("pd_metric", 0.0),
        ("eh_coords", 0.0),
        ("eh_metric", 0.0),
    ];
    let mut bump = |name: &str, v: f64| {
        let slot = worst.iter_mut().find(|(k, _)| *k == name).unwrap();
        slot.1 = slot.1.max(if v.is_nan() { f64::INFINITY } else { v });
    };
    for rods in [eh(), three_nuts()] {
        let h0 = rods.h_constant();
        for (rho, zeta) in interior_points(&rods, n, seed) {
            let d = rods.nuts().iter().map(|k| f64::hypot(rho, zeta - k.z)).fold(rho, f64::min);
            let h = step * d;
            let v = build_v(&rods, rho, zeta, 2).unwrap();
            bump("V", fd::compare(&v, &|x, y| build_v(&rods, x, y, 0).unwrap().value(), rho, zeta, h, FLOOR));
            let hj = build_h(&rods, rho, zeta, 2, h0).unwrap();
            bump("H", fd::compare(&hj, &|x, y| build_h(&rods, x, y, 0, h0).unwrap().value(), rho, zeta, h, FLOOR));
            let f = tod_fields(&rods, rho, zeta, 2).unwrap();
            let at = |x: f64, y: f64| tod_fields(&rods, x, y, 0).unwrap();
            bump("W", fd::compare(&f.w, &|x, y| at(x, y).w.value(), rho, zeta, h, FLOOR));
            bump("F", fd::compare(&f.f, &|x, y| at(x, y).f.value(), rho, zeta, h, FLOOR));
            bump("e2nu", fd::compare(&f.e2nu, &|x, y| at(x, y).e2nu.value(), rho, zeta, h, FLOOR));
            bump("z", fd::compare(&f.z, &|x, y| at(x, y).z.value(), rho, zeta, h, FLOOR));
            bump("Omega", fd::compare(&f.z.recip(), &|x, y| 1.0 / at(x, y).z.value(), rho, zeta, h, FLOOR));
            let g = tod_metric(&rods, rho, zeta).unwrap();
            for a in 0..4 {
                for b in a..4 {
                    let comp = |x: f64, y: f64| tod_metric(&rods, x, y).unwrap().values()[a][b];
                    bump("tod_metric", fd::compare(g.get(a, b), &comp, rho, zeta, h, FLOOR));
                }
            }
        }
    }
    for roots in [GENERIC_ROOTS, SELF_DUAL_A] {
        let params = pd_params_from_roots(roots, 1.0).unwrap();
        for (p, q) in pd_points(&params, n, seed) {
            let [p1, p2, p3, _] = roots;
            let h = step * (p - p2).min(p3 - p).min(q - p1).min(p2 - q);
            let g = pd_metric(&params, p, q).unwrap();
            for a in 0..4 {
                for b in a..4 {
                    let comp = |x: f64, y: f64| pd_metric(&params, x, y).unwrap().values()[a][b];
                    bump("pd_metric", fd::compare(g.get(a, b), &comp, p, q, h, FLOOR));
                }
            }
        }
    }
    for (r, th) in eh_chart_points(n, seed) {
        let h = step * (r - 1.0).min(th).min(PI - th);
        let (rho, zeta) = eh_coord_jets(1.0, r, th, 2).unwrap();
        let at = |x: f64, y: f64| eh_coord_jets(1.0, x, y, 0).unwrap();
        bump("eh_coords", fd::compare(&rho, &|x, y| at(x, y).0.value(), r, th, h, FLOOR));
        bump("eh_coords", fd::compare(&zeta, &|x, y| at(x, y).1.value(), r, th, h, FLOOR));
        let g = eh_closed_form(1.0, r, th).unwrap();
        for a in 0..4 {
            for b in a..4 {
                let comp = |x: f64, y: f64| eh_closed_form(1.0, x, y).unwrap().values()[a][b];
                bump("eh_metric", fd::compare(g.get(a, b), &comp, r, th, h, FLOOR));
            }
        }
    }
    worst
}
