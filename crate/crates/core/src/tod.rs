//! Tod metric, fundamental form and the Eguchi-Hanson comparator.
//!
//! The fields are evaluated through sums over nut pairs. With `s_i = ζ − z_i`,
//! `R_i = √(ρ² + s_i²)` and
//!
//! ```text
//! A = Σ a_i R_i           B = Σ a_i / R_i        C = Σ a_i s_i / R_i
//! D = Σ a_i s_i R_i       K = −½ Σ_ij a_i a_j (z_i − z_j)² / (R_i R_j)
//! P = −½ Σ_ij a_i a_j (z_i − z_j)² (s_i + s_j) / (R_i R_j)
//! ```
//!
//! one has `W = A K / (c (B² ρ² + C²))`, `e^{2ν} = A K / c` and
//! `F = (A P − D K) / (c (A B + K)) − h/c`, where `h` is the gauge constant of `H`.
//! These agree with the expressions in `V`-derivatives (see `tod_fields_via_v`)
//! but never subtract nearly equal quantities, so `W` keeps full relative
//! precision at large radius. For a single nut `K = 0` and `W` vanishes.

use crate::error::{Error, Result};
use crate::harmonic::{build_h, build_v, nut_jets, ward_jets, RodData};
use crate::jets::{Jet2, Real, Var};

#[derive(Clone, Debug, PartialEq)]
pub struct TodFields<T> {
    pub w: Jet2<T>,
    pub e2nu: Jet2<T>,
    pub f: Jet2<T>,
    pub z: Jet2<T>,
    pub x: Jet2<T>,
}

/// Symmetric 4×4 matrix of jets in two essential coordinates. Indices 0 and 1
/// are the Killing coordinates; 2 and 3 are the essential ones.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricJet {
    pub chart: [&'static str; 4],
    pub base_point: (f64, f64),
    g: [[Jet2<f64>; 4]; 4],
}

impl MetricJet {
    /// Builds from the upper triangle; `g[a][b]` for `a > b` is ignored.
    pub fn from_upper(chart: [&'static str; 4], base_point: (f64, f64), g: [[Jet2<f64>; 4]; 4]) -> Self {
        let mut m = g;
        for a in 0..4 {
            for b in 0..a {
                m[a][b] = m[b][a].clone();
            }
        }
        MetricJet {
            chart,
            base_point,
            g: m,
        }
    }

    pub fn get(&self, a: usize, b: usize) -> &Jet2<f64> {
        &self.g[a][b]
    }

    pub fn order(&self) -> usize {
        self.g.iter().flatten().map(|j| j.order()).min().unwrap_or(0)
    }

    pub fn values(&self) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for (a, row) in out.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = self.g[a][b].value();
            }
        }
        out
    }

    /// Determinant of the Killing block.
    pub fn gram_det(&self) -> f64 {
        let g = self.values();
        g[0][0] * g[1][1] - g[0][1] * g[1][0]
    }
}

/// Antisymmetric 4×4 matrix of jets; antisymmetry holds by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoFormJet {
    c: [[Jet2<f64>; 4]; 4],
}

impl TwoFormJet {
    pub fn zero(order: usize) -> Self {
        TwoFormJet {
            c: std::array::from_fn(|_| std::array::from_fn(|_| Jet2::constant(0.0, order))),
        }
    }

    pub fn set(&mut self, a: usize, b: usize, v: Jet2<f64>) {
        assert!(a != b, "diagonal of a 2-form is zero");
        self.c[b][a] = -&v;
        self.c[a][b] = v;
    }

    pub fn get(&self, a: usize, b: usize) -> &Jet2<f64> {
        &self.c[a][b]
    }

    pub fn order(&self) -> usize {
        self.c.iter().flatten().map(|j| j.order()).min().unwrap_or(0)
    }

    pub fn values(&self) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for (a, row) in out.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = self.c[a][b].value();
            }
        }
        out
    }

    pub fn scale_by(&self, f: &Jet2<f64>) -> Self {
        TwoFormJet {
            c: std::array::from_fn(|a| std::array::from_fn(|b| &self.c[a][b] * f)),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        TwoFormJet {
            c: std::array::from_fn(|a| std::array::from_fn(|b| &self.c[a][b] + &other.c[a][b])),
        }
    }

    /// Pfaffian `ω_01 ω_23 − ω_02 ω_13 + ω_03 ω_12`; `ω∧ω = 2 Pf dx⁰∧dx¹∧dx²∧dx³`.
    pub fn pfaffian(&self) -> f64 {
        let w = self.values();
        w[0][1] * w[2][3] - w[0][2] * w[1][3] + w[0][3] * w[1][2]
    }
}

/// Pair sums `A, B, C, D, K, P` at `(rho, zeta)`.
pub(crate) struct PairSums<T> {
    pub a: Jet2<T>,
    pub b: Jet2<T>,
    pub c: Jet2<T>,
    pub d: Jet2<T>,
    pub k: Jet2<T>,
    pub p: Jet2<T>,
    pub x: Jet2<T>,
}

pub(crate) fn pair_sums<T: Real>(rods: &RodData, rho: T, zeta: T, order: usize) -> PairSums<T> {
    let nj = nut_jets(rods.nuts(), rho, zeta, order);
    let zero = Jet2::constant(T::zero(), order);
    let (mut a, mut b, mut c, mut d, mut x) =
        (zero.clone(), zero.clone(), zero.clone(), zero.clone(), zero.clone());
    let inv: Vec<Jet2<T>> = nj.iter().map(|n| n.r.recip()).collect();
    for (n, ir) in nj.iter().zip(&inv) {
        a = a + n.r.mul_s(n.a);
        b = b + ir.mul_s(n.a);
        c = c + (&n.s * ir).mul_s(n.a);
        d = d + (&n.s * &n.r).mul_s(n.a);
        x = x + n.at.mul_s(n.a);
    }
    let (mut k, mut p) = (zero.clone(), zero);
    for i in 0..nj.len() {
        for j in (i + 1)..nj.len() {
            let dz = nj[i].z - nj[j].z;
            let w = nj[i].a * nj[j].a * dz * dz;
            let q = (&inv[i] * &inv[j]).mul_s(w);
            p = p - &(&q * &(&nj[i].s + &nj[j].s));
            k = k - &q;
        }
    }
    PairSums { a, b, c, d, k, p, x }
}

pub fn tod_fields<T: Real>(rods: &RodData, rho: T, zeta: T, order: usize) -> Result<TodFields<T>> {
    let (r64, z64) = (rho.to_f64().unwrap_or(f64::NAN), zeta.to_f64().unwrap_or(f64::NAN));
    rods.check_interior(r64, z64)?;
    let s = pair_sums(rods, rho, zeta, order);
    let c = T::lit(rods.c());
    let rj = Jet2::seed(Var::First, rho, order);
    let ak = &s.a * &s.k;
    let denom_w = &(&(&s.b * &s.b) * &(&rj * &rj)) + &(&s.c * &s.c);
    let w = (&ak / &denom_w).div_s(c);
    let e2nu = ak.div_s(c);
    let num_f = &(&s.a * &s.p) - &(&s.d * &s.k);
    let den_f = &(&s.a * &s.b) + &s.k;
    let f = (&num_f / &den_f).div_s(c).add_s(-T::lit(rods.h_constant()) / c);
    Ok(TodFields {
        w,
        e2nu,
        f,
        z: s.a,
        x: s.x,
    })
}

/// The same fields from jets of `V` and `H` in the textbook form. Loses
/// relative precision where `W` is small compared to `ρ V_ρ`.
pub fn tod_fields_via_v(rods: &RodData, rho: f64, zeta: f64, order: usize) -> Result<TodFields<f64>> {
    rods.check_interior(rho, zeta)?;
    let hi = order + 2;
    let v = build_v(rods, rho, zeta, hi)?;
    let h = build_h(rods, rho, zeta, hi, rods.h_constant())?;
    let c = rods.c();
    let rj = Jet2::seed(Var::First, rho, order);
    let vr = v.partial(Var::First).truncate(order + 1);
    let vz = v.partial(Var::Second);
    let vzz = vz.partial(Var::Second).truncate(order);
    let vzr = vz.partial(Var::First).truncate(order);
    let vr = vr.truncate(order);
    let q = &(&vzz * &vzz) + &(&vzr * &vzr);
    let rvr = &rj * &vr;
    let w = (&rvr + &(&(&(&vr * &vr) * &vzz) / &q)).div_s(2.0 * c);
    let e2nu = (&(&w * &(&rj * &rj)) * &q).div_s(4.0);
    let vz = vz.truncate(order);
    let f = (&(&(&(&rj * &(&vr * &vr)) * &vzr) / &q) - &(&vz * &rj.powi(2)) - &h.truncate(order).mul_s(2.0))
        .div_s(2.0 * c);
    let (z, x) = ward_jets(rods, rho, zeta, order)?;
    Ok(TodFields { w, e2nu, f, z, x })
}

pub const TOD_CHART: [&str; 4] = ["tau", "y", "rho", "zeta"];

pub fn metric_from_fields(fields: &TodFields<f64>, rho: f64, zeta: f64, order: usize) -> MetricJet {
    let w = fields.w.truncate(order);
    let f = fields.f.truncate(order);
    let e = fields.e2nu.truncate(order);
    let rj = Jet2::seed(Var::First, rho, order);
    let iw = w.recip();
    let zero = Jet2::constant(0.0, order);
    let gyy = &(&w * &(&rj * &rj)) + &(&(&f * &f) * &iw);
    let gty = &iw * &f;
    let g = [
        [iw, gty, zero.clone(), zero.clone()],
        [zero.clone(), gyy, zero.clone(), zero.clone()],
        [zero.clone(), zero.clone(), e.clone(), zero.clone()],
        [zero.clone(), zero.clone(), zero, e],
    ];
    MetricJet::from_upper(TOD_CHART, (rho, zeta), g)
}

pub fn tod_metric(rods: &RodData, rho: f64, zeta: f64) -> Result<MetricJet> {
    let fields = tod_fields(rods, rho, zeta, 2)?;
    if !(fields.w.value() > 0.0) {
        return Err(Error::DegenerateMetric(format!(
            "W = {:e} is not positive at (rho, zeta) = ({rho}, {zeta})",
            fields.w.value()
        )));
    }
    Ok(metric_from_fields(&fields, rho, zeta, 2))
}

/// `ω = (dτ + F dy) ∧ dz + W ρ² dx ∧ dy` with 2-jets.
pub fn fundamental_form(rods: &RodData, rho: f64, zeta: f64) -> Result<TwoFormJet> {
    form_with_order(rods, rho, zeta, 2)
}

pub(crate) fn form_with_order(rods: &RodData, rho: f64, zeta: f64, order: usize) -> Result<TwoFormJet> {
    let fields = tod_fields(rods, rho, zeta, order + 1)?;
    Ok(form_from_fields(&fields, rho, order))
}

pub(crate) fn form_from_fields(fields: &TodFields<f64>, rho: f64, order: usize) -> TwoFormJet {
    let (zr, zz) = (fields.z.partial(Var::First), fields.z.partial(Var::Second));
    let (xr, xz) = (fields.x.partial(Var::First), fields.x.partial(Var::Second));
    let rj = Jet2::seed(Var::First, rho, order);
    let f = fields.f.truncate(order);
    let wr2 = &fields.w.truncate(order) * &(&rj * &rj);
    let mut om = TwoFormJet::zero(order);
    om.set(0, 2, zr.truncate(order));
    om.set(0, 3, zz.truncate(order));
    om.set(1, 2, &(&f * &zr) - &(&wr2 * &xr));
    om.set(1, 3, &(&f * &zz) - &(&wr2 * &xz));
    om
}

/// Sign of `ω∧ω` relative to the chart order `(τ, y, ρ, ζ)`.
pub fn tod_orientation(rods: &RodData, rho: f64, zeta: f64) -> Result<f64> {
    let om = form_with_order(rods, rho, zeta, 0)?;
    Ok(om.pfaffian().signum())
}

pub const EH_CHART: [&str; 4] = ["tau", "phi", "r", "theta"];

pub fn eh_closed_form(a: f64, r: f64, theta: f64) -> Result<MetricJet> {
    if !(a > 0.0) || !(r > a) {
        return Err(Error::OutOfDomain(format!(
            "Eguchi-Hanson chart requires r > a > 0 (r = {r}, a = {a})"
        )));
    }
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::OutOfDomain(format!("theta = {theta} is on the axis")));
    }
    let order = 2;
    let rj = Jet2::seed(Var::First, r, order);
    let th = Jet2::seed(Var::Second, theta, order);
    let r2 = &rj * &rj;
    let f = Jet2::constant(1.0, order) - &(Jet2::constant(a.powi(4), order) / &(&r2 * &r2));
    let q = r2.div_s(4.0);
    let (ct, st) = (th.cos(), th.sin());
    let fq = &f * &q;
    let zero = Jet2::constant(0.0, order);
    let g = [
        [fq.clone(), &fq * &ct, zero.clone(), zero.clone()],
        [
            zero.clone(),
            &(&fq * &(&ct * &ct)) + &(&q * &(&st * &st)),
            zero.clone(),
            zero.clone(),
        ],
        [zero.clone(), zero.clone(), f.recip(), zero.clone()],
        [zero.clone(), zero.clone(), zero, q],
    ];
    Ok(MetricJet::from_upper(EH_CHART, (r, theta), g))
}

/// Weyl-Papapetrou image of the Eguchi-Hanson chart point.
pub fn eh_coords(a: f64, r: f64, theta: f64) -> Result<(f64, f64)> {
    let (j0, j1) = eh_coord_jets(a, r, theta, 0)?;
    Ok((j0.value(), j1.value()))
}

/// Jets of `(ρ, ζ)` as functions of `(r, θ)`.
pub fn eh_coord_jets(a: f64, r: f64, theta: f64, order: usize) -> Result<(Jet2<f64>, Jet2<f64>)> {
    if !(a > 0.0) || !(r > a) || !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::OutOfDomain(format!(
            "Eguchi-Hanson chart requires r > a > 0 and 0 < theta < pi (r = {r}, theta = {theta})"
        )));
    }
    let rj = Jet2::seed(Var::First, r, order);
    let th = Jet2::seed(Var::Second, theta, order);
    let r2 = &rj * &rj;
    // r⁴ − a⁴ = (r² − a²)(r² + a²) avoids cancellation near the bolt
    let m = &r2.add_s(-a * a) * &r2.add_s(a * a);
    let rho = &m.sqrt() * &th.sin().div_s(4.0);
    let zeta = &r2 * &th.cos().div_s(4.0);
    Ok((rho, zeta))
}

pub fn rescale(rods: &RodData, alpha: f64) -> Result<RodData> {
    if !(alpha > 0.0) {
        return Err(Error::Precondition(format!("scale factor must be positive (got {alpha})")));
    }
    let nuts = rods
        .nuts()
        .iter()
        .map(|n| crate::harmonic::Nut { z: alpha * n.z, a: n.a })
        .collect();
    let gauge = match rods.gauge() {
        crate::harmonic::HGauge::Constant(k) => crate::harmonic::HGauge::Constant(alpha * alpha * k),
        g => g,
    };
    Ok(RodData::new(alpha * rods.c(), nuts, rods.mode())?.with_gauge(gauge))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::{Mode, Nut};

    fn eh() -> RodData {
        RodData::eguchi_hanson(1.0)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn eh_worked_point() {
        let rho = 3f64.sqrt() / 4.0;
        let f = tod_fields(&eh(), rho, 0.0, 2).unwrap();
        assert!(rel(f.w.value(), 8.0 / 3.0) < 1e-14);
        assert!(f.f.value().abs() < 1e-14);
        assert!(rel(f.z.value(), 0.5) < 1e-15);
        let g = tod_metric(&eh(), rho, 0.0).unwrap();
        assert!(rel(g.get(0, 0).value(), 3.0 / 8.0) < 1e-14);
    }

    #[test]
    fn stable_fields_match_derivative_formulas() {
        let rods = RodData::new(
            -0.3,
            vec![
                Nut { z: -1.0, a: 0.2 },
                Nut { z: 0.1, a: 0.5 },
                Nut { z: 0.9, a: 0.3 },
            ],
            Mode::Ale,
        )
        .unwrap();
        for &(rho, zeta) in &[(0.4, 0.3), (1.7, -2.0), (0.05, 0.5), (3.0, 4.0)] {
            let a = tod_fields(&rods, rho, zeta, 2).unwrap();
            let b = tod_fields_via_v(&rods, rho, zeta, 2).unwrap();
            for (x, y) in [(&a.w, &b.w), (&a.e2nu, &b.e2nu), (&a.f, &b.f)] {
                for (i, j) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
                    let scale = y.get(i, j).abs().max(1e-3);
                    assert!(
                        (x.get(i, j) - y.get(i, j)).abs() < 1e-8 * scale,
                        "({rho},{zeta}) ({i},{j}) {} vs {}",
                        x.get(i, j),
                        y.get(i, j)
                    );
                }
            }
        }
    }

    #[test]
    fn single_nut_w_vanishes() {
        let rods = RodData::new(-2.0, vec![Nut { z: 0.4, a: 1.0 }], Mode::Ale).unwrap();
        for &(rho, zeta) in &[(0.3, 0.1), (5.0, -2.0)] {
            let f = tod_fields(&rods, rho, zeta, 2).unwrap();
            assert_eq!(f.w.value(), 0.0);
            assert!(tod_metric(&rods, rho, zeta).is_err());
        }
    }

    #[test]
    fn gram_determinant_and_form() {
        let rods = eh();
        for &(rho, zeta) in &[(0.3, 0.1), (2.0, -1.5), (0.01, 0.4)] {
            let g = tod_metric(&rods, rho, zeta).unwrap();
            assert!(rel(g.gram_det(), rho * rho) < 1e-12);
            let om = fundamental_form(&rods, rho, zeta).unwrap();
            let gv = g.values();
            let ginv = nalgebra::Matrix4::from_fn(|a, b| gv[a][b]).try_inverse().unwrap();
            let w = nalgebra::Matrix4::from_fn(|a, b| om.values()[a][b]);
            let j = ginv * w;
            let jj = j * j + nalgebra::Matrix4::identity();
            assert!(jj.abs().max() < 1e-10);
            let norm2: f64 = (0..4)
                .flat_map(|a| (0..4).map(move |b| (a, b)))
                .map(|(a, b)| w[(a, b)] * (ginv * w * ginv.transpose())[(a, b)])
                .sum();
            assert!((norm2 - 4.0).abs() < 1e-10);
        }
    }

    #[test]
    fn orientation_is_constant() {
        let rods = eh();
        let s0 = tod_orientation(&rods, 0.3, 0.1).unwrap();
        for &(rho, zeta) in &[(2.0, -1.5), (0.01, 0.4), (10.0, 3.0), (0.2, -0.2)] {
            assert_eq!(tod_orientation(&rods, rho, zeta).unwrap(), s0);
        }
    }

    #[test]
    fn eh_closed_form_examples() {
        let g = eh_closed_form(1.0, 2f64.sqrt(), std::f64::consts::FRAC_PI_2).unwrap();
        assert!(rel(g.get(0, 0).value(), 3.0 / 8.0) < 1e-15);
        assert!(eh_closed_form(1.0, 0.9, 1.0).is_err());
        let (rho, zeta) = eh_coords(1.0, 2f64.sqrt(), std::f64::consts::FRAC_PI_2).unwrap();
        assert!(rel(rho, 3f64.sqrt() / 4.0) < 1e-15 && zeta.abs() < 1e-16);
        let (rho, zeta) = eh_coords(1.0, 1.5, 1e-9).unwrap();
        assert!(rho < 1e-9 && (zeta - 1.5 * 1.5 / 4.0).abs() < 1e-12);
        let (rho, zeta) = eh_coords(1.0, 1.0 + 1e-12, 1.0).unwrap();
        assert!(rho < 1e-5 && zeta.abs() < 0.25);
    }

    #[test]
    fn rescale_action() {
        let rods = eh();
        assert_eq!(rescale(&rods, 1.0).unwrap(), rods);
        assert!(rescale(&rods, 0.0).is_err());
        let alpha = 2.7;
        let big = rescale(&rods, alpha).unwrap();
        for &(rho, zeta) in &[(0.3, 0.1), (1.1, -0.7)] {
            let g = tod_metric(&rods, rho, zeta).unwrap().values();
            let h = tod_metric(&big, alpha * rho, alpha * zeta).unwrap().values();
            assert!(rel(h[0][0], g[0][0]) < 1e-12);
            assert!(rel(h[0][1], alpha * g[0][1]) < 1e-12 || g[0][1].abs() < 1e-14);
            assert!(rel(h[1][1], alpha * alpha * g[1][1]) < 1e-12);
            assert!(rel(h[2][2], g[2][2]) < 1e-12);
            assert!(rel(h[0][0] * h[1][1] - h[0][1].powi(2), (alpha * rho).powi(2)) < 1e-12);
        }
    }
}
