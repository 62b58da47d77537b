//! Axisymmetric harmonic building blocks and the Ward change of coordinates.
//!
//! `V0(ρ, ζ) = 2R − 2ζ artanh(ζ/R)` and its conjugate `H0 = ζR + ρ² artanh(ζ/R)`
//! are evaluated through `artanh(ζ/R) = sign(ζ) (log(R + |ζ|) − log ρ)`, which is
//! exact and free of cancellation on both sides of the equator.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{invert_map, Jet2, Real, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Weights sum to one; the classification setting.
    Ale,
    /// Any positive weights; used for experiments and negative controls.
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum HGauge {
    /// Constant chosen so that `F_0 = −F_n` on the semi-infinite rods.
    Symmetric,
    Constant(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Nut {
    pub z: f64,
    pub a: f64,
}

/// Exact companions of the floating data when the input was given as decimal
/// or fraction strings.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactRodData {
    pub c: BigRational,
    pub z: Vec<BigRational>,
    pub a: Vec<BigRational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RodData {
    c: f64,
    nuts: Vec<Nut>,
    mode: Mode,
    gauge: HGauge,
    exact: Option<ExactRodData>,
}

const SUM_TOL: f64 = 1e-12;

impl RodData {
    pub fn new(c: f64, nuts: Vec<Nut>, mode: Mode) -> Result<Self> {
        if !(c < 0.0) || !c.is_finite() {
            return Err(Error::InvalidRodData(format!(
                "the constant c must be strictly negative (got {c})"
            )));
        }
        if nuts.is_empty() {
            return Err(Error::InvalidRodData("at least one turning point is required".into()));
        }
        for w in nuts.windows(2) {
            if !(w[0].z < w[1].z) {
                return Err(Error::InvalidRodData(format!(
                    "turning points must be strictly increasing ({} then {})",
                    w[0].z, w[1].z
                )));
            }
        }
        if let Some(n) = nuts.iter().find(|n| !(n.a > 0.0) || !n.z.is_finite()) {
            return Err(Error::InvalidRodData(format!(
                "weights must be positive and positions finite (z = {}, a = {})",
                n.z, n.a
            )));
        }
        if mode == Mode::Ale {
            let s: f64 = nuts.iter().map(|n| n.a).sum();
            if (s - 1.0).abs() > SUM_TOL {
                return Err(Error::InvalidRodData(format!(
                    "ALE mode requires the weights to sum to 1 (sum = {s})"
                )));
            }
        }
        Ok(RodData {
            c,
            nuts,
            mode,
            gauge: HGauge::Symmetric,
            exact: None,
        })
    }

    /// Eguchi-Hanson data with separation constant `a`.
    pub fn eguchi_hanson(a: f64) -> Self {
        let q = a * a / 4.0;
        Self::new(
            -a.powi(4) / 16.0,
            vec![Nut { z: -q, a: 0.5 }, Nut { z: q, a: 0.5 }],
            Mode::Ale,
        )
        .expect("valid Eguchi-Hanson data")
    }

    pub fn with_gauge(mut self, gauge: HGauge) -> Self {
        self.gauge = gauge;
        self
    }

    pub fn with_exact(mut self, exact: ExactRodData) -> Self {
        self.exact = Some(exact);
        self
    }

    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn nuts(&self) -> &[Nut] {
        &self.nuts
    }
    pub fn n(&self) -> usize {
        self.nuts.len()
    }
    pub fn mode(&self) -> Mode {
        self.mode
    }
    pub fn gauge(&self) -> HGauge {
        self.gauge
    }
    pub fn exact(&self) -> Option<&ExactRodData> {
        self.exact.as_ref()
    }

    pub fn weight_sum(&self) -> f64 {
        self.nuts.iter().map(|n| n.a).sum()
    }

    /// Weighted centre `Σ a_i z_i / Σ a_i`.
    pub fn centre(&self) -> f64 {
        self.nuts.iter().map(|n| n.a * n.z).sum::<f64>() / self.weight_sum()
    }

    /// Length scale of the data, at least one.
    pub fn scale(&self) -> f64 {
        let first = self.nuts[0].z;
        let last = self.nuts[self.n() - 1].z;
        (last - first).max(first.abs()).max(last.abs()).max(1.0)
    }

    pub fn rho_min(&self) -> f64 {
        1e-8 * self.scale()
    }

    pub fn nut_radius(&self) -> f64 {
        let min_len = self
            .nuts
            .windows(2)
            .map(|w| w[1].z - w[0].z)
            .fold(f64::INFINITY, f64::min);
        1e-6 * if min_len.is_finite() { min_len } else { self.scale() }
    }

    /// Resolved additive constant of `H`.
    pub fn h_constant(&self) -> f64 {
        match self.gauge {
            HGauge::Constant(k) => k,
            HGauge::Symmetric => {
                let p = axis_profile(self);
                let n = self.n();
                let k0 = p.rod_constant(0);
                let kn = p.rod_constant(n);
                -(k0 + kn) / 2.0
            }
        }
    }

    pub fn check_interior(&self, rho: f64, zeta: f64) -> Result<()> {
        if !(rho >= self.rho_min()) {
            return Err(Error::Axis { rho });
        }
        let r = self.nut_radius();
        for n in &self.nuts {
            if (rho * rho + (zeta - n.z).powi(2)).sqrt() < r {
                return Err(Error::NutProximity { z: n.z });
            }
        }
        Ok(())
    }
}

/// Per-nut jets at an interior point: `s = ζ − z_i`, `R = √(ρ² + s²)` and
/// `artanh(s/R)`.
pub(crate) struct NutJets<T> {
    pub a: T,
    pub z: T,
    pub s: Jet2<T>,
    pub r: Jet2<T>,
    pub at: Jet2<T>,
}

pub(crate) fn coordinate_jets<T: Real>(rho: T, zeta: T, order: usize) -> (Jet2<T>, Jet2<T>) {
    (
        Jet2::seed(Var::First, rho, order),
        Jet2::seed(Var::Second, zeta, order),
    )
}

fn artanh_ratio<T: Real>(rj: &Jet2<T>, s: &Jet2<T>, r: &Jet2<T>) -> Jet2<T> {
    let lr = rj.ln();
    if s.value() >= T::zero() {
        (r + s).ln() - lr
    } else {
        lr - (r - s).ln()
    }
}

pub(crate) fn nut_jets<T: Real>(nuts: &[Nut], rho: T, zeta: T, order: usize) -> Vec<NutJets<T>> {
    let (rj, zj) = coordinate_jets(rho, zeta, order);
    let rho2 = &rj * &rj;
    nuts.iter()
        .map(|n| {
            let z = T::lit(n.z);
            let s = zj.add_s(-z);
            let r = (&rho2 + &(&s * &s)).sqrt();
            let at = artanh_ratio(&rj, &s, &r);
            NutJets {
                a: T::lit(n.a),
                z,
                s,
                r,
                at,
            }
        })
        .collect()
}

fn check_rho<T: Real>(rho: T) -> Result<()> {
    if rho > T::zero() {
        Ok(())
    } else {
        Err(Error::Axis {
            rho: rho.to_f64().unwrap_or(f64::NAN),
        })
    }
}

pub fn v0_jet<T: Real>(rho: T, zeta: T, order: usize) -> Result<Jet2<T>> {
    check_rho(rho)?;
    let nj = nut_jets(&[Nut { z: 0.0, a: 1.0 }], rho, zeta, order);
    let n = &nj[0];
    Ok(n.r.mul_s(T::lit(2.0)) - (&n.s * &n.at).mul_s(T::lit(2.0)))
}

pub fn h0_jet<T: Real>(rho: T, zeta: T, order: usize) -> Result<Jet2<T>> {
    check_rho(rho)?;
    let (rj, _) = coordinate_jets(rho, zeta, order);
    let nj = nut_jets(&[Nut { z: 0.0, a: 1.0 }], rho, zeta, order);
    let n = &nj[0];
    Ok(&n.s * &n.r + &(&rj * &rj) * &n.at)
}

pub fn build_v<T: Real>(rods: &RodData, rho: T, zeta: T, order: usize) -> Result<Jet2<T>> {
    check_rho(rho)?;
    let mut v = Jet2::constant(T::zero(), order);
    for n in nut_jets(rods.nuts(), rho, zeta, order) {
        let v0 = n.r.mul_s(T::lit(2.0)) - (&n.s * &n.at).mul_s(T::lit(2.0));
        v = v + v0.mul_s(n.a);
    }
    Ok(v)
}

pub fn build_h<T: Real>(
    rods: &RodData,
    rho: T,
    zeta: T,
    order: usize,
    gauge_constant: T,
) -> Result<Jet2<T>> {
    check_rho(rho)?;
    let (rj, _) = coordinate_jets(rho, zeta, order);
    let rho2 = &rj * &rj;
    let mut h = Jet2::constant(gauge_constant, order);
    for n in nut_jets(rods.nuts(), rho, zeta, order) {
        let h0 = &n.s * &n.r + &rho2 * &n.at;
        h = h + h0.mul_s(n.a);
    }
    Ok(h)
}

/// Jets of the Ward coordinates `z = Σ a_i R_i` and `x = Σ a_i artanh(s_i/R_i)`.
pub fn ward_jets<T: Real>(
    rods: &RodData,
    rho: T,
    zeta: T,
    order: usize,
) -> Result<(Jet2<T>, Jet2<T>)> {
    check_rho(rho)?;
    let mut z = Jet2::constant(T::zero(), order);
    let mut x = Jet2::constant(T::zero(), order);
    for n in nut_jets(rods.nuts(), rho, zeta, order) {
        z = z + n.r.mul_s(n.a);
        x = x + n.at.mul_s(n.a);
    }
    Ok((z, x))
}

pub fn ward_coords(rods: &RodData, rho: f64, zeta: f64) -> Result<(f64, f64)> {
    let (z, x) = ward_jets(rods, rho, zeta, 0)?;
    Ok((z.value(), x.value()))
}

pub const WARD_MAX_ITER: usize = 200;
pub const WARD_TOL: f64 = 1e-12;

pub fn ward_inverse(rods: &RodData, z: f64, x: f64, guess: (f64, f64)) -> Result<(f64, f64)> {
    if !(z > 0.0) {
        return Err(Error::OutOfDomain(format!("z must be positive (got {z})")));
    }
    if !(guess.0 > 0.0) {
        return Err(Error::OutOfDomain("initial guess must have rho > 0".into()));
    }
    let (mut rho, mut zeta) = guess;
    let mut residual;
    let resid = |zz: f64, xx: f64| ((zz - z) / z.max(1.0)).abs().max(((xx - x) / x.abs().max(1.0)).abs());
    for _ in 0..WARD_MAX_ITER {
        let (zj, xj) = ward_jets(rods, rho, zeta, 1)?;
        residual = resid(zj.value(), xj.value());
        if residual < WARD_TOL {
            return Ok((rho, zeta));
        }
        let (a, b) = (zj.get(1, 0), zj.get(0, 1));
        let (c, d) = (xj.get(1, 0), xj.get(0, 1));
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let (fz, fx) = (zj.value() - z, xj.value() - x);
        let drho = (d * fz - b * fx) / det;
        let dzeta = (a * fx - c * fz) / det;
        let mut t = 1.0;
        // damp to stay in the half-plane and to decrease the residual
        loop {
            let (nr, nz) = (rho - t * drho, zeta - t * dzeta);
            if nr > 0.0 {
                if let Ok((zz, xx)) = ward_coords(rods, nr, nz) {
                    if resid(zz, xx) < residual || t < 1e-6 {
                        rho = nr;
                        zeta = nz;
                        break;
                    }
                }
            }
            t *= 0.5;
            if t < 1e-12 {
                return Err(Error::Inversion { residual });
            }
        }
    }
    let (zz, xx) = ward_coords(rods, rho, zeta)?;
    residual = resid(zz, xx);
    if residual < WARD_TOL {
        Ok((rho, zeta))
    } else {
        Err(Error::Inversion { residual })
    }
}

/// Starting point for `ward_inverse`: the far-field approximation `z ≈ S R`,
/// `x ≈ S artanh(cos θ)` about the weighted centre, with `S = Σ a_i`.
pub fn ward_guess(rods: &RodData, z: f64, x: f64) -> (f64, f64) {
    let s = rods.weight_sum();
    let r = z / s;
    let t = (x / s).tanh();
    ((r * (1.0 - t * t).sqrt()).max(rods.rho_min() * 10.0), rods.centre() + r * t)
}

/// Jets of `(ρ, ζ)` as functions of `(z, x)` at the point `(rho, zeta)`.
pub fn inverse_jets(
    rods: &RodData,
    rho: f64,
    zeta: f64,
    order: usize,
) -> Result<(Jet2<f64>, Jet2<f64>)> {
    let (zj, xj) = ward_jets(rods, rho, zeta, order)?;
    let (dr, dz) = invert_map(&zj, &xj)?;
    Ok((dr.with_value(rho), dz.with_value(zeta)))
}

/// `|u_xx + (e^u)_zz|` with `u = 2 log ρ(z, x)`.
pub fn toda_residual(rods: &RodData, z: f64, x: f64) -> Result<f64> {
    let (rho, zeta) = ward_inverse(rods, z, x, ward_guess(rods, z, x))?;
    let (rj, _) = inverse_jets(rods, rho, zeta, 2)?;
    let u = rj.ln().mul_s(2.0);
    let eu = &rj * &rj;
    Ok((u.get(0, 2) + eu.get(2, 0)).abs())
}

/// Near-axis data: `V = f(ζ) log ρ² + g(ζ) + O(ρ²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AxisProfile {
    pub f_slopes: Vec<f64>,
    pub f_values: Vec<f64>,
    nuts: Vec<Nut>,
}

impl AxisProfile {
    pub fn f(&self, zeta: f64) -> f64 {
        self.nuts.iter().map(|n| n.a * (zeta - n.z).abs()).sum()
    }

    /// Index of the rod containing `zeta` (rod `i` is `(z_i, z_{i+1})`).
    pub fn rod_of(&self, zeta: f64) -> usize {
        self.nuts.iter().take_while(|n| n.z < zeta).count()
    }

    pub fn slope_at(&self, zeta: f64) -> f64 {
        self.f_slopes[self.rod_of(zeta)]
    }

    /// `g(ζ) = Σ a_i (2|s_i| − |s_i| log(4 s_i²))`.
    pub fn g(&self, zeta: f64) -> f64 {
        self.nuts
            .iter()
            .map(|n| {
                let s = (zeta - n.z).abs();
                n.a * (2.0 * s - s * (4.0 * s * s).ln())
            })
            .sum()
    }

    /// `g''(ζ) = −Σ 2a_i/|s_i|`, the axis value of `V_ζζ`.
    pub fn g2(&self, zeta: f64) -> f64 {
        self.nuts.iter().map(|n| -2.0 * n.a / (zeta - n.z).abs()).sum()
    }

    /// Axis value of `H` without gauge constant: `Σ a_i s_i |s_i|`.
    pub fn h_axis(&self, zeta: f64) -> f64 {
        self.nuts
            .iter()
            .map(|n| n.a * (zeta - n.z) * (zeta - n.z).abs())
            .sum()
    }

    /// A sample point inside rod `i`.
    pub fn rod_point(&self, i: usize) -> f64 {
        let n = self.nuts.len();
        let len = if n >= 2 {
            self.nuts[n - 1].z - self.nuts[0].z
        } else {
            1.0
        };
        if i == 0 {
            self.nuts[0].z - len.max(1.0)
        } else if i == n {
            self.nuts[n - 1].z + len.max(1.0)
        } else {
            0.5 * (self.nuts[i - 1].z + self.nuts[i].z)
        }
    }

    /// `H(0,ζ) − f²/f'` on a rod with nonzero slope; constant along the rod.
    pub fn rod_constant(&self, i: usize) -> f64 {
        let zeta = self.rod_point(i);
        let f = self.f(zeta);
        self.h_axis(zeta) - f * f / self.f_slopes[i]
    }
}

pub fn axis_profile(rods: &RodData) -> AxisProfile {
    let n = rods.n();
    let total: f64 = rods.weight_sum();
    let mut slopes = vec![-total];
    for k in 0..n {
        let prev = slopes[k];
        slopes.push(prev + 2.0 * rods.nuts()[k].a);
    }
    let nuts = rods.nuts().to_vec();
    let values = nuts
        .iter()
        .map(|ni| nuts.iter().map(|nj| nj.a * (ni.z - nj.z).abs()).sum())
        .collect();
    AxisProfile {
        f_slopes: slopes,
        f_values: values,
        nuts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eh() -> RodData {
        RodData::eguchi_hanson(1.0)
    }

    #[test]
    fn v0_examples() {
        let v = v0_jet(3.0, 4.0, 4).unwrap();
        assert!((v.value() - (10.0 - 4.0 * 9f64.ln())).abs() < 1e-13);
        assert!((v.value() - 1.2111017).abs() < 1e-6);
        assert!((v.get(0, 2) + 0.4).abs() < 1e-14);
        for rho in [0.1f64, 1.0, 7.0] {
            assert!((v0_jet(rho, 0.0, 0).unwrap().value() - 2.0 * rho).abs() < 1e-14);
        }
        assert!(matches!(v0_jet(0.0, 1.0, 2), Err(Error::Axis { .. })));
    }

    #[test]
    fn v0_identities() {
        for &(rho, zeta) in &[(3.0, 4.0), (0.2, -5.0), (1.0, 1e-3)] {
            let v = v0_jet(rho, zeta, 2).unwrap();
            let r = f64::hypot(rho, zeta);
            assert!((rho * v.get(1, 0) - 2.0 * r).abs() < 1e-12 * r);
            assert!((v.get(0, 1) + 2.0 * (zeta / r).atanh()).abs() < 1e-12);
        }
    }

    #[test]
    fn h0_examples() {
        let h = h0_jet(3.0, 4.0, 2).unwrap();
        assert!((h.value() - (20.0 + 4.5 * 9f64.ln())).abs() < 1e-12);
        assert!((h.value() - 29.88751).abs() < 1e-5);
        assert_eq!(h0_jet(2.5, 0.0, 0).unwrap().value(), 0.0);
        for zeta in [-2.0, 0.7] {
            let near = h0_jet(1e-7, zeta, 0).unwrap().value();
            assert!((near - zeta * f64::abs(zeta)).abs() < 1e-12);
        }
        let v = v0_jet(3.0, 4.0, 2).unwrap();
        assert!((h.get(0, 1) - 3.0 * v.get(1, 0)).abs() < 1e-12);
        assert!((h.get(1, 0) + 3.0 * v.get(0, 1)).abs() < 1e-12);
    }

    #[test]
    fn build_v_examples() {
        let rods = eh();
        let rho = 3f64.sqrt() / 4.0;
        let v = build_v(&rods, rho, 0.0, 2).unwrap();
        assert!((rho * v.get(1, 0) - 1.0).abs() < 1e-14);
        let single = RodData::new(-1.0, vec![Nut { z: 0.3, a: 1.0 }], Mode::Ale).unwrap();
        let a = build_v(&single, 1.2, -0.4, 4).unwrap();
        let b = v0_jet(1.2, -0.7, 4).unwrap();
        assert_eq!(a, b);
        let v = build_v(&rods, 3.0, 4.0, 2).unwrap();
        let lap: f64 = v.get(1, 0) / 3.0 + v.get(2, 0) + v.get(0, 2);
        assert!(lap.abs() < 1e-13);
    }

    #[test]
    fn build_h_examples() {
        let rods = eh();
        let h = build_h(&rods, 0.7f64, 0.0, 0, 0.0).unwrap();
        assert!(h.value().abs() < 1e-15);
        // on the middle rod H(0+, ζ) = ζ/2 + gauge; anchoring the gauge to the
        // leftmost rod constant adds 1/16
        let p = axis_profile(&rods);
        for zeta in [-0.2f64, 0.0, 0.1] {
            let h: f64 = build_h(&rods, 1e-7, zeta, 0, 0.0).unwrap().value();
            assert!((h - zeta / 2.0).abs() < 1e-10);
            let h_left = build_h(&rods, 1e-7, zeta, 0, -p.rod_constant(0)).unwrap().value();
            assert!((h_left - (zeta / 2.0 - p.rod_constant(0))).abs() < 1e-10);
            assert!((-p.rod_constant(0) - 1.0 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn ward_examples() {
        let rods = eh();
        let rho = 3f64.sqrt() / 4.0;
        let (z, x) = ward_coords(&rods, rho, 0.0).unwrap();
        assert!((z - 0.5).abs() < 1e-15 && x.abs() < 1e-15);
        let (r, zeta) = ward_inverse(&rods, 0.5, 0.0, ward_guess(&rods, 0.5, 0.0)).unwrap();
        assert!((r - rho).abs() < 1e-12 && zeta.abs() < 1e-12);
        for &(r, zz) in &[(0.3, 0.1), (2.0, -3.0), (0.05, 0.6)] {
            let (z, x) = ward_coords(&rods, r, zz).unwrap();
            let back = ward_inverse(&rods, z, x, ward_guess(&rods, z, x)).unwrap();
            assert!((back.0 - r).abs() < 1e-10 && (back.1 - zz).abs() < 1e-10);
        }
        let (z, _) = ward_coords(&rods, 3e5, 4e5).unwrap();
        assert!((z / 5e5 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn toda_examples() {
        let rods = eh();
        assert!(toda_residual(&rods, 0.5, 0.0).unwrap() < 1e-8);
        let single = RodData::new(-1.0, vec![Nut { z: 0.0, a: 1.0 }], Mode::Ale).unwrap();
        assert!(toda_residual(&single, 1.3, 0.4).unwrap() < 1e-8);
        let bad = RodData::new(
            -1.0,
            vec![Nut { z: -0.3, a: 0.25 }, Nut { z: 0.5, a: 1.1 }],
            Mode::Free,
        )
        .unwrap();
        assert!(toda_residual(&bad, 0.9, -0.2).unwrap() < 1e-8);
    }

    #[test]
    fn axis_profile_examples() {
        let p = axis_profile(&eh());
        assert_eq!(p.f_slopes, vec![-1.0, 0.0, 1.0]);
        assert_eq!(p.f_values, vec![0.25, 0.25]);
        let single = RodData::new(-1.0, vec![Nut { z: 0.0, a: 1.0 }], Mode::Ale).unwrap();
        let p1 = axis_profile(&single);
        assert_eq!(p1.f_slopes, vec![-1.0, 1.0]);
        assert_eq!(p1.f_values, vec![0.0]);
        // V0 = |ζ| log ρ² + g0(ζ) + O(ρ²)
        for zeta in [-1.3, 0.4, 2.0] {
            let rho: f64 = 1e-4;
            let v = v0_jet(rho, zeta, 0).unwrap().value();
            let approx = zeta.abs() * (rho * rho).ln() + p1.g(zeta);
            assert!((v - approx).abs() < 1e-6, "{v} {approx}");
        }
    }

    #[test]
    fn validation() {
        assert!(RodData::new(0.1, vec![Nut { z: 0.0, a: 1.0 }], Mode::Ale).is_err());
        assert!(RodData::new(
            -1.0,
            vec![Nut { z: 0.0, a: 0.5 }, Nut { z: 1.0, a: 0.6 }],
            Mode::Ale
        )
        .is_err());
        assert!(RodData::new(
            -1.0,
            vec![Nut { z: 1.0, a: 0.5 }, Nut { z: 0.0, a: 0.5 }],
            Mode::Ale
        )
        .is_err());
        let rods = eh();
        assert!(matches!(rods.check_interior(0.0, 0.0), Err(Error::Axis { .. })));
        assert!(matches!(
            rods.check_interior(1e-7, 0.25),
            Err(Error::NutProximity { .. })
        ));
    }
}
