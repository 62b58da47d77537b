//! Rod structure and its regularity conditions.
//!
//! Rod `i` is the axis interval `(z_i, z_{i+1})` with `z_0 = −∞`, `z_{n+1} = +∞`.
//! Rod vectors are written in `(∂_τ, ∂_y)` components; lattice coordinates use
//! the basis `(v_1, v_0)`, so that `v_0 ↦ (0, 1)` and `v_1 ↦ (1, 0)`.

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::{axis_profile, HGauge, RodData};
use crate::jets::{Jet2, Var};
use crate::tod::tod_fields;

/// Integrality tolerance for floating inputs.
pub const INT_TOL: f64 = 1e-9;

/// Scalars admitted by the rod algebra: `f64` and exact rationals.
pub trait Scalar: Num + Signed + Clone + PartialOrd + std::fmt::Debug {
    fn approx(&self) -> f64;
    fn as_integer(&self) -> Option<i64>;
    fn from_f64_exact(v: f64) -> Self;
}

impl Scalar for f64 {
    fn approx(&self) -> f64 {
        *self
    }
    fn as_integer(&self) -> Option<i64> {
        let r = self.round();
        ((self - r).abs() < INT_TOL && r.abs() < 9e15).then_some(r as i64)
    }
    fn from_f64_exact(v: f64) -> Self {
        v
    }
}

impl Scalar for BigRational {
    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn as_integer(&self) -> Option<i64> {
        if self.is_integer() {
            self.to_integer().to_i64()
        } else {
            None
        }
    }
    fn from_f64_exact(v: f64) -> Self {
        BigRational::from_f64(v).expect("finite gauge constant")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct RodAlgebra<T> {
    pub slopes: Vec<T>,
    pub f_constants: Vec<Option<T>>,
    pub vectors: Vec<[T; 2]>,
    pub lattice: Option<Vec<[T; 2]>>,
}

fn two<T: Scalar>() -> T {
    T::one() + T::one()
}

fn f_at<T: Scalar>(z: &[T], a: &[T], zeta: &T) -> T {
    z.iter().zip(a).fold(T::zero(), |s, (zi, ai)| s + ai.clone() * (zeta.clone() - zi.clone()).abs())
}

fn h_at<T: Scalar>(z: &[T], a: &[T], zeta: &T) -> T {
    z.iter().zip(a).fold(T::zero(), |s, (zi, ai)| {
        let d = zeta.clone() - zi.clone();
        s + ai.clone() * d.clone() * d.abs()
    })
}

fn rod_point<T: Scalar>(z: &[T], i: usize) -> T {
    let n = z.len();
    let len = if n >= 2 { z[n - 1].clone() - z[0].clone() } else { T::one() };
    let len = if len > T::one() { len } else { T::one() };
    if i == 0 {
        z[0].clone() - len
    } else if i == n {
        z[n - 1].clone() + len
    } else {
        (z[i - 1].clone() + z[i].clone()) / two()
    }
}

/// `H(0,ζ) − f²/f'` on rod `i`; constant along the rod.
fn rod_constant<T: Scalar>(z: &[T], a: &[T], slope: &T, i: usize) -> T {
    let p = rod_point(z, i);
    let f = f_at(z, a, &p);
    h_at(z, a, &p) - f.clone() * f / slope.clone()
}

pub(crate) fn det2<T: Scalar>(u: &[T; 2], v: &[T; 2]) -> T {
    u[0].clone() * v[1].clone() - u[1].clone() * v[0].clone()
}

/// Coordinates of `v` in the basis `(b1, b0)`.
pub(crate) fn lattice_coords<T: Scalar>(b1: &[T; 2], b0: &[T; 2], v: &[T; 2]) -> Option<[T; 2]> {
    let d = det2(b1, b0);
    if d.is_zero() {
        return None;
    }
    Some([det2(v, b0) / d.clone(), det2(b1, v) / d])
}

pub(crate) fn rod_algebra<T: Scalar>(c: &T, z: &[T], a: &[T], gauge: Option<&T>) -> RodAlgebra<T> {
    let n = z.len();
    let total = a.iter().fold(T::zero(), |s, x| s + x.clone());
    let mut slopes = vec![-total];
    for k in 0..n {
        let next = slopes[k].clone() + two::<T>() * a[k].clone();
        slopes.push(next);
    }
    let h = match gauge {
        Some(k) => k.clone(),
        None => {
            let k0 = rod_constant(z, a, &slopes[0], 0);
            let kn = rod_constant(z, a, &slopes[n], n);
            -(k0 + kn) / two()
        }
    };
    let mut f_constants = Vec::with_capacity(n + 1);
    let mut vectors = Vec::with_capacity(n + 1);
    for i in 0..=n {
        if slopes[i].is_zero() {
            let f = f_at(z, a, &rod_point(z, i));
            f_constants.push(None);
            vectors.push([f.clone() * f / c.clone(), T::zero()]);
        } else {
            let fi = -(rod_constant(z, a, &slopes[i], i) + h.clone()) / c.clone();
            vectors.push([-(slopes[i].clone() * fi.clone()), slopes[i].clone()]);
            f_constants.push(Some(fi));
        }
    }
    let lattice = if n >= 1 {
        vectors
            .iter()
            .map(|v| lattice_coords(&vectors[1], &vectors[0], v))
            .collect::<Option<Vec<_>>>()
    } else {
        None
    };
    RodAlgebra {
        slopes,
        f_constants,
        vectors,
        lattice,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RodStructure {
    pub turning_points: Vec<f64>,
    pub slopes: Vec<f64>,
    /// `(∂_τ, ∂_y)` components of the 2π-normalised rod vectors, rods `0..=n`.
    pub rod_vectors: Vec<[f64; 2]>,
    /// `F_i` on rods with nonzero slope.
    pub f_constants: Vec<Option<f64>>,
    /// Coordinates in the basis `(v_1, v_0)`.
    pub lattice_coords: Option<Vec<[f64; 2]>>,
    /// Present when every lattice coordinate is an integer.
    pub lattice_vectors: Option<Vec<[i64; 2]>>,
    pub exact: bool,
    #[serde(skip)]
    exact_lattice: Option<Vec<[BigRational; 2]>>,
}

fn integer_lattice<T: Scalar>(l: &[[T; 2]]) -> Option<Vec<[i64; 2]>> {
    l.iter()
        .map(|v| Some([v[0].as_integer()?, v[1].as_integer()?]))
        .collect()
}

fn approx_pairs<T: Scalar>(v: &[[T; 2]]) -> Vec<[f64; 2]> {
    v.iter().map(|p| [p[0].approx(), p[1].approx()]).collect()
}

pub fn rod_vectors(rods: &RodData) -> RodStructure {
    let turning_points: Vec<f64> = rods.nuts().iter().map(|n| n.z).collect();
    if let Some(ex) = rods.exact() {
        let gauge = match rods.gauge() {
            HGauge::Symmetric => None,
            HGauge::Constant(k) => Some(BigRational::from_f64_exact(k)),
        };
        let alg = rod_algebra(&ex.c, &ex.z, &ex.a, gauge.as_ref());
        return RodStructure {
            turning_points,
            slopes: alg.slopes.iter().map(Scalar::approx).collect(),
            rod_vectors: approx_pairs(&alg.vectors),
            f_constants: alg.f_constants.iter().map(|f| f.as_ref().map(Scalar::approx)).collect(),
            lattice_coords: alg.lattice.as_deref().map(approx_pairs),
            lattice_vectors: alg.lattice.as_deref().and_then(integer_lattice),
            exact: true,
            exact_lattice: alg.lattice,
        };
    }
    let z = turning_points.clone();
    let a: Vec<f64> = rods.nuts().iter().map(|n| n.a).collect();
    let gauge = match rods.gauge() {
        HGauge::Symmetric => None,
        HGauge::Constant(k) => Some(k),
    };
    let alg = rod_algebra(&rods.c(), &z, &a, gauge.as_ref());
    RodStructure {
        turning_points,
        slopes: alg.slopes,
        rod_vectors: alg.vectors,
        f_constants: alg.f_constants,
        lattice_vectors: alg.lattice.as_deref().and_then(integer_lattice),
        lattice_coords: alg.lattice,
        exact: false,
        exact_lattice: None,
    }
}

impl RodStructure {
    /// Structure given directly by integer lattice vectors `v_0..v_n`.
    pub fn from_lattice(vectors: Vec<[i64; 2]>) -> Self {
        let rv: Vec<[f64; 2]> = vectors.iter().map(|v| [v[0] as f64, v[1] as f64]).collect();
        let ex: Vec<[BigRational; 2]> = vectors
            .iter()
            .map(|v| [BigRational::from_integer(v[0].into()), BigRational::from_integer(v[1].into())])
            .collect();
        RodStructure {
            turning_points: Vec::new(),
            slopes: Vec::new(),
            rod_vectors: rv.clone(),
            f_constants: vec![None; vectors.len()],
            lattice_coords: Some(rv),
            lattice_vectors: Some(vectors),
            exact: true,
            exact_lattice: Some(ex),
        }
    }

    pub fn n(&self) -> usize {
        self.rod_vectors.len() - 1
    }

    /// The same structure expressed in another lattice basis, `v ↦ M v`.
    pub fn transform(&self, m: [[i64; 2]; 2]) -> Result<Self> {
        let lv = self
            .lattice_vectors
            .as_ref()
            .ok_or_else(|| Error::Precondition("lattice vectors are not integral".into()))?;
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() != 1 {
            return Err(Error::Precondition("basis change must be unimodular".into()));
        }
        Ok(Self::from_lattice(
            lv.iter()
                .map(|v| [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]])
                .collect(),
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gl2zRelation {
    /// Index of the middle rod.
    pub j: usize,
    pub l_value: f64,
    pub epsilon_value: f64,
    pub l: Option<i64>,
    pub epsilon: Option<i8>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gl2zReport {
    pub relations: Vec<Gl2zRelation>,
    pub compatible: bool,
    pub violations: Vec<String>,
}

/// Solves `v_{j−1} + ε v_{j+1} = l v_j`.
pub(crate) fn solve_relation<T: Scalar>(prev: &[T; 2], mid: &[T; 2], next: &[T; 2]) -> Option<(T, T)> {
    // columns (next, −mid), unknowns (ε, l), right side −prev
    let m = [-mid[0].clone(), -mid[1].clone()];
    let d = det2(next, &m);
    if d.is_zero() {
        return None;
    }
    let rhs = [-prev[0].clone(), -prev[1].clone()];
    Some((det2(&rhs, &m) / d.clone(), det2(next, &rhs) / d))
}

fn relations<T: Scalar>(v: &[[T; 2]]) -> Gl2zReport {
    let mut out = Vec::new();
    let mut violations = Vec::new();
    for j in 1..v.len().saturating_sub(1) {
        match solve_relation(&v[j - 1], &v[j], &v[j + 1]) {
            None => {
                violations.push(format!("rods {j} and {} are parallel", j + 1));
                out.push(Gl2zRelation {
                    j,
                    l_value: f64::NAN,
                    epsilon_value: f64::NAN,
                    l: None,
                    epsilon: None,
                    ok: false,
                });
            }
            Some((eps, l)) => {
                let li = l.as_integer();
                let ei = eps.as_integer().filter(|e| e.abs() == 1).map(|e| e as i8);
                let ok = li.is_some() && ei.is_some();
                if !ok {
                    violations.push(format!(
                        "relation at rod {j}: l = {:.12}, epsilon = {:.12} is not a GL(2,Z) relation",
                        l.approx(),
                        eps.approx()
                    ));
                }
                out.push(Gl2zRelation {
                    j,
                    l_value: l.approx(),
                    epsilon_value: eps.approx(),
                    l: li,
                    epsilon: ei,
                    ok,
                });
            }
        }
    }
    Gl2zReport {
        compatible: violations.is_empty(),
        relations: out,
        violations,
    }
}

pub fn gl2z_compatibility(structure: &RodStructure) -> Result<Gl2zReport> {
    if structure.n() < 2 {
        return Err(Error::Precondition("GL(2,Z) relations need n >= 2".into()));
    }
    Ok(match &structure.exact_lattice {
        Some(ex) => relations(ex),
        None => relations(&structure.rod_vectors),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AsymptoticClass {
    Lens { p: i64, q: i64 },
    /// `p = 0`: the semi-infinite rods are parallel, which is incompatible with ALE asymptotics.
    ParallelEnds,
    NonIntegral { det: f64 },
}

/// `p = |det(v_0, v_n)|`; with `v_0 = (0,1)` and `v_n = (α, β)`, `q = −β sign(α) mod p`.
pub fn asymptotic_class(structure: &RodStructure) -> AsymptoticClass {
    let Some(lv) = &structure.lattice_vectors else {
        let det = structure
            .lattice_coords
            .as_ref()
            .map(|l| det2(&l[0], &l[l.len() - 1]))
            .unwrap_or(f64::NAN);
        return AsymptoticClass::NonIntegral { det };
    };
    let (v0, vn) = (lv[0], lv[lv.len() - 1]);
    let det = v0[0] * vn[1] - v0[1] * vn[0];
    let p = det.abs();
    if p == 0 {
        return AsymptoticClass::ParallelEnds;
    }
    // normalise to v_0 = (0, 1) when the structure came in another basis
    let q = if v0 == [0, 1] {
        (-vn[1] * vn[0].signum()).rem_euclid(p)
    } else {
        let v1 = lv[1];
        let d = v1[0] * v0[1] - v1[1] * v0[0];
        let beta = (v1[0] * vn[1] - v1[1] * vn[0]) * d;
        let alpha = (vn[0] * v0[1] - vn[1] * v0[0]) * d;
        (-beta * alpha.signum()).rem_euclid(p)
    };
    AsymptoticClass::Lens { p, q }
}

/// `F_i − F_{i−1}` for consecutive rods with nonzero slope; across a bolt
/// (rod `i − 1` of zero slope) it returns `F_i − F_{i−2}`.
pub fn f_jump(rods: &RodData, i: usize) -> Result<f64> {
    let p = axis_profile(rods);
    let n = rods.n();
    if i == 0 || i > n {
        return Err(Error::Precondition(format!("rod index {i} has no predecessor")));
    }
    let c = rods.c();
    let s = &p.f_slopes;
    if s[i] == 0.0 {
        return Err(Error::Precondition(format!("rod {i} has zero slope")));
    }
    let fi = p.f_values[i - 1];
    if s[i - 1] != 0.0 {
        return Ok(fi * fi * (1.0 / s[i] - 1.0 / s[i - 1]) / c);
    }
    if i < 2 {
        return Err(Error::Precondition("bolt without a predecessor".into()));
    }
    let fb = p.f_values[i - 2];
    let len = rods.nuts()[i - 1].z - rods.nuts()[i - 2].z;
    Ok(-(2.0 * fb * len - fb * fb * (1.0 / s[i] - 1.0 / s[i - 2])) / c)
}

/// `F` evaluated at interior distance `rho` from the middle of rod `i`.
pub fn f_near_axis(rods: &RodData, i: usize, rho: f64) -> Result<f64> {
    let zeta = axis_profile(rods).rod_point(i);
    Ok(tod_fields(rods, rho, zeta, 0)?.f.value())
}

/// Axis value `W(0,ζ) = c^{-1}(f + f² V_ζζ / 2f'²)` on a rod with nonzero slope.
pub fn axis_w(rods: &RodData, zeta: f64) -> Result<f64> {
    let p = axis_profile(rods);
    let s = p.slope_at(zeta);
    if s == 0.0 {
        return Err(Error::Precondition("axis expansion of W needs a nonzero slope".into()));
    }
    let f = p.f(zeta);
    Ok((f + f * f * p.g2(zeta) / (2.0 * s * s)) / rods.c())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConicalResult {
    pub limit: f64,
    pub rho_samples: Vec<f64>,
    pub raw: Vec<f64>,
    pub converged: bool,
}

pub fn default_rho_samples(rods: &RodData) -> Vec<f64> {
    let s = rods.scale();
    (0..5).map(|k| 1e-2 * s / 2f64.powi(k)).collect()
}

/// `|d|v|²|² / (4|v|²)` at an interior point for a Killing combination `v`.
pub fn conical_quotient(rods: &RodData, v: [f64; 2], rho: f64, zeta: f64) -> Result<f64> {
    let t = tod_fields(rods, rho, zeta, 1)?;
    let rj = Jet2::seed(Var::First, rho, 1);
    let a = t.f.mul_s(v[1]).add_s(v[0]);
    let n = &(&a * &a) / &t.w + &(&(&t.w * &(&rj * &rj)) * &Jet2::constant(v[1] * v[1], 1));
    let grad2 = (n.get(1, 0).powi(2) + n.get(0, 1).powi(2)) / t.e2nu.value();
    Ok(grad2 / (4.0 * n.value()))
}

/// Neville extrapolation of `(x_k, y_k)` to `x = 0`.
fn extrapolate(x: &[f64], y: &[f64]) -> (f64, f64) {
    let m = x.len();
    let mut p = y.to_vec();
    let mut prev = p[m - 1];
    for k in 1..m {
        prev = p[m - 1];
        for i in (k..m).rev() {
            p[i] = (x[i - k] * p[i] - x[i] * p[i - 1]) / (x[i - k] - x[i]);
        }
    }
    (p[m - 1], (p[m - 1] - prev).abs())
}

pub fn conical_check_vector(rods: &RodData, v: [f64; 2], zeta: f64, rho_samples: &[f64]) -> Result<ConicalResult> {
    if rho_samples.len() < 2 || rho_samples.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Precondition("rho samples must decrease and number at least two".into()));
    }
    let raw = rho_samples
        .iter()
        .map(|&r| conical_quotient(rods, v, r, zeta))
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = rho_samples.iter().map(|r| r * r).collect();
    let (limit, change) = extrapolate(&x, &raw);
    let converged = limit.is_finite() && change < 1e-3 * limit.abs().max(1.0);
    Ok(ConicalResult {
        limit: if converged { limit } else { f64::NAN },
        rho_samples: rho_samples.to_vec(),
        raw,
        converged,
    })
}

pub fn conical_check(rods: &RodData, rod_index: usize, rho_samples: &[f64]) -> Result<ConicalResult> {
    if rod_index > rods.n() {
        return Err(Error::Precondition(format!("rod index {rod_index} out of range")));
    }
    let s = rod_vectors(rods);
    let zeta = axis_profile(rods).rod_point(rod_index);
    conical_check_vector(rods, s.rod_vectors[rod_index], zeta, rho_samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::{Mode, Nut};

    fn eh() -> RodData {
        RodData::eguchi_hanson(1.0)
    }

    #[test]
    fn eguchi_hanson_rod_vectors() {
        let s = rod_vectors(&eh());
        let want = [[-1.0, -1.0], [-1.0, 0.0], [-1.0, 1.0]];
        for (v, w) in s.rod_vectors.iter().zip(&want) {
            assert!((v[0] - w[0]).abs() < 1e-12 && (v[1] - w[1]).abs() < 1e-12, "{v:?}");
        }
        assert!((s.f_constants[0].unwrap() + 1.0).abs() < 1e-12);
        assert!(s.f_constants[1].is_none());
        assert!((s.f_constants[2].unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(s.lattice_vectors, Some(vec![[0, 1], [1, 0], [2, -1]]));
    }

    #[test]
    fn eguchi_hanson_relation_and_lens() {
        let s = rod_vectors(&eh());
        let r = gl2z_compatibility(&s).unwrap();
        assert!(r.compatible);
        assert_eq!((r.relations[0].l, r.relations[0].epsilon), (Some(2), Some(1)));
        let v = &s.rod_vectors;
        for k in 0..2 {
            assert!((v[0][k] + v[2][k] - 2.0 * v[1][k]).abs() < 1e-12);
        }
        assert_eq!(asymptotic_class(&s), AsymptoticClass::Lens { p: 2, q: 1 });
    }

    #[test]
    fn chen_teo_type_relations() {
        let s = RodStructure::from_lattice(vec![[0, 1], [1, 0], [1, -1], [0, -1]]);
        let r = gl2z_compatibility(&s).unwrap();
        let got: Vec<_> = r.relations.iter().map(|x| (x.l, x.epsilon)).collect();
        assert_eq!(got, vec![(Some(1), Some(1)), (Some(1), Some(1))]);
        assert_eq!(asymptotic_class(&s), AsymptoticClass::ParallelEnds);
    }

    #[test]
    fn perturbed_weights_break_integrality() {
        let rods = RodData::new(
            -1.0 / 16.0,
            vec![Nut { z: -0.25, a: 0.4 }, Nut { z: 0.25, a: 0.6 }],
            Mode::Ale,
        )
        .unwrap();
        let r = gl2z_compatibility(&rod_vectors(&rods)).unwrap();
        assert!(!r.compatible);
        assert!(r.relations[0].l.is_none());
    }

    #[test]
    fn f_jump_across_bolt() {
        let j = f_jump(&eh(), 2).unwrap();
        assert!((j - 2.0).abs() < 1e-12);
        let g = eh().with_gauge(HGauge::Constant(0.37));
        assert!((f_jump(&g, 2).unwrap() - 2.0).abs() < 1e-12);
        let s = rod_vectors(&g);
        assert!((s.f_constants[2].unwrap() - s.f_constants[0].unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn f_constants_match_interior_values() {
        let rods = eh();
        let s = rod_vectors(&rods);
        for i in [0, 2] {
            let near = f_near_axis(&rods, i, 1e-4).unwrap();
            assert!((near - s.f_constants[i].unwrap()).abs() < 1e-6, "{near}");
        }
    }

    #[test]
    fn conical_limits_on_eguchi_hanson() {
        let rods = eh();
        let samples = default_rho_samples(&rods);
        for i in 0..=2 {
            let r = conical_check(&rods, i, &samples).unwrap();
            assert!((r.limit - 1.0).abs() < 1e-6, "rod {i}: {r:?}");
        }
        let zeta = axis_profile(&rods).rod_point(1);
        let r = conical_check_vector(&rods, [-2.0, 0.0], zeta, &samples).unwrap();
        assert!((r.limit - 4.0).abs() < 1e-5);
    }

    #[test]
    fn axis_w_positive_on_semi_infinite_rods() {
        let rods = eh();
        for z in [-3.0, -0.5, 0.5, 4.0] {
            let w = axis_w(&rods, z).unwrap();
            let interior = tod_fields(&rods, 1e-5, z, 0).unwrap().w.value();
            assert!(w > 0.0);
            assert!((w - interior).abs() < 1e-6 * w.max(1.0), "{w} {interior}");
        }
    }
}
