//! Conformal Killing-Yano 2-forms: the torus-invariant flat family in the Hopf
//! coframe, the Tod candidate `z ω`, and its approach to the flat family.

use serde::Serialize;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::harmonic::RodData;
use crate::jets::{Jet2, Var};
use crate::tod::{form_with_order, tod_fields, MetricJet, TwoFormJet};

/// Chart `(ψ, φ, r, θ)` of `dr² + (r²/4)((dψ + cos θ dφ)² + dθ² + sin²θ dφ²)`.
pub const HOPF_CHART: [&str; 4] = ["psi", "phi", "r", "theta"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlatCkyParams {
    pub k1: f64,
    pub k2: f64,
}

impl FlatCkyParams {
    pub fn new(k1: f64, k2: f64) -> Result<Self> {
        if k1 == 0.0 && k2 == 0.0 || !k1.is_finite() || !k2.is_finite() {
            return Err(Error::Precondition("flat CKY constants must be finite and not both zero".into()));
        }
        Ok(FlatCkyParams { k1, k2 })
    }
}

/// `e[a][μ]`: coframe `e⁰ = (r/2)(dψ + cos θ dφ)`, `e¹ = dr`, `e² = (r/2)dθ`,
/// `e³ = (r sin θ/2)dφ` as 2-jets in `(r, θ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coframe {
    pub e: [[Jet2<f64>; 4]; 4],
    pub base: (f64, f64),
}

impl Coframe {
    pub fn values(&self) -> [[f64; 4]; 4] {
        std::array::from_fn(|a| std::array::from_fn(|m| self.e[a][m].value()))
    }

    /// `Σ_a e^a ⊗ e^a`.
    pub fn metric(&self) -> MetricJet {
        let order = self.e[0][0].order();
        let g: [[Jet2<f64>; 4]; 4] = std::array::from_fn(|m| {
            std::array::from_fn(|n| {
                (0..4).fold(Jet2::constant(0.0, order), |acc, a| acc + &self.e[a][m] * &self.e[a][n])
            })
        });
        MetricJet::from_upper(HOPF_CHART, self.base, g)
    }

    /// `e^a ∧ e^b` in chart components.
    pub fn wedge(&self, a: usize, b: usize) -> TwoFormJet {
        let order = self.e[0][0].order();
        let mut out = TwoFormJet::zero(order);
        for m in 0..4 {
            for n in (m + 1)..4 {
                out.set(m, n, &(&self.e[a][m] * &self.e[b][n]) - &(&self.e[a][n] * &self.e[b][m]));
            }
        }
        out
    }
}

pub fn flat_coframe(r: f64, theta: f64) -> Result<Coframe> {
    if !(r > 0.0) {
        return Err(Error::OutOfDomain(format!("r = {r} must be positive")));
    }
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::OutOfDomain(format!("theta = {theta} is on the axis")));
    }
    let order = 2;
    let rj = Jet2::seed(Var::First, r, order);
    let th = Jet2::seed(Var::Second, theta, order);
    let half = rj.mul_s(0.5);
    let z = Jet2::constant(0.0, order);
    let one = Jet2::constant(1.0, order);
    let e = [
        [half.clone(), &half * &th.cos(), z.clone(), z.clone()],
        [z.clone(), z.clone(), one, z.clone()],
        [z.clone(), z.clone(), z.clone(), half.clone()],
        [z.clone(), &half * &th.sin(), z.clone(), z],
    ];
    Ok(Coframe { e, base: (r, theta) })
}

/// `ω¹ = e⁰∧e¹ + e²∧e³`, `ω² = e¹∧e² + e⁰∧e³`, `ω³ = e¹∧e³ − e⁰∧e²`.
pub fn selfdual_basis(frame: &Coframe) -> [TwoFormJet; 3] {
    let w = |a, b| frame.wedge(a, b);
    let neg = |f: TwoFormJet| f.scale_by(&Jet2::constant(-1.0, f.order()));
    [
        w(0, 1).add(&w(2, 3)),
        w(1, 2).add(&w(0, 3)),
        w(1, 3).add(&neg(w(0, 2))),
    ]
}

/// `Z = k₁ r²(−cos θ ω¹ + sin θ ω³) + k₂ ω¹`; a CKY tensor of the flat metric.
pub fn flat_cky(params: FlatCkyParams, r: f64, theta: f64) -> Result<TwoFormJet> {
    let frame = flat_coframe(r, theta)?;
    let [w1, _, w3] = selfdual_basis(&frame);
    let order = w1.order();
    let rj = Jet2::seed(Var::First, r, order);
    let th = Jet2::seed(Var::Second, theta, order);
    let r2k = (&rj * &rj).mul_s(params.k1);
    let grow = w1.scale_by(&(-&(&r2k * &th.cos()))).add(&w3.scale_by(&(&r2k * &th.sin())));
    Ok(grow.add(&w1.scale_by(&Jet2::constant(params.k2, order))))
}

/// `(α∧β)_{0123}`.
pub fn wedge_top(a: &TwoFormJet, b: &TwoFormJet) -> f64 {
    let (x, y) = (a.values(), b.values());
    x[0][1] * y[2][3] - x[0][2] * y[1][3] + x[0][3] * y[1][2] + x[2][3] * y[0][1] - x[1][3] * y[0][2]
        + x[1][2] * y[0][3]
}

/// Largest component of `dα`; only `r` and `θ` derivatives are nonzero.
pub fn exterior_derivative_max(form: &TwoFormJet) -> f64 {
    let d = |j: &Jet2<f64>, k: usize| match k {
        2 => j.partial(Var::First).value(),
        3 => j.partial(Var::Second).value(),
        _ => 0.0,
    };
    let mut m: f64 = 0.0;
    for a in 0..4 {
        for b in (a + 1)..4 {
            for c in (b + 1)..4 {
                let v = d(form.get(b, c), a) + d(form.get(c, a), b) + d(form.get(a, b), c);
                m = m.max(v.abs());
            }
        }
    }
    m
}

/// `Z = z ω` on the Tod chart with 2-jets.
pub fn tod_cky_candidate(rods: &RodData, rho: f64, zeta: f64) -> Result<TwoFormJet> {
    let fields = tod_fields(rods, rho, zeta, 3)?;
    let omega = form_with_order(rods, rho, zeta, 2)?;
    Ok(omega.scale_by(&fields.z.truncate(2)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayReport {
    pub theta: f64,
    pub radii: Vec<f64>,
    /// `|Z − Z⁰|` in the flat metric at each radius.
    pub deviation: Vec<f64>,
    /// `|Z|` at each radius.
    pub norm: Vec<f64>,
    pub k1: f64,
    pub k2: f64,
    /// `+1` when `Z⁰` is the family in the coframe orientation of `(ψ, φ, r, θ)`,
    /// `−1` for its mirror under `ψ ↔ φ`.
    pub chirality: i8,
    /// Log-log slope over all radii but the matching one.
    pub exponent: Option<f64>,
    /// Set when `|Z − Z⁰| / |Z|` stays below `DEGENERATE_TOL`, so there is nothing to fit.
    pub degenerate: bool,
    /// Single-nut data has `W ≡ 0`; only `|Z| = 2z` against `2|k₁| r²` is compared.
    pub norm_only: bool,
}

pub const DEGENERATE_TOL: f64 = 1e-25;
pub const DEFAULT_DECAY_THETA: f64 = 1.0;

type DD = TwoFloat;
/// 2-form components on `(τ, y, r, θ)` in double-double.
type Comp = [[DD; 4]; 4];

fn dd(x: f64) -> DD {
    TwoFloat::from(x)
}

/// `a / b` with one Newton correction; plain `TwoFloat` division is only
/// accurate to double precision.
fn ddiv(a: DD, b: DD) -> DD {
    let q = a / b;
    q + (a - q * b) / b
}

/// Point values needed for `z ω`, in double-double.
struct DdFields {
    z: DD,
    z_rho: DD,
    z_zeta: DD,
    x_rho: DD,
    x_zeta: DD,
    w: DD,
    f: DD,
}

/// The pair-sum closed forms with `z_ρ = ρB`, `z_ζ = C`, `x_ρ = −C/ρ`, `x_ζ = B`.
fn dd_fields(rods: &RodData, rho: DD, zeta: DD) -> Result<DdFields> {
    rods.check_interior(to64(rho), to64(zeta))?;
    let zero = dd(0.0);
    let nuts = rods.nuts();
    let s: Vec<DD> = nuts.iter().map(|n| zeta - dd(n.z)).collect();
    let r: Vec<DD> = s.iter().map(|si| (rho * rho + *si * *si).sqrt()).collect();
    let inv: Vec<DD> = r.iter().map(|ri| ddiv(dd(1.0), *ri)).collect();
    let (mut a, mut b, mut c, mut d) = (zero, zero, zero, zero);
    for (i, n) in nuts.iter().enumerate() {
        let w = dd(n.a);
        a += w * r[i];
        b += w * inv[i];
        c += w * s[i] * inv[i];
        d += w * s[i] * r[i];
    }
    let (mut k, mut p) = (zero, zero);
    for i in 0..nuts.len() {
        for j in (i + 1)..nuts.len() {
            let dz = dd(nuts[i].z) - dd(nuts[j].z);
            let q = dd(nuts[i].a) * dd(nuts[j].a) * dz * dz * inv[i] * inv[j];
            p -= q * (s[i] + s[j]);
            k -= q;
        }
    }
    let cc = dd(rods.c());
    let w = ddiv(a * k, cc * (b * b * rho * rho + c * c));
    let f = ddiv(a * p - d * k, cc * (a * b + k)) - ddiv(dd(rods.h_constant()), cc);
    Ok(DdFields {
        z: a,
        z_rho: rho * b,
        z_zeta: c,
        x_rho: -ddiv(c, rho),
        x_zeta: b,
        w,
        f,
    })
}

fn ray_point(rods: &RodData, r: DD, theta: f64) -> (DD, DD, DD) {
    let big_r = r * r / dd(4.0);
    (big_r, big_r * dd(theta.sin()), dd(rods.centre()) + big_r * dd(theta.cos()))
}

/// `Z = z ω` pulled back to `(τ, y, r, θ)` along `ρ = (r²/4) sin θ`, `ζ = ζ_c + (r²/4) cos θ`.
fn tod_z_hopf(rods: &RodData, r: DD, theta: f64) -> Result<Comp> {
    let (s, c) = (dd(theta.sin()), dd(theta.cos()));
    let (big_r, rho, zeta) = ray_point(rods, r, theta);
    let f = dd_fields(rods, rho, zeta)?;
    let wr2 = f.w * rho * rho;
    // ω on (τ, y, ρ, ζ); ω_{ρζ} = ω_{τy} = 0
    let om = [
        [f.z_rho, f.z_zeta],
        [f.f * f.z_rho - wr2 * f.x_rho, f.f * f.z_zeta - wr2 * f.x_zeta],
    ];
    // ∂(ρ, ζ)/∂(r, θ)
    let jac = [[r / dd(2.0) * s, big_r * c], [r / dd(2.0) * c, -(big_r * s)]];
    let mut out = [[dd(0.0); 4]; 4];
    for k in 0..2 {
        for m in 0..2 {
            let v = f.z * (om[k][0] * jac[0][m] + om[k][1] * jac[1][m]);
            out[k][2 + m] = v;
            out[2 + m][k] = -v;
        }
    }
    Ok(out)
}

/// The `k₁` and `k₂` generators of the flat family, optionally mirrored by `ψ ↔ φ`.
fn flat_generators(r: DD, theta: f64, mirror: bool) -> [Comp; 2] {
    let (s, c) = (dd(theta.sin()), dd(theta.cos()));
    let r2 = r * r;
    let mut a = [[dd(0.0); 4]; 4];
    let mut b = [[dd(0.0); 4]; 4];
    let h = dd(0.5);
    let q = dd(0.25);
    a[0][2] = -(c * r2 * r * h);
    a[1][2] = -(r2 * r * h);
    a[0][3] = -(s * r2 * r2 * q);
    b[0][2] = r * h;
    b[1][2] = r * c * h;
    b[1][3] = -(r2 * s * q);
    let finish = |mut m: Comp| {
        if mirror {
            m.swap(0, 1);
        }
        for i in 0..4 {
            for j in (i + 1)..4 {
                m[j][i] = -m[i][j];
            }
        }
        m
    };
    [finish(a), finish(b)]
}

/// `X_{ab} Y^{ab}` in the flat Hopf metric.
fn flat_inner(x: &Comp, y: &Comp, r: DD, theta: f64) -> DD {
    let (s, c) = (dd(theta.sin()), dd(theta.cos()));
    let k = ddiv(dd(4.0), r * r * s * s);
    let mut gi = [[dd(0.0); 4]; 4];
    gi[0][0] = k;
    gi[1][1] = k;
    gi[0][1] = -(k * c);
    gi[1][0] = -(k * c);
    gi[2][2] = dd(1.0);
    gi[3][3] = ddiv(dd(4.0), r * r);
    let mut acc = dd(0.0);
    for a in 0..4 {
        for b in 0..4 {
            for cc in 0..4 {
                for d in 0..4 {
                    if gi[a][cc] != dd(0.0) && gi[b][d] != dd(0.0) {
                        acc += x[a][b] * gi[a][cc] * gi[b][d] * y[cc][d];
                    }
                }
            }
        }
    }
    acc
}

fn sub(x: &Comp, y: &Comp, ka: DD, kb: DD, z: &Comp) -> Comp {
    std::array::from_fn(|i| std::array::from_fn(|j| x[i][j] - ka * y[i][j] - kb * z[i][j]))
}

fn fit(z: &Comp, gens: &[Comp; 2], r: DD, theta: f64) -> (DD, DD, DD) {
    let ip = |x: &Comp, y: &Comp| flat_inner(x, y, r, theta);
    let (aa, ab, bb) = (ip(&gens[0], &gens[0]), ip(&gens[0], &gens[1]), ip(&gens[1], &gens[1]));
    let (za, zb) = (ip(z, &gens[0]), ip(z, &gens[1]));
    let det = aa * bb - ab * ab;
    let k1 = ddiv(za * bb - zb * ab, det);
    let k2 = ddiv(aa * zb - ab * za, det);
    let res = sub(z, &gens[0], k1, k2, &gens[1]);
    (k1, k2, ip(&res, &res))
}

fn to64(x: DD) -> f64 {
    f64::from(x)
}

/// Matches the flat family to `Z = z ω` at the largest radius along the ray at
/// `theta` and measures `|Z − Z⁰|` at the others.
pub fn cky_decay_check(rods: &RodData, radii: &[f64], theta: f64) -> Result<DecayReport> {
    if radii.len() < 2 || radii.windows(2).any(|w| !(w[0] < w[1])) || !(radii[0] > 0.0) {
        return Err(Error::Precondition("radii must be positive and strictly increasing, at least two".into()));
    }
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::OutOfDomain(format!("theta = {theta} is on the axis")));
    }
    let r_max = dd(*radii.last().unwrap());
    if rods.n() == 1 {
        return norm_only_check(rods, radii, theta);
    }
    let z_max = tod_z_hopf(rods, r_max, theta)?;
    let (mut best, mut chirality) = (None, 1i8);
    for (mirror, chi) in [(false, 1i8), (true, -1i8)] {
        let gens = flat_generators(r_max, theta, mirror);
        let (k1, k2, res) = fit(&z_max, &gens, r_max, theta);
        if best.as_ref().is_none_or(|(_, _, b, _)| res < *b) {
            best = Some((k1, k2, res, mirror));
            chirality = chi;
        }
    }
    let (k1, k2, _, mirror) = best.unwrap();
    let mut deviation = Vec::with_capacity(radii.len());
    let mut norm = Vec::with_capacity(radii.len());
    for &r in radii {
        let rd = dd(r);
        let z = tod_z_hopf(rods, rd, theta)?;
        let gens = flat_generators(rd, theta, mirror);
        let d = sub(&z, &gens[0], k1, k2, &gens[1]);
        deviation.push(to64(flat_inner(&d, &d, rd, theta)).max(0.0).sqrt());
        norm.push(to64(flat_inner(&z, &z, rd, theta)).sqrt());
    }
    let degenerate = deviation.iter().zip(&norm).all(|(d, n)| *d <= DEGENERATE_TOL * n);
    let fit_pts: Vec<(f64, f64)> = radii[..radii.len() - 1]
        .iter()
        .zip(&deviation)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, d)| (r.ln(), d.ln()))
        .collect();
    let exponent = if degenerate || fit_pts.len() < 2 {
        None
    } else {
        Some(slope(&fit_pts))
    };
    Ok(DecayReport {
        theta,
        radii: radii.to_vec(),
        deviation,
        norm,
        k1: to64(k1),
        k2: to64(k2),
        chirality,
        exponent,
        degenerate,
        norm_only: false,
    })
}

fn ray_z(rods: &RodData, r: f64, theta: f64) -> Result<DD> {
    let (_, rho, zeta) = ray_point(rods, dd(r), theta);
    Ok(dd_fields(rods, rho, zeta)?.z)
}

fn norm_only_check(rods: &RodData, radii: &[f64], theta: f64) -> Result<DecayReport> {
    let r_max = *radii.last().unwrap();
    let k1 = ddiv(ray_z(rods, r_max, theta)?, dd(r_max) * dd(r_max));
    let mut deviation = Vec::with_capacity(radii.len());
    let mut norm = Vec::with_capacity(radii.len());
    for &r in radii {
        let z = ray_z(rods, r, theta)?;
        norm.push(to64(dd(2.0) * z));
        deviation.push(to64(dd(2.0) * (z - k1 * dd(r) * dd(r))).abs());
    }
    let degenerate = deviation.iter().zip(&norm).all(|(d, n)| *d <= DEGENERATE_TOL * n.abs());
    let pts: Vec<(f64, f64)> = radii[..radii.len() - 1]
        .iter()
        .zip(&deviation)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, d)| (r.ln(), d.ln()))
        .collect();
    Ok(DecayReport {
        theta,
        radii: radii.to_vec(),
        deviation,
        norm,
        k1: to64(k1),
        k2: 0.0,
        chirality: 1,
        exponent: if degenerate || pts.len() < 2 { None } else { Some(slope(&pts)) },
        degenerate,
        norm_only: true,
    })
}

/// Least-squares slope.
pub(crate) fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{cky_residual, curvature_pack, form_norm2, hodge_star, killing_defect};
    use crate::tod::tod_metric;

    fn flat_metric(r: f64, th: f64) -> MetricJet {
        flat_coframe(r, th).unwrap().metric()
    }

    #[test]
    fn coframe_rebuilds_the_flat_metric() {
        let (r, th) = (1.7, 0.8);
        let g = flat_metric(r, th).values();
        let q = r * r / 4.0;
        assert!((g[0][0] - q).abs() < 1e-15 && (g[0][1] - q * th.cos()).abs() < 1e-15);
        assert!((g[1][1] - q).abs() < 1e-15 && (g[2][2] - 1.0).abs() < 1e-15 && (g[3][3] - q).abs() < 1e-15);
        let pack = curvature_pack(&flat_metric(r, th)).unwrap();
        assert!(pack.riemann_norm() < 1e-12);
        let e = flat_coframe(r, th).unwrap();
        let vol = e.wedge(0, 1);
        let top = wedge_top(&vol, &e.wedge(2, 3));
        // e⁰∧e¹∧e²∧e³ = (r³ sin θ/8) dψ∧dr∧dθ∧dφ, and dψ∧dr∧dθ∧dφ = dψ∧dφ∧dr∧dθ
        assert!((top - r.powi(3) * th.sin() / 8.0).abs() < 1e-14);
        assert!(flat_coframe(1.0, 0.0).is_err());
    }

    #[test]
    fn selfdual_basis_algebra() {
        let (r, th) = (2.3, 1.1);
        let e = flat_coframe(r, th).unwrap();
        let g = e.metric().values();
        let basis = selfdual_basis(&e);
        let vol = r.powi(3) * th.sin() / 8.0;
        for (i, wi) in basis.iter().enumerate() {
            let star = hodge_star(&g, 1.0, &wi.values());
            let v = wi.values();
            for a in 0..4 {
                for b in 0..4 {
                    assert!((star[a][b] - v[a][b]).abs() < 1e-12);
                }
            }
            for (j, wj) in basis.iter().enumerate() {
                let want = if i == j { 2.0 * vol } else { 0.0 };
                assert!((wedge_top(wi, wj) - want).abs() < 1e-12, "{i} {j}");
            }
        }
        assert!(exterior_derivative_max(&basis[0]) < 1e-14);
        assert!(exterior_derivative_max(&basis[2]) > 0.1);
    }

    #[test]
    fn flat_family_solves_the_cky_equation() {
        for k in 0..8 {
            let t = k as f64 * std::f64::consts::PI / 4.0;
            let p = FlatCkyParams::new(t.cos(), t.sin()).unwrap();
            for &(r, th) in &[(0.7, 0.4), (1.9, 1.6), (4.0, 2.9)] {
                let z = flat_cky(p, r, th).unwrap();
                let res = cky_residual(&flat_metric(r, th), &z).unwrap();
                assert!(res.norm < 1e-12, "{} at k={k}", res.norm);
            }
        }
        assert!(FlatCkyParams::new(0.0, 0.0).is_err());
    }

    #[test]
    fn parallel_member_and_norm() {
        let (r, th) = (1.3, 0.9);
        let z = flat_cky(FlatCkyParams::new(0.0, 2.0).unwrap(), r, th).unwrap();
        let res = cky_residual(&flat_metric(r, th), &z).unwrap();
        assert!(res.grad_norm < 1e-12);
        let g = flat_metric(1.0, th).values();
        let unit = flat_cky(FlatCkyParams::new(1.0, 0.0).unwrap(), 1.0, th).unwrap();
        assert!((form_norm2(&g, &unit.values()) - 4.0).abs() < 1e-12);
        let (k1, k2) = (0.6, -1.4);
        let g = flat_metric(r, th).values();
        let z = flat_cky(FlatCkyParams::new(k1, k2).unwrap(), r, th).unwrap();
        let want = 4.0 * (k1 * k1 * r.powi(4) + k2 * k2 - 2.0 * k1 * k2 * r * r * th.cos());
        assert!((form_norm2(&g, &z.values()) - want).abs() < 1e-12 * want);
    }

    #[test]
    fn tod_candidate_on_eguchi_hanson() {
        let rods = RodData::eguchi_hanson(1.0);
        let (rho, zeta) = (3f64.sqrt() / 4.0, 0.0);
        let z = tod_cky_candidate(&rods, rho, zeta).unwrap();
        let m = tod_metric(&rods, rho, zeta).unwrap();
        assert!((form_norm2(&m.values(), &z.values()) - 1.0).abs() < 1e-12);
        let res = cky_residual(&m, &z).unwrap();
        assert!(res.relative < 1e-8);
        assert!((res.xi[0] - 1.0).abs() < 1e-8 && res.xi[1..].iter().all(|x| x.abs() < 1e-8));
        assert!(killing_defect(&m, &z).unwrap() < 1e-8);
    }

    #[test]
    fn eguchi_hanson_approaches_the_flat_family() {
        let rods = RodData::eguchi_hanson(1.0);
        let radii = [1e2, 2e2, 5e2, 1e3, 2e3, 5e3, 1e4];
        let rep = cky_decay_check(&rods, &radii, DEFAULT_DECAY_THETA).unwrap();
        println!("{rep:?}");
        let e = rep.exponent.unwrap();
        assert!((e + 2.0).abs() < 0.1, "{e}");
        assert!(!rep.degenerate);
        // |Z⁰| = 2|k₁| r² with |Z| = 2z and z ≈ r²/4
        assert!((rep.k1.abs() - 0.25).abs() < 1e-6);
        let r = radii[0];
        assert!((rep.norm[0] / (0.5 * r * r) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn double_double_fields_match_jets() {
        let rods = RodData::eguchi_hanson(1.0);
        for &(rho, zeta) in &[(0.4, 0.1), (3.0, -2.0), (0.2, 0.6)] {
            let j = tod_fields(&rods, rho, zeta, 1).unwrap();
            let d = dd_fields(&rods, dd(rho), dd(zeta)).unwrap();
            let pairs = [
                (j.z.value(), d.z),
                (j.z.partial(Var::First).value(), d.z_rho),
                (j.z.partial(Var::Second).value(), d.z_zeta),
                (j.x.partial(Var::First).value(), d.x_rho),
                (j.x.partial(Var::Second).value(), d.x_zeta),
                (j.w.value(), d.w),
                (j.f.value(), d.f),
            ];
            for (k, (a, b)) in pairs.iter().enumerate() {
                assert!((a - to64(*b)).abs() < 1e-12 * a.abs().max(1.0), "{k}: {a} {b:?}");
            }
        }
        assert_eq!(to64(ddiv(dd(1.0), dd(3.0)) * dd(3.0) - dd(1.0)), 0.0);
    }

    #[test]
    fn single_nut_is_degenerate() {
        use crate::harmonic::{Mode, Nut};
        let rods = RodData::new(-1.0, vec![Nut { z: 0.0, a: 1.0 }], Mode::Ale).unwrap();
        let rep = cky_decay_check(&rods, &[1e2, 1e3, 1e4], 0.7).unwrap();
        println!("{rep:?}");
        assert!(rep.degenerate && rep.exponent.is_none());
        assert!(cky_decay_check(&rods, &[1e3, 1e2], 0.7).is_err());
    }
}
