//! The Plebański–Demiański family with quartic `F(x) = a_0 Π (x − p_i)`,
//! `p_1 p_2 p_3 p_4 = 1`, on the rectangle `p_2 < p < p_3`, `p_1 < q < p_2`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jets::{Jet2, Var};
use crate::tod::MetricJet;

pub const PD_CHART: [&str; 4] = ["tau", "phi", "p", "q"];
pub const PRODUCT_TOL: f64 = 1e-12;
/// Relative tolerance for root coincidences and `a_3 = a_1`.
pub const ROOT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PdParams {
    pub roots: [f64; 4],
    pub a0: f64,
    pub a3: f64,
    pub a2: f64,
    pub a1: f64,
}

pub fn pd_params_from_roots(roots: [f64; 4], a0: f64) -> Result<PdParams> {
    if !(a0 > 0.0) || roots.iter().any(|r| !r.is_finite()) {
        return Err(Error::InvalidRoots("a0 must be positive and roots finite".into()));
    }
    for w in roots.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::InvalidRoots(format!(
                "roots must be strictly increasing ({} then {}); repeated roots are new asymptotic ends",
                w[0], w[1]
            )));
        }
    }
    let prod: f64 = roots.iter().product();
    if (prod - 1.0).abs() > PRODUCT_TOL {
        return Err(Error::InvalidRoots(format!("product of roots is {prod}, not 1")));
    }
    let [p1, p2, p3, p4] = roots;
    let e1 = p1 + p2 + p3 + p4;
    let e2 = p1 * p2 + p1 * p3 + p1 * p4 + p2 * p3 + p2 * p4 + p3 * p4;
    let e3 = p1 * p2 * p3 + p1 * p2 * p4 + p1 * p3 * p4 + p2 * p3 * p4;
    let constant = a0 * prod;
    debug_assert!((constant - a0).abs() <= PRODUCT_TOL * a0);
    Ok(PdParams {
        roots,
        a0,
        a3: -a0 * e1,
        a2: a0 * e2,
        a1: -a0 * e3,
    })
}

impl PdParams {
    pub fn f(&self, x: f64) -> f64 {
        self.a0 * self.roots.iter().map(|r| x - r).product::<f64>()
    }

    /// `F'(p_k)` for a root, from the factored form.
    pub fn f_prime_at_root(&self, k: usize) -> f64 {
        let pk = self.roots[k];
        self.a0
            * self
                .roots
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != k)
                .map(|(_, r)| pk - r)
                .product::<f64>()
    }

    fn scale(&self) -> f64 {
        self.roots.iter().fold(1.0f64, |s, r| s.max(r.abs()))
    }

    pub fn is_self_dual(&self) -> bool {
        (self.a3 - self.a1).abs() <= ROOT_TOL * self.a0 * self.scale().powi(3)
    }

    pub fn is_flat(&self) -> bool {
        let t = ROOT_TOL * self.a0 * self.scale().powi(3);
        self.a3.abs() <= t && self.a1.abs() <= t
    }

    /// `1 − p²q² > 0` on the whole closed rectangle.
    pub fn rectangle_ok(&self) -> bool {
        let [p1, p2, p3, _] = self.roots;
        p2.abs().max(p3.abs()) * p1.abs().max(p2.abs()) < 1.0
    }

    fn in_rectangle(&self, p: f64, q: f64) -> bool {
        let [p1, p2, p3, _] = self.roots;
        p2 < p && p < p3 && p1 < q && q < p2
    }
}

fn poly_jet(params: &PdParams, x: &Jet2<f64>) -> Jet2<f64> {
    params
        .roots
        .iter()
        .fold(Jet2::constant(params.a0, x.order()), |acc, r| &acc * &x.add_s(-r))
}

/// Metric 2-jets in the chart `(τ, φ, p, q)`.
pub fn pd_metric(params: &PdParams, p: f64, q: f64) -> Result<MetricJet> {
    pd_metric_order(params, p, q, 2)
}

pub fn pd_metric_order(params: &PdParams, p: f64, q: f64, order: usize) -> Result<MetricJet> {
    if !params.in_rectangle(p, q) {
        return Err(Error::OutOfDomain(format!("(p, q) = ({p}, {q}) is outside the rectangle")));
    }
    if !(1.0 - p * p * q * q > 0.0) {
        return Err(Error::OutOfDomain(format!("1 - p^2 q^2 <= 0 at ({p}, {q})")));
    }
    let pj = Jet2::seed(Var::First, p, order);
    let qj = Jet2::seed(Var::Second, q, order);
    let pp = poly_jet(params, &pj);
    let qq = poly_jet(params, &qj);
    if !(pp.value() > 0.0) || !(qq.value() < 0.0) {
        return Err(Error::DegenerateMetric("signature requires P > 0 and Q < 0".into()));
    }
    let p2 = &pj * &pj;
    let q2 = &qj * &qj;
    let d = (&p2 * &q2).mul_s(-1.0).add_s(1.0);
    let diff = &pj - &qj;
    let pre = (&d * &(&diff * &diff)).recip();
    let tt = &(&(&pp * &(&q2 * &q2)) - &qq) * &pre;
    let ff = &(&pp - &(&qq * &(&p2 * &p2))) * &pre;
    let tf = &(&(&qq * &p2) - &(&pp * &q2)) * &pre;
    let dd = (&diff * &diff).recip();
    let gpp = &(&d / &pp) * &dd;
    let gqq = (&(&d / &qq) * &dd).mul_s(-1.0);
    let z = Jet2::constant(0.0, order);
    let g = [
        [tt, tf, z.clone(), z.clone()],
        [z.clone(), ff, z.clone(), z.clone()],
        [z.clone(), z.clone(), gpp, z.clone()],
        [z.clone(), z.clone(), z.clone(), gqq],
    ];
    Ok(MetricJet::from_upper(PD_CHART, (p, q), g))
}

/// `−PQ/(p − q)⁴`.
pub fn pd_gram_det(params: &PdParams, p: f64, q: f64) -> f64 {
    -params.f(p) * params.f(q) / (p - q).powi(4)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PdRods {
    /// `ℓ_1..ℓ_4` in `(∂_τ, ∂_φ)` components.
    pub vectors: [[f64; 2]; 4],
    /// `collinear[k]`: `ℓ_{k+1} ∥ ℓ_{k+2}`.
    pub collinear: [bool; 3],
}

pub fn pd_rod_vectors(params: &PdParams) -> PdRods {
    let [p1, p2, p3, _] = params.roots;
    let d = |k: usize| params.f_prime_at_root(k);
    let vectors = [
        [2.0 / d(1) * p2 * p2, 2.0 / d(1)],
        [2.0 / d(0), 2.0 / d(0) * p1 * p1],
        [2.0 / d(2) * p3 * p3, 2.0 / d(2)],
        [2.0 / d(1), 2.0 / d(1) * p2 * p2],
    ];
    let col = |u: [f64; 2], v: [f64; 2]| {
        let det = u[0] * v[1] - u[1] * v[0];
        det.abs() <= ROOT_TOL * (u[0].hypot(u[1]) * v[0].hypot(v[1]))
    };
    PdRods {
        collinear: [
            col(vectors[0], vectors[1]),
            col(vectors[1], vectors[2]),
            col(vectors[2], vectors[3]),
        ],
        vectors,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PdRegularity {
    /// Reduced forms, valid once `ε = ε̄ = 1`.
    pub m: f64,
    pub n: f64,
    pub m_raw: f64,
    pub n_raw: f64,
    pub epsilon: f64,
    pub epsilon_bar: f64,
    /// `|m − m_raw/(ε ε̄)|` and `|n − n_raw ε|` relative.
    pub simplification_defect: f64,
}

pub fn pd_regularity(params: &PdParams) -> Result<PdRegularity> {
    let rods = pd_rod_vectors(params);
    if rods.collinear.iter().any(|&c| c) {
        return Err(Error::Degenerate(
            "consecutive rod vectors are collinear; use the self-dual analysis".into(),
        ));
    }
    let [p1, p2, p3, _] = params.roots;
    let (s1, s2, s3) = (p1 * p1, p2 * p2, p3 * p3);
    let d = |k: usize| params.f_prime_at_root(k);
    let m_raw = d(0) / d(2) * (s3 - s2) / (1.0 - s1 * s2);
    let epsilon = -d(1) / d(2) * (1.0 - s1 * s3) / (1.0 - s1 * s2);
    let n_raw = d(2) / d(1) * (s2 - s1) / (1.0 - s1 * s3);
    let epsilon_bar = -d(0) / d(1) * (1.0 - s2 * s3) / (1.0 - s1 * s3);
    let m = (s3 - s2) / (1.0 - s2 * s3);
    let n = (s1 - s2) / (1.0 - s1 * s2);
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-300);
    let simplification_defect = rel(m, m_raw / (epsilon * epsilon_bar)).max(rel(n, n_raw * epsilon));
    Ok(PdRegularity {
        m,
        n,
        m_raw,
        n_raw,
        epsilon,
        epsilon_bar,
        simplification_defect,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ScanCase {
    #[serde(rename = "i")]
    AllPositive,
    #[serde(rename = "ii")]
    Mixed,
    #[serde(rename = "iii")]
    AllNegative,
    #[serde(rename = "sd-a")]
    SelfDualA,
    #[serde(rename = "sd-b")]
    SelfDualB,
}

impl ScanCase {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "i" => ScanCase::AllPositive,
            "ii" => ScanCase::Mixed,
            "iii" => ScanCase::AllNegative,
            "sd-a" | "a" => ScanCase::SelfDualA,
            "sd-b" | "b" => ScanCase::SelfDualB,
            _ => return None,
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            ScanCase::AllPositive => "i",
            ScanCase::Mixed => "ii",
            ScanCase::AllNegative => "iii",
            ScanCase::SelfDualA => "sd-a",
            ScanCase::SelfDualB => "sd-b",
        }
    }
}

/// Log-uniform magnitudes in `[10^{-LOG_SPAN}, 10^{LOG_SPAN}]`.
const LOG_SPAN: f64 = 1.5;
const MAX_DRAWS: usize = 100_000;

fn magnitude(rng: &mut ChaCha8Rng) -> f64 {
    10f64.powf(rng.gen_range(-LOG_SPAN..LOG_SPAN))
}

fn sorted(mut r: [f64; 4]) -> [f64; 4] {
    r.sort_by(|a, b| a.partial_cmp(b).unwrap());
    r
}

fn distinct(r: &[f64; 4]) -> bool {
    r.windows(2).all(|w| w[1] - w[0] > 1e-6 * w[0].abs().max(w[1].abs()))
}

/// Draws one root set for the case; `None` after too many rejections.
pub fn draw_roots(case: ScanCase, rng: &mut ChaCha8Rng) -> Option<[f64; 4]> {
    for _ in 0..MAX_DRAWS {
        let r = match case {
            ScanCase::AllPositive | ScanCase::AllNegative | ScanCase::Mixed => {
                let s = match case {
                    ScanCase::AllPositive => [1.0, 1.0, 1.0],
                    ScanCase::AllNegative => [-1.0, -1.0, -1.0],
                    _ => [-1.0, -1.0, 1.0],
                };
                let x = [s[0] * magnitude(rng), s[1] * magnitude(rng), s[2] * magnitude(rng)];
                sorted([x[0], x[1], x[2], 1.0 / (x[0] * x[1] * x[2])])
            }
            ScanCase::SelfDualA => {
                let (x, y) = (1.0 / magnitude(rng).max(1.0), 1.0 / magnitude(rng).max(1.0));
                let (a, b) = (x.min(y), x.max(y));
                if rng.gen_bool(0.5) {
                    [-1.0 / a, -1.0 / b, -b, -a]
                } else {
                    [a, b, 1.0 / b, 1.0 / a]
                }
            }
            ScanCase::SelfDualB => {
                let p1 = -(1.0 + magnitude(rng));
                let p3 = rng.gen_range(0.0..1.0f64).max(1e-3);
                [p1, 1.0 / p1, p3, 1.0 / p3]
            }
        };
        if !distinct(&r) || r.windows(2).any(|w| !(w[0] < w[1])) {
            continue;
        }
        let ok = match case {
            ScanCase::AllPositive => r[0] > 0.0,
            ScanCase::AllNegative => r[3] < 0.0,
            ScanCase::Mixed => r[1] < 0.0 && r[2] > 0.0,
            ScanCase::SelfDualA | ScanCase::SelfDualB => true,
        };
        let params = match pd_params_from_roots(r, 1.0) {
            Ok(p) => p,
            Err(_) => continue,
        };
        // the rectangle is empty for the all-negative pattern and borderline for the
        // reciprocal ones, so only cases (i) and (ii) are filtered by it
        let rect = !matches!(case, ScanCase::AllPositive | ScanCase::Mixed) || params.rectangle_ok();
        if ok && rect {
            return Some(r);
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleVerdict {
    pub index: usize,
    pub roots: [f64; 4],
    pub admissible: bool,
    pub certificate_holds: bool,
    pub certificate: String,
    pub m: f64,
    pub n: f64,
    pub epsilon: f64,
    pub epsilon_bar: f64,
}

fn near_int(x: f64) -> bool {
    (x - x.round()).abs() < 1e-9
}

/// Case-specific contradiction for one root set.
pub fn certify(case: ScanCase, params: &PdParams) -> (bool, bool, String, [f64; 4]) {
    let [p1, p2, p3, p4] = params.roots;
    let (s1, s2, s3) = (p1 * p1, p2 * p2, p3 * p3);
    match case {
        ScanCase::AllPositive | ScanCase::Mixed | ScanCase::AllNegative => {
            let reg = match pd_regularity(params) {
                Ok(r) => r,
                Err(e) => return (false, false, e.to_string(), [f64::NAN; 4]),
            };
            let vals = [reg.m, reg.n, reg.epsilon, reg.epsilon_bar];
            let admissible = params.rectangle_ok()
                && near_int(reg.m)
                && near_int(reg.n)
                && (reg.epsilon - 1.0).abs() < 1e-9
                && (reg.epsilon_bar - 1.0).abs() < 1e-9;
            let (holds, text) = match case {
                ScanCase::AllPositive => {
                    // p1² < p2² < 1 places n in (−1, 0); |n| = N ≥ 1 would need p2² ≥ 1
                    let chain = reg.m > 0.0 && reg.n < 0.0 && s1 < s2 && s2 < 1.0;
                    (
                        chain && reg.n > -1.0,
                        format!(
                            "m = {:.6} > 0, n = {:.6} in (-1,0); p1^2 = {s1:.6} < p2^2 = {s2:.6} < 1, so n is not a nonzero integer",
                            reg.m, reg.n
                        ),
                    )
                }
                ScanCase::Mixed => {
                    let f1 = (p3 - p1) / (p3 - p2) * ((p4 - p1) / (p4 - p2));
                    let f2 = (1.0 - s2 * s3) / (1.0 - s1 * s3);
                    (
                        f1 > 1.0 && f2 > 1.0 && reg.epsilon_bar > 1.0,
                        format!(
                            "epsilon_bar = {f1:.6} * {f2:.6} = {:.6} > 1 (n = {:.6}, m = {:.6})",
                            reg.epsilon_bar, reg.n, reg.m
                        ),
                    )
                }
                _ => (
                    // |p_3 p_4| < |p_1 p_2| with unit product forces |p_1 p_2| > 1, so 1 − p²q² < 0
                    // near the corner (p_2, p_1) and no admissible chart exists
                    (p1 * p2).abs() > 1.0 && (p3 * p4).abs() < 1.0 && !params.rectangle_ok(),
                    format!(
                        "|p1 p2| = {:.6} > 1 > |p3 p4| = {:.6}: the coordinate rectangle is empty (n = {:.6}, m = {:.6})",
                        (p1 * p2).abs(),
                        (p3 * p4).abs(),
                        reg.n,
                        reg.m
                    ),
                ),
            };
            (admissible, holds, text, vals)
        }
        ScanCase::SelfDualA | ScanCase::SelfDualB => match pd_selfdual_check(params) {
            Ok(r) => {
                let holds = r.verdict == SelfDualVerdict::Rejected;
                (
                    r.verdict == SelfDualVerdict::Regular,
                    holds,
                    r.detail,
                    [r.m.unwrap_or(f64::NAN), f64::NAN, r.epsilon.unwrap_or(f64::NAN), r.epsilon_bar.unwrap_or(f64::NAN)],
                )
            }
            Err(e) => (false, false, e.to_string(), [f64::NAN; 4]),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub case: ScanCase,
    pub samples: usize,
    pub seed: u64,
    pub drawn: usize,
    pub admissible: usize,
    pub certificate_failures: usize,
    /// Samples where `m` and `n` are both within `1e−9` of integers.
    pub integral_mn: usize,
    /// Samples with `n > 0` and `m < 0`.
    pub n_pos_m_neg: usize,
    pub m_range: Option<[f64; 2]>,
    pub n_range: Option<[f64; 2]>,
    pub epsilon_bar_range: Option<[f64; 2]>,
    pub examples: Vec<SampleVerdict>,
    pub failures: Vec<SampleVerdict>,
}

fn range(v: impl Iterator<Item = f64>) -> Option<[f64; 2]> {
    v.filter(|x| x.is_finite()).fold(None, |r, x| match r {
        None => Some([x, x]),
        Some([a, b]) => Some([a.min(x), b.max(x)]),
    })
}

/// Sample `k` uses its own ChaCha stream, so results do not depend on thread count.
pub fn pd_scan(case: ScanCase, samples: usize, seed: u64) -> Result<ScanReport> {
    if samples == 0 {
        return Err(Error::Precondition("samples must be positive".into()));
    }
    let verdicts: Vec<Option<SampleVerdict>> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let roots = draw_roots(case, &mut rng)?;
            let params = pd_params_from_roots(roots, 1.0).ok()?;
            let (admissible, holds, text, v) = certify(case, &params);
            Some(SampleVerdict {
                index: k,
                roots,
                admissible,
                certificate_holds: holds,
                certificate: text,
                m: v[0],
                n: v[1],
                epsilon: v[2],
                epsilon_bar: v[3],
            })
        })
        .collect();
    let drawn: Vec<SampleVerdict> = verdicts.into_iter().flatten().collect();
    let failures: Vec<SampleVerdict> = drawn
        .iter()
        .filter(|v| v.admissible || !v.certificate_holds)
        .take(20)
        .cloned()
        .collect();
    Ok(ScanReport {
        case,
        samples,
        seed,
        drawn: drawn.len(),
        admissible: drawn.iter().filter(|v| v.admissible).count(),
        certificate_failures: drawn.iter().filter(|v| !v.certificate_holds).count(),
        integral_mn: drawn.iter().filter(|v| near_int(v.m) && near_int(v.n)).count(),
        n_pos_m_neg: drawn.iter().filter(|v| v.n > 0.0 && v.m < 0.0).count(),
        m_range: range(drawn.iter().map(|v| v.m)),
        n_range: range(drawn.iter().map(|v| v.n)),
        epsilon_bar_range: range(drawn.iter().map(|v| v.epsilon_bar)),
        examples: drawn.iter().take(3).cloned().collect(),
        failures,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SelfDualVerdict {
    Flat,
    Rejected,
    /// Never produced for valid input; kept so a counterexample would surface.
    Regular,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfDualReport {
    pub case: String,
    pub verdict: SelfDualVerdict,
    pub m: Option<f64>,
    pub epsilon: Option<f64>,
    pub epsilon_bar: Option<f64>,
    pub detail: String,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= ROOT_TOL * a.abs().max(b.abs()).max(1.0)
}

pub fn pd_selfdual_check(params: &PdParams) -> Result<SelfDualReport> {
    if !params.is_self_dual() {
        return Err(Error::Precondition("root set is not self-dual (a3 != a1)".into()));
    }
    let [p1, p2, p3, p4] = params.roots;
    let (s1, s2, s3) = (p1 * p1, p2 * p2, p3 * p3);
    if close(p3 * p2, 1.0) && close(p4 * p1, 1.0) {
        let eps = (s2 - s1) / (1.0 - s1 * s2);
        let m = (1.0 - s1) * (1.0 + s2) / (1.0 - s1 * s2);
        let verdict = if close(eps, 1.0) { SelfDualVerdict::Regular } else { SelfDualVerdict::Rejected };
        return Ok(SelfDualReport {
            case: "a".into(),
            verdict,
            m: Some(m),
            epsilon: Some(eps),
            epsilon_bar: None,
            detail: format!(
                "case (a): l3 || l4; epsilon = (p2^2 - p1^2)/(1 - p1^2 p2^2) = {eps:.10}; epsilon = 1 would force p2^2 = 1 (p2^2 = {s2:.6})"
            ),
        });
    }
    if close(p2 * p1, 1.0) && close(p3 * p4, 1.0) {
        if close(p1 * p3, -1.0) || params.is_flat() {
            return Ok(SelfDualReport {
                case: "b".into(),
                verdict: SelfDualVerdict::Flat,
                m: None,
                epsilon: None,
                epsilon_bar: None,
                detail: format!(
                    "case (b) with p1 = -1/p3: only l1 and l4 independent, flat R^4 rod structure (a3 = {:.3e}, a1 = {:.3e})",
                    params.a3, params.a1
                ),
            });
        }
        let eb = (s1 - s3) / (1.0 - s1 * s3);
        let verdict = if close(eb, 1.0) { SelfDualVerdict::Regular } else { SelfDualVerdict::Rejected };
        return Ok(SelfDualReport {
            case: "b".into(),
            verdict,
            m: None,
            epsilon: None,
            epsilon_bar: Some(eb),
            detail: format!(
                "case (b): l1 || l2; epsilon_bar = (p1^2 - p3^2)/(1 - p1^2 p3^2) = {eb:.10}; epsilon_bar = 1 would force p1^2 = 1 (p1^2 = {s1:.6})"
            ),
        });
    }
    Err(Error::Degenerate("self-dual root set matches neither reciprocal pattern".into()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AleLimitReport {
    pub r: f64,
    pub theta: f64,
    pub c_pd: f64,
    pub prefactor: f64,
    /// Largest `|g − g_model|_{ij} / √(g_model,ii g_model,jj)`.
    pub relative_deviation: f64,
}

/// Pulls the metric back to `(ψ, ϕ, r, θ)` and compares with the cone metric
/// `K [dr² + (r²/4)((dψ + cos θ dϕ)² + dθ² + sin²θ dϕ²)]`.
pub fn pd_ale_limit(params: &PdParams, r: f64, theta: f64, c_pd: f64) -> Result<AleLimitReport> {
    if !(c_pd > 0.0) {
        return Err(Error::OutOfDomain("the asymptotic chart needs c > 0 so that p > p2".into()));
    }
    let p2 = params.roots[1];
    let dp2 = params.f_prime_at_root(1);
    let (ch, sh) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let p = p2 + c_pd * ch * ch / (2.0 * r * r);
    let q = p2 - c_pd * sh * sh / (2.0 * r * r);
    let g = pd_metric_order(params, p, q, 0)?.values();
    // Killing block: (τ, φ) = A (ψ, ϕ); essential block: Jacobian of (p, q) in (r, θ)
    let a = [
        [(1.0 + p2 * p2) / dp2, -(1.0 - p2 * p2) / dp2],
        [(1.0 + p2 * p2) / dp2, (1.0 - p2 * p2) / dp2],
    ];
    let j = [
        [-c_pd * ch * ch / (r * r * r), -c_pd * ch * sh / (2.0 * r * r)],
        [c_pd * sh * sh / (r * r * r), -c_pd * sh * ch / (2.0 * r * r)],
    ];
    let mut t = [[0.0; 4]; 4];
    for i in 0..2 {
        for k in 0..2 {
            t[i][k] = a[i][k];
            t[2 + i][2 + k] = j[i][k];
        }
    }
    let mut pulled = [[0.0; 4]; 4];
    for x in 0..4 {
        for y in 0..4 {
            let mut s = 0.0;
            for u in 0..4 {
                for v in 0..4 {
                    s += t[u][x] * g[u][v] * t[v][y];
                }
            }
            pulled[x][y] = s;
        }
    }
    let k = 8.0 * (1.0 - p2.powi(4)) / (c_pd * dp2);
    let r2 = r * r / 4.0;
    let ct = theta.cos();
    let mut model = [[0.0; 4]; 4];
    model[0][0] = k * r2;
    model[0][1] = k * r2 * ct;
    model[1][0] = model[0][1];
    model[1][1] = k * r2;
    model[2][2] = k;
    model[3][3] = k * r2;
    let mut dev: f64 = 0.0;
    for x in 0..4 {
        for y in 0..4 {
            let s = (model[x][x] * model[y][y]).sqrt();
            dev = dev.max((pulled[x][y] - model[x][y]).abs() / s);
        }
    }
    Ok(AleLimitReport {
        r,
        theta,
        c_pd,
        prefactor: k,
        relative_deviation: dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::{curvature_pack, weyl_split};

    const GENERIC: [f64; 4] = [0.2, 0.4, 2.0, 6.25];

    #[test]
    fn quartic_coefficients() {
        let flat = pd_params_from_roots([-2.0, -0.5, 0.5, 2.0], 1.0).unwrap();
        assert!(flat.a3.abs() < 1e-15 && flat.a1.abs() < 1e-15);
        assert!((flat.a2 + 4.25).abs() < 1e-14);
        assert!(flat.is_flat());
        let sd = pd_params_from_roots([0.5, 0.8, 1.25, 2.0], 1.0).unwrap();
        assert!(sd.is_self_dual() && !sd.is_flat());
        assert!(!pd_params_from_roots(GENERIC, 1.0).unwrap().is_self_dual());
        assert!(pd_params_from_roots([0.2, 0.4, 2.0, 6.0], 1.0).is_err());
        assert!(pd_params_from_roots([0.5, 0.5, 2.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn generic_regularity_values() {
        let p = pd_params_from_roots(GENERIC, 1.0).unwrap();
        assert!(p.rectangle_ok());
        let r = pd_regularity(&p).unwrap();
        assert!((r.m - 3.84 / 0.36).abs() < 1e-12);
        assert!((r.n + 0.12 / 0.9936).abs() < 1e-12);
        assert!(r.simplification_defect < 1e-10);
        assert!(r.epsilon > 0.0 && r.epsilon_bar > 0.0);
    }

    #[test]
    fn reciprocal_image_flips_m() {
        // p_i → 1/p_{5−i} exchanges the two admissible q-intervals, so the image
        // violates the rectangle and m changes sign
        let p = pd_params_from_roots(GENERIC, 1.0).unwrap();
        let img: [f64; 4] = std::array::from_fn(|i| 1.0 / GENERIC[3 - i]);
        let q = pd_params_from_roots(img, 1.0).unwrap();
        let (a, b) = (pd_regularity(&p).unwrap(), pd_regularity(&q).unwrap());
        assert!((a.m + b.m).abs() < 1e-12 * a.m.abs());
        assert!(!q.rectangle_ok());
        assert!(b.simplification_defect < 1e-10);
    }

    #[test]
    fn regularity_signs_are_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for case in [ScanCase::AllPositive, ScanCase::Mixed] {
            for _ in 0..200 {
                let p = pd_params_from_roots(draw_roots(case, &mut rng).unwrap(), 1.0).unwrap();
                let r = pd_regularity(&p).unwrap();
                assert!(r.epsilon > 0.0 && r.epsilon_bar > 0.0, "{:?}", p.roots);
                assert!(r.simplification_defect < 1e-10, "{:?}", p.roots);
            }
        }
    }

    #[test]
    fn gram_determinant_and_ricci_flatness() {
        let p = pd_params_from_roots(GENERIC, 1.0).unwrap();
        for &(pp, qq) in &[(1.0, 0.3), (0.5, 0.25), (1.7, 0.39)] {
            let m = pd_metric(&p, pp, qq).unwrap();
            let want = pd_gram_det(&p, pp, qq);
            assert!((m.gram_det() - want).abs() < 1e-12 * want.abs());
            let c = curvature_pack(&m).unwrap();
            assert!(c.ricci_norm() < 1e-8 * c.riemann_norm(), "{}", c.ricci_norm() / c.riemann_norm());
        }
    }

    #[test]
    fn flat_roots_have_no_curvature() {
        let p = pd_params_from_roots([-2.0, -0.5, 0.5, 2.0], 1.0).unwrap();
        let m = pd_metric(&p, 0.0, -1.0).unwrap();
        let c = curvature_pack(&m).unwrap();
        let scale = m.values()[2][2].abs().max(m.values()[3][3].abs());
        assert!(c.riemann_norm() < 1e-10 * scale.max(1.0), "{}", c.riemann_norm());
    }

    #[test]
    fn self_dual_roots_kill_one_weyl_half() {
        // orientation +1 on (τ, φ, p, q) is the one whose anti-self-dual Weyl half vanishes
        let p = pd_params_from_roots([0.5, 0.8, 1.25, 2.0], 1.0).unwrap();
        for &(pp, qq) in &[(0.9, 0.6), (1.1, 0.75)] {
            let c = curvature_pack(&pd_metric(&p, pp, qq).unwrap()).unwrap();
            let w = weyl_split(&c, 1.0);
            let big = w.sd_eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let small = w.asd_eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(big > 1e-3 && small < 1e-7 * big, "{big} {small}");
        }
        let g = pd_params_from_roots(GENERIC, 1.0).unwrap();
        let w = weyl_split(&curvature_pack(&pd_metric(&g, 1.0, 0.3).unwrap()).unwrap(), 1.0);
        assert!(w.asd_eigenvalues.iter().any(|x| x.abs() > 0.1));
    }

    #[test]
    fn rod_vector_collinearity() {
        let g = pd_rod_vectors(&pd_params_from_roots(GENERIC, 1.0).unwrap());
        assert_eq!(g.collinear, [false; 3]);
        let a = pd_rod_vectors(&pd_params_from_roots([0.5, 0.8, 1.25, 2.0], 1.0).unwrap());
        assert_eq!(a.collinear, [false, false, true]);
        let b = pd_rod_vectors(&pd_params_from_roots([-3.0, -1.0 / 3.0, 0.5, 2.0], 1.0).unwrap());
        assert!(b.collinear[0]);
    }

    #[test]
    fn self_dual_verdicts() {
        let a = pd_selfdual_check(&pd_params_from_roots([0.5, 0.8, 1.25, 2.0], 1.0).unwrap()).unwrap();
        assert_eq!(a.verdict, SelfDualVerdict::Rejected);
        assert!((a.epsilon.unwrap() - 0.39 / 0.84).abs() < 1e-12);
        let f = pd_selfdual_check(&pd_params_from_roots([-2.0, -0.5, 0.5, 2.0], 1.0).unwrap()).unwrap();
        assert_eq!(f.verdict, SelfDualVerdict::Flat);
        let b = pd_selfdual_check(&pd_params_from_roots([-3.0, -1.0 / 3.0, 0.5, 2.0], 1.0).unwrap()).unwrap();
        assert_eq!(b.verdict, SelfDualVerdict::Rejected);
        assert!((b.epsilon_bar.unwrap() - (9.0 - 0.25) / (1.0 - 2.25)).abs() < 1e-12);
        assert!(pd_selfdual_check(&pd_params_from_roots(GENERIC, 1.0).unwrap()).is_err());
    }

    #[test]
    fn scans_find_nothing() {
        for case in [
            ScanCase::AllPositive,
            ScanCase::Mixed,
            ScanCase::AllNegative,
            ScanCase::SelfDualA,
            ScanCase::SelfDualB,
        ] {
            let r = pd_scan(case, 500, 7).unwrap();
            assert_eq!(r.drawn, 500, "{case:?}");
            assert_eq!(r.admissible, 0);
            assert_eq!(r.certificate_failures, 0, "{case:?} {:?}", r.failures.first());
            let again = pd_scan(case, 500, 7).unwrap();
            assert_eq!(serde_json::to_string(&r).unwrap(), serde_json::to_string(&again).unwrap());
        }
    }

    #[test]
    fn ale_limit_decay() {
        let p = pd_params_from_roots(GENERIC, 1.0).unwrap();
        let k = 8.0 * (1.0 - 0.4f64.powi(4)) / p.f_prime_at_root(1);
        for th in [0.4, 1.3, 2.5] {
            let a = pd_ale_limit(&p, 100.0, th, 1.0).unwrap();
            let b = pd_ale_limit(&p, 200.0, th, 1.0).unwrap();
            assert!((a.prefactor - k).abs() < 1e-12 * k);
            let ratio = b.relative_deviation / a.relative_deviation;
            assert!((ratio - 0.25).abs() < 1e-3, "{ratio}");
        }
        assert!(pd_ale_limit(&p, 100.0, 1.0, -1.0).is_err());
    }
}
