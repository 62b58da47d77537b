//! Rod files, verification suites and the versioned JSON report.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::cky::{cky_decay_check, tod_cky_candidate, DEFAULT_DECAY_THETA};
use crate::classify::verify_n1_degenerate;
use crate::curvature::{cky_residual, curvature_pack, form_norm2, killing_defect, scalar_laplacian, weyl_split};
use crate::error::{Error, Result};
use crate::harmonic::{build_h, build_v, toda_residual, ward_coords, ExactRodData, HGauge, Mode, Nut, RodData};
use crate::rods::{
    asymptotic_class, conical_check, default_rho_samples, gl2z_compatibility, rod_vectors, AsymptoticClass,
};
use crate::tod::{tod_fields, tod_fields_via_v, tod_metric, tod_orientation};

pub const SCHEMA: &str = "instanton.report/1";
pub const CODE_W_IDENTICALLY_ZERO: &str = "W_IDENTICALLY_ZERO";

/// A real given either as a JSON number or as a decimal / fraction string;
/// strings keep their exact value.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    fn exact(&self) -> Option<Result<BigRational>> {
        match self {
            Number::Float(_) => None,
            Number::Text(s) => Some(parse_rational(s)),
        }
    }

    fn value(&self) -> Result<f64> {
        match self {
            Number::Float(x) => Ok(*x),
            Number::Text(s) => parse_rational(s)?
                .to_f64()
                .ok_or_else(|| Error::InvalidRodData(format!("{s} is out of range"))),
        }
    }
}

/// `"-0.0625"`, `"1/16"`, `"3"`, `"2.5e-3"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidRodData(format!("cannot read {s:?} as an exact number"));
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = BigInt::from_str(&format!("{int}{frac}")).map_err(|_| bad())?;
    let shift = exp - frac.len() as i32;
    let ten = BigInt::from(10u32);
    let mut q = if shift >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, shift as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-shift) as usize))
    };
    if neg {
        q = -q;
    }
    Ok(q)
}

#[derive(Clone, Debug, Deserialize)]
pub struct RodEntry {
    pub z: Number,
    pub a: Number,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum GaugeSpec {
    Named(String),
    Value(f64),
}

#[derive(Clone, Debug, Deserialize)]
pub struct GaugeEntry {
    pub h_constant: GaugeSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RodFile {
    #[serde(default = "default_mode")]
    pub mode: Mode,
    pub c: Number,
    pub rods: Vec<RodEntry>,
    pub gauge: Option<GaugeEntry>,
}

fn default_mode() -> Mode {
    Mode::Ale
}

impl RodFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidRodData(format!("malformed rod file: {e}")))
    }

    /// Exact mode applies when `c` and every `z`, `a` are strings.
    pub fn to_rod_data(&self) -> Result<RodData> {
        let nuts = self
            .rods
            .iter()
            .map(|r| Ok(Nut { z: r.z.value()?, a: r.a.value()? }))
            .collect::<Result<Vec<_>>>()?;
        let mut rods = RodData::new(self.c.value()?, nuts, self.mode)?;
        if let Some(g) = &self.gauge {
            rods = rods.with_gauge(match &g.h_constant {
                GaugeSpec::Named(s) if s == "symmetric" => HGauge::Symmetric,
                GaugeSpec::Named(s) => {
                    return Err(Error::InvalidRodData(format!("unknown gauge {s:?}; use \"symmetric\" or a number")))
                }
                GaugeSpec::Value(k) => HGauge::Constant(*k),
            });
        }
        let exact_parts: Vec<Option<Result<BigRational>>> = std::iter::once(self.c.exact())
            .chain(self.rods.iter().flat_map(|r| [r.z.exact(), r.a.exact()]))
            .collect();
        if exact_parts.iter().all(|p| p.is_some()) {
            let mut vals = exact_parts.into_iter().map(|p| p.unwrap()).collect::<Result<Vec<_>>>()?.into_iter();
            let c = vals.next().unwrap();
            let (mut z, mut a) = (Vec::new(), Vec::new());
            while let (Some(zi), Some(ai)) = (vals.next(), vals.next()) {
                z.push(zi);
                a.push(ai);
            }
            if self.mode == Mode::Ale && a.iter().fold(BigRational::zero(), |s, x| s + x) != BigRational::from_integer(1.into()) {
                return Err(Error::InvalidRodData("ALE mode requires the exact weights to sum to 1".into()));
            }
            rods = rods.with_exact(ExactRodData { c, z, a });
        }
        Ok(rods)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    /// Worst value over the sampled locations; `None` when not numeric.
    pub measured: Option<f64>,
    pub tolerance: Option<f64>,
    pub location: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skip: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metadata {
    pub input_sha256: String,
    pub seed: u64,
    pub version: String,
}

impl Metadata {
    pub fn new(input: &[u8], seed: u64) -> Self {
        Metadata {
            input_sha256: sha256_hex(input),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: &'static str,
    pub suite: String,
    pub status: Status,
    /// Machine-readable reason for a failure with a dedicated meaning.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    pub checks: Vec<Check>,
    pub summary: Summary,
    pub metadata: Metadata,
}

impl VerificationReport {
    pub fn new(suite: &str, checks: Vec<Check>, code: Option<String>, metadata: Metadata) -> Self {
        let mut summary = Summary::default();
        for c in &checks {
            match c.status {
                Status::Pass => summary.pass += 1,
                Status::Fail => summary.fail += 1,
                Status::Skip => summary.skip += 1,
            }
        }
        VerificationReport {
            schema: SCHEMA,
            suite: suite.to_string(),
            status: if summary.fail > 0 { Status::Fail } else { Status::Pass },
            code,
            checks,
            summary,
            metadata,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Wraps any serializable payload with the schema tag and metadata.
pub fn envelope<T: Serialize>(kind: &str, status: Status, payload: &T, metadata: &Metadata) -> Value {
    serde_json::json!({
        "schema": SCHEMA,
        "kind": kind,
        "status": status,
        "result": payload,
        "metadata": metadata,
    })
}

/// Pretty JSON with a trailing newline; field order is fixed by the types.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Fields,
    Curvature,
    Rods,
    Cky,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Fields => "fields",
            Suite::Curvature => "curvature",
            Suite::Rods => "rods",
            Suite::Cky => "cky",
            Suite::All => "all",
        }
    }
}

/// Default tolerances, overridable by name.
pub fn default_tolerances() -> BTreeMap<&'static str, f64> {
    BTreeMap::from([
        ("v_harmonic", 1e-10),
        ("h_conjugate", 1e-10),
        ("gram_det", 1e-12),
        ("zomega_norm", 1e-12),
        ("v_route_agreement", 1e-6),
        ("toda_residual", 1e-8),
        ("ricci_ratio", 1e-7),
        ("lambda_z3", 1e-7),
        ("sd_spectrum", 1e-7),
        ("conformal_factor", 1e-8),
        ("gl2z_integrality", 1e-9),
        ("conical", 1e-6),
        ("cky_residual", 1e-8),
        ("cky_xi", 1e-8),
        ("killing_defect", 1e-8),
        ("cky_decay_exponent", 0.1),
    ])
}

pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            samples: 20,
            seed: 0,
            tolerances: BTreeMap::new(),
        }
    }
}

impl VerifyOptions {
    fn tol(&self, name: &str) -> f64 {
        self.tolerances
            .get(name)
            .copied()
            .unwrap_or_else(|| default_tolerances().get(name).copied().expect("known tolerance"))
    }
}

/// Interior points `ρ ∈ [0.1s, 2s]` (log-uniform), `|ζ − ζ_c| ≤ 2s`, at least
/// `0.05s` from every nut.
pub fn sample_points(rods: &RodData, count: usize, seed: u64) -> Vec<(f64, f64)> {
    let s = rods.scale();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let rho = s * 10f64.powf(rng.gen_range(-1.0..std::f64::consts::LOG10_2));
        let zeta = rods.centre() + s * rng.gen_range(-2.0..2.0);
        if rods.nuts().iter().all(|n| f64::hypot(rho, zeta - n.z) > 0.05 * s) {
            out.push((rho, zeta));
        }
    }
    out
}

/// Running maximum of a measured quantity with the location that produced it.
struct Worst {
    name: &'static str,
    value: f64,
    at: String,
    error: Option<String>,
}

impl Worst {
    fn new(name: &'static str) -> Self {
        Worst {
            name,
            value: 0.0,
            at: String::new(),
            error: None,
        }
    }

    fn push(&mut self, v: Result<f64>, at: (f64, f64)) {
        match v {
            Ok(x) if x.is_nan() || x > self.value || self.at.is_empty() => {
                if !self.value.is_nan() {
                    self.value = x;
                    self.at = format!("rho={:.6e}, zeta={:.6e}", at.0, at.1);
                }
            }
            Ok(_) => {}
            Err(e) => {
                if self.error.is_none() {
                    self.error = Some(format!("rho={:.6e}, zeta={:.6e}: {e}", at.0, at.1));
                }
            }
        }
    }

    fn finish(self, tol: f64) -> Check {
        if let Some(e) = self.error {
            return Check {
                name: self.name.into(),
                status: Status::Fail,
                measured: None,
                tolerance: Some(tol),
                location: e,
            };
        }
        Check {
            name: self.name.into(),
            status: if self.value <= tol { Status::Pass } else { Status::Fail },
            measured: Some(self.value),
            tolerance: Some(tol),
            location: self.at,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn skip(name: &str, why: &str) -> Check {
    Check {
        name: name.into(),
        status: Status::Skip,
        measured: None,
        tolerance: None,
        location: why.into(),
    }
}

fn fields_checks(rods: &RodData, pts: &[(f64, f64)], opt: &VerifyOptions) -> Vec<Check> {
    let mut harm = Worst::new("v_harmonic");
    let mut conj = Worst::new("h_conjugate");
    let mut gram = Worst::new("gram_det");
    let mut znorm = Worst::new("zomega_norm");
    let mut route = Worst::new("v_route_agreement");
    let mut toda = Worst::new("toda_residual");
    let mut min_w = f64::INFINITY;
    let mut min_e = f64::INFINITY;
    let h0 = rods.h_constant();
    for &(rho, zeta) in pts {
        harm.push(
            build_v(rods, rho, zeta, 2).map(|v| {
                let terms = [v.get(2, 0), v.get(1, 0) / rho, v.get(0, 2)];
                terms.iter().sum::<f64>().abs() / terms.iter().map(|t| t.abs()).sum::<f64>()
            }),
            (rho, zeta),
        );
        conj.push(
            build_v(rods, rho, zeta, 1).and_then(|v| {
                let h = build_h(rods, rho, zeta, 1, h0)?;
                let scale = (rho * v.get(1, 0)).abs() + (rho * v.get(0, 1)).abs();
                Ok(((h.get(0, 1) - rho * v.get(1, 0)).abs() + (h.get(1, 0) + rho * v.get(0, 1)).abs()) / scale)
            }),
            (rho, zeta),
        );
        gram.push(tod_metric(rods, rho, zeta).map(|m| rel(m.gram_det(), rho * rho)), (rho, zeta));
        znorm.push(
            tod_cky_candidate(rods, rho, zeta).and_then(|z| {
                let m = tod_metric(rods, rho, zeta)?;
                let zv = tod_fields(rods, rho, zeta, 0)?.z.value();
                Ok(rel(form_norm2(&m.values(), &z.values()), 4.0 * zv * zv))
            }),
            (rho, zeta),
        );
        route.push(
            tod_fields(rods, rho, zeta, 0).and_then(|a| {
                let b = tod_fields_via_v(rods, rho, zeta, 0)?;
                min_w = min_w.min(a.w.value());
                min_e = min_e.min(a.e2nu.value());
                let fs = a.f.value().abs().max(1.0);
                Ok(rel(b.w.value(), a.w.value()).max((b.f.value() - a.f.value()).abs() / fs))
            }),
            (rho, zeta),
        );
        toda.push(
            ward_coords(rods, rho, zeta).and_then(|(z, x)| toda_residual(rods, z, x)),
            (rho, zeta),
        );
    }
    let positivity = |name: &str, v: f64| Check {
        name: name.into(),
        status: if v > 0.0 { Status::Pass } else { Status::Fail },
        measured: Some(v),
        tolerance: Some(0.0),
        location: "minimum over samples".into(),
    };
    vec![
        harm.finish(opt.tol("v_harmonic")),
        conj.finish(opt.tol("h_conjugate")),
        gram.finish(opt.tol("gram_det")),
        znorm.finish(opt.tol("zomega_norm")),
        route.finish(opt.tol("v_route_agreement")),
        toda.finish(opt.tol("toda_residual")),
        positivity("w_positive", min_w),
        positivity("e2nu_positive", min_e),
    ]
}

fn curvature_checks(rods: &RodData, pts: &[(f64, f64)], opt: &VerifyOptions) -> Vec<Check> {
    let mut ricci = Worst::new("ricci_ratio");
    let mut lam = Worst::new("lambda_z3");
    let mut spec = Worst::new("sd_spectrum");
    let mut conf = Worst::new("conformal_factor");
    let c = rods.c();
    for &(rho, zeta) in pts {
        let pack = tod_metric(rods, rho, zeta).and_then(|m| Ok((curvature_pack(&m)?, m)));
        let (pack, metric) = match pack {
            Ok(p) => p,
            Err(e) => {
                ricci.push(Err(e), (rho, zeta));
                continue;
            }
        };
        ricci.push(Ok(pack.ricci_norm() / pack.riemann_norm()), (rho, zeta));
        let fields = tod_fields(rods, rho, zeta, 2);
        let split = tod_orientation(rods, rho, zeta).map(|o| weyl_split(&pack, o));
        lam.push(
            split.as_ref().map_err(|e| e.clone()).and_then(|w| {
                let z = fields.as_ref().map_err(|e| e.clone())?.z.value();
                let l = w.lambda.ok_or_else(|| Error::Degenerate("no simple self-dual eigenvalue".into()))?;
                Ok(rel(l * z.powi(3), -2.0 * c))
            }),
            (rho, zeta),
        );
        spec.push(
            split.as_ref().map_err(|e| e.clone()).and_then(|w| {
                let l = w.lambda.ok_or_else(|| Error::Degenerate("no simple self-dual eigenvalue".into()))?;
                let pair: Vec<f64> = w.sd_eigenvalues.iter().copied().filter(|e| (e - l).abs() > 1e-9 * l.abs()).collect();
                if pair.len() != 2 {
                    return Err(Error::Degenerate(format!("spectrum {:?}", w.sd_eigenvalues)));
                }
                Ok(pair.iter().map(|e| (e + l / 2.0).abs()).fold(0.0, f64::max) / l.abs())
            }),
            (rho, zeta),
        );
        conf.push(
            fields.as_ref().map_err(|e| e.clone()).and_then(|f| {
                let omega = f.z.recip();
                let o = omega.value();
                let lap = scalar_laplacian(&metric, &omega)?;
                Ok((lap + 2.0 * c * o.powi(4)).abs() / (2.0 * c * o.powi(4)).abs())
            }),
            (rho, zeta),
        );
    }
    vec![
        ricci.finish(opt.tol("ricci_ratio")),
        lam.finish(opt.tol("lambda_z3")),
        spec.finish(opt.tol("sd_spectrum")),
        conf.finish(opt.tol("conformal_factor")),
    ]
}

fn rods_checks(rods: &RodData, opt: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    let structure = rod_vectors(rods);
    if rods.n() < 2 {
        out.push(skip("gl2z_integrality", "needs at least two turning points"));
    } else {
        match gl2z_compatibility(&structure) {
            Ok(rep) => {
                let worst = rep
                    .relations
                    .iter()
                    .map(|r| (r.l_value - r.l_value.round()).abs().max((r.epsilon_value.abs() - 1.0).abs()))
                    .fold(0.0, f64::max);
                let tol = opt.tol("gl2z_integrality");
                out.push(Check {
                    name: "gl2z_integrality".into(),
                    status: if rep.compatible && worst <= tol { Status::Pass } else { Status::Fail },
                    measured: Some(worst),
                    tolerance: Some(tol),
                    location: rep
                        .relations
                        .iter()
                        .map(|r| format!("j={}: l={:.12}, eps={:.12}", r.j, r.l_value, r.epsilon_value))
                        .collect::<Vec<_>>()
                        .join("; "),
                });
            }
            Err(e) => out.push(Check {
                name: "gl2z_integrality".into(),
                status: Status::Fail,
                measured: None,
                tolerance: None,
                location: e.to_string(),
            }),
        }
    }
    let class = asymptotic_class(&structure);
    out.push(Check {
        name: "lens_label".into(),
        status: if matches!(class, AsymptoticClass::Lens { .. }) { Status::Pass } else { Status::Fail },
        measured: None,
        tolerance: None,
        location: match class {
            AsymptoticClass::Lens { p, q } => format!("L({p},{q})"),
            AsymptoticClass::ParallelEnds => "parallel end rod vectors".into(),
            AsymptoticClass::NonIntegral { det } => format!("non-integral end determinant {det:.12}"),
        },
    });
    let samples = default_rho_samples(rods);
    let tol = opt.tol("conical");
    for i in 0..=rods.n() {
        let name = format!("conical_rod_{i}");
        out.push(match conical_check(rods, i, &samples) {
            Ok(r) => Check {
                name,
                status: if (r.limit - 1.0).abs() <= tol { Status::Pass } else { Status::Fail },
                measured: Some((r.limit - 1.0).abs()),
                tolerance: Some(tol),
                location: format!("limit={:.12}", r.limit),
            },
            Err(e) => Check {
                name,
                status: Status::Fail,
                measured: None,
                tolerance: Some(tol),
                location: e.to_string(),
            },
        });
    }
    out
}

fn cky_checks(rods: &RodData, pts: &[(f64, f64)], opt: &VerifyOptions) -> Vec<Check> {
    let mut res = Worst::new("cky_residual");
    let mut xi = Worst::new("cky_xi");
    let mut kill = Worst::new("killing_defect");
    for &(rho, zeta) in pts {
        let pair = tod_metric(rods, rho, zeta).and_then(|m| Ok((tod_cky_candidate(rods, rho, zeta)?, m)));
        let (z, m) = match pair {
            Ok(p) => p,
            Err(e) => {
                res.push(Err(e), (rho, zeta));
                continue;
            }
        };
        let r = cky_residual(&m, &z);
        res.push(r.as_ref().map(|r| r.relative).map_err(|e| e.clone()), (rho, zeta));
        xi.push(
            r.map(|r| {
                let want = [1.0, 0.0, 0.0, 0.0];
                (0..4).map(|a| (r.xi[a] - want[a]).abs()).fold(0.0, f64::max)
            }),
            (rho, zeta),
        );
        kill.push(killing_defect(&m, &z), (rho, zeta));
    }
    let mut out = vec![
        res.finish(opt.tol("cky_residual")),
        xi.finish(opt.tol("cky_xi")),
        kill.finish(opt.tol("killing_defect")),
    ];
    let tol = opt.tol("cky_decay_exponent");
    let radii = [1e2, 2e2, 5e2, 1e3, 2e3, 5e3, 1e4];
    out.push(match cky_decay_check(rods, &radii, DEFAULT_DECAY_THETA) {
        Ok(r) if r.degenerate => skip("cky_decay_exponent", "degenerate: Z agrees with the flat family"),
        Ok(r) => match r.exponent {
            Some(e) => Check {
                name: "cky_decay_exponent".into(),
                status: if (e + 2.0).abs() <= tol { Status::Pass } else { Status::Fail },
                measured: Some(e),
                tolerance: Some(tol),
                location: format!("theta={}, r in [1e2, 1e4], chirality={}", r.theta, r.chirality),
            },
            None => skip("cky_decay_exponent", "no fit points"),
        },
        Err(e) => Check {
            name: "cky_decay_exponent".into(),
            status: Status::Fail,
            measured: None,
            tolerance: Some(tol),
            location: e.to_string(),
        },
    });
    out
}

/// Runs a suite on validated rod data; `input` is the raw file for the hash.
pub fn verify(rods: &RodData, suite: Suite, input: &[u8], opt: &VerifyOptions) -> VerificationReport {
    let meta = Metadata::new(input, opt.seed);
    if rods.n() == 1 {
        let degenerate = verify_n1_degenerate(rods);
        let check = Check {
            name: "w_identically_zero".into(),
            status: Status::Fail,
            measured: degenerate.as_ref().ok().map(|r| r.relative),
            tolerance: None,
            location: match degenerate {
                Ok(r) => format!(
                    "single turning point: W vanishes identically (max|W| / scale = {:.3e} over {} samples)",
                    r.relative, r.samples
                ),
                Err(e) => e.to_string(),
            },
        };
        return VerificationReport::new(suite.name(), vec![check], Some(CODE_W_IDENTICALLY_ZERO.into()), meta);
    }
    let pts = sample_points(rods, opt.samples, opt.seed);
    let mut checks = Vec::new();
    if matches!(suite, Suite::Fields | Suite::All) {
        checks.extend(fields_checks(rods, &pts, opt));
    }
    if matches!(suite, Suite::Curvature | Suite::All) {
        checks.extend(curvature_checks(rods, &pts, opt));
    }
    if matches!(suite, Suite::Rods | Suite::All) {
        checks.extend(rods_checks(rods, opt));
    }
    if matches!(suite, Suite::Cky | Suite::All) {
        checks.extend(cky_checks(rods, &pts, opt));
    }
    VerificationReport::new(suite.name(), checks, None, meta)
}
