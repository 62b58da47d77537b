//! Exact case analysis of toric Hermitian ALE rod data.
//!
//! Slopes of `f` on the rods are `−1 = f'_0 < f'_1 < … < f'_n = 1`. At each
//! interior rod `j` the gluing relation `v_{j−1} + ε_j v_{j+1} = l_j v_j`
//! splits into a slope equation and an equation for the values `f_j = f(z_j)`.
//! Every branch either ends in an admissible family or in a certificate naming
//! the inequality it contradicts.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::{Mode, RodData};
use crate::tod::tod_fields_via_v;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn qi(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum SlopeSign {
    Neg,
    Zero,
    Pos,
}

impl SlopeSign {
    fn symbol(self) -> char {
        match self {
            SlopeSign::Neg => '-',
            SlopeSign::Zero => '0',
            SlopeSign::Pos => '+',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Asymptotics {
    Ale,
    /// Also lists lattices that would only fit asymptotically flat ends.
    Af,
}

/// Exact slope data of a candidate rod structure.
#[derive(Clone, Debug, PartialEq)]
pub struct SlopeData {
    pub n: usize,
    /// `f'_0..f'_n`.
    pub slopes: Vec<BigRational>,
    /// `f_1..f_n`, the values of `f` at the turning points.
    pub values: Vec<BigRational>,
    pub positions: Vec<BigRational>,
    /// `l_1..l_{n−1}`.
    pub levels: Vec<i64>,
    /// `ε_1..ε_{n−1}`.
    pub signs: Vec<i8>,
}

impl SlopeData {
    /// Slopes and values from positions and weights with `f(ζ) = Σ a_i |ζ − z_i|`.
    pub fn from_weights(z: &[BigRational], a: &[BigRational], levels: Vec<i64>, signs: Vec<i8>) -> Result<Self> {
        if z.is_empty() || z.len() != a.len() {
            return Err(Error::InvalidRodData("positions and weights must match".into()));
        }
        let total = a.iter().fold(BigRational::zero(), |s, x| s + x);
        let mut slopes = vec![-total];
        for k in 0..a.len() {
            let next = &slopes[k] + qi(2) * &a[k];
            slopes.push(next);
        }
        let values = z
            .iter()
            .map(|zi| z.iter().zip(a).fold(BigRational::zero(), |s, (zk, ak)| s + ak * (zi - zk).abs()))
            .collect();
        Ok(SlopeData {
            n: z.len(),
            slopes,
            values,
            positions: z.to_vec(),
            levels,
            signs,
        })
    }

    pub fn from_rods(rods: &RodData, levels: Vec<i64>, signs: Vec<i8>) -> Result<Self> {
        let ex = rods
            .exact()
            .ok_or_else(|| Error::Precondition("exact rod data required".into()))?;
        Self::from_weights(&ex.z, &ex.a, levels, signs)
    }

    fn f(&self, j: usize) -> &BigRational {
        &self.values[j - 1]
    }
}

/// Exact residuals of the regularity equations at interior rod `j`.
/// Nonzero slope: `f'_{j−1} + ε f'_{j+1} − l f'_j` and
/// `f_{j+1}² (f'_{j+1} − f'_j) − f_j² (f'_j − f'_{j−1})`.
/// Zero slope: `f'_{j−1} + ε f'_{j+1}` and `2 f'_{j+1} (z_{j+1} − z_j) − (2 + l) f_j`.
pub fn regularity_residuals(data: &SlopeData, j: usize) -> Result<(BigRational, BigRational)> {
    if j == 0 || j >= data.n {
        return Err(Error::Precondition(format!("rod {j} is not interior")));
    }
    let s = &data.slopes;
    let l = qi(data.levels[j - 1]);
    let eps = qi(data.signs[j - 1] as i64);
    let first = &s[j - 1] + &eps * &s[j + 1] - &l * &s[j];
    let second = if s[j].is_zero() {
        qi(2) * &s[j + 1] * (&data.positions[j] - &data.positions[j - 1]) - (qi(2) + l) * data.f(j)
    } else {
        let (fj, fn_) = (data.f(j), data.f(j + 1));
        fn_ * fn_ * (&s[j + 1] - &s[j]) - fj * fj * (&s[j] - &s[j - 1])
    };
    Ok((first, second))
}

/// End of an interval; `None` is infinite.
#[derive(Clone, Debug, PartialEq)]
struct End {
    v: Option<BigRational>,
    closed: bool,
}

impl End {
    fn inf() -> Self {
        End { v: None, closed: false }
    }
    fn at(v: BigRational, closed: bool) -> Self {
        End { v: Some(v), closed }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Interval {
    lo: End,
    hi: End,
}

impl Interval {
    fn point(v: BigRational) -> Self {
        Interval {
            lo: End::at(v.clone(), true),
            hi: End::at(v, true),
        }
    }
    fn open(lo: Option<BigRational>, hi: Option<BigRational>) -> Self {
        Interval {
            lo: lo.map_or(End::inf(), |v| End::at(v, false)),
            hi: hi.map_or(End::inf(), |v| End::at(v, false)),
        }
    }
    fn all() -> Self {
        Self::open(None, None)
    }

    fn add(&self, o: &Interval) -> Interval {
        let f = |a: &End, b: &End| match (&a.v, &b.v) {
            (Some(x), Some(y)) => End::at(x + y, a.closed && b.closed),
            _ => End::inf(),
        };
        Interval {
            lo: f(&self.lo, &o.lo),
            hi: f(&self.hi, &o.hi),
        }
    }

    fn neg(&self) -> Interval {
        let f = |e: &End| End {
            v: e.v.as_ref().map(|x| -x),
            closed: e.closed,
        };
        Interval {
            lo: f(&self.hi),
            hi: f(&self.lo),
        }
    }

    fn is_point_zero(&self) -> bool {
        matches!((&self.lo.v, &self.hi.v), (Some(a), Some(b)) if a.is_zero() && b.is_zero())
    }

    /// `self / d` for `d ⊂ (0, h)` with `h` finite, the lower end of `d` open at zero.
    fn div_pos(&self, d: &Interval) -> Interval {
        if self.is_point_zero() {
            return self.clone();
        }
        let dh = d.hi.v.clone().expect("bounded divisor");
        let lo_nonneg = self.lo.v.as_ref().is_some_and(|v| !v.is_negative());
        let hi_nonpos = self.hi.v.as_ref().is_some_and(|v| !v.is_positive());
        if lo_nonneg {
            let a = self.lo.v.clone().unwrap();
            Interval {
                lo: End::at(&a / &dh, self.lo.closed && (a.is_zero() || d.hi.closed)),
                hi: End::inf(),
            }
        } else if hi_nonpos {
            let b = self.hi.v.clone().unwrap();
            Interval {
                lo: End::inf(),
                hi: End::at(&b / &dh, self.hi.closed && (b.is_zero() || d.hi.closed)),
            }
        } else {
            Interval::all()
        }
    }

    fn div(&self, d: &Interval) -> Interval {
        if d.lo.v.as_ref().is_some_and(|v| !v.is_negative()) {
            self.div_pos(d)
        } else {
            self.neg().div_pos(&d.neg())
        }
    }

    fn intersect(&self, o: &Interval) -> Interval {
        let lo = match (&self.lo.v, &o.lo.v) {
            (None, _) => o.lo.clone(),
            (_, None) => self.lo.clone(),
            (Some(a), Some(b)) => {
                if a > b || (a == b && !self.lo.closed) {
                    self.lo.clone()
                } else {
                    o.lo.clone()
                }
            }
        };
        let hi = match (&self.hi.v, &o.hi.v) {
            (None, _) => o.hi.clone(),
            (_, None) => self.hi.clone(),
            (Some(a), Some(b)) => {
                if a < b || (a == b && !self.hi.closed) {
                    self.hi.clone()
                } else {
                    o.hi.clone()
                }
            }
        };
        Interval { lo, hi }
    }

    /// Integers in the interval, or `None` when unbounded.
    fn integers(&self) -> Option<Vec<i64>> {
        let (a, b) = (self.lo.v.as_ref()?, self.hi.v.as_ref()?);
        let mut lo = a.ceil().to_integer().to_i64()?;
        if !self.lo.closed && a.is_integer() {
            lo += 1;
        }
        let mut hi = b.floor().to_integer().to_i64()?;
        if !self.hi.closed && b.is_integer() {
            hi -= 1;
        }
        Some((lo..=hi).collect())
    }

    fn integers_bounded(&self, bound: i64) -> (Vec<i64>, bool) {
        match self.integers() {
            Some(v) => (v, false),
            None => {
                let clip = self.intersect(&Interval {
                    lo: End::at(qi(-bound), true),
                    hi: End::at(qi(bound), true),
                });
                (clip.integers().unwrap_or_default(), true)
            }
        }
    }

    fn render(&self) -> String {
        let lo = match &self.lo.v {
            None => "(-inf".to_string(),
            Some(v) => format!("{}{}", if self.lo.closed { '[' } else { '(' }, v),
        };
        let hi = match &self.hi.v {
            None => "+inf)".to_string(),
            Some(v) => format!("{}{}", v, if self.hi.closed { ']' } else { ')' }),
        };
        format!("{lo}, {hi}")
    }
}

fn slope_interval(pattern: &[SlopeSign], k: usize) -> Interval {
    let n = pattern.len() + 1;
    if k == 0 {
        return Interval::point(qi(-1));
    }
    if k == n {
        return Interval::point(qi(1));
    }
    match pattern[k - 1] {
        SlopeSign::Neg => Interval::open(Some(qi(-1)), Some(qi(0))),
        SlopeSign::Zero => Interval::point(qi(0)),
        SlopeSign::Pos => Interval::open(Some(qi(0)), Some(qi(1))),
    }
}

fn sign_of(pattern: &[SlopeSign], k: usize) -> SlopeSign {
    if k == 0 {
        SlopeSign::Neg
    } else if k == pattern.len() + 1 {
        SlopeSign::Pos
    } else {
        pattern[k - 1]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Family {
    pub n: usize,
    pub pattern: String,
    pub slopes: Vec<String>,
    pub weights: Vec<String>,
    pub levels: Vec<i64>,
    pub epsilons: Vec<i8>,
    pub lattice: Vec<[i64; 2]>,
    pub lens: [i64; 2],
    /// Turning points of a representative, unique up to translation and scale.
    pub representative_z: Vec<String>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub branch: String,
    pub kind: String,
    pub detail: String,
    /// Rejected sign choices along the way.
    pub sub: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InfoFamily {
    pub branch: String,
    pub lattice: Vec<[i64; 2]>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassifyReport {
    pub asymptotics: Asymptotics,
    pub n_max: usize,
    pub l_bound: i64,
    pub families: Vec<Family>,
    pub certificates: Vec<Certificate>,
    pub informational: Vec<InfoFamily>,
    /// Branches whose level range was cut by `l_bound`; zero when the pinch bounds suffice.
    pub l_bound_hits: usize,
}

fn patterns(n: usize) -> Vec<Vec<SlopeSign>> {
    let m = n - 1;
    let mut out = Vec::new();
    for zero in 0..=1usize.min(m) {
        for neg in 0..=(m - zero) {
            let pos = m - zero - neg;
            let mut p = vec![SlopeSign::Neg; neg];
            p.extend(std::iter::repeat_n(SlopeSign::Zero, zero));
            p.extend(std::iter::repeat_n(SlopeSign::Pos, pos));
            out.push(p);
        }
    }
    out.sort();
    out
}

fn branch_name(n: usize, pattern: &[SlopeSign]) -> String {
    let p: Vec<String> = pattern.iter().map(|s| s.symbol().to_string()).collect();
    format!("n={n} ({})", p.join(","))
}

/// Level data of interior rod `j`: sign `ε_j`, interval for `l_j`, rejected alternatives.
struct LevelStep {
    eps: i8,
    interval: Interval,
    sub: Vec<String>,
    pinch: Option<String>,
}

fn level_step(pattern: &[SlopeSign], j: usize) -> LevelStep {
    let (sp, sj, sn) = (sign_of(pattern, j - 1), sign_of(pattern, j), sign_of(pattern, j + 1));
    let (ip, ij, inx) = (slope_interval(pattern, j - 1), slope_interval(pattern, j), slope_interval(pattern, j + 1));
    let mut sub = Vec::new();
    if sj == SlopeSign::Zero {
        sub.push(format!(
            "j={j}: epsilon=-1 needs f'_{} = f'_{}, impossible with f'_{} < 0 < f'_{}",
            j - 1,
            j + 1,
            j - 1,
            j + 1
        ));
        // l_j is fixed later by the gap equation
        return LevelStep {
            eps: 1,
            interval: Interval::all(),
            sub,
            pinch: None,
        };
    }
    let neighbour_zero = sp == SlopeSign::Zero || sn == SlopeSign::Zero;
    let eps = if neighbour_zero {
        sub.push(format!(
            "j={j}: epsilon=+1 makes the squared bolt value f^2 negative"
        ));
        -1
    } else {
        sub.push(format!(
            "j={j}: epsilon=-1 gives f_{}^2 = -f_{j}^2 (f'_{j} - f'_{})/(f'_{} - f'_{j}) < 0",
            j + 1,
            j - 1,
            j + 1
        ));
        1
    };
    // Q = (f'_{j−1} + f'_{j+1}) / f'_j: termwise bounds
    let one = qi(1);
    let tp = if sj == SlopeSign::Neg {
        // f'_{j−1} < f'_j < 0
        Interval::open(Some(one.clone()), None)
    } else {
        match sp {
            SlopeSign::Pos => Interval::open(Some(qi(0)), Some(one.clone())),
            SlopeSign::Zero => Interval::point(qi(0)),
            SlopeSign::Neg => Interval::open(None, Some(qi(0))),
        }
    };
    let tn = if sj == SlopeSign::Pos {
        Interval::open(Some(one.clone()), None)
    } else {
        match sn {
            SlopeSign::Neg => Interval::open(Some(qi(0)), Some(one.clone())),
            SlopeSign::Zero => Interval::point(qi(0)),
            SlopeSign::Pos => Interval::open(None, Some(qi(0))),
        }
    };
    let termwise = tp.add(&tn);
    let quotient = ip.add(&inx).div(&ij);
    // f_{j+1} ≷ f_j as f'_j ≷ 0 turns the value equation into Q < 2
    let pinch_bound = Interval::open(None, Some(qi(2)));
    let qint = termwise.intersect(&quotient).intersect(&pinch_bound);
    // with a zero left neighbour and ε = −1, l = −Q
    let interval = if sp == SlopeSign::Zero { qint.neg() } else { qint };
    let pinch = match interval.integers() {
        Some(v) if v.is_empty() => Some(format!(
            "j={j}: slope ordering gives {} for (f'_{} + f'_{})/f'_{j} while f_{}/f_{j} {} 1 forces it below 2; l_{j} in {} has no integer value (l_j < 2 and l_j >= 2)",
            termwise.intersect(&quotient).render(),
            j - 1,
            j + 1,
            j + 1,
            if sj == SlopeSign::Pos { ">" } else { "<" },
            interval.render()
        )),
        _ => None,
    };
    LevelStep {
        eps,
        interval,
        sub,
        pinch,
    }
}

/// Gap equation on a bolt for `n = 2`: `f_1 = a_2 (z_2 − z_1)` and `f'_2 = 1` give `l_1 = 2/a_2 − 2`.
fn bolt_level(n: usize, slopes: &[BigRational]) -> Option<BigRational> {
    if n != 2 {
        return None;
    }
    let a2 = (&slopes[2] - &slopes[1]) / qi(2);
    Some(qi(2) * &slopes[2] / a2 - qi(2))
}

fn propagate(levels: &[i64], eps: &[i8]) -> Vec<[i64; 2]> {
    let mut v = vec![[0i64, 1], [1, 0]];
    for j in 1..=levels.len() {
        let (l, e) = (levels[j - 1], eps[j - 1] as i64);
        let nxt = [
            e * (l * v[j][0] - v[j - 1][0]),
            e * (l * v[j][1] - v[j - 1][1]),
        ];
        v.push(nxt);
    }
    v
}

/// Linear system in the interior slopes, solved exactly; returns the unique
/// solution or `Err` with a reason.
fn solve_slopes(pattern: &[SlopeSign], levels: &[i64], eps: &[i8]) -> std::result::Result<Vec<BigRational>, String> {
    let n = pattern.len() + 1;
    // unknowns: interior slopes with nonzero sign
    let unknown: Vec<usize> = (1..n).filter(|&k| pattern[k - 1] != SlopeSign::Zero).collect();
    let col = |k: usize| unknown.iter().position(|&u| u == k);
    let fixed = |k: usize| -> Option<BigRational> {
        if k == 0 {
            Some(qi(-1))
        } else if k == n {
            Some(qi(1))
        } else if pattern[k - 1] == SlopeSign::Zero {
            Some(qi(0))
        } else {
            None
        }
    };
    let m = unknown.len();
    let mut rows: Vec<Vec<BigRational>> = Vec::new();
    for j in 1..n {
        let mut row = vec![qi(0); m + 1];
        let coeffs = [(j - 1, qi(1)), (j + 1, qi(eps[j - 1] as i64)), (j, qi(-levels[j - 1]))];
        for (k, cf) in coeffs {
            match (fixed(k), col(k)) {
                (Some(v), _) => row[m] = &row[m] - cf * v,
                (None, Some(c)) => row[c] = &row[c] + cf,
                _ => unreachable!(),
            }
        }
        rows.push(row);
    }
    // Gauss–Jordan
    let mut piv = Vec::new();
    let mut r = 0;
    for c in 0..m {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for k in 0..=m {
                    let t = &f * &rows[r][k];
                    rows[i][k] = &rows[i][k] - t;
                }
            }
        }
        piv.push(c);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row[m].is_zero()) {
        return Err("slope equations are inconsistent".into());
    }
    let mut full: Vec<BigRational> = (0..=n).map(|k| fixed(k).unwrap_or_else(|| qi(0))).collect();
    if piv.len() < m {
        // free parameters: feasibility of the strict ordering by Fourier–Motzkin
        return fm_feasible(pattern, &rows[..r], &piv, &unknown).map_or_else(
            Err,
            |_| Err("slope family has free parameters; not a rigid branch".into()),
        );
    }
    for (i, &c) in piv.iter().enumerate() {
        full[unknown[c]] = rows[i][m].clone();
    }
    for k in 1..=n {
        if full[k] <= full[k - 1] {
            return Err(format!("solved slopes violate f'_{} < f'_{}", k - 1, k));
        }
        let s = sign_of(pattern, k);
        let ok = match s {
            SlopeSign::Neg => full[k].is_negative(),
            SlopeSign::Zero => full[k].is_zero(),
            SlopeSign::Pos => full[k].is_positive(),
        };
        if !ok {
            return Err(format!("solved slope f'_{k} = {} contradicts its sign", full[k]));
        }
    }
    Ok(full)
}

/// Strict feasibility of ordering constraints on a parametric slope family.
fn fm_feasible(
    pattern: &[SlopeSign],
    rows: &[Vec<BigRational>],
    piv: &[usize],
    unknown: &[usize],
) -> std::result::Result<(), String> {
    let n = pattern.len() + 1;
    let m = unknown.len();
    let free: Vec<usize> = (0..m).filter(|c| !piv.contains(c)).collect();
    // each slope as affine form over free parameters: coeffs[free...], constant
    let affine = |k: usize| -> Vec<BigRational> {
        let mut a = vec![qi(0); free.len() + 1];
        if k == 0 {
            a[free.len()] = qi(-1);
        } else if k == n {
            a[free.len()] = qi(1);
        } else if pattern[k - 1] != SlopeSign::Zero {
            let c = unknown.iter().position(|&u| u == k).unwrap();
            if let Some(fi) = free.iter().position(|&f| f == c) {
                a[fi] = qi(1);
            } else {
                let ri = piv.iter().position(|&p| p == c).unwrap();
                a[free.len()] = rows[ri][m].clone();
                for (fi, &fc) in free.iter().enumerate() {
                    a[fi] = -rows[ri][fc].clone();
                }
            }
        }
        a
    };
    // constraints g > 0
    let mut cons: Vec<Vec<BigRational>> = Vec::new();
    for k in 1..=n {
        let (a, b) = (affine(k), affine(k - 1));
        cons.push(a.iter().zip(&b).map(|(x, y)| x - y).collect());
        match sign_of(pattern, k) {
            SlopeSign::Neg => cons.push(a.iter().map(|x| -x).collect()),
            SlopeSign::Pos => cons.push(a.clone()),
            SlopeSign::Zero => {}
        }
    }
    for v in 0..free.len() {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for c in cons {
            if c[v].is_positive() {
                pos.push(c);
            } else if c[v].is_negative() {
                neg.push(c);
            } else {
                rest.push(c);
            }
        }
        for p in &pos {
            for q in &neg {
                let (a, b) = (p[v].clone(), -q[v].clone());
                rest.push(p.iter().zip(q).map(|(x, y)| &b * x + &a * y).collect());
            }
        }
        cons = rest;
    }
    let last = free.len();
    match cons.iter().find(|c| !c[last].is_positive()) {
        Some(_) => Err("strict slope ordering is infeasible (Fourier-Motzkin)".into()),
        None => Ok(()),
    }
}

fn fmt_q(v: &BigRational) -> String {
    v.to_string()
}

pub fn search_admissible(n_max: usize, l_bound: i64, asymptotics: Asymptotics) -> Result<ClassifyReport> {
    if n_max < 1 || l_bound < 2 {
        return Err(Error::Precondition("n_max >= 1 and l_bound >= 2 required".into()));
    }
    let mut families = Vec::new();
    let mut certificates = Vec::new();
    let mut informational = Vec::new();
    let mut hits = 0;

    // n = 1: V = V0(ρ, ζ − z_1) and W vanishes identically
    let single = RodData::new(-1.0, vec![crate::harmonic::Nut { z: 0.0, a: 1.0 }], Mode::Ale)?;
    let n1 = verify_n1_degenerate(&single)?;
    certificates.push(Certificate {
        branch: "n=1 ()".into(),
        kind: "w_identically_zero".into(),
        detail: format!(
            "A = 0 forces f = |zeta - z_1| and V = V0(rho, zeta - z_1), so W = 0 identically (sampled max |W|/scale = {:.3e})",
            n1.relative
        ),
        sub: vec![],
    });

    for n in 2..=n_max {
        for pattern in patterns(n) {
            let name = branch_name(n, &pattern);
            let steps: Vec<LevelStep> = (1..n).map(|j| level_step(&pattern, j)).collect();
            let sub: Vec<String> = steps.iter().flat_map(|s| s.sub.clone()).collect();
            if let Some(p) = steps.iter().find_map(|s| s.pinch.clone()) {
                certificates.push(Certificate {
                    branch: name,
                    kind: "integer_pinch".into(),
                    detail: p,
                    sub,
                });
                continue;
            }
            let eps: Vec<i8> = steps.iter().map(|s| s.eps).collect();
            // candidate levels per interior rod
            let mut cand: Vec<Vec<i64>> = Vec::new();
            let mut undetermined = false;
            for (idx, s) in steps.iter().enumerate() {
                let j = idx + 1;
                if pattern[j - 1] == SlopeSign::Zero {
                    // slopes around a bolt: f'_{j−1} = −f'_{j+1}
                    let lo = slope_interval(&pattern, j - 1);
                    let hi = slope_interval(&pattern, j + 1);
                    let sl: Option<Vec<BigRational>> = (lo.lo.v == lo.hi.v && hi.lo.v == hi.hi.v)
                        .then(|| vec![lo.lo.v.clone().unwrap(), qi(0), hi.lo.v.clone().unwrap()]);
                    match sl.as_ref().and_then(|sl| bolt_level(n, sl)) {
                        Some(l) if l.is_integer() => cand.push(vec![l.to_integer().to_i64().unwrap()]),
                        Some(l) => {
                            cand.push(vec![]);
                            certificates.push(Certificate {
                                branch: name.clone(),
                                kind: "bolt_gap".into(),
                                detail: format!("gap equation gives l_{j} = {l}, not an integer"),
                                sub: sub.clone(),
                            });
                        }
                        None => {
                            let (v, clipped) = s.interval.integers_bounded(l_bound);
                            undetermined |= clipped;
                            cand.push(v);
                        }
                    }
                } else {
                    let (v, clipped) = s.interval.integers_bounded(l_bound);
                    undetermined |= clipped;
                    cand.push(v);
                }
            }
            if undetermined {
                hits += 1;
            }
            if cand.iter().any(|c| c.is_empty()) {
                continue;
            }
            // cartesian product of level candidates
            let mut tuples: Vec<Vec<i64>> = vec![vec![]];
            for c in &cand {
                tuples = tuples
                    .into_iter()
                    .flat_map(|t| {
                        c.iter().map(move |&l| {
                            let mut t2 = t.clone();
                            t2.push(l);
                            t2
                        })
                    })
                    .collect();
            }
            for levels in tuples {
                let lv: Vec<String> = levels.iter().map(|l| l.to_string()).collect();
                let bname = format!("{name} l=({})", lv.join(","));
                let lattice = propagate(&levels, &eps);
                let (v0, vn) = (lattice[0], lattice[n]);
                let p = (v0[0] * vn[1] - v0[1] * vn[0]).abs();
                if p == 0 {
                    let words = if vn == [-v0[0], -v0[1]] { "v_0 = -v_n" } else { "v_0 = v_n" };
                    certificates.push(Certificate {
                        branch: bname.clone(),
                        kind: "parallel_ends".into(),
                        detail: format!(
                            "{words}: lattice {:?}; semi-infinite rod vectors are parallel, incompatible with ALE asymptotics",
                            lattice
                        ),
                        sub: sub.clone(),
                    });
                    if asymptotics == Asymptotics::Af && n >= 3 {
                        informational.push(InfoFamily {
                            branch: bname,
                            lattice: lattice.clone(),
                            note: "parallel semi-infinite rods: compatible only with AF asymptotics (Chen-Teo-type rod structure)".into(),
                        });
                    }
                    continue;
                }
                let slopes = match solve_slopes(&pattern, &levels, &eps) {
                    Ok(s) => s,
                    Err(e) => {
                        certificates.push(Certificate {
                            branch: bname,
                            kind: "slope_system".into(),
                            detail: e,
                            sub: sub.clone(),
                        });
                        continue;
                    }
                };
                let weights: Vec<BigRational> = (1..=n).map(|k| (&slopes[k] - &slopes[k - 1]) / qi(2)).collect();
                // representative: unit spread, centred at zero, checked against the full equations
                let rep = representative(n, &weights);
                let data = SlopeData::from_weights(&rep, &weights, levels.clone(), eps.clone())?;
                let bad = (1..n)
                    .map(|j| regularity_residuals(&data, j))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .position(|(a, b)| !a.is_zero() || !b.is_zero());
                if let Some(j) = bad {
                    certificates.push(Certificate {
                        branch: bname,
                        kind: "value_equation".into(),
                        detail: format!("value equation fails at j={}", j + 1),
                        sub: sub.clone(),
                    });
                    continue;
                }
                let qv = (-vn[1] * vn[0].signum()).rem_euclid(p);
                families.push(Family {
                    n,
                    pattern: name.clone(),
                    slopes: slopes.iter().map(fmt_q).collect(),
                    weights: weights.iter().map(fmt_q).collect(),
                    levels: levels.clone(),
                    epsilons: eps.clone(),
                    lattice,
                    lens: [p, qv],
                    representative_z: rep.iter().map(fmt_q).collect(),
                    note: "Eguchi-Hanson up to translation and scaling".into(),
                });
            }
        }
    }
    if hits > 0 && asymptotics == Asymptotics::Ale {
        return Err(Error::Degenerate(format!(
            "{hits} branch(es) needed the level bound; the pinch argument did not close"
        )));
    }
    certificates.sort_by(|a, b| a.branch.cmp(&b.branch));
    Ok(ClassifyReport {
        asymptotics,
        n_max,
        l_bound,
        families,
        certificates,
        informational,
        l_bound_hits: hits,
    })
}

/// Turning points `z_1..z_n` with unit spread symmetric about zero.
fn representative(n: usize, _weights: &[BigRational]) -> Vec<BigRational> {
    let half = q(1, 4);
    if n == 1 {
        return vec![qi(0)];
    }
    (0..n)
        .map(|k| -&half + q(1, 2) * q(k as i64, (n - 1) as i64))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct N1Report {
    pub samples: usize,
    /// Largest `|W|` from the textbook `V`-derivative route.
    pub max_abs_w: f64,
    /// Largest magnitude of the cancelling terms `ρ V_ρ / 2|c|`.
    pub scale: f64,
    pub relative: f64,
    pub degenerate: bool,
}

/// Samples `W` for single-nut data on a polar grid around the nut.
pub fn verify_n1_degenerate(rods: &RodData) -> Result<N1Report> {
    if rods.n() != 1 || (rods.weight_sum() - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition("single nut with unit weight required".into()));
    }
    grid_w(rods)
}

fn grid_w(rods: &RodData) -> Result<N1Report> {
    let z0 = rods.nuts()[0].z;
    let c = rods.c();
    let mut max_w: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut samples = 0;
    for i in 0..12 {
        let r = 0.05 * 1.6f64.powi(i);
        for k in 1..12 {
            let th = std::f64::consts::PI * k as f64 / 12.0;
            let (rho, zeta) = (r * th.sin(), z0 + r * th.cos());
            let t = tod_fields_via_v(rods, rho, zeta, 0)?;
            let v = crate::harmonic::build_v(rods, rho, zeta, 1)?;
            max_w = max_w.max(t.w.value().abs());
            scale = scale.max((rho * v.get(1, 0) / (2.0 * c)).abs());
            samples += 1;
        }
    }
    let relative = max_w / scale;
    Ok(N1Report {
        samples,
        max_abs_w: max_w,
        scale,
        relative,
        degenerate: relative < 1e-12,
    })
}

/// Same sampling for any data; used as a control.
pub fn sample_w_magnitude(rods: &RodData) -> Result<N1Report> {
    grid_w(rods)
}
