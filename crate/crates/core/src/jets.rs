//! Truncated bivariate Taylor jets.
//!
//! A `Jet2` stores the raw partial derivatives `∂_1^i ∂_2^j f` at a base point
//! for every `i + j <= order`. Binary operations between jets of different
//! orders truncate to the smaller order.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{Float, FromPrimitive, Num, NumCast};

use crate::error::{Error, Result};

/// Scalars supporting the elementary functions.
pub trait Real: Float + FromPrimitive + Debug + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        // NumCast rather than FromPrimitive: the latter truncates for some
        // extended-precision types
        <Self as NumCast>::from(x).expect("finite literal")
    }
}

impl<T: Float + FromPrimitive + Debug + Send + Sync + 'static> Real for T {}

pub const DEFAULT_ORDER: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    First,
    Second,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jet2<T> {
    order: usize,
    c: Vec<T>,
}

#[inline]
fn idx(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

fn len_for(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

fn int<T: Num + Clone>(n: usize) -> T {
    let mut acc = T::zero();
    let mut p = T::one();
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            acc = acc + p.clone();
        }
        p = p.clone() + p;
        k >>= 1;
    }
    acc
}

fn binomials<T: Num + Clone>(n: usize) -> Vec<Vec<T>> {
    let mut b = vec![vec![T::one()]];
    for m in 1..=n {
        let prev = &b[m - 1];
        let mut row = vec![T::one(); m + 1];
        for k in 1..m {
            row[k] = prev[k - 1].clone() + prev[k].clone();
        }
        b.push(row);
    }
    b
}

impl<T: Num + Clone> Jet2<T> {
    pub fn constant(value: T, order: usize) -> Self {
        let mut c = vec![T::zero(); len_for(order)];
        c[0] = value;
        Jet2 { order, c }
    }

    pub fn seed(which: Var, value: T, order: usize) -> Self {
        let mut j = Self::constant(value, order);
        if order >= 1 {
            match which {
                Var::First => j.c[idx(1, 0)] = T::one(),
                Var::Second => j.c[idx(0, 1)] = T::one(),
            }
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> T {
        self.c[0].clone()
    }

    /// Coefficient `∂_1^i ∂_2^j`; zero beyond the stored order.
    pub fn get(&self, i: usize, j: usize) -> T {
        if i + j <= self.order {
            self.c[idx(i, j)].clone()
        } else {
            T::zero()
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(i + j <= self.order, "coefficient beyond jet order");
        self.c[idx(i, j)] = v;
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Jet2 {
            order,
            c: self.c[..len_for(order)].to_vec(),
        }
    }

    /// Partial derivative; the result has order `order - 1`.
    pub fn partial(&self, which: Var) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let mut out = Self::constant(T::zero(), order);
        for d in 0..=order {
            for j in 0..=d {
                let i = d - j;
                let v = match which {
                    Var::First => self.get(i + 1, j),
                    Var::Second => self.get(i, j + 1),
                };
                out.c[idx(i, j)] = v;
            }
        }
        out
    }

    pub fn map_coeffs<U, F: Fn(&T) -> U>(&self, f: F) -> Jet2<U> {
        Jet2 {
            order: self.order,
            c: self.c.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map_coeffs(|x| x.clone() * s.clone())
    }

    pub fn add_scalar(&self, s: &T) -> Self {
        let mut out = self.clone();
        out.c[0] = out.c[0].clone() + s.clone();
        out
    }

    fn zip(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        let order = self.order.min(other.order);
        let n = len_for(order);
        Jet2 {
            order,
            c: (0..n)
                .map(|k| f(self.c[k].clone(), other.c[k].clone()))
                .collect(),
        }
    }

    pub fn mul_jet(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let b = binomials::<T>(order);
        let mut out = Self::constant(T::zero(), order);
        for d in 0..=order {
            for j in 0..=d {
                let i = d - j;
                let mut acc = T::zero();
                for k in 0..=i {
                    for l in 0..=j {
                        let w = b[i][k].clone() * b[j][l].clone();
                        acc = acc
                            + w * self.c[idx(k, l)].clone() * other.c[idx(i - k, j - l)].clone();
                    }
                }
                out.c[idx(i, j)] = acc;
            }
        }
        out
    }

    /// Quotient solved degree by degree; exact over exact scalars.
    pub fn try_div(&self, other: &Self) -> Result<Self> {
        if other.c[0] == T::zero() {
            return Err(Error::Singular);
        }
        let order = self.order.min(other.order);
        let b = binomials::<T>(order);
        let mut q = Self::constant(T::zero(), order);
        let b00 = other.c[0].clone();
        for d in 0..=order {
            for j in 0..=d {
                let i = d - j;
                let mut acc = self.c[idx(i, j)].clone();
                for k in 0..=i {
                    for l in 0..=j {
                        if k == 0 && l == 0 {
                            continue;
                        }
                        let w = b[i][k].clone() * b[j][l].clone();
                        acc = acc - w * other.c[idx(k, l)].clone() * q.c[idx(i - k, j - l)].clone();
                    }
                }
                q.c[idx(i, j)] = acc / b00.clone();
            }
        }
        Ok(q)
    }

    pub fn try_recip(&self) -> Result<Self> {
        Self::constant(T::one(), self.order).try_div(self)
    }

    pub fn powi(&self, n: usize) -> Self {
        let mut out = Self::constant(T::one(), self.order);
        for _ in 0..n {
            out = out.mul_jet(self);
        }
        out
    }

    /// Evaluates the Taylor polynomial of `self` at the base point displaced by
    /// the jets `(u, v)`, whose values must be zero. The result has the order of `u`.
    pub fn compose(&self, u: &Self, v: &Self) -> Self {
        let order = u.order.min(v.order);
        let u = u.truncate(order);
        let v = v.truncate(order);
        let upow: Vec<Self> = (0..=self.order).scan(Self::constant(T::one(), order), |p, _| {
            let cur = p.clone();
            *p = p.mul_jet(&u);
            Some(cur)
        }).collect();
        let vpow: Vec<Self> = (0..=self.order).scan(Self::constant(T::one(), order), |p, _| {
            let cur = p.clone();
            *p = p.mul_jet(&v);
            Some(cur)
        }).collect();
        let mut fact = vec![T::one()];
        for k in 1..=self.order {
            let f = fact[k - 1].clone() * int::<T>(k);
            fact.push(f);
        }
        let mut out = Self::constant(T::zero(), order);
        for d in 0..=self.order.min(order) {
            for j in 0..=d {
                let i = d - j;
                let coef = self.c[idx(i, j)].clone() / (fact[i].clone() * fact[j].clone());
                if coef == T::zero() {
                    continue;
                }
                out = out + upow[i].mul_jet(&vpow[j]).scale(&coef);
            }
        }
        out
    }
}

/// Inverts the local map `p -> (f0(p), f1(p))` given as jets at `p0`. Returns
/// the displacement `p - p0` as jets in the image coordinates at `f(p0)`; the
/// returned values are therefore zero (see `with_value`).
pub fn invert_map<T: Num + Clone>(f0: &Jet2<T>, f1: &Jet2<T>) -> Result<(Jet2<T>, Jet2<T>)> {
    let order = f0.order.min(f1.order);
    let (a, b, c, d) = (f0.get(1, 0), f0.get(0, 1), f1.get(1, 0), f1.get(0, 1));
    let det = a.clone() * d.clone() - b.clone() * c.clone();
    if det == T::zero() {
        return Err(Error::Singular);
    }
    let inv = [
        [d / det.clone(), T::zero() - b / det.clone()],
        [T::zero() - c / det.clone(), a / det],
    ];
    let dq0 = Jet2::seed(Var::First, T::zero(), order);
    let dq1 = Jet2::seed(Var::Second, T::zero(), order);
    let lin = |x: &Jet2<T>, y: &Jet2<T>| {
        (
            x.scale(&inv[0][0]) + y.scale(&inv[0][1]),
            x.scale(&inv[1][0]) + y.scale(&inv[1][1]),
        )
    };
    // nonlinear remainders of f
    let strip = |f: &Jet2<T>| {
        let mut g = f.clone();
        g.c[0] = T::zero();
        if g.order >= 1 {
            g.c[idx(1, 0)] = T::zero();
            g.c[idx(0, 1)] = T::zero();
        }
        g
    };
    let (n0, n1) = (strip(f0), strip(f1));
    let (mut h0, mut h1) = lin(&dq0, &dq1);
    for _ in 1..order {
        let r0 = dq0.clone() - n0.compose(&h0, &h1);
        let r1 = dq1.clone() - n1.compose(&h0, &h1);
        let next = lin(&r0, &r1);
        h0 = next.0;
        h1 = next.1;
    }
    Ok((h0, h1))
}

impl<T: Num + Clone> Jet2<T> {
    pub fn with_value(&self, v: T) -> Self {
        let mut out = self.clone();
        out.c[0] = v;
        out
    }
}

impl<T: Real> Jet2<T> {
    pub fn from_f64(j: &Jet2<f64>) -> Self {
        j.map_coeffs(|&x| T::lit(x))
    }

    pub fn to_f64(&self) -> Jet2<f64> {
        self.map_coeffs(|x| x.to_f64().unwrap_or(f64::NAN))
    }

    /// Composes a univariate function given its derivatives at the base value.
    pub fn compose_univariate(&self, derivs: &[T]) -> Self {
        let mut h = self.clone();
        h.c[0] = T::zero();
        let mut out = Self::constant(derivs[0], self.order);
        let mut pow = Self::constant(T::one(), self.order);
        let mut fact = T::one();
        for (k, dk) in derivs.iter().enumerate().take(self.order + 1).skip(1) {
            pow = pow.mul_jet(&h);
            fact = fact * T::lit(k as f64);
            out = out + pow.scale(&(*dk / fact));
        }
        out
    }

    pub fn ln(&self) -> Self {
        let a = self.value();
        let mut d = vec![a.ln()];
        let mut p = T::one();
        for k in 1..=self.order {
            p = p / a;
            let sign = if k % 2 == 1 { T::one() } else { -T::one() };
            d.push(sign * factorial::<T>(k - 1) * p);
        }
        self.compose_univariate(&d)
    }

    pub fn sqrt(&self) -> Self {
        let a = self.value();
        let s = a.sqrt();
        let mut d = vec![s];
        let mut coef = T::one();
        let mut p = s;
        for k in 1..=self.order {
            coef = coef * (T::lit(0.5) - T::lit((k - 1) as f64));
            p = p / a;
            d.push(coef * p);
        }
        self.compose_univariate(&d)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose_univariate(&vec![e; self.order + 1])
    }

    pub fn artanh(&self) -> Self {
        let x = self.value();
        let (p, m) = (T::one() + x, T::one() - x);
        let mut d = vec![T::lit(0.5) * (p.ln() - m.ln())];
        let (mut ip, mut im) = (T::one(), T::one());
        for k in 1..=self.order {
            ip = ip / p;
            im = im / m;
            let sign = if k % 2 == 1 { T::one() } else { -T::one() };
            d.push(T::lit(0.5) * factorial::<T>(k - 1) * (sign * ip + im));
        }
        self.compose_univariate(&d)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cyc = [s, c, -s, -c];
        self.compose_univariate(&(0..=self.order).map(|k| cyc[k % 4]).collect::<Vec<_>>())
    }

    pub fn cos(&self) -> Self {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cyc = [c, -s, -c, s];
        self.compose_univariate(&(0..=self.order).map(|k| cyc[k % 4]).collect::<Vec<_>>())
    }

    pub fn recip(&self) -> Self {
        Self::constant(T::one(), self.order).try_div(self).unwrap_or_else(|_| {
            self.map_coeffs(|_| T::nan())
        })
    }

    pub fn try_ln(&self) -> Result<Self> {
        let v = self.value();
        if v > T::zero() {
            Ok(self.ln())
        } else {
            Err(domain("log", v))
        }
    }

    pub fn try_sqrt(&self) -> Result<Self> {
        let v = self.value();
        if v > T::zero() {
            Ok(self.sqrt())
        } else {
            Err(domain("sqrt", v))
        }
    }

    pub fn try_exp(&self) -> Result<Self> {
        let v = self.value();
        if v.is_finite() {
            Ok(self.exp())
        } else {
            Err(domain("exp", v))
        }
    }

    pub fn try_artanh(&self) -> Result<Self> {
        let v = self.value();
        if v.abs() < T::one() {
            Ok(self.artanh())
        } else {
            Err(domain("artanh", v))
        }
    }
}

fn domain<T: Real>(func: &'static str, v: T) -> Error {
    Error::Domain {
        func,
        value: v.to_f64().unwrap_or(f64::NAN),
    }
}

fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::lit(k as f64))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElemFn {
    Log,
    Sqrt,
    Exp,
    Artanh,
}

pub fn jet_arith<T: Num + Clone>(op: ArithOp, a: &Jet2<T>, b: &Jet2<T>) -> Result<Jet2<T>> {
    Ok(match op {
        ArithOp::Add => a.zip(b, |x, y| x + y),
        ArithOp::Sub => a.zip(b, |x, y| x - y),
        ArithOp::Mul => a.mul_jet(b),
        ArithOp::Div => a.try_div(b)?,
    })
}

pub fn jet_elem<T: Real>(f: ElemFn, a: &Jet2<T>) -> Result<Jet2<T>> {
    match f {
        ElemFn::Log => a.try_ln(),
        ElemFn::Sqrt => a.try_sqrt(),
        ElemFn::Exp => a.try_exp(),
        ElemFn::Artanh => a.try_artanh(),
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<T: Num + Clone> $tr<Jet2<T>> for Jet2<T> {
            type Output = Jet2<T>;
            fn $m(self, rhs: Jet2<T>) -> Jet2<T> {
                let f: fn(&Jet2<T>, &Jet2<T>) -> Jet2<T> = $body;
                f(&self, &rhs)
            }
        }
        impl<'a, T: Num + Clone> $tr<&'a Jet2<T>> for &'a Jet2<T> {
            type Output = Jet2<T>;
            fn $m(self, rhs: &'a Jet2<T>) -> Jet2<T> {
                let f: fn(&Jet2<T>, &Jet2<T>) -> Jet2<T> = $body;
                f(self, rhs)
            }
        }
        impl<'a, T: Num + Clone> $tr<&'a Jet2<T>> for Jet2<T> {
            type Output = Jet2<T>;
            fn $m(self, rhs: &'a Jet2<T>) -> Jet2<T> {
                let f: fn(&Jet2<T>, &Jet2<T>) -> Jet2<T> = $body;
                f(&self, rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.zip(b, |x, y| x + y));
binop!(Sub, sub, |a, b| a.zip(b, |x, y| x - y));
binop!(Mul, mul, |a, b| a.mul_jet(b));
binop!(Div, div, |a, b| a
    .try_div(b)
    .unwrap_or_else(|_| a.map_coeffs(|_| T::zero() / T::zero())));

impl<T: Num + Clone> Neg for Jet2<T> {
    type Output = Jet2<T>;
    fn neg(self) -> Jet2<T> {
        self.map_coeffs(|x| T::zero() - x.clone())
    }
}

impl<T: Num + Clone> Neg for &Jet2<T> {
    type Output = Jet2<T>;
    fn neg(self) -> Jet2<T> {
        self.map_coeffs(|x| T::zero() - x.clone())
    }
}

/// Scalar operations on the right: `jet * s`, `jet + s`, etc.
impl<T: Num + Clone> Jet2<T> {
    pub fn mul_s(&self, s: T) -> Self {
        self.scale(&s)
    }
    pub fn add_s(&self, s: T) -> Self {
        self.add_scalar(&s)
    }
    pub fn div_s(&self, s: T) -> Self {
        self.map_coeffs(|x| x.clone() / s.clone())
    }
}
