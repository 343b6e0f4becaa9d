//! Generic truncated Laurent series over a coefficient ring.
//!
//! A `Series<C>` stores the coefficients from its valuation up to (but not
//! including) its absolute precision. Operations propagate precision
//! conservatively, so a coefficient inside the window is always correct.
//! The same code serves `k((t))` (coefficients in a field) and
//! `k((u))((t))` (coefficients that are themselves truncated series).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::coeff::{FieldElem, Rational};
use crate::error::{Error, Result};
use crate::precision::Precision;

pub type Var = Arc<str>;

pub fn var(name: &str) -> Var {
    Arc::from(name)
}

/// Ring operations a series needs from its coefficients.
pub trait Coefficient: Clone + fmt::Debug + PartialEq {
    type Ctx: Clone + fmt::Debug + PartialEq;

    fn ctx(&self) -> Self::Ctx;
    fn zero(ctx: &Self::Ctx) -> Self;
    /// A constant, lifted into the context's scalar field.
    fn constant(ctx: &Self::Ctx, c: &FieldElem) -> Self;
    /// Smallest context containing both, or a mismatch error.
    fn join_ctx(a: &Self::Ctx, b: &Self::Ctx) -> Result<Self::Ctx>;
    fn lift(&self, ctx: &Self::Ctx) -> Result<Self>;
    /// Zero with nothing left unknown.
    fn is_exact_zero(&self) -> bool;
    /// Every known part is zero (nothing certifies it is nonzero).
    fn is_known_zero(&self) -> bool;
    fn c_add(&self, o: &Self) -> Self;
    fn c_sub(&self, o: &Self) -> Self;
    fn c_mul(&self, o: &Self) -> Self;
    fn c_neg(&self) -> Self;
    fn c_scale(&self, q: &Rational) -> Self;
    fn c_inv(&self) -> Result<Self>;
}

impl Coefficient for FieldElem {
    type Ctx = crate::coeff::Field;

    fn ctx(&self) -> Self::Ctx {
        self.field().clone()
    }
    fn zero(ctx: &Self::Ctx) -> Self {
        FieldElem::zero(ctx)
    }
    fn constant(ctx: &Self::Ctx, c: &FieldElem) -> Self {
        c.lift_to(ctx).expect("constant outside the coefficient field")
    }
    fn join_ctx(a: &Self::Ctx, b: &Self::Ctx) -> Result<Self::Ctx> {
        a.join(b)
    }
    fn lift(&self, ctx: &Self::Ctx) -> Result<Self> {
        self.lift_to(ctx)
    }
    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }
    fn is_known_zero(&self) -> bool {
        self.is_zero()
    }
    fn c_add(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn c_sub(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn c_mul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn c_neg(&self) -> Self {
        self.neg()
    }
    fn c_scale(&self, q: &Rational) -> Self {
        self.scale(q)
    }
    fn c_inv(&self) -> Result<Self> {
        self.inv()
    }
}

#[derive(Clone, Debug)]
pub struct Series<C: Coefficient> {
    var: Var,
    ctx: C::Ctx,
    val: i64,
    coeffs: Vec<C>,
    prec: Precision,
}

impl<C: Coefficient> PartialEq for Series<C> {
    fn eq(&self, other: &Self) -> bool {
        self.var == other.var
            && self.ctx == other.ctx
            && self.prec == other.prec
            && self.val == other.val
            && self.coeffs == other.coeffs
    }
}

impl<C: Coefficient> Series<C> {
    /// Builds a series with `coeffs[i]` at exponent `val + i`; coefficients
    /// at or beyond `prec` are discarded and exact zeros trimmed.
    pub fn from_coeffs(var: Var, ctx: C::Ctx, val: i64, coeffs: Vec<C>, prec: Precision) -> Self {
        let mut s = Series { var, ctx, val, coeffs, prec };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        if let Some(p) = self.prec.bound() {
            let keep = (p - self.val).max(0) as usize;
            if self.coeffs.len() > keep {
                self.coeffs.truncate(keep);
            }
        }
        while self.coeffs.last().is_some_and(|c| c.is_exact_zero()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_exact_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.val += lead as i64;
        }
        if self.coeffs.is_empty() {
            self.val = self.prec.bound().unwrap_or(0);
        }
    }

    pub fn zero(var: Var, ctx: C::Ctx, prec: Precision) -> Self {
        Self::from_coeffs(var, ctx, 0, Vec::new(), prec)
    }

    pub fn exact_zero(var: Var, ctx: C::Ctx) -> Self {
        Self::zero(var, ctx, Precision::Exact)
    }

    pub fn monomial(var: Var, ctx: C::Ctx, c: C, e: i64) -> Self {
        Self::from_coeffs(var, ctx, e, vec![c], Precision::Exact)
    }

    pub fn constant(var: Var, ctx: C::Ctx, c: C) -> Self {
        Self::monomial(var, ctx, c, 0)
    }

    pub fn one(var: Var, ctx: C::Ctx) -> Self {
        let c = C::constant(&ctx, &FieldElem::rational(Rational::from_integer(1.into())));
        Self::monomial(var, ctx, c, 0)
    }

    /// `var^e` with unit coefficient.
    pub fn var_power(var: Var, ctx: C::Ctx, e: i64) -> Self {
        let c = C::constant(&ctx, &FieldElem::rational(Rational::from_integer(1.into())));
        Self::monomial(var, ctx, c, e)
    }

    pub fn var(&self) -> &Var {
        &self.var
    }

    pub fn ctx(&self) -> &C::Ctx {
        &self.ctx
    }

    pub fn prec(&self) -> Precision {
        self.prec
    }

    /// Exponent of the first stored coefficient (a lower bound for the
    /// valuation; equal to it when that coefficient is certified nonzero).
    pub fn start(&self) -> i64 {
        self.val
    }

    pub fn stored(&self) -> &[C] {
        &self.coeffs
    }

    /// Iterates `(exponent, coefficient)` over stored coefficients.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> {
        self.coeffs.iter().enumerate().map(move |(i, c)| (self.val + i as i64, c))
    }

    /// One past the last stored exponent.
    pub fn end(&self) -> i64 {
        self.val + self.coeffs.len() as i64
    }

    /// Lower bound for the valuation, `Exact` for the exact zero.
    pub fn lower_bound(&self) -> Precision {
        if self.coeffs.is_empty() {
            self.prec
        } else {
            Precision::Bounded(self.val)
        }
    }

    /// Coefficient at `e`, or `None` if it lies beyond the precision.
    pub fn coeff(&self, e: i64) -> Option<C> {
        if !self.prec.covers(e) {
            return None;
        }
        Some(self.coeff_or_zero(e))
    }

    pub(crate) fn coeff_or_zero(&self, e: i64) -> C {
        if e < self.val || e >= self.end() {
            C::zero(&self.ctx)
        } else {
            self.coeffs[(e - self.val) as usize].clone()
        }
    }

    pub(crate) fn coeff_ref(&self, e: i64) -> Option<&C> {
        if e < self.val || e >= self.end() {
            None
        } else {
            Some(&self.coeffs[(e - self.val) as usize])
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.is_empty() && self.prec.is_exact()
    }

    pub fn is_known_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_known_zero())
    }

    /// Certified valuation.
    pub fn valuation(&self) -> Result<i64> {
        match self.coeffs.first() {
            Some(c) if !c.is_known_zero() => Ok(self.val),
            _ if self.is_exact_zero() => Err(Error::ZeroElement),
            _ => Err(Error::precision(format!(
                "valuation in {} not certified below {}",
                self.var, self.prec
            ))),
        }
    }

    /// Valuation and leading coefficient.
    pub fn leading(&self) -> Result<(i64, &C)> {
        let v = self.valuation()?;
        Ok((v, &self.coeffs[0]))
    }

    /// Lowers the precision to at most `n`.
    pub fn truncate(&self, n: i64) -> Self {
        self.with_prec(Precision::Bounded(n))
    }

    pub fn with_prec(&self, p: Precision) -> Self {
        let mut s = self.clone();
        s.prec = s.prec.min(p);
        s.normalize();
        s
    }

    pub fn rename(&self, v: Var) -> Self {
        let mut s = self.clone();
        s.var = v;
        s
    }

    /// Multiplies by `var^k`.
    pub fn shift(&self, k: i64) -> Self {
        let mut s = self.clone();
        s.val += k;
        s.prec = s.prec.shift(k);
        s
    }

    pub fn map_coeffs<D: Coefficient>(&self, ctx: D::Ctx, f: impl Fn(&C) -> D) -> Series<D> {
        Series::from_coeffs(self.var.clone(), ctx, self.val, self.coeffs.iter().map(f).collect(), self.prec)
    }

    pub fn try_map_coeffs<D: Coefficient>(
        &self,
        ctx: D::Ctx,
        f: impl Fn(&C) -> Result<D>,
    ) -> Result<Series<D>> {
        let coeffs = self.coeffs.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(Series::from_coeffs(self.var.clone(), ctx, self.val, coeffs, self.prec))
    }

    /// Re-expresses the series over a larger coefficient context.
    pub fn lift(&self, ctx: &C::Ctx) -> Result<Self> {
        if &self.ctx == ctx {
            return Ok(self.clone());
        }
        self.try_map_coeffs(ctx.clone(), |c| c.lift(ctx))
    }

    fn compatible(&self, other: &Self) -> Result<(Self, Self)> {
        if self.var != other.var {
            return Err(Error::VariableMismatch(self.var.to_string(), other.var.to_string()));
        }
        if self.ctx == other.ctx {
            return Ok((self.clone(), other.clone()));
        }
        let ctx = C::join_ctx(&self.ctx, &other.ctx)?;
        Ok((self.lift(&ctx)?, other.lift(&ctx)?))
    }

    fn check(&self, other: &Self) -> Result<Option<C::Ctx>> {
        if self.var != other.var {
            return Err(Error::VariableMismatch(self.var.to_string(), other.var.to_string()));
        }
        if self.ctx == other.ctx {
            Ok(None)
        } else {
            Ok(Some(C::join_ctx(&self.ctx, &other.ctx)?))
        }
    }

    fn combine(&self, other: &Self, sub: bool) -> Self {
        let prec = self.prec.min(other.prec);
        let lo = match (self.coeffs.is_empty(), other.coeffs.is_empty()) {
            (true, true) => return Self::zero(self.var.clone(), self.ctx.clone(), prec),
            (false, true) => self.val,
            (true, false) => other.val,
            (false, false) => self.val.min(other.val),
        };
        let mut hi = self.end().max(other.end());
        if let Some(p) = prec.bound() {
            hi = hi.min(p);
        }
        let coeffs = (lo..hi.max(lo))
            .map(|e| match (self.coeff_ref(e), other.coeff_ref(e)) {
                (Some(a), Some(b)) => {
                    if sub {
                        a.c_sub(b)
                    } else {
                        a.c_add(b)
                    }
                }
                (Some(a), None) => a.clone(),
                (None, Some(b)) => {
                    if sub {
                        b.c_neg()
                    } else {
                        b.clone()
                    }
                }
                (None, None) => C::zero(&self.ctx),
            })
            .collect();
        Self::from_coeffs(self.var.clone(), self.ctx.clone(), lo, coeffs, prec)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        match self.check(other)? {
            None => Ok(self.combine(other, false)),
            Some(_) => {
                let (a, b) = self.compatible(other)?;
                Ok(a.combine(&b, false))
            }
        }
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        match self.check(other)? {
            None => Ok(self.combine(other, true)),
            Some(_) => {
                let (a, b) = self.compatible(other)?;
                Ok(a.combine(&b, true))
            }
        }
    }

    fn product(&self, other: &Self) -> Self {
        let prec = self.lower_bound().plus(other.prec).min(other.lower_bound().plus(self.prec));
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero(self.var.clone(), self.ctx.clone(), prec);
        }
        let lo = self.val + other.val;
        let mut hi = self.end() + other.end() - 1;
        if let Some(p) = prec.bound() {
            hi = hi.min(p);
        }
        let (n, m) = (self.coeffs.len() as i64, other.coeffs.len() as i64);
        let coeffs = (0..(hi - lo).max(0))
            .map(|k| {
                let mut acc: Option<C> = None;
                for i in (k - m + 1).max(0)..=k.min(n - 1) {
                    let a = &self.coeffs[i as usize];
                    let b = &other.coeffs[(k - i) as usize];
                    if a.is_exact_zero() || b.is_exact_zero() {
                        continue;
                    }
                    let p = a.c_mul(b);
                    acc = Some(match acc {
                        None => p,
                        Some(s) => s.c_add(&p),
                    });
                }
                acc.unwrap_or_else(|| C::zero(&self.ctx))
            })
            .collect();
        Self::from_coeffs(self.var.clone(), self.ctx.clone(), lo, coeffs, prec)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        match self.check(other)? {
            None => Ok(self.product(other)),
            Some(_) => {
                let (a, b) = self.compatible(other)?;
                Ok(a.product(&b))
            }
        }
    }

    pub fn neg(&self) -> Self {
        let mut s = self.clone();
        s.coeffs = s.coeffs.iter().map(|c| c.c_neg()).collect();
        s
    }

    pub fn scale(&self, q: &Rational) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c.c_scale(q)).collect();
        Self::from_coeffs(self.var.clone(), self.ctx.clone(), self.val, coeffs, self.prec)
    }

    /// Multiplies every coefficient by `c` (which must live in the same context).
    pub fn mul_coeff(&self, c: &C) -> Self {
        if c.is_exact_zero() {
            return Self::exact_zero(self.var.clone(), self.ctx.clone());
        }
        let coeffs: Vec<C> = self.coeffs.iter().map(|x| x.c_mul(c)).collect();
        Self::from_coeffs(self.var.clone(), self.ctx.clone(), self.val, coeffs, self.prec)
    }

    /// Quotient; fails when the divisor's leading coefficient is not
    /// certified, or when both operands are exact and the divisor is not a
    /// monomial (the quotient would be an infinite series).
    pub fn div(&self, other: &Self) -> Result<Self> {
        if let Some(ctx) = self.check(other)? {
            return self.lift(&ctx)?.div(&other.lift(&ctx)?);
        }
        let (m, b0) = match other.leading() {
            Ok(x) => x,
            Err(Error::ZeroElement) => return Err(Error::DivisionByZero),
            Err(e) => return Err(e),
        };
        let inv0 = b0.c_inv()?;
        if self.prec.is_exact() && other.prec.is_exact() {
            if other.coeffs.len() == 1 {
                let coeffs = self.coeffs.iter().map(|c| c.c_mul(&inv0)).collect();
                return Ok(Self::from_coeffs(
                    self.var.clone(),
                    self.ctx.clone(),
                    self.val - m,
                    coeffs,
                    Precision::Exact,
                ));
            }
            return Err(Error::precision(format!(
                "quotient of exact series in {} is infinite; bound a precision first",
                self.var
            )));
        }
        let prec = self
            .lower_bound()
            .plus(other.prec.shift(-2 * m))
            .min(self.prec.shift(-m));
        if self.coeffs.is_empty() {
            return Ok(Self::zero(self.var.clone(), self.ctx.clone(), prec));
        }
        let lo = self.val - m;
        let hi = prec.bound().expect("bounded by construction");
        let count = (hi - lo).max(0) as usize;
        let mut q: Vec<C> = Vec::with_capacity(count);
        for k in 0..count {
            let mut r = self.coeff_or_zero(self.val + k as i64);
            for j in 1..=k {
                if let Some(b) = other.coeff_ref(m + j as i64) {
                    if b.is_exact_zero() || q[k - j].is_exact_zero() {
                        continue;
                    }
                    r = r.c_sub(&q[k - j].c_mul(b));
                }
            }
            q.push(r.c_mul(&inv0));
        }
        Ok(Self::from_coeffs(self.var.clone(), self.ctx.clone(), lo, q, prec))
    }

    pub fn inv(&self) -> Result<Self> {
        Self::one(self.var.clone(), self.ctx.clone()).div(self)
    }

    pub fn pow(&self, n: i64) -> Result<Self> {
        let mut base = if n < 0 { self.inv()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one(self.var.clone(), self.ctx.clone());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.product(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.product(&base);
            }
        }
        Ok(acc)
    }

    /// Derivative with respect to the series variable.
    pub fn derivative(&self) -> Self {
        let coeffs = self
            .terms()
            .map(|(e, c)| c.c_scale(&Rational::from_integer(e.into())))
            .collect();
        Self::from_coeffs(self.var.clone(), self.ctx.clone(), self.val - 1, coeffs, self.prec.shift(-1))
    }

    /// Substitutes `var := sub`, where `sub` (in some other variable) has
    /// valuation at least one.
    pub fn compose(&self, sub: &Series<C>) -> Result<Self> {
        let lb = match sub.lower_bound() {
            Precision::Bounded(v) => v,
            Precision::Exact => {
                return Err(Error::precision("substituting zero"));
            }
        };
        if lb < 1 {
            return Err(Error::NonpositiveValuation);
        }
        let ctx = C::join_ctx(&self.ctx, &sub.ctx)?;
        let (this, sub) = (self.lift(&ctx)?, sub.lift(&ctx)?);
        let tail = match this.prec {
            Precision::Exact => Precision::Exact,
            Precision::Bounded(p) if p >= 0 => Precision::Bounded(p * lb),
            Precision::Bounded(p) => Precision::Bounded(p * sub.valuation()?),
        };
        let mut acc = Series::zero(sub.var.clone(), ctx.clone(), tail);
        if this.coeffs.is_empty() {
            return Ok(acc);
        }
        let lo = this.val;
        let mut pw = if lo >= 0 {
            sub.pow(lo)?
        } else {
            // An exact non-monomial `sub` has an infinite inverse; only the
            // part visible below the tail precision is needed.
            let inv_src = match (tail, sub.prec, sub.coeffs.len()) {
                (Precision::Bounded(t), Precision::Exact, n) if n > 1 => {
                    let v = sub.valuation()?;
                    sub.truncate(t + (1 - lo) * v + v)
                }
                _ => sub.clone(),
            };
            inv_src.inv()?.pow(-lo)?
        };
        for (i, c) in this.coeffs.iter().enumerate() {
            if !c.is_exact_zero() {
                acc = acc.combine(&pw.mul_coeff(c), false);
            }
            if i + 1 < this.coeffs.len() {
                pw = pw.product(&sub);
            }
        }
        Ok(acc.with_prec(tail))
    }

    /// Compositional inverse of a series with certified valuation one:
    /// returns `T` in `new_var` with `self(T) = new_var`. Exact inputs need
    /// `cap` to bound the answer.
    pub fn reverse(&self, new_var: Var, cap: Option<i64>) -> Result<Self> {
        let (v, c1) = self.leading()?;
        if v != 1 {
            return Err(Error::precision(format!("reversion needs valuation 1, found {v}")));
        }
        let p = match (self.prec.bound(), cap) {
            (Some(p), Some(c)) => p.min(c),
            (Some(p), None) => p,
            (None, Some(c)) => c,
            (None, None) => {
                return Err(Error::precision("reversion of an exact series needs a bound"));
            }
        };
        let c1inv = c1.c_inv()?;
        let c1 = c1.clone();
        let s = Series::var_power(new_var.clone(), self.ctx.clone(), 1);
        let g = self.combine(&Series::monomial(self.var.clone(), self.ctx.clone(), c1, 1), true);
        let mut t = s.mul_coeff(&c1inv).truncate(p);
        for _ in 0..p.max(1) {
            let gt = g.compose(&t)?;
            t = s.combine(&gt, true).mul_coeff(&c1inv).truncate(p);
        }
        Ok(t)
    }

    /// Equal on the common known window.
    pub fn eq_mod_prec(&self, other: &Self) -> bool {
        match self.try_sub(other) {
            Ok(d) => d.is_known_zero(),
            Err(_) => false,
        }
    }
}

impl<C: Coefficient> Add for &Series<C> {
    type Output = Series<C>;
    fn add(self, rhs: Self) -> Series<C> {
        self.try_add(rhs).expect("incompatible series")
    }
}

impl<C: Coefficient> Sub for &Series<C> {
    type Output = Series<C>;
    fn sub(self, rhs: Self) -> Series<C> {
        self.try_sub(rhs).expect("incompatible series")
    }
}

impl<C: Coefficient> Mul for &Series<C> {
    type Output = Series<C>;
    fn mul(self, rhs: Self) -> Series<C> {
        self.try_mul(rhs).expect("incompatible series")
    }
}

impl<C: Coefficient> Neg for &Series<C> {
    type Output = Series<C>;
    fn neg(self) -> Series<C> {
        Series::neg(self)
    }
}
