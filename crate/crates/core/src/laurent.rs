//! One-variable truncated Laurent series `k((t))`, differentials, residues
//! and the exponential/logarithm on one-units.

use num_traits::One;

use crate::coeff::{rat, Field, FieldElem, Rational};
use crate::error::{Error, Result};
use crate::precision::Precision;
use crate::series::{Coefficient, Series, Var};

pub type LSeries = Series<FieldElem>;

/// Variable and scalar field of an `LSeries`; the coefficient context of a
/// two-dimensional series.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerCtx {
    pub var: Var,
    pub field: Field,
}

impl InnerCtx {
    pub fn new(var: Var, field: Field) -> Self {
        InnerCtx { var, field }
    }
}

impl Coefficient for LSeries {
    type Ctx = InnerCtx;

    fn ctx(&self) -> InnerCtx {
        InnerCtx { var: self.var().clone(), field: self.ctx().clone() }
    }
    fn zero(ctx: &InnerCtx) -> Self {
        LSeries::exact_zero(ctx.var.clone(), ctx.field.clone())
    }
    fn constant(ctx: &InnerCtx, c: &FieldElem) -> Self {
        let c = c.lift_to(&ctx.field).expect("constant outside the coefficient field");
        LSeries::constant(ctx.var.clone(), ctx.field.clone(), c)
    }
    fn join_ctx(a: &InnerCtx, b: &InnerCtx) -> Result<InnerCtx> {
        if a.var != b.var {
            return Err(Error::VariableMismatch(a.var.to_string(), b.var.to_string()));
        }
        Ok(InnerCtx { var: a.var.clone(), field: a.field.join(&b.field)? })
    }
    fn lift(&self, ctx: &InnerCtx) -> Result<Self> {
        if self.var() != &ctx.var {
            return Err(Error::VariableMismatch(self.var().to_string(), ctx.var.to_string()));
        }
        Series::lift(self, &ctx.field)
    }
    fn is_exact_zero(&self) -> bool {
        Series::is_exact_zero(self)
    }
    fn is_known_zero(&self) -> bool {
        Series::is_known_zero(self)
    }
    fn c_add(&self, o: &Self) -> Self {
        self + o
    }
    fn c_sub(&self, o: &Self) -> Self {
        self - o
    }
    fn c_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn c_neg(&self) -> Self {
        Series::neg(self)
    }
    fn c_scale(&self, q: &Rational) -> Self {
        self.scale(q)
    }
    fn c_inv(&self) -> Result<Self> {
        self.inv()
    }
}

impl LSeries {
    pub fn field(&self) -> &Field {
        self.ctx()
    }

    /// Series with rational coefficients `coeffs[i]` at `val + i`.
    pub fn from_rationals(v: Var, field: &Field, val: i64, coeffs: &[Rational], prec: Precision) -> Self {
        let cs = coeffs.iter().map(|q| FieldElem::from_rational(field, q)).collect();
        Series::from_coeffs(v, field.clone(), val, cs, prec)
    }

    /// Series with integer coefficients; handy in tests.
    pub fn from_ints(v: Var, field: &Field, val: i64, coeffs: &[i64], prec: Precision) -> Self {
        let qs: Vec<Rational> = coeffs.iter().map(|&c| rat(c)).collect();
        Self::from_rationals(v, field, val, &qs, prec)
    }

    pub fn scalar(v: Var, c: FieldElem) -> Self {
        let f = c.field().clone();
        Series::constant(v, f, c)
    }

    /// Leading coefficient of a nonzero series.
    pub fn leading_coeff(&self) -> Result<FieldElem> {
        Ok(self.leading()?.1.clone())
    }
}

/// A one-form `coeff · d(var)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Form1 {
    pub coeff: LSeries,
}

impl Form1 {
    pub fn new(coeff: LSeries) -> Self {
        Form1 { coeff }
    }

    pub fn var(&self) -> &Var {
        self.coeff.var()
    }

    pub fn try_add(&self, o: &Form1) -> Result<Form1> {
        Ok(Form1 { coeff: self.coeff.try_add(&o.coeff)? })
    }

    pub fn try_sub(&self, o: &Form1) -> Result<Form1> {
        Ok(Form1 { coeff: self.coeff.try_sub(&o.coeff)? })
    }

    pub fn mul_series(&self, f: &LSeries) -> Result<Form1> {
        Ok(Form1 { coeff: self.coeff.try_mul(f)? })
    }

    pub fn eq_mod_prec(&self, o: &Form1) -> bool {
        self.coeff.eq_mod_prec(&o.coeff)
    }
}

/// Coefficient of `var^{-1}` in `ω = f d(var)`.
pub fn ls_residue(w: &Form1) -> Result<FieldElem> {
    w.coeff.coeff(-1).ok_or_else(|| {
        Error::precision(format!("residue needs precision above -1, have {}", w.coeff.prec()))
    })
}

pub fn ls_d(f: &LSeries) -> Form1 {
    Form1 { coeff: f.derivative() }
}

/// `df/f`.
pub fn ls_dlog(f: &LSeries) -> Result<Form1> {
    Ok(Form1 { coeff: f.derivative().div(f)? })
}

pub(crate) fn ensure_char_zero(field: &Field) -> Result<()> {
    if field.characteristic() != 0 {
        return Err(Error::CharacteristicNotZero);
    }
    Ok(())
}

/// Certified lower bound `v ≥ 1` for the valuation of an argument of exp/log.
fn small_valuation(x: &LSeries) -> Result<Option<i64>> {
    match x.lower_bound() {
        Precision::Exact => Ok(None),
        Precision::Bounded(v) if v >= 1 => Ok(Some(v)),
        Precision::Bounded(_) if !x.stored().is_empty() => Err(Error::NonpositiveValuation),
        Precision::Bounded(_) => Err(Error::precision("valuation of the argument is not certified")),
    }
}

/// `Σ_{n=1}^{N} c_n x^n` with `x^n` dropped once `n·v ≥ P`.
fn power_sum(x: &LSeries, v: i64, coeff: impl Fn(i64) -> Rational) -> Result<LSeries> {
    let p = x.prec().bound().ok_or_else(|| {
        Error::precision(format!("series in {} is exact and not a polynomial image; bound it", x.var()))
    })?;
    let n_max = (p + v - 1) / v - 1;
    let mut acc = LSeries::zero(x.var().clone(), x.field().clone(), Precision::Exact);
    let mut pw = x.clone();
    for n in 1..=n_max.max(0) {
        acc = &acc + &pw.scale(&coeff(n));
        if n < n_max {
            pw = &pw * x;
        }
    }
    Ok(acc.with_prec(Precision::Bounded(p)))
}

/// `exp(f)` for `v(f) ≥ 1`.
pub fn ls_exp(f: &LSeries) -> Result<LSeries> {
    ensure_char_zero(f.field())?;
    let one = LSeries::one(f.var().clone(), f.field().clone());
    let Some(v) = small_valuation(f)? else {
        return Ok(one);
    };
    let mut fact = Rational::one();
    let mut facts = vec![Rational::one()];
    let p = f.prec().bound().unwrap_or(0);
    for n in 1..=p.max(1) {
        fact *= rat(n);
        facts.push(fact.clone());
    }
    let s = power_sum(f, v, |n| facts[n as usize].recip())?;
    Ok(&one + &s)
}

/// `log(u)` for a one-unit `u ∈ 1 + t·k[[t]]`.
pub fn ls_log(u: &LSeries) -> Result<LSeries> {
    ensure_char_zero(u.field())?;
    let one = LSeries::one(u.var().clone(), u.field().clone());
    let x = u - &one;
    match x.lower_bound() {
        Precision::Exact => return Ok(LSeries::exact_zero(u.var().clone(), u.field().clone())),
        Precision::Bounded(v) if v >= 1 => {}
        Precision::Bounded(_) if !x.stored().is_empty() => return Err(Error::NotAOneUnit),
        Precision::Bounded(_) => return Err(Error::precision("one-unit property not certified")),
    }
    let v = small_valuation(&x)?.expect("nonzero");
    power_sum(&x, v, |n| {
        let q = Rational::new(1.into(), n.into());
        if n % 2 == 0 {
            -q
        } else {
            q
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::ratio;
    use crate::series::var;

    fn q() -> Field {
        Field::Rationals
    }

    fn s(val: i64, c: &[i64], p: i64) -> LSeries {
        LSeries::from_ints(var("t"), &q(), val, c, Precision::Bounded(p))
    }

    #[test]
    fn geometric_inverse() {
        let one_minus_t = LSeries::from_ints(var("t"), &q(), 0, &[1, -1], Precision::Bounded(6));
        let inv = one_minus_t.inv().unwrap();
        assert_eq!(inv, s(0, &[1, 1, 1, 1, 1, 1], 6));
    }

    #[test]
    fn division_precision_rule() {
        // (t^-1 + O(t^3)) / (t + t^2 + O(t^4)): prec = min(-1 + 4 - 2, 3 - 1) = 1
        let a = s(-1, &[1], 3);
        let b = s(1, &[1, 1], 4);
        let c = a.div(&b).unwrap();
        assert_eq!(c.prec(), Precision::Bounded(1));
        assert_eq!(c, s(-2, &[1, -1, 1], 1));
    }

    #[test]
    fn exact_quotient_rules() {
        let t2 = LSeries::var_power(var("t"), q(), 2);
        let a = LSeries::from_ints(var("t"), &q(), 0, &[1, 2], Precision::Exact);
        let c = a.div(&t2).unwrap();
        assert_eq!(c.prec(), Precision::Exact);
        assert_eq!(c.start(), -2);
        let nonmono = LSeries::from_ints(var("t"), &q(), 0, &[1, 1], Precision::Exact);
        assert!(matches!(a.div(&nonmono), Err(Error::InsufficientPrecision(_))));
        let zero = LSeries::exact_zero(var("t"), q());
        assert_eq!(a.div(&zero), Err(Error::DivisionByZero));
    }

    #[test]
    fn residue_and_d() {
        let f = s(-2, &[3, 5, 7], 4);
        assert_eq!(ls_residue(&Form1::new(f.clone())).unwrap(), FieldElem::rational(rat(5)));
        let df = ls_d(&f);
        // d(3t^-2 + 5t^-1 + 7) = -6t^-3 - 5t^-2
        assert_eq!(df.coeff, s(-3, &[-6, -5], 3));
        assert!(ls_residue(&Form1::new(s(0, &[1], -1))).is_err());
    }

    #[test]
    fn exp_log_known_values() {
        let t = s(1, &[1], 7);
        let e = ls_exp(&t).unwrap();
        let expected: Vec<Rational> =
            vec![rat(1), rat(1), ratio(1, 2), ratio(1, 6), ratio(1, 24), ratio(1, 120), ratio(1, 720)];
        assert_eq!(e, LSeries::from_rationals(var("t"), &q(), 0, &expected, Precision::Bounded(7)));
        let l = ls_log(&s(0, &[1, 1], 5)).unwrap();
        let expected: Vec<Rational> = vec![rat(1), ratio(-1, 2), ratio(1, 3), ratio(-1, 4)];
        assert_eq!(l, LSeries::from_rationals(var("t"), &q(), 1, &expected, Precision::Bounded(5)));
        assert_eq!(ls_exp(&s(0, &[1], 4)), Err(Error::NonpositiveValuation));
        assert_eq!(ls_log(&s(0, &[2, 1], 4)), Err(Error::NotAOneUnit));
    }

    #[test]
    fn compose_and_reverse() {
        // t ↦ s + s^2, then reverse back.
        let f = LSeries::from_ints(var("t"), &q(), 1, &[1, 1], Precision::Exact);
        let r = f.reverse(var("s"), Some(6)).unwrap();
        assert_eq!(r, LSeries::from_ints(var("s"), &q(), 1, &[1, -1, 2, -5, 14], Precision::Bounded(6)));
        let back = f.compose(&r).unwrap();
        assert!(back.eq_mod_prec(&LSeries::var_power(var("s"), q(), 1)));
        assert_eq!(back.prec(), Precision::Bounded(6));
        // 1/t composed with s + s^2
        let inv_t = LSeries::var_power(var("t"), q(), -1).truncate(3);
        let c = inv_t.compose(&f.truncate(5)).unwrap();
        assert_eq!(c.start(), -1);
        assert!(c.eq_mod_prec(&LSeries::from_ints(var("t"), &q(), -1, &[1, -1, 1, -1], Precision::Bounded(3))));
    }

    #[test]
    fn variable_mismatch_is_reported() {
        let a = s(0, &[1], 3);
        let b = LSeries::from_ints(var("u"), &q(), 0, &[1], Precision::Bounded(3));
        assert!(matches!(a.try_add(&b), Err(Error::VariableMismatch(_, _))));
    }
}
