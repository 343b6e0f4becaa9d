//! Exact bivariate polynomials and rational functions in chart coordinates.

use std::collections::BTreeMap;

use crate::coeff::{Field, FieldElem};
use crate::error::{Error, Result};
use crate::expr::{Caps, EvalRing};
use crate::precision::Precision;
use crate::symbols::preimage::Jet;

/// `Σ c_{ij} x^i y^j` over a number field.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly2 {
    field: Field,
    terms: BTreeMap<(u32, u32), FieldElem>,
}

impl Poly2 {
    pub fn zero(field: &Field) -> Self {
        Poly2 { field: field.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(c: &FieldElem) -> Self {
        Poly2::monomial(c, 0, 0)
    }

    pub fn monomial(c: &FieldElem, i: u32, j: u32) -> Self {
        let mut p = Poly2::zero(c.field());
        if !c.is_zero() {
            p.terms.insert((i, j), c.clone());
        }
        p
    }

    pub fn x(field: &Field) -> Self {
        Poly2::monomial(&FieldElem::one(field), 1, 0)
    }

    pub fn y(field: &Field) -> Self {
        Poly2::monomial(&FieldElem::one(field), 0, 1)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &FieldElem)> {
        self.terms.iter().map(|(&(i, j), c)| (i, j, c))
    }

    pub fn coeff(&self, i: u32, j: u32) -> FieldElem {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(|| FieldElem::zero(&self.field))
    }

    pub fn degree_x(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn degree_y(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    pub fn lift(&self, field: &Field) -> Result<Self> {
        let mut out = Poly2::zero(field);
        for (k, c) in &self.terms {
            out.terms.insert(*k, c.lift_to(field)?);
        }
        Ok(out)
    }

    fn joined(&self, o: &Poly2) -> Result<(Poly2, Poly2)> {
        if self.field == o.field {
            return Ok((self.clone(), o.clone()));
        }
        let f = self.field.join(&o.field)?;
        Ok((self.lift(&f)?, o.lift(&f)?))
    }

    fn add_term(&mut self, k: (u32, u32), c: &FieldElem) {
        let v = match self.terms.get(&k) {
            Some(a) => a.add(c),
            None => c.clone(),
        };
        if v.is_zero() {
            self.terms.remove(&k);
        } else {
            self.terms.insert(k, v);
        }
    }

    pub fn try_add(&self, o: &Poly2) -> Result<Poly2> {
        let (mut a, b) = self.joined(o)?;
        for (k, c) in &b.terms {
            a.add_term(*k, c);
        }
        Ok(a)
    }

    pub fn neg(&self) -> Poly2 {
        Poly2 { field: self.field.clone(), terms: self.terms.iter().map(|(k, c)| (*k, c.neg())).collect() }
    }

    pub fn try_sub(&self, o: &Poly2) -> Result<Poly2> {
        self.try_add(&o.neg())
    }

    pub fn try_mul(&self, o: &Poly2) -> Result<Poly2> {
        let (a, b) = self.joined(o)?;
        let mut out = Poly2::zero(&a.field);
        for (&(i, j), c) in &a.terms {
            for (&(k, l), d) in &b.terms {
                out.add_term((i + k, j + l), &c.mul(d));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &FieldElem) -> Result<Poly2> {
        self.try_mul(&Poly2::constant(c))
    }

    pub fn pow(&self, n: u32) -> Result<Poly2> {
        let mut acc = Poly2::constant(&FieldElem::one(&self.field));
        for _ in 0..n {
            acc = acc.try_mul(self)?;
        }
        Ok(acc)
    }

    pub fn eval(&self, x: &FieldElem, y: &FieldElem) -> Result<FieldElem> {
        self.subst(x, y)
    }

    /// Substitutes ring elements for `x` and `y`.
    pub fn subst<R: EvalRing>(&self, x: &R, y: &R) -> Result<R> {
        let zero = x.scalar_like(&FieldElem::zero(&self.field))?;
        let one = x.scalar_like(&FieldElem::one(&self.field))?;
        let mut xp = vec![one.clone()];
        let mut yp = vec![one];
        for _ in 0..self.degree_x() {
            let n = xp.last().expect("nonempty").e_mul(x)?;
            xp.push(n);
        }
        for _ in 0..self.degree_y() {
            let n = yp.last().expect("nonempty").e_mul(y)?;
            yp.push(n);
        }
        let mut acc = zero;
        for (&(i, j), c) in &self.terms {
            let m = xp[i as usize].e_mul(&yp[j as usize])?;
            acc = acc.e_add(&m.e_mul(&x.scalar_like(c)?)?)?;
        }
        Ok(acc)
    }

    pub fn partial_x(&self) -> Poly2 {
        let mut out = Poly2::zero(&self.field);
        for (&(i, j), c) in &self.terms {
            if i > 0 {
                out.add_term((i - 1, j), &c.scale(&crate::coeff::rat(i as i64)));
            }
        }
        out
    }

    pub fn partial_y(&self) -> Poly2 {
        let mut out = Poly2::zero(&self.field);
        for (&(i, j), c) in &self.terms {
            if j > 0 {
                out.add_term((i, j - 1), &c.scale(&crate::coeff::rat(j as i64)));
            }
        }
        out
    }

    /// Quotient and remainder by `g` in lexicographic order (`x > y`).
    /// Since `{g}` is a Gröbner basis of `(g)`, the remainder vanishes
    /// exactly when `g` divides `self`.
    pub fn div_rem(&self, g: &Poly2) -> Result<(Poly2, Poly2)> {
        let (mut p, g) = self.joined(g)?;
        let (&lt, lc) = g.terms.iter().next_back().ok_or(Error::DivisionByZero)?;
        let lc_inv = lc.inv()?;
        let mut q = Poly2::zero(&p.field);
        let mut r = Poly2::zero(&p.field);
        while let Some((&(i, j), c)) = p.terms.iter().next_back() {
            let c = c.clone();
            if i >= lt.0 && j >= lt.1 {
                let m = Poly2::monomial(&c.mul(&lc_inv), i - lt.0, j - lt.1);
                q = q.try_add(&m)?;
                p = p.try_sub(&m.try_mul(&g)?)?;
            } else {
                r.add_term((i, j), &c);
                p.terms.remove(&(i, j));
            }
        }
        Ok((q, r))
    }

    /// Largest `m` with `g^m | self`, and the cofactor.
    pub fn strip_factor(&self, g: &Poly2) -> Result<(u32, Poly2)> {
        if self.is_zero() {
            return Err(Error::ZeroElement);
        }
        let mut m = 0;
        let mut p = self.clone();
        loop {
            let (q, r) = p.div_rem(g)?;
            if !r.is_zero() {
                return Ok((m, p));
            }
            p = q;
            m += 1;
        }
    }
}

/// `num / den` with `den ≠ 0`; not reduced.
#[derive(Clone, Debug, PartialEq)]
pub struct RatFunc {
    pub num: Poly2,
    pub den: Poly2,
}

impl RatFunc {
    pub fn poly(p: Poly2) -> Self {
        let one = Poly2::constant(&FieldElem::one(p.field()));
        RatFunc { num: p, den: one }
    }

    pub fn new(num: Poly2, den: Poly2) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(RatFunc { num, den })
    }

    pub fn field(&self) -> &Field {
        self.num.field()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Value at a point where the denominator does not vanish.
    pub fn eval(&self, x: &FieldElem, y: &FieldElem) -> Result<FieldElem> {
        let d = self.den.eval(x, y)?;
        if d.is_zero() {
            return Err(Error::DivisionByZero);
        }
        self.num.eval(x, y)?.try_mul(&d.inv()?)
    }

    /// `ν_g` and `self = g^ν · num'/den'` with `g ∤ num', den'`.
    pub fn split_along(&self, g: &Poly2) -> Result<(i64, RatFunc)> {
        let (a, num) = self.num.strip_factor(g)?;
        let (b, den) = self.den.strip_factor(g)?;
        Ok((a as i64 - b as i64, RatFunc { num, den }))
    }

    /// `∂/∂x`.
    pub fn partial_x(&self) -> Result<RatFunc> {
        let n = self.num.partial_x().try_mul(&self.den)?.try_sub(&self.num.try_mul(&self.den.partial_x())?)?;
        RatFunc::new(n, self.den.try_mul(&self.den)?)
    }

    pub fn partial_y(&self) -> Result<RatFunc> {
        let n = self.num.partial_y().try_mul(&self.den)?.try_sub(&self.num.try_mul(&self.den.partial_y())?)?;
        RatFunc::new(n, self.den.try_mul(&self.den)?)
    }
}

impl EvalRing for RatFunc {
    fn scalar_like(&self, c: &FieldElem) -> Result<Self> {
        let f = self.field().join(c.field())?;
        Ok(RatFunc::poly(Poly2::constant(&c.lift_to(&f)?)))
    }
    fn e_add(&self, o: &Self) -> Result<Self> {
        if self.den == o.den {
            return RatFunc::new(self.num.try_add(&o.num)?, self.den.clone());
        }
        let n = self.num.try_mul(&o.den)?.try_add(&o.num.try_mul(&self.den)?)?;
        RatFunc::new(n, self.den.try_mul(&o.den)?)
    }
    fn e_sub(&self, o: &Self) -> Result<Self> {
        self.e_add(&o.e_neg())
    }
    fn e_mul(&self, o: &Self) -> Result<Self> {
        RatFunc::new(self.num.try_mul(&o.num)?, self.den.try_mul(&o.den)?)
    }
    fn e_neg(&self) -> Self {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }
    fn e_div(&self, o: &Self, _: Caps) -> Result<Self> {
        if o.num.is_zero() {
            return Err(Error::DivisionByZero);
        }
        RatFunc::new(self.num.try_mul(&o.den)?, self.den.try_mul(&o.num)?)
    }
    fn big_o(&self, v: &str, _: i64) -> Result<Self> {
        Err(Error::Parse { column: 1, message: format!("O({v}^…) in a global function") })
    }
}

impl EvalRing for Jet {
    fn scalar_like(&self, c: &FieldElem) -> Result<Self> {
        let f = self.field().join(c.field())?;
        Ok(Jet::constant(&c.lift_to(&f)?))
    }
    fn e_add(&self, o: &Self) -> Result<Self> {
        self.try_add(o)
    }
    fn e_sub(&self, o: &Self) -> Result<Self> {
        self.try_sub(o)
    }
    fn e_mul(&self, o: &Self) -> Result<Self> {
        self.try_mul(o)
    }
    fn e_neg(&self) -> Self {
        self.neg()
    }
    fn e_div(&self, o: &Self, _: Caps) -> Result<Self> {
        // only constants are invertible without a precision argument
        let c = o.coeff(0, 0);
        if o.terms().any(|(i, j, _)| i + j > 0) || c.is_zero() || o.prec() != Precision::Exact {
            return Err(Error::Unsupported("division of jets".into()));
        }
        self.mul_elem(&c.inv()?)
    }
    fn big_o(&self, v: &str, _: i64) -> Result<Self> {
        Err(Error::Unsupported(format!("O({v}) in a jet")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::rat;
    use crate::expr::{eval, parse, Env};

    fn q() -> Field {
        Field::Rationals
    }

    fn rf(s: &str) -> RatFunc {
        let one = RatFunc::poly(Poly2::constant(&FieldElem::one(&q())));
        let env = Env::new(one, Caps::new(0, 0))
            .bind("u", RatFunc::poly(Poly2::x(&q())))
            .bind("t", RatFunc::poly(Poly2::y(&q())));
        eval(&parse(s).unwrap(), &env).unwrap()
    }

    #[test]
    fn division_detects_factors() {
        let g = rf("u - t").num;
        let p = rf("(u - t)^2*(u + 3*t^2)").num;
        let (m, rest) = p.strip_factor(&g).unwrap();
        assert_eq!(m, 2);
        assert_eq!(rest, rf("u + 3*t^2").num);
        let f = rf("t/(u-t)^3");
        let (nu, r) = f.split_along(&g).unwrap();
        assert_eq!(nu, -3);
        assert_eq!(r.eval(&FieldElem::from_int(&q(), 2), &FieldElem::from_int(&q(), 5)).unwrap(), FieldElem::rational(rat(5)));
    }

    #[test]
    fn partials() {
        let f = rf("u^2*t + 1/u");
        let d = f.partial_x().unwrap();
        let x = FieldElem::from_int(&q(), 2);
        let y = FieldElem::from_int(&q(), 3);
        // 2ut − u^{-2} at (2, 3) = 12 − 1/4
        assert_eq!(d.eval(&x, &y).unwrap(), FieldElem::rational(crate::coeff::ratio(47, 4)));
    }
}
