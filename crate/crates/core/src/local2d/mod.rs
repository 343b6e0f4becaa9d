//! Iterated Laurent series `k((u))((t))`: the outer variable is `t`, every
//! outer coefficient is an `LSeries` in the inner variable `u` carrying its
//! own precision.

mod weierstrass;

pub use weierstrass::{weierstrass_divide, weierstrass_prepare, Weierstrass};

use crate::coeff::{Field, FieldElem, Rational};
use crate::error::{Error, Result};
use crate::laurent::{ensure_char_zero, ls_exp, ls_log, Form1, InnerCtx, LSeries};
use crate::precision::Precision;
use crate::series::{Series, Var};

pub type L2Series = Series<LSeries>;

impl L2Series {
    pub fn inner_var(&self) -> &Var {
        &self.ctx().var
    }

    pub fn outer_var(&self) -> &Var {
        self.var()
    }

    pub fn field(&self) -> &Field {
        &self.ctx().field
    }

    /// Embeds an inner series as a constant in the outer variable.
    pub fn from_inner(outer: Var, x: LSeries) -> Self {
        let ctx = InnerCtx::new(x.var().clone(), x.field().clone());
        Series::constant(outer, ctx, x)
    }

    /// The exact monomial `c · inner^i · outer^j`.
    pub fn monomial2(outer: Var, inner: Var, c: FieldElem, i: i64, j: i64) -> Self {
        let field = c.field().clone();
        let x = LSeries::monomial(inner, field, c, i);
        Self::from_inner(outer, x).shift(j)
    }

    pub fn constant2(outer: Var, inner: Var, c: FieldElem) -> Self {
        Self::monomial2(outer, inner, c, 0, 0)
    }

    /// Builds from `(i, j, c)` triples (`c·u^i t^j`) with uniform precisions.
    pub fn from_terms(
        outer: Var,
        inner: Var,
        field: &Field,
        terms: &[(i64, i64, Rational)],
        inner_prec: Precision,
        outer_prec: Precision,
    ) -> Self {
        let ctx = InnerCtx::new(inner.clone(), field.clone());
        let mut acc = Series::exact_zero(outer.clone(), ctx.clone());
        for (i, j, c) in terms {
            let m = Self::monomial2(outer.clone(), inner.clone(), FieldElem::from_rational(field, c), *i, *j);
            acc = &acc + &m;
        }
        acc.bounded_by(inner_prec, outer_prec)
    }

    /// Truncates the outer precision and every inner precision.
    pub fn bounded_by(&self, inner: Precision, outer: Precision) -> Self {
        let s = self.with_prec(outer);
        s.map_coeffs(self.ctx().clone(), |c| c.with_prec(inner))
    }

    pub fn bounded(&self, pu: i64, pt: i64) -> Self {
        self.bounded_by(Precision::Bounded(pu), Precision::Bounded(pt))
    }

    /// Smallest inner precision among stored coefficients.
    pub fn min_inner_prec(&self) -> Precision {
        self.stored().iter().map(|c| c.prec()).min().unwrap_or(Precision::Exact)
    }

    /// Smallest certified lower bound on the inner valuation of the known
    /// part (`Exact` for the zero series).
    pub fn inner_lower_bound(&self) -> Precision {
        self.stored().iter().map(|c| c.lower_bound()).min().unwrap_or(Precision::Exact)
    }

    pub fn partial_inner(&self) -> Self {
        self.map_coeffs(self.ctx().clone(), |c| c.derivative())
    }

    pub fn partial_outer(&self) -> Self {
        self.derivative()
    }

    /// Materialises every outer coefficient in `[lo, hi)` and caps the inner
    /// precision of coefficient `k` at `cap(k)`.
    pub fn clamp_window(&self, lo: i64, hi: i64, cap: impl Fn(i64) -> i64) -> Self {
        let coeffs = (lo..hi)
            .map(|k| self.coeff_or_zero(k).with_prec(Precision::Bounded(cap(k))))
            .collect();
        Series::from_coeffs(
            self.var().clone(),
            self.ctx().clone(),
            lo,
            coeffs,
            self.prec().min(Precision::Bounded(hi)),
        )
    }

    /// Substitutes `inner := sub` in every coefficient.
    pub fn compose_inner(&self, sub: &LSeries) -> Result<Self> {
        let ctx = InnerCtx::new(sub.var().clone(), self.field().join(sub.field())?);
        self.try_map_coeffs(ctx, |c| c.compose(sub))
    }

    /// Substitutes `outer := sub` where `sub` is a series in a new outer
    /// variable with the same inner variable.
    pub fn compose_outer(&self, sub: &L2Series) -> Result<Self> {
        self.compose(sub)
    }
}

/// `g · d(inner) ∧ d(outer)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Form2 {
    pub g: L2Series,
}

impl Form2 {
    pub fn new(g: L2Series) -> Self {
        Form2 { g }
    }

    pub fn try_add(&self, o: &Form2) -> Result<Form2> {
        Ok(Form2 { g: self.g.try_add(&o.g)? })
    }

    pub fn try_sub(&self, o: &Form2) -> Result<Form2> {
        Ok(Form2 { g: self.g.try_sub(&o.g)? })
    }

    pub fn neg(&self) -> Form2 {
        Form2 { g: self.g.neg() }
    }

    pub fn mul_series(&self, f: &L2Series) -> Result<Form2> {
        Ok(Form2 { g: self.g.try_mul(f)? })
    }

    pub fn eq_mod_prec(&self, o: &Form2) -> bool {
        self.g.eq_mod_prec(&o.g)
    }

    /// The form after `inner = sub(inner')`: `g(sub) · sub' d(inner') ∧ d(outer)`.
    pub fn change_inner(&self, sub: &LSeries) -> Result<Form2> {
        let g = self.g.compose_inner(sub)?;
        let jac = L2Series::from_inner(self.g.outer_var().clone(), sub.derivative());
        Ok(Form2 { g: g.try_mul(&jac)? })
    }

    /// The form after `outer = sub(inner, outer')`: `g(sub) · ∂sub/∂outer'`.
    pub fn change_outer(&self, sub: &L2Series) -> Result<Form2> {
        let g = self.g.compose_outer(sub)?;
        Ok(Form2 { g: g.try_mul(&sub.partial_outer())? })
    }
}

/// The `outer^{-1}` coefficient: a one-form in the inner variable.
pub fn res_outer(w: &Form2) -> Result<Form1> {
    let c = w.g.coeff(-1).ok_or_else(|| {
        Error::precision(format!("outer residue needs outer precision above -1, have {}", w.g.prec()))
    })?;
    Ok(Form1::new(c))
}

/// Coefficient of `u^{-1}` in each outer coefficient of `g`: a series in the
/// outer variable. When some outer coefficient lacks the inner precision to
/// read `u^{-1}`, the result's precision stops at that outer power.
pub fn inner_residue_series(g: &L2Series) -> LSeries {
    let field = g.field().clone();
    let mut prec = g.prec();
    let mut out = Vec::new();
    let lo = g.start();
    for (j, c) in g.terms() {
        match c.coeff(-1) {
            Some(x) => out.push(x),
            None => {
                prec = prec.min(Precision::Bounded(j));
                break;
            }
        }
    }
    Series::from_coeffs(g.outer_var().clone(), field, lo, out, prec)
}

/// `res_u`: one-form in the outer variable.
pub fn res_inner(w: &Form2) -> Result<Form1> {
    Ok(Form1::new(inner_residue_series(&w.g)))
}

/// `a_{-1,-1}`.
pub fn res_total(w: &Form2) -> Result<FieldElem> {
    let c = res_outer(w)?.coeff;
    c.coeff(-1).ok_or_else(|| {
        Error::precision(format!("total residue needs inner precision above -1 at outer -1, have {}", c.prec()))
    })
}

/// `a = outer^m · inner^n · c · ε` with `ε` a one-unit.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitDecomp {
    pub m: i64,
    pub n: i64,
    pub c: FieldElem,
    pub eps: L2Series,
}

pub fn decompose_unit(a: &L2Series) -> Result<UnitDecomp> {
    let (m, am) = a.leading()?;
    let (n, c) = am.leading()?;
    let c = c.clone();
    let cinv = c.inv()?;
    let eps = a.shift(-m).map_coeffs(a.ctx().clone(), |x| x.shift(-n).mul_coeff(&cinv));
    Ok(UnitDecomp { m, n, c, eps })
}

/// Splits `x = x₀ + x₊` with `x₀ ∈ k((u))` the `t⁰` coefficient (bounded by
/// the largest inner precision present when exact) and `x₊ ∈ t·k((u))[[t]]`.
fn split_constant(x: &L2Series) -> Result<(LSeries, L2Series)> {
    if x.lower_bound() < Precision::Bounded(0) {
        return Err(Error::NonpositiveValuation);
    }
    let mut x0 = x.coeff_or_zero(0);
    if x0.prec().is_exact() && !is_inner_only(x) {
        let cap = x
            .stored()
            .iter()
            .filter_map(|s| s.prec().bound())
            .max()
            .ok_or_else(|| Error::precision("inner precision must be bounded"))?;
        x0 = x0.with_prec(Precision::Bounded(cap));
    }
    let mut plus = L2Series::exact_zero(x.var().clone(), x.ctx().clone()).with_prec(x.prec());
    for (k, xk) in x.terms() {
        if k >= 1 {
            plus = &plus + &L2Series::from_inner(x.var().clone(), xk.clone()).shift(k);
        }
    }
    Ok((x0, plus))
}

/// `Σ_{1 ≤ n < P_t} coeff(n)·y^n` for `y ∈ t·k((u))[[t]]`: every further
/// power lies in `t^{P_t}`.
fn outer_power_sum(y: &L2Series, coeff: &dyn Fn(i64) -> Rational) -> Result<L2Series> {
    let mut acc = L2Series::exact_zero(y.var().clone(), y.ctx().clone());
    if y.is_exact_zero() {
        return Ok(acc);
    }
    let pt = y.prec().bound().ok_or_else(|| {
        Error::precision("outer precision must be bounded for a series with higher outer terms")
    })?;
    let mut pw = y.clone();
    for n in 1..pt.max(1) {
        acc = &acc + &pw.scale(&coeff(n));
        if n + 1 < pt {
            pw = (&pw * y).with_prec(Precision::Bounded(pt));
        }
    }
    Ok(acc.with_prec(Precision::Bounded(pt)))
}

fn is_inner_only(x: &L2Series) -> bool {
    x.prec().is_exact() && x.start() >= 0 && x.end() <= 1
}

/// `exp(x)` for `x ∈ u·k[[u]] + t·k((u))[[t]]`, as `exp(x₀)·exp(x₊)`.
pub fn l2_exp(x: &L2Series) -> Result<L2Series> {
    ensure_char_zero(x.field())?;
    let (x0, plus) = split_constant(x)?;
    let e0 = L2Series::from_inner(x.var().clone(), ls_exp(&x0)?);
    if is_inner_only(x) {
        return Ok(e0);
    }
    let mut facts = vec![Rational::from_integer(1.into())];
    for i in 1..=plus.prec().bound().unwrap_or(0).max(1) {
        let f = facts[i as usize - 1].clone() * Rational::from_integer(i.into());
        facts.push(f);
    }
    let s = outer_power_sum(&plus, &|n| facts[n as usize].recip())?;
    let one = L2Series::one(x.var().clone(), x.ctx().clone());
    Ok(&e0 * &(&one + &s))
}

/// `log(ε)` for a one-unit `ε ∈ 1 + u·k[[u]] + t·k((u))[[t]]`, as
/// `log ε₀ + log(ε/ε₀)` with `ε₀` the `t⁰` coefficient.
pub fn l2_log(eps: &L2Series) -> Result<L2Series> {
    ensure_char_zero(eps.field())?;
    let one = L2Series::one(eps.var().clone(), eps.ctx().clone());
    if (eps - &one).is_exact_zero() {
        return Ok(L2Series::exact_zero(eps.var().clone(), eps.ctx().clone()));
    }
    let (e0, _) = split_constant(eps).map_err(|e| match e {
        Error::NonpositiveValuation => Error::NotAOneUnit,
        e => e,
    })?;
    let l0 = L2Series::from_inner(eps.var().clone(), ls_log(&e0)?);
    if is_inner_only(eps) {
        return Ok(l0);
    }
    // y = ε/ε₀ is 1 at t = 0, so log y = ∫ ∂_t y / y dt
    let (_, plus) = split_constant(eps)?;
    if plus.is_exact_zero() && plus.prec().is_exact() {
        return Ok(l0);
    }
    if plus.prec().bound().is_none() {
        return Err(Error::precision("outer precision must be bounded for a series with higher outer terms"));
    }
    let one = L2Series::one(eps.var().clone(), eps.ctx().clone());
    let y = &one + &plus.try_map_coeffs(plus.ctx().clone(), |c| c.div(&e0))?;
    let q = y.partial_outer().div(&y)?;
    Ok(&l0 + &integrate_outer(&q))
}

/// `∫ q dt` with zero constant term, for `q` without negative outer powers.
fn integrate_outer(q: &L2Series) -> L2Series {
    let lo = q.start();
    debug_assert!(lo >= 0);
    let coeffs =
        q.stored().iter().enumerate().map(|(i, c)| c.scale(&Rational::new(1.into(), (lo + i as i64 + 1).into()))).collect();
    L2Series::from_coeffs(q.var().clone(), q.ctx().clone(), lo + 1, coeffs, q.prec().shift(1))
}

/// `dφ/φ ∧ dψ/ψ`.
pub fn dlog_wedge(phi: &L2Series, psi: &L2Series) -> Result<Form2> {
    let num = phi.partial_inner().try_mul(&psi.partial_outer())?
        .try_sub(&phi.partial_outer().try_mul(&psi.partial_inner())?)?;
    let den = phi.try_mul(psi)?;
    Ok(Form2 { g: num.div(&den)? })
}

#[cfg(test)]
mod tests;
