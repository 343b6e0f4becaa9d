//! Symbols with prescribed tame values along curves through the closed point
//! of `Spec k[[u, t]]`.
//!
//! Elements of `k[[u, t]]` are carried as jets (truncations modulo a power of
//! the maximal ideal), which is stable under every substitution used here.
//! Regular curves are graphs `t = g(u)` or `u = g(t)`; the target value on a
//! curve is a series in its graph parameter.
//!
//! The regular case eliminates curves pairwise: for transversal `C₁, C₂`
//! the symbol `(i(f₁), t_{C₁})`, with `i` sending the parameter
//! `t_{C₂}|_{C₁}` of `C₁` to `t_{C₂}`, has value `f₁` on `C₁`, changes only
//! the value on `C₂`, and is trivial elsewhere. If all tangents agree an
//! auxiliary coordinate line with target 1 is added first. Singular curves
//! are reduced with Weierstrass division: `(r₁/r₂, g)` has the right value on
//! `(g)` and its other support lies on factors of `u·r₁·r₂`, all of smaller
//! Weierstrass degree.

use std::collections::BTreeMap;

use crate::coeff::{Field, FieldElem};
use crate::error::{Error, Result};
use crate::laurent::{InnerCtx, LSeries};
use crate::local2d::{weierstrass_divide, weierstrass_prepare, L2Series};
use crate::precision::Precision;
use crate::series::{var, Series, Var};

use super::{tame_symbol, K2Elem};

/// Recursion bound for the singular driver.
pub const DEFAULT_DEPTH_LIMIT: usize = 8;

/// An element of `k[[u, t]]` modulo `(u, t)^prec`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    field: Field,
    prec: Precision,
    terms: BTreeMap<(i64, i64), FieldElem>,
}

impl Jet {
    pub fn zero(field: &Field, prec: Precision) -> Self {
        Jet { field: field.clone(), prec, terms: BTreeMap::new() }
    }

    /// `Σ c·u^i·t^j` from `(i, j, c)`.
    pub fn from_terms(field: &Field, terms: &[(i64, i64, FieldElem)], prec: Precision) -> Result<Self> {
        let mut j = Jet::zero(field, prec);
        for (a, b, c) in terms {
            if *a < 0 || *b < 0 {
                return Err(Error::NonpositiveValuation);
            }
            j.add_term(*a, *b, &c.lift_to(field)?);
        }
        Ok(j)
    }

    pub fn constant(c: &FieldElem) -> Self {
        let mut j = Jet::zero(c.field(), Precision::Exact);
        j.add_term(0, 0, c);
        j
    }

    pub fn one(field: &Field) -> Self {
        Jet::constant(&FieldElem::one(field))
    }

    pub fn u(field: &Field) -> Self {
        let mut j = Jet::zero(field, Precision::Exact);
        j.add_term(1, 0, &FieldElem::one(field));
        j
    }

    pub fn t(field: &Field) -> Self {
        let mut j = Jet::zero(field, Precision::Exact);
        j.add_term(0, 1, &FieldElem::one(field));
        j
    }

    /// A power series in one variable, placed in the `u` slot or the `t` slot.
    pub fn from_series(f: &LSeries, in_u: bool) -> Result<Self> {
        if f.start() < 0 && !f.is_exact_zero() {
            return Err(Error::NonpositiveValuation);
        }
        let mut j = Jet::zero(f.field(), f.prec());
        for (e, c) in f.terms() {
            if in_u {
                j.add_term(e, 0, c);
            } else {
                j.add_term(0, e, c);
            }
        }
        Ok(j)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn prec(&self) -> Precision {
        self.prec
    }

    pub fn coeff(&self, i: i64, j: i64) -> FieldElem {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(|| FieldElem::zero(&self.field))
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, i64, &FieldElem)> {
        self.terms.iter().map(|(&(i, j), c)| (i, j, c))
    }

    fn add_term(&mut self, i: i64, j: i64, c: &FieldElem) {
        if c.is_zero() || !self.prec.covers(i + j) {
            return;
        }
        let c = c.lift_to(&self.field).expect("jet coefficient outside its field");
        let e = self.terms.entry((i, j)).or_insert_with(|| FieldElem::zero(&c.field().clone()));
        *e = e.add(&c);
        if e.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn with_prec(&self, p: Precision) -> Self {
        let prec = self.prec.min(p);
        let terms = self.terms.iter().filter(|(k, _)| prec.covers(k.0 + k.1)).map(|(k, c)| (*k, c.clone())).collect();
        Jet { field: self.field.clone(), prec, terms }
    }

    pub fn bounded(&self, n: i64) -> Self {
        self.with_prec(Precision::Bounded(n))
    }

    /// Certified lower bound on the total degree.
    pub fn order(&self) -> Precision {
        match self.terms.keys().map(|(i, j)| i + j).min() {
            Some(d) => Precision::Bounded(d),
            None => self.prec,
        }
    }

    pub fn is_known_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty() && self.prec.is_exact()
    }

    pub fn eq_mod_prec(&self, o: &Jet) -> bool {
        self.try_sub(o).map(|d| d.is_known_zero()).unwrap_or(false)
    }

    fn join(&self, o: &Jet) -> Result<Field> {
        self.field.join(&o.field)
    }

    pub fn try_add(&self, o: &Jet) -> Result<Jet> {
        let field = self.join(o)?;
        let mut out = Jet::zero(&field, self.prec.min(o.prec));
        for (i, j, c) in self.terms().chain(o.terms()) {
            out.add_term(i, j, c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Jet {
        let terms = self.terms.iter().map(|(k, c)| (*k, c.neg())).collect();
        Jet { field: self.field.clone(), prec: self.prec, terms }
    }

    pub fn try_sub(&self, o: &Jet) -> Result<Jet> {
        self.try_add(&o.neg())
    }

    pub fn try_mul(&self, o: &Jet) -> Result<Jet> {
        let field = self.join(o)?;
        let prec = self.prec.plus(o.order()).min(o.prec.plus(self.order()));
        let mut out = Jet::zero(&field, prec);
        for (i, j, a) in self.terms() {
            for (k, l, b) in o.terms() {
                if prec.covers(i + j + k + l) {
                    out.add_term(i + k, j + l, &a.try_mul(b)?);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_elem(&self, c: &FieldElem) -> Result<Jet> {
        self.try_mul(&Jet::constant(c))
    }

    pub fn pow(&self, n: u32) -> Result<Jet> {
        let mut acc = Jet::one(&self.field);
        for _ in 0..n {
            acc = acc.try_mul(self)?;
        }
        Ok(acc)
    }

    /// `self(u := a, t := b)` for `a, b` in the maximal ideal.
    pub fn compose(&self, a: &Jet, b: &Jet) -> Result<Jet> {
        let m = a.order().min(b.order());
        if m < Precision::Bounded(1) {
            return Err(Error::NonpositiveValuation);
        }
        let tail = match (self.prec, m) {
            (Precision::Bounded(p), Precision::Bounded(m)) => Precision::Bounded(p * m),
            (Precision::Bounded(p), Precision::Exact) => Precision::Bounded(p),
            (Precision::Exact, _) => Precision::Exact,
        };
        let field = self.join(a)?.join(&b.field)?;
        let mut acc = Jet::zero(&field, tail);
        let (mut apows, mut bpows) = (vec![Jet::one(&field)], vec![Jet::one(&field)]);
        for (i, j, c) in self.terms() {
            while apows.len() <= i as usize {
                let next = apows.last().unwrap().try_mul(a)?.with_prec(tail);
                apows.push(next);
            }
            while bpows.len() <= j as usize {
                let next = bpows.last().unwrap().try_mul(b)?.with_prec(tail);
                bpows.push(next);
            }
            let term = apows[i as usize].try_mul(&bpows[j as usize])?.mul_elem(c)?;
            acc = acc.try_add(&term)?;
        }
        Ok(acc)
    }

    /// `Σ f_k z^k` for a power series `f` and `z` in the maximal ideal.
    pub fn eval_series(f: &LSeries, z: &Jet) -> Result<Jet> {
        if f.start() < 0 && !f.is_exact_zero() {
            return Err(Error::NonpositiveValuation);
        }
        let oz = z.order();
        if oz < Precision::Bounded(1) {
            return Err(Error::NonpositiveValuation);
        }
        let tail = match (f.prec(), oz) {
            (Precision::Bounded(n), Precision::Bounded(o)) => Precision::Bounded(n * o),
            (Precision::Bounded(n), Precision::Exact) => Precision::Bounded(n.max(1)),
            (Precision::Exact, _) => Precision::Exact,
        };
        let field = f.field().join(&z.field)?;
        let mut acc = Jet::zero(&field, tail);
        let mut pw = Jet::one(&field);
        let mut e = 0;
        for (k, c) in f.terms() {
            while e < k {
                pw = pw.try_mul(z)?.with_prec(tail);
                e += 1;
            }
            acc = acc.try_add(&pw.mul_elem(c)?)?;
        }
        Ok(acc)
    }

    /// `self(x, y)` for one-variable series `x, y` of positive valuation in a
    /// common variable.
    pub fn eval_on(&self, x: &LSeries, y: &LSeries) -> Result<LSeries> {
        let lb = x.lower_bound().min(y.lower_bound());
        if lb < Precision::Bounded(1) {
            return Err(Error::NonpositiveValuation);
        }
        let v = x.var().clone();
        let field = self.field.join(x.field())?.join(y.field())?;
        let tail = match (self.prec, lb) {
            (Precision::Bounded(p), Precision::Bounded(l)) => Precision::Bounded(p * l),
            (Precision::Bounded(p), Precision::Exact) => Precision::Bounded(p),
            (Precision::Exact, _) => Precision::Exact,
        };
        let one = LSeries::one(v.clone(), field.clone());
        let (mut xp, mut yp) = (vec![one.clone()], vec![one]);
        let mut acc = LSeries::zero(v, field, tail);
        for (i, j, c) in self.terms() {
            while xp.len() <= i as usize {
                let n = xp.last().unwrap().try_mul(x)?.with_prec(tail);
                xp.push(n);
            }
            while yp.len() <= j as usize {
                let n = yp.last().unwrap().try_mul(y)?.with_prec(tail);
                yp.push(n);
            }
            acc = acc.try_add(&xp[i as usize].try_mul(&yp[j as usize])?.mul_coeff(c))?;
        }
        Ok(acc.with_prec(tail))
    }

    /// As an iterated series whose outer variable is `t` (or `u` when
    /// `outer_is_t` is false); the outer coefficient of degree `k` is known to
    /// inner precision `prec − k`.
    pub fn to_l2(&self, outer_is_t: bool, outer: Var, inner: Var) -> L2Series {
        let hi = match self.prec {
            Precision::Bounded(p) => p.max(0),
            Precision::Exact => self.terms.keys().map(|&(i, j)| if outer_is_t { j } else { i }).max().map_or(0, |m| m + 1),
        };
        let mut rows: Vec<Vec<(i64, FieldElem)>> = vec![Vec::new(); hi as usize];
        for (i, j, c) in self.terms() {
            let (o, n) = if outer_is_t { (j, i) } else { (i, j) };
            rows[o as usize].push((n, c.clone()));
        }
        let coeffs = rows
            .into_iter()
            .enumerate()
            .map(|(k, row)| {
                let p = self.prec.shift(-(k as i64));
                let mut s = LSeries::zero(inner.clone(), self.field.clone(), p);
                for (n, c) in row {
                    s = &s + &LSeries::monomial(inner.clone(), self.field.clone(), c, n);
                }
                s.with_prec(p)
            })
            .collect();
        Series::from_coeffs(outer, InnerCtx::new(inner, self.field.clone()), 0, coeffs, self.prec)
    }

    /// Inverse of `to_l2`; the jet precision is the largest total degree
    /// certified by every coefficient.
    pub fn from_l2(x: &L2Series, outer_is_t: bool) -> Result<Jet> {
        let mut prec = x.prec();
        for (k, c) in x.terms() {
            prec = prec.min(c.prec().shift(k));
        }
        let mut out = Jet::zero(x.field(), prec);
        for (k, c) in x.terms() {
            for (n, a) in c.terms() {
                if !prec.covers(k + n) {
                    continue;
                }
                if k < 0 || n < 0 {
                    return Err(Error::NonpositiveValuation);
                }
                if outer_is_t {
                    out.add_term(n, k, a);
                } else {
                    out.add_term(k, n, a);
                }
            }
        }
        Ok(out)
    }
}

/// A regular curve germ through the origin, given as a graph.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveGerm {
    /// `t = g(u)`, parametrised by `u`.
    TGraph(LSeries),
    /// `u = g(t)`, parametrised by `t`.
    UGraph(LSeries),
}

impl CurveGerm {
    /// The coordinate line `t = 0`.
    pub fn t_axis(field: &Field) -> Self {
        CurveGerm::TGraph(LSeries::exact_zero(var("u"), field.clone()))
    }

    /// The coordinate line `u = 0`.
    pub fn u_axis(field: &Field) -> Self {
        CurveGerm::UGraph(LSeries::exact_zero(var("t"), field.clone()))
    }

    fn graph(&self) -> &LSeries {
        match self {
            CurveGerm::TGraph(g) | CurveGerm::UGraph(g) => g,
        }
    }

    pub fn param_var(&self) -> Var {
        match self {
            CurveGerm::TGraph(_) => var("u"),
            CurveGerm::UGraph(_) => var("t"),
        }
    }

    fn check(&self) -> Result<()> {
        let g = self.graph();
        if g.var() != &self.param_var() {
            return Err(Error::VariableMismatch(g.var().to_string(), self.param_var().to_string()));
        }
        if g.lower_bound() < Precision::Bounded(1) {
            return Err(Error::NotIncident("curve graph must vanish at the origin".into()));
        }
        Ok(())
    }

    /// A local equation `t − g(u)` or `u − g(t)`.
    pub fn equation(&self) -> Result<Jet> {
        self.check()?;
        let g = self.graph();
        let field = g.field();
        match self {
            CurveGerm::TGraph(_) => Jet::t(field).try_sub(&Jet::from_series(g, true)?),
            CurveGerm::UGraph(_) => Jet::u(field).try_sub(&Jet::from_series(g, false)?),
        }
    }

    /// Tangent direction `(du : dt)`.
    pub fn tangent(&self) -> (FieldElem, FieldElem) {
        let g = self.graph();
        let one = FieldElem::one(g.field());
        let g1 = g.coeff(1).unwrap_or_else(|| FieldElem::zero(g.field()));
        match self {
            CurveGerm::TGraph(_) => (one, g1),
            CurveGerm::UGraph(_) => (g1, one),
        }
    }

    pub fn transversal(&self, o: &CurveGerm) -> bool {
        let (a, b) = self.tangent();
        let (c, d) = o.tangent();
        a.try_mul(&d).and_then(|x| x.try_sub(&b.try_mul(&c)?)).map(|x| !x.is_zero()).unwrap_or(false)
    }

    /// Same curve up to the known precision of both graphs.
    pub fn same_as(&self, o: &CurveGerm) -> bool {
        match (self, o) {
            (CurveGerm::TGraph(a), CurveGerm::TGraph(b)) | (CurveGerm::UGraph(a), CurveGerm::UGraph(b)) => {
                a.eq_mod_prec(b)
            }
            _ => false,
        }
    }

    /// The regular curve `F = 0`, solved for `t` when `∂F/∂t(0) ≠ 0` and for
    /// `u` otherwise.
    pub fn from_equation(f: &Jet) -> Result<CurveGerm> {
        if !f.coeff(0, 0).is_zero() {
            return Err(Error::NotIncident("the curve does not pass through the origin".into()));
        }
        let n = f.prec().bound().unwrap_or_else(|| f.terms().map(|(i, j, _)| i + j).max().unwrap_or(0) + 1);
        let field = f.field().clone();
        let (ct, cu) = (f.coeff(0, 1), f.coeff(1, 0));
        let solve_t = !ct.is_zero();
        if !solve_t && cu.is_zero() {
            return Err(Error::NotRegular);
        }
        let lin = if solve_t { ct } else { cu };
        let p = var(if solve_t { "u" } else { "t" });
        let param = LSeries::var_power(p.clone(), field.clone(), 1);
        let lin_inv = lin.inv()?;
        let mut g = LSeries::zero(p, field.clone(), Precision::Bounded(n));
        for _ in 0..=n {
            let val = if solve_t { f.eval_on(&param, &g)? } else { f.eval_on(&g, &param)? };
            g = g.try_sub(&val.mul_coeff(&lin_inv))?.with_prec(Precision::Bounded(n));
        }
        Ok(if solve_t { CurveGerm::TGraph(g) } else { CurveGerm::UGraph(g) })
    }

    /// `h` restricted to the curve, as a series in the graph parameter.
    pub fn restrict(&self, h: &Jet) -> Result<LSeries> {
        self.check()?;
        let g = self.graph();
        let p = LSeries::var_power(self.param_var(), g.field().clone(), 1);
        match self {
            CurveGerm::TGraph(_) => h.eval_on(&p, g),
            CurveGerm::UGraph(_) => h.eval_on(g, &p),
        }
    }

    /// `h` in the local field of the curve: outer variable `s` a local
    /// equation, inner variable the graph parameter.
    pub fn localize(&self, h: &Jet) -> Result<L2Series> {
        self.check()?;
        let g = self.graph();
        let field = h.field().join(g.field())?;
        let inner = self.param_var();
        // A jet agreeing with the curve's own equation is taken to be that
        // equation: truncation alone cannot certify its valuation.
        if h.eq_mod_prec(&self.equation()?) {
            return Ok(L2Series::monomial2(var("s"), inner, FieldElem::one(&field), 0, 1));
        }
        let (u, t) = (Jet::u(&field), Jet::t(&field));
        match self {
            CurveGerm::TGraph(_) => {
                let moved = h.compose(&u, &t.try_add(&Jet::from_series(g, true)?)?)?;
                Ok(moved.to_l2(true, var("s"), var("u")))
            }
            CurveGerm::UGraph(_) => {
                let moved = h.compose(&u.try_add(&Jet::from_series(g, false)?)?, &t)?;
                Ok(moved.to_l2(false, var("s"), var("t")))
            }
        }
    }
}

/// Tame symbol of a `K₂` element along a regular curve.
pub fn tame_along(x: &K2Elem<Jet>, c: &CurveGerm) -> Result<LSeries> {
    let field = x.pairs.iter().try_fold(c.graph().field().clone(), |f, p| f.join(p.first.field())?.join(p.second.field()))?;
    let mut acc = LSeries::one(c.param_var(), field);
    for p in &x.pairs {
        let v = tame_symbol(&c.localize(&p.first)?, &c.localize(&p.second)?)?;
        acc = acc.try_mul(&v.pow(p.mult)?)?;
    }
    Ok(acc)
}

/// A prescribed value on a regular curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveTarget {
    pub curve: CurveGerm,
    pub value: LSeries,
}

fn eliminate(c1: &CurveGerm, f1: &LSeries, c2: &CurveGerm, prec: i64) -> Result<(K2Elem<Jet>, LSeries)> {
    let t1 = c1.equation()?.bounded(prec);
    let t2 = c2.equation()?.bounded(prec);
    let s = c1.restrict(&t2)?;
    let rho = s.reverse(var("s"), Some(prec))?;
    let ft = f1.compose(&rho)?;
    let nu = ft.valuation()?;
    let w = ft.shift(-nu);
    let mut out = K2Elem::new();
    if nu != 0 {
        out.push(t2.clone(), t1.clone(), nu);
    }
    out.push(Jet::eval_series(&w, &t2)?, t1.clone(), 1);
    let upd = c2.restrict(&t1)?.pow(nu)?;
    Ok((out, upd))
}

/// A `K₂` element whose tame symbol along each target curve is the target
/// value and which is trivial along every other curve. Works to total degree
/// `prec`.
pub fn symbol_preimage(targets: &[CurveTarget], prec: i64) -> Result<K2Elem<Jet>> {
    let mut total = 0i64;
    for t in targets {
        t.curve.check()?;
        if t.value.var() != &t.curve.param_var() {
            return Err(Error::VariableMismatch(t.value.var().to_string(), t.curve.param_var().to_string()));
        }
        total += t.value.valuation()?;
    }
    if total != 0 {
        return Err(Error::Unbalanced(total));
    }
    let mut list: Vec<(CurveGerm, LSeries)> = targets.iter().map(|t| (t.curve.clone(), t.value.clone())).collect();
    let mut out = K2Elem::new();
    loop {
        if list.is_empty() {
            return Ok(out);
        }
        if list.len() == 1 {
            let (c, f) = list.pop().unwrap();
            // the graph parameter is transversal to the curve
            let tc = c.equation()?.bounded(prec);
            let i_f = Jet::from_series(&f.with_prec(f.prec().cap(prec)), matches!(c, CurveGerm::TGraph(_)))?;
            out.push(i_f, tc, 1);
            return Ok(out);
        }
        let pair = (0..list.len())
            .flat_map(|i| (0..list.len()).map(move |j| (i, j)))
            .find(|&(i, j)| i != j && list[i].0.transversal(&list[j].0));
        match pair {
            Some((i, j)) => {
                let (c1, f1) = list.remove(i);
                let j = if j > i { j - 1 } else { j };
                let (theta, upd) = eliminate(&c1, &f1, &list[j].0, prec)?;
                out = out.times(&theta);
                list[j].1 = list[j].1.try_mul(&upd)?;
            }
            None => {
                let field = list[0].1.field().clone();
                let (a, _) = list[0].0.tangent();
                let g = if a.is_zero() { CurveGerm::t_axis(&field) } else { CurveGerm::u_axis(&field) };
                let one = LSeries::one(g.param_var(), field);
                list.push((g, one));
            }
        }
    }
}

/// A prescribed value `h₁/h₂ mod F` on the curve `F = 0`, which may be
/// singular at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularTarget {
    pub equation: Jet,
    pub h1: Jet,
    pub h2: Jet,
}

struct JetPrep {
    nu1: i64,
    nu2: i64,
    b: Jet,
    g: Jet,
}

fn weierstrass_jet(f: &Jet) -> Result<JetPrep> {
    let w = weierstrass_prepare(&f.to_l2(true, var("t"), var("u")))?;
    Ok(JetPrep { nu1: w.nu1, nu2: w.nu2, b: Jet::from_l2(&w.b, true)?, g: Jet::from_l2(&w.g, true)? })
}

fn remainder(h: &Jet, g: &Jet) -> Result<Jet> {
    let (_, r) = weierstrass_divide(&h.to_l2(true, var("t"), var("u")), &g.to_l2(true, var("t"), var("u")))?;
    Jet::from_l2(&r, true)
}

/// `t + a(u)` as the graph `t = −a(u)`, whose equation is `g` itself.
fn linear_graph(g: &Jet) -> Result<CurveGerm> {
    let mut a = LSeries::zero(var("u"), g.field().clone(), g.prec());
    for (i, j, c) in g.terms() {
        if j == 0 {
            a = a.try_sub(&LSeries::monomial(var("u"), g.field().clone(), c.clone(), i))?;
        }
    }
    Ok(CurveGerm::TGraph(a.with_prec(g.prec())))
}

struct Reducer {
    depth_limit: usize,
    out: K2Elem<Jet>,
    support: Vec<CurveGerm>,
}

impl Reducer {
    fn note(&mut self, c: CurveGerm) {
        if !self.support.iter().any(|s| s.same_as(&c)) {
            self.support.push(c);
        }
    }

    fn reduce(&mut self, f: &Jet, h1: &Jet, h2: &Jet, depth: usize) -> Result<()> {
        if depth > self.depth_limit {
            return Err(Error::DepthLimit(self.depth_limit));
        }
        let w = weierstrass_jet(f)?;
        if w.nu1 != 0 {
            return Err(Error::NotRegular);
        }
        let g = w.g;
        let r1 = remainder(h1, &g)?;
        let r2 = remainder(h2, &g)?;
        if r1.is_known_zero() || r2.is_known_zero() {
            return Err(Error::ZeroElement);
        }
        for (r, sign) in [(r1, 1), (r2, -1)] {
            // (r, g) = (b, g)(u, g)^n (gᵢ, g) keeps every entry a unit or a
            // known curve equation
            let JetPrep { nu1: n, nu2: d, b, g: gi } = weierstrass_jet(&r)?;
            self.out.push(b, g.clone(), sign);
            if n > 0 {
                self.out.push(Jet::u(g.field()), g.clone(), sign * n);
                self.note(CurveGerm::u_axis(g.field()));
            }
            if d > 0 {
                self.out.push(gi.clone(), g.clone(), sign);
            }
            match d {
                0 => {}
                1 => self.note(linear_graph(&gi)?),
                _ => {
                    // cancel the value g^{∓1} left on (gi)
                    let one = Jet::one(g.field());
                    if sign > 0 {
                        self.reduce(&gi, &g, &one, depth + 1)?;
                    } else {
                        self.reduce(&gi, &one, &g, depth + 1)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Regular and singular targets together. Singular targets are first reduced
/// to a symbol supported on regular curves (recursing at most `depth_limit`
/// times); the regular pass then corrects those curves.
pub fn symbol_preimage_singular(
    regular: &[CurveTarget],
    singular: &[SingularTarget],
    prec: i64,
    depth_limit: usize,
) -> Result<K2Elem<Jet>> {
    let mut red = Reducer { depth_limit, out: K2Elem::new(), support: Vec::new() };
    let mut regular = regular.to_vec();
    for s in singular {
        let f = s.equation.bounded(prec);
        let w = weierstrass_jet(&f)?;
        if w.nu1 == 0 && w.nu2 == 1 {
            let c = CurveGerm::from_equation(&f)?;
            let v = c.restrict(&s.h1.bounded(prec))?.div(&c.restrict(&s.h2.bounded(prec))?)?;
            regular.push(CurveTarget { curve: c, value: v });
            continue;
        }
        red.reduce(&f, &s.h1.bounded(prec), &s.h2.bounded(prec), 0)?;
    }
    let psi0 = red.out;
    let mut list = Vec::new();
    for t in &regular {
        let v = t.value.try_mul(&tame_along(&psi0, &t.curve)?.inv()?)?;
        list.push(CurveTarget { curve: t.curve.clone(), value: v });
    }
    for c in red.support {
        if regular.iter().any(|t| t.curve.same_as(&c)) {
            continue;
        }
        let v = tame_along(&psi0, &c)?.inv()?;
        list.push(CurveTarget { curve: c, value: v });
    }
    Ok(psi0.times(&symbol_preimage(&list, prec)?))
}

/// Tame symbol along the curve `F = 0` read on a branch `s ↦ (u(s), t(s))`.
pub fn tame_along_branch(x: &K2Elem<Jet>, f: &Jet, branch: (&LSeries, &LSeries)) -> Result<LSeries> {
    let (bu, bt) = branch;
    let split = |h: &Jet| -> Result<(i64, LSeries)> {
        let mut h = h.clone();
        let mut nu = 0;
        loop {
            let v = h.eval_on(bu, bt)?;
            if !v.is_known_zero() {
                return Ok((nu, v));
            }
            if h.is_known_zero() {
                return Err(Error::precision("element vanishes to the working precision"));
            }
            let (q, _) = weierstrass_divide(&h.to_l2(true, var("t"), var("u")), &f.to_l2(true, var("t"), var("u")))?;
            h = Jet::from_l2(&q, true)?;
            nu += 1;
        }
    };
    let mut acc = LSeries::one(bu.var().clone(), bu.field().join(f.field())?);
    for p in &x.pairs {
        let (a, ra) = split(&p.first)?;
        let (b, rb) = split(&p.second)?;
        let mut v = ra.pow(b)?.try_mul(&rb.pow(-a)?)?;
        if (a * b) % 2 != 0 {
            v = v.neg();
        }
        acc = acc.try_mul(&v.pow(p.mult)?)?;
    }
    Ok(acc)
}
