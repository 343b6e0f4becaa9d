//! Finite-support adeles of 2-forms and of `K₂`, the adelic conditions,
//! the boundary maps of the adelic complexes, global direct images,
//! reciprocity checks and the cycle maps.
//!
//! An adele is a finite map from flags to local values together with a
//! default class for every other flag: zero (identity) or regular.
//! Membership in the diagonal subgroups is by construction: triples are
//! built from global, per-curve and per-point rational data.

pub mod poly;
pub mod scenario;

use std::collections::{BTreeMap, BTreeSet};

use crate::coeff::{Field, FieldElem};
use crate::direct_image::{di_form, di_symbol};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::laurent::{Form1, LSeries};
use crate::local2d::{dlog_wedge, Form2, L2Series};
use crate::precision::Precision;
use crate::report::{Case, Report};
use crate::series::var;
use crate::symbols::{tame_symbol, K2Elem};

pub use scenario::{BasePoint, CurveSpec, ExtensionSpec, FlagGeometry, FlagId, PointSpec, Scenario, ScenarioSpec, Surface};

/// Value at every flag outside the support.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DefaultClass {
    /// Zero (for forms) or the identity (for `K₂`).
    Zero,
    /// Regular: `Ω²_O`, respectively `K₂(O)`.
    Regular,
}

#[derive(Clone, Debug)]
pub struct AdeleVec<V> {
    pub support: BTreeMap<FlagId, V>,
    pub default: DefaultClass,
    /// Flags whose value is known, from its construction, to lie in
    /// `K₂(Ô_{x,X}(∞C))`.
    pub regular_off_curve: BTreeSet<FlagId>,
}

impl<V> Default for AdeleVec<V> {
    fn default() -> Self {
        AdeleVec { support: BTreeMap::new(), default: DefaultClass::Zero, regular_off_curve: BTreeSet::new() }
    }
}

impl<V: Clone> AdeleVec<V> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, f: FlagId, v: V) {
        self.support.insert(f, v);
    }

    pub fn flags(&self) -> impl Iterator<Item = &FlagId> {
        self.support.keys()
    }

    pub fn get(&self, f: &FlagId) -> Option<&V> {
        self.support.get(f)
    }
}

pub type FormAdele = AdeleVec<Form2>;
pub type K2Adele = AdeleVec<K2Elem<L2Series>>;

/// Symbol data `∏ {f_i, g_i}^{m_i}` of global functions.
pub type SymbolData = Vec<(Expr, Expr, i64)>;

/// `(f₀, f₁, f₂)`: global data, per-curve data and per-point data.
#[derive(Clone, Debug, Default)]
pub struct Triple<D> {
    pub global: D,
    pub curves: BTreeMap<String, D>,
    pub points: BTreeMap<String, D>,
}

impl<D> Triple<D> {
    pub fn new(global: D) -> Self {
        Triple { global, curves: BTreeMap::new(), points: BTreeMap::new() }
    }
}

/// Precision of local expansions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Prec {
    pub inner: i64,
    pub outer: i64,
}

impl Prec {
    pub fn new(inner: i64, outer: i64) -> Self {
        Prec { inner, outer }
    }
}

fn zero_form(scn: &Scenario, f: &FlagId, p: Prec) -> Result<Form2> {
    scn.expand_form(&Expr::num(0), f, p.inner, p.outer)
}

/// The diagonal image of a global form `g du∧dt`.
pub fn form_adele(scn: &Scenario, g: &Expr, flags: &[FlagId], p: Prec) -> Result<FormAdele> {
    let mut a = FormAdele::new();
    for f in flags {
        a.insert(f.clone(), scn.expand_form(g, f, p.inner, p.outer)?);
    }
    Ok(a)
}

fn expand_symbols(scn: &Scenario, data: &SymbolData, f: &FlagId, p: Prec) -> Result<K2Elem<L2Series>> {
    let mut out = K2Elem::new();
    for (a, b, m) in data {
        // symbol maps take logarithms, which need a stated precision
        let x = scn.expand_function(a, f, p.inner, p.outer)?.bounded(p.inner, p.outer);
        let y = scn.expand_function(b, f, p.inner, p.outer)?.bounded(p.inner, p.outer);
        out.push(x, y, *m);
    }
    Ok(out)
}

fn symbols_regular_off_curve(scn: &Scenario, data: &SymbolData, f: &FlagId) -> Result<bool> {
    for (a, b, _) in data {
        if !scn.unit_off_curve(a, f)? || !scn.unit_off_curve(b, f)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The diagonal image of a global symbol.
pub fn k2_adele(scn: &Scenario, data: &SymbolData, flags: &[FlagId], p: Prec) -> Result<K2Adele> {
    let mut a = K2Adele::new();
    for f in flags {
        a.insert(f.clone(), expand_symbols(scn, data, f, p)?);
        if symbols_regular_off_curve(scn, data, f)? {
            a.regular_off_curve.insert(f.clone());
        }
    }
    Ok(a)
}

/// `(f₀, f₁, f₂) ↦ (f₂ − f₀, f₀ + f₁, −f₁ − f₂)` on the given flags.
pub fn boundary_forms(scn: &Scenario, tri: &Triple<Expr>, flags: &[FlagId], p: Prec) -> Result<[FormAdele; 3]> {
    let mut out = [FormAdele::new(), FormAdele::new(), FormAdele::new()];
    for f in flags {
        let w0 = scn.expand_form(&tri.global, f, p.inner, p.outer)?;
        let w1 = match tri.curves.get(&f.curve) {
            Some(e) => scn.expand_form(e, f, p.inner, p.outer)?,
            None => zero_form(scn, f, p)?,
        };
        let w2 = match tri.points.get(&f.point) {
            Some(e) => scn.expand_form(e, f, p.inner, p.outer)?,
            None => zero_form(scn, f, p)?,
        };
        out[0].insert(f.clone(), w2.try_sub(&w0)?);
        out[1].insert(f.clone(), w0.try_add(&w1)?);
        out[2].insert(f.clone(), w1.neg().try_sub(&w2)?);
    }
    Ok(out)
}

/// `(f₀, f₁, f₂) ↦ (f₂·f₀^{-1}, f₀·f₁, f₁^{-1}·f₂^{-1})` on the given flags.
pub fn boundary_k2(scn: &Scenario, tri: &Triple<SymbolData>, flags: &[FlagId], p: Prec) -> Result<[K2Adele; 3]> {
    let mut out = [K2Adele::new(), K2Adele::new(), K2Adele::new()];
    let empty = SymbolData::new();
    for f in flags {
        let d1 = tri.curves.get(&f.curve).unwrap_or(&empty);
        let d2 = tri.points.get(&f.point).unwrap_or(&empty);
        let x0 = expand_symbols(scn, &tri.global, f, p)?;
        let x1 = expand_symbols(scn, d1, f, p)?;
        let x2 = expand_symbols(scn, d2, f, p)?;
        out[0].insert(f.clone(), x2.times(&x0.inverse()));
        out[1].insert(f.clone(), x0.times(&x1));
        out[2].insert(f.clone(), x1.inverse().times(&x2.inverse()));
        let r0 = symbols_regular_off_curve(scn, &tri.global, f)?;
        let r1 = symbols_regular_off_curve(scn, d1, f)?;
        let r2 = symbols_regular_off_curve(scn, d2, f)?;
        for (i, ok) in [(0, r0 && r2), (1, r0 && r1), (2, r1 && r2)] {
            if ok {
                out[i].regular_off_curve.insert(f.clone());
            }
        }
    }
    Ok(out)
}

/// `(g₁, g₂, g₃) ↦ g₁ + g₂ + g₃`.
pub fn sum_forms(parts: &[&FormAdele]) -> Result<FormAdele> {
    let mut out = FormAdele::new();
    for a in parts {
        if a.default == DefaultClass::Regular {
            out.default = DefaultClass::Regular;
        }
        for (f, w) in &a.support {
            let v = match out.support.get(f) {
                Some(acc) => acc.try_add(w)?,
                None => w.clone(),
            };
            out.insert(f.clone(), v);
        }
    }
    Ok(out)
}

/// `(g₁, g₂, g₃) ↦ g₁ · g₂ · g₃`.
pub fn product_k2(parts: &[&K2Adele]) -> K2Adele {
    let mut out = K2Adele::new();
    let mut everywhere: Option<BTreeSet<FlagId>> = None;
    for a in parts {
        if a.default == DefaultClass::Regular {
            out.default = DefaultClass::Regular;
        }
        for (f, x) in &a.support {
            let v = match out.support.get(f) {
                Some(acc) => acc.times(x),
                None => x.clone(),
            };
            out.insert(f.clone(), v);
        }
        let r: BTreeSet<FlagId> = a.regular_off_curve.clone();
        everywhere = Some(match everywhere {
            None => r,
            Some(e) => e.intersection(&r).cloned().collect(),
        });
    }
    out.regular_off_curve = everywhere.unwrap_or_default();
    out
}

fn require_zero_default<V>(a: &AdeleVec<V>) -> Result<()> {
    if a.default == DefaultClass::Regular {
        return Err(Error::Unsupported("global direct image of a vector with regular default class".into()));
    }
    Ok(())
}

/// `Σ_{f(x)=s, C∋x} f_*^{x,C}` over the support, in `k((t))dt`, mod `t^po`.
pub fn global_pushforward_forms(scn: &Scenario, a: &FormAdele, s: &BasePoint, po: i64) -> Result<Form1> {
    require_zero_default(a)?;
    let mut acc = Form1::new(LSeries::exact_zero(var("t"), Field::Rationals));
    for (f, w) in &a.support {
        if &scn.base_point(&f.point)? != s {
            continue;
        }
        acc = acc.try_add(&di_form(&scn.flag_context(f)?, w)?)?;
    }
    Ok(Form1::new(acc.coeff.with_prec(Precision::Bounded(po))))
}

/// `∏ f_*(·,·)_{x,C}` over the support, in `k((t))^*`, mod `t^po`.
pub fn global_pushforward_k2(scn: &Scenario, a: &K2Adele, s: &BasePoint, po: i64) -> Result<LSeries> {
    require_zero_default(a)?;
    let mut acc = LSeries::one(var("t"), Field::Rationals);
    for (f, x) in &a.support {
        if &scn.base_point(&f.point)? != s {
            continue;
        }
        acc = acc.try_mul(&pushforward_local_k2(scn, f, x)?)?;
    }
    Ok(acc.with_prec(Precision::Bounded(po)))
}

/// `f_*` of one local `K₂` value.
pub fn pushforward_local_k2(scn: &Scenario, f: &FlagId, x: &K2Elem<L2Series>) -> Result<LSeries> {
    let ctx = scn.flag_context(f)?;
    let mut acc = LSeries::one(var("t"), Field::Rationals);
    for p in &x.pairs {
        acc = acc.try_mul(&di_symbol(&ctx, &p.first, &p.second)?.pow(p.mult)?)?;
    }
    Ok(acc)
}

/// Base points touched by the support.
pub fn base_points<V>(scn: &Scenario, a: &AdeleVec<V>) -> Result<BTreeSet<BasePoint>> {
    a.support.keys().map(|f| scn.base_point(&f.point)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReciprocityKind {
    FibreForms,
    PointForms,
    FibreSymbols,
    PointSymbols,
}

impl ReciprocityKind {
    pub fn name(self) -> &'static str {
        match self {
            ReciprocityKind::FibreForms => "fibre-forms",
            ReciprocityKind::PointForms => "point-forms",
            ReciprocityKind::FibreSymbols => "fibre-symbols",
            ReciprocityKind::PointSymbols => "point-symbols",
        }
    }
}

#[derive(Clone, Debug)]
pub enum ReciprocityInput {
    /// `g du∧dt` for a global `g`.
    Form(Expr),
    /// `{φ, ψ}` of global functions.
    Symbol(Expr, Expr),
}

/// Sums (or multiplies) the local direct images over the caller-declared
/// flags and checks the result vanishes (is 1) modulo `t^po`.
pub fn verify_reciprocity(
    kind: ReciprocityKind,
    scn: &Scenario,
    input: &ReciprocityInput,
    flags: &[FlagId],
    p: Prec,
) -> Result<Report> {
    let first = flags.first().ok_or_else(|| Error::UnknownFlag("empty flag list".into()))?;
    let s = scn.base_point(&first.point)?;
    for f in flags {
        let ok = match kind {
            ReciprocityKind::FibreForms | ReciprocityKind::FibreSymbols => {
                scn.is_fibre_flag(f)? && scn.base_point(&f.point)? == s && f.curve == first.curve
            }
            ReciprocityKind::PointForms | ReciprocityKind::PointSymbols => f.point == first.point,
        };
        if !ok {
            return Err(Error::UnknownFlag(format!("{f} does not belong to a {} check", kind.name())));
        }
    }
    let declared = flags.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(",");
    let mut report = Report::new(kind.name());
    match input {
        ReciprocityInput::Form(g) => {
            let a = form_adele(scn, g, flags, p)?;
            let mut acc = Form1::new(LSeries::exact_zero(var("t"), Field::Rationals));
            for (f, w) in &a.support {
                let c = di_form(&scn.flag_context(f)?, w)?;
                report.push(Case::new([("flag", f.to_string()), ("form", g.to_string())], c.to_string(), true));
                acc = acc.try_add(&c)?;
            }
            let total = acc.coeff.with_prec(Precision::Bounded(p.outer));
            let ok = total.is_known_zero();
            report.push(Case::new([("sum over", declared), ("form", g.to_string())], total.to_string(), ok));
        }
        ReciprocityInput::Symbol(a, b) => {
            let data = vec![(a.clone(), b.clone(), 1)];
            let x = k2_adele(scn, &data, flags, p)?;
            let mut acc = LSeries::one(var("t"), Field::Rationals);
            let label = format!("{{{a}, {b}}}");
            for (f, v) in &x.support {
                let c = pushforward_local_k2(scn, f, v)?;
                report.push(Case::new([("flag", f.to_string()), ("symbol", label.clone())], c.to_string(), true));
                acc = acc.try_mul(&c)?;
            }
            let total = acc.with_prec(Precision::Bounded(p.outer));
            let one = LSeries::one(var("t"), Field::Rationals);
            let ok = total.try_sub(&one)?.is_known_zero();
            report.push(Case::new([("product over", declared), ("symbol", label)], total.to_string(), ok));
        }
    }
    Ok(report)
}

/// Result of an adelic-condition check.
#[derive(Clone, Debug)]
pub struct AdelicCheck {
    /// Per-curve bound: `ν(ω_{x,C}) ≥ −D_C` (forms) or the curves carrying
    /// entries outside `K₂(O)` (symbols).
    pub divisor: BTreeMap<String, i64>,
    pub report: Report,
}

fn check_variables(scn: &Scenario, f: &FlagId, x: &L2Series) -> Result<()> {
    let ctx = scn.flag_context(f)?;
    if x.inner_var() != &ctx.inner || x.outer_var() != &ctx.outer {
        return Err(Error::VariableMismatch(format!("{}/{}", x.inner_var(), x.outer_var()), f.to_string()));
    }
    ctx.field.join(x.field())?;
    Ok(())
}

/// Index of the first outer coefficient not vanishing modulo its inner
/// precision (a lower bound for the valuation); `None` if there is none.
fn outer_valuation(x: &L2Series) -> Result<Option<i64>> {
    Ok(x.terms().find(|(_, c)| !c.is_known_zero()).map(|(k, _)| k))
}

/// Both conditions on a form adele. The divisor reports `D` with the adele
/// in `Ω²_A(D)`, using `ν(g)` for `ω = g du∧dt` as the order of `ω`.
pub fn check_adelic_form(scn: &Scenario, a: &FormAdele) -> AdelicCheck {
    let mut report = Report::new("adelic-form");
    let mut divisor: BTreeMap<String, i64> = BTreeMap::new();
    for (f, w) in &a.support {
        let verdict = check_variables(scn, f, &w.g).and_then(|_| outer_valuation(&w.g));
        match verdict {
            Ok(v) => {
                let d = v.map_or(0, |v| (-v).max(0));
                let e = divisor.entry(f.curve.clone()).or_insert(0);
                *e = (*e).max(d);
                let shown = v.map_or("zero".to_string(), |v| v.to_string());
                report.push(Case::new([("flag", f.to_string()), ("condition", "1".to_string())], format!("nu >= {shown}"), true));
            }
            Err(e) => report.push(Case::new([("flag", f.to_string()), ("condition", "1".to_string())], e.to_string(), false)),
        }
    }
    divisor.retain(|_, d| *d != 0);
    let d = divisor.iter().map(|(c, n)| format!("{n}*{c}")).collect::<Vec<_>>().join(" + ");
    report.push(Case::new([("condition", "1")], format!("D = {}", if d.is_empty() { "0" } else { &d }), true));
    let default = match a.default {
        DefaultClass::Zero => "zero",
        DefaultClass::Regular => "regular",
    };
    // finitely many flags carry data; elsewhere the default class is integral
    report.push(Case::new([("condition", "2"), ("default", default)], "finite support", true));
    AdelicCheck { divisor, report }
}

/// `k` with `x ∈ 1 + m^k` (`m = tO`), reading coefficients that vanish
/// modulo the inner precision as zero; `None` when `x` is not a 1-unit.
fn unit_level(x: &L2Series) -> Result<Option<i64>> {
    let d = x.try_sub(&x.scalar_like_one())?;
    let first = d.terms().find(|(_, c)| !c.is_known_zero()).map(|(k, _)| k);
    Ok(match first {
        None => Some(d.prec().bound().unwrap_or(i64::MAX)),
        Some(k) if k >= 1 => Some(k),
        Some(_) => None,
    })
}

trait OneLike {
    fn scalar_like_one(&self) -> Self;
}

impl OneLike for L2Series {
    fn scalar_like_one(&self) -> Self {
        L2Series::constant2(self.outer_var().clone(), self.inner_var().clone(), FieldElem::one(self.field()))
    }
}

/// Classifies one generator `{a, b}`: `K₂(O, m^k)` for a Stein generator
/// `{1 + i, b}` with `i ∈ m^k` and `b` a unit, `K₂(O)` for two units.
fn classify_pair(a: &L2Series, b: &L2Series) -> Result<(String, Option<i64>)> {
    let (va, vb) = (a.valuation()?, b.valuation()?);
    if va != 0 || vb != 0 {
        return Ok(("K".into(), None));
    }
    let la = unit_level(a)?;
    let lb = unit_level(b)?;
    Ok(match la.into_iter().chain(lb).max() {
        Some(k) if k == i64::MAX => ("O,identity".into(), Some(k)),
        Some(k) => (format!("O,m^{k}"), Some(k)),
        None => ("O".into(), Some(0)),
    })
}

/// Both conditions on a `K₂` adele, with support entries classified by
/// membership class.
pub fn check_adelic_k2(scn: &Scenario, a: &K2Adele, l: i64) -> AdelicCheck {
    let mut report = Report::new("adelic-k2");
    let mut divisor: BTreeMap<String, i64> = BTreeMap::new();
    for (f, x) in &a.support {
        let mut classes = Vec::new();
        let mut outside_o = false;
        let mut level = i64::MAX;
        let mut err = None;
        for p in &x.pairs {
            let r = check_variables(scn, f, &p.first)
                .and_then(|_| check_variables(scn, f, &p.second))
                .and_then(|_| classify_pair(&p.first, &p.second));
            match r {
                Ok((c, lv)) => {
                    match lv {
                        None => outside_o = true,
                        Some(k) => level = level.min(k),
                    }
                    classes.push(c);
                }
                Err(e) => err = Some(e),
            }
        }
        if let Some(e) = err {
            report.push(Case::new([("flag", f.to_string())], e.to_string(), false));
            continue;
        }
        let class = if outside_o {
            divisor.insert(f.curve.clone(), 1);
            if a.regular_off_curve.contains(f) {
                "K2(O_hat(inf C))".to_string()
            } else {
                "K2(K)".to_string()
            }
        } else if level == i64::MAX {
            "identity".to_string()
        } else if level >= l && level > 0 {
            format!("K2(O, m^{level})")
        } else {
            "K2(O)".to_string()
        };
        report.push(Case::new(
            [("flag", f.to_string()), ("l", l.to_string()), ("pairs", classes.join(";"))],
            class,
            true,
        ));
    }
    report.push(Case::new([("condition", "1")], format!("{} curve(s) outside K2(O)", divisor.len()), true));
    report.push(Case::new([("condition", "2".to_string()), ("l", l.to_string())], "finite support", true));
    AdelicCheck { divisor, report }
}

/// The Tate map `{f, g} ↦ df/f ∧ dg/g`, flag by flag.
pub fn tate_map(a: &K2Adele) -> Result<FormAdele> {
    let mut out = FormAdele { default: a.default, ..FormAdele::new() };
    for (f, x) in &a.support {
        let mut acc: Option<Form2> = None;
        for p in &x.pairs {
            let w = dlog_wedge(&p.first, &p.second)?;
            let w = w.mul_series(&w.g.scalar_like_one().scale_int(p.mult))?;
            acc = Some(match acc {
                None => w,
                Some(a) => a.try_add(&w)?,
            });
        }
        if let Some(w) = acc {
            out.insert(f.clone(), w);
        }
    }
    Ok(out)
}

trait ScaleInt {
    fn scale_int(&self, m: i64) -> Self;
}

impl ScaleInt for L2Series {
    fn scale_int(&self, m: i64) -> Self {
        self.scale(&crate::coeff::rat(m))
    }
}

/// Pairs two multiplicative adeles flag-wise (missing entries are 1).
pub fn pair_ideles(f: &AdeleVec<L2Series>, g: &AdeleVec<L2Series>) -> K2Adele {
    let mut out = K2Adele::new();
    let flags: BTreeSet<&FlagId> = f.support.keys().chain(g.support.keys()).collect();
    for fl in flags {
        let (a, b) = match (f.get(fl), g.get(fl)) {
            (Some(a), Some(b)) => (a.clone(), b.clone()),
            (Some(a), None) => (a.clone(), a.scalar_like_one()),
            (None, Some(b)) => (b.scalar_like_one(), b.clone()),
            (None, None) => unreachable!(),
        };
        out.insert(fl.clone(), K2Elem::symbol(a, b));
    }
    if f.default == DefaultClass::Regular || g.default == DefaultClass::Regular {
        out.default = DefaultClass::Regular;
    }
    out
}

/// `⊕_x Σ_{C∋x} ν_x (·,·)_C`: the 0-cycle of a `K₂` adele, by point name.
pub fn cycle_of_adele(a: &K2Adele) -> Result<BTreeMap<String, i64>> {
    let mut out: BTreeMap<String, i64> = BTreeMap::new();
    for (f, x) in &a.support {
        let mut n = 0;
        for p in &x.pairs {
            let t = tame_symbol(&p.first, &p.second)?;
            n += p.mult * t.valuation()?;
        }
        *out.entry(f.point.clone()).or_insert(0) += n;
    }
    out.retain(|_, n| *n != 0);
    Ok(out)
}

/// `s ↦ ν_s(f_* A)` for the base points under the support.
pub fn gysin_cycle(scn: &Scenario, a: &K2Adele, po: i64) -> Result<BTreeMap<BasePoint, i64>> {
    let mut out = BTreeMap::new();
    for s in base_points(scn, a)? {
        let v = global_pushforward_k2(scn, a, &s, po)?.valuation()?;
        if v != 0 {
            out.insert(s, v);
        }
    }
    Ok(out)
}

/// Push-forward of a 0-cycle: each point counts with the degree of its
/// residue field over that of its image.
pub fn push_cycle(scn: &Scenario, cycle: &BTreeMap<String, i64>) -> Result<BTreeMap<BasePoint, i64>> {
    let mut out: BTreeMap<BasePoint, i64> = BTreeMap::new();
    for (x, n) in cycle {
        *out.entry(scn.base_point(x)?).or_insert(0) += n * scn.residue_degree(x)? as i64;
    }
    out.retain(|_, n| *n != 0);
    Ok(out)
}

#[cfg(test)]
mod tests;
