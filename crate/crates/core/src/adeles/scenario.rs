//! Scenarios: a fibred surface `P¹×A¹ → A¹` or `P¹×P¹ → P¹`, declared
//! points and curves, and the embeddings `k(X) → K_{x,C}`.
//!
//! Every flag `(x, C)` uses the local field `k(x)((u))((t))` with `t` a
//! local equation of `C` and `u` a parameter of `C` at `x`:
//!
//! * fibre flags: `u` is the fibre coordinate centred at `x`, `t = τ − τ(x)`;
//! * curves étale over the base at `x`: `u = τ − τ(x)` and `t` is the
//!   curve's own equation;
//! * ramified curves: `u` is normalised so that `τ − τ(x) = u^e`.
//!
//! Near `u = ∞` (or `τ = ∞`) the chart coordinate is the reciprocal.
//! The base parameter at `s` is called `t` as well.

use std::collections::BTreeMap;
use std::fmt;

use crate::coeff::BigInt;
use serde::{Deserialize, Serialize};

use super::poly::{Poly2, RatFunc};
use crate::coeff::{parse_rational, Field, FieldElem, Rational};
use crate::direct_image::FlagContext;
use crate::error::{Error, Result};
use crate::expr::{eval, l2_env, parse_full, Caps, Env, EvalRing, Expr, Parsed};
use crate::laurent::{ls_exp, ls_log, LSeries};
use crate::local2d::{Form2, L2Series};
use crate::precision::Precision;
use crate::series::var;
use crate::symbols::preimage::Jet;
use crate::symbols::K2Elem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Surface {
    #[serde(rename = "P1xA1")]
    P1xA1,
    #[serde(rename = "P1xP1")]
    P1xP1,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionSpec {
    pub name: String,
    /// `c_0, …, c_{d−1}, 1` as rational strings.
    pub modulus: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSpec {
    pub name: String,
    /// An expression in the field generator, or `"inf"`.
    pub u: String,
    /// A rational, or `"inf"` on `P¹×P¹`.
    pub t: String,
    /// Name of the residue field extension, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    /// Curves the point is declared to lie on.
    #[serde(default)]
    pub curves: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CurveSpec {
    /// `τ = t`.
    Fibre { name: String, t: String },
    /// `u = g(τ)` (or `"inf"`).
    Section { name: String, u: String },
    /// An arbitrary equation in `u, t`.
    #[serde(alias = "curve")]
    Ramified { name: String, equation: String },
}

impl CurveSpec {
    pub fn name(&self) -> &str {
        match self {
            CurveSpec::Fibre { name, .. } | CurveSpec::Section { name, .. } | CurveSpec::Ramified { name, .. } => name,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub surface: Surface,
    #[serde(default)]
    pub extensions: Vec<ExtensionSpec>,
    pub points: Vec<PointSpec>,
    pub curves: Vec<CurveSpec>,
}

/// A coordinate of a point: finite, or the point at infinity.
#[derive(Clone, Debug, PartialEq)]
pub enum Coord {
    Finite(FieldElem),
    Infinity,
}

impl Coord {
    fn chart_value(&self, field: &Field) -> FieldElem {
        match self {
            Coord::Finite(c) => c.clone(),
            Coord::Infinity => FieldElem::zero(field),
        }
    }

    fn is_inf(&self) -> bool {
        matches!(self, Coord::Infinity)
    }
}

#[derive(Clone, Debug)]
pub struct Point {
    pub name: String,
    pub field: Field,
    pub u: Coord,
    pub t: Coord,
}

/// A point of the base curve: a rational value of `τ` or `∞`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BasePoint {
    Finite(Rational),
    Infinity,
}

impl fmt::Display for BasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BasePoint::Finite(q) => write!(f, "{}", crate::coeff::fmt_rational(q)),
            BasePoint::Infinity => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Debug)]
enum CurveKind {
    Fibre(BasePoint),
    Section(Option<Expr>),
    Implicit(Expr),
}

#[derive(Clone, Debug)]
pub struct Curve {
    pub name: String,
    kind: CurveKind,
}

impl Curve {
    pub fn is_fibre(&self) -> bool {
        matches!(self.kind, CurveKind::Fibre(_))
    }
}

/// A flag `(x, C)`, written `x@C`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FlagId {
    pub point: String,
    pub curve: String,
}

impl FlagId {
    pub fn new(point: &str, curve: &str) -> Self {
        FlagId { point: point.to_string(), curve: curve.to_string() }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let (p, c) = s
            .split_once('@')
            .ok_or_else(|| Error::UnknownFlag(format!("{s:?} (expected point@curve)")))?;
        Ok(FlagId::new(p.trim(), c.trim()))
    }
}

impl fmt::Display for FlagId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.point, self.curve)
    }
}

/// The coordinates of a flag: chart coordinates as series in `(u, t)`.
#[derive(Clone, Debug)]
pub struct FlagGeometry {
    pub ctx: FlagContext,
    /// Chart coordinates (`u` or `1/u`, `t` or `1/t`) in the flag's field.
    pub cu: L2Series,
    pub ct: L2Series,
    /// The curve's chart equation.
    pub equation: Poly2,
    /// The chart equation evaluated in flag coordinates (`c·t` for some unit `c`).
    pub eq_value: L2Series,
}

impl FlagGeometry {
    /// `d(cu) ∧ d(ct) = J · du ∧ dt`.
    pub fn jacobian(&self) -> Result<L2Series> {
        let a = self.cu.partial_inner().try_mul(&self.ct.partial_outer())?;
        let b = self.cu.partial_outer().try_mul(&self.ct.partial_inner())?;
        a.try_sub(&b)
    }
}

const MARGINS: [i64; 5] = [0, 4, 8, 16, 32];

pub struct Scenario {
    pub spec: ScenarioSpec,
    fields: BTreeMap<String, Field>,
    points: BTreeMap<String, Point>,
    curves: BTreeMap<String, Curve>,
}

fn parse_expr(s: &str) -> Result<Expr> {
    let p = parse_full(s)?;
    if p.form.is_some() || !p.directives.is_empty() {
        return Err(Error::Scenario(format!("{s:?} is not a plain expression")));
    }
    Ok(p.expr)
}

fn scen(msg: impl Into<String>) -> Error {
    Error::Scenario(msg.into())
}

/// `q^{1/e}` when `q` is a perfect `e`-th power.
fn rational_root(q: &Rational, e: u32) -> Option<Rational> {
    q.checked_root(u64::from(e))
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ScenarioSpec = serde_json::from_str(text).map_err(|e| scen(e.to_string()))?;
        Scenario::new(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.spec).expect("scenario serialises")
    }

    pub fn new(spec: ScenarioSpec) -> Result<Self> {
        let mut fields = BTreeMap::new();
        for e in &spec.extensions {
            let m = e.modulus.iter().map(|c| parse_rational(c)).collect::<Result<Vec<_>>>()?;
            fields.insert(e.name.clone(), Field::extension(&e.name, m)?);
        }
        let mut curves = BTreeMap::new();
        for c in &spec.curves {
            let kind = match c {
                CurveSpec::Fibre { t, .. } => CurveKind::Fibre(Self::base_coord(t, spec.surface)?),
                CurveSpec::Section { u, .. } if u.trim() == "inf" => CurveKind::Section(None),
                CurveSpec::Section { u, .. } => {
                    let g = parse_expr(u)?;
                    if g.variables().iter().any(|v| v != "t") {
                        return Err(scen(format!("section {} must be a function of t", c.name())));
                    }
                    CurveKind::Section(Some(g))
                }
                CurveSpec::Ramified { equation, .. } => CurveKind::Implicit(parse_expr(equation)?),
            };
            if curves.insert(c.name().to_string(), Curve { name: c.name().to_string(), kind }).is_some() {
                return Err(scen(format!("duplicate curve {}", c.name())));
            }
        }
        let mut points = BTreeMap::new();
        for p in &spec.points {
            let field = match &p.field {
                None => Field::Rationals,
                Some(n) => fields.get(n).cloned().ok_or_else(|| scen(format!("unknown field {n}")))?,
            };
            let u = if p.u.trim() == "inf" {
                Coord::Infinity
            } else {
                let env = crate::expr::scalar_env(&field);
                Coord::Finite(eval(&parse_expr(&p.u)?, &env)?.lift_to(&field)?)
            };
            let t = match Self::base_coord(&p.t, spec.surface)? {
                BasePoint::Finite(q) => Coord::Finite(FieldElem::from_rational(&field, &q)),
                BasePoint::Infinity => Coord::Infinity,
            };
            let pt = Point { name: p.name.clone(), field, u, t };
            if points.insert(p.name.clone(), pt).is_some() {
                return Err(scen(format!("duplicate point {}", p.name)));
            }
        }
        let s = Scenario { spec, fields, points, curves };
        for p in &s.spec.points {
            for c in &p.curves {
                s.check_incidence(&FlagId::new(&p.name, c))?;
            }
        }
        Ok(s)
    }

    fn base_coord(s: &str, surface: Surface) -> Result<BasePoint> {
        if s.trim() == "inf" {
            if surface == Surface::P1xA1 {
                return Err(scen("τ = ∞ is not on P¹×A¹"));
            }
            return Ok(BasePoint::Infinity);
        }
        Ok(BasePoint::Finite(parse_rational(s)?))
    }

    pub fn field(&self, name: &str) -> Option<&Field> {
        self.fields.get(name)
    }

    pub fn point(&self, name: &str) -> Result<&Point> {
        self.points.get(name).ok_or_else(|| Error::UnknownFlag(format!("no point {name}")))
    }

    pub fn curve(&self, name: &str) -> Result<&Curve> {
        self.curves.get(name).ok_or_else(|| Error::UnknownFlag(format!("no curve {name}")))
    }

    /// Every declared flag, in a canonical order.
    pub fn flags(&self) -> Vec<FlagId> {
        let mut out: Vec<FlagId> =
            self.spec.points.iter().flat_map(|p| p.curves.iter().map(|c| FlagId::new(&p.name, c))).collect();
        out.sort();
        out
    }

    pub fn is_fibre_flag(&self, f: &FlagId) -> Result<bool> {
        Ok(self.curve(&f.curve)?.is_fibre())
    }

    pub fn base_point(&self, point: &str) -> Result<BasePoint> {
        let p = self.point(point)?;
        Ok(match &p.t {
            Coord::Infinity => BasePoint::Infinity,
            Coord::Finite(c) => BasePoint::Finite(
                c.as_rational().ok_or_else(|| scen(format!("τ({point}) must be rational")))?,
            ),
        })
    }

    /// Degree of `k(x)` over `k(s)`.
    pub fn residue_degree(&self, point: &str) -> Result<usize> {
        Ok(self.point(point)?.field.degree())
    }

    /// Chart environment at `p`: global `u, t` as rational functions of the
    /// chart coordinates.
    fn chart_env(&self, p: &Point, field: &Field) -> Env<RatFunc> {
        let one = FieldElem::one(field);
        let x = RatFunc::poly(Poly2::x(field));
        let y = RatFunc::poly(Poly2::y(field));
        let recip = |r: &RatFunc| RatFunc { num: r.den.clone(), den: r.num.clone() };
        let u = if p.u.is_inf() { recip(&x) } else { x };
        let t = if p.t.is_inf() { recip(&y) } else { y };
        let mut env = Env::new(RatFunc::poly(Poly2::constant(&one)), Caps::new(0, 0)).bind("u", u).bind("t", t);
        if let Some(g) = field.generator_name() {
            env = env.bind(g, RatFunc::poly(Poly2::constant(&FieldElem::generator(field))));
        }
        env
    }

    /// Field of a global expression: `Q`, or the extension whose generator
    /// it mentions.
    fn expr_field(&self, e: &Expr, base: &Field) -> Result<Field> {
        let mut f = base.clone();
        for v in e.variables() {
            if v == "u" || v == "t" {
                continue;
            }
            let ext = self
                .fields
                .values()
                .find(|k| k.generator_name() == Some(v.as_str()))
                .ok_or_else(|| Error::Parse { column: 1, message: format!("unknown variable {v:?}") })?;
            f = f.join(ext)?;
        }
        Ok(f)
    }

    /// A global rational function in the chart coordinates at `p`.
    pub fn in_chart(&self, e: &Expr, p: &Point) -> Result<RatFunc> {
        let field = self.expr_field(e, &p.field)?;
        if field != p.field {
            return Err(Error::TowerMismatch(format!("expression over {field:?} at a point over {:?}", p.field)));
        }
        eval(e, &self.chart_env(p, &field))
    }

    /// The local equation of `c` in the chart of `p`, or `None` when the
    /// curve does not meet that chart.
    fn chart_equation(&self, c: &Curve, p: &Point) -> Result<Option<Poly2>> {
        let f = &p.field;
        let expr = match &c.kind {
            CurveKind::Fibre(BasePoint::Infinity) => {
                return Ok(p.t.is_inf().then(|| Poly2::y(f)));
            }
            CurveKind::Section(None) => return Ok(p.u.is_inf().then(|| Poly2::x(f))),
            CurveKind::Fibre(BasePoint::Finite(q)) => {
                Expr::Sub(Box::new(Expr::var("t")), Box::new(rational_expr(q)))
            }
            CurveKind::Section(Some(g)) => Expr::Sub(Box::new(Expr::var("u")), Box::new(g.clone())),
            CurveKind::Implicit(e) => e.clone(),
        };
        let r = self.in_chart(&expr, p)?;
        Ok(Some(r.num))
    }

    pub fn check_incidence(&self, flag: &FlagId) -> Result<()> {
        let p = self.point(&flag.point)?;
        let c = self.curve(&flag.curve)?;
        let on = match self.chart_equation(c, p)? {
            None => false,
            Some(g) => g.eval(&p.u.chart_value(&p.field), &p.t.chart_value(&p.field))?.is_zero(),
        };
        if on {
            Ok(())
        } else {
            Err(Error::NotIncident(flag.to_string()))
        }
    }

    /// Flag context and coordinates; `jet_prec` bounds any coordinate that
    /// has to be solved for.
    pub fn geometry(&self, flag: &FlagId, jet_prec: i64) -> Result<FlagGeometry> {
        self.check_incidence(flag)?;
        let p = self.point(&flag.point)?;
        let c = self.curve(&flag.curve)?;
        let field = p.field.clone();
        let g = self.chart_equation(c, p)?.expect("incident");
        let (a0, b0) = (p.u.chart_value(&field), p.t.chart_value(&field));
        let h = shift(&g, &a0, &b0)?;
        let (u, t) = (var("u"), var("t"));
        let one = FieldElem::one(&field);
        let inner = L2Series::monomial2(t.clone(), u.clone(), one.clone(), 1, 0);
        let outer = L2Series::monomial2(t.clone(), u.clone(), one.clone(), 0, 1);
        let konst = |c: &FieldElem| L2Series::constant2(t.clone(), u.clone(), c.clone());
        let gx = h.coeff(1, 0);
        let gy = h.coeff(0, 1);

        let (_, h_over_b) = h.div_rem(&Poly2::y(&field))?;
        if h_over_b.is_zero() {
            // the fibre itself
            let ctx = FlagContext::fibre(u.clone(), t.clone(), t.clone(), field.clone())?;
            let cu = konst(&a0).try_add(&inner)?;
            let ct = konst(&b0).try_add(&outer)?;
            let eq_value = g.subst(&cu, &ct)?;
            return Ok(FlagGeometry { ctx, cu, ct, equation: g, eq_value });
        }
        if !gx.is_zero() {
            let ctx = FlagContext::transverse(u.clone(), t.clone(), t.clone(), 1, field.clone())?;
            // h = gx·a + h0(b) solves exactly
            let linear = h.terms().all(|(i, j, _)| i == 0 || (i, j) == (1, 0));
            let a = if linear {
                let h0 = h.try_sub(&Poly2::monomial(&gx, 1, 0))?;
                let h0v = h0.subst(&konst(&FieldElem::zero(&field)), &inner)?;
                outer.try_sub(&h0v)?.mul_coeff(&LSeries::scalar(u.clone(), gx.inv()?))
            } else {
                newton(&h, &gx, true, &field, jet_prec)?.to_l2(true, t.clone(), u.clone())
            };
            let cu = konst(&a0).try_add(&a)?;
            let ct = konst(&b0).try_add(&inner)?;
            let eq_value = if linear { g.subst(&cu, &ct)? } else { outer };
            return Ok(FlagGeometry { ctx, cu, ct, equation: g, eq_value });
        }
        if gy.is_zero() {
            return Err(Error::NotRegular);
        }
        // tangent to the fibre: τ restricted to C is ramified
        let linear = h.terms().all(|(i, j, _)| j == 0 || (i, j) == (0, 1));
        let (b, exact) = if linear {
            let h0 = h.try_sub(&Poly2::monomial(&gy, 0, 1))?;
            let h0v = h0.subst(&inner, &konst(&FieldElem::zero(&field)))?;
            (outer.try_sub(&h0v)?.mul_coeff(&LSeries::scalar(u.clone(), gy.inv()?)), true)
        } else {
            (newton(&h, &gy, false, &field, jet_prec)?.to_l2(true, t.clone(), u.clone()), false)
        };
        let hres = b.coeff(0).unwrap_or_else(|| LSeries::zero(u.clone(), field.clone(), Precision::Bounded(0)));
        let (e, lead) = hres.leading().map(|(e, c)| (e, c.clone()))?;
        let e32 = u32::try_from(e).map_err(|_| Error::NotRegular)?;
        let q = lead.as_rational().ok_or_else(|| Error::NotKummer("irrational leading coefficient".into()))?;
        let root = rational_root(&q, e32)
            .ok_or_else(|| Error::NotKummer(format!("leading coefficient {q} is not an {e}-th power")))?;
        let rootf = FieldElem::from_rational(&field, &root);
        let monomial = hres.prec().is_exact() && hres.stored().iter().filter(|c| !c.is_zero()).count() == 1;
        // ρ(a)^e = h(a), and a = A(u) its inverse
        let a_of_u = if monomial {
            LSeries::monomial(u.clone(), field.clone(), rootf.inv()?, 1)
        } else {
            let cap = hres.prec().bound().unwrap_or(jet_prec).min(jet_prec);
            let h = hres.with_prec(Precision::Bounded(cap));
            let unit = h.shift(-e).mul_coeff(&FieldElem::from_rational(&field, &q).inv()?);
            let root_unit = ls_exp(&ls_log(&unit)?.scale(&Rational::new(BigInt::from(1), BigInt::from(e))))?;
            let rho = root_unit.shift(1).mul_coeff(&rootf);
            rho.reverse(u.clone(), Some(cap))?
        };
        let ctx = FlagContext::transverse(u.clone(), t.clone(), t.clone(), e32, field.clone())?;
        let a_l2 = L2Series::from_inner(t.clone(), a_of_u.clone());
        let cu = konst(&a0).try_add(&a_l2)?;
        let ct = konst(&b0).try_add(&b.compose_inner(&a_of_u)?)?;
        let eq_value = if exact && monomial { g.subst(&cu, &ct)? } else { outer };
        Ok(FlagGeometry { ctx, cu, ct, equation: g, eq_value })
    }

    /// Expands a global rational function (given in chart-free form) with
    /// the pole along `C` split off exactly.
    fn expand_rational(&self, rf: &RatFunc, flag: &FlagId, pi: i64, po: i64) -> Result<L2Series> {
        let mut last = None;
        for m in MARGINS {
            let geo = self.geometry(flag, pi + po + 2 * m + 4)?;
            let caps = Caps::new(pi + m, po + m);
            let attempt = (|| {
                let (nu, r) = rf.split_along(&geo.equation)?;
                let num = r.num.subst(&geo.cu, &geo.ct)?;
                let den = r.den.subst(&geo.cu, &geo.ct)?;
                let v = num.e_div(&den, caps)?;
                v.try_mul(&geo.eq_value.e_pow(nu, caps)?)
            })();
            match attempt {
                Ok(v) if certified(&v, pi, po) => return Ok(finish(&v, pi, po)),
                Ok(_) => last = Some(Error::precision(format!("expansion at {flag} below ({pi}, {po})"))),
                Err(e @ Error::InsufficientPrecision(_)) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    /// `f ∈ k(X)` in `K_{x,C}`, known to `O(u^pi)` in every coefficient and
    /// to `O(t^po)`.
    pub fn expand_function(&self, f: &Expr, flag: &FlagId, pi: i64, po: i64) -> Result<L2Series> {
        let p = self.point(&flag.point)?;
        let rf = self.in_chart(f, p)?;
        if rf.is_zero() {
            let geo = self.geometry(flag, 1)?;
            return Ok(geo.cu.scalar_like(&FieldElem::zero(&p.field))?);
        }
        self.expand_rational(&rf, flag, pi, po)
    }

    /// `f du ∧ dt` (global coordinates) at a flag.
    pub fn expand_form(&self, f: &Expr, flag: &FlagId, pi: i64, po: i64) -> Result<Form2> {
        let p = self.point(&flag.point)?;
        let field = &p.field;
        let mut rf = self.in_chart(f, p)?;
        if p.u.is_inf() {
            // u = 1/x, du = −x^{-2} dx
            let j = RatFunc::new(Poly2::constant(&FieldElem::from_int(field, -1)), Poly2::monomial(&FieldElem::one(field), 2, 0))?;
            rf = rf.e_mul(&j)?;
        }
        if p.t.is_inf() {
            let j = RatFunc::new(Poly2::constant(&FieldElem::from_int(field, -1)), Poly2::monomial(&FieldElem::one(field), 0, 2))?;
            rf = rf.e_mul(&j)?;
        }
        if rf.is_zero() {
            let geo = self.geometry(flag, 1)?;
            return Ok(Form2::new(geo.cu.scalar_like(&FieldElem::zero(field))?));
        }
        let mut last = None;
        for m in MARGINS {
            let g = self.expand_rational(&rf, flag, pi + m, po + m)?;
            let geo = self.geometry(flag, pi + po + 2 * m + 4)?;
            let w = g.try_mul(&geo.jacobian()?)?;
            if certified(&w, pi, po) {
                return Ok(Form2::new(finish(&w, pi, po)));
            }
            last = Some(Error::precision(format!("form at {flag} below ({pi}, {po})")));
        }
        Err(last.expect("at least one attempt"))
    }

    /// Parses `E du^dt` (or `E dt^du`, or a bare `E` read as `E du^dt`) and
    /// expands it.
    pub fn expand_form_text(&self, text: &str, flag: &FlagId, pi: i64, po: i64) -> Result<Form2> {
        let p = parse_full(text)?;
        let sign = form_sign(&p, "u", "t")?;
        let w = self.expand_form(&p.expr, flag, pi, po)?;
        Ok(if sign < 0 { w.neg() } else { w })
    }

    /// A symbol of global functions at a flag.
    pub fn expand_symbol(&self, f: &Expr, g: &Expr, flag: &FlagId, pi: i64, po: i64) -> Result<K2Elem<L2Series>> {
        Ok(K2Elem::symbol(self.expand_function(f, flag, pi, po)?, self.expand_function(g, flag, pi, po)?))
    }

    /// An expression in the flag's own variables `u, t` (and the generator).
    pub fn local_value(&self, f: &Expr, flag: &FlagId, pi: i64, po: i64) -> Result<L2Series> {
        let field = &self.point(&flag.point)?.field;
        let mut last = None;
        for m in MARGINS {
            let env = l2_env("u", "t", field, Caps::new(pi + m, po + m));
            match eval(f, &env) {
                Ok(v) if certified(&v, pi, po) => return Ok(finish(&v, pi, po)),
                Ok(_) => last = Some(Error::precision(format!("local value at {flag} below ({pi}, {po})"))),
                Err(e @ Error::InsufficientPrecision(_)) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    /// Whether `f = (equation of C)^m · v` with `v` a unit at `x`, i.e.
    /// `f ∈ Ô_{x,X}[1/t_C]^*`.
    pub fn unit_off_curve(&self, f: &Expr, flag: &FlagId) -> Result<bool> {
        let p = self.point(&flag.point)?;
        let c = self.curve(&flag.curve)?;
        let rf = self.in_chart(f, p)?;
        if rf.is_zero() {
            return Ok(false);
        }
        let g = self.chart_equation(c, p)?.ok_or_else(|| Error::NotIncident(flag.to_string()))?;
        let (_, r) = rf.split_along(&g)?;
        let (a, b) = (p.u.chart_value(&p.field), p.t.chart_value(&p.field));
        Ok(!r.num.eval(&a, &b)?.is_zero() && !r.den.eval(&a, &b)?.is_zero())
    }

    /// A global equation of the curve, when it has one in `u, t`
    /// (`None` for `u = ∞` and `τ = ∞`).
    pub fn curve_function(&self, name: &str) -> Result<Option<Expr>> {
        Ok(match &self.curve(name)?.kind {
            CurveKind::Fibre(BasePoint::Finite(q)) => {
                Some(Expr::Sub(Box::new(Expr::var("t")), Box::new(rational_expr(q))))
            }
            CurveKind::Section(Some(g)) => Some(Expr::Sub(Box::new(Expr::var("u")), Box::new(g.clone()))),
            CurveKind::Implicit(e) => Some(e.clone()),
            CurveKind::Fibre(BasePoint::Infinity) | CurveKind::Section(None) => None,
        })
    }

    /// The minimal polynomial over `Q` of the point's `u` coordinate, as an
    /// expression in `u` (`None` at `u = ∞` or for degree above 2).
    pub fn fibre_factor(&self, point: &str) -> Result<Option<Expr>> {
        let p = self.point(point)?;
        let c = match &p.u {
            Coord::Infinity => return Ok(None),
            Coord::Finite(c) => c,
        };
        let text = if let Some(q) = c.as_rational() {
            format!("u - ({})", crate::coeff::fmt_rational(&q))
        } else if p.field.degree() == 2 {
            format!(
                "u^2 - ({})*u + ({})",
                crate::coeff::fmt_rational(&c.trace()),
                crate::coeff::fmt_rational(&c.norm())
            )
        } else {
            return Ok(None);
        };
        Ok(Some(parse_expr(&text)?))
    }

    /// Whether a global function is defined and nonzero at the point.
    pub fn is_unit_at(&self, f: &Expr, point: &str) -> Result<bool> {
        let p = self.point(point)?;
        let rf = self.in_chart(f, p)?;
        let (a, b) = (p.u.chart_value(&p.field), p.t.chart_value(&p.field));
        Ok(!rf.num.eval(&a, &b)?.is_zero() && !rf.den.eval(&a, &b)?.is_zero())
    }

    pub fn is_at_infinity(&self, point: &str) -> Result<bool> {
        Ok(self.point(point)?.u.is_inf())
    }

    pub fn flag_context(&self, flag: &FlagId) -> Result<FlagContext> {
        Ok(self.geometry(flag, 1)?.ctx)
    }

    /// Points over `s` among the declared flags, with their flags.
    pub fn flags_over(&self, s: &BasePoint) -> Result<Vec<FlagId>> {
        let mut out = Vec::new();
        for f in self.flags() {
            if &self.base_point(&f.point)? == s {
                out.push(f);
            }
        }
        Ok(out)
    }

    /// Built-in scenario used by the command line when none is given:
    /// `P¹×A¹` with the fibre `F0: τ = 0`, sections `U0: u = 0`,
    /// `U1: u = 1`, `Uinf: u = ∞`, `D: u = t`, the parabola `R: t = u²`
    /// and a point over `Q(a)`, `a² = 2`.
    pub fn builtin() -> Scenario {
        let json = r#"{
          "surface": "P1xA1",
          "extensions": [{"name": "a", "modulus": ["-2", "0", "1"]}],
          "points": [
            {"name": "o", "u": "0", "t": "0", "curves": ["F0", "U0", "D", "R"]},
            {"name": "p1", "u": "1", "t": "0", "curves": ["F0", "U1"]},
            {"name": "pinf", "u": "inf", "t": "0", "curves": ["F0", "Uinf"]},
            {"name": "pa", "u": "a", "t": "0", "field": "a", "curves": ["F0"]}
          ],
          "curves": [
            {"kind": "fibre", "name": "F0", "t": "0"},
            {"kind": "section", "name": "U0", "u": "0"},
            {"kind": "section", "name": "U1", "u": "1"},
            {"kind": "section", "name": "Uinf", "u": "inf"},
            {"kind": "section", "name": "D", "u": "t"},
            {"kind": "ramified", "name": "R", "equation": "t - u^2"}
          ]
        }"#;
        Scenario::from_json(json).expect("built-in scenario is valid")
    }
}

/// Sign of the declared orientation relative to `d inner ∧ d outer`.
pub fn form_sign(p: &Parsed, inner: &str, outer: &str) -> Result<i64> {
    match &p.form {
        None => Ok(1),
        Some(f) => match (f.first.as_str(), f.second.as_deref()) {
            (a, Some(b)) if a == inner && b == outer => Ok(1),
            (a, Some(b)) if a == outer && b == inner => Ok(-1),
            _ => Err(Error::Parse { column: 1, message: format!("expected d{inner}^d{outer}") }),
        },
    }
}

fn rational_expr(q: &Rational) -> Expr {
    Expr::Div(Box::new(Expr::Num(q.numer())), Box::new(Expr::Num(q.denom())))
}

/// `g(a0 + x, b0 + y)`.
fn shift(g: &Poly2, a0: &FieldElem, b0: &FieldElem) -> Result<Poly2> {
    let f = g.field().join(a0.field())?;
    let x = RatFunc::poly(Poly2::x(&f).try_add(&Poly2::constant(a0))?);
    let y = RatFunc::poly(Poly2::y(&f).try_add(&Poly2::constant(b0))?);
    let r = g.lift(&f)?.subst(&x, &y)?;
    let c = r.den.coeff(0, 0);
    r.num.scale(&c.inv()?)
}

/// Solves `h(δ, u) = t` (when `solve_x`) or `h(u, δ) = t` for a jet `δ`
/// with `δ(0) = 0`, by Newton iteration with the constant slope `d`.
fn newton(h: &Poly2, d: &FieldElem, solve_x: bool, field: &Field, prec: i64) -> Result<Jet> {
    let p = Precision::Bounded(prec);
    let u = Jet::u(field).with_prec(p);
    let t = Jet::t(field).with_prec(p);
    let dinv = d.inv()?;
    let mut delta = Jet::zero(field, p);
    for _ in 0..=prec {
        let val = if solve_x { h.subst(&delta, &u)? } else { h.subst(&u, &delta)? };
        let next = delta.try_sub(&val.try_sub(&t)?.mul_elem(&dinv)?)?;
        if next.eq_mod_prec(&delta) && next.prec() == delta.prec() {
            break;
        }
        delta = next;
    }
    Ok(delta)
}

fn certified(x: &L2Series, pi: i64, po: i64) -> bool {
    if x.prec() < Precision::Bounded(po) {
        return false;
    }
    x.terms().all(|(k, c)| k >= po || c.prec() >= Precision::Bounded(pi))
}

/// Truncates to the requested window; exact values stay exact.
fn finish(x: &L2Series, pi: i64, po: i64) -> L2Series {
    if x.prec().is_exact() && x.stored().iter().all(|c| c.prec().is_exact()) {
        return x.clone();
    }
    x.bounded(pi, po)
}
