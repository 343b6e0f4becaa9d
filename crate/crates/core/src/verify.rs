//! Verification suites. Each suite is deterministic in its seed and
//! returns a [`Report`] with one case per checked identity.

use std::collections::BTreeMap;

use crate::adeles::{
    boundary_forms, boundary_k2, check_adelic_form, check_adelic_k2, cycle_of_adele, form_adele,
    global_pushforward_forms, global_pushforward_k2, gysin_cycle, k2_adele, pair_ideles, product_k2,
    push_cycle, sum_forms, tate_map, verify_reciprocity, AdeleVec, BasePoint, FlagId, K2Adele, Prec,
    ReciprocityInput, ReciprocityKind, Scenario, SymbolData, Triple,
};
use crate::coeff::{fmt_rational, rat, Field, FieldElem};
use crate::direct_image::{di_form, di_symbol, table_pairing, FlagContext};
use crate::error::{Error, Result};
use crate::expr::{parse, Expr};
use crate::laurent::{ls_dlog, ls_residue, Form1, LSeries};
use crate::local2d::{dlog_wedge, res_inner, res_outer, res_total, Form2, L2Series};
use crate::precision::Precision;
use crate::report::{Case, Report};
use crate::sample::{Sampler, Shape};
use crate::series::var;
use crate::symbols::{bracket_1d, bracket_2d, tame_symbol, triple_symbol, K2Elem};

/// Suite names accepted by [`run`].
pub const SUITES: [&str; 15] = [
    "fibre-forms",
    "point-forms",
    "fibre-symbols",
    "point-symbols",
    "thm1-d",
    "thm1-dd",
    "steinberg",
    "lemma-l4",
    "lemma-ll",
    "gysin",
    "param-independence",
    "tate-compat",
    "table",
    "complexes",
    "residues",
];

/// Runs a suite. Scenario suites use `scenario` when given and the
/// built-in one otherwise.
pub fn run(suite: &str, seed: u64, prec: Prec, scenario: Option<&Scenario>) -> Result<Report> {
    let builtin;
    let scn = match scenario {
        Some(s) => s,
        None => {
            builtin = Scenario::builtin();
            &builtin
        }
    };
    let mut rng = Sampler::new(seed);
    let mut r = Report::new(suite);
    match suite {
        "fibre-forms" => fibre_forms(&mut r, &mut rng, scn, prec, scenario.is_none())?,
        "point-forms" => point_suite(&mut r, &mut rng, scn, prec, false)?,
        "fibre-symbols" => fibre_symbols(&mut r, &mut rng, scn, prec)?,
        "point-symbols" => point_suite(&mut r, &mut rng, scn, prec, true)?,
        "thm1-d" => thm1_d(&mut r, &mut rng, prec),
        "thm1-dd" => thm1_dd(&mut r, &mut rng, prec),
        "steinberg" => steinberg(&mut r, &mut rng, prec),
        "lemma-l4" => lemma_l4(&mut r, &mut rng, prec),
        "lemma-ll" => lemma_ll(&mut r, &mut rng, prec),
        "gysin" => gysin(&mut r, &mut rng, scn, prec)?,
        "param-independence" => param_independence(&mut r, &mut rng, prec),
        "tate-compat" => tate_compat(&mut r, &mut rng, scn, prec)?,
        "table" => table(&mut r, prec),
        "complexes" => complexes(&mut r, &mut rng, prec)?,
        "residues" => residues(&mut r, &mut rng, prec),
        _ => return Err(Error::Unsupported(format!("unknown suite {suite:?}; expected one of {}", SUITES.join(", ")))),
    }
    Ok(r)
}

type Inputs = Vec<(&'static str, String)>;

fn record(r: &mut Report, inputs: Inputs, f: impl FnOnce() -> Result<(String, bool)>) {
    let (residual, pass) = f().unwrap_or_else(|e| (format!("error: {e}"), false));
    r.push(Case::new(inputs, residual, pass));
}

/// Runs one reciprocity check; an error becomes a failing case.
fn reciprocity(r: &mut Report, kind: ReciprocityKind, scn: &Scenario, input: ReciprocityInput, flags: &[FlagId], p: Prec, label: &str) {
    let mut res = verify_reciprocity(kind, scn, &input, flags, p);
    for m in &MARGINS[1..] {
        if !matches!(res, Err(Error::InsufficientPrecision(_))) {
            break;
        }
        res = verify_reciprocity(kind, scn, &input, flags, Prec::new(p.inner + m, p.outer + m));
    }
    match res {
        Ok(sub) => merge(r, sub, label),
        Err(err) => {
            let shown = match &input {
                ReciprocityInput::Form(g) => format!("{g}"),
                ReciprocityInput::Symbol(a, b) => format!("{{{a}, {b}}}"),
            };
            r.push(Case::new([("check", label.to_string()), ("input", shown)], format!("error: {err}"), false));
        }
    }
}

fn merge(r: &mut Report, sub: Report, label: &str) {
    for mut c in sub.cases {
        c.inputs.insert("check".into(), label.to_string());
        r.push(c);
    }
}

fn e(s: &str) -> Result<Expr> {
    parse(s)
}

fn one_t(field: &Field) -> LSeries {
    LSeries::one(var("t"), field.clone())
}

fn series_eq(a: &LSeries, b: &LSeries) -> Result<(String, bool)> {
    let d = a.try_sub(b)?;
    Ok((format!("{a} vs {b}"), d.is_known_zero()))
}

fn is_one(a: &LSeries) -> Result<(String, bool)> {
    series_eq(a, &one_t(a.field()))
}

fn elem_eq(a: &FieldElem, b: &FieldElem) -> (String, bool) {
    (format!("{a} vs {b}"), a == b)
}

/// A local field together with the flag context that sees it.
struct SymCase {
    name: &'static str,
    ctx: FlagContext,
    shape: Shape,
    constant: FieldElem,
}

fn sqrt2() -> Field {
    Field::extension("a", vec![rat(-2), rat(0), rat(1)]).expect("x^2 - 2 is irreducible")
}

fn symbol_cases(p: Prec) -> Vec<SymCase> {
    let (u, t) = (var("u"), var("t"));
    let q = Field::Rationals;
    let k = sqrt2();
    let shape = |f: &Field| Shape::new("u", "t", f, p.inner, p.outer);
    vec![
        SymCase {
            name: "fibre",
            ctx: FlagContext::fibre(u.clone(), t.clone(), t.clone(), q.clone()).expect("fibre"),
            shape: shape(&q),
            constant: FieldElem::from_int(&q, 2),
        },
        SymCase {
            name: "transverse",
            ctx: FlagContext::transverse(u.clone(), t.clone(), t.clone(), 1, q.clone()).expect("transverse"),
            shape: shape(&q),
            constant: FieldElem::from_int(&q, 2),
        },
        SymCase {
            name: "fibre over Q(a)",
            ctx: FlagContext::fibre(u.clone(), t.clone(), t.clone(), k.clone()).expect("fibre"),
            shape: shape(&k),
            constant: FieldElem::new(&k, vec![rat(1), rat(1)]),
        },
        SymCase {
            name: "transverse e=2",
            ctx: FlagContext::transverse(u, t.clone(), t, 2, q.clone()).expect("transverse"),
            shape: shape(&q),
            constant: FieldElem::from_int(&q, 2),
        },
    ]
}

/// `u, t`, a constant and a sampled one-unit.
fn generators(c: &SymCase, rng: &mut Sampler) -> Vec<(String, L2Series)> {
    let s = &c.shape;
    let eps = rng.one_unit(s);
    vec![
        ("u".into(), s.bound(&s.var_mono(1, 0))),
        ("t".into(), s.bound(&s.var_mono(0, 1))),
        (c.constant.to_string(), s.bound(&s.mono(&c.constant, 0, 0))),
        (eps.to_string(), eps),
    ]
}

fn tseries(field: &Field, val: i64, coeffs: &[i64]) -> LSeries {
    LSeries::from_ints(var("t"), field, val, coeffs, Precision::Exact)
}

fn thm1_d(r: &mut Report, rng: &mut Sampler, p: Prec) {
    let q = Field::Rationals;
    let xis = [("tau", tseries(&q, 1, &[1])), ("-1", tseries(&q, 0, &[-1])), ("2", tseries(&q, 0, &[2])), ("1+tau", tseries(&q, 0, &[1, 1]))];
    for c in symbol_cases(p) {
        let gens = generators(&c, rng);
        let mut plan: Vec<(String, L2Series, String, L2Series, String, LSeries)> = Vec::new();
        for (na, a) in &gens {
            for (nb, b) in &gens {
                for (nx, x) in &xis {
                    plan.push((na.clone(), a.clone(), nb.clone(), b.clone(), nx.to_string(), x.clone()));
                }
            }
        }
        // one-unit triples, then general elements
        for i in 0..75 {
            let (a, b, x) = if i < 50 {
                let x = tseries(&q, 0, &[1]).try_add(&rng.series("t", &q, 1, p.outer)).expect("Q");
                (rng.one_unit(&c.shape), rng.one_unit(&c.shape), x)
            } else {
                (rng.element(&c.shape), rng.element(&c.shape), rng.series("t", &q, -2, p.outer))
            };
            plan.push((a.to_string(), a, b.to_string(), b, x.to_string(), x));
        }
        for (na, a, nb, b, nx, x) in plan {
            record(r, vec![("case", c.name.into()), ("phi", na), ("psi", nb), ("xi", nx)], || {
                let lhs = triple_symbol(&a, &b, &c.ctx.embed_base(&x)?)?.norm();
                let rhs = tame_symbol(&di_symbol(&c.ctx, &a, &b)?, &x)?;
                Ok(elem_eq(&FieldElem::rational(lhs), &rhs))
            });
        }
    }
}

fn thm1_dd(r: &mut Report, rng: &mut Sampler, p: Prec) {
    let q = Field::Rationals;
    let zetas = [("1", tseries(&q, 0, &[1])), ("tau^-1", tseries(&q, -1, &[1])), ("tau^-3", tseries(&q, -3, &[1])), ("1+tau", tseries(&q, 0, &[1, 1]))];
    for c in symbol_cases(p) {
        let gens = generators(&c, rng);
        let mut plan: Vec<(String, L2Series, String, L2Series, String, LSeries)> = Vec::new();
        for (na, a) in &gens {
            for (nb, b) in &gens {
                for (nz, z) in &zetas {
                    plan.push((na.clone(), a.clone(), nb.clone(), b.clone(), nz.to_string(), z.clone()));
                }
            }
        }
        for i in 0..75 {
            let (a, b) = if i < 50 {
                (rng.one_unit(&c.shape), rng.one_unit(&c.shape))
            } else {
                (rng.element(&c.shape), rng.element(&c.shape))
            };
            let (nz, z) = zetas[i % zetas.len()].clone();
            plan.push((a.to_string(), a, b.to_string(), b, nz.to_string(), z));
        }
        for (na, a, nb, b, nz, z) in plan {
            record(r, vec![("case", c.name.into()), ("phi", na), ("psi", nb), ("zeta", nz)], || {
                let lhs = bracket_2d(&a, &b, &c.ctx.embed_base(&z)?)?.trace();
                let rhs = bracket_1d(&di_symbol(&c.ctx, &a, &b)?, &z)?;
                Ok(elem_eq(&FieldElem::rational(lhs), &rhs))
            });
        }
    }
}

/// A sample `φ` with `1 − φ` of certified valuation.
fn steinberg_sample(rng: &mut Sampler, s: &Shape) -> L2Series {
    loop {
        let x = rng.element(s);
        let one = s.bound(&s.var_mono(0, 0));
        if let Ok(d) = one.try_sub(&x) {
            if crate::local2d::decompose_unit(&d).is_ok() {
                return x;
            }
        }
    }
}

fn steinberg(r: &mut Report, rng: &mut Sampler, p: Prec) {
    for c in symbol_cases(p) {
        for _ in 0..100 {
            let a = steinberg_sample(rng, &c.shape);
            let b = rng.element(&c.shape);
            let one = c.shape.bound(&c.shape.var_mono(0, 0));
            record(r, vec![("case", c.name.into()), ("law", "steinberg".into()), ("phi", a.to_string())], || {
                is_one(&di_symbol(&c.ctx, &a, &one.try_sub(&a)?)?)
            });
            record(r, vec![("case", c.name.into()), ("law", "skew".into()), ("phi", a.to_string()), ("psi", b.to_string())], || {
                is_one(&di_symbol(&c.ctx, &a, &b)?.try_mul(&di_symbol(&c.ctx, &b, &a)?)?)
            });
            let minus = c.shape.bound(&c.shape.mono(&c.shape.int(-1), 0, 0));
            record(r, vec![("case", c.name.into()), ("law", "diagonal".into()), ("phi", a.to_string())], || {
                series_eq(&di_symbol(&c.ctx, &a, &a)?, &di_symbol(&c.ctx, &minus, &a)?)
            });
        }
    }
}

fn lemma_l4(r: &mut Report, rng: &mut Sampler, p: Prec) {
    let q = Field::Rationals;
    let s = Shape::new("u", "t", &q, p.inner, p.outer);
    for i in 0..50 {
        let a = rng.element(&s);
        let b = rng.element(&s);
        // ξ lives in the residue field k((u))
        let xi = if i < 20 {
            LSeries::from_ints(var("u"), &q, -(i as i64 % 4 + 1), &[1], Precision::Exact)
        } else {
            rng.series("u", &q, -2, p.inner)
        };
        record(r, vec![("f", a.to_string()), ("g", b.to_string()), ("xi", xi.to_string())], || {
            let lhs = ls_residue(&ls_dlog(&tame_symbol(&a, &b)?)?.mul_series(&xi)?)?;
            let emb = L2Series::from_inner(var("t"), xi.clone());
            let rhs = res_total(&dlog_wedge(&a, &b)?.mul_series(&emb)?)?;
            Ok(elem_eq(&lhs, &rhs))
        });
    }
}

fn lemma_ll(r: &mut Report, rng: &mut Sampler, p: Prec) {
    let q = Field::Rationals;
    let ctx = FlagContext::fibre(var("u"), var("t"), var("t"), q.clone()).expect("fibre");
    for i in 0..50 {
        // the same draw at growing precision until the residue is certified
        let start = rng.clone();
        let mut outcome = None;
        for m in MARGINS {
            let mut g = start.clone();
            let s = Shape::new("u", "t", &q, p.inner + m, p.outer + m);
            let a = g.element(&s);
            let b = g.element(&s);
            let xi = if i < 20 { tseries(&q, -(i as i64 % 4 + 1), &[1]) } else { g.series("t", &q, -2, p.outer) };
            let res = (|| -> Result<(String, bool)> {
                let lhs = res_total(&dlog_wedge(&a, &b)?.mul_series(&ctx.embed_base(&xi)?)?)?;
                let rhs = ls_residue(&ls_dlog(&table_pairing(&a, &b)?)?.mul_series(&xi)?)?;
                Ok(elem_eq(&lhs, &rhs))
            })();
            let retry = matches!(res, Err(Error::InsufficientPrecision(_)));
            *rng = g;
            outcome = Some((a, b, xi, res));
            if !retry {
                break;
            }
        }
        let (a, b, xi, res) = outcome.expect("at least one margin");
        record(r, vec![("phi", a.to_string()), ("psi", b.to_string()), ("xi", xi.to_string())], || res);
    }
}

/// Extra precision tried when a sampled case cannot be certified.
const MARGINS: [i64; 3] = [0, 4, 8];

fn param_independence(r: &mut Report, rng: &mut Sampler, p: Prec) {
    let q = Field::Rationals;
    let s = Shape::new("u", "t", &q, p.inner, p.outer);
    let fibre = FlagContext::fibre(var("u"), var("t"), var("t"), q.clone()).expect("fibre");
    let trans = FlagContext::transverse(var("u"), var("t"), var("t"), 1, q.clone()).expect("transverse");
    // u = u'(1 + u')
    let usub = LSeries::from_ints(var("u"), &q, 1, &[1, 1], Precision::Exact);
    for _ in 0..25 {
        let w = Form2::new(rng.form_coeff(&s));
        // t = t'·c·(1 + …)
        let c = rng.nonzero_scalar(&q);
        let tsub = s.bound(&s.var_mono(0, 1).try_mul(&rng.one_unit(&s)).expect("same field").try_mul(&s.mono(&c, 0, 0)).expect("same field"));
        let sub_label = tsub.to_string();
        record(r, vec![("map", "res_inner".into()), ("change", "u -> u(1+u)".into()), ("form", w.to_string())], || {
            let a = res_inner(&w)?;
            let b = res_inner(&w.change_inner(&usub)?)?;
            series_eq(&a.coeff, &b.coeff)
        });
        record(r, vec![("map", "res_outer".into()), ("change", format!("t -> {sub_label}")), ("form", w.to_string())], || {
            let a = res_outer(&w)?;
            let b = res_outer(&w.change_outer(&tsub)?)?;
            series_eq(&a.coeff, &b.coeff)
        });
        let a = rng.element(&s);
        let b = rng.element(&s);
        record(r, vec![("map", "di_symbol fibre".into()), ("change", "u -> u(1+u)".into()), ("phi", a.to_string()), ("psi", b.to_string())], || {
            let x = di_symbol(&fibre, &a, &b)?;
            let y = di_symbol(&fibre, &a.compose_inner(&usub)?, &b.compose_inner(&usub)?)?;
            series_eq(&x, &y)
        });
        record(r, vec![("map", "di_symbol transverse".into()), ("change", format!("t -> {sub_label}")), ("phi", a.to_string()), ("psi", b.to_string())], || {
            let x = di_symbol(&trans, &a, &b)?;
            let y = di_symbol(&trans, &a.compose_outer(&tsub)?, &b.compose_outer(&tsub)?)?;
            series_eq(&x, &y)
        });
    }
}

fn residues(r: &mut Report, rng: &mut Sampler, p: Prec) {
    let q = Field::Rationals;
    let s = Shape::new("u", "t", &q, p.inner, p.outer);
    for _ in 0..200 {
        let w = Form2::new(rng.form_coeff(&s));
        record(r, vec![("identity", "res(res_outer) = res(res_inner) = res_total".into()), ("form", w.to_string())], || {
            let a = ls_residue(&res_outer(&w)?)?;
            let b = ls_residue(&res_inner(&w)?)?;
            let c = res_total(&w)?;
            Ok((format!("{a}, {b}, {c}"), a == c && b == c))
        });
    }
    let cases = symbol_cases(p);
    for i in 0..50 {
        let c = &cases[i % cases.len()];
        let w = Form2::new(rng.form_coeff(&c.shape));
        record(r, vec![("identity", "res(di_form) = Tr res_total".into()), ("case", c.name.into()), ("form", w.to_string())], || {
            let a = ls_residue(&di_form(&c.ctx, &w)?)?;
            let b = FieldElem::rational(res_total(&w)?.trace());
            Ok(elem_eq(&a, &b))
        });
    }
}

/// Table entries on `{u, t, 2, −1, 1+u, 1+t, 1+t/u}`, written out by hand.
fn table(r: &mut Report, p: Prec) {
    let q = Field::Rationals;
    let s = Shape::new("u", "t", &q, p.inner, p.outer);
    let gens: Vec<(&str, L2Series)> = vec![
        ("u", s.var_mono(1, 0)),
        ("t", s.var_mono(0, 1)),
        ("2", s.mono(&s.int(2), 0, 0)),
        ("-1", s.mono(&s.int(-1), 0, 0)),
        ("1+u", s.bound(&s.var_mono(0, 0).try_add(&s.var_mono(1, 0)).expect("Q"))),
        ("1+t", s.bound(&s.var_mono(0, 0).try_add(&s.var_mono(0, 1)).expect("Q"))),
        ("1+t*u^-1", s.bound(&s.var_mono(0, 0).try_add(&s.var_mono(-1, 1)).expect("Q"))),
    ];
    let pt = Precision::Bounded(p.outer);
    let geo = |sign: i64| LSeries::from_ints(var("t"), &q, 0, &vec![1; p.outer as usize], pt).scale(&rat(1)).compose(&LSeries::from_ints(var("t"), &q, 1, &[sign], Precision::Exact));
    // 1/(1 − t) and 1 − t
    let inv_one_minus_t = || geo(1).map(|x| x.with_prec(pt));
    let expected = |a: &str, b: &str| -> Result<LSeries> {
        let t1 = |c: &[i64], v: i64| Ok(tseries(&q, v, c));
        match (a, b) {
            ("u", "u") => t1(&[-1], 0),
            ("u", "t") => t1(&[1], 1),
            ("u", "2") => t1(&[2], 0),
            ("u", "-1") => t1(&[-1], 0),
            ("u", "1+t") => t1(&[1, 1], 0),
            ("t", "u") => t1(&[1], -1),
            ("2", "u") => Ok(LSeries::scalar(var("t"), FieldElem::rational(crate::coeff::ratio(1, 2)))),
            ("-1", "u") => t1(&[-1], 0),
            ("1+t", "u") => LSeries::from_ints(var("t"), &q, 0, &[1, 1], Precision::Exact).with_prec(pt).inv(),
            ("1+u", "1+t*u^-1") => inv_one_minus_t(),
            ("1+t*u^-1", "1+u") => t1(&[1, -1], 0),
            _ => t1(&[1], 0),
        }
    };
    for (na, a) in &gens {
        for (nb, b) in &gens {
            record(r, vec![("phi", na.to_string()), ("psi", nb.to_string())], || {
                let got = table_pairing(a, b)?;
                let want = expected(na, nb)?;
                let d = got.try_sub(&want)?.with_prec(Precision::Bounded(p.outer - 1));
                Ok((format!("{got} (expected {want})"), d.is_known_zero()))
            });
        }
    }
}

fn flags_on(scn: &Scenario, curve: &str) -> Vec<FlagId> {
    scn.flags().into_iter().filter(|f| f.curve == curve).collect()
}

fn fibre_curves(scn: &Scenario) -> Result<Vec<(String, rat_t::Q)>> {
    let mut out = Vec::new();
    for c in scn.spec.curves.iter() {
        if let crate::adeles::CurveSpec::Fibre { name, t } = c {
            if t.trim() != "inf" {
                out.push((name.clone(), crate::coeff::parse_rational(t)?));
            }
        }
    }
    Ok(out)
}

mod rat_t {
    pub type Q = crate::coeff::Rational;
}

/// The points of a fibre: `(flag, minimal polynomial of u or None at ∞)`.
fn fibre_points(scn: &Scenario, curve: &str) -> Result<Vec<(FlagId, Option<Expr>)>> {
    flags_on(scn, curve).into_iter().map(|f| Ok((f.clone(), scn.fibre_factor(&f.point)?))).collect()
}

fn tpow(q: &rat_t::Q, k: i64) -> String {
    format!("(t - ({}))^{k}", fmt_rational(q))
}

fn coeff_text(rng: &mut Sampler) -> String {
    format!("({})", fmt_rational(&rng.nonzero_rational()))
}

/// `ω_N = (u^{-1} + Σ t^l/(u − l)) du∧dt` on the fibre `τ = 0` through
/// `u = 0, …, N, ∞`, with the expected local images.
fn truncated_fibre(r: &mut Report, p: Prec) -> Result<()> {
    let n = 5;
    let mut pts: Vec<String> =
        (0..=n).map(|l| format!(r#"{{"name": "x{l}", "u": "{l}", "t": "0", "curves": ["F"]}}"#)).collect();
    pts.push(r#"{"name": "xinf", "u": "inf", "t": "0", "curves": ["F"]}"#.to_string());
    let scn = Scenario::from_json(&format!(
        r#"{{"surface": "P1xA1", "points": [{}], "curves": [{{"kind": "fibre", "name": "F", "t": "0"}}]}}"#,
        pts.join(",")
    ))?;
    let terms: Vec<String> = (1..=n).map(|l| format!("t^{l}/(u-{l})")).collect();
    let omega = e(&format!("u^-1 + {}", terms.join(" + ")))?;
    let q = Field::Rationals;
    let cut = Precision::Bounded(n + 1);
    let flags = flags_on(&scn, "F");
    let mut total = Form1::new(LSeries::exact_zero(var("t"), q.clone()));
    for f in &flags {
        let w = scn.expand_form(&omega, f, p.inner, p.outer.max(n + 1))?;
        let got = di_form(&scn.flag_context(f)?, &w)?;
        let want = if f.point == "xinf" {
            tseries(&q, 0, &vec![-1; n as usize + 1])
        } else {
            let l: i64 = f.point[1..].parse().expect("x<l>");
            tseries(&q, l, &[1])
        };
        let ok = got.coeff.try_sub(&want)?.with_prec(cut).is_known_zero();
        r.push(Case::new([("omega", "omega_5".to_string()), ("flag", f.to_string())], format!("{got} (expected ({want}) dt)"), ok));
        total = total.try_add(&got)?;
    }
    let sum = total.coeff.with_prec(cut);
    r.push(Case::new([("omega", "omega_5"), ("sum over", "F")], format!("{sum}"), sum.is_known_zero()));
    Ok(())
}

fn fibre_forms(r: &mut Report, rng: &mut Sampler, scn: &Scenario, p: Prec, builtin: bool) -> Result<()> {
    if builtin {
        truncated_fibre(r, p)?;
    }
    for (curve, q) in fibre_curves(scn)? {
        let pts = fibre_points(scn, &curve)?;
        let has_inf = pts.iter().any(|(_, f)| f.is_none());
        let finite: Vec<&Expr> = pts.iter().filter_map(|(_, f)| f.as_ref()).collect();
        let flags: Vec<FlagId> = pts.iter().map(|(f, _)| f.clone()).collect();
        for _ in 0..6 {
            // Σ c_i P_i'/P_i with Σ c_i deg P_i = 0 unless ∞ is declared,
            // plus double poles and, with ∞, polynomial terms
            let mut parts = Vec::new();
            let mut weights = Vec::new();
            for pf in &finite {
                let deg = if pf.to_string().contains("^2") { 2 } else { 1 };
                let c = rng.nonzero_rational();
                weights.push((c, deg, pf.to_string(), pf.derivative("u")?.to_string()));
            }
            if !has_inf && weights.len() >= 2 {
                let total: rat_t::Q = weights[..weights.len() - 1].iter().map(|(c, d, _, _)| c * rat(*d)).sum();
                let last = weights.last_mut().expect("two weights");
                last.0 = -total / rat(last.1);
            }
            let k = rng.range(-2, 2);
            for (c, _, pf, dp) in &weights {
                if has_inf || weights.len() >= 2 {
                    parts.push(format!("({})*{}*({dp})/({pf})", fmt_rational(c), tpow(&q, k)));
                }
                if rng.chance(0.5) {
                    parts.push(format!("{}*{}/({pf})^2", coeff_text(rng), tpow(&q, rng.range(0, 2))));
                }
            }
            if has_inf && rng.chance(0.7) {
                parts.push(format!("{}*u^{}*{}", coeff_text(rng), rng.range(0, 2), tpow(&q, rng.range(-1, 2))));
            }
            if parts.is_empty() {
                continue;
            }
            let g = e(&parts.join(" + "))?;
            reciprocity(r, ReciprocityKind::FibreForms, scn, ReciprocityInput::Form(g), &flags, p, &curve);
        }
    }
    Ok(())
}

/// Random `c · τ'^m · (1 + τ')^k · ∏ P_i^{e_i}` with the degree balanced
/// when `∞` is not declared.
fn fibre_function(rng: &mut Sampler, q: &rat_t::Q, finite: &[&Expr], has_inf: bool) -> String {
    let mut parts = vec![coeff_text(rng), tpow(q, rng.range(-1, 2))];
    if rng.chance(0.5) {
        parts.push(format!("(1 + t - ({}))^{}", fmt_rational(q), rng.range(-1, 1)));
    }
    let mut exps: Vec<(i64, i64)> = finite
        .iter()
        .map(|pf| (rng.range(-2, 2), if pf.to_string().contains("^2") { 2 } else { 1 }))
        .collect();
    if !has_inf {
        if exps.len() < 2 {
            exps.iter_mut().for_each(|x| x.0 = 0);
        } else {
            let n = exps.len();
            let s: i64 = exps[..n - 1].iter().map(|(a, d)| a * d).sum();
            // make the last exponent balance when possible, else drop them all
            if s % exps[n - 1].1 == 0 {
                exps[n - 1].0 = -s / exps[n - 1].1;
            } else {
                exps.iter_mut().for_each(|x| x.0 = 0);
            }
        }
    }
    for (pf, (a, _)) in finite.iter().zip(&exps) {
        if *a != 0 {
            parts.push(format!("({pf})^{a}"));
        }
    }
    parts.join("*")
}

fn fibre_symbols(r: &mut Report, rng: &mut Sampler, scn: &Scenario, p: Prec) -> Result<()> {
    for (curve, q) in fibre_curves(scn)? {
        let pts = fibre_points(scn, &curve)?;
        let has_inf = pts.iter().any(|(_, f)| f.is_none());
        let finite: Vec<&Expr> = pts.iter().filter_map(|(_, f)| f.as_ref()).collect();
        let flags: Vec<FlagId> = pts.iter().map(|(f, _)| f.clone()).collect();
        let mut inputs: Vec<(String, String)> = Vec::new();
        if finite.len() >= 2 && has_inf {
            // (u, 1 − u) through u = 0, 1, ∞ when those are the declared points
            inputs.push(("u".into(), "1 - u".into()));
        }
        for _ in 0..6 {
            inputs.push((fibre_function(rng, &q, &finite, has_inf), fibre_function(rng, &q, &finite, has_inf)));
        }
        for (a, b) in inputs {
            let input = ReciprocityInput::Symbol(e(&a)?, e(&b)?);
            reciprocity(r, ReciprocityKind::FibreSymbols, scn, input, &flags, p, &curve);
        }
    }
    Ok(())
}

/// `J(h_i, h_j) / (h_i h_j)`: the coefficient of `dlog h_i ∧ dlog h_j` on
/// `du ∧ dt`.
fn dlog_pair(h1: &Expr, h2: &Expr) -> Result<String> {
    let j = format!(
        "(({})*({}) - ({})*({}))",
        h1.derivative("u")?,
        h2.derivative("t")?,
        h1.derivative("t")?,
        h2.derivative("u")?
    );
    Ok(format!("{j}/(({h1})*({h2}))"))
}

fn point_suite(r: &mut Report, rng: &mut Sampler, scn: &Scenario, p: Prec, symbols: bool) -> Result<()> {
    let units = ["1 + u", "1 + t", "2 - u + t", "3 + u*t"];
    let mut points: Vec<String> = scn.spec.points.iter().map(|x| x.name.clone()).collect();
    points.sort();
    for x in points {
        let flags: Vec<FlagId> = scn.flags().into_iter().filter(|f| f.point == x).collect();
        let mut hs = Vec::new();
        for f in &flags {
            if let Some(h) = scn.curve_function(&f.curve)? {
                hs.push(h);
            }
        }
        // every curve through x must have an equation for a complete support
        if flags.len() < 2 || hs.len() < flags.len() {
            continue;
        }
        let units: Vec<Expr> =
            units.iter().map(|u| e(u)).collect::<Result<Vec<_>>>()?.into_iter().filter(|u| scn.is_unit_at(u, &x).unwrap_or(false)).collect();
        let mut plan: Vec<ReciprocityInput> = Vec::new();
        for i in 0..hs.len() {
            for j in i + 1..hs.len() {
                if symbols {
                    plan.push(ReciprocityInput::Symbol(hs[i].clone(), hs[j].clone()));
                } else {
                    plan.push(ReciprocityInput::Form(e(&dlog_pair(&hs[i], &hs[j])?)?));
                }
            }
        }
        for _ in 0..4 {
            if symbols {
                let mk = |rng: &mut Sampler| -> Result<Expr> {
                    let mut s = vec![coeff_text(rng)];
                    for h in &hs {
                        let a = rng.range(-1, 2);
                        if a != 0 {
                            s.push(format!("({h})^{a}"));
                        }
                    }
                    if !units.is_empty() && rng.chance(0.5) {
                        s.push(format!("({})", rng.pick(&units)));
                    }
                    e(&s.join("*"))
                };
                let a = mk(rng)?;
                let b = mk(rng)?;
                plan.push(ReciprocityInput::Symbol(a, b));
            } else {
                let i = rng.range(0, hs.len() as i64 - 1) as usize;
                let mut j = rng.range(0, hs.len() as i64 - 1) as usize;
                if i == j {
                    j = (i + 1) % hs.len();
                }
                let mut g = format!("{}*{}", coeff_text(rng), dlog_pair(&hs[i], &hs[j])?);
                if !units.is_empty() && rng.chance(0.7) {
                    g = format!("({})*{g}", rng.pick(&units));
                }
                plan.push(ReciprocityInput::Form(e(&g)?));
            }
        }
        let kind = if symbols { ReciprocityKind::PointSymbols } else { ReciprocityKind::PointForms };
        for input in plan {
            reciprocity(r, kind, scn, input, &flags, p, &x);
        }
    }
    Ok(())
}

fn gysin(r: &mut Report, rng: &mut Sampler, scn: &Scenario, p: Prec) -> Result<()> {
    let mut flags = scn.flags();
    flags.retain(|f| scn.geometry(f, 1).is_ok() && matches!(scn.base_point(&f.point), Ok(BasePoint::Finite(_))));
    for f in flags {
        for k in 0..3 {
            let (a, b) = if k == 0 { (1, 1) } else { (rng.range(-2, 2), rng.range(-2, 2)) };
            let c = rng.nonzero_rational();
            let lv = |s: &str| scn.local_value(&e(s)?, &f, p.inner, p.outer);
            let label = format!("{{u^{a}*(1+u), {}*t^{b}}}", fmt_rational(&c));
            record(r, vec![("flag", f.to_string()), ("symbol", label)], || {
                let x = lv(&format!("u^{a}*(1+u)"))?.bounded(p.inner, p.outer);
                let y = lv(&format!("({})*t^{b}", fmt_rational(&c)))?;
                let mut adele = K2Adele::new();
                adele.insert(f.clone(), K2Elem::symbol(x, y));
                let cyc = cycle_of_adele(&adele)?;
                let g = gysin_cycle(scn, &adele, p.outer)?;
                let pushed = push_cycle(scn, &cyc)?;
                let show = |m: &BTreeMap<BasePoint, i64>| m.iter().map(|(s, n)| format!("{n}[{s}]")).collect::<Vec<_>>().join(" + ");
                let deg = scn.residue_degree(&f.point)? as i64;
                let expected_mult = a * b * deg;
                let ok = pushed == g && g.values().sum::<i64>() == expected_mult;
                Ok((format!("gysin {} ; pushed cycle {}", show(&g), show(&pushed)), ok))
            });
        }
    }
    Ok(())
}

const GLOBALS: [&str; 6] = ["u", "t", "1 + u", "1 + t", "u - t", "2"];

fn random_symbol_data(rng: &mut Sampler, scn: &Scenario, flags: &[FlagId]) -> Result<SymbolData> {
    let mut pool: Vec<Expr> = GLOBALS.iter().map(|s| e(s)).collect::<Result<_>>()?;
    for f in flags {
        if let Some(h) = scn.curve_function(&f.curve)? {
            pool.push(h);
        }
    }
    let n = rng.range(1, 3);
    Ok((0..n).map(|_| (rng.pick(&pool).clone(), rng.pick(&pool).clone(), rng.range(-2, 2).max(1))).collect())
}

fn tate_compat(r: &mut Report, rng: &mut Sampler, scn: &Scenario, p: Prec) -> Result<()> {
    let mut by_base: BTreeMap<BasePoint, Vec<FlagId>> = BTreeMap::new();
    for f in scn.flags() {
        by_base.entry(scn.base_point(&f.point)?).or_default().push(f);
    }
    for (s, flags) in by_base {
        for _ in 0..10 {
            let data = random_symbol_data(rng, scn, &flags)?;
            let label = data.iter().map(|(a, b, m)| format!("{{{a}, {b}}}^{m}")).collect::<Vec<_>>().join("*");
            record(r, vec![("base", s.to_string()), ("adele", label)], || {
                let a = k2_adele(scn, &data, &flags, p)?;
                let k = check_adelic_k2(scn, &a, 1);
                if !k.report.pass {
                    return Ok(("K2 adele fails its own conditions".into(), false));
                }
                let w = check_adelic_form(scn, &tate_map(&a)?);
                let d = w.divisor.iter().map(|(c, n)| format!("{n}*{c}")).collect::<Vec<_>>().join(" + ");
                Ok((format!("dlog wedge within D = {}", if d.is_empty() { "0".into() } else { d }), w.report.pass))
            });
        }
        // pairing two ideles built from global functions
        let f1 = rng.pick(&GLOBALS).to_string();
        let f2 = rng.pick(&GLOBALS).to_string();
        record(r, vec![("base", s.to_string()), ("ideles", format!("({f1}), ({f2})"))], || {
            let mut x = AdeleVec::new();
            let mut y = AdeleVec::new();
            for f in &flags {
                x.insert(f.clone(), scn.expand_function(&e(&f1)?, f, p.inner, p.outer)?.bounded(p.inner, p.outer));
                y.insert(f.clone(), scn.expand_function(&e(&f2)?, f, p.inner, p.outer)?.bounded(p.inner, p.outer));
            }
            let k = check_adelic_k2(scn, &pair_ideles(&x, &y), 1);
            Ok(("paired flag-wise".into(), k.report.pass))
        });
    }
    Ok(())
}

/// Push-forward commutes with the boundaries on constructed triples of the
/// built-in scenario, and kills point-diagonal data.
fn complexes(r: &mut Report, rng: &mut Sampler, p: Prec) -> Result<()> {
    let scn = Scenario::builtin();
    let s = BasePoint::Finite(rat(0));
    let flags = scn.flags_over(&s)?;
    let cut = |x: &LSeries| x.with_prec(Precision::Bounded(p.outer));

    // degree 0 → 1: global forms whose poles lie on declared flags, curve
    // data regular along its curve, point data regular at its point
    let globals = ["1/(u*t)", "1/((u-t)*t)", "(1+u)/(u*t^2)", "t^-1*(u - 1)^-1 - t^-1*u^-1"];
    let mut triples: Vec<Triple<Expr>> = Vec::new();
    for g in globals {
        let mut tri = Triple::new(e(g)?);
        tri.curves.insert("F0".into(), e(&format!("({})/(u^2 - 2)", coeff_text(rng)))?);
        tri.curves.insert("U0".into(), e("t^-1*(1 + u)")?);
        tri.points.insert("o".into(), e(&format!("{}*(1 + u*t)", coeff_text(rng)))?);
        triples.push(tri);
    }
    for (i, tri) in triples.iter().take(3).enumerate() {
        let b = boundary_forms(&scn, tri, &flags, p)?;
        for (k, part) in b.iter().enumerate().take(2) {
            let label = ["f2 - f0", "f0 + f1", "-f1 - f2"][k];
            record(r, vec![("triple", format!("forms #{i}")), ("component", label.into()), ("global", tri.global.to_string())], || {
                let v = global_pushforward_forms(&scn, part, &s, p.outer)?;
                Ok((format!("{v}"), cut(&v.coeff).is_known_zero()))
            });
        }
        record(r, vec![("triple", format!("forms #{i}")), ("component", "-f1 - f2".into())], || {
            let v = global_pushforward_forms(&scn, &b[2], &s, p.outer)?;
            Ok((format!("{v}"), cut(&v.coeff).is_known_zero()))
        });
    }

    // degree 1 → 2: g1 point-diagonal, g2 curve-diagonal, g3 regular
    for i in 0..3 {
        let g1 = form_adele(&scn, &e(&format!("{}*(u*t)^-1*(1 + u)", coeff_text(rng)))?, &scn.flags().into_iter().filter(|f| f.point == "o").collect::<Vec<_>>(), p)?;
        let g2 = form_adele(&scn, &e(&format!("{}/(u*(u-1))*t^-1", coeff_text(rng)))?, &flags_on(&scn, "F0"), p)?;
        let g3 = form_adele(&scn, &e(&format!("{}*(1 + u)*t", coeff_text(rng)))?, &[FlagId::new("o", "D")], p)?;
        record(r, vec![("triple", format!("degree-1 forms #{i}")), ("check", "point-diagonal pushes to 0".into())], || {
            let v = global_pushforward_forms(&scn, &g1, &s, p.outer)?;
            Ok((format!("{v}"), cut(&v.coeff).is_known_zero()))
        });
        record(r, vec![("triple", format!("degree-1 forms #{i}")), ("check", "f_*(g1+g2+g3) = f_*g2 + f_*g3".into())], || {
            let lhs = global_pushforward_forms(&scn, &sum_forms(&[&g1, &g2, &g3])?, &s, p.outer)?;
            let rhs = global_pushforward_forms(&scn, &g2, &s, p.outer)?.try_add(&global_pushforward_forms(&scn, &g3, &s, p.outer)?)?;
            let v3 = global_pushforward_forms(&scn, &g3, &s, p.outer)?;
            let regular = v3.coeff.is_known_zero() || v3.coeff.valuation()? >= 0;
            let d = cut(&lhs.coeff.try_sub(&rhs.coeff)?);
            Ok((format!("{lhs} vs {rhs}"), d.is_known_zero() && regular))
        });
    }

    // the K₂ complex
    let kglobals = [("u - t", "t"), ("u", "t"), ("1 + u", "u*t")];
    for (i, (a, bb)) in kglobals.iter().enumerate() {
        let mut tri: Triple<SymbolData> = Triple::new(vec![(e(a)?, e(bb)?, 1)]);
        tri.curves.insert("F0".into(), vec![(e("u^2 - 2")?, e("1 + t")?, 1)]);
        tri.points.insert("o".into(), vec![(e("1 + u")?, e("2 + t")?, 1)]);
        let b = boundary_k2(&scn, &tri, &flags, p)?;
        for (k, part) in b.iter().enumerate() {
            let label = ["f2 f0^-1", "f0 f1", "f1^-1 f2^-1"][k];
            record(r, vec![("triple", format!("K2 #{i}")), ("component", label.into()), ("global", format!("{{{a}, {bb}}}"))], || {
                let v = global_pushforward_k2(&scn, part, &s, p.outer)?;
                is_one(&v)
            });
        }
        record(r, vec![("triple", format!("K2 #{i}")), ("component", "product of all three".into())], || {
            let v = global_pushforward_k2(&scn, &product_k2(&[&b[0], &b[1], &b[2]]), &s, p.outer)?;
            is_one(&v)
        });
    }
    Ok(())
}
