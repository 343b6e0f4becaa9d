//! Acceptance suite: one PASS/FAIL line per criterion, exact modulo the
//! precision ideal, each criterion under a 10 s budget at P_u = P_t = 8.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use adelic_core::adeles::{
    boundary_forms, boundary_k2, cycle_of_adele, global_pushforward_forms, global_pushforward_k2, gysin_cycle,
    product_k2, verify_reciprocity, BasePoint, FlagId, K2Adele, Prec, ReciprocityInput, ReciprocityKind, Scenario,
    Triple,
};
use adelic_core::coeff::{rat, Field, Rational};
use adelic_core::direct_image::{di_form, table_pairing};
use adelic_core::expr::{parse, Expr};
use adelic_core::laurent::{ls_residue, LSeries};
use adelic_core::local2d::{res_inner, res_outer, res_total, Form2, L2Series};
use adelic_core::precision::Precision;
use adelic_core::sample::Shape;
use adelic_core::series::var;
use adelic_core::symbols::K2Elem;
use adelic_core::verify;
use num_traits::{One, Zero};

const P: Prec = Prec { inner: 8, outer: 8 };
const SEED: u64 = 7;
const BUDGET: Duration = Duration::from_secs(10);

type Outcome = Result<(), String>;

fn e(s: &str) -> Expr {
    parse(s).unwrap_or_else(|err| panic!("{s}: {err}"))
}

fn fl(s: &str) -> FlagId {
    FlagId::parse(s).unwrap()
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn tpoly(val: i64, coeffs: &[i64]) -> LSeries {
    LSeries::from_ints(var("t"), &Field::Rationals, val, coeffs, Precision::Exact)
}

/// Runs a verification suite and requires it to pass with at least `min`
/// cases inside the time budget.
fn suite(name: &str, min: usize) -> Outcome {
    let start = Instant::now();
    let r = verify::run(name, SEED, P, None).map_err(|err| format!("{name}: {err}"))?;
    let took = start.elapsed();
    let failed: Vec<String> = r.failures().take(3).map(|c| format!("{:?} -> {}", c.inputs, c.residual)).collect();
    check(r.pass, || format!("{name}: {} failing, e.g. {failed:?}", r.failures().count()))?;
    check(r.cases.len() >= min, || format!("{name}: only {} cases (want ≥ {min})", r.cases.len()))?;
    check(took < BUDGET, || format!("{name}: {took:.2?} exceeds the budget"))
}

// --- 1. truncated fibre -----------------------------------------------------

fn truncated_fibre() -> Outcome {
    // ω = (u⁻¹ + Σ_{l=1..5} t^l/(u − l)) du∧dt on the fibre t = 0 with the
    // points u = 0..5 and ∞. By hand: the image at u = l is t^l dt, at ∞ it
    // is −(1 + t + … + t⁵) dt, and the images sum to zero mod t⁶.
    let n = 5;
    let mut pts: Vec<String> =
        (0..=n).map(|l| format!(r#"{{"name": "x{l}", "u": "{l}", "t": "0", "curves": ["F"]}}"#)).collect();
    pts.push(r#"{"name": "xinf", "u": "inf", "t": "0", "curves": ["F"]}"#.into());
    let scn = Scenario::from_json(&format!(
        r#"{{"surface": "P1xA1", "points": [{}], "curves": [{{"kind": "fibre", "name": "F", "t": "0"}}]}}"#,
        pts.join(",")
    ))
    .map_err(|err| err.to_string())?;
    let omega = e("u^-1 + t/(u-1) + t^2/(u-2) + t^3/(u-3) + t^4/(u-4) + t^5/(u-5)");
    let cut = Precision::Bounded(n + 1);
    let mut total = tpoly(0, &[]);
    for l in 0..=n + 1 {
        let (name, want) = if l <= n { (format!("x{l}@F"), tpoly(l, &[1])) } else { ("xinf@F".into(), tpoly(0, &[-1; 6])) };
        let f = fl(&name);
        let w = scn.expand_form(&omega, &f, P.inner, P.outer).map_err(|err| err.to_string())?;
        let got = di_form(&scn.flag_context(&f).map_err(|err| err.to_string())?, &w).map_err(|err| err.to_string())?;
        let d = got.coeff.try_sub(&want).unwrap().with_prec(cut);
        check(d.is_known_zero(), || format!("{name}: got {got}, want ({want}) dt"))?;
        total = total.try_add(&got.coeff).unwrap();
    }
    check(total.with_prec(cut).is_known_zero(), || format!("sum of images {total}"))?;
    suite("fibre-forms", 1)
}

// --- 2. the symbol table ----------------------------------------------------

/// Naive truncated bivariate series `Σ c · t^j u^i`, keyed by `(j, i)`,
/// kept for `j < n` and `|i| ≤ w`. Deliberately independent of the crate's
/// series types.
#[derive(Clone)]
struct Bi {
    n: i64,
    w: i64,
    c: BTreeMap<(i64, i64), Rational>,
}

impl Bi {
    fn new(n: i64, terms: &[(i64, i64, i64)]) -> Bi {
        let mut b = Bi { n, w: 3 * n + 4, c: BTreeMap::new() };
        for &(j, i, c) in terms {
            b.put(j, i, rat(c));
        }
        b
    }

    fn put(&mut self, j: i64, i: i64, v: Rational) {
        if j < self.n && i.abs() <= self.w && !v.is_zero() {
            let slot = self.c.entry((j, i)).or_insert_with(Rational::zero);
            *slot += v;
            if slot.is_zero() {
                self.c.remove(&(j, i));
            }
        }
    }

    fn mul(&self, o: &Bi) -> Bi {
        let mut out = Bi { n: self.n, w: self.w, c: BTreeMap::new() };
        for (&(j1, i1), a) in &self.c {
            for (&(j2, i2), b) in &o.c {
                out.put(j1 + j2, i1 + i2, a * b);
            }
        }
        out
    }

    fn scale(&self, q: &Rational) -> Bi {
        let mut out = self.clone();
        out.c.values_mut().for_each(|v| *v *= q);
        out
    }

    fn add(&self, o: &Bi) -> Bi {
        let mut out = self.clone();
        for (&(j, i), v) in &o.c {
            out.put(j, i, v.clone());
        }
        out
    }

    /// `log(1 + x)` for topologically nilpotent `x`.
    fn log1p(x: &Bi) -> Bi {
        let mut acc = Bi::new(x.n, &[]);
        let mut pw = x.clone();
        let mut k = 1i64;
        while !pw.c.is_empty() {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc = acc.add(&pw.scale(&Rational::new(sign.into(), k.into())));
            pw = pw.mul(x);
            k += 1;
        }
        acc
    }

    /// `1/(1 + x)`.
    fn inv1p(x: &Bi) -> Bi {
        let mut acc = Bi::new(x.n, &[(0, 0, 1)]);
        let mut pw = x.clone();
        let mut sign = -1i64;
        while !pw.c.is_empty() {
            acc = acc.add(&pw.scale(&rat(sign)));
            pw = pw.mul(x);
            sign = -sign;
        }
        acc
    }

    fn d_u(&self) -> Bi {
        let mut out = Bi::new(self.n, &[]);
        for (&(j, i), v) in &self.c {
            out.put(j, i - 1, v * &rat(i));
        }
        out
    }

    /// Coefficients of `u⁻¹`, as a power series in `t` of length `n`.
    fn res_u(&self) -> Vec<Rational> {
        (0..self.n).map(|j| self.c.get(&(j, -1)).cloned().unwrap_or_else(Rational::zero)).collect()
    }
}

fn pmul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len();
    let mut out = vec![Rational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn pexp(r: &[Rational]) -> Vec<Rational> {
    assert!(r[0].is_zero());
    let n = r.len();
    let mut acc = vec![Rational::zero(); n];
    acc[0] = Rational::one();
    let mut term = acc.clone();
    for k in 1..n as i64 {
        term = pmul(&term, r).into_iter().map(|c| c / rat(k)).collect();
        acc.iter_mut().zip(&term).for_each(|(a, b)| *a += b);
    }
    acc
}

fn pinv(a: &[Rational]) -> Vec<Rational> {
    assert!(a[0].is_one());
    let mut out = vec![Rational::zero(); a.len()];
    out[0] = Rational::one();
    for k in 1..a.len() {
        let s: Rational = (1..=k).map(|i| &a[i] * &out[k - i]).sum();
        out[k] = -s;
    }
    out
}

fn ppow(a: &[Rational], k: i64) -> Vec<Rational> {
    let base = if k < 0 { pinv(a) } else { a.to_vec() };
    let mut one = vec![Rational::zero(); a.len()];
    one[0] = Rational::one();
    (0..k.abs()).fold(one, |acc, _| pmul(&acc, &base))
}

/// `t^m u^n c (1 + x)`.
struct Gen {
    name: &'static str,
    m: i64,
    n: i64,
    c: i64,
    x: Vec<(i64, i64, i64)>,
}

/// The pairing by the explicit formula: the monomial part by hand, the
/// one-unit part as `exp res_u(log ε₁ · dlog ε₂)⁻¹` and the mixed part as
/// `exp res_u(log ε · du/u)`, all evaluated on naive series.
fn oracle(a: &Gen, b: &Gen, n: i64) -> (i64, Vec<Rational>) {
    let eps = |g: &Gen| Bi::new(n + 2, &g.x);
    let u_inv = Bi::new(n + 2, &[(0, -1, 1)]);
    let e_of = |g: &Gen| pexp(&Bi::log1p(&eps(g)).mul(&u_inv).res_u()[..n as usize]);
    let dlog_b = eps(b).d_u().mul(&Bi::inv1p(&eps(b)));
    let m = pexp(&Bi::log1p(&eps(a)).mul(&dlog_b).res_u()[..n as usize]);
    let sign = if (a.n * b.n) % 2 == 0 { 1 } else { -1 };
    let c = Rational::from(b.c).pow_i(a.n) * Rational::from(a.c).pow_i(-b.n) * rat(sign);
    let series = pmul(&pmul(&ppow(&e_of(b), a.n), &ppow(&e_of(a), -b.n)), &pinv(&m));
    (a.n * b.m - a.m * b.n, series.into_iter().map(|v| v * &c).collect())
}

trait PowI {
    fn pow_i(self, k: i64) -> Rational;
}

impl PowI for Rational {
    fn pow_i(self, k: i64) -> Rational {
        let base = if k < 0 { self.recip() } else { self };
        (0..k.abs()).fold(Rational::one(), |acc, _| acc * &base)
    }
}

fn table() -> Outcome {
    let q = Field::Rationals;
    let s = Shape::new("u", "t", &q, P.inner, P.outer);
    let gens = [
        Gen { name: "u", m: 0, n: 1, c: 1, x: vec![] },
        Gen { name: "t", m: 1, n: 0, c: 1, x: vec![] },
        Gen { name: "2", m: 0, n: 0, c: 2, x: vec![] },
        Gen { name: "-1", m: 0, n: 0, c: -1, x: vec![] },
        Gen { name: "1+u", m: 0, n: 0, c: 1, x: vec![(0, 1, 1)] },
        Gen { name: "1+t", m: 0, n: 0, c: 1, x: vec![(1, 0, 1)] },
        Gen { name: "1+t*u^-1", m: 0, n: 0, c: 1, x: vec![(1, -1, 1)] },
    ];
    let local = |g: &Gen| -> L2Series {
        let mut x = s.mono(&s.int(g.c), g.n, g.m);
        let mut eps = s.var_mono(0, 0);
        for &(j, i, c) in &g.x {
            eps = eps.try_add(&s.mono(&s.int(c), i, j)).unwrap();
        }
        x = x.try_mul(&eps).unwrap();
        s.bound(&x)
    };
    // every certified coefficient must agree, and at least P_t − 1 of them
    // past the valuation must be certified
    let top = P.outer - 1;
    for a in &gens {
        for b in &gens {
            let got = table_pairing(&local(a), &local(b)).map_err(|err| format!("({}, {}): {err}", a.name, b.name))?;
            let (shift, want) = oracle(a, b, P.outer + 2);
            let known = got.prec().bound().unwrap_or(i64::MAX);
            check(known - shift >= top, || format!("({}, {}) only known to {known}: {got}", a.name, b.name))?;
            let below = got.valuation().map_err(|err| err.to_string())?;
            check(below >= shift, || format!("({}, {}) has valuation {below} < {shift}", a.name, b.name))?;
            for (k, w) in want.iter().enumerate() {
                let ex = shift + k as i64;
                if ex >= known {
                    break;
                }
                let have = got.coeff(ex).and_then(|c| c.as_rational());
                check(have.as_ref() == Some(w), || {
                    format!("({}, {}) coefficient of t^{ex}: got {have:?}, oracle {w} (full value {got})", a.name, b.name)
                })?;
            }
        }
    }
    let pair = |x: usize, y: usize| table_pairing(&local(&gens[x]), &local(&gens[y])).unwrap();
    let exact = |v: LSeries, want: LSeries| v.try_sub(&want).unwrap().with_prec(Precision::Bounded(top)).is_known_zero();
    check(exact(pair(0, 1), tpoly(1, &[1])), || "(u, t) ≠ t".into())?;
    check(exact(pair(1, 0), tpoly(-1, &[1])), || "(t, u) ≠ t⁻¹".into())?;
    check(exact(pair(0, 3), tpoly(0, &[-1])), || "(u, −1) ≠ −1".into())?;
    suite("table", 49)
}

// --- 7. reciprocity -----------------------------------------------------------

fn reciprocity() -> Outcome {
    let scn = Scenario::builtin();
    let point = [fl("o@F0"), fl("o@U0"), fl("o@D")];
    let run = |kind, input: ReciprocityInput, flags: &[FlagId]| -> Outcome {
        let label = format!("{kind:?} {input:?}");
        let r = verify_reciprocity(kind, &scn, &input, flags, P).map_err(|err| format!("{label}: {err}"))?;
        check(r.pass, || format!("{label}: {}", r.to_json()))
    };
    // dlog u∧dlog t, dlog(u−t)∧dlog t, dlog(u−t)∧dlog u
    for g in ["1/(u*t)", "1/((u-t)*t)", "1/((u-t)*u)"] {
        run(ReciprocityKind::PointForms, ReciprocityInput::Form(e(g)), &point)?;
    }
    for (a, b) in [("u", "t"), ("u - t", "t"), ("u", "u - t")] {
        run(ReciprocityKind::PointSymbols, ReciprocityInput::Symbol(e(a), e(b)), &point)?;
    }
    let fibre = [fl("o@F0"), fl("p1@F0"), fl("pinf@F0")];
    run(ReciprocityKind::FibreSymbols, ReciprocityInput::Symbol(e("u"), e("1 - u")), &fibre)?;
    for name in ["point-forms", "point-symbols", "fibre-symbols"] {
        suite(name, 1)?;
    }
    Ok(())
}

// --- 8. Gysin -----------------------------------------------------------------

fn gysin() -> Outcome {
    let scn = Scenario::builtin();
    let s = BasePoint::Finite(rat(0));
    for (flag, deg) in [("o@F0", 1), ("pa@F0", 2)] {
        let f = fl(flag);
        let lv = |x: &str| scn.local_value(&e(x), &f, P.inner, P.outer).unwrap();
        let mut a = K2Adele::new();
        a.insert(f.clone(), K2Elem::symbol(lv("u"), lv("t")));
        let cyc = cycle_of_adele(&a).map_err(|err| err.to_string())?;
        check(cyc.get(&f.point) == Some(&1), || format!("{flag}: cycle {cyc:?}"))?;
        let g = gysin_cycle(&scn, &a, P.outer).map_err(|err| err.to_string())?;
        check(g.len() == 1 && g.get(&s) == Some(&deg), || format!("{flag}: {g:?}, want {deg}·[s]"))?;
    }
    suite("gysin", 1)
}

// --- 9. pushforward ∘ boundary ---------------------------------------------------

fn complexes() -> Outcome {
    let scn = Scenario::builtin();
    let s = BasePoint::Finite(rat(0));
    let flags = scn.flags_over(&s).map_err(|err| err.to_string())?;
    let cut = |x: &LSeries| x.with_prec(Precision::Bounded(P.outer));
    let mut tri = Triple::new(e("1/(u*t)"));
    tri.curves.insert("F0".into(), e("1/(u^2 - 2)"));
    tri.points.insert("o".into(), e("1 + u*t"));
    for part in boundary_forms(&scn, &tri, &flags, P).map_err(|err| err.to_string())? {
        let v = global_pushforward_forms(&scn, &part, &s, P.outer).map_err(|err| err.to_string())?;
        check(cut(&v.coeff).is_known_zero(), || format!("f_* of a form boundary is {v}"))?;
    }
    let mut kt = Triple::new(vec![(e("u - t"), e("t"), 1)]);
    kt.points.insert("o".into(), vec![(e("1 + u"), e("2 + t"), 1)]);
    let ks = boundary_k2(&scn, &kt, &flags, P).map_err(|err| err.to_string())?;
    let one = LSeries::one(var("t"), Field::Rationals);
    for part in ks.iter().chain(std::iter::once(&product_k2(&[&ks[0], &ks[1], &ks[2]]))) {
        let v = global_pushforward_k2(&scn, part, &s, P.outer).map_err(|err| err.to_string())?;
        check(cut(&v.try_sub(&one).unwrap()).is_known_zero(), || format!("f_* of a K₂ boundary is {v}"))?;
    }
    suite("complexes", 1)
}

// --- 12. residues -------------------------------------------------------------

fn residues() -> Outcome {
    // u⁻¹t⁻¹ + 3u⁻²t⁻¹ + 5u⁻¹ + 7t⁻¹: the three residues by hand
    let q = Field::Rationals;
    let s = Shape::new("u", "t", &q, P.inner, P.outer);
    let g = [(1, -1, -1), (3, -2, -1), (5, -1, 0), (7, 0, -1)]
        .iter()
        .fold(s.var_mono(0, 0).try_sub(&s.var_mono(0, 0)).unwrap(), |acc, &(c, i, j)| {
            acc.try_add(&s.mono(&s.int(c), i, j)).unwrap()
        });
    let w = Form2::new(s.bound(&g));
    let total = res_total(&w).map_err(|err| err.to_string())?;
    check(total.as_rational() == Some(rat(1)), || format!("res_total = {total}"))?;
    let inner = res_inner(&w).map_err(|err| err.to_string())?;
    check(inner.coeff.try_sub(&tpoly(-1, &[1, 5])).unwrap().with_prec(Precision::Bounded(P.outer)).is_known_zero(), || {
        format!("res_inner = {inner}")
    })?;
    let outer = res_outer(&w).map_err(|err| err.to_string())?;
    let r1 = ls_residue(&outer).map_err(|err| err.to_string())?;
    let r2 = ls_residue(&inner).map_err(|err| err.to_string())?;
    check(r1 == total && r2 == total, || format!("three ways: {r1}, {r2}, {total}"))?;
    suite("residues", 250)
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("truncated fibre: images t^l dt, −Σt^l dt at ∞, sum ≡ 0", Box::new(truncated_fibre)),
        ("symbol table on seven generators vs naive oracle", Box::new(table)),
        ("first formula of the direct-image theorem (64 + random)", Box::new(|| suite("thm1-d", 4 * (64 + 50)))),
        ("second formula of the direct-image theorem", Box::new(|| suite("thm1-dd", 4 * 64))),
        ("Steinberg and skew-symmetry (100 per case)", Box::new(|| suite("steinberg", 4 * 2 * 100))),
        ("lemmas on the bracket and t^-k arguments (50 each)", Box::new(|| {
            suite("lemma-l4", 50)?;
            suite("lemma-ll", 50)
        })),
        ("reciprocity around a point and along a fibre", Box::new(reciprocity)),
        ("Gysin multiplicities 1·[s] and 2·[s]", Box::new(gysin)),
        ("pushforward ∘ boundary vanishes", Box::new(complexes)),
        ("independence of the local parameters (25+)", Box::new(|| suite("param-independence", 25))),
        ("Tate map compatibility", Box::new(|| suite("tate-compat", 1))),
        ("residues three ways; residue of the direct image", Box::new(residues)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = outcome.and_then(|()| check(took < BUDGET, || format!("took {took:.2?}")));
        match outcome {
            Ok(()) => println!("PASS  {:>2}  {name}  ({:.2}s)", i + 1, took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:>2}  {name}  ({:.2}s): {why}", i + 1, took.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
