//! Worked examples checked against values computed independently here:
//! closed forms, hand expansions, re-multiplication and explicit matrices.

use adelic_core::adeles::{check_adelic_k2, FlagId, K2Adele, Scenario};
use adelic_core::coeff::{rat, ratio, Field, FieldElem, Rational};
use adelic_core::direct_image::{di_symbol, table_pairing, FlagContext};
use adelic_core::expr::{eval, l2_env, lseries_env, parse, Caps};
use adelic_core::extend::LocalExt;
use adelic_core::laurent::{ls_exp, ls_log, ls_residue, Form1, LSeries};
use adelic_core::local2d::{
    decompose_unit, l2_exp, l2_log, res_inner, res_outer, res_total, weierstrass_prepare, Form2, L2Series,
};
use adelic_core::precision::Precision;
use adelic_core::series::var;
use adelic_core::symbols::preimage::{symbol_preimage, tame_along, CurveGerm, CurveTarget};
use adelic_core::symbols::{bracket_1d, bracket_2d, milnor_boundary, tame_symbol, triple_symbol, K2Elem};
use proptest::prelude::*;

fn q() -> Field {
    Field::Rationals
}

fn sqrt2() -> Field {
    Field::extension("a", vec![rat(-2), rat(0), rat(1)]).unwrap()
}

fn qa(f: &Field, a: i64, b: i64) -> FieldElem {
    FieldElem::new(f, vec![rat(a), rat(b)])
}

fn ls(v: &str, val: i64, c: &[i64], p: Precision) -> LSeries {
    LSeries::from_ints(var(v), &q(), val, c, p)
}

/// `Σ c·u^i t^j` over `(i, j, c)`.
fn l2(terms: &[(i64, i64, i64)], pu: i64, pt: i64) -> L2Series {
    let ts: Vec<(i64, i64, Rational)> = terms.iter().map(|&(i, j, c)| (i, j, rat(c))).collect();
    L2Series::from_terms(var("t"), var("u"), &q(), &ts, Precision::Bounded(pu), Precision::Bounded(pt))
}

fn l2x(terms: &[(i64, i64, i64)]) -> L2Series {
    let ts: Vec<(i64, i64, Rational)> = terms.iter().map(|&(i, j, c)| (i, j, rat(c))).collect();
    L2Series::from_terms(var("t"), var("u"), &q(), &ts, Precision::Exact, Precision::Exact)
}

fn k(n: i64) -> FieldElem {
    FieldElem::rational(rat(n))
}

// --- scalars -----------------------------------------------------------------

#[test]
fn inverse_of_one_plus_alpha() {
    let f = sqrt2();
    let x = qa(&f, 1, 1);
    let y = x.inv().unwrap();
    assert_eq!(y, qa(&f, -1, 1));
    // (1 + α)(−1 + α) = α² − 1 = 1
    assert!(x.mul(&y).is_one());
}

#[test]
fn trace_and_norm_of_alpha_from_the_matrix() {
    let f = sqrt2();
    let alpha = FieldElem::generator(&f);
    // multiplication by α on the basis {1, α}: 1 ↦ α, α ↦ 2
    let m = [[rat(0), rat(2)], [rat(1), rat(0)]];
    assert_eq!(alpha.mul_matrix(), m.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
    assert_eq!(alpha.trace(), &m[0][0] + &m[1][1]);
    assert_eq!(alpha.norm(), &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0]);
    assert_eq!(alpha.norm(), rat(-2));
}

proptest! {
    #[test]
    fn quadratic_field_inverse_trace_norm(a in -20i64..20, b in -20i64..20, c in 1i64..7) {
        prop_assume!(a != 0 || b != 0);
        let f = sqrt2();
        let x = FieldElem::new(&f, vec![ratio(a, c), ratio(b, c)]);
        let (a, b) = (ratio(a, c), ratio(b, c));
        let n = &a * &a - rat(2) * &b * &b;
        // (a + bα)⁻¹ = (a − bα)/(a² − 2b²)
        prop_assert_eq!(x.inv().unwrap(), FieldElem::new(&f, vec![&a / &n, -(&b / &n)]));
        prop_assert_eq!(x.trace(), rat(2) * &a);
        prop_assert_eq!(x.norm(), n);
    }
}

// --- local fields ------------------------------------------------------------

#[test]
fn unit_decomposition_recomposes() {
    // u⁻¹t + t = t·u⁻¹·(1 + u)
    let a = l2x(&[(-1, 1, 1), (0, 1, 1)]);
    let d = decompose_unit(&a).unwrap();
    assert_eq!((d.m, d.n), (1, -1));
    assert!(d.c.is_one());
    assert!(d.eps.eq_mod_prec(&l2x(&[(0, 0, 1), (1, 0, 1)])));
    let back = l2x(&[(-1, 1, 1)]).try_mul(&d.eps).unwrap();
    assert!(back.eq_mod_prec(&a));
}

#[test]
fn weierstrass_of_t_times_unit() {
    // t(1 + u) + t² = (1 + u + t)·t
    let f = l2(&[(0, 1, 1), (1, 1, 1), (0, 2, 1)], 8, 8);
    let w = weierstrass_prepare(&f).unwrap();
    assert_eq!((w.nu1, w.nu2), (0, 1));
    assert!(w.g.eq_mod_prec(&l2x(&[(0, 1, 1)])));
    assert!(w.b.eq_mod_prec(&l2x(&[(0, 0, 1), (1, 0, 1), (0, 1, 1)])));
    assert!(w.b.try_mul(&w.g).unwrap().eq_mod_prec(&f));
}

#[test]
fn residues_of_a_hand_form() {
    // (2u⁻¹t⁻¹ + u⁻²t⁻¹ + 3u⁻¹ + 5t⁻¹ + u t) du∧dt
    let w = Form2::new(l2(&[(-1, -1, 2), (-2, -1, 1), (-1, 0, 3), (0, -1, 5), (1, 1, 1)], 6, 6));
    assert_eq!(res_total(&w).unwrap(), k(2));
    // res_u = (2t⁻¹ + 3) dt, res_t = (2u⁻¹ + u⁻² + 5) du
    assert!(res_inner(&w).unwrap().coeff.eq_mod_prec(&ls("t", -1, &[2, 3], Precision::Exact)));
    assert!(res_outer(&w).unwrap().coeff.eq_mod_prec(&ls("u", -2, &[1, 2, 5], Precision::Exact)));
}

#[test]
fn exp_and_log_against_closed_forms() {
    // log(1 + t) = t − t²/2 + t³/3 − …
    let p = Precision::Bounded(6);
    let lg = ls_log(&ls("t", 0, &[1, 1], p)).unwrap();
    for n in 1..6i64 {
        let sign = if n % 2 == 1 { 1 } else { -1 };
        assert_eq!(lg.coeff(n).unwrap(), FieldElem::rational(ratio(sign, n)));
    }
    // exp(t) = Σ tⁿ/n!
    let ex = ls_exp(&ls("t", 1, &[1], p)).unwrap();
    let mut fact = 1i64;
    for n in 0..6i64 {
        fact *= n.max(1);
        assert_eq!(ex.coeff(n).unwrap(), FieldElem::rational(ratio(1, fact)));
    }
    // log(1 + t/u) has no u⁰ term; its t^n coefficient is (−1)^{n+1} u^{-n}/n
    let x = l2(&[(0, 0, 1), (-1, 1, 1)], 8, 6);
    let lg = l2_log(&x).unwrap();
    for n in 1..5i64 {
        let c = lg.coeff(n).unwrap();
        let sign = if n % 2 == 1 { 1 } else { -1 };
        assert_eq!(c.coeff(-n).unwrap(), FieldElem::rational(ratio(sign, n)));
        assert!(c.terms().all(|(e, v)| e == -n || v.is_zero()));
    }
    assert!(l2_exp(&lg).unwrap().eq_mod_prec(&x));
}

// --- extensions --------------------------------------------------------------

#[test]
fn norms_and_traces_from_regular_representations() {
    // e = 2: multiplication by t' on {1, t'} is [[0, τ], [1, 0]], det −τ
    let ram = LocalExt::new(var("tau"), var("y"), 2, q(), q()).unwrap();
    let y = LSeries::var_power(var("y"), q(), 1);
    assert!(ram.norm_elem(&y).unwrap().eq_mod_prec(&ls("tau", 1, &[-1], Precision::Exact)));
    // Tr(dt'/t') = dτ/τ: dt'/t' = dτ/(2τ) and the trace of 1 is 2
    let tr = ram.trace_form(&Form1::new(ls("y", -1, &[1], Precision::Bounded(6)))).unwrap();
    assert!(tr.coeff.eq_mod_prec(&ls("tau", -1, &[1], Precision::Exact)), "{tr}");

    // e = 1, k' = Q(α): multiplication by α·t on {1, α} is t·[[0, 2], [1, 0]]
    let f = sqrt2();
    let unr = LocalExt::new(var("t"), var("t"), 1, q(), f.clone()).unwrap();
    let at = LSeries::monomial(var("t"), f.clone(), FieldElem::generator(&f), 1);
    let want = FieldElem::generator(&f).norm();
    let n = unr.norm_elem(&at).unwrap();
    assert!(n.eq_mod_prec(&LSeries::monomial(var("t"), q(), FieldElem::rational(want), 2)), "{n}");
    let alpha_dt = Form1::new(LSeries::scalar(var("t"), FieldElem::generator(&f)));
    assert!(unr.trace_form(&alpha_dt).unwrap().coeff.is_known_zero());
}

// --- symbols -----------------------------------------------------------------

#[test]
fn tame_symbols_and_boundary() {
    // (u, t) along t: ν(u) = 0, ν(t) = 1 ⇒ u¹·t⁰ = u
    let u = l2x(&[(1, 0, 1)]);
    let t = l2x(&[(0, 1, 1)]);
    assert!(tame_symbol(&u, &t).unwrap().eq_mod_prec(&ls("u", 1, &[1], Precision::Exact)));
    // ∂{τ, c} = {c}
    let tau = ls("t", 1, &[1], Precision::Exact);
    let c = ls("t", 0, &[7], Precision::Exact);
    let b = milnor_boundary(&[tau, c]).unwrap();
    assert_eq!(b.len(), 1);
    assert_eq!((b[0].entries.clone(), b[0].exponent), (vec![k(7)], 1));
}

#[test]
fn triple_symbol_matches_the_projection_formula() {
    // Nm(φ, ψ, f*ξ) = (f_*(φ, ψ), ξ) with f_*(u, t) = t and (t, c) = c⁻¹
    let (u, t) = (l2x(&[(1, 0, 1)]), l2x(&[(0, 1, 1)]));
    for c in [2, 3, -5] {
        let v = triple_symbol(&u, &t, &l2x(&[(0, 0, c)])).unwrap();
        let image = table_pairing(&u, &t).unwrap();
        let rhs = tame_symbol(&image, &ls("t", 0, &[c], Precision::Exact)).unwrap();
        assert_eq!(v, rhs);
        assert_eq!(v, FieldElem::rational(ratio(1, c)));
    }
}

#[test]
fn brackets_by_hand() {
    // (u, t; 1] = res(u⁻¹t⁻¹ du∧dt) = 1
    let one = l2x(&[(0, 0, 1)]);
    assert_eq!(bracket_2d(&l2x(&[(1, 0, 1)]), &l2x(&[(0, 1, 1)]), &one).unwrap(), k(1));
    // dlog(1 + t) ∧ dlog t = 0, so (1 + t, t; ς] = 0 for every ς
    let v = bracket_2d(&l2(&[(0, 0, 1), (0, 1, 1)], 8, 8), &l2x(&[(0, 1, 1)]), &l2x(&[(0, -1, 1)])).unwrap();
    assert_eq!(v, k(0));
    // (1 + τ; τ⁻¹] = res(τ⁻¹(1 − τ + …)dτ) = 1
    let b = bracket_1d(&ls("t", 0, &[1, 1], Precision::Bounded(8)), &ls("t", -1, &[1], Precision::Exact)).unwrap();
    assert_eq!(b, k(1));
}

#[test]
fn table_entry_with_an_outer_unit() {
    // (u, 1 + t) = exp res_u(log(1 + t)·du/u) = exp log(1 + t) = 1 + t
    let v = table_pairing(&l2x(&[(1, 0, 1)]), &l2(&[(0, 0, 1), (0, 1, 1)], 8, 8)).unwrap();
    assert!(v.eq_mod_prec(&ls("t", 0, &[1, 1], Precision::Exact)), "{v}");
}

#[test]
fn direct_images_of_symbols() {
    // transverse to C = (u): (u, t) read along u is t⁻¹
    let ctx = FlagContext::transverse(var("t"), var("u"), var("t"), 1, q()).unwrap();
    let along_u = |i: i64, j: i64| L2Series::monomial2(var("u"), var("t"), k(1), i, j);
    let v = di_symbol(&ctx, &along_u(0, 1), &along_u(1, 0)).unwrap();
    assert!(v.eq_mod_prec(&ls("t", -1, &[1], Precision::Exact)), "{v}");
    // fibre at u = α: the table gives t in k'((t)); its norm is t²
    let scn = Scenario::builtin();
    let f = FlagId::parse("pa@F0").unwrap();
    let lv = |s: &str| scn.local_value(&parse(s).unwrap(), &f, 8, 8).unwrap();
    let v = di_symbol(&scn.flag_context(&f).unwrap(), &lv("u"), &lv("t")).unwrap();
    assert!(v.eq_mod_prec(&ls("t", 2, &[1], Precision::Exact)), "{v}");
}

#[test]
fn symbol_preimage_for_one_curve() {
    // target 1 + ū on C = (t); nothing along (u)
    let f = ls("u", 0, &[1, 1], Precision::Bounded(8));
    let c = CurveGerm::t_axis(&q());
    let x = symbol_preimage(&[CurveTarget { curve: c.clone(), value: f.clone() }], 8).unwrap();
    assert!(tame_along(&x, &c).unwrap().eq_mod_prec(&f));
    let along_u = tame_along(&x, &CurveGerm::u_axis(&q())).unwrap();
    assert!(along_u.try_sub(&LSeries::one(along_u.var().clone(), q())).unwrap().is_known_zero());
}

// --- scenario ----------------------------------------------------------------

#[test]
fn expansions_at_flags() {
    let scn = Scenario::builtin();
    // 1/(u − 1) = −1 − u − u² − … at the origin of the fibre
    let f = FlagId::parse("o@F0").unwrap();
    let x = scn.expand_function(&parse("1/(u - 1)").unwrap(), &f, 8, 8).unwrap();
    let c0 = x.coeff(0).unwrap();
    for n in 0..8 {
        assert_eq!(c0.coeff(n).unwrap(), k(-1));
    }
    // t/(u − t) along C = (u): re-multiply by (u − t) to recover t
    let f = FlagId::parse("o@U0").unwrap();
    let x = scn.expand_function(&parse("t/(u - t)").unwrap(), &f, 8, 8).unwrap();
    let d = scn.expand_function(&parse("u - t").unwrap(), &f, 8, 8).unwrap();
    let t = scn.expand_function(&parse("t").unwrap(), &f, 8, 8).unwrap();
    assert!(x.try_mul(&d).unwrap().eq_mod_prec(&t));
}

#[test]
fn stein_generator_is_level_two() {
    let scn = Scenario::builtin();
    let f = FlagId::parse("o@F0").unwrap();
    let lv = |s: &str| scn.local_value(&parse(s).unwrap(), &f, 8, 8).unwrap();
    let mut a = K2Adele::new();
    a.insert(f.clone(), K2Elem::symbol(lv("1 + t^2*u"), lv("u")));
    let c = check_adelic_k2(&scn, &a, 2);
    assert!(c.report.pass);
    assert_eq!(c.report.cases[0].residual, "K2(O, m^2)");
}

// --- invariants --------------------------------------------------------------

fn arb_l2() -> impl Strategy<Value = L2Series> {
    (proptest::collection::vec((-3i64..5, -2i64..4, -4i64..5), 0..8), 2i64..7, 2i64..7).prop_map(|(ts, pu, pt)| {
        let ts: Vec<(i64, i64, Rational)> = ts.into_iter().map(|(i, j, c)| (i, j, ratio(c, 1 + j.rem_euclid(3)))).collect();
        L2Series::from_terms(var("t"), var("u"), &q(), &ts, Precision::Bounded(pu), Precision::Bounded(pt))
    })
}

fn arb_unit() -> impl Strategy<Value = L2Series> {
    proptest::collection::vec((-2i64..3, 1i64..4, -3i64..4), 0..5).prop_map(|ts| {
        let mut terms = vec![(0, 0, rat(1))];
        terms.extend(ts.into_iter().map(|(i, j, c)| (i, j, ratio(c, 2))));
        L2Series::from_terms(var("t"), var("u"), &q(), &terms, Precision::Bounded(8), Precision::Bounded(6))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_series_parse_back(x in arb_l2()) {
        let env = l2_env("u", "t", &q(), Caps::new(12, 12));
        let y = eval(&parse(&x.to_string()).unwrap(), &env).unwrap();
        prop_assert_eq!(x, y);
    }

    #[test]
    fn printed_one_variable_series_parse_back(c in proptest::collection::vec(-5i64..6, 1..7), v in -3i64..3, p in 0i64..4) {
        let x = ls("t", v, &c, Precision::Bounded(v + c.len() as i64 + p));
        let y = eval(&parse(&x.to_string()).unwrap(), &lseries_env("t", &q(), 16)).unwrap();
        prop_assert_eq!(x, y);
    }

    #[test]
    fn residues_agree_three_ways(x in arb_l2()) {
        let w = Form2::new(x.clone());
        if let Ok(total) = res_total(&w) {
            // the oracle: the u⁻¹t⁻¹ coefficient, read off directly
            let direct = x.coeff(-1).and_then(|c| c.coeff(-1)).unwrap_or_else(|| k(0));
            prop_assert_eq!(&total, &direct);
            prop_assert_eq!(&ls_residue(&res_outer(&w).unwrap()).unwrap(), &total);
            prop_assert_eq!(&ls_residue(&res_inner(&w).unwrap()).unwrap(), &total);
        }
    }

    #[test]
    fn one_units_log_exp_round_trip(x in arb_unit()) {
        let back = l2_exp(&l2_log(&x).unwrap()).unwrap();
        prop_assert!(back.eq_mod_prec(&x), "{} vs {}", back, x);
    }

    #[test]
    fn pairing_is_bimultiplicative_in_the_first_slot(a in arb_unit(), b in arb_unit(), n in -2i64..3, m in -2i64..3) {
        let g = l2x(&[(n, m, 1)]);
        let lhs = table_pairing(&g.try_mul(&a).unwrap(), &b).unwrap();
        let rhs = table_pairing(&g, &b).unwrap().try_mul(&table_pairing(&a, &b).unwrap()).unwrap();
        prop_assert!(lhs.eq_mod_prec(&rhs), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn exact_quotients_invert_products(x in arb_unit(), y in arb_unit()) {
        let p = x.try_mul(&y).unwrap();
        prop_assert!(p.div(&y).unwrap().eq_mod_prec(&x));
    }
}
