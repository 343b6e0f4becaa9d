use super::*;
use crate::coeff::{rat, ratio, Field};
use crate::series::var;

fn q() -> Field {
    Field::Rationals
}

fn el(terms: &[(i64, i64, i64)], pu: i64, pt: i64) -> L2Series {
    let ts: Vec<(i64, i64, Rational)> = terms.iter().map(|&(i, j, c)| (i, j, rat(c))).collect();
    L2Series::from_terms(var("t"), var("u"), &q(), &ts, Precision::Bounded(pu), Precision::Bounded(pt))
}

fn exact(terms: &[(i64, i64, i64)]) -> L2Series {
    let ts: Vec<(i64, i64, Rational)> = terms.iter().map(|&(i, j, c)| (i, j, rat(c))).collect();
    L2Series::from_terms(var("t"), var("u"), &q(), &ts, Precision::Exact, Precision::Exact)
}

#[test]
fn residues_of_basic_forms() {
    let w = Form2::new(exact(&[(-1, -1, 1), (2, -1, 3), (-1, 0, 5)]));
    assert_eq!(res_total(&w).unwrap(), FieldElem::rational(rat(1)));
    let ro = res_outer(&w).unwrap();
    assert_eq!(ro.coeff, LSeries::from_ints(var("u"), &q(), -1, &[1, 0, 0, 3], Precision::Exact));
    let ri = res_inner(&w).unwrap();
    assert_eq!(ri.coeff, LSeries::from_ints(var("t"), &q(), -1, &[1, 5], Precision::Exact));
}

#[test]
fn inner_residue_truncates_when_inner_precision_runs_out() {
    let mut g = el(&[(-1, 0, 1), (-1, 1, 2)], 4, 4);
    // degrade the t^2 coefficient
    let c2 = LSeries::zero(var("u"), q(), Precision::Bounded(-2));
    let extra = L2Series::from_inner(var("t"), c2).shift(2);
    g = &g + &extra;
    let r = inner_residue_series(&g);
    assert_eq!(r.prec(), Precision::Bounded(2));
    assert_eq!(r, LSeries::from_ints(var("t"), &q(), 0, &[1, 2], Precision::Bounded(2)));
}

#[test]
fn unit_decomposition() {
    // 3 t^2 u^-1 (1 + u + t)
    let a = el(&[(-1, 2, 3), (0, 2, 3), (-1, 3, 3)], 6, 6);
    let d = decompose_unit(&a).unwrap();
    assert_eq!((d.m, d.n), (2, -1));
    assert_eq!(d.c, FieldElem::rational(rat(3)));
    assert!(d.eps.eq_mod_prec(&exact(&[(0, 0, 1), (1, 0, 1), (0, 1, 1)])));
    let zero = L2Series::exact_zero(var("t"), InnerCtx::new(var("u"), q()));
    assert_eq!(decompose_unit(&zero), Err(Error::ZeroElement));
}

#[test]
fn log_exp_roundtrip_with_negative_inner_tail() {
    // ε = 1 + u + t u^-1
    let eps = el(&[(0, 0, 1), (1, 0, 1), (-1, 1, 1)], 8, 5);
    let l = l2_log(&eps).unwrap();
    let back = l2_exp(&l).unwrap();
    assert!(back.eq_mod_prec(&eps));
    // every coefficient still carries real information
    for k in 0..5 {
        assert!(back.coeff(k).unwrap().prec() >= Precision::Bounded(8 - 2 * k - 1), "k={k}");
    }
}

#[test]
fn log_of_outer_geometric() {
    // log(1 + t) = t - t^2/2 + t^3/3 - ...
    let eps = el(&[(0, 0, 1), (0, 1, 1)], 6, 5);
    let l = l2_log(&eps).unwrap();
    let want = L2Series::from_terms(
        var("t"),
        var("u"),
        &q(),
        &[(0, 1, rat(1)), (0, 2, ratio(-1, 2)), (0, 3, ratio(1, 3)), (0, 4, ratio(-1, 4))],
        Precision::Bounded(6),
        Precision::Bounded(5),
    );
    assert!(l.eq_mod_prec(&want));
    assert_eq!(l2_log(&el(&[(0, 0, 2)], 4, 4)), Err(Error::NotAOneUnit));
    assert_eq!(l2_exp(&el(&[(0, 0, 1)], 4, 4)), Err(Error::NonpositiveValuation));
}

#[test]
fn dlog_wedge_of_coordinates() {
    let u = exact(&[(1, 0, 1)]);
    let t = exact(&[(0, 1, 1)]);
    let w = dlog_wedge(&u, &t).unwrap();
    assert_eq!(res_total(&w).unwrap(), FieldElem::rational(rat(1)));
    let w2 = dlog_wedge(&t, &u).unwrap();
    assert_eq!(res_total(&w2).unwrap(), FieldElem::rational(rat(-1)));
}

#[test]
fn weierstrass_exact_distinguished() {
    let f = exact(&[(0, 2, 1), (1, 0, -1)]);
    let w = weierstrass_prepare(&f).unwrap();
    assert_eq!((w.nu1, w.nu2), (0, 2));
    assert!(w.g.eq_mod_prec(&f));
    assert!(w.b.eq_mod_prec(&exact(&[(0, 0, 1)])));
}

#[test]
fn weierstrass_recovers_factors() {
    // f = u^2 (1 + t + u)(t^2 - u t - u)
    let unit = el(&[(0, 0, 1), (0, 1, 1), (1, 0, 1)], 12, 8);
    let dist = exact(&[(0, 2, 1), (1, 1, -1), (1, 0, -1)]);
    let f = (&unit * &dist).map_coeffs(unit.ctx().clone(), |c| c.shift(2));
    let w = weierstrass_prepare(&f).unwrap();
    assert_eq!((w.nu1, w.nu2), (2, 2));
    assert!(w.g.eq_mod_prec(&dist), "g = {:?}", w.g);
    assert!(w.b.eq_mod_prec(&unit));
    let recon = (&w.b * &w.g).map_coeffs(unit.ctx().clone(), |c| c.shift(2));
    assert!(recon.eq_mod_prec(&f));
    assert!(w.g.prec().is_exact());
    // the unknown t^8 coefficient of f moves r by about u^{8/ν₂}
    assert!(w.g.coeff(0).unwrap().prec() >= Precision::Bounded(4));
}

#[test]
fn weierstrass_division_identity() {
    let f = el(&[(0, 2, 1), (1, 0, 1), (0, 3, 2), (2, 1, 1)], 10, 8);
    let h = el(&[(0, 0, 1), (1, 1, 3), (0, 4, 1), (3, 2, -1)], 10, 8);
    let (qq, r) = weierstrass_divide(&h, &f).unwrap();
    assert!(r.end() <= 2);
    let back = &(&qq * &f) + &r;
    assert!(back.eq_mod_prec(&h));
}

#[test]
fn parameter_changes_keep_residues() {
    // ω = (u^-2 t^-1 + u^-1 t^-2 (1+u)) du∧dt
    let w = Form2::new(el(&[(-2, -1, 1), (-1, -2, 1), (0, -2, 1), (-1, 1, 4)], 8, 5));
    // u = u'(1 + u')
    let sub = LSeries::from_ints(var("u"), &q(), 1, &[1, 1], Precision::Exact);
    let w2 = w.change_inner(&sub).unwrap();
    assert!(res_inner(&w2).unwrap().eq_mod_prec(&res_inner(&w).unwrap()));
    // t = t'(1 + t' + u)
    let tsub = el(&[(0, 1, 1), (0, 2, 1), (1, 1, 1)], 8, 6);
    let w3 = w.change_outer(&tsub).unwrap();
    let a = res_outer(&w3).unwrap();
    let b = res_outer(&w).unwrap();
    assert!(a.eq_mod_prec(&b), "{a:?} vs {b:?}");
    assert_eq!(res_total(&w3).unwrap(), res_total(&w).unwrap());
}

