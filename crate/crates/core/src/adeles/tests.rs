use super::*;
use crate::coeff::rat;
use crate::expr::parse;

fn e(s: &str) -> Expr {
    parse(s).unwrap()
}

fn fl(s: &str) -> FlagId {
    FlagId::parse(s).unwrap()
}

const P: Prec = Prec { inner: 8, outer: 8 };

fn zero_base() -> BasePoint {
    BasePoint::Finite(rat(0))
}

fn tau_power(k: i64) -> LSeries {
    LSeries::var_power(var("t"), Field::Rationals, k)
}

#[test]
fn adelic_form_divisor() {
    let scn = Scenario::builtin();
    let empty = check_adelic_form(&scn, &FormAdele::new());
    assert!(empty.report.pass && empty.divisor.is_empty());
    let mut a = FormAdele::new();
    let f = fl("o@F0");
    a.insert(f.clone(), Form2::new(scn.local_value(&e("u^-1*t^-2"), &f, 8, 8).unwrap()));
    let c = check_adelic_form(&scn, &a);
    assert!(c.report.pass);
    assert_eq!(c.divisor.get("F0"), Some(&2));
    // a value in the wrong local field is reported, not accepted
    let mut b = FormAdele::new();
    b.insert(f, Form2::new(crate::expr::eval(&e("x"), &crate::expr::l2_env("x", "t", &Field::Rationals, Caps::new(4, 4))).unwrap()));
    assert!(!check_adelic_form(&scn, &b).report.pass);
}

use crate::expr::Caps;

#[test]
fn adelic_k2_classes() {
    let scn = Scenario::builtin();
    let f = fl("o@F0");
    let lv = |s: &str| scn.local_value(&e(s), &f, 8, 8).unwrap();
    let mut a = K2Adele::new();
    a.insert(f.clone(), K2Elem::symbol(lv("1 + t^2*u"), lv("u")));
    let c = check_adelic_k2(&scn, &a, 2);
    assert!(c.report.pass);
    assert_eq!(c.report.cases[0].residual, "K2(O, m^2)");
    assert!(c.divisor.is_empty());

    let g = k2_adele(&scn, &vec![(e("u + 1"), e("t"), 1)], &[f.clone(), fl("o@D")], P).unwrap();
    let c = check_adelic_k2(&scn, &g, 1);
    let class = |flag: &str| {
        c.report.cases.iter().find(|k| k.inputs.get("flag").map(String::as_str) == Some(flag)).unwrap().residual.clone()
    };
    // t is the equation of F0 and 1 + u a unit at o; along D both are units
    assert_eq!(class("o@F0"), "K2(O_hat(inf C))");
    assert_eq!(class("o@D"), "K2(O)");
    assert_eq!(c.divisor.len(), 1);
    let h = k2_adele(&scn, &vec![(e("u - t"), e("t"), 1)], &[f.clone()], P).unwrap();
    assert_eq!(check_adelic_k2(&scn, &h, 1).report.cases[0].residual, "K2(K)");
}

#[test]
fn boundaries_form_a_complex() {
    let scn = Scenario::builtin();
    let flags = scn.flags_over(&zero_base()).unwrap();
    let mut tri = Triple::new(e("1/(u*t)"));
    tri.curves.insert("F0".into(), e("1/(u*t)"));
    let [b0, b1, b2] = boundary_forms(&scn, &tri, &flags, P).unwrap();
    let f = fl("o@F0");
    let w = scn.expand_form(&e("1/(u*t)"), &f, 8, 8).unwrap();
    assert!(b0.get(&f).unwrap().try_add(&w).unwrap().g.is_known_zero());
    assert!(b1.get(&f).unwrap().try_sub(&w.try_add(&w).unwrap()).unwrap().g.is_known_zero());
    let total = sum_forms(&[&b0, &b1, &b2]).unwrap();
    assert!(total.support.values().all(|w| w.g.is_known_zero()));

    let mut kt = Triple::new(vec![(e("u - t"), e("t"), 1)]);
    kt.points.insert("o".into(), vec![(e("u + 1"), e("t"), 1)]);
    let ks = boundary_k2(&scn, &kt, &flags, P).unwrap();
    let prod = product_k2(&[&ks[0], &ks[1], &ks[2]]);
    for (f, x) in &prod.support {
        assert!(pushforward_local_k2(&scn, f, x).unwrap().try_sub(&tau_power(0)).unwrap().is_known_zero(), "{f}");
    }
}

#[test]
fn pushforwards() {
    let scn = Scenario::builtin();
    assert_eq!(global_pushforward_k2(&scn, &K2Adele::new(), &zero_base(), 8).unwrap().valuation().unwrap(), 0);
    let mut a = K2Adele::new();
    let f = fl("o@F0");
    let lv = |s: &str| scn.local_value(&e(s), &f, 8, 8).unwrap();
    a.insert(f.clone(), K2Elem::symbol(lv("u"), lv("t")));
    let v = global_pushforward_k2(&scn, &a, &zero_base(), 8).unwrap();
    assert!(v.try_sub(&tau_power(1)).unwrap().is_known_zero(), "{v}");
    a.default = DefaultClass::Regular;
    assert!(matches!(global_pushforward_k2(&scn, &a, &zero_base(), 8), Err(Error::Unsupported(_))));
}

#[test]
fn reciprocity_at_a_point_and_along_a_fibre() {
    let scn = Scenario::builtin();
    let point = [fl("o@F0"), fl("o@U0"), fl("o@D")];
    let r = verify_reciprocity(ReciprocityKind::PointForms, &scn, &ReciprocityInput::Form(e("1/(u*t)")), &point, P).unwrap();
    assert!(r.pass, "{}", r.to_json());
    let r = verify_reciprocity(ReciprocityKind::PointSymbols, &scn, &ReciprocityInput::Symbol(e("u"), e("t")), &point, P).unwrap();
    assert!(r.pass, "{}", r.to_json());
    let fibre = [fl("o@F0"), fl("p1@F0"), fl("pinf@F0")];
    let r =
        verify_reciprocity(ReciprocityKind::FibreSymbols, &scn, &ReciprocityInput::Symbol(e("u"), e("1 - u")), &fibre, P).unwrap();
    assert!(r.pass, "{}", r.to_json());
    let ut = ReciprocityInput::Symbol(e("u"), e("t"));
    assert!(verify_reciprocity(ReciprocityKind::FibreSymbols, &scn, &ut, &fibre, P).unwrap().pass);
    // omitting a flag of the support breaks the product
    assert!(!verify_reciprocity(ReciprocityKind::FibreSymbols, &scn, &ut, &fibre[..2], P).unwrap().pass);
    assert!(verify_reciprocity(ReciprocityKind::FibreForms, &scn, &ReciprocityInput::Form(e("0")), &point, P).is_err());
}

#[test]
fn gysin_multiplicities() {
    let scn = Scenario::builtin();
    for (flag, w, deg) in [("o@F0", "u", 1), ("pa@F0", "u", 2)] {
        let f = fl(flag);
        let lv = |s: &str| scn.local_value(&e(s), &f, 8, 8).unwrap();
        let mut a = K2Adele::new();
        a.insert(f.clone(), K2Elem::symbol(lv(w), lv("t")));
        let cyc = cycle_of_adele(&a).unwrap();
        assert_eq!(cyc.get(&f.point), Some(&1));
        let g = gysin_cycle(&scn, &a, 8).unwrap();
        assert_eq!(g.get(&zero_base()), Some(&deg));
        assert_eq!(push_cycle(&scn, &cyc).unwrap(), g);
    }
    assert!(cycle_of_adele(&K2Adele::new()).unwrap().is_empty());
}

#[test]
fn tate_map_keeps_conditions() {
    let scn = Scenario::builtin();
    let flags = scn.flags_over(&zero_base()).unwrap();
    let a = k2_adele(&scn, &vec![(e("u - t"), e("t + u^2"), 1), (e("1 + u"), e("t"), -2)], &flags, P).unwrap();
    let c = check_adelic_k2(&scn, &a, 1);
    assert!(c.report.pass, "{}", c.report.to_json());
    let w = tate_map(&a).unwrap();
    let c = check_adelic_form(&scn, &w);
    assert!(c.report.pass, "{}", c.report.to_json());
    // idele pairing of u and t at every flag
    let mut f = AdeleVec::new();
    let mut g = AdeleVec::new();
    for fl in &flags {
        f.insert(fl.clone(), scn.expand_function(&e("u"), fl, 8, 8).unwrap());
        g.insert(fl.clone(), scn.expand_function(&e("t"), fl, 8, 8).unwrap());
    }
    assert!(check_adelic_k2(&scn, &pair_ideles(&f, &g), 1).report.pass);
}
