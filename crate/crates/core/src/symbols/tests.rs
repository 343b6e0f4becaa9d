use super::*;
use crate::coeff::{rat, Field, Rational};
use crate::precision::Precision;
use crate::series::var;

fn q() -> Field {
    Field::Rationals
}

fn l1(val: i64, c: &[i64]) -> LSeries {
    LSeries::from_ints(var("t"), &q(), val, c, Precision::Bounded(8))
}

fn l2(terms: &[(i64, i64, i64)]) -> L2Series {
    let ts: Vec<(i64, i64, Rational)> = terms.iter().map(|&(i, j, c)| (i, j, rat(c))).collect();
    L2Series::from_terms(var("t"), var("u"), &q(), &ts, Precision::Bounded(8), Precision::Bounded(6))
}

fn k(n: i64) -> FieldElem {
    FieldElem::rational(rat(n))
}

#[test]
fn tame_symbol_examples() {
    // (t, t) = -1, (t, 3) = 3^{-1}, (3, t) = 3
    let t = l1(1, &[1]);
    let three = l1(0, &[3]);
    assert_eq!(tame_symbol(&t, &t).unwrap(), k(-1));
    assert_eq!(tame_symbol(&t, &three).unwrap(), FieldElem::rational(Rational::new(1.into(), 3.into())));
    assert_eq!(tame_symbol(&three, &t).unwrap(), k(3));
    // (2t, 1 + t) = 1
    assert_eq!(tame_symbol(&l1(1, &[2]), &l1(0, &[1, 1])).unwrap(), k(1));
}

#[test]
fn boundary_is_inverse_tame_in_degree_two() {
    let a = l1(2, &[3, 1]);
    let b = l1(-1, &[5, 2]);
    let syms = milnor_boundary(&[a.clone(), b.clone()]).unwrap();
    let mut acc = k(1);
    for s in syms {
        assert_eq!(s.entries.len(), 1);
        acc = acc.mul(&s.entries[0].pow(s.exponent).unwrap());
    }
    assert_eq!(acc.mul(&tame_symbol(&a, &b).unwrap()), k(1));
}

#[test]
fn triple_symbol_on_generators() {
    let t = l2(&[(0, 1, 1)]);
    let u = l2(&[(1, 0, 1)]);
    let c = l2(&[(0, 0, 5)]);
    assert_eq!(triple_symbol(&t, &u, &c).unwrap(), k(5));
    assert_eq!(triple_symbol(&u, &t, &c).unwrap(), FieldElem::rational(Rational::new(1.into(), 5.into())));
    // (t, t, u) = (−1, t, u): ∂ gives {−1, u} ... evaluates to −1
    assert_eq!(triple_symbol(&t, &t, &u).unwrap(), triple_symbol(&l2(&[(0, 0, -1)]), &t, &u).unwrap());
    // Steinberg: (x, 1 − x, y) = 1
    let x = l2(&[(1, 1, 2), (0, 0, 3)]);
    let omx = l2(&[(0, 0, 1), (1, 1, -2), (0, 0, -3)]);
    assert_eq!(triple_symbol(&x, &omx, &u).unwrap(), k(1));
}

#[test]
fn brackets() {
    let t = l1(1, &[1]);
    assert_eq!(bracket_1d(&t, &l1(0, &[7, 1])).unwrap(), k(7));
    let u2 = l2(&[(1, 0, 1)]);
    let t2 = l2(&[(0, 1, 1)]);
    let one = l2(&[(0, 0, 1)]);
    assert_eq!(bracket_2d(&u2, &t2, &one).unwrap(), k(1));
    assert_eq!(bracket_2d(&t2, &u2, &one).unwrap(), k(-1));
}

#[test]
fn k2_tame_product() {
    let t = l1(1, &[1]);
    let two = l1(0, &[2]);
    let mut x = K2Elem::symbol(two.clone(), t.clone());
    x.push(t.clone(), t.clone(), 3);
    // (2,t)·(t,t)^3 = 2·(−1)^3
    assert_eq!(x.tame(k(1)).unwrap(), k(-2));
    assert_eq!(x.times(&x.inverse()).tame(k(1)).unwrap(), k(1));
}
