//! Finite extensions `k'((t')) ⊃ k((τ))` of Kummer shape `τ = t'^e`.
//!
//! As a `k((τ))`-vector space `k'((t'))` has basis `t'^i α^j`
//! (`0 ≤ i < e`, `0 ≤ j < [k':k]`); trace and norm are the trace and
//! determinant of the multiplication matrix in that basis.


use crate::coeff::{Field, FieldElem, Rational};
use crate::error::{Error, Result};
use crate::laurent::{Form1, LSeries};
use crate::precision::Precision;
use crate::series::{Series, Var};

#[derive(Clone, Debug, PartialEq)]
pub struct LocalExt {
    pub base_var: Var,
    pub top_var: Var,
    pub e: u32,
    pub base_field: Field,
    pub top_field: Field,
}

impl LocalExt {
    pub fn new(base_var: Var, top_var: Var, e: u32, base_field: Field, top_field: Field) -> Result<Self> {
        if e == 0 {
            return Err(Error::NotKummer("ramification index must be positive".into()));
        }
        if base_field != top_field && !base_field.is_rationals() {
            return Err(Error::TowerMismatch("only one extension level is supported".into()));
        }
        Ok(LocalExt { base_var, top_var, e, base_field, top_field })
    }

    /// The trivial extension (identity on `k((τ))` up to renaming).
    pub fn trivial(base_var: Var, top_var: Var, field: Field) -> Self {
        LocalExt { base_var, top_var, e: 1, base_field: field.clone(), top_field: field }
    }

    pub fn residue_degree(&self) -> usize {
        if self.base_field == self.top_field {
            1
        } else {
            self.top_field.degree()
        }
    }

    pub fn degree(&self) -> usize {
        self.e as usize * self.residue_degree()
    }

    /// `τ ↦ t'^e`.
    pub fn embed(&self, f: &LSeries) -> Result<LSeries> {
        if f.var() != &self.base_var {
            return Err(Error::VariableMismatch(f.var().to_string(), self.base_var.to_string()));
        }
        let e = self.e as i64;
        let mut coeffs = Vec::new();
        for (_, c) in f.terms() {
            if !coeffs.is_empty() {
                for _ in 1..e {
                    coeffs.push(FieldElem::zero(&self.top_field));
                }
            }
            coeffs.push(c.lift_to(&self.top_field)?);
        }
        let prec = match f.prec() {
            Precision::Exact => Precision::Exact,
            Precision::Bounded(p) => Precision::Bounded(p * e),
        };
        Ok(Series::from_coeffs(self.top_var.clone(), self.top_field.clone(), f.start() * e, coeffs, prec))
    }

    /// Coordinates of `a` on the basis `t'^i α^j`, indexed `i·d + j`.
    pub fn components(&self, a: &LSeries) -> Result<Vec<LSeries>> {
        if a.var() != &self.top_var {
            return Err(Error::VariableMismatch(a.var().to_string(), self.top_var.to_string()));
        }
        let a = a.lift(&self.top_field)?;
        let e = self.e as i64;
        let d = self.residue_degree();
        let split = d > 1;
        let mut parts: Vec<Vec<(i64, FieldElem)>> = vec![Vec::new(); e as usize * d];
        for (n, c) in a.terms() {
            let (q, i) = (n.div_euclid(e), n.rem_euclid(e));
            for j in 0..d {
                let coord = if split {
                    FieldElem::from_rational(&self.base_field, &c.coords()[j])
                } else {
                    c.clone()
                };
                parts[i as usize * d + j].push((q, coord));
            }
        }
        let mut out = Vec::with_capacity(parts.len());
        for (idx, terms) in parts.into_iter().enumerate() {
            let i = (idx / d) as i64;
            let prec = match a.prec() {
                Precision::Exact => Precision::Exact,
                Precision::Bounded(p) => Precision::Bounded((p - i).div_euclid(e) + i64::from((p - i).rem_euclid(e) != 0)),
            };
            let mut s = LSeries::exact_zero(self.base_var.clone(), self.base_field.clone()).with_prec(prec);
            for (q, c) in terms {
                s = &s + &LSeries::monomial(self.base_var.clone(), self.base_field.clone(), c, q);
            }
            out.push(s.with_prec(prec));
        }
        Ok(out)
    }

    /// Matrix of multiplication by `a`; column `c` holds the coordinates of
    /// `a · basis[c]`.
    pub fn mult_matrix(&self, a: &LSeries) -> Result<Vec<Vec<LSeries>>> {
        let d = self.residue_degree();
        let n = self.degree();
        let alpha = if d > 1 { Some(FieldElem::generator(&self.top_field)) } else { None };
        let mut cols = Vec::with_capacity(n);
        for i in 0..self.e as i64 {
            let shifted = a.shift(i);
            let mut cur = shifted;
            for _ in 0..d {
                cols.push(self.components(&cur)?);
                if let Some(al) = &alpha {
                    cur = cur.mul_coeff(al);
                }
            }
        }
        Ok((0..n).map(|r| (0..n).map(|c| cols[c][r].clone()).collect()).collect())
    }

    pub fn trace_elem(&self, a: &LSeries) -> Result<LSeries> {
        let m = self.mult_matrix(a)?;
        let mut acc = LSeries::exact_zero(self.base_var.clone(), self.base_field.clone());
        for (i, row) in m.iter().enumerate() {
            acc = &acc + &row[i];
        }
        Ok(acc)
    }

    pub fn norm_elem(&self, a: &LSeries) -> Result<LSeries> {
        let m = self.mult_matrix(a)?;
        Ok(det_series(&m, &self.base_var, &self.base_field))
    }

    /// `Tr(h dt') = Tr(h · t'^{1−e}/e) dτ`.
    pub fn trace_form(&self, w: &Form1) -> Result<Form1> {
        let e = self.e as i64;
        let h = w.coeff.shift(1 - e).scale(&Rational::new(1.into(), e.into()));
        Ok(Form1::new(self.trace_elem(&h)?))
    }
}

/// Division-free Laplace expansion along the first row.
pub fn det_series(m: &[Vec<LSeries>], v: &Var, field: &Field) -> LSeries {
    let n = m.len();
    if n == 0 {
        return LSeries::one(v.clone(), field.clone());
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = LSeries::exact_zero(v.clone(), field.clone());
    for c in 0..n {
        if m[0][c].is_exact_zero() {
            continue;
        }
        let minor: Vec<Vec<LSeries>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = &m[0][c] * &det_series(&minor, v, field);
        acc = if c % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::rat;
    use crate::laurent::{ls_dlog, ls_residue};
    use crate::series::var;

    fn ram2() -> LocalExt {
        LocalExt::new(var("tau"), var("y"), 2, Field::Rationals, Field::Rationals).unwrap()
    }

    fn sqrt2() -> Field {
        Field::extension("a", vec![rat(-2), rat(0), rat(1)]).unwrap()
    }

    #[test]
    fn norm_and_trace_of_uniformizer() {
        let ext = ram2();
        let y = LSeries::var_power(var("y"), Field::Rationals, 1);
        assert_eq!(ext.norm_elem(&y).unwrap(), LSeries::from_ints(var("tau"), &Field::Rationals, 1, &[-1], Precision::Exact));
        assert!(ext.trace_elem(&y).unwrap().is_exact_zero());
        let one = LSeries::one(var("y"), Field::Rationals);
        assert_eq!(ext.trace_elem(&one).unwrap(), LSeries::from_ints(var("tau"), &Field::Rationals, 0, &[2], Precision::Exact));
    }

    #[test]
    fn norm_of_one_plus_y() {
        // Nm(1 + y) = (1 + y)(1 - y) = 1 - τ
        let ext = ram2();
        let x = LSeries::from_ints(var("y"), &Field::Rationals, 0, &[1, 1], Precision::Bounded(6));
        let n = ext.norm_elem(&x).unwrap();
        assert!(n.eq_mod_prec(&LSeries::from_ints(var("tau"), &Field::Rationals, 0, &[1, -1], Precision::Exact)));
        assert_eq!(n.prec(), Precision::Bounded(3));
    }

    #[test]
    fn residue_field_extension() {
        let k = sqrt2();
        let ext = LocalExt::new(var("t"), var("t"), 1, Field::Rationals, k.clone()).unwrap();
        let a = FieldElem::generator(&k);
        let x = LSeries::from_coeffs(
            var("t"),
            k.clone(),
            0,
            vec![a.clone(), FieldElem::one(&k)],
            Precision::Bounded(5),
        );
        // Nm(α + t) = t² − 2
        let n = ext.norm_elem(&x).unwrap();
        assert!(n.eq_mod_prec(&LSeries::from_ints(var("t"), &Field::Rationals, 0, &[-2, 0, 1], Precision::Exact)));
        let tr = ext.trace_elem(&x).unwrap();
        assert!(tr.eq_mod_prec(&LSeries::from_ints(var("t"), &Field::Rationals, 1, &[2], Precision::Exact)));
    }

    #[test]
    fn trace_form_preserves_residue_and_projection() {
        let ext = ram2();
        let w = Form1::new(LSeries::from_ints(var("y"), &Field::Rationals, -3, &[1, 2, 3, 4], Precision::Bounded(4)));
        let tw = ext.trace_form(&w).unwrap();
        assert_eq!(ls_residue(&tw).unwrap(), ls_residue(&w).unwrap().scale(&rat(1)));
        // res_τ(ζ dlog Nm x) = res_y(ζ(y^e) dlog x)
        let x = LSeries::from_ints(var("y"), &Field::Rationals, 1, &[1, 1, 3], Precision::Bounded(8));
        let zeta = LSeries::from_ints(var("tau"), &Field::Rationals, -2, &[1, 5], Precision::Bounded(4));
        let lhs = ls_residue(&ls_dlog(&ext.norm_elem(&x).unwrap()).unwrap().mul_series(&zeta).unwrap()).unwrap();
        let rhs = ls_residue(&ls_dlog(&x).unwrap().mul_series(&ext.embed(&zeta).unwrap()).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}
