//! Weierstrass preparation and division in `k[[u]][[t]]`.
//!
//! For `f` with `f(u, t) = b · u^{ν₁} · g`, `b` a unit and `g` a distinguished
//! polynomial in `t` of degree `ν₂`. Division uses the fixed-point scheme
//! `h = low + t^d·high ⇒ q += high·V, r += low, h ← −high·V·P`, where
//! `f = P + t^d·U`, `V = U^{-1}` and `P ∈ u·k[[u]][t]`; every step gains at
//! least one power of `u`, so after `n` steps the remainder is in `u^n`.

use crate::error::{Error, Result};
use crate::laurent::LSeries;
use crate::precision::Precision;
use crate::series::Series;

use super::L2Series;

#[derive(Clone, Debug, PartialEq)]
pub struct Weierstrass {
    pub b: L2Series,
    pub nu1: i64,
    pub nu2: i64,
    pub g: L2Series,
}

fn check_integral(f: &L2Series) -> Result<()> {
    if f.lower_bound() < Precision::Bounded(0) {
        return Err(Error::NonpositiveValuation);
    }
    if f.inner_lower_bound() < Precision::Bounded(0) {
        return Err(Error::NonpositiveValuation);
    }
    Ok(())
}

/// `f = P + t^d·U` with `d` the order of `f(0, t)`.
fn split(f: &L2Series) -> Result<(i64, L2Series, L2Series)> {
    let mut d = 0i64;
    loop {
        let c = f.coeff(d).ok_or_else(|| {
            Error::precision(format!("f(0, t) vanishes below the outer precision {}", f.prec()))
        })?;
        let c0 = c.coeff(0).ok_or_else(|| {
            Error::precision(format!("constant term of the t^{d} coefficient is unknown"))
        })?;
        if !c0.is_zero() {
            break;
        }
        d += 1;
    }
    let p: Vec<LSeries> = (0..d).map(|j| f.coeff_or_zero(j)).collect();
    let p = Series::from_coeffs(f.var().clone(), f.ctx().clone(), 0, p, Precision::Exact);
    let hi = f.end().max(d);
    let u: Vec<LSeries> = (d..hi).map(|j| f.coeff_or_zero(j)).collect();
    let u = Series::from_coeffs(f.var().clone(), f.ctx().clone(), 0, u, f.prec().shift(-d));
    Ok((d, p, u))
}

fn outer_bound(a: Precision, b: Precision) -> Precision {
    a.min(b)
}

/// Extends `s` to outer precision `target` with coefficients known to lie
/// in `u^lb·k[[u]]`.
fn extend(s: &L2Series, target: Precision, lb: i64) -> L2Series {
    let (Some(t), Some(have)) = (target.bound(), s.prec().bound()) else {
        return s.clone();
    };
    if have >= t {
        return s.clone();
    }
    let lo = s.start().min(have).max(0);
    let coeffs = (lo..t)
        .map(|k| {
            if k < have {
                s.coeff_or_zero(k)
            } else {
                LSeries::zero(s.inner_var().clone(), s.field().clone(), Precision::Bounded(lb))
            }
        })
        .collect();
    Series::from_coeffs(s.var().clone(), s.ctx().clone(), lo, coeffs, target)
}

/// `h = q·f + r` with `deg_t r < ν₂(f)`; requires `f` not divisible by `u`.
pub fn weierstrass_divide(h: &L2Series, f: &L2Series) -> Result<(L2Series, L2Series)> {
    check_integral(h)?;
    check_integral(f)?;
    let (d, p, uu) = split(f)?;
    let v = uu.inv()?;
    let vp = match p.inner_lower_bound() {
        Precision::Bounded(x) => x.max(1),
        Precision::Exact => i64::MAX / 4,
    };
    let lb_h = match h.inner_lower_bound() {
        Precision::Bounded(x) => x.max(0),
        Precision::Exact => 0,
    };
    let target_inner = h
        .stored()
        .iter()
        .chain(f.stored())
        .filter_map(|c| c.prec().bound())
        .max();
    let ext = outer_bound(h.prec(), f.prec());
    let zero = L2Series::exact_zero(h.var().clone(), h.ctx().clone());
    let (mut q, mut r) = (zero.clone(), zero);
    let mut cur = h.clone();
    let mut n = 0i64;
    let guard = target_inner.unwrap_or(0) + 64;
    let lb_final = loop {
        if cur.is_known_zero() && cur.prec().is_exact() {
            break None;
        }
        let lb = lb_h.saturating_add(n.saturating_mul(vp));
        if let Some(tg) = target_inner {
            if lb >= tg {
                break Some(lb);
            }
        }
        if n > guard {
            return Err(Error::precision("Weierstrass division of exact series does not terminate; bound the inner precision"));
        }
        let low = cur.truncate(d);
        let hi = cur.end().max(d);
        let high: Vec<LSeries> = (d..hi).map(|j| cur.coeff_or_zero(j)).collect();
        let high = Series::from_coeffs(cur.var().clone(), cur.ctx().clone(), 0, high, cur.prec().shift(-d));
        r = &r + &low;
        let hv = &high * &v;
        q = &q + &hv;
        let next = (&hv * &p).neg();
        n += 1;
        cur = extend(&next, ext, lb_h.saturating_add(n.saturating_mul(vp)));
    };
    let Some(lb) = lb_final else {
        return Ok((q, r));
    };
    let q_hi = q.prec().bound().unwrap_or(q.end());
    let q = q.clamp_window(0, q_hi.max(0), |_| lb);
    let r_known = r.prec() >= Precision::Bounded(d);
    let mut r = r.clamp_window(0, d, |_| lb);
    if r_known {
        r = Series::from_coeffs(r.var().clone(), r.ctx().clone(), 0, r.stored().to_vec(), Precision::Exact);
    }
    Ok((q, r))
}

/// `f = b · u^{ν₁} · g` for `f ∈ k[[u]][[t]]`, `f ≠ 0`. The inner valuation
/// `ν₁` is read from the known outer window.
pub fn weierstrass_prepare(f: &L2Series) -> Result<Weierstrass> {
    check_integral(f)?;
    let mut nu1: Option<i64> = None;
    let mut uncertain = i64::MAX;
    for c in f.stored() {
        match c.valuation() {
            Ok(v) => nu1 = Some(nu1.map_or(v, |m: i64| m.min(v))),
            Err(Error::ZeroElement) => {}
            Err(_) => uncertain = uncertain.min(c.prec().bound().unwrap_or(i64::MAX)),
        }
    }
    let nu1 = match nu1 {
        Some(v) if v <= uncertain => v,
        Some(_) | None if f.is_exact_zero() => return Err(Error::ZeroElement),
        _ => return Err(Error::precision("inner valuation of f is not certified")),
    };
    let f1 = f.map_coeffs(f.ctx().clone(), |c| c.shift(-nu1));
    let (d, _, _) = split(&f1)?;
    let td = L2Series::var_power(f.var().clone(), f.ctx().clone(), d);
    let (q, r) = weierstrass_divide(&td, &f1)?;
    let g = &td - &r;
    let b = q.inv()?;
    Ok(Weierstrass { b, nu1, nu2: d, g })
}
