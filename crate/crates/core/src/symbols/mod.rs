//! Tame symbols, the Milnor boundary map, the two-dimensional triple symbol
//! and the residue brackets.
//!
//! Conventions. The tame symbol is
//! `(φ, ψ) = (−1)^{ν(φ)ν(ψ)} φ^{ν(ψ)} ψ^{−ν(φ)} mod m`. The boundary map uses
//! the standard normalisation `∂{π, u₂, …} = {ū₂, …}`, so in degree two it is
//! the inverse of the tame symbol. The triple symbol of `k((u))((t))` is
//! `(tame ∘ ∂)^{-1}`, which makes `(t, u, c) = c` and `(u, t, c) = c^{-1}`.

pub mod preimage;

use std::fmt;

use crate::coeff::FieldElem;
use crate::error::Result;
use crate::laurent::{ls_dlog, ls_residue, LSeries};
use crate::local2d::{dlog_wedge, res_total, L2Series};

/// A residue field element that symbols can land in.
pub trait Residue: Clone + fmt::Debug {
    fn r_mul(&self, o: &Self) -> Self;
    fn r_pow(&self, n: i64) -> Result<Self>;
    fn r_one(&self) -> Self;
    fn r_minus_one(&self) -> Self;
}

impl Residue for FieldElem {
    fn r_mul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn r_pow(&self, n: i64) -> Result<Self> {
        self.pow(n)
    }
    fn r_one(&self) -> Self {
        FieldElem::one(self.field())
    }
    fn r_minus_one(&self) -> Self {
        FieldElem::from_int(self.field(), -1)
    }
}

impl Residue for LSeries {
    fn r_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn r_pow(&self, n: i64) -> Result<Self> {
        self.pow(n)
    }
    fn r_one(&self) -> Self {
        LSeries::one(self.var().clone(), self.field().clone())
    }
    fn r_minus_one(&self) -> Self {
        LSeries::scalar(self.var().clone(), FieldElem::from_int(self.field(), -1))
    }
}

/// An element of a complete discretely valued field.
pub trait Valued: Clone + fmt::Debug {
    type Residue: Residue;
    /// Valuation and the residue of the unit part (the leading coefficient).
    fn split(&self) -> Result<(i64, Self::Residue)>;
}

impl Valued for LSeries {
    type Residue = FieldElem;
    fn split(&self) -> Result<(i64, FieldElem)> {
        let (v, c) = self.leading()?;
        Ok((v, c.clone()))
    }
}

impl Valued for L2Series {
    type Residue = LSeries;
    fn split(&self) -> Result<(i64, LSeries)> {
        let (v, c) = self.leading()?;
        Ok((v, c.clone()))
    }
}

/// `(−1)^{ab} φ^b ψ^{−a} mod m` with `a = ν(φ)`, `b = ν(ψ)`.
pub fn tame_symbol<E: Valued>(phi: &E, psi: &E) -> Result<E::Residue> {
    let (a, r1) = phi.split()?;
    let (b, r2) = psi.split()?;
    let mut out = r1.r_pow(b)?.r_mul(&r2.r_pow(-a)?);
    if (a * b).rem_euclid(2) == 1 {
        out = out.r_mul(&out.r_minus_one());
    }
    Ok(out)
}

/// `{entries}` raised to `exponent` in `K_{m}` of a field (multiplicative
/// notation for the exponent).
#[derive(Clone, Debug, PartialEq)]
pub struct MilnorSymbol<R> {
    pub entries: Vec<R>,
    pub exponent: i64,
}

/// Boundary `K_m(K) → K_{m−1}(K̄)`, expanded multilinearly over
/// `x_i = π^{m_i} w_i`.
pub fn milnor_boundary<E: Valued>(entries: &[E]) -> Result<Vec<MilnorSymbol<E::Residue>>> {
    let parts: Vec<(i64, E::Residue)> = entries.iter().map(|x| x.split()).collect::<Result<_>>()?;
    let m = parts.len();
    let mut out = Vec::new();
    for mask in 1u32..(1 << m) {
        let mut coef = 1i64;
        let mut perm = 0usize;
        let mut s = 0usize;
        let mut rest = Vec::new();
        for (i, (mi, w)) in parts.iter().enumerate() {
            if mask & (1 << i) != 0 {
                coef *= mi;
                perm += i - s;
                s += 1;
            } else {
                rest.push(w.clone());
            }
        }
        if coef == 0 {
            continue;
        }
        // {π,…,π, w…} = {−1,…,−1, π, w…} = (−1)^{s−1}{π, −1,…,−1, w…}
        if (perm + s - 1) % 2 == 1 {
            coef = -coef;
        }
        let minus = parts[0].1.r_minus_one();
        let mut ent = vec![minus; s - 1];
        ent.extend(rest);
        out.push(MilnorSymbol { entries: ent, exponent: coef });
    }
    Ok(out)
}

/// `(φ, ψ, ξ)` in `k((u))((t))`, valued in `k`.
pub fn triple_symbol(phi: &L2Series, psi: &L2Series, xi: &L2Series) -> Result<FieldElem> {
    let field = phi.field().join(psi.field())?.join(xi.field())?;
    let mut acc = FieldElem::one(&field);
    for sym in milnor_boundary(&[phi.clone(), psi.clone(), xi.clone()])? {
        let v = tame_symbol(&sym.entries[0], &sym.entries[1])?;
        acc = acc.mul(&v.pow(sym.exponent)?);
    }
    acc.inv()
}

/// `(φ, ψ; ς] = res(ς · dφ/φ ∧ dψ/ψ)`.
pub fn bracket_2d(phi: &L2Series, psi: &L2Series, s: &L2Series) -> Result<FieldElem> {
    let w = dlog_wedge(phi, psi)?.mul_series(s)?;
    res_total(&w)
}

/// `(ξ, ζ] = res(ζ · dξ/ξ)`.
pub fn bracket_1d(xi: &LSeries, zeta: &LSeries) -> Result<FieldElem> {
    ls_residue(&ls_dlog(xi)?.mul_series(zeta)?)
}

/// One generator `{first, second}^mult` of `K₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolPair<E> {
    pub first: E,
    pub second: E,
    pub mult: i64,
}

/// A finite product of symbols in `K₂` of some field or ring.
#[derive(Clone, Debug, PartialEq)]
pub struct K2Elem<E> {
    pub pairs: Vec<SymbolPair<E>>,
}

impl<E> Default for K2Elem<E> {
    fn default() -> Self {
        K2Elem { pairs: Vec::new() }
    }
}

impl<E: Clone> K2Elem<E> {
    pub fn new() -> Self {
        K2Elem { pairs: Vec::new() }
    }

    pub fn symbol(first: E, second: E) -> Self {
        K2Elem { pairs: vec![SymbolPair { first, second, mult: 1 }] }
    }

    pub fn push(&mut self, first: E, second: E, mult: i64) {
        self.pairs.push(SymbolPair { first, second, mult });
    }

    pub fn times(&self, o: &K2Elem<E>) -> K2Elem<E> {
        let mut pairs = self.pairs.clone();
        pairs.extend(o.pairs.iter().cloned());
        K2Elem { pairs }
    }

    pub fn inverse(&self) -> K2Elem<E> {
        K2Elem {
            pairs: self
                .pairs
                .iter()
                .map(|p| SymbolPair { first: p.first.clone(), second: p.second.clone(), mult: -p.mult })
                .collect(),
        }
    }

    pub fn try_map<F: Clone>(&self, f: impl Fn(&E) -> Result<F>) -> Result<K2Elem<F>> {
        let pairs = self
            .pairs
            .iter()
            .map(|p| Ok(SymbolPair { first: f(&p.first)?, second: f(&p.second)?, mult: p.mult }))
            .collect::<Result<_>>()?;
        Ok(K2Elem { pairs })
    }
}

impl<E: Valued> K2Elem<E> {
    /// Product of the tame symbols of the generators.
    pub fn tame(&self, one: E::Residue) -> Result<E::Residue> {
        let mut acc = one;
        for p in &self.pairs {
            acc = acc.r_mul(&tame_symbol(&p.first, &p.second)?.r_pow(p.mult)?);
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests;
