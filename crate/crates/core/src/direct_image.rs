//! Direct images along `f: X → S` at a flag `(x, C)`: forms go through the
//! residue and the trace, symbols through the tame symbol (or Kato's fibre
//! symbol when `C` is the fibre) and the norm.
//!
//! Transverse flags (`C ≠ F`) have `K_{x,C} = k(C)_x((t_C))` with the inner
//! variable a parameter of `k(C)_x`; the flag coordinates are chosen so that
//! `f^*τ` lies in `k(C)_x` in Kummer shape. Fibre flags have
//! `K_{x,F} = k'((u))((t))` with `t = f^*τ` outer.

use crate::coeff::{Field, FieldElem};
use crate::error::{Error, Result};
use crate::extend::LocalExt;
use crate::laurent::{ls_exp, Form1, InnerCtx, LSeries};
use crate::local2d::{
    decompose_unit, inner_residue_series, l2_log, res_inner, res_outer, Form2, L2Series,
};
use crate::series::{Series, Var};
use crate::symbols::tame_symbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlagKind {
    Transverse,
    Fibre,
}

/// Local data of a flag: the variables of `K_{x,C}` and the extension of
/// `K_s` its residue-level field defines.
#[derive(Clone, Debug, PartialEq)]
pub struct FlagContext {
    pub kind: FlagKind,
    pub inner: Var,
    pub outer: Var,
    pub field: Field,
    pub ext: LocalExt,
}

impl FlagContext {
    /// `K_{x,F} = k'((inner))((outer))` with `outer = τ − s` under `f^*`.
    pub fn fibre(inner: Var, outer: Var, base: Var, field: Field) -> Result<Self> {
        let ext = LocalExt::new(base, outer.clone(), 1, Field::Rationals, field.clone())?;
        Ok(FlagContext { kind: FlagKind::Fibre, inner, outer, field, ext })
    }

    /// `K_{x,C} = k'((inner))((outer))` with `τ − s = inner^e` under `f^*`.
    pub fn transverse(inner: Var, outer: Var, base: Var, e: u32, field: Field) -> Result<Self> {
        let ext = LocalExt::new(base, inner.clone(), e, Field::Rationals, field.clone())?;
        Ok(FlagContext { kind: FlagKind::Transverse, inner, outer, field, ext })
    }

    pub fn base_var(&self) -> &Var {
        &self.ext.base_var
    }

    fn ctx(&self) -> InnerCtx {
        InnerCtx::new(self.inner.clone(), self.field.clone())
    }

    /// `f^*ξ` in `K_{x,C}`.
    pub fn embed_base(&self, xi: &LSeries) -> Result<L2Series> {
        let top = self.ext.embed(xi)?;
        match self.kind {
            FlagKind::Transverse => Ok(L2Series::from_inner(self.outer.clone(), top)),
            FlagKind::Fibre => {
                let ctx = self.ctx();
                let coeffs = top
                    .stored()
                    .iter()
                    .map(|c| LSeries::constant(self.inner.clone(), self.field.clone(), c.clone()))
                    .collect();
                Ok(Series::from_coeffs(self.outer.clone(), ctx, top.start(), coeffs, top.prec()))
            }
        }
    }

    fn check(&self, x: &L2Series) -> Result<()> {
        if x.outer_var() != &self.outer {
            return Err(Error::VariableMismatch(x.outer_var().to_string(), self.outer.to_string()));
        }
        if x.inner_var() != &self.inner {
            return Err(Error::VariableMismatch(x.inner_var().to_string(), self.inner.to_string()));
        }
        Ok(())
    }
}

/// `f_*^{x,C}(ω)`: trace of the residue along `C`.
pub fn di_form(ctx: &FlagContext, w: &Form2) -> Result<Form1> {
    ctx.check(&w.g)?;
    let r = match ctx.kind {
        FlagKind::Transverse => res_outer(w)?,
        FlagKind::Fibre => res_inner(w)?,
    };
    ctx.ext.trace_form(&r)
}

/// `exp res_u(x · du/u)`, in the outer variable.
fn exp_res_over_u(x: &L2Series) -> Result<LSeries> {
    let r = inner_residue_series(&x.map_coeffs(x.ctx().clone(), |c| c.shift(-1)));
    ls_exp(&r)
}

/// Kato's symbol `(φ, ψ)_{f,F}` on `k'((u))((t))`, valued in `k'((t))`:
/// both arguments are split as `t^m u^n c ε` and the generator table is
/// applied bimultiplicatively.
pub fn table_pairing(phi: &L2Series, psi: &L2Series) -> Result<LSeries> {
    let a = decompose_unit(phi)?;
    let b = decompose_unit(psi)?;
    let field = phi.field().join(psi.field())?;
    let t = phi.outer_var().clone();

    let log1 = l2_log(&a.eps)?;
    let log2 = l2_log(&b.eps)?;
    let l1 = exp_res_over_u(&log1)?;
    let l2 = exp_res_over_u(&log2)?;
    // (ε₁, ε₂) = exp res_u(ln ε₁ · ∂_u ε₂/ε₂ du)^{-1}
    let dlog2 = b.eps.partial_inner().div(&b.eps)?;
    let m = ls_exp(&inner_residue_series(&log1.try_mul(&dlog2)?))?;

    let sign = if (a.n * b.n) % 2 == 0 { 1 } else { -1 };
    let c = b.c.pow(a.n)?.mul(&a.c.pow(-b.n)?).mul(&FieldElem::from_int(&field, sign));
    let mono = LSeries::monomial(t, field, c, a.n * b.m - a.m * b.n);
    mono.try_mul(&l2.pow(a.n)?)?.try_mul(&l1.pow(-b.n)?)?.try_mul(&m.inv()?)
}

/// `f_*(φ, ψ)_{x,C}` in `K_s`: the norm of the tame symbol (transverse) or
/// of the fibre symbol.
pub fn di_symbol(ctx: &FlagContext, phi: &L2Series, psi: &L2Series) -> Result<LSeries> {
    ctx.check(phi)?;
    ctx.check(psi)?;
    let v = match ctx.kind {
        FlagKind::Transverse => tame_symbol(phi, psi)?,
        FlagKind::Fibre => table_pairing(phi, psi)?,
    };
    ctx.ext.norm_elem(&v)
}

/// Sum over the branches of a curve singular at `x`.
pub fn di_form_branches(branches: &[(FlagContext, Form2)]) -> Result<Form1> {
    let mut it = branches.iter();
    let (c0, w0) = it.next().ok_or_else(|| Error::Unsupported("no branches".into()))?;
    let mut acc = di_form(c0, w0)?;
    for (c, w) in it {
        acc = acc.try_add(&di_form(c, w)?)?;
    }
    Ok(acc)
}

/// Product over the branches of a curve singular at `x`.
pub fn di_symbol_branches(branches: &[(FlagContext, L2Series, L2Series)]) -> Result<LSeries> {
    let mut it = branches.iter();
    let (c0, a0, b0) = it.next().ok_or_else(|| Error::Unsupported("no branches".into()))?;
    let mut acc = di_symbol(c0, a0, b0)?;
    for (c, a, b) in it {
        acc = acc.try_mul(&di_symbol(c, a, b)?)?;
    }
    Ok(acc)
}
