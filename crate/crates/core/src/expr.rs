//! Expression language: rationals, variables, `+ - * / ^`, parentheses,
//! big-O atoms `O(t^n)`, trailing precision directives `O_u(n)` and a form
//! suffix (`du^dt`, `dt`).
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | base ('^' int)?
//! base   := rational | var | '(' expr ')' | 'O' '(' var ('^' int)? ')'
//! ```

use std::collections::BTreeMap;
use std::fmt;

use crate::coeff::{BigInt, Field, FieldElem, Rational};
use crate::error::{Error, Result};
use crate::laurent::LSeries;
use crate::local2d::L2Series;
use crate::precision::Precision;
use crate::series::{var, Series};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(BigInt),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
    BigO(String, i64),
}

impl Expr {
    pub fn num(n: i64) -> Expr {
        Expr::Num(BigInt::from(n))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    /// Variable names in order of first appearance.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Expr::Num(_) | Expr::BigO(..) => {}
            Expr::Neg(a) | Expr::Pow(a, _) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Replaces variables by expressions.
    /// `∂/∂v`, unsimplified.
    pub fn derivative(&self, v: &str) -> Result<Expr> {
        let b = Box::new;
        Ok(match self {
            Expr::Num(_) => Expr::num(0),
            Expr::Var(w) => Expr::num(i64::from(w == v)),
            Expr::BigO(..) => return Err(Error::Unsupported("derivative of O(...)".into())),
            Expr::Neg(a) => Expr::Neg(b(a.derivative(v)?)),
            Expr::Add(x, y) => Expr::Add(b(x.derivative(v)?), b(y.derivative(v)?)),
            Expr::Sub(x, y) => Expr::Sub(b(x.derivative(v)?), b(y.derivative(v)?)),
            Expr::Mul(x, y) => Expr::Add(
                b(Expr::Mul(b(x.derivative(v)?), y.clone())),
                b(Expr::Mul(x.clone(), b(y.derivative(v)?))),
            ),
            Expr::Div(x, y) => Expr::Div(
                b(Expr::Sub(
                    b(Expr::Mul(b(x.derivative(v)?), y.clone())),
                    b(Expr::Mul(x.clone(), b(y.derivative(v)?))),
                )),
                b(Expr::Pow(y.clone(), 2)),
            ),
            Expr::Pow(_, 0) => Expr::num(0),
            Expr::Pow(a, n) => Expr::Mul(
                b(Expr::Mul(b(Expr::num(*n)), b(Expr::Pow(a.clone(), n - 1)))),
                b(a.derivative(v)?),
            ),
        })
    }

    pub fn substitute(&self, map: &BTreeMap<String, Expr>) -> Expr {
        let s = |e: &Expr| Box::new(e.substitute(map));
        match self {
            Expr::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Expr::Num(_) | Expr::BigO(..) => self.clone(),
            Expr::Neg(a) => Expr::Neg(s(a)),
            Expr::Pow(a, n) => Expr::Pow(s(a), *n),
            Expr::Add(a, b) => Expr::Add(s(a), s(b)),
            Expr::Sub(a, b) => Expr::Sub(s(a), s(b)),
            Expr::Mul(a, b) => Expr::Mul(s(a), s(b)),
            Expr::Div(a, b) => Expr::Div(s(a), s(b)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(n) => write!(f, "{n}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => write!(f, "-({a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Pow(a, n) => write!(f, "({a})^{n}"),
            Expr::BigO(v, n) => write!(f, "O({v}^{n})"),
        }
    }
}

/// `d first ∧ d second`, or `d first` when `second` is `None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormSuffix {
    pub first: String,
    pub second: Option<String>,
}

/// A parsed input line.
#[derive(Clone, Debug, PartialEq)]
pub struct Parsed {
    pub expr: Expr,
    /// `O_u(6)` style directives, in order.
    pub directives: Vec<(String, i64)>,
    pub form: Option<FormSuffix>,
}

impl Parsed {
    pub fn directive(&self, v: &str) -> Option<i64> {
        self.directives.iter().rev().find(|(n, _)| n == v).map(|(_, p)| *p)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => out.push((Tok::Plus, col)),
            '-' | '−' => out.push((Tok::Minus, col)),
            '*' | '·' => out.push((Tok::Star, col)),
            '/' => out.push((Tok::Slash, col)),
            '^' | '∧' => out.push((Tok::Caret, col)),
            '(' => out.push((Tok::LParen, col)),
            ')' => out.push((Tok::RParen, col)),
            d if d.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push((Tok::Num(s.parse().expect("digits")), col));
                continue;
            }
            a if a.is_alphabetic() || a == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), col));
                continue;
            }
            other => {
                return Err(Error::Parse { column: col, message: format!("unexpected character {other:?}") })
            }
        }
        i += 1;
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { column: self.col(), message: msg.into() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        // a sign binds looser than `^`: -u^2 = -(u^2)
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let b = self.base()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let n = self.int()?;
            return Ok(Expr::Pow(Box::new(b), n));
        }
        Ok(b)
    }

    fn int(&mut self) -> Result<i64> {
        let neg = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        match self.peek().clone() {
            Tok::Num(n) => {
                let v = i64::try_from(&n).map_or_else(|_| self.err("exponent out of range"), Ok)?;
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => self.err("expected integer exponent"),
        }
    }

    fn base(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::Num(n))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) if name == "O" && self.toks.get(self.pos + 1).map(|t| &t.0) == Some(&Tok::LParen) => {
                self.bump();
                self.bump();
                let v = match self.bump() {
                    Tok::Ident(v) => v,
                    _ => {
                        self.pos -= 1;
                        return self.err("expected variable inside O(...)");
                    }
                };
                let n = if *self.peek() == Tok::Caret {
                    self.bump();
                    self.int()?
                } else {
                    1
                };
                self.expect(Tok::RParen, "')'")?;
                Ok(Expr::BigO(v, n))
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Expr::Var(name))
            }
            Tok::End => self.err("unexpected end of input"),
            t => self.err(format!("unexpected token {t:?}")),
        }
    }

    /// `O_v(n)` directives and a form suffix, in any order.
    fn trailer(&mut self) -> Result<(Vec<(String, i64)>, Option<FormSuffix>)> {
        let mut dirs = Vec::new();
        let mut form = None;
        loop {
            match self.peek().clone() {
                Tok::End => return Ok((dirs, form)),
                Tok::Ident(name) if name.starts_with("O_") && name.len() > 2 => {
                    self.bump();
                    self.expect(Tok::LParen, "'('")?;
                    let n = self.int()?;
                    self.expect(Tok::RParen, "')'")?;
                    dirs.push((name[2..].to_string(), n));
                }
                Tok::Ident(name) if name.starts_with('d') && name.len() > 1 && form.is_none() => {
                    self.bump();
                    let first = name[1..].to_string();
                    let mut second = None;
                    if *self.peek() == Tok::Caret {
                        self.bump();
                        match self.peek().clone() {
                            Tok::Ident(n2) if n2.starts_with('d') && n2.len() > 1 => {
                                self.bump();
                                second = Some(n2[1..].to_string());
                            }
                            _ => return self.err("expected a differential after '^'"),
                        }
                    }
                    form = Some(FormSuffix { first, second });
                }
                _ => return self.err("unexpected trailing input"),
            }
        }
    }
}

/// Parses a full input line.
pub fn parse_full(text: &str) -> Result<Parsed> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let expr = p.expr()?;
    let (directives, form) = p.trailer()?;
    Ok(Parsed { expr, directives, form })
}

/// Parses a plain expression (no directives, no form suffix).
pub fn parse(text: &str) -> Result<Expr> {
    let p = parse_full(text)?;
    if p.form.is_some() || !p.directives.is_empty() {
        return Err(Error::Parse { column: 1, message: "expected a plain expression".into() });
    }
    Ok(p.expr)
}

/// Precision caps applied when an exact quotient would be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub inner: i64,
    pub outer: i64,
}

impl Caps {
    pub fn new(inner: i64, outer: i64) -> Self {
        Caps { inner, outer }
    }

    pub fn widen(self, m: i64) -> Self {
        Caps { inner: self.inner + m, outer: self.outer + m }
    }
}

/// A ring an expression can be evaluated in.
pub trait EvalRing: Clone + Sized {
    fn scalar_like(&self, c: &FieldElem) -> Result<Self>;
    fn e_add(&self, o: &Self) -> Result<Self>;
    fn e_sub(&self, o: &Self) -> Result<Self>;
    fn e_mul(&self, o: &Self) -> Result<Self>;
    fn e_neg(&self) -> Self;
    fn e_div(&self, o: &Self, caps: Caps) -> Result<Self>;
    fn big_o(&self, v: &str, n: i64) -> Result<Self>;

    fn e_pow(&self, n: i64, caps: Caps) -> Result<Self> {
        let one = self.scalar_like(&FieldElem::rational(Rational::from_integer(1.into())))?;
        let mut acc = one.clone();
        for _ in 0..n.unsigned_abs() {
            acc = acc.e_mul(self)?;
        }
        if n < 0 {
            acc = one.e_div(&acc, caps)?;
        }
        Ok(acc)
    }
}

impl EvalRing for FieldElem {
    fn scalar_like(&self, c: &FieldElem) -> Result<Self> {
        c.lift_to(&self.field().join(c.field())?)
    }
    fn e_add(&self, o: &Self) -> Result<Self> {
        self.try_add(o)
    }
    fn e_sub(&self, o: &Self) -> Result<Self> {
        self.try_sub(o)
    }
    fn e_mul(&self, o: &Self) -> Result<Self> {
        self.try_mul(o)
    }
    fn e_neg(&self) -> Self {
        self.neg()
    }
    fn e_div(&self, o: &Self, _: Caps) -> Result<Self> {
        self.try_mul(&o.inv()?)
    }
    fn big_o(&self, v: &str, _: i64) -> Result<Self> {
        Err(Error::Parse { column: 1, message: format!("O({v}^…) is not a constant") })
    }
    fn e_pow(&self, n: i64, _: Caps) -> Result<Self> {
        self.pow(n)
    }
}

/// Bounds exact operands of a quotient so that the result is known to
/// `cap` in the series variable.
fn capped_operands<C: crate::series::Coefficient>(
    a: &Series<C>,
    b: &Series<C>,
    cap: i64,
) -> Result<(Series<C>, Series<C>)> {
    let m = b.valuation()?;
    let la = match a.lower_bound().bound() {
        Some(l) => l,
        None => return Ok((a.clone(), b.clone())),
    };
    let pa = Precision::Bounded(cap + m);
    let pb = Precision::Bounded(cap + 2 * m - la);
    Ok((a.with_prec(a.prec().min(pa)), b.with_prec(b.prec().min(pb))))
}

impl EvalRing for LSeries {
    fn scalar_like(&self, c: &FieldElem) -> Result<Self> {
        let f = self.field().join(c.field())?;
        Ok(LSeries::scalar(self.var().clone(), c.lift_to(&f)?))
    }
    fn e_add(&self, o: &Self) -> Result<Self> {
        self.try_add(o)
    }
    fn e_sub(&self, o: &Self) -> Result<Self> {
        self.try_sub(o)
    }
    fn e_mul(&self, o: &Self) -> Result<Self> {
        self.try_mul(o)
    }
    fn e_neg(&self) -> Self {
        self.neg()
    }
    fn e_div(&self, o: &Self, caps: Caps) -> Result<Self> {
        match self.div(o) {
            Err(Error::InsufficientPrecision(_)) if self.prec().is_exact() && o.prec().is_exact() => {
                let (a, b) = capped_operands(self, o, caps.outer)?;
                a.div(&b)
            }
            r => r,
        }
    }
    fn big_o(&self, v: &str, n: i64) -> Result<Self> {
        if v != &**self.var() {
            return Err(Error::VariableMismatch(v.to_string(), self.var().to_string()));
        }
        Ok(LSeries::zero(self.var().clone(), self.field().clone(), Precision::Bounded(n)))
    }
    fn e_pow(&self, n: i64, caps: Caps) -> Result<Self> {
        if n >= 0 {
            return self.pow(n);
        }
        let one = LSeries::one(self.var().clone(), self.field().clone());
        one.e_div(&self.pow(-n)?, caps)
    }
}

/// Bounds every exact inner coefficient of `x` at `cap`.
fn cap_inner(x: &L2Series, cap: i64) -> L2Series {
    x.map_coeffs(x.ctx().clone(), |c| if c.prec().is_exact() && c.stored().len() > 1 { c.with_prec(Precision::Bounded(cap)) } else { c.clone() })
}

impl EvalRing for L2Series {
    fn scalar_like(&self, c: &FieldElem) -> Result<Self> {
        let f = self.field().join(c.field())?;
        Ok(L2Series::constant2(self.outer_var().clone(), self.inner_var().clone(), c.lift_to(&f)?))
    }
    fn e_add(&self, o: &Self) -> Result<Self> {
        self.try_add(o)
    }
    fn e_sub(&self, o: &Self) -> Result<Self> {
        self.try_sub(o)
    }
    fn e_mul(&self, o: &Self) -> Result<Self> {
        self.try_mul(o)
    }
    fn e_neg(&self) -> Self {
        self.neg()
    }
    fn e_div(&self, o: &Self, caps: Caps) -> Result<Self> {
        match self.div(o) {
            Err(Error::InsufficientPrecision(_)) => {
                let (mut a, mut b) = (self.clone(), o.clone());
                if a.prec().is_exact() && b.prec().is_exact() && b.stored().len() > 1 {
                    (a, b) = capped_operands(&a, &b, caps.outer)?;
                }
                a.div(&cap_inner(&b, caps.inner))
            }
            r => r,
        }
    }
    fn big_o(&self, v: &str, n: i64) -> Result<Self> {
        let ctx = self.ctx().clone();
        if v == &**self.outer_var() {
            return Ok(Series::zero(self.outer_var().clone(), ctx, Precision::Bounded(n)));
        }
        if v == &**self.inner_var() {
            let z = LSeries::zero(self.inner_var().clone(), self.field().clone(), Precision::Bounded(n));
            return Ok(L2Series::from_inner(self.outer_var().clone(), z));
        }
        Err(Error::VariableMismatch(v.to_string(), format!("{}/{}", self.inner_var(), self.outer_var())))
    }
    fn e_pow(&self, n: i64, caps: Caps) -> Result<Self> {
        if n >= 0 {
            return self.pow(n);
        }
        let one = Series::one(self.outer_var().clone(), self.ctx().clone());
        one.e_div(&self.pow(-n)?, caps)
    }
}

/// Variable bindings for evaluation. `template` supplies the ring (its value
/// is irrelevant, only its variables and field are used).
#[derive(Clone, Debug)]
pub struct Env<R> {
    pub template: R,
    pub vars: BTreeMap<String, R>,
    pub caps: Caps,
}

impl<R: EvalRing> Env<R> {
    pub fn new(template: R, caps: Caps) -> Self {
        Env { template, vars: BTreeMap::new(), caps }
    }

    pub fn bind(mut self, name: &str, value: R) -> Self {
        self.vars.insert(name.to_string(), value);
        self
    }
}

/// Environment for `k((u))`-style evaluation: the series variable itself,
/// plus the field generator when there is one.
pub fn lseries_env(v: &str, field: &Field, cap: i64) -> Env<LSeries> {
    let x = LSeries::var_power(var(v), field.clone(), 1);
    let mut env = Env::new(x.clone(), Caps::new(cap, cap)).bind(v, x);
    if let Some(g) = field.generator_name() {
        env = env.bind(g, LSeries::scalar(var(v), FieldElem::generator(field)));
    }
    env
}

/// Environment for `k((inner))((outer))`.
pub fn l2_env(inner: &str, outer: &str, field: &Field, caps: Caps) -> Env<L2Series> {
    let (i, o) = (var(inner), var(outer));
    let one = FieldElem::one(field);
    let xi = L2Series::monomial2(o.clone(), i.clone(), one.clone(), 1, 0);
    let xo = L2Series::monomial2(o.clone(), i.clone(), one, 0, 1);
    let mut env = Env::new(xi.clone(), caps).bind(inner, xi).bind(outer, xo);
    if let Some(g) = field.generator_name() {
        env = env.bind(g, L2Series::constant2(o, i, FieldElem::generator(field)));
    }
    env
}

/// Environment for field constants (only the generator is a variable).
pub fn scalar_env(field: &Field) -> Env<FieldElem> {
    let mut env = Env::new(FieldElem::one(field), Caps::new(0, 0));
    if let Some(g) = field.generator_name() {
        env = env.bind(g, FieldElem::generator(field));
    }
    env
}

pub fn eval<R: EvalRing>(e: &Expr, env: &Env<R>) -> Result<R> {
    match e {
        Expr::Num(n) => env.template.scalar_like(&FieldElem::rational(Rational::from_integer(n.clone()))),
        Expr::Var(v) => env
            .vars
            .get(v)
            .cloned()
            .ok_or_else(|| Error::Parse { column: 1, message: format!("unknown variable {v:?}") }),
        Expr::Neg(a) => Ok(eval(a, env)?.e_neg()),
        Expr::Add(a, b) => eval(a, env)?.e_add(&eval(b, env)?),
        Expr::Sub(a, b) => eval(a, env)?.e_sub(&eval(b, env)?),
        Expr::Mul(a, b) => eval(a, env)?.e_mul(&eval(b, env)?),
        Expr::Div(a, b) => {
            let d = eval(b, env)?;
            eval(a, env)?.e_div(&d, env.caps)
        }
        Expr::Pow(a, n) => eval(a, env)?.e_pow(*n, env.caps),
        Expr::BigO(v, n) => env.template.big_o(v, *n),
    }
}

/// Applies `O_v(n)` directives to a 2D value.
pub fn apply_directives_l2(x: &L2Series, dirs: &[(String, i64)]) -> Result<L2Series> {
    let mut x = x.clone();
    for (v, n) in dirs {
        if **x.outer_var() == **v {
            x = x.with_prec(x.prec().min(Precision::Bounded(*n)));
        } else if **x.inner_var() == **v {
            let p = Precision::Bounded(*n);
            x = x.map_coeffs(x.ctx().clone(), |c| c.with_prec(c.prec().min(p)));
        } else {
            return Err(Error::VariableMismatch(v.clone(), x.outer_var().to_string()));
        }
    }
    Ok(x)
}

pub fn apply_directives_l1(x: &LSeries, dirs: &[(String, i64)]) -> Result<LSeries> {
    let mut x = x.clone();
    for (v, n) in dirs {
        if **x.var() != **v {
            return Err(Error::VariableMismatch(v.clone(), x.var().to_string()));
        }
        x = x.with_prec(x.prec().min(Precision::Bounded(*n)));
    }
    Ok(x)
}
