//! Exact scalars: the rationals and a single simple extension `Q[α]/(m)`.

use std::fmt;
use std::sync::Arc;

use malachite_base::num::arithmetic::traits::{Lcm, UnsignedAbs};
use malachite_nz::natural::Natural;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
pub use crate::rational::{BigInt, Rational};

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p"`, `"-p"` or `"p/q"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse { column: 1, message: format!("not a rational: {s:?}") };
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d == 0u32 {
        return Err(Error::DivisionByZero);
    }
    Ok(Rational::new(n, d))
}

pub fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// `k' = Q[α]/(m)` with `m` monic; `modulus` holds `c_0, …, c_{d-1}, 1`.
#[derive(Debug)]
pub struct Extension {
    name: String,
    modulus: Vec<Rational>,
}

#[derive(Clone, Debug)]
pub enum Field {
    Rationals,
    Extension(Arc<Extension>),
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Field::Rationals, Field::Rationals) => true,
            (Field::Extension(a), Field::Extension(b)) => {
                Arc::ptr_eq(a, b) || (a.name == b.name && a.modulus == b.modulus)
            }
            _ => false,
        }
    }
}

impl Eq for Field {}

impl Field {
    /// Builds `Q[name]/(modulus)`. Rejects non-monic moduli and, in degree
    /// at least two, moduli with a rational root.
    pub fn extension(name: &str, modulus: Vec<Rational>) -> Result<Field> {
        if modulus.len() < 2 {
            return Err(Error::InvalidModulus("degree must be at least 1".into()));
        }
        if !modulus.last().unwrap().is_one() {
            return Err(Error::InvalidModulus("modulus must be monic".into()));
        }
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphabetic()) {
            return Err(Error::InvalidModulus(format!("bad generator name {name:?}")));
        }
        if modulus.len() > 2 {
            if let Some(root) = rational_root(&modulus)? {
                return Err(Error::InvalidModulus(format!(
                    "modulus has the rational root {}",
                    fmt_rational(&root)
                )));
            }
        }
        Ok(Field::Extension(Arc::new(Extension { name: name.to_string(), modulus })))
    }

    pub fn degree(&self) -> usize {
        match self {
            Field::Rationals => 1,
            Field::Extension(e) => e.modulus.len() - 1,
        }
    }

    pub fn generator_name(&self) -> Option<&str> {
        match self {
            Field::Rationals => None,
            Field::Extension(e) => Some(&e.name),
        }
    }

    pub fn modulus(&self) -> Option<&[Rational]> {
        match self {
            Field::Rationals => None,
            Field::Extension(e) => Some(&e.modulus),
        }
    }

    pub fn is_rationals(&self) -> bool {
        matches!(self, Field::Rationals)
    }

    /// Smallest field containing both (Q lifts into the extension).
    pub fn join(&self, other: &Field) -> Result<Field> {
        match (self, other) {
            (Field::Rationals, f) | (f, Field::Rationals) => Ok(f.clone()),
            (a, b) if a == b => Ok(a.clone()),
            (a, b) => Err(Error::TowerMismatch(format!(
                "{} and {} are different extensions",
                a.generator_name().unwrap_or("?"),
                b.generator_name().unwrap_or("?")
            ))),
        }
    }

    /// Residue characteristic; always zero here, kept as an explicit check.
    pub fn characteristic(&self) -> u64 {
        0
    }
}

fn rational_root(modulus: &[Rational]) -> Result<Option<Rational>> {
    let lcm = modulus.iter().fold(Natural::from(1u32), |acc, c| acc.lcm(c.denom().unsigned_abs()));
    let ints: Vec<Natural> =
        modulus.iter().map(|c| (c * Rational::from_integer(BigInt::from(lcm.clone()))).numer().unsigned_abs()).collect();
    if ints[0] == 0u32 {
        return Ok(Some(Rational::zero()));
    }
    let too_large = || Error::InvalidModulus("coefficients too large for the rational root test".into());
    let limit = 1_000_000_000_000u64;
    let lead = u64::try_from(ints.last().unwrap()).ok().filter(|&n| n <= limit).ok_or_else(too_large)?;
    let constant = u64::try_from(&ints[0]).ok().filter(|&n| n <= limit).ok_or_else(too_large)?;
    let ps = divisors(constant);
    let qs = divisors(lead);
    for p in &ps {
        for q in &qs {
            for sign in [1i64, -1] {
                let cand = Rational::new(BigInt::from(*p as i64 * sign), BigInt::from(*q));
                let value = modulus
                    .iter()
                    .rev()
                    .fold(Rational::zero(), |acc, c| acc * &cand + c);
                if value.is_zero() {
                    return Ok(Some(cand));
                }
            }
        }
    }
    Ok(None)
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 1u64;
    while i * i <= n {
        if n % i == 0 {
            out.push(i);
            if i != n / i {
                out.push(n / i);
            }
        }
        i += 1;
    }
    out
}

// --- dense polynomial helpers over Q (coefficient of x^i at index i) ---

fn poly_trim(p: &mut Vec<Rational>) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    poly_trim(&mut out);
    out
}

fn poly_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len().max(b.len());
    let mut out: Vec<Rational> = (0..n)
        .map(|i| {
            a.get(i).cloned().unwrap_or_else(Rational::zero)
                - b.get(i).cloned().unwrap_or_else(Rational::zero)
        })
        .collect();
    poly_trim(&mut out);
    out
}

fn poly_divrem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let mut q = vec![Rational::zero(); r.len() - db];
    while r.len() > db && !r.is_empty() {
        let k = r.len() - 1 - db;
        let c = r.last().unwrap() / &lead;
        for (j, bj) in b.iter().enumerate() {
            r[k + j] -= &c * bj;
        }
        q[k] = c;
        poly_trim(&mut r);
    }
    poly_trim(&mut q);
    (q, r)
}

/// `a·b mod m` for reduced `a, b` and monic `m`, skipping zero terms.
fn mul_mod(a: &[Rational], b: &[Rational], m: &[Rational]) -> Vec<Rational> {
    let d = m.len() - 1;
    let mut p = vec![Rational::zero(); 2 * d - 1];
    for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
        for (j, y) in b.iter().enumerate().filter(|(_, y)| !y.is_zero()) {
            p[i + j] += x * y;
        }
    }
    for k in (d..2 * d - 1).rev() {
        let c = std::mem::replace(&mut p[k], Rational::zero());
        if c.is_zero() {
            continue;
        }
        for (j, mj) in m[..d].iter().enumerate().filter(|(_, x)| !x.is_zero()) {
            p[k - d + j] -= &c * mj;
        }
    }
    p.truncate(d);
    p
}

/// An element of `k` or `k'`, stored as coordinates on `1, α, …, α^{d-1}`.
#[derive(Clone, Debug)]
pub struct FieldElem {
    field: Field,
    coords: Vec<Rational>,
}

impl PartialEq for FieldElem {
    fn eq(&self, other: &Self) -> bool {
        if self.field == other.field {
            return self.coords == other.coords;
        }
        match (self.field.is_rationals(), other.field.is_rationals()) {
            (true, false) => other.as_rational().as_ref() == Some(&self.coords[0]),
            (false, true) => self.as_rational().as_ref() == Some(&other.coords[0]),
            _ => false,
        }
    }
}

impl FieldElem {
    /// Builds from coordinates, reducing modulo the modulus if too long.
    pub fn new(field: &Field, mut coords: Vec<Rational>) -> Self {
        let d = field.degree();
        if coords.len() > d {
            if let Some(m) = field.modulus() {
                poly_trim(&mut coords);
                coords = poly_divrem(&coords, m).1;
            }
        }
        coords.resize(d, Rational::zero());
        FieldElem { field: field.clone(), coords }
    }

    pub fn zero(field: &Field) -> Self {
        FieldElem { field: field.clone(), coords: vec![Rational::zero(); field.degree()] }
    }

    pub fn one(field: &Field) -> Self {
        Self::from_rational(field, &Rational::one())
    }

    pub fn from_rational(field: &Field, q: &Rational) -> Self {
        let mut e = Self::zero(field);
        e.coords[0] = q.clone();
        e
    }

    pub fn from_int(field: &Field, n: i64) -> Self {
        Self::from_rational(field, &rat(n))
    }

    pub fn rational(q: Rational) -> Self {
        FieldElem { field: Field::Rationals, coords: vec![q] }
    }

    /// The class of the generator `α`.
    pub fn generator(field: &Field) -> Self {
        let mut c = vec![Rational::zero(), Rational::one()];
        if field.degree() == 1 {
            // α is the root of a linear modulus x + c_0.
            let m = field.modulus().expect("generator of Q requested");
            c = vec![-m[0].clone()];
        }
        Self::new(field, c)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coords[0].is_one() && self.coords[1..].iter().all(|c| c.is_zero())
    }

    /// The rational value if the element lies in `Q`.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.coords[1..].iter().all(|c| c.is_zero()) {
            Some(self.coords[0].clone())
        } else {
            None
        }
    }

    /// Re-expresses the element in a (possibly larger) field.
    pub fn lift_to(&self, field: &Field) -> Result<FieldElem> {
        if &self.field == field {
            return Ok(self.clone());
        }
        match self.as_rational() {
            Some(q) if self.field.is_rationals() || field.is_rationals() => {
                Ok(FieldElem::from_rational(field, &q))
            }
            _ => Err(Error::TowerMismatch(format!(
                "cannot move an element of {} into {}",
                self.field.generator_name().unwrap_or("Q"),
                field.generator_name().unwrap_or("Q")
            ))),
        }
    }

    fn unify(&self, other: &FieldElem) -> Result<(FieldElem, FieldElem)> {
        if self.field == other.field {
            return Ok((self.clone(), other.clone()));
        }
        let f = self.field.join(&other.field)?;
        Ok((self.lift_to(&f)?, other.lift_to(&f)?))
    }

    pub fn try_add(&self, other: &FieldElem) -> Result<FieldElem> {
        if self.field == other.field {
            let coords = self.coords.iter().zip(&other.coords).map(|(x, y)| x + y).collect();
            return Ok(FieldElem { field: self.field.clone(), coords });
        }
        let (a, b) = self.unify(other)?;
        a.try_add(&b)
    }

    pub fn try_sub(&self, other: &FieldElem) -> Result<FieldElem> {
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &FieldElem) -> Result<FieldElem> {
        if self.field != other.field {
            let (a, b) = self.unify(other)?;
            return a.try_mul(&b);
        }
        if self.field.degree() == 1 {
            return Ok(FieldElem { field: self.field.clone(), coords: vec![&self.coords[0] * &other.coords[0]] });
        }
        let m = self.field.modulus().expect("degree > 1");
        Ok(FieldElem { field: self.field.clone(), coords: mul_mod(&self.coords, &other.coords, m) })
    }

    pub fn add(&self, other: &FieldElem) -> FieldElem {
        self.try_add(other).expect("field mismatch")
    }

    pub fn sub(&self, other: &FieldElem) -> FieldElem {
        self.try_sub(other).expect("field mismatch")
    }

    pub fn mul(&self, other: &FieldElem) -> FieldElem {
        self.try_mul(other).expect("field mismatch")
    }

    pub fn neg(&self) -> FieldElem {
        FieldElem { field: self.field.clone(), coords: self.coords.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, q: &Rational) -> FieldElem {
        FieldElem { field: self.field.clone(), coords: self.coords.iter().map(|c| c * q).collect() }
    }

    pub fn inv(&self) -> Result<FieldElem> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let Some(m) = self.field.modulus() else {
            return Ok(FieldElem::rational(self.coords[0].recip()));
        };
        if self.field.degree() == 1 {
            return Ok(FieldElem::new(&self.field, vec![self.coords[0].recip()]));
        }
        // Extended Euclid: s·a ≡ gcd (mod m), gcd a nonzero constant.
        let mut a = self.coords.clone();
        poly_trim(&mut a);
        let (mut r0, mut r1) = (m.to_vec(), a);
        let (mut s0, mut s1) = (Vec::<Rational>::new(), vec![Rational::one()]);
        while r1.len() > 1 {
            let (q, r) = poly_divrem(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
        }
        if r1.is_empty() {
            return Err(Error::InvalidModulus("modulus is reducible".into()));
        }
        let c = r1[0].recip();
        let s: Vec<Rational> = s1.iter().map(|x| x * &c).collect();
        Ok(FieldElem::new(&self.field, s))
    }

    pub fn div(&self, other: &FieldElem) -> Result<FieldElem> {
        self.try_mul(&other.inv()?)
    }

    pub fn pow(&self, n: i64) -> Result<FieldElem> {
        let mut base = if n < 0 { self.inv()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = FieldElem::one(&self.field);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// Matrix of multiplication by `self` on the basis `1, α, …`; column `j`
    /// holds the coordinates of `self·α^j`.
    pub fn mul_matrix(&self) -> Vec<Vec<Rational>> {
        let d = self.field.degree();
        let mut cols = Vec::with_capacity(d);
        let mut cur = self.clone();
        let alpha = if d > 1 { Some(FieldElem::generator(&self.field)) } else { None };
        for _ in 0..d {
            cols.push(cur.coords.clone());
            if let Some(a) = &alpha {
                cur = cur.mul(a);
            }
        }
        (0..d).map(|i| (0..d).map(|j| cols[j][i].clone()).collect()).collect()
    }

    /// Trace down to `Q`.
    pub fn trace(&self) -> Rational {
        let m = self.mul_matrix();
        (0..m.len()).map(|i| m[i][i].clone()).sum()
    }

    /// Norm down to `Q`.
    pub fn norm(&self) -> Rational {
        det_rational(self.mul_matrix())
    }
}

/// Determinant by exact Gaussian elimination.
pub fn det_rational(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rational::zero();
        };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        let pivot = m[col][col].clone();
        det *= &pivot;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &pivot;
            for c in col..n {
                let v = &f * &m[col][c];
                m[r][c] -= v;
            }
        }
    }
    det
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.field.generator_name().unwrap_or("a");
        let mut parts: Vec<(bool, String)> = Vec::new();
        for (j, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            let mono = match j {
                0 => String::new(),
                1 => name.to_string(),
                _ => format!("{name}^{j}"),
            };
            let body = if j == 0 {
                fmt_rational(&a)
            } else if a.is_one() {
                mono
            } else {
                format!("{}*{mono}", fmt_rational(&a))
            };
            parts.push((neg, body));
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        for (i, (neg, body)) in parts.iter().enumerate() {
            match (i, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => write!(f, "{body}")?,
                (_, true) => write!(f, " - {body}")?,
                (_, false) => write!(f, " + {body}")?,
            }
        }
        Ok(())
    }
}

impl FieldElem {
    /// Number of printed monomials; used to decide on parentheses.
    pub(crate) fn term_count(&self) -> usize {
        self.coords.iter().filter(|c| !c.is_zero()).count()
    }
}
