//! Seeded random elements for the property suites. Coefficients come from
//! the pool `{0, ±1, ±2, 1/2, 1/3}` and valuations are kept small.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coeff::{ratio, Field, FieldElem, Rational};
use crate::laurent::LSeries;
use crate::local2d::L2Series;
use crate::precision::Precision;
use crate::series::{var, Var};

const POOL: [(i64, i64); 7] = [(0, 1), (1, 1), (-1, 1), (2, 1), (-2, 1), (1, 2), (1, 3)];

/// Shape of the local field samples live in.
#[derive(Clone, Debug)]
pub struct Shape {
    pub inner: Var,
    pub outer: Var,
    pub field: Field,
    pub pu: i64,
    pub pt: i64,
}

impl Shape {
    pub fn new(inner: &str, outer: &str, field: &Field, pu: i64, pt: i64) -> Self {
        Shape { inner: var(inner), outer: var(outer), field: field.clone(), pu, pt }
    }

    pub fn mono(&self, c: &FieldElem, i: i64, j: i64) -> L2Series {
        L2Series::monomial2(self.outer.clone(), self.inner.clone(), c.clone(), i, j)
    }

    pub fn int(&self, n: i64) -> FieldElem {
        FieldElem::from_int(&self.field, n)
    }

    /// `inner^i outer^j`, exact.
    pub fn var_mono(&self, i: i64, j: i64) -> L2Series {
        self.mono(&self.int(1), i, j)
    }

    pub fn bound(&self, x: &L2Series) -> L2Series {
        x.bounded(self.pu, self.pt)
    }
}

#[derive(Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn rational(&mut self) -> Rational {
        let (n, d) = *POOL.choose(&mut self.rng).expect("pool");
        ratio(n, d)
    }

    pub fn nonzero_rational(&mut self) -> Rational {
        let (n, d) = *POOL[1..].choose(&mut self.rng).expect("pool");
        ratio(n, d)
    }

    /// A scalar of `field`; over an extension the generator coordinate is
    /// drawn as well.
    pub fn scalar(&mut self, field: &Field) -> FieldElem {
        let coords = (0..field.degree()).map(|_| self.rational()).collect();
        FieldElem::new(field, coords)
    }

    pub fn nonzero_scalar(&mut self, field: &Field) -> FieldElem {
        loop {
            let c = self.scalar(field);
            if !c.is_zero() {
                return c;
            }
        }
    }

    /// `1 + Σ c·u^i t^j` over `(i, j) > (0, 0)` with `j ≥ 1` allowing
    /// `i ≥ −2`: a one-unit of `k((u))((t))` in the sense of the fibre
    /// decomposition.
    pub fn one_unit(&mut self, s: &Shape) -> L2Series {
        let mut x = s.var_mono(0, 0);
        for i in 1..=3 {
            if self.chance(0.6) {
                x = x.try_add(&s.mono(&self.scalar(&s.field), i, 0)).expect("same field");
            }
        }
        for j in 1..=3 {
            for i in -2..=2 {
                if self.chance(0.3) {
                    x = x.try_add(&s.mono(&self.scalar(&s.field), i, j)).expect("same field");
                }
            }
        }
        s.bound(&x)
    }

    /// `t^m u^n c ε` with small `m, n`.
    pub fn element(&mut self, s: &Shape) -> L2Series {
        let m = self.range(-2, 2);
        let n = self.range(-2, 2);
        let c = self.nonzero_scalar(&s.field);
        s.mono(&c, n, m).try_mul(&self.one_unit(s)).expect("same field")
    }

    /// A series in `v` with valuation in `[lo, lo + 2]`, known to `O(v^p)`.
    pub fn series(&mut self, v: &str, field: &Field, lo: i64, p: i64) -> LSeries {
        let start = self.range(lo, lo + 2);
        let mut coeffs = vec![self.nonzero_scalar(field)];
        for _ in start + 1..p {
            coeffs.push(self.scalar(field));
        }
        let ctx = field.clone();
        LSeries::from_coeffs(var(v), ctx, start, coeffs, Precision::Bounded(p.max(start + 1)))
    }

    /// A random 2-form coefficient with poles of order at most 2.
    pub fn form_coeff(&mut self, s: &Shape) -> L2Series {
        let mut x = L2Series::exact_zero(s.outer.clone(), crate::laurent::InnerCtx::new(s.inner.clone(), s.field.clone()));
        for j in -2..s.pt.min(4) {
            for i in -2..s.pu.min(4) {
                if self.chance(0.35) {
                    x = x.try_add(&s.mono(&self.scalar(&s.field), i, j)).expect("same field");
                }
            }
        }
        s.bound(&x)
    }

    pub fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        xs.choose(&mut self.rng).expect("nonempty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_by_seed() {
        let s = Shape::new("u", "t", &Field::Rationals, 6, 6);
        let a = Sampler::new(7).element(&s);
        let b = Sampler::new(7).element(&s);
        assert_eq!(a, b);
        assert_ne!(Sampler::new(7).element(&s), Sampler::new(8).element(&s));
    }

    #[test]
    fn units_decompose() {
        let s = Shape::new("u", "t", &Field::Rationals, 6, 6);
        let mut r = Sampler::new(1);
        for _ in 0..20 {
            let x = r.element(&s);
            assert!(crate::local2d::decompose_unit(&x).is_ok());
        }
    }
}
