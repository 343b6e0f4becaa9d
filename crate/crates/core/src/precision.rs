use std::cmp::Ordering;
use std::fmt;

/// Absolute precision of a truncated series: coefficients at exponents
/// `>= n` are unknown for `Bounded(n)`; `Exact` means every coefficient is
/// known (finitely many nonzero).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precision {
    Bounded(i64),
    Exact,
}

impl Precision {
    pub fn bound(self) -> Option<i64> {
        match self {
            Precision::Bounded(n) => Some(n),
            Precision::Exact => None,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Precision::Exact)
    }

    /// Whether the coefficient at exponent `e` is known.
    pub fn covers(self, e: i64) -> bool {
        match self {
            Precision::Bounded(n) => e < n,
            Precision::Exact => true,
        }
    }

    pub fn shift(self, k: i64) -> Self {
        match self {
            Precision::Bounded(n) => Precision::Bounded(n + k),
            Precision::Exact => Precision::Exact,
        }
    }

    /// Sum of two precisions (exact absorbs).
    pub fn plus(self, other: Precision) -> Self {
        match (self, other) {
            (Precision::Bounded(a), Precision::Bounded(b)) => Precision::Bounded(a + b),
            _ => Precision::Exact,
        }
    }

    pub fn cap(self, n: i64) -> Self {
        self.min(Precision::Bounded(n))
    }
}

impl PartialOrd for Precision {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Precision {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Precision::Bounded(a), Precision::Bounded(b)) => a.cmp(b),
            (Precision::Bounded(_), Precision::Exact) => Ordering::Less,
            (Precision::Exact, Precision::Bounded(_)) => Ordering::Greater,
            (Precision::Exact, Precision::Exact) => Ordering::Equal,
        }
    }
}

impl From<i64> for Precision {
    fn from(n: i64) -> Self {
        Precision::Bounded(n)
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Bounded(n) => write!(f, "{n}"),
            Precision::Exact => write!(f, "exact"),
        }
    }
}
