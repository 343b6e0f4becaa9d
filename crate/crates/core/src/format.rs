//! Printing in the syntax accepted by [`crate::expr`], so that printed
//! values parse back to equal values at equal precision.

use std::fmt;

use crate::coeff::FieldElem;
use crate::laurent::{Form1, LSeries};
use crate::local2d::{Form2, L2Series};
use crate::precision::Precision;

fn power(v: &str, e: i64) -> String {
    match e {
        0 => String::new(),
        1 => v.to_string(),
        _ => format!("{v}^{e}"),
    }
}

fn join_mono(a: String, b: String) -> String {
    match (a.is_empty(), b.is_empty()) {
        (true, _) => b,
        (_, true) => a,
        _ => format!("{a}*{b}"),
    }
}

/// `c · mono` as a (negative?, body) pair.
fn scaled(c: &FieldElem, mono: &str) -> (bool, String) {
    let s = c.to_string();
    if c.term_count() > 1 {
        let body = if mono.is_empty() { format!("({s})") } else { format!("({s})*{mono}") };
        return (false, body);
    }
    let (neg, abs) = match s.strip_prefix('-') {
        Some(r) => (true, r.to_string()),
        None => (false, s),
    };
    let body = if mono.is_empty() {
        abs
    } else if abs == "1" {
        mono.to_string()
    } else {
        format!("{abs}*{mono}")
    };
    (neg, body)
}

fn write_terms(f: &mut fmt::Formatter<'_>, parts: &[(bool, String)]) -> fmt::Result {
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

fn big_o(v: &str, p: Precision) -> Option<(bool, String)> {
    p.bound().map(|n| (false, format!("O({v}^{n})")))
}

fn ls_parts(x: &LSeries, outer: Option<(&str, i64)>) -> Vec<(bool, String)> {
    let v = x.var();
    let tail = outer.map(|(o, j)| power(o, j)).unwrap_or_default();
    let mut parts: Vec<(bool, String)> = x
        .terms()
        .filter(|(_, c)| !c.is_zero())
        .map(|(e, c)| scaled(c, &join_mono(power(v, e), tail.clone())))
        .collect();
    parts.extend(big_o(v, x.prec()));
    parts
}

impl fmt::Display for LSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, &ls_parts(self, None))
    }
}

impl fmt::Display for L2Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = self.outer_var();
        let mut parts = Vec::new();
        for (j, c) in self.terms() {
            if c.is_exact_zero() {
                continue;
            }
            let inner = ls_parts(c, None);
            if inner.len() == 1 {
                // a single monomial or a bare O(u^k) needs no parentheses
                let (neg, body) = inner[0].clone();
                let body = if c.is_known_zero() {
                    join_mono(body, power(o, j))
                } else {
                    ls_parts(c, Some((o, j))).remove(0).1
                };
                parts.push((neg, body));
                continue;
            }
            let mut s = String::new();
            for (i, (neg, body)) in inner.iter().enumerate() {
                s.push_str(match (i, neg) {
                    (0, true) => "-",
                    (0, false) => "",
                    (_, true) => " - ",
                    (_, false) => " + ",
                });
                s.push_str(body);
            }
            parts.push((false, join_mono(format!("({s})"), power(o, j))));
        }
        parts.extend(big_o(o, self.prec()));
        write_terms(f, &parts)
    }
}

impl fmt::Display for Form1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) d{}", self.coeff, self.var())
    }
}

impl fmt::Display for Form2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) d{}^d{}", self.g, self.g.inner_var(), self.g.outer_var())
    }
}
