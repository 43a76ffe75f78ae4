//! Exact arithmetic: sparse polynomials in `x` and `q`, rational functions,
//! and bivariate power series truncated at a fixed q-order.
//!
//! - [`PolyXQ`] — finite map `(xdeg, qdeg) -> BigInt`, xdeg >= 0, qdeg signed,
//!   no stored zeros. Canonical text form like `-1*x^2*q^3 + 1`, round-trip
//!   parseable.
//! - [`RatXQ`] — quotient of two polynomials; equality by cross-multiplication,
//!   simplification is opportunistic (integer content, monomial factors, exact
//!   division), never a full bivariate gcd.
//! - [`TruncSeries`] — coefficients `(xdeg, qdeg) -> BigInt` with `0 <= qdeg <= order`;
//!   all operations truncate consistently at the order.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

// ============================================================================
// PolyXQ
// ============================================================================

/// Sparse polynomial in `x` and `q` with arbitrary-precision integer
/// coefficients. `x` exponents are nonnegative; `q` exponents may be negative
/// (index arithmetic in equation templates can push them below zero).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PolyXQ {
    terms: BTreeMap<(u32, i64), BigInt>,
}

impl PolyXQ {
    pub fn zero() -> Self {
        PolyXQ::default()
    }

    pub fn one() -> Self {
        PolyXQ::monomial(BigInt::one(), 0, 0)
    }

    /// `c * x^xdeg * q^qdeg`; collapses to zero when `c == 0`.
    pub fn monomial(c: BigInt, xdeg: u32, qdeg: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((xdeg, qdeg), c);
        }
        PolyXQ { terms }
    }

    pub fn constant(c: i64) -> Self {
        PolyXQ::monomial(BigInt::from(c), 0, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&(0, 0)).map(|c| c.is_one()).unwrap_or(false)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, i64), &BigInt)> {
        self.terms.iter()
    }

    pub fn coeff(&self, xdeg: u32, qdeg: i64) -> BigInt {
        self.terms.get(&(xdeg, qdeg)).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Equation-style rendering, ascending by degree with unit coefficients
    /// suppressed: `1 + x^2*q^2`, `x*q + x^2*q^3`. The `Display` form stays
    /// the canonical round-trip syntax (`1*x^2*q^2 + 1`).
    pub fn pretty(&self) -> String {
        use num_traits::Signed;
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (&(x, q), c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (i == 0, neg) {
                (true, true) => out.push('-'),
                (true, false) => {}
                (false, true) => out.push_str(" - "),
                (false, false) => out.push_str(" + "),
            }
            let mag = c.abs();
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || (x == 0 && q == 0) {
                factors.push(mag.to_string());
            }
            match x {
                0 => {}
                1 => factors.push("x".into()),
                _ => factors.push(format!("x^{x}")),
            }
            match q {
                0 => {}
                1 => factors.push("q".into()),
                _ => factors.push(format!("q^{q}")),
            }
            out.push_str(&factors.join("*"));
        }
        out
    }

    fn insert_add(&mut self, key: (u32, i64), c: BigInt) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &PolyXQ) -> PolyXQ {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert_add(*k, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &PolyXQ) -> PolyXQ {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.insert_add(*k, -c.clone());
        }
        out
    }

    pub fn neg(&self) -> PolyXQ {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = -std::mem::take(c);
        }
        out
    }

    pub fn mul(&self, other: &PolyXQ) -> PolyXQ {
        let mut out = PolyXQ::zero();
        for ((xa, qa), ca) in &self.terms {
            for ((xb, qb), cb) in &other.terms {
                out.insert_add((xa + xb, qa + qb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> PolyXQ {
        if c.is_zero() {
            return PolyXQ::zero();
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out
    }

    /// Leading term under lexicographic (xdeg, qdeg) order.
    pub fn leading(&self) -> Option<(&(u32, i64), &BigInt)> {
        self.terms.iter().next_back()
    }

    /// gcd of all integer coefficients (positive); zero polynomial gives 0.
    pub fn int_content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in self.terms.values() {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Largest `(xdeg, qdeg)` with `x^xdeg * q^qdeg` dividing every term.
    /// Zero polynomial gives (0, 0).
    pub fn monomial_content(&self) -> (u32, i64) {
        let mut it = self.terms.keys();
        let Some(&(x0, q0)) = it.next() else { return (0, 0) };
        let mut mx = x0;
        let mut mq = q0;
        for &(x, q) in it {
            mx = mx.min(x);
            mq = mq.min(q);
        }
        (mx, mq)
    }

    /// Divide every coefficient by `d` (must divide exactly).
    pub fn divide_int(&self, d: &BigInt) -> PolyXQ {
        assert!(!d.is_zero(), "division by zero content");
        let mut out = PolyXQ::zero();
        for (k, c) in &self.terms {
            let (quot, rem) = c.div_rem(d);
            assert!(rem.is_zero(), "integer content does not divide coefficient");
            out.terms.insert(*k, quot);
        }
        out
    }

    /// Multiply by `x^dx * q^dq` where `dx` may be negative only if every term
    /// has xdeg >= -dx (checked).
    pub fn shift(&self, dx: i64, dq: i64) -> PolyXQ {
        let mut out = PolyXQ::zero();
        for ((x, q), c) in &self.terms {
            let nx = *x as i64 + dx;
            assert!(nx >= 0, "x-degree would become negative");
            out.terms.insert((nx as u32, q + dq), c.clone());
        }
        out
    }

    /// Exact multivariate division; `Some(c)` iff `self == b * c` exactly.
    pub fn divide_exact(&self, b: &PolyXQ) -> Option<PolyXQ> {
        assert!(!b.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(PolyXQ::zero());
        }
        let (&(bx, bq), bc) = b.leading().expect("nonzero divisor");
        // Degree window any exact quotient must live in.
        let (_, aq_min) = self.monomial_content();
        let (&(ax_max, _), _) = self.leading().expect("nonzero dividend");
        let aq_max = self.terms.keys().map(|&(_, q)| q).max().expect("nonzero dividend");
        let (bx_min, bq_min) = b.monomial_content();
        let bq_max = b.terms.keys().map(|&(_, q)| q).max().expect("nonzero divisor");
        let q_lo = aq_min - bq_min;
        let q_hi = aq_max - bq_max;
        let max_steps = ((ax_max as i64 - bx_min as i64 + 1).max(0) as u64)
            .saturating_mul((q_hi - q_lo + 1).max(0) as u64)
            .saturating_add(1);

        let mut rem = self.clone();
        let mut quot = PolyXQ::zero();
        let mut steps = 0u64;
        while let Some((&(rx, rq), rc)) = rem.leading() {
            steps += 1;
            if steps > max_steps {
                return None;
            }
            if rx < bx {
                return None;
            }
            let tq = rq - bq;
            if tq < q_lo || tq > q_hi {
                return None;
            }
            let (tc, tr) = rc.div_rem(bc);
            if !tr.is_zero() {
                return None;
            }
            let t = PolyXQ::monomial(tc, rx - bx, tq);
            rem = rem.sub(&t.mul(b));
            quot = quot.add(&t);
        }
        Some(quot)
    }

    /// Substitute x = 0: keep only xdeg-0 terms.
    pub fn subst_x_zero(&self) -> PolyXQ {
        let mut out = PolyXQ::zero();
        for ((x, q), c) in &self.terms {
            if *x == 0 {
                out.terms.insert((0, *q), c.clone());
            }
        }
        out
    }

    pub fn min_qdeg(&self) -> Option<i64> {
        self.terms.keys().map(|&(_, q)| q).min()
    }

    /// True when every coefficient is nonnegative.
    pub fn all_coeffs_nonneg(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    /// Convert to a truncated series; fails on negative q-degrees.
    pub fn to_series(&self, order: u32) -> Result<TruncSeries> {
        let mut s = TruncSeries::zero(order);
        for ((x, q), c) in &self.terms {
            if *q < 0 {
                return Err(Error::NegativeQDegree { xdeg: *x, qdeg: *q });
            }
            if *q <= order as i64 {
                s.coeffs.insert((*x, *q as u32), c.clone());
            }
        }
        Ok(s)
    }
}

impl fmt::Display for PolyXQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Descending lexicographic order: highest x-degree first.
        for (i, ((x, q), c)) in self.terms.iter().rev().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            write!(f, "{}", mag)?;
            match x {
                0 => {}
                1 => write!(f, "*x")?,
                _ => write!(f, "*x^{}", x)?,
            }
            match q {
                0 => {}
                1 => write!(f, "*q")?,
                _ => write!(f, "*q^{}", q)?,
            }
        }
        Ok(())
    }
}

impl FromStr for PolyXQ {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut out = PolyXQ::zero();
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        if s == "0" {
            return Ok(out);
        }
        // Split into signed terms at top level (no parentheses in canonical form).
        let mut rest = s;
        let mut sign = 1i32;
        if let Some(r) = rest.strip_prefix('-') {
            sign = -1;
            rest = r.trim_start();
        } else if let Some(r) = rest.strip_prefix('+') {
            rest = r.trim_start();
        }
        loop {
            let end = rest
                .char_indices()
                .find(|&(i, ch)| {
                    (ch == '+' || ch == '-')
                        && i > 0
                        && !rest[..i].ends_with('^')
                        && rest[..i].trim_end().ends_with(|c: char| c.is_ascii_alphanumeric())
                })
                .map(|(i, _)| i)
                .unwrap_or(rest.len());
            let (term, tail) = rest.split_at(end);
            let (xd, qd, c) = parse_term(term.trim())?;
            out.insert_add((xd, qd), if sign < 0 { -c } else { c });
            if tail.is_empty() {
                break;
            }
            sign = if tail.starts_with('-') { -1 } else { 1 };
            rest = tail[1..].trim_start();
            if rest.is_empty() {
                return Err(Error::Parse("dangling sign".into()));
            }
        }
        Ok(out)
    }
}

fn parse_term(term: &str) -> Result<(u32, i64, BigInt)> {
    if term.is_empty() {
        return Err(Error::Parse("empty term".into()));
    }
    let mut coeff = BigInt::one();
    let mut xd: u32 = 0;
    let mut qd: i64 = 0;
    let mut saw_coeff = false;
    for factor in term.split('*') {
        let factor = factor.trim();
        if factor.is_empty() {
            return Err(Error::Parse(format!("empty factor in {term:?}")));
        }
        if let Some(rest) = factor.strip_prefix('x') {
            let e: i64 = parse_exponent(rest, factor)?;
            if e < 0 {
                return Err(Error::Parse(format!("negative x exponent in {factor:?}")));
            }
            xd += e as u32;
        } else if let Some(rest) = factor.strip_prefix('q') {
            qd += parse_exponent(rest, factor)?;
        } else {
            let c: BigInt = factor
                .parse()
                .map_err(|_| Error::Parse(format!("bad coefficient {factor:?}")))?;
            coeff *= c;
            saw_coeff = true;
        }
    }
    if !saw_coeff && xd == 0 && qd == 0 {
        return Err(Error::Parse(format!("term {term:?} has no factors")));
    }
    Ok((xd, qd, coeff))
}

fn parse_exponent(rest: &str, whole: &str) -> Result<i64> {
    if rest.is_empty() {
        Ok(1)
    } else if let Some(e) = rest.strip_prefix('^') {
        e.parse().map_err(|_| Error::Parse(format!("bad exponent in {whole:?}")))
    } else {
        Err(Error::Parse(format!("bad variable factor {whole:?}")))
    }
}

impl Serialize for PolyXQ {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PolyXQ {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

// ============================================================================
// RatXQ
// ============================================================================

/// Rational function `num/den` with `den != 0`. Equality is tested by
/// cross-multiplication; `simplify` strips integer and monomial content and
/// tries one exact division, but performs no general gcd.
#[derive(Debug, Clone)]
pub struct RatXQ {
    num: PolyXQ,
    den: PolyXQ,
}

impl RatXQ {
    pub fn new(num: PolyXQ, den: PolyXQ) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        RatXQ { num, den }.simplify()
    }

    pub fn from_poly(p: PolyXQ) -> Self {
        RatXQ { num: p, den: PolyXQ::one() }
    }

    pub fn zero() -> Self {
        RatXQ::from_poly(PolyXQ::zero())
    }

    pub fn one() -> Self {
        RatXQ::from_poly(PolyXQ::one())
    }

    pub fn num(&self) -> &PolyXQ {
        &self.num
    }

    pub fn den(&self) -> &PolyXQ {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `Some(p)` when the value is (or simplifies to) a polynomial.
    pub fn as_poly(&self) -> Option<&PolyXQ> {
        if self.den.is_one() {
            Some(&self.num)
        } else {
            None
        }
    }

    fn simplify(mut self) -> Self {
        if self.num.is_zero() {
            self.den = PolyXQ::one();
            return self;
        }
        if let Some(q) = self.num.divide_exact(&self.den) {
            self.num = q;
            self.den = PolyXQ::one();
        } else {
            // Strip shared integer content.
            let g = self.num.int_content().gcd(&self.den.int_content());
            if !g.is_one() {
                self.num = self.num.divide_int(&g);
                self.den = self.den.divide_int(&g);
            }
            // Strip shared monomial factors.
            let (nx, nq) = self.num.monomial_content();
            let (dx, dq) = self.den.monomial_content();
            let (sx, sq) = (nx.min(dx) as i64, nq.min(dq));
            if sx != 0 || sq != 0 {
                self.num = self.num.shift(-sx, -sq);
                self.den = self.den.shift(-sx, -sq);
            }
        }
        // Leading coefficient of the denominator kept positive.
        if let Some((_, c)) = self.den.leading() {
            if c.is_negative() {
                self.num = self.num.neg();
                self.den = self.den.neg();
            }
        }
        self
    }

    pub fn add(&self, other: &RatXQ) -> RatXQ {
        RatXQ::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn sub(&self, other: &RatXQ) -> RatXQ {
        RatXQ::new(
            self.num.mul(&other.den).sub(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn neg(&self) -> RatXQ {
        RatXQ { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, other: &RatXQ) -> RatXQ {
        RatXQ::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn div(&self, other: &RatXQ) -> RatXQ {
        assert!(!other.is_zero(), "division by zero rational");
        RatXQ::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }
}

impl PartialEq for RatXQ {
    fn eq(&self, other: &Self) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

impl Eq for RatXQ {}

impl fmt::Display for RatXQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl FromStr for RatXQ {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(body) = s.strip_prefix('(') {
            if let Some((n, d)) = body.split_once(")/(") {
                let d = d
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Parse(format!("unbalanced rational {s:?}")))?;
                return Ok(RatXQ::new(n.parse()?, d.parse()?));
            }
        }
        Ok(RatXQ::from_poly(s.parse()?))
    }
}

impl Serialize for RatXQ {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RatXQ {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

// ============================================================================
// TruncSeries
// ============================================================================

/// Bivariate power series truncated at `q^order`: all arithmetic is exact
/// modulo `q^(order+1)`. x-degrees are never truncated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncSeries {
    order: u32,
    coeffs: BTreeMap<(u32, u32), BigInt>,
}

impl TruncSeries {
    pub fn zero(order: u32) -> Self {
        TruncSeries { order, coeffs: BTreeMap::new() }
    }

    pub fn one(order: u32) -> Self {
        let mut s = TruncSeries::zero(order);
        s.coeffs.insert((0, 0), BigInt::one());
        s
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, xdeg: u32, qdeg: u32) -> BigInt {
        self.coeffs.get(&(xdeg, qdeg)).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigInt)> {
        self.coeffs.iter()
    }

    /// Coefficient of `q^n` summed over all x-degrees.
    pub fn coeff_q(&self, qdeg: u32) -> BigInt {
        self.coeffs
            .iter()
            .filter(|((_, q), _)| *q == qdeg)
            .fold(BigInt::zero(), |acc, (_, c)| acc + c)
    }

    /// The q-coefficient list `[q^0], ..., [q^order]` summed over x-degrees.
    pub fn q_coeff_list(&self) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.order as usize + 1];
        for ((_, q), c) in &self.coeffs {
            out[*q as usize] += c;
        }
        out
    }

    pub fn insert_add(&mut self, xdeg: u32, qdeg: u32, c: BigInt) {
        if qdeg > self.order || c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry((xdeg, qdeg)) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_order(&self, other: &TruncSeries) -> Result<()> {
        if self.order != other.order {
            return Err(Error::OrderMismatch(self.order, other.order));
        }
        Ok(())
    }

    pub fn add(&self, other: &TruncSeries) -> Result<TruncSeries> {
        self.check_order(other)?;
        let mut out = self.clone();
        for ((x, q), c) in &other.coeffs {
            out.insert_add(*x, *q, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &TruncSeries) -> Result<TruncSeries> {
        self.check_order(other)?;
        let mut out = self.clone();
        for ((x, q), c) in &other.coeffs {
            out.insert_add(*x, *q, -c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> TruncSeries {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = -std::mem::take(c);
        }
        out
    }

    pub fn mul(&self, other: &TruncSeries) -> Result<TruncSeries> {
        self.check_order(other)?;
        let mut out = TruncSeries::zero(self.order);
        for ((xa, qa), ca) in &self.coeffs {
            for ((xb, qb), cb) in &other.coeffs {
                let q = qa + qb;
                if q > self.order {
                    continue;
                }
                out.insert_add(xa + xb, q, ca * cb);
            }
        }
        Ok(out)
    }

    /// Multiply by a polynomial with nonnegative q-degrees.
    pub fn mul_poly(&self, p: &PolyXQ) -> Result<TruncSeries> {
        let mut out = TruncSeries::zero(self.order);
        for ((xp, qp), cp) in p.terms() {
            if *qp < 0 {
                return Err(Error::NegativeQDegree { xdeg: *xp, qdeg: *qp });
            }
            for ((xs, qs), cs) in &self.coeffs {
                let q = *qs as i64 + qp;
                if q > self.order as i64 {
                    continue;
                }
                out.insert_add(xs + xp, q as u32, cp * cs);
            }
        }
        Ok(out)
    }

    /// Substitute `x -> x * q^s`: moves `(k, n)` to `(k, n + k*s)`.
    pub fn subst_x(&self, s: u32) -> TruncSeries {
        let mut out = TruncSeries::zero(self.order);
        for ((x, q), c) in &self.coeffs {
            let nq = *q as u64 + *x as u64 * s as u64;
            if nq <= self.order as u64 {
                out.coeffs.insert((*x, nq as u32), c.clone());
            }
        }
        out
    }

    /// Substitute `x -> q^s` (s = 0 means x -> 1): collapse x-degrees.
    pub fn subst_x_pow_q(&self, s: u32) -> TruncSeries {
        let mut out = TruncSeries::zero(self.order);
        for ((x, q), c) in &self.coeffs {
            let nq = *q as u64 + *x as u64 * s as u64;
            if nq <= self.order as u64 {
                out.insert_add(0, nq as u32, c.clone());
            }
        }
        out
    }

    /// Largest q-degree carrying a nonzero coefficient.
    pub fn max_qdeg(&self) -> Option<u32> {
        self.coeffs.keys().map(|&(_, q)| q).max()
    }

    /// Smallest q-degree carrying a nonzero coefficient.
    pub fn min_qdeg(&self) -> Option<u32> {
        self.coeffs.keys().map(|&(_, q)| q).min()
    }

    /// Multiplicative inverse modulo `q^(order+1)`. Requires the `q^0` slice
    /// to be exactly the constant 1 or -1 (otherwise the inverse would need
    /// unbounded x-degrees at fixed q-order).
    pub fn inverse(&self) -> Result<TruncSeries> {
        let c0 = self.coeff(0, 0);
        let unit = c0.abs().is_one() && self.coeffs.keys().all(|&(x, q)| q != 0 || x == 0);
        if !unit {
            return Err(Error::ConstantTermNotOne(self.to_string()));
        }
        // Per-q-level x-slices of self and of the inverse under construction.
        let levels = self.order as usize + 1;
        let mut a: Vec<Vec<(u32, BigInt)>> = vec![Vec::new(); levels];
        for ((x, q), c) in &self.coeffs {
            a[*q as usize].push((*x, c.clone()));
        }
        let mut b: Vec<BTreeMap<u32, BigInt>> = vec![BTreeMap::new(); levels];
        b[0].insert(0, c0.clone());
        for k in 1..levels {
            let mut acc: BTreeMap<u32, BigInt> = BTreeMap::new();
            for j in 1..=k {
                for (xa, ca) in &a[j] {
                    for (xb, cb) in &b[k - j] {
                        *acc.entry(xa + xb).or_default() += ca * cb;
                    }
                }
            }
            // 1/c0 = c0 since c0 is +-1.
            b[k] = acc.into_iter().map(|(x, c)| (x, -&c0 * c)).filter(|(_, c)| !c.is_zero()).collect();
        }
        let mut out = TruncSeries::zero(self.order);
        for (k, level) in b.into_iter().enumerate() {
            for (x, c) in level {
                out.coeffs.insert((x, k as u32), c);
            }
        }
        Ok(out)
    }

    /// Re-truncate to a (smaller) order.
    pub fn truncated(&self, order: u32) -> TruncSeries {
        let mut out = TruncSeries::zero(order);
        for ((x, q), c) in &self.coeffs {
            if *q <= order {
                out.coeffs.insert((*x, *q), c.clone());
            }
        }
        out
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            write!(f, "0")?;
        } else {
            let poly = PolyXQ {
                terms: self
                    .coeffs
                    .iter()
                    .map(|(&(x, q), c)| ((x, q as i64), c.clone()))
                    .collect(),
            };
            write!(f, "{}", poly)?;
        }
        write!(f, " + O(q^{})", self.order + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PolyXQ {
        s.parse().expect("parse")
    }

    #[test]
    fn monomial_product() {
        let a = PolyXQ::monomial(BigInt::one(), 1, 1);
        let b = PolyXQ::monomial(BigInt::one(), 1, 2);
        assert_eq!(a.mul(&b), PolyXQ::monomial(BigInt::one(), 2, 3));
    }

    #[test]
    fn additive_inverse() {
        let a = p("3*x^2*q^-1 + 2*q - 7");
        assert!(a.add(&a.neg()).is_zero());
    }

    #[test]
    fn difference_of_squares() {
        let one = PolyXQ::one();
        let m = PolyXQ::monomial(BigInt::one(), 2, 2);
        let lhs = one.add(&m).mul(&one.sub(&m));
        assert_eq!(lhs, one.sub(&PolyXQ::monomial(BigInt::one(), 4, 4)));
    }

    #[test]
    fn display_canonical() {
        let a = PolyXQ::one().sub(&PolyXQ::monomial(BigInt::one(), 2, 3));
        assert_eq!(a.to_string(), "-1*x^2*q^3 + 1");
        assert_eq!(p("-1*x^2*q^3 + 1"), a);
        assert_eq!(PolyXQ::zero().to_string(), "0");
        assert_eq!(p("0"), PolyXQ::zero());
    }

    #[test]
    fn display_roundtrip() {
        for s in [
            "2*x*q - 3",
            "-1*x^2*q^3 + 1",
            "5*q^-2 + 1*x",
            "1",
            "-4",
            "1*x^3*q^-5 - 2*x*q + 7*q^2",
        ] {
            let a = p(s);
            let back: PolyXQ = a.to_string().parse().expect("roundtrip parse");
            assert_eq!(a, back, "roundtrip failed for {s}");
        }
    }

    #[test]
    fn exact_division() {
        let a = p("1*x^2*q^2 - 1");
        let b = p("1*x*q + 1");
        let c = p("1*x*q - 1");
        assert_eq!(a.divide_exact(&b), Some(c.clone()));
        assert_eq!(a.divide_exact(&c), Some(b.clone()));
        assert_eq!(b.divide_exact(&c), None);
        assert_eq!(p("1*q - 1").divide_exact(&p("1*q - 1")), Some(PolyXQ::one()));
        assert_eq!(PolyXQ::zero().divide_exact(&b), Some(PolyXQ::zero()));
    }

    #[test]
    fn rational_simplification() {
        let r = RatXQ::new(p("2*x^2*q^2 - 2"), p("2*x*q + 2"));
        assert_eq!(r.as_poly(), Some(&p("1*x*q - 1")));
        // q-degrees are Laurent: monomial denominators divide exactly.
        let r = RatXQ::new(p("1*q"), p("1*q^2"));
        assert_eq!(r.as_poly(), Some(&p("1*q^-1")));
        let r = RatXQ::new(p("1*q"), p("1*q + 1"));
        assert!(r.as_poly().is_none());
        assert_eq!(r.to_string(), "(1*q)/(1*q + 1)");
        let same = RatXQ::new(p("3*q"), p("3*q + 3"));
        assert_eq!(r, same);
    }

    #[test]
    fn series_subst_x_moves_coefficients() {
        let mut s = TruncSeries::zero(10);
        s.insert_add(2, 2, BigInt::one());
        let t = s.subst_x(1);
        assert_eq!(t.coeff(2, 4), BigInt::one());
        assert_eq!(s.subst_x(0), s);
        // composition law
        let u = s.subst_x(3);
        assert_eq!(s.subst_x(1).subst_x(2), u);
    }

    #[test]
    fn series_mul_truncates() {
        let mut a = TruncSeries::zero(1);
        a.insert_add(0, 0, BigInt::one());
        a.insert_add(0, 1, BigInt::one());
        let sq = a.mul(&a).expect("same order");
        assert_eq!(sq.coeff(0, 0), BigInt::one());
        assert_eq!(sq.coeff(0, 1), BigInt::from(2));
        assert_eq!(sq.max_qdeg(), Some(1));
        let id = TruncSeries::one(1);
        assert_eq!(a.mul(&id).expect("same order"), a);
    }

    #[test]
    fn series_inverse() {
        // 1/(1-q) = 1 + q + q^2 + ...
        let mut a = TruncSeries::zero(6);
        a.insert_add(0, 0, BigInt::one());
        a.insert_add(0, 1, -BigInt::one());
        let inv = a.inverse().expect("unit");
        for k in 0..=6u32 {
            assert_eq!(inv.coeff(0, k), BigInt::one());
        }
        assert_eq!(a.mul(&inv).expect("same order"), TruncSeries::one(6));
        // 1/(1+x*q) alternates in x-degree.
        let mut b = TruncSeries::zero(4);
        b.insert_add(0, 0, BigInt::one());
        b.insert_add(1, 1, BigInt::one());
        let inv = b.inverse().expect("unit");
        assert_eq!(inv.coeff(2, 2), BigInt::one());
        assert_eq!(inv.coeff(3, 3), BigInt::from(-1));
        assert_eq!(b.mul(&inv).expect("same order"), TruncSeries::one(4));
        // Non-unit q^0 slices are rejected.
        let mut c = TruncSeries::zero(2);
        c.insert_add(0, 0, BigInt::from(2));
        assert!(matches!(c.inverse(), Err(Error::ConstantTermNotOne(_))));
        let mut d = TruncSeries::one(2);
        d.insert_add(1, 0, BigInt::one());
        assert!(matches!(d.inverse(), Err(Error::ConstantTermNotOne(_))));
    }

    #[test]
    fn order_mismatch_rejected() {
        let a = TruncSeries::one(3);
        let b = TruncSeries::one(4);
        assert_eq!(a.mul(&b), Err(Error::OrderMismatch(3, 4)));
    }
}
