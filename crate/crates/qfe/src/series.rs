//! The parameterized two-index series and its exact truncated evaluation.
//!
//! - [`SeriesParams`] — the twelve integers `(B11, B22, B12, C1, C2, D1, D2,
//!   K1, K2, gamma, eps1, eps2)` defining
//!   `S(x) = sum eps1^m eps2^n q^E(m,n) x^(D1*m+D2*n) / ((q^K1;q^K1)_m (q^K2;q^K2)_n)`
//!   with `E(m,n) = B11*C(m+1,2) + B22*C(n+1,2) + B12*m*n + C1*m + C2*n`.
//! - [`eval_series`] — exact expansion to a q-order, with `x` kept symbolic or
//!   substituted by `q^s` (`s = 0` substitutes 1).
//! - [`pochhammer_inv`] — truncated `1/(q^K;q^K)_m`.
//! - [`ProductSpec`] / [`expand_product`] — periodic infinite products
//!   `prod (1-q^(r+j*mod))^e` expanded to a q-order.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::TruncSeries;
use crate::{Error, Result};

/// Parameters of the double series; `(c1, c2)` is the series' own index pair,
/// the remaining ten are shared across a whole family of contiguous series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SeriesParams {
    pub b11: i64,
    pub b22: i64,
    pub b12: i64,
    pub c1: i64,
    pub c2: i64,
    pub d1: i64,
    pub d2: i64,
    pub k1: i64,
    pub k2: i64,
    pub gamma: i64,
    pub eps1: i64,
    pub eps2: i64,
}

impl SeriesParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        b11: i64,
        b22: i64,
        b12: i64,
        c1: i64,
        c2: i64,
        d1: i64,
        d2: i64,
        k1: i64,
        k2: i64,
        gamma: i64,
        eps1: i64,
        eps2: i64,
    ) -> Result<Self> {
        let p = SeriesParams { b11, b22, b12, c1, c2, d1, d2, k1, k2, gamma, eps1, eps2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("B11", self.b11),
            ("B22", self.b22),
            ("B12", self.b12),
            ("D1", self.d1),
            ("D2", self.d2),
            ("K1", self.k1),
            ("K2", self.k2),
            ("gamma", self.gamma),
        ] {
            if v < 1 {
                return Err(Error::InvalidParameter(format!("{name} must be >= 1, got {v}")));
            }
        }
        for (name, v) in [("eps1", self.eps1), ("eps2", self.eps2)] {
            if v != 1 && v != -1 {
                return Err(Error::InvalidParameter(format!("{name} must be +1 or -1, got {v}")));
            }
        }
        Ok(())
    }

    /// Same family, different index pair.
    pub fn with_pair(&self, c1: i64, c2: i64) -> SeriesParams {
        SeriesParams { c1, c2, ..*self }
    }

    /// Exponent `E(m,n)` of the `(m,n)` summand.
    pub fn exponent(&self, m: i64, n: i64) -> i64 {
        self.b11 * m * (m + 1) / 2 + self.b22 * n * (n + 1) / 2 + self.b12 * m * n
            + self.c1 * m
            + self.c2 * n
    }

    /// x-degree `D1*m + D2*n` of the `(m,n)` summand.
    pub fn x_degree(&self, m: i64, n: i64) -> i64 {
        self.d1 * m + self.d2 * n
    }

    /// Smallest `(m, n) != (0, 0)` (ordered by `m+n`, then `m`) whose exponent
    /// drops below 1, if any. `None` means the series is admissible: its
    /// substituted form is a power series in `q` with constant term 1.
    ///
    /// Since all `B` are >= 1, `E(m,n) >= T(m+n) - A*(m+n)` with
    /// `T(t) = t(t+1)/2` and `A = max(|C1|, |C2|, 1)`, so only `m+n <= 2A - 1`
    /// needs checking.
    pub fn admissibility_violation(&self) -> Option<(u32, u32, i64)> {
        let a = self.c1.abs().max(self.c2.abs()).max(1);
        for t in 1..=(2 * a - 1) {
            for m in 0..=t {
                let n = t - m;
                let e = self.exponent(m, n);
                if e < 1 {
                    return Some((m as u32, n as u32, e));
                }
            }
        }
        None
    }

    pub fn is_admissible(&self) -> bool {
        self.admissibility_violation().is_none()
    }
}

impl fmt::Display for SeriesParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{},{},{},{},{},{:+},{:+}",
            self.b11,
            self.b22,
            self.b12,
            self.c1,
            self.c2,
            self.d1,
            self.d2,
            self.k1,
            self.k2,
            self.gamma,
            self.eps1,
            self.eps2
        )
    }
}

impl FromStr for SeriesParams {
    type Err = Error;

    /// Comma-separated `B11,B22,B12,C1,C2,D1,D2,K1,K2,gamma,eps1,eps2`;
    /// the two signs accept `+`, `-`, `+1`, `-1`, `1`.
    fn from_str(s: &str) -> Result<Self> {
        let items: Vec<&str> = s.split(',').map(str::trim).collect();
        if items.len() != 12 {
            return Err(Error::Parse(format!(
                "expected 12 comma-separated parameters, got {}",
                items.len()
            )));
        }
        let num = |i: usize| -> Result<i64> {
            items[i]
                .parse()
                .map_err(|_| Error::Parse(format!("bad integer parameter {:?}", items[i])))
        };
        let sign = |i: usize| -> Result<i64> {
            match items[i] {
                "+" | "+1" | "1" => Ok(1),
                "-" | "-1" => Ok(-1),
                other => Err(Error::Parse(format!("bad sign parameter {other:?}"))),
            }
        };
        SeriesParams::new(
            num(0)?,
            num(1)?,
            num(2)?,
            num(3)?,
            num(4)?,
            num(5)?,
            num(6)?,
            num(7)?,
            num(8)?,
            num(9)?,
            sign(10)?,
            sign(11)?,
        )
    }
}

/// How to treat `x` during evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XMode {
    /// Keep x-degrees in the result.
    Symbolic,
    /// Substitute `x = q^s`; `PowQ(0)` substitutes `x = 1`.
    PowQ(u32),
}

/// In-place multiply of a univariate coefficient vector by the geometric
/// series `1/(1 - q^step)`, truncated at the vector length.
fn mul_geometric(a: &mut [BigInt], step: usize) {
    if step == 0 || step >= a.len() {
        return;
    }
    for i in step..a.len() {
        let prev = a[i - step].clone();
        a[i] += prev;
    }
}

/// In-place multiply by `(1 - q^step)`, truncated.
fn mul_one_minus(a: &mut [BigInt], step: usize) {
    if step == 0 || step >= a.len() {
        return;
    }
    for i in (step..a.len()).rev() {
        let prev = a[i - step].clone();
        a[i] -= prev;
    }
}

/// `1/(q^K;q^K)_m` truncated at `q^order`.
pub fn pochhammer_inv(k: i64, m: u32, order: u32) -> TruncSeries {
    assert!(k >= 1, "Pochhammer step must be positive");
    let mut a = vec![BigInt::zero(); order as usize + 1];
    a[0] = BigInt::one();
    for j in 1..=m as i64 {
        mul_geometric(&mut a, (k * j).min(order as i64 + 1) as usize);
    }
    let mut out = TruncSeries::zero(order);
    for (i, c) in a.into_iter().enumerate() {
        out.insert_add(0, i as u32, c);
    }
    out
}

/// Exact expansion of the double series to `q^order`.
///
/// Symbolic mode requires every contributing exponent to be nonnegative (the
/// result must be a power series in `q`); substitution modes require full
/// admissibility, i.e. `E(m,n) >= 1` off the origin.
pub fn eval_series(p: &SeriesParams, order: u32, mode: XMode) -> Result<TruncSeries> {
    p.validate()?;
    let s = match mode {
        XMode::Symbolic => None,
        XMode::PowQ(s) => {
            if let Some((m, n, e)) = p.admissibility_violation() {
                return Err(Error::Inadmissible { c1: p.c1, c2: p.c2, m, n, e });
            }
            Some(s as i64)
        }
    };
    // Effective linear coefficients after any substitution x -> q^s.
    let c1_eff = p.c1 + s.unwrap_or(0) * p.d1;
    let c2_eff = p.c2 + s.unwrap_or(0) * p.d2;
    let a = c1_eff.abs().max(c2_eff.abs()).max(1);
    // Smallest t >= A with T(t) - A*t > order bounds the summation range.
    let mut t_max = a;
    while t_max * (t_max + 1) / 2 - a * t_max <= order as i64 {
        t_max += 1;
    }

    let len = order as usize + 1;
    let mut out = TruncSeries::zero(order);
    // inv1 = 1/(q^K1;q^K1)_m, extended incrementally with m.
    let mut inv1 = vec![BigInt::zero(); len];
    inv1[0] = BigInt::one();
    for m in 0..=t_max {
        if m > 0 {
            mul_geometric(&mut inv1, (p.k1 * m).min(len as i64) as usize);
        }
        // row = inv1 / (q^K2;q^K2)_n, extended incrementally with n.
        let mut row = inv1.clone();
        for n in 0..=(t_max - m) {
            if n > 0 {
                mul_geometric(&mut row, (p.k2 * n).min(len as i64) as usize);
            }
            if (m, n) == (0, 0) {
                out.insert_add(0, 0, BigInt::one());
                continue;
            }
            let e = p.exponent(m, n);
            let xd = p.x_degree(m, n);
            let e_eff = e + s.unwrap_or(0) * xd;
            if e_eff > order as i64 {
                continue;
            }
            // Symbolic x separates q^0 terms by x-degree, so only strictly
            // negative exponents are unrepresentable here; substitution modes
            // were already screened by the admissibility check above.
            if e < 0 {
                return Err(Error::Inadmissible {
                    c1: p.c1,
                    c2: p.c2,
                    m: m as u32,
                    n: n as u32,
                    e,
                });
            }
            let sign_neg = (p.eps1 < 0 && m % 2 == 1) != (p.eps2 < 0 && n % 2 == 1);
            let (out_x, base_q) = match s {
                None => (xd as u32, e),
                Some(_) => (0u32, e_eff),
            };
            for (i, c) in row.iter().enumerate() {
                let q = base_q + i as i64;
                if q > order as i64 {
                    break;
                }
                if c.is_zero() {
                    continue;
                }
                let c = if sign_neg { -c.clone() } else { c.clone() };
                out.insert_add(out_x, q as u32, c);
            }
        }
    }
    Ok(out)
}

/// A periodic infinite product `prod_{r,j} (1 - q^(r + j*modulus))^e_r`;
/// negative exponents are denominator factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductSpec {
    pub modulus: i64,
    /// `(residue, exponent)` with `1 <= residue <= modulus`, exponent nonzero.
    pub factors: Vec<(i64, i64)>,
}

impl ProductSpec {
    pub fn new(modulus: i64, factors: Vec<(i64, i64)>) -> Result<Self> {
        if modulus < 1 {
            return Err(Error::InvalidParameter(format!("modulus must be >= 1, got {modulus}")));
        }
        for &(r, _) in &factors {
            if r < 1 || r > modulus {
                return Err(Error::InvalidParameter(format!(
                    "residue {r} outside 1..={modulus}"
                )));
            }
        }
        Ok(ProductSpec { modulus, factors })
    }
}

impl fmt::Display for ProductSpec {
    /// Groups residues by exponent: `(q^{2},q^{4};q^{14})_inf^{-1}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let mut groups: Vec<(i64, Vec<i64>)> = Vec::new();
        for &(r, e) in &self.factors {
            if e == 0 {
                continue;
            }
            if let Some(g) = groups.iter_mut().find(|(ge, _)| *ge == e) {
                g.1.push(r);
            } else {
                groups.push((e, vec![r]));
            }
        }
        if groups.is_empty() {
            return write!(f, "1");
        }
        for (i, (e, rs)) in groups.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "(")?;
            for (j, r) in rs.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "q^{{{r}}}")?;
            }
            write!(f, ";q^{{{}}})_inf^{{{e}}}", self.modulus)?;
        }
        Ok(())
    }
}

/// Expand the periodic product exactly to `q^order`.
pub fn expand_product(spec: &ProductSpec, order: u32) -> TruncSeries {
    let len = order as usize + 1;
    let mut a = vec![BigInt::zero(); len];
    a[0] = BigInt::one();
    for &(r, e) in &spec.factors {
        let mut pos = r;
        while pos <= order as i64 {
            for _ in 0..e.unsigned_abs() {
                if e > 0 {
                    mul_one_minus(&mut a, pos as usize);
                } else {
                    mul_geometric(&mut a, pos as usize);
                }
            }
            pos += spec.modulus;
        }
    }
    let mut out = TruncSeries::zero(order);
    for (i, c) in a.into_iter().enumerate() {
        out.insert_add(0, i as u32, c);
    }
    out
}
