//! Euler's product peel: converting a power series with constant term 1 into
//! the exponents of an infinite product, detecting periodicity of the
//! exponent sequence, and scanning a family of double series for periodic
//! product representations.

use crate::series::{eval_series, ProductSpec, SeriesParams, XMode};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Truncated infinite-product data for a power series `b(q)` with `b(0)=1`:
///
/// ```text
/// b(q) = (1 - q)^{-a_1} (1 - q^2)^{-a_2} ... (1 - q^M)^{-a_M} + O(q^{M+1})
/// ```
///
/// Positive exponents are denominator factors (e.g. the partition generating
/// function has all `a_i = 1`); negative exponents are numerator factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductForm {
    /// `a_1..a_M` in the denominator convention above.
    pub exponents: Vec<i64>,
    /// Smallest period under which the whole exponent window repeats.
    pub period: Option<usize>,
    /// `(residue, exponent)` for residues `1..=period` when periodic.
    pub profile: Vec<(usize, i64)>,
}

/// Sparse coefficients of `(1 - q^g)^e` up to `q^order`, as
/// `(q-degree, coefficient)` pairs. Works for any integer exponent `e`.
fn binomial_factor(g: usize, e: &BigInt, order: usize) -> Vec<(usize, BigInt)> {
    let jmax = order / g;
    let mut out = Vec::with_capacity(jmax + 1);
    out.push((0, BigInt::one()));
    // c_j = (-1)^j C(e, j) via c_j = c_{j-1} * (j - 1 - e) / j (exact).
    let mut c = BigInt::one();
    for j in 1..=jmax {
        c = c * (BigInt::from(j as i64 - 1) - e) / BigInt::from(j as i64);
        if c.is_zero() {
            break;
        }
        out.push((j * g, c.clone()));
    }
    out
}

/// Product of a dense coefficient vector with a sparse factor, truncated at
/// the vector length.
fn mul_factor(r: &[BigInt], factor: &[(usize, BigInt)]) -> Vec<BigInt> {
    let n = r.len();
    let mut out = vec![BigInt::zero(); n];
    for (off, c) in factor {
        for i in 0..n - off {
            if !r[i].is_zero() {
                out[i + *off] += &r[i] * c;
            }
        }
    }
    out
}

/// Peels the coefficient list `b_0=1, b_1, ..., b_M` into product exponents
/// `a_1..a_M`: at step `i` the exponent is the current `q^i` coefficient and
/// the working series is multiplied by `(1 - q^i)^{a_i}`, which zeroes that
/// coefficient without disturbing lower ones.
///
/// Errors when `b_0 != 1` or when some exponent exceeds machine range.
pub fn euler_exponents(b: &[BigInt]) -> Result<Vec<i64>> {
    let Some(b0) = b.first() else {
        return Err(Error::ConstantTermNotOne("empty coefficient list".into()));
    };
    if !b0.is_one() {
        return Err(Error::ConstantTermNotOne(b0.to_string()));
    }
    let order = b.len() - 1;
    let mut r = b.to_vec();
    let mut a = Vec::with_capacity(order);
    for i in 1..=order {
        let e = r[i].clone();
        let ai = i64::try_from(&e).map_err(|_| Error::ExponentOverflow(i as u32))?;
        a.push(ai);
        if !e.is_zero() {
            r = mul_factor(&r, &binomial_factor(i, &e, order));
            debug_assert!(r[i].is_zero());
        }
    }
    Ok(a)
}

/// Expands `prod_i (1 - q^i)^{-a_i}` to a dense coefficient list of length
/// `order + 1`; the exact inverse of [`euler_exponents`].
pub fn expand_exponents(a: &[i64], order: usize) -> Vec<BigInt> {
    let mut r = vec![BigInt::zero(); order + 1];
    r[0] = BigInt::one();
    for (idx, &ai) in a.iter().enumerate() {
        let i = idx + 1;
        if ai != 0 && i <= order {
            r = mul_factor(&r, &binomial_factor(i, &BigInt::from(-ai), order));
        }
    }
    r
}

/// Smallest period `k <= kmax` with `a[i] == a[i - k]` across the whole
/// window. At least one comparison is required (`k < a.len()`); anything
/// shorter cannot witness a repetition.
pub fn detect_period(a: &[i64], kmax: usize) -> Option<usize> {
    (1..=kmax)
        .filter(|&k| k < a.len())
        .find(|&k| (k..a.len()).all(|i| a[i] == a[i - k]))
}

/// Eventually-periodic variant: smallest period `k <= kmax`, then smallest
/// offset `<= max_offset`, such that the window repeats from the offset on.
/// Returns `(offset, period)`. Not used by the default scan.
pub fn detect_eventual_period(
    a: &[i64],
    kmax: usize,
    max_offset: usize,
) -> Option<(usize, usize)> {
    for k in 1..=kmax.min(a.len().saturating_sub(1)) {
        for off in 0..=max_offset.min(a.len().saturating_sub(k + 1)) {
            if (off + k..a.len()).all(|i| a[i] == a[i - k]) {
                return Some((off, k));
            }
        }
    }
    None
}

impl ProductForm {
    /// Peels `b` and attaches periodicity data.
    pub fn from_coefficients(b: &[BigInt], kmax: usize) -> Result<Self> {
        let exponents = euler_exponents(b)?;
        let period = detect_period(&exponents, kmax);
        let profile = period
            .map(|k| (1..=k).map(|r| (r, exponents[r - 1])).collect())
            .unwrap_or_default();
        Ok(ProductForm { exponents, period, profile })
    }

    /// Window length `M`.
    pub fn order(&self) -> usize {
        self.exponents.len()
    }

    /// True when every exponent vanishes (the series is 1 to this order).
    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&a| a == 0)
    }

    /// Periodic form as a product of `(q^r; q^k)_inf` powers. The
    /// `ProductSpec` exponent is the negated peel exponent: peeled
    /// denominator factors appear as negative powers of the Pochhammer
    /// symbol.
    pub fn to_product_spec(&self) -> Option<ProductSpec> {
        let k = self.period?;
        let factors: Vec<(i64, i64)> = self
            .profile
            .iter()
            .filter(|&&(_, a)| a != 0)
            .map(|&(r, a)| (r as i64, -a))
            .collect();
        Some(ProductSpec::new(k as i64, factors).expect("profile residues lie in 1..=period"))
    }
}

/// One periodic product discovered by [`product_scan`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanHit {
    pub c1: i64,
    pub c2: i64,
    /// `x` was specialized to `q^s`; `s = 0` means `x = 1`.
    pub s: u32,
    pub form: ProductForm,
    /// Canonical rendering of the periodic product.
    pub product: String,
}

/// Scans `(c1, c2)` over `[-B11, B11] x [-B22, B22]` and each substitution
/// `x = q^s`, peeling every admissible series with constant term 1 and
/// keeping those whose exponents are periodic (and not identically zero).
/// Cells whose series is undefined or non-normalized are skipped silently.
/// Deterministic order: `c1` ascending, then `c2`, then `x_subs` order.
pub fn product_scan(p: &SeriesParams, order: u32, kmax: usize, x_subs: &[u32]) -> Vec<ScanHit> {
    let mut hits = Vec::new();
    for c1 in -p.b11..=p.b11 {
        for c2 in -p.b22..=p.b22 {
            let cell = p.with_pair(c1, c2);
            for &s in x_subs {
                let Ok(series) = eval_series(&cell, order, XMode::PowQ(s)) else {
                    continue;
                };
                let b = series.q_coeff_list();
                if !b[0].is_one() {
                    continue;
                }
                let Ok(form) = ProductForm::from_coefficients(&b, kmax) else {
                    continue;
                };
                if form.period.is_some() && !form.is_trivial() {
                    let product = form
                        .to_product_spec()
                        .expect("periodic form converts")
                        .to_string();
                    hits.push(ScanHit { c1, c2, s, form, product });
                }
            }
        }
    }
    hits
}
