//! Contiguous-relation templates between series whose index pairs differ by
//! fixed shifts, enumeration of all template instances inside an index box,
//! and the lattice/counting formulas used for pruning.
//!
//! The three templates rooted at `(c1, c2)` are
//!
//! - T1: `S[c1,c2](x) - S[c1+K1,c2](x) - eps1*x^D1*q^(B11+c1) * S[c1+B11-g*D1, c2+B12-g*D2](x*q^g) = 0`
//! - T2: `S[c1,c2](x) - S[c1,c2+K2](x) - eps2*x^D2*q^(B22+c2) * S[c1+B12-g*D1, c2+B22-g*D2](x*q^g) = 0`
//! - T3: `S[c1,c2](x) - S[c1-g*D1, c2-g*D2](x*q^g) = 0`
//!
//! with `g = gamma`. Index pairs connected by the templates differ by
//! multiples of `(d1, d2) = (gcd(K1,B11,B12,g*D1), gcd(K2,B22,B12,g*D2))`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::algebra::{PolyXQ, TruncSeries};
use crate::series::{eval_series, SeriesParams, XMode};
use crate::{Error, Result};

/// One series occurrence: index pair plus argument shift (`shift = 0` for
/// argument `x`, `shift = gamma` for `x*q^gamma`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeriesRef {
    pub c1: i64,
    pub c2: i64,
    pub shift: u32,
}

impl SeriesRef {
    pub fn plain(c1: i64, c2: i64) -> Self {
        SeriesRef { c1, c2, shift: 0 }
    }

    pub fn shifted(c1: i64, c2: i64, gamma: u32) -> Self {
        SeriesRef { c1, c2, shift: gamma }
    }

    pub fn pair(&self) -> (i64, i64) {
        (self.c1, self.c2)
    }
}

impl Ord for SeriesRef {
    /// Unshifted block first, then the shifted block, each ordered by pair.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.shift, self.c1, self.c2).cmp(&(other.shift, other.c1, other.c2))
    }
}

impl PartialOrd for SeriesRef {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SeriesRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.shift {
            0 => write!(f, "S[{},{}](x)", self.c1, self.c2),
            1 => write!(f, "S[{},{}](x*q)", self.c1, self.c2),
            g => write!(f, "S[{},{}](x*q^{})", self.c1, self.c2, g),
        }
    }
}

/// A linear relation `sum coeff * S_ref = 0` with polynomial coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuncEquation {
    terms: Vec<(PolyXQ, SeriesRef)>,
}

impl FuncEquation {
    /// Builds an equation, merging duplicate refs and dropping zero
    /// coefficients; panics if nothing remains (an equation must say something).
    pub fn new(terms: Vec<(PolyXQ, SeriesRef)>) -> Self {
        let mut merged: Vec<(PolyXQ, SeriesRef)> = Vec::new();
        for (c, r) in terms {
            if let Some((mc, _)) = merged.iter_mut().find(|(_, mr)| *mr == r) {
                *mc = mc.add(&c);
            } else {
                merged.push((c, r));
            }
        }
        merged.retain(|(c, _)| !c.is_zero());
        assert!(!merged.is_empty(), "equation with no terms");
        FuncEquation { terms: merged }
    }

    pub fn terms(&self) -> &[(PolyXQ, SeriesRef)] {
        &self.terms
    }

    pub fn refs(&self) -> impl Iterator<Item = &SeriesRef> {
        self.terms.iter().map(|(_, r)| r)
    }

    /// Structural equality up to term order.
    pub fn equivalent(&self, other: &FuncEquation) -> bool {
        use std::collections::BTreeMap;
        let a: BTreeMap<_, _> = self.terms.iter().map(|(c, r)| (*r, c.clone())).collect();
        let b: BTreeMap<_, _> = other.terms.iter().map(|(c, r)| (*r, c.clone())).collect();
        a == b
    }
}

impl fmt::Display for FuncEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, r)) in self.terms.iter().enumerate() {
            write_coefficient_term(f, c, i == 0)?;
            write!(f, "{}", r)?;
        }
        write!(f, " = 0")
    }
}

/// Prints a coefficient in equation style: sign pulled into the ` + `/` - `
/// joiner for monomials, magnitude-1 monomials reduced to their variable part
/// (`x^2*q^2*`), multi-term polynomials parenthesized.
pub(crate) fn write_coefficient_term(
    f: &mut fmt::Formatter<'_>,
    c: &PolyXQ,
    first: bool,
) -> fmt::Result {
    use num_traits::Signed;
    if c.num_terms() == 1 {
        let (&(xd, qd), coef) = c.terms().next().expect("one term");
        let neg = coef.is_negative();
        match (first, neg) {
            (true, true) => write!(f, "-")?,
            (true, false) => {}
            (false, true) => write!(f, " - ")?,
            (false, false) => write!(f, " + ")?,
        }
        let mag = coef.abs();
        let mut printed = false;
        if !mag.is_one() {
            write!(f, "{}", mag)?;
            printed = true;
        }
        if xd > 0 {
            if printed {
                write!(f, "*")?;
            }
            if xd == 1 {
                write!(f, "x")?;
            } else {
                write!(f, "x^{}", xd)?;
            }
            printed = true;
        }
        if qd != 0 {
            if printed {
                write!(f, "*")?;
            }
            if qd == 1 {
                write!(f, "q")?;
            } else {
                write!(f, "q^{}", qd)?;
            }
            printed = true;
        }
        if printed {
            write!(f, "*")?;
        }
        Ok(())
    } else {
        if !first {
            write!(f, " + ")?;
        }
        write!(f, "({})*", c.pretty())
    }
}

/// Which contiguous template an equation came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Template {
    T1,
    T2,
    T3,
}

/// The three template instances rooted at `(c1, c2)`; `p`'s own pair is
/// ignored. No admissibility is required — these are symbolic identities.
pub fn primary_equations(p: &SeriesParams, c1: i64, c2: i64) -> [FuncEquation; 3] {
    let g = p.gamma;
    let gu = p.gamma as u32;
    let one = PolyXQ::one();
    let t1 = FuncEquation::new(vec![
        (one.clone(), SeriesRef::plain(c1, c2)),
        (one.neg(), SeriesRef::plain(c1 + p.k1, c2)),
        (
            PolyXQ::monomial(BigInt::from(-p.eps1), p.d1 as u32, p.b11 + c1),
            SeriesRef::shifted(c1 + p.b11 - g * p.d1, c2 + p.b12 - g * p.d2, gu),
        ),
    ]);
    let t2 = FuncEquation::new(vec![
        (one.clone(), SeriesRef::plain(c1, c2)),
        (one.neg(), SeriesRef::plain(c1, c2 + p.k2)),
        (
            PolyXQ::monomial(BigInt::from(-p.eps2), p.d2 as u32, p.b22 + c2),
            SeriesRef::shifted(c1 + p.b12 - g * p.d1, c2 + p.b22 - g * p.d2, gu),
        ),
    ]);
    let t3 = FuncEquation::new(vec![
        (one.clone(), SeriesRef::plain(c1, c2)),
        (one.neg(), SeriesRef::shifted(c1 - g * p.d1, c2 - g * p.d2, gu)),
    ]);
    [t1, t2, t3]
}

/// Lattice steps `(d1, d2)` connecting index pairs of the templates.
pub fn lattice_steps(p: &SeriesParams) -> (i64, i64) {
    let d1 = p.k1.gcd(&p.b11).gcd(&p.b12).gcd(&(p.gamma * p.d1));
    let d2 = p.k2.gcd(&p.b22).gcd(&p.b12).gcd(&(p.gamma * p.d2));
    (d1, d2)
}

/// A rectangular window of index pairs on a sublattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexBox {
    pub lo1: i64,
    pub hi1: i64,
    pub lo2: i64,
    pub hi2: i64,
    pub step1: i64,
    pub step2: i64,
}

impl IndexBox {
    pub fn new(lo1: i64, hi1: i64, lo2: i64, hi2: i64, step1: i64, step2: i64) -> Result<Self> {
        if step1 < 1 || step2 < 1 {
            return Err(Error::InvalidParameter(format!(
                "box steps must be positive, got ({step1}, {step2})"
            )));
        }
        if lo1 > hi1 || lo2 > hi2 {
            return Err(Error::InvalidParameter(format!(
                "empty box [{lo1},{hi1}]x[{lo2},{hi2}]"
            )));
        }
        if (hi1 - lo1) % step1 != 0 {
            return Err(Error::StepMismatch { axis: 1, span: hi1 - lo1, step: step1 });
        }
        if (hi2 - lo2) % step2 != 0 {
            return Err(Error::StepMismatch { axis: 2, span: hi2 - lo2, step: step2 });
        }
        Ok(IndexBox { lo1, hi1, lo2, hi2, step1, step2 })
    }

    /// Unit-step box.
    pub fn dense(lo1: i64, hi1: i64, lo2: i64, hi2: i64) -> Result<Self> {
        IndexBox::new(lo1, hi1, lo2, hi2, 1, 1)
    }

    pub fn contains(&self, c1: i64, c2: i64) -> bool {
        c1 >= self.lo1
            && c1 <= self.hi1
            && c2 >= self.lo2
            && c2 <= self.hi2
            && (c1 - self.lo1) % self.step1 == 0
            && (c2 - self.lo2) % self.step2 == 0
    }

    /// Lattice pairs in lexicographic order.
    pub fn pairs(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        let mut c1 = self.lo1;
        while c1 <= self.hi1 {
            let mut c2 = self.lo2;
            while c2 <= self.hi2 {
                out.push((c1, c2));
                c2 += self.step2;
            }
            c1 += self.step1;
        }
        out
    }

    pub fn span(&self) -> (i64, i64) {
        (self.hi1 - self.lo1, self.hi2 - self.lo2)
    }
}

impl fmt::Display for IndexBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{},{}]x[{},{}] step ({},{})",
            self.lo1, self.hi1, self.lo2, self.hi2, self.step1, self.step2
        )
    }
}

/// All template instances whose every index pair lies inside the box, in
/// deterministic order: the T1 block, then T2, then T3, each sorted
/// lexicographically by root pair.
pub fn enumerate_box(p: &SeriesParams, bx: &IndexBox) -> Vec<FuncEquation> {
    let mut out = Vec::new();
    for template in 0..3 {
        for (c1, c2) in bx.pairs() {
            let eq = primary_equations(p, c1, c2)[template].clone();
            if eq.refs().all(|r| bx.contains(r.c1, r.c2)) {
                out.push(eq);
            }
        }
    }
    out
}

/// Bounding-rectangle sizes `(x1, y1, x2, y2, x3, y3)` of the index-pair
/// spreads of the three templates.
pub fn rect_sizes(p: &SeriesParams) -> (i64, i64, i64, i64, i64, i64) {
    let g = p.gamma;
    let x1 = p.k1.max((p.b11 - g * p.d1).abs()).max((p.k1 - p.b11 + g * p.d1).abs());
    let y1 = (p.b12 - g * p.d2).abs();
    let x2 = (p.b12 - g * p.d1).abs();
    let y2 = p.k2.max((p.b22 - g * p.d2).abs()).max((p.k2 - p.b22 + g * p.d2).abs());
    let x3 = g * p.d1;
    let y3 = g * p.d2;
    (x1, y1, x2, y2, x3, y3)
}

fn check_spans(p: &SeriesParams, dm1: i64, dm2: i64) -> Result<(i64, i64)> {
    let (d1, d2) = lattice_steps(p);
    if dm1 < 0 || dm1 % d1 != 0 {
        return Err(Error::StepMismatch { axis: 1, span: dm1, step: d1 });
    }
    if dm2 < 0 || dm2 % d2 != 0 {
        return Err(Error::StepMismatch { axis: 2, span: dm2, step: d2 });
    }
    Ok((d1, d2))
}

/// Number of template instances fitting in a box of spans `(dm1, dm2)`:
/// `sum_j ((dm1-x_j)/d1 + 1) * ((dm2-y_j)/d2 + 1)`, any negative numerator
/// zeroing that template's contribution.
pub fn count_equations(p: &SeriesParams, dm1: i64, dm2: i64) -> Result<i64> {
    let (d1, d2) = check_spans(p, dm1, dm2)?;
    let (x1, y1, x2, y2, x3, y3) = rect_sizes(p);
    let mut total = 0;
    for (x, y) in [(x1, y1), (x2, y2), (x3, y3)] {
        if dm1 >= x && dm2 >= y {
            total += ((dm1 - x) / d1 + 1) * ((dm2 - y) / d2 + 1);
        }
    }
    Ok(total)
}

/// Number of series occurrences in the box: `2 * (dm1/d1 + 1) * (dm2/d2 + 1)`
/// (each lattice pair appears with both argument shifts).
pub fn count_series(p: &SeriesParams, dm1: i64, dm2: i64) -> Result<i64> {
    let (d1, d2) = check_spans(p, dm1, dm2)?;
    Ok(2 * (dm1 / d1 + 1) * (dm2 / d2 + 1))
}

/// Sufficient condition for a nontrivial annihilator targeting a system of
/// `d` series: strictly more equations than non-kept series occurrences.
/// Violations do not preclude success (used for pruning or ordering only).
pub fn feasible(p: &SeriesParams, dm1: i64, dm2: i64, d: i64) -> Result<bool> {
    Ok(count_equations(p, dm1, dm2)? > count_series(p, dm1, dm2)? - 2 * d)
}

/// Keep only parameter tuples that are not plain dilations (q -> q^e) of a
/// smaller tuple: true iff `gcd(B11, B22, B12, K1, K2) = 1`.
pub fn dilation_filter(p: &SeriesParams) -> bool {
    p.b11.gcd(&p.b22).gcd(&p.b12).gcd(&p.k1).gcd(&p.k2) == 1
}

/// Evaluates `sum coeff * S_ref` exactly to `q^order` (symbolic x); zero for
/// a valid identity.
pub fn equation_residual(p: &SeriesParams, eq: &FuncEquation, order: u32) -> Result<TruncSeries> {
    let mut total = TruncSeries::zero(order);
    for (coeff, r) in eq.terms() {
        let mut s = eval_series(&p.with_pair(r.c1, r.c2), order, XMode::Symbolic)?;
        if r.shift > 0 {
            s = s.subst_x(r.shift);
        }
        total = total.add(&s.mul_poly(coeff)?)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ag_k3() -> SeriesParams {
        SeriesParams::new(4, 2, 2, -2, -1, 2, 1, 1, 1, 1, 1, 1).expect("valid")
    }

    fn stepped_family() -> SeriesParams {
        SeriesParams::new(6, 2, 2, -4, -1, 2, 1, 2, 1, 1, 1, 1).expect("valid")
    }

    #[test]
    fn template_instances_match_known_lines() {
        let p = ag_k3();
        let [t1, _, _] = primary_equations(&p, -2, -1);
        assert_eq!(t1.to_string(), "S[-2,-1](x) - S[-1,-1](x) - x^2*q^2*S[0,0](x*q) = 0");
        let [_, t2, _] = primary_equations(&p, 0, -1);
        assert_eq!(t2.to_string(), "S[0,-1](x) - S[0,0](x) - x*q*S[0,0](x*q) = 0");
        let [_, _, t3] = primary_equations(&p, 0, 0);
        assert_eq!(t3.to_string(), "S[0,0](x) - S[-2,-1](x*q) = 0");
    }

    #[test]
    fn template_sign_flips_with_eps() {
        // eps2 = -1 turns the T2 product coefficient positive.
        let p = SeriesParams::new(2, 2, 2, -1, -1, 1, 1, 1, 2, 1, 1, -1).expect("valid");
        let [_, t2, _] = primary_equations(&p, -1, -1);
        assert_eq!(t2.to_string(), "S[-1,-1](x) - S[-1,1](x) + x*q*S[0,0](x*q) = 0");
    }

    #[test]
    fn lattice_steps_examples() {
        assert_eq!(lattice_steps(&stepped_family()), (2, 1));
        assert_eq!(lattice_steps(&ag_k3()), (1, 1));
        let all3 = SeriesParams::new(3, 3, 3, 0, 0, 3, 3, 3, 3, 1, 1, 1).expect("valid");
        assert_eq!(lattice_steps(&all3), (3, 3));
    }

    #[test]
    fn box_validation_and_pairs() {
        assert!(IndexBox::new(-4, 4, -1, 2, 2, 1).is_ok());
        assert_eq!(
            IndexBox::new(-4, 3, -1, 2, 2, 1),
            Err(Error::StepMismatch { axis: 1, span: 7, step: 2 })
        );
        let bx = IndexBox::new(-2, 0, 0, 1, 2, 1).expect("box");
        assert_eq!(bx.pairs(), vec![(-2, 0), (-2, 1), (0, 0), (0, 1)]);
        assert!(bx.contains(-2, 1));
        assert!(!bx.contains(-1, 0));
    }

    #[test]
    fn ag_k3_box_counts() {
        let p = ag_k3();
        let bx = IndexBox::dense(-2, 1, -1, 1).expect("box");
        let eqs = enumerate_box(&p, &bx);
        assert_eq!(eqs.len(), 16);
        assert_eq!(
            eqs[0].to_string(),
            "S[-2,-1](x) - S[-1,-1](x) - x^2*q^2*S[0,0](x*q) = 0"
        );
        // Block structure: 4 of T1, 8 of T2, 4 of T3.
        assert_eq!(eqs[4].to_string(), "S[-2,-1](x) - S[-2,0](x) - x*q*S[-2,0](x*q) = 0");
        assert_eq!(eqs[12].to_string(), "S[0,0](x) - S[-2,-1](x*q) = 0");
        assert_eq!(rect_sizes(&p), (2, 1, 0, 1, 2, 1));
        assert_eq!(count_equations(&p, 3, 2), Ok(16));
        assert_eq!(count_series(&p, 3, 2), Ok(24));
        // The sufficient inequality fails here even though extraction succeeds.
        assert_eq!(feasible(&p, 3, 2, 3), Ok(false));
    }

    #[test]
    fn tiny_box_has_no_equations() {
        let p = ag_k3();
        let bx = IndexBox::dense(0, 0, 0, 0).expect("box");
        assert!(enumerate_box(&p, &bx).is_empty());
        assert_eq!(count_equations(&p, 0, 0), Ok(0));
        assert_eq!(count_series(&p, 0, 0), Ok(2));
    }

    #[test]
    fn formula_matches_enumeration() {
        let p = stepped_family();
        let bx = IndexBox::new(-4, 4, -1, 2, 2, 1).expect("box");
        let eqs = enumerate_box(&p, &bx);
        assert_eq!(eqs.len(), 36);
        assert_eq!(count_equations(&p, 8, 3), Ok(36));
        assert_eq!(count_series(&p, 8, 3), Ok(40));
        for eq in &eqs {
            for r in eq.refs() {
                assert!(bx.contains(r.c1, r.c2), "{} outside {}", r, bx);
                assert_eq!((r.c1 - p.c1).rem_euclid(2), 0, "off-lattice pair in {}", eq);
            }
        }
    }

    #[test]
    fn span_step_mismatch_rejected() {
        let p = stepped_family();
        assert_eq!(
            count_equations(&p, 7, 3),
            Err(Error::StepMismatch { axis: 1, span: 7, step: 2 })
        );
    }

    #[test]
    fn dilation_filter_examples() {
        assert!(dilation_filter(&ag_k3()));
        let dilated = SeriesParams::new(4, 2, 2, 0, 0, 2, 1, 2, 2, 1, 1, 1).expect("valid");
        assert!(!dilation_filter(&dilated));
        let coprime_content = SeriesParams::new(9, 6, 6, 0, -1, 3, 1, 3, 2, 1, 1, -1).expect("valid");
        assert!(dilation_filter(&coprime_content));
    }

    #[test]
    fn residuals_vanish_on_ag_k3_box() {
        let p = ag_k3();
        let bx = IndexBox::dense(-2, 1, -1, 1).expect("box");
        for eq in enumerate_box(&p, &bx) {
            let r = equation_residual(&p, &eq, 20).expect("evaluable");
            assert!(r.is_zero(), "nonzero residual for {}: {}", eq, r);
        }
    }

    #[test]
    fn residual_vanishes_with_negative_eps() {
        let p = SeriesParams::new(2, 2, 2, -1, -1, 1, 1, 1, 2, 1, 1, -1).expect("valid");
        for eq in primary_equations(&p, -1, -1) {
            let r = equation_residual(&p, &eq, 20).expect("evaluable");
            assert!(r.is_zero(), "nonzero residual for {}: {}", eq, r);
        }
    }

    #[test]
    fn merged_duplicate_refs() {
        let a = SeriesRef::plain(0, 0);
        let eq = FuncEquation::new(vec![
            (PolyXQ::one(), a),
            (PolyXQ::one(), a),
            (PolyXQ::one().neg(), SeriesRef::shifted(0, 0, 1)),
        ]);
        assert_eq!(eq.terms().len(), 2);
        assert_eq!(eq.to_string(), "2*S[0,0](x) - S[0,0](x*q) = 0");
    }
}
