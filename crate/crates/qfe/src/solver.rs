//! Annihilator solving: combine all box equations with unknown multipliers,
//! force the coefficient of every non-kept series to vanish identically,
//! solve that homogeneous system exactly over the polynomial ring, and
//! extract a closed system expressing each kept series at argument `x` in
//! terms of kept series at argument `x*q^gamma`.
//!
//! - [`assemble`] — the master linear combination (one linear form in the
//!   multipliers `t_1..t_T` per series occurrence in the box).
//! - [`solve_annihilator`] — fraction-free (Bareiss) elimination and basis
//!   extraction; basis entries are content-free polynomials.
//! - [`extract_system`] — row reduction of the kept coefficients to an
//!   identity block; produces an [`ExtractedSystem`].
//! - [`verify_system`] — exact residual check of every extracted equation
//!   against direct series evaluation.
//! - [`verify_uniqueness`] — fixed-point iteration showing the system plus
//!   the initial value `S(0) = 1` pins down every kept series.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{PolyXQ, RatXQ, TruncSeries};
use crate::contiguous::{
    enumerate_box, write_coefficient_term, FuncEquation, IndexBox, SeriesRef,
};
use crate::series::{eval_series, SeriesParams, XMode};
use crate::{Error, Result};

/// The master combination `sum_j t_j * (equation j)`, reorganized per series
/// occurrence: for each [`SeriesRef`] in the box (both argument shifts) the
/// linear form `sum_j c_j * t_j` it carries. Zero forms are stored.
#[derive(Debug, Clone)]
pub struct MasterCombination {
    pub params: SeriesParams,
    pub t_count: usize,
    pub equations: Vec<FuncEquation>,
    forms: BTreeMap<SeriesRef, Vec<PolyXQ>>,
}

impl MasterCombination {
    pub fn form(&self, r: &SeriesRef) -> Option<&[PolyXQ]> {
        self.forms.get(r).map(|v| v.as_slice())
    }

    /// All series occurrences in deterministic order (unshifted block first).
    pub fn refs(&self) -> impl Iterator<Item = &SeriesRef> {
        self.forms.keys()
    }

    pub fn series_count(&self) -> usize {
        self.forms.len()
    }

    /// Value of the linear form of `r` at the multiplier vector `t`.
    pub fn form_value(&self, r: &SeriesRef, t: &[PolyXQ]) -> PolyXQ {
        let mut acc = PolyXQ::zero();
        if let Some(form) = self.forms.get(r) {
            for (c, tj) in form.iter().zip(t) {
                if !c.is_zero() && !tj.is_zero() {
                    acc = acc.add(&c.mul(tj));
                }
            }
        }
        acc
    }
}

/// Builds the master combination for all equations of the box.
pub fn assemble(p: &SeriesParams, bx: &IndexBox) -> MasterCombination {
    let equations = enumerate_box(p, bx);
    let t_count = equations.len();
    let gamma = p.gamma as u32;
    let mut forms: BTreeMap<SeriesRef, Vec<PolyXQ>> = BTreeMap::new();
    for (c1, c2) in bx.pairs() {
        forms.insert(SeriesRef::plain(c1, c2), vec![PolyXQ::zero(); t_count]);
        forms.insert(SeriesRef::shifted(c1, c2, gamma), vec![PolyXQ::zero(); t_count]);
    }
    for (j, eq) in equations.iter().enumerate() {
        for (coeff, r) in eq.terms() {
            let form = forms.get_mut(r).expect("equation ref inside box");
            form[j] = form[j].add(coeff);
        }
    }
    MasterCombination { params: *p, t_count, equations, forms }
}

/// Basis of the annihilator solution module. Vectors are ordered by their
/// free column (ascending); entries are polynomials with integer and monomial
/// content removed and the free-column entry sign-positive.
#[derive(Debug, Clone)]
pub struct AnnihilatorBasis {
    pub vectors: Vec<Vec<PolyXQ>>,
    pub free_columns: Vec<usize>,
    pub rank: usize,
}

impl AnnihilatorBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// True when every non-kept linear form vanishes on every basis vector.
    pub fn annihilates(&self, mc: &MasterCombination, keep: &[(i64, i64)]) -> bool {
        self.vectors.iter().all(|v| {
            mc.refs()
                .filter(|r| !keep.contains(&r.pair()))
                .all(|r| mc.form_value(r, v).is_zero())
        })
    }
}

/// Solves `form = 0` for every series occurrence whose pair is not kept.
pub fn solve_annihilator(mc: &MasterCombination, keep: &[(i64, i64)]) -> Result<AnnihilatorBasis> {
    for pair in keep {
        if !mc.forms.contains_key(&SeriesRef::plain(pair.0, pair.1)) {
            return Err(Error::InvalidParameter(format!(
                "keep pair ({},{}) is not a box lattice pair",
                pair.0, pair.1
            )));
        }
    }
    let rows: Vec<Vec<PolyXQ>> = mc
        .forms
        .iter()
        .filter(|(r, _)| !keep.contains(&r.pair()))
        .map(|(_, form)| form.clone())
        .collect();
    Ok(nullspace(rows, mc.t_count))
}

/// Fraction-free forward elimination followed by exact back-substitution.
fn nullspace(mut rows: Vec<Vec<PolyXQ>>, ncols: usize) -> AnnihilatorBasis {
    rows.retain(|r| r.iter().any(|c| !c.is_zero()));
    let mut active: Vec<usize> = (0..rows.len()).collect();
    // (row index, pivot column) in elimination order; columns strictly increase.
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut prev_pivot = PolyXQ::one();
    loop {
        // Pivot on the largest remaining column: free columns then sit as
        // early as possible, so unit-vector specialization of the basis
        // expresses high-index multipliers in terms of low-index ones.
        let Some(col) = active
            .iter()
            .flat_map(|&r| rows[r].iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(j, _)| j))
            .max()
        else {
            break;
        };
        // Deterministic pivot row: fewest terms in the pivot entry, then the
        // sparsest row, then position.
        let &prow = active
            .iter()
            .filter(|&&r| !rows[r][col].is_zero())
            .min_by_key(|&&r| {
                (
                    rows[r][col].num_terms(),
                    rows[r].iter().filter(|c| !c.is_zero()).count(),
                    r,
                )
            })
            .expect("column chosen from a nonzero entry");
        active.retain(|&r| r != prow);
        let pivot_val = rows[prow][col].clone();
        let pivot_row = rows[prow].clone();
        for &r in &active {
            let mult = rows[r][col].clone();
            for j in 0..ncols {
                let combined = pivot_val.mul(&rows[r][j]).sub(&mult.mul(&pivot_row[j]));
                rows[r][j] = combined
                    .divide_exact(&prev_pivot)
                    .expect("fraction-free elimination divides exactly");
            }
        }
        pivots.push((prow, col));
        prev_pivot = pivot_val;
    }

    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let free_columns: Vec<usize> = (0..ncols).filter(|c| !pivot_cols.contains(c)).collect();
    let mut vectors = Vec::new();
    for &f in &free_columns {
        let mut v: Vec<RatXQ> = vec![RatXQ::zero(); ncols];
        v[f] = RatXQ::one();
        for &(prow, pcol) in pivots.iter().rev() {
            let row = &rows[prow];
            let mut acc = RatXQ::zero();
            for (j, c) in row.iter().enumerate() {
                if j != pcol && !c.is_zero() && !v[j].is_zero() {
                    acc = acc.add(&RatXQ::from_poly(c.clone()).mul(&v[j]));
                }
            }
            v[pcol] = acc.neg().div(&RatXQ::from_poly(row[pcol].clone()));
        }
        vectors.push(clear_vector(v, f));
    }
    AnnihilatorBasis { vectors, free_columns, rank: pivots.len() }
}

/// Clears denominators, strips integer and monomial content, and orients the
/// sign by the free-column entry.
fn clear_vector(mut v: Vec<RatXQ>, free_col: usize) -> Vec<PolyXQ> {
    for i in 0..v.len() {
        let den = v[i].den().clone();
        if !den.is_one() {
            let d = RatXQ::from_poly(den);
            for entry in v.iter_mut() {
                *entry = entry.mul(&d);
            }
        }
    }
    let mut polys: Vec<PolyXQ> = v
        .into_iter()
        .map(|r| r.as_poly().cloned().expect("denominators cleared"))
        .collect();
    let mut content = num_bigint::BigInt::zero();
    let (mut mx, mut mq) = (u32::MAX, i64::MAX);
    for p in polys.iter().filter(|p| !p.is_zero()) {
        content = num_integer::Integer::gcd(&content, &p.int_content());
        let (px, pq) = p.monomial_content();
        mx = mx.min(px);
        mq = mq.min(pq);
    }
    if mx == u32::MAX {
        return polys; // all zero (cannot happen for a basis vector, but safe)
    }
    for p in polys.iter_mut() {
        if !content.is_one() {
            *p = p.divide_int(&content);
        }
        if mx != 0 || mq != 0 {
            *p = p.shift(-(mx as i64), -mq);
        }
    }
    if let Some((_, lead)) = polys[free_col].leading() {
        if lead.is_negative() {
            for p in polys.iter_mut() {
                *p = p.neg();
            }
        }
    }
    polys
}

/// A closed system: for each kept pair `A[i]`, an equation
/// `S[A[i]](x) = sum_b f[i][b] * S[A[b]](x*q^gamma)`, plus the raw annihilated
/// combinations it was reduced from (one per basis vector).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractedSystem {
    pub params: SeriesParams,
    pub keep: Vec<(i64, i64)>,
    /// Raw combinations over kept refs, one per (nonzero) basis vector.
    pub raw: Vec<FuncEquation>,
    /// `solved[i][b]` is the coefficient of `S[keep[b]](x*q^gamma)` in the
    /// equation for `S[keep[i]](x)`.
    pub solved: Vec<Vec<RatXQ>>,
    pub all_polynomial: bool,
    pub all_nonnegative: bool,
}

impl ExtractedSystem {
    pub fn gamma(&self) -> u32 {
        self.params.gamma as u32
    }

    /// The equation for `keep[i]` as a `sum = 0` relation, when polynomial.
    pub fn solved_equation(&self, i: usize) -> Option<FuncEquation> {
        let g = self.gamma();
        let mut terms = vec![(
            PolyXQ::one(),
            SeriesRef::plain(self.keep[i].0, self.keep[i].1),
        )];
        for (b, f) in self.solved[i].iter().enumerate() {
            if f.is_zero() {
                continue;
            }
            let p = f.as_poly()?;
            terms.push((p.neg(), SeriesRef::shifted(self.keep[b].0, self.keep[b].1, g)));
        }
        Some(FuncEquation::new(terms))
    }
}

impl fmt::Display for ExtractedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.gamma();
        for (i, row) in self.solved.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{} = ", SeriesRef::plain(self.keep[i].0, self.keep[i].1))?;
            let mut wrote = false;
            for (b, coeff) in row.iter().enumerate() {
                if coeff.is_zero() {
                    continue;
                }
                let r = SeriesRef::shifted(self.keep[b].0, self.keep[b].1, g);
                match coeff.as_poly() {
                    Some(p) => write_coefficient_term(f, p, !wrote)?,
                    None => {
                        if wrote {
                            write!(f, " + ")?;
                        }
                        write!(f, "({})*", coeff)?;
                    }
                }
                write!(f, "{}", r)?;
                wrote = true;
            }
            if !wrote {
                write!(f, "0")?;
            }
        }
        Ok(())
    }
}

/// Row-reduces the kept coefficients of every basis vector to an identity
/// block, giving one solved equation per kept pair.
pub fn extract_system(
    mc: &MasterCombination,
    basis: &AnnihilatorBasis,
    keep: &[(i64, i64)],
) -> Result<ExtractedSystem> {
    let g = mc.params.gamma as u32;
    let k = keep.len();
    // Stacked rows: [coefficients of kept S(x) | coefficients of kept S(x*q^g)].
    let mut raw = Vec::new();
    let mut rows: Vec<Vec<RatXQ>> = Vec::new();
    for v in &basis.vectors {
        let mut row = Vec::with_capacity(2 * k);
        let mut terms = Vec::new();
        for &(c1, c2) in keep {
            let r = SeriesRef::plain(c1, c2);
            let val = mc.form_value(&r, v);
            if !val.is_zero() {
                terms.push((val.clone(), r));
            }
            row.push(RatXQ::from_poly(val));
        }
        for &(c1, c2) in keep {
            let r = SeriesRef::shifted(c1, c2, g);
            let val = mc.form_value(&r, v);
            if !val.is_zero() {
                terms.push((val.clone(), r));
            }
            row.push(RatXQ::from_poly(val));
        }
        if !terms.is_empty() {
            raw.push(FuncEquation::new(terms));
        }
        rows.push(row);
    }

    // Gauss-Jordan on the left block over the fraction field.
    let mut placed = 0usize;
    for col in 0..k {
        let Some(prow) = (placed..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(placed, prow);
        let inv = rows[placed][col].clone();
        for c in rows[placed].iter_mut() {
            *c = c.div(&inv);
        }
        for r in 0..rows.len() {
            if r == placed || rows[r][col].is_zero() {
                continue;
            }
            let mult = rows[r][col].clone();
            for j in 0..2 * k {
                let delta = mult.mul(&rows[placed][j]);
                rows[r][j] = rows[r][j].sub(&delta);
            }
        }
        placed += 1;
    }
    if placed < k {
        return Err(Error::RankDeficient { achieved: placed, needed: k });
    }
    // Surplus rows must have reduced to nothing at all.
    for row in rows.iter().skip(k) {
        if row.iter().any(|c| !c.is_zero()) {
            return Err(Error::DegenerateSystem);
        }
    }

    let mut solved = Vec::with_capacity(k);
    let mut all_polynomial = true;
    let mut all_nonnegative = true;
    for row in rows.iter().take(k) {
        let mut eq = Vec::with_capacity(k);
        for b in 0..k {
            let f = row[k + b].neg();
            match f.as_poly() {
                Some(p) if p.min_qdeg().unwrap_or(0) >= 0 => {
                    if !p.all_coeffs_nonneg() {
                        all_nonnegative = false;
                    }
                }
                _ => {
                    all_polynomial = false;
                    all_nonnegative = false;
                }
            }
            eq.push(f);
        }
        solved.push(eq);
    }
    Ok(ExtractedSystem {
        params: mc.params,
        keep: keep.to_vec(),
        raw,
        solved,
        all_polynomial,
        all_nonnegative,
    })
}

/// One-call pipeline: assemble, solve, extract.
pub fn solve_box(p: &SeriesParams, bx: &IndexBox, keep: &[(i64, i64)]) -> Result<ExtractedSystem> {
    let mc = assemble(p, bx);
    let basis = solve_annihilator(&mc, keep)?;
    if basis.dim() == 0 {
        return Err(Error::RankDeficient { achieved: 0, needed: keep.len() });
    }
    extract_system(&mc, &basis, keep)
}

/// Residual report of [`verify_system`]: for each equation the first q-order
/// of a nonzero residual term, or `None` when the equation holds to `q^order`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub order: u32,
    pub first_failure: Vec<Option<u32>>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.first_failure.iter().all(|f| f.is_none())
    }
}

/// Checks every solved equation against direct evaluation: the residual
/// `S[keep[i]](x) - sum_b f[i][b]*S[keep[b]](x*q^g)` must vanish mod
/// `q^(order+1)`. Rational coefficients are cleared polynomially first.
pub fn verify_system(p: &SeriesParams, sys: &ExtractedSystem, order: u32) -> Result<VerifyReport> {
    let g = sys.gamma();
    let evals: Vec<TruncSeries> = sys
        .keep
        .iter()
        .map(|&(c1, c2)| eval_series(&p.with_pair(c1, c2), order, XMode::Symbolic))
        .collect::<Result<_>>()?;
    let shifted: Vec<TruncSeries> = evals.iter().map(|s| s.subst_x(g)).collect();

    let mut first_failure = Vec::with_capacity(sys.solved.len());
    for (i, row) in sys.solved.iter().enumerate() {
        // Multiply the equation by all denominators (and q^k for Laurent
        // numerators) so every coefficient becomes a plain polynomial.
        let mut lhs_coeff = PolyXQ::one();
        for f in row {
            if !f.den().is_one() {
                lhs_coeff = lhs_coeff.mul(f.den());
            }
        }
        let mut rhs_coeffs: Vec<PolyXQ> = Vec::with_capacity(row.len());
        for f in row {
            let cleared = f.mul(&RatXQ::from_poly(lhs_coeff.clone()));
            let pol = cleared
                .as_poly()
                .cloned()
                .ok_or_else(|| Error::RationalCoefficient(f.to_string()))?;
            rhs_coeffs.push(pol);
        }
        let min_q = rhs_coeffs
            .iter()
            .filter_map(|p| p.min_qdeg())
            .chain(lhs_coeff.min_qdeg())
            .min()
            .unwrap_or(0)
            .min(0);
        if min_q < 0 {
            lhs_coeff = lhs_coeff.shift(0, -min_q);
            for c in rhs_coeffs.iter_mut() {
                *c = c.shift(0, -min_q);
            }
        }
        let mut residual = evals[i].mul_poly(&lhs_coeff)?;
        for (b, c) in rhs_coeffs.iter().enumerate() {
            if !c.is_zero() {
                residual = residual.sub(&shifted[b].mul_poly(c)?)?;
            }
        }
        first_failure.push(residual.min_qdeg());
    }
    Ok(VerifyReport { order, first_failure })
}

/// Outcome of the uniqueness check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub order: u32,
    pub iterations: usize,
}

/// Converts each coefficient to a truncated series (inverting denominators
/// whose q^0 slice is a unit).
fn coefficient_series(f: &RatXQ, order: u32) -> Result<TruncSeries> {
    let num = f.num().to_series(order)?;
    if f.den().is_one() {
        return Ok(num);
    }
    let den = f.den().to_series(order)?;
    num.mul(&den.inverse()?)
}

/// Runs the fixed-point iteration of the system from all-ones initial values;
/// returns the stabilized kept series and the iteration count.
pub fn fixed_point(sys: &ExtractedSystem, order: u32) -> Result<(Vec<TruncSeries>, usize)> {
    let g = sys.gamma();
    let k = sys.keep.len();
    let fs: Vec<Vec<TruncSeries>> = sys
        .solved
        .iter()
        .map(|row| row.iter().map(|f| coefficient_series(f, order)).collect())
        .collect::<Result<_>>()?;
    // The x^0 q^0 component must be preserved: sum_b f[i][b](0,0) = 1.
    for row in &fs {
        let total: num_bigint::BigInt = row.iter().map(|f| f.coeff(0, 0)).sum();
        if !total.is_one() {
            return Err(Error::InitialValueMismatch);
        }
    }
    let cap = (order as usize).div_ceil(g.max(1) as usize) + 2;
    let mut state: Vec<TruncSeries> = vec![TruncSeries::one(order); k];
    for iter in 1..=cap {
        let shifted: Vec<TruncSeries> = state.iter().map(|s| s.subst_x(g)).collect();
        let mut next = Vec::with_capacity(k);
        for row in &fs {
            let mut acc = TruncSeries::zero(order);
            for (b, f) in row.iter().enumerate() {
                acc = acc.add(&f.mul(&shifted[b])?)?;
            }
            next.push(acc);
        }
        if next == state {
            return Ok((state, iter));
        }
        state = next;
    }
    Err(Error::NonStabilizing(cap))
}

/// Certifies unique determination: the fixed-point iteration stabilizes and
/// the fixed point coincides with direct evaluation of every kept series.
pub fn verify_uniqueness(
    p: &SeriesParams,
    sys: &ExtractedSystem,
    order: u32,
) -> Result<UniquenessReport> {
    let (state, iterations) = fixed_point(sys, order)?;
    for (i, &(c1, c2)) in sys.keep.iter().enumerate() {
        let direct = eval_series(&p.with_pair(c1, c2), order, XMode::Symbolic)?;
        if state[i] != direct {
            return Err(Error::FixedPointMismatch(c1, c2));
        }
    }
    Ok(UniquenessReport { order, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn ag_k3() -> SeriesParams {
        SeriesParams::new(4, 2, 2, -2, -1, 2, 1, 1, 1, 1, 1, 1).expect("valid")
    }

    fn ag_box() -> IndexBox {
        IndexBox::dense(-2, 1, -1, 1).expect("box")
    }

    const AG_KEEP: [(i64, i64); 3] = [(-2, -1), (-1, -1), (0, 0)];

    #[test]
    fn assemble_collects_like_series() {
        let mc = assemble(&ag_k3(), &ag_box());
        assert_eq!(mc.t_count, 16);
        assert_eq!(mc.series_count(), 24);
        // Coefficient of S[-2,-1](x) is t_1 + t_5 (indices 0 and 4).
        let form = mc.form(&SeriesRef::plain(-2, -1)).expect("present");
        let nonzero: Vec<usize> =
            form.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(j, _)| j).collect();
        assert_eq!(nonzero, vec![0, 4]);
        assert!(form[0].is_one() && form[4].is_one());
        // Coefficient of S[0,0](x*q) is -x^2*q^2*t_1 - x*q*t_9 (indices 0, 8).
        let form = mc.form(&SeriesRef::shifted(0, 0, 1)).expect("present");
        let nonzero: Vec<usize> =
            form.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(j, _)| j).collect();
        assert_eq!(nonzero, vec![0, 8]);
        assert_eq!(form[0], PolyXQ::monomial(BigInt::from(-1), 2, 2));
        assert_eq!(form[8], PolyXQ::monomial(BigInt::from(-1), 1, 1));
        // S[0,-1](x*q) never appears: zero form, stored.
        let form = mc.form(&SeriesRef::shifted(0, -1, 1)).expect("stored");
        assert!(form.iter().all(|c| c.is_zero()));
    }

    #[test]
    fn annihilator_basis_matches_known_solution() {
        let mc = assemble(&ag_k3(), &ag_box());
        let basis = solve_annihilator(&mc, &AG_KEEP).expect("keep in box");
        assert_eq!(basis.dim(), 3);
        assert_eq!(basis.rank, 13);
        assert_eq!(basis.free_columns, vec![0, 3, 12]);
        assert!(basis.annihilates(&mc, &AG_KEEP));
        // Every solution has t_4 = t_7, t_12 = -x*q*t_7, t_15 = x*q*t_7,
        // t_16 = -x*q*t_7; the middle basis vector carries that family.
        let v = &basis.vectors[1];
        assert!(v[6].is_one());
        assert!(v[3].is_one());
        let xq = PolyXQ::monomial(BigInt::one(), 1, 1);
        assert_eq!(v[11], xq.neg());
        assert_eq!(v[14], xq);
        assert_eq!(v[15], xq.neg());
        for (j, c) in v.iter().enumerate() {
            if ![6, 3, 11, 14, 15].contains(&j) {
                assert!(c.is_zero(), "t_{} unexpectedly {}", j + 1, c);
            }
        }
        // t_1 and t_13 are standalone.
        assert!(basis.vectors[0].iter().enumerate().all(|(j, c)| (j == 0) == c.is_one()));
        assert!(basis.vectors[2].iter().enumerate().all(|(j, c)| (j == 12) == c.is_one()));
    }

    #[test]
    fn keep_everything_gives_full_space() {
        let mc = assemble(&ag_k3(), &ag_box());
        let all: Vec<(i64, i64)> = ag_box().pairs();
        let basis = solve_annihilator(&mc, &all).expect("keep in box");
        assert_eq!(basis.dim(), 16);
        assert_eq!(basis.rank, 0);
    }

    #[test]
    fn keep_outside_box_rejected() {
        let mc = assemble(&ag_k3(), &ag_box());
        assert!(matches!(
            solve_annihilator(&mc, &[(5, 5)]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn extraction_reproduces_three_series_system() {
        let sys = solve_box(&ag_k3(), &ag_box(), &AG_KEEP).expect("extraction succeeds");
        let raw: Vec<String> = sys.raw.iter().map(|e| e.to_string()).collect();
        assert_eq!(
            raw,
            vec![
                "S[-2,-1](x) - S[-1,-1](x) - x^2*q^2*S[0,0](x*q) = 0",
                "S[-1,-1](x) - S[0,0](x) - x*q*S[-1,-1](x*q) = 0",
                "S[0,0](x) - S[-2,-1](x*q) = 0",
            ]
        );
        assert_eq!(
            sys.to_string(),
            "S[-2,-1](x) = S[-2,-1](x*q) + x*q*S[-1,-1](x*q) + x^2*q^2*S[0,0](x*q)\n\
             S[-1,-1](x) = S[-2,-1](x*q) + x*q*S[-1,-1](x*q)\n\
             S[0,0](x) = S[-2,-1](x*q)"
        );
        assert!(sys.all_polynomial);
        assert!(sys.all_nonnegative);
    }

    #[test]
    fn extraction_rank_deficiency_detected() {
        // A single basis vector cannot express three kept series.
        let mc = assemble(&ag_k3(), &ag_box());
        let basis = solve_annihilator(&mc, &AG_KEEP).expect("solvable");
        let thin = AnnihilatorBasis {
            vectors: basis.vectors[..1].to_vec(),
            free_columns: basis.free_columns[..1].to_vec(),
            rank: basis.rank,
        };
        assert_eq!(
            extract_system(&mc, &thin, &AG_KEEP).map(|s| s.to_string()),
            Err(Error::RankDeficient { achieved: 1, needed: 3 })
        );
    }

    #[test]
    fn verified_system_matches_direct_evaluation() {
        let p = ag_k3();
        let sys = solve_box(&p, &ag_box(), &AG_KEEP).expect("extraction succeeds");
        let report = verify_system(&p, &sys, 30).expect("evaluable");
        assert!(report.pass(), "residuals: {:?}", report.first_failure);
        let uniq = verify_uniqueness(&p, &sys, 25).expect("unique");
        assert!(uniq.iterations <= 27);
    }

    #[test]
    fn corrupted_system_fails_verification() {
        let p = ag_k3();
        let mut sys = solve_box(&p, &ag_box(), &AG_KEEP).expect("extraction succeeds");
        // Tamper with one coefficient.
        sys.solved[0][1] = sys.solved[0][1].add(&RatXQ::from_poly(PolyXQ::monomial(
            BigInt::one(),
            1,
            3,
        )));
        let report = verify_system(&p, &sys, 20).expect("evaluable");
        assert!(!report.pass());
        assert!(report.first_failure[0].is_some());
        assert!(report.first_failure[0].unwrap() <= 10);
    }

    #[test]
    fn fixed_point_of_pure_shift_is_one() {
        // A single equation S(x) = S(x*q) forces the constant series 1.
        let sys = ExtractedSystem {
            params: ag_k3(),
            keep: vec![(0, 0)],
            raw: vec![],
            solved: vec![vec![RatXQ::one()]],
            all_polynomial: true,
            all_nonnegative: true,
        };
        let (state, _) = fixed_point(&sys, 12).expect("stabilizes");
        assert_eq!(state[0], TruncSeries::one(12));
    }

    #[test]
    fn initial_value_mismatch_detected() {
        let sys = ExtractedSystem {
            params: ag_k3(),
            keep: vec![(0, 0)],
            raw: vec![],
            solved: vec![vec![RatXQ::from_poly(PolyXQ::constant(2))]],
            all_polynomial: true,
            all_nonnegative: true,
        };
        assert_eq!(fixed_point(&sys, 8), Err(Error::InitialValueMismatch));
    }
}
