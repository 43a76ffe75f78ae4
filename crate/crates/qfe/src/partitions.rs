//! Brute-force partition enumerators: independent oracles for the series
//! coefficients and for cardinality checks between partition classes.

use crate::{Error, Result};

/// Ordinary partition stored as a weakly increasing list of positive parts.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    /// Sorts the parts ascending; rejects zero parts.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.iter().any(|&p| p == 0) {
            return Err(Error::InvalidParameter("partition parts must be positive".into()));
        }
        parts.sort_unstable();
        Ok(Partition { parts })
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn weight(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Ascending `(size, multiplicity)` runs.
    fn runs(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((size, mult)) if *size == p => *mult += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }
}

/// Part color of a bicolored partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Color {
    Red,
    Blue,
}

/// Bicolored partition in canonical order: sizes ascending, red before blue
/// on ties.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BicoloredPartition {
    parts: Vec<(u32, Color)>,
}

impl BicoloredPartition {
    pub fn new(mut parts: Vec<(u32, Color)>) -> Result<Self> {
        if parts.iter().any(|&(p, _)| p == 0) {
            return Err(Error::InvalidParameter("partition parts must be positive".into()));
        }
        parts.sort_unstable();
        Ok(BicoloredPartition { parts })
    }

    pub fn parts(&self) -> &[(u32, Color)] {
        &self.parts
    }

    pub fn weight(&self) -> u32 {
        self.parts.iter().map(|&(p, _)| p).sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    fn sizes_of(&self, color: Color) -> Vec<u32> {
        self.parts.iter().filter(|&&(_, c)| c == color).map(|&(p, _)| p).collect()
    }

    /// True when no colored size repeats.
    fn colors_distinct(&self) -> bool {
        self.parts.windows(2).all(|w| w[0] != w[1])
    }
}

impl std::fmt::Display for BicoloredPartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "0");
        }
        let body: Vec<String> = self
            .parts
            .iter()
            .map(|&(p, c)| format!("{}{}", if c == Color::Red { 'r' } else { 'b' }, p))
            .collect();
        write!(f, "{}", body.join("+"))
    }
}

/// Restriction level of the bicolored classes: `Base` is the full class,
/// `Restricted` adds the class-specific exclusion (see the counting
/// functions).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Base,
    Restricted,
}

/// All partitions of `n` as ascending part lists.
pub fn partitions_of(n: u32) -> Vec<Partition> {
    fn rec(remaining: u32, min_part: u32, acc: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition { parts: acc.clone() });
            return;
        }
        for p in min_part..=remaining {
            acc.push(p);
            rec(remaining - p, p, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, 1, &mut Vec::new(), &mut out);
    out
}

/// All partitions of `n` into distinct parts, as ascending lists.
fn strict_partitions(n: u32) -> Vec<Vec<u32>> {
    fn rec(remaining: u32, min_part: u32, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if remaining == 0 {
            out.push(acc.clone());
            return;
        }
        for p in min_part..=remaining {
            acc.push(p);
            rec(remaining - p, p + 1, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, 1, &mut Vec::new(), &mut out);
    out
}

/// All bicolored partitions of `n` whose red parts are distinct and whose
/// blue parts are distinct, in canonical order.
pub fn bicolored_distinct(n: u32) -> Vec<BicoloredPartition> {
    let mut out = Vec::new();
    for red_weight in 0..=n {
        for reds in strict_partitions(red_weight) {
            for blues in strict_partitions(n - red_weight) {
                let mut parts: Vec<(u32, Color)> =
                    reds.iter().map(|&p| (p, Color::Red)).collect();
                parts.extend(blues.iter().map(|&p| (p, Color::Blue)));
                parts.sort_unstable();
                out.push(BicoloredPartition { parts });
            }
        }
    }
    out
}

/// Class predicate: parts repeat at most twice, distinct part sizes differ
/// by at least two, and any two sizes that both repeat differ by at least
/// three.
pub fn is_mult2_gap2(p: &Partition) -> bool {
    let runs = p.runs();
    if runs.iter().any(|&(_, m)| m > 2) {
        return false;
    }
    if runs.windows(2).any(|w| w[1].0 - w[0].0 < 2) {
        return false;
    }
    let repeated: Vec<u32> = runs.iter().filter(|&&(_, m)| m == 2).map(|&(s, _)| s).collect();
    repeated.windows(2).all(|w| w[1] - w[0] >= 3)
}

/// Number of partitions of `n` into `m` parts that repeat at most twice,
/// with distinct sizes at least two apart and repeating sizes at least
/// three apart.
pub fn count_mult2_gap2(m: usize, n: u32) -> u64 {
    partitions_of(n)
        .iter()
        .filter(|p| p.len() == m && is_mult2_gap2(p))
        .count() as u64
}

/// Augmenting-path step of the red-to-blue assignment.
fn augment(
    red: usize,
    candidates: &[Vec<usize>],
    owner: &mut [Option<usize>],
    seen: &mut [bool],
) -> bool {
    for &b in &candidates[red] {
        if seen[b] {
            continue;
        }
        seen[b] = true;
        let reassignable = match owner[b] {
            None => true,
            Some(prev) => augment(prev, candidates, owner, seen),
        };
        if reassignable {
            owner[b] = Some(red);
            return true;
        }
    }
    false
}

/// True when every red part `b` can be assigned its own blue part of size
/// `b` or `b+1` (exact bipartite matching).
fn has_blue_assignment(p: &BicoloredPartition) -> bool {
    let reds = p.sizes_of(Color::Red);
    let blues = p.sizes_of(Color::Blue);
    let candidates: Vec<Vec<usize>> = reds
        .iter()
        .map(|&r| {
            blues
                .iter()
                .enumerate()
                .filter(|&(_, &b)| b == r || b == r + 1)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; blues.len()];
    (0..reds.len()).all(|r| {
        let mut seen = vec![false; blues.len()];
        augment(r, &candidates, &mut owner, &mut seen)
    })
}

/// Matching-class predicate: distinct parts per color, every red part
/// assignable to its own blue part of equal or one-larger size, and (for
/// `Restricted`) never a red 1 and a blue 1 together.
pub fn satisfies_match(p: &BicoloredPartition, variant: Variant) -> bool {
    if !p.colors_distinct() {
        return false;
    }
    if variant == Variant::Restricted
        && p.parts.contains(&(1, Color::Red))
        && p.parts.contains(&(1, Color::Blue))
    {
        return false;
    }
    has_blue_assignment(p)
}

/// Number of bicolored partitions of `n` with `m` parts in which neither
/// color repeats a size and every red `b` is matched to its own blue of
/// size `b` or `b+1`. `Restricted` additionally forbids a red 1 and a
/// blue 1 from appearing together.
pub fn count_bicolored_match(m: usize, n: u32, variant: Variant) -> u64 {
    bicolored_distinct(n)
        .iter()
        .filter(|p| p.len() == m && satisfies_match(p, variant))
        .count() as u64
}

/// Gap-class predicate: distinct parts per color, no red 1 (no red 2 either
/// for `Restricted`), no blue part with a red at the next one or two sizes
/// above it, and no blue part capping a difference-[1,2,...,2] chain of
/// unpaired reds below it.
pub fn satisfies_gap(p: &BicoloredPartition, variant: Variant) -> bool {
    if !p.colors_distinct() {
        return false;
    }
    if p.parts.contains(&(1, Color::Red)) {
        return false;
    }
    if variant == Variant::Restricted && p.parts.contains(&(2, Color::Red)) {
        return false;
    }
    let reds = p.sizes_of(Color::Red);
    let blues = p.sizes_of(Color::Blue);
    // A red part standing next to a blue of its own size is paired off and
    // cannot participate in a forbidden difference chain.
    let lone_red = |r: u32| reds.contains(&r) && !blues.contains(&r);
    for &b in &blues {
        if reds.contains(&(b + 1)) || reds.contains(&(b + 2)) {
            return false;
        }
        // No increasing chain of unpaired red parts, capped by this blue,
        // whose difference sequence reads 1 followed by 2s: a lone red b-1,
        // or lone reds at b-2, b-4, ..., b-2k together with one at b-2k-1.
        if b >= 2 && lone_red(b - 1) {
            return false;
        }
        let mut j = b;
        while j >= 3 && lone_red(j - 2) {
            j -= 2;
            if lone_red(j - 1) {
                return false;
            }
        }
    }
    true
}

/// Number of bicolored partitions of `n` with `m` parts in which each
/// colored size appears at most once, red 1 is absent, no blue `b` coexists
/// with a red `b+1` or `b+2`, and no contiguous run of red parts ending at
/// a blue has successive differences `1, 2, 2, ...`. `Restricted`
/// additionally forbids red 2.
pub fn count_bicolored_gap(m: usize, n: u32, variant: Variant) -> u64 {
    bicolored_distinct(n)
        .iter()
        .filter(|p| p.len() == m && satisfies_gap(p, variant))
        .count() as u64
}

/// Number of partitions of `n` in which each part appears at most three
/// times.
pub fn count_at_most_3(n: u32) -> u64 {
    partitions_of(n)
        .iter()
        .filter(|p| p.runs().iter().all(|&(_, m)| m <= 3))
        .count() as u64
}

/// Outcome of the three-way cardinality comparison between the at-most-3
/// class and the two bicolored classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquinumerousReport {
    pub upto: u32,
    /// `(n, at_most_3, match_total, gap_total)` of the first disagreement.
    pub first_mismatch: Option<(u32, u64, u64, u64)>,
}

impl EquinumerousReport {
    pub fn pass(&self) -> bool {
        self.first_mismatch.is_none()
    }
}

/// Sum of a bicolored count over all part numbers.
pub fn total<F: Fn(usize) -> u64>(n: u32, count: F) -> u64 {
    // A distinct-per-color partition of n has at most n parts.
    (0..=n as usize).map(count).sum()
}

/// Checks, for every `n <= upto`, that the at-most-3 class and both base
/// bicolored classes have the same cardinality.
pub fn verify_equinumerous(upto: u32) -> EquinumerousReport {
    for n in 0..=upto {
        let plain = count_at_most_3(n);
        let matched = total(n, |m| count_bicolored_match(m, n, Variant::Base));
        let gapped = total(n, |m| count_bicolored_gap(m, n, Variant::Base));
        if plain != matched || plain != gapped {
            return EquinumerousReport { upto, first_mismatch: Some((n, plain, matched, gapped)) };
        }
    }
    EquinumerousReport { upto, first_mismatch: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{eval_series, expand_product, ProductSpec, SeriesParams, XMode};

    fn params(text: &str) -> SeriesParams {
        text.parse().expect("valid parameter string")
    }

    fn bicolored(text: &str) -> BicoloredPartition {
        let parts = text
            .split('+')
            .map(|tok| {
                let (c, p) = tok.split_at(1);
                let color = match c {
                    "r" => Color::Red,
                    "b" => Color::Blue,
                    other => panic!("bad color {other}"),
                };
                (p.parse().unwrap(), color)
            })
            .collect();
        BicoloredPartition::new(parts).unwrap()
    }

    #[test]
    fn partition_construction_is_canonical() {
        let p = Partition::new(vec![3, 1, 2, 1]).unwrap();
        assert_eq!(p.parts(), [1, 1, 2, 3]);
        assert_eq!(p.weight(), 7);
        assert_eq!(p.len(), 4);
        assert!(Partition::new(vec![0]).is_err());
        assert!(Partition::new(vec![]).unwrap().is_empty());
        let b = bicolored("b2+r2+b1");
        assert_eq!(b.parts(), [(1, Color::Blue), (2, Color::Red), (2, Color::Blue)]);
        assert_eq!(b.to_string(), "b1+r2+b2");
    }

    #[test]
    fn enumeration_counts_are_exhaustive() {
        assert_eq!(partitions_of(0).len(), 1);
        assert_eq!(partitions_of(5).len(), 7);
        assert_eq!(partitions_of(10).len(), 42);
        assert_eq!(strict_partitions(10).len(), 10);
        // Bicolored with distinct colors per size class: sum of products of
        // distinct-partition counts.
        let direct = bicolored_distinct(6).len();
        let by_formula: usize = (0..=6)
            .map(|k| strict_partitions(k).len() * strict_partitions(6 - k).len())
            .sum();
        assert_eq!(direct, by_formula);
        // Canonical order makes duplicates impossible.
        let mut sorted = bicolored_distinct(8);
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), bicolored_distinct(8).len());
    }

    #[test]
    fn empty_partition_is_counted_once() {
        assert_eq!(count_mult2_gap2(0, 0), 1);
        assert_eq!(count_bicolored_match(0, 0, Variant::Base), 1);
        assert_eq!(count_bicolored_gap(0, 0, Variant::Base), 1);
        assert_eq!(count_at_most_3(0), 1);
    }

    #[test]
    fn mult2_gap2_total_at_weight_14() {
        // 12 partitions into distinct parts two apart, plus 14 with a
        // doubled size. A doubled size needs no companion: {7,7} and
        // {a,a,b} shapes such as {4,4,6} and {2,6,6} are all valid since
        // the three-apart rule binds only pairs of sizes that BOTH repeat.
        let total: u64 = (0..=14).map(|m| count_mult2_gap2(m, 14)).sum();
        assert_eq!(total, 26);
        for parts in [
            vec![7, 7],
            vec![1, 1, 12],
            vec![2, 2, 10],
            vec![3, 3, 8],
            vec![4, 4, 6],
            vec![2, 6, 6],
            vec![1, 1, 6, 6],
            vec![2, 2, 5, 5],
            vec![1, 3, 3, 7],
        ] {
            let p = Partition::new(parts).unwrap();
            assert!(is_mult2_gap2(&p), "{:?} belongs to the class", p.parts());
        }
        // Both 2 and 4 repeat but sit only two apart.
        assert!(!is_mult2_gap2(&Partition::new(vec![2, 2, 4, 4, 7]).unwrap()));
        // Distinct sizes only one apart.
        assert!(!is_mult2_gap2(&Partition::new(vec![3, 4, 7]).unwrap()));
        // Triple repeat.
        assert!(!is_mult2_gap2(&Partition::new(vec![5, 5, 5]).unwrap()));
    }

    #[test]
    fn mult2_gap2_matches_series_coefficients() {
        let p = params("6,2,2,-4,-1,2,1,2,1,1,+1,+1");
        let series = eval_series(&p, 24, XMode::Symbolic).unwrap();
        for n in 0..=24u32 {
            for m in 0..=n as usize {
                assert_eq!(
                    count_mult2_gap2(m, n),
                    u64::try_from(series.coeff(m as u32, n)).unwrap(),
                    "coefficient (m={m}, n={n})"
                );
            }
        }
    }

    #[test]
    fn match_class_weight_4_members() {
        let members: Vec<BicoloredPartition> = bicolored_distinct(4)
            .into_iter()
            .filter(|p| satisfies_match(p, Variant::Base))
            .collect();
        let expected: Vec<BicoloredPartition> =
            ["b4", "b1+b3", "r2+b2", "r1+b1+b2"].iter().map(|s| bicolored(s)).collect();
        assert_eq!(members.len(), 4);
        for want in &expected {
            assert!(members.contains(want), "{want} missing");
        }
        let total: u64 = (0..=4).map(|m| count_bicolored_match(m, 4, Variant::Base)).sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn match_class_examples() {
        assert!(satisfies_match(&bicolored("r5+b5"), Variant::Base));
        assert!(satisfies_match(&bicolored("r1+b2+b5+b14"), Variant::Base));
        // Two reds compete for the single blue 5.
        assert!(!satisfies_match(&bicolored("r4+r5+b5"), Variant::Base));
        // Red 9 has no blue 9 or 10.
        assert!(!satisfies_match(&bicolored("b1+r6+b6+r9"), Variant::Base));
        // The restricted variant drops exactly the red1-with-blue1 members.
        assert!(satisfies_match(&bicolored("r1+b1+b2"), Variant::Base));
        assert!(!satisfies_match(&bicolored("r1+b1+b2"), Variant::Restricted));
        assert!(satisfies_match(&bicolored("r1+b2"), Variant::Restricted));
    }

    #[test]
    fn match_assignment_needs_global_injectivity() {
        // Greedy from the largest red would fail r2->b3, r3->b3; matching
        // finds r2->b2, r3->b3. Both orders must succeed.
        assert!(has_blue_assignment(&bicolored("r2+b2+r3+b3")));
        // Three reds into two blues cannot work.
        assert!(!has_blue_assignment(&bicolored("r2+r3+b3+r4+b4")));
    }

    #[test]
    fn match_counts_equal_series_coefficients() {
        let base = params("2,1,1,0,0,2,1,1,1,1,+1,+1");
        let restricted = params("2,1,1,1,0,2,1,1,1,1,+1,+1");
        let s_base = eval_series(&base, 24, XMode::Symbolic).unwrap();
        let s_restricted = eval_series(&restricted, 24, XMode::Symbolic).unwrap();
        for n in 0..=24u32 {
            for m in 0..=n as usize {
                assert_eq!(
                    count_bicolored_match(m, n, Variant::Base),
                    u64::try_from(s_base.coeff(m as u32, n)).unwrap(),
                    "base coefficient (m={m}, n={n})"
                );
                assert_eq!(
                    count_bicolored_match(m, n, Variant::Restricted),
                    u64::try_from(s_restricted.coeff(m as u32, n)).unwrap(),
                    "restricted coefficient (m={m}, n={n})"
                );
            }
        }
    }

    #[test]
    fn gap_class_weight_4_members() {
        let members: Vec<BicoloredPartition> = bicolored_distinct(4)
            .into_iter()
            .filter(|p| satisfies_gap(p, Variant::Base))
            .collect();
        let expected: Vec<BicoloredPartition> =
            ["b4", "r4", "b1+b3", "r2+b2"].iter().map(|s| bicolored(s)).collect();
        assert_eq!(members.len(), 4);
        for want in &expected {
            assert!(members.contains(want), "{want} missing");
        }
    }

    #[test]
    fn gap_class_examples() {
        assert!(satisfies_gap(&bicolored("r3+b5"), Variant::Base));
        // Chain r2, r3, b5 has differences 1 then 2.
        assert!(!satisfies_gap(&bicolored("r2+r3+b5"), Variant::Base));
        // Difference 1 alone (red b-1 with blue b).
        assert!(!satisfies_gap(&bicolored("r3+b4"), Variant::Base));
        assert!(!satisfies_gap(&bicolored("r2+r3+b4"), Variant::Base));
        // Chain r4, r5, r7, b9 forbids; the extra r2 changes nothing.
        assert!(!satisfies_gap(&bicolored("r2+r4+r5+r7+b9"), Variant::Base));
        // An unpaired red just below a blue forbids even when the blue at the
        // chain's cap is itself paired.
        assert!(!satisfies_gap(&bicolored("r2+r3+b3"), Variant::Base));
        // Pairing a chain red with a blue of its own size shields it.
        assert!(satisfies_gap(&bicolored("r3+b3+b4"), Variant::Base));
        assert!(satisfies_gap(&bicolored("r2+b2+b3"), Variant::Base));
        assert!(!satisfies_gap(&bicolored("r2+r3+b3+b5"), Variant::Base));
        assert!(satisfies_gap(&bicolored("r4+b4+b5"), Variant::Base));
        // A tie alone is acceptable.
        assert!(satisfies_gap(&bicolored("r3+b3"), Variant::Base));
        // Red 1 never appears; blue b excludes red b+1 and b+2.
        assert!(!satisfies_gap(&bicolored("r1+b3"), Variant::Base));
        assert!(!satisfies_gap(&bicolored("b2+r3"), Variant::Base));
        assert!(!satisfies_gap(&bicolored("b2+r4"), Variant::Base));
        assert!(satisfies_gap(&bicolored("b2+r5"), Variant::Base));
        // Restricted variant drops red 2.
        assert!(!satisfies_gap(&bicolored("r2+b2"), Variant::Restricted));
        assert!(satisfies_gap(&bicolored("b2+b4"), Variant::Restricted));
    }

    #[test]
    fn gap_counts_equal_series_coefficients() {
        let base = params("2,1,1,0,0,1,1,1,1,1,+1,+1");
        let restricted = params("2,1,1,1,0,1,1,1,1,1,+1,+1");
        let s_base = eval_series(&base, 24, XMode::Symbolic).unwrap();
        let s_restricted = eval_series(&restricted, 24, XMode::Symbolic).unwrap();
        for n in 0..=24u32 {
            for m in 0..=n as usize {
                assert_eq!(
                    count_bicolored_gap(m, n, Variant::Base),
                    u64::try_from(s_base.coeff(m as u32, n)).unwrap(),
                    "base coefficient (m={m}, n={n})"
                );
                assert_eq!(
                    count_bicolored_gap(m, n, Variant::Restricted),
                    u64::try_from(s_restricted.coeff(m as u32, n)).unwrap(),
                    "restricted coefficient (m={m}, n={n})"
                );
            }
        }
    }

    #[test]
    fn at_most_3_counts() {
        assert_eq!(count_at_most_3(4), 4);
        let spec = ProductSpec::new(4, vec![(1, -1), (2, -1), (3, -1)]).unwrap();
        let series = expand_product(&spec, 40);
        for n in 0..=40 {
            assert_eq!(count_at_most_3(n), u64::try_from(series.coeff_q(n)).unwrap());
        }
    }

    #[test]
    fn three_classes_are_equinumerous() {
        let report = verify_equinumerous(25);
        assert!(report.pass(), "first mismatch: {:?}", report.first_mismatch);
        assert_eq!(count_at_most_3(4), 4);
        let match4: u64 = (0..=4).map(|m| count_bicolored_match(m, 4, Variant::Base)).sum();
        let gap4: u64 = (0..=4).map(|m| count_bicolored_gap(m, 4, Variant::Base)).sum();
        assert_eq!(match4, 4);
        assert_eq!(gap4, 4);
    }
}
