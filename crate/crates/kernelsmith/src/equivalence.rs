//! The sign-test equivalence relation on weight vectors.
//!
//! Two vectors `w, w'` are equivalent at level `r` over coefficient domain
//! `K` when every test vector `β ∈ K_r^d` with `‖β‖₁ ≤ r` satisfies
//! `sign(β·w) = sign(β·w')`. Membership is decided by exhaustive enumeration
//! of the canonical test vectors (first nonzero entry positive — the sign
//! function is odd, so the other half adds nothing), which is a proof, not a
//! sample. Enumerations larger than [`ENUMERATION_CAP`] canonical vectors are
//! rejected rather than silently subsampled.

use std::ops::ControlFlow;

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::numeric::{clear_denominators, int_sgn, Int, Rat};
use crate::{Error, Result};

/// Hard ceiling on the number of canonical test vectors an exhaustive check
/// may enumerate.
pub const ENUMERATION_CAP: u64 = 10_000_000;

/// Coefficient domain of the test vectors: integer entries `{0,…,±r}` or
/// rational entries `±p/q` with `p ≤ r`, `q ≤ r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoeffDomain {
    Integers,
    Rationals,
}

/// Identifies one equivalence relation: level `r`, coefficient domain, and
/// vector dimension `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassSpec {
    pub r: Int,
    pub domain: CoeffDomain,
    pub d: usize,
}

impl ClassSpec {
    pub fn new(r: impl Into<Int>, domain: CoeffDomain, d: usize) -> Result<Self> {
        let r = r.into();
        if r < Int::one() {
            return Err(Error::invalid_argument("class level r must be at least 1"));
        }
        if d == 0 {
            return Err(Error::invalid_argument("class dimension d must be at least 1"));
        }
        Ok(ClassSpec { r, domain, d })
    }

    pub fn integers(r: impl Into<Int>, d: usize) -> Result<Self> {
        Self::new(r, CoeffDomain::Integers, d)
    }

    pub fn rationals(r: impl Into<Int>, d: usize) -> Result<Self> {
        Self::new(r, CoeffDomain::Rationals, d)
    }
}

/// The distinct nonzero magnitudes available per coordinate, scaled to a
/// common integer grid. Returns `(values ascending, scale)` where each value
/// is `scale·|β_i|` and the ℓ₁ budget is `scale·r`.
fn scaled_value_set(spec: &ClassSpec) -> Result<(Vec<i64>, i64)> {
    let r = spec.r.to_u64().ok_or_else(|| {
        Error::InfeasibleEnumeration(format!(
            "class level r = {} is far beyond the enumeration cap of {ENUMERATION_CAP}",
            spec.r
        ))
    })?;
    match spec.domain {
        CoeffDomain::Integers => {
            if r > ENUMERATION_CAP {
                return Err(Error::InfeasibleEnumeration(format!(
                    "integer test vectors with r = {r} exceed the cap of {ENUMERATION_CAP}"
                )));
            }
            Ok(((1..=r as i64).collect(), 1))
        }
        CoeffDomain::Rationals => {
            if r > 1000 {
                return Err(Error::InfeasibleEnumeration(format!(
                    "rational test vectors with r = {r} exceed the cap of {ENUMERATION_CAP}"
                )));
            }
            let r = r as i64;
            let mut scale = 1i64;
            for q in 1..=r {
                scale = scale.lcm(&q);
            }
            let mut vals: Vec<i64> = Vec::new();
            for p in 1..=r {
                for q in 1..=r {
                    let g = p.gcd(&q);
                    let v = (p / g) * (scale / (q / g));
                    vals.push(v);
                }
            }
            vals.sort_unstable();
            vals.dedup();
            Ok((vals, scale))
        }
    }
}

/// Walks every canonical test vector exactly once, presented on the common
/// integer grid (entries are `scale·β_i`). Signs are scale-invariant, so the
/// grid form is interchangeable with `β` for all sign tests.
fn visit_scaled<F>(spec: &ClassSpec, f: &mut F) -> Result<()>
where
    F: FnMut(&[i64]) -> ControlFlow<()>,
{
    let (values, scale) = scaled_value_set(spec)?;
    let budget = scale
        .checked_mul(spec.r.to_i64().expect("r fits by scaled_value_set"))
        .ok_or_else(|| Error::InfeasibleEnumeration("ℓ₁ budget overflows".into()))?;
    let mut current = vec![0i64; spec.d];
    fn rec<F: FnMut(&[i64]) -> ControlFlow<()>>(
        values: &[i64],
        current: &mut Vec<i64>,
        i: usize,
        budget: i64,
        seen_nonzero: bool,
        f: &mut F,
    ) -> ControlFlow<()> {
        if i == current.len() {
            if seen_nonzero {
                return f(current);
            }
            return ControlFlow::Continue(());
        }
        current[i] = 0;
        rec(values, current, i + 1, budget, seen_nonzero, f)?;
        for &v in values {
            if v > budget {
                break;
            }
            current[i] = v;
            rec(values, current, i + 1, budget - v, true, f)?;
            if seen_nonzero {
                current[i] = -v;
                rec(values, current, i + 1, budget - v, true, f)?;
            }
        }
        current[i] = 0;
        ControlFlow::Continue(())
    }
    let _ = rec(&values, &mut current, 0, budget, false, f);
    Ok(())
}

/// Number of canonical test vectors, refusing to count past the cap.
pub fn count_test_vectors(spec: &ClassSpec) -> Result<u64> {
    let mut count: u64 = 0;
    let mut overflow = false;
    visit_scaled(spec, &mut |_| {
        count += 1;
        if count > ENUMERATION_CAP {
            overflow = true;
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    })?;
    if overflow {
        return Err(Error::InfeasibleEnumeration(format!(
            "more than {ENUMERATION_CAP} canonical test vectors for r = {}, d = {}",
            spec.r, spec.d
        )));
    }
    Ok(count)
}

/// Materializes the canonical test vectors as rational vectors: every `β`
/// with entries in the coefficient domain, `‖β‖₁ ≤ r`, first nonzero entry
/// positive, zero vector excluded. Each appears exactly once.
pub fn test_vectors(spec: &ClassSpec) -> Result<Vec<Vec<Rat>>> {
    count_test_vectors(spec)?;
    let (_, scale) = scaled_value_set(spec)?;
    let scale_int = Int::from(scale);
    let mut out = Vec::new();
    visit_scaled(spec, &mut |beta| {
        out.push(
            beta.iter()
                .map(|&x| Rat::new(Int::from(x), scale_int.clone()).expect("scale > 0"))
                .collect(),
        );
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

fn sign_of_scaled_dot(beta: &[i64], v: &[Int]) -> i8 {
    let mut acc = Int::zero();
    for (&b, x) in beta.iter().zip(v) {
        if b != 0 {
            acc += x * b;
        }
    }
    int_sgn(&acc)
}

/// First canonical test vector separating `w` from `w'`, if any.
///
/// Denominators of `w` and `w'` are cleared independently; positive scaling
/// changes no sign.
pub fn separating_vector(w: &[Rat], wp: &[Rat], spec: &ClassSpec) -> Result<Option<Vec<Rat>>> {
    if w.len() != spec.d || wp.len() != spec.d {
        return Err(Error::DimensionMismatch(format!(
            "vectors of lengths {} and {} against class dimension {}",
            w.len(),
            wp.len(),
            spec.d
        )));
    }
    count_test_vectors(spec)?;
    let (wi, _) = clear_denominators(w);
    let (wpi, _) = clear_denominators(wp);
    let (_, scale) = scaled_value_set(spec)?;
    let scale_int = Int::from(scale);
    let mut witness: Option<Vec<Rat>> = None;
    visit_scaled(spec, &mut |beta| {
        if sign_of_scaled_dot(beta, &wi) != sign_of_scaled_dot(beta, &wpi) {
            witness = Some(
                beta.iter()
                    .map(|&x| Rat::new(Int::from(x), scale_int.clone()).expect("scale > 0"))
                    .collect(),
            );
            return ControlFlow::Break(());
        }
        ControlFlow::Continue(())
    })?;
    Ok(witness)
}

/// Exhaustive class membership: true iff no test vector separates `w`
/// from `w'`.
pub fn same_class(w: &[Rat], wp: &[Rat], spec: &ClassSpec) -> Result<bool> {
    Ok(separating_vector(w, wp, spec)?.is_none())
}

/// Outcome of the entrywise sign and pairwise order comparison.
#[derive(Clone, Debug, Default)]
pub struct SignOrderReport {
    /// Indices where `sign(w_i) ≠ sign(w'_i)`.
    pub entry_mismatches: Vec<usize>,
    /// Pairs `(i, j)` with `sign(w_i − w_j) ≠ sign(w'_i − w'_j)`.
    pub pair_mismatches: Vec<(usize, usize)>,
    /// Whether the pairwise check ran (requires `r ≥ 2`).
    pub order_checked: bool,
}

impl SignOrderReport {
    pub fn passed(&self) -> bool {
        self.entry_mismatches.is_empty() && self.pair_mismatches.is_empty()
    }
}

/// Per-entry sign equality (valid consequence of class membership for
/// `r ≥ 1`) and pairwise difference-sign equality (for `r ≥ 2`).
pub fn check_sign_order(w: &[Rat], wp: &[Rat], r: &Int) -> Result<SignOrderReport> {
    if w.len() != wp.len() {
        return Err(Error::DimensionMismatch(
            "sign/order check on vectors of different lengths".into(),
        ));
    }
    if r < &Int::one() {
        return Err(Error::invalid_argument("sign/order check requires r ≥ 1"));
    }
    let mut report = SignOrderReport::default();
    for (i, (a, b)) in w.iter().zip(wp).enumerate() {
        if a.sgn() != b.sgn() {
            report.entry_mismatches.push(i);
        }
    }
    if r >= &Int::from(2) {
        report.order_checked = true;
        for i in 0..w.len() {
            for j in (i + 1)..w.len() {
                let before = (&w[i] - &w[j]).sgn();
                let after = (&wp[i] - &wp[j]).sgn();
                if before != after {
                    report.pair_mismatches.push((i, j));
                }
            }
        }
    }
    Ok(report)
}

/// Describes how the entries of a weight vector encode a metric, so the
/// triangle-sign tests can be enumerated.
#[derive(Clone, Debug)]
pub enum MetricIndexMap {
    /// Pairwise distances of `n` points; `coord[k]` is the vector coordinate
    /// of the pair with packed index `k` (pairs `(i, j)`, `i < j`, ordered
    /// lexicographically).
    PointSet { n: usize, coord: Vec<usize> },
    /// A `rows × cols` cost matrix subject to the crossed four-point
    /// inequality `c(i,j) ≤ c(i,j') + c(i',j') + c(i',j)`;
    /// `coord[i·cols + j]` is the vector coordinate of `(i, j)`.
    Bipartite {
        rows: usize,
        cols: usize,
        coord: Vec<usize>,
    },
}

impl MetricIndexMap {
    pub fn point_set(n: usize, coord: Vec<usize>) -> Result<Self> {
        if coord.len() != n * n.saturating_sub(1) / 2 {
            return Err(Error::invalid_argument(format!(
                "point-set metric map for {n} points needs {} pair coordinates, got {}",
                n * n.saturating_sub(1) / 2,
                coord.len()
            )));
        }
        Ok(MetricIndexMap::PointSet { n, coord })
    }

    pub fn bipartite(rows: usize, cols: usize, coord: Vec<usize>) -> Result<Self> {
        if coord.len() != rows * cols {
            return Err(Error::invalid_argument(format!(
                "bipartite metric map of shape {rows}×{cols} needs {} coordinates, got {}",
                rows * cols,
                coord.len()
            )));
        }
        Ok(MetricIndexMap::Bipartite { rows, cols, coord })
    }

    fn pair_index(n: usize, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < n);
        // lexicographic packing of pairs (i, j) with i < j
        i * n - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Each test is `(plus coordinates, minus coordinate)`; the checked sign
    /// is `sign(Σ w[plus] − w[minus])`.
    fn tests(&self, dim: usize) -> Result<Vec<(Vec<usize>, usize)>> {
        let check = |c: usize| -> Result<usize> {
            if c >= dim {
                return Err(Error::invalid_argument(format!(
                    "metric index map points at coordinate {c}, but the vector has length {dim}"
                )));
            }
            Ok(c)
        };
        let mut out = Vec::new();
        match self {
            MetricIndexMap::PointSet { n, coord } => {
                let at = |i: usize, j: usize| -> Result<usize> {
                    let (a, b) = if i < j { (i, j) } else { (j, i) };
                    check(coord[Self::pair_index(*n, a, b)])
                };
                for i in 0..*n {
                    for j in 0..*n {
                        for k in 0..*n {
                            if i < k && j != i && j != k {
                                out.push((vec![at(i, j)?, at(j, k)?], at(i, k)?));
                            }
                        }
                    }
                }
            }
            MetricIndexMap::Bipartite { rows, cols, coord } => {
                let at = |i: usize, j: usize| -> Result<usize> { check(coord[i * cols + j]) };
                for i in 0..*rows {
                    for ip in 0..*rows {
                        for j in 0..*cols {
                            for jp in 0..*cols {
                                if i == ip && j == jp {
                                    continue;
                                }
                                out.push((vec![at(i, jp)?, at(ip, jp)?, at(ip, j)?], at(i, j)?));
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

fn metric_test_value(w: &[Rat], plus: &[usize], minus: usize) -> Rat {
    let mut acc = -&w[minus];
    for &p in plus {
        acc = &acc + &w[p];
    }
    acc
}

/// True iff every triangle-inequality sign of `w` is matched in `w'`.
/// Sound whenever `w'` was produced by a reduction with level `r ≥ 4` (the
/// tests are `±1` vectors with ℓ₁ norm at most 4).
pub fn check_metric_preserved(w: &[Rat], wp: &[Rat], map: &MetricIndexMap) -> Result<bool> {
    if w.len() != wp.len() {
        return Err(Error::DimensionMismatch(
            "metric check on vectors of different lengths".into(),
        ));
    }
    for (plus, minus) in map.tests(w.len())? {
        if metric_test_value(w, &plus, minus).sgn() != metric_test_value(wp, &plus, minus).sgn() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// True iff `w` itself satisfies every triangle inequality of the map.
pub fn is_metric(w: &[Rat], map: &MetricIndexMap) -> Result<bool> {
    for (plus, minus) in map.tests(w.len())? {
        if metric_test_value(w, &plus, minus).sgn() < 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(xs: &[i64]) -> Vec<Rat> {
        xs.iter().map(|&x| Rat::from(x)).collect()
    }

    fn spec_z(r: i64, d: usize) -> ClassSpec {
        ClassSpec::integers(Int::from(r), d).unwrap()
    }

    #[test]
    fn unit_level_vectors_in_two_dims() {
        let vs = test_vectors(&spec_z(1, 2)).unwrap();
        assert_eq!(vs.len(), 2);
        assert!(vs.contains(&rv(&[1, 0])));
        assert!(vs.contains(&rv(&[0, 1])));
    }

    #[test]
    fn level_two_includes_diagonals() {
        let vs = test_vectors(&spec_z(2, 2)).unwrap();
        assert!(vs.contains(&rv(&[1, -1])));
        assert!(vs.contains(&rv(&[1, 1])));
        // canonical: (-1, 1) must not appear
        assert!(!vs.contains(&rv(&[-1, 1])));
    }

    #[test]
    fn rational_level_one_single_dim() {
        let spec = ClassSpec::rationals(Int::one(), 1).unwrap();
        let vs = test_vectors(&spec).unwrap();
        assert_eq!(vs, vec![rv(&[1])]);
    }

    #[test]
    fn rational_values_deduplicate_unreduced_fractions() {
        // r = 2: magnitudes are 1/2, 1, 2 (2/2 collapses with 1, etc.)
        let spec = ClassSpec::rationals(Int::from(2), 1).unwrap();
        let vs = test_vectors(&spec).unwrap();
        let expected: Vec<Vec<Rat>> = vec![
            vec![Rat::new(Int::one(), Int::from(2)).unwrap()],
            vec![Rat::from(1)],
            vec![Rat::from(2)],
        ];
        assert_eq!(vs.len(), 3);
        for e in expected {
            assert!(vs.contains(&e));
        }
    }

    #[test]
    fn same_class_two_dim_examples() {
        let s = spec_z(2, 2);
        assert!(same_class(&rv(&[2, 1]), &rv(&[3, 1]), &s).unwrap());
        assert!(!same_class(&rv(&[1, 1]), &rv(&[2, 1]), &s).unwrap());
        let witness = separating_vector(&rv(&[1, 1]), &rv(&[2, 1]), &s)
            .unwrap()
            .unwrap();
        // (1, -1) separates the equal pair from the ordered pair
        assert_eq!(witness, rv(&[1, -1]));
        assert!(same_class(&rv(&[5, -3]), &rv(&[5, -3]), &s).unwrap());
    }

    #[test]
    fn class_monotone_in_r() {
        let w = rv(&[3, 1]);
        let wp = rv(&[5, 2]);
        for r in 1..=4 {
            for rp in r..=4 {
                let fine = same_class(&w, &wp, &spec_z(rp, 2)).unwrap();
                let coarse = same_class(&w, &wp, &spec_z(r, 2)).unwrap();
                if fine {
                    assert!(coarse, "class at r' = {rp} must refine class at r = {r}");
                }
            }
        }
    }

    #[test]
    fn equivalence_laws_on_samples() {
        let s = spec_z(2, 3);
        let a = rv(&[4, 2, 1]);
        let b = rv(&[8, 4, 2]);
        let c = rv(&[12, 6, 3]);
        assert!(same_class(&a, &a, &s).unwrap());
        assert_eq!(
            same_class(&a, &b, &s).unwrap(),
            same_class(&b, &a, &s).unwrap()
        );
        if same_class(&a, &b, &s).unwrap() && same_class(&b, &c, &s).unwrap() {
            assert!(same_class(&a, &c, &s).unwrap());
        }
    }

    #[test]
    fn scaled_integer_class_refines_rational_class() {
        // mirror of the scaling argument: equivalence at level r!·r over the
        // integers implies equivalence at level r over the rationals
        let cases = [
            (rv(&[3, 5]), rv(&[2, 4])),
            (rv(&[1, 2]), rv(&[2, 4])),
            (rv(&[2, -1]), rv(&[5, -2])),
            (rv(&[1, 1]), rv(&[1, 2])),
        ];
        for r in 1..=3i64 {
            let fact: i64 = (1..=r).product();
            for (w, wp) in &cases {
                let z = same_class(w, wp, &spec_z(fact * r, 2)).unwrap();
                let q = same_class(w, wp, &ClassSpec::rationals(Int::from(r), 2).unwrap()).unwrap();
                if z {
                    assert!(q, "integer class at r!·r must imply rational class at r = {r}");
                }
                if !q {
                    assert!(!z);
                }
            }
        }
    }

    #[test]
    fn sign_order_reports() {
        let r2 = Int::from(2);
        let ok = check_sign_order(&rv(&[3, 1, 2]), &rv(&[30, 10, 20]), &r2).unwrap();
        assert!(ok.passed() && ok.order_checked);

        let flip = check_sign_order(&rv(&[1, 2]), &rv(&[2, 1]), &r2).unwrap();
        assert!(!flip.passed());
        assert_eq!(flip.pair_mismatches, vec![(0, 1)]);

        let sign = check_sign_order(&rv(&[0, 5]), &rv(&[1, 5]), &Int::one()).unwrap();
        assert!(!sign.passed());
        assert_eq!(sign.entry_mismatches, vec![0]);
        assert!(!sign.order_checked);
    }

    #[test]
    fn metric_checks() {
        // three collinear points, distances (d12, d23, d13)
        let map = MetricIndexMap::point_set(3, vec![0, 2, 1]).unwrap();
        let w = rv(&[1, 2, 1]); // d12 = 1, d13 = 2, d23 = 1
        let wp = rv(&[10, 20, 10]);
        assert!(is_metric(&w, &map).unwrap());
        assert!(check_metric_preserved(&w, &wp, &map).unwrap());
        assert!(check_metric_preserved(&w, &w, &map).unwrap());

        // zero out one distance: the tight triangle sign flips
        let broken = rv(&[1, 2, 0]);
        assert!(!check_metric_preserved(&w, &broken, &map).unwrap());

        let bad_map = MetricIndexMap::point_set(3, vec![0, 9, 1]).unwrap();
        assert!(check_metric_preserved(&w, &wp, &bad_map).is_err());
    }

    #[test]
    fn infeasible_enumeration_is_an_error() {
        let spec = ClassSpec::rationals(Int::from(5000), 3).unwrap();
        assert!(matches!(
            count_test_vectors(&spec),
            Err(Error::InfeasibleEnumeration(_))
        ));
    }
}
