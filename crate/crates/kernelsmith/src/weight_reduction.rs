//! The weight-reduction contract: replace `w ∈ Q^d` by `ŵ ∈ Z^d` in the same
//! sign-test equivalence class at level `N`, with `‖ŵ‖∞` bounded by
//! `2^{4d³}(N+1)^{d(d+2)}`.
//!
//! The construction peels the input round by round. Each round normalizes the
//! residual to max-norm 1, asks the lattice engine for a simultaneous
//! Diophantine approximation `(q, p)` at quality `eps = 1/(N+1)`, and recurses
//! on the exact residual `q·u − p`. Every coordinate where `|u_i| = 1` (in
//! particular the max coordinate) zeroes out exactly, so there are at most
//! `d` rounds. Rounds combine as `M·p + rest` with `M = N·‖rest‖∞ + 1`: for
//! any test vector `b` with `‖b‖₁ ≤ N`, the sign of `p·b` wins whenever it is
//! nonzero (the rest contributes less than `M` in absolute value), and
//! otherwise the recursion decides — exactly the sign of `w·b`.
//!
//! Before the lattice engine runs, the normalized vector is rounded to a
//! power-of-two grid fine enough that any approximation of the rounded vector
//! at quality `eps/2` is an approximation of the true vector at quality
//! `eps`. This keeps lattice entries small regardless of the input's bit
//! length. When the common denominator of the normalized vector is already
//! within the denominator bound, the exact clearing is used directly and no
//! lattice work happens at all — the case that dominates once `N` dwarfs the
//! input precision.
//!
//! Every output is gated: an entrywise sign and pairwise order check always
//! runs, the exact max-norm bound is always checked, and the full exhaustive
//! class check runs whenever the enumeration is small enough.

use std::time::{Duration, Instant};

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::equivalence::{
    check_sign_order, count_test_vectors, same_class, ClassSpec, CoeffDomain, ENUMERATION_CAP,
};
use crate::lattice::{le_2pow_times_pow, simultaneous_approx};
use crate::numeric::{
    factorial, int_bits, lcm_denominators, linf, linf_int, vec_bits, vec_bits_int, Int, Rat,
};
use crate::{Error, Result};

/// Max canonical test vectors the built-in post-verification will enumerate.
const AUTO_VERIFY_CAP: u64 = 20_000;

/// Which gate the output passed before being returned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerificationLevel {
    /// Entry signs and pairwise difference signs (always run).
    SignOrder,
    /// Full exhaustive class membership over all canonical test vectors.
    Exhaustive,
}

impl VerificationLevel {
    pub fn as_str(&self) -> &'static str {
        match self {
            VerificationLevel::SignOrder => "sign-order",
            VerificationLevel::Exhaustive => "exhaustive",
        }
    }
}

/// The certified max-norm bound `2^{pow2} · base^{exp}`, kept in factored
/// form. The exact integer can exceed millions of bits for the
/// rational-coefficient variant, so it is materialized only on demand.
#[derive(Clone, Debug)]
pub struct BoundFormula {
    pub pow2: u64,
    pub base: Int,
    pub exp: u64,
}

impl BoundFormula {
    /// Exact comparison `x ≤ 2^{pow2}·base^{exp}` with a bit-length shortcut.
    pub fn admits(&self, x: &Int) -> bool {
        if x.is_zero() || x.is_negative() {
            return true;
        }
        le_2pow_times_pow(x, self.pow2, &self.base, &Int::one(), self.exp)
    }

    /// Bit length of the bound, within one bit.
    pub fn bits_estimate(&self) -> u64 {
        self.pow2 + self.exp * int_bits(&self.base) + 1
    }

    /// Materializes the exact bound. Refuses when the result would be
    /// enormous (the factored form stays available).
    pub fn exact(&self) -> Option<Int> {
        if self.bits_estimate() > 1 << 22 {
            return None;
        }
        Some((Int::one() << self.pow2) * self.base.pow(self.exp as u32))
    }

    /// Decimal rendering when small enough, factored rendering otherwise.
    pub fn display(&self) -> String {
        match self.exact() {
            Some(v) if self.bits_estimate() <= 1 << 16 => v.to_string(),
            _ => format!("2^{}*{}^{}", self.pow2, self.base, self.exp),
        }
    }
}

/// Bound of the plain reduction: `2^{4d³}(N+1)^{d(d+2)}`.
pub fn reduce_bound(d: usize, n: &Int) -> BoundFormula {
    let d64 = d as u64;
    BoundFormula {
        pow2: 4 * d64 * d64 * d64,
        base: n + Int::one(),
        exp: d64 * (d64 + 2),
    }
}

/// Bound of the threshold variant: `2^{4(d+1)³}(N+1)^{(d+1)(d+3)}`.
pub fn threshold_bound(d: usize, n: &Int) -> BoundFormula {
    reduce_bound(d + 1, n)
}

/// Bound of the rational-coefficient variant: `2^{4d³}(r²+1)^{r·d(d+2)}`.
pub fn rational_bound(d: usize, r: &Int) -> Result<BoundFormula> {
    let d64 = d as u64;
    let exp_int = r * Int::from(d64 * (d64 + 2));
    let exp = exp_int.to_u64().ok_or_else(|| {
        Error::invalid_argument(format!("rational reduction level r = {r} is out of range"))
    })?;
    Ok(BoundFormula {
        pow2: 4 * d64 * d64 * d64,
        base: r * r + Int::one(),
        exp,
    })
}

/// Outcome metadata of one reduction: dimensions, the level used, the
/// certified bound, before/after encoding sizes, and the verification level
/// that gated the output.
#[derive(Clone, Debug)]
pub struct ReductionReport {
    pub d: usize,
    pub n_or_r: Int,
    pub alpha: Option<Int>,
    pub bound: BoundFormula,
    pub bits_in: u64,
    pub bits_out: u64,
    pub elapsed: Duration,
    pub verified: VerificationLevel,
}

fn ceil_div(a: u64, b: u64) -> u64 {
    a / b + u64::from(a % b != 0)
}

/// One peeling round: returns `(q, p)` with `|q·u_i − p_i| ≤ eps` exactly and
/// `q` within the denominator bound used by the norm analysis.
fn approximation_round(u: &[Rat], eps: &Rat) -> Result<(Int, Vec<Int>)> {
    let d = u.len();
    let d64 = d as u64;
    let head = ceil_div(d64 * (d64 + 1), 4);
    let eps2 = eps * &Rat::new(Int::one(), Int::from(2))?;

    // Exact clearing wins whenever the common denominator fits the bound.
    let q0 = lcm_denominators(u);
    if le_2pow_times_pow(&q0, head, eps2.denom(), eps2.numer(), d64) {
        let p = u.iter().map(|x| x.numer() * (&q0 / x.denom())).collect();
        return Ok((q0, p));
    }

    // Round to a power-of-two grid fine enough that the eps/2 guarantee on
    // the rounded vector implies the eps guarantee on the true vector.
    let t_bits = head + 1 + d64 + (d64 + 1) * int_bits(eps.denom());
    let grid = Int::one() << t_bits;
    let grid_rat = Rat::from(grid.clone());
    let rounded: Vec<Rat> = u
        .iter()
        .map(|x| Rat::new((x * &grid_rat).round(), grid.clone()))
        .collect::<Result<_>>()?;
    let (q, p) = simultaneous_approx(&rounded, &eps2)?;
    for (ui, pi) in u.iter().zip(&p) {
        let resid = &(&Rat::from(q.clone()) * ui) - &Rat::from(pi.clone());
        if resid.abs() > *eps {
            return Err(Error::internal(
                "rounded approximation missed the true vector",
            ));
        }
    }
    Ok((q, p))
}

fn nonzero_count(v: &[Rat]) -> usize {
    v.iter().filter(|x| !x.is_zero()).count()
}

/// The round recursion. `depth` guards termination (each round zeroes at
/// least one more coordinate).
fn peel(w: &[Rat], n: &Int, depth: usize) -> Result<Vec<Int>> {
    let d = w.len();
    if w.iter().all(|x| x.is_zero()) {
        return Ok(vec![Int::zero(); d]);
    }
    if depth > d + 1 {
        return Err(Error::internal("weight reduction failed to terminate"));
    }
    let scale = linf(w);
    let u: Vec<Rat> = w.iter().map(|x| x / &scale).collect();
    let eps = Rat::new(Int::one(), n + Int::one())?;
    let (q, p) = approximation_round(&u, &eps)?;

    let residual: Vec<Rat> = u
        .iter()
        .zip(&p)
        .map(|(ui, pi)| &(&Rat::from(q.clone()) * ui) - &Rat::from(pi.clone()))
        .collect();
    if nonzero_count(&residual) >= nonzero_count(w) {
        return Err(Error::internal(
            "peeling round did not shrink the support",
        ));
    }
    let rest = peel(&residual, n, depth + 1)?;
    let m = n * linf_int(&rest) + Int::one();
    Ok(p.iter().zip(&rest).map(|(pi, ri)| &m * pi + ri).collect())
}

fn verify_reduction(
    w: &[Rat],
    out: &[Int],
    spec_r: &Int,
    domain: CoeffDomain,
    bound: &BoundFormula,
) -> Result<VerificationLevel> {
    let out_rat: Vec<Rat> = out.iter().map(|x| Rat::from(x.clone())).collect();
    let report = check_sign_order(w, &out_rat, spec_r)?;
    if !report.passed() {
        return Err(Error::internal(format!(
            "reduction broke entry signs or pairwise order: {report:?}"
        )));
    }
    if !bound.admits(&linf_int(out)) {
        return Err(Error::internal("reduction exceeded the certified bound"));
    }
    let spec = ClassSpec::new(spec_r.clone(), domain, w.len())?;
    let small_enough = matches!(count_test_vectors(&spec), Ok(c) if c <= AUTO_VERIFY_CAP);
    if small_enough {
        if !same_class(w, &out_rat, &spec)? {
            return Err(Error::internal(
                "reduction left the equivalence class (exhaustive check)",
            ));
        }
        return Ok(VerificationLevel::Exhaustive);
    }
    Ok(VerificationLevel::SignOrder)
}

/// Computes an integer vector in the class of `w` at level `N` over the
/// integers, with `‖ŵ‖∞ ≤ 2^{4d³}(N+1)^{d(d+2)}`. Deterministic.
pub fn reduce(w: &[Rat], n: &Int) -> Result<(Vec<Int>, ReductionReport)> {
    if w.is_empty() {
        return Err(Error::invalid_argument("cannot reduce an empty vector"));
    }
    if n < &Int::one() {
        return Err(Error::invalid_argument("reduction level N must be ≥ 1"));
    }
    let start = Instant::now();
    let out = peel(w, n, 0)?;
    let bound = reduce_bound(w.len(), n);
    let verified = verify_reduction(w, &out, n, CoeffDomain::Integers, &bound)?;
    let report = ReductionReport {
        d: w.len(),
        n_or_r: n.clone(),
        alpha: None,
        bound,
        bits_in: vec_bits(w),
        bits_out: vec_bits_int(&out),
        elapsed: start.elapsed(),
        verified,
    };
    Ok((out, report))
}

/// Threshold variant: reduces the concatenation `w ∘ k` at level `N`, so that
/// `w·b ≤ k ⟺ ŵ·b ≤ k̂` for every integer `b` with `‖b‖₁ ≤ N−1`, with both
/// outputs bounded by `2^{4(d+1)³}(N+1)^{(d+1)(d+3)}`.
pub fn reduce_with_threshold(
    w: &[Rat],
    k: &Rat,
    n: &Int,
) -> Result<(Vec<Int>, Int, ReductionReport)> {
    if n < &Int::from(2) {
        return Err(Error::invalid_argument(
            "threshold reduction needs N ≥ 2 for a nonvacuous guarantee",
        ));
    }
    let mut joint = w.to_vec();
    joint.push(k.clone());
    let start = Instant::now();
    let out = peel(&joint, n, 0)?;
    let bound = threshold_bound(w.len(), n);
    let verified = verify_reduction(&joint, &out, n, CoeffDomain::Integers, &bound)?;
    let mut out = out;
    let k_hat = out.pop().expect("joint vector is nonempty");
    let report = ReductionReport {
        d: w.len(),
        n_or_r: n.clone(),
        alpha: None,
        bound,
        bits_in: vec_bits(&joint),
        bits_out: vec_bits_int(&out).max(int_bits(&k_hat)),
        elapsed: start.elapsed(),
        verified,
    };
    Ok((out, k_hat, report))
}

/// Rational-coefficient variant: a representative of the class of `w` at
/// level `r` over the rationals, obtained by reducing at integer level
/// `N = r!·r` (scaling any rational test with entries `±p/q`, `p,q ≤ r`, by
/// `r!` gives an integer test within that budget). The factorial is computed
/// exactly and is never enumerated over; the exhaustive gate enumerates the
/// rational tests at level `r` instead.
pub fn reduce_rational(w: &[Rat], r: &Int) -> Result<(Vec<Int>, ReductionReport)> {
    if w.is_empty() {
        return Err(Error::invalid_argument("cannot reduce an empty vector"));
    }
    if r < &Int::one() {
        return Err(Error::invalid_argument("reduction level r must be ≥ 1"));
    }
    let start = Instant::now();
    let n = factorial(r)? * r;
    let out = peel(w, &n, 0)?;
    let bound = rational_bound(w.len(), r)?;
    let verified = verify_reduction(w, &out, r, CoeffDomain::Rationals, &bound)?;
    let report = ReductionReport {
        d: w.len(),
        n_or_r: r.clone(),
        alpha: None,
        bound,
        bits_in: vec_bits(w),
        bits_out: vec_bits_int(&out),
        elapsed: start.elapsed(),
        verified,
    };
    Ok((out, report))
}

/// Independent reference search: the lexicographically smallest integer
/// vector of minimum max-norm in the class of `w` at level `N`, found by
/// growing-radius exhaustive search with the class check as the acceptance
/// predicate. Only feasible at toy sizes.
pub fn reduce_bruteforce(w: &[Rat], n: &Int) -> Result<Vec<Int>> {
    let d = w.len();
    if d == 0 || d > 4 {
        return Err(Error::invalid_argument(
            "brute-force reduction supports 1 ≤ d ≤ 4",
        ));
    }
    if n < &Int::one() || n > &Int::from(6) {
        return Err(Error::invalid_argument(
            "brute-force reduction supports 1 ≤ N ≤ 6",
        ));
    }
    let spec = ClassSpec::new(n.clone(), CoeffDomain::Integers, d)?;
    let mut enumerated: u64 = 0;
    for radius in 0i64.. {
        // full cube [-radius, radius]^d in lexicographic order; only vectors
        // on the boundary (max-norm exactly `radius`) are new at this radius
        let mut candidate = vec![-radius; d];
        'cube: loop {
            if candidate.iter().any(|x| x.abs() == radius) {
                enumerated += 1;
                if enumerated > ENUMERATION_CAP {
                    return Err(Error::CapExceeded(format!(
                        "brute-force reduction enumerated more than {ENUMERATION_CAP} candidates"
                    )));
                }
                let cand_rat: Vec<Rat> = candidate.iter().map(|&x| Rat::from(x)).collect();
                if same_class(w, &cand_rat, &spec)? {
                    return Ok(candidate.iter().map(|&x| Int::from(x)).collect());
                }
            }
            let mut i = d;
            while i > 0 {
                i -= 1;
                if candidate[i] < radius {
                    candidate[i] += 1;
                    for x in candidate.iter_mut().skip(i + 1) {
                        *x = -radius;
                    }
                    continue 'cube;
                }
            }
            break 'cube;
        }
    }
    unreachable!("growing-radius search only ends by return or error")
}
