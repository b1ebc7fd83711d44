//! Exact-rational LLL basis reduction and simultaneous Diophantine
//! approximation.
//!
//! This is the computational engine behind weight reduction. All
//! Gram–Schmidt arithmetic is done in exact rationals; there is no
//! floating-point pre-pass, because the downstream guarantee is a hard
//! sign-preservation contract with no tolerance budget. The reduction loop is
//! the deterministic swap-based textbook algorithm, so identical inputs give
//! identical outputs.

use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};

use crate::numeric::{dot_ii, int_bits, lcm_denominators, Int, Rat};
use crate::{Error, Result};

/// A list of linearly independent integer row vectors spanning a lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBasis {
    rows: Vec<Vec<Int>>,
    dim: usize,
}

impl LatticeBasis {
    /// Validates shape and exact linear independence (via Gram–Schmidt).
    pub fn new(rows: Vec<Vec<Int>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid_argument("empty lattice basis"));
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::invalid_argument("zero-dimensional lattice basis"));
        }
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch(
                "lattice basis rows have unequal lengths".into(),
            ));
        }
        if rows.len() > dim {
            return Err(Error::invalid_argument(
                "more rows than the ambient dimension: rows are dependent",
            ));
        }
        let basis = LatticeBasis { rows, dim };
        gram_schmidt(&basis.rows)?;
        Ok(basis)
    }

    pub fn rows(&self) -> &[Vec<Int>] {
        &self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }
}

fn dot_ir(u: &[Int], v: &[Rat]) -> Rat {
    let mut acc = Rat::zero();
    for (a, b) in u.iter().zip(v) {
        acc = &acc + &(&Rat::from(a.clone()) * b);
    }
    acc
}

fn dot_rr(u: &[Rat], v: &[Rat]) -> Rat {
    let mut acc = Rat::zero();
    for (a, b) in u.iter().zip(v) {
        acc = &acc + &(a * b);
    }
    acc
}

/// From-scratch exact Gram–Schmidt orthogonalization.
///
/// Returns the μ coefficients (lower triangular) and the squared norms of the
/// orthogonalized vectors. Errors if the rows are linearly dependent. This
/// routine is deliberately independent of the incremental bookkeeping inside
/// [`lll_reduce`], so it can serve as the predicate checker for reducedness.
pub fn gram_schmidt(rows: &[Vec<Int>]) -> Result<(Vec<Vec<Rat>>, Vec<Rat>)> {
    let n = rows.len();
    let mut star: Vec<Vec<Rat>> = Vec::with_capacity(n);
    let mut mu = vec![vec![Rat::zero(); n]; n];
    let mut norms = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        let mut v: Vec<Rat> = row.iter().map(|x| Rat::from(x.clone())).collect();
        for j in 0..i {
            let m = &dot_ir(row, &star[j]) / &norms[j];
            for (vk, sk) in v.iter_mut().zip(&star[j]) {
                *vk = &*vk - &(&m * sk);
            }
            mu[i][j] = m;
        }
        let norm = dot_rr(&v, &v);
        if norm.is_zero() {
            return Err(Error::invalid_argument(format!(
                "lattice basis rows are linearly dependent (row {i})"
            )));
        }
        norms.push(norm);
        star.push(v);
    }
    Ok((mu, norms))
}

/// Checks `|μ_{i,j}| ≤ 1/2` for all `j < i` on exact Gram–Schmidt data.
pub fn is_size_reduced(basis: &LatticeBasis) -> Result<bool> {
    let (mu, _) = gram_schmidt(&basis.rows)?;
    let half = Rat::new(Int::one(), Int::from(2))?;
    for i in 0..basis.rank() {
        for j in 0..i {
            if mu[i][j].abs() > half {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Checks the Lovász condition `‖b*_i‖² ≥ (δ − μ²_{i,i-1})·‖b*_{i-1}‖²`.
pub fn satisfies_lovasz(basis: &LatticeBasis, delta: &Rat) -> Result<bool> {
    let (mu, norms) = gram_schmidt(&basis.rows)?;
    for i in 1..basis.rank() {
        let m = &mu[i][i - 1];
        let needed = &(delta - &(m * m)) * &norms[i - 1];
        if norms[i] < needed {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Solves `x · A = target` exactly over the rationals, where the rows of `A`
/// are linearly independent. Returns `None` when the target lies outside the
/// row space.
pub fn solve_in_row_space(basis: &LatticeBasis, target: &[Int]) -> Result<Option<Vec<Rat>>> {
    if target.len() != basis.dim() {
        return Err(Error::DimensionMismatch(
            "solve target has wrong dimension".into(),
        ));
    }
    let r = basis.rank();
    // Normal equations on the Gram matrix: (A Aᵀ) y = A t.
    let mut m = vec![vec![Rat::zero(); r + 1]; r];
    for i in 0..r {
        for j in 0..r {
            m[i][j] = Rat::from(dot_ii(&basis.rows[i], &basis.rows[j])?);
        }
        m[i][r] = Rat::from(dot_ii(&basis.rows[i], target)?);
    }
    let x = gauss_solve(&mut m)?;
    // Verify x · A == target exactly; the Gram matrix is invertible, but the
    // target may still be outside the row space.
    for c in 0..basis.dim() {
        let mut acc = Rat::zero();
        for (xi, row) in x.iter().zip(&basis.rows) {
            acc = &acc + &(xi * &Rat::from(row[c].clone()));
        }
        if acc != Rat::from(target[c].clone()) {
            return Ok(None);
        }
    }
    Ok(Some(x))
}

fn gauss_solve(m: &mut [Vec<Rat>]) -> Result<Vec<Rat>> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&i| !m[i][col].is_zero())
            .ok_or_else(|| Error::internal("singular Gram matrix in exact solve"))?;
        m.swap(col, pivot);
        let inv = m[col][col].recip()?;
        for j in col..=n {
            m[col][j] = &m[col][j] * &inv;
        }
        for i in 0..n {
            if i != col && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for j in col..=n {
                    m[i][j] = &m[i][j] - &(&f * &m[col][j]);
                }
            }
        }
    }
    Ok(m.iter().map(|row| row[n].clone()).collect())
}

/// True iff `a` and `b` generate the same lattice, decided by exact solves:
/// every row of each basis must be an integer combination of the other.
pub fn spans_same_lattice(a: &LatticeBasis, b: &LatticeBasis) -> Result<bool> {
    if a.dim() != b.dim() || a.rank() != b.rank() {
        return Ok(false);
    }
    let integral_combo = |from: &LatticeBasis, row: &[Int]| -> Result<bool> {
        match solve_in_row_space(from, row)? {
            None => Ok(false),
            Some(x) => Ok(x.iter().all(|c| c.is_integer())),
        }
    };
    for row in b.rows() {
        if !integral_combo(a, row)? {
            return Ok(false);
        }
    }
    for row in a.rows() {
        if !integral_combo(b, row)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Swap-based LLL reduction with Lovász parameter `delta` (exact rational,
/// `1/4 < delta < 1`).
///
/// The output spans the same lattice, is size-reduced, and satisfies the
/// Lovász condition, all of which [`is_size_reduced`], [`satisfies_lovasz`],
/// and [`spans_same_lattice`] verify independently.
pub fn lll_reduce(basis: &LatticeBasis, delta: &Rat) -> Result<LatticeBasis> {
    let quarter = Rat::new(Int::one(), Int::from(4))?;
    if !(delta > &quarter && delta < &Rat::one()) {
        return Err(Error::invalid_argument(
            "LLL delta must satisfy 1/4 < delta < 1",
        ));
    }
    let n = basis.rank();
    let mut b = basis.rows.to_vec();
    let mut mu = vec![vec![Rat::zero(); n]; n];
    let mut norm = vec![Rat::zero(); n];
    let half = Rat::new(Int::one(), Int::from(2))?;

    // Lazily extends the Gram–Schmidt data to row k using the recurrence
    // ⟨b_k, b*_j⟩ = ⟨b_k, b_j⟩ − Σ_{i<j} μ_{j,i} μ_{k,i} ‖b*_i‖².
    let gso_extend = |b: &[Vec<Int>],
                      mu: &mut [Vec<Rat>],
                      norm: &mut [Rat],
                      k: usize|
     -> Result<()> {
        for j in 0..k {
            let mut s = Rat::from(dot_ii(&b[k], &b[j])?);
            for i in 0..j {
                let mji_mki = &mu[j][i] * &mu[k][i];
                s = &s - &(&mji_mki * &norm[i]);
            }
            mu[k][j] = &s / &norm[j];
        }
        let mut s = Rat::from(dot_ii(&b[k], &b[k])?);
        for j in 0..k {
            let sq = &mu[k][j] * &mu[k][j];
            s = &s - &(&sq * &norm[j]);
        }
        if s.is_zero() || s.sgn() < 0 {
            return Err(Error::invalid_argument(format!(
                "lattice basis rows are linearly dependent (row {k})"
            )));
        }
        norm[k] = s;
        Ok(())
    };

    if n > 0 {
        norm[0] = Rat::from(dot_ii(&b[0], &b[0])?);
        if norm[0].is_zero() {
            return Err(Error::invalid_argument(
                "lattice basis rows are linearly dependent (row 0)",
            ));
        }
    }

    let mut k = 1usize;
    let mut kmax = 0usize;
    while k < n {
        if k > kmax {
            kmax = k;
            gso_extend(&b, &mut mu, &mut norm, k)?;
        }
        // RED(k, k-1)
        red(&mut b, &mut mu, &half, k, k - 1);
        let m = mu[k][k - 1].clone();
        let needed = &(delta - &(&m * &m)) * &norm[k - 1];
        if norm[k] < needed {
            swap_step(&mut b, &mut mu, &mut norm, k, kmax);
            k = if k > 1 { k - 1 } else { 1 };
        } else {
            for l in (0..k.saturating_sub(1)).rev() {
                red(&mut b, &mut mu, &half, k, l);
            }
            k += 1;
        }
    }
    Ok(LatticeBasis {
        rows: b,
        dim: basis.dim,
    })
}

fn red(b: &mut [Vec<Int>], mu: &mut [Vec<Rat>], half: &Rat, k: usize, l: usize) {
    if mu[k][l].abs() <= *half {
        return;
    }
    let q = mu[k][l].round();
    let (bk, bl) = split_rows(b, k, l);
    for (x, y) in bk.iter_mut().zip(bl.iter()) {
        *x -= &q * y;
    }
    let qr = Rat::from(q);
    mu[k][l] = &mu[k][l] - &qr;
    for i in 0..l {
        let adj = &qr * &mu[l][i];
        mu[k][i] = &mu[k][i] - &adj;
    }
}

// Standard exchange step: swap rows k-1 and k and patch μ and the squared
// norms in place.
fn swap_step(b: &mut [Vec<Int>], mu: &mut [Vec<Rat>], norm: &mut [Rat], k: usize, kmax: usize) {
    b.swap(k - 1, k);
    for j in 0..k.saturating_sub(1) {
        let tmp = mu[k][j].clone();
        mu[k][j] = mu[k - 1][j].clone();
        mu[k - 1][j] = tmp;
    }
    let m = mu[k][k - 1].clone();
    let bb = &norm[k] + &(&(&m * &m) * &norm[k - 1]);
    mu[k][k - 1] = &(&m * &norm[k - 1]) / &bb;
    norm[k] = &(&norm[k - 1] * &norm[k]) / &bb;
    norm[k - 1] = bb;
    for i in (k + 1)..=kmax {
        let t = mu[i][k].clone();
        mu[i][k] = &mu[i][k - 1] - &(&m * &t);
        mu[i][k - 1] = &t + &(&mu[k][k - 1] * &mu[i][k]);
    }
}

fn split_rows<'a>(b: &'a mut [Vec<Int>], k: usize, l: usize) -> (&'a mut Vec<Int>, &'a Vec<Int>) {
    assert!(l < k);
    let (lo, hi) = b.split_at_mut(k);
    (&mut hi[0], &lo[l])
}

/// Exact comparison `x ≤ 2^pow2 · (num/den)^exp` for positive quantities,
/// with a bit-length shortcut so astronomically lopsided comparisons never
/// materialize the right-hand side.
pub(crate) fn le_2pow_times_pow(x: &Int, pow2: u64, num: &Int, den: &Int, exp: u64) -> bool {
    debug_assert!(x.is_positive() && num.is_positive() && den.is_positive());
    let bx = int_bits(x);
    let bn = int_bits(num);
    let bd = int_bits(den);
    // x·den^exp < 2^{bx + exp·bd} and 2^pow2·num^exp ≥ 2^{pow2 + exp·(bn−1)}.
    if bx + exp * bd <= pow2 + exp * (bn - 1) {
        return true;
    }
    // x·den^exp ≥ 2^{bx−1+exp·(bd−1)} and 2^pow2·num^exp < 2^{pow2 + exp·bn}.
    if bx - 1 + exp * (bd - 1) >= pow2 + exp * bn {
        return false;
    }
    let lhs = x * den.pow(exp as u32);
    let rhs = (Int::one() << pow2) * num.pow(exp as u32);
    lhs <= rhs
}

/// The denominator bound `2^{d(d+3)/4} · eps^{-d}` from the approximation
/// contract, checked exactly as `q⁴ ≤ 2^{d(d+3)} · eps^{-4d}`.
pub fn approx_denominator_within_bound(q: &Int, d: usize, eps: &Rat) -> bool {
    let d64 = d as u64;
    let q4 = q.pow(4);
    le_2pow_times_pow(&q4, d64 * (d64 + 3), eps.denom(), eps.numer(), 4 * d64)
}

/// Simultaneous Diophantine approximation: finds `q ≥ 1` and `p ∈ Z^d` with
/// `|q·w_i − p_i| ≤ eps` for all `i` and `q ≤ 2^{d(d+3)/4}·eps^{-d}`.
///
/// Requires `0 < eps < 1` and `|w_i| ≤ 1`. Both postconditions are verified
/// exactly before returning. When the common denominator of `w` is already
/// within the bound the exact clearing `(lcm, lcm·w)` is returned directly;
/// otherwise the classical LLL construction runs on the `(d+1)`-dimensional
/// lattice with last row `(w, δ)`.
pub fn simultaneous_approx(w: &[Rat], eps: &Rat) -> Result<(Int, Vec<Int>)> {
    if !(eps.sgn() > 0 && eps < &Rat::one()) {
        return Err(Error::invalid_argument(
            "approximation quality eps must satisfy 0 < eps < 1",
        ));
    }
    if w.iter().any(|x| x.abs() > Rat::one()) {
        return Err(Error::invalid_argument(
            "simultaneous approximation requires |w_i| <= 1",
        ));
    }
    let d = w.len();
    if d == 0 || w.iter().all(|x| x.is_zero()) {
        return Ok((Int::one(), vec![Int::zero(); d]));
    }
    let d64 = d as u64;
    let head = d64 * (d64 + 1) / 4 + u64::from(d64 * (d64 + 1) % 4 != 0);

    // Exact fast path: with q = lcm of the denominators, p = q·w has error 0.
    let q0 = lcm_denominators(w);
    if le_2pow_times_pow(&q0, head, eps.denom(), eps.numer(), d64) {
        let p = w.iter().map(|x| x.numer() * (&q0 / x.denom())).collect();
        return Ok((q0, p));
    }

    // Lattice construction: δ = eps^{d+1} / 2^head, so a reduced first basis
    // vector has norm at most 2^{d/4}·δ^{1/(d+1)} ≤ eps.
    let delta_lat = {
        let num = eps.numer().pow(d as u32 + 1);
        let den = eps.denom().pow(d as u32 + 1) << head;
        Rat::new(num, den)?
    };
    let scale = lcm_denominators(w).lcm(delta_lat.denom());
    let scaled_w: Vec<Int> = w.iter().map(|x| x.numer() * (&scale / x.denom())).collect();
    let scaled_delta = delta_lat.numer() * (&scale / delta_lat.denom());

    let mut rows = Vec::with_capacity(d + 1);
    for i in 0..d {
        let mut row = vec![Int::zero(); d + 1];
        row[i] = scale.clone();
        rows.push(row);
    }
    let mut last: Vec<Int> = scaled_w.clone();
    last.push(scaled_delta.clone());
    rows.push(last);

    let reduced = lll_reduce(&LatticeBasis::new(rows)?, &Rat::new(Int::from(3), Int::from(4))?)?;

    for row in reduced.rows() {
        let (q_num, q_rem) = num_integer::Integer::div_rem(&row[d], &scaled_delta);
        if !q_rem.is_zero() {
            return Err(Error::internal(
                "lattice vector with non-integral approximation denominator",
            ));
        }
        if q_num.is_zero() {
            continue;
        }
        let flip = q_num.is_negative();
        let q = if flip { -q_num } else { q_num };
        let mut p = Vec::with_capacity(d);
        let mut ok = true;
        for i in 0..d {
            let ci = if flip { -&row[i] } else { row[i].clone() };
            let (pi, rem) = num_integer::Integer::div_rem(&(&q * &scaled_w[i] - &ci), &scale);
            if !rem.is_zero() {
                ok = false;
                break;
            }
            // exact residual check: |q·w_i − p_i| ≤ eps
            let resid = &(&Rat::from(q.clone()) * &w[i]) - &Rat::from(pi.clone());
            if resid.abs() > *eps {
                ok = false;
                break;
            }
            p.push(pi);
        }
        if ok && approx_denominator_within_bound(&q, d, eps) {
            return Ok((q, p));
        }
    }
    Err(Error::internal(
        "no lattice vector satisfied the approximation contract",
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::linf_int;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(Int::from(n), Int::from(d)).unwrap()
    }

    fn basis(rows: &[&[i64]]) -> LatticeBasis {
        LatticeBasis::new(
            rows.iter()
                .map(|r| r.iter().map(|&x| Int::from(x)).collect())
                .collect(),
        )
        .unwrap()
    }

    fn delta34() -> Rat {
        rat(3, 4)
    }

    #[test]
    fn identity_basis_is_already_reduced() {
        let id = basis(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let out = lll_reduce(&id, &delta34()).unwrap();
        assert_eq!(out, id);
        assert!(is_size_reduced(&out).unwrap());
        assert!(satisfies_lovasz(&out, &delta34()).unwrap());
    }

    #[test]
    fn skewed_basis_gets_size_reduced() {
        let m = 1_000_000_007i64;
        let b = basis(&[&[1, 0], &[m, 1]]);
        let out = lll_reduce(&b, &delta34()).unwrap();
        assert!(is_size_reduced(&out).unwrap());
        assert!(satisfies_lovasz(&out, &delta34()).unwrap());
        assert!(spans_same_lattice(&b, &out).unwrap());
    }

    #[test]
    fn dependent_rows_are_rejected() {
        let rows = vec![
            vec![Int::from(1), Int::from(2)],
            vec![Int::from(2), Int::from(4)],
        ];
        assert!(LatticeBasis::new(rows).is_err());
    }

    #[test]
    fn random_bases_reduce_and_preserve_lattice() {
        // deterministic pseudo-random small bases
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 41) as i64 - 20
        };
        let mut tested = 0;
        while tested < 25 {
            let n = 2 + (next().unsigned_abs() as usize % 3);
            let rows: Vec<Vec<Int>> = (0..n)
                .map(|_| (0..n).map(|_| Int::from(next())).collect())
                .collect();
            let Ok(b) = LatticeBasis::new(rows) else {
                continue;
            };
            tested += 1;
            let out = lll_reduce(&b, &delta34()).unwrap();
            assert!(is_size_reduced(&out).unwrap());
            assert!(satisfies_lovasz(&out, &delta34()).unwrap());
            assert!(spans_same_lattice(&b, &out).unwrap());
        }
    }

    #[test]
    fn sda_half_matches_exhaustive_search() {
        let (q, p) = simultaneous_approx(&[rat(1, 2)], &rat(1, 4)).unwrap();
        assert_eq!(q, Int::from(2));
        assert_eq!(p, vec![Int::from(1)]);
        // exhaustive oracle over q up to the bound 2^{1·4/4}·4 = 8
        let mut best = None;
        'outer: for qq in 1..=8i64 {
            for pp in -qq..=qq {
                // |q·(1/2) − p| ≤ 1/4  ⇔  |2q − 4p| ≤ 1  with exact ints
                if (2 * qq - 4 * pp).abs() <= 1 {
                    best = Some((qq, pp));
                    break 'outer;
                }
            }
        }
        let (bq, _) = best.unwrap();
        assert_eq!(bq, 2); // minimal contract-satisfying denominator
    }

    #[test]
    fn sda_zero_vector() {
        let (q, p) = simultaneous_approx(&[Rat::zero(), Rat::zero()], &rat(1, 5)).unwrap();
        assert_eq!(q, Int::one());
        assert!(p.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn sda_thirds_verified_against_bruteforce() {
        let w = [rat(2, 3), rat(1, 3)];
        let eps = rat(1, 6);
        let (q, p) = simultaneous_approx(&w, &eps).unwrap();
        for (wi, pi) in w.iter().zip(&p) {
            let resid = &(&Rat::from(q.clone()) * wi) - &Rat::from(pi.clone());
            assert!(resid.abs() <= eps);
        }
        assert!(approx_denominator_within_bound(&q, 2, &eps));
        // brute force: smallest valid q is 3 (exact thirds)
        let mut min_q = None;
        'outer: for qq in 1..=200i64 {
            for p0 in -qq..=qq {
                for p1 in -qq..=qq {
                    let ok0 = (&(&Rat::from(qq) * &w[0]) - &Rat::from(p0)).abs() <= eps;
                    let ok1 = (&(&Rat::from(qq) * &w[1]) - &Rat::from(p1)).abs() <= eps;
                    if ok0 && ok1 {
                        min_q = Some(qq);
                        break 'outer;
                    }
                }
            }
        }
        assert_eq!(min_q, Some(3));
        assert!(q >= Int::from(3));
    }

    #[test]
    fn sda_eps_out_of_range() {
        assert!(simultaneous_approx(&[rat(1, 2)], &Rat::one()).is_err());
        assert!(simultaneous_approx(&[rat(1, 2)], &Rat::zero()).is_err());
    }

    #[test]
    fn sda_contract_on_random_rationals() {
        // spec-level property at small scale; the full 1000-case run lives in
        // the integration suite
        let mut state = 0xdeadbeefcafef00du64;
        let mut next = move |m: u64| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state % m
        };
        for _ in 0..100 {
            let d = 1 + (next(4) as usize);
            let w: Vec<Rat> = (0..d)
                .map(|_| {
                    let den = 1 + next(1 << 20) as i64;
                    let num = next(2 * den as u64 + 1) as i64 - den;
                    rat(num, den)
                })
                .collect();
            let eps = rat(1, 2 + next(9) as i64);
            let (q, p) = simultaneous_approx(&w, &eps).unwrap();
            assert!(q >= Int::one());
            assert!(approx_denominator_within_bound(&q, d, &eps));
            for (wi, pi) in w.iter().zip(&p) {
                let resid = &(&Rat::from(q.clone()) * wi) - &Rat::from(pi.clone());
                assert!(resid.abs() <= eps);
            }
            assert!(linf_int(&p) <= &q + Int::one());
        }
    }
}
