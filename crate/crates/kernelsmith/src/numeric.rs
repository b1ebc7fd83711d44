//! Arbitrary-precision integers and exact rationals.
//!
//! Every weight, threshold, norm, and intermediate quantity in this crate is
//! an [`Int`] or a [`Rat`]. Rationals are kept canonical at all times:
//! positive denominator, numerator and denominator coprime, and zero stored
//! as `0/1`. That makes equality and sign checks O(1) on the stored form.
//!
//! Rationals serialize as decimal strings `"p/q"`, with the `/q` suffix
//! omitted when `q = 1` and the sign carried by the numerator only.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Arbitrary-precision signed integer.
pub type Int = BigInt;

/// Exact rational number, always stored in lowest terms with a positive
/// denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rat(BigRational);

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    /// Builds `num/den`, normalizing to canonical form. `den` must be nonzero.
    pub fn new(num: Int, den: Int) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::invalid_argument("rational with zero denominator"));
        }
        Ok(Rat(BigRational::new(num, den)))
    }

    pub fn from_int(n: impl Into<Int>) -> Self {
        Rat(BigRational::from_integer(n.into()))
    }

    pub fn numer(&self) -> &Int {
        self.0.numer()
    }

    pub fn denom(&self) -> &Int {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// True rounding to the nearest integer, ties away from zero.
    pub fn round(&self) -> Int {
        self.0.round().to_integer()
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    pub fn recip(&self) -> Result<Rat> {
        if self.is_zero() {
            return Err(Error::invalid_argument("reciprocal of zero"));
        }
        Ok(Rat(self.0.recip()))
    }

    /// The sign as defined for the sign-preservation contract:
    /// `+1` for positive, `0` for zero, `-1` for negative.
    pub fn sgn(&self) -> i8 {
        match self.0.numer().sign() {
            num_bigint::Sign::Plus => 1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Minus => -1,
        }
    }
}

impl From<Int> for Rat {
    fn from(n: Int) -> Self {
        Rat(BigRational::from_integer(n))
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat(BigRational::from_integer(Int::from(n)))
    }
}

macro_rules! rat_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat((&self.0).$method(&rhs.0))
            }
        }
        impl $trait for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat(self.0.$method(rhs.0))
            }
        }
    };
}

rat_binop!(Add, add);
rat_binop!(Sub, sub);
rat_binop!(Mul, mul);

impl Div for &Rat {
    type Output = Rat;
    fn div(self, rhs: &Rat) -> Rat {
        assert!(!rhs.is_zero(), "division by zero rational");
        Rat(&self.0 / &rhs.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse_int = |t: &str| -> Result<Int> {
            Int::from_str(t).map_err(|_| Error::Parse(format!("invalid integer literal '{t}'")))
        };
        match s.split_once('/') {
            None => Ok(Rat::from(parse_int(s)?)),
            Some((num, den)) => {
                if den.starts_with('-') || den.starts_with('+') {
                    return Err(Error::Parse(format!(
                        "sign must be on the numerator only in '{s}'"
                    )));
                }
                let d = parse_int(den)?;
                if d.is_zero() {
                    return Err(Error::Parse(format!("zero denominator in '{s}'")));
                }
                Rat::new(parse_int(num)?, d)
            }
        }
    }
}

/// Sign of an integer as `-1 | 0 | +1`.
pub fn int_sgn(n: &Int) -> i8 {
    match n.sign() {
        num_bigint::Sign::Plus => 1,
        num_bigint::Sign::NoSign => 0,
        num_bigint::Sign::Minus => -1,
    }
}

/// Exact inner product of two equal-length rational vectors.
pub fn dot(u: &[Rat], v: &[Rat]) -> Result<Rat> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "dot product of vectors with lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    let mut acc = BigRational::zero();
    for (a, b) in u.iter().zip(v) {
        acc += &a.0 * &b.0;
    }
    Ok(Rat(acc))
}

/// Exact inner product of an integer vector with a rational vector.
pub fn dot_int(u: &[Int], v: &[Rat]) -> Result<Rat> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "dot product of vectors with lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    let mut acc = BigRational::zero();
    for (a, b) in u.iter().zip(v) {
        acc += BigRational::from_integer(a.clone()) * &b.0;
    }
    Ok(Rat(acc))
}

/// Exact inner product of two integer vectors.
pub fn dot_ii(u: &[Int], v: &[Int]) -> Result<Int> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "dot product of vectors with lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    let mut acc = Int::zero();
    for (a, b) in u.iter().zip(v) {
        acc += a * b;
    }
    Ok(acc)
}

/// ℓ₁ norm: sum of absolute values.
pub fn l1(v: &[Rat]) -> Rat {
    let mut acc = BigRational::zero();
    for x in v {
        acc += x.0.abs();
    }
    Rat(acc)
}

/// ℓ∞ norm: maximum absolute value (zero for the empty vector).
pub fn linf(v: &[Rat]) -> Rat {
    let mut best = BigRational::zero();
    for x in v {
        let a = x.0.abs();
        if a > best {
            best = a;
        }
    }
    Rat(best)
}

/// ℓ∞ norm of an integer vector.
pub fn linf_int(v: &[Int]) -> Int {
    let mut best = Int::zero();
    for x in v {
        let a = x.abs();
        if a > best {
            best = a;
        }
    }
    best
}

/// Compare two rationals; total order consistent with the real numbers.
pub fn rat_cmp(a: &Rat, b: &Rat) -> Ordering {
    a.0.cmp(&b.0)
}

/// Least common multiple of the denominators of `v` (1 for the empty vector).
pub fn lcm_denominators(v: &[Rat]) -> Int {
    let mut acc = Int::one();
    for x in v {
        acc = acc.lcm(x.denom());
    }
    acc
}

/// Clears denominators: returns `s · v` as integers, where `s` is the lcm of
/// the denominators. Positive scaling, so every sign test on `v` has the same
/// outcome on the result.
pub fn clear_denominators(v: &[Rat]) -> (Vec<Int>, Int) {
    let s = lcm_denominators(v);
    let scaled = v
        .iter()
        .map(|x| x.numer() * (&s / x.denom()))
        .collect();
    (scaled, s)
}

/// Bit length of the magnitude (0 for zero).
pub fn int_bits(n: &Int) -> u64 {
    n.bits()
}

/// Encoding-size proxy for a rational: max of numerator and denominator bits.
pub fn rat_bits(r: &Rat) -> u64 {
    r.numer().bits().max(r.denom().bits())
}

/// Max entry bit length over a rational vector.
pub fn vec_bits(v: &[Rat]) -> u64 {
    v.iter().map(rat_bits).max().unwrap_or(0)
}

/// Max entry bit length over an integer vector.
pub fn vec_bits_int(v: &[Int]) -> u64 {
    v.iter().map(int_bits).max().unwrap_or(0)
}

/// `n!` as a big integer.
pub fn factorial(n: &Int) -> Result<Int> {
    if n.is_negative() {
        return Err(Error::invalid_argument("factorial of a negative number"));
    }
    let mut acc = Int::one();
    let mut i = Int::one();
    while &i <= n {
        acc *= &i;
        i += 1;
    }
    Ok(acc)
}

/// Parses a whole vector of `"p/q"` strings.
pub fn parse_rat_vec(items: &[String]) -> Result<Vec<Rat>> {
    items.iter().map(|s| s.parse()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(Int::from(n), Int::from(d)).unwrap()
    }

    #[test]
    fn add_and_canonical_form() {
        assert_eq!(&r(1, 2) + &r(1, 3), r(5, 6));
        assert_eq!(r(2, 4), r(1, 2));
        assert_eq!(r(2, 4).denom(), &Int::from(2));
        // zero is stored as 0/1
        let z = &r(3, 7) - &r(3, 7);
        assert!(z.is_zero());
        assert_eq!(z.denom(), &Int::one());
    }

    #[test]
    fn zero_absorbs_products() {
        for x in [r(7, 3), r(-19, 4), Rat::zero()] {
            assert!((&Rat::zero() * &x).is_zero());
        }
    }

    #[test]
    fn cmp_is_value_based() {
        assert_eq!(rat_cmp(&r(2, 4), &r(1, 2)), Ordering::Equal);
        assert_eq!(rat_cmp(&r(-1, 2), &r(1, 3)), Ordering::Less);
    }

    #[test]
    fn signum_matches_definition() {
        assert_eq!(r(3, 7).sgn(), 1);
        assert_eq!(Rat::zero().sgn(), 0);
        assert_eq!(r(-5, 2).sgn(), -1);
    }

    #[test]
    fn dot_examples() {
        // incidence-count example: two weight/count vectors
        let u: Vec<Rat> = [3, 8, 7, 1, 2, 10].iter().map(|&x| Rat::from(x)).collect();
        let v: Vec<Rat> = [2, 0, 0, 1, 1, 0].iter().map(|&x| Rat::from(x)).collect();
        assert_eq!(dot(&u, &v).unwrap(), Rat::from(9));

        let zeros = vec![Rat::zero(); 6];
        assert!(dot(&u, &zeros).unwrap().is_zero());

        let a = vec![Rat::from(1), Rat::from(-1)];
        let b = vec![Rat::from(1), Rat::from(1)];
        assert!(dot(&a, &b).unwrap().is_zero());

        assert!(dot(&u, &a).is_err());
    }

    #[test]
    fn norms() {
        let v: Vec<Rat> = [3, -8, 7].iter().map(|&x| Rat::from(x)).collect();
        assert_eq!(l1(&v), Rat::from(18));
        assert_eq!(linf(&v), Rat::from(8));
        assert!(l1(&[]).is_zero());
        assert!(linf(&[]).is_zero());
        assert_eq!(l1(&[r(1, 2), r(1, 3)]), r(5, 6));
    }

    #[test]
    fn exact_at_4096_bits() {
        let big = Int::one() << 4096u32;
        let a = Rat::from(&big + 1);
        let b = Rat::from(&big - 1);
        assert_eq!(&a + &b, Rat::from(&big << 1u32));
        assert_eq!(&a * &b, Rat::from(&big * &big - 1));
        let q = Rat::new(Int::one(), big.clone()).unwrap();
        assert_eq!(&(&a * &q) - &q, Rat::one());
    }

    #[test]
    fn serialization_contract() {
        assert_eq!(r(-3, 4).to_string(), "-3/4");
        assert_eq!(r(5, 1).to_string(), "5");
        assert_eq!("7/21".parse::<Rat>().unwrap(), r(1, 3));
        assert_eq!("-9".parse::<Rat>().unwrap(), Rat::from(-9));
        assert!("1/-2".parse::<Rat>().is_err());
        assert!("1/0".parse::<Rat>().is_err());
        assert!("a/b".parse::<Rat>().is_err());
    }

    #[test]
    fn clear_denominators_is_positive_scaling() {
        let v = vec![r(1, 2), r(-2, 3), Rat::from(4)];
        let (ints, s) = clear_denominators(&v);
        assert_eq!(s, Int::from(6));
        assert_eq!(ints, vec![Int::from(3), Int::from(-4), Int::from(24)]);
    }

    #[test]
    fn factorial_small() {
        assert_eq!(factorial(&Int::from(0)).unwrap(), Int::one());
        assert_eq!(factorial(&Int::from(5)).unwrap(), Int::from(120));
    }

    fn arb_rat() -> impl Strategy<Value = Rat> {
        (any::<i64>(), 1i64..=1_000_000).prop_map(|(n, d)| r(n, d))
    }

    proptest! {
        #[test]
        fn add_commutes(a in arb_rat(), b in arb_rat()) {
            prop_assert_eq!(&a + &b, &b + &a);
        }

        #[test]
        fn mul_associates(a in arb_rat(), b in arb_rat(), c in arb_rat()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        }

        #[test]
        fn results_in_lowest_terms(a in arb_rat(), b in arb_rat()) {
            let s = &a + &b;
            prop_assert!(s.denom() > &Int::zero());
            prop_assert!(s.numer().gcd(s.denom()).is_one());
        }

        #[test]
        fn signum_is_multiplicative(a in arb_rat(), b in arb_rat()) {
            prop_assert_eq!((&a * &b).sgn(), a.sgn() * b.sgn());
        }

        #[test]
        fn dot_is_bilinear(
            u in proptest::collection::vec(arb_rat(), 3),
            v in proptest::collection::vec(arb_rat(), 3),
            w in proptest::collection::vec(arb_rat(), 3),
        ) {
            let vw: Vec<Rat> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
            let lhs = dot(&u, &vw).unwrap();
            let rhs = &dot(&u, &v).unwrap() + &dot(&u, &w).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn display_parse_roundtrip(a in arb_rat()) {
            let s = a.to_string();
            prop_assert_eq!(s.parse::<Rat>().unwrap(), a);
        }
    }
}
