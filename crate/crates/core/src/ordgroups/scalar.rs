//! Exact real numbers of the form `a + b*sqrt(d)` with rational `a`, `b`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `rat + irr * sqrt(radicand)`. When `irr` is zero the radicand is
/// normalised to 0 so that rationals have a single representation.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Scalar {
    rat: BigRational,
    irr: BigRational,
    radicand: u64,
}

impl Scalar {
    pub fn zero() -> Self {
        Self::from_rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Scalar { rat: r, irr: BigRational::zero(), radicand: 0 }
    }

    pub fn quadratic(rat: BigRational, irr: BigRational, radicand: u64) -> Self {
        if irr.is_zero() {
            return Self::from_rational(rat);
        }
        Scalar { rat, irr, radicand }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rat
    }

    pub fn irrational_part(&self) -> &BigRational {
        &self.irr
    }

    /// Radicand of the surd part, 0 for rationals.
    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn is_rational(&self) -> bool {
        self.irr.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.irr.is_zero()
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        if self.is_rational() && self.rat.is_integer() {
            Some(self.rat.to_integer())
        } else {
            None
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        self.as_integer().and_then(|n| n.to_i64())
    }

    fn join_radicand(&self, other: &Scalar) -> u64 {
        match (self.radicand, other.radicand) {
            (0, d) | (d, 0) => d,
            (d, e) => {
                assert_eq!(d, e, "mixed quadratic fields {d} and {e}");
                d
            }
        }
    }

    /// Exact sign: compares `rat` against `-irr*sqrt(d)` by squaring.
    pub fn signum(&self) -> Ordering {
        let a = self.rat.cmp(&BigRational::zero());
        let b = self.irr.cmp(&BigRational::zero());
        if b == Ordering::Equal {
            return a;
        }
        if a == Ordering::Equal || a == b {
            return b;
        }
        let a2 = &self.rat * &self.rat;
        let b2d = &self.irr * &self.irr * BigRational::from_integer(BigInt::from(self.radicand));
        match a2.cmp(&b2d) {
            Ordering::Greater => a,
            Ordering::Less => b,
            Ordering::Equal => unreachable!("sqrt of a squarefree radicand is irrational"),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn abs(&self) -> Scalar {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Floating approximation, used only for seeding exact searches.
    pub fn approx(&self) -> f64 {
        let a = self.rat.to_f64().unwrap_or(0.0);
        let b = self.irr.to_f64().unwrap_or(0.0);
        a + b * (self.radicand as f64).sqrt()
    }

    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return self.rat.floor().to_integer();
        }
        let mut z = BigInt::from(self.approx().floor() as i64);
        loop {
            let zs = Scalar::from_rational(BigRational::from_integer(z.clone()));
            if &zs > self {
                z -= 1;
                continue;
            }
            let next = Scalar::from_rational(BigRational::from_integer(&z + 1));
            if &next <= self {
                z += 1;
                continue;
            }
            return z;
        }
    }

    pub fn scale(&self, k: &BigRational) -> Scalar {
        Scalar::quadratic(&self.rat * k, &self.irr * k, self.radicand)
    }

    /// Exact quotient; `None` when dividing by zero.
    pub fn checked_div(&self, other: &Scalar) -> Option<Scalar> {
        if other.is_zero() {
            return None;
        }
        let d = self.join_radicand(other);
        let dq = BigRational::from_integer(BigInt::from(d));
        let norm = &other.rat * &other.rat - &other.irr * &other.irr * &dq;
        let rat = (&self.rat * &other.rat - &self.irr * &other.irr * &dq) / &norm;
        let irr = (&self.irr * &other.rat - &self.rat * &other.irr) / &norm;
        Some(Scalar::quadratic(rat, irr, d))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.is_rational() && other.is_rational() {
            return self.rat.cmp(&other.rat);
        }
        (self - other).signum()
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        let d = self.join_radicand(o);
        Scalar::quadratic(&self.rat + &o.rat, &self.irr + &o.irr, d)
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        let d = self.join_radicand(o);
        Scalar::quadratic(&self.rat - &o.rat, &self.irr - &o.irr, d)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        let d = self.join_radicand(o);
        let dq = BigRational::from_integer(BigInt::from(d));
        let rat = &self.rat * &o.rat + &self.irr * &o.irr * dq;
        let irr = &self.rat * &o.irr + &self.irr * &o.rat;
        Scalar::quadratic(rat, irr, d)
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, o: Scalar) -> Scalar {
        &self + &o
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, o: Scalar) -> Scalar {
        &self - &o
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::quadratic(-self.rat, -self.irr, self.radicand)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -self.clone()
    }
}

fn fmt_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return fmt_rational(&self.rat, f);
        }
        if !self.rat.is_zero() {
            fmt_rational(&self.rat, f)?;
            f.write_str(if self.irr.is_positive() { "+" } else { "-" })?;
        } else if self.irr.is_negative() {
            f.write_str("-")?;
        }
        let b = self.irr.abs();
        if !b.is_one() {
            fmt_rational(&b, f)?;
            f.write_str("*")?;
        }
        write!(f, "sqrt({})", self.radicand)
    }
}

/// Parses `p`, `p/q`, `b*sqrt(d)`, `sqrt(d)`, `a+b*sqrt(d)` and `a-sqrt(d)`.
pub fn parse_scalar(text: &str) -> Option<Scalar> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(root) = s.find("sqrt(") else {
        return parse_rational(&s).map(Scalar::from_rational);
    };
    let close = s[root..].find(')')? + root;
    if close + 1 != s.len() {
        return None;
    }
    let radicand: u64 = s[root + 5..close].parse().ok()?;
    let head = &s[..root];
    let split = if head.len() > 1 { head[1..].rfind(['+', '-']).map(|i| i + 1) } else { None };
    let (rat_text, coeff_text) = match split {
        Some(i) => (&head[..i], &head[i..]),
        None => ("", head),
    };
    let rat = if rat_text.is_empty() { BigRational::zero() } else { parse_rational(rat_text)? };
    let coeff_text = coeff_text.strip_suffix('*').unwrap_or(coeff_text);
    let irr = match coeff_text {
        "" | "+" => BigRational::one(),
        "-" => -BigRational::one(),
        t => parse_rational(t.strip_prefix('+').unwrap_or(t))?,
    };
    if !is_squarefree(radicand) || radicand < 2 {
        return None;
    }
    Some(Scalar::quadratic(rat, irr, radicand))
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.strip_prefix('+').unwrap_or(s);
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().ok()?;
            let d: BigInt = d.parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

pub fn is_squarefree(n: u64) -> bool {
    if n == 0 {
        return false;
    }
    let mut m = n;
    let mut p = 2u64;
    while p * p <= m {
        if m.is_multiple_of(p * p) {
            return false;
        }
        if m.is_multiple_of(p) {
            m /= p;
        }
        p += 1;
    }
    true
}

/// Prime factors of a positive integer, ascending and without repetition.
pub fn prime_factors(n: &BigInt) -> Vec<BigInt> {
    let mut out = Vec::new();
    let mut m = n.abs();
    let mut p = BigInt::from(2);
    while &p * &p <= m {
        if m.is_multiple_of(&p) {
            out.push(p.clone());
            while m.is_multiple_of(&p) {
                m /= &p;
            }
        }
        p += 1;
    }
    if m > BigInt::one() {
        out.push(m);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Scalar {
        parse_scalar(s).unwrap()
    }

    #[test]
    fn half_exceeds_sqrt2_minus_one() {
        let half = q("1/2");
        let s = q("-1+sqrt(2)");
        // interval bracket first, exact confirmation second
        let lo = 2f64.sqrt() - 1.0 - 1e-12;
        let hi = 2f64.sqrt() - 1.0 + 1e-12;
        assert!(0.5 > hi && lo > 0.4);
        assert_eq!(half.cmp(&s), Ordering::Greater);
    }

    #[test]
    fn sign_of_mixed_terms() {
        assert!(q("3-2*sqrt(2)").is_positive());
        assert!(q("1-sqrt(2)").is_negative());
        assert!(q("-7+5*sqrt(2)").is_positive());
        assert!(q("7-5*sqrt(2)").is_negative());
    }

    #[test]
    fn floor_and_division() {
        assert_eq!(q("sqrt(2)").floor(), BigInt::from(1));
        assert_eq!(q("-sqrt(2)").floor(), BigInt::from(-2));
        let x = q("1+sqrt(2)");
        let inv = Scalar::one().checked_div(&x).unwrap();
        assert_eq!(inv, q("-1+sqrt(2)"));
        assert_eq!(&inv * &x, Scalar::one());
    }

    #[test]
    fn display_round_trips() {
        for s in ["0", "-3/4", "sqrt(5)", "-sqrt(3)", "1/2+3/2*sqrt(2)", "2-sqrt(7)"] {
            assert_eq!(q(s).to_string(), s);
        }
    }

    #[test]
    fn factorisation() {
        let f: Vec<i64> =
            prime_factors(&BigInt::from(360)).iter().map(|p| p.to_i64().unwrap()).collect();
        assert_eq!(f, vec![2, 3, 5]);
        assert!(is_squarefree(30) && !is_squarefree(12));
    }
}
