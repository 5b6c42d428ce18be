use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Serialize, Serializer};

use super::scalar::{is_squarefree, parse_scalar, prime_factors, Scalar};
use super::GroupError;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum GroupKind {
    Integers,
    Rationals,
    NAdic(u64),
    /// The lattice `Z + Z*(a + b*sqrt(d))`, stored with `0 <= a < 1` and `b > 0`.
    QuadraticLattice { a: BigRational, b: BigRational, d: u64 },
}

/// A rank-one ordered group realised as an additive subgroup of the reals.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RankOneGroup {
    kind: GroupKind,
}

impl RankOneGroup {
    pub fn integers() -> Self {
        RankOneGroup { kind: GroupKind::Integers }
    }

    pub fn rationals() -> Self {
        RankOneGroup { kind: GroupKind::Rationals }
    }

    pub fn n_adic(n: u64) -> Result<Self, GroupError> {
        if n < 2 {
            return Err(GroupError::BadLiteral(format!("Z[1/{n}]: n must be at least 2")));
        }
        Ok(RankOneGroup { kind: GroupKind::NAdic(n) })
    }

    /// `Z + Z*alpha` for an irrational quadratic `alpha`.
    pub fn quadratic(alpha: &Scalar) -> Result<Self, GroupError> {
        if alpha.is_rational() {
            return Err(GroupError::BadLiteral(format!("{alpha} is rational")));
        }
        let d = alpha.radicand();
        if !is_squarefree(d) {
            return Err(GroupError::BadLiteral(format!("radicand {d} is not squarefree")));
        }
        let mut a = alpha.rational_part().clone();
        let mut b = alpha.irrational_part().clone();
        if b.is_negative() {
            a = -a;
            b = -b;
        }
        a = &a - a.floor();
        Ok(RankOneGroup { kind: GroupKind::QuadraticLattice { a, b, d } })
    }

    pub fn parse(literal: &str) -> Result<Self, GroupError> {
        let s: String = literal.chars().filter(|c| !c.is_whitespace()).collect();
        match s.as_str() {
            "Z" => return Ok(Self::integers()),
            "Q" => return Ok(Self::rationals()),
            _ => {}
        }
        if let Some(n) = s.strip_prefix("Z[1/").and_then(|r| r.strip_suffix(']')) {
            let n: u64 = n.parse().map_err(|_| GroupError::BadLiteral(literal.to_string()))?;
            return Self::n_adic(n);
        }
        if let Some(rest) = s.strip_prefix("Z+Z*") {
            let inner = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(rest);
            let alpha =
                parse_scalar(inner).ok_or_else(|| GroupError::BadLiteral(literal.to_string()))?;
            return Self::quadratic(&alpha);
        }
        Err(GroupError::BadLiteral(literal.to_string()))
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn is_dense(&self) -> bool {
        self.kind != GroupKind::Integers
    }

    pub fn name(&self) -> String {
        match &self.kind {
            GroupKind::Integers => "Z".into(),
            GroupKind::Rationals => "Q".into(),
            GroupKind::NAdic(n) => format!("Z[1/{n}]"),
            GroupKind::QuadraticLattice { a, b, d } => {
                if a.is_zero() && b.is_one() {
                    format!("Z+Z*sqrt({d})")
                } else {
                    format!("Z+Z*({})", self.generator(a, b, *d))
                }
            }
        }
    }

    fn generator(&self, a: &BigRational, b: &BigRational, d: u64) -> Scalar {
        Scalar::quadratic(a.clone(), b.clone(), d)
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        match &self.kind {
            GroupKind::Integers => x.as_integer().is_some(),
            GroupKind::Rationals => x.is_rational(),
            GroupKind::NAdic(n) => {
                if !x.is_rational() {
                    return false;
                }
                let den = x.rational_part().denom().clone();
                let n = BigInt::from(*n);
                prime_factors(&den).iter().all(|p| n.is_multiple_of(p))
            }
            GroupKind::QuadraticLattice { a, b, d } => {
                if !x.is_rational() && x.radicand() != *d {
                    return false;
                }
                let k = x.irrational_part() / b;
                if !k.is_integer() {
                    return false;
                }
                (x.rational_part() - &k * a).is_integer()
            }
        }
    }

    pub fn element(&self, value: Scalar) -> Result<GroupElement, GroupError> {
        if !self.contains(&value) {
            return Err(GroupError::NotMember { value: value.to_string(), group: self.name() });
        }
        Ok(GroupElement { owner: self.clone(), value })
    }

    /// A decreasing sequence of positive elements; constant 1 for Z.
    pub fn small_positive(&self, k: u32) -> Scalar {
        match &self.kind {
            GroupKind::Integers => Scalar::one(),
            GroupKind::Rationals => Scalar::from_rational(BigRational::new(
                BigInt::one(),
                BigInt::from(2u8).pow(k),
            )),
            GroupKind::NAdic(n) => {
                Scalar::from_rational(BigRational::new(BigInt::one(), BigInt::from(*n).pow(k)))
            }
            GroupKind::QuadraticLattice { a, b, d } => {
                // Euclidean remainders of (1, frac(alpha)) stay in the lattice and shrink to 0.
                if k == 0 {
                    return Scalar::one();
                }
                let alpha = self.generator(a, b, *d);
                let mut prev = Scalar::one();
                let mut cur = &alpha - &int_scalar(alpha.floor());
                for _ in 1..k {
                    let q = prev.checked_div(&cur).expect("positive remainder").floor();
                    let next = &prev - &(&int_scalar(q) * &cur);
                    prev = cur;
                    cur = next;
                }
                cur
            }
        }
    }

    /// Random element of moderate size, used by the ideal sampler.
    pub fn sample<R: Rng>(&self, rng: &mut R, bound: i64) -> Scalar {
        match &self.kind {
            GroupKind::Integers => Scalar::from_int(rng.gen_range(-bound..=bound)),
            GroupKind::Rationals => {
                let j = rng.gen_range(0..=3u32);
                let den = 1i64 << j;
                Scalar::from_ratio(rng.gen_range(-bound * den..=bound * den), den)
            }
            GroupKind::NAdic(n) => {
                let j = rng.gen_range(0..=2u32);
                let den = (*n as i64).pow(j);
                Scalar::from_ratio(rng.gen_range(-bound * den..=bound * den), den)
            }
            GroupKind::QuadraticLattice { a, b, d } => {
                let alpha = self.generator(a, b, *d);
                let j = rng.gen_range(-2..=2i64);
                let ja = alpha.scale(&BigRational::from_integer(BigInt::from(j)));
                let m = rng.gen_range(-bound..=bound);
                let shift = int_scalar(BigInt::from(m) - ja.floor());
                &ja + &shift
            }
        }
    }
}

fn int_scalar(n: BigInt) -> Scalar {
    Scalar::from_rational(BigRational::from_integer(n))
}

impl fmt::Display for RankOneGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Serialize for RankOneGroup {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

/// A scalar certified to lie in its owning group.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GroupElement {
    owner: RankOneGroup,
    value: Scalar,
}

impl GroupElement {
    pub fn owner(&self) -> &RankOneGroup {
        &self.owner
    }

    pub fn value(&self) -> &Scalar {
        &self.value
    }

    pub fn into_value(self) -> Scalar {
        self.value
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        (self.owner == other.owner).then(|| self.value.cmp(&other.value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(t: &str) -> Scalar {
        parse_scalar(t).unwrap()
    }

    #[test]
    fn literals_and_names() {
        for lit in ["Z", "Q", "Z[1/6]", "Z+Z*sqrt(2)", "Z+Z*(1/2+sqrt(3))"] {
            assert_eq!(RankOneGroup::parse(lit).unwrap().name(), lit);
        }
        let g = RankOneGroup::parse("Z+Z*(-5/2-sqrt(2))").unwrap();
        assert_eq!(g.name(), "Z+Z*(1/2+sqrt(2))");
        assert!(RankOneGroup::parse("Z[1/1]").is_err());
        assert!(RankOneGroup::parse("Z+Z*sqrt(4)").is_err());
        assert!(RankOneGroup::parse("R").is_err());
    }

    #[test]
    fn membership() {
        let dy = RankOneGroup::n_adic(2).unwrap();
        assert!(dy.contains(&s("3/8")));
        assert!(!dy.contains(&s("1/3")));
        let six = RankOneGroup::n_adic(6).unwrap();
        assert!(six.contains(&s("5/12")) && !six.contains(&s("1/5")));
        let quad = RankOneGroup::parse("Z+Z*(1/2+sqrt(2))").unwrap();
        assert!(quad.contains(&s("-1/2-sqrt(2)")));
        assert!(quad.contains(&s("1+2*sqrt(2)")));
        assert!(!quad.contains(&s("sqrt(2)")));
        assert!(!quad.contains(&s("1/2")));
        assert!(RankOneGroup::integers().element(s("1/2")).is_err());
    }

    #[test]
    fn small_positives_shrink_inside_group() {
        for lit in ["Q", "Z[1/3]", "Z+Z*sqrt(2)", "Z+Z*(1/3+2*sqrt(5))"] {
            let g = RankOneGroup::parse(lit).unwrap();
            let mut last = g.small_positive(0);
            for k in 1..8 {
                let e = g.small_positive(k);
                assert!(e.is_positive() && e < last, "{lit} k={k}");
                assert!(g.contains(&e));
                last = e;
            }
        }
    }
}
