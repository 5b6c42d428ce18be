use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

use super::group::RankOneGroup;
use super::scalar::Scalar;
use super::GroupError;

/// An element of a lexicographic product, most significant component first.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct ValueVector(pub Vec<Scalar>);

impl ValueVector {
    pub fn zeros(n: usize) -> Self {
        ValueVector(vec![Scalar::zero(); n])
    }

    pub fn from_ints(xs: &[i64]) -> Self {
        ValueVector(xs.iter().map(|&x| Scalar::from_int(x)).collect())
    }

    pub fn unit(n: usize, i: usize, e: Scalar) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = e;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn components(&self) -> &[Scalar] {
        &self.0
    }

    pub fn truncate(&self, i: usize) -> ValueVector {
        ValueVector(self.0[..i.min(self.0.len())].to_vec())
    }

    pub fn padded(&self, n: usize) -> ValueVector {
        let mut v = self.0.clone();
        v.resize(n, Scalar::zero());
        ValueVector(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Scalar::is_zero)
    }

    /// Componentwise sum over the common prefix.
    pub fn add(&self, other: &ValueVector) -> ValueVector {
        ValueVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &ValueVector) -> ValueVector {
        ValueVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> ValueVector {
        ValueVector(self.0.iter().map(|a| -a).collect())
    }

    /// Lexicographic comparison of the first `i` components.
    pub fn cmp_prefix(&self, other: &ValueVector, i: usize) -> Ordering {
        self.0[..i].cmp(&other.0[..i])
    }
}

pub fn compare(x: &ValueVector, y: &ValueVector) -> Result<Ordering, GroupError> {
    if x.len() != y.len() {
        return Err(GroupError::Dimension { left: x.len(), right: y.len() });
    }
    Ok(x.cmp(y))
}

impl fmt::Display for ValueVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

impl Serialize for ValueVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The lexicographic product of the edge groups on a root-to-node path.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ValueGroup {
    components: Vec<RankOneGroup>,
}

impl ValueGroup {
    pub fn new(components: Vec<RankOneGroup>) -> Self {
        ValueGroup { components }
    }

    pub fn depth(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &RankOneGroup {
        &self.components[i]
    }

    pub fn components(&self) -> &[RankOneGroup] {
        &self.components
    }

    pub fn truncate(&self, i: usize) -> ValueGroup {
        ValueGroup { components: self.components[..i].to_vec() }
    }

    pub fn suffix(&self, i: usize) -> ValueGroup {
        ValueGroup { components: self.components[i..].to_vec() }
    }

    /// Checks that a (possibly truncated) vector has components in the right groups.
    pub fn check(&self, v: &ValueVector) -> Result<(), GroupError> {
        if v.len() > self.depth() {
            return Err(GroupError::Dimension { left: v.len(), right: self.depth() });
        }
        for (g, x) in self.components.iter().zip(&v.0) {
            if !g.contains(x) {
                return Err(GroupError::NotMember { value: x.to_string(), group: g.name() });
            }
        }
        Ok(())
    }
}

impl fmt::Display for ValueGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.components.iter().map(RankOneGroup::name).collect();
        write!(f, "{}", names.join(" x "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_order() {
        let a = ValueVector(vec![Scalar::from_int(1), Scalar::from_int(-5)]);
        let b = ValueVector(vec![Scalar::zero(), Scalar::from_int(100)]);
        assert_eq!(compare(&a, &b).unwrap(), Ordering::Greater);
        assert_eq!(compare(&a, &a).unwrap(), Ordering::Equal);
        assert!(compare(&a, &ValueVector::zeros(3)).is_err());
    }

    #[test]
    fn membership_is_checked_per_component() {
        let g = ValueGroup::new(vec![RankOneGroup::integers(), RankOneGroup::rationals()]);
        assert!(g.check(&ValueVector(vec![Scalar::from_int(2), Scalar::from_ratio(1, 3)])).is_ok());
        assert!(g.check(&ValueVector(vec![Scalar::from_ratio(1, 2)])).is_err());
    }
}
