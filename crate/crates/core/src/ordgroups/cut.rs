//! Upward-closed subsets of a lexicographic value group of the shape
//! `{x : trunc_i(x) >= pivot}` or `{x : trunc_i(x) > pivot}`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Serialize, Serializer};

use super::scalar::Scalar;
use super::vector::{ValueGroup, ValueVector};
use super::GroupError;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Cut {
    /// The empty set (the zero module).
    Zero,
    /// The whole group (the module K).
    Full,
    /// Pivot has exactly `level` components.
    Bounded { pivot: ValueVector, closed: bool },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LatticeOp {
    MeetSet,
    JoinSet,
    SumSet,
    ColonSet,
}

impl Cut {
    /// Closed cut at the full vector: the principal module with that value.
    pub fn principal(pivot: ValueVector) -> Cut {
        Cut::Bounded { pivot, closed: true }
    }

    /// Closed cut at zero of the given level.
    pub fn unit(level: usize) -> Cut {
        Cut::Bounded { pivot: ValueVector::zeros(level), closed: true }
    }

    /// Checked, canonical constructor. The pivot is truncated to `level`.
    pub fn bounded(
        level: usize,
        pivot: &ValueVector,
        closed: bool,
        groups: &ValueGroup,
    ) -> Result<Cut, GroupError> {
        if level == 0 || level > groups.depth() || pivot.len() < level {
            return Err(GroupError::Dimension { left: level, right: groups.depth() });
        }
        let pivot = pivot.truncate(level);
        groups.check(&pivot)?;
        Ok(Cut::Bounded { pivot, closed }.canonical(groups))
    }

    /// Rewrites an open cut whose last group is discrete as a closed one.
    pub fn canonical(self, groups: &ValueGroup) -> Cut {
        match self {
            Cut::Bounded { mut pivot, closed: false } => {
                let i = pivot.len();
                if groups.component(i - 1).is_dense() {
                    Cut::Bounded { pivot, closed: false }
                } else {
                    pivot.0[i - 1] = &pivot.0[i - 1] + &Scalar::one();
                    Cut::Bounded { pivot, closed: true }
                }
            }
            other => other,
        }
    }

    pub fn level(&self) -> Option<usize> {
        match self {
            Cut::Bounded { pivot, .. } => Some(pivot.len()),
            _ => None,
        }
    }

    pub fn pivot(&self) -> Option<&ValueVector> {
        match self {
            Cut::Bounded { pivot, .. } => Some(pivot),
            _ => None,
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, Cut::Bounded { closed: true, .. })
    }

    pub fn contains(&self, x: &ValueVector) -> bool {
        match self {
            Cut::Zero => false,
            Cut::Full => true,
            Cut::Bounded { pivot, closed } => match x.cmp_prefix(pivot, pivot.len()) {
                Ordering::Greater => true,
                Ordering::Equal => *closed,
                Ordering::Less => false,
            },
        }
    }

    /// Set inclusion order: `Less` means strictly smaller set.
    pub fn set_cmp(&self, other: &Cut) -> Ordering {
        use Cut::*;
        match (self, other) {
            (Zero, Zero) | (Full, Full) => Ordering::Equal,
            (Zero, _) | (_, Full) => Ordering::Less,
            (_, Zero) | (Full, _) => Ordering::Greater,
            (Bounded { pivot: a, closed: ca }, Bounded { pivot: b, closed: cb }) => {
                let k = a.len().min(b.len());
                match a.cmp_prefix(b, k) {
                    // a lower boundary means a larger set
                    Ordering::Less => Ordering::Greater,
                    Ordering::Greater => Ordering::Less,
                    Ordering::Equal => match a.len().cmp(&b.len()) {
                        Ordering::Equal => ca.cmp(cb),
                        Ordering::Less => {
                            if *ca {
                                Ordering::Greater
                            } else {
                                Ordering::Less
                            }
                        }
                        Ordering::Greater => {
                            if *cb {
                                Ordering::Less
                            } else {
                                Ordering::Greater
                            }
                        }
                    },
                }
            }
        }
    }

    /// `other ⊆ self`.
    pub fn includes(&self, other: &Cut) -> bool {
        self.set_cmp(other) != Ordering::Less
    }

    pub fn meet(&self, other: &Cut) -> Cut {
        if self.set_cmp(other) == Ordering::Greater {
            other.clone()
        } else {
            self.clone()
        }
    }

    pub fn join(&self, other: &Cut) -> Cut {
        if self.set_cmp(other) == Ordering::Less {
            other.clone()
        } else {
            self.clone()
        }
    }

    /// Localization to the first `d` components.
    pub fn project(&self, d: usize) -> Cut {
        match self {
            Cut::Bounded { pivot, .. } if pivot.len() > d => {
                if d == 0 {
                    return Cut::Full;
                }
                Cut::Bounded { pivot: pivot.truncate(d), closed: true }
            }
            other => other.clone(),
        }
    }

    /// Translation by a vector of at least `level` components.
    pub fn shift(&self, x: &ValueVector) -> Cut {
        match self {
            Cut::Bounded { pivot, closed } => {
                Cut::Bounded { pivot: pivot.add(&x.truncate(pivot.len())), closed: *closed }
            }
            other => other.clone(),
        }
    }

    /// Minkowski sum, the value set of a product of modules.
    pub fn sum(&self, other: &Cut, groups: &ValueGroup) -> Cut {
        use Cut::*;
        match (self, other) {
            (Zero, _) | (_, Zero) => Zero,
            (Full, _) | (_, Full) => Full,
            (Bounded { .. }, Bounded { .. }) => {
                let k = self.level().unwrap().min(other.level().unwrap());
                let (Bounded { pivot: a, closed: ca }, Bounded { pivot: b, closed: cb }) =
                    (self.project(k), other.project(k))
                else {
                    unreachable!()
                };
                Bounded { pivot: a.add(&b), closed: ca && cb }.canonical(groups)
            }
        }
    }

    /// Residual `{x : x + other ⊆ self}`.
    pub fn colon(&self, other: &Cut, groups: &ValueGroup) -> Cut {
        use Cut::*;
        match (self, other) {
            (_, Zero) | (Full, _) => Full,
            (Zero, _) | (_, Full) => Zero,
            (Bounded { pivot: a, closed: ca }, Bounded { pivot: b, closed: cb }) => {
                let (i, j) = (a.len(), b.len());
                let (a, ca, b, cb) = match i.cmp(&j) {
                    Ordering::Equal => (a.clone(), *ca, b.clone(), *cb),
                    // coarser divisor: only a strict level-j inequality survives every translate
                    Ordering::Greater => (a.truncate(j), false, b.clone(), *cb),
                    Ordering::Less => (a.clone(), *ca, b.truncate(i), true),
                };
                Bounded { pivot: a.sub(&b), closed: ca || !cb }.canonical(groups)
            }
        }
    }

    pub fn lattice(&self, other: &Cut, which: LatticeOp, groups: &ValueGroup) -> Cut {
        match which {
            LatticeOp::MeetSet => self.meet(other),
            LatticeOp::JoinSet => self.join(other),
            LatticeOp::SumSet => self.sum(other, groups),
            LatticeOp::ColonSet => self.colon(other, groups),
        }
    }

    /// Drops the first `d` components; a cut of level `d` closed at zero becomes `Full`.
    pub fn drop_prefix(&self, d: usize) -> Option<Cut> {
        match self {
            Cut::Bounded { pivot, closed } if pivot.len() > d => Some(Cut::Bounded {
                pivot: ValueVector(pivot.0[d..].to_vec()),
                closed: *closed,
            }),
            Cut::Bounded { pivot, closed: true } if pivot.len() == d && pivot.is_zero() => {
                Some(Cut::Full)
            }
            Cut::Full => Some(Cut::Full),
            _ => None,
        }
    }

    /// Inverse of [`Cut::drop_prefix`]: prepends `d` zero components.
    pub fn prepend_zeros(&self, d: usize) -> Option<Cut> {
        match self {
            Cut::Full => Some(Cut::unit(d)),
            Cut::Bounded { pivot, closed } => {
                let mut v = vec![Scalar::zero(); d];
                v.extend(pivot.0.iter().cloned());
                Some(Cut::Bounded { pivot: ValueVector(v), closed: *closed })
            }
            Cut::Zero => None,
        }
    }
}

/// Checked front end over the four set operations.
pub fn cut_lattice(
    a: &Cut,
    b: &Cut,
    which: LatticeOp,
    groups: &ValueGroup,
) -> Result<Cut, GroupError> {
    for c in [a, b] {
        if let Some(l) = c.level() {
            if l > groups.depth() {
                return Err(GroupError::Dimension { left: l, right: groups.depth() });
            }
        }
    }
    Ok(a.lattice(b, which, groups))
}

/// Probe vectors of full length around the given pivots.
///
/// Besides unit steps, dense components get positive steps that shrink until
/// they fall below every nonzero gap between pivot components.
pub fn probe_set(pivots: &[&ValueVector], groups: &ValueGroup) -> Vec<ValueVector> {
    let n = groups.depth();
    let mut out: Vec<ValueVector> = Vec::new();
    let full: Vec<ValueVector> = pivots.iter().map(|p| p.padded(n)).collect();
    for c in 0..n {
        let g = groups.component(c);
        let mut steps = vec![Scalar::one()];
        if g.is_dense() {
            let mut gap: Option<Scalar> = None;
            for p in &full {
                for q in &full {
                    let d = (&p.0[c] - &q.0[c]).abs();
                    if !d.is_zero() && gap.as_ref().is_none_or(|g| &d < g) {
                        gap = Some(d);
                    }
                }
            }
            let mut k = 1;
            loop {
                let e = g.small_positive(k);
                let small_enough = gap.as_ref().is_none_or(|gap| &e < gap);
                steps.push(e);
                if (k >= 6 && small_enough) || k >= 64 {
                    break;
                }
                k += 1;
            }
        }
        for p in &full {
            for e in &steps {
                let u = ValueVector::unit(n, c, e.clone());
                out.push(p.add(&u));
                out.push(p.sub(&u));
            }
        }
    }
    out.extend(full);
    out.sort();
    out.dedup();
    out
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cut::Zero => f.write_str("0"),
            Cut::Full => f.write_str("K"),
            Cut::Bounded { pivot, closed } => {
                write!(f, "{} {} @level {}", if *closed { ">=" } else { ">" }, pivot, pivot.len())
            }
        }
    }
}

impl Serialize for Cut {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ordgroups::RankOneGroup;

    fn zz() -> ValueGroup {
        ValueGroup::new(vec![RankOneGroup::integers(), RankOneGroup::integers()])
    }

    fn zq() -> ValueGroup {
        ValueGroup::new(vec![RankOneGroup::integers(), RankOneGroup::rationals()])
    }

    fn v(xs: &[i64]) -> ValueVector {
        ValueVector::from_ints(xs)
    }

    #[test]
    fn boundary_membership() {
        let g = zq();
        let closed = Cut::bounded(2, &v(&[0, 0]), true, &g).unwrap();
        let open = Cut::bounded(2, &v(&[0, 0]), false, &g).unwrap();
        assert!(closed.contains(&v(&[0, 0])));
        assert!(!open.contains(&v(&[0, 0])));
        let coarse = Cut::bounded(1, &v(&[0, 0]), true, &zz()).unwrap();
        assert!(coarse.contains(&v(&[0, -7])));
    }

    #[test]
    fn discrete_open_is_rewritten() {
        let c = Cut::bounded(2, &v(&[0, 0]), false, &zz()).unwrap();
        assert_eq!(c, Cut::Bounded { pivot: v(&[0, 1]), closed: true });
        assert_eq!(c.clone().canonical(&zz()), c);
    }

    #[test]
    fn dense_sum_and_colon_examples() {
        let q = ValueGroup::new(vec![RankOneGroup::rationals()]);
        let open = Cut::bounded(1, &v(&[0]), false, &q).unwrap();
        assert_eq!(open.sum(&open, &q), open);
        let g = zq();
        let val = Cut::unit(2);
        let max = Cut::bounded(2, &v(&[0, 0]), false, &g).unwrap();
        assert_eq!(val.colon(&max, &g), val);
        // a non-maximal prime and its localization are mutual residuals of V
        let p = Cut::bounded(1, &v(&[0]), false, &zz()).unwrap();
        assert_eq!(p, Cut::Bounded { pivot: v(&[1]), closed: true });
        assert_eq!(Cut::unit(2).colon(&p, &zz()), Cut::unit(1));
        assert_eq!(Cut::unit(2).colon(&Cut::unit(1), &zz()), p);
    }

    #[test]
    fn sentinels() {
        let g = zz();
        assert_eq!(Cut::unit(2).colon(&Cut::Zero, &g), Cut::Full);
        assert_eq!(Cut::unit(2).colon(&Cut::Full, &g), Cut::Zero);
        assert_eq!(Cut::Zero.join(&Cut::unit(2)), Cut::unit(2));
        assert_eq!(Cut::Full.sum(&Cut::unit(1), &g), Cut::Full);
        assert_eq!(Cut::unit(1).project(0), Cut::Full);
    }

    #[test]
    fn prefix_drop_round_trip() {
        let c = Cut::Bounded { pivot: v(&[0, 3]), closed: false };
        let d = c.drop_prefix(1).unwrap();
        assert_eq!(d, Cut::Bounded { pivot: v(&[3]), closed: false });
        assert_eq!(d.prepend_zeros(1).unwrap(), c);
        assert_eq!(Cut::unit(1).drop_prefix(1), Some(Cut::Full));
        assert_eq!(Cut::Full.prepend_zeros(1), Some(Cut::unit(1)));
    }
}
