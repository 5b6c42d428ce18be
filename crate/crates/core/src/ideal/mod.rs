//! Nonzero R-submodules of K, stored as one cut per maximal ideal.

mod literal;
mod sample;

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

pub use literal::{parse_ideal, parse_witness};
pub use sample::{structured_ideals, IdealSampler};

use crate::forest::{BranchId, ForestError, PrimeId, SpectralForest};
use crate::ordgroups::{probe_set, Cut, GroupError, Scalar, ValueVector};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum IdealError {
    #[error("cuts at `{left}` and `{right}` disagree over `{prime}`")]
    Incompatible { left: String, right: String, prime: String },
    #[error("zero cut at `{0}`: modules must be nonzero")]
    ZeroCut(String),
    #[error("expected {expected} cuts, got {got}")]
    WrongArity { expected: usize, got: usize },
    #[error("operands live on different forests")]
    ForestMismatch,
    #[error("module is not a fractional ideal")]
    NotFractional,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("parse error: {0}")]
    Parse(String),
}

/// An element of K, given by its value at every node of the forest.
///
/// Storing one component per node makes the per-leaf value vectors
/// automatically agree on shared primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrincipalWitness {
    forest: Arc<SpectralForest>,
    node_values: Vec<Scalar>,
}

impl PrincipalWitness {
    pub fn new(forest: Arc<SpectralForest>, node_values: Vec<Scalar>) -> Result<Self, IdealError> {
        if node_values.len() != forest.len() {
            return Err(IdealError::WrongArity { expected: forest.len(), got: node_values.len() });
        }
        for p in forest.primes() {
            let g = forest.group(p);
            if !g.contains(&node_values[p.0]) {
                return Err(GroupError::NotMember {
                    value: node_values[p.0].to_string(),
                    group: g.name(),
                }
                .into());
            }
        }
        Ok(PrincipalWitness { forest, node_values })
    }

    pub fn one(forest: Arc<SpectralForest>) -> Self {
        let n = forest.len();
        PrincipalWitness { forest, node_values: vec![Scalar::zero(); n] }
    }

    /// Builds a witness from prescribed leaf values, checking they agree on shared primes.
    pub fn from_leaf_values(
        forest: Arc<SpectralForest>,
        values: &[(PrimeId, ValueVector)],
    ) -> Result<Self, IdealError> {
        let mut node_values: Vec<Option<Scalar>> = vec![None; forest.len()];
        for (leaf, v) in values {
            let path = forest.path(*leaf);
            if v.len() != path.len() {
                return Err(GroupError::Dimension { left: v.len(), right: path.len() }.into());
            }
            for (q, x) in path.iter().zip(&v.0) {
                match &node_values[q.0] {
                    Some(y) if y != x => {
                        return Err(IdealError::Incompatible {
                            left: forest.name(*leaf).to_string(),
                            right: "earlier leaf".to_string(),
                            prime: forest.name(*q).to_string(),
                        })
                    }
                    _ => node_values[q.0] = Some(x.clone()),
                }
            }
        }
        let values = node_values.into_iter().map(|v| v.unwrap_or_else(Scalar::zero)).collect();
        Self::new(forest, values)
    }

    pub fn forest(&self) -> &Arc<SpectralForest> {
        &self.forest
    }

    pub fn node_value(&self, p: PrimeId) -> &Scalar {
        &self.node_values[p.0]
    }

    /// `v_P(x)`, the value vector along the path to `p`.
    pub fn value_at(&self, p: PrimeId) -> ValueVector {
        ValueVector(self.forest.path(p).iter().map(|q| self.node_values[q.0].clone()).collect())
    }

    pub fn inverse(&self) -> Self {
        PrincipalWitness {
            forest: self.forest.clone(),
            node_values: self.node_values.iter().map(|x| -x).collect(),
        }
    }

    pub fn mul(&self, other: &PrincipalWitness) -> Self {
        PrincipalWitness {
            forest: self.forest.clone(),
            node_values: self.node_values.iter().zip(&other.node_values).map(|(a, b)| a + b).collect(),
        }
    }
}

impl fmt::Display for PrincipalWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .forest
            .leaves()
            .iter()
            .map(|&l| format!("{}={}", self.forest.name(l), self.value_at(l)))
            .collect();
        f.write_str(&parts.join("; "))
    }
}

/// Result of a residual computation, which may be the zero module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Colon {
    Zero,
    Module(IdealFamily),
}

impl Colon {
    pub fn module(self) -> Option<IdealFamily> {
        match self {
            Colon::Zero => None,
            Colon::Module(m) => Some(m),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealFamily {
    forest: Arc<SpectralForest>,
    cuts: Vec<Cut>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Equal,
    /// A vector at `leaf` lying in exactly one of the two cuts.
    Separated { leaf: String, probe: ValueVector, in_left: bool },
    /// Canonical forms differ but no probe told them apart.
    Unseparated { leaf: String },
}

impl IdealFamily {
    /// Canonicalizes every cut and checks compatibility over shared primes.
    pub fn new(forest: Arc<SpectralForest>, cuts: Vec<Cut>) -> Result<Self, IdealError> {
        if cuts.len() != forest.leaves().len() {
            return Err(IdealError::WrongArity { expected: forest.leaves().len(), got: cuts.len() });
        }
        let mut out = Vec::with_capacity(cuts.len());
        for (c, &leaf) in cuts.into_iter().zip(forest.leaves()) {
            let g = forest.value_group(leaf);
            let c = match c {
                Cut::Zero => return Err(IdealError::ZeroCut(forest.name(leaf).to_string())),
                Cut::Full => Cut::Full,
                Cut::Bounded { pivot, closed } => Cut::bounded(pivot.len(), &pivot, closed, g)?,
            };
            out.push(c);
        }
        let fam = IdealFamily { forest, cuts: out };
        fam.check_compatible()?;
        Ok(fam)
    }

    fn check_compatible(&self) -> Result<(), IdealError> {
        let f = &self.forest;
        let leaves = f.leaves();
        for i in 0..leaves.len() {
            for j in i + 1..leaves.len() {
                if let Some(m) = f.meet(leaves[i], leaves[j]) {
                    let d = f.depth(m);
                    if self.cuts[i].project(d) != self.cuts[j].project(d) {
                        return Err(IdealError::Incompatible {
                            left: f.name(leaves[i]).to_string(),
                            right: f.name(leaves[j]).to_string(),
                            prime: f.name(m).to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// For results of operations that preserve compatibility by construction.
    fn assemble(forest: &Arc<SpectralForest>, cuts: Vec<Cut>) -> Result<Self, IdealError> {
        for (c, &leaf) in cuts.iter().zip(forest.leaves()) {
            if *c == Cut::Zero {
                return Err(IdealError::ZeroCut(forest.name(leaf).to_string()));
            }
        }
        let fam = IdealFamily { forest: forest.clone(), cuts };
        fam.check_compatible()?;
        Ok(fam)
    }

    pub fn unit(forest: &Arc<SpectralForest>) -> Self {
        let cuts = forest.leaves().iter().map(|&l| Cut::unit(forest.depth(l))).collect();
        IdealFamily { forest: forest.clone(), cuts }
    }

    pub fn full(forest: &Arc<SpectralForest>) -> Self {
        IdealFamily { forest: forest.clone(), cuts: vec![Cut::Full; forest.leaves().len()] }
    }

    pub fn principal(x: &PrincipalWitness) -> Self {
        let f = x.forest();
        let cuts = f.leaves().iter().map(|&l| Cut::principal(x.value_at(l))).collect();
        IdealFamily { forest: f.clone(), cuts }
    }

    /// The prime ideal `p` as an R-module; for a leaf this is the maximal ideal.
    pub fn prime(forest: &Arc<SpectralForest>, p: PrimeId) -> Self {
        let d = forest.depth(p);
        let cuts = forest
            .leaves()
            .iter()
            .map(|&l| {
                if forest.is_below(p, l) {
                    Cut::Bounded { pivot: ValueVector::zeros(d), closed: false }
                        .canonical(forest.value_group(l))
                } else {
                    Cut::unit(forest.depth(l))
                }
            })
            .collect();
        IdealFamily { forest: forest.clone(), cuts }
    }

    /// The localization `R_P` as an R-module.
    pub fn localization(forest: &Arc<SpectralForest>, p: PrimeId) -> Self {
        let cuts = forest
            .leaves()
            .iter()
            .map(|&l| match forest.meet(p, l) {
                Some(m) => Cut::unit(forest.depth(m)),
                None => Cut::Full,
            })
            .collect();
        IdealFamily { forest: forest.clone(), cuts }
    }

    pub fn forest(&self) -> &Arc<SpectralForest> {
        &self.forest
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    pub fn cut(&self, leaf: PrimeId) -> &Cut {
        &self.cuts[self.forest.leaf_index(leaf).expect("maximal ideal")]
    }

    pub fn cut_named(&self, name: &str) -> Option<&Cut> {
        self.forest.id(name).and_then(|p| self.forest.leaf_index(p)).map(|i| &self.cuts[i])
    }

    fn same_forest(&self, other: &IdealFamily) -> Result<(), IdealError> {
        if Arc::ptr_eq(&self.forest, &other.forest) || self.forest == other.forest {
            Ok(())
        } else {
            Err(IdealError::ForestMismatch)
        }
    }

    fn zip_with(
        &self,
        other: &IdealFamily,
        op: impl Fn(&Cut, &Cut, PrimeId) -> Cut,
    ) -> Result<IdealFamily, IdealError> {
        self.same_forest(other)?;
        let leaves = self.forest.leaves();
        let cuts = (0..leaves.len()).map(|i| op(&self.cuts[i], &other.cuts[i], leaves[i])).collect();
        Self::assemble(&self.forest, cuts)
    }

    pub fn intersect(&self, other: &IdealFamily) -> Result<IdealFamily, IdealError> {
        self.zip_with(other, |a, b, _| a.meet(b))
    }

    pub fn sum(&self, other: &IdealFamily) -> Result<IdealFamily, IdealError> {
        self.zip_with(other, |a, b, _| a.join(b))
    }

    pub fn product(&self, other: &IdealFamily) -> Result<IdealFamily, IdealError> {
        let f = self.forest.clone();
        self.zip_with(other, |a, b, l| a.sum(b, f.value_group(l)))
    }

    pub fn scale(&self, x: &PrincipalWitness) -> IdealFamily {
        let f = &self.forest;
        let cuts = f.leaves().iter().zip(&self.cuts).map(|(&l, c)| c.shift(&x.value_at(l))).collect();
        IdealFamily { forest: f.clone(), cuts }
    }

    /// `(self : other) = {x : x·other ⊆ self}`.
    pub fn colon(&self, other: &IdealFamily) -> Result<Colon, IdealError> {
        self.same_forest(other)?;
        let f = &self.forest;
        let leaves = f.leaves();
        let mut residuals = Vec::with_capacity(leaves.len());
        for (i, &m) in leaves.iter().enumerate() {
            let r = self.cuts[i].colon(&other.cuts[i], f.value_group(m));
            if r == Cut::Zero {
                return Ok(Colon::Zero);
            }
            residuals.push(r);
        }
        let cuts = leaves
            .iter()
            .map(|&n| {
                leaves.iter().zip(&residuals).fold(Cut::Full, |acc, (&m, r)| match f.meet(m, n) {
                    Some(q) => acc.meet(&r.project(f.depth(q))),
                    None => acc,
                })
            })
            .collect();
        Ok(Colon::Module(Self::assemble(f, cuts)?))
    }

    /// `I·R_P` as a cut in the value group of `p`.
    pub fn localize(&self, p: PrimeId) -> Cut {
        let leaf = self.forest.leaves_above(p)[0];
        self.cut(leaf).project(self.forest.depth(p))
    }

    /// `I·R_P` as an R-module.
    pub fn localization_module(&self, p: PrimeId) -> IdealFamily {
        let f = &self.forest;
        let c = self.localize(p);
        let cuts = f
            .leaves()
            .iter()
            .map(|&n| match f.meet(p, n) {
                Some(m) => c.project(f.depth(m)),
                None => Cut::Full,
            })
            .collect();
        IdealFamily { forest: f.clone(), cuts }
    }

    /// `other ⊆ self`.
    pub fn includes(&self, other: &IdealFamily) -> bool {
        self.cuts.iter().zip(&other.cuts).all(|(a, b)| a.includes(b))
    }

    pub fn is_unit(&self) -> bool {
        *self == Self::unit(&self.forest)
    }

    pub fn is_integral(&self) -> bool {
        Self::unit(&self.forest).includes(self)
    }

    /// A witness `d` with `d·self ⊆ R`, if one exists.
    pub fn is_fractional(&self) -> Option<PrincipalWitness> {
        if self.cuts.contains(&Cut::Full) {
            return None;
        }
        let f = &self.forest;
        let mut values = vec![Scalar::zero(); f.len()];
        for &r in f.roots() {
            let lift = f
                .leaves_above(r)
                .iter()
                .map(|&l| -&self.cut(l).pivot().expect("bounded").0[0])
                .max()
                .expect("trees have leaves");
            values[r.0] = &lift + &Scalar::one();
        }
        let d = PrincipalWitness::new(f.clone(), values).expect("integers lie in every group");
        debug_assert!(self.scale(&d).is_integral());
        Some(d)
    }

    /// Compares extensionally through probe vectors around both families' pivots.
    pub fn membership_equivalence(&self, other: &IdealFamily) -> Membership {
        let f = &self.forest;
        for (i, &leaf) in f.leaves().iter().enumerate() {
            let (a, b) = (&self.cuts[i], &other.cuts[i]);
            if a == b {
                continue;
            }
            let g = f.value_group(leaf);
            let pivots: Vec<&ValueVector> = [a, b].iter().filter_map(|c| c.pivot()).collect();
            let mut probes = probe_set(&pivots, g);
            if probes.is_empty() {
                probes.push(ValueVector::zeros(g.depth()));
            }
            for p in probes {
                let (x, y) = (a.contains(&p), b.contains(&p));
                if x != y {
                    return Membership::Separated { leaf: f.name(leaf).to_string(), probe: p, in_left: x };
                }
            }
            return Membership::Unseparated { leaf: f.name(leaf).to_string() };
        }
        Membership::Equal
    }

    /// Order on modules by inclusion, `None` when incomparable.
    pub fn inclusion_cmp(&self, other: &IdealFamily) -> Option<Ordering> {
        match (other.includes(self), self.includes(other)) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            (false, false) => None,
        }
    }

    /// Re-homes a family onto an equal forest value (same names and shape).
    pub fn rehome(&self, forest: &Arc<SpectralForest>) -> Result<IdealFamily, IdealError> {
        if **forest != *self.forest {
            return Err(IdealError::ForestMismatch);
        }
        Ok(IdealFamily { forest: forest.clone(), cuts: self.cuts.clone() })
    }

    pub fn restrict_to_branch(&self, b: BranchId) -> IdealFamily {
        Overring::branch(self.forest.clone(), b).extend(self)
    }

    pub fn contract_from_branch(
        j: &IdealFamily,
        parent: &Arc<SpectralForest>,
        b: BranchId,
    ) -> Result<IdealFamily, IdealError> {
        Overring::branch(parent.clone(), b).contract(j)
    }
}

impl fmt::Display for IdealFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .forest
            .leaves()
            .iter()
            .zip(&self.cuts)
            .map(|(&l, c)| format!("{}: {}", self.forest.name(l), c))
            .collect();
        f.write_str(&parts.join("; "))
    }
}

impl Serialize for IdealFamily {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OverringKind {
    /// A member of the standard decomposition.
    Branch(BranchId),
    Localization(PrimeId),
}

/// A flat overring `T` of the parent domain, with its own presentation.
#[derive(Clone, Debug)]
pub struct Overring {
    parent: Arc<SpectralForest>,
    kind: OverringKind,
    forest: Arc<SpectralForest>,
}

impl Overring {
    pub fn branch(parent: Arc<SpectralForest>, b: BranchId) -> Self {
        let forest = Arc::new(parent.subtree(parent.branch_root(b)));
        Overring { parent, kind: OverringKind::Branch(b), forest }
    }

    pub fn localization(parent: Arc<SpectralForest>, p: PrimeId) -> Self {
        let forest = Arc::new(parent.chain_to(p));
        Overring { parent, kind: OverringKind::Localization(p), forest }
    }

    /// Resolves a name: a tree root names its branch, any other prime its localization.
    pub fn named(parent: Arc<SpectralForest>, name: &str) -> Result<Self, IdealError> {
        let p = parent.lookup(name)?;
        if parent.node(p).parent.is_none() {
            let b = parent.branch_of(p);
            Ok(Self::branch(parent, b))
        } else {
            Ok(Self::localization(parent, p))
        }
    }

    pub fn kind(&self) -> OverringKind {
        self.kind
    }

    pub fn parent(&self) -> &Arc<SpectralForest> {
        &self.parent
    }

    pub fn forest(&self) -> &Arc<SpectralForest> {
        &self.forest
    }

    pub fn is_branch(&self) -> bool {
        matches!(self.kind, OverringKind::Branch(_))
    }

    pub fn name(&self) -> String {
        match self.kind {
            OverringKind::Branch(b) => self.parent.name(self.parent.branch_root(b)).to_string(),
            OverringKind::Localization(p) => format!("R_{}", self.parent.name(p)),
        }
    }

    /// `I·T`.
    pub fn extend(&self, a: &IdealFamily) -> IdealFamily {
        let cuts = match self.kind {
            OverringKind::Branch(_) => self
                .forest
                .leaves()
                .iter()
                .map(|&l| a.cut_named(self.forest.name(l)).expect("branch leaf").clone())
                .collect(),
            OverringKind::Localization(p) => vec![a.localize(p)],
        };
        IdealFamily { forest: self.forest.clone(), cuts }
    }

    /// The T-module `j` viewed as an R-submodule of K.
    pub fn module_of(&self, j: &IdealFamily) -> IdealFamily {
        self.lift(j, true)
    }

    /// An R-module `I` with `I·T = j`, equal to `R` away from `T`; for integral
    /// `j` over a branch this is `j ∩ R`.
    pub fn contract(&self, j: &IdealFamily) -> Result<IdealFamily, IdealError> {
        if *j.forest != *self.forest {
            return Err(IdealError::ForestMismatch);
        }
        Ok(self.lift(j, false))
    }

    fn lift(&self, j: &IdealFamily, full_away: bool) -> IdealFamily {
        let f = &self.parent;
        let away_cut = |l: PrimeId| if full_away { Cut::Full } else { Cut::unit(f.depth(l)) };
        let cuts = match self.kind {
            OverringKind::Branch(b) => f
                .leaves()
                .iter()
                .map(|&l| {
                    if f.branch_of(l) == b {
                        j.cut_named(f.name(l)).expect("branch leaf").clone()
                    } else {
                        away_cut(l)
                    }
                })
                .collect(),
            OverringKind::Localization(p) => {
                let c = &j.cuts[0];
                f.leaves()
                    .iter()
                    .map(|&n| match f.meet(p, n) {
                        Some(m) => c.project(f.depth(m)),
                        None => away_cut(n),
                    })
                    .collect()
            }
        };
        IdealFamily { forest: f.clone(), cuts }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fx(entries: &[(&str, Option<&str>, &str)]) -> Arc<SpectralForest> {
        Arc::new(SpectralForest::build(entries))
    }

    fn fx_a() -> Arc<SpectralForest> {
        fx(&[("M1", None, "Q"), ("M2", None, "Z")])
    }

    fn fx_b() -> Arc<SpectralForest> {
        fx(&[("P", None, "Z"), ("M1", Some("P"), "Q"), ("M2", Some("P"), "Z")])
    }

    fn fx_c() -> Arc<SpectralForest> {
        fx(&[("P", None, "Z"), ("M", Some("P"), "Q")])
    }

    #[test]
    fn unit_is_self_residual() {
        for f in [fx_a(), fx_b(), fx_c()] {
            let r = IdealFamily::unit(&f);
            assert_eq!(r.colon(&r).unwrap().module().unwrap(), r);
        }
    }

    #[test]
    fn dense_maximal_ideal_has_residual_r() {
        let f = fx_c();
        let m = IdealFamily::prime(&f, f.id("M").unwrap());
        let r = IdealFamily::unit(&f);
        assert_eq!(r.colon(&m).unwrap().module().unwrap(), r);
    }

    #[test]
    fn principal_residual_is_inverse() {
        let f = fx_a();
        let x = PrincipalWitness::new(f.clone(), vec![Scalar::from_ratio(3, 2), Scalar::from_int(-2)])
            .unwrap();
        let r = IdealFamily::unit(&f);
        let inv = r.colon(&IdealFamily::principal(&x)).unwrap().module().unwrap();
        assert_eq!(inv, IdealFamily::principal(&x.inverse()));
    }

    #[test]
    fn localize_projects_prefix() {
        let f = fx_b();
        let p = f.id("P").unwrap();
        let m1 = IdealFamily::prime(&f, f.id("M1").unwrap());
        assert_eq!(m1.localize(p), Cut::unit(1));
        assert_eq!(IdealFamily::unit(&f).localize(p), Cut::unit(1));
    }

    #[test]
    fn incompatible_families_are_rejected() {
        let f = fx_b();
        let cuts = vec![Cut::unit(2), Cut::principal(ValueVector::from_ints(&[1, 0]))];
        assert!(matches!(IdealFamily::new(f, cuts), Err(IdealError::Incompatible { .. })));
    }

    #[test]
    fn fractional_witnesses() {
        let f = fx_b();
        let tp = IdealFamily::localization(&f, f.id("P").unwrap());
        let d = tp.is_fractional().unwrap();
        assert!(d.node_value(f.id("P").unwrap()).is_positive());
        let a = fx_a();
        let cuts = vec![Cut::Full, Cut::unit(1)];
        assert!(IdealFamily::new(a, cuts).unwrap().is_fractional().is_none());
    }

    #[test]
    fn branch_contract_of_maximal() {
        let f = fx_a();
        let t = Overring::branch(f.clone(), BranchId(0));
        let mt = IdealFamily::prime(t.forest(), t.forest().id("M1").unwrap());
        let back = t.contract(&mt).unwrap();
        assert_eq!(back.to_string(), "M1: > (0) @level 1; M2: >= (0) @level 1");
        assert_eq!(t.extend(&back), mt);
    }

    #[test]
    fn probes_separate_maximal_from_unit() {
        let f = fx_c();
        let m = IdealFamily::prime(&f, f.id("M").unwrap());
        match m.membership_equivalence(&IdealFamily::unit(&f)) {
            Membership::Separated { probe, in_left, .. } => {
                assert!(probe.is_zero() && !in_left);
            }
            other => panic!("{other:?}"),
        }
    }
}
