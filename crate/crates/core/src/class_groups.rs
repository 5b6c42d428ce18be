//! Star class groups, described as direct sums of quotients `R/H` of the reals.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::forest::SpectralForest;
use crate::ideal::{Colon, IdealFamily, IdealSampler, Overring};
use crate::ordgroups::{Cut, RankOneGroup};
use crate::star::{StarError, StarExpr, StarPredicateReport};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ClassGroupError {
    #[error("`{0}` does not present a valuation domain")]
    NotAChain(String),
    #[error(transparent)]
    Star(#[from] StarError),
}

/// `0` or `R/H1 ⊕ R/H2 ⊕ ...`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroupDescriptor {
    quotients: Vec<RankOneGroup>,
}

impl GroupDescriptor {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn reals_mod(h: RankOneGroup) -> Self {
        GroupDescriptor { quotients: vec![h] }
    }

    pub fn is_zero(&self) -> bool {
        self.quotients.is_empty()
    }

    pub fn quotients(&self) -> &[RankOneGroup] {
        &self.quotients
    }

    pub fn direct_sum(mut self, other: GroupDescriptor) -> Self {
        self.quotients.extend(other.quotients);
        self
    }
}

impl fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.quotients.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .quotients
            .iter()
            .map(|h| {
                let n = h.name();
                if n.contains('+') { format!("R/({n})") } else { format!("R/{n}") }
            })
            .collect();
        f.write_str(&parts.join(" ⊕ "))
    }
}

impl Serialize for GroupDescriptor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `Cl_v(V)` for a valuation domain: `R/H` with `H` the group of the top
/// rank-one quotient when that group is dense, and `0` when it is discrete.
pub fn clv_of_valuation(chain: &SpectralForest) -> Result<GroupDescriptor, ClassGroupError> {
    if chain.roots().len() != 1 || chain.leaves().len() != 1 {
        return Err(ClassGroupError::NotAChain(chain.to_string()));
    }
    let h = chain.group(chain.leaves()[0]);
    Ok(if h.is_dense() { GroupDescriptor::reals_mod(h.clone()) } else { GroupDescriptor::zero() })
}

/// `⊕_M Cl_{*_M}(R_M)`, where `*_M` is `v` on `R_M` exactly when `M* ≠ M`.
pub fn local_class_group(forest: &Arc<SpectralForest>, s: &StarExpr) -> Result<GroupDescriptor, ClassGroupError> {
    let mut out = GroupDescriptor::zero();
    for &m in forest.leaves() {
        let p = IdealFamily::prime(forest, m);
        if s.apply(&p)? != p {
            out = out.direct_sum(clv_of_valuation(&forest.chain_to(m))?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Surjection {
    pub source: GroupDescriptor,
    pub target: GroupDescriptor,
    pub kernel: GroupDescriptor,
}

/// The projection of the local class group onto the summands at `kept`.
pub fn localization_surjection(
    forest: &Arc<SpectralForest>,
    s: &StarExpr,
    kept: &[&str],
) -> Result<Surjection, ClassGroupError> {
    let mut target = GroupDescriptor::zero();
    let mut kernel = GroupDescriptor::zero();
    for &m in forest.leaves() {
        let p = IdealFamily::prime(forest, m);
        if s.apply(&p)? == p {
            continue;
        }
        let part = clv_of_valuation(&forest.chain_to(m))?;
        if kept.contains(&forest.name(m)) {
            target = target.direct_sum(part);
        } else {
            kernel = kernel.direct_sum(part);
        }
    }
    Ok(Surjection { source: local_class_group(forest, s)?, target, kernel })
}

/// `(I·(R:I))* = R`.
pub fn is_star_invertible(s: &StarExpr, a: &IdealFamily) -> Result<bool, StarError> {
    let r = IdealFamily::unit(a.forest());
    let Colon::Module(inv) = r.colon(a)? else { return Ok(false) };
    Ok(s.apply(&a.product(&inv)?)?.is_unit())
}

fn invertibles(forest: &Arc<SpectralForest>, s: &StarExpr, samples: usize, seed: u64) -> Result<Vec<IdealFamily>, StarError> {
    let mut sampler = IdealSampler::new(forest.clone(), seed);
    let mut out = Vec::new();
    for _ in 0..samples {
        let i = sampler.ideal();
        if is_star_invertible(s, &i)? {
            out.push(i);
        }
    }
    Ok(out)
}

/// Sums of `*`-invertible ideals are `*`-invertible.
pub fn invertible_sum_check(forest: &Arc<SpectralForest>, s: &StarExpr, samples: usize, seed: u64) -> StarPredicateReport {
    let mut rep = StarPredicateReport::new("invertible-sum", s.to_string(), "sums-of-invertible-ideals", seed);
    rep.samples = samples;
    let inv = match invertibles(forest, s, samples, seed) {
        Ok(v) => v,
        Err(e) => {
            rep.fail(vec![format!("error: {e}")]);
            return rep;
        }
    };
    for (k, a) in inv.iter().enumerate() {
        let b = &inv[(k * 5 + 1) % inv.len()];
        let sum = a.sum(b).expect("same forest");
        match is_star_invertible(s, &sum) {
            Ok(true) => {}
            Ok(false) => {
                rep.fail(vec![format!("I = {a}"), format!("J = {b}"), format!("I+J = {sum}")]);
                break;
            }
            Err(e) => {
                rep.fail(vec![format!("I+J = {sum}"), format!("error: {e}")]);
                break;
            }
        }
    }
    rep.note = Some(format!("{} invertible samples", inv.len()));
    rep
}

/// The map `I ↦ (I·T)_T` over the branches is a well-defined, multiplicative,
/// injective and surjective map on `*`-invertible ideals.
pub fn gamma_decomposition_check(
    forest: &Arc<SpectralForest>,
    s: &StarExpr,
    samples: usize,
    seed: u64,
) -> StarPredicateReport {
    let mut rep = StarPredicateReport::new("gamma-decomposition", s.to_string(), "class-group-decomposition", seed);
    rep.samples = samples;
    if let Err(w) = gamma_inner(forest, s, samples, seed) {
        rep.fail(w);
    }
    rep
}

fn gamma_inner(forest: &Arc<SpectralForest>, s: &StarExpr, samples: usize, seed: u64) -> Result<(), Vec<String>> {
    let err = |e: StarError| vec![format!("error: {e}")];
    let branches: Vec<(Overring, StarExpr)> = forest
        .standard_decomposition()
        .into_iter()
        .map(|b| {
            let t = Overring::branch(forest.clone(), b.id);
            let st = StarExpr::extended(s.clone(), forest, forest.name(b.root));
            (t, st)
        })
        .collect();
    let inv = invertibles(forest, s, samples, seed).map_err(err)?;
    for (k, i) in inv.iter().enumerate() {
        let ci = s.apply(i).map_err(err)?;
        let mut glued = ci.cuts().to_vec();
        for (t, st) in &branches {
            let it = t.extend(i);
            if !is_star_invertible(st, &it).map_err(err)? {
                return Err(vec![format!("I = {i}"), format!("I·{} is not invertible", t.name())]);
            }
            let j = &inv[(k * 3 + 2) % inv.len()];
            let lhs = t.extend(&s.apply(&i.product(j).expect("same forest")).map_err(err)?);
            let rhs = st.apply(&it.product(&t.extend(j)).expect("same forest")).map_err(err)?;
            if lhs != rhs {
                return Err(vec![format!("I = {i}"), format!("J = {j}"), format!("at {}: {lhs} vs {rhs}", t.name())]);
            }
            let closed_t = st.apply(&it).map_err(err)?;
            for &l in t.forest().leaves() {
                let idx = forest.leaf_index(forest.id(t.forest().name(l)).expect("leaf")).expect("leaf");
                glued[idx] = closed_t.cut(l).clone();
            }
        }
        let back = IdealFamily::new(forest.clone(), glued).map_err(|e| vec![e.to_string()])?;
        if back != ci {
            return Err(vec![format!("I* = {ci}"), format!("glued = {back}")]);
        }
    }
    // surjectivity: glue independent invertible choices on each branch
    for round in 0..samples.min(40) {
        let mut cuts = vec![Cut::Full; forest.leaves().len()];
        let mut parts = Vec::new();
        for (n, (t, st)) in branches.iter().enumerate() {
            let mut sampler = IdealSampler::new(t.forest().clone(), seed ^ ((round * 31 + n) as u64));
            let pick = (0..8).map(|_| sampler.ideal()).find(|j| is_star_invertible(st, j).unwrap_or(false));
            let Some(j) = pick else { continue };
            for &l in t.forest().leaves() {
                let idx = forest.leaf_index(forest.id(t.forest().name(l)).expect("leaf")).expect("leaf");
                cuts[idx] = j.cut(l).clone();
            }
            parts.push((t, j));
        }
        if parts.len() < branches.len() {
            continue;
        }
        let i = IdealFamily::new(forest.clone(), cuts).map_err(|e| vec![e.to_string()])?;
        if !is_star_invertible(s, &i).map_err(err)? {
            return Err(vec![format!("glued I = {i}"), "not invertible".into()]);
        }
        for (t, j) in parts {
            if t.extend(&i) != j {
                return Err(vec![format!("glued I = {i}"), format!("restriction to {} changed", t.name())]);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptors() {
        let q = SpectralForest::chain(&["Z", "Q"]);
        assert_eq!(clv_of_valuation(&q).unwrap().to_string(), "R/Q");
        assert_eq!(clv_of_valuation(&SpectralForest::chain(&["Z", "Z"])).unwrap().to_string(), "0");
        let s2 = SpectralForest::chain(&["Z+Z*sqrt(2)"]);
        assert_eq!(clv_of_valuation(&s2).unwrap().to_string(), "R/(Z+Z*sqrt(2))");
        let two = SpectralForest::build(&[("M1", None, "Q"), ("M2", None, "Q")]);
        assert!(clv_of_valuation(&two).is_err());
    }

    #[test]
    fn local_groups() {
        let f = Arc::new(SpectralForest::build(&[("M1", None, "Q"), ("M2", None, "Z[1/2]")]));
        let v = local_class_group(&f, &StarExpr::Divisorial).unwrap();
        assert_eq!(v.to_string(), "R/Q ⊕ R/Z[1/2]");
        assert!(local_class_group(&f, &StarExpr::Identity).unwrap().is_zero());
        let s = localization_surjection(&f, &StarExpr::Divisorial, &["M1"]).unwrap();
        assert_eq!((s.target.to_string(), s.kernel.to_string()), ("R/Q".into(), "R/Z[1/2]".into()));
    }
}
