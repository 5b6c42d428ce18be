//! Star operations as expression trees evaluated on ideal families.

mod checks;
mod literal;
mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use checks::{
    axioms_check, closed_under_sum_check, count_star_operations, extendability_check, lambda, lambda_rho_roundtrip,
    m_canonical_candidate, m_canonical_check, m_canonical_search, property_report, rho, stable_ops,
    transfer_suite, MCanonicalSearch, Property, StableOps, StarCount,
};
pub use literal::{parse_star, Bound};
pub use report::{Evidence, StarPredicateReport, Verdict};

use crate::forest::{ForestError, SpectralForest};
use crate::ideal::{Colon, IdealError, IdealFamily, Overring, OverringKind, PrincipalWitness};
use crate::ordgroups::{Cut, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum StarError {
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("scope error: {0}")]
    Scope(String),
    #[error("transport found no shift for a non-divisorial ideal: {0}")]
    NoTransportShift(String),
    #[error("refused: {base} is not extendable to {target} ({witness})")]
    NotExtendable { base: String, target: String, witness: String },
    #[error("parse error at {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error("input is not a fractional ideal")]
    NotFractional,
}

#[derive(Clone, Debug)]
pub enum StarExpr {
    Identity,
    Divisorial,
    /// `I ↦ ⋂ I·R_P` over the named primes.
    Spectral(Vec<String>),
    Meet(Vec<StarExpr>),
    /// Keyed by tree-root name; each entry acts on that branch's ideals.
    BranchProduct(BTreeMap<String, StarExpr>),
    /// Keyed by maximal-ideal name; each entry acts on the valuation overring `R_M`.
    LocalProduct(BTreeMap<String, StarExpr>),
    /// Transport of an operation on the forest above `core`.
    Transport { core: String, inner: Box<StarExpr> },
    /// The operation induced on the overring `target` of `parent` by `base`.
    Extended { base: Box<StarExpr>, parent: Arc<SpectralForest>, target: String },
}

impl PartialEq for StarExpr {
    fn eq(&self, other: &Self) -> bool {
        use StarExpr::*;
        match (self, other) {
            (Identity, Identity) | (Divisorial, Divisorial) => true,
            (Spectral(a), Spectral(b)) => a == b,
            (Meet(a), Meet(b)) => a == b,
            (BranchProduct(a), BranchProduct(b)) | (LocalProduct(a), LocalProduct(b)) => a == b,
            (Transport { core: c, inner: i }, Transport { core: d, inner: j }) => c == d && i == j,
            (
                Extended { base: a, parent: p, target: t },
                Extended { base: b, parent: q, target: u },
            ) => a == b && t == u && (Arc::ptr_eq(p, q) || p == q),
            _ => false,
        }
    }
}

impl StarExpr {
    pub fn meet(list: Vec<StarExpr>) -> StarExpr {
        StarExpr::Meet(list)
    }

    pub fn extended(base: StarExpr, parent: &Arc<SpectralForest>, target: &str) -> StarExpr {
        StarExpr::Extended { base: Box::new(base), parent: parent.clone(), target: target.to_string() }
    }

    pub fn transport(core: &str, inner: StarExpr) -> StarExpr {
        StarExpr::Transport { core: core.to_string(), inner: Box::new(inner) }
    }

    /// Evaluates the closure of `a`.
    pub fn apply(&self, a: &IdealFamily) -> Result<IdealFamily, StarError> {
        let f = a.forest();
        match self {
            StarExpr::Identity => Ok(a.clone()),
            StarExpr::Divisorial => divisorial(a),
            StarExpr::Spectral(names) => {
                let mut acc = IdealFamily::full(f);
                for n in names {
                    let p = f.lookup(n)?;
                    acc = acc.intersect(&a.localization_module(p))?;
                }
                Ok(acc)
            }
            StarExpr::Meet(list) => {
                let mut acc = IdealFamily::full(f);
                for s in list {
                    acc = acc.intersect(&s.apply(a)?)?;
                }
                Ok(acc)
            }
            StarExpr::BranchProduct(map) => {
                let mut cuts: Vec<Cut> = a.cuts().to_vec();
                for b in f.standard_decomposition() {
                    let root = f.name(b.root);
                    let Some(s) = map.get(root) else { continue };
                    let t = Overring::branch(f.clone(), b.id);
                    let closed = s.apply(&t.extend(a))?;
                    for &l in t.forest().leaves() {
                        let name = t.forest().name(l);
                        let idx = f.leaf_index(f.lookup(name)?).expect("branch leaf");
                        cuts[idx] = closed.cut(l).clone();
                    }
                }
                Ok(IdealFamily::new(f.clone(), cuts)?)
            }
            StarExpr::LocalProduct(map) => {
                let mut acc = IdealFamily::full(f);
                for &m in f.leaves() {
                    let t = Overring::localization(f.clone(), m);
                    let local = t.extend(a);
                    let closed = match map.get(f.name(m)) {
                        Some(s) => s.apply(&local)?,
                        None => local,
                    };
                    acc = acc.intersect(&t.module_of(&closed))?;
                }
                Ok(acc)
            }
            StarExpr::Transport { core, inner } => transport(core, inner, a),
            StarExpr::Extended { base, parent, target } => {
                let t = Overring::named(parent.clone(), target)?;
                if **t.forest() != **f {
                    return Err(StarError::Scope(format!(
                        "extend(.., {target}) expects ideals over {}",
                        t.forest()
                    )));
                }
                if let OverringKind::Localization(_) = t.kind() {
                    if let Some(witness) = checks::extension_refusal(base, parent, target) {
                        return Err(StarError::NotExtendable {
                            base: base.to_string(),
                            target: target.clone(),
                            witness,
                        });
                    }
                }
                let a = a.rehome(t.forest())?;
                let lifted = t.contract(&a)?;
                Ok(t.extend(&base.apply(&lifted)?).rehome(f)?)
            }
        }
    }

    /// Checks names against the forest the expression will act on.
    pub fn check_scope(&self, f: &Arc<SpectralForest>) -> Result<(), StarError> {
        match self {
            StarExpr::Identity | StarExpr::Divisorial => Ok(()),
            StarExpr::Spectral(names) => {
                let mut ids = Vec::new();
                for n in names {
                    ids.push(f.lookup(n)?);
                }
                for &l in f.leaves() {
                    if !ids.contains(&l) {
                        return Err(StarError::Scope(format!(
                            "spec(..) must list every maximal ideal to fix R; `{}` missing",
                            f.name(l)
                        )));
                    }
                }
                Ok(())
            }
            StarExpr::Meet(list) => list.iter().try_for_each(|s| s.check_scope(f)),
            StarExpr::BranchProduct(map) => {
                for (root, s) in map {
                    let p = f.lookup(root)?;
                    if f.node(p).parent.is_some() {
                        return Err(StarError::Scope(format!("`{root}` is not a branch root")));
                    }
                    s.check_scope(&Arc::new(f.subtree(p)))?;
                }
                Ok(())
            }
            StarExpr::LocalProduct(map) => {
                for (leaf, s) in map {
                    let p = f.lookup(leaf)?;
                    if !f.is_leaf(p) {
                        return Err(StarError::Scope(format!("`{leaf}` is not maximal")));
                    }
                    s.check_scope(&Arc::new(f.chain_to(p)))?;
                }
                Ok(())
            }
            StarExpr::Transport { core, inner } => {
                let q = f.lookup(core)?;
                inner.check_scope(&Arc::new(f.cut_branch(q)?))
            }
            StarExpr::Extended { base, parent, target } => {
                let t = Overring::named(parent.clone(), target)?;
                if **t.forest() != **f {
                    return Err(StarError::Scope(format!("extend(.., {target}) acts on {}", t.forest())));
                }
                base.check_scope(parent)
            }
        }
    }
}

fn divisorial(a: &IdealFamily) -> Result<IdealFamily, StarError> {
    let r = IdealFamily::unit(a.forest());
    match r.colon(a)? {
        Colon::Zero => Ok(IdealFamily::full(a.forest())),
        Colon::Module(inv) => match r.colon(&inv)? {
            Colon::Zero => Ok(IdealFamily::full(a.forest())),
            Colon::Module(m) => Ok(m),
        },
    }
}

/// `I ↦ I` on divisorial ideals; otherwise shift so that `I·R_Q = R_Q`, pass to the
/// forest above `Q`, close there with `inner`, and come back.
fn transport(core: &str, inner: &StarExpr, a: &IdealFamily) -> Result<IdealFamily, StarError> {
    let f = a.forest();
    let q = f.lookup(core)?;
    let above = Arc::new(f.cut_branch(q)?);
    if divisorial(a)? == *a {
        return Ok(a.clone());
    }
    let d = f.depth(q);
    let (Cut::Bounded { pivot, closed: true }, true) = (a.localize(q), true) else {
        return Err(StarError::NoTransportShift(a.to_string()));
    };
    if pivot.len() != d {
        return Err(StarError::NoTransportShift(a.to_string()));
    }
    let mut values = vec![Scalar::zero(); f.len()];
    for (node, g) in f.path(q).iter().zip(&pivot.0) {
        values[node.0] = -g;
    }
    let alpha = PrincipalWitness::new(f.clone(), values)?;
    let shifted = a.scale(&alpha);
    let mut down = Vec::with_capacity(above.leaves().len());
    for &l in above.leaves() {
        let c = shifted.cut_named(above.name(l)).expect("same maximal ideals");
        down.push(c.drop_prefix(d).ok_or_else(|| StarError::NoTransportShift(a.to_string()))?);
    }
    let image = IdealFamily::new(above.clone(), down)?;
    let closed = inner.apply(&image)?;
    let mut up = Vec::with_capacity(f.leaves().len());
    for &l in f.leaves() {
        let c = closed.cut_named(f.name(l)).expect("same maximal ideals");
        up.push(c.prepend_zeros(d).ok_or_else(|| StarError::NoTransportShift(a.to_string()))?);
    }
    Ok(IdealFamily::new(f.clone(), up)?.scale(&alpha.inverse()))
}

impl fmt::Display for StarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StarExpr::Identity => f.write_str("d"),
            StarExpr::Divisorial => f.write_str("v"),
            StarExpr::Spectral(names) => write!(f, "spec({})", names.join(",")),
            StarExpr::Meet(list) => {
                let parts: Vec<String> = list.iter().map(ToString::to_string).collect();
                write!(f, "meet({})", parts.join(","))
            }
            StarExpr::BranchProduct(map) | StarExpr::LocalProduct(map) => {
                let head = if matches!(self, StarExpr::BranchProduct(_)) { "branches" } else { "locals" };
                let parts: Vec<String> = map.iter().map(|(k, v)| format!("{k}:{v}")).collect();
                write!(f, "{head}{{{}}}", parts.join(", "))
            }
            StarExpr::Transport { core, inner } => write!(f, "transport({core}, {inner})"),
            StarExpr::Extended { base, target, .. } => write!(f, "extend({base}, {target})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::parse_ideal;

    fn forest(entries: &[(&str, Option<&str>, &str)]) -> Arc<SpectralForest> {
        Arc::new(SpectralForest::build(entries))
    }

    #[test]
    fn dense_maximal_ideal_closes_to_r() {
        let f = forest(&[("P", None, "Z"), ("M", Some("P"), "Q")]);
        let m = IdealFamily::prime(&f, f.id("M").unwrap());
        let mv = StarExpr::Divisorial.apply(&m).unwrap();
        assert_eq!(mv, IdealFamily::unit(&f));
        assert!(mv.includes(&m) && mv != m);
    }

    #[test]
    fn discrete_maximal_ideals_are_divisorial() {
        let f = forest(&[("P", None, "Z"), ("M1", Some("P"), "Z"), ("M2", Some("P"), "Z")]);
        for &l in f.leaves() {
            let m = IdealFamily::prime(&f, l);
            assert_eq!(StarExpr::Divisorial.apply(&m).unwrap(), m);
        }
    }

    #[test]
    fn branch_product_fixes_principal() {
        let f = forest(&[("M1", None, "Q"), ("M2", None, "Z")]);
        let s = parse_star(&f, "branches{M1:v, M2:d}").unwrap().expr;
        let i = parse_ideal(&f, "M1: >= (1/2); M2: >= (3)").unwrap();
        assert_eq!(s.apply(&i).unwrap(), i);
    }

    #[test]
    fn transport_of_v_is_v() {
        let f = forest(&[("P", None, "Z"), ("M1", Some("P"), "Q"), ("M2", Some("P"), "Z")]);
        let t = StarExpr::transport("P", StarExpr::Divisorial);
        let m1 = IdealFamily::prime(&f, f.id("M1").unwrap());
        assert_eq!(t.apply(&m1).unwrap(), StarExpr::Divisorial.apply(&m1).unwrap());
        let td = StarExpr::transport("P", StarExpr::Identity);
        assert_eq!(td.apply(&m1).unwrap(), m1);
    }

    #[test]
    fn scope_errors() {
        let f = forest(&[("M1", None, "Q"), ("M2", None, "Z")]);
        assert!(parse_star(&f, "spec(M1)").is_err());
        assert!(parse_star(&f, "branches{X:v}").is_err());
        assert!(parse_star(&f, "transport(M1, v)").is_err());
    }
}
