use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use super::{Evidence, StarError, StarExpr, StarPredicateReport, Verdict};
use crate::forest::{CorePrime, SpectralForest};
use crate::ideal::{structured_ideals, Colon, IdealFamily, IdealSampler, Overring};
use crate::ordgroups::{Cut, ValueVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Stable,
    Semifinite,
    Spectral,
    FiniteType,
    Eab,
}

impl Property {
    pub const ALL: [Property; 5] =
        [Property::Stable, Property::Semifinite, Property::Spectral, Property::FiniteType, Property::Eab];

    pub fn name(self) -> &'static str {
        match self {
            Property::Stable => "stable",
            Property::Semifinite => "semifinite",
            Property::Spectral => "spectral",
            Property::FiniteType => "finite-type",
            Property::Eab => "eab",
        }
    }

    pub fn parse(s: &str) -> Option<Property> {
        Property::ALL.into_iter().find(|p| p.name() == s)
    }
}

/// Structured ideals first, then `n` sampled ones.
fn test_ideals(forest: &Arc<SpectralForest>, n: usize, seed: u64) -> Vec<IdealFamily> {
    let mut out = structured_ideals(forest);
    out.extend(IdealSampler::new(forest.clone(), seed).ideals(n));
    out
}

fn apply_or_witness(s: &StarExpr, a: &IdealFamily) -> Result<IdealFamily, Vec<String>> {
    s.apply(a).map_err(|e| vec![format!("I = {a}"), format!("error: {e}")])
}

pub fn property_report(
    s: &StarExpr,
    prop: Property,
    forest: &Arc<SpectralForest>,
    samples: usize,
    seed: u64,
) -> StarPredicateReport {
    let mut rep = StarPredicateReport::new(prop.name(), s.to_string(), anchor_for(prop), seed);
    rep.samples = samples;
    match prop {
        Property::Eab => {
            return rep.exact(true).with_note("invertible ideals are closed under every star operation here");
        }
        Property::Stable => {
            if *s == StarExpr::Identity {
                return rep.exact(true);
            }
            if let Err(w) = stability_sampler(s, forest, samples, seed) {
                rep.fail(w);
            }
        }
        Property::FiniteType => {
            // finitely generated ideals are invertible, so the finite-type part is d
            for i in test_ideals(forest, samples, seed) {
                match apply_or_witness(s, &i) {
                    Ok(c) if c == i => {}
                    Ok(c) => {
                        rep.fail(vec![format!("I = {i}"), format!("I* = {c}")]);
                        break;
                    }
                    Err(w) => {
                        rep.fail(w);
                        break;
                    }
                }
            }
        }
        Property::Spectral => spectral_search(s, forest, samples, seed, &mut rep),
        Property::Semifinite => semifinite(s, forest, samples, seed, &mut rep),
    }
    rep
}

fn anchor_for(prop: Property) -> &'static str {
    match prop {
        Property::Stable => "stability",
        Property::Semifinite => "semifiniteness",
        Property::Spectral => "spectral-representation",
        Property::FiniteType => "finite-type",
        Property::Eab => "eab",
    }
}

/// `(I∩J)* = I*∩J*` on all pairs of structured ideals, then on `samples` random pairs.
fn stability_sampler(s: &StarExpr, forest: &Arc<SpectralForest>, samples: usize, seed: u64) -> Result<(), Vec<String>> {
    let structured = structured_ideals(forest);
    let mut sampler = IdealSampler::new(forest.clone(), seed);
    let mut pairs = Vec::new();
    for (i, a) in structured.iter().enumerate() {
        for b in &structured[i + 1..] {
            pairs.push((a.clone(), b.clone()));
        }
    }
    for _ in 0..samples {
        pairs.push((sampler.ideal(), sampler.ideal()));
    }
    let mut cache: HashMap<String, IdealFamily> = HashMap::new();
    let mut closure = |a: &IdealFamily| -> Result<IdealFamily, Vec<String>> {
        let key = a.to_string();
        if let Some(c) = cache.get(&key) {
            return Ok(c.clone());
        }
        let c = apply_or_witness(s, a)?;
        cache.insert(key, c.clone());
        Ok(c)
    };
    for (a, b) in pairs {
        let meet = a.intersect(&b).expect("same forest");
        let lhs = closure(&meet)?;
        let rhs = closure(&a)?.intersect(&closure(&b)?).expect("same forest");
        if lhs != rhs {
            return Err(vec![
                format!("I = {a}"),
                format!("J = {b}"),
                format!("(I∩J)* = {lhs}"),
                format!("I*∩J* = {rhs}"),
            ]);
        }
    }
    Ok(())
}

/// Every spectral operation fixing R uses a set containing all maximal ideals;
/// searches those sets for one agreeing with `s` on the samples.
fn spectral_search(
    s: &StarExpr,
    forest: &Arc<SpectralForest>,
    samples: usize,
    seed: u64,
    rep: &mut StarPredicateReport,
) {
    let inner: Vec<String> =
        forest.primes().filter(|&p| !forest.is_leaf(p)).map(|p| forest.name(p).to_string()).collect();
    if inner.len() > 10 {
        rep.verdict = Verdict::Skipped;
        rep.note = Some(format!("{} non-maximal primes; subset search not attempted", inner.len()));
        return;
    }
    rep.evidence = Evidence::Exhaustive;
    let ideals = test_ideals(forest, samples, seed);
    let closed: Vec<Result<IdealFamily, StarError>> = ideals.iter().map(|i| s.apply(i)).collect();
    let mut first_failure = None;
    for mask in 0u32..(1 << inner.len()) {
        let mut names: Vec<String> =
            forest.leaves().iter().map(|&l| forest.name(l).to_string()).collect();
        names.extend(inner.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, n)| n.clone()));
        let delta = StarExpr::Spectral(names);
        let mismatch = ideals.iter().zip(&closed).find_map(|(i, c)| {
            let want = delta.apply(i).ok()?;
            match c {
                Ok(c) if *c == want => None,
                Ok(c) => Some(vec![format!("I = {i}"), format!("I* = {c}"), format!("{delta}: {want}")]),
                Err(e) => Some(vec![format!("I = {i}"), format!("error: {e}")]),
            }
        });
        match mismatch {
            None => {
                rep.verdict = Verdict::HoldsOnSamples;
                rep.note = Some(format!("agrees with {delta}"));
                return;
            }
            Some(w) => {
                first_failure.get_or_insert(w);
            }
        }
    }
    rep.evidence = Evidence::Sampled;
    rep.fail(first_failure.unwrap_or_default());
}

/// Each proper integral closed ideal lies in a closed prime.
fn semifinite(s: &StarExpr, forest: &Arc<SpectralForest>, samples: usize, seed: u64, rep: &mut StarPredicateReport) {
    let mut closed_primes = Vec::new();
    for p in forest.primes() {
        let pr = IdealFamily::prime(forest, p);
        match s.apply(&pr) {
            Ok(c) if c == pr => closed_primes.push(pr),
            Ok(_) => {}
            Err(e) => {
                rep.fail(vec![format!("P = {pr}"), format!("error: {e}")]);
                return;
            }
        }
    }
    let mut sampler = IdealSampler::new(forest.clone(), seed);
    let mut candidates = structured_ideals(forest);
    candidates.extend((0..samples).map(|_| sampler.integral()));
    let branches = forest.standard_decomposition();
    if branches.len() > 1 {
        // proper at one branch only, so not caught by primes of the others
        let base = candidates.clone();
        for b in &branches {
            let idx: Vec<usize> = b
                .forest
                .leaves()
                .iter()
                .map(|&l| forest.leaf_index(forest.id(b.forest.name(l)).expect("leaf")).expect("leaf"))
                .collect();
            for i in &base {
                let cuts = forest
                    .leaves()
                    .iter()
                    .enumerate()
                    .map(|(k, &l)| if idx.contains(&k) { i.cuts()[k].clone() } else { Cut::unit(forest.depth(l)) })
                    .collect();
                if let Ok(j) = IdealFamily::new(forest.clone(), cuts) {
                    candidates.push(j);
                }
            }
        }
    }
    for i in candidates {
        let Ok(c) = s.apply(&i) else { continue };
        if !c.is_integral() || c.is_unit() {
            continue;
        }
        if !closed_primes.iter().any(|p| p.includes(&c)) {
            rep.fail(vec![format!("I* = {c}"), "no closed prime contains it".to_string()]);
            return;
        }
    }
}

fn extendable_cache() -> &'static Mutex<HashMap<String, Option<String>>> {
    static CACHE: OnceLock<Mutex<HashMap<String, Option<String>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached refusal witness for extending `base` to `target`, if any.
pub(crate) fn extension_refusal(base: &StarExpr, parent: &Arc<SpectralForest>, target: &str) -> Option<String> {
    let key = format!("{base}|{parent}|{target}");
    if let Some(hit) = extendable_cache().lock().expect("cache lock").get(&key) {
        return hit.clone();
    }
    let rep = extendability_check(base, parent, target, 32, 0x5eed);
    let out = (!rep.holds()).then(|| rep.witness.join(" | "));
    extendable_cache().lock().expect("cache lock").insert(key, out.clone());
    out
}

/// `I·T = J·T ⇒ I*·T = J*·T`, exact for branches and sampled for localizations.
pub fn extendability_check(
    base: &StarExpr,
    parent: &Arc<SpectralForest>,
    target: &str,
    samples: usize,
    seed: u64,
) -> StarPredicateReport {
    let mut rep = StarPredicateReport::new("extendable", format!("{base} to {target}"), "extension-to-flat-overrings", seed);
    rep.samples = samples;
    let t = match Overring::named(parent.clone(), target) {
        Ok(t) => t,
        Err(e) => {
            rep.fail(vec![e.to_string()]);
            return rep;
        }
    };
    if t.is_branch() {
        return rep.exact(true).with_note("branches of the standard decomposition are independent");
    }
    for i in test_ideals(parent, samples, seed) {
        let it = t.extend(&i);
        let j1 = t.contract(&it).expect("same forest");
        let j2 = i.intersect(&j1).expect("same forest");
        for j in [j1, j2] {
            if t.extend(&j) != it {
                continue;
            }
            let (ci, cj) = match (base.apply(&i), base.apply(&j)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => {
                    rep.fail(vec![format!("I = {i}"), format!("error: {e}")]);
                    return rep;
                }
            };
            if t.extend(&ci) != t.extend(&cj) {
                rep.fail(vec![
                    format!("I = {i}"),
                    format!("J = {j}"),
                    format!("I*T = {}", t.extend(&ci)),
                    format!("J*T = {}", t.extend(&cj)),
                ]);
                return rep;
            }
        }
    }
    rep
}

/// One operation per branch, each the extension of `s`.
pub fn lambda(s: &StarExpr, forest: &Arc<SpectralForest>) -> BTreeMap<String, StarExpr> {
    forest
        .roots()
        .iter()
        .map(|&r| {
            let name = forest.name(r).to_string();
            let e = StarExpr::extended(s.clone(), forest, &name);
            (name, e)
        })
        .collect()
}

pub fn rho(assignment: BTreeMap<String, StarExpr>) -> StarExpr {
    StarExpr::BranchProduct(assignment)
}

fn branch_forest(forest: &Arc<SpectralForest>, root: &str) -> Arc<SpectralForest> {
    let p = forest.id(root).expect("branch root");
    Overring::branch(forest.clone(), forest.branch_of(p)).forest().clone()
}

/// `λ(ρ(a)) = a` on sampled branch ideals and `ρ(λ(s)) = s` on sampled R-ideals,
/// for `s` among `ρ(a)`, `d` and `v`.
pub fn lambda_rho_roundtrip(
    forest: &Arc<SpectralForest>,
    assignment: &BTreeMap<String, StarExpr>,
    samples: usize,
    seed: u64,
) -> StarPredicateReport {
    let star = rho(assignment.clone());
    let mut rep = StarPredicateReport::new("lambda-rho-roundtrip", star.to_string(), "branch-bijection", seed);
    rep.samples = samples;
    let back = lambda(&star, forest);
    for &r in forest.roots() {
        let name = forest.name(r);
        let bf = branch_forest(forest, name);
        let want = assignment.get(name).cloned().unwrap_or(StarExpr::Identity);
        for j in test_ideals(&bf, samples, seed ^ r.0 as u64) {
            match (back[name].apply(&j), want.apply(&j)) {
                (Ok(a), Ok(b)) if a == b => {}
                (Ok(a), Ok(b)) => {
                    rep.fail(vec![format!("branch {name}"), format!("J = {j}"), format!("λρ: {a}"), format!("a: {b}")]);
                    return rep;
                }
                (Err(e), _) | (_, Err(e)) => {
                    rep.fail(vec![format!("branch {name}"), format!("J = {j}"), format!("error: {e}")]);
                    return rep;
                }
            }
        }
    }
    let ideals = test_ideals(forest, samples, seed.wrapping_add(1));
    for s in [star, StarExpr::Identity, StarExpr::Divisorial] {
        let again = rho(lambda(&s, forest));
        for i in &ideals {
            match (again.apply(i), s.apply(i)) {
                (Ok(a), Ok(b)) if a == b => {}
                (Ok(a), Ok(b)) => {
                    rep.fail(vec![format!("s = {s}"), format!("I = {i}"), format!("ρλ: {a}"), format!("s: {b}")]);
                    return rep;
                }
                (Err(e), _) | (_, Err(e)) => {
                    rep.fail(vec![format!("s = {s}"), format!("I = {i}"), format!("error: {e}")]);
                    return rep;
                }
            }
        }
    }
    rep
}

/// Law suite for moving between R and the branches of its standard decomposition.
pub fn transfer_suite(
    forest: &Arc<SpectralForest>,
    assignment: &BTreeMap<String, StarExpr>,
    samples: usize,
    seed: u64,
) -> Vec<StarPredicateReport> {
    let star = rho(assignment.clone());
    let mut out = Vec::new();
    for prop in [Property::Stable, Property::FiniteType, Property::Spectral, Property::Semifinite] {
        let global = property_report(&star, prop, forest, samples, seed);
        let mut locals = Vec::new();
        for &r in forest.roots() {
            let name = forest.name(r);
            let s = assignment.get(name).cloned().unwrap_or(StarExpr::Identity);
            let l = property_report(&s, prop, &branch_forest(forest, name), samples, seed);
            locals.push(format!("{name}: {}", if l.holds() { "holds" } else { "fails" }));
        }
        let all_local = locals.iter().all(|l| l.ends_with("holds"));
        let mut rep = StarPredicateReport::new(
            &format!("transfer.{}", prop.name()),
            star.to_string(),
            "property-transfer",
            seed,
        );
        rep.samples = samples;
        rep.note = Some(format!("R: {}; {}", if global.holds() { "holds" } else { "fails" }, locals.join(", ")));
        if global.holds() != all_local {
            rep.fail(global.witness.clone());
        }
        out.push(rep);
    }

    // meets and order commute with extension to branches
    let ops = [StarExpr::Identity, StarExpr::Divisorial, star.clone()];
    let mut meet_rep = StarPredicateReport::new("transfer.meet", star.to_string(), "extension-of-meets", seed);
    let mut order_rep = StarPredicateReport::new("transfer.order", star.to_string(), "extension-preserves-order", seed);
    meet_rep.samples = samples;
    order_rep.samples = samples;
    'meet: for &r in forest.roots() {
        let name = forest.name(r);
        let bf = branch_forest(forest, name);
        let js = test_ideals(&bf, samples, seed ^ 0x3e);
        for (x, s1) in ops.iter().enumerate() {
            for s2 in &ops[x..] {
                let lhs = StarExpr::extended(StarExpr::meet(vec![s1.clone(), s2.clone()]), forest, name);
                let rhs = StarExpr::meet(vec![
                    StarExpr::extended(s1.clone(), forest, name),
                    StarExpr::extended(s2.clone(), forest, name),
                ]);
                for j in &js {
                    let (a, b) = (lhs.apply(j), rhs.apply(j));
                    if a != b {
                        meet_rep.fail(vec![format!("{lhs} vs {rhs}"), format!("J = {j}")]);
                        break 'meet;
                    }
                }
            }
        }
        let chain: Vec<StarExpr> =
            [StarExpr::Identity, star.clone(), StarExpr::Divisorial].iter().map(|s| StarExpr::extended(s.clone(), forest, name)).collect();
        for j in &js {
            let closed: Vec<_> = chain.iter().filter_map(|s| s.apply(j).ok()).collect();
            if closed.len() == 3 && !(closed[1].includes(&closed[0]) && closed[2].includes(&closed[1])) {
                order_rep.fail(vec![format!("branch {name}"), format!("J = {j}")]);
                break;
            }
        }
    }
    out.push(meet_rep);
    out.push(order_rep);

    // extension is transitive along R ⊆ T ⊆ T_P
    let mut trans = StarPredicateReport::new("transfer.transitivity", star.to_string(), "extension-transitivity", seed);
    trans.samples = samples;
    let mut skipped = Vec::new();
    'trans: for s in [StarExpr::Identity, star.clone()] {
        for &r in forest.roots() {
            let name = forest.name(r);
            let bf = branch_forest(forest, name);
            let via = StarExpr::extended(s.clone(), forest, name);
            for p in bf.primes().filter(|&p| bf.node(p).parent.is_some()) {
                let pn = bf.name(p);
                let two = StarExpr::extended(via.clone(), &bf, pn);
                let one = StarExpr::extended(s.clone(), forest, pn);
                let lf = Overring::named(forest.clone(), pn).expect("prime").forest().clone();
                for j in test_ideals(&lf, samples / 4, seed ^ p.0 as u64) {
                    match (two.apply(&j), one.apply(&j)) {
                        (Ok(a), Ok(b)) if a == b => {}
                        (Ok(a), Ok(b)) => {
                            trans.fail(vec![format!("{two} vs {one}"), format!("J = {j}"), format!("{a} vs {b}")]);
                            break 'trans;
                        }
                        (Err(StarError::NotExtendable { .. }), _) | (_, Err(StarError::NotExtendable { .. })) => {
                            skipped.push(format!("{s} to {pn}"));
                            break;
                        }
                        (Err(e), _) | (_, Err(e)) => {
                            trans.fail(vec![format!("J = {j}"), format!("error: {e}")]);
                            break 'trans;
                        }
                    }
                }
            }
        }
    }
    if !skipped.is_empty() {
        trans.note = Some(format!("not extendable, skipped: {}", skipped.join(", ")));
    }
    out.push(trans);

    // stable operations above a core prime transport to stable operations
    let mut tr = StarPredicateReport::new("transfer.transport-stability", forest.to_string(), "transport-preserves-stability", seed);
    tr.samples = samples;
    let mut seen = 0;
    'tr: for &r in forest.roots() {
        let tree = Arc::new(forest.subtree(r));
        if let Some(CorePrime::Prime(q)) = tree.core_prime() {
            if tree.is_h_local() {
                continue;
            }
            let above = Arc::new(tree.cut_branch(q).expect("core prime"));
            for inner in stable_expressions(&above) {
                let t = StarExpr::transport(tree.name(q), inner);
                seen += 1;
                if let Err(w) = stability_sampler(&t, &tree, samples, seed) {
                    tr.fail(w);
                    break 'tr;
                }
            }
        }
    }
    if seen == 0 {
        tr.verdict = Verdict::Skipped;
        tr.note = Some("no tree with a branching core".into());
    }
    out.push(tr);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StarCount {
    pub exact: bool,
    pub value: u64,
    pub dense_leaves: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn dense_leaves(f: &SpectralForest) -> Vec<String> {
    f.leaves().iter().filter(|&&l| f.group(l).is_dense()).map(|&l| f.name(l).to_string()).collect()
}

/// `|Star(R)|`: exact when every tree is a chain, otherwise a lower bound.
pub fn count_star_operations(forest: &SpectralForest) -> StarCount {
    let dense = dense_leaves(forest);
    if forest.is_h_local() {
        return StarCount { exact: true, value: 1 << dense.len(), dense_leaves: dense, note: None };
    }
    let mut value = 1u64;
    for &r in forest.roots() {
        value = value.saturating_mul(tree_lower_bound(&forest.subtree(r)));
    }
    StarCount {
        exact: false,
        value,
        dense_leaves: dense,
        note: Some("lower bound: product over branches of max(transported count, stable count + 1 for v)".into()),
    }
}

fn tree_lower_bound(tree: &SpectralForest) -> u64 {
    let stable = 1u64 << dense_leaves(tree).len();
    if tree.is_h_local() {
        return stable;
    }
    // v is unstable off the h-local case, so it is not among the stable ones
    let stable = stable + 1;
    let Some(CorePrime::Prime(q)) = tree.core_prime() else { return stable };
    let above = tree.cut_branch(q).expect("core prime lies below every leaf");
    let mut transported = 1u64;
    for &r in above.roots() {
        transported = transported.saturating_mul(tree_lower_bound(&above.subtree(r)));
    }
    stable.max(transported)
}

#[derive(Clone, Debug, Serialize)]
pub struct StableOps {
    pub expressions: Vec<String>,
    pub nondivisorial: Vec<String>,
    pub reports: Vec<StarPredicateReport>,
    #[serde(skip)]
    pub exprs: Vec<StarExpr>,
}

/// Maximal ideals `M` with `M^v ≠ M`.
fn nondivisorial_leaves(forest: &Arc<SpectralForest>) -> Vec<String> {
    forest
        .leaves()
        .iter()
        .filter(|&&l| {
            let m = IdealFamily::prime(forest, l);
            StarExpr::Divisorial.apply(&m).map(|c| c != m).unwrap_or(false)
        })
        .map(|&l| forest.name(l).to_string())
        .collect()
}

fn stable_expressions(forest: &Arc<SpectralForest>) -> Vec<StarExpr> {
    let nd = nondivisorial_leaves(forest);
    (0u64..1 << nd.len())
        .map(|mask| {
            let map = forest
                .leaves()
                .iter()
                .map(|&l| {
                    let name = forest.name(l).to_string();
                    let k = nd.iter().position(|n| *n == name);
                    let e = match k {
                        Some(k) if mask >> k & 1 == 1 => StarExpr::Divisorial,
                        _ => StarExpr::Identity,
                    };
                    (name, e)
                })
                .collect();
            StarExpr::LocalProduct(map)
        })
        .collect()
}

/// The `2^k` stable operations, one choice of `d`/`v` at each non-divisorial maximal ideal.
pub fn stable_ops(forest: &Arc<SpectralForest>, samples: usize, seed: u64) -> StableOps {
    let exprs = stable_expressions(forest);
    let reports = exprs.iter().map(|e| property_report(e, Property::Stable, forest, samples, seed)).collect();
    StableOps {
        expressions: exprs.iter().map(ToString::to_string).collect(),
        nondivisorial: nondivisorial_leaves(forest),
        reports,
        exprs,
    }
}

/// `M R_M` at dense maximal ideals and `R_M` at discrete ones, glued.
pub fn m_canonical_candidate(forest: &Arc<SpectralForest>) -> IdealFamily {
    let cuts = forest
        .leaves()
        .iter()
        .map(|&l| {
            let d = forest.depth(l);
            if forest.group(l).is_dense() {
                Cut::Bounded { pivot: ValueVector::zeros(d), closed: false }
            } else {
                Cut::unit(d)
            }
        })
        .collect();
    IdealFamily::new(forest.clone(), cuts).expect("compatible below the leaves")
}

fn double_colon(a: &IdealFamily, i: &IdealFamily) -> Option<IdealFamily> {
    match a.colon(i).ok()? {
        Colon::Zero => None,
        Colon::Module(x) => a.colon(&x).ok()?.module(),
    }
}

/// `(A:(A:I)) = I` on structured, derived and sampled fractional ideals.
pub fn m_canonical_check(a: &IdealFamily, samples: usize, seed: u64) -> StarPredicateReport {
    let f = a.forest();
    let mut rep = StarPredicateReport::new("m-canonical", a.to_string(), "m-canonical-ideal", seed);
    rep.samples = samples;
    let mut tests = vec![a.clone()];
    if let Ok(Colon::Module(inv)) = IdealFamily::unit(f).colon(a) {
        tests.push(inv);
    }
    for s in structured_ideals(f) {
        if let Ok(p) = s.product(a) {
            tests.push(p);
        }
        if let Ok(x) = s.intersect(a) {
            tests.push(x);
        }
        tests.push(s);
    }
    tests.extend(IdealSampler::new(f.clone(), seed).ideals(samples));
    for i in tests {
        if i.is_fractional().is_none() {
            continue;
        }
        match double_colon(a, &i) {
            Some(c) if c == i => {}
            other => {
                rep.fail(vec![
                    format!("I = {i}"),
                    format!("(A:(A:I)) = {}", other.map(|c| c.to_string()).unwrap_or_else(|| "0".into())),
                ]);
                return rep;
            }
        }
    }
    rep
}

#[derive(Clone, Debug, Serialize)]
pub struct MCanonicalSearch {
    pub found: Option<String>,
    pub tried: usize,
    pub failed: usize,
    pub reports: Vec<StarPredicateReport>,
}

/// Tries the glued local candidate, structured ideals and `samples` sampled ones.
pub fn m_canonical_search(forest: &Arc<SpectralForest>, samples: usize, seed: u64) -> MCanonicalSearch {
    let mut candidates = vec![m_canonical_candidate(forest)];
    candidates.extend(structured_ideals(forest));
    candidates.extend(IdealSampler::new(forest.clone(), seed ^ 0xa11).ideals(samples));
    let mut out = MCanonicalSearch { found: None, tried: 0, failed: 0, reports: Vec::new() };
    for a in candidates {
        out.tried += 1;
        let rep = m_canonical_check(&a, 24, seed);
        if rep.holds() {
            out.found.get_or_insert_with(|| a.to_string());
        } else {
            out.failed += 1;
        }
        out.reports.push(rep);
    }
    out
}

/// `(I*+J*)* = I*+J*` on sampled pairs.
pub fn closed_under_sum_check(
    s: &StarExpr,
    forest: &Arc<SpectralForest>,
    samples: usize,
    seed: u64,
) -> StarPredicateReport {
    let mut rep = StarPredicateReport::new("closed-under-sum", s.to_string(), "sums-of-closed-ideals", seed);
    rep.samples = samples;
    let ideals = test_ideals(forest, samples, seed);
    let closed: Vec<IdealFamily> = ideals.iter().filter_map(|i| s.apply(i).ok()).collect();
    for (k, a) in closed.iter().enumerate() {
        let b = &closed[(k * 7 + 3) % closed.len()];
        let sum = a.sum(b).expect("same forest");
        match s.apply(&sum) {
            Ok(c) if c == sum => {}
            Ok(c) => {
                rep.fail(vec![format!("I* = {a}"), format!("J* = {b}"), format!("(I*+J*)* = {c}")]);
                break;
            }
            Err(e) => {
                rep.fail(vec![format!("I*+J* = {sum}"), format!("error: {e}")]);
                break;
            }
        }
    }
    if !forest.is_h_local() {
        rep = rep.with_note("exploratory outside the h-local case");
    }
    rep
}

/// Extensive, idempotent, monotone, `R* = R` and `(xI)* = x·I*`, on samples.
pub fn axioms_check(s: &StarExpr, forest: &Arc<SpectralForest>, samples: usize, seed: u64) -> StarPredicateReport {
    let mut rep = StarPredicateReport::new("star-axioms", s.to_string(), "star-operation-axioms", seed);
    rep.samples = samples;
    let r = IdealFamily::unit(forest);
    match s.apply(&r) {
        Ok(c) if c == r => {}
        Ok(c) => {
            rep.fail(vec![format!("R* = {c}")]);
            return rep;
        }
        Err(e) => {
            rep.fail(vec![format!("error: {e}")]);
            return rep;
        }
    }
    let mut sampler = IdealSampler::new(forest.clone(), seed);
    for _ in 0..samples {
        let (i, other, x) = (sampler.ideal(), sampler.ideal(), sampler.witness());
        let j = i.sum(&other).expect("same forest");
        let run = || -> Result<Option<Vec<String>>, StarError> {
            let ci = s.apply(&i)?;
            if !ci.includes(&i) {
                return Ok(Some(vec![format!("not extensive at I = {i}"), format!("I* = {ci}")]));
            }
            if s.apply(&ci)? != ci {
                return Ok(Some(vec![format!("not idempotent at I = {i}")]));
            }
            let cj = s.apply(&j)?;
            if !cj.includes(&ci) {
                return Ok(Some(vec![format!("not monotone: I = {i}"), format!("J = {j}")]));
            }
            if s.apply(&i.scale(&x))? != ci.scale(&x) {
                return Ok(Some(vec![format!("not homogeneous: I = {i}"), format!("x = {x}")]));
            }
            Ok(None)
        };
        match run() {
            Ok(None) => {}
            Ok(Some(w)) => {
                rep.fail(w);
                break;
            }
            Err(e) => {
                rep.fail(vec![format!("I = {i}"), format!("error: {e}")]);
                break;
            }
        }
    }
    rep
}
