use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;

use starforge::class_groups::local_class_group;
use starforge::cli::load_domain;
use starforge::forest::SpectralForest;
use starforge::ideal::{parse_ideal, Colon, IdealFamily, IdealSampler, Membership, Overring};
use starforge::oracle::{membership_equivalence, witness_intersez};
use starforge::ordgroups::{probe_set, Cut, LatticeOp, RankOneGroup, Scalar, ValueGroup, ValueVector};
use starforge::star::{parse_star, rho, stable_ops, StarExpr};

fn zz() -> ValueGroup {
    ValueGroup::new(vec![RankOneGroup::integers(), RankOneGroup::integers()])
}

fn zq() -> ValueGroup {
    ValueGroup::new(vec![RankOneGroup::integers(), RankOneGroup::rationals()])
}

fn cut_strategy(dense_tail: bool) -> impl Strategy<Value = Cut> {
    (1usize..=2, -3i64..=3, -3i64..=3, 1i64..=4, any::<bool>()).prop_map(move |(level, a, b, den, closed)| {
        let g = if dense_tail { zq() } else { zz() };
        let second = if dense_tail { Scalar::from_ratio(b, den) } else { Scalar::from_int(b) };
        let pivot = ValueVector(vec![Scalar::from_int(a), second]);
        Cut::bounded(level, &pivot, closed, &g).unwrap()
    })
}

fn grid(r: i64) -> Vec<ValueVector> {
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            out.push(ValueVector::from_ints(&[a, b]));
        }
    }
    out
}

fn fixture(name: &str) -> Arc<SpectralForest> {
    load_domain(name).unwrap()
}

fn branch_overrings(f: &Arc<SpectralForest>) -> Vec<Overring> {
    f.standard_decomposition().into_iter().map(|b| Overring::branch(f.clone(), b.id)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn meet_and_join_match_probes(a in cut_strategy(true), b in cut_strategy(true)) {
        let g = zq();
        let pivots: Vec<&ValueVector> = [&a, &b].iter().filter_map(|c| c.pivot()).collect();
        let meet = a.lattice(&b, LatticeOp::MeetSet, &g);
        let join = a.lattice(&b, LatticeOp::JoinSet, &g);
        for x in probe_set(&pivots, &g) {
            prop_assert_eq!(meet.contains(&x), a.contains(&x) && b.contains(&x), "meet at {}", x);
            prop_assert_eq!(join.contains(&x), a.contains(&x) || b.contains(&x), "join at {}", x);
        }
    }

    #[test]
    fn sum_and_colon_match_grid_search(a in cut_strategy(false), b in cut_strategy(false)) {
        let g = zz();
        let window = grid(12);
        let sum = a.lattice(&b, LatticeOp::SumSet, &g);
        let colon = a.lattice(&b, LatticeOp::ColonSet, &g);
        let in_a: Vec<&ValueVector> = window.iter().filter(|y| a.contains(y)).collect();
        let in_b: Vec<&ValueVector> = window.iter().filter(|y| b.contains(y)).collect();
        for x in grid(5) {
            let by_search = in_a.iter().any(|y| b.contains(&x.sub(y)));
            prop_assert_eq!(sum.contains(&x), by_search, "sum at {}", x);
            let by_search = in_b.iter().all(|t| a.contains(&x.add(t)));
            prop_assert_eq!(colon.contains(&x), by_search, "colon at {}", x);
        }
    }

    #[test]
    fn canonical_is_idempotent_and_cuts_are_upward_closed(c in cut_strategy(true), d in cut_strategy(false)) {
        for (c, g) in [(c, zq()), (d, zz())] {
            let once = c.clone().canonical(&g);
            prop_assert_eq!(once.clone().canonical(&g), once);
            let probes = probe_set(&c.pivot().into_iter().collect::<Vec<_>>(), &g);
            for x in &probes {
                for y in &probes {
                    if x <= y && c.contains(x) {
                        prop_assert!(c.contains(y), "{} in {} but {} is not", x, c, y);
                    }
                }
            }
        }
    }

    #[test]
    fn h_local_iff_every_tree_is_a_path(parents in prop::collection::vec(0usize..8, 1..7), dense in prop::collection::vec(any::<bool>(), 7)) {
        let names: Vec<String> = (0..parents.len()).map(|k| format!("N{k}")).collect();
        let entries: Vec<(&str, Option<&str>, &str)> = parents
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                // a parent index at or past k means a root
                let parent = (p < k).then(|| names[p].as_str());
                (names[k].as_str(), parent, if dense[k] { "Q" } else { "Z" })
            })
            .collect();
        let f = SpectralForest::build(&entries);
        let paths = f.roots().iter().all(|&r| f.subtree(r).leaves().len() == 1);
        prop_assert_eq!(f.is_h_local(), paths);
        prop_assert_eq!(f.standard_decomposition().len(), f.roots().len());
    }

    #[test]
    fn branch_extension_is_flat(seed in any::<u64>(), which in 0usize..4) {
        let f = fixture(["fx-a", "fx-b", "fx-c", "fx-d"][which]);
        let mut s = IdealSampler::new(f.clone(), seed);
        let (a, b) = (s.ideal(), s.ideal());
        for t in branch_overrings(&f) {
            prop_assert_eq!(t.extend(&a.intersect(&b).unwrap()), t.extend(&a).intersect(&t.extend(&b)).unwrap());
            let lhs = match a.colon(&b).unwrap() {
                Colon::Module(m) => Some(t.extend(&m)),
                Colon::Zero => None,
            };
            let rhs = match t.extend(&a).colon(&t.extend(&b)).unwrap() {
                Colon::Module(m) => Some(m),
                Colon::Zero => None,
            };
            prop_assert_eq!(lhs, rhs, "colon at {}", t.name());
        }
    }

    #[test]
    fn contraction_is_multiplicative_on_integral_branch_ideals(seed in any::<u64>(), which in 0usize..4) {
        let f = fixture(["fx-a", "fx-b", "fx-c", "fx-d"][which]);
        for t in branch_overrings(&f) {
            let mut s = IdealSampler::new(t.forest().clone(), seed);
            let (i, j) = (s.integral(), s.integral());
            let lhs = t.contract(&i).unwrap().product(&t.contract(&j).unwrap()).unwrap();
            prop_assert_eq!(lhs, t.contract(&i.product(&j).unwrap()).unwrap());
        }
    }

    #[test]
    fn glued_branch_choices_extend_back(seed in any::<u64>()) {
        let f = fixture("fx-a");
        let branches = branch_overrings(&f);
        let mut glued = IdealFamily::full(&f);
        let mut chosen = Vec::new();
        for (k, t) in branches.iter().enumerate() {
            let j = IdealSampler::new(t.forest().clone(), seed ^ k as u64).ideal();
            glued = glued.intersect(&t.module_of(&j)).unwrap();
            chosen.push(j);
        }
        for (t, j) in branches.iter().zip(&chosen) {
            prop_assert_eq!(&t.extend(&glued), j);
        }
    }

    #[test]
    fn closures_lie_between_d_and_v(seed in any::<u64>(), which in 0usize..4) {
        let f = fixture(["fx-a", "fx-b", "fx-c", "fx-d"][which]);
        let mut exprs = stable_ops(&f, 0, 0).exprs;
        let roots: Vec<String> = f.roots().iter().map(|&r| f.name(r).to_string()).collect();
        exprs.push(rho(roots.iter().map(|r| (r.clone(), StarExpr::Divisorial)).collect()));
        let mut s = IdealSampler::new(f.clone(), seed);
        for _ in 0..4 {
            let i = s.ideal();
            let iv = StarExpr::Divisorial.apply(&i).unwrap();
            for e in &exprs {
                let c = e.apply(&i).unwrap();
                prop_assert!(c.includes(&i), "{} not extensive at {}", e, i);
                prop_assert!(iv.includes(&c), "{} exceeds v at {}", e, i);
            }
        }
    }

    #[test]
    fn v_distributes_on_a_valuation_domain(seed in any::<u64>(), n in 2usize..5) {
        let f = fixture("fx-c");
        let family = IdealSampler::new(f.clone(), seed).ideals(n);
        let v = StarExpr::Divisorial;
        let mut meet = family[0].clone();
        let mut meet_v = v.apply(&family[0]).unwrap();
        for i in &family[1..] {
            meet = meet.intersect(i).unwrap();
            meet_v = meet_v.intersect(&v.apply(i).unwrap()).unwrap();
        }
        prop_assert_eq!(v.apply(&meet).unwrap(), meet_v);
    }

    #[test]
    fn ideal_literals_round_trip(seed in any::<u64>(), which in 0usize..5) {
        let f = fixture(["fx-a", "fx-b", "fx-c", "fx-d", "hlocal-5"][which]);
        for i in IdealSampler::new(f.clone(), seed).ideals(6) {
            prop_assert_eq!(parse_ideal(&f, &i.to_string()).unwrap(), i);
        }
    }
}

#[test]
fn star_literals_round_trip() {
    for name in ["fx-a", "fx-b", "fx-c", "fx-d", "hlocal-5"] {
        let f = fixture(name);
        for e in stable_ops(&f, 0, 0).exprs {
            let back = parse_star(&f, &e.to_string()).unwrap();
            assert_eq!(back.expr, e, "{name}");
        }
    }
}

#[test]
fn class_group_atoms_are_dense_quotients() {
    for name in ["fx-a", "fx-b", "fx-c", "fx-d", "hlocal-5", "dvr", "chain-zz"] {
        let f = fixture(name);
        let gv = local_class_group(&f, &StarExpr::Divisorial).unwrap();
        assert!(gv.quotients().iter().all(|h| h.is_dense()), "{name}: {gv}");
        // M closed under v implies M closed under every smaller operation
        for e in stable_ops(&f, 0, 0).exprs {
            let gs = local_class_group(&f, &e).unwrap();
            assert!(gs.quotients().iter().all(|h| gv.quotients().contains(h)), "{name}: {e}");
        }
    }
}

#[test]
fn class_group_splits_over_branches() {
    for name in ["fx-a", "fx-b"] {
        let f = fixture(name);
        let roots: Vec<String> = f.roots().iter().map(|&r| f.name(r).to_string()).collect();
        for mask in 0u32..1 << roots.len() {
            let a: BTreeMap<String, StarExpr> = roots
                .iter()
                .enumerate()
                .map(|(k, r)| (r.clone(), if mask >> k & 1 == 1 { StarExpr::Divisorial } else { StarExpr::Identity }))
                .collect();
            let whole = local_class_group(&f, &rho(a.clone())).unwrap();
            let mut parts = Vec::new();
            for b in f.standard_decomposition() {
                let t = Arc::new(b.forest.clone());
                parts.push(local_class_group(&t, &a[f.name(b.root)]).unwrap().to_string());
            }
            let expected: Vec<String> = parts.into_iter().filter(|p| p != "0").collect();
            let expected = if expected.is_empty() { "0".to_string() } else { expected.join(" ⊕ ") };
            assert_eq!(whole.to_string(), expected, "{name} {mask}");
        }
    }
}

#[test]
fn class_group_survives_transport_to_the_cut_branch() {
    let f = fixture("fx-c");
    let p = f.id("P").unwrap();
    let above = Arc::new(f.cut_branch(p).unwrap());
    for inner in [StarExpr::Identity, StarExpr::Divisorial] {
        let moved = StarExpr::transport("P", inner.clone());
        assert_eq!(
            local_class_group(&f, &moved).unwrap(),
            local_class_group(&above, &inner).unwrap(),
            "{inner}"
        );
    }
}

#[test]
fn intersection_witnesses_check_out_by_membership() {
    for name in ["fx-b", "fx-d"] {
        let w = witness_intersez(&fixture(name)).unwrap();
        assert!(w.verified());
        for e in &w.equalities {
            assert_eq!(membership_equivalence(&e.lhs, &e.rhs), Membership::Equal, "{name}: {}", e.claim);
        }
    }
}

#[test]
fn samplers_are_deterministic() {
    let f = fixture("fx-b");
    assert_eq!(IdealSampler::new(f.clone(), 7).ideals(20), IdealSampler::new(f, 7).ideals(20));
}
