//! One line per acceptance criterion. Runs without the libtest harness so the
//! lines show up in plain `cargo test` output.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde_json::Value;

use starforge::class_groups::{clv_of_valuation, gamma_decomposition_check, invertible_sum_check, local_class_group};
use starforge::cli::{cmd_analyze, cmd_check, load_domain, Format, RunConfig};
use starforge::forest::SpectralForest;
use starforge::ideal::Membership;
use starforge::oracle::{exhaustive_law_check, membership_equivalence, witness_intersez, LAW_IDS};
use starforge::star::{lambda_rho_roundtrip, m_canonical_search, property_report, stable_ops, Property, StarExpr};

const SEED: u64 = 20_240_917;
const SAMPLES: usize = 200;
const BOX: i64 = 3;

// wall-clock budgets per criterion
const T_COUNT: Duration = Duration::from_secs(1);
const T_STABLE: Duration = Duration::from_secs(5);
const T_ROUNDTRIP: Duration = Duration::from_secs(10);
const T_DICHOTOMY: Duration = Duration::from_secs(5);
const T_ORACLE: Duration = Duration::from_secs(60);

const FIXTURES: [&str; 4] = ["fx-a", "fx-b", "fx-c", "fx-d"];

fn fixture(name: &str) -> Arc<SpectralForest> {
    load_domain(name).expect("shipped fixture")
}

fn fixture_json(name: &str) -> Value {
    let path = format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).expect("fixture file")).expect("fixture json")
}

/// Leaves whose top edge is not `Z`, read straight from the fixture file.
fn dense_leaves_from_file(name: &str) -> usize {
    fn walk(node: &Value) -> usize {
        match node["children"].as_array() {
            Some(c) if !c.is_empty() => c.iter().map(walk).sum(),
            _ => usize::from(node["group"].as_str() != Some("Z")),
        }
    }
    fixture_json(name)["forest"].as_array().expect("forest").iter().map(walk).sum()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed())
}

fn c1_counting() -> Result<String, String> {
    let mut seen = Vec::new();
    for (name, expected) in [("fx-a", 2u64), ("hlocal-5", 8)] {
        let (rep, dt) = timed(|| cmd_analyze(&RunConfig::new(name).seed(SEED)));
        let rep = rep.map_err(|e| e.to_string())?;
        let count = &rep.body["star_count"];
        if count["exact"] != Value::Bool(true) || count["value"].as_u64() != Some(expected) {
            return Err(format!("{name}: star_count = {count}, expected exact {expected}"));
        }
        if dt > T_COUNT {
            return Err(format!("{name}: {dt:?} over {T_COUNT:?}"));
        }
        seen.push(format!("{name} |Star|={expected} in {dt:.0?}"));
    }
    Ok(seen.join(", "))
}

fn c2_stable() -> Result<String, String> {
    let mut seen = Vec::new();
    for name in ["fx-a", "fx-b", "fx-c"] {
        let f = fixture(name);
        let (ops, dt) = timed(|| stable_ops(&f, SAMPLES, SEED));
        let k = dense_leaves_from_file(name);
        if ops.nondivisorial.len() != k || ops.expressions.len() != 1 << k {
            return Err(format!("{name}: {} expressions, oracle expects 2^{k}", ops.expressions.len()));
        }
        if let Some(bad) = ops.reports.iter().find(|r| !r.holds() || r.samples != SAMPLES) {
            return Err(format!("{name}: {} fails: {:?}", bad.subject, bad.witness));
        }
        if dt > T_STABLE {
            return Err(format!("{name}: {dt:?} over {T_STABLE:?}"));
        }
        seen.push(format!("{name} 2^{k} in {dt:.0?}"));
    }
    Ok(seen.join(", "))
}

fn c3_roundtrip() -> Result<String, String> {
    let f = fixture("fx-a");
    let mut total = Duration::ZERO;
    let mut n = 0;
    for m1 in [StarExpr::Identity, StarExpr::Divisorial] {
        for m2 in [StarExpr::Identity, StarExpr::Divisorial] {
            let a: BTreeMap<String, StarExpr> = [("M1".to_string(), m1.clone()), ("M2".to_string(), m2)].into();
            let (rep, dt) = timed(|| lambda_rho_roundtrip(&f, &a, SAMPLES, SEED));
            total += dt;
            if !rep.holds() {
                return Err(format!("{}: {:?}", rep.subject, rep.witness));
            }
            n += 1;
        }
    }
    if total > T_ROUNDTRIP {
        return Err(format!("{total:?} over {T_ROUNDTRIP:?}"));
    }
    Ok(format!("{n} assignments in {total:.0?}"))
}

fn c4_dichotomy() -> Result<String, String> {
    let t = Instant::now();
    for name in ["fx-a", "fx-c"] {
        let rep = property_report(&StarExpr::Divisorial, Property::Stable, &fixture(name), SAMPLES, SEED);
        if !rep.holds() {
            return Err(format!("v unstable on {name}: {:?}", rep.witness));
        }
    }
    let w = witness_intersez(&fixture("fx-b")).map_err(|e| e.to_string())?;
    for e in &w.equalities {
        if !e.holds || membership_equivalence(&e.lhs, &e.rhs) != Membership::Equal {
            return Err(format!("claim `{}` fails: {} vs {}", e.claim, e.lhs, e.rhs));
        }
    }
    let dt = t.elapsed();
    if dt > T_DICHOTOMY {
        return Err(format!("{dt:?} over {T_DICHOTOMY:?}"));
    }
    Ok(format!("v stable on fx-a, fx-c; fx-b witness with {} equalities; {dt:.0?}", w.equalities.len()))
}

fn c5_class_groups() -> Result<String, String> {
    let got = [
        local_class_group(&fixture("fx-a"), &StarExpr::Divisorial).map(|g| g.to_string()),
        clv_of_valuation(&fixture("fx-c")).map(|g| g.to_string()),
        clv_of_valuation(&SpectralForest::chain(&["Z", "Z"])).map(|g| g.to_string()),
    ];
    let want = ["R/Q", "R/Q", "0"];
    for (g, w) in got.iter().zip(want) {
        match g {
            Ok(s) if s == w => {}
            other => return Err(format!("expected {w}, got {other:?}")),
        }
    }
    for name in FIXTURES {
        let g = local_class_group(&fixture(name), &StarExpr::Identity).map_err(|e| e.to_string())?;
        if g.to_string() != "0" {
            return Err(format!("G_d({name}) = {g}"));
        }
    }
    Ok("R/Q, R/Q, 0, and G_d = 0 on all fixtures".into())
}

fn c6_oracle() -> Result<String, String> {
    let f = fixture("fx-d");
    let t = Instant::now();
    let mut checks = 0;
    for law in LAW_IDS {
        let out = exhaustive_law_check(&f, BOX, law).map_err(|e| e.to_string())?;
        if let Some(c) = out.counterexample {
            return Err(format!("{law}: counterexample at {}: {:?} {}", c.target, c.inputs, c.detail));
        }
        checks += out.checks;
    }
    let dt = t.elapsed();
    if dt > T_ORACLE {
        return Err(format!("{dt:?} over {T_ORACLE:?}"));
    }
    Ok(format!("4 laws, {checks} checks at B={BOX} in {dt:.1?}"))
}

fn c7_invertibility() -> Result<String, String> {
    for name in ["fx-a", "fx-b"] {
        let f = fixture(name);
        for s in [StarExpr::Identity, StarExpr::Divisorial] {
            for rep in [invertible_sum_check(&f, &s, 100, SEED), gamma_decomposition_check(&f, &s, 100, SEED)] {
                if !rep.holds() {
                    return Err(format!("{name} {}: {} fails: {:?}", rep.subject, rep.predicate, rep.witness));
                }
            }
        }
    }
    Ok("d and v on fx-a, fx-b at 100 samples".into())
}

fn c8_m_canonical() -> Result<String, String> {
    let dvr = m_canonical_search(&fixture("dvr"), SAMPLES, SEED);
    let Some(a) = dvr.found else { return Err("no m-canonical ideal found on the DVR".into()) };
    let fxb = m_canonical_search(&fixture("fx-b"), SAMPLES, SEED);
    if fxb.found.is_some() || fxb.failed != fxb.tried || fxb.tried < SAMPLES {
        return Err(format!("fx-b: found {:?}, {} of {} failed", fxb.found, fxb.failed, fxb.tried));
    }
    Ok(format!("dvr A = {a}; fx-b all {} candidates fail", fxb.tried))
}

fn c9_determinism() -> Result<String, String> {
    let cfg = RunConfig::new("fx-a").seed(SEED);
    let run = || cmd_check(&cfg, "all").map(|r| r.render(Format::Structured)).map_err(|e| e.to_string());
    let (a, b) = (run()?, run()?);
    if a != b {
        return Err("structured reports differ".into());
    }
    let v: Value = serde_json::from_str(&a).map_err(|e| e.to_string())?;
    if v["seed"].as_u64() != Some(SEED) || v["schema_version"].as_u64().is_none() {
        return Err("report lacks seed or schema_version".into());
    }
    Ok(format!("{} bytes identical", a.len()))
}

type Criterion = fn() -> Result<String, String>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 9] = [
        ("counting", c1_counting),
        ("stable classification", c2_stable),
        ("decomposition round trip", c3_roundtrip),
        ("distributivity dichotomy", c4_dichotomy),
        ("class groups", c5_class_groups),
        ("oracle exhaustiveness", c6_oracle),
        ("invertibility", c7_invertibility),
        ("m-canonical dichotomy", c8_m_canonical),
        ("determinism", c9_determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("acceptance {} {name}: PASS ({detail})", k + 1),
            Err(detail) => {
                failed += 1;
                println!("acceptance {} {name}: FAIL ({detail})", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
