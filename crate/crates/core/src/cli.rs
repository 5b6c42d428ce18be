//! Batch commands behind the `starforge` binary: `analyze`, `eval` and `check`.
//!
//! Every command returns a [`Report`] that renders either as text or as a
//! versioned JSON document. JSON object keys are sorted, so equal inputs give
//! byte-identical output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};

use crate::class_groups::{
    clv_of_valuation, gamma_decomposition_check, invertible_sum_check, is_star_invertible, local_class_group,
};
use crate::forest::{parse_domain, Diagnostic, SpectralForest};
use crate::ideal::parse_ideal;
use crate::oracle::{witness_intersez, GridModel, OracleError, LAW_IDS};
use crate::star::{
    axioms_check, closed_under_sum_check, count_star_operations, lambda_rho_roundtrip, m_canonical_search,
    parse_star, property_report, stable_ops, transfer_suite, Evidence, Property, StarError, StarExpr,
    StarPredicateReport, Verdict,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SAMPLES: usize = 200;
pub const DEFAULT_BOX: i64 = 3;

pub const SUITES: [&str; 11] = [
    "axioms",
    "properties",
    "transfer",
    "lambda-rho",
    "stable",
    "class-groups",
    "closed-under-sum",
    "m-canonical",
    "witness.intersez",
    "oracle.exhaustive",
    "oracle.agreement",
];

const FIXTURES: [(&str, &str); 7] = [
    ("fx-a", include_str!("../fixtures/fx-a.json")),
    ("fx-b", include_str!("../fixtures/fx-b.json")),
    ("fx-c", include_str!("../fixtures/fx-c.json")),
    ("fx-d", include_str!("../fixtures/fx-d.json")),
    ("hlocal-5", include_str!("../fixtures/hlocal-5.json")),
    ("dvr", include_str!("../fixtures/dvr.json")),
    ("chain-zz", include_str!("../fixtures/chain-zz.json")),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Structured,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    /// A file path or the name of a shipped fixture (`fx-a` .. `fx-d`, ...).
    pub input: String,
    pub seed: u64,
    pub samples: usize,
    pub format: Format,
    pub bound: i64,
}

impl RunConfig {
    pub fn new(input: impl Into<String>) -> Self {
        RunConfig { input: input.into(), seed: 0, samples: DEFAULT_SAMPLES, format: Format::Text, bound: DEFAULT_BOX }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn bound(mut self, bound: i64) -> Self {
        self.bound = bound;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    #[error("{message}")]
    Input { message: String, diagnostics: Vec<Diagnostic> },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError::Input { message: message.into(), diagnostics: Vec::new() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => {
                let mut out = format!("error: {self}\n");
                if let CliError::Input { diagnostics, .. } = self {
                    for d in diagnostics {
                        let _ = writeln!(out, "  {d}");
                    }
                }
                out
            }
            Format::Structured => {
                let (kind, diags) = match self {
                    CliError::Input { diagnostics, .. } => ("input", diagnostics.clone()),
                    CliError::Internal(_) => ("internal", Vec::new()),
                };
                let v = json!({
                    "schema_version": SCHEMA_VERSION,
                    "error": { "kind": kind, "message": self.to_string(), "diagnostics": diags },
                });
                serde_json::to_string_pretty(&v).expect("json") + "\n"
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub input: String,
    pub domain: String,
    pub seed: u64,
    pub samples: usize,
    #[serde(rename = "box")]
    pub bound: i64,
    pub status: Status,
    pub body: Value,
    #[serde(skip)]
    pub text: String,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Structured => serde_json::to_string_pretty(self).expect("json") + "\n",
        }
    }

    fn new(cfg: &RunConfig, command: &str, forest: &SpectralForest, status: Status, body: Value, text: String) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            input: cfg.input.clone(),
            domain: forest.to_string(),
            seed: cfg.seed,
            samples: cfg.samples,
            bound: cfg.bound,
            status,
            body,
            text,
        }
    }
}

/// Reads a domain file, or a shipped fixture when no such file exists.
pub fn load_domain(input: &str) -> Result<Arc<SpectralForest>, CliError> {
    let text = match std::fs::read_to_string(input) {
        Ok(t) => t,
        Err(e) => {
            let key = input.to_ascii_lowercase();
            match FIXTURES.iter().find(|(n, _)| *n == key) {
                Some((_, t)) => t.to_string(),
                None => return Err(CliError::input(format!("cannot read `{input}`: {e}"))),
            }
        }
    };
    parse_domain(&text)
        .map(Arc::new)
        .map_err(|diagnostics| CliError::Input { message: format!("invalid domain file `{input}`"), diagnostics })
}

pub fn fixture_names() -> Vec<&'static str> {
    FIXTURES.iter().map(|(n, _)| *n).collect()
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

/// Refusals that depend on the literal the user gave, as opposed to bugs.
fn star_error(e: StarError) -> CliError {
    match e {
        StarError::NotExtendable { .. }
        | StarError::Scope(_)
        | StarError::NoTransportShift(_)
        | StarError::NotFractional => CliError::input(e.to_string()),
        other => internal(other),
    }
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<Report, CliError> {
    let forest = load_domain(&cfg.input)?;
    let v = StarExpr::Divisorial;
    let count = count_star_operations(&forest);
    let stable = stable_ops(&forest, 0, cfg.seed);
    let gv = local_class_group(&forest, &v).map_err(internal)?;
    let h_local = forest.is_h_local();

    let branches: Vec<Value> = forest
        .standard_decomposition()
        .iter()
        .map(|b| json!({ "root": forest.name(b.root), "domain": b.forest.to_string() }))
        .collect();
    let mut leaves = Vec::new();
    for &m in forest.leaves() {
        let name = forest.name(m);
        let clv = clv_of_valuation(&forest.chain_to(m)).map_err(internal)?;
        leaves.push(json!({
            "leaf": name,
            "group": forest.group(m).name(),
            "divisorial": !stable.nondivisorial.iter().any(|n| n == name),
            "clv": clv.to_string(),
        }));
    }
    let star_size = if count.exact { format!("|Star|={}", count.value) } else { format!("|Star| ≥ {}", count.value) };
    let mut text = format!(
        "h-local: {}; {}; |Star_stab|={}; G_v = {}\n",
        if h_local { "yes" } else { "no" },
        star_size,
        stable.expressions.len(),
        gv
    );
    let _ = writeln!(text, "domain: {forest}");
    for b in &branches {
        let _ = writeln!(text, "branch {}: {}", b["root"].as_str().unwrap_or(""), b["domain"].as_str().unwrap_or(""));
    }
    for l in &leaves {
        let _ = writeln!(
            text,
            "leaf {}: {} Cl^v = {}",
            l["leaf"].as_str().unwrap_or(""),
            if l["divisorial"] == json!(true) { "divisorial;" } else { "not divisorial;" },
            l["clv"].as_str().unwrap_or("")
        );
    }
    if let Some(n) = &count.note {
        let _ = writeln!(text, "note: {n}");
    }
    let body = json!({
        "h_local": h_local,
        "branches": branches,
        "star_count": count,
        "stable_count": stable.expressions.len(),
        "stable_operations": stable.expressions,
        "leaves": leaves,
        "g_v": gv.to_string(),
    });
    Ok(Report::new(cfg, "analyze", &forest, Status::Pass, body, text))
}

pub fn cmd_eval(cfg: &RunConfig, star: &str, ideal: &str) -> Result<Report, CliError> {
    let forest = load_domain(&cfg.input)?;
    let bound = parse_star(&forest, star).map_err(|e| CliError::input(format!("star literal: {e}")))?;
    let domain = bound.domain.clone();
    let i = parse_ideal(&domain, ideal).map_err(|e| CliError::input(format!("ideal literal: {e}")))?;
    let s = bound.expr;
    let mut warnings = Vec::new();
    let body;
    let mut text = String::new();
    if i.is_fractional().is_none() {
        warnings.push(format!("{i} is not a fractional ideal; closures are defined on fractional ideals only"));
        body = json!({ "star": s.to_string(), "ideal": i.to_string(), "closure": Value::Null, "warnings": warnings });
        let _ = writeln!(text, "warning: {}", warnings[0]);
    } else {
        let c = s.apply(&i).map_err(star_error)?;
        let iv = StarExpr::Divisorial.apply(&i).map_err(star_error)?;
        let invertible = is_star_invertible(&s, &i).map_err(star_error)?;
        let closed = c == i;
        let _ = writeln!(text, "{s}: {i}  ↦  {c}");
        let _ = writeln!(
            text,
            "{}; {}; {}",
            if iv == i { "divisorial" } else { "not divisorial" },
            if closed { "closed" } else { "not closed" },
            if invertible { "invertible" } else { "not invertible" }
        );
        body = json!({
            "star": s.to_string(),
            "ideal": i.to_string(),
            "closure": c.to_string(),
            "divisorial": iv == i,
            "closed": closed,
            "invertible": invertible,
            "warnings": warnings,
        });
    }
    Ok(Report::new(cfg, "eval", &domain, Status::Pass, body, text))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    Holds,
    Informational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LineStatus {
    Pass,
    Fail,
    Info,
}

/// One verdict-carrying line of a `check` report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckLine {
    pub suite: String,
    pub law: String,
    pub subject: String,
    pub anchor: String,
    pub evidence: Evidence,
    pub verdict: Verdict,
    pub expected: Expect,
    pub status: LineStatus,
    pub samples: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckLine {
    fn from_report(suite: &str, r: StarPredicateReport, expected: Expect) -> Self {
        let status = match (expected, r.holds()) {
            (Expect::Informational, _) => LineStatus::Info,
            (Expect::Holds, true) => LineStatus::Pass,
            (Expect::Holds, false) if r.verdict == Verdict::Skipped => LineStatus::Info,
            (Expect::Holds, false) => LineStatus::Fail,
        };
        CheckLine {
            suite: suite.into(),
            law: r.predicate,
            subject: r.subject,
            anchor: r.anchor,
            evidence: r.evidence,
            verdict: r.verdict,
            expected,
            status,
            samples: r.samples,
            witness: r.witness,
            note: r.note,
        }
    }

    fn exact(suite: &str, law: &str, subject: String, anchor: &str, evidence: Evidence, holds: bool) -> Self {
        let verdict = match (evidence, holds) {
            (Evidence::Sampled, h) => Verdict::from_failure(false, !h),
            (_, h) => Verdict::from_failure(true, !h),
        };
        CheckLine {
            suite: suite.into(),
            law: law.into(),
            subject,
            anchor: anchor.into(),
            evidence,
            verdict,
            expected: Expect::Holds,
            status: if holds { LineStatus::Pass } else { LineStatus::Fail },
            samples: 0,
            witness: Vec::new(),
            note: None,
        }
    }

    fn skipped(suite: &str, law: &str, subject: String, anchor: &str, note: String) -> Self {
        CheckLine {
            suite: suite.into(),
            law: law.into(),
            subject,
            anchor: anchor.into(),
            evidence: Evidence::Exact,
            verdict: Verdict::Skipped,
            expected: Expect::Informational,
            status: LineStatus::Info,
            samples: 0,
            witness: Vec::new(),
            note: Some(note),
        }
    }

    fn with(mut self, witness: Vec<String>, note: Option<String>) -> Self {
        self.witness = witness;
        self.note = note;
        self
    }
}

/// `{d, v}` on every branch when there are at most two, otherwise the two
/// uniform assignments.
fn assignments(forest: &SpectralForest) -> Vec<BTreeMap<String, StarExpr>> {
    let roots: Vec<String> = forest.roots().iter().map(|&r| forest.name(r).to_string()).collect();
    let masks: Vec<u32> = if roots.len() <= 2 { (0..1 << roots.len()).collect() } else { vec![0, u32::MAX] };
    masks
        .into_iter()
        .map(|mask| {
            roots
                .iter()
                .enumerate()
                .map(|(k, r)| {
                    let e = if mask >> k & 1 == 1 { StarExpr::Divisorial } else { StarExpr::Identity };
                    (r.clone(), e)
                })
                .collect()
        })
        .collect()
}

fn run_suite(suite: &str, forest: &Arc<SpectralForest>, cfg: &RunConfig) -> Result<Vec<CheckLine>, CliError> {
    let (n, seed) = (cfg.samples, cfg.seed);
    let h_local = forest.is_h_local();
    let d = StarExpr::Identity;
    let v = StarExpr::Divisorial;
    let mut out = Vec::new();
    match suite {
        "axioms" => {
            let mut ops = vec![d.clone(), v.clone()];
            ops.extend(stable_ops(forest, 0, seed).exprs);
            ops.dedup();
            for s in ops {
                out.push(CheckLine::from_report(suite, axioms_check(&s, forest, n, seed), Expect::Holds));
            }
        }
        "properties" => {
            for prop in Property::ALL {
                out.push(CheckLine::from_report(suite, property_report(&d, prop, forest, n, seed), Expect::Holds));
            }
            for prop in Property::ALL {
                let expected = if h_local && prop == Property::Stable { Expect::Holds } else { Expect::Informational };
                out.push(CheckLine::from_report(suite, property_report(&v, prop, forest, n, seed), expected));
            }
        }
        "transfer" => {
            for a in assignments(forest) {
                for r in transfer_suite(forest, &a, n, seed) {
                    out.push(CheckLine::from_report(suite, r, Expect::Holds));
                }
            }
        }
        "lambda-rho" => {
            for a in assignments(forest) {
                out.push(CheckLine::from_report(suite, lambda_rho_roundtrip(forest, &a, n, seed), Expect::Holds));
            }
        }
        "stable" => {
            let ops = stable_ops(forest, n, seed);
            let k = ops.nondivisorial.len();
            out.push(CheckLine::exact(
                suite,
                "stable-count",
                format!("{} expressions, {} nondivisorial leaves", ops.expressions.len(), k),
                "stable-operations-count",
                Evidence::Exact,
                ops.expressions.len() == 1 << k,
            ));
            for r in ops.reports {
                out.push(CheckLine::from_report(suite, r, Expect::Holds));
            }
        }
        "class-groups" => {
            let gd = local_class_group(forest, &d).map_err(internal)?;
            out.push(CheckLine::exact(
                suite,
                "class-group-of-d",
                format!("G_d = {gd}"),
                "local-class-group",
                Evidence::Exact,
                gd.is_zero(),
            ));
            for s in [&d, &v] {
                out.push(CheckLine::from_report(suite, invertible_sum_check(forest, s, n, seed), Expect::Holds));
                out.push(CheckLine::from_report(suite, gamma_decomposition_check(forest, s, n, seed), Expect::Holds));
            }
        }
        "closed-under-sum" => {
            let expected = if h_local { Expect::Holds } else { Expect::Informational };
            let mut ops = stable_ops(forest, 0, seed).exprs;
            if !ops.contains(&v) {
                ops.push(v.clone());
            }
            for s in ops {
                out.push(CheckLine::from_report(suite, closed_under_sum_check(&s, forest, n, seed), expected));
            }
        }
        "m-canonical" => {
            let found = m_canonical_search(forest, n, seed);
            let subject = format!("{} candidates, {} failed", found.tried, found.failed);
            let line = CheckLine::exact(
                suite,
                "m-canonical-exists",
                subject,
                "m-canonical-ideal",
                Evidence::Sampled,
                found.found.is_some() == h_local,
            );
            let note = match &found.found {
                Some(a) => format!("passing A = {a}"),
                None => "no sampled candidate passes".into(),
            };
            out.push(line.with(Vec::new(), Some(note)));
        }
        "witness.intersez" => match witness_intersez(forest) {
            Ok(w) => {
                let witness = w
                    .equalities
                    .iter()
                    .map(|e| format!("{}: {} = {} ({})", e.claim, e.lhs, e.rhs, if e.holds { "ok" } else { "FAILS" }))
                    .collect();
                let line = CheckLine::exact(
                    suite,
                    "v-intersection-witness",
                    format!("I1 = {}, I2 = {}", w.first, w.second),
                    "v-distributes-iff-h-local",
                    Evidence::Exact,
                    w.verified() && !h_local,
                );
                out.push(line.with(witness, Some(format!("core prime {}", w.core))));
            }
            Err(OracleError::HLocal) => {
                let line = CheckLine::exact(
                    suite,
                    "v-intersection-witness",
                    "none".into(),
                    "v-distributes-iff-h-local",
                    Evidence::Exact,
                    h_local,
                );
                out.push(line.with(Vec::new(), Some(OracleError::HLocal.to_string())));
            }
            Err(e) => return Err(internal(e)),
        },
        "oracle.exhaustive" | "oracle.agreement" => match GridModel::new(forest, cfg.bound) {
            Ok(model) if suite == "oracle.exhaustive" => {
                for law in LAW_IDS {
                    let o = model.law(law).map_err(internal)?;
                    let subject = format!("B={}, {} families, {} checks", o.bound, o.families, o.checks);
                    let line = CheckLine::exact(suite, law, subject, law_anchor(law), Evidence::Exhaustive, o.passed());
                    let witness = o
                        .counterexample
                        .map(|c| {
                            let mut w = vec![format!("target {}", c.target)];
                            w.extend(c.inputs);
                            w.push(c.detail);
                            w
                        })
                        .unwrap_or_default();
                    out.push(line.with(witness, None));
                }
            }
            Ok(model) => {
                let a = model.engine_agreement(1);
                let subject = format!("B={}, {} comparisons", model.bound(), a.checked);
                let line = CheckLine::exact(
                    suite,
                    "engine-agreement",
                    subject,
                    "grid-model-agreement",
                    Evidence::Exhaustive,
                    a.mismatches.is_empty(),
                );
                out.push(line.with(a.mismatches.into_iter().take(5).collect(), None));
            }
            Err(OracleError::NotDiscrete(_)) => {
                out.push(CheckLine::skipped(
                    suite,
                    suite,
                    forest.to_string(),
                    "grid-model",
                    "the grid model needs every edge group to be Z".into(),
                ));
            }
            Err(e @ (OracleError::BoxTooLarge(_) | OracleError::WindowTooLarge(_))) => {
                return Err(CliError::input(e.to_string()));
            }
            Err(e) => return Err(internal(e)),
        },
        other => {
            return Err(CliError::input(format!("unknown suite `{other}`; known: all, {}", SUITES.join(", "))));
        }
    }
    Ok(out)
}

fn law_anchor(law: &str) -> &'static str {
    match law {
        "flatness.finite-intersection" => "flat-overring-finite-intersections",
        "tcolon.branch" => "flat-overring-colon",
        "icapr.product" => "branch-ideal-contraction-product",
        _ => "integral-intersection-survival",
    }
}

pub fn cmd_check(cfg: &RunConfig, suite: &str) -> Result<Report, CliError> {
    let forest = load_domain(&cfg.input)?;
    let suites: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    let mut lines = Vec::new();
    for s in suites {
        lines.extend(run_suite(s, &forest, cfg)?);
    }
    let count = |st: LineStatus| lines.iter().filter(|l| l.status == st).count();
    let (passed, failed, info) = (count(LineStatus::Pass), count(LineStatus::Fail), count(LineStatus::Info));
    let status = if failed == 0 { Status::Pass } else { Status::Fail };

    let mut text = String::new();
    for l in &lines {
        let tag = match l.status {
            LineStatus::Pass => "PASS",
            LineStatus::Fail => "FAIL",
            LineStatus::Info => "INFO",
        };
        let verdict = serde_json::to_value(l.verdict).expect("json");
        let evidence = serde_json::to_value(l.evidence).expect("json");
        let _ = writeln!(
            text,
            "{tag} {}/{} [{} ; {}] {} : {}",
            l.suite,
            l.law,
            l.anchor,
            evidence.as_str().unwrap_or(""),
            verdict.as_str().unwrap_or(""),
            l.subject
        );
        for w in &l.witness {
            let _ = writeln!(text, "       {w}");
        }
        if let Some(n) = &l.note {
            let _ = writeln!(text, "       note: {n}");
        }
    }
    let _ = writeln!(text, "{passed} passed, {failed} failed, {info} informational (seed {})", cfg.seed);
    let body = json!({
        "suite": suite,
        "lines": lines,
        "summary": { "passed": passed, "failed": failed, "informational": info },
    });
    Ok(Report::new(cfg, "check", &forest, status, body, text))
}
