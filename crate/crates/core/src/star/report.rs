use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ExactTrue,
    ExactFalse,
    HoldsOnSamples,
    FailsWithWitness,
    Skipped,
}

impl Verdict {
    pub fn holds(self) -> bool {
        matches!(self, Verdict::ExactTrue | Verdict::HoldsOnSamples)
    }

    pub fn from_failure(exact: bool, failed: bool) -> Verdict {
        match (exact, failed) {
            (true, false) => Verdict::ExactTrue,
            (true, true) => Verdict::ExactFalse,
            (false, false) => Verdict::HoldsOnSamples,
            (false, true) => Verdict::FailsWithWitness,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evidence {
    Exact,
    Exhaustive,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StarPredicateReport {
    pub predicate: String,
    pub subject: String,
    pub anchor: String,
    pub verdict: Verdict,
    pub evidence: Evidence,
    pub samples: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl StarPredicateReport {
    pub fn new(predicate: &str, subject: impl Into<String>, anchor: &str, seed: u64) -> Self {
        StarPredicateReport {
            predicate: predicate.to_string(),
            subject: subject.into(),
            anchor: anchor.to_string(),
            verdict: Verdict::HoldsOnSamples,
            evidence: Evidence::Sampled,
            samples: 0,
            seed,
            witness: Vec::new(),
            note: None,
        }
    }

    pub fn holds(&self) -> bool {
        self.verdict.holds()
    }

    pub(crate) fn fail(&mut self, witness: Vec<String>) {
        if self.witness.is_empty() {
            self.witness = witness;
        }
        self.verdict = match self.evidence {
            Evidence::Sampled => Verdict::FailsWithWitness,
            _ => Verdict::ExactFalse,
        };
    }

    pub(crate) fn exact(mut self, holds: bool) -> Self {
        self.evidence = Evidence::Exact;
        self.verdict = if holds { Verdict::ExactTrue } else { Verdict::ExactFalse };
        self
    }

    pub(crate) fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}
