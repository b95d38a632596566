//! Verification records.
//!
//! Every check produces one [`CheckRecord`]: the compared quantities, the
//! signed margin (nonnegative means the claim holds) and a verdict. A
//! [`VerificationReport`] collects records in the order the checks ran.

use std::fmt;
use std::time::Instant;

use serde::Serialize;

/// Orientation of the compared quantities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// lhs ≥ rhs, margin lhs − rhs.
    AtLeast,
    /// lhs ≤ rhs, margin rhs − lhs.
    AtMost,
    /// lhs = rhs, margin −|lhs − rhs|.
    Equal,
}

impl Relation {
    pub fn margin(self, lhs: f64, rhs: f64) -> f64 {
        match self {
            Relation::AtLeast => lhs - rhs,
            Relation::AtMost => rhs - lhs,
            Relation::Equal => -(lhs - rhs).abs(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Recorded for information; a hypothesis of the claim was not met or
    /// the quantity is a diagnostic.
    Info,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Info => "info",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub claim_id: String,
    pub lattice: String,
    pub params: String,
    pub quantity: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub seconds: f64,
}

impl CheckRecord {
    /// A graded comparison: passes iff the margin is at least `−tol`.
    pub fn compare(
        claim_id: &str,
        context: &Context,
        quantity: impl Into<String>,
        lhs: f64,
        relation: Relation,
        rhs: f64,
        tol: f64,
    ) -> Self {
        let margin = relation.margin(lhs, rhs);
        let verdict = if margin >= -tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        CheckRecord {
            claim_id: claim_id.to_string(),
            lattice: context.lattice.clone(),
            params: context.params.clone(),
            quantity: quantity.into(),
            lhs,
            rhs,
            margin,
            verdict,
            seconds: 0.0,
        }
    }

    /// An informational row that never fails.
    pub fn info(
        claim_id: &str,
        context: &Context,
        quantity: impl Into<String>,
        lhs: f64,
        rhs: f64,
    ) -> Self {
        CheckRecord {
            claim_id: claim_id.to_string(),
            lattice: context.lattice.clone(),
            params: context.params.clone(),
            quantity: quantity.into(),
            lhs,
            rhs,
            margin: lhs - rhs,
            verdict: Verdict::Info,
            seconds: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    pub fn with_seconds(mut self, seconds: f64) -> Self {
        self.seconds = seconds;
        self
    }
}

/// Lattice and parameter labels shared by the rows of one check.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Context {
    pub lattice: String,
    pub params: String,
}

impl Context {
    pub fn new(lattice: impl Into<String>, params: impl Into<String>) -> Self {
        Context {
            lattice: lattice.into(),
            params: params.into(),
        }
    }

    pub fn with_params(&self, extra: impl fmt::Display) -> Self {
        Context {
            lattice: self.lattice.clone(),
            params: if self.params.is_empty() {
                extra.to_string()
            } else {
                format!("{} {extra}", self.params)
            },
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct VerificationReport {
    rows: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: CheckRecord) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.rows.extend(other.rows);
    }

    pub fn rows(&self) -> &[CheckRecord] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(CheckRecord::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.rows.iter().filter(|r| !r.passed())
    }

    /// Rows with the given claim id.
    pub fn claim(&self, claim_id: &str) -> impl Iterator<Item = &CheckRecord> + '_ {
        let id = claim_id.to_string();
        self.rows.iter().filter(move |r| r.claim_id == id)
    }

    /// Smallest margin among rows with the given claim id.
    pub fn worst_margin(&self, claim_id: &str) -> Option<f64> {
        self.claim(claim_id).map(|r| r.margin).reduce(f64::min)
    }

    /// Stamps every row lacking a runtime with `seconds`.
    pub fn stamp(&mut self, seconds: f64) {
        for r in &mut self.rows {
            if r.seconds == 0.0 {
                r.seconds = seconds;
            }
        }
    }

    /// Clears all runtimes, for reproducible output.
    pub fn clear_timing(&mut self) {
        for r in &mut self.rows {
            r.seconds = 0.0;
        }
    }
}

impl FromIterator<CheckRecord> for VerificationReport {
    fn from_iter<I: IntoIterator<Item = CheckRecord>>(iter: I) -> Self {
        VerificationReport {
            rows: iter.into_iter().collect(),
        }
    }
}

/// Wall-clock stopwatch for stamping rows.
pub struct Stopwatch(Instant);

impl Stopwatch {
    pub fn start() -> Self {
        Stopwatch(Instant::now())
    }

    pub fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Tracks the worst violation over many pairwise comparisons so a family of
/// checks collapses into one row.
#[derive(Clone, Debug)]
pub struct WorstCase {
    relation: Relation,
    worst: Option<(f64, f64, f64, String)>,
}

impl WorstCase {
    pub fn new(relation: Relation) -> Self {
        WorstCase {
            relation,
            worst: None,
        }
    }

    pub fn observe(&mut self, lhs: f64, rhs: f64, label: impl FnOnce() -> String) {
        let margin = self.relation.margin(lhs, rhs);
        if self.worst.as_ref().is_none_or(|w| margin < w.2) {
            self.worst = Some((lhs, rhs, margin, label()));
        }
    }

    /// The row for the worst offender; `quantity` is suffixed with its label.
    pub fn record(
        &self,
        claim_id: &str,
        context: &Context,
        quantity: &str,
        tol: f64,
    ) -> CheckRecord {
        match &self.worst {
            Some((lhs, rhs, _, label)) => CheckRecord::compare(
                claim_id,
                context,
                format!("{quantity} worst at {label}"),
                *lhs,
                self.relation,
                *rhs,
                tol,
            ),
            None => CheckRecord::compare(claim_id, context, quantity, 0.0, self.relation, 0.0, tol),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margins_follow_relation() {
        assert_eq!(Relation::AtLeast.margin(3.0, 1.0), 2.0);
        assert_eq!(Relation::AtMost.margin(3.0, 1.0), -2.0);
        assert_eq!(Relation::Equal.margin(3.0, 1.0), -2.0);
    }

    #[test]
    fn tolerance_decides_verdict() {
        let ctx = Context::new("dimer", "");
        let r = CheckRecord::compare("c", &ctx, "q", 1.0 - 1e-12, Relation::AtLeast, 1.0, 1e-10);
        assert_eq!(r.verdict, Verdict::Pass);
        let r = CheckRecord::compare("c", &ctx, "q", 0.9, Relation::AtLeast, 1.0, 1e-10);
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn worst_case_keeps_smallest_margin() {
        let mut w = WorstCase::new(Relation::AtLeast);
        w.observe(2.0, 1.0, || "a".into());
        w.observe(1.0, 1.5, || "b".into());
        w.observe(5.0, 1.0, || "c".into());
        let r = w.record("id", &Context::default(), "q", 0.0);
        assert_eq!(r.margin, -0.5);
        assert!(r.quantity.ends_with("b"));
    }
}
