//! Model primitives for a single observable: party utilities, admission bars,
//! disagreement, ex-post utility and the policy representation.

use serde::Serialize;

use crate::dist::{Affine, ScoreDistribution};
use crate::error::{ModelError, Result};
use crate::ext::ExtReal;

/// Affine utility `v + w t` from admitting a student with score `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartyUtility {
    v: f64,
    w: f64,
}

impl PartyUtility {
    pub fn new(v: f64, w: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(ModelError::invalid("v", "must be finite"));
        }
        if !(w > 0.0) || !w.is_finite() {
            return Err(ModelError::invalid("w", format!("must be positive, got {w}")));
        }
        Ok(PartyUtility { v, w })
    }

    /// Utility with unit test-score weight and bar at `bar`.
    pub fn with_bar(bar: f64) -> Self {
        PartyUtility { v: -bar, w: 1.0 }
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn affine(&self) -> Affine {
        Affine::new(self.v, self.w)
    }

    /// Root of `v + w t`.
    pub fn bar(&self) -> f64 {
        -self.v / self.w
    }
}

pub fn utility(p: &PartyUtility, t: f64) -> f64 {
    p.v + p.w * t
}

/// Everything the model needs at one fixed observable `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableCell {
    label: String,
    college: PartyUtility,
    society: PartyUtility,
    delta: f64,
    dist: ScoreDistribution,
}

impl ObservableCell {
    pub fn new(
        label: impl Into<String>,
        college: PartyUtility,
        society: PartyUtility,
        delta: f64,
        dist: ScoreDistribution,
    ) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(ModelError::invalid(
                "delta",
                format!("must be finite and non-negative, got {delta}"),
            ));
        }
        Ok(ObservableCell {
            label: label.into(),
            college,
            society,
            delta,
            dist,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn college(&self) -> &PartyUtility {
        &self.college
    }

    pub fn society(&self) -> &PartyUtility {
        &self.society
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn dist(&self) -> &ScoreDistribution {
        &self.dist
    }

    /// `delta = 0` is accepted as a diagnostic baseline (no social pressure).
    pub fn is_degenerate(&self) -> bool {
        self.delta == 0.0
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(
            self.label.clone(),
            self.college,
            self.society,
            delta,
            self.dist.clone(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bars {
    pub college_bar: f64,
    pub society_bar: f64,
    pub expost_bar: f64,
}

/// Relative selectivity of the college against society at one cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Selectivity {
    /// College bar below society's.
    Less,
    Aligned,
    /// College bar above society's.
    More,
}

impl Bars {
    pub fn selectivity(&self) -> Selectivity {
        let scale = 1.0_f64
            .max(self.college_bar.abs())
            .max(self.society_bar.abs());
        let gap = self.college_bar - self.society_bar;
        if gap.abs() <= 1e-12 * scale {
            Selectivity::Aligned
        } else if gap < 0.0 {
            Selectivity::Less
        } else {
            Selectivity::More
        }
    }
}

pub fn bars(cell: &ObservableCell) -> Bars {
    let (c, s, d) = (cell.college, cell.society, cell.delta);
    Bars {
        college_bar: c.bar(),
        society_bar: s.bar(),
        expost_bar: -(c.v + d * s.v) / (c.w + d * s.w),
    }
}

/// Society's disagreement with decision `accept` when it treats the student
/// as having score `t_s`.
pub fn disagreement(cell: &ObservableCell, t_s: f64, accept: bool) -> f64 {
    let us = utility(&cell.society, t_s);
    if accept {
        (-us).max(0.0)
    } else {
        us.max(0.0)
    }
}

/// Convex combination `(u^c + delta u^s) / (1 + delta)`.
pub fn expost_utility(cell: &ObservableCell, t: f64) -> f64 {
    (utility(&cell.college, t) + cell.delta * utility(&cell.society, t)) / (1.0 + cell.delta)
}

/// Imputation level plus a monotone acceptance rule.
///
/// Non-submitters (`t <= imputation`) are pooled and accepted iff
/// `accept_nonsubmitters`; submitted scores are accepted iff strictly above
/// `accept_strictly_above`. Scores below the imputation are never submitted
/// on path, and off path they are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Policy {
    imputation: ExtReal,
    accept_nonsubmitters: bool,
    accept_strictly_above: ExtReal,
}

impl Policy {
    /// Accepting the pool forces every submitted score to be accepted too;
    /// rejecting it puts the submitter threshold at or above the imputation.
    pub fn new(imputation: ExtReal, accept_nonsubmitters: bool, accept_strictly_above: ExtReal) -> Result<Self> {
        if accept_nonsubmitters && accept_strictly_above > imputation {
            return Err(ModelError::invalid(
                "accept_strictly_above",
                format!(
                    "non-submitters imputed at {imputation} are accepted, so submitted scores \
                     above {imputation} must be too (threshold {accept_strictly_above})"
                ),
            ));
        }
        if !accept_nonsubmitters && accept_strictly_above < imputation {
            return Err(ModelError::invalid(
                "accept_strictly_above",
                format!("must be at least the imputation {imputation} when non-submitters are rejected"),
            ));
        }
        Ok(Policy {
            imputation,
            accept_nonsubmitters,
            accept_strictly_above,
        })
    }

    /// Everyone submits; scores above `threshold` are accepted.
    pub fn mandatory(threshold: f64) -> Self {
        Policy {
            imputation: ExtReal::NegInf,
            accept_nonsubmitters: false,
            accept_strictly_above: ExtReal::Finite(threshold),
        }
    }

    /// Impute `tau`, reject the pool, accept every submitted score.
    pub fn reject_pool(tau: ExtReal) -> Self {
        Policy {
            imputation: tau,
            accept_nonsubmitters: false,
            accept_strictly_above: tau,
        }
    }

    /// Impute `tau` and accept everyone.
    pub fn accept_all(tau: ExtReal) -> Self {
        Policy {
            imputation: tau,
            accept_nonsubmitters: true,
            accept_strictly_above: tau,
        }
    }

    pub fn imputation(&self) -> ExtReal {
        self.imputation
    }

    pub fn accept_nonsubmitters(&self) -> bool {
        self.accept_nonsubmitters
    }

    pub fn accept_strictly_above(&self) -> ExtReal {
        self.accept_strictly_above
    }

    /// Effective threshold on submitted scores: accepted iff `t > threshold`.
    pub fn submitter_threshold(&self) -> ExtReal {
        self.accept_strictly_above.max(self.imputation)
    }

    /// True-score admission outcome.
    pub fn admits(&self, t: f64) -> bool {
        if self.imputation >= t {
            self.accept_nonsubmitters
        } else {
            self.submitter_threshold() < t
        }
    }
}

/// One piece of the score line under a policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmitSegment {
    /// Exclusive lower end.
    pub lo: ExtReal,
    /// Inclusive upper end.
    pub hi: ExtReal,
    pub accepted: bool,
    /// Pooled non-submitters vs separated submitters.
    pub pooled: bool,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeOutcome {
    /// `E[A u^c]`.
    pub expected_underlying: f64,
    /// `E[d]` before scaling by `delta`.
    pub expected_disagreement: f64,
    pub college_payoff: f64,
    /// `E[A u^s]`.
    pub society_payoff: f64,
    pub admit_measure: f64,
    pub admitted_sets: Vec<AdmitSegment>,
}

impl RegimeOutcome {
    pub(crate) fn assemble(
        delta: f64,
        expected_underlying: f64,
        expected_disagreement: f64,
        society_payoff: f64,
        admit_measure: f64,
        admitted_sets: Vec<AdmitSegment>,
    ) -> Self {
        RegimeOutcome {
            expected_underlying,
            expected_disagreement,
            college_payoff: expected_underlying - delta * expected_disagreement,
            society_payoff,
            admit_measure,
            admitted_sets,
        }
    }
}
