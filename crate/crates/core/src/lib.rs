//! College admissions under social pressure: test-mandatory, test-optional
//! and test-blind regimes at the level of a single observable cell, plus a
//! two-group affirmative-action scenario.

// `!(x < y)` is used on purpose: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aa;
pub mod dist;
pub mod error;
pub mod ext;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod solvers;
pub mod welfare;

pub use dist::{Atom, Crossing, Knot, Law, ScoreDistribution};
pub use error::{ModelError, Result};
pub use ext::ExtReal;
pub use model::{
    bars, disagreement, expost_utility, utility, AdmitSegment, Bars, ObservableCell, PartyUtility,
    Policy, RegimeOutcome, Selectivity,
};
pub use solvers::{
    evaluate_policy, nonsubmitter_threshold, payoff_curve, solve_blind, solve_flexible,
    solve_mandatory, solve_restricted, CaseTag, CurvePoint, FlexibleSolution,
};
