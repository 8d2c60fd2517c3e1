//! Closed-form optimal policies for the three testing regimes at one cell,
//! and exact evaluation of any monotone policy.

use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{Affine, Crossing};
use crate::ext::ExtReal;
use crate::model::{
    bars, disagreement, AdmitSegment, Bars, ObservableCell, Policy, RegimeOutcome, Selectivity,
};

/// Which branch of the flexible-imputation solution was taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CaseTag {
    /// Less selective: impute the ex-post bar, reject the pool.
    ReplicateMandatory,
    /// Less selective: impute `+inf` and accept everyone.
    AcceptAll,
    /// More selective: impute `t°` strictly between the ex-post and college bars.
    InteriorTau,
    /// More selective: impute the college bar and reach the college's first best.
    FirstBestTau,
    /// Impute the ex-post bar (aligned cell, or more selective with `t° <= t*`).
    AtExpostBar,
}

impl CaseTag {
    /// Human-readable description of the branch.
    pub fn describe(&self) -> &'static str {
        match self {
            CaseTag::ReplicateMandatory => "less selective: replicate the test-mandatory outcome",
            CaseTag::AcceptAll => "less selective: impute +inf and accept all applicants",
            CaseTag::InteriorTau => "more selective: impute interior t° (zero disagreement)",
            CaseTag::FirstBestTau => "more selective: impute the college bar, first best",
            CaseTag::AtExpostBar => "impute the ex-post bar and reject non-submitters",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlexibleSolution {
    pub policy: Policy,
    pub outcome: RegimeOutcome,
    pub payoff: f64,
    pub case_tag: CaseTag,
    /// Crossing of the lower expectation with society's bar.
    pub t_circ: ExtReal,
    /// Crossing of the lower expectation with the ex-post bar.
    pub t_dagger: ExtReal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub tau: ExtReal,
    pub payoff: f64,
    pub accepts_nonsubmitters: bool,
    pub disagreement: f64,
    pub underlying: f64,
}

fn pe(cell: &ObservableCell, lo: ExtReal, hi: ExtReal, g: Affine) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    cell.dist()
        .partial_expectation(lo, hi, g)
        .expect("interval ordered above")
}

/// Exact outcome of a monotone policy.
///
/// Non-submitters are judged at their pooled score `L(tau)`; each submitted
/// score is judged at face value.
pub fn evaluate_policy(cell: &ObservableCell, p: &Policy) -> RegimeOutcome {
    let d = cell.dist();
    let uc = cell.college().affine();
    let us = cell.society().affine();
    let neg_us = Affine::new(-us.a, -us.b);
    let sbar = ExtReal::Finite(cell.society().bar());
    let tau = p.imputation();

    let mut underlying = 0.0;
    let mut disagree = 0.0;
    let mut society = 0.0;
    let mut admit = 0.0;
    let mut segments = Vec::new();

    let pool_mass = d.cdf(tau);
    if pool_mass > 0.0 {
        let pooled_score = d.lower_expectation(tau);
        let accept = p.accept_nonsubmitters();
        if accept {
            underlying += pe(cell, ExtReal::NegInf, tau, uc);
            society += pe(cell, ExtReal::NegInf, tau, us);
            admit += pool_mass;
        }
        disagree += pool_mass * disagreement(cell, pooled_score, accept);
        segments.push(AdmitSegment {
            lo: ExtReal::NegInf,
            hi: tau,
            accepted: accept,
            pooled: true,
            mass: pool_mass,
        });
    }

    let threshold = p.submitter_threshold();
    if threshold > tau {
        // separated but rejected: society objects where u^s > 0
        disagree += pe(cell, tau.max(sbar), threshold, us);
        let mass = d.upper_mass(tau) - d.upper_mass(threshold);
        segments.push(AdmitSegment {
            lo: tau,
            hi: threshold,
            accepted: false,
            pooled: false,
            mass,
        });
    }
    if threshold < ExtReal::PosInf {
        underlying += pe(cell, threshold, ExtReal::PosInf, uc);
        society += pe(cell, threshold, ExtReal::PosInf, us);
        // separated and accepted: society objects where u^s < 0
        disagree += pe(cell, threshold, sbar, neg_us);
        let mass = d.upper_mass(threshold);
        admit += mass;
        segments.push(AdmitSegment {
            lo: threshold,
            hi: ExtReal::PosInf,
            accepted: true,
            pooled: false,
            mass,
        });
    }

    RegimeOutcome::assemble(
        cell.delta(),
        underlying,
        disagree.max(0.0),
        society,
        admit.clamp(0.0, 1.0),
        segments,
    )
}

/// Everyone submits; admit iff the score beats the ex-post bar.
pub fn solve_mandatory(cell: &ObservableCell) -> (Policy, RegimeOutcome) {
    let p = Policy::mandatory(bars(cell).expost_bar);
    let out = evaluate_policy(cell, &p);
    (p, out)
}

/// Imputation level above which non-submitters are accepted.
///
/// `+inf` when even the whole pool fails the ex-post bar, the support
/// infimum when every pool passes it.
pub fn nonsubmitter_threshold(cell: &ObservableCell) -> ExtReal {
    let estar = bars(cell).expost_bar;
    match cell.dist().lower_expectation_crossing(estar, Crossing::Exceed) {
        ExtReal::NegInf => ExtReal::Finite(cell.dist().support().0),
        t => t,
    }
}

/// Crossing of `L(.)` with society's bar, `±inf` when `L` stays on one side.
pub fn t_circ(cell: &ObservableCell) -> ExtReal {
    cell.dist()
        .lower_expectation_crossing(cell.society().bar(), Crossing::Reach)
}

/// The piecewise imputation rule for a more-selective college.
pub fn more_selective_rule(b: &Bars, t_circ: ExtReal) -> (ExtReal, CaseTag) {
    let estar = ExtReal::Finite(b.expost_bar);
    let cbar = ExtReal::Finite(b.college_bar);
    if t_circ <= estar {
        (estar, CaseTag::AtExpostBar)
    } else if t_circ < cbar {
        (t_circ, CaseTag::InteriorTau)
    } else {
        (cbar, CaseTag::FirstBestTau)
    }
}

fn payoff_tie_tol(a: f64, b: f64) -> f64 {
    1e-12 * (1.0 + a.abs().max(b.abs()))
}

/// Optimal policy when the college chooses the imputation freely.
pub fn solve_flexible(cell: &ObservableCell) -> FlexibleSolution {
    let b = bars(cell);
    let tc = t_circ(cell);
    let td = nonsubmitter_threshold(cell);
    let estar = ExtReal::Finite(b.expost_bar);

    let finish = |policy: Policy, case_tag: CaseTag| {
        let outcome = evaluate_policy(cell, &policy);
        FlexibleSolution {
            policy,
            payoff: outcome.college_payoff,
            outcome,
            case_tag,
            t_circ: tc,
            t_dagger: td,
        }
    };

    match b.selectivity() {
        Selectivity::Aligned => finish(Policy::reject_pool(estar), CaseTag::AtExpostBar),
        Selectivity::Less => {
            let replicate = finish(Policy::reject_pool(estar), CaseTag::ReplicateMandatory);
            let accept = finish(Policy::accept_all(ExtReal::PosInf), CaseTag::AcceptAll);
            if accept.payoff > replicate.payoff + payoff_tie_tol(accept.payoff, replicate.payoff) {
                accept
            } else {
                replicate
            }
        }
        Selectivity::More => {
            let (tau, tag) = more_selective_rule(&b, tc);
            let rule = finish(Policy::reject_pool(tau), tag);
            match (cell.dist().atoms(), tag) {
                (Some(atoms), CaseTag::InteriorTau | CaseTag::FirstBestTau)
                    if tc <= ExtReal::Finite(b.college_bar) =>
                {
                    // On a discrete law the crossing atom itself may be better
                    // left out of the pool; realize "just below t°" between atoms.
                    let crossing = tc.finite().expect("finite crossing atom");
                    let prev = atoms.iter().rev().map(|a| a.score).find(|&s| s < crossing);
                    let left = match prev {
                        Some(s) => ExtReal::Finite(0.5 * (s + crossing)).max(estar),
                        None => estar,
                    };
                    let alt = finish(Policy::reject_pool(left), tag);
                    if alt.payoff > rule.payoff + payoff_tie_tol(alt.payoff, rule.payoff) {
                        alt
                    } else {
                        rule
                    }
                }
                _ => rule,
            }
        }
    }
}

/// Optimal acceptance given an exogenous imputation `tau` (`+inf` is test blind).
pub fn solve_restricted(cell: &ObservableCell, tau: ExtReal) -> (Policy, RegimeOutcome) {
    let estar = bars(cell).expost_bar;
    let pooled = cell.dist().lower_expectation(tau);
    let p = if pooled > estar {
        Policy::accept_all(tau)
    } else {
        Policy::new(tau, false, tau.max(ExtReal::Finite(estar))).expect("threshold at or above tau")
    };
    let out = evaluate_policy(cell, &p);
    (p, out)
}

/// Test blind: nobody submits.
pub fn solve_blind(cell: &ObservableCell) -> (Policy, RegimeOutcome) {
    solve_restricted(cell, ExtReal::PosInf)
}

/// Restricted-imputation payoff at each `tau`, in input order.
pub fn payoff_curve(cell: &ObservableCell, taus: &[ExtReal]) -> Vec<CurvePoint> {
    taus.par_iter()
        .map(|&tau| {
            let (p, out) = solve_restricted(cell, tau);
            CurvePoint {
                tau,
                payoff: out.college_payoff,
                accepts_nonsubmitters: p.accept_nonsubmitters(),
                disagreement: out.expected_disagreement,
                underlying: out.expected_underlying,
            }
        })
        .collect()
}

/// Disagreement from deciding `accept` for everyone in `(lo, hi]` while
/// pooling them at their conditional mean.
pub fn pooled_disagreement(cell: &ObservableCell, lo: ExtReal, hi: ExtReal, accept: bool) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    let d = cell.dist();
    let mass = d.cdf(hi) - d.cdf(lo);
    if mass <= 0.0 {
        return 0.0;
    }
    let first = pe(cell, lo, hi, Affine::new(0.0, 1.0));
    mass * disagreement(cell, first / mass, accept)
}

/// Disagreement from deciding `accept` for everyone in `(lo, hi]` with each
/// score observed.
pub fn separated_disagreement(cell: &ObservableCell, lo: ExtReal, hi: ExtReal, accept: bool) -> f64 {
    let us = cell.society().affine();
    let sbar = ExtReal::Finite(cell.society().bar());
    if accept {
        pe(cell, lo, hi.min(sbar), Affine::new(-us.a, -us.b))
    } else {
        pe(cell, lo.max(sbar), hi, us)
    }
}
