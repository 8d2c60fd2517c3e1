//! Who gains and who loses when a college drops a test requirement.

use serde::Serialize;

use crate::dist::mlrp_increasing;
use crate::error::{ModelError, Result};
use crate::ext::ExtReal;
use crate::model::{bars, ObservableCell, Policy};
use crate::solvers::{evaluate_policy, solve_flexible, solve_mandatory, solve_restricted};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FateClass {
    Unaffected,
    StrictlyBenefits,
    StrictlyHarmed,
}

/// Fate of students in the score interval `(lo, hi]` of one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudentFate {
    pub cell_label: String,
    pub lo: ExtReal,
    pub hi: ExtReal,
    pub mandatory_admitted: bool,
    pub optional_admitted: bool,
    pub classification: FateClass,
    /// Probability mass of the interval within the cell.
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Region {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellClassification {
    pub cell_label: String,
    pub region: Region,
    pub fates: Vec<StudentFate>,
}

/// Cells along which observables improve, each with its exogenous imputation.
#[derive(Debug, Clone)]
pub struct ObservablePath {
    cells: Vec<ObservableCell>,
    taus: Vec<ExtReal>,
}

const UNIT_WEIGHT_TOL: f64 = 1e-12;

impl ObservablePath {
    pub fn new(cells: Vec<ObservableCell>, taus: Vec<ExtReal>) -> Result<Self> {
        if cells.is_empty() {
            return Err(ModelError::InvalidPath("path has no cells".into()));
        }
        if cells.len() != taus.len() {
            return Err(ModelError::InvalidPath(format!(
                "{} cells but {} imputations",
                cells.len(),
                taus.len()
            )));
        }
        for c in &cells {
            for (who, u) in [("college", c.college()), ("society", c.society())] {
                if (u.w() - 1.0).abs() > UNIT_WEIGHT_TOL {
                    return Err(ModelError::InvalidPath(format!(
                        "cell `{}`: {who} score weight is {}, paths need unit weights",
                        c.label(),
                        u.w()
                    )));
                }
            }
        }
        for (i, pair) in cells.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            if b.college().v() < a.college().v() || b.society().v() < a.society().v() {
                return Err(ModelError::InvalidPath(format!(
                    "intercepts decrease between cells {} and {}",
                    i,
                    i + 1
                )));
            }
        }
        for (i, pair) in taus.windows(2).enumerate() {
            if pair[1] < pair[0] {
                return Err(ModelError::InvalidPath(format!(
                    "imputation decreases between cells {} and {} ({} > {})",
                    i,
                    i + 1,
                    pair[0],
                    pair[1]
                )));
            }
        }
        let dists: Vec<_> = cells.iter().map(|c| c.dist().clone()).collect();
        match mlrp_increasing(&dists) {
            Ok(true) => {}
            Ok(false) => {
                return Err(ModelError::InvalidPath(
                    "score distributions are not MLRP-increasing".into(),
                ))
            }
            Err(e) => return Err(ModelError::InvalidPath(e.to_string())),
        }
        Ok(ObservablePath { cells, taus })
    }

    pub fn cells(&self) -> &[ObservableCell] {
        &self.cells
    }

    pub fn taus(&self) -> &[ExtReal] {
        &self.taus
    }
}

/// Lowest score strictly above which the policy admits; admit sets are upper sets.
fn admit_threshold(p: &Policy) -> ExtReal {
    if p.accept_nonsubmitters() {
        ExtReal::NegInf
    } else {
        p.submitter_threshold()
    }
}

/// Partitions the score line by comparing two admit sets.
pub fn compare_policies(cell: &ObservableCell, mandatory: &Policy, optional: &Policy) -> Vec<StudentFate> {
    let m = admit_threshold(mandatory);
    let o = admit_threshold(optional);
    let (lo, hi) = (m.min(o), m.max(o));
    let d = cell.dist();
    let mut out = Vec::with_capacity(3);
    let mut push = |a: ExtReal, b: ExtReal, madm: bool, oadm: bool| {
        if a >= b {
            return;
        }
        let classification = match (madm, oadm) {
            (false, true) => FateClass::StrictlyBenefits,
            (true, false) => FateClass::StrictlyHarmed,
            _ => FateClass::Unaffected,
        };
        out.push(StudentFate {
            cell_label: cell.label().to_string(),
            lo: a,
            hi: b,
            mandatory_admitted: madm,
            optional_admitted: oadm,
            classification,
            mass: d.cdf(b) - d.cdf(a),
        });
    };
    push(ExtReal::NegInf, lo, false, false);
    push(lo, hi, m < o, o < m);
    push(hi, ExtReal::PosInf, true, true);
    out
}

/// Fates when the college moves from mandatory testing to flexible test-optional.
pub fn classify_flexible(cell: &ObservableCell) -> Vec<StudentFate> {
    let (mandatory, _) = solve_mandatory(cell);
    let flexible = solve_flexible(cell);
    compare_policies(cell, &mandatory, &flexible.policy)
}

/// Region of one cell given its imputation; ties go to the weaker region.
pub fn region(cell: &ObservableCell, tau: ExtReal) -> Region {
    let estar = ExtReal::Finite(bars(cell).expost_bar);
    if tau <= estar {
        Region::Low
    } else if cell.dist().lower_expectation(tau) <= bars(cell).expost_bar {
        Region::Medium
    } else {
        Region::High
    }
}

/// Low / medium / high classification along a path of increasing observables.
pub fn classify_path(path: &ObservablePath) -> Vec<CellClassification> {
    path.cells
        .iter()
        .zip(&path.taus)
        .map(|(cell, &tau)| {
            let (mandatory, _) = solve_mandatory(cell);
            let (restricted, _) = solve_restricted(cell, tau);
            CellClassification {
                cell_label: cell.label().to_string(),
                region: region(cell, tau),
                fates: compare_policies(cell, &mandatory, &restricted),
            }
        })
        .collect()
}

/// Expected society utility over the admitted mass, at true scores.
pub fn society_payoff(cell: &ObservableCell, p: &Policy) -> f64 {
    evaluate_policy(cell, p).society_payoff
}

/// Total mass per fate class, in the order (benefits, harmed, unaffected).
pub fn fate_masses(fates: &[StudentFate]) -> (f64, f64, f64) {
    fates.iter().fold((0.0, 0.0, 0.0), |(b, h, u), f| match f.classification {
        FateClass::StrictlyBenefits => (b + f.mass, h, u),
        FateClass::StrictlyHarmed => (b, h + f.mass, u),
        FateClass::Unaffected => (b, h, u + f.mass),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DegenerateRule {
    /// Non-submitters imputed the mean of submitted scores.
    AverageSubmitted,
    /// Non-submitters imputed the Bayesian mean of non-submitters.
    BayesianNonsubmission,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Collapse {
    CollapsesToBlind,
    CollapsesToMandatory,
}

/// Where a self-referential imputation rule unravels to.
///
/// Imputing the average submitted score makes every student below it
/// prefer to withhold, which raises the average until nobody submits.
/// Imputing the Bayesian non-submitter mean makes the top non-submitter
/// prefer to submit, which lowers the mean until everyone submits.
pub fn classify_degenerate_imputation(rule: DegenerateRule) -> Collapse {
    match rule {
        DegenerateRule::AverageSubmitted => Collapse::CollapsesToBlind,
        DegenerateRule::BayesianNonsubmission => Collapse::CollapsesToMandatory,
    }
}
