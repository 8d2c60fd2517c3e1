//! `verify`: closed forms against the brute-force oracle.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use testopt_core::aa::{self, AAScenario, AaRegime, LossSplit, TestRegime};
use testopt_core::oracle::{self, OracleConfig};
use testopt_core::{
    solve_blind, solve_flexible, solve_mandatory, solve_restricted, ExtReal, FlexibleSolution,
    ObservableCell, Policy, RegimeOutcome,
};

use crate::scenario::Scenario;
use crate::{io_err, CliError};

/// The closed-form entry points under test. Swapping one out for a broken
/// version is how the checker itself is tested.
#[derive(Clone, Copy)]
pub struct ClosedForms {
    pub mandatory: fn(&ObservableCell) -> (Policy, RegimeOutcome),
    pub flexible: fn(&ObservableCell) -> FlexibleSolution,
    pub restricted: fn(&ObservableCell, ExtReal) -> (Policy, RegimeOutcome),
    pub blind: fn(&ObservableCell) -> (Policy, RegimeOutcome),
    pub college_losses: fn(&AAScenario, AaRegime, TestRegime) -> LossSplit,
    pub society_losses: fn(&AAScenario, AaRegime, TestRegime) -> f64,
}

impl Default for ClosedForms {
    fn default() -> Self {
        ClosedForms {
            mandatory: solve_mandatory,
            flexible: solve_flexible,
            restricted: solve_restricted,
            blind: solve_blind,
            college_losses: aa::college_losses,
            society_losses: aa::society_losses,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub scope: String,
    pub name: String,
    pub closed_form: f64,
    pub oracle: f64,
    pub tolerance: f64,
    /// Only `closed >= oracle - tolerance` is required.
    pub one_sided: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    /// Largest `|closed form - oracle|` per check name.
    pub max_deviation: BTreeMap<String, f64>,
    pub passed: usize,
    pub failed: usize,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

struct Checks(Vec<Check>);

impl Checks {
    /// `|closed - oracle| <= tol`.
    fn close(&mut self, scope: &str, name: &str, closed: f64, oracle: f64, tol: f64) {
        let pass = (closed - oracle).abs() <= tol;
        self.push(scope, name, closed, oracle, tol, false, pass);
    }

    /// `closed >= oracle - tol`.
    fn at_least(&mut self, scope: &str, name: &str, closed: f64, oracle: f64, tol: f64) {
        let pass = closed >= oracle - tol;
        self.push(scope, name, closed, oracle, tol, true, pass);
    }

    #[allow(clippy::too_many_arguments)]
    fn push(&mut self, scope: &str, name: &str, closed: f64, oracle: f64, tol: f64, one_sided: bool, pass: bool) {
        self.0.push(Check {
            scope: scope.to_string(),
            name: name.to_string(),
            closed_form: closed,
            oracle,
            tolerance: tol,
            one_sided,
            pass,
        });
    }
}

fn rel(x: f64, r: f64) -> f64 {
    r * (1.0 + x.abs())
}

fn check_cell(c: &mut Checks, cell: &ObservableCell, imputation: Option<ExtReal>, cfg: &OracleConfig, f: &ClosedForms) {
    let scope = format!("cell `{}`", cell.label());
    let scope = scope.as_str();

    let (_, mand) = (f.mandatory)(cell);
    let direct_m = oracle::direct_payoff(cell, ExtReal::NegInf, false, cfg).payoff;
    c.close(scope, "mandatory payoff", mand.college_payoff, direct_m, rel(direct_m, 1e-9));

    let flex = (f.flexible)(cell);
    let brute = oracle::brute_force_flexible(cell, cfg);
    c.close(
        scope,
        "flexible payoff vs grid search",
        flex.payoff,
        brute.best_payoff,
        1e-6 + brute.step_variation,
    );
    c.at_least(
        scope,
        "flexible payoff beats grid search",
        flex.payoff,
        brute.best_payoff,
        rel(brute.best_payoff, 1e-9),
    );
    let at_own = oracle::direct_payoff(cell, flex.policy.imputation(), flex.policy.accept_nonsubmitters(), cfg).payoff;
    c.close(scope, "flexible payoff at its own policy", flex.payoff, at_own, rel(at_own, 1e-8));
    c.at_least(scope, "flexible dominates mandatory", flex.payoff, mand.college_payoff, rel(mand.college_payoff, 1e-9));
    let (_, blind) = (f.blind)(cell);
    c.at_least(scope, "flexible dominates blind", flex.payoff, blind.college_payoff, rel(blind.college_payoff, 1e-9));
    let blind_best = [false, true]
        .map(|acc| oracle::direct_payoff(cell, ExtReal::PosInf, acc, cfg).payoff)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    c.close(scope, "blind payoff", blind.college_payoff, blind_best, rel(blind_best, 1e-8));

    if let Some(tau) = imputation {
        let (p, out) = (f.restricted)(cell, tau);
        let best = [false, true]
            .map(|acc| oracle::direct_payoff(cell, tau, acc, cfg).payoff)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        c.close(scope, "restricted payoff", out.college_payoff, best, rel(best, 1e-8));
        let own = oracle::direct_payoff(cell, tau, p.accept_nonsubmitters(), cfg).payoff;
        c.close(scope, "restricted payoff at its own decision", out.college_payoff, own, rel(own, 1e-8));
    }

    if cfg.mc_samples > 0 {
        let mc = oracle::mc_crosscheck(cell, &flex.policy, cfg);
        c.close(
            scope,
            "flexible payoff vs Monte Carlo",
            flex.payoff,
            mc.outcome.college_payoff,
            4.0 * mc.se_payoff + 1e-9,
        );
    }
}

fn check_aa(c: &mut Checks, s: &AAScenario, f: &ClosedForms) {
    let brute = oracle::brute_force_aa(s);
    for a in [AaRegime::Allowed, AaRegime::Banned] {
        for r in [TestRegime::Mandatory, TestRegime::Blind] {
            let scope = format!(
                "groups {} / {}",
                if a == AaRegime::Allowed { "allowed" } else { "banned" },
                if r == TestRegime::Mandatory { "mandatory" } else { "blind" }
            );
            let closed = (f.college_losses)(s, a, r);
            let o = brute.college.get(a, r);
            c.close(&scope, "college allocative loss", closed.allocative, o.allocative, rel(o.allocative, 1e-8));
            c.close(&scope, "college social loss", closed.social, o.social, rel(o.social, 1e-8));
            let soc = (f.society_losses)(s, a, r);
            let os = brute.society.get(a, r);
            c.close(&scope, "society loss", soc, os, rel(os, 1e-8));
        }
    }
}

/// Runs every check the scenario supports.
pub fn run_checks(sc: &Scenario, cfg: &OracleConfig, f: &ClosedForms) -> Result<VerifyReport, CliError> {
    cfg.validate().map_err(|e| CliError::Precondition(format!("verify: {e}")))?;
    let mut c = Checks(Vec::new());
    for (cell, tau) in sc.cells.iter().zip(&sc.imputations) {
        check_cell(&mut c, cell, *tau, cfg, f);
    }
    if let Some(s) = &sc.aa {
        s.validate().map_err(|e| CliError::Input(format!("aa: {e}")))?;
        check_aa(&mut c, s, f);
    }
    let failed = c.0.iter().filter(|k| !k.pass).count();
    let mut max_deviation = BTreeMap::new();
    for k in c.0.iter().filter(|k| !k.one_sided) {
        let dev = (k.closed_form - k.oracle).abs();
        let e = max_deviation.entry(k.name.clone()).or_insert(0.0_f64);
        *e = e.max(dev);
    }
    Ok(VerifyReport {
        max_deviation,
        passed: c.0.len() - failed,
        failed,
        checks: c.0,
    })
}

pub fn cmd_verify(path: &Path, cfg: &OracleConfig, f: &ClosedForms, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let sc = Scenario::load(path)?;
    let report = run_checks(&sc, cfg, f)?;
    if json {
        serde_json::to_writer_pretty(&mut *out, &report).map_err(|e| CliError::Input(e.to_string()))?;
        writeln!(out).map_err(io_err)?;
    } else {
        for k in &report.checks {
            writeln!(
                out,
                "{} {}: {}: closed form {:.10}, oracle {:.10}, tolerance {:.3e}",
                if k.pass { "PASS" } else { "FAIL" },
                k.scope,
                k.name,
                k.closed_form,
                k.oracle,
                k.tolerance
            )
            .map_err(io_err)?;
        }
        for (name, dev) in &report.max_deviation {
            writeln!(out, "max deviation, {name}: {dev:.3e}").map_err(io_err)?;
        }
        writeln!(out, "{} passed, {} failed", report.passed, report.failed).map_err(io_err)?;
    }
    if report.ok() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed(format!("verify: {} check(s) failed", report.failed)))
    }
}
