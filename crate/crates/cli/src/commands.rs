//! `solve`, `sweep` and `aa`.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use testopt_core::aa::{self, AAAnalysis, AaRegime, TestRegime};
use testopt_core::welfare::{self, StudentFate};
use testopt_core::{
    bars, evaluate_policy, payoff_curve, solve_blind, solve_flexible, solve_mandatory,
    solve_restricted, Bars, CaseTag, ExtReal, ObservableCell, Policy, RegimeOutcome, Selectivity,
};

use crate::scenario::{Scenario, ScenarioFile};
use crate::{io_err, CliError, RegimeArg};

#[derive(Debug, Serialize)]
pub struct CellReport {
    pub label: String,
    pub bars: Bars,
    pub selectivity: Selectivity,
    pub delta: f64,
    /// `delta = 0`: the college ignores society entirely.
    pub degenerate_delta: bool,
    pub imputation: Option<ExtReal>,
    pub policy: Policy,
    pub outcome: RegimeOutcome,
    pub case_tag: Option<CaseTag>,
    pub case: String,
    pub t_circ: Option<ExtReal>,
    pub t_dagger: Option<ExtReal>,
    /// Disagreement when all students are accepted / rejected without scores.
    pub blind_branches: Option<BlindBranches>,
    pub fates: Vec<StudentFate>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlindBranches {
    pub accept_disagreement: f64,
    pub reject_disagreement: f64,
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub regime: String,
    pub cells: Vec<CellReport>,
    pub scenario: ScenarioFile,
}

fn regime_name(r: RegimeArg) -> &'static str {
    match r {
        RegimeArg::Mandatory => "mandatory",
        RegimeArg::Flexible => "flexible",
        RegimeArg::Restricted => "restricted",
        RegimeArg::Blind => "blind",
    }
}

pub fn solve_cell(cell: &ObservableCell, imputation: Option<ExtReal>, regime: RegimeArg) -> Result<CellReport, CliError> {
    let b = bars(cell);
    let (mandatory, _) = solve_mandatory(cell);
    let mut report = CellReport {
        label: cell.label().to_string(),
        bars: b,
        selectivity: b.selectivity(),
        delta: cell.delta(),
        degenerate_delta: cell.is_degenerate(),
        imputation: None,
        policy: mandatory,
        outcome: evaluate_policy(cell, &mandatory),
        case_tag: None,
        case: String::new(),
        t_circ: None,
        t_dagger: None,
        blind_branches: None,
        fates: Vec::new(),
    };
    match regime {
        RegimeArg::Mandatory => {
            report.case = "test mandatory: admit iff the ex-post utility is positive".into();
            report.fates = welfare::compare_policies(cell, &mandatory, &mandatory);
        }
        RegimeArg::Flexible => {
            let s = solve_flexible(cell);
            report.case = match (b.selectivity(), s.case_tag) {
                (Selectivity::Aligned, _) => "aligned bars: impute the ex-post bar, first best at zero disagreement".into(),
                (_, tag) => tag.describe().to_string(),
            };
            report.case_tag = Some(s.case_tag);
            report.t_circ = Some(s.t_circ);
            report.t_dagger = Some(s.t_dagger);
            report.imputation = Some(s.policy.imputation());
            report.fates = welfare::classify_flexible(cell);
            report.policy = s.policy;
            report.outcome = s.outcome;
        }
        RegimeArg::Restricted | RegimeArg::Blind => {
            let tau = match regime {
                RegimeArg::Blind => ExtReal::PosInf,
                _ => imputation.ok_or_else(|| {
                    CliError::Precondition(format!(
                        "cell `{}`: the restricted regime needs an imputation (add an `imputation` section)",
                        cell.label()
                    ))
                })?,
            };
            let (p, out) = if tau == ExtReal::PosInf {
                solve_blind(cell)
            } else {
                solve_restricted(cell, tau)
            };
            if tau == ExtReal::PosInf {
                report.blind_branches = Some(BlindBranches {
                    accept_disagreement: evaluate_policy(cell, &Policy::accept_all(tau)).expected_disagreement,
                    reject_disagreement: evaluate_policy(cell, &Policy::reject_pool(tau)).expected_disagreement,
                });
            }
            report.case = match (regime, p.accept_nonsubmitters()) {
                (RegimeArg::Blind, true) => "test blind: the mean student clears the ex-post bar, accept everyone",
                (RegimeArg::Blind, false) => "test blind: the mean student misses the ex-post bar, reject everyone",
                (_, true) => "restricted imputation: pooled mean clears the ex-post bar, accept non-submitters",
                (_, false) => {
                    "restricted imputation: reject non-submitters, admit submitters above max(tau, ex-post bar)"
                }
            }
            .into();
            report.imputation = Some(tau);
            report.t_dagger = Some(testopt_core::nonsubmitter_threshold(cell));
            report.fates = welfare::compare_policies(cell, &mandatory, &p);
            report.policy = p;
            report.outcome = out;
        }
    }
    Ok(report)
}

fn fmt_fate(f: &StudentFate) -> String {
    let class = match f.classification {
        welfare::FateClass::Unaffected => "unaffected",
        welfare::FateClass::StrictlyBenefits => "benefits",
        welfare::FateClass::StrictlyHarmed => "harmed",
    };
    format!("({:.4}, {:.4}] {class} (mass {:.6})", f.lo, f.hi, f.mass)
}

fn describe_policy(p: &Policy) -> String {
    let pool = if p.accept_nonsubmitters() { "accept" } else { "reject" };
    format!(
        "impute {:.6}, {pool} non-submitters, admit submitted t > {:.6}",
        p.imputation(),
        p.submitter_threshold()
    )
}

fn write_cell(out: &mut dyn Write, r: &CellReport) -> std::io::Result<()> {
    let sel = match r.selectivity {
        Selectivity::Less => "less selective than society",
        Selectivity::Aligned => "aligned with society",
        Selectivity::More => "more selective than society",
    };
    writeln!(out, "cell `{}`: {sel}", r.label)?;
    writeln!(
        out,
        "  bars: college {:.6}, society {:.6}, ex-post {:.6} (delta {})",
        r.bars.college_bar, r.bars.society_bar, r.bars.expost_bar, r.delta
    )?;
    if r.degenerate_delta {
        writeln!(out, "  warning: delta = 0, society's view carries no weight")?;
    }
    writeln!(out, "  case: {}", r.case)?;
    if let Some(t) = r.imputation {
        writeln!(out, "  imputation: {t:.6}")?;
    }
    if let (Some(tc), Some(td)) = (r.t_circ, r.t_dagger) {
        writeln!(out, "  t° {tc:.6}, t† {td:.6}")?;
    } else if let Some(td) = r.t_dagger {
        writeln!(out, "  non-submitters accepted for imputations above {td:.6}")?;
    }
    writeln!(out, "  policy: {}", describe_policy(&r.policy))?;
    let o = &r.outcome;
    writeln!(
        out,
        "  payoff {:.6} = underlying {:.6} - {} x disagreement {:.6}",
        o.college_payoff, o.expected_underlying, r.delta, o.expected_disagreement
    )?;
    writeln!(
        out,
        "  admitted mass {:.6}, society payoff {:.6}",
        o.admit_measure, o.society_payoff
    )?;
    if let Some(b) = r.blind_branches {
        writeln!(
            out,
            "  without scores: accept all -> disagreement {:.6}; reject all -> disagreement {:.6}",
            b.accept_disagreement, b.reject_disagreement
        )?;
    }
    for f in &r.fates {
        writeln!(out, "  fate {}", fmt_fate(f))?;
    }
    Ok(())
}

pub fn solve(path: &Path, regime: RegimeArg, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let sc = Scenario::load(path)?;
    if sc.cells.is_empty() {
        return Err(CliError::Precondition("solve: scenario has no cells".into()));
    }
    let cells = sc
        .cells
        .iter()
        .zip(&sc.imputations)
        .map(|(c, t)| solve_cell(c, *t, regime))
        .collect::<Result<Vec<_>, _>>()?;
    let report = SolveReport {
        regime: regime_name(regime).to_string(),
        cells,
        scenario: sc.to_file(),
    };
    if json {
        serde_json::to_writer_pretty(&mut *out, &report).map_err(|e| CliError::Input(e.to_string()))?;
        writeln!(out).map_err(io_err)?;
    } else {
        writeln!(out, "regime: {}", report.regime).map_err(io_err)?;
        for c in &report.cells {
            write_cell(out, c).map_err(io_err)?;
        }
    }
    Ok(())
}

/// Evenly spaced grid including both endpoints.
pub fn tau_grid(tau_min: f64, tau_max: f64, steps: usize) -> Result<Vec<ExtReal>, CliError> {
    if steps < 2 {
        return Err(CliError::Precondition(format!("--steps must be at least 2, got {steps}")));
    }
    if !(tau_min.is_finite() && tau_max.is_finite() && tau_min < tau_max) {
        return Err(CliError::Precondition(format!(
            "degenerate tau range [{tau_min}, {tau_max}]"
        )));
    }
    let h = (tau_max - tau_min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            let t = if i == steps - 1 { tau_max } else { tau_min + h * i as f64 };
            ExtReal::Finite(t)
        })
        .collect())
}

fn flush_csv(buf: Vec<u8>, dest: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    match dest {
        Some(p) => std::fs::write(p, buf).map_err(io_err),
        None => out.write_all(&buf).map_err(io_err),
    }
}

pub fn sweep(
    path: &Path,
    label: &str,
    tau_min: f64,
    tau_max: f64,
    steps: usize,
    dest: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let sc = Scenario::load(path)?;
    let (_, cell) = sc.cell(label)?;
    let taus = tau_grid(tau_min, tau_max, steps)?;
    let curve = payoff_curve(cell, &taus);
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["tau", "payoff", "accepts_nonsubmitters", "disagreement", "underlying"])
            .map_err(|e| CliError::Input(e.to_string()))?;
        for p in &curve {
            w.write_record([
                p.tau.to_string(),
                p.payoff.to_string(),
                p.accepts_nonsubmitters.to_string(),
                p.disagreement.to_string(),
                p.underlying.to_string(),
            ])
            .map_err(|e| CliError::Input(e.to_string()))?;
        }
        w.flush().map_err(io_err)?;
    }
    flush_csv(buf, dest, out)
}

fn regime_label(r: TestRegime) -> &'static str {
    match r {
        TestRegime::Mandatory => "mandatory",
        TestRegime::Blind => "blind",
    }
}

fn write_aa(out: &mut dyn Write, a: &AAAnalysis) -> std::io::Result<()> {
    let s = &a.scenario;
    writeln!(
        out,
        "scenario: q {}, p_r {}, p_g {}, beta {}, c {}, delta {}, x1 in [{}, {}] (f = {:.6})",
        s.q, s.p_r, s.p_g, s.beta, s.c, s.delta, s.x1_lo, s.x1_hi, a.f
    )?;
    writeln!(
        out,
        "posteriors: P(green|t=0) {:.6}, P(green|t=1) {:.6}, Delta {:.6}, beta*Delta {:.6}, E[t] {:.6}",
        a.p_g0,
        a.p_g1,
        a.delta_post,
        s.beta * a.delta_post,
        a.et
    )?;
    writeln!(out, "{:<22}{:>14}{:>14}{:>14}{:>14}", "losses", "allocative", "social", "college", "society")?;
    for aa_r in [AaRegime::Allowed, AaRegime::Banned] {
        for t in [TestRegime::Mandatory, TestRegime::Blind] {
            let c = a.loss_college.get(aa_r, t);
            let name = format!(
                "{} / {}",
                if aa_r == AaRegime::Allowed { "allowed" } else { "banned" },
                regime_label(t)
            );
            writeln!(
                out,
                "{name:<22}{:>14.8}{:>14.8}{:>14.8}{:>14.8}",
                c.allocative,
                c.social,
                c.total(),
                a.loss_society.get(aa_r, t)
            )?;
        }
    }
    writeln!(out, "college choice, groups allowed: mandatory")?;
    writeln!(
        out,
        "college choice, groups banned: {} (net benefit of blind {:.8})",
        regime_label(a.college_pref_banned),
        a.blind_net_benefit
    )?;
    if s.beta * a.delta_post <= 0.5 {
        writeln!(out, "note: beta*Delta <= 1/2, the college never goes blind")?;
    }
    writeln!(
        out,
        "thresholds: beta* {:.8}, Delta* {:.8}, delta* {:.8}",
        a.beta_star, a.delta_post_star, a.delta_star
    )?;
    writeln!(
        out,
        "society: delta_lower {:.8}, delta' {:.8}, delta_bar {:.8}",
        a.delta_lower, a.delta_prime, a.delta_bar
    )?;
    let verdict = if a.ban_backfires { "ban backfires" } else { "ban benefits society" };
    writeln!(out, "verdict: {verdict}")
}

pub fn aa(
    path: &Path,
    json: bool,
    dest: Option<&Path>,
    delta_min: f64,
    delta_max: f64,
    steps: usize,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let sc = Scenario::load(path)?;
    let s = sc
        .aa
        .ok_or_else(|| CliError::Precondition("aa: scenario has no `aa` section".into()))?;
    let analysis = aa::analyze(&s).map_err(|e| CliError::Input(format!("aa: {e}")))?;
    if json {
        serde_json::to_writer_pretty(&mut *out, &analysis).map_err(|e| CliError::Input(e.to_string()))?;
        writeln!(out).map_err(io_err)?;
    } else {
        write_aa(out, &analysis).map_err(io_err)?;
    }
    if let Some(p) = dest {
        if !(delta_min > 0.0 && delta_min < delta_max && delta_max.is_finite()) {
            return Err(CliError::Precondition(format!(
                "degenerate delta range [{delta_min}, {delta_max}] (need 0 < min < max)"
            )));
        }
        let grid = tau_grid(delta_min, delta_max, steps)?;
        let mut buf = Vec::new();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record([
                "delta",
                "blind_net_benefit",
                "college_choice_banned",
                "society_loss_allowed_mandatory",
                "society_loss_banned_choice",
                "ban_backfires",
            ])
            .map_err(|e| CliError::Input(e.to_string()))?;
            for d in grid {
                let sd = s.with_delta(d.to_f64());
                let soc = aa::society_analysis(&sd);
                w.write_record([
                    d.to_string(),
                    aa::blind_net_benefit(&sd).to_string(),
                    regime_label(soc.college_choice_banned).to_string(),
                    soc.losses.get(AaRegime::Allowed, TestRegime::Mandatory).to_string(),
                    soc.losses.get(AaRegime::Banned, soc.college_choice_banned).to_string(),
                    soc.ban_backfires.to_string(),
                ])
                .map_err(|e| CliError::Input(e.to_string()))?;
            }
            w.flush().map_err(io_err)?;
        }
        flush_csv(buf, Some(p), out)?;
    }
    Ok(())
}
