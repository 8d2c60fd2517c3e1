//! Acceptance gate: one pass/fail line per criterion; exits nonzero on any failure not listed as known.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use testopt_core::aa::{self, AAScenario, AaRegime, TestRegime};
use testopt_core::oracle::{self, OracleConfig};
use testopt_core::solvers::{pooled_disagreement, separated_disagreement};
use testopt_core::welfare::{self, FateClass, ObservablePath, Region};
use testopt_core::{
    bars, evaluate_policy, nonsubmitter_threshold, payoff_curve, solve_flexible, solve_mandatory, Atom,
    CaseTag, ExtReal, Law, ObservableCell, PartyUtility, Policy, ScoreDistribution, Selectivity,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn uniform_cell(label: &str, bar_c: f64, bar_s: f64, delta: f64) -> ObservableCell {
    ObservableCell::new(
        label,
        PartyUtility::with_bar(bar_c),
        PartyUtility::with_bar(bar_s),
        delta,
        ScoreDistribution::uniform(0.0, 100.0).unwrap(),
    )
    .unwrap()
}

/// Uniform or discrete law with random bars, weights and pressure.
fn random_cell(rng: &mut ChaCha8Rng, i: usize, widths: (f64, f64)) -> ObservableCell {
    let lo = rng.gen_range(-50.0..50.0);
    let width = rng.gen_range(widths.0..widths.1);
    let hi = lo + width;
    let dist = if rng.gen_bool(0.5) {
        ScoreDistribution::uniform(lo, hi).unwrap()
    } else {
        let k = rng.gen_range(2..=8);
        let mut scores: Vec<f64> = (0..k).map(|_| rng.gen_range(lo..hi)).collect();
        scores.sort_by(f64::total_cmp);
        scores.dedup();
        let w: Vec<f64> = scores.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
        let tot: f64 = w.iter().sum();
        ScoreDistribution::discrete(
            scores
                .iter()
                .zip(&w)
                .map(|(&score, &p)| Atom { score, prob: p / tot })
                .collect(),
        )
        .unwrap()
    };
    let span = (lo - 0.2 * width)..(hi + 0.2 * width);
    let (bc, bs) = (rng.gen_range(span.clone()), rng.gen_range(span));
    let (wc, ws) = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
    ObservableCell::new(
        format!("r{i}"),
        PartyUtility::new(-bc * wc, wc).unwrap(),
        PartyUtility::new(-bs * ws, ws).unwrap(),
        rng.gen_range(0.1..10.0),
        dist,
    )
    .unwrap()
}

fn random_aa(rng: &mut ChaCha8Rng, need_positive_gap: bool) -> AAScenario {
    loop {
        let s = AAScenario {
            q: rng.gen_range(0.05..0.95),
            p_r: rng.gen_range(0.05..0.95),
            p_g: rng.gen_range(0.05..0.95),
            beta: 0.0,
            c: rng.gen_range(0.05..1.0),
            delta: rng.gen_range(0.1..10.0),
            x1_lo: 0.0,
            x1_hi: 0.0,
        };
        let s = AAScenario {
            beta: s.c + rng.gen_range(0.01..2.0),
            ..s
        };
        let s = AAScenario {
            x1_lo: s.c - s.beta - 1.0 - rng.gen_range(0.1..2.0),
            x1_hi: s.c + rng.gen_range(0.1..2.0),
            ..s
        };
        let (_, _, gap) = aa::posterior_green(&s);
        if s.validate().is_ok() && (!need_positive_gap || gap > 0.05) {
            return s;
        }
    }
}

fn close_abs(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn close_rel(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs() + 1e-15
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let cell = uniform_cell("illustrative", -1000.0, 40.0, 1.0);
    let dis = |p: Policy| evaluate_policy(&cell, &p).expected_disagreement;
    let got = [
        ("mandatory accept all", dis(Policy::accept_all(ExtReal::NegInf)), 8.0),
        ("mandatory reject all", dis(Policy::new(ExtReal::NegInf, false, ExtReal::PosInf).unwrap()), 18.0),
        ("blind accept", dis(Policy::accept_all(ExtReal::PosInf)), 0.0),
        ("blind reject", dis(Policy::reject_pool(ExtReal::PosInf)), 10.0),
        ("threshold at 60", dis(Policy::reject_pool(ExtReal::Finite(60.0))), 0.0),
    ];
    let elapsed = start.elapsed();
    let bad: Vec<String> = got
        .iter()
        .filter(|(_, g, want)| !close_abs(*g, *want, 1e-9))
        .map(|(n, g, want)| format!("{n}: {g} vs {want}"))
        .collect();
    let pass = bad.is_empty() && elapsed < Duration::from_secs(1);
    outcome(
        pass,
        format!(
            "disagreement 8 / 18 / 0 / 10 / 0 reproduced{} in {:.3}s",
            if bad.is_empty() { String::new() } else { format!(" except {}", bad.join("; ")) },
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = OracleConfig::default();
    let (mut dominance_fail, mut oracle_fail, mut beaten) = (0, 0, 0);
    let mut worst_gap: f64 = 0.0;
    for i in 0..200 {
        let cell = random_cell(&mut rng, i, (1.0, 100.0));
        let flex = solve_flexible(&cell);
        let (_, mand) = solve_mandatory(&cell);
        if flex.payoff < mand.college_payoff - 1e-9 * (1.0 + mand.college_payoff.abs()) {
            dominance_fail += 1;
        }
        let brute = oracle::brute_force_flexible(&cell, &cfg);
        let gap = (flex.payoff - brute.best_payoff).abs();
        worst_gap = worst_gap.max(gap);
        if gap > 1e-6 + brute.step_variation {
            oracle_fail += 1;
        }
        if brute.best_payoff > flex.payoff + 1e-6 {
            beaten += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = dominance_fail == 0 && oracle_fail == 0 && elapsed < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "200 cells: {dominance_fail} dominance failures, {oracle_fail} oracle mismatches \
             (worst gap {worst_gap:.2e}, grid beat the solver by >1e-6 in {beaten}), {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

/// `t°` computed here from the law directly: the first score at which the
/// pool mean reaches society's bar, with `±inf` when it never crosses.
fn test_side_t_circ(cell: &ObservableCell) -> ExtReal {
    let target = cell.society().bar();
    match cell.dist().law() {
        Law::Uniform { lo, hi } => {
            if *lo >= target {
                ExtReal::NegInf
            } else if 0.5 * (lo + hi) < target {
                ExtReal::PosInf
            } else {
                ExtReal::Finite(2.0 * target - lo)
            }
        }
        Law::Discrete(atoms) => {
            if atoms[0].score >= target {
                return ExtReal::NegInf;
            }
            let (mut m0, mut m1) = (0.0, 0.0);
            for a in atoms {
                m0 += a.prob;
                m1 += a.prob * a.score;
                if m1 / m0 >= target {
                    return ExtReal::Finite(a.score);
                }
            }
            ExtReal::PosInf
        }
        Law::Piecewise(_) => unreachable!("not sampled"),
    }
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut tag_fail, mut range_fail, mut rule_fail, mut left_used, mut more) = (0, 0, 0, 0, 0);
    for i in 0..1000 {
        let cell = random_cell(&mut rng, i, (1.0, 100.0));
        let b = bars(&cell);
        let s = solve_flexible(&cell);
        let ok_tag = match b.selectivity() {
            Selectivity::Less => matches!(s.case_tag, CaseTag::ReplicateMandatory | CaseTag::AcceptAll),
            Selectivity::Aligned => s.case_tag == CaseTag::AtExpostBar,
            Selectivity::More => matches!(
                s.case_tag,
                CaseTag::AtExpostBar | CaseTag::InteriorTau | CaseTag::FirstBestTau
            ),
        };
        if !ok_tag {
            tag_fail += 1;
        }
        if b.selectivity() != Selectivity::More {
            continue;
        }
        more += 1;
        let tau = s.policy.imputation();
        let (estar, cbar) = (b.expost_bar, b.college_bar);
        let t = tau.to_f64();
        if !(t >= estar - 1e-8 && t <= cbar + 1e-8) {
            range_fail += 1;
        }
        let tc = test_side_t_circ(&cell);
        let rule = if tc <= ExtReal::Finite(estar) {
            estar
        } else if tc < ExtReal::Finite(cbar) {
            tc.to_f64()
        } else {
            cbar
        };
        if close_abs(t, rule, 1e-8) {
            continue;
        }
        // discrete laws: the pool may stop just below the crossing atom
        let left = cell.dist().atoms().and_then(|atoms| {
            let crossing = tc.finite()?;
            let prev = atoms.iter().rev().map(|a| a.score).find(|&x| x < crossing);
            Some(prev.map_or(estar, |p| (0.5 * (p + crossing)).max(estar)))
        });
        match left {
            Some(l) if close_abs(t, l, 1e-8) && tc <= ExtReal::Finite(cbar) => left_used += 1,
            _ => rule_fail += 1,
        }
    }
    outcome(
        tag_fail == 0 && range_fail == 0 && rule_fail == 0,
        format!(
            "1000 cells ({more} more selective): {tag_fail} tag violations, {range_fail} imputations \
             outside [ex-post bar, college bar], {rule_fail} rule mismatches; discrete left-of-atom \
             realization chosen {left_used} times"
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut violations = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let cell = random_cell(&mut rng, i, (1.0, 100.0));
        let (lo, hi) = cell.dist().support();
        let n = ((hi - lo + 10.0) / 0.1).ceil() as usize;
        let taus: Vec<ExtReal> = std::iter::once(ExtReal::NegInf)
            .chain((0..=n).map(|k| ExtReal::Finite(lo - 5.0 + 0.1 * k as f64)))
            .chain(std::iter::once(ExtReal::PosInf))
            .collect();
        let curve = payoff_curve(&cell, &taus);
        let b = bars(&cell);
        let estar = ExtReal::Finite(b.expost_bar);
        let mut check = |ok: bool, excess: f64, what: &str| {
            worst = worst.max(excess);
            if !ok && violations.len() < 5 {
                violations.push(format!("{}: {what}", cell.label()));
            }
        };
        match b.selectivity() {
            Selectivity::Less => {
                let td = nonsubmitter_threshold(&cell);
                for w in curve.windows(2) {
                    let (a, z) = (&w[0], &w[1]);
                    let diff = z.payoff - a.payoff;
                    if z.tau <= estar {
                        check(diff.abs() <= 1e-9, diff.abs() - 1e-9, "not flat below the ex-post bar");
                    } else if a.tau >= estar && z.tau < td {
                        check(diff <= 1e-9, diff - 1e-9, "rises before the threshold");
                    } else if a.tau >= td {
                        check(diff >= -1e-9, -diff - 1e-9, "falls after the threshold");
                    }
                }
            }
            Selectivity::More => {
                let top = solve_flexible(&cell).policy.imputation();
                for w in curve.windows(2) {
                    let (a, z) = (&w[0], &w[1]);
                    if z.tau <= top {
                        let diff = z.payoff - a.payoff;
                        check(diff >= -1e-9, -diff - 1e-9, "falls before the optimum");
                    }
                }
            }
            Selectivity::Aligned => {}
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "100 curves at step 0.1: {} segment violations{}",
            violations.len(),
            if violations.is_empty() { String::new() } else { format!(" ({})", violations.join("; ")) }
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut ineq_fail, mut eq_fail, mut eq_cases) = (0, 0, 0);
    for i in 0..500 {
        let cell = random_cell(&mut rng, i, (1.0, 100.0));
        let (lo, hi) = cell.dist().support();
        let mut a = rng.gen_range(lo - 1.0..hi + 1.0);
        let mut h = rng.gen_range(lo - 1.0..hi + 1.0);
        if a > h {
            std::mem::swap(&mut a, &mut h);
        }
        let (tau, tau_h) = (ExtReal::Finite(a), ExtReal::Finite(h));
        let sbar = cell.society().bar();
        for accept in [false, true] {
            let whole = pooled_disagreement(&cell, ExtReal::NegInf, tau_h, accept);
            let left = pooled_disagreement(&cell, ExtReal::NegInf, tau, accept);
            let right_pool = pooled_disagreement(&cell, tau, tau_h, accept);
            let right_sep = separated_disagreement(&cell, tau, tau_h, accept);
            let tol = 1e-9 * (1.0 + whole.abs() + left.abs() + right_sep.abs());
            if whole > left + right_pool + tol || left + right_pool > left + right_sep + tol {
                ineq_fail += 1;
            }
            // strictly on one side of society's bar the split changes nothing
            if h < sbar {
                eq_cases += 1;
                if !close_abs(whole, left + right_pool, tol) || !close_abs(right_pool, right_sep, tol) {
                    eq_fail += 1;
                }
            }
            if a > sbar {
                eq_cases += 1;
                if !close_abs(right_pool, right_sep, tol) {
                    eq_fail += 1;
                }
            }
        }
    }
    outcome(
        ineq_fail == 0 && eq_fail == 0,
        format!(
            "500 instances x 2 decisions: {ineq_fail} inequality failures, {eq_fail} of {eq_cases} \
             one-sided equalities failed"
        ),
    )
}

fn criterion_6() -> Outcome {
    // ex-post bar sweeps from 80 down to 20 in steps of 0.25; imputation 50
    let grid: Vec<f64> = (0..=240).map(|k| 80.0 - 0.25 * k as f64).collect();
    let cells: Vec<ObservableCell> = grid
        .iter()
        .enumerate()
        .map(|(k, &e)| uniform_cell(&format!("p{k}"), e + 10.0, e - 10.0, 1.0))
        .collect();
    let taus = vec![ExtReal::Finite(50.0); cells.len()];
    let path = match ObservablePath::new(cells, taus) {
        Ok(p) => p,
        Err(e) => return outcome(false, format!("path rejected: {e}")),
    };
    let classes = welfare::classify_path(&path);
    let mut problems = Vec::new();
    let mut last_low = f64::NAN;
    let mut first_high = f64::NAN;
    for (c, &e) in classes.iter().zip(&grid) {
        let want = if e >= 50.0 {
            Region::Low
        } else if e >= 25.0 {
            Region::Medium
        } else {
            Region::High
        };
        if c.region == Region::Low {
            last_low = e;
        }
        if c.region == Region::High && first_high.is_nan() {
            first_high = e;
        }
        if c.region != want {
            problems.push(format!("{e}: {:?} vs {want:?}", c.region));
        }
        let moved: Vec<(ExtReal, ExtReal, FateClass)> = c
            .fates
            .iter()
            .filter(|f| f.classification != FateClass::Unaffected && f.mass > 0.0)
            .map(|f| (f.lo, f.hi, f.classification))
            .collect();
        let want_fates = match want {
            Region::Low => vec![],
            Region::Medium => vec![(ExtReal::Finite(e), ExtReal::Finite(50.0), FateClass::StrictlyHarmed)],
            Region::High => vec![(ExtReal::NegInf, ExtReal::Finite(e), FateClass::StrictlyBenefits)],
        };
        if moved != want_fates {
            problems.push(format!("{e}: fates {moved:?}"));
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "241 cells: Low down to {last_low}, High from {first_high}; {} mismatches{}",
            problems.len(),
            problems.first().map_or(String::new(), |p| format!(" (first: {p})"))
        ),
    )
}

const REGIMES: [(AaRegime, TestRegime); 4] = [
    (AaRegime::Allowed, TestRegime::Mandatory),
    (AaRegime::Allowed, TestRegime::Blind),
    (AaRegime::Banned, TestRegime::Mandatory),
    (AaRegime::Banned, TestRegime::Blind),
];

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut loss_fail, mut sign_fail, mut zero_fail, mut zero_cases) = (0, 0, 0, 0);
    let mut worst_rel: f64 = 0.0;
    for _ in 0..100 {
        let s = random_aa(&mut rng, false);
        let brute = oracle::brute_force_aa(&s);
        for (a, r) in REGIMES {
            let c = aa::college_losses(&s, a, r);
            let o = brute.college.get(a, r);
            let soc = aa::society_losses(&s, a, r);
            let os = brute.society.get(a, r);
            for (x, y) in [(c.allocative, o.allocative), (c.social, o.social), (soc, os)] {
                worst_rel = worst_rel.max((x - y).abs() / y.abs().max(1e-300));
                if !close_rel(x, y, 1e-8) {
                    loss_fail += 1;
                }
            }
        }
        let direct = brute.college.get(AaRegime::Banned, TestRegime::Mandatory).total()
            - brute.college.get(AaRegime::Banned, TestRegime::Blind).total();
        let net = aa::blind_net_benefit(&s);
        if direct.abs() > 1e-12 && (net > 0.0) != (direct > 0.0) {
            sign_fail += 1;
        }
        let (_, _, gap) = aa::posterior_green(&s);
        let bd = s.beta * gap;
        if bd > 0.5 && bd < 1.0 {
            zero_cases += 1;
            let ds = (1.0 - bd).powi(2) / (2.0 * bd - 1.0);
            if !close_abs(aa::blind_net_benefit(&s.with_delta(ds)), 0.0, 1e-8) {
                zero_fail += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        loss_fail == 0 && sign_fail == 0 && zero_fail == 0 && elapsed < Duration::from_secs(60),
        format!(
            "100 scenarios: {loss_fail} loss mismatches (worst relative {worst_rel:.1e}), {sign_fail} \
             sign disagreements, {zero_fail} of {zero_cases} nonzero at the pressure threshold, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut range_fail, mut match_fail) = (0, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let mut s = random_aa(&mut rng, true);
        let (_, _, gap) = aa::posterior_green(&s);
        // keep the model valid across the whole beta grid
        s.c = s.c.min(0.25 / gap);
        s.x1_lo = s.c - 1.0 / gap - 2.0;
        let star = aa::thresholds(&s).unwrap().beta_star;
        let (lo, hi) = (0.5 / gap, 1.0 / gap);
        let formula = (1.0 + s.delta - (s.delta * (1.0 + s.delta)).sqrt()) / gap;
        if !(star > lo && star < hi) || !close_abs(star, formula, 1e-12 * formula) {
            range_fail += 1;
        }
        let steps = ((hi - lo) / 1e-4).floor() as usize;
        let mut changes = Vec::new();
        let mut prev: Option<(f64, bool)> = None;
        for k in 1..steps {
            let b = lo + k as f64 * 1e-4;
            let blind = aa::blind_net_benefit(&s.with_beta(b)) > 0.0;
            if let Some((pb, was)) = prev {
                if was != blind {
                    changes.push(0.5 * (pb + b));
                }
            }
            prev = Some((b, blind));
        }
        match changes.as_slice() {
            [c] if (c - star).abs() <= 1e-4 => worst = worst.max((c - star).abs()),
            _ => match_fail += 1,
        }
    }
    outcome(
        range_fail == 0 && match_fail == 0,
        format!(
            "50 scenarios: {range_fail} outside (1/(2 gap), 1/gap), {match_fail} grid sign changes away \
             from the closed form (worst offset {worst:.1e})"
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut part1_mand, mut part1_blind, mut part2, mut unexplained) = (0, 0, 0, 0);
    for _ in 0..200 {
        let s = random_aa(&mut rng, false);
        let l = |a, r| aa::society_losses(&s, a, r);
        if l(AaRegime::Banned, TestRegime::Mandatory) > l(AaRegime::Allowed, TestRegime::Mandatory) + 1e-15 {
            part1_mand += 1;
        }
        // under blind, allowed minus banned is f/2 q(1-q) (beta^2/(1+delta)^2 - (p_g-p_r)^2)
        let blind_gap = l(AaRegime::Allowed, TestRegime::Blind) - l(AaRegime::Banned, TestRegime::Blind);
        if blind_gap < -1e-15 {
            part1_blind += 1;
        }
        let predicted = (s.beta / (1.0 + s.delta)).powi(2) - (s.p_g - s.p_r).powi(2);
        if (predicted < -1e-12 && blind_gap >= 0.0) || (predicted > 1e-12 && blind_gap < 0.0) {
            unexplained += 1;
        }
        for a in [AaRegime::Allowed, AaRegime::Banned] {
            if l(a, TestRegime::Mandatory) > l(a, TestRegime::Blind) + 1e-15 {
                part2 += 1;
            }
        }
    }
    let worked = AAScenario {
        q: 0.5,
        p_r: 0.8,
        p_g: 0.2,
        beta: 1.5,
        c: 0.5,
        delta: 1.0,
        x1_lo: -3.0,
        x1_hi: 1.0,
    };
    let soc = aa::society_analysis(&worked);
    let lower = soc.delta_lower.to_f64();
    let bar = soc.delta_bar.to_f64();
    let numbers = close_abs(lower, 0.0125, 1e-9) && close_abs(soc.delta_prime, 0.5, 1e-9) && close_abs(bar, 0.5, 1e-9);
    let verdict = |d: f64| aa::society_analysis(&worked.with_delta(d)).ban_backfires;
    let flips = soc.ban_backfires && !verdict(0.1) && !verdict(bar - 1e-9) && verdict(bar + 1e-9);
    outcome(
        part1_mand == 0 && part1_blind == 0 && part2 == 0 && numbers && flips,
        format!(
            "200 scenarios: ban preferred under mandatory violated {part1_mand} times, under blind \
             {part1_blind} times ({unexplained} not explained by beta/(1+delta) < |p_g - p_r|); mandatory \
             preferred violated {part2} times; worked thresholds {lower:.10} / {:.10} / {bar:.10}; \
             verdict flips at {bar}: {flips}",
            soc.delta_prime
        ),
    )
}

fn pack() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn criterion_10() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_testopt");
    let mut files: Vec<PathBuf> = std::fs::read_dir(pack())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut failures = Vec::new();
    for f in &files {
        let o = Command::new(bin).args(["verify", "--scenario"]).arg(f).output().unwrap();
        if !o.status.success() {
            failures.push(format!("verify {}", f.display()));
        }
    }
    let sweeps = [
        ("accept_all.json", "accept_all", "-20", "120"),
        ("interior.json", "interior", "0", "100"),
        ("discrete.json", "coarse", "-10", "110"),
        ("piecewise.json", "tent", "0", "100"),
    ];
    let dir = tempfile::tempdir().unwrap();
    for (file, cell, lo, hi) in sweeps {
        let run = |i: usize| {
            let dest = dir.path().join(format!("{cell}{i}.csv"));
            let o = Command::new(bin)
                .args(["sweep", "--scenario"])
                .arg(pack().join(file))
                .args(["--cell", cell, "--tau-min", lo, "--tau-max", hi, "--steps", "1001", "--out"])
                .arg(&dest)
                .output()
                .unwrap();
            (o.status.success(), std::fs::read(&dest).unwrap_or_default())
        };
        let (a, b) = (run(0), run(1));
        if !(a.0 && b.0 && a.1 == b.1 && !a.1.is_empty()) {
            failures.push(format!("sweep {cell} not byte-identical"));
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "verify on {} pack scenarios, 4 repeated sweeps{}",
            files.len(),
            if failures.is_empty() { String::new() } else { format!(": {}", failures.join("; ")) }
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

/// Criteria that fail on the model's own loss expressions; see README.
const KNOWN_FAILURES: [usize; 1] = [9];
const KNOWN_FAILURE_NOTE: &str = "with tests ignored, allowing groups spreads cutoffs only within a \
    score's group mix, so a ban is preferred iff beta/(1+delta) >= |p_g - p_r|; the claim that society \
    always prefers the ban under blind does not hold (the oracle agrees with the closed forms)";

fn main() {
    let criteria: [Criterion; 10] = [
        ("illustrative disagreement numbers", criterion_1),
        ("flexible dominance and grid optimum", criterion_2),
        ("case tags and the more-selective rule", criterion_3),
        ("payoff-curve monotone segments", criterion_4),
        ("pooling and separation inequalities", criterion_5),
        ("restricted-imputation regions on a path", criterion_6),
        ("two-group losses vs oracle", criterion_7),
        ("comparative statics in beta", criterion_8),
        ("society's preferences and thresholds", criterion_9),
        ("CLI verify and byte-stable sweeps", criterion_10),
    ];
    let mut failed = 0;
    let mut unexpected = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        if !o.pass {
            failed += 1;
            if !KNOWN_FAILURES.contains(&(i + 1)) {
                unexpected += 1;
            }
        }
        println!(
            "criterion {}: {} {name}: {} [{:.2}s]",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    for k in KNOWN_FAILURES {
        println!("criterion {k} is a known failure: {KNOWN_FAILURE_NOTE}");
    }
    if unexpected > 0 {
        std::process::exit(1);
    }
}
