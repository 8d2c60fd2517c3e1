//! Brute-force reference implementations.
//!
//! Nothing here calls the closed-form solvers or `evaluate_policy`: payoffs
//! are integrated pointwise from the utilities and the score law, and the
//! two-group losses are obtained from cutoffs found by bisection.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::aa::{AAScenario, AaRegime, LossSplit, RegimeTable, TestRegime};
use crate::dist::{Law, ScoreDistribution};
use crate::error::{ModelError, Result};
use crate::ext::ExtReal;
use crate::model::{ObservableCell, Policy, RegimeOutcome};
use crate::quad::{bisect_boundary, simpson_split};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleConfig {
    pub tau_grid_step: f64,
    pub quadrature_tol: f64,
    pub mc_samples: u64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            tau_grid_step: 0.01,
            quadrature_tol: 1e-10,
            mc_samples: 2_000_000,
            seed: 0,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_grid_step > 0.0 && self.tau_grid_step.is_finite()) {
            return Err(ModelError::invalid("tau_grid_step", "must be positive and finite"));
        }
        if !(self.quadrature_tol > 0.0) {
            return Err(ModelError::invalid("quadrature_tol", "must be positive"));
        }
        if self.mc_samples == 0 {
            return Err(ModelError::invalid("mc_samples", "must be positive"));
        }
        Ok(())
    }
}

/// Payoff decomposition from direct integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectEval {
    pub underlying: f64,
    pub disagreement: f64,
    pub payoff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlexibleOracle {
    pub best_tau: ExtReal,
    pub best_accept_nonsubmitters: bool,
    pub best_payoff: f64,
    /// Largest payoff change between adjacent grid points.
    pub step_variation: f64,
    pub grid_points: usize,
}

struct Prims {
    vc: f64,
    wc: f64,
    vs: f64,
    ws: f64,
    delta: f64,
}

impl Prims {
    fn of(cell: &ObservableCell) -> Self {
        Prims {
            vc: cell.college().v(),
            wc: cell.college().w(),
            vs: cell.society().v(),
            ws: cell.society().w(),
            delta: cell.delta(),
        }
    }
    fn uc(&self, t: f64) -> f64 {
        self.vc + self.wc * t
    }
    fn us(&self, t: f64) -> f64 {
        self.vs + self.ws * t
    }
    fn accept_separated(&self, t: f64) -> bool {
        self.uc(t) + self.delta * self.us(t) > 0.0
    }
    fn disagree(&self, ts: f64, accept: bool) -> f64 {
        let u = self.us(ts);
        if accept {
            (-u).max(0.0)
        } else {
            u.max(0.0)
        }
    }
    fn cbar(&self) -> f64 {
        -self.vc / self.wc
    }
    fn sbar(&self) -> f64 {
        -self.vs / self.ws
    }
    fn estar(&self) -> f64 {
        -(self.vc + self.delta * self.vs) / (self.wc + self.delta * self.ws)
    }
}

fn pointwise_density(d: &ScoreDistribution, t: f64) -> f64 {
    match d.law() {
        Law::Uniform { lo, hi } => {
            if t >= *lo && t <= *hi {
                1.0 / (hi - lo)
            } else {
                0.0
            }
        }
        Law::Piecewise(knots) => {
            if t < knots[0].score || t > knots[knots.len() - 1].score {
                return 0.0;
            }
            let i = knots.partition_point(|k| k.score <= t).clamp(1, knots.len() - 1);
            let (a, b) = (knots[i - 1], knots[i]);
            a.density + (b.density - a.density) * (t - a.score) / (b.score - a.score)
        }
        Law::Discrete(_) => 0.0,
    }
}

fn raw_support(d: &ScoreDistribution) -> (f64, f64) {
    match d.law() {
        Law::Uniform { lo, hi } => (*lo, *hi),
        Law::Discrete(a) => (a[0].score, a[a.len() - 1].score),
        Law::Piecewise(k) => (k[0].score, k[k.len() - 1].score),
    }
}

/// Direct payoff of the policy "pool scores `<= tau`, decide `accept_pool`
/// for them, and admit each submitter iff its ex-post utility is positive".
///
/// This is a superset of the monotone policies the solvers search over.
pub fn direct_payoff(cell: &ObservableCell, tau: ExtReal, accept_pool: bool, cfg: &OracleConfig) -> DirectEval {
    let pr = Prims::of(cell);
    let d = cell.dist();
    let (lo, hi) = raw_support(d);
    let (underlying, disagreement) = match d.law() {
        Law::Discrete(atoms) => {
            let mut under = 0.0;
            let mut sep_dis = 0.0;
            let (mut m0, mut m1, mut pool_under) = (0.0, 0.0, 0.0);
            for a in atoms {
                if ExtReal::Finite(a.score) <= tau {
                    m0 += a.prob;
                    m1 += a.prob * a.score;
                    pool_under += a.prob * pr.uc(a.score);
                } else {
                    let acc = pr.accept_separated(a.score);
                    if acc {
                        under += a.prob * pr.uc(a.score);
                    }
                    sep_dis += a.prob * pr.disagree(a.score, acc);
                }
            }
            let mut dis = sep_dis;
            if m0 > 0.0 {
                if accept_pool {
                    under += pool_under;
                }
                dis += m0 * pr.disagree(m1 / m0, accept_pool);
            }
            (under, dis)
        }
        _ => {
            let cut = match tau {
                ExtReal::NegInf => lo,
                ExtReal::PosInf => hi,
                ExtReal::Finite(t) => t.clamp(lo, hi),
            };
            let mut breaks = d.breakpoints();
            breaks.extend([pr.cbar(), pr.sbar(), pr.estar(), cut]);
            let tol = cfg.quadrature_tol;
            let dens = |t: f64| pointwise_density(d, t);
            let m0 = simpson_split(dens, lo, cut, &breaks, tol);
            let m1 = simpson_split(|t| t * dens(t), lo, cut, &breaks, tol);
            let mut under = 0.0;
            let mut dis = 0.0;
            if m0 > 0.0 {
                if accept_pool {
                    under += simpson_split(|t| pr.uc(t) * dens(t), lo, cut, &breaks, tol);
                }
                dis += m0 * pr.disagree(m1 / m0, accept_pool);
            }
            under += simpson_split(
                |t| if pr.accept_separated(t) { pr.uc(t) * dens(t) } else { 0.0 },
                cut,
                hi,
                &breaks,
                tol,
            );
            dis += simpson_split(
                |t| pr.disagree(t, pr.accept_separated(t)) * dens(t),
                cut,
                hi,
                &breaks,
                tol,
            );
            (under, dis)
        }
    };
    DirectEval {
        underlying,
        disagreement,
        payoff: underlying - pr.delta * disagreement,
    }
}

/// Pool mean `E[t | t <= tau]` by direct summation or quadrature.
fn direct_pool_mean(cell: &ObservableCell, tau: f64, cfg: &OracleConfig) -> Option<f64> {
    let d = cell.dist();
    match d.law() {
        Law::Discrete(atoms) => {
            let (m0, m1) = atoms
                .iter()
                .filter(|a| a.score <= tau)
                .fold((0.0, 0.0), |(m0, m1), a| (m0 + a.prob, m1 + a.prob * a.score));
            (m0 > 0.0).then(|| m1 / m0)
        }
        _ => {
            let (lo, hi) = raw_support(d);
            let cut = tau.clamp(lo, hi);
            let breaks = d.breakpoints();
            let dens = |t: f64| pointwise_density(d, t);
            let m0 = simpson_split(dens, lo, cut, &breaks, cfg.quadrature_tol);
            let m1 = simpson_split(|t| t * dens(t), lo, cut, &breaks, cfg.quadrature_tol);
            (m0 > 1e-14).then(|| m1 / m0)
        }
    }
}

/// Where the pool mean first reaches `target`, found by bisection.
fn direct_crossing(cell: &ObservableCell, target: f64, cfg: &OracleConfig) -> Option<f64> {
    let (lo, hi) = raw_support(cell.dist());
    let below = |t: f64| direct_pool_mean(cell, t, cfg).is_none_or(|m| m <= target);
    if !below(lo) || below(hi) {
        return None;
    }
    Some(bisect_boundary(below, lo, hi, 1e-12 * (1.0 + hi.abs().max(lo.abs()))))
}

/// Imputation candidates: a uniform grid over the support and every landmark.
pub fn flexible_grid(cell: &ObservableCell, cfg: &OracleConfig) -> Vec<ExtReal> {
    let pr = Prims::of(cell);
    let (lo, hi) = raw_support(cell.dist());
    let step = cfg.tau_grid_step;
    let n = ((hi - lo) / step).ceil() as usize;
    let mut pts: Vec<f64> = (0..=n + 1).map(|i| lo - step + i as f64 * step).collect();
    pts.extend([pr.cbar(), pr.sbar(), pr.estar()]);
    pts.extend(direct_crossing(cell, pr.sbar(), cfg));
    pts.extend(direct_crossing(cell, pr.estar(), cfg));
    if let Some(atoms) = cell.dist().atoms() {
        for w in atoms.windows(2) {
            pts.push(0.5 * (w[0].score + w[1].score));
        }
        pts.extend(atoms.iter().map(|a| a.score));
    }
    pts.retain(|x| x.is_finite());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut out = vec![ExtReal::NegInf];
    out.extend(pts.into_iter().map(ExtReal::Finite));
    out.push(ExtReal::PosInf);
    out
}

/// Grid search over imputations and both pool decisions.
pub fn brute_force_flexible(cell: &ObservableCell, cfg: &OracleConfig) -> FlexibleOracle {
    let grid = flexible_grid(cell, cfg);
    let evals: Vec<(ExtReal, bool, f64)> = grid
        .par_iter()
        .flat_map_iter(|&tau| {
            [false, true]
                .into_iter()
                .map(move |acc| (tau, acc, direct_payoff(cell, tau, acc, cfg).payoff))
        })
        .collect();
    let mut step_variation: f64 = 0.0;
    for acc in [false, true] {
        let series: Vec<f64> = evals.iter().filter(|e| e.1 == acc).map(|e| e.2).collect();
        for w in series.windows(2) {
            step_variation = step_variation.max((w[1] - w[0]).abs());
        }
    }
    // ties go to the larger imputation: a bigger pool never adds disagreement
    let top = evals.iter().map(|e| e.2).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * (1.0 + top.abs());
    let best = *evals
        .iter()
        .rev()
        .find(|e| e.2 >= top - tol)
        .expect("grid is non-empty");
    FlexibleOracle {
        best_tau: best.0,
        best_accept_nonsubmitters: best.1,
        best_payoff: best.2,
        step_variation,
        grid_points: grid.len(),
    }
}

/// Four-regime losses computed from first principles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AaOracle {
    pub college: RegimeTable<LossSplit>,
    pub society: RegimeTable<f64>,
}

/// `(green, t, probability)` for each of the four type/score mass points.
fn mass_points(s: &AAScenario) -> [(bool, f64, f64); 4] {
    [
        (true, 1.0, s.q * s.p_g),
        (true, 0.0, s.q * (1.0 - s.p_g)),
        (false, 1.0, (1.0 - s.q) * s.p_r),
        (false, 0.0, (1.0 - s.q) * (1.0 - s.p_r)),
    ]
}

/// Which mass points share an information set under the regime.
fn same_info(aa: AaRegime, regime: TestRegime, a: (bool, f64), b: (bool, f64)) -> bool {
    let group = aa == AaRegime::Banned || a.0 == b.0;
    let score = regime == TestRegime::Blind || a.1 == b.1;
    group && score
}

struct Info {
    pr: f64,
    mean_t: f64,
    pr_green: f64,
}

fn info_of(s: &AAScenario, aa: AaRegime, regime: TestRegime, point: (bool, f64)) -> Info {
    let (mut m, mut mt, mut mg) = (0.0, 0.0, 0.0);
    for (g, t, p) in mass_points(s) {
        if same_info(aa, regime, (g, t), point) {
            m += p;
            mt += p * t;
            if g {
                mg += p;
            }
        }
    }
    Info {
        pr: m,
        mean_t: mt / m,
        pr_green: mg / m,
    }
}

/// Zero of an increasing function of `x1`, by bisection over the support.
fn x1_root(s: &AAScenario, g: impl Fn(f64) -> f64) -> f64 {
    let (lo, hi) = (s.x1_lo - 1.0, s.x1_hi + 1.0);
    bisect_boundary(|x| g(x) <= 0.0, lo, hi, 1e-15 * (1.0 + lo.abs().max(hi.abs())))
}

fn integrate_x1(s: &AAScenario, a: f64, b: f64, breaks: &[f64], g: impl Fn(f64) -> f64) -> f64 {
    let (lo, hi) = (a.max(s.x1_lo), b.min(s.x1_hi));
    let f = s.f();
    if hi <= lo {
        return 0.0;
    }
    simpson_split(|x| g(x) * f, lo, hi, breaks, 1e-13)
}

/// Signed integral over `x1` between two cutoffs, oriented so that it is the
/// payoff of admitting from `from` instead of from `to`.
fn between(s: &AAScenario, from: f64, to: f64, g: impl Fn(f64) -> f64) -> f64 {
    if from <= to {
        integrate_x1(s, from, to, &[], g)
    } else {
        -integrate_x1(s, to, from, &[], g)
    }
}

fn oracle_losses(s: &AAScenario, aa: AaRegime, regime: TestRegime) -> (LossSplit, f64) {
    let d = s.delta;
    let bench_regime = TestRegime::Mandatory;
    let mut alloc = 0.0;
    let mut social = 0.0;
    let mut society = 0.0;
    let mut seen: Vec<(bool, f64)> = Vec::new();
    for (g, t, p) in mass_points(s) {
        let bonus = if g { s.beta } else { 0.0 };
        let uc = move |x: f64| x + t + bonus - s.c;
        let us = move |x: f64| x + t;

        let info = info_of(s, aa, regime, (g, t));
        let e_uc = |x: f64| x + info.mean_t + s.beta * info.pr_green - s.c;
        let e_us = |x: f64| x + info.mean_t;
        let chosen = x1_root(s, |x| (e_uc(x) + d * e_us(x)) / (1.0 + d));

        // college benchmark: same group visibility, scores observed
        let binfo = info_of(s, aa, bench_regime, (g, t));
        let ideal = x1_root(s, |x| x + binfo.mean_t + s.beta * binfo.pr_green - s.c);
        alloc += p * between(s, ideal, chosen, uc);

        let soc_ideal = x1_root(s, us);
        society += p * between(s, soc_ideal, chosen, us);

        // disagreement over the information set, counted once per set
        let key = (
            if aa == AaRegime::Allowed { g } else { true },
            if regime == TestRegime::Mandatory { t } else { -1.0 },
        );
        if !seen.contains(&key) {
            seen.push(key);
            let zero = x1_root(s, e_us);
            let pressure = integrate_x1(s, s.x1_lo, s.x1_hi, &[chosen, zero], |x| {
                let v = e_us(x);
                if x > chosen {
                    (-v).max(0.0)
                } else {
                    v.max(0.0)
                }
            });
            social += d * info.pr * pressure;
        }
    }
    (
        LossSplit {
            allocative: alloc,
            social,
        },
        society,
    )
}

/// Losses for every regime pair, from bisected cutoffs and direct integration.
pub fn brute_force_aa(s: &AAScenario) -> AaOracle {
    let college = RegimeTable::build(|aa, r| oracle_losses(s, aa, r).0);
    let society = RegimeTable::build(|aa, r| oracle_losses(s, aa, r).1);
    AaOracle { college, society }
}

/// Monte Carlo estimate with standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub outcome: RegimeOutcome,
    pub se_underlying: f64,
    pub se_disagreement: f64,
    pub se_payoff: f64,
    pub samples: u64,
}

const MC_CHUNK: u64 = 1 << 16;
/// Pooled means within this many standard errors of zero count as at the kink.
const MC_KINK_Z: f64 = 4.0;

#[derive(Default, Clone, Copy)]
struct Sums {
    n: f64,
    under: [f64; 2],
    sep_dis: [f64; 2],
    // pool u^s and its cross terms, for the linearised pool disagreement
    pool_us: [f64; 2],
    sep_pool: f64,
    under_pool: f64,
    under_sep: f64,
    admit: f64,
    pool_n: f64,
    society: f64,
}

impl Sums {
    fn add(&mut self, o: &Sums) {
        self.n += o.n;
        for i in 0..2 {
            self.under[i] += o.under[i];
            self.sep_dis[i] += o.sep_dis[i];
            self.pool_us[i] += o.pool_us[i];
        }
        self.sep_pool += o.sep_pool;
        self.under_pool += o.under_pool;
        self.under_sep += o.under_sep;
        self.admit += o.admit;
        self.pool_n += o.pool_n;
        self.society += o.society;
    }
}

/// Simulates the policy on sampled scores; pooled students are judged at the
/// sample mean of the pool.
pub fn mc_crosscheck(cell: &ObservableCell, p: &Policy, cfg: &OracleConfig) -> McEstimate {
    let pr = Prims::of(cell);
    let d = cell.dist();
    let n = cfg.mc_samples;
    let chunks = n.div_ceil(MC_CHUNK);
    let partial: Vec<Sums> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k);
            let m = MC_CHUNK.min(n - k * MC_CHUNK);
            let mut s = Sums::default();
            for _ in 0..m {
                let t = d.sample(&mut rng);
                let pooled = ExtReal::Finite(t) <= p.imputation();
                let (u, sd, pu) = if pooled {
                    let u = if p.accept_nonsubmitters() { pr.uc(t) } else { 0.0 };
                    if p.accept_nonsubmitters() {
                        s.admit += 1.0;
                        s.society += pr.us(t);
                    }
                    s.pool_n += 1.0;
                    (u, 0.0, pr.us(t))
                } else {
                    let acc = p.admits(t);
                    if acc {
                        s.admit += 1.0;
                        s.society += pr.us(t);
                    }
                    (if acc { pr.uc(t) } else { 0.0 }, pr.disagree(t, acc), 0.0)
                };
                s.n += 1.0;
                s.under[0] += u;
                s.under[1] += u * u;
                s.sep_dis[0] += sd;
                s.sep_dis[1] += sd * sd;
                s.pool_us[0] += pu;
                s.pool_us[1] += pu * pu;
                s.sep_pool += sd * pu;
                s.under_pool += u * pu;
                s.under_sep += u * sd;
            }
            s
        })
        .collect();
    let mut tot = Sums::default();
    for s in &partial {
        tot.add(s);
    }
    let nf = tot.n;
    let mean = |x: f64| x / nf;
    let under = mean(tot.under[0]);
    let sep = mean(tot.sep_dis[0]);
    let pool = mean(tot.pool_us[0]);
    // pool disagreement is max(+-mean pooled u^s, 0); sign s picks the branch
    let sign = if p.accept_nonsubmitters() { -1.0 } else { 1.0 };
    let pool_dis = (sign * pool).max(0.0);
    let active = if pool_dis > 0.0 { sign } else { 0.0 };
    let disagreement = sep + pool_dis;
    let cov = |sxy: f64, mx: f64, my: f64| sxy / nf - mx * my;
    let var_u = cov(tot.under[1], under, under);
    let var_sep = cov(tot.sep_dis[1], sep, sep);
    let var_pool = cov(tot.pool_us[1], pool, pool);
    let c_sp = cov(tot.sep_pool, sep, pool);
    let c_up = cov(tot.under_pool, under, pool);
    let c_us = cov(tot.under_sep, under, sep);
    let delta = pr.delta;
    let var_at = |a: f64| {
        let var_dis = var_sep + a * a * var_pool + 2.0 * a * c_sp;
        (var_dis, var_u + delta * delta * var_dis - 2.0 * delta * (c_us + a * c_up))
    };
    // near the kink the estimated branch may be the wrong one; max(., 0) is
    // 1-Lipschitz, so the larger of the two branch variances is a safe bound
    let near_kink = pool.abs() <= MC_KINK_Z * (var_pool.max(0.0) / nf).sqrt();
    let (var_dis, var_pay) = if near_kink {
        let (d0, p0) = var_at(0.0);
        let (d1, p1) = var_at(sign);
        (d0.max(d1), p0.max(p1))
    } else {
        var_at(active)
    };
    let se = |v: f64| (v.max(0.0) / nf).sqrt();
    let outcome = RegimeOutcome::assemble(
        delta,
        under,
        disagreement,
        mean(tot.society),
        mean(tot.admit),
        Vec::new(),
    );
    McEstimate {
        outcome,
        se_underlying: se(var_u),
        se_disagreement: se(var_dis),
        se_payoff: se(var_pay),
        samples: n,
    }
}
