//! Two-group admissions example: when a ban on group-conscious admissions
//! pushes the college to go test blind.
//!
//! Utilities are `u^s = x1 + t` and `u^c = x1 + t + beta*1{green} - c` with a
//! binary test score and `x1 ~ U[x1_lo, x1_hi]`. All losses are measured with
//! the quadratic device: a cutoff `r` away from the ideal costs `f/2 * r^2`.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::ext::ExtReal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AaRegime {
    Allowed,
    Banned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TestRegime {
    Mandatory,
    Blind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AAScenario {
    /// Share of green students.
    pub q: f64,
    /// Pr[t = 1] for red students.
    pub p_r: f64,
    /// Pr[t = 1] for green students.
    pub p_g: f64,
    pub beta: f64,
    pub c: f64,
    pub delta: f64,
    pub x1_lo: f64,
    pub x1_hi: f64,
}

fn violation(inequality: &'static str, detail: String) -> ModelError {
    ModelError::Scenario { inequality, detail }
}

impl AAScenario {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.q, self.p_r, self.p_g, self.beta, self.c, self.delta, self.x1_lo, self.x1_hi,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(violation("finite parameters", format!("{self:?}")));
        }
        for (name, v) in [("q", self.q), ("p_r", self.p_r), ("p_g", self.p_g)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(violation("0 < q, p_r, p_g < 1", format!("{name} = {v}")));
            }
        }
        if !(self.beta > self.c && self.c > 0.0) {
            return Err(violation(
                "beta > c > 0",
                format!("beta = {}, c = {}", self.beta, self.c),
            ));
        }
        if !(self.delta > 0.0) {
            return Err(violation("delta > 0", format!("delta = {}", self.delta)));
        }
        if !(self.x1_lo < self.c - self.beta - 1.0) {
            return Err(violation(
                "x1_lo < c - beta - 1",
                format!("x1_lo = {}, c - beta - 1 = {}", self.x1_lo, self.c - self.beta - 1.0),
            ));
        }
        if !(self.x1_hi > self.c) {
            return Err(violation(
                "x1_hi > c",
                format!("x1_hi = {}, c = {}", self.x1_hi, self.c),
            ));
        }
        let bd = self.beta * posterior_green(self).2;
        if !(bd < 1.0) {
            return Err(violation("beta * Delta < 1", format!("beta * Delta = {bd}")));
        }
        Ok(())
    }

    /// Constant density of `x1`.
    pub fn f(&self) -> f64 {
        1.0 / (self.x1_hi - self.x1_lo)
    }

    /// Population share with `t = 1`.
    pub fn et(&self) -> f64 {
        self.q * self.p_g + (1.0 - self.q) * self.p_r
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        AAScenario { delta, ..*self }
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        AAScenario { beta, ..*self }
    }

    /// `(weight, p, h)` per group: green first, then red.
    fn groups(&self) -> [(f64, f64, f64); 2] {
        [
            (self.q, self.p_g, self.beta - self.c),
            (1.0 - self.q, self.p_r, -self.c),
        ]
    }
}

/// `(Pr[green | t=0], Pr[green | t=1], their difference)`.
pub fn posterior_green(s: &AAScenario) -> (f64, f64, f64) {
    let q = s.q;
    let p0 = q / (q + (1.0 - q) * (1.0 - s.p_r) / (1.0 - s.p_g));
    let p1 = q / (q + (1.0 - q) * s.p_r / s.p_g);
    (p0, p1, p0 - p1)
}

/// Allocative and social-pressure parts of a loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossSplit {
    pub allocative: f64,
    pub social: f64,
}

impl LossSplit {
    pub fn total(&self) -> f64 {
        self.allocative + self.social
    }
}

/// One value per (group-conscious regime, testing regime) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeTable<T> {
    pub allowed_mandatory: T,
    pub allowed_blind: T,
    pub banned_mandatory: T,
    pub banned_blind: T,
}

impl<T: Copy> RegimeTable<T> {
    pub fn build(mut g: impl FnMut(AaRegime, TestRegime) -> T) -> Self {
        RegimeTable {
            allowed_mandatory: g(AaRegime::Allowed, TestRegime::Mandatory),
            allowed_blind: g(AaRegime::Allowed, TestRegime::Blind),
            banned_mandatory: g(AaRegime::Banned, TestRegime::Mandatory),
            banned_blind: g(AaRegime::Banned, TestRegime::Blind),
        }
    }

    pub fn get(&self, aa: AaRegime, regime: TestRegime) -> T {
        match (aa, regime) {
            (AaRegime::Allowed, TestRegime::Mandatory) => self.allowed_mandatory,
            (AaRegime::Allowed, TestRegime::Blind) => self.allowed_blind,
            (AaRegime::Banned, TestRegime::Mandatory) => self.banned_mandatory,
            (AaRegime::Banned, TestRegime::Blind) => self.banned_blind,
        }
    }
}

/// College loss relative to its first best given what it may condition on.
///
/// With groups allowed the benchmark sees `(x0, t)`; with groups banned it
/// sees `t` only, so the two rows are not comparable with each other.
pub fn college_losses(s: &AAScenario, aa: AaRegime, regime: TestRegime) -> LossSplit {
    let half_f = 0.5 * s.f();
    let d = s.delta;
    let k = 1.0 + d;
    match aa {
        AaRegime::Allowed => {
            let mut alloc = 0.0;
            let mut social = 0.0;
            for (w, p, h) in s.groups() {
                alloc += w * h * h * d * d / (k * k);
                social += w * d * h * h / (k * k);
                if regime == TestRegime::Blind {
                    alloc += w * p * (1.0 - p);
                }
            }
            LossSplit {
                allocative: half_f * alloc,
                social: half_f * social,
            }
        }
        AaRegime::Banned => {
            let (p0, p1, _) = posterior_green(s);
            let et = s.et();
            let (b, c, q) = (s.beta, s.c, s.q);
            match regime {
                TestRegime::Mandatory => {
                    let g0 = b * p0 - c;
                    let g1 = b * p1 - c;
                    let alloc = (1.0 - et) * (d / k * g0).powi(2) + et * (d / k * g1).powi(2);
                    let social = d * ((1.0 - et) * (g0 / k).powi(2) + et * (g1 / k).powi(2));
                    LossSplit {
                        allocative: half_f * alloc,
                        social: half_f * social,
                    }
                }
                TestRegime::Blind => {
                    let shift = q * b / k + c * d / k;
                    let r0 = -et + b * p0 - shift;
                    let r1 = 1.0 - et + b * p1 - shift;
                    let alloc = (1.0 - et) * r0 * r0 + et * r1 * r1;
                    let social = d * (b * q - c).powi(2) / (k * k);
                    LossSplit {
                        allocative: half_f * alloc,
                        social: half_f * social,
                    }
                }
            }
        }
    }
}

/// Banned-regime advantage of test blind over test mandatory for the college.
pub fn blind_net_benefit(s: &AAScenario) -> f64 {
    let bd = s.beta * posterior_green(s).2;
    let et = s.et();
    let k = 1.0 + s.delta;
    0.5 * s.f() * et * (1.0 - et) / k * (k * (2.0 * bd - 1.0) - bd * bd)
}

/// Testing regime the college picks when groups are banned; ties go to blind.
pub fn college_choice_banned(s: &AAScenario) -> TestRegime {
    if blind_net_benefit(s) >= 0.0 {
        TestRegime::Blind
    } else {
        TestRegime::Mandatory
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub beta_star: f64,
    pub delta_post_star: f64,
    /// `None` when the college keeps tests at every pressure level.
    pub delta_star: Option<f64>,
}

fn quadratic_root(delta: f64) -> f64 {
    1.0 + delta - (delta * (1.0 + delta)).sqrt()
}

/// Pressure level above which a banned college goes blind, `+inf` if never.
pub fn delta_star(s: &AAScenario) -> ExtReal {
    let bd = s.beta * posterior_green(s).2;
    if bd <= 0.5 {
        ExtReal::PosInf
    } else {
        ExtReal::Finite((1.0 - bd).powi(2) / (2.0 * bd - 1.0))
    }
}

/// Comparative-statics cutoffs in the green bonus, posterior gap and pressure.
pub fn thresholds(s: &AAScenario) -> Result<Thresholds> {
    let (_, _, delta_post) = posterior_green(s);
    if !(delta_post > 0.0) {
        return Err(ModelError::Precondition(format!(
            "thresholds need a low score to signal green (Delta > 0), got Delta = {delta_post}"
        )));
    }
    let root = quadratic_root(s.delta);
    Ok(Thresholds {
        beta_star: root / delta_post,
        delta_post_star: root / s.beta,
        delta_star: delta_star(s).finite(),
    })
}

/// Society's expected loss against its full-information first best.
pub fn society_losses(s: &AAScenario, aa: AaRegime, regime: TestRegime) -> f64 {
    let half_f = 0.5 * s.f();
    let k = 1.0 + s.delta;
    let (b, c, q) = (s.beta, s.c, s.q);
    let et = s.et();
    match (aa, regime) {
        (AaRegime::Allowed, TestRegime::Mandatory) => {
            half_f * (c * c - 2.0 * c * q * b + q * b * b) / (k * k)
        }
        (AaRegime::Allowed, TestRegime::Blind) => {
            half_f
                * s.groups()
                    .iter()
                    .map(|&(w, p, h)| w * (h * h / (k * k) + p * (1.0 - p)))
                    .sum::<f64>()
        }
        (AaRegime::Banned, TestRegime::Mandatory) => {
            let (p0, p1, _) = posterior_green(s);
            half_f * ((1.0 - et) * (b * p0 - c).powi(2) + et * (b * p1 - c).powi(2)) / (k * k)
        }
        (AaRegime::Banned, TestRegime::Blind) => {
            half_f * ((b * q - c).powi(2) + et * (1.0 - et) * k * k) / (k * k)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SocietyAnalysis {
    pub losses: RegimeTable<f64>,
    /// Pressure above which a banned college goes blind.
    pub delta_lower: ExtReal,
    /// Pressure above which society prefers (allowed, mandatory) to (banned, blind).
    pub delta_prime: f64,
    pub delta_bar: ExtReal,
    pub college_choice_banned: TestRegime,
    /// Banning hurts society once the college best-responds.
    pub ban_backfires: bool,
}

pub fn society_analysis(s: &AAScenario) -> SocietyAnalysis {
    let losses = RegimeTable::build(|aa, r| society_losses(s, aa, r));
    let et = s.et();
    let bd = s.beta * posterior_green(s).2;
    let delta_lower = if bd > 0.5 {
        ExtReal::Finite(bd * bd / (2.0 * bd - 1.0) - 1.0)
    } else {
        ExtReal::PosInf
    };
    let delta_prime = s.beta * (s.q * (1.0 - s.q) / (et * (1.0 - et))).sqrt() - 1.0;
    let choice = college_choice_banned(s);
    SocietyAnalysis {
        losses,
        delta_lower,
        delta_prime,
        delta_bar: delta_lower.max(ExtReal::Finite(delta_prime)),
        college_choice_banned: choice,
        ban_backfires: losses.get(AaRegime::Banned, choice)
            > losses.get(AaRegime::Allowed, TestRegime::Mandatory),
    }
}

/// Everything about one scenario in a single record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AAAnalysis {
    pub scenario: AAScenario,
    pub f: f64,
    pub et: f64,
    pub p_g0: f64,
    pub p_g1: f64,
    pub delta_post: f64,
    pub loss_college: RegimeTable<LossSplit>,
    pub loss_society: RegimeTable<f64>,
    pub blind_net_benefit: f64,
    pub college_pref_banned: TestRegime,
    pub beta_star: ExtReal,
    pub delta_post_star: ExtReal,
    pub delta_star: ExtReal,
    pub delta_lower: ExtReal,
    pub delta_prime: f64,
    pub delta_bar: ExtReal,
    pub ban_backfires: bool,
}

/// Validates the scenario and computes the full analysis.
///
/// When a low score does not signal green, the banned college never goes
/// blind and the thresholds are reported as `+inf`.
pub fn analyze(s: &AAScenario) -> Result<AAAnalysis> {
    s.validate()?;
    let (p_g0, p_g1, delta_post) = posterior_green(s);
    let soc = society_analysis(s);
    let (beta_star, delta_post_star) = match thresholds(s) {
        Ok(t) => (ExtReal::Finite(t.beta_star), ExtReal::Finite(t.delta_post_star)),
        Err(_) => (ExtReal::PosInf, ExtReal::PosInf),
    };
    Ok(AAAnalysis {
        scenario: *s,
        f: s.f(),
        et: s.et(),
        p_g0,
        p_g1,
        delta_post,
        loss_college: RegimeTable::build(|aa, r| college_losses(s, aa, r)),
        loss_society: soc.losses,
        blind_net_benefit: blind_net_benefit(s),
        college_pref_banned: soc.college_choice_banned,
        beta_star,
        delta_post_star,
        delta_star: delta_star(s),
        delta_lower: soc.delta_lower,
        delta_prime: soc.delta_prime,
        delta_bar: soc.delta_bar,
        ban_backfires: soc.ban_backfires,
    })
}
