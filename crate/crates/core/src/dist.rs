//! Score distributions and the truncated-expectation machinery built on them.
//!
//! Every interval is half-open, `(lo, hi]`: students with `t <= tau` withhold
//! their score, so an atom sitting exactly on a cutoff belongs to the
//! non-submission pool.

use rand::Rng;
use serde::Serialize;

use crate::error::{ModelError, Result};
use crate::ext::ExtReal;
use crate::quad::{bisect_boundary, simpson_split, QUAD_TOL};

/// Tolerance on the total mass of a discrete law.
pub const DISCRETE_MASS_TOL: f64 = 1e-12;
/// Tolerance on the integral of a piecewise-linear density.
pub const DENSITY_MASS_TOL: f64 = 1e-9;
/// Absolute tolerance for root-finding on the lower expectation.
pub const ROOT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub score: f64,
    pub prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Knot {
    pub score: f64,
    pub density: f64,
}

/// Validated score law. Construct through [`ScoreDistribution::uniform`],
/// [`ScoreDistribution::discrete`] or [`ScoreDistribution::piecewise`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreDistribution {
    law: Law,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    Uniform { lo: f64, hi: f64 },
    Discrete(Vec<Atom>),
    /// Density linearly interpolated between knots, zero outside them.
    Piecewise(Vec<Knot>),
}

/// How a crossing of the lower expectation is resolved on a discrete law,
/// where `L` is a step function and an exact root rarely exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    /// Smallest atom `a` with `L(a) >= target`.
    Reach,
    /// Smallest atom `a` with `L(a) > target`.
    Exceed,
}

/// An affine integrand `a + b * t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub a: f64,
    pub b: f64,
}

impl Affine {
    pub fn new(a: f64, b: f64) -> Self {
        Affine { a, b }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.a + self.b * t
    }
}

impl ScoreDistribution {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(ModelError::invalid("uniform", "bounds must be finite"));
        }
        if !(lo < hi) {
            return Err(ModelError::invalid(
                "uniform",
                format!("need lo < hi, got lo={lo}, hi={hi}"),
            ));
        }
        Ok(ScoreDistribution {
            law: Law::Uniform { lo, hi },
        })
    }

    pub fn discrete(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(ModelError::invalid("discrete", "needs at least one atom"));
        }
        let mut total = 0.0;
        for (i, a) in atoms.iter().enumerate() {
            if !a.score.is_finite() {
                return Err(ModelError::invalid(
                    format!("discrete[{i}].score"),
                    "must be finite",
                ));
            }
            if !(a.prob > 0.0) || !a.prob.is_finite() {
                return Err(ModelError::invalid(
                    format!("discrete[{i}].prob"),
                    format!("must be positive, got {}", a.prob),
                ));
            }
            if i > 0 && !(a.score > atoms[i - 1].score) {
                return Err(ModelError::invalid(
                    format!("discrete[{i}].score"),
                    "scores must be strictly increasing",
                ));
            }
            total += a.prob;
        }
        if (total - 1.0).abs() > DISCRETE_MASS_TOL {
            return Err(ModelError::invalid(
                "discrete",
                format!("probabilities sum to {total}, expected 1"),
            ));
        }
        Ok(ScoreDistribution {
            law: Law::Discrete(atoms),
        })
    }

    /// Convenience constructor for a two-point law on `{0, 1}`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(ModelError::invalid("bernoulli", "need 0 < p < 1"));
        }
        Self::discrete(vec![
            Atom {
                score: 0.0,
                prob: 1.0 - p,
            },
            Atom { score: 1.0, prob: p },
        ])
    }

    pub fn piecewise(knots: Vec<Knot>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(ModelError::invalid("piecewise", "needs at least two knots"));
        }
        let mut total = 0.0;
        for (i, k) in knots.iter().enumerate() {
            if !k.score.is_finite() {
                return Err(ModelError::invalid(
                    format!("piecewise[{i}].score"),
                    "must be finite",
                ));
            }
            if !(k.density >= 0.0) || !k.density.is_finite() {
                return Err(ModelError::invalid(
                    format!("piecewise[{i}].density"),
                    format!("must be non-negative, got {}", k.density),
                ));
            }
            if i > 0 {
                if !(k.score > knots[i - 1].score) {
                    return Err(ModelError::invalid(
                        format!("piecewise[{i}].score"),
                        "knot scores must be strictly increasing",
                    ));
                }
                total += 0.5 * (k.density + knots[i - 1].density) * (k.score - knots[i - 1].score);
            }
        }
        if (total - 1.0).abs() > DENSITY_MASS_TOL {
            return Err(ModelError::invalid(
                "piecewise",
                format!("density integrates to {total}, expected 1"),
            ));
        }
        if !(total > 0.0) {
            return Err(ModelError::invalid("piecewise", "density has no mass"));
        }
        Ok(ScoreDistribution {
            law: Law::Piecewise(knots),
        })
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub fn variant_name(&self) -> &'static str {
        match self.law {
            Law::Uniform { .. } => "uniform",
            Law::Discrete(_) => "discrete",
            Law::Piecewise(_) => "piecewise",
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.law, Law::Discrete(_))
    }

    pub fn atoms(&self) -> Option<&[Atom]> {
        match &self.law {
            Law::Discrete(a) => Some(a),
            _ => None,
        }
    }

    /// Density for the continuous variants, `None` for discrete laws.
    pub fn density(&self, t: f64) -> Option<f64> {
        match &self.law {
            Law::Uniform { lo, hi } => Some(if t >= *lo && t <= *hi {
                1.0 / (hi - lo)
            } else {
                0.0
            }),
            Law::Piecewise(knots) => Some(interp_density(knots, t)),
            Law::Discrete(_) => None,
        }
    }

    /// Probability mass at exactly `t` (zero for continuous laws).
    pub fn pmf(&self, t: f64) -> f64 {
        match &self.law {
            Law::Discrete(atoms) => atoms
                .iter()
                .find(|a| a.score == t)
                .map_or(0.0, |a| a.prob),
            _ => 0.0,
        }
    }

    /// `(inf supp, sup supp)`.
    pub fn support(&self) -> (f64, f64) {
        match &self.law {
            Law::Uniform { lo, hi } => (*lo, *hi),
            Law::Discrete(atoms) => (atoms[0].score, atoms[atoms.len() - 1].score),
            Law::Piecewise(knots) => {
                let positive = |i: usize| knots[i].density > 0.0 || knots[i + 1].density > 0.0;
                let first = (0..knots.len() - 1).find(|&i| positive(i)).unwrap_or(0);
                let last = (0..knots.len() - 1)
                    .rev()
                    .find(|&i| positive(i))
                    .unwrap_or(knots.len() - 2);
                (knots[first].score, knots[last + 1].score)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.law {
            Law::Uniform { lo, hi } => 0.5 * (lo + hi),
            Law::Discrete(atoms) => atoms.iter().map(|a| a.prob * a.score).sum(),
            Law::Piecewise(_) => {
                let (lo, hi) = self.support();
                self.moments(lo - 1.0, hi).1
            }
        }
    }

    /// `Pr[t <= c]`.
    pub fn cdf(&self, c: ExtReal) -> f64 {
        match c {
            ExtReal::NegInf => 0.0,
            ExtReal::PosInf => 1.0,
            ExtReal::Finite(c) => {
                let (lo, _) = self.support();
                self.moments(lo.min(c) - 1.0, c).0.clamp(0.0, 1.0)
            }
        }
    }

    /// `Pr[t > c]` (strict).
    pub fn upper_mass(&self, c: ExtReal) -> f64 {
        match c {
            ExtReal::NegInf => 1.0,
            ExtReal::PosInf => 0.0,
            ExtReal::Finite(c) => {
                let (_, hi) = self.support();
                self.moments(c, hi.max(c)).0.clamp(0.0, 1.0)
            }
        }
    }

    /// `E[(a + b t) 1{lo < t <= hi}]`.
    pub fn partial_expectation(&self, lo: ExtReal, hi: ExtReal, g: Affine) -> Result<f64> {
        if lo > hi {
            return Err(ModelError::EmptyInterval {
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        let (m0, m1) = self.moments_ext(lo, hi);
        Ok(g.a * m0 + g.b * m1)
    }

    /// Same as [`partial_expectation`](Self::partial_expectation) but always
    /// integrating the density numerically. Discrete laws fall back to the
    /// exact sum. Used to cross-check the closed forms.
    pub fn partial_expectation_quadrature(&self, lo: ExtReal, hi: ExtReal, g: Affine) -> Result<f64> {
        if lo > hi {
            return Err(ModelError::EmptyInterval {
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        if self.is_discrete() {
            return self.partial_expectation(lo, hi, g);
        }
        let (slo, shi) = self.support();
        let a = lo.to_f64().max(slo);
        let b = hi.to_f64().min(shi);
        if !(b > a) {
            return Ok(0.0);
        }
        let breaks = self.breakpoints();
        Ok(simpson_split(
            |t| g.eval(t) * self.density(t).unwrap_or(0.0),
            a,
            b,
            &breaks,
            QUAD_TOL,
        ))
    }

    /// `L(c) = E[t | t <= c]`, with `L(c) = inf supp` when no mass lies at or
    /// below `c`, and `L(+inf) = E[t]`.
    pub fn lower_expectation(&self, cutoff: ExtReal) -> f64 {
        let (lo, hi) = self.support();
        match cutoff {
            ExtReal::NegInf => lo,
            ExtReal::PosInf => self.mean(),
            ExtReal::Finite(c) => {
                if c < lo || (c == lo && !self.is_discrete()) {
                    return lo;
                }
                match &self.law {
                    Law::Uniform { .. } => 0.5 * (lo + c.min(hi)),
                    _ => {
                        let (m0, m1) = self.moments(lo - 1.0, c);
                        if m0 > 0.0 {
                            (m1 / m0).clamp(lo, c.min(hi))
                        } else {
                            lo
                        }
                    }
                }
            }
        }
    }

    /// Crossing point of `L(.)` with `target`.
    ///
    /// Continuous laws return `sup { t : L(t) <= target }`, the supremum of the
    /// solution set when `L` is flat. Discrete laws follow `rule`. Returns
    /// `+inf` when `L` never reaches the target and `-inf` when it is above the
    /// target everywhere.
    pub fn lower_expectation_crossing(&self, target: f64, rule: Crossing) -> ExtReal {
        let (lo, hi) = self.support();
        match &self.law {
            Law::Discrete(atoms) => {
                if atoms[0].score > target {
                    return ExtReal::NegInf;
                }
                let mut m0 = 0.0;
                let mut m1 = 0.0;
                for a in atoms {
                    m0 += a.prob;
                    m1 += a.prob * a.score;
                    let l = m1 / m0;
                    let hit = match rule {
                        Crossing::Reach => l >= target,
                        Crossing::Exceed => l > target,
                    };
                    if hit {
                        return ExtReal::Finite(a.score);
                    }
                }
                ExtReal::PosInf
            }
            _ => {
                if self.mean() <= target {
                    return ExtReal::PosInf;
                }
                if lo > target {
                    return ExtReal::NegInf;
                }
                if let Law::Uniform { lo, hi } = self.law {
                    return ExtReal::Finite((2.0 * target - lo).clamp(lo, hi));
                }
                let scale = 1.0_f64.max(lo.abs()).max(hi.abs());
                let t = bisect_boundary(
                    |t| self.lower_expectation(ExtReal::Finite(t)) <= target,
                    lo,
                    hi,
                    ROOT_TOL * scale,
                );
                ExtReal::Finite(t)
            }
        }
    }

    /// Knots (continuous) or atoms (discrete); the points where the integrands
    /// built on this law can change shape.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.law {
            Law::Uniform { lo, hi } => vec![*lo, *hi],
            Law::Discrete(atoms) => atoms.iter().map(|a| a.score).collect(),
            Law::Piecewise(knots) => knots.iter().map(|k| k.score).collect(),
        }
    }

    /// Draws one score.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        self.quantile(u)
    }

    /// Smallest `t` with `Pr[t' <= t] >= u`, for `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match &self.law {
            Law::Uniform { lo, hi } => lo + u * (hi - lo),
            Law::Discrete(atoms) => {
                let mut acc = 0.0;
                for a in atoms {
                    acc += a.prob;
                    if u < acc {
                        return a.score;
                    }
                }
                atoms[atoms.len() - 1].score
            }
            Law::Piecewise(knots) => {
                let mut acc = 0.0;
                for w in knots.windows(2) {
                    let (k0, k1) = (w[0], w[1]);
                    let h = k1.score - k0.score;
                    let mass = 0.5 * (k0.density + k1.density) * h;
                    if u < acc + mass && mass > 0.0 {
                        let r = u - acc;
                        let slope = (k1.density - k0.density) / (2.0 * h);
                        let disc = (k0.density * k0.density + 4.0 * slope * r).max(0.0);
                        let denom = k0.density + disc.sqrt();
                        let s = if denom > 0.0 { 2.0 * r / denom } else { 0.0 };
                        return k0.score + s.min(h);
                    }
                    acc += mass;
                }
                self.support().1
            }
        }
    }

    /// `(Pr[lo < t <= hi], E[t 1{lo < t <= hi}])` on extended bounds.
    fn moments_ext(&self, lo: ExtReal, hi: ExtReal) -> (f64, f64) {
        let (slo, shi) = self.support();
        let a = match lo {
            ExtReal::NegInf => slo - 1.0,
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => return (0.0, 0.0),
        };
        let b = match hi {
            ExtReal::PosInf => shi,
            ExtReal::Finite(x) => x,
            ExtReal::NegInf => return (0.0, 0.0),
        };
        self.moments(a, b)
    }

    /// `(Pr[a < t <= b], E[t 1{a < t <= b}])` for finite bounds.
    fn moments(&self, a: f64, b: f64) -> (f64, f64) {
        if !(b > a) {
            return (0.0, 0.0);
        }
        match &self.law {
            Law::Uniform { lo, hi } => {
                let l = a.max(*lo);
                let r = b.min(*hi);
                if r <= l {
                    return (0.0, 0.0);
                }
                let w = 1.0 / (hi - lo);
                ((r - l) * w, 0.5 * (r * r - l * l) * w)
            }
            Law::Discrete(atoms) => atoms
                .iter()
                .filter(|x| x.score > a && x.score <= b)
                .fold((0.0, 0.0), |(m0, m1), x| (m0 + x.prob, m1 + x.prob * x.score)),
            Law::Piecewise(knots) => {
                let (slo, shi) = (knots[0].score, knots[knots.len() - 1].score);
                let l = a.max(slo);
                let r = b.min(shi);
                if r <= l {
                    return (0.0, 0.0);
                }
                let breaks: Vec<f64> = knots.iter().map(|k| k.score).collect();
                let m0 = simpson_split(|t| interp_density(knots, t), l, r, &breaks, QUAD_TOL);
                let m1 = simpson_split(|t| t * interp_density(knots, t), l, r, &breaks, QUAD_TOL);
                (m0, m1)
            }
        }
    }
}

fn interp_density(knots: &[Knot], t: f64) -> f64 {
    let n = knots.len();
    if t < knots[0].score || t > knots[n - 1].score {
        return 0.0;
    }
    // index of the first knot with score > t
    let i = knots.partition_point(|k| k.score <= t);
    if i == 0 {
        return knots[0].density;
    }
    if i >= n {
        return knots[n - 1].density;
    }
    let (k0, k1) = (knots[i - 1], knots[i]);
    let w = (t - k0.score) / (k1.score - k0.score);
    k0.density + w * (k1.density - k0.density)
}

/// Weak MLRP between each adjacent pair: for `t > t'`,
/// `f_next(t) f_prev(t') >= f_next(t') f_prev(t)`.
///
/// Discrete laws are compared on the union of their atoms, piecewise densities
/// on the union of their knots. Uniform laws satisfy MLRP exactly when both
/// endpoints weakly increase.
pub fn mlrp_increasing(ds: &[ScoreDistribution]) -> Result<bool> {
    const TOL: f64 = 1e-12;
    for pair in ds.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        let ok = match (&prev.law, &next.law) {
            (Law::Uniform { lo: a0, hi: b0 }, Law::Uniform { lo: a1, hi: b1 }) => a1 >= a0 && b1 >= b0,
            (Law::Discrete(_), Law::Discrete(_)) | (Law::Piecewise(_), Law::Piecewise(_)) => {
                let mut grid: Vec<f64> = prev.breakpoints();
                grid.extend(next.breakpoints());
                grid.sort_by(f64::total_cmp);
                grid.dedup();
                let f = |d: &ScoreDistribution, t: f64| match d.density(t) {
                    Some(x) => x,
                    None => d.pmf(t),
                };
                let fp: Vec<f64> = grid.iter().map(|&t| f(prev, t)).collect();
                let fnx: Vec<f64> = grid.iter().map(|&t| f(next, t)).collect();
                let mut ok = true;
                'outer: for hi in 0..grid.len() {
                    for lo in 0..hi {
                        if fnx[hi] * fp[lo] < fnx[lo] * fp[hi] - TOL {
                            ok = false;
                            break 'outer;
                        }
                    }
                }
                ok
            }
            _ => {
                return Err(ModelError::MixedVariants(
                    prev.variant_name(),
                    next.variant_name(),
                ))
            }
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}
