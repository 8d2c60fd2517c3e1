#![allow(dead_code)]

use proptest::prelude::*;
use testopt_core::aa::AAScenario;
use testopt_core::{Atom, Knot, ObservableCell, PartyUtility, ScoreDistribution};

pub fn uniform() -> impl Strategy<Value = ScoreDistribution> {
    (-50.0..50.0f64, 1.0..100.0f64).prop_map(|(lo, w)| ScoreDistribution::uniform(lo, lo + w).unwrap())
}

pub fn discrete() -> impl Strategy<Value = ScoreDistribution> {
    prop::collection::btree_map(-500i32..500, 0.05..1.0f64, 1..8).prop_map(|m| {
        let tot: f64 = m.values().sum();
        ScoreDistribution::discrete(
            m.into_iter()
                .map(|(s, p)| Atom {
                    score: s as f64 / 10.0,
                    prob: p / tot,
                })
                .collect(),
        )
        .unwrap()
    })
}

pub fn piecewise() -> impl Strategy<Value = ScoreDistribution> {
    (-50.0..50.0f64, prop::collection::vec((1.0..20.0f64, 0.0..1.0f64), 2..6)).prop_filter_map(
        "needs positive mass",
        |(lo, segs)| {
            let mut x = lo;
            let mut raw = vec![(x, 0.5)];
            for (h, d) in segs {
                x += h;
                raw.push((x, d));
            }
            let mass: f64 = raw.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum();
            (mass > 0.0).then(|| {
                ScoreDistribution::piecewise(
                    raw.into_iter()
                        .map(|(score, d)| Knot {
                            score,
                            density: d / mass,
                        })
                        .collect(),
                )
                .unwrap()
            })
        },
    )
}

pub fn any_dist() -> impl Strategy<Value = ScoreDistribution> {
    prop_oneof![uniform(), discrete(), piecewise()]
}

/// A cell whose bars fall in and slightly beyond the support.
pub fn cell_with(dist: impl Strategy<Value = ScoreDistribution>) -> impl Strategy<Value = ObservableCell> {
    (dist, 0.0..1.0f64, 0.0..1.0f64, 0.5..2.0f64, 0.5..2.0f64, 0.1..10.0f64).prop_map(
        |(d, uc, us, wc, ws, delta)| {
            let (lo, hi) = d.support();
            let span = hi - lo;
            let at = |u: f64| lo - 0.2 * span + u * 1.4 * span;
            ObservableCell::new(
                "cell",
                PartyUtility::new(-at(uc) * wc, wc).unwrap(),
                PartyUtility::new(-at(us) * ws, ws).unwrap(),
                delta,
                d,
            )
            .unwrap()
        },
    )
}

pub fn cell() -> impl Strategy<Value = ObservableCell> {
    cell_with(prop_oneof![uniform(), discrete()])
}

pub fn aa_scenario() -> impl Strategy<Value = AAScenario> {
    (
        0.05..0.95f64,
        0.05..0.95f64,
        0.05..0.95f64,
        0.05..1.0f64,
        0.01..2.0f64,
        0.1..10.0f64,
        0.1..2.0f64,
        0.1..2.0f64,
    )
        .prop_map(|(q, p_r, p_g, c, extra, delta, lo_pad, hi_pad)| {
            let beta = c + extra;
            AAScenario {
                q,
                p_r,
                p_g,
                beta,
                c,
                delta,
                x1_lo: c - beta - 1.0 - lo_pad,
                x1_hi: c + hi_pad,
            }
        })
        .prop_filter("valid scenario", |s| s.validate().is_ok())
}
