mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use testopt_core::dist::{mlrp_increasing, Affine};
use testopt_core::{Crossing, ExtReal, ScoreDistribution};

proptest! {
    #[test]
    fn cdf_is_monotone_and_bounded(d in any_dist(), a in -200.0..200.0f64, b in -200.0..200.0f64) {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        let (fx, fy) = (d.cdf(ExtReal::Finite(x)), d.cdf(ExtReal::Finite(y)));
        prop_assert!((0.0..=1.0).contains(&fx) && fx <= fy + 1e-12);
        prop_assert!((d.cdf(ExtReal::Finite(x)) + d.upper_mass(ExtReal::Finite(x)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lower_expectation_is_monotone_and_in_support(d in any_dist(), a in -200.0..200.0f64, b in -200.0..200.0f64) {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        let (lo, hi) = d.support();
        let (lx, ly) = (d.lower_expectation(ExtReal::Finite(x)), d.lower_expectation(ExtReal::Finite(y)));
        prop_assert!(lx <= ly + 1e-9);
        prop_assert!(lx >= lo - 1e-9 && ly <= hi + 1e-9);
        prop_assert!(lx <= x.max(lo) + 1e-9);
        prop_assert!((d.lower_expectation(ExtReal::PosInf) - d.mean()).abs() < 1e-9);
        prop_assert_eq!(d.lower_expectation(ExtReal::NegInf), lo);
    }

    #[test]
    fn closed_form_moments_match_quadrature(d in any_dist(), a in -80.0..80.0f64, w in 0.0..100.0f64, ga in -5.0..5.0f64, gb in -5.0..5.0f64) {
        let (lo, hi) = (ExtReal::Finite(a), ExtReal::Finite(a + w));
        let g = Affine::new(ga, gb);
        let exact = d.partial_expectation(lo, hi, g).unwrap();
        let quad = d.partial_expectation_quadrature(lo, hi, g).unwrap();
        prop_assert!((exact - quad).abs() < 1e-8 * (1.0 + exact.abs()), "{} vs {}", exact, quad);
    }

    #[test]
    fn reach_crossing_brackets_target(d in prop_oneof![uniform(), piecewise()], u in 0.05..0.95f64) {
        let (lo, _) = d.support();
        let target = lo + u * (d.mean() - lo);
        let t = d.lower_expectation_crossing(target, Crossing::Reach);
        let t = t.finite().expect("target between inf supp and the mean");
        prop_assert!((d.lower_expectation(ExtReal::Finite(t)) - target).abs() < 1e-7 * (1.0 + target.abs()));
    }

    #[test]
    fn quantile_inverts_cdf(d in any_dist(), u in 0.001..0.999f64) {
        let t = d.quantile(u);
        prop_assert!(d.cdf(ExtReal::Finite(t)) >= u - 1e-9);
    }

    #[test]
    fn identical_laws_are_mlrp_ordered(d in any_dist()) {
        prop_assert!(mlrp_increasing(&[d.clone(), d]).unwrap());
    }
}

#[test]
fn sample_mean_converges() {
    let d = ScoreDistribution::discrete(vec![
        testopt_core::Atom { score: 0.0, prob: 0.25 },
        testopt_core::Atom { score: 10.0, prob: 0.75 },
    ])
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 200_000;
    let m: f64 = (0..n).map(|_| d.sample(&mut rng)).sum::<f64>() / n as f64;
    assert!((m - 7.5).abs() < 0.05);
}

#[test]
fn shifted_uniforms_are_mlrp_ordered_but_reversed_are_not() {
    let a = ScoreDistribution::uniform(0.0, 10.0).unwrap();
    let b = ScoreDistribution::uniform(5.0, 15.0).unwrap();
    assert!(mlrp_increasing(&[a.clone(), b.clone()]).unwrap());
    assert!(!mlrp_increasing(&[b, a]).unwrap());
}
