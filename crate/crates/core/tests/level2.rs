//! Joint-listener and level-2 speaker behaviour on the experiment grid, with
//! regression values from exact enumeration.

use persuasion::rsa::{SpeakerParams, StickContest};
use persuasion::world::{Goal, LengthGrid, StickSet, WorldPrior};

fn engine() -> StickContest {
    StickContest::new(&WorldPrior::experiment()).unwrap()
}

fn example_set() -> StickSet {
    StickSet::from_lengths(&LengthGrid::experiment(), &[2.0, 4.0, 7.0, 8.0, 9.0]).unwrap()
}

#[test]
fn strong_evidence_shifts_the_bias_marginal() {
    let e = engine();
    let prior = e.default_beta_prior().clone();
    let j = e.joint_listener(9.0, Goal::Longer, &prior).unwrap();
    assert!((j.posterior_mean_beta() - 5.738557).abs() < 1e-6);
    let moved = j
        .beta_marginal
        .iter()
        .zip(prior.weights())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(moved > 1e-3);
}

#[test]
fn perceived_bias_cost_grows_with_length() {
    let e = engine();
    let prior = e.default_beta_prior().clone();
    let c6 = e.perceived_bias_cost(6.0, Goal::Longer, &prior).unwrap();
    let c9 = e.perceived_bias_cost(9.0, Goal::Longer, &prior).unwrap();
    assert!(c9 >= c6);
    assert!((c6 - 4.796186).abs() < 1e-6 && (c9 - 5.738557).abs() < 1e-6);
}

#[test]
fn level1_speaker_orders_by_length() {
    let d = engine()
        .speaker_choice_dist(&example_set(), Goal::Longer, &SpeakerParams::level1(2.0))
        .unwrap();
    assert!(d.windows(2).all(|w| w[1].1 > w[0].1), "{d:?}");
}

#[test]
fn cost_aware_speaker_hides_strong_evidence() {
    let e = engine();
    let prior = e.default_beta_prior().clone();
    let w = example_set();
    let modal = |wc: f64| {
        let d = e
            .level2_speaker(&w, Goal::Longer, &SpeakerParams::level2(2.0, wc), &prior)
            .unwrap();
        d.iter().cloned().fold((0.0, -1.0), |b, x| if x.1 > b.1 { x } else { b }).0
    };
    assert_eq!(modal(0.0), 9.0);
    assert_eq!(modal(3.0), 2.0);
    // smallest cost weight at which the strongest stick stops being modal
    let (mut lo, mut hi) = (0.0, 3.0);
    for _ in 0..40 {
        let m = 0.5 * (lo + hi);
        if modal(m) == 9.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    assert!((hi - 0.315882).abs() < 1e-5, "threshold {hi}");
}

#[test]
fn regression_values() {
    let e = engine();
    assert!((e.pragmatic_listener(6.0, Goal::Longer, 2.26).unwrap().p_longer - 0.412085379783).abs() < 1e-10);
    assert!((e.effect_size(6.0, Goal::Longer, 2.0).unwrap() - 0.042718408350).abs() < 1e-10);
    assert!((e.literal_listener(9.0).unwrap().p_longer - 0.743941472337).abs() < 1e-10);
    assert!((e.level2_listener(8.0, Goal::Longer, 2.0, 1.0).unwrap().p_longer - 0.968465875934).abs() < 1e-10);
    let u6 = e.literal_listener(6.0).unwrap().p_longer;
    assert!((e.persuasive_utility(6.0, Goal::Longer).unwrap() - u6.ln()).abs() < 1e-14);
}
