use persuasion::inference::{ContestantOrder, ExampleSet, ResponseRecord, SpeakerGroup};
use persuasion::rsa::StickContest;
use persuasion::simulation::{generate_synthetic, SyntheticConfig};
use persuasion::world::{Goal, WorldPrior};

const SD: f64 = 0.3;

fn engine() -> StickContest {
    StickContest::new(&WorldPrior::experiment()).unwrap()
}

fn generate(cfg: SyntheticConfig) -> Vec<ResponseRecord> {
    generate_synthetic(&engine(), &ExampleSet::default(), &cfg).unwrap()
}

fn cell(records: &[ResponseRecord], order: ContestantOrder, e1: f64, group: Option<SpeakerGroup>) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.contestant_order == order && r.evidence_1 == e1 && group.is_none_or(|g| r.speaker_group == g))
        .map(|r| r.response_1 / 100.0)
        .collect()
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

/// `E[clamp(X, 0, 1)]` for `X ~ N(m, SD)`, by Simpson's rule.
fn clamped_mean(m: f64) -> f64 {
    let pdf = |x: f64| (-0.5 * ((x - m) / SD).powi(2)).exp() / (SD * (2.0 * std::f64::consts::PI).sqrt());
    let (lo, hi, steps) = (m - 10.0 * SD, m + 10.0 * SD, 20_000);
    let h = (hi - lo) / steps as f64;
    let f = |x: f64| x.clamp(0.0, 1.0) * pdf(x);
    let mut s = f(lo) + f(hi);
    for i in 1..steps {
        s += f(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn cell_means_converge_to_the_generating_mixture() {
    let cfg = SyntheticConfig {
        n_participants: 10_000,
        seed: 21,
        second_judgment: false,
        ..SyntheticConfig::default()
    };
    let records = generate(cfg.clone());
    let e = engine();
    let j0 = e.literal_listener(6.0).unwrap().p_longer;
    let j1 = e.pragmatic_listener(6.0, Goal::Longer, cfg.beta).unwrap().p_longer;
    for group in SpeakerGroup::ALL {
        let ys = cell(&records, ContestantOrder::LongFirst, 6.0, Some(group));
        let w = cfg.p_z[group.index()];
        let expected = w * clamped_mean(j1 + cfg.offset) + (1.0 - w) * clamped_mean(j0 + cfg.offset);
        let (m, v) = mean_var(&ys);
        let se = (v / ys.len() as f64).sqrt();
        assert!((m - expected).abs() < 3.0 * se, "{group:?}: mean {m}, expected {expected}, se {se}");
    }
}

#[test]
fn unbiased_pragmatic_judges_look_literal() {
    let base = SyntheticConfig {
        n_participants: 2000,
        beta: 0.0,
        second_judgment: false,
        ..SyntheticConfig::default()
    };
    let pragmatic = generate(SyntheticConfig {
        p_z: [1.0; 3],
        seed: 1,
        ..base.clone()
    });
    let literal = generate(SyntheticConfig {
        p_z: [0.0; 3],
        seed: 2,
        ..base
    });
    for (order, e1) in [(ContestantOrder::LongFirst, 6.0), (ContestantOrder::ShortFirst, 4.0)] {
        let (ma, va) = mean_var(&cell(&pragmatic, order, e1, None));
        let (mb, vb) = mean_var(&cell(&literal, order, e1, None));
        let na = cell(&pragmatic, order, e1, None).len() as f64;
        let nb = cell(&literal, order, e1, None).len() as f64;
        let z = (ma - mb) / (va / na + vb / nb).sqrt();
        assert!(z.abs() < 2.576, "{order:?}: z = {z}");
    }
}

#[test]
fn paper_shaped_weak_cell() {
    let records = generate(SyntheticConfig {
        n_participants: 2000,
        seed: 5,
        ..SyntheticConfig::default()
    });
    let (strong, _) = mean_var(&cell(&records, ContestantOrder::LongFirst, 6.0, Some(SpeakerGroup::Strongest)));
    let (weak, _) = mean_var(&cell(&records, ContestantOrder::LongFirst, 6.0, Some(SpeakerGroup::Weaker)));
    assert!(strong < 0.4, "strongest {strong}");
    assert!((weak - 0.5).abs() < 0.1, "weaker {weak}");
    assert!(weak > strong + 0.05);
}
