//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p sonify-core --test acceptance -- --nocapture`.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use sonify_core::analysis::{aggregate_report, wilcoxon_rank_sum, wilcoxon_signed_rank, Measure};
use sonify_core::rng::SplitMix64;
use sonify_core::session::{
    build_session, perfect_responses, score_responses, verify_bundle, ResponseLog, ResponsePayload, ResponseRecord,
    ScoreSheet, SingleResponse,
};
use sonify_core::stimuli::{
    classify_trend, gen_comparison_pairs, gen_single_values, gen_trend_sets, ComparisonAnswer, Sign, TaskKind,
    TrendType,
};
use sonify_core::synth::{decode_wav_bytes, encode_wav_bytes, measure_itd, render_stimulus, Method, SynthError};
use sonify_core::{value_to_angle, EncodingSpec, StereoBuffer, StimulusConfig};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Outcome {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

const SR: u32 = 48_000;

/// Head-model delay computed from first principles.
fn expected_itd(theta_deg: f64) -> f64 {
    let t = theta_deg.to_radians();
    0.0875 / 343.0 * (t + t.sin())
}

fn expected_angle(v: f64) -> f64 {
    -90.0 + (v + 10.0) * 9.0
}

fn encoding_exactness() -> Outcome {
    let start = Instant::now();
    let spec = EncodingSpec::default();
    for (v, deg) in [(-10.0, -90.0), (0.0, 0.0), (1.0, 9.0), (10.0, 90.0)] {
        let got = value_to_angle(v, &spec).map_err(|e| e.to_string())?;
        ensure(got == deg, || format!("value {v} mapped to {got}, want {deg}"))?;
    }
    for i in 0..=10_000 {
        let v = -10.0 + 20.0 * f64::from(i) / 10_000.0;
        let got = value_to_angle(v, &spec).map_err(|e| e.to_string())?;
        ensure((got - expected_angle(v)).abs() <= 1e-12, || format!("value {v}: {got}"))?;
    }
    within(start.elapsed(), Duration::from_secs(1))
}

fn spatial_renders(config: &StimulusConfig) -> Result<Vec<(f64, StereoBuffer)>, String> {
    (-10..=10)
        .map(|v| {
            let v = f64::from(v);
            render_stimulus(&[v], Method::Spatial, config, None)
                .map(|b| (expected_angle(v), b))
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn itd_oracle() -> Outcome {
    let start = Instant::now();
    let config = StimulusConfig::default();
    for (theta, buf) in spatial_renders(&config)? {
        let itd = measure_itd(&buf, 1.0).map_err(|e| e.to_string())?;
        let diff = (itd - expected_itd(theta)) * f64::from(SR);
        ensure(diff.abs() <= 1.0, || format!("theta {theta}: off by {diff:.3} samples"))?;
    }
    within(start.elapsed(), Duration::from_secs(30))
}

fn ild_oracle() -> Outcome {
    let config = StimulusConfig::default();
    let ild_max = config.spatial.ild_max_db;
    for (theta, buf) in spatial_renders(&config)? {
        let (l, r) = (common::rms(buf.left()), common::rms(buf.right()));
        let ild = 20.0 * (r / l).log10();
        let want = ild_max * theta.to_radians().sin();
        ensure((ild - want).abs() <= 0.5, || format!("theta {theta}: {ild:.3} dB, want {want:.3}"))?;
        let ordered = if theta > 0.0 {
            r > l
        } else if theta < 0.0 {
            l > r
        } else {
            ((r - l) / l).abs() < 1e-9
        };
        ensure(ordered, || format!("theta {theta}: RMS left {l}, right {r}"))?;
    }
    Ok(())
}

fn pitch_oracle() -> Outcome {
    let config = StimulusConfig::default();
    let tone = config.render.frames(config.render.tone_ms);
    let ramp = config.render.frames(config.render.ramp_ms);
    for v in -10..=10 {
        let want = 440.0 * 2f64.powf(f64::from(v) / 12.0);
        let buf = render_stimulus(&[f64::from(v)], Method::Pitch, &config, None).map_err(|e| e.to_string())?;
        let fft = common::fft_peak_hz(buf.left(), SR);
        ensure((fft / want - 1.0).abs() < 0.01, || format!("value {v}: FFT peak {fft:.2} Hz, want {want:.2}"))?;
        let zc = common::zero_crossing_hz(&buf.left()[ramp..tone - ramp], SR);
        ensure((zc / want - 1.0).abs() < 0.01, || format!("value {v}: zero crossings {zc:.2} Hz, want {want:.2}"))?;
    }
    Ok(())
}

fn dataset_structure() -> Outcome {
    for seed in 0..1_000u64 {
        let pairs = gen_comparison_pairs(seed);
        let trends = gen_trend_sets(seed);
        let singles = gen_single_values(seed);
        ensure(pairs.len() == 12 && trends.len() == 12 && singles.len() == 21, || format!("seed {seed}: counts"))?;
        for item in pairs.iter().chain(&trends).chain(&singles) {
            ensure(item.values.iter().all(|v| (-10..=10).contains(v)), || format!("seed {seed}: {item:?}"))?;
        }

        let mut gaps = BTreeMap::new();
        for p in &pairs {
            ensure(p.values.len() == 2, || format!("seed {seed}: pair {:?}", p.values))?;
            *gaps.entry((p.values[0] - p.values[1]).abs()).or_insert(0) += 1;
        }
        ensure(gaps == BTreeMap::from([(0, 3), (3, 3), (6, 3), (9, 3)]), || format!("seed {seed}: gaps {gaps:?}"))?;

        let mut per_interval: BTreeMap<i32, Vec<TrendType>> = BTreeMap::new();
        for t in &trends {
            let steps: Vec<i32> = t.values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
            ensure(steps.iter().all(|&s| s == steps[0]), || format!("seed {seed}: uneven {:?}", t.values))?;
            let shape = classify_trend(&t.values).map_err(|e| format!("seed {seed}: {e}"))?;
            per_interval.entry(steps[0]).or_default().push(shape);
        }
        let at3 = per_interval.get(&3).cloned().unwrap_or_default();
        ensure(at3.len() == 4 && TrendType::ALL.iter().all(|t| at3.contains(t)), || {
            format!("seed {seed}: interval 3 shapes {at3:?}")
        })?;
        for interval in [6, 9] {
            let shapes = per_interval.get(&interval).cloned().unwrap_or_default();
            ensure(shapes.len() == 4 && shapes.iter().all(|s| !s.is_monotone()), || {
                format!("seed {seed}: interval {interval} shapes {shapes:?}")
            })?;
        }

        let mut values: Vec<i32> = singles.iter().map(|s| s.values[0]).collect();
        values.sort_unstable();
        ensure(values == (-10..=10).collect::<Vec<_>>(), || format!("seed {seed}: singles {values:?}"))?;

        let bytes = |s: u64| {
            serde_json::to_vec(&(gen_comparison_pairs(s), gen_trend_sets(s), gen_single_values(s))).unwrap()
        };
        ensure(bytes(seed) == bytes(seed), || format!("seed {seed}: not reproducible"))?;
    }
    Ok(())
}

fn statistics_oracle() -> Outcome {
    let mut rng = SplitMix64::new(0xACCE_5757);
    // Small integer ranges so that ties and zero differences occur.
    let draw = |rng: &mut SplitMix64, n: usize| -> Vec<f64> { (0..n).map(|_| rng.range_inclusive(-4, 4) as f64).collect() };
    let mut checked = 0;
    while checked < 200 {
        let n = 1 + rng.below(8) as usize;
        let (x, y) = (draw(&mut rng, n), draw(&mut rng, n));
        let Some((w, _, p)) = common::signed_rank_oracle(&x, &y) else {
            continue;
        };
        let got = wilcoxon_signed_rank(&x, &y).map_err(|e| e.to_string())?;
        ensure(got.statistic == w && (got.p_two_sided - p).abs() <= 1e-12, || {
            format!("signed-rank {x:?} {y:?}: got ({}, {}), oracle ({w}, {p})", got.statistic, got.p_two_sided)
        })?;
        checked += 1;
    }
    for _ in 0..200 {
        let total = 2 + rng.below(9) as usize;
        let na = 1 + rng.below(total as u64 - 1) as usize;
        let (a, b) = (draw(&mut rng, na), draw(&mut rng, total - na));
        let (u, p) = common::rank_sum_oracle(&a, &b);
        let got = wilcoxon_rank_sum(&a, &b).map_err(|e| e.to_string())?;
        ensure(got.statistic == u && (got.p_two_sided - p).abs() <= 1e-12, || {
            format!("rank-sum {a:?} {b:?}: got ({}, {}), oracle ({u}, {p})", got.statistic, got.p_two_sided)
        })?;
    }
    let fixed = wilcoxon_signed_rank(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0.0; 5]).map_err(|e| e.to_string())?;
    ensure((fixed.p_two_sided - 0.0625).abs() <= 1e-12, || format!("fixed example p = {}", fixed.p_two_sided))
}

fn random_log(manifest_log: &ResponseLog, key: &sonify_core::session::AnswerKey, seed: u64) -> ResponseLog {
    let mut rng = SplitMix64::new(seed);
    let responses = manifest_log
        .responses
        .iter()
        .map(|r| {
            let entry = &key.entries[&r.trial_id];
            let response = match entry.ground_truth.task() {
                TaskKind::Comparison => {
                    ResponsePayload::Comparison([ComparisonAnswer::First, ComparisonAnswer::Second, ComparisonAnswer::Equal][rng.below(3) as usize])
                }
                TaskKind::Trend => ResponsePayload::Trend(TrendType::ALL[rng.below(4) as usize]),
                TaskKind::Single => ResponsePayload::Single(SingleResponse {
                    sign: [Sign::Negative, Sign::Zero, Sign::Positive][rng.below(3) as usize],
                    exact: rng.range_inclusive(-10, 10) as i32,
                }),
            };
            ResponseRecord {
                response,
                ..r.clone()
            }
        })
        .collect();
    ResponseLog {
        responses,
        ..manifest_log.clone()
    }
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = StimulusConfig::default();
    let bundle = build_session("p00", 0, 7, &config, None, dir.path()).map_err(|e| e.to_string())?;
    let m = &bundle.manifest;
    ensure(m.condition_order == [Method::Spatial, Method::Pitch], || format!("order {:?}", m.condition_order))?;
    ensure(m.blocks.iter().all(|b| b.trials.len() == 45), || "block sizes".into())?;
    ensure(bundle.audio_files.len() == 90, || format!("{} WAVs", bundle.audio_files.len()))?;
    verify_bundle(dir.path(), m).map_err(|e| e.to_string())?;

    let sheet = |scores| ScoreSheet {
        schema_version: 1,
        session_id: m.session_id.clone(),
        participant_id: m.participant_id.clone(),
        participant_group: "acceptance".into(),
        scores,
    };
    let perfect = perfect_responses(m, &bundle.key);
    let scores = score_responses(m, &bundle.key, &perfect).map_err(|e| e.to_string())?;
    let report = aggregate_report(&[sheet(scores)]).map_err(|e| e.to_string())?;
    ensure(report.overall.len() == 8, || format!("{} overall rows", report.overall.len()))?;
    ensure(report.overall.iter().all(|r| r.accuracy == 1.0), || "perfect responder missed an overall cell".into())?;
    ensure(report.by_level.iter().all(|r| r.accuracy == 1.0), || "perfect responder missed a level cell".into())?;
    ensure(report.by_truth.iter().all(|r| r.accuracy == 1.0), || "perfect responder missed a truth cell".into())?;
    ensure(
        report.exact_value.iter().all(|r| r.exact_match_rate == 1.0 && r.mean_abs_diff == Some(0.0)),
        || format!("exact value rows {:?}", report.exact_value),
    )?;
    for method in [Method::Spatial, Method::Pitch] {
        let levels = report.by_level.iter().filter(|r| r.measure == Measure::Comparison && r.method == method).count();
        ensure(levels == 4, || format!("{method}: {levels} comparison gap rows"))?;
    }

    let random = random_log(&perfect, &bundle.key, 0xD1CE);
    let scores = score_responses(m, &bundle.key, &random).map_err(|e| e.to_string())?;
    let comparison: Vec<_> = scores.iter().filter(|s| s.task == TaskKind::Comparison).collect();
    let correct = comparison.iter().filter(|s| s.correct).count() as u64;
    let (lo, hi) = common::binomial_interval(comparison.len() as u64, 1.0 / 3.0, 0.01);
    ensure((lo..=hi).contains(&correct), || {
        format!("random responder {correct}/{} outside [{lo}, {hi}]", comparison.len())
    })?;
    within(start.elapsed(), Duration::from_secs(120))
}

fn wav_round_trip() -> Outcome {
    let mut rng = SplitMix64::new(0x0057_A7E5);
    for i in 0..50 {
        let frames = 1 + rng.below(4_000) as usize;
        let mut ch = || (0..frames).map(|_| 2.0 * rng.next_f64() - 1.0).collect::<Vec<f64>>();
        let (l, r) = (ch(), ch());
        let buf = StereoBuffer::new(l, r, [8_000, 44_100, 48_000][i % 3]).map_err(|e| e.to_string())?;
        let first = encode_wav_bytes(&buf).map_err(|e| e.to_string())?;
        let decoded = decode_wav_bytes(&first).map_err(|e| e.to_string())?;
        let second = encode_wav_bytes(&decoded).map_err(|e| e.to_string())?;
        ensure(first == second, || format!("buffer {i}: re-encode differs"))?;
        ensure(decoded.frames() == frames && decoded.sample_rate() == buf.sample_rate(), || format!("buffer {i}"))?;
    }
    for bad in [1.5, -1.01, f64::NAN, f64::INFINITY] {
        let buf = StereoBuffer::new(vec![0.0, bad], vec![0.0, 0.0], SR).map_err(|e| e.to_string())?;
        ensure(matches!(encode_wav_bytes(&buf), Err(SynthError::SampleOverflow { frame: 1, .. })), || {
            format!("sample {bad} was accepted")
        })?;
    }
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("encoding exactness", encoding_exactness),
        ("ITD oracle", itd_oracle),
        ("ILD oracle", ild_oracle),
        ("pitch oracle", pitch_oracle),
        ("dataset structure", dataset_structure),
        ("statistics oracle", statistics_oracle),
        ("end-to-end pipeline", end_to_end),
        ("WAV round trip", wav_round_trip),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        match &outcome {
            Ok(()) => println!("PASS  {name} ({elapsed:.2?})"),
            Err(why) => {
                println!("FAIL  {name} ({elapsed:.2?}): {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
