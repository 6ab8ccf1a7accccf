//! Acceptance criteria. Each test prints one PASS/FAIL line; run with
//! `cargo test -p evkit --test acceptance -- --nocapture` to see them.

mod common;

use std::time::Instant;

use common::{lattice_corpus, smooth_corpus};
use evkit::bench::{run_bench, synthetic_stream, BenchPath};
use evkit::formats::ecam::{parse_camera_model, write_camera_model};
use evkit::formats::evrp::EvrpTensor;
use evkit::formats::evt1::{parse_binary_events, write_binary_events};
use evkit::parallel::{thread_pool, RayonCandidates};
use evkit_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const THETA: f64 = 0.02;
const K: f64 = 0.05;
const PAIRS: usize = 20;
const DIM: u16 = 64;

fn report(id: u32, name: &str, ok: bool, detail: String) {
    println!(
        "criterion {id} [{name}]: {} {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
}

fn recovery_search() -> SearchConfig {
    SearchConfig {
        k_min: 0.0,
        k_max: 2.0,
        tolerance: 1e-10,
        grid_points: 33,
    }
}

fn fit(pairs: &[TrainingPair]) -> FitReport {
    let candidates = RayonCandidates::new(thread_pool(0));
    fit_camera_with(pairs, &recovery_search(), &candidates).unwrap()
}

#[test]
fn criterion_1_round_trip_reconstruction_bound() {
    let start = Instant::now();
    let model = CameraModel::uniform(DIM, DIM, THETA, K).unwrap();
    let bound = (1.0 + K) * (THETA.exp() - 1.0);
    let mut worst = Vec::new();
    for (name, corpus) in [
        ("lattice", lattice_corpus(PAIRS, DIM, DIM, THETA, K, 1)),
        ("smooth", smooth_corpus(PAIRS, DIM, DIM, THETA, K, 2)),
    ] {
        let mut max_err = 0.0f64;
        let mut sum = 0.0;
        let mut n = 0usize;
        for p in &corpus {
            let e_i = compute_e_i(p.stream());
            let rec = reconstruct_next(p.f0(), &e_i, &model).unwrap();
            for (a, b) in rec.raw.iter().zip(p.f1().values()) {
                let err = (a - b).abs();
                max_err = max_err.max(err);
                sum += err;
                n += 1;
            }
        }
        worst.push((name, max_err, sum / n as f64));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = worst
        .iter()
        .all(|&(_, max, mae)| max <= bound && mae <= bound / 2.0)
        && elapsed < 5.0;
    let detail = worst
        .iter()
        .map(|(n, m, a)| format!("{n}: max={m:.6} mae={a:.6}"))
        .collect::<Vec<_>>()
        .join(", ");
    report(1, "round-trip bound", ok, format!("bound={bound:.6} {detail} time={elapsed:.2}s"));
    assert!(ok);
}

#[test]
fn criterion_2_parameter_recovery() {
    let corpus = lattice_corpus(PAIRS, DIM, DIM, THETA, K, 1);
    let start = Instant::now();
    let result = fit(&corpus);
    let elapsed = start.elapsed().as_secs_f64();
    let k_err = (result.model.k() - K).abs();
    let mut active = vec![false; DIM as usize * DIM as usize];
    for p in &corpus {
        for (a, &e) in active.iter_mut().zip(p.e_i().values()) {
            *a |= e != 0.0;
        }
    }
    let mut worst_rel = 0.0f64;
    for (i, &a) in active.iter().enumerate() {
        if a {
            worst_rel = worst_rel.max((result.model.theta().values()[i] - THETA).abs() / THETA);
        }
    }
    let n_active = active.iter().filter(|&&a| a).count();
    let ok = k_err <= 1e-3 && worst_rel <= 1e-6 && elapsed < 60.0 && n_active > 0;
    report(
        2,
        "parameter recovery",
        ok,
        format!(
            "k_hat={:.10} |dk|={k_err:.2e} max_rel_theta={worst_rel:.2e} active={n_active} evals={} time={elapsed:.2}s",
            result.model.k(),
            result.search.evaluations
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_3_refined_integral_consistency() {
    let model = CameraModel::uniform(DIM, DIM, THETA, K).unwrap();
    let mut max_rec = 0.0f64;
    let mut max_gap = 0.0f64;
    for corpus in [
        lattice_corpus(PAIRS, DIM, DIM, THETA, K, 1),
        smooth_corpus(PAIRS, DIM, DIM, THETA, K, 2),
    ] {
        for p in &corpus {
            let refined = refine_integral(p, &model).unwrap();
            let rec = reconstruct_next(p.f0(), &refined, &model).unwrap();
            for (a, b) in rec.raw.iter().zip(p.f1().values()) {
                max_rec = max_rec.max((a - b).abs());
            }
            for (a, b) in refined.values().iter().zip(p.e_i().values()) {
                max_gap = max_gap.max((a - b).abs());
            }
        }
    }
    let ok = max_rec <= 1e-10 && max_gap < 1.0;
    report(
        3,
        "refined integral",
        ok,
        format!("max|f1_hat-f1|={max_rec:.2e} max|refined-E_I|={max_gap:.6}"),
    );
    assert!(ok);
}

fn random_stream(rng: &mut ChaCha8Rng) -> EventStream {
    let w = rng.random_range(1..=128u16);
    let h = rng.random_range(1..=128u16);
    // log-uniform event count in [0, 1e5]
    let count = (10f64.powf(rng.random_range(0.0..5.0)) as usize).min(100_000) - 1;
    let burst = rng.random_range(0..4u64);
    let hot = rng.random_range(1..=(w as u32 * h as u32).min(64));
    let mut t = rng.random_range(0..1_000_000u64);
    let t_start = t;
    let events = (0..count)
        .map(|_| {
            t += match burst {
                0 => rng.random_range(0..3),
                1 => rng.random_range(0..1000),
                2 => {
                    if rng.random_bool(0.05) {
                        rng.random_range(1000..100_000)
                    } else {
                        0
                    }
                }
                _ => 1,
            };
            // half of the streams concentrate on a few pixels so many pixels get long event runs
            let (x, y) = if count.is_multiple_of(2) {
                let px = rng.random_range(0..hot);
                ((px % w as u32) as u16, ((px / w as u32) % h as u32) as u16)
            } else {
                (rng.random_range(0..w), rng.random_range(0..h))
            };
            let p = if rng.random() { Polarity::Positive } else { Polarity::Negative };
            Event::new(t, x, y, p)
        })
        .collect();
    EventStream::new(w, h, t_start, t + rng.random_range(0..10), events).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

#[test]
fn criterion_4_evrep_properties() {
    const STREAMS: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    let mut total_events = 0usize;
    for case in 0..STREAMS {
        let s = random_stream(&mut rng);
        total_events += s.len();
        let mode = if case % 2 == 0 { TemporalMode::Literal } else { TemporalMode::Conventional };
        let fast = compute_evrep_streaming(&s, mode);
        let reference = compute_evrep(&s, mode);
        let mut fail = |what: &str| failures.push(format!("case {case}: {what}"));

        let mut parity = true;
        for (&i, &c) in fast.e_i().values().iter().zip(fast.e_c().values()) {
            parity &= i.abs() <= c && (i as i64 - c as i64).rem_euclid(2) == 0;
        }
        if !parity {
            fail("parity / |E_I| <= E_C");
        }
        if fast.e_c().values().iter().sum::<f64>() as usize != s.len() {
            fail("sum E_C");
        }
        if fast.e_c() != reference.e_c() || fast.e_i() != reference.e_i() {
            fail("streaming E_C/E_I differ from reference");
        }
        if !fast
            .e_t()
            .values()
            .iter()
            .zip(reference.e_t().values())
            .all(|(&a, &b)| rel_close(a, b, 1e-9))
        {
            fail("streaming E_T differs from reference");
        }
        let shift = rng.random_range(1..1_000_000_000u64);
        if compute_evrep_streaming(&s.shifted(shift), mode) != fast {
            fail("time shift");
        }
        let rev = compute_evrep_streaming(&s.reverse(), mode);
        if rev.e_c() != fast.e_c() || rev.e_t() != fast.e_t() || rev.e_i() != &fast.e_i().negated().unwrap() {
            fail("reversal");
        }
        let turns = rng.random_range(0..4u8);
        if compute_evrep_streaming(&s.rotate90(turns).unwrap(), mode) != fast.rotate90(turns).unwrap() {
            fail("rotation");
        }
    }
    let ok = failures.is_empty();
    report(
        4,
        "EvRep properties",
        ok,
        format!("streams={STREAMS} events={total_events} failures={}", failures.len()),
    );
    for f in failures.iter().take(10) {
        println!("  {f}");
    }
    assert!(ok);
}

/// Exact rational oracle: sum((n d_i - s)^2) / (n^2 (n - 1)) for literal,
/// sum((m d_i - s)^2) / (m^2 (m - 1)) with m = n - 1 for conventional.
fn oracle_et(ts: &[u64], mode: TemporalMode) -> f64 {
    let n = ts.len() as i128;
    let d: Vec<i128> = ts.windows(2).map(|w| (w[1] - w[0]) as i128).collect();
    let s: i128 = d.iter().sum();
    let (div, denom) = match mode {
        TemporalMode::Literal if n >= 2 => (n, n - 1),
        TemporalMode::Conventional if n >= 3 => (n - 1, n - 2),
        _ => return 0.0,
    };
    let num: i128 = d.iter().map(|&x| (div * x - s) * (div * x - s)).sum();
    (num as f64 / (div * div * denom) as f64).sqrt()
}

#[test]
fn criterion_5_temporal_hand_cases() {
    let cases: [(&[u64], TemporalMode, f64); 6] = [
        (&[0, 10, 20, 30], TemporalMode::Literal, 2.5),
        (&[0, 10, 20, 30], TemporalMode::Conventional, 0.0),
        (&[0, 10, 30], TemporalMode::Literal, 50f64.sqrt()),
        (&[0, 10, 30], TemporalMode::Conventional, 50f64.sqrt()),
        (&[42], TemporalMode::Literal, 0.0),
        (&[42], TemporalMode::Conventional, 0.0),
    ];
    let mut ok = true;
    let mut lines = Vec::new();
    for (ts, mode, hand) in cases {
        let events = ts.iter().map(|&t| Event::new(t, 1, 0, Polarity::Positive)).collect();
        let s = EventStream::new(2, 1, 0, 100, events).unwrap();
        let oracle = oracle_et(ts, mode);
        let reference = compute_e_t(&s, mode).get(1, 0);
        let streaming = compute_evrep_streaming(&s, mode).e_t().get(1, 0);
        let close = |v: f64| v == oracle || rel_close(v, oracle, 1e-12);
        let case_ok = close(hand) && close(reference) && close(streaming);
        ok &= case_ok;
        lines.push(format!("{ts:?}/{mode:?}={reference}"));
    }
    report(5, "E_T hand oracle", ok, lines.join(" "));
    assert!(ok);
}

#[test]
fn criterion_6_throughput() {
    let start = Instant::now();
    let stream = synthetic_stream(10_000_000, 128, 128, 6);
    let reference = run_bench(&stream, BenchPath::Reference, TemporalMode::Literal, 3).unwrap();
    let streaming = run_bench(&stream, BenchPath::Streaming, TemporalMode::Literal, 3).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let speedup = streaming.throughput / reference.throughput;
    let ok = speedup >= 2.0 && streaming.throughput >= 1000.0 && elapsed < 60.0;
    report(
        6,
        "throughput",
        ok,
        format!(
            "streaming={:.0} kEv/s reference={:.0} kEv/s speedup={speedup:.2}x time={elapsed:.2}s",
            streaming.throughput, reference.throughput
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_7_noise_monotonicity() {
    let clean = lattice_corpus(PAIRS, DIM, DIM, THETA, K, 1);
    let identity = NoiseConfig::builder(77).build().unwrap();
    let identity_ok = clean.iter().all(|p| inject_noise(p.stream(), &identity) == *p.stream());
    let noise = NoiseConfig::builder(7).ba_rate(10.0).build().unwrap();
    let noisy: Vec<TrainingPair> = clean
        .iter()
        .map(|p| TrainingPair::new(p.f0().clone(), p.f1().clone(), inject_noise(p.stream(), &noise)).unwrap())
        .collect();
    let added: usize = noisy.iter().zip(&clean).map(|(a, b)| a.stream().len() - b.stream().len()).sum();
    let (c, n) = (fit(&clean), fit(&noisy));
    let ok = identity_ok && n.mae_heldout > c.mae_heldout;
    report(
        7,
        "noise monotonicity",
        ok,
        format!(
            "clean_mae={:.3e} noisy_mae={:.3e} added_events={added} identity={identity_ok}",
            c.mae_heldout, n.mae_heldout
        ),
    );
    assert!(ok);
}

fn every_byte_corruption_detected<T>(bytes: &[u8], rng: &mut ChaCha8Rng, parse: impl Fn(&[u8]) -> Result<T, evkit::Error>) -> bool {
    (0..bytes.len()).all(|i| {
        let mut bad = bytes.to_vec();
        bad[i] ^= rng.random_range(1..=255u8);
        parse(&bad).is_err()
    })
}

#[test]
fn criterion_8_format_conformance() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut round_trips = 0;
    let mut corruption_ok = true;
    let mut round_trip_ok = true;
    for _ in 0..100 {
        // EVT1
        let (w, h) = (rng.random_range(1..40u16), rng.random_range(1..40u16));
        let mut t = rng.random_range(0..u32::MAX as u64);
        let t_start = t;
        let events: Vec<Event> = (0..rng.random_range(0..60))
            .map(|_| {
                t += rng.random_range(0..1000);
                let p = if rng.random() { Polarity::Positive } else { Polarity::Negative };
                Event::new(t, rng.random_range(0..w), rng.random_range(0..h), p)
            })
            .collect();
        let s = EventStream::new(w, h, t_start, t + 5, events).unwrap();
        let bytes = write_binary_events(&s);
        let back = parse_binary_events(&bytes).unwrap();
        round_trip_ok &= back == s && write_binary_events(&back) == bytes;
        corruption_ok &= every_byte_corruption_detected(&bytes, &mut rng, parse_binary_events);

        // EVRP
        let (w, h) = (rng.random_range(1..12u16), rng.random_range(1..12u16));
        let channels = if rng.random() { 3 } else { 5 };
        let tensor = EvrpTensor {
            width: w,
            height: h,
            channels: (0..channels)
                .map(|_| (0..w as usize * h as usize).map(|_| rng.random_range(-1e3..1e3f32)).collect())
                .collect(),
        };
        let bytes = tensor.to_bytes();
        let back = EvrpTensor::from_bytes(&bytes).unwrap();
        round_trip_ok &= back == tensor && back.to_bytes() == bytes;
        corruption_ok &= every_byte_corruption_detected(&bytes, &mut rng, EvrpTensor::from_bytes);

        // ECAM
        let (w, h) = (rng.random_range(1..12u16), rng.random_range(1..12u16));
        let theta = ChannelField::new(
            w,
            h,
            ChannelKind::Theta,
            (0..w as usize * h as usize).map(|_| rng.random_range(0.0..0.5f32) as f64).collect(),
        )
        .unwrap();
        let model = CameraModel::new(theta, rng.random_range(0.0..2.0)).unwrap();
        let bytes = write_camera_model(&model);
        let back = parse_camera_model(&bytes).unwrap();
        round_trip_ok &= back == model && write_camera_model(&back) == bytes;
        corruption_ok &= every_byte_corruption_detected(&bytes, &mut rng, parse_camera_model);
        round_trips += 3;
    }
    let ok = round_trip_ok && corruption_ok;
    report(
        8,
        "format conformance",
        ok,
        format!("round_trips={round_trips} byte_exact={round_trip_ok} corruption_detected={corruption_ok}"),
    );
    assert!(ok);
}

#[test]
fn criterion_9_out_of_scope() {
    // Classification accuracy and optical-flow AEE need trained networks and
    // large datasets; criteria 1-8 stand in for them.
    println!("criterion 9 [downstream accuracy]: SKIP needs trained networks and datasets");
}
