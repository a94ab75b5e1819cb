//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Expected values come from independent oracles in this file or
//! in `common`, never from the code under test.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex;
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{cplane_message, ctx, iq_block, oracle_exponent, uplane_message};
use ofh_conformance::codec::{
    bfp_compress, bfp_decompress, decode_cplane, decode_uplane, encode_cplane, encode_uplane,
    EaxcId,
};
use ofh_conformance::cuplane::{
    build_dl_flow, detect_beam_direction, generate_grid, Allocation, BeamSpec, FlowContext, Plane,
    SlotKind, WaveformSpec, DEFAULT_RMS,
};
use ofh_conformance::ru::FaultToggle;
use ofh_conformance::runner::{
    run_campaign, LabProfile, TestReport, Testbed, TestbedConfig, Verdict,
};
use ofh_conformance::sim::NS_PER_MS;
use ofh_conformance::splane::{
    ptp_exchange, run_performance_test, PathModel, PerformanceConfig, PtpProfileConfig, SimClock,
    SimClockConfig, SyncVerdict, Topology,
};

const CATALOG_BUDGET: Duration = Duration::from_secs(300);
const CODEC_ROUND_TRIPS: u32 = 100_000;
const BFP_COMPONENTS: u32 = 1_000_000;
const DLM_MESSAGES: usize = 1_000;
const BEAM_COUNT: usize = 37;
const BEAM_TOLERANCE_DEG: f64 = 1.0;
/// U-Plane reception window, closed, as advance before the air interface.
const UP_WINDOW_NS: (i64, i64) = (25_000, 140_000);

struct Tally {
    failed: usize,
}

impl Tally {
    fn line(&mut self, name: &str, ok: bool, detail: impl AsRef<str>) {
        if !ok {
            self.failed += 1;
        }
        println!(
            "{} {name}: {}",
            if ok { "PASS" } else { "FAIL" },
            detail.as_ref()
        );
    }
}

fn full_run(profile: &LabProfile) -> TestReport {
    run_campaign(profile, &[])
        .expect("empty selection runs the catalog")
        .report
}

fn catalog_reproduction(t: &mut Tally) -> TestReport {
    let start = Instant::now();
    let report = full_run(&LabProfile::default());
    let took = start.elapsed();
    let s = report.body.summary;
    t.line(
        "catalog reproduction",
        s.total == 31 && s.pass == 31 && took < CATALOG_BUDGET,
        format!("{}/{} PASS in {:.1} s", s.pass, s.total, took.as_secs_f64()),
    );
    report
}

fn negative_fidelity(t: &mut Tally, clean: &TestReport) {
    for toggle in FaultToggle::ALL {
        let mut p = LabProfile::default();
        p.faults.toggles = vec![toggle];
        let faulted = full_run(&p);
        let target = toggle.mapped_case();
        let all_pass = faulted
            .body
            .records
            .iter()
            .all(|r| r.verdict == Verdict::Pass);
        let mut changed_elsewhere = Vec::new();
        let mut flipped = false;
        for (a, b) in clean.body.records.iter().zip(&faulted.body.records) {
            if a.id == target {
                flipped = a.metrics != b.metrics && b.faults == [toggle];
            } else if serde_json::to_value(a).unwrap() != serde_json::to_value(b).unwrap() {
                changed_elsewhere.push(a.id.clone());
            }
        }
        let diff: Vec<String> = clean
            .record(target)
            .zip(faulted.record(target))
            .map(|(a, b)| {
                a.metrics
                    .iter()
                    .filter(|(k, v)| b.metrics.get(*k) != Some(v))
                    .map(|(k, v)| {
                        format!(
                            "{k} {v} -> {}",
                            b.metrics.get(k).map_or("-".into(), |x| x.to_string())
                        )
                    })
                    .collect()
            })
            .unwrap_or_default();
        t.line(
            &format!("negative-case fidelity [{}]", toggle.name()),
            all_pass && flipped && changed_elsewhere.is_empty(),
            format!(
                "all pass {all_pass}; {target} {}; other records changed {changed_elsewhere:?}",
                if flipped {
                    diff.join(", ")
                } else {
                    "unchanged".into()
                }
            ),
        );
    }
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn codec_round_trips(t: &mut Tally) {
    let c = ctx();
    let cp = runner(CODEC_ROUND_TRIPS).run(&cplane_message(), |msg| {
        let bytes = encode_cplane(&msg, &c).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let mut back = decode_cplane(&bytes, &c).map_err(|e| TestCaseError::fail(e.to_string()))?;
        back.header.payload_size = 0;
        proptest::prop_assert_eq!(back, msg);
        Ok(())
    });
    let up = runner(CODEC_ROUND_TRIPS).run(&uplane_message(), |msg| {
        let bytes = encode_uplane(&msg, &c).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let mut back = decode_uplane(&bytes, &c).map_err(|e| TestCaseError::fail(e.to_string()))?;
        back.header.payload_size = 0;
        proptest::prop_assert_eq!(back, msg);
        Ok(())
    });
    let detail = match (&cp, &up) {
        (Ok(()), Ok(())) => {
            format!("{CODEC_ROUND_TRIPS} C-Plane and {CODEC_ROUND_TRIPS} U-Plane messages")
        }
        (Err(e), _) => format!("C-Plane: {e}"),
        (_, Err(e)) => format!("U-Plane: {e}"),
    };
    t.line("codec round-trip", cp.is_ok() && up.is_ok(), detail);
}

fn bfp_bound(t: &mut Tally) {
    let blocks = BFP_COMPONENTS.div_ceil(24);
    let mut components = 0u64;
    let mut exact_blocks = 0u64;
    let mut worst_ratio: f64 = 0.0;
    let mut failure = None;
    let strategy = iq_block();
    let mut gen = runner(blocks);
    for _ in 0..blocks {
        let block = strategy
            .new_tree(&mut gen)
            .expect("strategy generates")
            .current();
        let b = bfp_compress(&block);
        let e = oracle_exponent(&block);
        let back = bfp_decompress(&b);
        if b.exponent != e {
            failure = Some(format!("exponent {} where {e} is minimal", b.exponent));
            break;
        }
        for (x, y) in block.iter().zip(&back) {
            for (u, v) in [(x.re, y.re), (x.im, y.im)] {
                let err = (u as i32 - v as i32).abs();
                components += 1;
                let bound = 1i32 << e;
                worst_ratio = worst_ratio.max(err as f64 / bound as f64);
                if err >= bound || (e == 0 && err != 0) {
                    failure = Some(format!("component {u} -> {v} with exponent {e}"));
                }
            }
        }
        if e == 0 {
            exact_blocks += 1;
        }
        if failure.is_some() {
            break;
        }
    }
    t.line(
        "BFP error bound",
        failure.is_none() && components >= BFP_COMPONENTS as u64 && exact_blocks > 0,
        failure.unwrap_or_else(|| {
            format!(
                "{components} components, max |err| / 2^e = {worst_ratio:.4}, {exact_blocks} exact blocks at e = 0"
            )
        }),
    );
}

fn clock(phase: f64) -> SimClock {
    SimClock::new(SimClockConfig {
        phase_offset_ns: phase,
        freq_offset_ppb: 0.0,
        noise_std_ns: 0.0,
        rng_seed: 1,
    })
}

fn splane_symmetric(t: &mut Tally) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut bad = None;
    for _ in 0..1_000 {
        let offset = rng.random_range(-1_000_000i64..=1_000_000) as f64;
        let delay = rng.random_range(0u32..5_000_000) as f64;
        let at = rng.random_range(0u64..1_000_000_000_000);
        let r = ptp_exchange(
            &mut SimClock::ideal(),
            &mut clock(offset),
            &PathModel::symmetric(delay),
            &mut rng,
            at,
            1_000,
        );
        // offset = ((t2 - t1) - (t4 - t3)) / 2 from the raw timestamps.
        let oracle = ((r.t2 - r.t1) - (r.t4 - r.t3)) / 2.0;
        if oracle != offset || r.offset_est_ns != offset {
            bad = Some(format!(
                "offset {offset} delay {delay}: estimated {}",
                r.offset_est_ns
            ));
            break;
        }
    }
    t.line(
        "S-Plane symmetric offset recovery",
        bad.is_none(),
        bad.unwrap_or_else(|| "1000 exchanges recovered exactly".into()),
    );
}

/// Full device bench with an asymmetric C1 path.
fn te_on_bench(calibration_ns: f64) -> (SyncVerdict, f64) {
    let mut tb = Testbed::new(TestbedConfig {
        seed: 17,
        ..TestbedConfig::default()
    })
    .expect("bench builds");
    assert!(tb.establish(30 * 1_000 * NS_PER_MS), "management session");
    let path = Topology::C1.default_path().with_asymmetry(200.0);
    let out = run_performance_test(
        &mut tb,
        Topology::C1,
        calibration_ns,
        PtpProfileConfig::default(),
        path,
        &PerformanceConfig::default(),
    );
    (out.verdict, out.max_te_ns)
}

fn splane_asymmetry(t: &mut Tally) {
    let (v, te) = te_on_bench(0.0);
    t.line(
        "S-Plane asymmetry 200 ns gives TE 100 +/- 5 ns",
        v != SyncVerdict::Blocked && (te - 100.0).abs() <= 5.0,
        format!("max|TE| {te:.2} ns"),
    );
    let (v, te) = te_on_bench(100.0);
    t.line(
        "S-Plane calibration 100 ns gives TE <= 5 ns",
        v == SyncVerdict::Pass && te <= 5.0,
        format!("max|TE| {te:.2} ns"),
    );
}

fn bench_up(seed: u64) -> Testbed {
    let mut tb = Testbed::new(TestbedConfig {
        seed,
        ..TestbedConfig::default()
    })
    .expect("bench builds");
    tb.bring_up(PtpProfileConfig::default(), Topology::C1.default_path())
        .expect("O-RU reaches carriers active");
    tb
}

fn flow_ctx(tb: &Testbed) -> FlowContext {
    let cfg = tb.ru.config();
    FlowContext::new(
        cfg.carrier.clone(),
        *tb.ru.codec(),
        EaxcId::new(0, 0, 0, 0, cfg.eaxc_layout),
        cfg.window,
    )
}

fn first_dl_slot(tb: &Testbed) -> u64 {
    let c = &tb.ru.config().carrier;
    c.next_slot_of(tb.now() / c.slot_duration_ns() + 4, SlotKind::Downlink)
}

fn beams(t: &mut Tally) {
    let mut tb = bench_up(23);
    let carrier = tb.ru.config().carrier.clone();
    let alloc = Allocation {
        num_symbols: 2,
        ..Allocation::full(&carrier)
    };
    let grid = generate_grid(&carrier, &WaveformSpec::downlink(), &alloc, DEFAULT_RMS).unwrap();
    let table: Vec<(u16, f64)> = tb
        .ru
        .config()
        .beam_table
        .entries()
        .map(|e| (e.beam_id, e.azimuth_deg))
        .collect();
    let mut c = flow_ctx(&tb);
    let mut slot = first_dl_slot(&tb);
    let mut plan = Vec::new();
    for (id, az) in &table {
        let msgs = build_dl_flow(&mut c, &grid, &alloc, slot, &BeamSpec::Id(*id), true).unwrap();
        tb.queue_fronthaul(msgs);
        plan.push((slot, *id, *az));
        slot = carrier.next_slot_of(slot + 1, SlotKind::Downlink);
    }
    tb.advance_to(carrier.slot_start_ns(slot + 2) + NS_PER_MS);
    let mut worst: f64 = 0.0;
    let mut misses = Vec::new();
    for (slot, id, az) in &plan {
        match detect_beam_direction(&tb.ru.rf().port_signals(*slot, 256)) {
            Some(d) if (d - az).abs() <= BEAM_TOLERANCE_DEG => worst = worst.max((d - az).abs()),
            other => misses.push(format!("beam {id} at {az}: {other:?}")),
        }
    }
    t.line(
        "beam directions within 1 degree",
        plan.len() == BEAM_COUNT && misses.is_empty(),
        if misses.is_empty() {
            format!("{} beams, worst error {worst:.2} deg", plan.len())
        } else {
            misses.join("; ")
        },
    );
}

fn dlm_conservation(t: &mut Tally) {
    let mut tb = bench_up(29);
    let carrier = tb.ru.config().carrier.clone();
    let alloc = Allocation::full(&carrier);
    let grid = generate_grid(&carrier, &WaveformSpec::downlink(), &alloc, DEFAULT_RMS).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xd1a);
    // Both boundaries and their outside neighbours, then uniform draws
    // spanning late, on-time and early.
    let (lo, hi) = UP_WINDOW_NS;
    let mut advances = vec![lo, hi, lo - 1, hi + 1];
    while advances.len() < DLM_MESSAGES {
        advances.push(rng.random_range(0..=400_000));
    }
    let before = *tb.ru.counters();
    let mut c = flow_ctx(&tb);
    let mut slot = first_dl_slot(&tb);
    let mut sent = Vec::new();
    let mut next = advances.iter();
    'slots: loop {
        let msgs = build_dl_flow(&mut c, &grid, &alloc, slot, &BeamSpec::Id(19), true).unwrap();
        let mut queued = Vec::new();
        for mut m in msgs {
            if m.plane == Plane::User {
                let Some(adv) = next.next() else {
                    tb.queue_fronthaul(queued);
                    break 'slots;
                };
                m.retime(*adv);
                sent.push((m.abs_slot, m.symbol, *adv));
            }
            queued.push(m);
        }
        tb.queue_fronthaul(queued);
        slot = carrier.next_slot_of(slot + 1, SlotKind::Downlink);
    }
    tb.advance_to(carrier.slot_start_ns(slot + 2) + NS_PER_MS);
    let after = *tb.ru.counters();
    let got = (
        after.uplane.received - before.uplane.received,
        after.uplane.dropped_early - before.uplane.dropped_early,
        after.uplane.dropped_late - before.uplane.dropped_late,
    );
    let expected = sent.iter().fold((0, 0, 0), |(r, e, l), (_, _, a)| {
        if *a > hi {
            (r, e + 1, l)
        } else if *a < lo {
            (r, e, l + 1)
        } else {
            (r + 1, e, l)
        }
    });
    let radiating: BTreeSet<(u64, u8)> = tb
        .ru
        .rf()
        .emissions()
        .iter()
        .filter(|e| {
            e.samples
                .iter()
                .any(|s| Complex::new(s.re as f64, s.im as f64).norm_sqr() > 0.0)
        })
        .map(|e| (e.abs_slot, e.symbol))
        .collect();
    let leaked = sent
        .iter()
        .filter(|(s, y, a)| (*a < lo || *a > hi) && radiating.contains(&(*s, *y)))
        .count();
    let silent = sent
        .iter()
        .filter(|(s, y, a)| (lo..=hi).contains(a) && !radiating.contains(&(*s, *y)))
        .count();
    let total = got.0 + got.1 + got.2;
    t.line(
        "DLM conservation",
        sent.len() == DLM_MESSAGES && total == sent.len() as u64 && got == expected && leaked == 0 && silent == 0,
        format!(
            "{} sent; received/early/late {got:?} against {expected:?}; out-of-window with energy {leaked}; in-window silent {silent}",
            sent.len()
        ),
    );
}

fn repeatability(t: &mut Tally, first: &TestReport) {
    let second = full_run(&LabProfile::default());
    let (a, b) = (first.body_bytes(), second.body_bytes());
    t.line(
        "repeatability",
        a == b,
        format!(
            "{} and {} body bytes, identical {}",
            a.len(),
            b.len(),
            a == b
        ),
    );
}

fn main() -> ExitCode {
    let mut t = Tally { failed: 0 };
    let clean = catalog_reproduction(&mut t);
    negative_fidelity(&mut t, &clean);
    codec_round_trips(&mut t);
    bfp_bound(&mut t);
    splane_symmetric(&mut t);
    splane_asymmetry(&mut t);
    beams(&mut t);
    dlm_conservation(&mut t);
    repeatability(&mut t, &clean);
    if t.failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{} criteria failed", t.failed);
        ExitCode::FAILURE
    }
}
