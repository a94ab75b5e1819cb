//! Fronthaul cases. Each brings the O-RU up (session, lock, carriers),
//! drives timed C/U-Plane flows, and judges the air interface and the
//! counters read back over the management plane.

use num_complex::Complex;

use super::{Blocked, CaseRun};
use crate::codec::{decode_uplane, EaxcId, UplaneMessage};
use crate::cuplane::{
    analyze_dl_output, analyze_prach, analyze_ul_output, build_dl_flow, build_prach_st3_flow,
    build_ul_flow, detect_beam_direction, dlm_advances, evaluate_dlm, generate_grid,
    prach_injection, reassemble_uplane, steering_weights, Allocation, BeamSpec, Counters,
    DlmStimulus, FlowContext, Modulation, Plane, PrachConfig, ResourceGrid, SlotKind, TimedMessage,
    WaveformSpec, DEFAULT_RMS, PRACH_PEAK_THRESHOLD, SYMBOLS_PER_SLOT,
};
use crate::mplane::model::COUNTERS;
use crate::mplane::Datastore;
use crate::ru::FronthaulCounters;
use crate::runner::testbed::Testbed;
use crate::sim::NS_PER_MS;
use crate::splane::{PtpProfileConfig, Topology};

const BENCH: &str = "bench";
/// Steered table beam used where a case needs any beam.
const STEERED_BEAM: u16 = 19;
/// Samples per port used for direction finding.
const BEAM_SAMPLES: usize = 256;
/// Slots of lead time between now and the first stimulated slot.
const LEAD_SLOTS: u64 = 4;
const AZIMUTH_TOLERANCE_DEG: f64 = 1.0;
/// Messages per delay-management case: one per symbol of a slot.
const SYMBOLS: usize = SYMBOLS_PER_SLOT as usize;

fn up(run: &mut CaseRun) -> Result<Testbed, Blocked> {
    let mut tb = run.bench(BENCH)?;
    tb.bring_up(PtpProfileConfig::default(), Topology::C1.default_path())
        .map_err(|e| run.blocked(&tb, BENCH, e))?;
    Ok(tb)
}

fn ctx(tb: &Testbed, ru_port: u16) -> FlowContext {
    let cfg = tb.ru.config();
    FlowContext::new(
        cfg.carrier.clone(),
        *tb.ru.codec(),
        EaxcId::new(0, 0, 0, ru_port, cfg.eaxc_layout),
        cfg.window,
    )
}

fn next_slot(tb: &Testbed, kind: SlotKind) -> u64 {
    let c = &tb.ru.config().carrier;
    c.next_slot_of(tb.now() / c.slot_duration_ns() + LEAD_SLOTS, kind)
}

/// Runs past the end of `slot` plus uplink processing.
fn settle(tb: &mut Testbed, slot: u64) {
    let c = &tb.ru.config().carrier;
    let end = c.slot_start_ns(slot + 2) + NS_PER_MS;
    tb.advance_to(end);
}

fn flow<T>(
    run: &mut CaseRun,
    tb: &Testbed,
    r: Result<T, crate::cuplane::CuError>,
) -> Result<T, Blocked> {
    r.map_err(|e| run.blocked(tb, BENCH, format!("building stimulus: {e}")))
}

fn grid(
    run: &mut CaseRun,
    tb: &Testbed,
    spec: &WaveformSpec,
    alloc: &Allocation,
) -> Result<ResourceGrid, Blocked> {
    let g = generate_grid(&tb.ru.config().carrier, spec, alloc, DEFAULT_RMS);
    flow(run, tb, g)
}

/// Fronthaul counters as reported over the management plane.
fn counters(run: &mut CaseRun, tb: &mut Testbed) -> Result<FronthaulCounters, Blocked> {
    let tree = run.get(tb, BENCH, COUNTERS)?;
    let mut ds = Datastore::new();
    if let Some(n) = tree.child(COUNTERS) {
        ds.set_subtree(COUNTERS, n.clone());
    }
    FronthaulCounters::from_datastore(&ds)
        .ok_or_else(|| run.blocked(tb, BENCH, "counters missing from reply"))
}

fn uplink_messages(tb: &mut Testbed) -> Vec<UplaneMessage> {
    let codec = *tb.ru.codec();
    tb.take_uplink()
        .into_iter()
        .filter_map(|(_, b)| decode_uplane(&b, &codec).ok())
        .collect()
}

fn counters_json(c: &Counters) -> serde_json::Value {
    serde_json::json!({
        "received": c.received,
        "dropped_early": c.dropped_early,
        "dropped_late": c.dropped_late,
    })
}

/// Downlink over one slot; returns the normalized error and detected azimuth.
fn downlink(
    run: &mut CaseRun,
    tb: &mut Testbed,
    label: &str,
    spec: &WaveformSpec,
    alloc: &Allocation,
    beam: &BeamSpec,
) -> Result<(f64, Option<f64>), Blocked> {
    let slot = next_slot(tb, SlotKind::Downlink);
    let reference = grid(run, tb, spec, alloc)?;
    let mut c = ctx(tb, 0);
    let msgs = build_dl_flow(&mut c, &reference, alloc, slot, beam, true);
    let msgs = flow(run, tb, msgs)?;
    tb.queue_fronthaul(msgs);
    settle(tb, slot);
    let m = analyze_dl_output(tb.ru.rf(), &reference, slot, run.profile.error_threshold);
    run.check(
        &format!("{label} downlink error"),
        m.normalized_error < run.profile.error_threshold,
        format!(
            "{:.3e} over {} symbols",
            m.normalized_error, m.counters.received
        ),
    );
    run.metric(&format!("{label}_dl_error"), m.normalized_error);
    Ok((m.normalized_error, m.detected_azimuth_deg))
}

/// Uplink over one slot against an injected receive grid.
fn uplink(
    run: &mut CaseRun,
    tb: &mut Testbed,
    label: &str,
    spec: &WaveformSpec,
    alloc: &Allocation,
    beam: &BeamSpec,
) -> Result<f64, Blocked> {
    let slot = next_slot(tb, SlotKind::Uplink);
    let reference = grid(run, tb, spec, alloc)?;
    tb.ru.rf_mut().inject_grid(slot, &reference);
    let mut c = ctx(tb, 0);
    let msgs = build_ul_flow(&mut c, alloc, slot, beam, true);
    let msgs = flow(run, tb, msgs)?;
    tb.take_uplink();
    tb.queue_fronthaul(msgs);
    settle(tb, slot);
    let received = uplink_messages(tb);
    let expected = alloc.num_symbols as usize;
    run.check(
        &format!("{label} uplink messages"),
        received.len() == expected,
        format!("{} of {expected}", received.len()),
    );
    let fh = counters(run, tb)?;
    let rebuilt = reassemble_uplane(&received, tb.ru.codec());
    let m = analyze_ul_output(
        rebuilt.as_ref(),
        &reference,
        fh.cplane,
        run.profile.error_threshold,
    );
    run.check(
        &format!("{label} uplink error"),
        m.normalized_error < run.profile.error_threshold,
        format!("{:.3e}", m.normalized_error),
    );
    run.metric(&format!("{label}_ul_error"), m.normalized_error);
    Ok(m.normalized_error)
}

fn table_azimuth(tb: &Testbed, beam_id: u16) -> Option<f64> {
    tb.ru
        .config()
        .beam_table
        .get(beam_id)
        .map(|e| e.azimuth_deg)
}

fn check_azimuth(
    run: &mut CaseRun,
    name: &str,
    detected: Option<f64>,
    expected: Option<f64>,
) -> bool {
    let ok = matches!((detected, expected), (Some(d), Some(e)) if (d - e).abs() <= AZIMUTH_TOLERANCE_DEG);
    run.check(
        name,
        ok,
        format!("detected {detected:?}, table {expected:?}"),
    )
}

pub fn base_dl_ul(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = up(run)?;
    let alloc = Allocation::full(&tb.ru.config().carrier);
    let (_, az) = downlink(
        run,
        &mut tb,
        "base",
        &WaveformSpec::downlink(),
        &alloc,
        &BeamSpec::Id(STEERED_BEAM),
    )?;
    let expected = table_azimuth(&tb, STEERED_BEAM);
    check_azimuth(run, "beam direction", az, expected);
    run.metric("azimuth_deg", az);
    uplink(
        run,
        &mut tb,
        "base",
        &WaveformSpec::uplink(),
        &alloc,
        &BeamSpec::Id(STEERED_BEAM),
    )?;
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn resource_allocation(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = up(run)?;
    let qam64 = WaveformSpec {
        modulation: Modulation::Qam64,
        ..WaveformSpec::downlink()
    };
    let dl = Allocation {
        start_prb: 10,
        num_prb: 50,
        start_symbol: 2,
        num_symbols: 8,
        every_other_rb: false,
    };
    downlink(
        run,
        &mut tb,
        "partial",
        &qam64,
        &dl,
        &BeamSpec::Id(STEERED_BEAM),
    )?;
    let ul = Allocation {
        start_prb: 70,
        num_prb: 60,
        start_symbol: 0,
        num_symbols: 14,
        every_other_rb: false,
    };
    uplink(
        run,
        &mut tb,
        "partial",
        &WaveformSpec::uplink(),
        &ul,
        &BeamSpec::Id(STEERED_BEAM),
    )?;
    let silent = tb
        .ru
        .rf()
        .emissions()
        .iter()
        .all(|e| e.start_prb == dl.start_prb && dl.symbols().contains(&e.symbol));
    run.check("emission confined to allocation", silent, "");
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn rb_parameter(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = up(run)?;
    let alloc = Allocation {
        start_prb: 1,
        num_prb: 66,
        start_symbol: 0,
        num_symbols: 14,
        every_other_rb: true,
    };
    downlink(
        run,
        &mut tb,
        "every_other_rb",
        &WaveformSpec::downlink(),
        &alloc,
        &BeamSpec::Id(STEERED_BEAM),
    )?;
    let odd_only = tb
        .ru
        .rf()
        .emissions()
        .iter()
        .all(|e| e.every_other_rb && e.start_prb == 1);
    run.check("emission on alternate blocks", odd_only, "");
    uplink(
        run,
        &mut tb,
        "every_other_rb",
        &WaveformSpec::uplink(),
        &alloc,
        &BeamSpec::Id(STEERED_BEAM),
    )?;
    run.collect(&tb, BENCH);
    Ok(())
}

fn port_powers(signals: &[Vec<Complex<f64>>]) -> Vec<f64> {
    signals
        .iter()
        .map(|p| p.iter().map(|x| x.norm_sqr()).sum())
        .collect()
}

pub fn no_beamforming_dl(run: &mut CaseRun) -> Result<(), Blocked> {
    const PORT: u16 = 3;
    let mut tb = up(run)?;
    let alloc = Allocation::full(&tb.ru.config().carrier);
    let slot = next_slot(&tb, SlotKind::Downlink);
    let reference = grid(run, &tb, &WaveformSpec::downlink(), &alloc)?;
    let mut c = ctx(&tb, PORT);
    let msgs = build_dl_flow(&mut c, &reference, &alloc, slot, &BeamSpec::None, true);
    let msgs = flow(run, &tb, msgs)?;
    tb.queue_fronthaul(msgs);
    settle(&mut tb, slot);
    let m = analyze_dl_output(tb.ru.rf(), &reference, slot, run.profile.error_threshold);
    run.check(
        "downlink error",
        m.normalized_error < run.profile.error_threshold,
        format!("{:.3e}", m.normalized_error),
    );
    let signals = tb.ru.rf().port_signals(slot, BEAM_SAMPLES);
    let active: Vec<usize> = port_powers(&signals)
        .iter()
        .enumerate()
        .filter(|(_, p)| **p > 0.0)
        .map(|(i, _)| i)
        .collect();
    run.check(
        "single port radiates",
        active == [PORT as usize],
        format!("{active:?}"),
    );
    let dir = detect_beam_direction(&signals);
    run.check("no dominant beam", dir.is_none(), format!("{dir:?}"));
    run.metric("active_ports", active);
    run.metric("dl_error", m.normalized_error);
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn no_beamforming_ul(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = up(run)?;
    let alloc = Allocation::full(&tb.ru.config().carrier);
    uplink(
        run,
        &mut tb,
        "port",
        &WaveformSpec::uplink(),
        &alloc,
        &BeamSpec::None,
    )?;
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn weight_beamforming(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = up(run)?;
    let carrier = tb.ru.config().carrier.clone();
    let alloc = Allocation {
        num_symbols: 2,
        ..Allocation::full(&carrier)
    };
    let reference = grid(run, &tb, &WaveformSpec::downlink(), &alloc)?;
    let elements = tb.ru.config().beam_table.elements;
    let targets: Vec<(u16, f64)> = tb
        .ru
        .config()
        .beam_table
        .entries()
        .map(|e| (e.beam_id, e.azimuth_deg))
        .collect();
    let mut c = ctx(&tb, 0);
    let mut slot = next_slot(&tb, SlotKind::Downlink);
    let mut plan = Vec::new();
    let mut msgs: Vec<TimedMessage> = Vec::new();
    for (beam_id, az) in &targets {
        let beam = BeamSpec::Weights {
            beam_id: *beam_id,
            weights: steering_weights(elements, *az),
        };
        let m = build_dl_flow(&mut c, &reference, &alloc, slot, &beam, true);
        msgs.extend(flow(run, &tb, m)?);
        plan.push((slot, *az));
        slot = carrier.next_slot_of(slot + 1, SlotKind::Downlink);
    }
    tb.queue_fronthaul(msgs);
    settle(&mut tb, plan.last().map_or(slot, |p| p.0));
    let mut worst: f64 = 0.0;
    let mut hits = 0;
    for (slot, az) in &plan {
        let det = detect_beam_direction(&tb.ru.rf().port_signals(*slot, BEAM_SAMPLES));
        match det {
            Some(d) if (d - az).abs() <= AZIMUTH_TOLERANCE_DEG => {
                hits += 1;
                worst = worst.max((d - az).abs());
            }
            Some(d) => worst = worst.max((d - az).abs()),
            None => worst = f64::INFINITY,
        }
    }
    run.check(
        "every weight vector steers within tolerance",
        !plan.is_empty() && hits == plan.len(),
        format!(
            "{hits} of {} within {AZIMUTH_TOLERANCE_DEG} deg",
            plan.len()
        ),
    );
    run.metric("beams", plan.len());
    run.metric(
        "max_azimuth_error_deg",
        if worst.is_finite() { Some(worst) } else { None },
    );
    run.collect(&tb, BENCH);
    Ok(())
}

/// Downlink slot whose U-Plane messages are retimed to `advances`.
fn dl_retimed(
    run: &mut CaseRun,
    tb: &mut Testbed,
    advances: &[i64],
) -> Result<(u64, ResourceGrid), Blocked> {
    let alloc = Allocation::full(&tb.ru.config().carrier);
    let slot = next_slot(tb, SlotKind::Downlink);
    let reference = grid(run, tb, &WaveformSpec::downlink(), &alloc)?;
    let mut c = ctx(tb, 0);
    let msgs = build_dl_flow(
        &mut c,
        &reference,
        &alloc,
        slot,
        &BeamSpec::Id(STEERED_BEAM),
        true,
    );
    let mut msgs = flow(run, tb, msgs)?;
    for (m, adv) in msgs
        .iter_mut()
        .filter(|m| m.plane == Plane::User)
        .zip(advances)
    {
        m.retime(*adv);
    }
    tb.queue_fronthaul(msgs);
    settle(tb, slot);
    Ok((slot, reference))
}

/// One single-symbol uplink C-Plane message per advance, symbol by symbol.
fn ul_retimed(run: &mut CaseRun, tb: &mut Testbed, advances: &[i64]) -> Result<u64, Blocked> {
    let carrier = tb.ru.config().carrier.clone();
    let slot = next_slot(tb, SlotKind::Uplink);
    let full = Allocation::full(&carrier);
    let reference = grid(run, tb, &WaveformSpec::uplink(), &full)?;
    tb.ru.rf_mut().inject_grid(slot, &reference);
    let mut c = ctx(tb, 0);
    let mut msgs = Vec::new();
    for (sym, adv) in advances.iter().enumerate() {
        let alloc = Allocation {
            start_symbol: sym as u8,
            num_symbols: 1,
            ..full
        };
        let m = build_ul_flow(&mut c, &alloc, slot, &BeamSpec::Id(STEERED_BEAM), true);
        for mut m in flow(run, tb, m)? {
            m.retime(*adv);
            msgs.push(m);
        }
    }
    tb.take_uplink();
    tb.queue_fronthaul(msgs);
    settle(tb, slot);
    Ok(slot)
}

fn check_counters(run: &mut CaseRun, name: &str, got: Counters, expected: Counters, sent: usize) {
    run.check(
        name,
        got == expected,
        format!("reported {:?}, expected {:?}", got, expected),
    );
    run.check(
        "every message accounted for",
        got.total() == sent as u64,
        format!("{} of {sent}", got.total()),
    );
    run.metric("sent", sent);
    run.metric("counters", counters_json(&got));
}

pub fn dlm_dl_positive(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = up(run)?;
    let window = tb.ru.config().window;
    let n = SYMBOLS;
    let advances = dlm_advances(&window, Plane::User, DlmStimulus::InWindow, n);
    let (slot, reference) = dl_retimed(run, &mut tb, &advances)?;
    let fh = counters(run, &mut tb)?;
    check_counters(
        run,
        "user plane window accounting",
        fh.uplane,
        evaluate_dlm(&window, Plane::User, &advances),
        n,
    );
    let m = analyze_dl_output(tb.ru.rf(), &reference, slot, run.profile.error_threshold);
    run.check(
        "in-window data transmitted",
        m.normalized_error < run.profile.error_threshold,
        format!("{:.3e}", m.normalized_error),
    );
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn dlm_ul_positive(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = up(run)?;
    let window = tb.ru.config().window;
    let n = SYMBOLS;
    let advances = dlm_advances(&window, Plane::Control, DlmStimulus::InWindow, n);
    ul_retimed(run, &mut tb, &advances)?;
    let fh = counters(run, &mut tb)?;
    check_counters(
        run,
        "control plane window accounting",
        fh.cplane,
        evaluate_dlm(&window, Plane::Control, &advances),
        n,
    );
    let ul = uplink_messages(&mut tb);
    run.check(
        "uplink answered every symbol",
        ul.len() == n,
        format!("{} of {n}", ul.len()),
    );
    run.check(
        "uplink count reported",
        fh.ul_uplane_sent == n as u64,
        fh.ul_uplane_sent.to_string(),
    );
    run.collect(&tb, BENCH);
    Ok(())
}

fn out_of_window(window: &crate::cuplane::DelayWindow, plane: Plane, n: usize) -> Vec<i64> {
    let late = n / 2;
    let mut v = dlm_advances(window, plane, DlmStimulus::Late, late);
    v.extend(dlm_advances(window, plane, DlmStimulus::Early, n - late));
    v
}

pub fn dlm_dl_negative(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = up(run)?;
    let window = tb.ru.config().window;
    let n = SYMBOLS;
    let advances = out_of_window(&window, Plane::User, n);
    let (slot, _) = dl_retimed(run, &mut tb, &advances)?;
    let fh = counters(run, &mut tb)?;
    check_counters(
        run,
        "user plane window accounting",
        fh.uplane,
        evaluate_dlm(&window, Plane::User, &advances),
        n,
    );
    let energy: f64 = tb
        .ru
        .rf()
        .emissions_in(slot)
        .flat_map(|e| e.samples.iter())
        .map(|s| (s.re as f64).powi(2) + (s.im as f64).powi(2))
        .fold(0.0, |a, b| a + b);
    run.check(
        "no energy from dropped data",
        energy == 0.0,
        format!("{energy}"),
    );
    run.metric("emitted_energy", energy);
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn dlm_ul_negative(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = up(run)?;
    let window = tb.ru.config().window;
    let n = SYMBOLS;
    let advances = out_of_window(&window, Plane::Control, n);
    ul_retimed(run, &mut tb, &advances)?;
    let fh = counters(run, &mut tb)?;
    check_counters(
        run,
        "control plane window accounting",
        fh.cplane,
        evaluate_dlm(&window, Plane::Control, &advances),
        n,
    );
    let ul = uplink_messages(&mut tb);
    run.check(
        "no uplink for dropped control",
        ul.is_empty() && fh.ul_uplane_sent == 0,
        format!("{} messages", ul.len()),
    );
    run.collect(&tb, BENCH);
    Ok(())
}

pub fn prach(run: &mut CaseRun) -> Result<(), Blocked> {
    let mut tb = up(run)?;
    let carrier = tb.ru.config().carrier.clone();
    let cfg = PrachConfig::default();
    let slot = next_slot(&tb, SlotKind::Uplink);
    let injected = prach_injection(&carrier, &cfg, DEFAULT_RMS);
    let injected = flow(run, &tb, injected)?;
    tb.ru.rf_mut().inject_grid(slot, &injected);
    let mut c = ctx(&tb, 0);
    let msgs = build_prach_st3_flow(&mut c, &cfg, slot, true);
    let msgs = flow(run, &tb, msgs)?;
    tb.take_uplink();
    tb.queue_fronthaul(msgs);
    settle(&mut tb, slot);
    let received = uplink_messages(&mut tb);
    run.check(
        "occasion returned",
        received.len() == cfg.num_symbols as usize,
        format!("{} of {} symbols", received.len(), cfg.num_symbols),
    );
    let rebuilt = reassemble_uplane(&received, tb.ru.codec());
    let r = analyze_prach(rebuilt.as_ref(), &cfg);
    run.check(
        "preamble detected",
        r.peak >= PRACH_PEAK_THRESHOLD,
        format!("peak {:.4} at lag {}", r.peak, r.lag),
    );
    run.metric("peak", r.peak);
    run.metric("lag", r.lag);
    run.collect(&tb, BENCH);
    Ok(())
}
