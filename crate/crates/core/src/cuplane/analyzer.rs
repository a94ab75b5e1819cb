//! Virtual analyzer: waveform match, beam direction, PRACH detection.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::beam::detect_beam_direction;
use super::dlm::Counters;
use super::flow::PrachConfig;
use super::grid::{section_prbs, ResourceGrid};
use super::rf::VirtualRf;
use super::zc::{normalized_correlation, zadoff_chu};
use crate::codec::{bfp_decompress, CodecContext, Iq, UplaneMessage, RES_PER_PRB};

/// Pass threshold for the BFP-quantized path.
pub const DEFAULT_ERROR_THRESHOLD: f64 = 1e-3;
/// PRACH passes when the correlation peak reaches this fraction of ideal.
pub const PRACH_PEAK_THRESHOLD: f64 = 0.9;
/// REs per port used for beam detection.
pub const BEAM_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementResult {
    pub normalized_error: f64,
    pub detected_azimuth_deg: Option<f64>,
    pub counters: Counters,
    pub verdict: Verdict,
}

fn to_f64(s: &Iq) -> Complex<f64> {
    Complex::new(s.re as f64, s.im as f64)
}

/// `sum |g*emit - ref|^2 / sum |ref|^2` with `g` scaling the emission to
/// the reference power. Silent emission against a non-zero reference is 1.
pub fn normalized_error(emitted: &ResourceGrid, reference: &ResourceGrid) -> f64 {
    let e: Vec<_> = emitted.samples.iter().flatten().map(to_f64).collect();
    let r: Vec<_> = reference.samples.iter().flatten().map(to_f64).collect();
    let pe: f64 = e.iter().map(|c| c.norm_sqr()).sum();
    let pr: f64 = r.iter().map(|c| c.norm_sqr()).sum();
    if pr == 0.0 {
        return if pe == 0.0 { 0.0 } else { 1.0 };
    }
    let g = if pe == 0.0 { 0.0 } else { (pr / pe).sqrt() };
    let n = e.len().max(r.len());
    let zero = Complex::new(0.0, 0.0);
    let err: f64 = (0..n)
        .map(|i| {
            (g * e.get(i).copied().unwrap_or(zero) - r.get(i).copied().unwrap_or(zero)).norm_sqr()
        })
        .sum();
    err / pr
}

pub fn analyze_dl_output(
    rf: &VirtualRf,
    reference: &ResourceGrid,
    abs_slot: u64,
    threshold: f64,
) -> MeasurementResult {
    let received = rf.emissions_in(abs_slot).count() as u64;
    let counters = Counters {
        received,
        ..Counters::default()
    };
    let Some(emitted) = rf.emitted_grid(abs_slot, reference.n_prb) else {
        return MeasurementResult {
            normalized_error: 1.0,
            detected_azimuth_deg: None,
            counters,
            verdict: Verdict::Fail,
        };
    };
    let normalized_error = normalized_error(&emitted, reference);
    MeasurementResult {
        normalized_error,
        detected_azimuth_deg: detect_beam_direction(&rf.port_signals(abs_slot, BEAM_SAMPLES)),
        counters,
        verdict: if normalized_error < threshold {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    }
}

/// Grid rebuilt from uplink U-Plane messages of one slot, keyed by symbol id.
pub fn reassemble_uplane(messages: &[UplaneMessage], ctx: &CodecContext) -> Option<ResourceGrid> {
    if messages.is_empty() {
        return None;
    }
    let mut grid = ResourceGrid::zeros(ctx.n_prb);
    for m in messages {
        let Some(row) = grid.samples.get_mut(m.timing.symbol_id as usize) else {
            continue;
        };
        for s in &m.sections {
            for (prb, block) in section_prbs(s.start_prb, s.prbs.len(), s.rb_flag).zip(&s.prbs) {
                for (i, v) in bfp_decompress(block).into_iter().enumerate() {
                    if let Some(slot) = row.get_mut(prb * RES_PER_PRB + i) {
                        *slot = v;
                    }
                }
            }
        }
    }
    Some(grid)
}

pub fn analyze_ul_output(
    received: Option<&ResourceGrid>,
    reference: &ResourceGrid,
    counters: Counters,
    threshold: f64,
) -> MeasurementResult {
    let normalized_error = received.map_or(1.0, |g| normalized_error(g, reference));
    MeasurementResult {
        normalized_error,
        detected_azimuth_deg: None,
        counters,
        verdict: if received.is_some() && normalized_error < threshold {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrachResult {
    /// Worst per-symbol correlation peak over the occasion.
    pub peak: f64,
    pub lag: usize,
    pub verdict: Verdict,
}

pub fn analyze_prach(received: Option<&ResourceGrid>, prach: &PrachConfig) -> PrachResult {
    let fail = PrachResult {
        peak: 0.0,
        lag: 0,
        verdict: Verdict::Fail,
    };
    let Some(grid) = received else {
        return fail;
    };
    let zc = zadoff_chu(prach.root, prach.length);
    let mut worst: Option<(f64, usize)> = None;
    for sym in prach.allocation().symbols() {
        let rx: Vec<_> = grid
            .prb_span(sym, prach.start_prb, prach.num_prb)
            .iter()
            .map(to_f64)
            .collect();
        let c = normalized_correlation(&rx, &zc);
        if worst.is_none_or(|w| c.0 < w.0) {
            worst = Some(c);
        }
    }
    let Some((peak, lag)) = worst else {
        return fail;
    };
    PrachResult {
        peak,
        lag,
        verdict: if peak >= PRACH_PEAK_THRESHOLD {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
    }
}
