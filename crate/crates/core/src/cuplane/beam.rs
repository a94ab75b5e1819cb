//! Beam tables and beam-direction detection for a uniform linear array at
//! half-wavelength spacing.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::error::CuError;
use crate::codec::Iq;

/// Beam id 0 means "no beamforming".
pub const NO_BEAMFORMING: u16 = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamEntry {
    pub beam_id: u16,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    /// `[re, im]` pairs, one per array element.
    #[serde(with = "weights_serde")]
    pub weights: Vec<Complex<f64>>,
}

mod weights_serde {
    use num_complex::Complex;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(w: &[Complex<f64>], s: S) -> Result<S::Ok, S::Error> {
        w.iter()
            .map(|c| [c.re, c.im])
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex<f64>>, D::Error> {
        Ok(Vec::<[f64; 2]>::deserialize(d)?
            .into_iter()
            .map(|[re, im]| Complex::new(re, im))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamTableDocument {
    pub synthetic: bool,
    pub elements: usize,
    pub beams: Vec<BeamEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamTable {
    pub synthetic: bool,
    pub elements: usize,
    entries: BTreeMap<u16, BeamEntry>,
}

/// Weights steering a half-wavelength ULA toward `azimuth_deg`, unit total power.
pub fn steering_weights(elements: usize, azimuth_deg: f64) -> Vec<Complex<f64>> {
    let s = azimuth_deg.to_radians().sin();
    let norm = (elements as f64).sqrt();
    (0..elements)
        .map(|n| Complex::from_polar(1.0, -std::f64::consts::PI * n as f64 * s) / norm)
        .collect()
}

pub fn normalize_weights(w: &[Complex<f64>]) -> Option<Vec<Complex<f64>>> {
    let p: f64 = w.iter().map(|c| c.norm_sqr()).sum();
    if !p.is_finite() || p <= 0.0 {
        return None;
    }
    let k = p.sqrt();
    Some(w.iter().map(|c| c / k).collect())
}

/// Fixed-point weights for the inline beam-weight extension. The vector is
/// scaled so its largest component uses the full 16-bit range; receivers
/// renormalize to unit power.
pub fn quantize_weights(w: &[Complex<f64>]) -> Vec<Iq> {
    let peak = w
        .iter()
        .flat_map(|c| [c.re.abs(), c.im.abs()])
        .fold(0.0, f64::max);
    if peak == 0.0 {
        return vec![Iq::new(0, 0); w.len()];
    }
    let k = i16::MAX as f64 / peak;
    w.iter()
        .map(|c| Iq::new((c.re * k).round() as i16, (c.im * k).round() as i16))
        .collect()
}

pub fn dequantize_weights(w: &[Iq]) -> Option<Vec<Complex<f64>>> {
    normalize_weights(
        &w.iter()
            .map(|c| Complex::new(c.re as f64, c.im as f64))
            .collect::<Vec<_>>(),
    )
}

impl BeamTable {
    pub const SYNTHETIC_ELEMENTS: usize = 32;

    /// Steering beams 1..=37 covering -45..=45 degrees in 2.5 degree steps.
    pub fn synthetic() -> Self {
        let elements = Self::SYNTHETIC_ELEMENTS;
        let entries = (1..=37u16)
            .map(|id| {
                let az = -45.0 + 2.5 * (id - 1) as f64;
                (
                    id,
                    BeamEntry {
                        beam_id: id,
                        azimuth_deg: az,
                        elevation_deg: 0.0,
                        weights: steering_weights(elements, az),
                    },
                )
            })
            .collect();
        Self {
            synthetic: true,
            elements,
            entries,
        }
    }

    pub fn from_document(doc: BeamTableDocument) -> Result<Self, CuError> {
        let mut entries = BTreeMap::new();
        for mut e in doc.beams {
            if e.beam_id == NO_BEAMFORMING || e.beam_id > 0x7FFF {
                return Err(CuError::BeamTable(format!(
                    "beam id {} is reserved or too wide",
                    e.beam_id
                )));
            }
            if e.weights.len() != doc.elements {
                return Err(CuError::BeamTable(format!(
                    "beam {} has {} weights, expected {}",
                    e.beam_id,
                    e.weights.len(),
                    doc.elements
                )));
            }
            e.weights = normalize_weights(&e.weights).ok_or_else(|| {
                CuError::BeamTable(format!("beam {} has a zero weight vector", e.beam_id))
            })?;
            if entries.insert(e.beam_id, e).is_some() {
                return Err(CuError::BeamTable("duplicate beam id".into()));
            }
        }
        Ok(Self {
            synthetic: doc.synthetic,
            elements: doc.elements,
            entries,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, CuError> {
        let doc: BeamTableDocument =
            serde_json::from_str(text).map_err(|e| CuError::BeamTable(e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn load(path: &Path) -> Result<Self, CuError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CuError::BeamTable(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_document(&self) -> BeamTableDocument {
        BeamTableDocument {
            synthetic: self.synthetic,
            elements: self.elements,
            beams: self.entries.values().cloned().collect(),
        }
    }

    pub fn get(&self, beam_id: u16) -> Option<&BeamEntry> {
        self.entries.get(&beam_id)
    }

    pub fn entries(&self) -> impl Iterator<Item = &BeamEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Relative spread below which the array factor counts as flat.
const FLATNESS_TOLERANCE: f64 = 1e-9;

/// Power array factor summed over samples:
/// `sum_k |sum_n s_n[k] exp(j pi n sin(theta))|^2`.
pub fn array_factor(port_signals: &[Vec<Complex<f64>>], theta_deg: f64) -> f64 {
    let s = theta_deg.to_radians().sin();
    let steer: Vec<_> = (0..port_signals.len())
        .map(|n| Complex::from_polar(1.0, std::f64::consts::PI * n as f64 * s))
        .collect();
    let samples = port_signals.iter().map(Vec::len).max().unwrap_or(0);
    (0..samples)
        .map(|k| {
            port_signals
                .iter()
                .zip(&steer)
                .map(|(p, a)| p.get(k).copied().unwrap_or_default() * a)
                .sum::<Complex<f64>>()
                .norm_sqr()
        })
        .sum()
}

/// Azimuth maximizing the array factor on a 1 degree grid over [-90, 90].
/// Ties go to the smaller |theta|, then to the negative side. `None` means
/// no dominant beam: zero input or a flat array factor.
pub fn detect_beam_direction(port_signals: &[Vec<Complex<f64>>]) -> Option<f64> {
    let grid: Vec<(i32, f64)> = (-90..=90)
        .map(|d| (d, array_factor(port_signals, d as f64)))
        .collect();
    let max = grid.iter().map(|g| g.1).fold(0.0, f64::max);
    let min = grid.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
    if max.is_nan() || max <= 0.0 || (max - min) <= FLATNESS_TOLERANCE * max {
        return None;
    }
    let tie = max * (1.0 - 1e-12);
    grid.iter()
        .filter(|g| g.1 >= tie)
        .min_by_key(|g| (g.0.abs(), g.0))
        .map(|g| g.0 as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(weights: &[Complex<f64>], x: &[Complex<f64>]) -> Vec<Vec<Complex<f64>>> {
        weights
            .iter()
            .map(|w| x.iter().map(|s| w * s).collect())
            .collect()
    }

    /// Brute force in the sin(theta) domain at 0.01 degree resolution,
    /// then snapped to the nearest integer degree.
    fn oracle_peak(weights: &[Complex<f64>]) -> f64 {
        let mut best = (f64::MIN, 0.0);
        for i in -9000..=9000 {
            let th = i as f64 / 100.0;
            let s = th.to_radians().sin();
            let af: Complex<f64> = weights
                .iter()
                .enumerate()
                .map(|(n, w)| w * Complex::from_polar(1.0, std::f64::consts::PI * n as f64 * s))
                .sum();
            if af.norm() > best.0 {
                best = (af.norm(), th);
            }
        }
        best.1
    }

    #[test]
    fn conjugate_steering_vector_for_30_degrees() {
        let sig = apply(&steering_weights(32, 30.0), &[Complex::new(1.0, 0.0)]);
        let az = detect_beam_direction(&sig).unwrap();
        assert!((az - 30.0).abs() <= 1.0);
    }

    #[test]
    fn broadside_for_in_phase_ports() {
        let sig = vec![vec![Complex::new(1.0, 0.0)]; 32];
        assert_eq!(detect_beam_direction(&sig), Some(0.0));
    }

    #[test]
    fn single_port_or_zero_input_has_no_dominant_beam() {
        let mut sig = vec![vec![Complex::new(0.0, 0.0)]; 32];
        assert_eq!(detect_beam_direction(&sig), None);
        sig[5][0] = Complex::new(3.0, -1.0);
        assert_eq!(detect_beam_direction(&sig), None);
    }

    #[test]
    fn every_synthetic_beam_detected_within_one_degree() {
        let t = BeamTable::synthetic();
        let x = [Complex::new(0.7, 0.2), Complex::new(-0.3, 0.9)];
        for e in t.entries() {
            let az = detect_beam_direction(&apply(&e.weights, &x)).unwrap();
            assert!(
                (az - e.azimuth_deg).abs() <= 1.0,
                "beam {} az {az}",
                e.beam_id
            );
            assert!((az - oracle_peak(&e.weights)).abs() <= 1.0);
        }
    }

    #[test]
    fn synthetic_weights_have_unit_power() {
        for e in BeamTable::synthetic().entries() {
            let p: f64 = e.weights.iter().map(|c| c.norm_sqr()).sum();
            assert!((p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ingest_normalizes_and_rejects_zero() {
        let doc = BeamTableDocument {
            synthetic: false,
            elements: 2,
            beams: vec![BeamEntry {
                beam_id: 3,
                azimuth_deg: 0.0,
                elevation_deg: 0.0,
                weights: vec![Complex::new(3.0, 0.0), Complex::new(0.0, 4.0)],
            }],
        };
        let t = BeamTable::from_json(&serde_json::to_string(&doc).unwrap()).unwrap();
        let w = &t.get(3).unwrap().weights;
        assert!((w[0].re - 0.6).abs() < 1e-12 && (w[1].im - 0.8).abs() < 1e-12);

        let mut zero = doc.clone();
        zero.beams[0].weights = vec![Complex::new(0.0, 0.0); 2];
        assert!(BeamTable::from_document(zero).is_err());
        let mut reserved = doc;
        reserved.beams[0].beam_id = 0;
        assert!(BeamTable::from_document(reserved).is_err());
    }

    #[test]
    fn shipped_table_matches_generator() {
        let text = include_str!("../../data/beam_table_synthetic.json");
        let shipped = BeamTable::from_json(text).unwrap();
        let gen = BeamTable::synthetic();
        assert!(shipped.synthetic);
        assert_eq!(shipped.len(), gen.len());
        for (a, b) in shipped.entries().zip(gen.entries()) {
            assert_eq!(a.beam_id, b.beam_id);
            assert_eq!(a.azimuth_deg, b.azimuth_deg);
            for (x, y) in a.weights.iter().zip(&b.weights) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn quantized_weights_round_trip() {
        let w = steering_weights(32, -17.5);
        let back = dequantize_weights(&quantize_weights(&w)).unwrap();
        for (a, b) in w.iter().zip(&back) {
            assert!((a - b).norm() < 1e-4);
        }
        let sig = apply(&back, &[Complex::new(1.0, 0.0)]);
        assert!((detect_beam_direction(&sig).unwrap() + 17.5).abs() <= 1.0);
    }
}
