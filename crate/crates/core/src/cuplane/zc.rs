//! Zadoff-Chu PRACH preambles and normalized correlation.

use num_complex::Complex;

/// `x_u(n) = exp(-j pi u n (n + 1) / N)` for odd length `N`.
pub fn zadoff_chu(root: u32, length: usize) -> Vec<Complex<f64>> {
    (0..length)
        .map(|n| {
            let arg = (root as u64 * n as u64 * (n as u64 + 1)) % (2 * length as u64);
            Complex::from_polar(1.0, -std::f64::consts::PI * arg as f64 / length as f64)
        })
        .collect()
}

/// Best normalized correlation of `reference` against every window of
/// `rx` of the same length. Returns `(peak, lag)`; the peak is 1.0 for an
/// exact scaled copy and 0.0 when nothing overlaps.
pub fn normalized_correlation(rx: &[Complex<f64>], reference: &[Complex<f64>]) -> (f64, usize) {
    let n = reference.len();
    if n == 0 || rx.len() < n {
        return (0.0, 0);
    }
    let ref_norm = reference.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let mut best = (0.0, 0);
    for lag in 0..=rx.len() - n {
        let win = &rx[lag..lag + n];
        let win_norm = win.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if win_norm == 0.0 || ref_norm == 0.0 {
            continue;
        }
        let dot: Complex<f64> = win.iter().zip(reference).map(|(a, b)| a * b.conj()).sum();
        let c = dot.norm() / (win_norm * ref_norm);
        if c > best.0 {
            best = (c, lag);
        }
    }
    best
}
