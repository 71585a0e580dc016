//! Segment-averaged periodograms.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Hann-windowed, 50%-overlap periodogram accumulator for one segment length.
///
/// Estimates follow the analytic convention: two-sided, symmetrized, per unit angular frequency,
/// so white noise of per-sample variance v at step dt reads v*dt.
pub struct Welch {
    seg: usize,
    dt: f64,
    window: Vec<f64>,
    norm: f64,
    fft: Arc<dyn Fft<f64>>,
}

impl Welch {
    pub fn new(seg: usize, dt: f64) -> Self {
        assert!(seg >= 8, "segment too short");
        let window: Vec<f64> = (0..seg)
            .map(|i| {
                let s = (std::f64::consts::PI * i as f64 / seg as f64).sin();
                s * s
            })
            .collect();
        let power: f64 = window.iter().map(|w| w * w).sum();
        let fft = FftPlanner::new().plan_fft_forward(seg);
        Welch { seg, dt, window, norm: dt / power, fft }
    }

    pub fn segment_len(&self) -> usize {
        self.seg
    }

    /// Number of positive-frequency bins kept (DC dropped, Nyquist kept).
    pub fn bins(&self) -> usize {
        self.seg / 2
    }

    pub fn freqs(&self) -> Vec<f64> {
        let df = std::f64::consts::TAU / (self.seg as f64 * self.dt);
        (1..=self.bins()).map(|k| k as f64 * df).collect()
    }

    /// Segments that fit in a series of this length.
    pub fn segments_in(&self, len: usize) -> usize {
        if len < self.seg {
            0
        } else {
            (len - self.seg) / (self.seg / 2) + 1
        }
    }

    /// Add the periodograms of every segment of `x` into `acc`; returns the segment count.
    pub fn accumulate(&self, x: &[f64], acc: &mut [f64]) -> usize {
        assert_eq!(acc.len(), self.bins());
        let hop = self.seg / 2;
        let count = self.segments_in(x.len());
        let mut buf = vec![Complex64::new(0.0, 0.0); self.seg];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        for s in 0..count {
            let chunk = &x[s * hop..s * hop + self.seg];
            let mean = chunk.iter().sum::<f64>() / self.seg as f64;
            for ((b, &v), &w) in buf.iter_mut().zip(chunk).zip(&self.window) {
                *b = Complex64::new((v - mean) * w, 0.0);
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for (a, b) in acc.iter_mut().zip(&buf[1..=self.bins()]) {
                *a += b.norm_sqr() * self.norm;
            }
        }
        count
    }

    /// Averaged estimate for a single series.
    pub fn estimate(&self, x: &[f64]) -> (Vec<f64>, usize) {
        let mut acc = vec![0.0; self.bins()];
        let n = self.accumulate(x, &mut acc);
        if n > 0 {
            acc.iter_mut().for_each(|a| *a /= n as f64);
        }
        (acc, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn white_noise_level() {
        let dt = 0.1;
        let sigma = 2.0;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = Normal::new(0.0, sigma).unwrap();
        let x: Vec<f64> = (0..1 << 16).map(|_| d.sample(&mut rng)).collect();
        let w = Welch::new(1024, dt);
        let (psd, n) = w.estimate(&x);
        assert_eq!(n, 127);
        // interior bins only; the mean removal depresses the lowest bin
        let inner = &psd[4..psd.len() - 1];
        let mean = inner.iter().sum::<f64>() / inner.len() as f64;
        assert!((mean / (sigma * sigma * dt) - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn sine_lands_on_its_bin() {
        let dt = 0.5;
        let seg = 256;
        let w = Welch::new(seg, dt);
        let f = w.freqs()[19];
        let x: Vec<f64> = (0..4096).map(|i| (f * i as f64 * dt).cos()).collect();
        let (psd, _) = w.estimate(&x);
        let peak = psd.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(peak, 19);
        // Parseval: two-sided area equals the mean square, 1/2
        let df = w.freqs()[0];
        let area = 2.0 * psd.iter().sum::<f64>() * df / std::f64::consts::TAU;
        assert!((area - 0.5).abs() < 1e-3, "{area}");
    }
}
