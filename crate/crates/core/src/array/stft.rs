use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, Array3, ArrayView2, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::FrequencyGrid;

/// Frame layout of the short-time Fourier transform (periodic Hann window).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StftConfig {
    pub window_len: usize,
    pub hop: usize,
    pub fft_size: usize,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self { window_len: 128, hop: 64, fft_size: 128 }
    }
}

impl StftConfig {
    pub fn num_bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    /// Frames needed to cover `len` samples.
    pub fn frames_for(&self, len: usize) -> usize {
        let pad = self.window_len - self.hop;
        if len == 0 {
            return 0;
        }
        (len - 1 + pad) / self.hop + 1
    }

    /// Longest signal whose analysis yields exactly `frames` frames.
    pub fn len_for(&self, frames: usize) -> usize {
        (frames * self.hop).saturating_sub(self.window_len - self.hop)
    }
}

/// Multichannel STFT, indexed `(frame, bin, channel)`.
#[derive(Clone, Debug)]
pub struct StftSpectra {
    pub data: Array3<Complex64>,
    pub config: StftConfig,
    pub sample_rate: f64,
    pub signal_len: usize,
}

impl StftSpectra {
    pub fn num_frames(&self) -> usize {
        self.data.len_of(Axis(0))
    }

    pub fn num_bins(&self) -> usize {
        self.data.len_of(Axis(1))
    }

    pub fn num_channels(&self) -> usize {
        self.data.len_of(Axis(2))
    }

    pub fn grid(&self) -> FrequencyGrid {
        FrequencyGrid {
            sample_rate: self.sample_rate,
            fft_size: self.config.fft_size,
            speed_of_sound: super::SPEED_OF_SOUND,
        }
    }
}

/// Planned forward/inverse transforms for one [`StftConfig`].
pub struct Stft {
    config: StftConfig,
    window: Vec<f64>,
    ola_gain: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Stft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stft").field("config", &self.config).finish()
    }
}

impl Stft {
    pub fn new(config: StftConfig) -> Result<Self> {
        let StftConfig { window_len, hop, fft_size } = config;
        if window_len == 0 || hop == 0 || fft_size == 0 {
            return config_err("window, hop and FFT size must be positive");
        }
        if window_len % hop != 0 {
            return config_err(format!("hop {hop} does not divide window length {window_len}"));
        }
        if window_len > fft_size {
            return config_err(format!("window length {window_len} exceeds FFT size {fft_size}"));
        }
        let window: Vec<f64> =
            (0..window_len).map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / window_len as f64).cos()).collect();
        let mut sums = vec![0.0; hop];
        for (n, w) in window.iter().enumerate() {
            sums[n % hop] += w;
        }
        let ola_gain = sums[0];
        if sums.iter().any(|s| (s - ola_gain).abs() > 1e-9 * ola_gain.max(1e-300)) || ola_gain <= 0.0 {
            return config_err(format!("window {window_len} with hop {hop} violates constant overlap-add"));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            config,
            window,
            ola_gain,
            fwd: planner.plan_fft_forward(fft_size),
            inv: planner.plan_fft_inverse(fft_size),
        })
    }

    pub fn config(&self) -> StftConfig {
        self.config
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// Analyse equal-length channels.
    pub fn analyze(&self, channels: &[Vec<f64>], sample_rate: f64) -> Result<StftSpectra> {
        let len = channels.first().map_or(0, |c| c.len());
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::Shape("channels have different lengths".into()));
        }
        let frames = self.config.frames_for(len);
        let bins = self.config.num_bins();
        let mut data = Array3::zeros((frames, bins, channels.len()));
        for (c, x) in channels.iter().enumerate() {
            let s = self.analyze_channel(x);
            data.index_axis_mut(Axis(2), c).assign(&s);
        }
        Ok(StftSpectra { data, config: self.config, sample_rate, signal_len: len })
    }

    /// Single-channel analysis, `(frame, bin)`.
    pub fn analyze_channel(&self, x: &[f64]) -> Array2<Complex64> {
        let StftConfig { window_len, hop, fft_size } = self.config;
        let pad = window_len - hop;
        let frames = self.config.frames_for(x.len());
        let mut out = Array2::zeros((frames, self.config.num_bins()));
        let mut buf = vec![Complex64::new(0.0, 0.0); fft_size];
        for t in 0..frames {
            buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
            for n in 0..window_len {
                let s = (t * hop + n) as isize - pad as isize;
                if s >= 0 && (s as usize) < x.len() {
                    buf[n] = Complex64::new(x[s as usize] * self.window[n], 0.0);
                }
            }
            self.fwd.process(&mut buf);
            for (k, v) in out.row_mut(t).iter_mut().enumerate() {
                *v = buf[k];
            }
        }
        out
    }

    /// Overlap-add resynthesis of one channel given as `(frame, bin)`.
    pub fn synthesize_channel(&self, spec: ArrayView2<Complex64>, len: usize) -> Result<Vec<f64>> {
        let StftConfig { window_len, hop, fft_size } = self.config;
        if spec.ncols() != self.config.num_bins() {
            return Err(Error::Shape(format!("expected {} bins, got {}", self.config.num_bins(), spec.ncols())));
        }
        let pad = window_len - hop;
        let frames = spec.nrows();
        let mut out = vec![0.0; len];
        let mut buf = vec![Complex64::new(0.0, 0.0); fft_size];
        let half = fft_size / 2;
        for t in 0..frames {
            for k in 0..=half {
                buf[k] = spec[[t, k]];
            }
            buf[0].im = 0.0;
            if fft_size % 2 == 0 {
                buf[half].im = 0.0;
            }
            for k in 1..fft_size.div_ceil(2) {
                buf[fft_size - k] = buf[k].conj();
            }
            self.inv.process(&mut buf);
            for n in 0..window_len {
                let s = (t * hop + n) as isize - pad as isize;
                if s >= 0 && (s as usize) < len {
                    out[s as usize] += buf[n].re / (fft_size as f64 * self.ola_gain);
                }
            }
        }
        Ok(out)
    }

    pub fn synthesize(&self, spectra: &StftSpectra) -> Result<Vec<Vec<f64>>> {
        (0..spectra.num_channels())
            .map(|c| self.synthesize_channel(spectra.data.index_axis(Axis(2), c), spectra.signal_len))
            .collect()
    }
}

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
