use std::f64::consts::PI;

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::array::{ArrayGeometry, FrequencyGrid, Stft, StftSpectra};
use crate::error::{config, Error, Result};
use crate::io::read_wav;
use crate::sph::{mode_count, sph_harmonics};

use super::rng::{complex_gaussian, stream_rng, Stream};
use super::synth::{plane_wave_steering, point_source_steering, DiffuseNoise, ReverbField};
use super::{SceneConfig, SourceSpectrum};

/// Exact second-order quantities of a rendered scene.
///
/// Source PSDs are `|S_l|^2` per frame; for point sources this is the source strength,
/// and the stem at the origin is `S_l exp(-ik r_l) / (4 pi r_l)`.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    /// `(frame, bin, source)`.
    pub source_psd: Array3<f64>,
    /// Target `Gamma_vu` (ACN, real) per frame and bin, `(frame, bin, coeff)`.
    pub reverb_gamma: Array3<f64>,
    /// Target `Phi_r = Gamma_00 / sqrt(4 pi)`, `(frame, bin)`.
    pub reverb_total: Array2<f64>,
    /// Realized `Phi_r` from the drawn gains, `(frame, bin)`.
    pub reverb_total_realized: Array2<f64>,
    /// Realized `Gamma_vu` averaged over frames, `(bin, coeff)`.
    pub reverb_gamma_realized: Array2<Complex64>,
    /// Diffuse noise PSD per bin.
    pub noise_psd: Vec<f64>,
    /// White sensor noise PSD per mic and bin.
    pub sensor_psd: f64,
    /// Direct-path source signals at the array origin, `(frame, bin, source)`.
    pub stems: Array3<Complex64>,
    /// Pressure an omni mic at the origin would record without the array, `(frame, bin)`.
    pub origin_mixture: Array2<Complex64>,
}

impl GroundTruth {
    pub fn num_frames(&self) -> usize {
        self.source_psd.len_of(Axis(0))
    }

    pub fn source(&self, l: usize) -> Array2<f64> {
        self.source_psd.index_axis(Axis(2), l).to_owned()
    }

    /// Noise PSD broadcast to `(frame, bin)`.
    pub fn noise(&self) -> Array2<f64> {
        let f = self.num_frames();
        Array2::from_shape_fn((f, self.noise_psd.len()), |(_, b)| self.noise_psd[b])
    }
}

#[derive(Clone, Debug)]
pub struct RenderedScene {
    pub spectra: StftSpectra,
    pub truth: GroundTruth,
}

/// Per-frame source spectra `(frame, bin, source)`.
fn source_spectra(cfg: &SceneConfig, stft: &Stft, grid: &FrequencyGrid) -> Result<Array3<Complex64>> {
    let bins = grid.num_bins();
    let mut wavs = Vec::with_capacity(cfg.sources.len());
    for s in &cfg.sources {
        if let SourceSpectrum::Wav { path, gain, channel } = &s.spectrum {
            let (chans, sr) = read_wav(path)?;
            if (sr as f64 - grid.sample_rate).abs() > 1e-9 {
                return config(format!(
                    "{}: sample rate {sr} Hz, scene runs at {} Hz",
                    path.display(),
                    grid.sample_rate
                ));
            }
            let x = chans.get(*channel).ok_or_else(|| {
                Error::Config(format!("{}: no channel {channel} ({} channels)", path.display(), chans.len()))
            })?;
            let x: Vec<f64> = x.iter().map(|v| v * gain).collect();
            wavs.push(Some(stft.analyze_channel(&x)));
        } else {
            wavs.push(None);
        }
    }
    let frames = match cfg.frames {
        Some(f) => f,
        None => wavs.iter().flatten().map(|w| w.nrows()).max().unwrap_or(0),
    };
    let nyq = bins - 1;
    let mut out = Array3::zeros((frames, bins, cfg.sources.len()));
    for (l, s) in cfg.sources.iter().enumerate() {
        let power_at = |t: usize, b: usize| -> f64 {
            if b == 0 || b == nyq {
                return 0.0;
            }
            let f = grid.frequency(b);
            match &s.spectrum {
                SourceSpectrum::Flat { power } => *power,
                SourceSpectrum::Shaped { power, slope_db_per_octave, low_hz, high_hz } => {
                    if low_hz.is_some_and(|lo| f < lo) || high_hz.is_some_and(|hi| f > hi) {
                        0.0
                    } else {
                        power * 10f64.powf(slope_db_per_octave * (f / 1000.0).log2() / 10.0)
                    }
                }
                SourceSpectrum::Sparse { power, block_frames, block_bins, activity } => {
                    let keys = [l as u64, (t / block_frames) as u64, (b / block_bins) as u64];
                    let u: f64 = stream_rng(cfg.seed, Stream::Activity, &keys).gen();
                    if u < *activity {
                        *power
                    } else {
                        0.0
                    }
                }
                SourceSpectrum::Wav { .. } => 0.0,
            }
        };
        match &wavs[l] {
            Some(w) => {
                let n = frames.min(w.nrows());
                for t in 0..n {
                    for b in 0..bins {
                        out[[t, b, l]] = w[[t, b]];
                    }
                }
            }
            None => {
                for t in 0..frames {
                    for b in 0..bins {
                        let p = power_at(t, b);
                        if p > 0.0 {
                            let mut rng = stream_rng(cfg.seed, Stream::SourcePhase, &[l as u64, t as u64, b as u64]);
                            let phase: f64 = rng.gen_range(0.0..2.0 * PI);
                            out[[t, b, l]] = Complex64::from_polar(p.sqrt(), phase);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

struct BinRender {
    pressure: Array2<Complex64>,
    stems: Array2<Complex64>,
    origin: Vec<Complex64>,
    reverb_realized: Vec<f64>,
    gamma_realized: Vec<Complex64>,
}

/// Renders microphone spectra and ground truth.
///
/// All synthetic components vanish at DC and Nyquist; WAV sources keep their full spectrum.
pub fn render_scene(
    cfg: &SceneConfig,
    geometry: &ArrayGeometry,
    stft: &Stft,
    grid: &FrequencyGrid,
) -> Result<RenderedScene> {
    cfg.validate(geometry.radius())?;
    if grid.fft_size != stft.config().fft_size {
        return Err(Error::Shape(format!(
            "grid has {} FFT points, STFT has {}",
            grid.fft_size,
            stft.config().fft_size
        )));
    }
    let src = source_spectra(cfg, stft, grid)?;
    let (frames, bins, nsrc) = src.dim();
    let q = geometry.num_mics();
    let nyq = bins - 1;
    let seed = cfg.seed;

    let reverb = match cfg.reverb.as_ref().filter(|r| r.enabled) {
        Some(r) => Some((ReverbField::new(r, seed)?, 10f64.powf(-r.drr_db / 10.0))),
        None => None,
    };
    let reverb_y: Vec<Vec<Complex64>> = reverb
        .as_ref()
        .map(|(f, _)| f.directions.iter().map(|d| sph_harmonics(f.order as usize, d.theta, d.phi)).collect())
        .unwrap_or_default();
    let ncoef = reverb.as_ref().map_or(1, |(f, _)| mode_count(f.order as usize));

    let noise_psd: Vec<f64> = (0..bins)
        .map(|b| match cfg.noise.as_ref().filter(|n| n.enabled) {
            Some(n) if b != 0 && b != nyq && n.band_hz.map_or(true, |hi| grid.frequency(b) <= hi) => n.psd,
            _ => 0.0,
        })
        .collect();
    let noise = cfg.noise.as_ref().filter(|n| n.enabled).map(|n| DiffuseNoise::new(n.num_plane_waves, seed));
    let sensor_psd = cfg.sensor_noise.as_ref().map_or(0.0, |s| s.psd);

    let per_bin: Vec<BinRender> = (0..bins)
        .into_par_iter()
        .map(|b| -> Result<BinRender> {
            let k = grid.wavenumber(b);
            let mut steer = Vec::with_capacity(nsrc);
            let mut origin_gain = Vec::with_capacity(nsrc);
            for s in &cfg.sources {
                let spec = s.spec();
                match spec.range_m {
                    None => {
                        steer.push(plane_wave_steering(spec.direction(), k, geometry)?);
                        origin_gain.push(Complex64::new(1.0, 0.0));
                    }
                    Some(r) => {
                        steer.push(point_source_steering(spec.direction(), r, k, geometry)?);
                        origin_gain.push(Complex64::from_polar(1.0 / (4.0 * PI * r), -k * r));
                    }
                }
            }
            let rev_steer = match &reverb {
                Some((f, _)) => f.steering(k, geometry)?,
                None => Vec::new(),
            };
            let noise_steer = match &noise {
                Some(n) if noise_psd[b] > 0.0 => n.steering(k, geometry),
                _ => Vec::new(),
            };
            let mut pressure = Array2::zeros((frames, q));
            let mut stems = Array2::zeros((frames, nsrc));
            let mut origin = vec![Complex64::new(0.0, 0.0); frames];
            let mut reverb_realized = vec![0.0; frames];
            let mut gamma_realized = vec![Complex64::new(0.0, 0.0); ncoef];
            for t in 0..frames {
                let mut row = pressure.row_mut(t);
                for l in 0..nsrc {
                    let s = src[[t, b, l]];
                    if s == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for (p, h) in row.iter_mut().zip(&steer[l]) {
                        *p += s * h;
                    }
                    stems[[t, l]] = s * origin_gain[l];
                    origin[t] += s * origin_gain[l];
                }
                if let Some((f, rho)) = &reverb {
                    let mut c = vec![Complex64::new(0.0, 0.0); f.len()];
                    for l in 0..nsrc {
                        let s = src[[t, b, l]];
                        if s == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        for (cr, g) in c.iter_mut().zip(f.draw_gains(seed, l, t, b, *rho)) {
                            *cr += s * g;
                        }
                    }
                    let mut total = 0.0;
                    for (r, cr) in c.iter().enumerate() {
                        if *cr == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        for (p, h) in row.iter_mut().zip(&rev_steer[r]) {
                            *p += cr * h;
                        }
                        let pw = cr.norm_sqr();
                        total += pw;
                        for (g, y) in gamma_realized.iter_mut().zip(&reverb_y[r]) {
                            *g += y.conj() * pw;
                        }
                        origin[t] += cr;
                    }
                    reverb_realized[t] = total / (4.0 * PI);
                }
                if let Some(n) = noise.as_ref().filter(|_| noise_psd[b] > 0.0) {
                    for (g, h) in n.draw_gains(seed, t, b, noise_psd[b]).iter().zip(&noise_steer) {
                        for (p, hv) in row.iter_mut().zip(h) {
                            *p += g * hv;
                        }
                        origin[t] += g;
                    }
                }
                if sensor_psd > 0.0 && b != 0 && b != nyq {
                    let mut rng = stream_rng(seed, Stream::SensorNoise, &[t as u64, b as u64]);
                    for p in row.iter_mut() {
                        *p += complex_gaussian(&mut rng, sensor_psd);
                    }
                }
            }
            if frames > 0 {
                for g in gamma_realized.iter_mut() {
                    *g /= frames as f64;
                }
            }
            Ok(BinRender { pressure, stems, origin, reverb_realized, gamma_realized })
        })
        .collect::<Result<_>>()?;

    let mut data = Array3::zeros((frames, bins, q));
    let mut stems = Array3::zeros((frames, bins, nsrc));
    let mut origin_mixture = Array2::zeros((frames, bins));
    let mut reverb_total_realized = Array2::zeros((frames, bins));
    let mut reverb_gamma_realized = Array2::zeros((bins, ncoef));
    for (b, r) in per_bin.into_iter().enumerate() {
        data.index_axis_mut(Axis(1), b).assign(&r.pressure);
        stems.index_axis_mut(Axis(1), b).assign(&r.stems);
        for t in 0..frames {
            origin_mixture[[t, b]] = r.origin[t];
            reverb_total_realized[[t, b]] = r.reverb_realized[t];
        }
        for (i, g) in r.gamma_realized.into_iter().enumerate() {
            reverb_gamma_realized[[b, i]] = g;
        }
    }

    let source_psd = src.mapv(|s| s.norm_sqr());
    let mut reverb_gamma = Array3::zeros((frames, bins, ncoef));
    let mut reverb_total = Array2::zeros((frames, bins));
    if let Some((f, rho)) = &reverb {
        for t in 0..frames {
            for b in 0..bins {
                let p: f64 = rho * source_psd.slice(ndarray::s![t, b, ..]).sum();
                for (i, g) in f.gamma.iter().enumerate() {
                    reverb_gamma[[t, b, i]] = p * g;
                }
                reverb_total[[t, b]] = p * f.gamma[0] / (4.0 * PI).sqrt();
            }
        }
    }

    let spectra = StftSpectra {
        data,
        config: stft.config(),
        sample_rate: grid.sample_rate,
        signal_len: stft.config().len_for(frames),
    };
    Ok(RenderedScene {
        spectra,
        truth: GroundTruth {
            source_psd,
            reverb_gamma,
            reverb_total,
            reverb_total_realized,
            reverb_gamma_realized,
            noise_psd,
            sensor_psd,
            stems,
            origin_mixture,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::StftConfig;
    use crate::scene::{NoiseConfig, ReverbConfig, SceneSource};

    fn scene(seed: u64) -> SceneConfig {
        SceneConfig {
            sources: vec![
                SceneSource { theta: 1.0, phi: 0.5, range_m: None, spectrum: SourceSpectrum::Flat { power: 1.0 } },
                SceneSource { theta: 2.0, phi: 3.0, range_m: Some(1.5), spectrum: SourceSpectrum::Flat { power: 2.0 } },
            ],
            reverb: Some(ReverbConfig { enabled: true, drr_db: 3.0, profile: vec![], num_plane_waves: None }),
            noise: Some(NoiseConfig { enabled: true, psd: 0.5, band_hz: Some(1000.0), num_plane_waves: 64 }),
            sensor_noise: None,
            frames: Some(6),
            seed,
        }
    }

    #[test]
    fn deterministic() {
        let g = ArrayGeometry::default_rigid32();
        let stft = Stft::new(StftConfig::default()).unwrap();
        let grid = FrequencyGrid::new(16000.0, 128).unwrap();
        let a = render_scene(&scene(5), &g, &stft, &grid).unwrap();
        let b = render_scene(&scene(5), &g, &stft, &grid).unwrap();
        let c = render_scene(&scene(6), &g, &stft, &grid).unwrap();
        assert_eq!(a.spectra.data, b.spectra.data);
        assert_ne!(a.spectra.data, c.spectra.data);
        assert_eq!(a.spectra.data.dim(), (6, 65, 32));
        assert!(a.truth.source_psd.iter().all(|v| *v >= 0.0));
        assert_eq!(a.truth.noise_psd[0], 0.0);
        assert_eq!(a.truth.noise_psd[8], 0.5);
        assert_eq!(a.truth.noise_psd[9], 0.0);
    }
}
