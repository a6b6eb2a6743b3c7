//! WAV, CSV, JSON and raw STFT file formats.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::array::{StftConfig, StftSpectra};
use crate::error::{Error, Result};

fn ctx(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Write channels as 32-bit float WAV.
pub fn write_wav(path: &Path, channels: &[Vec<f64>], sample_rate: u32) -> Result<()> {
    let spec = hound::WavSpec {
        channels: channels.len() as u16,
        sample_rate,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let len = channels.first().map_or(0, |c| c.len());
    if channels.iter().any(|c| c.len() != len) {
        return Err(Error::Shape("channels have different lengths".into()));
    }
    let mut w = hound::WavWriter::create(path, spec)?;
    for i in 0..len {
        for c in channels {
            w.write_sample(c[i] as f32)?;
        }
    }
    w.finalize()?;
    Ok(())
}

/// Read a WAV file (16/24/32-bit integer or 32-bit float) as channels scaled to [-1, 1).
pub fn read_wav(path: &Path) -> Result<(Vec<Vec<f64>>, u32)> {
    let f = File::open(path).map_err(|e| ctx(path, e))?;
    let mut r = hound::WavReader::new(BufReader::new(f))?;
    let spec = r.spec();
    let nch = spec.channels as usize;
    let samples: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Float => {
            r.samples::<f32>().map(|s| s.map(f64::from)).collect::<std::result::Result<_, _>>()?
        }
        hound::SampleFormat::Int => {
            let scale = (1u64 << (spec.bits_per_sample - 1)) as f64;
            r.samples::<i32>().map(|s| s.map(|v| v as f64 / scale)).collect::<std::result::Result<_, _>>()?
        }
    };
    let mut out = vec![Vec::with_capacity(samples.len() / nch.max(1)); nch];
    for (i, s) in samples.into_iter().enumerate() {
        out[i % nch].push(s);
    }
    Ok((out, spec.sample_rate))
}

const MAGIC: &[u8; 8] = b"MPSDSTFT";

/// Write spectra in a raw little-endian format: header, then `(frame, bin, channel)` re/im pairs.
pub fn write_spectra(path: &Path, s: &StftSpectra) -> Result<()> {
    let f = File::create(path).map_err(|e| ctx(path, e))?;
    let mut w = BufWriter::new(f);
    w.write_all(MAGIC)?;
    for v in [
        1u64,
        s.num_frames() as u64,
        s.num_bins() as u64,
        s.num_channels() as u64,
        s.config.window_len as u64,
        s.config.hop as u64,
        s.config.fft_size as u64,
        s.signal_len as u64,
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&s.sample_rate.to_le_bytes())?;
    for v in s.data.iter() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_spectra(path: &Path) -> Result<StftSpectra> {
    let f = File::open(path).map_err(|e| ctx(path, e))?;
    let mut r = BufReader::new(f);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Config(format!("{}: not a spectra file", path.display())));
    }
    let mut word = [0u8; 8];
    let mut next = |r: &mut BufReader<File>| -> Result<u64> {
        r.read_exact(&mut word)?;
        Ok(u64::from_le_bytes(word))
    };
    let version = next(&mut r)?;
    if version != 1 {
        return Err(Error::Config(format!("{}: unsupported spectra version {version}", path.display())));
    }
    let dims: Vec<usize> = (0..7).map(|_| next(&mut r).map(|v| v as usize)).collect::<Result<_>>()?;
    let sample_rate = f64::from_bits(next(&mut r)?);
    let (frames, bins, chans) = (dims[0], dims[1], dims[2]);
    let config = StftConfig { window_len: dims[3], hop: dims[4], fft_size: dims[5] };
    let mut buf = vec![0u8; frames * bins * chans * 16];
    r.read_exact(&mut buf)?;
    let vals: Vec<Complex64> = buf
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    let data = Array3::from_shape_vec((frames, bins, chans), vals).map_err(|e| Error::Shape(e.to_string()))?;
    Ok(StftSpectra { data, config, sample_rate, signal_len: dims[6] })
}

/// Matrix as CSV, one row per frame, one column per bin, with a `bin_<k>` header.
pub fn write_matrix_csv(path: &Path, m: &Array2<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record((0..m.ncols()).map(|b| format!("bin_{b}")))?;
    for row in m.rows() {
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    let cols = r.headers()?.len();
    let mut vals = Vec::new();
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != cols {
            return Err(Error::Shape(format!("{}: ragged CSV row {rows}", path.display())));
        }
        for f in rec.iter() {
            vals.push(f.trim().parse::<f64>().map_err(|e| Error::Config(format!("{}: {e}", path.display())))?);
        }
        rows += 1;
    }
    Array2::from_shape_vec((rows, cols), vals).map_err(|e| Error::Shape(e.to_string()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = File::create(path).map_err(|e| ctx(path, e))?;
    let mut w = BufWriter::new(f);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let s = std::fs::read_to_string(path).map_err(|e| ctx(path, e))?;
    Ok(serde_json::from_str(&s)?)
}
