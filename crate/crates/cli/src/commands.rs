use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use modal_psd::array::{ArrayGeometry, FrequencyGrid, ModalEncoder, Stft, StftSpectra};
use modal_psd::estimator::{BinDiagnostics, ColumnLayout, PsdEstimator, PsdTrack, SourceSet, SourceSpec};
use modal_psd::io::{read_spectra, read_wav, write_matrix_csv, write_spectra, write_wav};
use modal_psd::scene::render_scene;
use modal_psd::separation::separate_sources;
use ndarray::{Array2, Array3, Axis};

use crate::config::{usage, RunConfig, SCHEMA_VERSION};
use crate::manifest::{ComponentFile, ConditioningSummary, LayoutInfo, Manifest, RunKind};

fn wav_rate(sample_rate: f64) -> Result<u32> {
    if sample_rate.fract() != 0.0 || sample_rate > u32::MAX as f64 {
        return Err(usage(format!("sample rate {sample_rate} Hz cannot be stored in a WAV header")));
    }
    Ok(sample_rate as u32)
}

fn geometry_value(g: &ArrayGeometry) -> Result<serde_json::Value> {
    Ok(serde_json::from_str(&g.to_json()?)?)
}

fn write_component(out: &Path, c: &ComponentFile, m: &Array2<f64>) -> Result<()> {
    let path = out.join(&c.file);
    write_matrix_csv(&path, m).with_context(|| format!("writing {}", path.display()))
}

fn create_dirs(out: &Path, sub: &str) -> Result<()> {
    let d = out.join(sub);
    fs::create_dir_all(&d).with_context(|| format!("creating {}", d.display()))
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<()> {
    let mut scene = cfg.scene.clone().ok_or_else(|| usage("simulate needs a `scene` section in the config"))?;
    if let Some(s) = cfg.seed {
        scene.seed = s;
    }
    let geometry = cfg.load_geometry()?;
    let stft = Stft::new(cfg.stft)?;
    let grid = FrequencyGrid::new(cfg.sample_rate, cfg.stft.fft_size)?;
    let rate = wav_rate(cfg.sample_rate)?;
    let r = render_scene(&scene, &geometry, &stft, &grid)?;
    create_dirs(out, "truth")?;

    let len = r.spectra.signal_len;
    let mut files = vec!["mixture.wav".to_string(), "mixture.stft".to_string(), "origin_mixture.wav".to_string()];
    write_wav(&out.join("mixture.wav"), &stft.synthesize(&r.spectra)?, rate)?;
    write_spectra(&out.join("mixture.stft"), &r.spectra)?;
    let origin = stft.synthesize_channel(r.truth.origin_mixture.view(), len)?;
    write_wav(&out.join("origin_mixture.wav"), &[origin], rate)?;

    let mut stems = Vec::new();
    for l in 0..scene.sources.len() {
        let name = format!("stem_{l}.wav");
        let x = stft.synthesize_channel(r.truth.stems.index_axis(Axis(2), l), len)?;
        write_wav(&out.join(&name), &[x], rate)?;
        stems.push(name);
    }

    let mut components = Vec::new();
    for l in 0..scene.sources.len() {
        let c = ComponentFile::plain(format!("source_{l}"), "truth");
        write_component(out, &c, &r.truth.source(l))?;
        components.push(c);
    }
    let mut gamma_targets = Vec::new();
    if scene.reverb_order().is_some() {
        let c = ComponentFile::plain("reverb_total", "truth");
        write_component(out, &c, &r.truth.reverb_total)?;
        components.push(c);
        for i in 0..r.truth.reverb_gamma.len_of(Axis(2)) {
            let c = ComponentFile::gamma(i, "truth");
            write_component(out, &c, &r.truth.reverb_gamma.index_axis(Axis(2), i).to_owned())?;
            gamma_targets.push(c.clone());
            components.push(c);
        }
    }
    if scene.noise.as_ref().is_some_and(|n| n.enabled) {
        let c = ComponentFile::plain("noise", "truth");
        write_component(out, &c, &r.truth.noise())?;
        components.push(c);
    }
    files.extend(stems.iter().cloned());
    files.extend(components.iter().map(|c| c.file.clone()));

    let mut recorded = cfg.clone();
    recorded.seed = Some(scene.seed);
    recorded.scene = Some(scene.clone());
    let manifest = Manifest {
        version: SCHEMA_VERSION,
        kind: RunKind::Simulate,
        config: recorded,
        geometry: geometry_value(&geometry)?,
        sample_rate: cfg.sample_rate,
        stft: cfg.stft,
        num_channels: geometry.num_mics(),
        num_frames: r.spectra.num_frames(),
        num_bins: r.spectra.num_bins(),
        signal_len: len,
        sources: scene.sources.iter().map(|s| s.spec()).collect(),
        components,
        gamma_targets,
        layout: None,
        conditioning: None,
        stems,
        mixture: Some("origin_mixture.wav".into()),
        files,
        warnings: Vec::new(),
    };
    manifest.save(out)
}

/// Inputs shared by `estimate` and `separate`.
struct Prepared {
    cfg: RunConfig,
    geometry: ArrayGeometry,
    spectra: StftSpectra,
    stft: Stft,
    grid: FrequencyGrid,
    specs: Vec<SourceSpec>,
    set: SourceSet,
}

fn load_spectra(path: &Path, cfg: &RunConfig) -> Result<StftSpectra> {
    if !path.is_file() {
        return Err(usage(format!("input file not found: {}", path.display())));
    }
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    match ext.as_str() {
        "stft" => read_spectra(path).with_context(|| format!("reading {}", path.display())),
        "wav" => {
            let (chans, rate) = read_wav(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(Stft::new(cfg.stft)?.analyze(&chans, rate as f64)?)
        }
        _ => Err(usage(format!("{}: expected a .wav or .stft input", path.display()))),
    }
}

/// The manifest written next to `input`, if any.
fn sibling_manifest(input: &Path) -> Option<Manifest> {
    let dir = input.parent()?;
    Manifest::load(dir).ok().filter(|m| m.kind == RunKind::Simulate)
}

fn prepare(cfg: &RunConfig, input: Option<&Path>) -> Result<Prepared> {
    let input: PathBuf = input
        .map(Path::to_path_buf)
        .or_else(|| cfg.input.clone())
        .ok_or_else(|| usage("no input: pass --input or set `input` in the config"))?;
    let sibling = sibling_manifest(&input);
    let geometry = match (&cfg.geometry, &sibling) {
        (None, Some(m)) => {
            ArrayGeometry::from_json_str(&m.geometry.to_string()).context("geometry recorded in the input manifest")?
        }
        _ => cfg.load_geometry()?,
    };
    let spectra = load_spectra(&input, cfg)?;
    if spectra.num_channels() != geometry.num_mics() {
        return Err(usage(format!(
            "{}: input has {} channels, geometry has {} microphones",
            input.display(),
            spectra.num_channels(),
            geometry.num_mics()
        )));
    }
    let specs: Vec<SourceSpec> = if !cfg.sources.is_empty() {
        cfg.sources.clone()
    } else if let Some(scene) = &cfg.scene {
        scene.sources.iter().map(|s| s.spec()).collect()
    } else if let Some(m) = &sibling {
        m.sources.clone()
    } else {
        return Err(usage("no source directions: set `sources` in the config"));
    };
    cfg.check_source_count(&specs)?;
    let set = SourceSet::new(specs.clone())?;
    let stft = Stft::new(spectra.config)?;
    let grid = spectra.grid();
    let mut cfg = cfg.clone();
    cfg.input = Some(input);
    Ok(Prepared { cfg, geometry, spectra, stft, grid, specs, set })
}

fn summarize(diag: &[BinDiagnostics]) -> ConditioningSummary {
    let mut conds: Vec<f64> = diag.iter().map(|d| d.condition_number).collect();
    conds.sort_by(f64::total_cmp);
    ConditioningSummary {
        max_condition_number: conds.last().copied().filter(|c| c.is_finite()),
        median_condition_number: conds.get(conds.len() / 2).copied().filter(|c| c.is_finite()),
        underdetermined_bins: diag.iter().filter(|d| d.underdetermined).map(|d| d.bin).collect(),
        rank_deficient_bins: diag.iter().filter(|d| d.rank < d.cols).map(|d| d.bin).collect(),
    }
}

fn base_manifest(p: &Prepared, kind: RunKind) -> Result<Manifest> {
    Ok(Manifest {
        version: SCHEMA_VERSION,
        kind,
        config: p.cfg.clone(),
        geometry: geometry_value(&p.geometry)?,
        sample_rate: p.spectra.sample_rate,
        stft: p.spectra.config,
        num_channels: p.spectra.num_channels(),
        num_frames: p.spectra.num_frames(),
        num_bins: p.spectra.num_bins(),
        signal_len: p.spectra.signal_len,
        sources: p.specs.clone(),
        components: Vec::new(),
        gamma_targets: Vec::new(),
        layout: None,
        conditioning: None,
        stems: Vec::new(),
        mixture: None,
        files: Vec::new(),
        warnings: Vec::new(),
    })
}

fn warn(warnings: &mut Vec<String>, msg: String) {
    eprintln!("warning: {msg}");
    warnings.push(msg);
}

fn run_estimator(p: &Prepared, warnings: &mut Vec<String>) -> Result<(PsdTrack, ConditioningSummary)> {
    let est = PsdEstimator::new(&p.geometry, &p.grid, &p.set, &p.cfg.estimator)?;
    let summary = summarize(est.diagnostics());
    if !summary.underdetermined_bins.is_empty() {
        warn(warnings, format!("underdetermined bins {:?}: minimum-norm solution used", summary.underdetermined_bins));
    }
    if !summary.rank_deficient_bins.is_empty() {
        warn(warnings, format!("rank-deficient bins {:?}", summary.rank_deficient_bins));
    }
    let modal = ModalEncoder::new(&p.geometry, &p.grid, &p.cfg.estimator.modal)?.encode_spectra(&p.spectra)?;
    let track = est.run(&modal)?;
    Ok((track, summary))
}

fn write_conditioning(path: &Path, diag: &[BinDiagnostics]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for d in diag {
        w.serialize(d)?;
    }
    w.flush()?;
    Ok(())
}

pub fn estimate(cfg: &RunConfig, input: Option<&Path>, out: &Path) -> Result<()> {
    let p = prepare(cfg, input)?;
    let mut m = base_manifest(&p, RunKind::Estimate)?;
    let (track, summary) = run_estimator(&p, &mut m.warnings)?;
    create_dirs(out, "psd")?;
    let layout = track.layout;
    for l in 0..layout.num_sources {
        let c = ComponentFile::plain(format!("source_{l}"), "psd");
        write_component(out, &c, &track.source(l))?;
        m.components.push(c);
    }
    if layout.reverb_order.is_some() {
        let c = ComponentFile::plain("reverb_total", "psd");
        write_component(out, &c, &track.reverb_total())?;
        m.components.push(c);
        for i in 0..layout.reverb_modes() {
            let c = ComponentFile::gamma(i, "psd");
            let g = track.gamma(i).expect("reverberant column exists");
            write_component(out, &c, &g)?;
            m.components.push(c);
        }
    }
    if layout.noise {
        let c = ComponentFile::plain("noise", "psd");
        write_component(out, &c, &track.noise())?;
        m.components.push(c);
    }
    write_conditioning(&out.join("conditioning.csv"), &track.diagnostics)?;
    m.files = m.components.iter().map(|c| c.file.clone()).collect();
    m.files.push("conditioning.csv".into());
    m.layout =
        Some(LayoutInfo { num_sources: layout.num_sources, reverb_order: layout.reverb_order, noise: layout.noise });
    m.conditioning = Some(summary);
    m.save(out)
}

/// Rebuilds a PSD track from the output of `estimate`.
pub fn load_track(dir: &Path) -> Result<(Manifest, PsdTrack)> {
    let m = Manifest::load(dir)?;
    if m.kind != RunKind::Estimate {
        return Err(usage(format!("{}: not the output of `estimate`", dir.display())));
    }
    let info = m.layout.ok_or_else(|| usage(format!("{}: manifest has no column layout", dir.display())))?;
    let layout = ColumnLayout { num_sources: info.num_sources, reverb_order: info.reverb_order, noise: info.noise };
    let comps = m.load_components(dir)?;
    let mut data = Array3::zeros((m.num_frames, m.num_bins, layout.width()));
    let mut put = |name: String, col: usize| -> Result<()> {
        let c = comps.get(&name).ok_or_else(|| usage(format!("{}: missing component {name}", dir.display())))?;
        data.index_axis_mut(Axis(2), col).assign(c);
        Ok(())
    };
    for l in 0..layout.num_sources {
        put(format!("source_{l}"), l)?;
    }
    for i in 0..layout.reverb_modes() {
        put(format!("gamma_{i}"), layout.reverb_index(i))?;
    }
    if let Some(i) = layout.noise_index() {
        put("noise".into(), i)?;
    }
    Ok((m, PsdTrack { layout, data, diagnostics: Vec::new() }))
}

pub fn separate(cfg: &RunConfig, input: Option<&Path>, psd: Option<&Path>, dump_gains: bool, out: &Path) -> Result<()> {
    let p = prepare(cfg, input)?;
    let rate = wav_rate(p.spectra.sample_rate)?;
    let mut m = base_manifest(&p, RunKind::Separate)?;
    let track = match psd {
        Some(dir) => {
            let (pm, track) = load_track(dir)?;
            if pm.num_frames != m.num_frames || pm.num_bins != m.num_bins {
                return Err(usage(format!(
                    "{}: PSD track is {}x{}, input is {}x{}",
                    dir.display(),
                    pm.num_frames,
                    pm.num_bins,
                    m.num_frames,
                    m.num_bins
                )));
            }
            if pm.sources.len() != p.specs.len() {
                return Err(usage(format!(
                    "{}: PSD track has {} sources, DOA list has {}",
                    dir.display(),
                    pm.sources.len(),
                    p.specs.len()
                )));
            }
            track
        }
        None => {
            let (track, summary) = run_estimator(&p, &mut m.warnings)?;
            m.conditioning = Some(summary);
            track
        }
    };
    let modal = ModalEncoder::new(&p.geometry, &p.grid, &p.cfg.estimator.modal)?.encode_spectra(&p.spectra)?;
    let sep = separate_sources(
        &modal,
        &track,
        &p.set,
        &p.cfg.separation,
        p.geometry.kind(),
        p.geometry.radius(),
        &p.grid,
        &p.stft,
        p.spectra.signal_len,
    )?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for (l, x) in sep.signals.iter().enumerate() {
        let name = format!("stem_{l}.wav");
        write_wav(&out.join(&name), std::slice::from_ref(x), rate)?;
        m.stems.push(name);
    }
    m.files = m.stems.clone();
    if dump_gains {
        create_dirs(out, "gains")?;
        for (l, g) in sep.gains.iter().enumerate() {
            let name = format!("gains/gain_{l}.csv");
            write_matrix_csv(&out.join(&name), g)?;
            m.files.push(name);
        }
    }
    m.save(out)
}
