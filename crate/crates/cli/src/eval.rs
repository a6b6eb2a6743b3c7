use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use modal_psd::estimator::{build_translation_matrix, EstimatorConfig, SourceSet};
use modal_psd::io::{read_wav, write_json};
use modal_psd::metrics::{condition_number, psd_error, sir_snr_improvement};
use modal_psd::sph::SphereQuadrature;
use modal_psd::Error;
use serde::{Deserialize, Serialize};

use crate::config::{usage, RunConfig, SCHEMA_VERSION};
use crate::manifest::{ConditioningSummary, Manifest, RunKind};

pub struct EvalArgs<'a> {
    pub truth: Option<&'a Path>,
    pub estimates: Option<&'a Path>,
    pub separated: Option<&'a Path>,
    pub condition_sweep: bool,
    pub out: &'a Path,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentScore {
    pub name: String,
    /// Full-band error in dB; `None` when the true component is silent.
    pub error_db: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StemScore {
    pub source: usize,
    pub sir_db: f64,
    pub snr_db: f64,
    pub sir_improvement_db: f64,
    pub snr_improvement_db: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub order: u32,
    pub num_sources: usize,
    pub reverb_order: u32,
    /// `None` when the matrix is singular.
    pub condition_number: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub truth: Option<PathBuf>,
    pub estimates: Option<PathBuf>,
    pub separated: Option<PathBuf>,
    pub psd_error: Vec<ComponentScore>,
    pub separation: Vec<StemScore>,
    pub conditioning: Option<ConditioningSummary>,
    pub condition_sweep: Vec<SweepPoint>,
    pub files: Vec<String>,
}

/// Transfer-matrix condition numbers for `N in {2, 4}` and 2 to 30 spread far-field sources.
pub fn condition_sweep(cfg: &RunConfig) -> Result<Vec<SweepPoint>> {
    let geometry = cfg.load_geometry()?;
    let est = EstimatorConfig { reverb_order: 1, reverb_columns: true, noise_column: false, ..cfg.estimator };
    let mut out = Vec::new();
    for order in [2u32, 4] {
        for l in 2..=30 {
            let set = SourceSet::far_field(&SphereQuadrature::fibonacci(l).points)?;
            let t = build_translation_matrix(&est, &set, order, 30.0, &geometry)?;
            let c = condition_number(&t.matrix)?;
            out.push(SweepPoint {
                order,
                num_sources: l,
                reverb_order: est.reverb_order,
                condition_number: c.is_finite().then_some(c),
            });
        }
    }
    Ok(out)
}

fn check_match(truth: &Manifest, other: &Manifest, what: &str) -> Result<()> {
    let t = (truth.sources.len(), truth.num_frames, truth.num_bins);
    let o = (other.sources.len(), other.num_frames, other.num_bins);
    if t != o {
        return Err(usage(format!("manifest mismatch: truth has (sources, frames, bins) = {t:?}, {what} has {o:?}")));
    }
    Ok(())
}

fn mono(path: &Path) -> Result<Vec<f64>> {
    let (mut chans, _) = read_wav(path).with_context(|| format!("reading {}", path.display()))?;
    if chans.is_empty() {
        return Err(usage(format!("{}: WAV has no channels", path.display())));
    }
    Ok(chans.swap_remove(0))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn write_rows(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn eval(cfg: &RunConfig, args: &EvalArgs) -> Result<()> {
    if args.truth.is_none() && !args.condition_sweep {
        return Err(usage("eval needs --truth or --condition-sweep"));
    }
    if args.truth.is_none() && (args.estimates.is_some() || args.separated.is_some()) {
        return Err(usage("--estimates and --separated need --truth"));
    }
    fs::create_dir_all(args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut report = Report {
        version: SCHEMA_VERSION,
        truth: args.truth.map(Path::to_path_buf),
        estimates: args.estimates.map(Path::to_path_buf),
        separated: args.separated.map(Path::to_path_buf),
        psd_error: Vec::new(),
        separation: Vec::new(),
        conditioning: None,
        condition_sweep: Vec::new(),
        files: Vec::new(),
    };

    if let Some(tdir) = args.truth {
        let truth = Manifest::load(tdir)?;
        if truth.kind != RunKind::Simulate {
            return Err(usage(format!("{}: ground truth must come from `simulate`", tdir.display())));
        }
        if let Some(edir) = args.estimates {
            let est = Manifest::load(edir)?;
            check_match(&truth, &est, "estimates")?;
            report.conditioning = est.conditioning.clone();
            let t = truth.load_components(tdir)?;
            let e = est.load_components(edir)?;
            let mut names = Vec::new();
            let mut traces = Vec::new();
            for (name, tm) in &t {
                let Some(em) = e.get(name) else { continue };
                match psd_error(tm.view(), em.view()) {
                    Ok(r) => {
                        report.psd_error.push(ComponentScore { name: name.clone(), error_db: Some(r.db) });
                        names.push(name.clone());
                        traces.push(r.per_bin_db);
                    }
                    Err(Error::Domain(_)) => {
                        report.psd_error.push(ComponentScore { name: name.clone(), error_db: None })
                    }
                    Err(err) => return Err(err.into()),
                }
            }
            let rows: Vec<Vec<String>> =
                report.psd_error.iter().map(|c| vec![c.name.clone(), fmt_opt(c.error_db)]).collect();
            write_rows(&args.out.join("psd_error.csv"), &["component".into(), "error_db".into()], &rows)?;
            let mut header = vec!["bin".to_string(), "frequency_hz".to_string()];
            header.extend(names.iter().cloned());
            let rows: Vec<Vec<String>> = (0..truth.num_bins)
                .map(|b| {
                    let f = b as f64 * truth.sample_rate / truth.stft.fft_size as f64;
                    let mut r = vec![b.to_string(), format!("{f}")];
                    r.extend(traces.iter().map(|tr| fmt_opt(tr[b])));
                    r
                })
                .collect();
            write_rows(&args.out.join("per_bin_error.csv"), &header, &rows)?;
            report.files.extend(["psd_error.csv".to_string(), "per_bin_error.csv".to_string()]);
        }
        if let Some(sdir) = args.separated {
            let sep = Manifest::load(sdir)?;
            if sep.stems.len() != truth.stems.len() {
                return Err(usage(format!(
                    "manifest mismatch: truth has {} stems, {} has {}",
                    truth.stems.len(),
                    sdir.display(),
                    sep.stems.len()
                )));
            }
            let mix_name = truth.mixture.as_ref().ok_or_else(|| usage("truth manifest names no mixture"))?;
            let mixture = mono(&tdir.join(mix_name))?;
            let stems: Vec<Vec<f64>> = truth.stems.iter().map(|s| mono(&tdir.join(s))).collect::<Result<_>>()?;
            for (l, name) in sep.stems.iter().enumerate() {
                let x = mono(&sdir.join(name))?;
                if x.len() != mixture.len() {
                    return Err(usage(format!(
                        "manifest mismatch: {name} has {} samples, truth has {}",
                        x.len(),
                        mixture.len()
                    )));
                }
                let s = sir_snr_improvement(&x, &stems, &mixture, l)?;
                report.separation.push(StemScore {
                    source: l,
                    sir_db: s.sir_db,
                    snr_db: s.snr_db,
                    sir_improvement_db: s.sir_improvement_db,
                    snr_improvement_db: s.snr_improvement_db,
                });
            }
            let header: Vec<String> = ["source", "sir_db", "snr_db", "sir_improvement_db", "snr_improvement_db"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            let rows: Vec<Vec<String>> = report
                .separation
                .iter()
                .map(|s| {
                    vec![
                        s.source.to_string(),
                        format!("{}", s.sir_db),
                        format!("{}", s.snr_db),
                        format!("{}", s.sir_improvement_db),
                        format!("{}", s.snr_improvement_db),
                    ]
                })
                .collect();
            write_rows(&args.out.join("separation.csv"), &header, &rows)?;
            report.files.push("separation.csv".into());
        }
    }

    if args.condition_sweep {
        report.condition_sweep = condition_sweep(cfg)?;
        let header: Vec<String> =
            ["order", "num_sources", "reverb_order", "condition_number"].iter().map(|s| s.to_string()).collect();
        let rows: Vec<Vec<String>> = report
            .condition_sweep
            .iter()
            .map(|p| {
                vec![
                    p.order.to_string(),
                    p.num_sources.to_string(),
                    p.reverb_order.to_string(),
                    p.condition_number.map_or("inf".into(), |c| format!("{c}")),
                ]
            })
            .collect();
        write_rows(&args.out.join("condition_sweep.csv"), &header, &rows)?;
        report.files.push("condition_sweep.csv".into());
    }

    report.files.push("report.json".into());
    write_json(&args.out.join("report.json"), &report).context("writing report")
}
