//! The six subcommands. Each takes a validated [`Experiment`] and an output
//! directory and returns the number of failed checks.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use limtomo::microlocal::{
    characterization_upper_bound, check_ellipticity, read_artifacts_csv, symbol_l_phi, write_artifacts_csv,
    EllipticityOptions, Sampling, Tolerance, WavefrontSet,
};
use limtomo::phantoms::{analytic_wavefront_aligned, rasterize};
use limtomo::pfg;
use limtomo::transform::{forward, reconstruct_sinogram, Cutoff, Grid, Image, Sinogram};
use limtomo::wfdetect::{artifact_energy, detect, match_sets, BandEnergy, MatchStats};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::config::Experiment;
use crate::error::{io_err, CliError};

type Outcome = Result<usize, CliError>;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io { path: path.into(), source: e.into() })?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(path))
}

/// A named threshold check.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value >= threshold }
    }

    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, pass: value <= threshold }
    }
}

fn report_checks(checks: &[Check]) -> usize {
    for c in checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("{tag} {} = {:.6} (threshold {:.6})", c.name, c.value, c.threshold);
    }
    checks.iter().filter(|c| !c.pass).count()
}

fn data_image(exp: &Experiment) -> Result<Image<f64>, CliError> {
    Ok(rasterize(&exp.phantom, &exp.grid, exp.config.grid.supersample)?)
}

/// Rasterize, project and optionally add seeded Gaussian noise.
pub fn simulate(exp: &Experiment, out: &Path) -> Outcome {
    let f = data_image(exp)?;
    let mut g = forward(&f, &exp.mu, &exp.directions, &exp.offsets)?;
    let sigma = exp.config.noise.sigma;
    if sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(exp.config.seed);
        let noise = Normal::new(0.0, sigma).map_err(|e| CliError::Config { field: "noise.sigma".into(), msg: e.to_string() })?;
        for v in g.values.iter_mut() {
            *v += noise.sample(&mut rng);
        }
    }
    pfg::save_image(&f, &out.join("phantom.pfg"))?;
    pfg::save_sinogram(&g, &out.join("sinogram.pfg"))?;
    println!(
        "sinogram: {} directions × {} offsets, max |g| = {:.6}",
        g.directions.len(),
        g.offsets.count,
        g.max_abs()
    );
    Ok(0)
}

#[derive(Serialize)]
struct ReconSummary {
    filter: String,
    cutoff: &'static str,
    relative_l2_to_phantom: f64,
    max_abs_imag: f64,
}

fn cutoff_name(c: &Cutoff) -> &'static str {
    match c {
        Cutoff::None => "none",
        Cutoff::Hard(_) => "hard",
        Cutoff::Smooth(_) => "smooth",
    }
}

fn load_sinogram(path: &Path) -> Result<Sinogram<f64>, CliError> {
    if !path.exists() {
        return Err(CliError::Io { path: path.into(), source: std::io::ErrorKind::NotFound.into() });
    }
    Ok(pfg::load_sinogram(path)?)
}

/// cutoff → filter → backproject onto the configured grid.
pub fn reconstruct(exp: &Experiment, sinogram: &Path, out: &Path) -> Outcome {
    let g = load_sinogram(sinogram)?;
    let rec = reconstruct_sinogram(&g, &exp.nu, &exp.filter, &exp.cutoff, &exp.grid)?;
    let re = rec.real_part();
    let max_abs_imag = rec.imag_part().max_abs();
    if max_abs_imag > 1e-12 * re.max_abs().max(f64::MIN_POSITIVE) {
        pfg::save_image(&rec, &out.join("recon.pfg"))?;
    } else {
        pfg::save_image(&re, &out.join("recon.pfg"))?;
    }
    let f = data_image(exp)?;
    let norm = f.l2_norm();
    let rel = if norm > 0.0 { re.sub(&f)?.l2_norm() / norm } else { re.l2_norm() };
    let summary = ReconSummary {
        filter: exp.filter.name(),
        cutoff: cutoff_name(&exp.cutoff),
        relative_l2_to_phantom: rel,
        max_abs_imag,
    };
    write_json(&out.join("recon.json"), &summary)?;
    println!("reconstruction ({}, cutoff {}): relative L2 to phantom {rel:.6}", summary.filter, summary.cutoff);
    Ok(0)
}

fn sampling(exp: &Experiment) -> Sampling {
    Sampling { rim_samples: exp.config.predict.rim_samples, ..Sampling::for_grid(&exp.grid) }
}

fn tolerance(grid: &Grid) -> Tolerance {
    Tolerance::pixels(grid.min_spacing())
}

/// Visible set and artifact lines with the Cᵗ∘Q∘C cross-check.
pub fn predict(exp: &Experiment, out: &Path) -> Outcome {
    let s = sampling(exp);
    let bd = exp.angular.boundary_directions(s.rim_samples);
    let wf = analytic_wavefront_aligned(&exp.phantom, exp.config.predict.boundary_samples, &bd)?;
    let wf = WavefrontSet::new(wf.covectors(), tolerance(&exp.grid));
    let ch = characterization_upper_bound(&wf, &exp.angular, &s)?;
    ch.visible.write_csv(create(&out.join("visible.csv"))?)?;
    write_artifacts_csv(&ch.artifacts, create(&out.join("artifacts.csv"))?)?;
    println!(
        "wavefront samples {}, visible {}, artifact lines {}, oracle check passed ({} samples)",
        wf.len(),
        ch.visible.len(),
        ch.artifacts.len(),
        ch.oracle.len()
    );
    Ok(0)
}

#[derive(Serialize)]
struct VerifySummary {
    stats: MatchStats,
    energy: BandEnergy,
    in_band_fraction: f64,
    hard_in_band: Option<f64>,
    checks: Vec<Check>,
}

/// Paths consumed by [`verify`].
pub struct VerifyInputs {
    pub recon: PathBuf,
    pub sinogram: PathBuf,
    pub predictions: PathBuf,
}

/// Detection, matching against the predictions and band energies.
pub fn verify(exp: &Experiment, inputs: &VerifyInputs, out: &Path) -> Outcome {
    if exp.grid.dim() != 2 {
        return Err(limtomo::Error::Unsupported("verify runs on planar reconstructions only".into()).into());
    }
    let cfg = &exp.config;
    let rec: Image<Complex64> = pfg::load_image(&inputs.recon)?;
    let rec = rec.real_part();
    rec.check_same_grid(&Image::zeros(&exp.grid))?;
    let g = load_sinogram(&inputs.sinogram)?;
    let tol = tolerance(&exp.grid);
    let visible = WavefrontSet::read_csv(open(&inputs.predictions.join("visible.csv"))?, tol)?;
    let lines = read_artifacts_csv(open(&inputs.predictions.join("artifacts.csv"))?)?;
    let reference_set = lines.iter().fold(visible, |acc, l| acc.union(&WavefrontSet::new(l.covectors(), tol)));

    let detected = detect(&rec, &cfg.detector, tol)?;
    let report = match_sets(&detected, &reference_set);
    report.write_csv(create(&out.join("detections.csv"))?)?;

    let full = reconstruct_sinogram(&g, &exp.nu, &exp.filter, &Cutoff::None, &exp.grid)?.real_part();
    let band_px = cfg.verify.band_px;
    let energy = artifact_energy(&rec, &full, &lines, band_px, cfg.detector.sigma_g)?;

    let v = &cfg.verify;
    let mut checks = Vec::new();
    if let Some(t) = v.min_tp {
        checks.push(Check::at_least("tp_rate", report.stats.tp_rate, t));
    }
    if let Some(t) = v.max_spurious {
        checks.push(Check::at_most("spurious_rate", report.stats.spurious_rate, t));
    }
    if let Some(t) = v.max_angle_error_deg {
        checks.push(Check::at_most("mean_angle_error_deg", report.stats.mean_angle_error_deg, t));
    }
    if let Some(t) = v.min_in_band {
        checks.push(Check::at_least("in_band_fraction", energy.in_fraction(), t));
    }
    let mut hard_in_band = None;
    if let Some(t) = v.min_reduction {
        let hard = reconstruct_sinogram(&g, &exp.nu, &exp.filter, &Cutoff::Hard(exp.angular.clone()), &exp.grid)?.real_part();
        let eh = artifact_energy(&hard, &full, &lines, band_px, cfg.detector.sigma_g)?;
        hard_in_band = Some(eh.in_band);
        let ratio = if energy.in_band > 0.0 { eh.in_band / energy.in_band } else { f64::INFINITY };
        checks.push(Check::at_least("reduction_vs_hard", ratio, t));
    }
    println!(
        "detections {}, reference {}, tp {:.4}, spurious {:.4}, mean angle error {:.3}°, in-band fraction {:.4}",
        report.stats.detections,
        report.stats.reference,
        report.stats.tp_rate,
        report.stats.spurious_rate,
        report.stats.mean_angle_error_deg,
        energy.in_fraction()
    );
    let failed = report_checks(&checks);
    let summary = VerifySummary { stats: report.stats, energy, in_band_fraction: energy.in_fraction(), hard_in_band, checks };
    write_json(&out.join("verify.json"), &summary)?;
    Ok(failed)
}

/// One probe row of [`symbol`].
#[derive(Clone, Debug)]
pub struct SymbolRow {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub predicted: Complex64,
    pub measured: Complex64,
    /// |measured − predicted| / |predicted|, NaN for a zero prediction.
    pub rel_error: f64,
}

/// Measured symbol [L_φ g](x₀)/g(x₀) for Gabor probes against the formula.
pub fn symbol(exp: &Experiment, out: &Path) -> Outcome {
    let cfg = &exp.config.symbol;
    let dim = exp.grid.dim();
    let h = exp.grid.spacing().to_vec();
    let mut rows = Vec::with_capacity(cfg.probes.len());
    for p in &cfg.probes {
        let x0 = limtomo::geometry::VecN::new(&p.x)?;
        let xi = limtomo::geometry::VecN::new(&p.xi)?;
        let wavelength = std::f64::consts::TAU / xi.norm();
        let sigma = 0.5 * cfg.window_wavelengths * wavelength;
        let probe = Image::from_fn(&exp.grid, |x| {
            let d = *x - x0;
            Complex64::from_polar((-d.norm_sqr() / (2.0 * sigma * sigma)).exp(), x.dot(&xi))
        });
        let g = forward(&probe, &exp.mu, &exp.directions, &exp.offsets)?;
        let origin: Vec<f64> = (0..dim).map(|i| x0[i] - 4.0 * h[i]).collect();
        let local = Grid::new(&vec![8; dim], &h, &origin)?;
        let at = local.index(&vec![4; dim]);
        let rec = reconstruct_sinogram(&g, &exp.nu, &exp.filter, &exp.cutoff, &local)?;
        let measured = rec.values[at] / Complex64::from_polar(1.0, x0.dot(&xi));
        let predicted = symbol_l_phi(&x0, &xi, &exp.mu, &exp.nu, &exp.filter, &exp.cutoff)?;
        let rel_error = if predicted.norm() > 0.0 { (measured - predicted).norm() / predicted.norm() } else { f64::NAN };
        rows.push(SymbolRow { x: p.x.clone(), xi: p.xi.clone(), predicted, measured, rel_error });
    }
    let path = out.join("symbol.csv");
    let mut w = create(&path)?;
    let cols = |p: &str| (1..=dim).map(|i| format!("{p}{i}")).collect::<Vec<_>>().join(",");
    writeln!(w, "{},{},pred_re,pred_im,meas_re,meas_im,abs_error,rel_error", cols("x"), cols("xi")).map_err(io_err(&path))?;
    let mut checks = Vec::new();
    for (k, r) in rows.iter().enumerate() {
        let nums: Vec<String> = r
            .x
            .iter()
            .chain(&r.xi)
            .chain(&[r.predicted.re, r.predicted.im, r.measured.re, r.measured.im, (r.measured - r.predicted).norm(), r.rel_error])
            .map(|v| format!("{v:.17e}"))
            .collect();
        writeln!(w, "{}", nums.join(",")).map_err(io_err(&path))?;
        println!(
            "probe {k}: predicted {:.6}{:+.6}i, measured {:.6}{:+.6}i, relative error {:.4}",
            r.predicted.re, r.predicted.im, r.measured.re, r.measured.im, r.rel_error
        );
        if let (Some(t), false) = (cfg.max_rel_error, r.rel_error.is_nan()) {
            checks.push(Check::at_most(&format!("probe {k} relative error"), r.rel_error, t));
        }
    }
    w.flush().map_err(io_err(&path))?;
    Ok(report_checks(&checks))
}

/// Sufficient-condition ellipticity check on 𝒱_{int(A)}.
pub fn elliptic(exp: &Experiment, out: &Path) -> Outcome {
    let e = &exp.config.elliptic;
    let opts = EllipticityOptions { radius: e.radius, directions: e.directions, fiber: e.fiber, ..Default::default() };
    let r = check_ellipticity(&exp.mu, &exp.nu, &exp.filter, &exp.angular, &exp.cutoff, &opts)?;
    let mut text = String::new();
    if r.elliptic {
        text.push_str(&format!("elliptic: yes\ncondition: ({})\nmargin: {:.6e}\n", r.condition.label(), r.margin));
    } else {
        text.push_str(&format!("elliptic: not certified\ncondition: {}\nmargin: {:.6e}\n", r.condition.label(), r.margin));
    }
    text.push_str(&format!(
        "non_symmetric: {}\nsame_sign: {}\np_nonvanishing: {}\n",
        r.non_symmetric, r.same_sign, r.p_nonvanishing
    ));
    if let Some(w) = r.witness {
        let fmt = |v: &[f64]| v.iter().map(|c| format!("{c:.6}")).collect::<Vec<_>>().join(", ");
        text.push_str(&format!(
            "witness: x = ({}), xi = ({}), value = {:.6e}{:+.6e}i\n",
            fmt(w.covector.x.as_slice()),
            fmt(w.covector.xi().as_slice()),
            w.value.re,
            w.value.im
        ));
    }
    print!("{text}");
    let path = out.join("elliptic.txt");
    std::fs::write(&path, &text).map_err(io_err(&path))?;
    let checks: Vec<Check> = e
        .expect
        .map(|want| {
            let v = f64::from(u8::from(r.elliptic));
            Check { name: "elliptic".into(), value: v, threshold: f64::from(u8::from(want)), pass: r.elliptic == want }
        })
        .into_iter()
        .collect();
    Ok(report_checks(&checks))
}
