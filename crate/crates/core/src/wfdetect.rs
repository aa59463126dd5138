//! Structure-tensor detection of edge singularities in planar images and
//! metrics comparing detected and predicted wavefront samples.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{angle_between, Covector, Direction, VecN};
use crate::microlocal::{ArtifactLine, Tolerance, WavefrontSet};
use crate::transform::{Grid, Image};
use crate::{Error, Result};

/// Scales in pixels, relative threshold ρ and suppression radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorConfig {
    pub sigma_g: f64,
    pub sigma_t: f64,
    pub rho: f64,
    pub nms_radius: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self { sigma_g: 1.5, sigma_t: 3.0, rho: 0.1, nms_radius: 1 }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_g > 0.0 && self.sigma_g < self.sigma_t) {
            return Err(Error::InvalidDetector(format!("need 0 < sigma_g < sigma_t, got {} and {}", self.sigma_g, self.sigma_t)));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidDetector(format!("rho must lie in (0, 1), got {}", self.rho)));
        }
        if self.nms_radius == 0 {
            return Err(Error::InvalidDetector("nms_radius must be at least 1".into()));
        }
        Ok(())
    }
}

fn planar(grid: &Grid) -> Result<(usize, usize)> {
    if grid.dim() != 2 {
        return Err(Error::UnsupportedDimension(grid.dim()));
    }
    Ok((grid.dims()[0], grid.dims()[1]))
}

fn kernel(sigma: f64) -> Vec<f64> {
    let r = (4.0 * sigma).ceil().max(1.0) as isize;
    let mut k: Vec<f64> = (-r..=r).map(|i| (-0.5 * (i as f64 / sigma).powi(2)).exp()).collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

fn convolve_axis(v: &[f64], nx: usize, ny: usize, k: &[f64], along_x: bool) -> Vec<f64> {
    let r = (k.len() / 2) as isize;
    let mut out = vec![0.0; v.len()];
    out.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        for (i, o) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (t, w) in k.iter().enumerate() {
                let d = t as isize - r;
                let idx = if along_x {
                    j * nx + (i as isize + d).clamp(0, nx as isize - 1) as usize
                } else {
                    (j as isize + d).clamp(0, ny as isize - 1) as usize * nx + i
                };
                acc += w * v[idx];
            }
            *o = acc;
        }
    });
    out
}

/// Separable Gaussian blur with standard deviation `sigma_px` pixels and
/// clamped edges.
pub fn gaussian_blur(img: &Image<f64>, sigma_px: f64) -> Result<Image<f64>> {
    let (nx, ny) = planar(&img.grid)?;
    if !(sigma_px > 0.0) {
        return Ok(img.clone());
    }
    let k = kernel(sigma_px);
    let tmp = convolve_axis(&img.values, nx, ny, &k, true);
    Image::from_values(&img.grid, convolve_axis(&tmp, nx, ny, &k, false))
}

/// Central-difference gradient in world units, one-sided at the edges.
pub fn gradient(img: &Image<f64>) -> Result<(Image<f64>, Image<f64>)> {
    let (nx, ny) = planar(&img.grid)?;
    let (hx, hy) = (img.grid.spacing()[0], img.grid.spacing()[1]);
    let v = &img.values;
    let d = |a: usize, b: usize, steps: f64, h: f64| (v[b] - v[a]) / (steps * h);
    let mut gx = vec![0.0; v.len()];
    let mut gy = vec![0.0; v.len()];
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            gx[k] = match i {
                0 => d(k, k + 1, 1.0, hx),
                _ if i == nx - 1 => d(k - 1, k, 1.0, hx),
                _ => d(k - 1, k + 1, 2.0, hx),
            };
            gy[k] = match j {
                0 => d(k, k + nx, 1.0, hy),
                _ if j == ny - 1 => d(k - nx, k, 1.0, hy),
                _ => d(k - nx, k + nx, 2.0, hy),
            };
        }
    }
    Ok((Image::from_values(&img.grid, gx)?, Image::from_values(&img.grid, gy)?))
}

/// Smoothed structure tensor J = G_{σ_T} ∗ (∇u ∇uᵀ) of u = G_{σ_g} ∗ f.
#[derive(Clone, Debug)]
pub struct StructureTensor {
    pub j11: Image<f64>,
    pub j12: Image<f64>,
    pub j22: Image<f64>,
}

impl StructureTensor {
    pub fn compute(img: &Image<f64>, cfg: &DetectorConfig) -> Result<Self> {
        let u = gaussian_blur(img, cfg.sigma_g)?;
        let (gx, gy) = gradient(&u)?;
        let prod = |a: &Image<f64>, b: &Image<f64>| {
            Image::from_values(&a.grid, a.values.iter().zip(&b.values).map(|(p, q)| p * q).collect())
        };
        Ok(Self {
            j11: gaussian_blur(&prod(&gx, &gx)?, cfg.sigma_t)?,
            j12: gaussian_blur(&prod(&gx, &gy)?, cfg.sigma_t)?,
            j22: gaussian_blur(&prod(&gy, &gy)?, cfg.sigma_t)?,
        })
    }

    /// Principal eigenvalue and unit eigenvector at pixel `k`.
    pub fn principal(&self, k: usize) -> (f64, VecN) {
        let (a, b, c) = (self.j11.values[k], self.j12.values[k], self.j22.values[k]);
        let half_tr = 0.5 * (a + c);
        let disc = (0.25 * (a - c).powi(2) + b * b).sqrt();
        let theta = 0.5 * (2.0 * b).atan2(a - c);
        (half_tr + disc, VecN::xy(theta.cos(), theta.sin()))
    }

    /// Principal eigenvalue at every pixel.
    pub fn response(&self) -> Image<f64> {
        let v = (0..self.j11.values.len()).into_par_iter().map(|k| self.principal(k).0).collect();
        Image { grid: self.j11.grid.clone(), values: v }
    }
}

/// Structure-tensor response λ₁ at every pixel.
pub fn response(img: &Image<f64>, cfg: &DetectorConfig) -> Result<Image<f64>> {
    Ok(StructureTensor::compute(img, cfg)?.response())
}

/// Edge detections: pixels whose response is at least ρ times the global
/// maximum and is maximal along the principal direction within
/// `nms_radius` pixels. Each detection is the covector (pixel center,
/// principal eigenvector, eigenvalue) with the eigenvector's angle in
/// [0, π).
pub fn detect(img: &Image<f64>, cfg: &DetectorConfig, tol: Tolerance) -> Result<WavefrontSet> {
    cfg.validate()?;
    let (nx, ny) = planar(&img.grid)?;
    let st = StructureTensor::compute(img, cfg)?;
    let resp = st.response();
    let max = resp.values.iter().cloned().fold(0.0, f64::max);
    let scale = img.max_abs().powi(2) / img.grid.min_spacing().powi(2);
    if !(max > 1e-24 * scale.max(1e-300)) {
        return Ok(WavefrontSet::empty(tol));
    }
    let thr = cfg.rho * max;
    let samples: Vec<Covector> = (0..nx * ny)
        .into_par_iter()
        .filter_map(|k| {
            let (lam, e) = st.principal(k);
            if lam < thr {
                return None;
            }
            let (i, j) = (k % nx, k / nx);
            let (fi, fj) = (i as f64, j as f64);
            for r in 1..=cfg.nms_radius {
                for sgn in [1.0, -1.0] {
                    let (pi, pj) = (fi + sgn * r as f64 * e[0], fj + sgn * r as f64 * e[1]);
                    if pixel_bilinear(&resp.values, nx, ny, pi, pj) > lam {
                        return None;
                    }
                }
            }
            let mut v = e;
            if v[1] < 0.0 || (v[1] == 0.0 && v[0] < 0.0) {
                v = -v;
            }
            let x = img.grid.point(k);
            Some(Covector { x, omega: Direction::from_unit(v).ok()?, magnitude: lam })
        })
        .collect();
    Ok(WavefrontSet::new(samples, tol))
}

fn pixel_bilinear(v: &[f64], nx: usize, ny: usize, x: f64, y: f64) -> f64 {
    let x = x.clamp(0.0, (nx - 1) as f64);
    let y = y.clamp(0.0, (ny - 1) as f64);
    let (i0, j0) = (x.floor() as usize, y.floor() as usize);
    let (i1, j1) = ((i0 + 1).min(nx - 1), (j0 + 1).min(ny - 1));
    let (fx, fy) = (x - i0 as f64, y - j0 as f64);
    let at = |i: usize, j: usize| v[j * nx + i];
    (1.0 - fy) * ((1.0 - fx) * at(i0, j0) + fx * at(i1, j0)) + fy * ((1.0 - fx) * at(i0, j1) + fx * at(i1, j1))
}

/// Angle between the lines spanned by two directions, in degrees within
/// [0, 90].
pub fn axial_angle_deg(a: &Direction, b: &Direction) -> f64 {
    let t = angle_between(&a.vector(), &b.vector());
    t.min(PI - t).to_degrees()
}

/// Match statistics of detected against reference samples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct MatchStats {
    pub detections: usize,
    pub reference: usize,
    pub matched_reference: usize,
    pub matched_detections: usize,
    /// Fraction of reference samples with a detection nearby.
    pub tp_rate: f64,
    /// Fraction of detections with no reference sample nearby.
    pub spurious_rate: f64,
    /// Mean axial angle error in degrees over matched reference samples.
    pub mean_angle_error_deg: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionReport {
    pub detected: WavefrontSet,
    /// Detector response of each detection.
    pub responses: Vec<f64>,
    pub stats: MatchStats,
    /// Per detection: whether some reference sample lies within tolerance.
    pub detection_matched: Vec<bool>,
}

impl DetectionReport {
    /// One row per detection: `x1,x2,omega1,omega2,response,matched`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x1,x2,omega1,omega2,response,matched")?;
        for (c, m) in self.detected.iter().zip(&self.detection_matched) {
            let (x, o) = (c.x, c.omega.vector());
            writeln!(w, "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}", x[0], x[1], o[0], o[1], c.magnitude, u8::from(*m))?;
        }
        Ok(())
    }
}

/// Nearest partner of `c` among `set` within the base-point tolerance whose
/// axial angle is within the angular tolerance.
fn nearest(c: &Covector, set: &[Covector], tol: &Tolerance) -> Option<(f64, f64)> {
    set.iter()
        .filter_map(|s| {
            let d = s.x.distance(&c.x);
            let a = axial_angle_deg(&s.omega, &c.omega);
            (d <= tol.dx && a <= tol.dtheta_deg).then_some((d, a))
        })
        .min_by(|p, q| p.0.total_cmp(&q.0))
}

/// Greedy nearest matching under the tolerance of `reference`. Every
/// reference sample is paired with its nearest admissible detection; a
/// detection is spurious when no reference sample is admissible for it.
/// Orientations are compared as lines.
pub fn match_sets(detected: &WavefrontSet, reference: &WavefrontSet) -> DetectionReport {
    let tol = reference.tol;
    let ref_hits: Vec<Option<(f64, f64)>> =
        reference.samples.par_iter().map(|c| nearest(c, &detected.samples, &tol)).collect();
    let detection_matched: Vec<bool> =
        detected.samples.par_iter().map(|c| nearest(c, &reference.samples, &tol).is_some()).collect();
    let matched_reference = ref_hits.iter().flatten().count();
    let matched_detections = detection_matched.iter().filter(|m| **m).count();
    let mean_angle_error_deg = if matched_reference == 0 {
        0.0
    } else {
        ref_hits.iter().flatten().map(|h| h.1).sum::<f64>() / matched_reference as f64
    };
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let stats = MatchStats {
        detections: detected.len(),
        reference: reference.len(),
        matched_reference,
        matched_detections,
        tp_rate: ratio(matched_reference, reference.len()),
        spurious_rate: ratio(detected.len() - matched_detections, detected.len()),
        mean_angle_error_deg,
    };
    DetectionReport {
        responses: detected.iter().map(|c| c.magnitude).collect(),
        detected: detected.clone(),
        stats,
        detection_matched,
    }
}

/// L² energies of a residual inside and outside the band around predicted
/// artifact lines.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BandEnergy {
    pub in_band: f64,
    pub out_band: f64,
}

impl BandEnergy {
    /// in_band / (in_band + out_band), or 0 for a zero residual.
    pub fn in_fraction(&self) -> f64 {
        let t = self.in_band + self.out_band;
        if t > 0.0 {
            self.in_band / t
        } else {
            0.0
        }
    }
}

/// img − G_{4σ_g} ∗ img.
pub fn highpass(img: &Image<f64>, sigma_g: f64) -> Result<Image<f64>> {
    img.sub(&gaussian_blur(img, 4.0 * sigma_g)?)
}

/// High-pass of the difference between a limited-data and a reference
/// reconstruction.
pub fn highpass_residual(limited: &Image<f64>, reference: &Image<f64>, sigma_g: f64) -> Result<Image<f64>> {
    limited.check_same_grid(reference).map_err(|_| Error::GridMismatch("limited and reference reconstructions".into()))?;
    highpass(&limited.sub(reference)?, sigma_g)
}

/// Whether pixel center `p` lies within `band` of some line.
pub fn in_band(p: &VecN, lines: &[ArtifactLine], band: f64) -> bool {
    lines.iter().any(|l| l.distance(p) <= band)
}

/// Splits the squared L² norm of `residual` by distance ≤ `band_px`
/// pixels to a predicted line.
pub fn band_energy(residual: &Image<f64>, lines: &[ArtifactLine], band_px: f64) -> Result<BandEnergy> {
    planar(&residual.grid)?;
    let band = band_px * residual.grid.min_spacing();
    let dv = residual.grid.cell_volume();
    let (i, o) = (0..residual.values.len())
        .into_par_iter()
        .map(|k| {
            let e = residual.values[k].powi(2) * dv;
            if in_band(&residual.grid.point(k), lines, band) {
                (e, 0.0)
            } else {
                (0.0, e)
            }
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(BandEnergy { in_band: i, out_band: o })
}

/// [`highpass_residual`] followed by [`band_energy`].
pub fn artifact_energy(
    limited: &Image<f64>,
    reference: &Image<f64>,
    lines: &[ArtifactLine],
    band_px: f64,
    sigma_g: f64,
) -> Result<BandEnergy> {
    band_energy(&highpass_residual(limited, reference, sigma_g)?, lines, band_px)
}
