use num_complex::Complex64;
use rayon::prelude::*;

use super::grid::{Grid, Image, Sample};
use super::sinogram::{DirectionSet, OffsetGrid, Sinogram};
use crate::filters::CutoffWindow;
use crate::geometry::{AngularSet, Direction, Membership, VecN};
use crate::phantoms::WeightField;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ForwardOptions {
    /// Fail when μ is not strictly positive at a quadrature point.
    pub require_positive_weight: bool,
    /// Evaluate only at the requested offsets, without demanding that they cover the support.
    pub partial_offsets: bool,
}

/// Parameter interval of the line `base + t·dir` inside the box `[lo, hi]`.
fn clip_line(base: &VecN, dir: &VecN, lo: &VecN, hi: &VecN) -> Option<(f64, f64)> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    for a in 0..base.dim() {
        if dir[a].abs() < 1e-15 {
            if base[a] < lo[a] || base[a] > hi[a] {
                return None;
            }
        } else {
            let (u, v) = ((lo[a] - base[a]) / dir[a], (hi[a] - base[a]) / dir[a]);
            t0 = t0.max(u.min(v));
            t1 = t1.min(u.max(v));
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

/// Radius of a ball about the world origin containing every point where the
/// interpolated image can be nonzero.
fn support_radius<T: Sample>(f: &Image<T>) -> Option<f64> {
    let g = &f.grid;
    let pad: f64 = g.spacing().iter().map(|h| h * h).sum::<f64>().sqrt();
    f.values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != T::default())
        .map(|(k, _)| g.point(k).norm() + pad)
        .reduce(f64::max)
}

/// Discrete R_μ f(ω, s) = ∫_{x·ω=s} f(x) μ(ω, x) dx.
///
/// Each line (plane in 3-D) is sampled with step h/2, where h is the finest
/// grid spacing, on a lattice anchored at the projection of the grid center,
/// and f is interpolated bilinearly (trilinearly). Anchoring the lattice at
/// the center makes (ω, s) and (−ω, −s) use identical sample points.
pub fn forward<T: Sample>(f: &Image<T>, mu: &WeightField, directions: &DirectionSet, offsets: &OffsetGrid) -> Result<Sinogram<T>> {
    forward_with(f, mu, directions, offsets, ForwardOptions::default())
}

pub fn forward_with<T: Sample>(
    f: &Image<T>,
    mu: &WeightField,
    directions: &DirectionSet,
    offsets: &OffsetGrid,
    opts: ForwardOptions,
) -> Result<Sinogram<T>> {
    let dim = f.grid.dim();
    if directions.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: directions.dim() });
    }
    if let Some(r) = support_radius(f).filter(|_| !opts.partial_offsets) {
        if !offsets.covers(-r, r) {
            return Err(Error::OffsetCoverage { start: offsets.start, end: offsets.end(), lo: -r, hi: r });
        }
    }
    let grid = &f.grid;
    let delta = 0.5 * grid.min_spacing();
    let (lo, hi) = grid.support_box();
    let center = grid.center();
    let mu_const = mu.as_constant();
    if let Some(c) = mu_const {
        if opts.require_positive_weight && !(c > 0.0) {
            return Err(Error::NonPositiveWeight { value: c, direction: vec![], point: vec![] });
        }
    }
    let weight = |w: &Direction, x: &VecN| -> Result<f64> {
        match mu_const {
            Some(c) => Ok(c),
            None => {
                let v = mu.eval(w, x);
                if opts.require_positive_weight && !(v > 0.0) {
                    return Err(Error::NonPositiveWeight { value: v, direction: w.vector().to_vec(), point: x.to_vec() });
                }
                Ok(v)
            }
        }
    };

    let n = offsets.count;
    let rows: Vec<Result<Vec<T>>> = directions
        .directions()
        .par_iter()
        .map(|w| {
            let wv = w.vector();
            let basis = w.hyperplane_basis();
            let mut row = vec![T::default(); n];
            for (j, out) in row.iter_mut().enumerate() {
                let base = wv * offsets.value(j);
                let mut acc = T::default();
                if dim == 2 {
                    let p = basis[0];
                    let tc = center.dot(&p);
                    if let Some((t0, t1)) = clip_line(&base, &p, &lo, &hi) {
                        let k0 = ((t0 - tc) / delta).ceil() as i64;
                        let k1 = ((t1 - tc) / delta).floor() as i64;
                        for k in k0..=k1 {
                            let x = base + p * (tc + k as f64 * delta);
                            let v = grid.interpolate(&f.values, &x);
                            if v != T::default() {
                                acc += v * weight(w, &x)?;
                            }
                        }
                    }
                    *out = acc * delta;
                } else {
                    let (e1, e2) = (basis[0], basis[1]);
                    let (c1, c2) = (center.dot(&e1), center.dot(&e2));
                    let reach = (hi - lo).norm() * 0.5;
                    let kmax = (reach / delta).ceil() as i64;
                    for a in -kmax..=kmax {
                        let row_base = base + e1 * (c1 + a as f64 * delta);
                        let Some((t0, t1)) = clip_line(&row_base, &e2, &lo, &hi) else { continue };
                        let k0 = (((t0 - c2) / delta).ceil() as i64).max(-kmax);
                        let k1 = (((t1 - c2) / delta).floor() as i64).min(kmax);
                        for b in k0..=k1 {
                            let x = row_base + e2 * (c2 + b as f64 * delta);
                            let v = grid.interpolate(&f.values, &x);
                            if v != T::default() {
                                acc += v * weight(w, &x)?;
                            }
                        }
                    }
                    *out = acc * (delta * delta);
                }
            }
            Ok(row)
        })
        .collect();
    let mut values = Vec::with_capacity(directions.len() * n);
    for r in rows {
        values.extend(r?);
    }
    Sinogram::from_values(directions, offsets, AngularSet::full(dim), values)
}

/// χ_{A×ℝ} g: rows whose direction lies outside the closed set A are zeroed.
pub fn restrict_hard<T: Sample>(g: &Sinogram<T>, a: &AngularSet) -> Sinogram<T> {
    assert_eq!(a.dim(), g.dim(), "angular set and sinogram dimensions differ");
    let mut out = g.clone();
    for (k, w) in g.directions.directions().iter().enumerate() {
        if a.membership(w) == Membership::Exterior {
            out.row_mut(k).iter_mut().for_each(|v| *v = T::default());
        }
    }
    out.support = a.clone();
    out
}

/// K_φ g(ω, s) = φ(ω) g(ω, s).
pub fn restrict_smooth<T: Sample>(g: &Sinogram<T>, phi: &CutoffWindow) -> Sinogram<T> {
    assert_eq!(phi.support().dim(), g.dim(), "window and sinogram dimensions differ");
    let mut out = g.clone();
    for (k, w) in g.directions.directions().iter().enumerate() {
        let c = phi.eval(w);
        if c != 1.0 {
            out.row_mut(k).iter_mut().for_each(|v| *v = *v * c);
        }
    }
    out.support = phi.support().clone();
    out
}

/// R*_ν g(x) = ∫ g(ω, x·ω) ν(ω, x) dω by the direction-set quadrature with
/// linear interpolation in s.
pub fn backproject<T: Sample>(g: &Sinogram<T>, nu: &WeightField, grid: &Grid) -> Result<Image<T>> {
    if grid.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), found: g.dim() });
    }
    let r = grid.circumradius();
    if !g.offsets.covers(-r, r) {
        return Err(Error::OffsetCoverage { start: g.offsets.start, end: g.offsets.end(), lo: -r, hi: r });
    }
    let nu_const = nu.as_constant();
    let active: Vec<(usize, Direction, f64)> = g
        .directions
        .directions()
        .iter()
        .zip(g.directions.weights())
        .enumerate()
        .filter(|(k, (_, w))| **w != 0.0 && g.row(*k).iter().any(|v| *v != T::default()))
        .map(|(k, (d, w))| (k, *d, *w))
        .collect();
    let (s0, ds, n) = (g.offsets.start, g.offsets.spacing, g.offsets.count);
    let nx = grid.dims()[0];
    let mut values = vec![T::default(); grid.len()];
    values.par_chunks_mut(nx).enumerate().for_each(|(line, out)| {
        for (i, o) in out.iter_mut().enumerate() {
            let x = grid.point(line * nx + i);
            let mut acc = T::default();
            for (k, w, q) in &active {
                let u = ((x.dot(&w.vector()) - s0) / ds).clamp(0.0, (n - 1) as f64);
                let j = (u.floor() as usize).min(n - 2);
                let f = u - j as f64;
                let row = g.row(*k);
                let v = row[j] * (1.0 - f) + row[j + 1] * f;
                let wt = match nu_const {
                    Some(c) => c * q,
                    None => nu.eval(w, &x) * q,
                };
                acc += v * wt;
            }
            *o = acc;
        }
    });
    Image::from_values(grid, values)
}

/// Backprojection of a complex sinogram followed by taking real parts.
pub fn backproject_real(g: &Sinogram<Complex64>, nu: &WeightField, grid: &Grid) -> Result<Image<f64>> {
    Ok(backproject(g, nu, grid)?.real_part())
}
