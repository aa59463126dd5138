use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::FilterSpec;
use crate::geometry::Direction;
use crate::transform::{OffsetGrid, Sample, Sinogram};
use crate::{Error, Result};

/// FFT length used for a row of `n` offsets: the next power of two ≥ 2n.
pub fn padded_len(n: usize) -> usize {
    (2 * n).next_power_of_two()
}

/// α_k = 2πk/(MΔs) for k < M/2 and 2π(k−M)/(MΔs) above; the Nyquist bin
/// k = M/2 is reported as +π/Δs.
pub fn frequency_grid(m: usize, ds: f64) -> Vec<f64> {
    (0..m)
        .map(|k| {
            let kk = if k <= m / 2 { k as f64 } else { k as f64 - m as f64 };
            2.0 * PI * kk / (m as f64 * ds)
        })
        .collect()
}

/// Multiplier for one row. The Nyquist bin averages p(±α_N) so that the
/// discrete operator commutes with s ↦ −s exactly as the symbol does.
fn multiplier(p: &FilterSpec, omega: &Direction, s: f64, alphas: &[f64]) -> Vec<Complex64> {
    let m = alphas.len();
    alphas
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            if k == m / 2 {
                (p.symbol(omega, s, a) + p.symbol(omega, s, -a)) * 0.5
            } else {
                p.symbol(omega, s, a)
            }
        })
        .collect()
}

/// Linear ramps from the row end values down to zero, mirror-symmetric
/// about the padding midpoint.
fn taper(m: usize, n: usize, first: Complex64, last: Complex64) -> impl Fn(usize) -> Complex64 {
    let pad = m - n;
    let half = (pad / 2) as f64;
    move |i: usize| {
        let r = |k: usize| (1.0 - (k as f64 + 1.0) / (half + 1.0)).max(0.0);
        last * r(i) + first * r(pad - 1 - i)
    }
}

struct Plan {
    fwd: std::sync::Arc<dyn Fft<f64>>,
    inv: std::sync::Arc<dyn Fft<f64>>,
    m: usize,
    n: usize,
}

impl Plan {
    fn new(n: usize) -> Self {
        let m = padded_len(n);
        let mut planner = FftPlanner::new();
        Plan { fwd: planner.plan_fft_forward(m), inv: planner.plan_fft_inverse(m), m, n }
    }

    fn run(&self, row: &[Complex64], mult: &[Complex64], out: &mut [Complex64]) {
        let (m, n) = (self.m, self.n);
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        buf[..n].copy_from_slice(row);
        let fill = taper(m, n, row[0], row[n - 1]);
        for i in 0..m - n {
            buf[n + i] = fill(i);
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fwd.get_inplace_scratch_len().max(self.inv.get_inplace_scratch_len())];
        self.fwd.process_with_scratch(&mut buf, &mut scratch);
        for (b, p) in buf.iter_mut().zip(mult) {
            *b *= p;
        }
        self.inv.process_with_scratch(&mut buf, &mut scratch);
        let scale = 1.0 / m as f64;
        for (o, b) in out.iter_mut().zip(&buf[..n]) {
            *o += b * scale;
        }
    }
}

/// Apply P row by row as a Fourier multiplier in s.
///
/// Each row is zero-padded to the next power of two ≥ 2N, the padding being
/// filled with linear ramps from the row end values to zero. Symbols that
/// depend on s use a frozen-coefficient approximation: the row is split by
/// a partition of unity of hat windows of half-width `N/16` samples (at least
/// 8) and each piece is filtered with the symbol frozen at its window center.
pub fn apply_filter<T: Sample>(g: &Sinogram<T>, p: &FilterSpec) -> Result<Sinogram<Complex64>> {
    check_offsets(&g.offsets)?;
    if p.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), found: p.dim() });
    }
    let n = g.offsets.count;
    let plan = Plan::new(n);
    let alphas = frequency_grid(plan.m, g.offsets.spacing);
    let dirs = g.directions.directions();
    let shared = (!p.depends_on_omega()).then(|| multiplier(p, &dirs[0], 0.0, &alphas));

    let mut out = g.to_complex();
    out.values.par_chunks_mut(n).enumerate().for_each(|(k, row_out)| {
        let row: Vec<Complex64> = g.row(k).iter().map(|v| v.to_complex()).collect();
        row_out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        if row.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
            return;
        }
        if !p.depends_on_s() {
            match &shared {
                Some(mult) => plan.run(&row, mult, row_out),
                None => plan.run(&row, &multiplier(p, &dirs[k], 0.0, &alphas), row_out),
            }
            return;
        }
        let half = (n / 16).max(8);
        let mut center = 0usize;
        loop {
            let piece: Vec<Complex64> = row
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    let d = (j as f64 - center as f64).abs() / half as f64;
                    v * (1.0 - d).max(0.0)
                })
                .collect();
            if piece.iter().any(|v| *v != Complex64::new(0.0, 0.0)) {
                let s = g.offsets.value(center);
                plan.run(&piece, &multiplier(p, &dirs[k], s, &alphas), row_out);
            }
            if center >= n - 1 {
                break;
            }
            center += half;
        }
    });
    Ok(out)
}

fn check_offsets(o: &OffsetGrid) -> Result<()> {
    if !(o.spacing > 0.0) || !o.spacing.is_finite() || o.count < 2 {
        return Err(Error::InvalidFilter(format!("offsets must be uniform with positive spacing, got {o:?}")));
    }
    Ok(())
}
