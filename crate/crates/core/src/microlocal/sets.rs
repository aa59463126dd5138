use std::collections::HashMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::geometry::{Covector, DataCovector, Direction, VecN};
use crate::{Error, Result};

/// Matching tolerances for sampled covector sets: base points within `dx`
/// and codirections within `dtheta_deg` degrees.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub dx: f64,
    pub dtheta_deg: f64,
}

impl Tolerance {
    pub fn new(dx: f64, dtheta_deg: f64) -> Self {
        Self { dx, dtheta_deg }
    }

    /// Two pixels and five degrees.
    pub fn pixels(h: f64) -> Self {
        Self { dx: 2.0 * h, dtheta_deg: 5.0 }
    }

    fn cos_theta(&self) -> f64 {
        self.dtheta_deg.to_radians().cos()
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::pixels(1.0 / 128.0)
    }
}

/// Outcome of a two-sided tolerance comparison.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SetComparison {
    /// Indices of left samples with no partner on the right.
    pub left_unmatched: Vec<usize>,
    /// Indices of right samples with no partner on the left.
    pub right_unmatched: Vec<usize>,
}

impl SetComparison {
    pub fn is_equal(&self) -> bool {
        self.left_unmatched.is_empty() && self.right_unmatched.is_empty()
    }
}

/// Uniform spatial hash over base points with cell size `cell`.
pub(crate) struct PointIndex {
    cell: f64,
    dim: usize,
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

impl PointIndex {
    pub(crate) fn new<'a>(points: impl Iterator<Item = &'a VecN>, cell: f64) -> Self {
        let cell = if cell > 0.0 { cell } else { 1e-9 };
        let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        let mut dim = 2;
        for (k, p) in points.enumerate() {
            dim = p.dim();
            buckets.entry(Self::key(p, cell)).or_default().push(k);
        }
        Self { cell, dim, buckets }
    }

    fn key(p: &VecN, cell: f64) -> [i64; 3] {
        let mut k = [0i64; 3];
        for (i, v) in p.as_slice().iter().enumerate() {
            k[i] = (v / cell).floor() as i64;
        }
        k
    }

    /// Indices stored in the cells neighbouring `p`.
    pub(crate) fn near(&self, p: &VecN) -> impl Iterator<Item = usize> + '_ {
        let c = Self::key(p, self.cell);
        let r: i64 = 1;
        let z = if self.dim == 3 { r } else { 0 };
        let mut keys = Vec::new();
        for i in -r..=r {
            for j in -r..=r {
                for k in -z..=z {
                    keys.push([c[0] + i, c[1] + j, c[2] + k]);
                }
            }
        }
        keys.into_iter().filter_map(move |k| self.buckets.get(&k)).flatten().copied()
    }
}

/// A finite sample of a wavefront set with matching tolerances.
#[derive(Clone, Debug, PartialEq)]
pub struct WavefrontSet {
    pub samples: Vec<Covector>,
    pub tol: Tolerance,
}

impl WavefrontSet {
    pub fn new(samples: Vec<Covector>, tol: Tolerance) -> Self {
        Self { samples, tol }
    }

    pub fn empty(tol: Tolerance) -> Self {
        Self { samples: Vec::new(), tol }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Covector> {
        self.samples.iter()
    }

    /// Concatenation; the tolerance of `self` is kept.
    pub fn union(&self, other: &WavefrontSet) -> WavefrontSet {
        let mut samples = self.samples.clone();
        samples.extend_from_slice(&other.samples);
        WavefrontSet { samples, tol: self.tol }
    }

    fn index(&self) -> PointIndex {
        PointIndex::new(self.samples.iter().map(|c| &c.x), self.tol.dx)
    }

    fn close(tol: &Tolerance, cos_t: f64, a: &Covector, b: &Covector) -> bool {
        a.x.distance(&b.x) <= tol.dx && a.omega.vector().dot(&b.omega.vector()) >= cos_t
    }

    /// Whether some sample matches `c` within tolerance.
    pub fn contains_match(&self, c: &Covector) -> bool {
        let cos_t = self.tol.cos_theta();
        self.samples.iter().any(|s| Self::close(&self.tol, cos_t, s, c))
    }

    /// For every sample of `self`, whether it has a partner in `other`.
    fn matched_in(&self, other: &WavefrontSet, tol: &Tolerance) -> Vec<bool> {
        let idx = other.index();
        let cos_t = tol.cos_theta();
        self.samples
            .par_iter()
            .map(|c| idx.near(&c.x).any(|j| Self::close(tol, cos_t, c, &other.samples[j])))
            .collect()
    }

    /// Samples of either set that have a partner in the other one.
    pub fn intersection(&self, other: &WavefrontSet) -> WavefrontSet {
        let tol = self.tol;
        let left = self.matched_in(other, &tol);
        let right = other.matched_in(self, &tol);
        let mut samples: Vec<Covector> =
            self.samples.iter().zip(left).filter(|(_, m)| *m).map(|(c, _)| *c).collect();
        samples.extend(other.samples.iter().zip(right).filter(|(_, m)| *m).map(|(c, _)| *c));
        WavefrontSet { samples, tol }
    }

    /// Two-sided comparison under the tolerance of `self`.
    pub fn compare(&self, other: &WavefrontSet) -> SetComparison {
        let tol = self.tol;
        let unmatched = |m: Vec<bool>| m.iter().enumerate().filter(|(_, v)| !**v).map(|(k, _)| k).collect();
        SetComparison {
            left_unmatched: unmatched(self.matched_in(other, &tol)),
            right_unmatched: unmatched(other.matched_in(self, &tol)),
        }
    }

    /// Writes `x1,...,xn,omega1,...,omegan,magnitude` rows with a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.samples.first().map_or(2, |c| c.dim());
        let mut head: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        head.extend((1..=n).map(|i| format!("omega{i}")));
        head.push("magnitude".into());
        writeln!(w, "{}", head.join(","))?;
        for c in &self.samples {
            let mut row: Vec<String> = c.x.as_slice().iter().map(|v| format!("{v:.17e}")).collect();
            row.extend(c.omega.vector().as_slice().iter().map(|v| format!("{v:.17e}")));
            row.push(format!("{:.17e}", c.magnitude));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Reads the format of [`write_csv`](Self::write_csv). Extra trailing
    /// columns are ignored.
    pub fn read_csv<R: BufRead>(r: R, tol: Tolerance) -> Result<Self> {
        let mut lines = r.lines();
        let head = lines.next().ok_or_else(|| Error::Format("empty wavefront CSV".into()))??;
        let n = head.split(',').filter(|c| c.trim().starts_with('x') && c.trim()[1..].parse::<usize>().is_ok()).count();
        if n != 2 && n != 3 {
            return Err(Error::Format(format!("cannot infer dimension from header `{head}`")));
        }
        let mut samples = Vec::new();
        for (k, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let v: Vec<f64> = line
                .split(',')
                .take(2 * n + 1)
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("line {}: {e}", k + 2)))?;
            if v.len() != 2 * n + 1 {
                return Err(Error::Format(format!("line {}: expected {} columns", k + 2, 2 * n + 1)));
            }
            let x = VecN::new(&v[..n])?;
            let omega = Direction::new(VecN::new(&v[n..2 * n])?)?;
            samples.push(Covector::from_direction(x, omega, v[2 * n])?);
        }
        Ok(Self { samples, tol })
    }
}

/// A finite sample of a subset of T*(Ξ). Offsets and z-vectors are matched
/// within `tol.dx`, directions ω and pure dω fibers within `tol.dtheta_deg`.
#[derive(Clone, Debug, PartialEq)]
pub struct DataWavefrontSet {
    pub samples: Vec<DataCovector>,
    pub tol: Tolerance,
}

impl DataWavefrontSet {
    pub fn new(samples: Vec<DataCovector>, tol: Tolerance) -> Self {
        Self { samples, tol }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DataCovector> {
        self.samples.iter()
    }

    pub fn union(&self, other: &DataWavefrontSet) -> DataWavefrontSet {
        let mut samples = self.samples.clone();
        samples.extend_from_slice(&other.samples);
        DataWavefrontSet { samples, tol: self.tol }
    }

    /// Tolerance match of two data covectors. Covectors with η_s ≠ 0 match
    /// when the signs of α agree and z agrees; pure dω covectors match when
    /// the fiber directions agree.
    pub fn close(tol: &Tolerance, a: &DataCovector, b: &DataCovector) -> bool {
        let cos_t = tol.cos_theta();
        if (a.s - b.s).abs() > tol.dx || a.omega.vector().dot(&b.omega.vector()) < cos_t {
            return false;
        }
        match (a.z(), b.z()) {
            (Some(za), Some(zb)) => a.eta_s.signum() == b.eta_s.signum() && za.distance(&zb) <= tol.dx,
            (None, None) => {
                if a.full_fiber || b.full_fiber {
                    return a.full_fiber == b.full_fiber;
                }
                let (na, nb) = (a.eta_omega.norm(), b.eta_omega.norm());
                a.eta_omega.dot(&b.eta_omega) >= cos_t * na * nb
            }
            _ => false,
        }
    }

    pub fn contains_match(&self, c: &DataCovector) -> bool {
        self.samples.iter().any(|s| Self::close(&self.tol, s, c))
    }

    /// Two-sided comparison under the tolerance of `self`.
    pub fn compare(&self, other: &DataWavefrontSet) -> SetComparison {
        let tol = self.tol;
        let side = |a: &DataWavefrontSet, b: &DataWavefrontSet| -> Vec<usize> {
            (0..a.samples.len())
                .into_par_iter()
                .filter(|&k| !b.samples.iter().any(|s| Self::close(&tol, &a.samples[k], s)))
                .collect()
        };
        SetComparison { left_unmatched: side(self, other), right_unmatched: side(other, self) }
    }
}
