use std::io::{BufRead, Write};

use super::sets::{DataWavefrontSet, Tolerance, WavefrontSet};
use crate::geometry::{project_onto_hyperplane, AngularSet, Covector, DataCovector, Direction, Membership, VecN};
use crate::transform::Grid;
use crate::{Error, Result};

/// Discretisation of the continuous sets: lattice step and clipping box for
/// artifact lines, fiber step at corners, offsets for WF(χ_{A×ℝ}) and rim
/// samples of bd(A) in three dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampling {
    pub t_step: f64,
    pub lo: VecN,
    pub hi: VecN,
    pub fiber_step_deg: f64,
    pub s_samples: Vec<f64>,
    pub rim_samples: usize,
}

impl Sampling {
    /// Pixel-step lattice clipped to the grid's support box.
    pub fn for_grid(grid: &Grid) -> Self {
        let (lo, hi) = grid.support_box();
        let r = grid.circumradius();
        Self {
            t_step: grid.min_spacing(),
            lo,
            hi,
            fiber_step_deg: 5.0,
            s_samples: (0..9).map(|k| -r + 2.0 * r * k as f64 / 8.0).collect(),
            rim_samples: 64,
        }
    }
}

/// λ₀ = (ω, x·ω, ‖ξ‖[−π_ω(x)dω + ds]) and its antipodal partner λ₁ for
/// every sample, stored in that order.
pub fn compose_c(wf: &WavefrontSet) -> Result<DataWavefrontSet> {
    let mut out = Vec::with_capacity(2 * wf.len());
    for c in wf.iter() {
        if !(c.magnitude > 0.0) {
            return Err(Error::ZeroCovector);
        }
        let (l0, l1) = lambdas(c)?;
        out.push(l0);
        out.push(l1);
    }
    Ok(DataWavefrontSet::new(out, wf.tol))
}

/// The two data-side preimages of (x, ξ).
pub fn lambdas(c: &Covector) -> Result<(DataCovector, DataCovector)> {
    let w = c.omega;
    let z = project_onto_hyperplane(&c.x, &w);
    let l0 = DataCovector::from_alpha_z(w, c.x.dot(&w.vector()), c.magnitude, z)?;
    Ok((l0, l0.antipodal()))
}

/// Result of Cᵗ: image covectors plus the number of pure dω samples that
/// compose to nothing.
#[derive(Clone, Debug, PartialEq)]
pub struct CtImage {
    pub wf: WavefrontSet,
    pub dropped: usize,
}

/// (ω, s, α[−z dω + ds]) ↦ (sω + z, αω).
pub fn compose_ct(dwf: &DataWavefrontSet) -> CtImage {
    let mut samples = Vec::with_capacity(dwf.len());
    let mut dropped = 0;
    for d in dwf.iter() {
        if d.eta_s == 0.0 {
            dropped += 1;
            continue;
        }
        samples.push(ct_point(d));
    }
    CtImage { wf: WavefrontSet::new(samples, dwf.tol), dropped }
}

fn ct_point(d: &DataCovector) -> Covector {
    let alpha = d.eta_s;
    let z = d.eta_omega * (-1.0 / alpha);
    let x = d.omega.vector() * d.s + z;
    let omega = if alpha > 0.0 { d.omega } else { d.omega.opposite() };
    Covector { x, omega, magnitude: alpha.abs() }
}

/// WF(χ_{A×ℝ}): pure dω covectors over bd(A) at every offset in
/// `sampling.s_samples`, with fibers from the boundary conormals.
pub fn wf_chi_axr(a: &AngularSet, sampling: &Sampling, tol: Tolerance) -> Result<DataWavefrontSet> {
    let mut out = Vec::new();
    for w in a.boundary_directions(sampling.rim_samples) {
        let cn = a.boundary_conormals(&w)?;
        for y in cn.sample_rays(sampling.fiber_step_deg) {
            for &s in &sampling.s_samples {
                let mut d = DataCovector::pure_domega(w, s, y)?;
                d.full_fiber = cn.full_fiber;
                out.push(d);
            }
        }
    }
    Ok(DataWavefrontSet::new(out, tol))
}

/// Parameter interval of `base + t·dir` inside the box.
pub(crate) fn clip_interval(base: &VecN, dir: &VecN, lo: &VecN, hi: &VecN) -> Option<(f64, f64)> {
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..base.dim() {
        if dir[i].abs() < 1e-300 {
            if base[i] < lo[i] || base[i] > hi[i] {
                return None;
            }
            continue;
        }
        let (a, b) = ((lo[i] - base[i]) / dir[i], (hi[i] - base[i]) / dir[i]);
        t0 = t0.max(a.min(b));
        t1 = t1.min(a.max(b));
    }
    (t0 <= t1).then_some((t0, t1))
}

/// Nonzero lattice values k·step inside the clipped interval.
pub(crate) fn t_lattice(base: &VecN, dir: &VecN, sampling: &Sampling) -> Vec<f64> {
    match clip_interval(base, dir, &sampling.lo, &sampling.hi) {
        None => Vec::new(),
        Some((t0, t1)) => {
            let (k0, k1) = ((t0 / sampling.t_step).ceil() as i64, (t1 / sampling.t_step).floor() as i64);
            (k0..=k1).filter(|k| *k != 0).map(|k| k as f64 * sampling.t_step).collect()
        }
    }
}

/// Hörmander's bound Q(A×ℝ, W) as the union of W over ω ∈ A, WF(χ_{A×ℝ})
/// and the sums of matched-base-point covectors
/// (ω, s, α[−(z + t y)dω + ds]) over ω ∈ bd(A).
pub fn product_q(a: &AngularSet, w: &DataWavefrontSet, sampling: &Sampling) -> Result<DataWavefrontSet> {
    let chi = wf_chi_axr(a, sampling, w.tol)?;
    check_non_cancellation(a, w)?;
    let mut out: Vec<DataCovector> = w.iter().filter(|d| a.contains(&d.omega)).copied().collect();
    out.extend_from_slice(&chi.samples);
    for d in w.iter() {
        if d.eta_s == 0.0 || a.membership(&d.omega) != Membership::Boundary {
            continue;
        }
        let cn = a.boundary_conormals(&d.omega)?;
        let z = d.z().expect("nonzero ds component");
        let base = d.omega.vector() * d.s + z;
        for y in cn.sample_lines(sampling.fiber_step_deg) {
            for t in t_lattice(&base, &y, sampling) {
                let mut sum = DataCovector::from_alpha_z(d.omega, d.s, d.eta_s, z + y * t)?;
                sum.full_fiber = cn.full_fiber;
                out.push(sum);
            }
        }
    }
    Ok(DataWavefrontSet::new(out, w.tol))
}

/// No covector of W may be the negative of a covector of WF(χ_{A×ℝ}) over
/// the same base point.
fn check_non_cancellation(a: &AngularSet, w: &DataWavefrontSet) -> Result<()> {
    for d in w.iter() {
        if d.eta_s != 0.0 || a.membership(&d.omega) != Membership::Boundary {
            continue;
        }
        let cn = a.boundary_conormals(&d.omega)?;
        let neg = -d.eta_omega;
        let n = neg.norm();
        let hit = cn.full_fiber || cn.rays().iter().any(|y| (neg.dot(y) - n * y.norm()).abs() <= 1e-12 * n.max(1.0));
        if hit {
            return Err(Error::NonCancellation(format!(
                "data covector at ω = {:?}, s = {} with η = {:?} dω cancels a conormal of χ_{{A×ℝ}}",
                d.omega.vector(),
                d.s,
                d.eta_omega
            )));
        }
    }
    Ok(())
}

/// WF(f) ∩ 𝒱_A: samples with ω(ξ) ∈ A or −ω(ξ) ∈ A, using int(A) instead of
/// A when `open_interior` is set.
pub fn visible_set(wf: &WavefrontSet, a: &AngularSet, open_interior: bool) -> WavefrontSet {
    let keep = |w: &Direction| match a.membership(w) {
        Membership::Interior => true,
        Membership::Boundary => !open_interior,
        Membership::Exterior => false,
    };
    let samples = wf.iter().filter(|c| keep(&c.omega) || keep(&c.omega.opposite())).copied().collect();
    WavefrontSet::new(samples, wf.tol)
}

/// A predicted artifact: the line {x + t y : t ≠ 0} in H(ω_b, x·ω_b)
/// carrying codirections α ω_b for every stored α.
#[derive(Clone, Debug, PartialEq)]
pub struct ArtifactLine {
    pub generator: Covector,
    pub boundary_direction: Direction,
    /// Unit spreading direction y ∈ H(ω_b, 0).
    pub spread: VecN,
    /// Set when the generator sits at a corner of bd(A) and the artifact
    /// fills the hyperplane; the line is then one of its sampled lines.
    pub full_hyperplane: bool,
    /// Signed magnitudes with ξ = α ω_b.
    pub alphas: Vec<f64>,
    pub points: Vec<VecN>,
}

impl ArtifactLine {
    /// x·ω_b.
    pub fn offset(&self) -> f64 {
        self.generator.x.dot(&self.boundary_direction.vector())
    }

    /// Euclidean distance from `p` to the full line through the generator.
    pub fn distance(&self, p: &VecN) -> f64 {
        let d = *p - self.generator.x;
        (d - self.spread * d.dot(&self.spread)).norm()
    }

    /// The artifact covectors (x + t y, α ω_b) at every sampled point.
    pub fn covectors(&self) -> Vec<Covector> {
        let mut out = Vec::with_capacity(self.points.len() * self.alphas.len());
        for p in &self.points {
            for &a in &self.alphas {
                let omega = if a > 0.0 { self.boundary_direction } else { self.boundary_direction.opposite() };
                out.push(Covector { x: *p, omega, magnitude: a.abs() });
            }
        }
        out
    }

    fn same_line(&self, w: &Direction, x: &VecN, y: &VecN) -> Option<f64> {
        let dot = self.boundary_direction.vector().dot(&w.vector());
        if (dot.abs() - 1.0).abs() > 1e-9 || (self.spread.dot(y).abs() - 1.0).abs() > 1e-9 {
            return None;
        }
        (self.distance(x) <= 1e-9 * (1.0 + x.norm())).then(|| dot.signum())
    }
}

/// The set 𝒜_{bd(A)}(f): one line per generator (x, αω) ∈ WF(f) with
/// ω ∈ bd(A) and conormal y of bd(A) at ω. Geometrically equal lines are
/// merged and keep all their α.
pub fn predict_artifacts(wf: &WavefrontSet, a: &AngularSet, sampling: &Sampling) -> Result<Vec<ArtifactLine>> {
    let mut lines: Vec<ArtifactLine> = Vec::new();
    for c in wf.iter() {
        for (w, alpha) in [(c.omega, c.magnitude), (c.omega.opposite(), -c.magnitude)] {
            if a.membership(&w) != Membership::Boundary {
                continue;
            }
            let cn = a.boundary_conormals(&w)?;
            for y in cn.sample_lines(sampling.fiber_step_deg) {
                if let Some((line, sign)) = lines.iter_mut().find_map(|l| l.same_line(&w, &c.x, &y).map(|s| (l, s))) {
                    let al = alpha * sign;
                    if !line.alphas.iter().any(|v| (v - al).abs() <= 1e-12 * al.abs()) {
                        line.alphas.push(al);
                    }
                    continue;
                }
                let points = t_lattice(&c.x, &y, sampling).into_iter().map(|t| c.x + y * t).collect();
                lines.push(ArtifactLine {
                    generator: *c,
                    boundary_direction: w,
                    spread: y,
                    full_hyperplane: cn.full_fiber,
                    alphas: vec![alpha],
                    points,
                });
            }
        }
    }
    Ok(lines)
}

/// All artifact covectors of a line list as one sampled set.
pub fn artifact_set(lines: &[ArtifactLine], tol: Tolerance) -> WavefrontSet {
    WavefrontSet::new(lines.iter().flat_map(|l| l.covectors()).collect(), tol)
}

/// Upper bound WF_A(f) ∪ 𝒜_{bd(A)}(f) together with its independent
/// recomputation Cᵗ∘Q(A×ℝ, C∘WF(f)).
#[derive(Clone, Debug)]
pub struct Characterization {
    pub visible: WavefrontSet,
    pub artifacts: Vec<ArtifactLine>,
    pub upper_bound: WavefrontSet,
    pub oracle: WavefrontSet,
    /// Pure dω covectors of Q dropped by Cᵗ.
    pub dropped: usize,
}

/// Computes the upper bound directly and through Cᵗ∘Q∘C, and fails with
/// [`Error::OracleMismatch`] unless the two agree within tolerance.
pub fn characterization_upper_bound(wf: &WavefrontSet, a: &AngularSet, sampling: &Sampling) -> Result<Characterization> {
    let visible = visible_set(wf, a, false);
    let artifacts = predict_artifacts(wf, a, sampling)?;
    let upper_bound = visible.union(&artifact_set(&artifacts, wf.tol));
    let q = product_q(a, &compose_c(wf)?, sampling)?;
    let ct = compose_ct(&q);
    let cmp = upper_bound.compare(&ct.wf);
    if !cmp.is_equal() {
        let show = |set: &WavefrontSet, idx: &[usize]| {
            idx.iter()
                .take(3)
                .map(|&k| format!("(x={:?}, ω={:?})", set.samples[k].x, set.samples[k].omega.vector()))
                .collect::<Vec<_>>()
                .join(", ")
        };
        return Err(Error::OracleMismatch(format!(
            "{} of {} direct samples missing from Cᵗ∘Q∘C, e.g. {}; {} of {} oracle samples missing from the direct union, e.g. {}",
            cmp.left_unmatched.len(),
            upper_bound.len(),
            show(&upper_bound, &cmp.left_unmatched),
            cmp.right_unmatched.len(),
            ct.wf.len(),
            show(&ct.wf, &cmp.right_unmatched),
        )));
    }
    Ok(Characterization { visible, artifacts, upper_bound, oracle: ct.wf, dropped: ct.dropped })
}

/// One row per artifact point: `line,x1..xn,omega1..omegan,magnitude,`
/// followed by the generator point, the boundary direction, the spreading
/// direction and the full-hyperplane flag.
pub fn write_artifacts_csv<W: Write>(lines: &[ArtifactLine], mut w: W) -> Result<()> {
    let n = lines.first().map_or(2, |l| l.generator.dim());
    let cols = |p: &'static str| (1..=n).map(move |i| format!("{p}{i}"));
    let mut head = vec!["line".to_string()];
    head.extend(cols("x"));
    head.extend(cols("omega"));
    head.push("magnitude".into());
    head.extend(cols("gen_x"));
    head.extend(cols("bd_omega"));
    head.extend(cols("y"));
    head.push("full_hyperplane".into());
    writeln!(w, "{}", head.join(","))?;
    let fmt = |v: &VecN| v.as_slice().iter().map(|c| format!("{c:.17e}")).collect::<Vec<_>>().join(",");
    for (k, l) in lines.iter().enumerate() {
        let meta = format!(
            "{},{},{},{}",
            fmt(&l.generator.x),
            fmt(&l.boundary_direction.vector()),
            fmt(&l.spread),
            u8::from(l.full_hyperplane)
        );
        for c in l.covectors() {
            writeln!(w, "{k},{},{},{:.17e},{meta}", fmt(&c.x), fmt(&c.omega.vector()), c.magnitude)?;
        }
    }
    Ok(())
}

/// Reads the format of [`write_artifacts_csv`]. Lines are regrouped by the
/// `line` column; a line whose points were all clipped is not recoverable.
pub fn read_artifacts_csv<R: BufRead>(r: R) -> Result<Vec<ArtifactLine>> {
    let mut rows = r.lines();
    let head = rows.next().ok_or_else(|| Error::Format("empty artifacts CSV".into()))??;
    let n = head.split(',').filter(|c| c.trim().starts_with('x') && c.trim()[1..].parse::<usize>().is_ok()).count();
    if n != 2 && n != 3 {
        return Err(Error::Format(format!("cannot infer dimension from header `{head}`")));
    }
    let width = 5 * n + 3;
    let mut out: Vec<(usize, ArtifactLine)> = Vec::new();
    for (k, row) in rows.enumerate() {
        let row = row?;
        if row.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = row
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Format(format!("line {}: {e}", k + 2)))?;
        if v.len() != width {
            return Err(Error::Format(format!("line {}: expected {width} columns", k + 2)));
        }
        let id = v[0] as usize;
        let at = |i: usize| VecN::new(&v[1 + i * n..1 + (i + 1) * n]);
        let x = at(0)?;
        let omega = Direction::new(at(1)?)?;
        let mag = v[1 + 2 * n];
        let tail = &v[2 + 2 * n..];
        let gen_x = VecN::new(&tail[..n])?;
        let bd = Direction::new(VecN::new(&tail[n..2 * n])?)?;
        let spread = VecN::new(&tail[2 * n..3 * n])?;
        let alpha = mag * omega.vector().dot(&bd.vector()).signum();
        match out.last_mut() {
            Some((last, line)) if *last == id => {
                if line.points.last() != Some(&x) {
                    line.points.push(x);
                } else if !line.alphas.contains(&alpha) {
                    line.alphas.push(alpha);
                }
            }
            _ => out.push((
                id,
                ArtifactLine {
                    generator: Covector::from_direction(gen_x, if alpha > 0.0 { bd } else { bd.opposite() }, mag)?,
                    boundary_direction: bd,
                    spread,
                    full_hyperplane: tail[3 * n] != 0.0,
                    alphas: vec![alpha],
                    points: vec![x],
                },
            )),
        }
    }
    Ok(out.into_iter().map(|(_, l)| l).collect())
}
