use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{check_dim, project_onto_hyperplane, Direction, VecN, UNIT_TOL};
use crate::{Error, Result};

/// A closed arc of S¹ starting at angle `start ∈ [0, 2π)` with length `len ∈ (0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub start: f64,
    pub len: f64,
}

impl Arc {
    pub fn end(&self) -> f64 {
        self.start + self.len
    }

    /// Counter-clockwise angular offset of `phi` from the arc start, in `[0, 2π)`.
    fn offset(&self, phi: f64) -> f64 {
        (phi - self.start).rem_euclid(TAU)
    }

    fn classify(&self, phi: f64) -> Membership {
        let d = self.offset(phi);
        if d <= UNIT_TOL || TAU - d <= UNIT_TOL || (d - self.len).abs() <= UNIT_TOL {
            Membership::Boundary
        } else if d < self.len {
            Membership::Interior
        } else {
            Membership::Exterior
        }
    }

    /// Geodesic distance from `phi` to the nearer endpoint when `phi` lies in the arc.
    pub fn depth(&self, phi: f64) -> Option<f64> {
        let d = self.offset(phi);
        if d <= self.len {
            Some(d.min(self.len - d))
        } else if TAU - d <= UNIT_TOL {
            Some(0.0)
        } else {
            None
        }
    }
}

/// A closed geodesic cap {ω : angle(ω, center) ≤ radius} on S².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cap {
    pub center: Direction,
    pub radius: f64,
}

impl Cap {
    /// Signed geodesic depth: positive inside, zero on the rim.
    pub fn depth(&self, omega: &Direction) -> f64 {
        self.radius - omega.angle_to(&self.center)
    }

    fn classify(&self, omega: &Direction) -> Membership {
        let d = self.depth(omega);
        if d.abs() <= UNIT_TOL {
            Membership::Boundary
        } else if d > 0.0 {
            Membership::Interior
        } else {
            Membership::Exterior
        }
    }

    /// Point on the rim at parameter `t` relative to a basis of the tangent plane at the center.
    fn rim_point(&self, t: f64) -> Direction {
        let c = self.center.vector();
        let b = self.center.hyperplane_basis();
        let v = c * self.radius.cos() + (b[0] * t.cos() + b[1] * t.sin()) * self.radius.sin();
        Direction::new(v).expect("rim point is nonzero")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Membership {
    Interior,
    Boundary,
    Exterior,
}

/// A closed subset of S^{n−1} with nonempty interior: the whole sphere, a
/// finite union of arcs (n = 2) or a finite union of caps (n = 3).
#[derive(Clone, Debug, PartialEq)]
pub enum AngularSet {
    Full { dim: usize },
    Arcs(Vec<Arc>),
    Caps(Vec<Cap>),
}

/// Conormal directions to bd(A) at a boundary point ω, as elements of H(ω, 0).
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryConormals {
    /// Set at corners where two or more cap rims meet: the whole fiber
    /// H(ω, 0) \ {0} is conormal.
    pub full_fiber: bool,
    rays: Vec<VecN>,
}

impl BoundaryConormals {
    /// The conormal rays ±y. At a corner these are ± an orthonormal basis of
    /// H(ω, 0); use [`sample_rays`](Self::sample_rays) to cover the fiber.
    pub fn rays(&self) -> &[VecN] {
        &self.rays
    }

    /// Unit rays covering the conormal set. A corner fiber is discretised
    /// with angular step `step_deg` over the full circle.
    pub fn sample_rays(&self, step_deg: f64) -> Vec<VecN> {
        if !self.full_fiber {
            return self.rays.clone();
        }
        let (e1, e2) = (self.rays[0], self.rays[1]);
        let m = (360.0 / step_deg).ceil().max(4.0) as usize;
        (0..m)
            .map(|k| {
                let t = TAU * k as f64 / m as f64;
                e1 * t.cos() + e2 * t.sin()
            })
            .collect()
    }

    /// One representative per line {ty : t ≠ 0}.
    pub fn sample_lines(&self, step_deg: f64) -> Vec<VecN> {
        if !self.full_fiber {
            return vec![self.rays[0]];
        }
        let (e1, e2) = (self.rays[0], self.rays[1]);
        let m = (180.0 / step_deg).ceil().max(2.0) as usize;
        (0..m)
            .map(|k| {
                let t = PI * k as f64 / m as f64;
                e1 * t.cos() + e2 * t.sin()
            })
            .collect()
    }
}

/// Config-file form of an angular set.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AngularSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arcs: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caps: Option<Vec<[f64; 4]>>,
}

impl AngularSpec {
    pub fn to_set(&self) -> Result<AngularSet> {
        match (&self.arcs, &self.caps) {
            (Some(a), None) => {
                let pairs: Vec<(f64, f64)> = a.iter().map(|p| (p[0], p[1])).collect();
                AngularSet::arcs(&pairs)
            }
            (None, Some(c)) => {
                let caps: Vec<(VecN, f64)> = c.iter().map(|p| (VecN::xyz(p[0], p[1], p[2]), p[3])).collect();
                AngularSet::caps(&caps)
            }
            _ => Err(Error::InvalidAngularSet("exactly one of `arcs` or `caps` must be given".into())),
        }
    }
}

impl AngularSet {
    pub fn full(dim: usize) -> Self {
        AngularSet::Full { dim }
    }

    /// Union of closed arcs [aᵢ, bᵢ] in radians. Overlapping arcs are merged;
    /// a union covering the circle becomes [`AngularSet::Full`].
    pub fn arcs(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidAngularSet("no arcs given".into()));
        }
        let mut arcs = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            if !a.is_finite() || !b.is_finite() || b <= a {
                return Err(Error::InvalidAngularSet(format!("arc [{a}, {b}] must satisfy a < b")));
            }
            if b - a >= TAU - UNIT_TOL {
                return Ok(AngularSet::full(2));
            }
            arcs.push(Arc { start: super::wrap_angle(a), len: b - a });
        }
        Ok(merge_arcs(arcs))
    }

    /// Union of caps given as (center, radius). Centers are normalised; a cap
    /// with radius ≥ π is the whole sphere.
    pub fn caps(caps: &[(VecN, f64)]) -> Result<Self> {
        if caps.is_empty() {
            return Err(Error::InvalidAngularSet("no caps given".into()));
        }
        let mut out = Vec::with_capacity(caps.len());
        for &(c, r) in caps {
            if c.dim() != 3 {
                return Err(Error::DimensionMismatch { expected: 3, found: c.dim() });
            }
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::InvalidAngularSet(format!("cap radius {r} must be positive")));
            }
            if r >= PI {
                return Ok(AngularSet::full(3));
            }
            out.push(Cap { center: Direction::new(c)?, radius: r });
        }
        Ok(AngularSet::Caps(out))
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        let t = text.trim();
        if let Some(dim) = t.strip_prefix("full") {
            let dim = dim.trim().trim_start_matches(':').trim();
            let dim = if dim.is_empty() { 2 } else { dim.parse().map_err(|_| Error::InvalidAngularSet(t.into()))? };
            check_dim(dim)?;
            return Ok(AngularSet::full(dim));
        }
        let spec: AngularSpec =
            toml::from_str(t).map_err(|e| Error::InvalidAngularSet(e.to_string()))?;
        spec.to_set()
    }

    /// Config text `arcs = [[a, b], ...]` or `caps = [[cx, cy, cz, rho], ...]`.
    pub fn to_config_string(&self) -> String {
        match self {
            AngularSet::Full { dim: 2 } => format!("arcs = [[0.0, {:?}]]", TAU),
            AngularSet::Full { .. } => format!("caps = [[0.0, 0.0, 1.0, {:?}]]", PI),
            AngularSet::Arcs(arcs) => {
                let items: Vec<String> =
                    arcs.iter().map(|a| format!("[{:?}, {:?}]", a.start, a.end())).collect();
                format!("arcs = [{}]", items.join(", "))
            }
            AngularSet::Caps(caps) => {
                let items: Vec<String> = caps
                    .iter()
                    .map(|c| {
                        let v = c.center.vector();
                        format!("[{:?}, {:?}, {:?}, {:?}]", v[0], v[1], v[2], c.radius)
                    })
                    .collect();
                format!("caps = [{}]", items.join(", "))
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            AngularSet::Full { dim } => *dim,
            AngularSet::Arcs(_) => 2,
            AngularSet::Caps(_) => 3,
        }
    }

    pub fn is_full(&self) -> bool {
        matches!(self, AngularSet::Full { .. })
    }

    pub fn membership(&self, omega: &Direction) -> Membership {
        assert_eq!(omega.dim(), self.dim(), "direction and angular set dimensions differ");
        match self {
            AngularSet::Full { .. } => Membership::Interior,
            AngularSet::Arcs(arcs) => {
                let phi = omega.angle().expect("planar direction");
                combine(arcs.iter().map(|a| a.classify(phi)))
            }
            AngularSet::Caps(caps) => combine(caps.iter().map(|c| c.classify(omega))),
        }
    }

    /// Closed-set membership.
    pub fn contains(&self, omega: &Direction) -> bool {
        self.membership(omega) != Membership::Exterior
    }

    /// (−1)A.
    pub fn reflect(&self) -> Self {
        match self {
            AngularSet::Full { dim } => AngularSet::Full { dim: *dim },
            AngularSet::Arcs(arcs) => {
                let mut r: Vec<Arc> = arcs
                    .iter()
                    .map(|a| Arc { start: super::wrap_angle(a.start + PI), len: a.len })
                    .collect();
                r.sort_by(|a, b| a.start.total_cmp(&b.start));
                AngularSet::Arcs(r)
            }
            AngularSet::Caps(caps) => AngularSet::Caps(
                caps.iter().map(|c| Cap { center: c.center.opposite(), radius: c.radius }).collect(),
            ),
        }
    }

    /// A = (−1)A for the stored representation.
    pub fn is_symmetric(&self) -> bool {
        let r = self.reflect();
        match (self, &r) {
            (AngularSet::Full { .. }, _) => true,
            (AngularSet::Arcs(a), AngularSet::Arcs(b)) => {
                a.len() == b.len()
                    && a.iter().all(|x| {
                        b.iter().any(|y| {
                            circ_dist(x.start, y.start) <= 1e-9 && (x.len - y.len).abs() <= 1e-9
                        })
                    })
            }
            (AngularSet::Caps(a), AngularSet::Caps(b)) => {
                a.len() == b.len()
                    && a.iter().all(|x| {
                        b.iter().any(|y| {
                            x.center.angle_to(&y.center) <= 1e-9 && (x.radius - y.radius).abs() <= 1e-9
                        })
                    })
            }
            _ => false,
        }
    }

    /// Whether A ∩ (−1)A is nonempty. Its negation is the non-symmetry
    /// condition under which every elliptic P gives an elliptic reconstruction.
    pub fn intersects_reflection(&self) -> bool {
        match self {
            AngularSet::Full { .. } => true,
            AngularSet::Arcs(arcs) => {
                let refl = match self.reflect() {
                    AngularSet::Arcs(r) => r,
                    _ => unreachable!(),
                };
                arcs.iter().any(|a| {
                    refl.iter().any(|b| {
                        a.offset(b.start) <= a.len + UNIT_TOL || b.offset(a.start) <= b.len + UNIT_TOL
                    })
                })
            }
            AngularSet::Caps(caps) => caps.iter().any(|a| {
                caps.iter().any(|b| {
                    a.center.angle_to(&b.center.opposite()) <= a.radius + b.radius + UNIT_TOL
                })
            }),
        }
    }

    /// The smallest arc length or cap diameter; infinite for the full sphere.
    pub fn min_width(&self) -> f64 {
        match self {
            AngularSet::Full { .. } => f64::INFINITY,
            AngularSet::Arcs(a) => a.iter().map(|x| x.len).fold(f64::INFINITY, f64::min),
            AngularSet::Caps(c) => c.iter().map(|x| 2.0 * x.radius).fold(f64::INFINITY, f64::min),
        }
    }

    /// Conormals to bd(A) at ω ∈ bd(A).
    pub fn boundary_conormals(&self, omega: &Direction) -> Result<BoundaryConormals> {
        if self.membership(omega) != Membership::Boundary {
            return Err(Error::NotOnBoundary);
        }
        match self {
            AngularSet::Full { .. } => Err(Error::NotOnBoundary),
            AngularSet::Arcs(_) => {
                let p = omega.perp();
                Ok(BoundaryConormals { full_fiber: false, rays: vec![p, -p] })
            }
            AngularSet::Caps(caps) => {
                let rims: Vec<&Cap> =
                    caps.iter().filter(|c| c.classify(omega) == Membership::Boundary).collect();
                if rims.len() >= 2 {
                    let b = omega.hyperplane_basis();
                    return Ok(BoundaryConormals { full_fiber: true, rays: vec![b[0], b[1], -b[0], -b[1]] });
                }
                let y = project_onto_hyperplane(&rims[0].center.vector(), omega).normalized()?;
                Ok(BoundaryConormals { full_fiber: false, rays: vec![y, -y] })
            }
        }
    }

    /// Sample of bd(A): arc endpoints in two dimensions; in three dimensions
    /// `rim_samples` points per cap rim that are not interior to another cap,
    /// plus every pairwise rim intersection (corner).
    pub fn boundary_directions(&self, rim_samples: usize) -> Vec<Direction> {
        match self {
            AngularSet::Full { .. } => Vec::new(),
            AngularSet::Arcs(arcs) => arcs
                .iter()
                .flat_map(|a| [Direction::from_angle(a.start), Direction::from_angle(a.end())])
                .collect(),
            AngularSet::Caps(caps) => {
                let mut out = Vec::new();
                for c in caps {
                    for k in 0..rim_samples.max(1) {
                        let d = c.rim_point(TAU * k as f64 / rim_samples.max(1) as f64);
                        if self.membership(&d) == Membership::Boundary {
                            out.push(d);
                        }
                    }
                }
                out.extend(self.corners());
                out
            }
        }
    }

    /// Pairwise intersections of cap rims lying on bd(A).
    pub fn corners(&self) -> Vec<Direction> {
        let caps = match self {
            AngularSet::Caps(c) => c,
            _ => return Vec::new(),
        };
        let mut out = Vec::new();
        for i in 0..caps.len() {
            for j in i + 1..caps.len() {
                let (ci, cj) = (caps[i].center.vector(), caps[j].center.vector());
                let g = ci.dot(&cj);
                let det = 1.0 - g * g;
                if det <= 1e-14 {
                    continue;
                }
                let (ri, rj) = (caps[i].radius.cos(), caps[j].radius.cos());
                let a = (ri - g * rj) / det;
                let b = (rj - g * ri) / det;
                let base = ci * a + cj * b;
                let n = ci.cross(&cj);
                let rem = 1.0 - base.norm_sqr();
                if rem < 0.0 {
                    continue;
                }
                let gamma = (rem / n.norm_sqr()).sqrt();
                for sign in [1.0, -1.0] {
                    if let Ok(d) = Direction::new(base + n * (sign * gamma)) {
                        if self.membership(&d) == Membership::Boundary {
                            out.push(d);
                        }
                    }
                    if gamma == 0.0 {
                        break;
                    }
                }
            }
        }
        out
    }

    /// Roughly `count` directions spread over the closed set A.
    pub fn sample_directions(&self, count: usize) -> Vec<Direction> {
        let count = count.max(4);
        match self {
            AngularSet::Full { dim: 2 } => {
                (0..count).map(|k| Direction::from_angle(TAU * k as f64 / count as f64)).collect()
            }
            AngularSet::Full { .. } => fibonacci_sphere(count),
            AngularSet::Arcs(arcs) => {
                let total: f64 = arcs.iter().map(|a| a.len).sum();
                arcs.iter()
                    .flat_map(|a| {
                        let m = ((count as f64 * a.len / total).ceil() as usize).max(2);
                        (0..m).map(move |k| Direction::from_angle(a.start + a.len * k as f64 / (m - 1) as f64))
                    })
                    .collect()
            }
            AngularSet::Caps(caps) => {
                let per = (count / caps.len()).max(8);
                let rings = ((per as f64).sqrt() as usize).max(2);
                let mut out = Vec::new();
                for c in caps {
                    out.push(c.center);
                    for r in 1..=rings {
                        let theta = c.radius * r as f64 / rings as f64;
                        let m = (2 * r * per / (rings * (rings + 1))).max(3);
                        let sub = Cap { center: c.center, radius: theta };
                        for k in 0..m {
                            out.push(sub.rim_point(TAU * (k as f64 + 0.5 * (r % 2) as f64) / m as f64));
                        }
                    }
                }
                out
            }
        }
    }
}

/// Quasi-uniform points on S² along a Fibonacci spiral.
pub fn fibonacci_sphere(count: usize) -> Vec<Direction> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let t = golden * k as f64;
            Direction::new(VecN::xyz(r * t.cos(), r * t.sin(), z)).expect("unit point")
        })
        .collect()
}

fn combine(it: impl Iterator<Item = Membership>) -> Membership {
    let mut best = Membership::Exterior;
    for m in it {
        match m {
            Membership::Interior => return Membership::Interior,
            Membership::Boundary => best = Membership::Boundary,
            Membership::Exterior => {}
        }
    }
    best
}

fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn merge_arcs(mut arcs: Vec<Arc>) -> AngularSet {
    arcs.sort_by(|a, b| a.start.total_cmp(&b.start));
    let mut merged: Vec<Arc> = Vec::with_capacity(arcs.len());
    for a in arcs {
        match merged.last_mut() {
            Some(last) if a.start <= last.end() + UNIT_TOL => {
                let end = last.end().max(a.end());
                last.len = end - last.start;
            }
            _ => merged.push(a),
        }
    }
    // Arcs running past 2π may swallow arcs at the start of the circle.
    while merged.len() > 1 {
        let last = *merged.last().unwrap();
        let first = merged[0];
        if last.end() >= first.start + TAU - UNIT_TOL {
            let end = last.end().max(first.end() + TAU);
            merged.remove(0);
            let l = merged.last_mut().unwrap();
            l.len = end - l.start;
        } else {
            break;
        }
    }
    if merged.iter().any(|a| a.len >= TAU - UNIT_TOL) {
        return AngularSet::full(2);
    }
    AngularSet::Arcs(merged)
}
