use std::f64::consts::TAU;

use super::{Mat, Phantom, Primitive};
use crate::geometry::{fibonacci_sphere, Covector, Direction, VecN};
use crate::{Error, Result};

/// Angular step used to discretise polygon vertex cones.
pub const CONE_STEP_DEG: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleKind {
    /// Point on a smooth boundary or inside a polygon edge.
    Smooth,
    /// Polygon vertex, one sample per direction of the discretised cone.
    Corner,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WfSample {
    pub covector: Covector,
    pub primitive: usize,
    pub kind: SampleKind,
}

/// The closed cone of outward conormals at a convex polygon vertex: angles
/// from `from` counter-clockwise through `span` radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VertexCone {
    pub vertex: VecN,
    pub from: f64,
    pub span: f64,
    pub primitive: usize,
}

impl VertexCone {
    /// Whether ±`omega` lies in the cone; returns the matching sign.
    pub fn contains(&self, omega: &Direction) -> Option<f64> {
        let phi = omega.angle()?;
        let tol = 1e-12;
        let inside = |a: f64| {
            let d = (a - self.from).rem_euclid(TAU);
            d <= self.span + tol || TAU - d <= tol
        };
        if inside(phi) {
            Some(1.0)
        } else if inside(phi + std::f64::consts::PI) {
            Some(-1.0)
        } else {
            None
        }
    }
}

/// Sampled wavefront set of a phantom: boundary points with both conormal
/// signs, unit magnitude.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AnalyticWavefront {
    pub samples: Vec<WfSample>,
    pub cones: Vec<VertexCone>,
}

impl AnalyticWavefront {
    pub fn covectors(&self) -> Vec<Covector> {
        self.samples.iter().map(|s| s.covector).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn push_pair(&mut self, x: VecN, normal: VecN, primitive: usize, kind: SampleKind) {
        let d = Direction::new(normal).expect("nonzero normal");
        for omega in [d, d.opposite()] {
            let covector = Covector::from_direction(x, omega, 1.0).expect("unit magnitude");
            self.samples.push(WfSample { covector, primitive, kind });
        }
    }
}

fn ellipse_point(center: &VecN, axes: &VecN, rotation: f64, u: &VecN) -> (VecN, VecN) {
    let r = Mat::rotation(center.dim(), rotation);
    let mut p = [0.0; 3];
    let mut n = [0.0; 3];
    for i in 0..center.dim() {
        p[i] = axes[i] * u[i];
        n[i] = u[i] / axes[i];
    }
    let dim = center.dim();
    (*center + r.apply(&VecN::new(&p[..dim]).unwrap()), r.apply(&VecN::new(&n[..dim]).unwrap()))
}

/// Outward unit edge normals of a counter-clockwise polygon.
fn edge_normals(vertices: &[VecN]) -> Vec<VecN> {
    let n = vertices.len();
    (0..n)
        .map(|i| {
            let d = vertices[(i + 1) % n] - vertices[i];
            VecN::xy(d[1], -d[0]).normalized().expect("nondegenerate edge")
        })
        .collect()
}

/// Sample WF(f) for every non-Gaussian primitive. Ellipses are sampled
/// uniformly in the boundary parameter (Fibonacci points for ellipsoids);
/// polygon edges get `samples_per_boundary` interior points each and every
/// vertex its conormal cone at ≤ 5° steps.
pub fn analytic_wavefront(phantom: &Phantom, samples_per_boundary: usize) -> Result<AnalyticWavefront> {
    if samples_per_boundary < 4 {
        return Err(Error::TooFewSamples { got: samples_per_boundary, min: 4 });
    }
    if !phantom.primitives().iter().any(|p| p.is_singular()) {
        return Err(Error::NoSingularPrimitive);
    }
    let k = samples_per_boundary;
    let mut wf = AnalyticWavefront::default();
    for (idx, prim) in phantom.primitives().iter().enumerate() {
        match prim {
            Primitive::Ellipse { center, axes, rotation, .. } => {
                let params: Vec<VecN> = if center.dim() == 2 {
                    (0..k).map(|j| {
                        let t = TAU * j as f64 / k as f64;
                        VecN::xy(t.cos(), t.sin())
                    })
                    .collect()
                } else {
                    fibonacci_sphere(k).iter().map(|d| d.vector()).collect()
                };
                for u in params {
                    let (x, n) = ellipse_point(center, axes, *rotation, &u);
                    wf.push_pair(x, n, idx, SampleKind::Smooth);
                }
            }
            Primitive::Polygon { vertices, .. } => {
                let normals = edge_normals(vertices);
                let n = vertices.len();
                for i in 0..n {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    for j in 0..k {
                        let t = (j as f64 + 0.5) / k as f64;
                        wf.push_pair(a + (b - a) * t, normals[i], idx, SampleKind::Smooth);
                    }
                }
                for i in 0..n {
                    let prev = Direction::new(normals[(i + n - 1) % n]).unwrap().angle().unwrap();
                    let next = Direction::new(normals[i]).unwrap().angle().unwrap();
                    let span = (next - prev).rem_euclid(TAU);
                    let cone = VertexCone { vertex: vertices[i], from: prev, span, primitive: idx };
                    let steps = (span / CONE_STEP_DEG.to_radians()).ceil().max(1.0) as usize;
                    for j in 0..=steps {
                        let d = Direction::from_angle(prev + span * j as f64 / steps as f64);
                        wf.push_pair(vertices[i], d.vector(), idx, SampleKind::Corner);
                    }
                    wf.cones.push(cone);
                }
            }
            Primitive::Gaussian { .. } => {}
        }
    }
    Ok(wf)
}

/// [`analytic_wavefront`] plus exact samples whose codirection equals ±d for
/// every d in `directions`: support points of ellipses, polygon vertices
/// whose cone contains ±d, and polygon edges with normal ±d. Used to place
/// samples exactly on bd(A) directions.
pub fn analytic_wavefront_aligned(
    phantom: &Phantom,
    samples_per_boundary: usize,
    directions: &[Direction],
) -> Result<AnalyticWavefront> {
    let mut wf = analytic_wavefront(phantom, samples_per_boundary)?;
    for d in directions {
        if d.dim() != phantom.dim() {
            return Err(Error::DimensionMismatch { expected: phantom.dim(), found: d.dim() });
        }
        for (idx, prim) in phantom.primitives().iter().enumerate() {
            match prim {
                Primitive::Ellipse { center, axes, rotation, .. } => {
                    let (m, _) = Primitive::ellipse_shape(center, axes, *rotation);
                    let n = d.vector();
                    let mn = m.apply(&n);
                    let scale = n.dot(&mn).sqrt();
                    for sign in [1.0, -1.0] {
                        let x = *center + mn * (sign / scale);
                        for omega in [*d, d.opposite()] {
                            let covector = Covector::from_direction(x, omega, 1.0)?;
                            wf.samples.push(WfSample { covector, primitive: idx, kind: SampleKind::Smooth });
                        }
                    }
                }
                Primitive::Polygon { vertices, .. } => {
                    let normals = edge_normals(vertices);
                    let n = vertices.len();
                    for i in 0..n {
                        if normals[i].dot(&d.vector()).abs() >= 1.0 - 1e-15 {
                            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                            for j in 0..samples_per_boundary {
                                let t = (j as f64 + 0.5) / samples_per_boundary as f64;
                                for omega in [*d, d.opposite()] {
                                    let covector = Covector::from_direction(a + (b - a) * t, omega, 1.0)?;
                                    wf.samples.push(WfSample { covector, primitive: idx, kind: SampleKind::Smooth });
                                }
                            }
                        }
                    }
                }
                Primitive::Gaussian { .. } => {}
            }
        }
        for cone in &wf.cones.clone() {
            if cone.contains(d).is_some() {
                for omega in [*d, d.opposite()] {
                    let covector = Covector::from_direction(cone.vertex, omega, 1.0)?;
                    wf.samples.push(WfSample { covector, primitive: cone.primitive, kind: SampleKind::Corner });
                }
            }
        }
    }
    Ok(wf)
}
