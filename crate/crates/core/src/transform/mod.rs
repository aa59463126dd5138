//! Discrete forward projection, angular restriction and backprojection, and
//! the reconstruction pipelines L_A = R*_ν P χ_{A×ℝ} R_μ and
//! L_φ = R*_ν P K_φ R_μ.

mod grid;
mod project;
mod sinogram;

pub use grid::{Grid, Image, Sample};
pub use project::{backproject, backproject_real, forward, forward_with, restrict_hard, restrict_smooth, ForwardOptions};
pub use sinogram::{DirectionKind, DirectionSet, OffsetGrid, Sinogram};

use num_complex::Complex64;

use crate::filters::{apply_filter, CutoffWindow, FilterSpec};
use crate::geometry::{AngularSet, Direction};
use crate::phantoms::WeightField;
use crate::Result;

/// Angular cutoff applied before filtering.
#[derive(Clone, Debug)]
pub enum Cutoff {
    None,
    Hard(AngularSet),
    Smooth(CutoffWindow),
}

impl Cutoff {
    /// The angular weight applied to row ω: 1, χ_A(ω) or φ(ω).
    pub fn weight(&self, omega: &Direction) -> f64 {
        match self {
            Cutoff::None => 1.0,
            Cutoff::Hard(a) => f64::from(u8::from(a.contains(omega))),
            Cutoff::Smooth(phi) => phi.eval(omega),
        }
    }
}

/// Input of [`reconstruct`]: an image to be projected first, or data.
pub enum ReconInput<'a, T: Sample> {
    Image { f: &'a Image<T>, mu: &'a WeightField, directions: &'a DirectionSet, offsets: &'a OffsetGrid },
    Sinogram(&'a Sinogram<T>),
}

/// cutoff → filter → backproject for given data.
pub fn reconstruct_sinogram<T: Sample>(
    g: &Sinogram<T>,
    nu: &WeightField,
    p: &FilterSpec,
    cutoff: &Cutoff,
    grid: &Grid,
) -> Result<Image<Complex64>> {
    let cut = match cutoff {
        Cutoff::None => g.clone(),
        Cutoff::Hard(a) => restrict_hard(g, a),
        Cutoff::Smooth(phi) => restrict_smooth(g, phi),
    };
    let filtered = apply_filter(&cut, p)?;
    backproject(&filtered, nu, grid)
}

/// forward → cutoff → filter → backproject. An image input is
/// reconstructed on its own grid.
pub fn reconstruct<T: Sample>(
    input: ReconInput<'_, T>,
    nu: &WeightField,
    p: &FilterSpec,
    cutoff: &Cutoff,
    grid: Option<&Grid>,
) -> Result<Image<Complex64>> {
    match input {
        ReconInput::Image { f, mu, directions, offsets } => {
            let g = forward(f, mu, directions, offsets)?;
            reconstruct_sinogram(&g, nu, p, cutoff, grid.unwrap_or(&f.grid))
        }
        ReconInput::Sinogram(g) => {
            let grid = grid.ok_or_else(|| crate::Error::InvalidGrid("reconstruction from data needs an output grid".into()))?;
            reconstruct_sinogram(g, nu, p, cutoff, grid)
        }
    }
}
