//! Filters P acting on sinograms as Fourier multipliers in s, and smooth
//! angular cutoff windows φ.

mod apply;
mod window;

pub use apply::{apply_filter, frequency_grid, padded_len};
pub use window::{make_window, CutoffWindow, WindowProfile};

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::geometry::{check_dim, DataCovector, Direction};
use crate::Result;

/// A symbol p(ω, s, α) where α is the ds-component of the covector.
pub type SymbolFn = dyn Fn(&Direction, f64, f64) -> Complex64 + Send + Sync;

#[derive(Clone)]
pub enum FilterKind {
    /// p ≡ 1.
    Identity,
    /// p = ½(2π)^{1−n}|α|^{n−1}, which is |α|/(4π) in the plane.
    Fbp,
    /// p = ½(2π)^{1−n}|α|^n, which is α²/(4π) in the plane.
    Lambda,
    /// p = iα, the symbol of d/ds.
    Derivative,
    /// p = α, the symbol of (−i)d/ds.
    NegIDerivative,
    /// User symbol of the given order. `s_dependent` selects the
    /// frozen-coefficient application path.
    Custom { label: String, order: f64, s_dependent: bool, symbol: Arc<SymbolFn> },
}

/// A filter P with its symbol.
#[derive(Clone)]
pub struct FilterSpec {
    dim: usize,
    kind: FilterKind,
}

impl fmt::Debug for FilterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FilterSpec({}, n={})", self.name(), self.dim)
    }
}

impl FilterSpec {
    pub fn new(dim: usize, kind: FilterKind) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim, kind })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, kind: FilterKind::Identity }
    }

    pub fn fbp(dim: usize) -> Self {
        Self { dim, kind: FilterKind::Fbp }
    }

    pub fn lambda(dim: usize) -> Self {
        Self { dim, kind: FilterKind::Lambda }
    }

    pub fn derivative(dim: usize) -> Self {
        Self { dim, kind: FilterKind::Derivative }
    }

    pub fn neg_i_derivative(dim: usize) -> Self {
        Self { dim, kind: FilterKind::NegIDerivative }
    }

    pub fn custom(
        dim: usize,
        label: impl Into<String>,
        order: f64,
        s_dependent: bool,
        symbol: impl Fn(&Direction, f64, f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self { dim, kind: FilterKind::Custom { label: label.into(), order, s_dependent, symbol: Arc::new(symbol) } }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &FilterKind {
        &self.kind
    }

    pub fn name(&self) -> String {
        match &self.kind {
            FilterKind::Identity => "identity".into(),
            FilterKind::Fbp => "fbp".into(),
            FilterKind::Lambda => "lambda".into(),
            FilterKind::Derivative => "dds".into(),
            FilterKind::NegIDerivative => "-i dds".into(),
            FilterKind::Custom { label, .. } => format!("custom:{label}"),
        }
    }

    /// Homogeneity degree in the covector.
    pub fn order(&self) -> f64 {
        match &self.kind {
            FilterKind::Identity => 0.0,
            FilterKind::Fbp => (self.dim - 1) as f64,
            FilterKind::Lambda => self.dim as f64,
            FilterKind::Derivative | FilterKind::NegIDerivative => 1.0,
            FilterKind::Custom { order, .. } => *order,
        }
    }

    pub fn depends_on_s(&self) -> bool {
        matches!(self.kind, FilterKind::Custom { s_dependent: true, .. })
    }

    /// Whether the symbol is the same for every direction.
    pub fn depends_on_omega(&self) -> bool {
        matches!(self.kind, FilterKind::Custom { .. })
    }

    /// p(ω, s, α).
    pub fn symbol(&self, omega: &Direction, s: f64, alpha: f64) -> Complex64 {
        let c = 0.5 * (2.0 * PI).powi(1 - self.dim as i32);
        match &self.kind {
            FilterKind::Identity => Complex64::new(1.0, 0.0),
            FilterKind::Fbp => Complex64::new(c * alpha.abs().powi(self.dim as i32 - 1), 0.0),
            FilterKind::Lambda => Complex64::new(c * alpha.abs().powi(self.dim as i32), 0.0),
            FilterKind::Derivative => Complex64::new(0.0, alpha),
            FilterKind::NegIDerivative => Complex64::new(alpha, 0.0),
            FilterKind::Custom { symbol, .. } => symbol(omega, s, alpha),
        }
    }
}

/// p evaluated on a data covector (ω, s, η): the ds-component selects α.
pub fn symbol_on_data_covector(p: &FilterSpec, dc: &DataCovector) -> Complex64 {
    p.symbol(&dc.omega, dc.s, dc.eta_s)
}
