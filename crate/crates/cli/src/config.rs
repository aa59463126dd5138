//! Experiment configuration: TOML schema and validation into runtime objects.

use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

use limtomo::filters::{make_window, FilterSpec, WindowProfile};
use limtomo::geometry::{AngularSet, AngularSpec, Direction, VecN};
use limtomo::microlocal::EllipticityOptions;
use limtomo::phantoms::{Phantom, WeightField};
use limtomo::transform::{Cutoff, DirectionSet, Grid, OffsetGrid};
use limtomo::wfdetect::DetectorConfig;
use serde::Deserialize;

use crate::error::CliError;
use crate::expr::{Env, Expr};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Phantom file, relative to the config file.
    pub phantom: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    #[serde(default)]
    pub threads: usize,
    pub grid: GridConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub weights: WeightsConfig,
    /// Absent means the full sphere.
    #[serde(default)]
    pub angular: Option<AngularSpec>,
    #[serde(default)]
    pub cutoff: CutoffConfig,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub predict: PredictConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub symbol: SymbolConfig,
    #[serde(default)]
    pub elliptic: EllipticConfig,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "two")]
    pub dim: usize,
    pub size: usize,
    #[serde(default = "one")]
    pub half_width: f64,
    #[serde(default = "yes")]
    pub supersample: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub directions: usize,
    /// Defaults to the grid spacing.
    pub offset_spacing: Option<f64>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { directions: 360, offset_spacing: None }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    #[serde(default)]
    pub mu: WeightField,
    #[serde(default)]
    pub nu: WeightField,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffMode {
    #[default]
    None,
    Hard,
    Smooth,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffConfig {
    #[serde(default)]
    pub mode: CutoffMode,
    pub tau: Option<f64>,
    #[serde(default)]
    pub profile: WindowProfile,
    #[serde(default)]
    pub even: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    /// `fbp`, `lambda`, `dds`, `-i dds`, `identity` or `custom:<expr>`.
    pub kind: String,
    /// Order of a custom symbol; estimated when absent.
    pub order: Option<f64>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { kind: "fbp".into(), order: None }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Standard deviation of additive Gaussian noise on the sinogram.
    #[serde(default)]
    pub sigma: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictConfig {
    pub boundary_samples: usize,
    /// bd(A) rim samples in three dimensions.
    pub rim_samples: usize,
}

impl Default for PredictConfig {
    fn default() -> Self {
        Self { boundary_samples: 512, rim_samples: 64 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub band_px: f64,
    pub min_tp: Option<f64>,
    pub max_spurious: Option<f64>,
    pub max_angle_error_deg: Option<f64>,
    pub min_in_band: Option<f64>,
    /// Required factor between the hard-cutoff in-band energy and that of
    /// the reconstruction under test.
    pub min_reduction: Option<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            band_px: 2.0,
            min_tp: None,
            max_spurious: None,
            max_angle_error_deg: None,
            min_in_band: None,
            min_reduction: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymbolConfig {
    #[serde(default)]
    pub probes: Vec<Probe>,
    /// Minimum ‖ξ‖ in radians per unit length.
    pub min_frequency: f64,
    /// Window width 2σ in wavelengths.
    pub window_wavelengths: f64,
    pub max_rel_error: Option<f64>,
}

impl Default for SymbolConfig {
    fn default() -> Self {
        Self { probes: Vec::new(), min_frequency: TAU * 16.0, window_wavelengths: 8.0, max_rel_error: None }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EllipticConfig {
    pub radius: f64,
    pub directions: usize,
    pub fiber: usize,
    /// Expected verdict; a mismatch fails the command.
    pub expect: Option<bool>,
}

impl Default for EllipticConfig {
    fn default() -> Self {
        let o = EllipticityOptions::default();
        Self { radius: o.radius, directions: o.directions, fiber: o.fiber, expect: None }
    }
}

fn two() -> usize {
    2
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

/// A validated experiment.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub phantom: Phantom,
    pub grid: Grid,
    pub directions: DirectionSet,
    pub offsets: OffsetGrid,
    pub mu: WeightField,
    pub nu: WeightField,
    pub angular: AngularSet,
    pub cutoff: Cutoff,
    pub filter: FilterSpec,
}

fn field(name: &str, msg: impl ToString) -> CliError {
    CliError::Config { field: name.to_string(), msg: msg.to_string() }
}

/// Parses a filter id for the given dimension.
pub fn parse_filter(dim: usize, kind: &str, order: Option<f64>) -> Result<FilterSpec, CliError> {
    let k = kind.trim();
    let spec = match k {
        "fbp" => FilterSpec::fbp(dim),
        "lambda" => FilterSpec::lambda(dim),
        "dds" => FilterSpec::derivative(dim),
        "-i dds" | "-idds" => FilterSpec::neg_i_derivative(dim),
        "identity" => FilterSpec::identity(dim),
        _ => {
            let Some(src) = k.strip_prefix("custom:") else {
                return Err(field("filter.kind", format!("unknown filter `{k}`")));
            };
            let expr = Expr::parse(src).map_err(|e| field("filter.kind", format!("custom expression {e}")))?;
            let order = match order.or_else(|| expr.estimate_order()) {
                Some(o) if o.is_finite() => o,
                _ => return Err(field("filter.order", "cannot estimate the order of the custom symbol; set it")),
            };
            let s_dep = expr.depends_on_s();
            let label = expr.source().to_string();
            FilterSpec::custom(dim, label, order, s_dep, move |w: &Direction, s, alpha| {
                let v = w.vector();
                let mut omega = [0.0; 3];
                omega[..v.dim()].copy_from_slice(v.as_slice());
                expr.eval(&Env { alpha, s, omega })
            })
        }
    };
    if let Some(o) = order {
        if !k.starts_with("custom:") && (o - spec.order()).abs() > 1e-12 {
            return Err(field("filter.order", format!("`{k}` has fixed order {}", spec.order())));
        }
    }
    let probe = spec.symbol(&Direction::from_unit(VecN::axis(dim, 0)).map_err(|e| field("filter.kind", e))?, 0.1, 3.0);
    if !(probe.re.is_finite() && probe.im.is_finite()) {
        return Err(field("filter.kind", "symbol is not finite at α = 3"));
    }
    Ok(spec)
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        let config: ExperimentConfig =
            toml::from_str(&text).map_err(|e| CliError::Parse { path: path.to_path_buf(), msg: e.to_string() })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_config(config, base)
    }

    /// Validates every section before any computation.
    pub fn from_config(config: ExperimentConfig, base: &Path) -> Result<Self, CliError> {
        let c = &config;
        let dim = c.grid.dim;
        if dim != 2 && dim != 3 {
            return Err(field("grid.dim", "must be 2 or 3"));
        }
        if c.grid.size < 8 {
            return Err(field("grid.size", "must be at least 8"));
        }
        if !(c.grid.half_width > 0.0 && c.grid.half_width.is_finite()) {
            return Err(field("grid.half_width", "must be positive"));
        }
        let grid = Grid::centered(dim, c.grid.size, c.grid.half_width).map_err(|e| field("grid", e))?;

        let phantom_path = base.join(&c.phantom);
        if !phantom_path.exists() {
            return Err(field("phantom", format!("file {} does not exist", phantom_path.display())));
        }
        let phantom = Phantom::load(&phantom_path).map_err(|e| field("phantom", e))?;
        if phantom.dim() != dim {
            return Err(field("phantom", format!("phantom is {}-dimensional but grid.dim = {dim}", phantom.dim())));
        }

        if c.scan.directions < 2 {
            return Err(field("scan.directions", "must be at least 2"));
        }
        let directions = DirectionSet::full(dim, c.scan.directions).map_err(|e| field("scan.directions", e))?;
        let offsets = match c.scan.offset_spacing {
            None => OffsetGrid::covering(&grid),
            Some(ds) if ds > 0.0 && ds.is_finite() => OffsetGrid::symmetric(grid.circumradius(), ds),
            Some(_) => return Err(field("scan.offset_spacing", "must be positive")),
        }
        .map_err(|e| field("scan", e))?;

        let radius = grid.circumradius();
        c.weights.mu.check_positive(dim, radius).map_err(|e| field("weights.mu", e))?;
        c.weights.nu.check_positive(dim, radius).map_err(|e| field("weights.nu", e))?;

        let angular = match &c.angular {
            None => AngularSet::full(dim),
            Some(spec) => spec.to_set().map_err(|e| field("angular", e))?,
        };
        if angular.dim() != dim {
            return Err(field("angular", format!("set is on S^{} but grid.dim = {dim}", angular.dim() - 1)));
        }

        let cutoff = match c.cutoff.mode {
            CutoffMode::None => {
                if c.cutoff.tau.is_some() {
                    return Err(field("cutoff.tau", "only valid with mode = \"smooth\""));
                }
                Cutoff::None
            }
            CutoffMode::Hard => Cutoff::Hard(angular.clone()),
            CutoffMode::Smooth => {
                let tau = c.cutoff.tau.ok_or_else(|| field("cutoff.tau", "required with mode = \"smooth\""))?;
                if !(tau > 0.0 && tau < PI) {
                    return Err(field("cutoff.tau", "must lie in (0, π)"));
                }
                Cutoff::Smooth(make_window(&angular, tau, c.cutoff.profile, c.cutoff.even).map_err(|e| field("cutoff", e))?)
            }
        };

        let filter = parse_filter(dim, &c.filter.kind, c.filter.order)?;
        c.detector.validate().map_err(|e| field("detector", e))?;
        if !(c.noise.sigma >= 0.0 && c.noise.sigma.is_finite()) {
            return Err(field("noise.sigma", "must be non-negative"));
        }
        if c.predict.boundary_samples < 8 {
            return Err(field("predict.boundary_samples", "must be at least 8"));
        }
        if dim == 3 && c.predict.rim_samples < 8 {
            return Err(field("predict.rim_samples", "must be at least 8"));
        }
        if !(c.verify.band_px > 0.0) {
            return Err(field("verify.band_px", "must be positive"));
        }
        for (name, v) in [("verify.min_tp", c.verify.min_tp), ("verify.max_spurious", c.verify.max_spurious), ("verify.min_in_band", c.verify.min_in_band)] {
            if let Some(v) = v {
                if !(0.0..=1.0).contains(&v) {
                    return Err(field(name, "must lie in [0, 1]"));
                }
            }
        }
        if c.verify.min_reduction.is_some_and(|r| !(r > 0.0)) {
            return Err(field("verify.min_reduction", "must be positive"));
        }

        let h = grid.min_spacing();
        let nyquist = PI / h;
        if !(c.symbol.window_wavelengths > 0.0) {
            return Err(field("symbol.window_wavelengths", "must be positive"));
        }
        let (lo, hi) = grid.support_box();
        for (k, p) in c.symbol.probes.iter().enumerate() {
            let name = format!("symbol.probes[{k}]");
            if p.x.len() != dim || p.xi.len() != dim {
                return Err(field(&name, format!("x and xi need {dim} components")));
            }
            let x = VecN::new(&p.x).map_err(|e| field(&name, e))?;
            if (0..dim).any(|i| x[i] < lo[i] || x[i] > hi[i]) {
                return Err(field(&format!("{name}.x"), "lies outside the grid"));
            }
            let f = VecN::new(&p.xi).map_err(|e| field(&name, e))?.norm();
            if f < c.symbol.min_frequency * (1.0 - 1e-9) {
                return Err(field(&format!("{name}.xi"), format!("‖ξ‖ = {f:.3} is below symbol.min_frequency = {:.3}", c.symbol.min_frequency)));
            }
            if f > nyquist {
                return Err(field(&format!("{name}.xi"), format!("‖ξ‖ = {f:.3} exceeds the grid Nyquist frequency {nyquist:.3}")));
            }
        }
        let e = &c.elliptic;
        if !(e.radius > 0.0) || e.directions < 4 || e.fiber < 2 {
            return Err(field("elliptic", "radius > 0, directions ≥ 4 and fiber ≥ 2 are required"));
        }

        Ok(Self {
            mu: c.weights.mu.clone(),
            nu: c.weights.nu.clone(),
            config,
            phantom,
            grid,
            directions,
            offsets,
            angular,
            cutoff,
            filter,
        })
    }
}
