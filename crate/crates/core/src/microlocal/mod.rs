//! Sampled microlocal calculus for the restricted transform: the canonical
//! relation C and its transpose, Hörmander's product bound Q(A×ℝ, W),
//! visible sets, added artifacts, the symbol of L_φ and ellipticity.
//!
//! Continuous conic sets are represented by finite samples compared under a
//! [`Tolerance`].

mod calculus;
mod sets;
mod symbol;

pub use calculus::{
    artifact_set, characterization_upper_bound, compose_c, compose_ct, lambdas, predict_artifacts, product_q, read_artifacts_csv,
    visible_set, wf_chi_axr, write_artifacts_csv, ArtifactLine, Characterization, CtImage, Sampling,
};
pub use sets::{DataWavefrontSet, SetComparison, Tolerance, WavefrontSet};
pub use symbol::{check_ellipticity, symbol_l_phi, Condition, EllipticityOptions, EllipticityReport, Witness};
