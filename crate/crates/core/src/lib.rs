//! Multiprecision laboratory for finite and sigmoid-weighted Dirichlet series
//! of the Riemann zeta function.
//!
//! The crate is layered bottom-up:
//!
//! * [`precision`]: decimal-digit precision contexts and the [`ComplexAP`] type.
//! * [`oracle`]: reference ζ(s), Γ(s) and χ(s) evaluators.
//! * [`solver`]: the N×N system whose solution is the finite coefficient set δ*_n.
//! * [`sigmoid`]: the two-parameter logistic profile fitted to δ*_n.
//! * [`series`]: generalized weights δ_n(s), calibration of the scale B̂(s) and
//!   the scaling-law fits.
//! * [`spiral`]: partial-sum trajectories of the functional-equation combination.
//! * [`experiments`]: named presets, CSV/SVG output and run manifests.

pub mod experiments;
pub mod oracle;
pub mod precision;
pub mod series;
pub mod sigmoid;
pub mod solver;
pub mod spiral;

pub use precision::{power_term, ComplexAP, PrecisionContext, PrecisionError};
