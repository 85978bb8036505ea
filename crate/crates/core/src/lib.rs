//! Isospectral two-step nilpotent metrics: trace invariants of skew pencils,
//! the invariant-preserving flow, curvature of the associated manifolds and
//! heat-invariant comparisons.
//!
//! A map `j: ℝʳ → so(m)` is stored as a [`JMap`] of `r` skew matrices. Two maps
//! are isospectral when every pencil `Σ zᵢ jᵢ` has the same spectrum for both,
//! which is decided through the trace polynomials in [`invariants`].

pub mod catalog;
pub mod curvature;
pub mod error;
pub mod flow;
pub mod heat;
pub mod invariants;
mod matrix_serde;
pub mod random;
pub mod skew;

pub use catalog::{base_preset, resolve as resolve_catalog, TwoPlaneParams};
pub use curvature::{curvature_report, BaseGroupData, CurvatureReport, NonisometryVerdict};
pub use error::{Error, Result};
pub use flow::{genericity_check, integrate_flow, FlowTrajectory};
pub use heat::{heat_comparison, HeatComparison, OneFormVerdict, QuadratureEstimate};
pub use invariants::{is_isospectral, InvariantTable, IsospectralReport};
pub use skew::{CharPoly, JMap, SkewMatrix};
