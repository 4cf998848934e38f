//! Scale-invariant functionals and regularity diagnostics for sampled
//! three-dimensional Navier–Stokes fields on parabolic cylinders.

pub mod criteria;
pub mod error;
pub mod exponents;
pub mod fields;
pub mod functionals;
pub mod inequalities;
pub mod mixed_norms;
pub mod pressure;
pub mod singular_set;

pub use error::{Error, Result};
pub use exponents::{Exponent, ExponentSet, LMPair, PQPair, RegionTag};
pub use fields::{GridSpec, SpaceTimeField, SpaceTimePoint};
pub use mixed_norms::{Clip, ParabolicCylinder, QuadratureConfig};
pub use functionals::FunctionalReport;
pub use inequalities::{Ratio, RatioRecord};
pub use criteria::{CriteriaConfig, Status, Verdict};
pub use singular_set::{Candidate, CoverEstimate};
