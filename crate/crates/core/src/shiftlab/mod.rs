//! Weighted shifts: weight rules, inflation construction, exact power norms.

pub mod inflation;
pub mod norms;
pub mod weights;

pub use inflation::{InflationLayout, InflationParams, Padding, QExponents, Regime, Segment, Theta};
pub use norms::{
    coadjoint_unit_eigenvector, coadjoint_witness, inflation_norm_profile, shift_log_norms,
    shift_power_norm, CoadjointEigenvector, NormProfile, PowerNorm, ProfileEntry, RadiusEstimate,
    SegmentBounds, TailVerdict,
};
pub use weights::{
    berger_weights, hankel_det, inflation_weights, two_isometry_norm_sq, two_isometry_weights,
    BergerAtom, BergerMoments, Direction, UniformPart, WeightFormula, WeightRule,
};

use crate::error::Result;
use crate::opcore::{power_log_norms, OperatorExpr};
use crate::scalar::Scalar;

/// `inf_{1 <= n <= n_max} ||T^n||^{1/n}` with its trace.
pub fn spectral_radius_estimate<S: Scalar>(op: &OperatorExpr<S>, n_max: u64) -> Result<RadiusEstimate> {
    Ok(RadiusEstimate::from_log_norms(&power_log_norms(op, n_max)?))
}
