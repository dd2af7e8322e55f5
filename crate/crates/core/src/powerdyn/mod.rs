//! Power sequences: convergence classification, limit projections, kernels,
//! identity-part splits and numerical radius.

mod classify;
mod projection;
mod split;

pub use classify::{classify_dense, classify_power_sequence, ConvergenceReport, Limit, Tolerances, Verdict, Window};
pub use projection::{
    kernels, numerical_radius, projection_diagnostics, similarity_orthogonalize, KernelRelation, Kernels,
    NumericalRadius, Orthogonalized, ProjectionDiagnostics,
};
pub use split::{identity_part_split, SplitKind, SplitResult};
