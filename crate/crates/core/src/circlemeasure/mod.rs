//! Circle measures, Fourier coefficients and unitary power verdicts.

pub mod measure;
pub mod rajchman;
pub mod unitary;

pub use measure::{
    coefficients_csv, fourier_coefficient, fourier_coefficient_in, multiplication_matrix_elements,
    self_similar_coefficient, total_mass_exact, Angle, Atom, CircleMeasure, Coeff, Coefficient, Density,
    SelfSimilar,
};
pub use rajchman::{rajchman_test, RajchmanReport, RajchmanVerdict};
pub use unitary::{
    component_trace, rational_rotations, unitary_power_verdict, Component, ComponentBody, ComponentVerdict,
    Eigenvalue, LimitDescription, Role, UnitaryModel, UnitaryVerdict,
};
