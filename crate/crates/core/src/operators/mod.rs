//! Discrete integral operators on quadrature clouds: kernel application,
//! the dilated maximal function, weighted norm estimation, the spectral
//! Beurling model and the T1 testing conditions.

pub mod beurling;
pub mod direct;
pub mod field;
pub mod maximal;
pub mod norm;
pub mod t1;

pub use beurling::{beurling_grid, beurling_spectral};
pub use direct::{apply_direct, DenseOperator, DirectOperator, LinearOperator};
pub use field::{Field, MeasureTag};
pub use maximal::{maximal_function, maximal_function_with, RadiusLadder};
pub use norm::{operator_norm, NormEstimate};
pub use t1::{square_center_sample, t1_testing, t1_testing_with, T1Report};

/// Default dilation of the maximal operator.
pub const DEFAULT_KAPPA: f64 = 3.0;
