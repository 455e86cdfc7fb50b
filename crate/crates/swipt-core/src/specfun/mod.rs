//! Special functions, quadrature and Laplace inversion.

mod erfcx;
mod gamma;
mod interference;
pub mod laplace;
pub mod quad;

pub use erfcx::erfcx;
pub use gamma::upper_incomplete_gamma;
pub use interference::{interference_constant, interference_integral, interference_tail};
pub use laplace::{inverse_laplace_cdf, invert, Inverter, LaplaceEvaluator};
pub use quad::{quad, quad_half_line, quad_semi_infinite, QuadResult, QuadSpec};
