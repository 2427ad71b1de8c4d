//! Normalized solutions of `-Δu - Δ(u²)u = h(u) + λu` through the dual
//! change of variables `u = f(v)`.

pub mod dual_transform;
pub mod error;
pub mod functionals;
pub mod nonlinearity;
pub mod radial_field;
pub mod sampling;
pub mod scalings;
pub mod solver;

pub use dual_transform::DualMap;
pub use error::{Error, Result};
pub use functionals::{EnergyBreakdown, FiberProfile};
pub use nonlinearity::{GrowthRegime, Nonlinearity, NonlinearitySpec};
pub use radial_field::{FieldRecord, RadialField, RadialGrid};
