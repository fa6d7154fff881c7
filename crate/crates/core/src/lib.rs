//! Piecewise-linear Filippov systems switching across the unit sphere and a
//! ring torus.

pub mod algebra;
pub mod error;
pub mod flow;
pub mod inelastic;
pub mod manifolds;
pub mod poly;
pub mod sliding;
pub mod tangency;

pub use algebra::{Mat3, SymForm3, Vec3};
pub use error::{Error, Result};
pub use inelastic::{FreeParams, InelasticPair};
pub use manifolds::{CircleCurve, Surface, SwitchingManifold};
pub use sliding::SlidingRotation;
