//! Information geometry of composite statistical models.
//!
//! * [`families`]: the exponential, Gaussian and Wigner-Dyson families and
//!   their products.
//! * [`manifold`]: Fisher–Rao metrics, in closed form and by quadrature.
//! * [`geometry`]: connection, curvature and sectional curvatures.
//! * [`dynamics`]: geodesics and Jacobi fields.
//! * [`ige`]: the entropy of the volume explored by a geodesic, and its
//!   growth law.
//! * [`spinchain`]: the Ising chain in a tilted field and its level-spacing
//!   statistics.

pub mod dynamics;
pub mod error;
pub mod families;
pub mod geometry;
pub mod ige;
pub mod manifold;
pub mod quadrature;
pub mod spinchain;
pub mod stats;
pub mod tensor;

pub use error::{Error, Result};
pub use families::{Family, Interval, ParamPoint};
pub use manifold::ManifoldModel;

// The guide's listings compile and run as doctests of this crate.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/curvature.md")]
    mod curvature {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/ige.md")]
    mod ige {}
    #[doc = include_str!("../../../book/src/spinchain.md")]
    mod spinchain {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
