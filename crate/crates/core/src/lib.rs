//! Numerical core: exact jets, pointwise tensor algebra, a curvature
//! pipeline, characteristic forms, spectral form calculus on tori and the
//! sphere, Q-operators, conformal harmonics and Q-curvature functionals.

pub mod charforms;
pub mod error;
pub mod formgrid;
pub mod harmonics;
pub mod jet;
pub mod metrics;
pub mod qfunc;
pub mod qops;
pub mod tensor;
pub mod trig;

pub use error::{Error, Result};
