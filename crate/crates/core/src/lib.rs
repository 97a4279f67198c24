pub mod body;
pub mod chains;
pub mod diagnostics;
pub mod error;
pub mod finite;
pub mod norm;
pub mod rng;
pub mod whitney;

pub use body::{AnyBody, AxisBox, BodySpec, ConvexBody, Distance, HPolytope, LpBall, MembershipOnly};
pub use chains::{ChrKernel, Kernel, MpKernel, Trajectory};
pub use error::{Error, Result};
pub use norm::Norm;
pub use whitney::{DyadicCube, Enumeration, WhitneyContext};
