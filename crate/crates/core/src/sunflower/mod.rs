//! Set families, robust-sunflower checking and search, and the diagnostic
//! pipeline built on them.

pub mod diagnostic;
mod family;
pub mod finder;
pub mod robust;

pub use diagnostic::{u1_lower_bound_diagnostic, DiagnosticReport};
pub use family::SetFamily;
pub use finder::{find_robust_sunflower, Strategy, SunflowerWitness};
pub use robust::{
    failure_given_kernel, failure_over_universe, petal_count_probability, robustness, Failure, RobustMode,
    RobustnessVerdict,
};
