//! Explicit constructions and their audits.

pub mod audit;
pub mod majority;
pub mod parity;
pub mod proof;
pub mod reduce;
pub mod separator;

pub use audit::{audit_locality_bounds, AuditOptions, AuditReport, LocalityClaim};
pub use majority::{majority_locality_bound, IntervalTree, MajoritySystem};
pub use parity::build_parity_sampler;
pub use proof::{
    build_majority_proof_system, default_targets, verify_image, verify_image_within, Counterexample, Evidence,
    ImageVerdict, Language, ProofFunction, ProofSystem, VerifyMode,
};
pub use reduce::reduce_slice_to_u1;
pub use separator::{greedy_separator, SeparatorRun};
