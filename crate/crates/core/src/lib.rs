//! Exact tooling for low-depth samplers over the Boolean cube.
//!
//! The crate is organised around a few carriers: [`BitString`] for inputs,
//! outputs and set masks, [`ExactDistribution`] for exact probability mass,
//! [`DecisionForest`] as the canonical sampler representation,
//! [`SetFamily`] for sunflower analysis and [`SwitchingNetwork`] for layered
//! swap networks acting on a slice.
//!
//! Every correctness-bearing quantity is an exact [`Rational`]; the only
//! floating point values are labelled approximations in reports and the
//! Monte-Carlo estimators, which never feed an equality check.

pub mod bits;
pub mod constructions;
pub mod error;
pub mod exactdist;
pub mod frontier;
pub mod localfn;
pub mod rational;
pub mod rng;
pub mod sunflower;
pub mod switchnet;

pub use bits::BitString;
pub use constructions::{
    build_majority_proof_system, build_parity_sampler, verify_image, Language, ProofFunction,
    ProofSystem, VerifyMode,
};
pub use error::{Error, Result};
pub use exactdist::{tv_distance, DistRef, ExactDistribution, SliceSpec};
pub use localfn::{DecisionForest, DecisionTree, Dnf, InfluenceGraph, LocalFunction};
pub use rational::Rational;
pub use sunflower::SetFamily;
pub use switchnet::SwitchingNetwork;

/// Default log2 bound on the number of inputs enumerated by exact routines.
pub const DEFAULT_ENUMERATION_LOG2: u32 = 26;
