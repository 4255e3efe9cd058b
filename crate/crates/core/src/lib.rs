//! Exponential stability certificates, stability-radius bounds and simulation
//! for switched linear systems with discrete and distributed delays.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common `f64` instantiation.

pub mod cli;
pub mod delay;
pub mod error;
pub mod lclf;
pub mod lp;
pub mod matrix;
pub mod perturb;
pub mod radius;
pub mod scalar;
pub mod simulate;

pub use delay::{
    DelaySubsystem, DelayTerms, DiscreteDelay, DistributedKernel, SwitchedDelaySystem,
};
pub use error::{Error, Result};
pub use lclf::{find_common_lclf, verify_certificate, LclfCertificate, LclfOutcome};
pub use matrix::Matrix;
pub use perturb::{Disturbance, PerturbationStructure, StructureQuad};
pub use radius::{BoundMethod, RadiusReport};
pub use scalar::Scalar;
pub use simulate::{simulate, SwitchingSignal, Trajectory};

pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type Subsystem64 = DelaySubsystem<f64>;
pub type Subsystem32 = DelaySubsystem<f32>;
pub type System64 = SwitchedDelaySystem<f64>;
pub type System32 = SwitchedDelaySystem<f32>;
pub type Certificate64 = LclfCertificate<f64>;
pub type Structure64 = PerturbationStructure<f64>;
pub type Disturbance64 = Disturbance<f64>;
pub type Report64 = RadiusReport<f64>;
pub type Trajectory64 = Trajectory<f64>;
