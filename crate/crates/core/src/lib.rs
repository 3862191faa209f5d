//! Physics models, simulators and decoders for multi-channel material
//! tags read by touch: electrical S11, magnetometer and swipe audio.

// `!(x > 0.0)` style guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod capacity;
pub mod codec;
pub mod contact;
pub mod electrical;
pub mod error;
pub mod io;
pub mod magnetic;
pub mod noise;
pub mod quantities;
pub mod sim;
pub mod surface;

/// RNG used for all simulation; seeded per call or per trial stream.
pub type SimRng = rand_chacha::ChaCha8Rng;

pub use calibration::{CalibrationTable, PropertyKind};
pub use codec::{BitAllocation, CodePlan, MaterialSpec, PlanBounds, SymbolWord};
pub use electrical::SweepFrame;
pub use error::{Channel, Error, Result};
pub use magnetic::MagSample;
pub use noise::NoiseConfig;
pub use quantities::{Complex, FrequencyGrid, PhysicalConstants};
pub use sim::TrialReport;
pub use surface::{AudioClip, ClassTable, TextureModel};
