//! Core library of the FLV gauntlet: a structured stand-in for facial
//! media, a configurable simulated liveness-verification vendor, parametric
//! deepfake synthesis, black-box capability probing, and the evasion-rate
//! metrics used to score attack campaigns.

pub mod analysis;
pub mod client;
pub mod deepfake;
pub mod exec;
pub mod intelligence;
pub mod media;
pub mod numerics;
pub mod planner;
pub mod vendor;

pub use client::{ApiError, FlvApi, InProcessClient};
pub use media::{FacialMedia, Frame, IdentityVector, MediaError};
pub use vendor::{FlvType, VendorEngine, VendorProfile, VerificationOutcome, VerifyError};
