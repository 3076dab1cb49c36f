//! Bit-exact simulation of counter-based stochastic computing and of an
//! accuracy-reconfigurable 8x8 DCT/IDCT image pipeline built on it, with
//! calibrated timing, power and aging models for choosing operating points.

pub mod accuracy;
pub mod cbsc;
pub mod dct;
pub mod error;
pub mod fixed;
pub mod lfsr;
pub mod mac;
pub mod pipeline;
pub mod platform;
pub mod stream;

pub use error::{Error, Result};
pub use fixed::UnsignedFixed;
pub use mac::{AccuracySelect, MacResult, SignMagnitude};
pub use stream::{BitStream, Polarity};
