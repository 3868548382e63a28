//! Distributed 4×2 space-time block code built from the Golden code, with a
//! conditional ML decoder and a Monte Carlo BER harness.
//!
//! Layers, bottom-up: [`linalg`] (small fixed-size complex algebra),
//! [`constellation`], [`codes`] (encoders and effective channels),
//! [`channel`] (fading, imbalance, noise), [`decode`], [`analysis`]
//! (algebraic checks and curve fits) and [`sim`].

pub mod analysis;
pub mod channel;
pub mod codes;
pub mod constellation;
pub mod decode;
pub mod error;
pub mod linalg;
pub mod sim;

pub use error::{Error, Result};
