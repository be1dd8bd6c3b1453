//! Differentially private GAN synthesis of indoor location fingerprint data.
//!
//! The crate covers the full pipeline: simulating or loading an RSS radiomap,
//! training (DP)WGAN / (DP)CGAN models on the scaled fingerprint table,
//! sampling synthetic radiomaps, and evaluating them for utility
//! (correlation preservation, localization error, zone accuracy) and privacy
//! (Rényi-DP accounting, disclosure risk).

pub mod data;
pub mod dp;
pub mod error;
pub mod eval;
pub mod gan;
pub mod matrix;
pub mod nn;

pub use error::{Error, Result};

/// Seeded RNG used everywhere results must be reproducible bit-for-bit.
///
/// `ChaCha8Rng` has a stable stream across platforms and crate versions,
/// unlike `StdRng`.
pub type Prng = rand_chacha::ChaCha8Rng;
