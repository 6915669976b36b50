//! Secure key generation rates for continuous-variable QKD assisted by
//! noiseless linear amplifiers.
//!
//! The crate models the entanglement-based GG02 protocol over a thermal-loss
//! fiber channel and three receiver-side amplification strategies: the ideal
//! probabilistic amplifier `g^n`, quantum scissors (QS) and single-photon
//! catalysis (SPC), both with inefficient on-off heralding detectors.
//!
//! Modules:
//! - [`gaussian`]: two-mode covariance matrices, symplectic spectra, Gaussian
//!   entropies, mutual information and Holevo information under heterodyne /
//!   homodyne detection.
//! - [`channel`]: thermal-loss channel parameterization (distance, loss,
//!   excess noise).
//! - [`protocols`]: key-rate pipelines for GG02 and the three NLA-assisted
//!   variants, including the heralded covariance matrices and success
//!   probabilities of the physical amplifiers.
//! - [`optimize`]: bounded maximization over modulation variance and gain,
//!   plus root finding for maximum tolerable excess noise and maximum
//!   transmission distance.
//! - [`fock`]: brute-force truncated Fock-space simulation of the full
//!   optical circuits, used as an independent oracle for the closed forms.
//!
//! All quantities are expressed in shot-noise units (vacuum variance 1) and
//! all entropies are in bits.

pub mod channel;
mod error;
pub mod fock;
pub mod gaussian;
pub mod optimize;
pub mod protocols;

pub use channel::{channel_from_distance, gg02_cm, ChannelParams};
pub use error::{Error, Result};
pub use gaussian::{MeasurementKind, SymmetricBlockCM, SymplecticSpectrum};
pub use protocols::{KeyRateBreakdown, ProtocolKind, ProtocolSpec};
