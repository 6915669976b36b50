//! Thermal-loss channel parameterization.
//!
//! A fiber of length `d` km with loss coefficient `kappa` dB/km has
//! transmissivity `T = 10^(-kappa d / 10)`. Excess noise `epsilon` is modeled
//! as a thermal bath of `n_eps = T eps / (2 (1 - T))` mean photons coupled at
//! the loss beamsplitter; the receiver sees added noise
//! `chi = (1 - T)/T + epsilon`.

use crate::error::{Error, Result};
use crate::gaussian::SymmetricBlockCM;

/// Default fiber loss coefficient in dB/km (1550 nm telecom fiber).
pub const DEFAULT_KAPPA: f64 = 0.2;

/// Fully resolved channel parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Loss coefficient, dB/km.
    pub kappa: f64,
    /// Fiber length, km.
    pub distance_km: f64,
    /// Transmissivity `T = 10^(-kappa d / 10)`, in (0, 1].
    pub transmissivity: f64,
    /// Excess noise `epsilon`, shot-noise units.
    pub excess_noise: f64,
    /// Added noise `chi = (1 - T)/T + epsilon`.
    pub added_noise: f64,
    /// Bath mean photon number `n_eps = T eps / (2(1-T))`.
    ///
    /// `None` at `T = 1` with `epsilon > 0`, where the expression diverges;
    /// zero-length noiseless channels report `Some(0.0)`.
    pub thermal_photons: Option<f64>,
}

/// Builds the channel for a fiber of length `distance` km.
pub fn channel_from_distance(kappa: f64, distance: f64, epsilon: f64) -> Result<ChannelParams> {
    if kappa <= 0.0 {
        return Err(Error::Domain(format!("loss coefficient {kappa} <= 0")));
    }
    if distance < 0.0 {
        return Err(Error::Domain(format!("distance {distance} < 0")));
    }
    if epsilon < 0.0 {
        return Err(Error::Domain(format!("excess noise {epsilon} < 0")));
    }
    let t = 10f64.powf(-kappa * distance / 10.0);
    Ok(assemble(kappa, distance, t, epsilon))
}

impl ChannelParams {
    /// Builds the channel directly from a transmissivity, deriving the
    /// distance from `kappa`.
    pub fn from_transmissivity(kappa: f64, t: f64, epsilon: f64) -> Result<Self> {
        if kappa <= 0.0 {
            return Err(Error::Domain(format!("loss coefficient {kappa} <= 0")));
        }
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::Domain(format!("transmissivity {t} outside (0, 1]")));
        }
        if epsilon < 0.0 {
            return Err(Error::Domain(format!("excess noise {epsilon} < 0")));
        }
        let distance = -10.0 * t.log10() / kappa;
        Ok(assemble(kappa, distance, t, epsilon))
    }
}

fn assemble(kappa: f64, distance_km: f64, t: f64, epsilon: f64) -> ChannelParams {
    let added_noise = (1.0 - t) / t + epsilon;
    let thermal_photons = if t < 1.0 {
        Some(t * epsilon / (2.0 * (1.0 - t)))
    } else if epsilon == 0.0 {
        Some(0.0)
    } else {
        None
    };
    ChannelParams {
        kappa,
        distance_km,
        transmissivity: t,
        excess_noise: epsilon,
        added_noise,
        thermal_photons,
    }
}

/// CM shared by Alice and Bob after sending one half of a TMSV of variance
/// `v` through the channel: `(a, b, c) = (V, T(V + chi), sqrt(T) sqrt(V^2-1))`.
pub fn gg02_cm(v: f64, channel: &ChannelParams) -> Result<SymmetricBlockCM> {
    if v < 1.0 {
        return Err(Error::Domain(format!("modulation variance {v} < 1")));
    }
    let t = channel.transmissivity;
    // b - 1 = T (V + eps - 1), exact product form.
    let b_excess = t * (v + channel.excess_noise - 1.0);
    let c = t.sqrt() * ((v - 1.0) * (v + 1.0)).sqrt();
    SymmetricBlockCM::from_excess(v, b_excess, c)
}
