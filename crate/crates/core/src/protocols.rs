//! Key-generation-rate pipelines for the four protocols: the GG02 baseline,
//! the ideal noiseless linear amplifier, and the two physical amplifiers
//! (quantum scissors and single-photon catalysis) with inefficient on-off
//! heralding.
//!
//! The heralded covariance matrices and success probabilities of the physical
//! amplifiers are closed forms in the channel-dressed variance
//! `w = 1 + eta T (V + eps - 1)` and the beamsplitter transmissivity `tau`.
//! They are written here in terms of `u = w - 1` with the common small factor
//! divided out, so that the long-distance regime (`u ~ T`) keeps full
//! relative precision; the Fock-space oracle in [`crate::fock`] validates
//! them end to end.
//!
//! Sign convention: the heralded q-quadrature correlation is positive for QS
//! and negative for SPC (`tau < 1/2`). A negative sign is a local phase flip
//! Bob undoes classically, and every rate formula depends on `c^2` only, so
//! the CMs returned here carry `|c|`. [`signed_correlation`] exposes the raw
//! sign for oracle comparisons.

use crate::channel::{gg02_cm, ChannelParams};
use crate::error::{Error, Result};
use crate::gaussian::{holevo_information, mutual_information_homodyne, SymmetricBlockCM};

/// Protocol selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolKind {
    Gg02,
    IdealNla,
    Qs,
    Spc,
}

impl ProtocolKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProtocolKind::Gg02 => "gg02",
            ProtocolKind::IdealNla => "ideal",
            ProtocolKind::Qs => "qs",
            ProtocolKind::Spc => "spc",
        }
    }
}

impl std::str::FromStr for ProtocolKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gg02" => Ok(ProtocolKind::Gg02),
            "ideal" => Ok(ProtocolKind::IdealNla),
            "qs" => Ok(ProtocolKind::Qs),
            "spc" => Ok(ProtocolKind::Spc),
            other => Err(Error::Domain(format!("unknown protocol '{other}'"))),
        }
    }
}

/// A fully specified protocol instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    /// Reconciliation efficiency, in [0, 1].
    pub beta: f64,
    /// Heralding-detector quantum efficiency, in (0, 1]. Ignored by GG02 and
    /// the ideal NLA.
    pub eta: f64,
    /// Amplitude gain. `None` for GG02; for QS it must keep `tau <= 1/2`
    /// (`g >= 1`), for SPC any `g >= 0`, for the ideal NLA `g >= 1`.
    pub gain: Option<f64>,
}

impl ProtocolSpec {
    pub fn new(kind: ProtocolKind, beta: f64, eta: f64, gain: Option<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Domain(format!("beta {beta} outside [0, 1]")));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::Domain(format!("eta {eta} outside (0, 1]")));
        }
        match (kind, gain) {
            (ProtocolKind::Gg02, None) => {}
            (ProtocolKind::Gg02, Some(_)) => {
                return Err(Error::Domain("gg02 takes no gain".into()));
            }
            (_, None) => return Err(Error::Domain(format!("{} requires a gain", kind.name()))),
            (ProtocolKind::IdealNla, Some(g)) if g < 1.0 => {
                return Err(Error::Domain(format!("ideal NLA gain {g} < 1")));
            }
            (ProtocolKind::Qs, Some(g)) if g < 1.0 => {
                return Err(Error::Domain(format!("QS gain {g} < 1 implies tau > 1/2")));
            }
            (ProtocolKind::Spc, Some(g)) if g < 0.0 => {
                return Err(Error::Domain(format!("SPC gain {g} < 0")));
            }
            _ => {}
        }
        Ok(Self {
            kind,
            beta,
            eta,
            gain,
        })
    }
}

/// The pieces of one key-rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRateBreakdown {
    /// `I_AB`, bits.
    pub mutual_info: f64,
    /// `chi_BE`, bits.
    pub holevo: f64,
    /// Amplifier success probability (1 for GG02).
    pub p_success: f64,
    /// `K = p_success (beta I_AB - chi_BE)`, bits per channel use; may be
    /// negative. `None` when the point is infeasible.
    pub kgr: Option<f64>,
    /// False when the gain constraint of the ideal NLA is violated.
    pub feasible: bool,
}

impl KeyRateBreakdown {
    fn infeasible() -> Self {
        KeyRateBreakdown {
            mutual_info: 0.0,
            holevo: 0.0,
            p_success: 0.0,
            kgr: None,
            feasible: false,
        }
    }
}

/// Auxiliary quantities shared by the physical-NLA closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlaAuxiliaries {
    /// `w = 1 + eta T (V + eps - 1)`.
    pub w: f64,
    /// `q = 1 + eta T (1 - tau)(V + eps - 1)`.
    pub q: f64,
    /// `r = 1 + T (V + eps - 1)`.
    pub r: f64,
    /// Beamsplitter transmissivity.
    pub tau: f64,
}

/// Computes the `w, q, r` auxiliaries for a given `tau`.
pub fn nla_auxiliaries(v: f64, channel: &ChannelParams, eta: f64, tau: f64) -> NlaAuxiliaries {
    let m = v + channel.excess_noise - 1.0;
    let t = channel.transmissivity;
    NlaAuxiliaries {
        w: 1.0 + eta * t * m,
        q: 1.0 + eta * t * (1.0 - tau) * m,
        r: 1.0 + t * m,
        tau,
    }
}

// ---------------------------------------------------------------------------
// GG02
// ---------------------------------------------------------------------------

/// Key rate of the plain GG02 protocol, `K = beta I_AB - chi_BE`.
pub fn kgr_gg02(v: f64, channel: &ChannelParams, beta: f64) -> Result<KeyRateBreakdown> {
    let cm = gg02_cm(v, channel)?;
    breakdown_from_cm(&cm, beta, 1.0)
}

fn breakdown_from_cm(cm: &SymmetricBlockCM, beta: f64, p_success: f64) -> Result<KeyRateBreakdown> {
    let mutual_info = mutual_information_homodyne(cm)?;
    let holevo = holevo_information(cm)?;
    Ok(KeyRateBreakdown {
        mutual_info,
        holevo,
        p_success,
        kgr: Some(p_success * (beta * mutual_info - holevo)),
        feasible: true,
    })
}

// ---------------------------------------------------------------------------
// Ideal NLA
// ---------------------------------------------------------------------------

/// GG02-equivalent parameters of the ideal-NLA-assisted protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealNlaParams {
    pub v: f64,
    pub t: f64,
    pub eps: f64,
}

/// Maps `(V, T, eps, g)` to the equivalent GG02 parameters.
///
/// Returns `None` when the gain violates `g <= sqrt(1 + 2/(T(V+eps-1)))`
/// (the mapped variance diverges at the boundary); infeasibility is a value,
/// not an error, so optimizers can sweep through it.
pub fn ideal_nla_map(v: f64, channel: &ChannelParams, g: f64) -> Result<Option<IdealNlaParams>> {
    if g < 1.0 {
        return Err(Error::Domain(format!("ideal NLA gain {g} < 1")));
    }
    if v < 1.0 {
        return Err(Error::Domain(format!("modulation variance {v} < 1")));
    }
    let t = channel.transmissivity;
    let eps = channel.excess_noise;
    let gg = g * g - 1.0;
    let m = v + eps - 1.0;
    let denom_v = 2.0 - t * gg * m;
    if denom_v <= 0.0 {
        return Ok(None);
    }
    let z2 = (v - 1.0) * (v + 1.0);
    let v_id = v + t * gg * z2 / denom_v;
    let denom_t = 1.0 + t * gg * (t * eps * gg * (eps - 2.0) / 4.0 - eps + 1.0);
    if denom_t <= 0.0 {
        return Ok(None);
    }
    let t_id = g * g * t / denom_t;
    if !(t_id > 0.0 && t_id <= 1.0) {
        return Ok(None);
    }
    let eps_id = eps - t * eps / 2.0 * gg * (eps - 2.0);
    Ok(Some(IdealNlaParams {
        v: v_id,
        t: t_id,
        eps: eps_id,
    }))
}

/// Key rate of the ideal-NLA-assisted protocol with the optimistic success
/// probability `P_id = 1/g^2`.
pub fn kgr_ideal(v: f64, channel: &ChannelParams, beta: f64, g: f64) -> Result<KeyRateBreakdown> {
    let Some(mapped) = ideal_nla_map(v, channel, g)? else {
        return Ok(KeyRateBreakdown::infeasible());
    };
    let eff = ChannelParams::from_transmissivity(channel.kappa, mapped.t, mapped.eps)?;
    let cm = gg02_cm(mapped.v, &eff)?;
    breakdown_from_cm(&cm, beta, 1.0 / (g * g))
}

// ---------------------------------------------------------------------------
// Physical NLAs
// ---------------------------------------------------------------------------

/// QS beamsplitter transmissivity for amplitude gain `g`: `1/(1+g^2)`.
pub fn tau_qs(g: f64) -> Result<f64> {
    if g < 0.0 {
        return Err(Error::Domain(format!("gain {g} < 0")));
    }
    Ok(1.0 / (1.0 + g * g))
}

/// SPC beamsplitter transmissivity for amplitude gain `g`:
/// `(4 + g^2 - g sqrt(8 + g^2)) / 8`, the inverse of `g = (1-2tau)/sqrt(tau)`,
/// evaluated in the rationalized form `2 / (4 + g^2 + g sqrt(8 + g^2))` that
/// does not cancel at large gain.
pub fn tau_spc(g: f64) -> Result<f64> {
    if g < 0.0 {
        return Err(Error::Domain(format!("gain {g} < 0")));
    }
    Ok(2.0 / (4.0 + g * g + g * (8.0 + g * g).sqrt()))
}

fn check_physical_inputs(v: f64, eta: f64) -> Result<()> {
    if v < 1.0 {
        return Err(Error::Domain(format!("modulation variance {v} < 1")));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Domain(format!("eta {eta} outside (0, 1]")));
    }
    Ok(())
}

struct Heralded {
    a: f64,
    b_excess: f64,
    c_signed: f64,
    p_success: f64,
}

/// QS closed forms in `u = w - 1`:
///   Ptilde = 2 [eta tau (u^2+4u+8) + u(u+4)] / [(u+2)(u+4)^2]
///   W - 1  = 2 u (1-tau)(u+4) / n,           n = eta tau (u^2+4u+8) + u(u+4)
///   V - v  = -c^2 eta [eta tau (u^3+4u^2+16u+32) + u^3+4u^2-8u-32] / [(u+2)(u+4) n]
///   c_out  = 4 eta sqrt(tau(1-tau)) (u+2) sqrt(T) Z / n
/// and `P_QS = 2 Ptilde` for the two heralding branches.
fn qs_heralded(v: f64, channel: &ChannelParams, g: f64, eta: f64) -> Result<Heralded> {
    check_physical_inputs(v, eta)?;
    if g <= 0.0 {
        return Err(Error::Domain(format!("QS gain {g} <= 0")));
    }
    let tau = tau_qs(g)?;
    let t = channel.transmissivity;
    let u = eta * t * (v + channel.excess_noise - 1.0);
    let c2 = t * (v - 1.0) * (v + 1.0);
    let n = eta * tau * (u * u + 4.0 * u + 8.0) + u * (u + 4.0);
    let p_tilde = 2.0 * n / ((u + 2.0) * (u + 4.0) * (u + 4.0));
    let b_excess = 2.0 * u * (1.0 - tau) * (u + 4.0) / n;
    let poly = eta * tau * (u * u * u + 4.0 * u * u + 16.0 * u + 32.0)
        + (u * u * u + 4.0 * u * u - 8.0 * u - 32.0);
    let a = v - c2 * eta * poly / ((u + 2.0) * (u + 4.0) * n);
    let c_signed = 4.0 * eta * (tau * (1.0 - tau)).sqrt() * (u + 2.0) * c2.sqrt() / n;
    Ok(Heralded {
        a,
        b_excess,
        c_signed,
        p_success: 2.0 * p_tilde,
    })
}

/// SPC closed forms with `s = 1 - tau`, `X = 1 + q = s u + 2`:
///   P      = [4 eta tau + u s X] / X^2
///   W - 1  = u [2 eta (u^2 s^4 + 2 u s (3tau^2 - 6tau + 2) + 4 (2tau-1)^2)
///              + tau u s X (X+2)] / (eta X n),   n = P X^2
///   V - v  = 2 c^2 eta s (X - 4 eta tau) / (X n)
///   c_out  = sqrt(tau T) Z [u s (X^2 + 2X - 4 eta) - 8 eta (1-2tau)] / (X n)
fn spc_heralded(v: f64, channel: &ChannelParams, g: f64, eta: f64) -> Result<Heralded> {
    check_physical_inputs(v, eta)?;
    if g < 0.0 {
        return Err(Error::Domain(format!("SPC gain {g} < 0")));
    }
    let tau = tau_spc(g)?;
    let t = channel.transmissivity;
    let u = eta * t * (v + channel.excess_noise - 1.0);
    let c2 = t * (v - 1.0) * (v + 1.0);
    let s = 1.0 - tau;
    let x = s * u + 2.0;
    let n = 4.0 * eta * tau + u * s * x;
    let p_success = n / (x * x);
    let s2 = s * s;
    let wnum = 2.0 * eta
        * (u * u * s2 * s2 + 2.0 * u * s * (3.0 * tau * tau - 6.0 * tau + 2.0)
            + 4.0 * (2.0 * tau - 1.0) * (2.0 * tau - 1.0))
        + tau * u * s * x * (x + 2.0);
    let b_excess = u * wnum / (eta * x * n);
    let a = v + 2.0 * c2 * eta * s * (x - 4.0 * eta * tau) / (x * n);
    let c_signed = (tau * c2).sqrt() * (u * s * (x * x + 2.0 * x - 4.0 * eta) - 8.0 * eta * (1.0 - 2.0 * tau))
        / (x * n);
    Ok(Heralded {
        a,
        b_excess,
        c_signed,
        p_success,
    })
}

fn heralded(kind: ProtocolKind, v: f64, ch: &ChannelParams, g: f64, eta: f64) -> Result<Heralded> {
    match kind {
        ProtocolKind::Qs => qs_heralded(v, ch, g, eta),
        ProtocolKind::Spc => spc_heralded(v, ch, g, eta),
        other => Err(Error::Domain(format!(
            "{} is not a physical NLA",
            other.name()
        ))),
    }
}

fn heralded_to_cm(h: Heralded, kind: ProtocolKind) -> Result<(SymmetricBlockCM, f64)> {
    if !(h.p_success > 0.0 && h.p_success <= 1.0) {
        return Err(Error::NonPhysical(format!(
            "{} success probability {} outside (0, 1]",
            kind.name(),
            h.p_success
        )));
    }
    let cm = SymmetricBlockCM::from_excess(h.a, h.b_excess, h.c_signed.abs()).map_err(|e| {
        Error::NonPhysical(format!(
            "{} heralded CM (a={}, b={}, c={}): {e}",
            kind.name(),
            h.a,
            1.0 + h.b_excess,
            h.c_signed
        ))
    })?;
    Ok((cm, h.p_success))
}

/// Heralded CM and success probability of the QS-assisted protocol.
pub fn qs_cm_and_prob(
    v: f64,
    channel: &ChannelParams,
    g: f64,
    eta: f64,
) -> Result<(SymmetricBlockCM, f64)> {
    heralded_to_cm(qs_heralded(v, channel, g, eta)?, ProtocolKind::Qs)
}

/// Heralded CM and success probability of the SPC-assisted protocol.
pub fn spc_cm_and_prob(
    v: f64,
    channel: &ChannelParams,
    g: f64,
    eta: f64,
) -> Result<(SymmetricBlockCM, f64)> {
    heralded_to_cm(spc_heralded(v, channel, g, eta)?, ProtocolKind::Spc)
}

/// Raw signed q-quadrature correlation of the heralded state (positive for
/// QS, negative for SPC below `tau = 1/2`). The Fock oracle reproduces this
/// sign; the CMs returned by the `*_cm_and_prob` functions normalize it away.
pub fn signed_correlation(
    kind: ProtocolKind,
    v: f64,
    channel: &ChannelParams,
    g: f64,
    eta: f64,
) -> Result<f64> {
    Ok(heralded(kind, v, channel, g, eta)?.c_signed)
}

/// Gaussian lower bound on the key rate of a physical-NLA-assisted protocol,
/// `K = P (beta I_AB - chi_BE)`; negative values are reported as-is.
pub fn kgr_physical(
    kind: ProtocolKind,
    v: f64,
    channel: &ChannelParams,
    beta: f64,
    eta: f64,
    g: f64,
) -> Result<KeyRateBreakdown> {
    let (cm, p) = heralded_to_cm(heralded(kind, v, channel, g, eta)?, kind)?;
    breakdown_from_cm(&cm, beta, p)
}

/// Evaluates the key rate of any protocol at a fixed modulation variance.
pub fn evaluate(spec: &ProtocolSpec, channel: &ChannelParams, v: f64) -> Result<KeyRateBreakdown> {
    match spec.kind {
        ProtocolKind::Gg02 => kgr_gg02(v, channel, spec.beta),
        ProtocolKind::IdealNla => kgr_ideal(v, channel, spec.beta, spec.gain.unwrap()),
        kind => kgr_physical(kind, v, channel, spec.beta, spec.eta, spec.gain.unwrap()),
    }
}

// ---------------------------------------------------------------------------
// Long-distance asymptotics and the PLOB bound
// ---------------------------------------------------------------------------

/// Effective-channel quantities of the optimized-gain asymptotic analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticParams {
    /// Effective transmissivity `T_p = g^2 T / (1 + g^2 T (V+eps-1)/2)`.
    pub t_eff: f64,
    /// Effective excess noise `eps_p = eps - delta_v`.
    pub eps_eff: f64,
    /// Variance increase `delta V_p = T_p Z^2 / 2`.
    pub delta_v: f64,
    /// The correlation a GG02 channel of transmissivity `T_p` would show,
    /// `Z_p^(GG) = sqrt(T_p (V_p^2 - 1))` with `V_p = V + delta_v`.
    pub z_gg: f64,
}

/// Asymptotic effective parameters for cross-checking the exact heralded CMs.
pub fn asymptotic_effective_params(
    v: f64,
    channel: &ChannelParams,
    g: f64,
) -> AsymptoticParams {
    let t = channel.transmissivity;
    let eps = channel.excess_noise;
    let g2t = g * g * t;
    let t_eff = g2t / (1.0 + g2t * (v + eps - 1.0) / 2.0);
    let z2 = (v - 1.0) * (v + 1.0);
    let delta_v = t_eff * z2 / 2.0;
    let v_eff = v + delta_v;
    AsymptoticParams {
        t_eff,
        eps_eff: eps - delta_v,
        delta_v,
        z_gg: (t_eff * (v_eff * v_eff - 1.0)).sqrt(),
    }
}

/// PLOB repeaterless upper bound on the key rate of the thermal-loss channel:
/// `K_max = -log2[(1-T) T^n_eps] - G(n_eps)`, bits per use.
pub fn plob_bound(channel: &ChannelParams) -> Result<f64> {
    let t = channel.transmissivity;
    if t >= 1.0 {
        return Err(Error::Domain("PLOB bound diverges at T = 1".into()));
    }
    let n = channel
        .thermal_photons
        .ok_or_else(|| Error::Domain("thermal photon number undefined".into()))?;
    let g = crate::gaussian::g_entropy(n)?;
    Ok(-(-t).ln_1p() / std::f64::consts::LN_2 - n * t.log2() - g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::channel_from_distance;
    use crate::gaussian::symplectic_spectrum;

    fn ch_t(t: f64, eps: f64) -> ChannelParams {
        ChannelParams::from_transmissivity(0.2, t, eps).unwrap()
    }

    // ---- GG02 ----

    #[test]
    fn gg02_vacuum_gives_zero_rate_on_noiseless_channels() {
        for &t in &[1.0, 0.5, 0.01] {
            let b = kgr_gg02(1.0, &ch_t(t, 0.0), 0.95).unwrap();
            assert_eq!(b.mutual_info, 0.0);
            assert!(b.holevo.abs() < 1e-12);
            assert!(b.kgr.unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn gg02_pure_channel_rate_is_half_bit() {
        let b = kgr_gg02(2.0, &ch_t(1.0, 0.0), 1.0).unwrap();
        assert!((b.mutual_info - 0.5).abs() < 1e-12);
        assert!(b.holevo.abs() < 1e-9);
        assert!((b.kgr.unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn gg02_50km_rate_positive_and_matches_reference() {
        let ch = channel_from_distance(0.2, 50.0, 0.03).unwrap();
        let b = kgr_gg02(4.0, &ch, 0.95).unwrap();
        assert!((b.mutual_info - 0.18875773897797699).abs() < 1e-12);
        assert!((b.holevo - 0.15327042372992983).abs() < 1e-12);
        assert!((b.kgr.unwrap() - 0.026049428299148303).abs() < 1e-12);
    }

    // ---- ideal NLA ----

    #[test]
    fn ideal_map_unit_gain_is_identity() {
        let ch = ch_t(0.37, 0.042);
        let m = ideal_nla_map(3.1, &ch, 1.0).unwrap().unwrap();
        assert_eq!(m.v, 3.1);
        assert_eq!(m.t, 0.37);
        assert_eq!(m.eps, 0.042);
    }

    #[test]
    fn ideal_map_example_values() {
        let m = ideal_nla_map(2.0, &ch_t(0.01, 0.0), 2.0).unwrap().unwrap();
        assert!((m.v - (2.0 + 0.09 / 1.97)).abs() < 1e-14);
        assert!((m.t - 0.04 / 1.03).abs() < 1e-14);
        assert_eq!(m.eps, 0.0);
        assert!(m.v >= 2.0 && m.t >= 0.01);
    }

    #[test]
    fn ideal_map_violating_gain_constraint_is_infeasible() {
        // bound sqrt(1 + 2/0.9) ~ 1.79 < 2
        assert!(ideal_nla_map(2.0, &ch_t(0.9, 0.0), 2.0).unwrap().is_none());
    }

    #[test]
    fn ideal_gain_constraint_boundary_flip() {
        let v = 2.0;
        let eps = 0.03;
        let ch = ch_t(0.2, eps);
        let bound = (1.0 + 2.0 / (0.2 * (v + eps - 1.0))).sqrt();
        assert!(ideal_nla_map(v, &ch, bound - 1e-6).unwrap().is_some());
        assert!(ideal_nla_map(v, &ch, bound + 1e-6).unwrap().is_none());
        let inner = ideal_nla_map(v, &ch, bound - 1e-6).unwrap().unwrap();
        assert!(inner.v > 1e4, "V_id should diverge near the bound: {}", inner.v);
    }

    #[test]
    fn ideal_unit_gain_matches_gg02() {
        let ch = channel_from_distance(0.2, 40.0, 0.02).unwrap();
        let a = kgr_ideal(3.0, &ch, 0.95, 1.0).unwrap();
        let b = kgr_gg02(3.0, &ch, 0.95).unwrap();
        assert!((a.kgr.unwrap() - b.kgr.unwrap()).abs() < 1e-12);
        assert_eq!(a.p_success, 1.0);
    }

    #[test]
    fn ideal_beats_gg02_at_long_distance() {
        let ch = channel_from_distance(0.2, 100.0, 0.03).unwrap();
        let a = kgr_ideal(2.0, &ch, 0.95, 2.0).unwrap();
        let b = kgr_gg02(2.0, &ch, 0.95).unwrap();
        assert!(a.kgr.unwrap() > b.kgr.unwrap());
    }

    #[test]
    fn ideal_infeasible_at_short_distance() {
        let ch = channel_from_distance(0.2, 5.0, 0.03).unwrap();
        let b = kgr_ideal(2.0, &ch, 0.95, 2.0).unwrap();
        assert!(!b.feasible);
        assert!(b.kgr.is_none());
    }

    // ---- tau maps ----

    #[test]
    fn tau_examples() {
        assert_eq!(tau_qs(1.0).unwrap(), 0.5);
        assert!((tau_qs(2.0).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(tau_qs(0.0).unwrap(), 1.0);
        assert_eq!(tau_spc(0.0).unwrap(), 0.5);
        assert!((tau_spc(2.0).unwrap() - 0.1339745962155614).abs() < 1e-15);
        assert!(tau_qs(-0.1).is_err());
        assert!(tau_spc(-0.1).is_err());
    }

    #[test]
    fn tau_spc_roundtrip() {
        let mut g = 0.0;
        while g <= 20.0 {
            let tau = tau_spc(g).unwrap();
            let back = (1.0 - 2.0 * tau) / tau.sqrt();
            assert!(
                (back - g).abs() <= 1e-12 * g.max(1.0),
                "roundtrip {g} -> {back}"
            );
            g += 0.111;
        }
    }

    // ---- physical NLA closed forms ----

    const STD: (f64, f64, f64, f64, f64) = (1.5, 0.5, 0.02, 0.8, 1.5);

    #[test]
    fn qs_standard_point_frozen_values() {
        let (v, t, eps, eta, g) = STD;
        let (cm, p) = qs_cm_and_prob(v, &ch_t(t, eps), g, eta).unwrap();
        assert!((p - 0.3130566913381154).abs() < 1e-14);
        assert!((cm.a() - 1.9351100069292557).abs() < 1e-13);
        assert!((cm.b() - 1.396054259085977).abs() < 1e-13);
        assert!((cm.c() - 0.8425262158996456).abs() < 1e-13);
        let signed = signed_correlation(ProtocolKind::Qs, v, &ch_t(t, eps), g, eta).unwrap();
        assert!(signed > 0.0);
    }

    #[test]
    fn spc_standard_point_frozen_values() {
        let (v, t, eps, eta, g) = STD;
        let (cm, p) = spc_cm_and_prob(v, &ch_t(t, eps), g, eta).unwrap();
        assert!((p - 0.20142536010910783).abs() < 1e-14);
        assert!((cm.a() - 2.132919076209458).abs() < 1e-13);
        assert!((cm.b() - 1.4378582996113178).abs() < 1e-13);
        assert!((cm.c() - 0.5041332135723565).abs() < 1e-13);
        let signed = signed_correlation(ProtocolKind::Spc, v, &ch_t(t, eps), g, eta).unwrap();
        assert!(signed < 0.0, "SPC raw correlation should be negative");
    }

    #[test]
    fn small_t_limits_match_effective_gg02_channel() {
        // V_p -> V, W_p -> 1 + g^2 T (V+eps-1), c_p -> sqrt(g^2 T) Z,
        // P_p -> eta tau_p.
        let (v, eps, eta, g) = (4.0, 0.03, 0.8, 2.0);
        let t = 1e-9;
        for kind in [ProtocolKind::Qs, ProtocolKind::Spc] {
            let ch = ch_t(t, eps);
            let (cm, p) = match kind {
                ProtocolKind::Qs => qs_cm_and_prob(v, &ch, g, eta).unwrap(),
                _ => spc_cm_and_prob(v, &ch, g, eta).unwrap(),
            };
            let tau = match kind {
                ProtocolKind::Qs => tau_qs(g).unwrap(),
                _ => tau_spc(g).unwrap(),
            };
            assert!((cm.a() - v).abs() < 1e-6);
            let w_ref = g * g * t * (v + eps - 1.0);
            assert!((cm.b_excess() / w_ref - 1.0).abs() < 1e-6);
            let z_ref = (g * g * t * (v * v - 1.0)).sqrt();
            assert!((cm.c() / z_ref - 1.0).abs() < 1e-6);
            assert!((p / (eta * tau) - 1.0).abs() < 1e-6, "{}", kind.name());
        }
    }

    #[test]
    fn auxiliary_ordering_q_le_w_le_r() {
        let ch = ch_t(0.3, 0.05);
        let aux = nla_auxiliaries(2.5, &ch, 0.7, 0.3);
        assert!(aux.q >= 1.0 && aux.w >= 1.0 && aux.r >= 1.0);
        assert!(aux.q <= aux.w && aux.w <= aux.r);
    }

    #[test]
    fn heralded_cms_physical_on_grid() {
        for &v in &[1.1, 2.0, 4.0, 10.0] {
            for &d in &[10.0, 50.0, 150.0, 300.0] {
                for &eps in &[0.0, 0.01, 0.03] {
                    for &eta in &[0.5, 1.0] {
                        for &g in &[1.2, 2.0, 5.0] {
                            let ch = channel_from_distance(0.2, d, eps).unwrap();
                            for kind in [ProtocolKind::Qs, ProtocolKind::Spc] {
                                let (cm, p) = match kind {
                                    ProtocolKind::Qs => qs_cm_and_prob(v, &ch, g, eta).unwrap(),
                                    _ => spc_cm_and_prob(v, &ch, g, eta).unwrap(),
                                };
                                assert!(p > 0.0 && p <= 1.0);
                                let s = symplectic_spectrum(&cm).unwrap();
                                assert!(
                                    s.d2 >= 1.0 - 1e-6,
                                    "{} d2={} at V={v} d={d} eps={eps} eta={eta} g={g}",
                                    kind.name(),
                                    s.d2
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn success_probability_ordering_spc_below_qs() {
        // Long-distance regime: the ordering is an asymptotic statement
        // (P_p -> eta tau_p as T(V+eps-1) -> 0) and can invert when
        // T(V+eps-1) approaches one, e.g. at T=0.1, V=20, g=4.
        for &t in &[0.01, 1e-3, 1e-4] {
            for &v in &[1.1, 1.5, 4.0, 10.0] {
                for &g in &[1.2, 2.0, 3.5, 5.0] {
                    let ch = ch_t(t, 0.03);
                    let (_, pq) = qs_cm_and_prob(v, &ch, g, 1.0).unwrap();
                    let (_, ps) = spc_cm_and_prob(v, &ch, g, 1.0).unwrap();
                    assert!(ps <= pq + 1e-12, "P ordering at T={t} V={v} g={g}");
                }
            }
        }
        for &v in &[1.1, 1.5, 4.0] {
            for &g in &[1.2, 2.0, 5.0] {
                let ch = ch_t(0.1, 0.03);
                let (_, pq) = qs_cm_and_prob(v, &ch, g, 1.0).unwrap();
                let (_, ps) = spc_cm_and_prob(v, &ch, g, 1.0).unwrap();
                assert!(ps <= pq + 1e-12, "P ordering at T=0.1 V={v} g={g}");
            }
        }
    }

    #[test]
    fn physical_rates_negative_at_short_distance() {
        for kind in [ProtocolKind::Qs, ProtocolKind::Spc] {
            for &d in &[0.5, 2.0, 5.0] {
                let ch = channel_from_distance(0.2, d, 0.03).unwrap();
                let b = kgr_physical(kind, 4.0, &ch, 0.95, 1.0, 2.0).unwrap();
                assert!(b.kgr.unwrap() < 0.0, "{} at {d} km", kind.name());
            }
        }
    }

    #[test]
    fn kgr_identity_holds() {
        let ch = channel_from_distance(0.2, 120.0, 0.03).unwrap();
        for kind in [ProtocolKind::Qs, ProtocolKind::Spc] {
            let b = kgr_physical(kind, 3.0, &ch, 0.95, 0.9, 2.0).unwrap();
            let k = b.kgr.unwrap();
            let recomputed = b.p_success * (0.95 * b.mutual_info - b.holevo);
            assert!((k - recomputed).abs() <= 1e-12 * k.abs().max(1e-300));
        }
    }

    // ---- asymptotics and PLOB ----

    #[test]
    fn asymptotic_params_small_g2t_limit() {
        let ch = ch_t(1e-8, 0.03);
        let p = asymptotic_effective_params(4.0, &ch, 2.0);
        assert!((p.t_eff / (4.0 * 1e-8) - 1.0).abs() < 1e-6);
        assert!((p.eps_eff - 0.03).abs() < 1e-6);
    }

    #[test]
    fn asymptotic_z_le_z_gg() {
        for &t in &[1e-6, 1e-4, 1e-2] {
            for &g in &[2.0, 10.0, 100.0] {
                let ch = ch_t(t, 0.03);
                let v = 4.0;
                let p = asymptotic_effective_params(v, &ch, g);
                let z = (v * v - 1.0f64).sqrt();
                let z_p = p.t_eff / (g * g * t).sqrt() * z;
                assert!(z_p <= p.z_gg + 1e-12);
            }
        }
    }

    #[test]
    fn asymptotic_example_value() {
        // g^2 T = 1, V = 4, eps = 0.03: T_p = 1/(1 + 3.03/2).
        let t: f64 = 1e-4;
        let g = (1.0 / t).sqrt();
        let p = asymptotic_effective_params(4.0, &ch_t(t, 0.03), g);
        assert!((p.t_eff - 1.0 / (1.0 + 3.03 / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn plob_examples() {
        assert!((plob_bound(&ch_t(0.5, 0.0)).unwrap() - 1.0).abs() < 1e-12);
        let k = plob_bound(&ch_t(1e-3, 0.03)).unwrap();
        assert!((k - 0.0013308019125505169).abs() < 1e-15);
        assert!(plob_bound(&ch_t(1.0, 0.0)).is_err());
        // eps = 0: K = -log2(1-T).
        let k0 = plob_bound(&ch_t(0.25, 0.0)).unwrap();
        assert!((k0 + (0.75f64).log2()).abs() < 1e-12);
    }

    #[test]
    fn protocol_spec_validation() {
        assert!(ProtocolSpec::new(ProtocolKind::Gg02, 0.95, 1.0, None).is_ok());
        assert!(ProtocolSpec::new(ProtocolKind::Gg02, 0.95, 1.0, Some(2.0)).is_err());
        assert!(ProtocolSpec::new(ProtocolKind::Qs, 0.95, 1.0, Some(0.5)).is_err());
        assert!(ProtocolSpec::new(ProtocolKind::Spc, 0.95, 1.0, Some(0.0)).is_ok());
        assert!(ProtocolSpec::new(ProtocolKind::IdealNla, 1.1, 1.0, Some(2.0)).is_err());
        assert!(ProtocolSpec::new(ProtocolKind::Qs, 0.95, 0.0, Some(2.0)).is_err());
    }
}
