//! Brute-force truncated Fock-space simulation of the TMSV source, the
//! thermal-loss channel, and the QS / SPC conditional circuits.
//!
//! This module is the independent oracle for the closed-form heralded
//! covariance matrices in [`crate::protocols`]: it builds the actual optical
//! circuits from beamsplitter unitaries and on-off POVMs and extracts
//! quadrature moments, with no phase-space formulas anywhere in the path.

mod bs;
mod density;
mod pure;
mod sim;

pub use bs::BeamsplitterUnitary;
pub use density::{hermitian_eigenvalues, DensityOperator, CUTOFF_LIMIT};
pub use sim::{
    qs_reduced_pair, simulate_qs, simulate_qs_branch, simulate_spc, simulate_spc_with_tau, Branch,
    FockDims, SimOutcome, TwoModeCm,
};

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Outcome label of an on-off detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detection {
    On,
    Off,
}

/// TMSV Fock amplitudes `sqrt(1-lambda^2) lambda^n` up to `dim` levels and
/// the truncated tail weight `lambda^(2 dim)`.
pub(crate) fn tmsv_amps(v: f64, dim: usize) -> (Vec<f64>, f64) {
    let lambda = ((v - 1.0) / (v + 1.0)).sqrt();
    let norm = (1.0 - lambda * lambda).sqrt();
    let amps = (0..dim).map(|n| norm * lambda.powi(n as i32)).collect();
    (amps, lambda.powi(2 * dim as i32))
}

/// Truncated two-mode squeezed vacuum of variance `v` as a density operator.
///
/// Fails when the truncated weight `lambda^(2 dim)` exceeds
/// [`CUTOFF_LIMIT`].
pub fn tmsv_state(v: f64, dim: usize) -> Result<DensityOperator> {
    if v < 1.0 {
        return Err(Error::Domain(format!("TMSV variance {v} < 1")));
    }
    if dim < 2 {
        return Err(Error::Domain(format!("TMSV cutoff {dim} < 2")));
    }
    let (amps, weight) = tmsv_amps(v, dim);
    if weight > CUTOFF_LIMIT {
        return Err(Error::CutoffTooSmall {
            weight,
            limit: CUTOFF_LIMIT,
        });
    }
    let mut ket = vec![Complex64::ZERO; dim * dim];
    let renorm = 1.0 / (1.0 - weight).sqrt();
    for (n, &a) in amps.iter().enumerate() {
        ket[n * dim + n] = Complex64::new(a * renorm, 0.0);
    }
    Ok(DensityOperator::from_pure(vec![dim, dim], &ket))
}

/// Couples `mode` to a truncated thermal ancilla of mean photons `n_eps`
/// through a beamsplitter of transmissivity `t`, then traces the ancilla out.
pub fn thermal_loss(
    state: &DensityOperator,
    mode: usize,
    t: f64,
    n_eps: f64,
    ancilla_dim: usize,
) -> Result<DensityOperator> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Domain(format!("transmissivity {t} outside (0, 1]")));
    }
    if n_eps < 0.0 {
        return Err(Error::Domain(format!("thermal photons {n_eps} < 0")));
    }
    let ancilla = DensityOperator::thermal(n_eps, ancilla_dim)?;
    let mut joint = state.tensor(&ancilla);
    let anc = state.dims().len();
    let n_max = joint.dims()[mode] + joint.dims()[anc] - 2;
    let u = BeamsplitterUnitary::with_transmissivity(t, n_max);
    joint.apply_mixing(mode, anc, &u);
    let keep: Vec<usize> = (0..anc).collect();
    Ok(joint.partial_trace(&keep))
}

/// Applies a beamsplitter of transmissivity `tau` on the mode pair.
pub fn apply_beamsplitter(
    state: &DensityOperator,
    modes: (usize, usize),
    tau: f64,
) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Domain(format!("transmissivity {tau} outside [0, 1]")));
    }
    let (i, j) = modes;
    let mut out = state.clone();
    let n_max = state.dims()[i] + state.dims()[j] - 2;
    let u = BeamsplitterUnitary::with_transmissivity(tau, n_max);
    out.apply_mixing(i, j, &u);
    Ok(out)
}

/// Diagonal of the on-off POVM element: `(1-eta)^k` for off,
/// `1 - (1-eta)^k` for on.
pub fn onoff_povm_element(outcome: Detection, eta: f64, dim: usize) -> Result<Vec<f64>> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::Domain(format!("eta {eta} outside (0, 1]")));
    }
    let miss = 1.0 - eta;
    Ok((0..dim)
        .map(|k| {
            let p_off = miss.powi(k as i32);
            match outcome {
                Detection::Off => p_off,
                Detection::On => 1.0 - p_off,
            }
        })
        .collect())
}
