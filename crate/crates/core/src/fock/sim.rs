//! Full circuit simulations of the QS- and SPC-assisted receivers.
//!
//! Wiring (one thermal-bath Fock component at a time, mixed classically):
//!
//! QS: modes `(A, B, E, B1, B2)`; TMSV on (A, B); bath `|k>` on E; `|1>` on
//! B1; `|0>` on B2. Channel beamsplitter on (B, E); ancilla beamsplitter
//! `c1 = sqrt(tau) B1 - sqrt(1-tau) B2`, `c2 = sqrt(1-tau) B1 + sqrt(tau) B2`;
//! balanced mixer `bB = (B + c1)/sqrt2`, `bB1 = (-B + c1)/sqrt2`; on-off pair
//! on (B, B1); output pair (A, B2).
//!
//! SPC: modes `(A, B, E, B1)`; `|1>` on B1; channel on (B, E); beamsplitter
//! `bB = sqrt(tau) B + sqrt(1-tau) B1`, `bB1 = -sqrt(1-tau) B + sqrt(tau) B1`;
//! "on" on B1; output pair (A, B).

use num_complex::Complex64;

use super::bs::BeamsplitterUnitary;
use super::pure::PureState;
use super::{onoff_povm_element, tmsv_amps, Detection, CUTOFF_LIMIT};
use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::protocols::{tau_qs, tau_spc};

/// Truncation controls for the circuit simulations.
#[derive(Debug, Clone, Copy)]
pub struct FockDims {
    /// Fock levels kept for each TMSV signal mode.
    pub signal: usize,
}

impl Default for FockDims {
    fn default() -> Self {
        FockDims { signal: 20 }
    }
}

/// Heralding pattern of the two QS detectors on modes `(bB, bB1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    OnOff,
    OffOn,
}

/// General 4x4 covariance matrix over `(q_A, p_A, q_out, p_out)` plus the
/// first moments (which must vanish for these circuits).
#[derive(Debug, Clone, Copy)]
pub struct TwoModeCm {
    pub mat: [[f64; 4]; 4],
    pub means: [f64; 4],
}

impl TwoModeCm {
    /// Checks the symmetric block pattern `(a I2, b I2, c sz)` within `tol`
    /// and returns `(a, b, c)` with the signed `c` read from the qq entry.
    pub fn block_form(&self, tol: f64) -> Result<(f64, f64, f64)> {
        let m = &self.mat;
        let checks = [
            (m[0][0] - m[1][1]).abs(),
            (m[2][2] - m[3][3]).abs(),
            (m[0][2] + m[1][3]).abs(),
            m[0][1].abs(),
            m[2][3].abs(),
            m[0][3].abs(),
            m[1][2].abs(),
        ];
        let worst = checks.iter().cloned().fold(0.0, f64::max);
        if worst > tol {
            return Err(Error::NonPhysical(format!(
                "CM deviates from the symmetric block pattern by {worst:.3e}"
            )));
        }
        Ok((
            0.5 * (m[0][0] + m[1][1]),
            0.5 * (m[2][2] + m[3][3]),
            0.5 * (m[0][2] - m[1][3]),
        ))
    }
}

/// One conditional-circuit simulation result.
#[derive(Debug, Clone, Copy)]
pub struct SimOutcome {
    pub cm: TwoModeCm,
    pub p_success: f64,
    /// Total probability weight lost to truncation (source tails plus
    /// beamsplitter overflow); the quality gate for the run.
    pub truncation_loss: f64,
}

struct MomentAccumulator {
    prob: f64,
    a_i: Complex64,
    a_j: Complex64,
    n_i: f64,
    n_j: f64,
    aa_i: Complex64,
    aa_j: Complex64,
    ai_aj: Complex64,
    adi_aj: Complex64,
}

impl MomentAccumulator {
    fn new() -> Self {
        MomentAccumulator {
            prob: 0.0,
            a_i: Complex64::ZERO,
            a_j: Complex64::ZERO,
            n_i: 0.0,
            n_j: 0.0,
            aa_i: Complex64::ZERO,
            aa_j: Complex64::ZERO,
            ai_aj: Complex64::ZERO,
            adi_aj: Complex64::ZERO,
        }
    }

    fn add(&mut self, psi: &PureState, i: usize, j: usize) {
        self.prob += psi.norm2();
        self.a_i += psi.ladder_expect(&[], &[(i, 1)]);
        self.a_j += psi.ladder_expect(&[], &[(j, 1)]);
        self.n_i += psi.ladder_expect(&[(i, 1)], &[(i, 1)]).re;
        self.n_j += psi.ladder_expect(&[(j, 1)], &[(j, 1)]).re;
        self.aa_i += psi.ladder_expect(&[], &[(i, 2)]);
        self.aa_j += psi.ladder_expect(&[], &[(j, 2)]);
        self.ai_aj += psi.ladder_expect(&[], &[(i, 1), (j, 1)]);
        self.adi_aj += psi.ladder_expect(&[(i, 1)], &[(j, 1)]);
    }

    fn finish(&self) -> Result<TwoModeCm> {
        let p = self.prob;
        if p <= 0.0 {
            return Err(Error::NonPhysical(
                "zero success probability in Fock simulation".into(),
            ));
        }
        let a_i = self.a_i / p;
        let a_j = self.a_j / p;
        let means = [
            2.0 * a_i.re,
            -2.0 * a_i.im,
            2.0 * a_j.re,
            -2.0 * a_j.im,
        ];
        if means.iter().any(|m| m.abs() > 1e-8) {
            return Err(Error::NonPhysical(format!(
                "nonzero first moments in heralded state: {means:?}"
            )));
        }
        let (n_i, n_j) = (self.n_i / p, self.n_j / p);
        let (aa_i, aa_j) = (self.aa_i / p, self.aa_j / p);
        let (y, x) = (self.ai_aj / p, self.adi_aj / p);
        let qq_i = 2.0 * aa_i.re + 2.0 * n_i + 1.0;
        let pp_i = -2.0 * aa_i.re + 2.0 * n_i + 1.0;
        let qp_i = 2.0 * aa_i.im;
        let qq_j = 2.0 * aa_j.re + 2.0 * n_j + 1.0;
        let pp_j = -2.0 * aa_j.re + 2.0 * n_j + 1.0;
        let qp_j = 2.0 * aa_j.im;
        let qq_ij = 2.0 * y.re + 2.0 * x.re;
        let pp_ij = -2.0 * y.re + 2.0 * x.re;
        let qp_ij = 2.0 * (y.im + x.im);
        let pq_ij = 2.0 * (y.im - x.im);
        Ok(TwoModeCm {
            mat: [
                [qq_i, qp_i, qq_ij, qp_ij],
                [qp_i, pp_i, pq_ij, pp_ij],
                [qq_ij, pq_ij, qq_j, qp_j],
                [qp_ij, pp_ij, qp_j, pp_j],
            ],
            means,
        })
    }
}

/// Thermal-bath Fock weights covering all but `< 1e-9` of the distribution.
fn bath_weights(channel: &ChannelParams) -> Result<Vec<f64>> {
    let nbar = channel.thermal_photons.ok_or_else(|| {
        Error::Domain("bath photon number undefined (T = 1 with eps > 0)".into())
    })?;
    if nbar == 0.0 {
        return Ok(vec![1.0]);
    }
    let ratio = nbar / (1.0 + nbar);
    let mut weights = Vec::new();
    let mut tail = 1.0;
    for k in 0..24 {
        let p = nbar.powi(k) / (1.0 + nbar).powi(k + 1);
        weights.push(p);
        tail -= p;
        if tail < 1e-9 {
            return Ok(weights);
        }
    }
    let _ = ratio;
    Err(Error::CutoffTooSmall {
        weight: tail,
        limit: CUTOFF_LIMIT,
    })
}

fn signal_cutoff_check(v: f64, dim: usize) -> Result<(Vec<f64>, f64)> {
    if v < 1.0 {
        return Err(Error::Domain(format!("TMSV variance {v} < 1")));
    }
    if dim < 2 {
        return Err(Error::Domain(format!("signal cutoff {dim} < 2")));
    }
    let (amps, weight) = tmsv_amps(v, dim);
    if weight > CUTOFF_LIMIT {
        return Err(Error::CutoffTooSmall {
            weight,
            limit: CUTOFF_LIMIT,
        });
    }
    Ok((amps, weight))
}

/// Simulates the QS circuit for the `(on, off)` branch.
pub fn simulate_qs(
    v: f64,
    channel: &ChannelParams,
    g: f64,
    eta: f64,
    dims: &FockDims,
) -> Result<SimOutcome> {
    simulate_qs_branch(v, channel, g, eta, dims, Branch::OnOff)
}

/// Simulates the QS circuit for a chosen heralding branch.
///
/// `p_success` is doubled (the two branches herald with equal probability);
/// the reported CM belongs to the requested branch alone.
pub fn simulate_qs_branch(
    v: f64,
    channel: &ChannelParams,
    g: f64,
    eta: f64,
    dims: &FockDims,
    branch: Branch,
) -> Result<SimOutcome> {
    if g <= 0.0 {
        return Err(Error::Domain(format!("QS gain {g} <= 0")));
    }
    let tau = tau_qs(g)?;
    let (amps, tmsv_tail) = signal_cutoff_check(v, dims.signal)?;
    let weights = bath_weights(channel)?;
    let t = channel.transmissivity;

    let da = dims.signal;
    let ke = weights.len();
    let nb = (da - 1) + (ke - 1) + 1; // B occupancy after channel + mixer
    let mode_dims = vec![da, nb + 1, da + ke - 1, nb + 1, 2];
    let (ma, mb, me, mb1, mb2) = (0usize, 1usize, 2usize, 3usize, 4usize);

    let n_chan = mode_dims[mb] + mode_dims[me] - 2;
    let u_chan = BeamsplitterUnitary::with_transmissivity(t, n_chan);
    let st = tau.sqrt();
    let rt = (1.0 - tau).sqrt();
    let u_anc = BeamsplitterUnitary::new([[st, -rt], [rt, st]], mode_dims[mb1] + mode_dims[mb2] - 2);
    let u_mix = BeamsplitterUnitary::with_transmissivity(0.5, mode_dims[mb] + mode_dims[mb1] - 2);

    let (on_mode, off_mode) = match branch {
        Branch::OnOff => (mb, mb1),
        Branch::OffOn => (mb1, mb),
    };
    let on_w = onoff_povm_element(Detection::On, eta, mode_dims[on_mode])?
        .iter()
        .map(|w| w.sqrt())
        .collect::<Vec<_>>();
    let off_w = onoff_povm_element(Detection::Off, eta, mode_dims[off_mode])?
        .iter()
        .map(|w| w.sqrt())
        .collect::<Vec<_>>();

    let mut acc = MomentAccumulator::new();
    let mut lost = tmsv_tail + (1.0 - weights.iter().sum::<f64>());
    for (k, &wk) in weights.iter().enumerate() {
        let mut psi = PureState::zero(mode_dims.clone());
        for (n, &a) in amps.iter().enumerate() {
            let off = psi.offset(&[n, n, k, 1, 0]);
            psi.amp[off] = Complex64::new(wk.sqrt() * a, 0.0);
        }
        psi.apply_mixing(mb, me, &u_chan);
        psi.apply_mixing(mb1, mb2, &u_anc);
        psi.apply_mixing(mb, mb1, &u_mix);
        psi.scale_mode(on_mode, &on_w);
        psi.scale_mode(off_mode, &off_w);
        lost += psi.lost_norm;
        acc.add(&psi, ma, mb2);
    }
    let cm = acc.finish()?;
    Ok(SimOutcome {
        cm,
        p_success: 2.0 * acc.prob,
        truncation_loss: lost,
    })
}

/// Simulates the SPC circuit at the transmissivity implied by gain `g`.
pub fn simulate_spc(
    v: f64,
    channel: &ChannelParams,
    g: f64,
    eta: f64,
    dims: &FockDims,
) -> Result<SimOutcome> {
    simulate_spc_with_tau(v, channel, tau_spc(g)?, eta, dims)
}

/// Simulates the SPC circuit at a directly chosen beamsplitter
/// transmissivity (`tau = 1` makes the catalysis act as the identity).
pub fn simulate_spc_with_tau(
    v: f64,
    channel: &ChannelParams,
    tau: f64,
    eta: f64,
    dims: &FockDims,
) -> Result<SimOutcome> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Domain(format!("transmissivity {tau} outside [0, 1]")));
    }
    let (amps, tmsv_tail) = signal_cutoff_check(v, dims.signal)?;
    let weights = bath_weights(channel)?;
    let t = channel.transmissivity;

    let da = dims.signal;
    let ke = weights.len();
    let nb = (da - 1) + (ke - 1) + 1;
    let mode_dims = vec![da, nb + 1, da + ke - 1, nb + 1];
    let (ma, mb, me, mb1) = (0usize, 1usize, 2usize, 3usize);

    let u_chan = BeamsplitterUnitary::with_transmissivity(t, mode_dims[mb] + mode_dims[me] - 2);
    let u_spc = BeamsplitterUnitary::with_transmissivity(tau, mode_dims[mb] + mode_dims[mb1] - 2);
    let on_w = onoff_povm_element(Detection::On, eta, mode_dims[mb1])?
        .iter()
        .map(|w| w.sqrt())
        .collect::<Vec<_>>();

    let mut acc = MomentAccumulator::new();
    let mut lost = tmsv_tail + (1.0 - weights.iter().sum::<f64>());
    for (k, &wk) in weights.iter().enumerate() {
        let mut psi = PureState::zero(mode_dims.clone());
        for (n, &a) in amps.iter().enumerate() {
            let off = psi.offset(&[n, n, k, 1]);
            psi.amp[off] = Complex64::new(wk.sqrt() * a, 0.0);
        }
        psi.apply_mixing(mb, me, &u_chan);
        psi.apply_mixing(mb, mb1, &u_spc);
        psi.scale_mode(mb1, &on_w);
        lost += psi.lost_norm;
        acc.add(&psi, ma, mb);
    }
    let cm = acc.finish()?;
    Ok(SimOutcome {
        cm,
        p_success: acc.prob,
        truncation_loss: lost,
    })
}

/// Reduced heralded density matrix of the QS output pair (on,off branch),
/// for positivity and Hermiticity checks on the conditioned state.
pub fn qs_reduced_pair(
    v: f64,
    channel: &ChannelParams,
    g: f64,
    eta: f64,
    dims: &FockDims,
) -> Result<super::DensityOperator> {
    let tau = tau_qs(g)?;
    let (amps, _) = signal_cutoff_check(v, dims.signal)?;
    let weights = bath_weights(channel)?;
    let t = channel.transmissivity;
    let da = dims.signal;
    let ke = weights.len();
    let nb = (da - 1) + (ke - 1) + 1;
    let mode_dims = vec![da, nb + 1, da + ke - 1, nb + 1, 2];
    let u_chan = BeamsplitterUnitary::with_transmissivity(t, mode_dims[1] + mode_dims[2] - 2);
    let st = tau.sqrt();
    let rt = (1.0 - tau).sqrt();
    let u_anc = BeamsplitterUnitary::new([[st, -rt], [rt, st]], mode_dims[3] + mode_dims[4] - 2);
    let u_mix = BeamsplitterUnitary::with_transmissivity(0.5, mode_dims[1] + mode_dims[3] - 2);
    let on_w: Vec<f64> = onoff_povm_element(Detection::On, eta, mode_dims[1])?
        .iter()
        .map(|w| w.sqrt())
        .collect();
    let off_w: Vec<f64> = onoff_povm_element(Detection::Off, eta, mode_dims[3])?
        .iter()
        .map(|w| w.sqrt())
        .collect();
    let mut rho_acc: Option<Vec<Complex64>> = None;
    let mut pair_dims = (0usize, 0usize);
    for (k, &wk) in weights.iter().enumerate() {
        let mut psi = PureState::zero(mode_dims.clone());
        for (n, &a) in amps.iter().enumerate() {
            let off = psi.offset(&[n, n, k, 1, 0]);
            psi.amp[off] = Complex64::new(wk.sqrt() * a, 0.0);
        }
        psi.apply_mixing(1, 2, &u_chan);
        psi.apply_mixing(3, 4, &u_anc);
        psi.apply_mixing(1, 3, &u_mix);
        psi.scale_mode(1, &on_w);
        psi.scale_mode(3, &off_w);
        let (rho, di, dj) = psi.reduced_pair(0, 4);
        pair_dims = (di, dj);
        match &mut rho_acc {
            None => rho_acc = Some(rho),
            Some(acc) => {
                for (a, r) in acc.iter_mut().zip(&rho) {
                    *a += r;
                }
            }
        }
    }
    let rho = rho_acc.unwrap();
    Ok(super::DensityOperator::from_raw(
        vec![pair_dims.0, pair_dims.1],
        rho,
    ))
}
