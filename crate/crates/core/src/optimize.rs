//! Bounded maximization of the key rate over the modulation variance `V` and
//! the amplifier gain `g`, plus bisection solvers for the maximum tolerable
//! excess noise (MTEN) and the maximum transmission distance.
//!
//! The objective is cheap and can be non-smooth at feasibility boundaries, so
//! everything is derivative-free: a log-spaced coarse grid keeps the best few
//! brackets and golden-section search refines each. Results are deterministic;
//! ties break toward the smallest `V`, then the smallest `g`.

use crate::channel::{channel_from_distance, ChannelParams};
use crate::error::{Error, Result};
use crate::protocols::{evaluate, ProtocolKind, ProtocolSpec};

/// Default modulation-variance search box.
pub const DEFAULT_V_BOX: (f64, f64) = (1.001, 100.0);

/// Default MTEN bracket, shot-noise units.
pub const DEFAULT_EPS_BRACKET: (f64, f64) = (0.0, 0.5);

/// Default distance bracket, km.
pub const DEFAULT_D_BRACKET: (f64, f64) = (0.0, 1000.0);

/// Search configuration.
#[derive(Debug, Clone, Copy)]
pub struct OptimizeCfg {
    /// Coarse-grid points over `V` (log-spaced).
    pub v_grid: usize,
    /// Absolute tolerance on the optimal `V`.
    pub v_tol: f64,
    /// Coarse-grid points over `ln g`.
    pub g_grid: usize,
    /// Absolute tolerance on the optimal `ln g`.
    pub g_log_tol: f64,
    /// Number of coarse-grid brackets refined (multimodality guard).
    pub top_brackets: usize,
    /// MTEN bisection terminates at this bracket width.
    pub eps_tol: f64,
    /// Distance bisection terminates at this bracket width, km.
    pub d_tol_km: f64,
}

impl Default for OptimizeCfg {
    fn default() -> Self {
        OptimizeCfg {
            v_grid: 96,
            v_tol: 1e-5,
            g_grid: 56,
            g_log_tol: 1e-4,
            top_brackets: 3,
            eps_tol: 1e-4,
            d_tol_km: 0.1,
        }
    }
}

/// How the amplifier gain is treated by the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainMode {
    /// No amplifier (GG02).
    NoGain,
    /// Fixed gain; only `V` is optimized.
    Fixed(f64),
    /// Gain optimized jointly with `V`.
    Optimized,
}

/// Outcome of a bounded maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationResult {
    /// Best key rate found, bits per channel use.
    pub kgr: f64,
    /// Optimal modulation variance.
    pub v_opt: f64,
    /// Optimal gain (absent in fixed-gain and GG02 runs).
    pub g_opt: Option<f64>,
    /// Objective evaluations spent.
    pub evaluations: u64,
    pub converged: bool,
    /// The optimum sits on the search-box edge.
    pub at_boundary: bool,
}

/// MTEN solver outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MtenResult {
    /// Largest excess noise with positive optimized key rate.
    pub eps_max: f64,
    /// Final root-bracket width.
    pub bracket: f64,
}

/// Maximum-transmission-distance solver outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxDistance {
    /// The optimized key rate crosses zero at this distance, km.
    Finite(f64),
    /// Positive key rate at the far bracket end (optimized-gain regime).
    Unbounded,
    /// No positive key rate anywhere in the bracket.
    NonePositive,
}

// ---------------------------------------------------------------------------
// scalar search primitives
// ---------------------------------------------------------------------------

/// Golden-section maximization of `f` on `[lo, hi]`; `None` values are
/// treated as minus infinity (infeasible points).
fn golden_max<F: FnMut(f64) -> Option<f64>>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, Option<f64>) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let val = |y: Option<f64>| y.unwrap_or(f64::NEG_INFINITY);
    let mut x1 = hi - INVPHI * (hi - lo);
    let mut x2 = lo + INVPHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iter = 0;
    while hi - lo > tol && iter < 200 {
        if val(f1) >= val(f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INVPHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INVPHI * (hi - lo);
            f2 = f(x2);
        }
        iter += 1;
    }
    let xm = 0.5 * (lo + hi);
    (xm, f(xm))
}

/// Log-spaced grid scan keeping the `top` best brackets, each refined by
/// golden section. Returns `(x, f(x))` of the best refined point, preferring
/// the smallest `x` on ties.
fn grid_then_golden<F: FnMut(f64) -> Option<f64>>(
    mut f: F,
    lo: f64,
    hi: f64,
    n: usize,
    tol: f64,
    top: usize,
) -> Option<(f64, f64, bool)> {
    let ln_lo = lo.ln();
    let ln_hi = hi.ln();
    let x_at = |i: usize| (ln_lo + (ln_hi - ln_lo) * i as f64 / (n - 1) as f64).exp();
    let vals: Vec<Option<f64>> = (0..n).map(|i| f(x_at(i))).collect();
    let mut order: Vec<usize> = (0..n).filter(|&i| vals[i].is_some()).collect();
    if order.is_empty() {
        return None;
    }
    order.sort_by(|&i, &j| {
        vals[j]
            .unwrap()
            .partial_cmp(&vals[i].unwrap())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut best: Option<(f64, f64)> = None;
    let mut seen = std::collections::HashSet::new();
    for &i in order.iter().take(top) {
        let blo = if i == 0 { 0 } else { i - 1 };
        let bhi = (i + 1).min(n - 1);
        if !seen.insert((blo, bhi)) {
            continue;
        }
        let (x, fx) = golden_max(&mut f, x_at(blo), x_at(bhi), tol);
        if let Some(fx) = fx {
            let better = match best {
                None => true,
                Some((bx, bf)) => fx > bf || (fx == bf && x < bx),
            };
            if better {
                best = Some((x, fx));
            }
        }
    }
    let (x, fx) = best?;
    let step = ((ln_hi - ln_lo) / (n - 1) as f64).exp();
    let at_boundary = x <= lo * step.powf(0.51) || x >= hi / step.powf(0.51);
    Some((x, fx, at_boundary))
}

// ---------------------------------------------------------------------------
// V and (V, g) maximization
// ---------------------------------------------------------------------------

fn kgr_or_none(spec: &ProtocolSpec, ch: &ChannelParams, v: f64, evals: &mut u64) -> Option<f64> {
    *evals += 1;
    evaluate(spec, ch, v).ok().and_then(|b| b.kgr)
}

/// Maximizes the key rate over the modulation variance at fixed gain.
///
/// Returns `None` when every point of the box is infeasible.
pub fn optimize_v(
    spec: &ProtocolSpec,
    channel: &ChannelParams,
    v_box: (f64, f64),
    cfg: &OptimizeCfg,
) -> Result<Option<OptimizationResult>> {
    let (lo, hi) = v_box;
    if !(lo >= 1.0 && hi > lo) {
        return Err(Error::Domain(format!("bad V box [{lo}, {hi}]")));
    }
    let mut evals = 0u64;
    let found = grid_then_golden(
        |v| kgr_or_none(spec, channel, v, &mut evals),
        lo,
        hi,
        cfg.v_grid.max(8),
        cfg.v_tol,
        cfg.top_brackets,
    );
    let Some((v_opt, _, at_boundary)) = found else {
        return Ok(None);
    };
    let kgr = kgr_or_none(spec, channel, v_opt, &mut evals)
        .ok_or_else(|| Error::NonPhysical("optimum re-evaluation infeasible".into()))?;
    Ok(Some(OptimizationResult {
        kgr,
        v_opt,
        g_opt: None,
        evaluations: evals,
        converged: true,
        at_boundary,
    }))
}

/// Default gain search box per protocol kind.
///
/// The physical-NLA box covers the spec range `tau in [1e-4, 1/2]` and is
/// extended so that `g^2 T` reaches ~100; at long distance the optimum keeps
/// `g^2 T` of order one, far beyond any fixed `tau` floor.
pub fn default_gain_box(kind: ProtocolKind, channel: &ChannelParams, v_lo: f64) -> (f64, f64) {
    let t = channel.transmissivity;
    match kind {
        ProtocolKind::IdealNla => {
            let m = (v_lo - 1.0 + channel.excess_noise).max(1e-9);
            (1.0 + 1e-9, (1.0 + 2.0 / (t * m)).sqrt())
        }
        ProtocolKind::Qs => {
            let hi = (1.0f64 / 1e-4 - 1.0).sqrt().max((100.0 / t).sqrt());
            (1.0, hi)
        }
        ProtocolKind::Spc => {
            let hi = ((1.0 - 2e-4) / 1e-2f64).max((100.0 / t).sqrt());
            (1e-3, hi)
        }
        ProtocolKind::Gg02 => (1.0, 1.0),
    }
}

/// Jointly maximizes the key rate over `V` and the gain.
///
/// Nested search: an outer grid-plus-golden pass on `ln g`, an inner
/// [`optimize_v`] per candidate gain.
pub fn optimize_vg(
    kind: ProtocolKind,
    beta: f64,
    eta: f64,
    channel: &ChannelParams,
    v_box: (f64, f64),
    g_box: Option<(f64, f64)>,
    cfg: &OptimizeCfg,
) -> Result<Option<OptimizationResult>> {
    if kind == ProtocolKind::Gg02 {
        let spec = ProtocolSpec::new(kind, beta, eta, None)?;
        return optimize_v(&spec, channel, v_box, cfg);
    }
    let (g_lo, g_hi) = g_box.unwrap_or_else(|| default_gain_box(kind, channel, v_box.0));
    if !(g_lo > 0.0 && g_hi > g_lo) {
        return Err(Error::Domain(format!("bad gain box [{g_lo}, {g_hi}]")));
    }
    let mut evals = 0u64;
    let mut inner = |g: f64| -> Option<f64> {
        let spec = ProtocolSpec::new(kind, beta, eta, Some(g)).ok()?;
        match optimize_v(&spec, channel, v_box, cfg) {
            Ok(Some(r)) => {
                evals += r.evaluations;
                Some(r.kgr)
            }
            _ => None,
        }
    };
    let found = grid_then_golden(
        &mut inner,
        g_lo,
        g_hi,
        cfg.g_grid.max(8),
        cfg.g_log_tol,
        cfg.top_brackets,
    );
    let Some((g_opt, _, g_boundary)) = found else {
        return Ok(None);
    };
    let spec = ProtocolSpec::new(kind, beta, eta, Some(g_opt))?;
    let Some(refined) = optimize_v(&spec, channel, v_box, cfg)? else {
        return Ok(None);
    };
    Ok(Some(OptimizationResult {
        kgr: refined.kgr,
        v_opt: refined.v_opt,
        g_opt: Some(g_opt),
        evaluations: evals + refined.evaluations,
        converged: true,
        at_boundary: refined.at_boundary || g_boundary,
    }))
}

/// Best key rate for a protocol under the given gain mode; `None` when every
/// point is infeasible.
pub fn best_kgr(
    kind: ProtocolKind,
    beta: f64,
    eta: f64,
    gain: GainMode,
    channel: &ChannelParams,
    v_box: (f64, f64),
    cfg: &OptimizeCfg,
) -> Result<Option<OptimizationResult>> {
    match gain {
        GainMode::NoGain => {
            let spec = ProtocolSpec::new(kind, beta, eta, None)?;
            optimize_v(&spec, channel, v_box, cfg)
        }
        GainMode::Fixed(g) => {
            let spec = ProtocolSpec::new(kind, beta, eta, Some(g))?;
            optimize_v(&spec, channel, v_box, cfg)
        }
        GainMode::Optimized => optimize_vg(kind, beta, eta, channel, v_box, None, cfg),
    }
}

// ---------------------------------------------------------------------------
// root finding
// ---------------------------------------------------------------------------

fn optimized_kgr_at(
    kind: ProtocolKind,
    beta: f64,
    eta: f64,
    gain: GainMode,
    kappa: f64,
    distance_km: f64,
    eps: f64,
    cfg: &OptimizeCfg,
) -> Result<f64> {
    let ch = channel_from_distance(kappa, distance_km, eps)?;
    Ok(best_kgr(kind, beta, eta, gain, &ch, DEFAULT_V_BOX, cfg)?
        .map(|r| r.kgr)
        .unwrap_or(f64::NEG_INFINITY))
}

/// Maximum tolerable excess noise at a fixed distance: bisection on the sign
/// of the optimized key rate over `eps`.
///
/// Returns `None` when the rate is non-positive already at the low bracket
/// end ("no tolerance"); a positive rate at the high end is a bracket error.
pub fn mten(
    kind: ProtocolKind,
    beta: f64,
    eta: f64,
    gain: GainMode,
    kappa: f64,
    distance_km: f64,
    eps_bracket: (f64, f64),
    cfg: &OptimizeCfg,
) -> Result<Option<MtenResult>> {
    let (mut lo, mut hi) = eps_bracket;
    if !(lo >= 0.0 && hi > lo) {
        return Err(Error::Domain(format!("bad eps bracket [{lo}, {hi}]")));
    }
    let k = |e: f64| optimized_kgr_at(kind, beta, eta, gain, kappa, distance_km, e, cfg);
    if k(lo)? <= 0.0 {
        return Ok(None);
    }
    if k(hi)? > 0.0 {
        return Err(Error::Bracket(format!(
            "optimized K still positive at eps = {hi}"
        )));
    }
    while hi - lo > cfg.eps_tol {
        let mid = 0.5 * (lo + hi);
        if k(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(MtenResult {
        eps_max: 0.5 * (lo + hi),
        bracket: hi - lo,
    }))
}

/// Maximum transmission distance: bisection on the sign of the optimized key
/// rate over distance, resolving the upper zero crossing.
pub fn max_distance(
    kind: ProtocolKind,
    beta: f64,
    eta: f64,
    gain: GainMode,
    kappa: f64,
    eps: f64,
    d_bracket: (f64, f64),
    cfg: &OptimizeCfg,
) -> Result<MaxDistance> {
    let (d_lo, d_hi) = d_bracket;
    if !(d_lo >= 0.0 && d_hi > d_lo) {
        return Err(Error::Domain(format!("bad distance bracket [{d_lo}, {d_hi}]")));
    }
    let k = |d: f64| optimized_kgr_at(kind, beta, eta, gain, kappa, d, eps, cfg);
    if k(d_hi)? > 0.0 {
        return Ok(MaxDistance::Unbounded);
    }
    // Coarse scan for the last positive point; the feasible region of the
    // NLA protocols is an interior interval.
    const SCAN: usize = 128;
    let mut last_pos: Option<f64> = None;
    for i in 0..SCAN {
        let d = d_lo + (d_hi - d_lo) * i as f64 / (SCAN - 1) as f64;
        if k(d)? > 0.0 {
            last_pos = Some(d);
        }
    }
    let Some(mut lo) = last_pos else {
        return Ok(MaxDistance::NonePositive);
    };
    let mut hi = (lo + (d_hi - d_lo) / (SCAN - 1) as f64).min(d_hi);
    while hi - lo > cfg.d_tol_km {
        let mid = 0.5 * (lo + hi);
        if k(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(MaxDistance::Finite(0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::channel_from_distance;

    fn cfg() -> OptimizeCfg {
        OptimizeCfg::default()
    }

    #[test]
    fn lossless_noiseless_rate_pins_at_upper_boundary() {
        let ch = channel_from_distance(0.2, 0.0, 0.0).unwrap();
        let spec = ProtocolSpec::new(ProtocolKind::Gg02, 1.0, 1.0, None).unwrap();
        let r = optimize_v(&spec, &ch, DEFAULT_V_BOX, &cfg()).unwrap().unwrap();
        assert!(r.at_boundary, "V_opt = {}", r.v_opt);
        assert!(r.v_opt > 99.0);
        assert!(r.converged);
    }

    #[test]
    fn gg02_interior_optimum_at_50km() {
        let ch = channel_from_distance(0.2, 50.0, 0.03).unwrap();
        let spec = ProtocolSpec::new(ProtocolKind::Gg02, 0.95, 1.0, None).unwrap();
        let r = optimize_v(&spec, &ch, DEFAULT_V_BOX, &cfg()).unwrap().unwrap();
        assert!(!r.at_boundary);
        assert!(r.v_opt > 1.5 && r.v_opt < 50.0, "V_opt = {}", r.v_opt);
        assert!(r.kgr > 0.0);
    }

    #[test]
    fn ideal_short_distance_confined_below_gg02() {
        // At d = 5 km the gain bound confines the search to V < 1.81; the
        // surviving optimum respects the bound and loses to plain GG02.
        let ch = channel_from_distance(0.2, 5.0, 0.03).unwrap();
        let spec = ProtocolSpec::new(ProtocolKind::IdealNla, 0.95, 1.0, Some(2.0)).unwrap();
        let r = optimize_v(&spec, &ch, DEFAULT_V_BOX, &cfg()).unwrap().unwrap();
        let bound = (1.0 + 2.0 / (ch.transmissivity * (r.v_opt + 0.03 - 1.0))).sqrt();
        assert!(bound >= 2.0, "optimum must respect the gain bound");
        let gg = ProtocolSpec::new(ProtocolKind::Gg02, 0.95, 1.0, None).unwrap();
        let base = optimize_v(&gg, &ch, DEFAULT_V_BOX, &cfg()).unwrap().unwrap();
        assert!(base.kgr > r.kgr, "the NLA must not help at short distance");
    }

    #[test]
    fn all_infeasible_box_returns_none() {
        // Strong noise and gain push the bound below g at every V in the box.
        let ch = ChannelParams::from_transmissivity(0.2, 0.9, 0.5).unwrap();
        let spec = ProtocolSpec::new(ProtocolKind::IdealNla, 0.95, 1.0, Some(3.0)).unwrap();
        assert!(optimize_v(&spec, &ch, DEFAULT_V_BOX, &cfg()).unwrap().is_none());
    }

    #[test]
    fn reevaluation_identity() {
        let ch = channel_from_distance(0.2, 80.0, 0.03).unwrap();
        for (kind, gain) in [
            (ProtocolKind::Gg02, None),
            (ProtocolKind::Qs, Some(2.0)),
            (ProtocolKind::Spc, Some(2.0)),
        ] {
            let spec = ProtocolSpec::new(kind, 0.95, 1.0, gain).unwrap();
            let r = optimize_v(&spec, &ch, DEFAULT_V_BOX, &cfg()).unwrap().unwrap();
            let again = evaluate(&spec, &ch, r.v_opt).unwrap().kgr.unwrap();
            assert!(
                (again - r.kgr).abs() <= 1e-9 * r.kgr.abs().max(1e-300),
                "{}",
                kind.name()
            );
        }
    }

    #[test]
    fn joint_envelope_dominates_fixed_gain() {
        let ch = channel_from_distance(0.2, 100.0, 0.03).unwrap();
        for kind in [ProtocolKind::Qs, ProtocolKind::Spc, ProtocolKind::IdealNla] {
            let joint = optimize_vg(kind, 0.95, 1.0, &ch, DEFAULT_V_BOX, None, &cfg())
                .unwrap()
                .unwrap();
            let g = if kind == ProtocolKind::IdealNla { 1.5 } else { 2.0 };
            let spec = ProtocolSpec::new(kind, 0.95, 1.0, Some(g)).unwrap();
            let fixed = optimize_v(&spec, &ch, DEFAULT_V_BOX, &cfg()).unwrap().unwrap();
            assert!(
                joint.kgr >= fixed.kgr - 1e-9,
                "{}: joint {} < fixed {}",
                kind.name(),
                joint.kgr,
                fixed.kgr
            );
        }
    }

    #[test]
    fn v_opt_independent_of_eta_for_physical_nlas() {
        let ch = channel_from_distance(0.2, 200.0, 0.03).unwrap();
        for kind in [ProtocolKind::Qs, ProtocolKind::Spc] {
            let s1 = ProtocolSpec::new(kind, 0.95, 1.0, Some(2.0)).unwrap();
            let s5 = ProtocolSpec::new(kind, 0.95, 0.5, Some(2.0)).unwrap();
            let v1 = optimize_v(&s1, &ch, DEFAULT_V_BOX, &cfg()).unwrap().unwrap().v_opt;
            let v5 = optimize_v(&s5, &ch, DEFAULT_V_BOX, &cfg()).unwrap().unwrap().v_opt;
            assert!((v1 - v5).abs() < 0.05, "{}: {v1} vs {v5}", kind.name());
        }
    }

    #[test]
    fn fixed_gain_modulation_converges_with_distance_and_eps() {
        let mut v_opts = Vec::new();
        for &(d, eps) in &[(250.0, 0.03), (300.0, 0.03), (250.0, 0.01), (300.0, 0.01)] {
            let ch = channel_from_distance(0.2, d, eps).unwrap();
            let spec = ProtocolSpec::new(ProtocolKind::IdealNla, 0.95, 1.0, Some(2.0)).unwrap();
            let r = optimize_v(&spec, &ch, DEFAULT_V_BOX, &cfg()).unwrap().unwrap();
            v_opts.push(r.v_opt);
        }
        let max = v_opts.iter().cloned().fold(f64::MIN, f64::max);
        let min = v_opts.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max - min < 0.05, "asymptotic V_opt spread {v_opts:?}");
    }

    #[test]
    fn mten_bracket_sign_conditions() {
        let r = mten(
            ProtocolKind::Gg02,
            0.95,
            1.0,
            GainMode::NoGain,
            0.2,
            50.0,
            DEFAULT_EPS_BRACKET,
            &cfg(),
        )
        .unwrap()
        .unwrap();
        assert!(r.bracket <= 1e-4);
        let k = |e: f64| {
            let ch = channel_from_distance(0.2, 50.0, e).unwrap();
            let spec = ProtocolSpec::new(ProtocolKind::Gg02, 0.95, 1.0, None).unwrap();
            optimize_v(&spec, &ch, DEFAULT_V_BOX, &cfg()).unwrap().unwrap().kgr
        };
        assert!(k(r.eps_max - r.bracket) > 0.0);
        assert!(k(r.eps_max + r.bracket) < 0.0);
    }

    #[test]
    fn mten_decreasing_with_distance_for_gg02() {
        let mut prev = f64::INFINITY;
        for &d in &[20.0, 60.0, 120.0] {
            let r = mten(
                ProtocolKind::Gg02,
                0.95,
                1.0,
                GainMode::NoGain,
                0.2,
                d,
                DEFAULT_EPS_BRACKET,
                &cfg(),
            )
            .unwrap()
            .unwrap();
            assert!(r.eps_max < prev, "MTEN not decreasing at {d} km");
            prev = r.eps_max;
        }
    }

    #[test]
    fn max_distance_gg02_is_finite() {
        let r = max_distance(
            ProtocolKind::Gg02,
            0.95,
            1.0,
            GainMode::NoGain,
            0.2,
            0.03,
            DEFAULT_D_BRACKET,
            &cfg(),
        )
        .unwrap();
        match r {
            MaxDistance::Finite(d) => assert!(d > 100.0 && d < 500.0, "d_max = {d}"),
            other => panic!("expected finite distance, got {other:?}"),
        }
    }
}
