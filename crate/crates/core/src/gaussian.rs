//! Two-mode Gaussian-state analysis: covariance matrices of the symmetric
//! block form, symplectic spectra, Gaussian entropies, mutual information and
//! Holevo information for heterodyne (Alice) / homodyne (Bob) detection.
//!
//! The homodyne measurement is the singular limit `diag(z, 1/z)` with `z -> 0`;
//! every formula here uses the closed analytic limit. Finite-z evaluation
//! exists only in test code as an oracle.
//!
//! Far from the source, key quantities live many orders of magnitude below
//! the covariance entries themselves (`b - 1 ~ T`, correlations `~ sqrt(T)`),
//! so the module carries `b - 1` exactly and evaluates spectra and entropy
//! differences through cancellation-free factorizations.

use crate::error::{Error, Result};

/// Physicality tolerance on symplectic eigenvalues (`d >= 1 - TOL_PHYS`).
pub const TOL_PHYS: f64 = 1e-9;

const LN2: f64 = std::f64::consts::LN_2;

/// Two-mode covariance matrix of the block form
/// `[[a I2, c sz], [c sz, b I2]]` in shot-noise units, with `sz` the Pauli
/// z-matrix.
///
/// Internally stores `b - 1` so that states with `b - 1` far below the f64
/// resolution of `b` itself (long-distance channels) keep full relative
/// precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricBlockCM {
    a: f64,
    b_excess: f64,
    c: f64,
}

impl SymmetricBlockCM {
    /// Builds a CM from the block entries, checking `a, b >= 1 - TOL_PHYS`
    /// and physicality of the symplectic spectrum.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::from_excess(a, b - 1.0, c)
    }

    /// Builds a CM from `a`, `b - 1` and `c`. Preferred in code paths where
    /// `b - 1` is available exactly.
    pub fn from_excess(a: f64, b_excess: f64, c: f64) -> Result<Self> {
        if !a.is_finite() || !b_excess.is_finite() || !c.is_finite() {
            return Err(Error::Domain("non-finite covariance entry".into()));
        }
        if a < 1.0 - TOL_PHYS {
            return Err(Error::NonPhysical(format!("a = {a} < 1")));
        }
        if b_excess < -TOL_PHYS {
            return Err(Error::NonPhysical(format!("b = {} < 1", 1.0 + b_excess)));
        }
        let cm = Self { a, b_excess, c };
        let (y1, y2) = cm.symplectic_y()?;
        let scale = (1.0 + y1).max(1.0);
        if y2 < -2.0 * TOL_PHYS * scale {
            return Err(Error::NonPhysical(format!(
                "smaller symplectic eigenvalue below 1: d2^2 - 1 = {y2:.3e}"
            )));
        }
        Ok(cm)
    }

    /// Alice-block variance.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Bob-block variance.
    pub fn b(&self) -> f64 {
        1.0 + self.b_excess
    }

    /// `b - 1`, exact.
    pub fn b_excess(&self) -> f64 {
        self.b_excess
    }

    /// Correlation coefficient multiplying the Pauli-z block.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Symplectic invariants `I1 = a^2`, `I2 = b^2`, `I3 = -c^2`,
    /// `I4 = (ab - c^2)^2` of the block form.
    pub fn invariants(&self) -> (f64, f64, f64, f64) {
        let b = self.b();
        let c2 = self.c * self.c;
        let i4 = self.a * b - c2;
        (self.a * self.a, b * b, -c2, i4 * i4)
    }

    /// `(d1^2 - 1, d2^2 - 1)` via the factored forms
    /// `y1 y2 = [(a-1)(b+1) - c^2] [(a+1)(b-1) - c^2]` and
    /// `y1 - y2 = |a-b| sqrt((a+b)^2 - 4c^2)`,
    /// which stay accurate when the eigenvalues sit next to 1.
    fn symplectic_y(&self) -> Result<(f64, f64)> {
        let a = self.a;
        let b = self.b();
        let c2 = self.c * self.c;
        let m = a + b;
        let disc = (m - 2.0 * self.c.abs()) * (m + 2.0 * self.c.abs());
        if disc < -TOL_PHYS * m * m {
            return Err(Error::NonPhysical(format!(
                "correlations exceed the symplectic bound: (a+b)^2 - 4c^2 = {disc:.3e}"
            )));
        }
        let split = (a - b).abs() * disc.max(0.0).sqrt();
        let sum = (a * a - 1.0) + self.b_excess * (b + 1.0) - 2.0 * c2;
        let y1 = 0.5 * (sum + split);
        let y2 = if y1 > 0.0 {
            let p1 = (a - 1.0) * (b + 1.0) - c2;
            let p2 = (a + 1.0) * self.b_excess - c2;
            p1 * p2 / y1
        } else {
            0.0
        };
        Ok((y1, y2))
    }

    /// `d3^2 - 1` where `d3 = sqrt(det conditional CM)` after homodyne on B.
    fn y3(&self) -> f64 {
        let b = self.b();
        (self.a - 1.0) * (self.a + 1.0) - self.a * self.c * self.c / b
    }

    /// Stable `y1 - y3`; the two largest entropy arguments nearly coincide in
    /// the weak-coupling regime and their difference carries the key rate.
    fn y1_minus_y3(&self, split: f64) -> f64 {
        let a = self.a;
        let b = self.b();
        let c2 = self.c * self.c;
        let m = a + b;
        if b >= a {
            return 0.5 * ((b - a) * (m - 2.0 * c2 / b) + split);
        }
        let disc = ((m - 2.0 * self.c.abs()) * (m + 2.0 * self.c.abs())).max(0.0);
        let denom = disc.sqrt() + m - 2.0 * c2 / b;
        2.0 * (a - b) * c2 * (a * b - c2) / (b * b * denom)
    }
}

/// Measurement carried out on one mode of the pair.
///
/// Heterodyne adds the identity to the measured block. Homodyne is the
/// singular `diag(z, 1/z)`, `z -> 0`; production code only ever uses the
/// analytic limit, and [`MeasurementKind::finite_z_cm`] exists for test
/// oracles that approach the limit numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementKind {
    Heterodyne,
    Homodyne,
}

impl MeasurementKind {
    /// The 2x2 measurement CM; homodyne evaluated at a finite `z`.
    pub fn finite_z_cm(&self, z: f64) -> [[f64; 2]; 2] {
        match self {
            MeasurementKind::Heterodyne => [[1.0, 0.0], [0.0, 1.0]],
            MeasurementKind::Homodyne => [[z, 0.0], [0.0, 1.0 / z]],
        }
    }
}

/// Symplectic spectrum of a two-mode CM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticSpectrum {
    /// Larger symplectic eigenvalue.
    pub d1: f64,
    /// Smaller symplectic eigenvalue.
    pub d2: f64,
    /// `Delta = I1 + I2 + 2 I3`.
    pub delta: f64,
}

/// `G(x) = (x+1) log2(x+1) - x log2 x`, the bosonic entropy function, in bits.
///
/// `G(0) = 0` (the `x log x` limit); negative arguments are a domain error.
pub fn g_entropy(x: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(Error::Domain(format!("g_entropy argument {x} < 0")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok((x + 1.0) * x.ln_1p() / LN2 - x * x.log2())
}

/// `G((d-1)/2)` for `d = sqrt(1+y)`, expressed in `y = d^2 - 1 >= 0`.
fn g_from_y(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let x = 0.5 * y / (1.0 + (1.0 + y).sqrt());
    (x + 1.0) * x.ln_1p() / LN2 - x * x.log2()
}

/// `d/dy G((sqrt(1+y)-1)/2) = log2((d+1)/(d-1)) / (4 d)`, `d = sqrt(1+y)`.
fn g_from_y_deriv(y: f64) -> f64 {
    let d = (1.0 + y).sqrt();
    let dm1 = y / (1.0 + d);
    ((d + 1.0).ln() - dm1.ln()) / (LN2 * 4.0 * d)
}

/// `G(y_hi) - G(y_lo)` with the gap supplied separately so that nearly equal
/// arguments do not cancel. Uses two-point Gauss-Legendre on `dG/dy` when the
/// gap is small relative to the arguments.
fn g_diff(y_lo: f64, gap: f64) -> f64 {
    if gap <= 0.0 {
        return 0.0;
    }
    if y_lo <= 0.0 {
        return g_from_y(gap.max(0.0));
    }
    if gap < 1e-3 * y_lo {
        let mid = y_lo + 0.5 * gap;
        let off = 0.5 * gap / 3.0f64.sqrt();
        return 0.5 * gap * (g_from_y_deriv(mid - off) + g_from_y_deriv(mid + off));
    }
    g_from_y(y_lo + gap) - g_from_y(y_lo)
}

/// Symplectic eigenvalues of the block CM per
/// `d = sqrt((Delta +- sqrt(Delta^2 - 4 I4)) / 2)`, computed through the
/// cancellation-free factorization and clamped to 1 when within [`TOL_PHYS`].
pub fn symplectic_spectrum(cm: &SymmetricBlockCM) -> Result<SymplecticSpectrum> {
    let (y1, y2) = cm.symplectic_y()?;
    let (i1, i2, i3, _) = cm.invariants();
    let clamp = |y: f64| -> f64 {
        let d = (1.0 + y.max(-1.0)).sqrt();
        if d < 1.0 {
            1.0
        } else {
            d
        }
    };
    let d1 = clamp(y1);
    let d2 = clamp(y2);
    if d2 * d2 - 1.0 < -2.0 * TOL_PHYS * i1.max(i2) {
        return Err(Error::NonPhysical(format!("d2 = {d2} < 1 beyond tolerance")));
    }
    Ok(SymplecticSpectrum {
        d1,
        d2,
        delta: i1 + i2 + 2.0 * i3,
    })
}

/// Conditional CM of mode A after ideal homodyne detection of the `q`
/// quadrature on mode B: the analytic `z -> 0` limit `diag(a - c^2/b, a)`.
pub fn conditional_cm_homodyne(cm: &SymmetricBlockCM) -> Result<(f64, f64)> {
    let b = cm.b();
    if b <= 0.0 {
        return Err(Error::Domain(format!("conditioning block b = {b} <= 0")));
    }
    Ok((cm.a() - cm.c() * cm.c() / b, cm.a()))
}

/// Mutual information in bits between Alice's heterodyne record and Bob's
/// homodyne record: the closed `z -> 0` limit
/// `I = 1/2 log2[(a+1) / (a+1 - c^2/b)]`.
pub fn mutual_information_homodyne(cm: &SymmetricBlockCM) -> Result<f64> {
    let r = cm.c() * cm.c() / (cm.b() * (cm.a() + 1.0));
    if r >= 1.0 {
        return Err(Error::NonPhysical(format!(
            "conditional variance a + 1 - c^2/b <= 0 (c^2/(b(a+1)) = {r})"
        )));
    }
    Ok(-0.5 * (-r).ln_1p() / LN2)
}

/// Holevo information chi_BE in bits for reverse reconciliation:
/// `G((d1-1)/2) + G((d2-1)/2) - G((d3-1)/2)` with `d3` from the homodyne
/// conditional CM. The `d1`/`d3` contributions nearly cancel at long
/// distance and are evaluated as a stable difference.
pub fn holevo_information(cm: &SymmetricBlockCM) -> Result<f64> {
    let (y1, y2) = cm.symplectic_y()?;
    let y3 = cm.y3().max(0.0);
    let a = cm.a();
    let b = cm.b();
    let disc = ((a + b).powi(2) - 4.0 * cm.c() * cm.c()).max(0.0);
    let split = (a - b).abs() * disc.sqrt();
    let gap13 = cm.y1_minus_y3(split);
    if gap13 >= 0.0 && y3 > 0.0 {
        Ok(g_diff(y3, gap13) + g_from_y(y2.max(0.0)))
    } else {
        // d3 above d1 (possible only through rounding on near-pure states):
        // fall back to direct evaluation.
        Ok(g_from_y(y1.max(0.0)) + g_from_y(y2.max(0.0)) - g_from_y(y3))
    }
}
