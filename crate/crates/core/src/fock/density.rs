//! Truncated multimode Fock-basis density operators.
//!
//! This is the plain density-matrix representation used by the unit-scale
//! checks (beamsplitter identities, thermal-loss covariance, POVM algebra)
//! and as a cross-check for the pure-state path that powers the full circuit
//! simulations.

use num_complex::Complex64;

use super::bs::{mix_pair, BeamsplitterUnitary};
use super::pure::strides_of;
use crate::error::{Error, Result};

/// Truncation weight above which state construction fails.
pub const CUTOFF_LIMIT: f64 = 1e-6;

/// A (possibly sub-normalized) density operator on a tensor-product Fock
/// basis; sub-normalized states carry their post-selection probability as
/// the trace.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    dims: Vec<usize>,
    /// Row-major `N x N` matrix, `N = prod(dims)`.
    mat: Vec<Complex64>,
    trace: f64,
}

impl DensityOperator {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim_total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn matrix(&self) -> &[Complex64] {
        &self.mat
    }

    fn from_matrix(dims: Vec<usize>, mat: Vec<Complex64>) -> Self {
        let n: usize = dims.iter().product();
        let trace = (0..n).map(|k| mat[k * n + k].re).sum();
        DensityOperator { dims, mat, trace }
    }

    /// Wraps a raw row-major matrix over `dims`.
    pub fn from_raw(dims: Vec<usize>, mat: Vec<Complex64>) -> Self {
        Self::from_matrix(dims, mat)
    }

    /// Pure state from a ket amplitude vector over `dims`.
    pub fn from_pure(dims: Vec<usize>, ket: &[Complex64]) -> Self {
        let n: usize = dims.iter().product();
        assert_eq!(ket.len(), n);
        let mut mat = vec![Complex64::ZERO; n * n];
        for a in 0..n {
            if ket[a] == Complex64::ZERO {
                continue;
            }
            for b in 0..n {
                mat[a * n + b] = ket[a] * ket[b].conj();
            }
        }
        Self::from_matrix(dims, mat)
    }

    /// Single-mode thermal state of mean photon number `nbar`.
    pub fn thermal(nbar: f64, dim: usize) -> Result<Self> {
        let mut mat = vec![Complex64::ZERO; dim * dim];
        let mut weight = 0.0;
        for k in 0..dim {
            let p = nbar.powi(k as i32) / (1.0 + nbar).powi(k as i32 + 1);
            mat[k * dim + k] = Complex64::new(p, 0.0);
            weight += p;
        }
        let tail = 1.0 - weight;
        if tail > CUTOFF_LIMIT {
            return Err(Error::CutoffTooSmall {
                weight: tail,
                limit: CUTOFF_LIMIT,
            });
        }
        Ok(Self::from_matrix(vec![dim], mat))
    }

    /// Tensor product `self (x) other`.
    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        let n1 = self.dim_total();
        let n2 = other.dim_total();
        let n = n1 * n2;
        let mut mat = vec![Complex64::ZERO; n * n];
        for a1 in 0..n1 {
            for b1 in 0..n1 {
                let x = self.mat[a1 * n1 + b1];
                if x == Complex64::ZERO {
                    continue;
                }
                for a2 in 0..n2 {
                    for b2 in 0..n2 {
                        let y = other.mat[a2 * n2 + b2];
                        if y == Complex64::ZERO {
                            continue;
                        }
                        mat[(a1 * n2 + a2) * n + (b1 * n2 + b2)] = x * y;
                    }
                }
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::from_matrix(dims, mat)
    }

    /// Applies a two-mode mixing unitary on modes `(i, j)`: `rho -> U rho U+`.
    /// Returns the trace weight dropped by truncation.
    pub fn apply_mixing(&mut self, i: usize, j: usize, u: &BeamsplitterUnitary) -> f64 {
        let n_modes = self.dims.len();
        let mut full_dims = self.dims.clone();
        full_dims.extend_from_slice(&self.dims);
        let strides = strides_of(&full_dims);
        // rows, then columns (U is real, so the conjugate acts identically).
        let lost_rows = mix_pair(&mut self.mat, &full_dims, &strides, i, j, u);
        let lost_cols = mix_pair(
            &mut self.mat,
            &full_dims,
            &strides,
            n_modes + i,
            n_modes + j,
            u,
        );
        let before = self.trace;
        let n = self.dim_total();
        self.trace = (0..n).map(|k| self.mat[k * n + k].re).sum();
        let _ = (lost_rows, lost_cols);
        (before - self.trace).max(0.0)
    }

    /// Conjugates by a diagonal single-mode operator square root:
    /// `rho -> sqrt(D) rho sqrt(D)` with `D = diag(weights)` on `mode`.
    /// Returns the resulting trace (the selection probability when `weights`
    /// are POVM eigenvalues).
    pub fn condition_diagonal(&mut self, mode: usize, weights: &[f64]) -> f64 {
        assert_eq!(weights.len(), self.dims[mode]);
        let n = self.dim_total();
        let strides = strides_of(&self.dims);
        let stride = strides[mode];
        let d = self.dims[mode];
        let block = stride * d;
        let sq: Vec<f64> = weights.iter().map(|w| w.max(0.0).sqrt()).collect();
        for a in 0..n {
            let wa = sq[(a % block) / stride];
            if wa == 0.0 {
                for b in 0..n {
                    self.mat[a * n + b] = Complex64::ZERO;
                }
                continue;
            }
            for b in 0..n {
                let wb = sq[(b % block) / stride];
                self.mat[a * n + b] *= wa * wb;
            }
        }
        self.trace = (0..n).map(|k| self.mat[k * n + k].re).sum();
        self.trace
    }

    /// Partial trace keeping the listed modes (in the given order).
    pub fn partial_trace(&self, keep: &[usize]) -> DensityOperator {
        let strides = strides_of(&self.dims);
        let keep_dims: Vec<usize> = keep.iter().map(|&m| self.dims[m]).collect();
        let traced: Vec<usize> = (0..self.dims.len()).filter(|m| !keep.contains(m)).collect();
        let nk: usize = keep_dims.iter().product();
        let n = self.dim_total();
        let keep_strides_out = strides_of(&keep_dims);
        let mut mat = vec![Complex64::ZERO; nk * nk];

        let mut keep_idx_a = vec![0usize; keep.len()];
        loop {
            let off_a: usize = keep
                .iter()
                .zip(&keep_idx_a)
                .map(|(&m, &c)| c * strides[m])
                .sum();
            let out_a: usize = keep_idx_a
                .iter()
                .zip(&keep_strides_out)
                .map(|(&c, &s)| c * s)
                .sum();
            let mut keep_idx_b = vec![0usize; keep.len()];
            loop {
                let off_b: usize = keep
                    .iter()
                    .zip(&keep_idx_b)
                    .map(|(&m, &c)| c * strides[m])
                    .sum();
                let out_b: usize = keep_idx_b
                    .iter()
                    .zip(&keep_strides_out)
                    .map(|(&c, &s)| c * s)
                    .sum();
                // sum over diagonal indices of the traced modes
                let mut acc = Complex64::ZERO;
                let mut tr_idx = vec![0usize; traced.len()];
                loop {
                    let off_t: usize = traced
                        .iter()
                        .zip(&tr_idx)
                        .map(|(&m, &c)| c * strides[m])
                        .sum();
                    acc += self.mat[(off_a + off_t) * n + (off_b + off_t)];
                    if !advance(&mut tr_idx, &traced, &self.dims) {
                        break;
                    }
                }
                mat[out_a * nk + out_b] = acc;
                if !advance_plain(&mut keep_idx_b, &keep_dims) {
                    break;
                }
            }
            if !advance_plain(&mut keep_idx_a, &keep_dims) {
                break;
            }
        }
        Self::from_matrix(keep_dims, mat)
    }

    /// Largest `|rho - rho+|` entry.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim_total();
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a..n {
                worst = worst.max((self.mat[a * n + b] - self.mat[b * n + a].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue (cyclic Jacobi); intended for small systems.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.mat, self.dim_total())
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// `tr(rho a_i^r' ... )`-style ladder expectation,
    /// `tr(rho . prod_m (a_m^+)^{raise} (a_m)^{lower})` given as
    /// `(mode, raise, lower)` triples, assuming distinct modes.
    pub fn ladder_expect(&self, ops: &[(usize, usize, usize)]) -> Complex64 {
        // tr(rho A) with A = prod (a+)^r a^l acting as
        // A|m> = f(m) |m - l + r>; contributes rho[m - l + r, m] * f(m).
        let n = self.dim_total();
        let strides = strides_of(&self.dims);
        let mut acc = Complex64::ZERO;
        let mut idx = vec![0usize; self.dims.len()];
        'outer: loop {
            let mut ok = true;
            let mut factor = 1.0f64;
            let mut shift = 0isize;
            for &(m, raise, lower) in ops {
                if idx[m] < lower || idx[m] - lower + raise >= self.dims[m] {
                    ok = false;
                    break;
                }
                // a^l factor: sqrt(m (m-1) ... (m-l+1))
                for s in 0..lower {
                    factor *= (idx[m] - s) as f64;
                }
                // (a+)^r factor on |m - l>
                for s in 1..=raise {
                    factor *= (idx[m] - lower + s) as f64;
                }
                shift += (raise as isize - lower as isize) * strides[m] as isize;
            }
            if ok {
                let col: usize = idx.iter().zip(&strides).map(|(&i, &s)| i * s).sum();
                let row = (col as isize + shift) as usize;
                acc += factor.sqrt() * self.mat[row * n + col];
            }
            let mut k = self.dims.len();
            loop {
                if k == 0 {
                    break 'outer;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < self.dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        acc
    }
}

fn advance(idx: &mut [usize], modes: &[usize], dims: &[usize]) -> bool {
    let mut k = idx.len();
    loop {
        if k == 0 {
            return false;
        }
        k -= 1;
        idx[k] += 1;
        if idx[k] < dims[modes[k]] {
            return true;
        }
        idx[k] = 0;
    }
}

fn advance_plain(idx: &mut [usize], dims: &[usize]) -> bool {
    let mut k = idx.len();
    loop {
        if k == 0 {
            return false;
        }
        k -= 1;
        idx[k] += 1;
        if idx[k] < dims[k] {
            return true;
        }
        idx[k] = 0;
    }
}

/// Eigenvalues of a Hermitian matrix via cyclic Jacobi rotations.
pub fn hermitian_eigenvalues(mat: &[Complex64], n: usize) -> Vec<f64> {
    let mut a = mat.to_vec();
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q].norm_sqr();
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.norm_sqr() < 1e-30 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                // unitary 2x2 diagonalization: phase out apq, then rotate
                let phase = apq / apq.norm();
                let theta = 0.5 * (2.0 * apq.norm()).atan2(aqq - app);
                let (c, s) = (theta.cos(), theta.sin());
                let u_pp = Complex64::new(c, 0.0);
                let u_pq = phase * s;
                // columns
                for r in 0..n {
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    a[r * n + p] = arp * u_pp - arq * u_pq.conj();
                    a[r * n + q] = arp * u_pq + arq * u_pp;
                }
                // rows
                for r in 0..n {
                    let apr = a[p * n + r];
                    let aqr = a[q * n + r];
                    a[p * n + r] = apr * u_pp.conj() - aqr * u_pq;
                    a[q * n + r] = apr * u_pq.conj() + aqr * u_pp;
                }
            }
        }
    }
    (0..n).map(|k| a[k * n + k].re).collect()
}
