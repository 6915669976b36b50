//! Exact Fock-basis beamsplitter blocks and tensor-slab application.
//!
//! A two-mode mixing with real matrix `R` (annihilation operators transform
//! as `b = R a`) conserves total photon number, so its Fock-space unitary is
//! block-diagonal over `n = n_i + n_j`. Each block is built exactly from the
//! binomial expansion of `(R00 a† + R10 b†)^m (R01 a† + R11 b†)^k |00>`,
//! avoiding matrix exponentials entirely.

use num_complex::Complex64;

/// Per-total-photon-number blocks of a two-mode mixing unitary.
///
/// `blocks[n]` is the dense `(n+1) x (n+1)` real matrix `B_n[m', m]` mapping
/// the input state `|m, n-m>` onto outputs `|m', n-m'>`. Blocks are exact
/// (unitary) on the untruncated subspace; rows that fall outside a state's
/// per-mode cutoffs are dropped by the applier, which accounts the lost norm.
pub struct BeamsplitterUnitary {
    /// Annihilation-operator mixing matrix.
    pub r: [[f64; 2]; 2],
    blocks: Vec<Vec<f64>>,
}

impl BeamsplitterUnitary {
    /// Builds blocks up to total photon number `n_max`.
    pub fn new(r: [[f64; 2]; 2], n_max: usize) -> Self {
        let mut ln_fact = vec![0.0f64; n_max + 2];
        for k in 1..ln_fact.len() {
            ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
        }
        let mut blocks = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let mut b = vec![0.0f64; (n + 1) * (n + 1)];
            for m in 0..=n {
                let k = n - m;
                for mp in 0..=n {
                    let kp = n - mp;
                    let mut acc = 0.0f64;
                    let p_lo = mp.saturating_sub(k);
                    let p_hi = m.min(mp);
                    for p in p_lo..=p_hi {
                        let q = mp - p; // photons mode i from the k-factor
                        let ln_comb = ln_fact[m] - ln_fact[p] - ln_fact[m - p] + ln_fact[k]
                            - ln_fact[q]
                            - ln_fact[k - q];
                        let term = ln_comb.exp()
                            * self_pow(r[0][0], p)
                            * self_pow(r[1][0], m - p)
                            * self_pow(r[0][1], q)
                            * self_pow(r[1][1], k - q);
                        acc += term;
                    }
                    let ln_norm =
                        0.5 * (ln_fact[mp] + ln_fact[kp] - ln_fact[m] - ln_fact[k]);
                    b[mp * (n + 1) + m] = acc * ln_norm.exp();
                }
            }
            blocks.push(b);
        }
        BeamsplitterUnitary { r, blocks }
    }

    /// A beamsplitter of transmissivity `tau`:
    /// `b1 = sqrt(tau) a1 + sqrt(1-tau) a2`, `b2 = -sqrt(1-tau) a1 + sqrt(tau) a2`.
    pub fn with_transmissivity(tau: f64, n_max: usize) -> Self {
        let (t, r) = (tau.sqrt(), (1.0 - tau).sqrt());
        Self::new([[t, r], [-r, t]], n_max)
    }

    pub fn block(&self, n: usize) -> &[f64] {
        &self.blocks[n]
    }

    pub fn n_max(&self) -> usize {
        self.blocks.len() - 1
    }

    /// Largest `|B_n^T B_n - I|` entry over all blocks; zero for an exact
    /// unitary.
    pub fn unitarity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (n, b) in self.blocks.iter().enumerate() {
            let d = n + 1;
            for i in 0..d {
                for j in 0..d {
                    let mut acc = 0.0;
                    for k in 0..d {
                        acc += b[k * d + i] * b[k * d + j];
                    }
                    let expect = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((acc - expect).abs());
                }
            }
        }
        worst
    }
}

fn self_pow(x: f64, k: usize) -> f64 {
    // 0^0 = 1 for the binomial expansion.
    if k == 0 {
        1.0
    } else {
        x.powi(k as i32)
    }
}

/// Applies the mixing to modes `(i, j)` of a tensor with the given dims and
/// strides, in place. Returns the squared norm dropped by per-mode truncation.
pub fn mix_pair(
    amp: &mut [Complex64],
    dims: &[usize],
    strides: &[usize],
    i: usize,
    j: usize,
    u: &BeamsplitterUnitary,
) -> f64 {
    let di = dims[i];
    let dj = dims[j];
    assert!(u.n_max() >= di + dj - 2);
    let mut scratch = vec![Complex64::ZERO; di * dj];
    let mut out = vec![Complex64::ZERO; di * dj];
    let mut lost = 0.0f64;

    let rest: Vec<usize> = (0..dims.len()).filter(|&m| m != i && m != j).collect();
    let mut counters = vec![0usize; rest.len()];
    loop {
        let base: usize = rest
            .iter()
            .zip(&counters)
            .map(|(&m, &c)| c * strides[m])
            .sum();
        // gather
        for mi in 0..di {
            for mj in 0..dj {
                scratch[mi * dj + mj] = amp[base + mi * strides[i] + mj * strides[j]];
            }
        }
        // transform per total photon number
        for x in out.iter_mut() {
            *x = Complex64::ZERO;
        }
        for n in 0..=(di + dj - 2) {
            let b = u.block(n);
            let d = n + 1;
            let in_lo = n.saturating_sub(dj - 1);
            let in_hi = n.min(di - 1);
            let mut in_norm = 0.0f64;
            let mut out_norm = 0.0f64;
            for mp in in_lo..=in_hi {
                let mut acc = Complex64::ZERO;
                for m in in_lo..=in_hi {
                    let x = scratch[m * dj + (n - m)];
                    if x != Complex64::ZERO {
                        acc += b[mp * d + m] * x;
                    }
                }
                out[mp * dj + (n - mp)] = acc;
                out_norm += acc.norm_sqr();
            }
            for m in in_lo..=in_hi {
                in_norm += scratch[m * dj + (n - m)].norm_sqr();
            }
            // rows outside the per-mode cutoffs are unreachable here because
            // in_lo/in_hi already describe the representable range; any block
            // weight sent beyond it shows up as out_norm < in_norm.
            lost += (in_norm - out_norm).max(0.0);
        }
        // scatter
        for mi in 0..di {
            for mj in 0..dj {
                amp[base + mi * strides[i] + mj * strides[j]] = out[mi * dj + mj];
            }
        }
        // odometer over the rest modes
        let mut k = rest.len();
        loop {
            if k == 0 {
                return lost;
            }
            k -= 1;
            counters[k] += 1;
            if counters[k] < dims[rest[k]] {
                break;
            }
            counters[k] = 0;
        }
    }
}
