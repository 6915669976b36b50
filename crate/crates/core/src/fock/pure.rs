//! Pure-state vector over a truncated multimode Fock basis.
//!
//! The circuit simulations run on state vectors: every ingredient except the
//! thermal bath is pure, the heralding POVMs are diagonal, and conditional
//! moments are linear in the density operator, so the bath is expanded as a
//! classical mixture over its Fock inputs and each component evolves as a
//! pure state.

use num_complex::Complex64;

use super::bs::{mix_pair, BeamsplitterUnitary};

pub(crate) struct PureState {
    dims: Vec<usize>,
    strides: Vec<usize>,
    pub amp: Vec<Complex64>,
    /// Squared norm dropped by per-mode truncation during mixing.
    pub lost_norm: f64,
}

pub(crate) fn strides_of(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    strides
}

impl PureState {
    pub fn zero(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        let strides = strides_of(&dims);
        PureState {
            dims,
            strides,
            amp: vec![Complex64::ZERO; n],
            lost_norm: 0.0,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(&i, &s)| i * s).sum()
    }

    pub fn norm2(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_mixing(&mut self, i: usize, j: usize, u: &BeamsplitterUnitary) {
        self.lost_norm += mix_pair(&mut self.amp, &self.dims, &self.strides, i, j, u);
    }

    /// Multiplies amplitudes by `weights[n_mode]` (diagonal operator).
    pub fn scale_mode(&mut self, mode: usize, weights: &[f64]) {
        assert_eq!(weights.len(), self.dims[mode]);
        let stride = self.strides[mode];
        let d = self.dims[mode];
        let block = stride * d;
        for (k, a) in self.amp.iter_mut().enumerate() {
            let m = (k % block) / stride;
            *a *= weights[m];
        }
    }

    /// `<psi| prod a_m^{+ r} (bra) ... prod a_m^{r} (ket) |psi>` for ladder
    /// monomials given as `(mode, raise count)` lists; unnormalized.
    pub fn ladder_expect(&self, bra: &[(usize, usize)], ket: &[(usize, usize)]) -> Complex64 {
        let mut shift_bra = 0usize;
        let mut shift_ket = 0usize;
        let mut caps = self.dims.clone();
        for &(m, r) in bra {
            shift_bra += r * self.strides[m];
            caps[m] = caps[m].saturating_sub(r);
        }
        for &(m, r) in ket {
            shift_ket += r * self.strides[m];
            caps[m] = caps[m].min(self.dims[m].saturating_sub(r));
        }
        if caps.iter().any(|&c| c == 0) {
            return Complex64::ZERO;
        }
        let mut acc = Complex64::ZERO;
        let mut idx = vec![0usize; self.dims.len()];
        'outer: loop {
            let base = self.offset(&idx);
            let mut factor = 1.0f64;
            for &(m, r) in bra {
                for s in 1..=r {
                    factor *= (idx[m] + s) as f64;
                }
            }
            for &(m, r) in ket {
                for s in 1..=r {
                    factor *= (idx[m] + s) as f64;
                }
            }
            acc += factor.sqrt() * self.amp[base + shift_bra].conj() * self.amp[base + shift_ket];
            let mut k = self.dims.len();
            loop {
                if k == 0 {
                    break 'outer;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < caps[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        acc
    }

    /// Unnormalized reduced density matrix of modes `(i, j)`, row-major over
    /// the pair index `mi * dims[j] + mj`.
    pub fn reduced_pair(&self, i: usize, j: usize) -> (Vec<Complex64>, usize, usize) {
        let di = self.dims[i];
        let dj = self.dims[j];
        let mut rho = vec![Complex64::ZERO; (di * dj) * (di * dj)];
        let rest: Vec<usize> = (0..self.dims.len()).filter(|&m| m != i && m != j).collect();
        let mut counters = vec![0usize; rest.len()];
        let mut slab = vec![Complex64::ZERO; di * dj];
        loop {
            let base: usize = rest
                .iter()
                .zip(&counters)
                .map(|(&m, &c)| c * self.strides[m])
                .sum();
            for mi in 0..di {
                for mj in 0..dj {
                    slab[mi * dj + mj] =
                        self.amp[base + mi * self.strides[i] + mj * self.strides[j]];
                }
            }
            for a in 0..di * dj {
                if slab[a] == Complex64::ZERO {
                    continue;
                }
                for b in 0..di * dj {
                    rho[a * di * dj + b] += slab[a] * slab[b].conj();
                }
            }
            let mut k = rest.len();
            loop {
                if k == 0 {
                    return (rho, di, dj);
                }
                k -= 1;
                counters[k] += 1;
                if counters[k] < self.dims[rest[k]] {
                    break;
                }
                counters[k] = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_expectations_on_fock_states() {
        // |2, 1> on dims (4, 3)
        let mut psi = PureState::zero(vec![4, 3]);
        let off = psi.offset(&[2, 1]);
        psi.amp[off] = Complex64::ONE;
        let n0 = psi.ladder_expect(&[(0, 1)], &[(0, 1)]);
        let n1 = psi.ladder_expect(&[(1, 1)], &[(1, 1)]);
        assert!((n0.re - 2.0).abs() < 1e-14 && n0.im == 0.0);
        assert!((n1.re - 1.0).abs() < 1e-14);
        // <a_0^2> on a Fock state vanishes
        assert_eq!(psi.ladder_expect(&[], &[(0, 2)]), Complex64::ZERO);
    }

    #[test]
    fn mixing_preserves_norm_and_photon_number() {
        let mut psi = PureState::zero(vec![5, 5]);
        let o1 = psi.offset(&[2, 1]);
        let o2 = psi.offset(&[0, 3]);
        psi.amp[o1] = Complex64::new(0.6, 0.0);
        psi.amp[o2] = Complex64::new(0.0, 0.8);
        let u = BeamsplitterUnitary::with_transmissivity(0.37, 8);
        let n_before = psi.ladder_expect(&[(0, 1)], &[(0, 1)]).re
            + psi.ladder_expect(&[(1, 1)], &[(1, 1)]).re;
        psi.apply_mixing(0, 1, &u);
        let n_after = psi.ladder_expect(&[(0, 1)], &[(0, 1)]).re
            + psi.ladder_expect(&[(1, 1)], &[(1, 1)]).re;
        assert!((psi.norm2() - 1.0).abs() < 1e-12);
        assert!(psi.lost_norm < 1e-15);
        assert!((n_before - n_after).abs() < 1e-9);
    }

    #[test]
    fn truncation_loss_is_tracked() {
        // photon pair entering a mode of dim 2 must lose the |2,0>/|0,2> parts
        let mut psi = PureState::zero(vec![2, 2]);
        let off = psi.offset(&[1, 1]);
        psi.amp[off] = Complex64::ONE;
        let u = BeamsplitterUnitary::with_transmissivity(0.5, 2);
        psi.apply_mixing(0, 1, &u);
        // HOM: all weight goes to |2,0> + |0,2>, both unrepresentable here.
        assert!((psi.lost_norm - 1.0).abs() < 1e-12);
        assert!(psi.norm2() < 1e-12);
    }
}
