use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::SystemParams;

/// Draws `M x K` channels with i.i.d. `CN(0,1)` entries and exposes the Gram
/// matrix `H^H H` (`K <= M`) or `HH^H` (`K > M`), reusing its buffers.
#[derive(Debug, Clone)]
pub struct GramSampler {
    k: usize,
    m: usize,
    /// Column-major `M x K`.
    h: Vec<Complex64>,
    gram: DMatrix<Complex64>,
}

impl GramSampler {
    pub fn new(k: usize, m: usize) -> Self {
        let t = k.min(m);
        Self {
            k,
            m,
            h: vec![Complex64::new(0.0, 0.0); k * m],
            gram: DMatrix::zeros(t, t),
        }
    }

    pub fn t(&self) -> usize {
        self.k.min(self.m)
    }

    /// The most recent channel matrix, column-major `M x K`.
    pub fn channel(&self) -> DMatrix<Complex64> {
        DMatrix::from_column_slice(self.m, self.k, &self.h)
    }

    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        for z in self.h.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *z = Complex64::new(re * scale, im * scale);
        }
        let (k, m) = (self.k, self.m);
        let h = &self.h;
        if k <= m {
            for i in 0..k {
                for j in i..k {
                    let (ci, cj) = (&h[i * m..(i + 1) * m], &h[j * m..(j + 1) * m]);
                    let v: Complex64 = ci.iter().zip(cj).map(|(a, b)| a.conj() * b).sum();
                    self.gram[(i, j)] = v;
                    self.gram[(j, i)] = v.conj();
                }
            }
        } else {
            for r in 0..m {
                for s in r..m {
                    let v: Complex64 = (0..k).map(|i| h[i * m + r] * h[i * m + s].conj()).sum();
                    self.gram[(r, s)] = v;
                    self.gram[(s, r)] = v.conj();
                }
            }
        }
    }

    /// Eigenvalues of the current Gram matrix, ascending, into `out[..T]`.
    pub fn eigenvalues(&self, out: &mut [f64]) {
        let g = &self.gram;
        match self.t() {
            1 => out[0] = g[(0, 0)].re,
            2 => {
                let (a, d, b) = (g[(0, 0)].re, g[(1, 1)].re, g[(0, 1)]);
                let mid = 0.5 * (a + d);
                let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
                // Smaller root via the product to avoid cancellation.
                let big = mid + rad;
                let det = (a * d - b.norm_sqr()).max(0.0);
                out[0] = if big > 0.0 { det / big } else { 0.0 };
                out[1] = big;
            }
            t => {
                let eig = SymmetricEigen::new(g.clone());
                for (o, v) in out[..t].iter_mut().zip(eig.eigenvalues.iter()) {
                    *o = v.max(0.0);
                }
                out[..t].sort_by(f64::total_cmp);
            }
        }
    }

    /// Zero-forcing noise levels `sigma^2 [(H^H H)^-1]_kk` into `out[..K]`.
    /// Requires `K <= M`.
    pub fn noise_levels(&self, sigma2: f64, out: &mut [f64]) {
        debug_assert!(self.k <= self.m);
        let g = &self.gram;
        match self.k {
            1 => out[0] = sigma2 / g[(0, 0)].re,
            2 => {
                let (a, d, b) = (g[(0, 0)].re, g[(1, 1)].re, g[(0, 1)]);
                let det = a * d - b.norm_sqr();
                out[0] = sigma2 * d / det;
                out[1] = sigma2 * a / det;
            }
            k => match g.clone().cholesky() {
                Some(ch) => {
                    let inv = ch.inverse();
                    for (i, o) in out[..k].iter_mut().enumerate() {
                        *o = sigma2 * inv[(i, i)].re;
                    }
                }
                None => out[..k].iter_mut().for_each(|o| *o = f64::INFINITY),
            },
        }
    }
}

/// Eigenvalues (ascending, length `T`) of one channel draw, deterministic
/// in `seed`.
pub fn sample_channel(seed: u64, params: &SystemParams) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = GramSampler::new(params.k(), params.m());
    s.draw(&mut rng);
    let mut out = vec![0.0; s.t()];
    s.eigenvalues(&mut out);
    out
}

/// Like [`sample_channel`] but also returns the `M x K` matrix.
pub fn sample_channel_matrix(seed: u64, params: &SystemParams) -> (Vec<f64>, DMatrix<Complex64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = GramSampler::new(params.k(), params.m());
    s.draw(&mut rng);
    let mut out = vec![0.0; s.t()];
    s.eigenvalues(&mut out);
    (out, s.channel())
}

/// Zero-forcing noise levels of one channel draw.
pub fn sample_noise_levels(seed: u64, params: &SystemParams) -> Result<Vec<f64>> {
    if params.k() > params.m() {
        return Err(Error::Domain("noise levels require K <= M".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = GramSampler::new(params.k(), params.m());
    s.draw(&mut rng);
    let mut out = vec![0.0; params.k()];
    s.noise_levels(params.sigma2(), &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_paths_match_general_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (k, m) in [(2, 2), (2, 5), (5, 2), (1, 4), (4, 1)] {
            let mut s = GramSampler::new(k, m);
            for _ in 0..20 {
                s.draw(&mut rng);
                let t = s.t();
                let mut fast = vec![0.0; t];
                s.eigenvalues(&mut fast);
                let eig = SymmetricEigen::new(s.gram.clone());
                let mut slow: Vec<f64> = eig.eigenvalues.iter().copied().collect();
                slow.sort_by(f64::total_cmp);
                for (a, b) in fast.iter().zip(&slow) {
                    assert!((a - b).abs() < 1e-10 * b.abs().max(1.0));
                }
                let trace: f64 = (0..t).map(|i| s.gram[(i, i)].re).sum();
                assert!((fast.iter().sum::<f64>() - trace).abs() < 1e-10 * trace);
            }
        }
    }

    #[test]
    fn noise_levels_match_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 1..=4 {
            let mut s = GramSampler::new(k, 6);
            s.draw(&mut rng);
            let mut a = vec![0.0; k];
            s.noise_levels(2.0, &mut a);
            let inv = s.gram.clone().try_inverse().unwrap();
            for i in 0..k {
                assert!((a[i] - 2.0 * inv[(i, i)].re).abs() < 1e-10 * a[i]);
            }
        }
    }

    #[test]
    fn seeded_draws_replay() {
        let p = SystemParams::new(3, 4, 1.0, 1.0).unwrap();
        assert_eq!(sample_channel(42, &p), sample_channel(42, &p));
        assert_ne!(sample_channel(42, &p), sample_channel(43, &p));
        let (eig, h) = sample_channel_matrix(42, &p);
        assert_eq!(eig, sample_channel(42, &p));
        assert_eq!(h.shape(), (4, 3));
    }
}
