//! Simulation oracles over sampled channels.
//!
//! Work is split into fixed-size batches; batch `b` draws from the ChaCha8
//! stream `b` of the configured seed, and per-batch accumulators are merged
//! in batch order. Results therefore depend on `(seed, samples, batch_size)`
//! only, never on the number of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Method, SystemParams};
use crate::par;
use crate::wishart::{divergent, GramSampler, QuantGrid, TruncStats, TruncStdErrors};

/// Monte Carlo run configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub batch_size: usize,
    /// Floor on accepted draws for rejection-sampled statistics.
    pub min_accepted: usize,
}

pub const MIN_SAMPLES: usize = 1000;
const DEFAULT_BATCH: usize = 4096;

impl McConfig {
    pub fn new(samples: usize, seed: u64) -> Result<Self> {
        if samples < MIN_SAMPLES {
            return Err(Error::InvalidParams(format!(
                "Monte Carlo needs at least {MIN_SAMPLES} samples (got {samples})"
            )));
        }
        Ok(Self {
            samples,
            seed,
            batch_size: DEFAULT_BATCH.min(samples),
            min_accepted: 1000.min(samples),
        })
    }

    pub fn with_batch_size(mut self, batch_size: usize) -> Result<Self> {
        if batch_size == 0 || batch_size > self.samples {
            return Err(Error::InvalidParams(format!(
                "batch size must lie in 1..={} (got {batch_size})",
                self.samples
            )));
        }
        self.batch_size = batch_size;
        Ok(self)
    }

    pub fn with_min_accepted(mut self, min_accepted: usize) -> Self {
        self.min_accepted = min_accepted;
        self
    }

    fn batches(&self) -> usize {
        self.samples.div_ceil(self.batch_size)
    }

    fn batch_len(&self, b: usize) -> usize {
        self.batch_size.min(self.samples - b * self.batch_size)
    }

    fn batch_rng(&self, b: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(b as u64);
        rng
    }
}

/// A sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_effective: usize,
    pub seed: u64,
}

/// Running mean and second central moment (Welford, Chan merge).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        self.mean += delta * nb / n as f64;
        self.m2 += other.m2 + delta * delta * na * nb / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn estimate(&self, seed: u64) -> McEstimate {
        McEstimate {
            mean: self.mean,
            std_error: self.std_error(),
            n_effective: self.n as usize,
            seed,
        }
    }
}

impl FromIterator<f64> for Moments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = Moments::default();
        iter.into_iter().for_each(|x| m.push(x));
        m
    }
}

/// Eigenvalue sets (ascending, `T` per draw) of `samples` channel draws.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSamples {
    t: usize,
    k: usize,
    m: usize,
    values: Vec<f64>,
    seed: u64,
}

impl EigenSamples {
    pub fn draw(params: &SystemParams, cfg: &McConfig) -> Self {
        let (k, m) = (params.k(), params.m());
        let t = k.min(m);
        let chunks = par::map_indexed(cfg.batches(), |b| {
            let mut rng = cfg.batch_rng(b);
            let mut sampler = GramSampler::new(k, m);
            let len = cfg.batch_len(b);
            let mut out = vec![0.0; len * t];
            for row in out.chunks_exact_mut(t) {
                sampler.draw(&mut rng);
                sampler.eigenvalues(row);
            }
            out
        });
        Self {
            t,
            k,
            m,
            values: chunks.concat(),
            seed: cfg.seed,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.t
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Per-draw eigenvalue sets, ascending within each.
    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.t)
    }

    /// Draws whose smallest eigenvalue is at least `lambda_th`.
    pub fn accepted(&self, lambda_th: f64) -> impl Iterator<Item = &[f64]> + '_ {
        self.rows().filter(move |r| r[0] >= lambda_th)
    }

    /// Checks that the samples were drawn for the dimensions of `params`.
    pub fn check_dims(&self, params: &SystemParams) -> Result<()> {
        if (self.k, self.m) != (params.k(), params.m()) {
            return Err(Error::InvalidParams(format!(
                "eigenvalue samples are for K={}, M={} but parameters have K={}, M={}",
                self.k,
                self.m,
                params.k(),
                params.m()
            )));
        }
        Ok(())
    }

    /// Rejection-sampled truncation statistics with `P_th` as the acceptance
    /// frequency.
    pub fn trunc_moments(
        &self,
        params: &SystemParams,
        lambda_th: f64,
        min_accepted: usize,
    ) -> Result<TruncStats> {
        self.check_dims(params)?;
        params.require_k_le_m("truncated inversion")?;
        if !(lambda_th >= 0.0 && lambda_th.is_finite()) {
            return Err(Error::Domain(format!("invalid threshold {lambda_th}")));
        }
        if lambda_th == 0.0 && params.k() == params.m() {
            return Err(divergent(params.k()));
        }
        let mut inv = Moments::default();
        let mut lin = Moments::default();
        for row in self.accepted(lambda_th) {
            let n = row.len() as f64;
            inv.push(row.iter().map(|l| 1.0 / l).sum::<f64>() / n);
            lin.push(row.iter().sum::<f64>() / n);
        }
        let accepted = inv.count() as usize;
        if accepted < min_accepted.max(2) {
            return Err(Error::InsufficientAcceptance {
                accepted,
                required: min_accepted.max(2),
            });
        }
        let total = self.len() as f64;
        let p = accepted as f64 / total;
        Ok(TruncStats {
            lambda_th,
            p_th: p,
            h_th: crate::model::binary_entropy(p)?,
            e_inv_lambda: inv.mean(),
            e_lambda: lin.mean(),
            method: Method::MonteCarlo,
            std_errors: Some(TruncStdErrors {
                p_th: (p * (1.0 - p) / total).sqrt(),
                e_inv_lambda: inv.std_error(),
                e_lambda: lin.std_error(),
            }),
            accepted,
        })
    }
}

/// Average of `g` over the unordered eigenvalues of sampled channels; each
/// draw contributes the mean of `g` over its `T` eigenvalues.
pub fn mc_eig_expect<G>(params: &SystemParams, g: G, cfg: &McConfig) -> McEstimate
where
    G: Fn(f64) -> f64 + Sync + Send,
{
    let (k, m) = (params.k(), params.m());
    let t = k.min(m);
    let parts = par::map_indexed(cfg.batches(), |b| {
        let mut rng = cfg.batch_rng(b);
        let mut sampler = GramSampler::new(k, m);
        let mut eig = vec![0.0; t];
        let mut acc = Moments::default();
        for _ in 0..cfg.batch_len(b) {
            sampler.draw(&mut rng);
            sampler.eigenvalues(&mut eig);
            acc.push(eig.iter().map(|&l| g(l)).sum::<f64>() / t as f64);
        }
        acc
    });
    merged(&parts).estimate(cfg.seed)
}

/// Same as [`mc_eig_expect`] but always on the calling thread.
pub fn mc_eig_expect_seq<G>(params: &SystemParams, g: G, cfg: &McConfig) -> McEstimate
where
    G: Fn(f64) -> f64,
{
    let (k, m) = (params.k(), params.m());
    let t = k.min(m);
    let parts = par::map_indexed_seq(cfg.batches(), |b| {
        let mut rng = cfg.batch_rng(b);
        let mut sampler = GramSampler::new(k, m);
        let mut eig = vec![0.0; t];
        let mut acc = Moments::default();
        for _ in 0..cfg.batch_len(b) {
            sampler.draw(&mut rng);
            sampler.eigenvalues(&mut eig);
            acc.push(eig.iter().map(|&l| g(l)).sum::<f64>() / t as f64);
        }
        acc
    });
    merged(&parts).estimate(cfg.seed)
}

fn merged(parts: &[Moments]) -> Moments {
    let mut total = Moments::default();
    parts.iter().for_each(|p| total.merge(p));
    total
}

/// Rejection-sampled truncation statistics (acceptance frequency as `P_th`).
pub fn mc_trunc_stats(params: &SystemParams, lambda_th: f64, cfg: &McConfig) -> Result<TruncStats> {
    params.require_k_le_m("truncated inversion")?;
    EigenSamples::draw(params, cfg).trunc_moments(params, lambda_th, cfg.min_accepted)
}

/// Entropy estimates of the quantized zero-forcing noise levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyEstimate {
    /// Joint entropy of the `K` quantized levels, bits.
    pub h_joint: McEstimate,
    /// Sum of the `K` marginal entropies, bits.
    pub h_sum: McEstimate,
    /// `h_sum - h_joint` with its own (paired) standard error.
    pub gap: McEstimate,
}

/// Per-draw cell indices, `K` per draw.
struct Cells {
    k: usize,
    idx: Vec<u8>,
}

fn draw_cells(params: &SystemParams, grid: &QuantGrid, cfg: &McConfig) -> Result<Cells> {
    params.require_k_le_m("noise-level quantization")?;
    let (k, m, s2) = (params.k(), params.m(), params.sigma2());
    let chunks = par::map_indexed(cfg.batches(), |b| {
        let mut rng = cfg.batch_rng(b);
        let mut sampler = GramSampler::new(k, m);
        let mut a = vec![0.0; k];
        let mut out = Vec::with_capacity(cfg.batch_len(b) * k);
        for _ in 0..cfg.batch_len(b) {
            sampler.draw(&mut rng);
            sampler.noise_levels(s2, &mut a);
            out.extend(a.iter().map(|&x| grid.ceil_index(x) as u8));
        }
        out
    });
    Ok(Cells {
        k,
        idx: chunks.concat(),
    })
}

fn plug_in(counts: &[u64], n: u64) -> (Vec<f64>, f64, usize) {
    let nf = n as f64;
    let log_p: Vec<f64> = counts
        .iter()
        .map(|&c| if c > 0 { (c as f64 / nf).log2() } else { 0.0 })
        .collect();
    let h = counts
        .iter()
        .zip(&log_p)
        .map(|(&c, &l)| -(c as f64 / nf) * l)
        .sum();
    let occupied = counts.iter().filter(|&&c| c > 0).count();
    (log_p, h, occupied)
}

fn miller_madow(occupied: usize, n: u64) -> f64 {
    (occupied.saturating_sub(1)) as f64 / (2.0 * n as f64 * std::f64::consts::LN_2)
}

/// Plug-in estimates of `H_joint`, `H_sum` and their gap, with delta-method
/// standard errors. `miller_madow` adds the `(cells - 1)/(2n)` bias
/// correction. Requires `samples >= 50 J^K`.
pub fn mc_entropies(
    params: &SystemParams,
    grid: &QuantGrid,
    cfg: &McConfig,
    miller_madow_correction: bool,
) -> Result<EntropyEstimate> {
    params.require_k_le_m("noise-level quantization")?;
    let j = grid.levels();
    let cells = (j as f64).powi(params.k() as i32);
    let required = 50.0 * cells;
    if (cfg.samples as f64) < required || cells > 1e8 {
        return Err(Error::CellExplosion {
            cells: cells as usize,
            samples: cfg.samples,
            required: required as usize,
        });
    }
    let draws = draw_cells(params, grid, cfg)?;
    let k = draws.k;
    let n = (draws.idx.len() / k) as u64;
    let joint_index = |row: &[u8]| row.iter().fold(0usize, |acc, &c| acc * j + c as usize);

    let mut joint = vec![0u64; cells as usize];
    let mut marginal = vec![0u64; j];
    for row in draws.idx.chunks_exact(k) {
        joint[joint_index(row)] += 1;
        row.iter().for_each(|&c| marginal[c as usize] += 1);
    }
    let (log_joint, h_joint, occ_joint) = plug_in(&joint, n);
    let (log_marg, h_marg, occ_marg) = plug_in(&marginal, n * k as u64);
    let h_sum = k as f64 * h_marg;

    // Influence of one draw: -log2 p(x) for the joint, sum_k -log2 p(x_k)
    // for the pooled marginals.
    let mut inf_joint = Moments::default();
    let mut inf_sum = Moments::default();
    let mut inf_gap = Moments::default();
    for row in draws.idx.chunks_exact(k) {
        let lj = -log_joint[joint_index(row)];
        let ls: f64 = row.iter().map(|&c| -log_marg[c as usize]).sum();
        inf_joint.push(lj);
        inf_sum.push(ls);
        inf_gap.push(ls - lj);
    }
    let (bias_joint, bias_sum) = if miller_madow_correction {
        (
            miller_madow(occ_joint, n),
            k as f64 * miller_madow(occ_marg, n * k as u64),
        )
    } else {
        (0.0, 0.0)
    };
    let est = |mean: f64, m: &Moments| McEstimate {
        mean,
        std_error: m.std_error(),
        n_effective: n as usize,
        seed: cfg.seed,
    };
    let hj = h_joint + bias_joint;
    let hs = h_sum + bias_sum;
    Ok(EntropyEstimate {
        h_joint: est(hj, &inf_joint),
        h_sum: est(hs, &inf_sum),
        gap: est(hs - hj, &inf_gap),
    })
}

/// Plug-in joint entropy of the `K` quantized noise levels, bits.
pub fn mc_joint_entropy(params: &SystemParams, grid: &QuantGrid, cfg: &McConfig) -> Result<McEstimate> {
    Ok(mc_entropies(params, grid, cfg, false)?.h_joint)
}

/// `K` times the plug-in entropy of the pooled marginal pmf, bits.
pub fn mc_sum_entropy(params: &SystemParams, grid: &QuantGrid, cfg: &McConfig) -> Result<McEstimate> {
    let draws = draw_cells(params, grid, cfg)?;
    let k = draws.k;
    let n = (draws.idx.len() / k) as u64;
    let mut marginal = vec![0u64; grid.levels()];
    draws.idx.iter().for_each(|&c| marginal[c as usize] += 1);
    let (log_marg, h_marg, _) = plug_in(&marginal, n * k as u64);
    let inf: Moments = draws
        .idx
        .chunks_exact(k)
        .map(|row| row.iter().map(|&c| -log_marg[c as usize]).sum::<f64>())
        .collect();
    Ok(McEstimate {
        mean: k as f64 * h_marg,
        std_error: inf.std_error(),
        n_effective: n as usize,
        seed: cfg.seed,
    })
}

/// Empirical probability of each grid cell (pooled over the `K` levels).
pub fn mc_marginal_pmf(params: &SystemParams, grid: &QuantGrid, cfg: &McConfig) -> Result<Vec<McEstimate>> {
    let draws = draw_cells(params, grid, cfg)?;
    let k = draws.k;
    let mut per_cell = vec![Moments::default(); grid.levels()];
    let mut hits = vec![0usize; grid.levels()];
    for row in draws.idx.chunks_exact(k) {
        hits.iter_mut().for_each(|h| *h = 0);
        row.iter().for_each(|&c| hits[c as usize] += 1);
        for (m, &h) in per_cell.iter_mut().zip(&hits) {
            m.push(h as f64 / k as f64);
        }
    }
    Ok(per_cell.iter().map(|m| m.estimate(cfg.seed)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let all: Moments = xs.iter().copied().collect();
        let mut merged = Moments::default();
        for c in xs.chunks(77) {
            merged.merge(&c.iter().copied().collect());
        }
        assert_eq!(all.count(), merged.count());
        assert!((all.mean() - merged.mean()).abs() < 1e-12);
        assert!((all.variance() - merged.variance()).abs() < 1e-10);
    }

    #[test]
    fn config_validation() {
        assert!(McConfig::new(999, 0).is_err());
        let c = McConfig::new(1000, 0).unwrap();
        assert_eq!(c.batch_size, 1000);
        assert!(c.with_batch_size(0).is_err());
        assert!(c.with_batch_size(1001).is_err());
        let c = McConfig::new(10_000, 0).unwrap().with_batch_size(3000).unwrap();
        assert_eq!(c.batches(), 4);
        assert_eq!(c.batch_len(3), 1000);
    }

    #[test]
    fn constant_has_zero_error() {
        let p = SystemParams::new(2, 3, 1.0, 1.0).unwrap();
        let cfg = McConfig::new(2000, 3).unwrap();
        let e = mc_eig_expect(&p, |_| 1.0, &cfg);
        assert_eq!((e.mean, e.std_error, e.n_effective), (1.0, 0.0, 2000));
    }

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let p = SystemParams::new(3, 3, 1.0, 1.0).unwrap();
        let cfg = McConfig::new(5000, 9).unwrap().with_batch_size(500).unwrap();
        let a = mc_eig_expect(&p, |l| l.ln_1p(), &cfg);
        let b = mc_eig_expect_seq(&p, |l| l.ln_1p(), &cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn single_level_grid_has_zero_entropy() {
        let p = SystemParams::new(2, 4, 1.0, 1.0).unwrap();
        let g = QuantGrid::new(vec![], vec![1.0], None).unwrap();
        let cfg = McConfig::new(1000, 1).unwrap();
        let e = mc_entropies(&p, &g, &cfg, false).unwrap();
        assert_eq!(e.h_joint.mean, 0.0);
        assert_eq!(e.h_sum.mean, 0.0);
    }
}
