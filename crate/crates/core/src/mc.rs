//! Finite-SNR mutual information of NUHPM by Monte Carlo.
//!
//! In the modal domain the receiver sees `ŷ = Λ x̂ + ẑ`, where `x̂` is
//! non-zero only on the active pattern's modes. Conditioned on pattern `i`
//! the output is circular complex Gaussian with covariance `σ² D_i`, so the
//! output law is a Gaussian mixture with weights `p_i`. Its entropy has no
//! closed form; it is estimated by averaging `−log₂ f(ŷ)` over samples.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::capacity::PatternEnsemble;
use crate::error::{Error, Result};
use crate::scalar::{count, lit, log_sum_exp, to_f64, CompensatedSum, Real};

/// Samples per independently seeded chunk. Part of the reproducibility
/// contract: changing it changes every estimate.
pub const CHUNK_SAMPLES: usize = 4096;

/// Minimum sample count accepted by the estimators.
pub const MIN_SAMPLES: usize = 1000;

/// Monte Carlo estimate in bits (per channel use).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MIEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Draws one channel use: the active pattern and the modal observation.
pub fn sample_output<T: Real, R: Rng + ?Sized>(
    ensemble: &PatternEnsemble<T>,
    rng: &mut R,
) -> (usize, Vec<Complex<T>>) {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut index = ensemble.len() - 1;
    for (i, &p) in ensemble.probabilities.iter().enumerate() {
        acc += to_f64(p);
        if u < acc {
            index = i;
            break;
        }
    }
    let mut y: Vec<Complex<T>> = (0..ensemble.dim())
        .map(|_| complex_normal(rng, ensemble.noise_var))
        .collect();
    let pattern = &ensemble.patterns[index];
    for (&n, &power) in pattern.subset.iter().zip(&pattern.powers) {
        let symbol = complex_normal(rng, power);
        y[n] += symbol * ensemble.gains[n].sqrt();
    }
    (index, y)
}

/// Convenience wrapper drawing from a freshly seeded generator.
pub fn sample_output_seeded<T: Real>(
    ensemble: &PatternEnsemble<T>,
    seed: u64,
) -> (usize, Vec<Complex<T>>) {
    sample_output(ensemble, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Circular complex Gaussian with the given variance.
fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R, variance: T) -> Complex<T> {
    let scale = (variance / lit(2.0)).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(lit::<T>(re) * scale, lit::<T>(im) * scale)
}

/// `log₂ f(ŷ)` for the Gaussian-mixture output density.
///
/// Each component differs from the white-noise density only on its `K`
/// active modes, so the shared quadratic form `‖ŷ‖²/σ²` is computed once
/// and each component adds a `K`-term correction.
pub fn gm_log_density<T: Real>(y: &[Complex<T>], ensemble: &PatternEnsemble<T>) -> Result<T> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if y.len() != ensemble.dim() {
        return Err(Error::DimensionMismatch {
            expected: ensemble.dim(),
            actual: y.len(),
        });
    }
    let noise_var = ensemble.noise_var;
    let n = count::<T>(y.len());
    let energy: CompensatedSum<T> = y.iter().map(|z| z.norm_sqr() / noise_var).collect();
    let base = -n * (T::pi() * noise_var).ln() - energy.value();

    let terms: Vec<T> = ensemble
        .patterns
        .iter()
        .zip(&ensemble.probabilities)
        .map(|(pattern, &p)| {
            let mut log_f = base - pattern.ln_det_d;
            for (m, d) in pattern.diag_on_support(&ensemble.gains, noise_var) {
                log_f += y[m].norm_sqr() / noise_var * (T::one() - T::one() / d);
            }
            p.ln() + log_f
        })
        .collect();
    Ok(log_sum_exp(&terms) / T::ln_2())
}

/// Running mean/variance, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0.0 {
            return other;
        }
        if other.n == 0.0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Self {
            n,
            mean: self.mean + delta * other.n / n,
            m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n,
        }
    }
}

/// Generator for chunk `chunk` of a run seeded with `seed`: one ChaCha
/// stream per chunk, so chunks are independent of scheduling.
fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Monte Carlo estimate of the output entropy `H(ŷ) = E[−log₂ f(ŷ)]`.
pub fn mc_output_entropy<T: Real>(
    ensemble: &PatternEnsemble<T>,
    samples: usize,
    seed: u64,
) -> Result<MIEstimate> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    if samples < MIN_SAMPLES {
        return Err(Error::Input(format!(
            "at least {MIN_SAMPLES} samples required, got {samples}"
        )));
    }
    let chunks = samples.div_ceil(CHUNK_SAMPLES);
    let partials: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK_SAMPLES.min(samples - c * CHUNK_SAMPLES);
            let mut m = Moments::default();
            for _ in 0..len {
                let (_, y) = sample_output(ensemble, &mut rng);
                let log_f = gm_log_density(&y, ensemble)?;
                m.push(-to_f64(log_f));
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let total = partials
        .into_iter()
        .fold(Moments::default(), Moments::merge);
    let variance = total.m2 / (total.n - 1.0);
    Ok(MIEstimate {
        value: total.mean,
        stderr: (variance / total.n).sqrt(),
        samples,
        seed,
    })
}

/// `N log₂(π e σ²)`: entropy of the modal noise, i.e. `H(ŷ | x̂)`.
pub fn noise_entropy<T: Real>(ensemble: &PatternEnsemble<T>) -> f64 {
    let sigma2 = to_f64(ensemble.noise_var);
    ensemble.dim() as f64 * (std::f64::consts::PI * std::f64::consts::E * sigma2).log2()
}

/// Monte Carlo mutual information `H(ŷ) − N log₂(π e σ²)`.
pub fn mc_mutual_information<T: Real>(
    ensemble: &PatternEnsemble<T>,
    samples: usize,
    seed: u64,
) -> Result<MIEstimate> {
    let h = mc_output_entropy(ensemble, samples, seed)?;
    Ok(MIEstimate {
        value: h.value - noise_entropy(ensemble),
        ..h
    })
}

/// Pairwise-overlap lower bound on the mixture entropy, in bits:
/// `−Σ_i p_i log₂ Σ_j p_j / (π^N det(σ²(D_i + D_j)))`.
pub fn entropy_lower_bound<T: Real>(ensemble: &PatternEnsemble<T>) -> Result<T> {
    if ensemble.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let n = count::<T>(ensemble.dim());
    let offset = n * (T::pi() * ensemble.noise_var).ln();
    let outer: Vec<T> = (0..ensemble.len())
        .into_par_iter()
        .map(|i| {
            let inner: Vec<T> = (0..ensemble.len())
                .map(|j| ensemble.probabilities[j].ln() - ensemble.ln_det_pair_sum(i, j))
                .collect();
            ensemble.probabilities[i] * (log_sum_exp(&inner) - offset)
        })
        .collect();
    let acc: CompensatedSum<T> = outer.into_iter().collect();
    Ok(-acc.value() / T::ln_2())
}
