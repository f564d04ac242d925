//! Spectral efficiency with `K` transmit RF chains.
//!
//! Two transmission strategies are compared:
//!
//! * **BHPS** (best holographic pattern selection) always transmits on the
//!   `K` strongest modes with water-filled powers.
//! * **NUHPM** (non-uniform holographic pattern modulation) additionally
//!   carries information in *which* `K`-subset of modes is active. Each
//!   subset is water-filled at unit budget and activated with probability
//!   proportional to `det D_i`, giving the high-SNR capacity
//!   `log₂ Σ_i det D_i`.
//!
//! Every `D_i` is diagonal (identity off the active modes), so all
//! determinants are products over at most `K` entries.

mod ensemble;
mod patterns;
mod symmetric;
mod waterfill;

pub use ensemble::{build_ensemble, Pattern, PatternEnsemble};
pub use patterns::{binomial, enumerate_patterns};
pub use symmetric::ln_elementary_symmetric;
pub use waterfill::{water_fill, WaterFill};

use crate::error::{Error, Result};
use crate::modal::ModalChannel;
use crate::scalar::{count, Real};

/// Default bound on the number of enumerated subsets.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// High-SNR NUHPM capacity `log₂ Σ_i det D_i`, bits/s/Hz.
pub fn nuhpm_asymptotic_capacity<T: Real>(ensemble: &PatternEnsemble<T>) -> T {
    ensemble.ln_det_sum() / T::ln_2()
}

/// High-SNR mutual information for arbitrary activation probabilities:
/// `Σ p_i log₂ det D_i − Σ p_i log₂ p_i`.
pub fn asymptotic_mi<T: Real>(ensemble: &PatternEnsemble<T>, probabilities: &[T]) -> Result<T> {
    if probabilities.len() != ensemble.len() {
        return Err(Error::DimensionMismatch {
            expected: ensemble.len(),
            actual: probabilities.len(),
        });
    }
    let tol = T::default_epsilon().sqrt();
    let total = probabilities.iter().fold(T::zero(), |a, &b| a + b);
    if probabilities
        .iter()
        .any(|p| !p.is_finite() || *p < T::zero())
        || (total - T::one()).abs() > tol
    {
        return Err(Error::Input(
            "probabilities must form a distribution".into(),
        ));
    }
    let mut acc = T::zero();
    for (pattern, &p) in ensemble.patterns.iter().zip(probabilities) {
        if p > T::zero() {
            acc += p * (pattern.ln_det_d - p.ln());
        }
    }
    Ok(acc / T::ln_2())
}

fn require_dof<T: Real>(modal: &ModalChannel<T>, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Input("need at least one RF chain".into()));
    }
    if modal.retained_rank() < k {
        return Err(Error::InsufficientDof {
            available: modal.retained_rank(),
            required: k,
        });
    }
    Ok(())
}

/// BHPS: water-filling over the `K` strongest modes. Returns the chosen
/// subset (ties resolved towards the lower index) and its rate in bits/s/Hz.
pub fn bhps_capacity<T: Real>(
    modal: &ModalChannel<T>,
    k: usize,
    noise_var: T,
) -> Result<(Vec<usize>, T)> {
    require_dof(modal, k)?;
    let gains = modal.gains();
    let subset: Vec<usize> = (0..k).collect();
    let pattern = Pattern::water_filled(subset, &gains, noise_var)?;
    Ok((pattern.subset, pattern.ln_det_d / T::ln_2()))
}

/// NUHPM high-SNR capacity with equal power `1/K` per stream.
///
/// `det D_i` then factorises over the active modes, so `Σ_i det D_i` is the
/// `K`-th elementary symmetric polynomial of `a_n = 1 + λ_n²/(Kσ²)` and can
/// be evaluated in `O(N·K)` without enumerating subsets.
pub fn fast_capacity_equal_power<T: Real>(
    modal: &ModalChannel<T>,
    k: usize,
    noise_var: T,
) -> Result<T> {
    require_dof(modal, k)?;
    if !(noise_var.is_finite() && noise_var > T::zero()) {
        return Err(Error::Input(format!(
            "noise variance must be positive, got {noise_var}"
        )));
    }
    let scale = T::one() / (count::<T>(k) * noise_var);
    let a: Vec<T> = modal
        .gains()
        .iter()
        .map(|&g| T::one() + g * scale)
        .collect();
    Ok(ln_elementary_symmetric(&a, k) / T::ln_2())
}

/// NUHPM capacity, exact enumeration when it fits under `cap`, otherwise
/// the equal-power fast path. The flag reports whether the fast path was
/// used.
pub fn nuhpm_capacity<T: Real>(
    modal: &ModalChannel<T>,
    k: usize,
    noise_var: T,
    cap: usize,
) -> Result<(T, bool)> {
    match build_ensemble(modal, k, noise_var, cap) {
        Ok(e) => Ok((nuhpm_asymptotic_capacity(&e), false)),
        Err(Error::EnsembleTooLarge { .. }) => {
            fast_capacity_equal_power(modal, k, noise_var).map(|c| (c, true))
        }
        Err(e) => Err(e),
    }
}
