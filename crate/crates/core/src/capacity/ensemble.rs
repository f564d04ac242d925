use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modal::ModalChannel;
use crate::scalar::{lit, log_sum_exp, Real};

use super::patterns::enumerate_patterns;
use super::waterfill::water_fill;

/// One holographic pattern: the set of active modes and the water-filled
/// input on them.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern<T> {
    /// Active mode indices (0-based, ascending).
    pub subset: Vec<usize>,
    /// Per-stream power, aligned with `subset`; sums to 1.
    pub powers: Vec<T>,
    /// `det D = Π (1 + p_j λ_j² / σ²)`.
    pub det_d: T,
    /// `ln det D`, kept separately so huge determinants stay usable.
    pub ln_det_d: T,
    pub water_level: T,
}

impl<T: Real> Pattern<T> {
    /// Builds the pattern with water-filling over its gains at unit budget.
    pub fn water_filled(subset: Vec<usize>, all_gains: &[T], noise_var: T) -> Result<Self> {
        let gains: Vec<T> = subset.iter().map(|&n| all_gains[n]).collect();
        let wf = water_fill(&gains, noise_var, T::one())?;
        Ok(Self::with_powers(
            subset, wf.powers, all_gains, noise_var, wf.level,
        ))
    }

    /// Builds the pattern with a given power vector.
    pub fn with_powers(
        subset: Vec<usize>,
        powers: Vec<T>,
        all_gains: &[T],
        noise_var: T,
        water_level: T,
    ) -> Self {
        let ln_det_d = subset.iter().zip(&powers).fold(T::zero(), |acc, (&n, &p)| {
            acc + (p * all_gains[n] / noise_var).ln_1p()
        });
        Self {
            subset,
            powers,
            det_d: ln_det_d.exp(),
            ln_det_d,
            water_level,
        }
    }

    /// Diagonal entries of `D` on the support, aligned with `subset`.
    pub fn diag_on_support<'a>(
        &'a self,
        gains: &'a [T],
        noise_var: T,
    ) -> impl Iterator<Item = (usize, T)> + 'a {
        self.subset
            .iter()
            .zip(&self.powers)
            .map(move |(&n, &p)| (n, T::one() + p * gains[n] / noise_var))
    }
}

/// All patterns over the retained modes together with their activation
/// probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternEnsemble<T> {
    pub patterns: Vec<Pattern<T>>,
    pub probabilities: Vec<T>,
    pub noise_var: T,
    /// `λ_n²` of the modes the ensemble is defined over.
    pub gains: Vec<T>,
    pub k: usize,
}

impl<T: Real> PatternEnsemble<T> {
    /// Ensemble from explicit patterns, with probabilities proportional to
    /// `det D`.
    pub fn from_patterns(
        patterns: Vec<Pattern<T>>,
        gains: Vec<T>,
        noise_var: T,
        k: usize,
    ) -> Result<Self> {
        if patterns.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if !(noise_var.is_finite() && noise_var > T::zero()) {
            return Err(Error::Input(format!(
                "noise variance must be positive, got {noise_var}"
            )));
        }
        for p in &patterns {
            if p.subset.len() != k || p.powers.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    actual: p.subset.len(),
                });
            }
            if p.subset.iter().any(|&n| n >= gains.len()) {
                return Err(Error::Input(
                    "pattern refers to a mode outside the gain vector".into(),
                ));
            }
        }
        let probabilities = det_proportional(&patterns);
        Ok(Self {
            patterns,
            probabilities,
            noise_var,
            gains,
            k,
        })
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Output dimension `N` (number of modes).
    pub fn dim(&self) -> usize {
        self.gains.len()
    }

    /// `ln Σ_i det D_i`.
    pub fn ln_det_sum(&self) -> T {
        let logs: Vec<T> = self.patterns.iter().map(|p| p.ln_det_d).collect();
        log_sum_exp(&logs)
    }

    /// `ln det(D_i + D_j)` from the diagonal structure: off both supports
    /// each entry is `1 + 1 = 2`.
    pub fn ln_det_pair_sum(&self, i: usize, j: usize) -> T {
        let (a, b) = (&self.patterns[i], &self.patterns[j]);
        let (ga, gb) = (&self.gains, &self.gains);
        let mut ia = a.diag_on_support(ga, self.noise_var).peekable();
        let mut ib = b.diag_on_support(gb, self.noise_var).peekable();
        let one = T::one();
        let ln2 = T::ln_2();
        let mut acc = T::zero();
        let mut touched = 0usize;
        loop {
            let entry = match (ia.peek().copied(), ib.peek().copied()) {
                (Some((na, da)), Some((nb, db))) if na == nb => {
                    ia.next();
                    ib.next();
                    da + db
                }
                (Some((na, da)), Some((nb, _))) if na < nb => {
                    ia.next();
                    da + one
                }
                (Some(_), Some((_, db))) => {
                    ib.next();
                    db + one
                }
                (Some((_, da)), None) => {
                    ia.next();
                    da + one
                }
                (None, Some((_, db))) => {
                    ib.next();
                    db + one
                }
                (None, None) => break,
            };
            acc += entry.ln();
            touched += 1;
        }
        acc + lit::<T>((self.dim() - touched) as f64) * ln2
    }

    /// `Σ_{j≠i} p_j / det(D_i + D_j)`, the cross-pattern overlap that
    /// vanishes at high SNR.
    pub fn cross_term(&self, i: usize) -> T {
        (0..self.len())
            .filter(|&j| j != i)
            .map(|j| self.probabilities[j] * (-self.ln_det_pair_sum(i, j)).exp())
            .fold(T::zero(), |a, b| a + b)
    }
}

/// `p_i = det D_i / Σ_j det D_j`, evaluated in the log domain.
fn det_proportional<T: Real>(patterns: &[Pattern<T>]) -> Vec<T> {
    let logs: Vec<T> = patterns.iter().map(|p| p.ln_det_d).collect();
    let total = log_sum_exp(&logs);
    logs.iter().map(|&l| (l - total).exp()).collect()
}

/// Water-filled ensemble over every `k`-subset of the retained modes.
pub fn build_ensemble<T: Real>(
    modal: &ModalChannel<T>,
    k: usize,
    noise_var: T,
    cap: usize,
) -> Result<PatternEnsemble<T>> {
    let available = modal.retained_rank();
    if k == 0 {
        return Err(Error::Input("need at least one RF chain".into()));
    }
    if available < k {
        return Err(Error::InsufficientDof {
            available,
            required: k,
        });
    }
    if !(noise_var.is_finite() && noise_var > T::zero()) {
        return Err(Error::Input(format!(
            "noise variance must be positive, got {noise_var}"
        )));
    }
    let gains = modal.gains();
    let subsets = enumerate_patterns(available, k, cap)?;
    let patterns: Vec<Pattern<T>> = subsets
        .into_par_iter()
        .map(|s| Pattern::water_filled(s, &gains, noise_var))
        .collect::<Result<_>>()?;
    PatternEnsemble::from_patterns(patterns, gains, noise_var, k)
}
