//! Modal (singular-value) view of a channel.
//!
//! The SVD `H = Ψ Λ Φᴴ` turns the coupled channel into independent
//! sub-channels ("holographic patterns"). Columns of `Φ` are transmit
//! patterns, columns of `Ψ` are receive patterns, and `Λ` holds the gains.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::em_channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Singular spectrum of a channel plus the count of significant modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalChannel<T: Real> {
    singular_values: Vec<T>,
    retained_rank: usize,
    threshold_ratio: T,
    /// Retained transmit patterns Φ (one column per mode), if computed.
    pub tx_patterns: Option<DMatrix<Complex<T>>>,
    /// Retained receive patterns Ψ (one column per mode), if computed.
    pub rx_patterns: Option<DMatrix<Complex<T>>>,
}

fn check_threshold<T: Real>(threshold_ratio: T) -> Result<()> {
    if threshold_ratio > T::zero() && threshold_ratio <= T::one() {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "threshold ratio must lie in (0, 1], got {threshold_ratio}"
        )))
    }
}

/// `#{n : σ_n ≥ ratio · σ_1}`, zero for an all-zero spectrum.
fn rank_above<T: Real>(sorted: &[T], threshold_ratio: T) -> usize {
    match sorted.first() {
        Some(&top) if top > T::zero() => {
            let cut = threshold_ratio * top;
            sorted.iter().take_while(|&&s| s >= cut).count()
        }
        _ => 0,
    }
}

impl<T: Real> ModalChannel<T> {
    /// Builds a modal channel directly from singular values (any order).
    pub fn from_singular_values(mut values: Vec<T>, threshold_ratio: T) -> Result<Self> {
        check_threshold(threshold_ratio)?;
        if values.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::Input(
                "singular values must be finite and non-negative".into(),
            ));
        }
        values.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
        let retained_rank = rank_above(&values, threshold_ratio);
        Ok(Self {
            singular_values: values,
            retained_rank,
            threshold_ratio,
            tx_patterns: None,
            rx_patterns: None,
        })
    }

    /// All singular values, descending.
    pub fn singular_values(&self) -> &[T] {
        &self.singular_values
    }

    pub fn retained_rank(&self) -> usize {
        self.retained_rank
    }

    pub fn threshold_ratio(&self) -> T {
        self.threshold_ratio
    }

    /// Retained singular values, descending.
    pub fn retained(&self) -> &[T] {
        &self.singular_values[..self.retained_rank]
    }

    /// Squared gains `λ_n²` of the retained modes.
    pub fn gains(&self) -> Vec<T> {
        self.retained().iter().map(|&s| s * s).collect()
    }

    /// Same spectrum with a different threshold. Pattern matrices are
    /// dropped since their column count would no longer match.
    pub fn with_threshold(&self, threshold_ratio: T) -> Result<Self> {
        Self::from_singular_values(self.singular_values.clone(), threshold_ratio)
    }

    /// Keeps only the `n` strongest retained modes, e.g. a receiver that
    /// can only observe `n` receive patterns.
    pub fn truncated(&self, n: usize) -> Self {
        let keep = n.min(self.retained_rank);
        Self {
            singular_values: self.singular_values.clone(),
            retained_rank: keep,
            threshold_ratio: self.threshold_ratio,
            tx_patterns: self
                .tx_patterns
                .as_ref()
                .map(|m| m.columns(0, keep).into_owned()),
            rx_patterns: self
                .rx_patterns
                .as_ref()
                .map(|m| m.columns(0, keep).into_owned()),
        }
    }

    /// Multiplies every gain amplitude by `factor > 0`.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            singular_values: self.singular_values.iter().map(|&s| s * factor).collect(),
            retained_rank: self.retained_rank,
            threshold_ratio: self.threshold_ratio,
            tx_patterns: self.tx_patterns.clone(),
            rx_patterns: self.rx_patterns.clone(),
        }
    }

    /// Rescaled so the strongest mode has unit amplitude. Zero channels are
    /// returned unchanged.
    pub fn normalized(&self) -> Self {
        match self.singular_values.first() {
            Some(&top) if top > T::zero() => self.scaled(T::one() / top),
            _ => self.clone(),
        }
    }
}

fn check_finite<T: Real>(h: &ChannelMatrix<T>) -> Result<()> {
    if h.is_finite() {
        Ok(())
    } else {
        Err(Error::Input("channel matrix has non-finite entries".into()))
    }
}

/// Full SVD of `h`, keeping the retained transmit and receive patterns.
pub fn decompose<T: Real>(h: &ChannelMatrix<T>, threshold_ratio: T) -> Result<ModalChannel<T>> {
    check_threshold(threshold_ratio)?;
    check_finite(h)?;
    let svd = h.as_matrix().clone().svd(true, true);
    let values: Vec<T> = svd.singular_values.iter().copied().collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable sort keeps the lowest index first among ties
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).expect("finite"));
    let sorted: Vec<T> = order.iter().map(|&i| values[i]).collect();
    let rank = rank_above(&sorted, threshold_ratio);

    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᴴ");
    let rx = DMatrix::from_fn(u.nrows(), rank, |r, c| u[(r, order[c])]);
    let tx = DMatrix::from_fn(v_t.ncols(), rank, |r, c| v_t[(order[c], r)].conj());

    Ok(ModalChannel {
        singular_values: sorted,
        retained_rank: rank,
        threshold_ratio,
        tx_patterns: Some(tx),
        rx_patterns: Some(rx),
    })
}

/// Singular values only. Several times cheaper than [`decompose`] and all
/// the capacity routines need.
pub fn decompose_values<T: Real>(
    h: &ChannelMatrix<T>,
    threshold_ratio: T,
) -> Result<ModalChannel<T>> {
    check_threshold(threshold_ratio)?;
    check_finite(h)?;
    let values: Vec<T> = h
        .as_matrix()
        .clone()
        .singular_values()
        .iter()
        .copied()
        .collect();
    ModalChannel::from_singular_values(values, threshold_ratio)
}

/// Number of significant spatial degrees of freedom.
pub fn count_dof<T: Real>(modal: &ModalChannel<T>) -> usize {
    modal.retained_rank()
}

/// Full list of `(index, σ_n²)`, 1-based, descending.
pub fn eig_spectrum<T: Real>(modal: &ModalChannel<T>) -> Vec<(usize, T)> {
    modal
        .singular_values()
        .iter()
        .enumerate()
        .map(|(i, &s)| (i + 1, s * s))
        .collect()
}
