use crate::error::{Error, Result};
use crate::scalar::{count, Real};

/// Water-filling allocation over parallel Gaussian streams.
#[derive(Debug, Clone, PartialEq)]
pub struct WaterFill<T> {
    /// Power per stream, same order as the input gains.
    pub powers: Vec<T>,
    /// Water level `μ`; active streams satisfy `p_j + σ²/g_j = μ`.
    pub level: T,
}

/// Distributes `budget` over streams with squared gains `gains` and noise
/// variance `noise_var`: `p_j = (μ − σ²/g_j)⁺` with `Σ p_j = budget`.
///
/// Zero-gain streams never receive power.
pub fn water_fill<T: Real>(gains: &[T], noise_var: T, budget: T) -> Result<WaterFill<T>> {
    if gains.is_empty() {
        return Err(Error::Input("no streams to allocate over".into()));
    }
    if gains.iter().any(|g| !g.is_finite() || *g < T::zero()) {
        return Err(Error::Input(
            "stream gains must be finite and non-negative".into(),
        ));
    }
    if !(noise_var.is_finite() && noise_var > T::zero()) {
        return Err(Error::Input(format!(
            "noise variance must be positive, got {noise_var}"
        )));
    }
    if !(budget.is_finite() && budget > T::zero()) {
        return Err(Error::Input(format!(
            "power budget must be positive, got {budget}"
        )));
    }

    // floors σ²/g_j of usable streams, ascending
    let mut usable: Vec<(usize, T)> = gains
        .iter()
        .enumerate()
        .filter(|(_, g)| **g > T::zero())
        .map(|(i, &g)| (i, noise_var / g))
        .collect();
    if usable.is_empty() {
        return Err(Error::NoChannel);
    }
    usable.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite").then(a.0.cmp(&b.0)));

    // largest active set whose level clears every member's floor
    let mut level = budget + usable[0].1;
    let mut floor_sum = T::zero();
    for (m, &(_, floor)) in usable.iter().enumerate() {
        floor_sum += floor;
        let candidate = (budget + floor_sum) / count::<T>(m + 1);
        if candidate > floor {
            level = candidate;
        } else {
            break;
        }
    }

    let mut powers = vec![T::zero(); gains.len()];
    for &(i, floor) in &usable {
        if level > floor {
            powers[i] = level - floor;
        }
    }
    Ok(WaterFill { powers, level })
}
