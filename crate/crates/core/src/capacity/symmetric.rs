use crate::scalar::{count, Real};

/// `ln e_k(a)` for the elementary symmetric polynomial of positive values.
///
/// Uses the `O(n·k)` subset-sum recurrence `e_j ← e_j + a_i·e_{j−1}` on
/// values rescaled by their maximum, so no term overflows and, all terms
/// being positive, no cancellation occurs. Returns `-inf` when `k > n`.
pub fn ln_elementary_symmetric<T: Real>(values: &[T], k: usize) -> T {
    if k == 0 {
        return T::zero();
    }
    if k > values.len() {
        return -T::one() / T::zero();
    }
    let max = values.iter().copied().fold(T::zero(), |a, b| a.max(b));
    if max <= T::zero() {
        return -T::one() / T::zero();
    }
    let mut e = vec![T::zero(); k + 1];
    e[0] = T::one();
    for (i, &a) in values.iter().enumerate() {
        let scaled = a / max;
        for j in (1..=k.min(i + 1)).rev() {
            let lower = e[j - 1];
            e[j] += scaled * lower;
        }
    }
    e[k].ln() + count::<T>(k) * max.ln()
}
