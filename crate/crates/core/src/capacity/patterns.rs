use crate::error::{Error, Result};

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All `k`-subsets of `0..n` in lexicographic order.
///
/// Fails instead of truncating when there are more than `cap` subsets.
pub fn enumerate_patterns(n: usize, k: usize, cap: usize) -> Result<Vec<Vec<usize>>> {
    if k == 0 || k > n {
        return Err(Error::Input(format!("need 1 <= K <= N, got K={k}, N={n}")));
    }
    if cap == 0 {
        return Err(Error::Input("enumeration cap must be at least 1".into()));
    }
    let size = binomial(n, k);
    if size > cap as u128 {
        return Err(Error::EnsembleTooLarge { n, k, size, cap });
    }
    let mut out = Vec::with_capacity(size as usize);
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // rightmost position that can still advance
        let Some(pos) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            break;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    Ok(out)
}
