//! Derived metrics computed from CSVs written by earlier runs.

use crate::error::{CliError, CliResult};
use crate::output::Table;

/// `(metric, value)` pairs, written as a two-column CSV.
pub type Metrics = Vec<(String, f64)>;

pub const METRICS_HEADER: &[&str] = &["metric", "value"];

pub fn metrics_table(m: &Metrics) -> Table {
    let mut t = Table::new(METRICS_HEADER);
    for (k, v) in m {
        t.push(vec![k.clone(), crate::output::num(*v)]);
    }
    t
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn row_of(keys: &[Option<f64>], key: f64, name: &str) -> CliResult<usize> {
    keys.iter()
        .position(|k| k.is_some_and(|k| close(k, key)))
        .ok_or_else(|| CliError::Parse(format!("no row with {name} = {key}")))
}

/// Percentage change of every other column between the rows whose `key`
/// equals `from` and `to`: `(value(to) / value(from) − 1) · 100`.
pub fn gain(table: &Table, key: &str, from: f64, to: f64) -> CliResult<Metrics> {
    let keys = table.column(key)?;
    let (i, j) = (row_of(&keys, from, key)?, row_of(&keys, to, key)?);
    let mut out = Vec::new();
    for name in table.header.iter().filter(|h| *h != key) {
        let col = table.column(name)?;
        if let (Some(a), Some(b)) = (col[i], col[j]) {
            out.push((format!("{name}_gain_pct"), (b / a - 1.0) * 100.0));
        }
    }
    Ok(out)
}

/// SNR at which a curve first reaches `rate`, interpolating linearly.
pub fn snr_at_rate(snr: &[f64], rate_curve: &[f64], rate: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = snr
        .iter()
        .copied()
        .zip(rate_curve.iter().copied())
        .collect();
    if let Some(&(s0, r0)) = pts.first() {
        if r0 >= rate {
            return (r0 == rate).then_some(s0);
        }
    }
    pts.windows(2).find_map(|w| {
        let ((s0, r0), (s1, r1)) = (w[0], w[1]);
        (r0 < rate && r1 >= rate).then(|| s0 + (rate - r0) / (r1 - r0) * (s1 - s0))
    })
}

fn curve(t: &Table, column: &str) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let s = t.column("snr_db")?;
    let r = t.column(column)?;
    Ok(s.into_iter()
        .zip(r)
        .filter_map(|(s, r)| Some((s?, r?)))
        .unzip())
}

/// Horizontal distance in dB between two SNR sweeps: how much less SNR
/// the `near` curve needs to reach `rate` than the `far` curve. Defaults
/// to the rate the far curve reaches at its highest SNR.
pub fn snr_shift(near: &Table, far: &Table, column: &str, rate: Option<f64>) -> CliResult<Metrics> {
    let (sn, rn) = curve(near, column)?;
    let (sf, rf) = curve(far, column)?;
    let target = match rate {
        Some(r) => r,
        None => *rf
            .last()
            .ok_or_else(|| CliError::Parse("far curve has no values".into()))?,
    };
    let unreached = |which: &str| CliError::Parse(format!("{which} curve never reaches {target}"));
    let a = snr_at_rate(&sn, &rn, target).ok_or_else(|| unreached("near"))?;
    let b = snr_at_rate(&sf, &rf, target).ok_or_else(|| unreached("far"))?;
    Ok(vec![
        (format!("{column}_target_rate"), target),
        (format!("{column}_shift_db"), b - a),
    ])
}

/// NUHPM − BHPS gap per K at one SNR of a transmit-chain sweep.
pub fn gap(table: &Table, snr: f64) -> CliResult<Metrics> {
    let s = table.column("snr_db")?;
    let k = table.column("k")?;
    let b = table.column("se_bhps")?;
    let n = table.column("se_nuhpm")?;
    let mut out = Vec::new();
    for i in 0..table.rows.len() {
        if s[i].is_some_and(|v| close(v, snr)) {
            if let (Some(k), Some(b), Some(n)) = (k[i], b[i], n[i]) {
                out.push((format!("gap_k{k}"), n - b));
            }
        }
    }
    if out.is_empty() {
        return Err(CliError::Parse(format!(
            "no complete rows at snr_db = {snr}"
        )));
    }
    Ok(out)
}
