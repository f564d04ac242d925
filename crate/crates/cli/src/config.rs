//! Scenario configuration.
//!
//! Configs are TOML documents. Scalar keys may also be given as lists to
//! define a sweep, e.g. `distance_m = [1, 2, 5]`. Two optional sections,
//! `[tx]` and `[rx]`, describe the surfaces:
//!
//! ```toml
//! frequency_hz = 2.4e9
//! distance_m = [1.0, 5.0]
//! snr_db = [0, 10, 20, 30]
//! snr_convention = "reference"   # physical | normalized | reference
//! k_tx_rf = 1
//! n_rx_rf = "all"
//!
//! [tx]
//! nx = 16
//! ny = 16
//! patch_wavelengths = 0.4
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }

    pub fn first(&self) -> Option<T> {
        self.values().into_iter().next()
    }
}

/// How `snr_db` maps onto the noise variance of the modal channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnrConvention {
    /// `σ² = 10^(−SNR/10)` against the raw Green's-function gains.
    Physical,
    /// Every sweep point is rescaled so its strongest mode has unit gain.
    Normalized,
    /// One fixed rescaling for the whole run: the strongest mode of the
    /// base geometry at `reference_distance_m` has unit gain. Gains keep
    /// their physical dependence on distance and aperture.
    Reference,
}

impl std::fmt::Display for SnrConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SnrConvention::Physical => "physical",
            SnrConvention::Normalized => "normalized",
            SnrConvention::Reference => "reference",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllKeyword {
    All,
}

/// Receive RF chain count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RxChains {
    Count(usize),
    All(AllKeyword),
}

impl RxChains {
    pub fn limit(self) -> Option<usize> {
        match self {
            RxChains::Count(n) => Some(n),
            RxChains::All(_) => None,
        }
    }
}

impl std::fmt::Display for RxChains {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RxChains::Count(n) => write!(f, "{n}"),
            RxChains::All(_) => f.write_str("all"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    #[serde(default = "default_patches")]
    pub nx: usize,
    #[serde(default = "default_patches")]
    pub ny: usize,
    /// Patch edge in wavelengths; ignored when `patch_m` is set.
    #[serde(default = "default_patch_wavelengths")]
    pub patch_wavelengths: f64,
    #[serde(default)]
    pub patch_m: Option<f64>,
    /// Lateral `[x, y]` position of the first patch centre, meters.
    #[serde(default)]
    pub offset_m: [f64; 2],
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self {
            nx: default_patches(),
            ny: default_patches(),
            patch_wavelengths: default_patch_wavelengths(),
            patch_m: None,
            offset_m: [0.0, 0.0],
        }
    }
}

impl SurfaceConfig {
    pub fn patch_size(&self, wavelength: f64) -> f64 {
        self.patch_m.unwrap_or(self.patch_wavelengths * wavelength)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_frequency")]
    pub frequency_hz: OneOrMany<f64>,
    #[serde(default = "default_distance")]
    pub distance_m: OneOrMany<f64>,
    #[serde(default = "default_snr")]
    pub snr_db: OneOrMany<f64>,
    #[serde(default = "default_convention")]
    pub snr_convention: SnrConvention,
    #[serde(default = "default_reference_distance")]
    pub reference_distance_m: f64,
    #[serde(default = "default_k")]
    pub k_tx_rf: OneOrMany<usize>,
    #[serde(default = "default_rx_chains")]
    pub n_rx_rf: OneOrMany<RxChains>,
    #[serde(default = "default_dof_threshold")]
    pub dof_threshold: f64,
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    /// Monte Carlo samples per SNR point; `0` disables the estimate.
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub enumeration_cap: usize,
    /// Square transmit sizes (patches per side) for area sweeps and
    /// eigenvalue exports.
    #[serde(default)]
    pub area_tx_counts: Option<Vec<usize>>,
    #[serde(default)]
    pub tx: SurfaceConfig,
    #[serde(default)]
    pub rx: SurfaceConfig,
}

fn default_patches() -> usize {
    8
}
fn default_patch_wavelengths() -> f64 {
    0.4
}
fn default_frequency() -> OneOrMany<f64> {
    OneOrMany::One(2.4e9)
}
fn default_distance() -> OneOrMany<f64> {
    OneOrMany::One(1.0)
}
fn default_snr() -> OneOrMany<f64> {
    OneOrMany::One(20.0)
}
fn default_convention() -> SnrConvention {
    SnrConvention::Physical
}
fn default_reference_distance() -> f64 {
    1.0
}
fn default_k() -> OneOrMany<usize> {
    OneOrMany::One(1)
}
fn default_rx_chains() -> OneOrMany<RxChains> {
    OneOrMany::One(RxChains::All(AllKeyword::All))
}
/// Amplitude ratio calibrated on the 16×16, 2.4 GHz DoF-versus-distance
/// curve (≈126 modes at 0.5 m).
pub const CALIBRATED_DOF_THRESHOLD: f64 = 0.25;
fn default_dof_threshold() -> f64 {
    CALIBRATED_DOF_THRESHOLD
}
fn default_quad_order() -> usize {
    4
}
fn default_mc_samples() -> usize {
    100_000
}
fn default_seed() -> u64 {
    1
}
fn default_cap() -> usize {
    ghmimo::capacity::DEFAULT_ENUMERATION_CAP
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        fn nonempty<T: Clone>(name: &str, v: &OneOrMany<T>) -> CliResult<()> {
            if v.values().is_empty() {
                Err(CliError::Config(format!("`{name}` must not be empty")))
            } else {
                Ok(())
            }
        }
        nonempty("frequency_hz", &self.frequency_hz)?;
        nonempty("distance_m", &self.distance_m)?;
        nonempty("snr_db", &self.snr_db)?;
        nonempty("k_tx_rf", &self.k_tx_rf)?;
        nonempty("n_rx_rf", &self.n_rx_rf)?;
        if self
            .frequency_hz
            .values()
            .iter()
            .any(|f| !(f.is_finite() && *f > 0.0))
        {
            return bad("frequencies must be positive".into());
        }
        if self
            .distance_m
            .values()
            .iter()
            .any(|d| !(d.is_finite() && *d > 0.0))
        {
            return bad("distances must be positive".into());
        }
        if self.snr_db.values().iter().any(|s| !s.is_finite()) {
            return bad("SNR values must be finite".into());
        }
        if self.k_tx_rf.values().contains(&0) {
            return bad("k_tx_rf must be at least 1".into());
        }
        if self.n_rx_rf.values().contains(&RxChains::Count(0)) {
            return bad("n_rx_rf must be at least 1".into());
        }
        if !(self.dof_threshold > 0.0 && self.dof_threshold <= 1.0) {
            return bad(format!(
                "dof_threshold must lie in (0, 1], got {}",
                self.dof_threshold
            ));
        }
        if self.quad_order == 0 {
            return bad("quad_order must be at least 1".into());
        }
        if self.mc_samples != 0 && self.mc_samples < ghmimo::mc::MIN_SAMPLES {
            return bad(format!(
                "mc_samples must be 0 or at least {}",
                ghmimo::mc::MIN_SAMPLES
            ));
        }
        if self.enumeration_cap == 0 {
            return bad("enumeration_cap must be at least 1".into());
        }
        if !(self.reference_distance_m.is_finite() && self.reference_distance_m > 0.0) {
            return bad("reference_distance_m must be positive".into());
        }
        for (name, s) in [("tx", &self.tx), ("rx", &self.rx)] {
            if s.nx == 0 || s.ny == 0 {
                return bad(format!("[{name}] needs at least one patch per axis"));
            }
            let size_ok = match s.patch_m {
                Some(m) => m.is_finite() && m > 0.0,
                None => s.patch_wavelengths.is_finite() && s.patch_wavelengths > 0.0,
            };
            if !size_ok {
                return bad(format!("[{name}] patch size must be positive"));
            }
        }
        if let Some(counts) = &self.area_tx_counts {
            if counts.is_empty() || counts.contains(&0) {
                return bad("area_tx_counts must be a non-empty list of positive counts".into());
            }
        }
        Ok(())
    }

    /// The single value of a key that may not be swept for this experiment.
    pub fn single<T: Clone>(name: &str, v: &OneOrMany<T>) -> CliResult<T> {
        let vals = v.values();
        if vals.len() == 1 {
            Ok(vals[0].clone())
        } else {
            Err(CliError::Config(format!(
                "`{name}` must be a single value for this experiment, got {} values",
                vals.len()
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = ScenarioConfig::default();
        c.validate().unwrap();
        assert_eq!(c.snr_convention, SnrConvention::Physical);
        assert_eq!(c.dof_threshold, CALIBRATED_DOF_THRESHOLD);
        assert_eq!(c.n_rx_rf.values(), vec![RxChains::All(AllKeyword::All)]);
    }

    #[test]
    fn scalars_and_lists() {
        let c = ScenarioConfig::from_toml(
            r#"
            distance_m = [1, 5]
            snr_db = 10
            n_rx_rf = [1, 4, "all"]
            snr_convention = "normalized"
            [tx]
            nx = 4
            ny = 2
            patch_m = 0.05
            "#,
        )
        .unwrap();
        assert_eq!(c.distance_m.values(), vec![1.0, 5.0]);
        assert_eq!(c.snr_db.values(), vec![10.0]);
        assert_eq!(
            c.n_rx_rf.values(),
            vec![
                RxChains::Count(1),
                RxChains::Count(4),
                RxChains::All(AllKeyword::All)
            ]
        );
        assert_eq!(c.tx.patch_size(0.125), 0.05);
        assert_eq!(c.rx.patch_size(0.125), 0.05);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "distance_m = []",
            "k_tx_rf = 0",
            "snr_convention = \"loud\"",
            "dof_threshold = 0",
            "mc_samples = 10",
            "unknown_key = 1",
            "n_rx_rf = \"some\"",
            "[tx]\nnx = 0",
        ] {
            let err = ScenarioConfig::from_toml(text).unwrap_err();
            assert_eq!(err.category(), "config", "{text}");
        }
    }

    #[test]
    fn single_value_guard() {
        let c = ScenarioConfig::from_toml("snr_db = [1, 2]").unwrap();
        assert!(ScenarioConfig::single("snr_db", &c.snr_db).is_err());
        assert_eq!(
            ScenarioConfig::single("distance_m", &c.distance_m).unwrap(),
            1.0
        );
    }
}
