//! Geometry → channel → modal decomposition, with a per-run cache.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use ghmimo::capacity::{bhps_capacity, build_ensemble, nuhpm_asymptotic_capacity, nuhpm_capacity};
use ghmimo::em_channel::{assemble_channel, SurfaceSpec, Wave};
use ghmimo::mc::{mc_mutual_information, MIEstimate};
use ghmimo::modal::decompose_values;
use ghmimo::{Error, ModalChannel64, SurfaceSpec64, Wave64};

use crate::config::{ScenarioConfig, SnrConvention, SurfaceConfig};
use crate::error::{CliError, CliResult};

/// One point of the geometry space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub frequency_hz: f64,
    pub distance_m: f64,
    /// Transmit patch counts; `None` uses the configured `[tx]` surface.
    pub tx_counts: Option<(usize, usize)>,
}

impl Geometry {
    pub fn new(frequency_hz: f64, distance_m: f64) -> Self {
        Self {
            frequency_hz,
            distance_m,
            tx_counts: None,
        }
    }

    pub fn with_tx(mut self, nx: usize, ny: usize) -> Self {
        self.tx_counts = Some((nx, ny));
        self
    }

    pub fn label(&self) -> String {
        let mut s = format!("d={} m, f={} Hz", self.distance_m, self.frequency_hz);
        if let Some((nx, ny)) = self.tx_counts {
            s.push_str(&format!(", tx={nx}x{ny}"));
        }
        s
    }

    fn key(&self) -> (u64, u64, Option<(usize, usize)>) {
        (
            self.frequency_hz.to_bits(),
            self.distance_m.to_bits(),
            self.tx_counts,
        )
    }
}

/// Capacities at one (geometry, K, SNR) point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityPoint {
    pub bhps: f64,
    pub nuhpm_asym: f64,
    pub fast_path: bool,
    pub mc: Option<MIEstimate>,
}

type Cache = Mutex<HashMap<(u64, u64, Option<(usize, usize)>), Arc<ModalChannel64>>>;

pub struct Pipeline {
    pub config: ScenarioConfig,
    cache: Cache,
}

fn surface(
    cfg: &SurfaceConfig,
    counts: (usize, usize),
    wavelength: f64,
    z: f64,
) -> ghmimo::Result<SurfaceSpec64> {
    let l = cfg.patch_size(wavelength);
    SurfaceSpec::contiguous(
        counts.0,
        counts.1,
        l,
        l,
        [cfg.offset_m[0], cfg.offset_m[1], z],
    )
}

impl Pipeline {
    pub fn new(config: ScenarioConfig) -> Self {
        Self {
            config,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn surfaces(&self, g: &Geometry) -> CliResult<(SurfaceSpec64, SurfaceSpec64, Wave64)> {
        let wrap = |e| CliError::core(g.label(), e);
        let wave = Wave::new(g.frequency_hz).map_err(wrap)?;
        let c = &self.config;
        let tx_counts = g.tx_counts.unwrap_or((c.tx.nx, c.tx.ny));
        let tx = surface(&c.tx, tx_counts, wave.wavelength, 0.0).map_err(wrap)?;
        let rx = surface(&c.rx, (c.rx.nx, c.rx.ny), wave.wavelength, g.distance_m).map_err(wrap)?;
        Ok((tx, rx, wave))
    }

    /// Unscaled modal channel (singular values only), computed once per
    /// geometry.
    pub fn raw_modal(&self, g: &Geometry) -> CliResult<Arc<ModalChannel64>> {
        if let Some(m) = self.cache.lock().expect("cache lock").get(&g.key()) {
            return Ok(m.clone());
        }
        let (tx, rx, wave) = self.surfaces(g)?;
        let wrap = |e| CliError::core(g.label(), e);
        let h = assemble_channel(&tx, &rx, &wave, self.config.quad_order).map_err(wrap)?;
        let modal = Arc::new(decompose_values(&h, self.config.dof_threshold).map_err(wrap)?);
        log::debug!("{}: {} retained modes", g.label(), modal.retained_rank());
        self.cache
            .lock()
            .expect("cache lock")
            .insert(g.key(), modal.clone());
        Ok(modal)
    }

    /// Amplitude factor applied to the raw gains under the configured
    /// SNR convention.
    pub fn scale_for(&self, g: &Geometry, convention: SnrConvention) -> CliResult<f64> {
        let top = |m: &Arc<ModalChannel64>| m.singular_values().first().copied().unwrap_or(0.0);
        let reference = match convention {
            SnrConvention::Physical => return Ok(1.0),
            SnrConvention::Normalized => top(&self.raw_modal(g)?),
            SnrConvention::Reference => {
                let base = Geometry::new(g.frequency_hz, self.config.reference_distance_m);
                top(&self.raw_modal(&base)?)
            }
        };
        if reference > 0.0 {
            Ok(1.0 / reference)
        } else {
            Err(CliError::core(g.label(), Error::NoChannel))
        }
    }

    /// Modal channel with the SNR convention applied.
    pub fn modal(&self, g: &Geometry, convention: SnrConvention) -> CliResult<ModalChannel64> {
        let scale = self.scale_for(g, convention)?;
        Ok(self.raw_modal(g)?.scaled(scale))
    }

    /// BHPS and NUHPM capacities, plus a Monte Carlo estimate when
    /// `mc_samples > 0` and the ensemble fits under the cap.
    pub fn capacities(
        &self,
        modal: &ModalChannel64,
        k: usize,
        snr_db: f64,
        mc_samples: usize,
    ) -> ghmimo::Result<CapacityPoint> {
        let noise_var = 10f64.powf(-snr_db / 10.0);
        let (_, bhps) = bhps_capacity(modal, k, noise_var)?;
        let cap = self.config.enumeration_cap;
        if mc_samples == 0 {
            let (nuhpm_asym, fast_path) = nuhpm_capacity(modal, k, noise_var, cap)?;
            return Ok(CapacityPoint {
                bhps,
                nuhpm_asym,
                fast_path,
                mc: None,
            });
        }
        match build_ensemble(modal, k, noise_var, cap) {
            Ok(ens) => Ok(CapacityPoint {
                bhps,
                nuhpm_asym: nuhpm_asymptotic_capacity(&ens),
                fast_path: false,
                mc: Some(mc_mutual_information(&ens, mc_samples, self.config.seed)?),
            }),
            Err(Error::EnsembleTooLarge { .. }) => {
                let (nuhpm_asym, fast_path) = nuhpm_capacity(modal, k, noise_var, cap)?;
                Ok(CapacityPoint {
                    bhps,
                    nuhpm_asym,
                    fast_path,
                    mc: None,
                })
            }
            Err(e) => Err(e),
        }
    }
}
