//! The sweep experiments. Each returns its tables in memory; the caller
//! decides where they go.

use std::collections::BTreeMap;

use ghmimo::modal::eig_spectrum;
use ghmimo::{Error, ModalChannel64};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{RxChains, ScenarioConfig, SnrConvention};
use crate::error::{CliError, CliResult};
use crate::output::{cell, num, Output, Table};
use crate::pipeline::{CapacityPoint, Geometry, Pipeline};

pub const DOF_HEADER: &[&str] = &["distance_m", "frequency_hz", "dof"];
pub const SNR_HEADER: &[&str] = &[
    "snr_db",
    "se_bhps",
    "se_nuhpm_asym",
    "se_nuhpm_mc",
    "mc_stderr",
];
pub const DISTANCE_HEADER: &[&str] = &["distance_m", "se_bhps", "se_nuhpm"];
pub const DOF_SE_HEADER: &[&str] = &["distance_m", "dof", "se_bhps", "se_nuhpm"];
pub const AREA_HEADER: &[&str] = &["area_wavelengths_sq", "se_bhps", "se_nuhpm"];
pub const RX_RF_HEADER: &[&str] = &["n_rx_rf", "se_nuhpm", "se_bhps"];
pub const TX_RF_HEADER: &[&str] = &["snr_db", "k", "se_bhps", "se_nuhpm"];
pub const EIG_HEADER: &[&str] = &["index", "sigma_sq"];

#[derive(Debug, Default)]
pub struct Experiment {
    pub outputs: Vec<Output>,
    pub notes: BTreeMap<String, serde_json::Value>,
}

impl From<Vec<Output>> for Experiment {
    fn from(outputs: Vec<Output>) -> Self {
        Self {
            outputs,
            notes: BTreeMap::new(),
        }
    }
}

fn single<T: Clone>(name: &str, v: &crate::config::OneOrMany<T>) -> CliResult<T> {
    ScenarioConfig::single(name, v)
}

/// Applies the receive-chain limit, if any.
fn observed(modal: ModalChannel64, rx: RxChains) -> ModalChannel64 {
    match rx.limit() {
        Some(n) => modal.truncated(n),
        None => modal,
    }
}

/// Turns a per-row result into cells: too few modes for `K` leaves the
/// row's values empty with a warning, anything else fails the table.
fn row_point(
    res: ghmimo::Result<CapacityPoint>,
    what: String,
    warnings: &mut Vec<String>,
) -> CliResult<Option<CapacityPoint>> {
    match res {
        Ok(p) => {
            if p.fast_path {
                warnings.push(format!(
                    "{what}: ensemble above enumeration cap, equal-power fast path used"
                ));
            }
            Ok(Some(p))
        }
        Err(e @ Error::InsufficientDof { .. }) => {
            warnings.push(format!("{what}: {e}"));
            Ok(None)
        }
        Err(e) => Err(CliError::core(what, e)),
    }
}

fn collect(name: String, build: impl FnOnce(&mut Vec<String>) -> CliResult<Table>) -> Output {
    let mut warnings = Vec::new();
    match build(&mut warnings) {
        Ok(t) => Output::ok(name, t, warnings),
        Err(e) => Output::failed(name, e),
    }
}

/// Retained DoF for every (distance, frequency) pair.
pub fn run_dof_sweep(p: &Pipeline) -> Experiment {
    let c = &p.config;
    let geoms: Vec<Geometry> = c
        .frequency_hz
        .values()
        .into_iter()
        .flat_map(|f| {
            c.distance_m
                .values()
                .into_iter()
                .map(move |d| Geometry::new(f, d))
        })
        .collect();
    let dofs: Vec<CliResult<usize>> = geoms
        .par_iter()
        .map(|g| p.raw_modal(g).map(|m| m.retained_rank()))
        .collect();
    let out = collect("dof.csv".into(), |_| {
        let mut t = Table::new(DOF_HEADER);
        for (g, dof) in geoms.iter().zip(dofs) {
            t.push(vec![
                num(g.distance_m),
                num(g.frequency_hz),
                dof?.to_string(),
            ]);
        }
        Ok(t)
    });
    vec![out].into()
}

/// Capacity versus SNR, one table per distance.
pub fn run_snr_sweep(p: &Pipeline) -> Experiment {
    let c = &p.config;
    let mut outputs = Vec::new();
    for d in c.distance_m.values() {
        outputs.push(collect(format!("snr_d{}.csv", num(d)), |warnings| {
            let f = single("frequency_hz", &c.frequency_hz)?;
            let k = single("k_tx_rf", &c.k_tx_rf)?;
            let rx = single("n_rx_rf", &c.n_rx_rf)?;
            let g = Geometry::new(f, d);
            let modal = observed(p.modal(&g, c.snr_convention)?, rx);
            let snrs = c.snr_db.values();
            let points: Vec<_> = snrs
                .par_iter()
                .map(|&s| p.capacities(&modal, k, s, c.mc_samples))
                .collect();
            let mut t = Table::new(SNR_HEADER);
            for (&s, res) in snrs.iter().zip(points) {
                let what = format!("{}, snr={s} dB", g.label());
                let pt = row_point(res, what.clone(), warnings)?;
                if let Some(pt) = pt {
                    if c.mc_samples > 0 && pt.mc.is_none() {
                        warnings.push(format!("{what}: Monte Carlo skipped"));
                    }
                }
                t.push(vec![
                    num(s),
                    cell(pt.map(|x| x.bhps)),
                    cell(pt.map(|x| x.nuhpm_asym)),
                    cell(pt.and_then(|x| x.mc).map(|m| m.value)),
                    cell(pt.and_then(|x| x.mc).map(|m| m.stderr)),
                ]);
            }
            Ok(t)
        }));
    }
    outputs.into()
}

struct DistanceRow {
    distance: f64,
    dof: usize,
    point: Option<CapacityPoint>,
}

fn distance_rows(
    p: &Pipeline,
    convention: SnrConvention,
    warnings: &mut Vec<String>,
) -> CliResult<Vec<DistanceRow>> {
    let c = &p.config;
    let f = single("frequency_hz", &c.frequency_hz)?;
    let k = single("k_tx_rf", &c.k_tx_rf)?;
    let rx = single("n_rx_rf", &c.n_rx_rf)?;
    let snr = single("snr_db", &c.snr_db)?;
    let dists = c.distance_m.values();
    let computed: Vec<CliResult<(usize, ghmimo::Result<CapacityPoint>)>> = dists
        .par_iter()
        .map(|&d| {
            let modal = observed(p.modal(&Geometry::new(f, d), convention)?, rx);
            Ok((modal.retained_rank(), p.capacities(&modal, k, snr, 0)))
        })
        .collect();
    dists
        .iter()
        .zip(computed)
        .map(|(&d, r)| {
            let (dof, res) = r?;
            let point = row_point(res, Geometry::new(f, d).label(), warnings)?;
            Ok(DistanceRow {
                distance: d,
                dof,
                point,
            })
        })
        .collect()
}

fn pct_gain(near: f64, far: f64) -> f64 {
    (near / far - 1.0) * 100.0
}

/// Capacity versus distance (`distance.csv`) and versus the retained DoF
/// at each distance (`dof_se.csv`). The manifest notes also carry the
/// farthest → nearest gains under every SNR convention, which only costs a
/// rescaling of the cached spectra.
pub fn run_distance_sweep(p: &Pipeline) -> Experiment {
    let mut warnings = Vec::new();
    let rows = distance_rows(p, p.config.snr_convention, &mut warnings);
    let rows = match rows {
        Ok(r) => r,
        Err(e) => {
            let dependent = CliError::Dependent {
                output: "distance.csv".into(),
                category: e.category(),
            };
            return vec![
                Output::failed("distance.csv", e),
                Output::failed("dof_se.csv", dependent),
            ]
            .into();
        }
    };
    let mut dist = Table::new(DISTANCE_HEADER);
    let mut dof = Table::new(DOF_SE_HEADER);
    for r in &rows {
        let b = cell(r.point.map(|x| x.bhps));
        let n = cell(r.point.map(|x| x.nuhpm_asym));
        dist.push(vec![num(r.distance), b.clone(), n.clone()]);
        dof.push(vec![num(r.distance), r.dof.to_string(), b, n]);
    }
    let mut exp: Experiment = vec![
        Output::ok("distance.csv", dist, warnings),
        Output::ok("dof_se.csv", dof, Vec::new()),
    ]
    .into();

    let mut gains = serde_json::Map::new();
    for conv in [
        SnrConvention::Physical,
        SnrConvention::Normalized,
        SnrConvention::Reference,
    ] {
        let mut ignore = Vec::new();
        let Ok(rows) = distance_rows(p, conv, &mut ignore) else {
            continue;
        };
        let far = rows.iter().max_by(|a, b| a.distance.total_cmp(&b.distance));
        let near = rows.iter().min_by(|a, b| a.distance.total_cmp(&b.distance));
        if let (Some(far), Some(near)) = (far, near) {
            if let (Some(fp), Some(np)) = (far.point, near.point) {
                gains.insert(
                    conv.to_string(),
                    json!({
                        "from_m": far.distance,
                        "to_m": near.distance,
                        "bhps_gain_pct": pct_gain(np.bhps, fp.bhps),
                        "nuhpm_gain_pct": pct_gain(np.nuhpm_asym, fp.nuhpm_asym),
                    }),
                );
            }
        }
    }
    exp.notes.insert(
        "gain_by_convention".into(),
        serde_json::Value::Object(gains),
    );
    exp
}

fn area_settings(c: &ScenarioConfig) -> Vec<(usize, usize)> {
    match &c.area_tx_counts {
        Some(v) => v.iter().map(|&n| (n, n)).collect(),
        None => vec![(c.tx.nx, c.tx.ny)],
    }
}

/// Capacity versus transmit aperture, one table per distance.
pub fn run_area_sweep(p: &Pipeline) -> Experiment {
    let c = &p.config;
    let mut outputs = Vec::new();
    for d in c.distance_m.values() {
        outputs.push(collect(format!("area_d{}.csv", num(d)), |warnings| {
            if c.area_tx_counts.is_none() {
                return Err(CliError::Config("area sweep needs `area_tx_counts`".into()));
            }
            let f = single("frequency_hz", &c.frequency_hz)?;
            let k = single("k_tx_rf", &c.k_tx_rf)?;
            let rx = single("n_rx_rf", &c.n_rx_rf)?;
            let snr = single("snr_db", &c.snr_db)?;
            let settings = area_settings(c);
            let computed: Vec<CliResult<(f64, ghmimo::Result<CapacityPoint>)>> = settings
                .par_iter()
                .map(|&(nx, ny)| {
                    let g = Geometry::new(f, d).with_tx(nx, ny);
                    let (tx, _, wave) = p.surfaces(&g)?;
                    let area = tx.aperture_area() / (wave.wavelength * wave.wavelength);
                    let modal = observed(p.modal(&g, c.snr_convention)?, rx);
                    Ok((area, p.capacities(&modal, k, snr, 0)))
                })
                .collect();
            let mut t = Table::new(AREA_HEADER);
            for (&(nx, ny), r) in settings.iter().zip(computed) {
                let (area, res) = r?;
                let pt = row_point(res, Geometry::new(f, d).with_tx(nx, ny).label(), warnings)?;
                t.push(vec![
                    num(area),
                    cell(pt.map(|x| x.bhps)),
                    cell(pt.map(|x| x.nuhpm_asym)),
                ]);
            }
            Ok(t)
        }));
    }
    outputs.into()
}

/// Receive-chain sweeps (`rf_rx_d*_snr*_k*.csv`, one per distance, SNR and
/// K) and the transmit-chain sweep (`rf_tx_d*.csv`, one per distance, all
/// receive patterns observed).
pub fn run_rf_sweep(p: &Pipeline) -> Experiment {
    let c = &p.config;
    let mut outputs = Vec::new();
    let snrs = c.snr_db.values();
    let ks = c.k_tx_rf.values();
    let chains = c.n_rx_rf.values();
    for d in c.distance_m.values() {
        let full = single("frequency_hz", &c.frequency_hz).and_then(|f| {
            p.modal(&Geometry::new(f, d), c.snr_convention)
                .map(|m| (f, m))
        });
        let (f, modal) = match full {
            Ok(v) => v,
            Err(e) => {
                outputs.push(Output::failed(format!("rf_tx_d{}.csv", num(d)), e));
                continue;
            }
        };
        let label = Geometry::new(f, d).label();
        for &s in &snrs {
            for &k in &ks {
                let name = format!("rf_rx_d{}_snr{}_k{k}.csv", num(d), num(s));
                outputs.push(collect(name, |warnings| {
                    let points: Vec<_> = chains
                        .par_iter()
                        .map(|&rx| {
                            let m = observed(modal.clone(), rx);
                            (m.retained_rank(), p.capacities(&m, k, s, 0))
                        })
                        .collect();
                    let mut t = Table::new(RX_RF_HEADER);
                    for (&rx, (rank, res)) in chains.iter().zip(points) {
                        let what = format!("{label}, snr={s} dB, K={k}, n_rx_rf={rx}");
                        let pt = row_point(res, what, warnings)?;
                        let n = rx.limit().unwrap_or(rank);
                        t.push(vec![
                            n.to_string(),
                            cell(pt.map(|x| x.nuhpm_asym)),
                            cell(pt.map(|x| x.bhps)),
                        ]);
                    }
                    Ok(t)
                }));
            }
        }
        outputs.push(collect(format!("rf_tx_d{}.csv", num(d)), |warnings| {
            let grid: Vec<(f64, usize)> = snrs
                .iter()
                .flat_map(|&s| ks.iter().map(move |&k| (s, k)))
                .collect();
            let points: Vec<_> = grid
                .par_iter()
                .map(|&(s, k)| p.capacities(&modal, k, s, 0))
                .collect();
            let mut t = Table::new(TX_RF_HEADER);
            for (&(s, k), res) in grid.iter().zip(points) {
                let pt = row_point(res, format!("{label}, snr={s} dB, K={k}"), warnings)?;
                t.push(vec![
                    num(s),
                    k.to_string(),
                    cell(pt.map(|x| x.bhps)),
                    cell(pt.map(|x| x.nuhpm_asym)),
                ]);
            }
            Ok(t)
        }));
    }
    outputs.into()
}

/// Squared singular values under the configured convention, one table
/// per (transmit size, distance).
pub fn run_eig_export(p: &Pipeline) -> Experiment {
    let c = &p.config;
    let mut outputs = Vec::new();
    for d in c.distance_m.values() {
        for (nx, ny) in area_settings(c) {
            let name = format!("eig_tx{nx}x{ny}_d{}.csv", num(d));
            outputs.push(collect(name, |_| {
                let f = single("frequency_hz", &c.frequency_hz)?;
                let modal = p.modal(&Geometry::new(f, d).with_tx(nx, ny), c.snr_convention)?;
                let mut t = Table::new(EIG_HEADER);
                for (i, s2) in eig_spectrum(&modal) {
                    t.push(vec![i.to_string(), num(s2)]);
                }
                Ok(t)
            }));
        }
    }
    outputs.into()
}
