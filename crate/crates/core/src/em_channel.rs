//! Electromagnetic channel between two planar patch-antenna surfaces.
//!
//! Each patch carries a constant, tri-polarised current. The field it
//! radiates onto a receive patch is the dyadic Green's function integrated
//! over the transmit patch area, scaled by the receive patch area. Stacking
//! the 3×3 blocks for every (receive, transmit) patch pair gives the
//! `3·N_R × 3·N_T` channel matrix.

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::scalar::{count, lit, Real};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub type Point<T> = Vector3<T>;

/// 3×3 complex tensor (one polarisation block).
pub type Dyad<T> = Matrix3<Complex<T>>;

/// Carrier description. Always built from the frequency so the three fields
/// stay consistent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave<T> {
    pub frequency: T,
    pub wavelength: T,
    pub wavenumber: T,
}

impl<T: Real> Wave<T> {
    pub fn new(frequency: T) -> Result<Self> {
        if !(frequency.is_finite() && frequency > T::zero()) {
            return Err(Error::Input(format!(
                "frequency must be positive, got {frequency}"
            )));
        }
        let wavelength = lit::<T>(SPEED_OF_LIGHT) / frequency;
        Ok(Self {
            frequency,
            wavelength,
            wavenumber: T::two_pi() / wavelength,
        })
    }
}

/// Geometry of one rectangular surface of `nx × ny` patches lying in a
/// plane of constant `z`.
///
/// Patch `n = iy * nx + ix` is centred at
/// `origin + [ix * pitch_x, iy * pitch_y, 0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSpec<T> {
    pub nx: usize,
    pub ny: usize,
    pub lx: T,
    pub ly: T,
    pub origin: [T; 3],
    pub pitch_x: T,
    pub pitch_y: T,
}

impl<T: Real> SurfaceSpec<T> {
    pub fn new(
        nx: usize,
        ny: usize,
        lx: T,
        ly: T,
        origin: [T; 3],
        pitch_x: T,
        pitch_y: T,
    ) -> Result<Self> {
        let s = Self {
            nx,
            ny,
            lx,
            ly,
            origin,
            pitch_x,
            pitch_y,
        };
        s.validate()?;
        Ok(s)
    }

    /// Contiguous tiling: pitch equals patch size.
    pub fn contiguous(nx: usize, ny: usize, lx: T, ly: T, origin: [T; 3]) -> Result<Self> {
        Self::new(nx, ny, lx, ly, origin, lx, ly)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::Geometry(
                "surface needs at least one patch per axis".into(),
            ));
        }
        let positive = |v: T| v.is_finite() && v > T::zero();
        if !positive(self.lx) || !positive(self.ly) {
            return Err(Error::Geometry(format!(
                "patch size must be positive, got {} x {}",
                self.lx, self.ly
            )));
        }
        if !(self.pitch_x >= self.lx && self.pitch_y >= self.ly) {
            return Err(Error::Geometry(format!(
                "pitch ({}, {}) smaller than patch size ({}, {}): patches overlap",
                self.pitch_x, self.pitch_y, self.lx, self.ly
            )));
        }
        if self.origin.iter().any(|v| !v.is_finite()) {
            return Err(Error::Geometry("non-finite surface origin".into()));
        }
        Ok(())
    }

    pub fn patch_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn patch_area(&self) -> T {
        self.lx * self.ly
    }

    /// Physical aperture covered by the patches (not the pitch grid).
    pub fn aperture_area(&self) -> T {
        count::<T>(self.patch_count()) * self.patch_area()
    }

    pub fn center(&self, n: usize) -> Point<T> {
        let (ix, iy) = (n % self.nx, n / self.nx);
        Point::new(
            self.origin[0] + count::<T>(ix) * self.pitch_x,
            self.origin[1] + count::<T>(iy) * self.pitch_y,
            self.origin[2],
        )
    }

    pub fn centers(&self) -> Vec<Point<T>> {
        (0..self.patch_count()).map(|n| self.center(n)).collect()
    }

    /// Outer extent `([x_min, x_max], [y_min, y_max])` including patch edges.
    pub fn footprint(&self) -> ([T; 2], [T; 2]) {
        let half_x = self.lx / lit(2.0);
        let half_y = self.ly / lit(2.0);
        let span_x = count::<T>(self.nx - 1) * self.pitch_x;
        let span_y = count::<T>(self.ny - 1) * self.pitch_y;
        (
            [self.origin[0] - half_x, self.origin[0] + span_x + half_x],
            [self.origin[1] - half_y, self.origin[1] + span_y + half_y],
        )
    }

    /// Whether the two surfaces share any point.
    pub fn intersects(&self, other: &Self) -> bool {
        if self.origin[2] != other.origin[2] {
            return false;
        }
        let (ax, ay) = self.footprint();
        let (bx, by) = other.footprint();
        ax[0] < bx[1] && bx[0] < ax[1] && ay[0] < by[1] && by[0] < ay[1]
    }
}

/// Dense `3·N_R × 3·N_T` channel. Block `(n_r, n_t)` occupies rows
/// `3n_r..3n_r+3` and columns `3n_t..3n_t+3`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix<T: Real> {
    entries: DMatrix<Complex<T>>,
}

impl<T: Real> ChannelMatrix<T> {
    /// Wraps an arbitrary matrix, e.g. a synthetic channel for testing.
    pub fn from_matrix(entries: DMatrix<Complex<T>>) -> Self {
        Self { entries }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_matrix(DMatrix::zeros(rows, cols))
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex<T>> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<Complex<T>> {
        self.entries
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn block(&self, n_r: usize, n_t: usize) -> Dyad<T> {
        self.entries
            .fixed_view::<3, 3>(3 * n_r, 3 * n_t)
            .into_owned()
    }

    pub fn frobenius_norm(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Free-space dyadic Green's function between observation point `r` and
/// source point `s`:
///
/// `e^{jκR}/(4πR) · [(I − p̂p̂ᵀ) + j/(κR)·(I − 3p̂p̂ᵀ) − 1/(κR)²·(I − 3p̂p̂ᵀ)]`
/// with `p = r − s`, `R = |p|`.
pub fn green_tensor<T: Real>(r: &Point<T>, s: &Point<T>, wave: &Wave<T>) -> Result<Dyad<T>> {
    let p = r - s;
    let dist = p.norm();
    if dist == T::zero() {
        return Err(Error::Singularity);
    }
    let p_hat = p / dist;
    let kr = wave.wavenumber * dist;
    let inv_kr = T::one() / kr;
    let inv_kr2 = inv_kr * inv_kr;
    let four_pi_r = lit::<T>(4.0) * T::pi() * dist;
    let (sin, cos) = kr.sin_cos();
    let prefactor = Complex::new(cos / four_pi_r, sin / four_pi_r);

    // I·(1 + j/κR − 1/(κR)²) + p̂p̂ᵀ·(−1 − 3j/κR + 3/(κR)²)
    let diag = Complex::new(T::one() - inv_kr2, inv_kr);
    let three = lit::<T>(3.0);
    let outer = Complex::new(three * inv_kr2 - T::one(), -three * inv_kr);
    let mut g = Dyad::<T>::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let mut v = outer * (p_hat[i] * p_hat[j]);
            if i == j {
                v += diag;
            }
            g[(i, j)] = prefactor * v;
        }
    }
    Ok(g)
}

/// Channel block between a receive patch centred at `r_center` and a
/// transmit patch centred at `s_center`, integrating the Green's function
/// over the transmit patch with a tensor Gauss–Legendre rule of
/// `quad_order` points per axis.
///
/// `tx_patch` and `rx_patch` are `(lx, ly)` in meters.
pub fn patch_block<T: Real>(
    r_center: &Point<T>,
    s_center: &Point<T>,
    tx_patch: (T, T),
    rx_patch: (T, T),
    wave: &Wave<T>,
    quad_order: usize,
) -> Result<Dyad<T>> {
    let rule = GaussLegendre::new(quad_order)?;
    patch_block_with(&rule, r_center, s_center, tx_patch, rx_patch, wave)
}

fn patch_block_with<T: Real>(
    rule: &GaussLegendre<T>,
    r_center: &Point<T>,
    s_center: &Point<T>,
    tx_patch: (T, T),
    rx_patch: (T, T),
    wave: &Wave<T>,
) -> Result<Dyad<T>> {
    let half_x = tx_patch.0 / lit(2.0);
    let half_y = tx_patch.1 / lit(2.0);
    let mut acc = Dyad::<T>::zeros();
    for (y, wy) in rule.scaled(half_y) {
        for (x, wx) in rule.scaled(half_x) {
            let s = Point::new(s_center.x - x, s_center.y - y, s_center.z);
            let g = green_tensor(r_center, &s, wave)?;
            acc += g * Complex::from(wx * wy);
        }
    }
    Ok(acc * Complex::from(rx_patch.0 * rx_patch.1))
}

/// Assembles the full channel from `tx` to `rx`.
///
/// Blocks are computed in parallel; each block depends only on its own
/// patch pair, so the result is identical for any thread count.
pub fn assemble_channel<T: Real>(
    tx: &SurfaceSpec<T>,
    rx: &SurfaceSpec<T>,
    wave: &Wave<T>,
    quad_order: usize,
) -> Result<ChannelMatrix<T>> {
    tx.validate()?;
    rx.validate()?;
    if tx.intersects(rx) {
        return Err(Error::Geometry(
            "transmit and receive surfaces overlap".into(),
        ));
    }
    let rule = GaussLegendre::new(quad_order)?;
    let tx_centers = tx.centers();
    let rx_centers = rx.centers();
    let (n_t, n_r) = (tx_centers.len(), rx_centers.len());
    let tx_patch = (tx.lx, tx.ly);
    let rx_patch = (rx.lx, rx.ly);

    let blocks: Vec<Dyad<T>> = (0..n_r * n_t)
        .into_par_iter()
        .map(|idx| {
            let (r, t) = (idx / n_t, idx % n_t);
            patch_block_with(
                &rule,
                &rx_centers[r],
                &tx_centers[t],
                tx_patch,
                rx_patch,
                wave,
            )
        })
        .collect::<Result<_>>()?;

    let mut entries = DMatrix::<Complex<T>>::zeros(3 * n_r, 3 * n_t);
    for (idx, block) in blocks.iter().enumerate() {
        let (r, t) = (idx / n_t, idx % n_t);
        entries
            .fixed_view_mut::<3, 3>(3 * r, 3 * t)
            .copy_from(block);
    }
    Ok(ChannelMatrix { entries })
}
