//! Holographic MIMO with a few transmit RF chains.
//!
//! Pipeline: [`em_channel`] builds the tri-polarised channel between two
//! patch-antenna surfaces from the dyadic Green's function, [`modal`]
//! diagonalises it, [`capacity`] evaluates best-pattern selection (BHPS)
//! and non-uniform holographic pattern modulation (NUHPM), and [`mc`]
//! estimates the exact NUHPM mutual information by Monte Carlo.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below are the instantiations the CLI uses.

pub mod capacity;
pub mod em_channel;
pub mod error;
pub mod mc;
pub mod modal;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SurfaceSpec64 = em_channel::SurfaceSpec<f64>;
pub type Wave64 = em_channel::Wave<f64>;
pub type ChannelMatrix64 = em_channel::ChannelMatrix<f64>;
pub type ModalChannel64 = modal::ModalChannel<f64>;
pub type Pattern64 = capacity::Pattern<f64>;
pub type PatternEnsemble64 = capacity::PatternEnsemble<f64>;

pub type SurfaceSpec32 = em_channel::SurfaceSpec<f32>;
pub type Wave32 = em_channel::Wave<f32>;
pub type ChannelMatrix32 = em_channel::ChannelMatrix<f32>;
pub type ModalChannel32 = modal::ModalChannel<f32>;
pub type PatternEnsemble32 = capacity::PatternEnsemble<f32>;
