//! Multifocus image fusion in the transform and spatial domains.
//!
//! The crate is `no_std` and only needs `alloc`. It provides:
//!
//! * [`Image`], a grayscale `f64` raster, plus padding, cropping and block tiling;
//! * an orthonormal 2D discrete wavelet transform ([`wavelet`]);
//! * a contourlet transform built from a Laplacian pyramid and a lifting-based
//!   directional filter bank ([`contourlet`]);
//! * spatial frequency and RMSE measures ([`metrics`]);
//! * four fusion rules behind [`fusion::fuse`];
//! * synthetic multifocus pairs for evaluation ([`synth`]).
//!
//! File formats and the command line live in the `mfusion` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod contourlet;
mod error;
pub mod fusion;
pub mod image;
pub mod metrics;
pub mod synth;
pub mod wavelet;

pub use crate::error::{Error, Result};
pub use crate::image::{BlockGrid, Image};
