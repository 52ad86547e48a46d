//! Wavelet synchrosqueezing.
//!
//! The analysis chain is: [`signal`] (padding, resampling) → [`cwt::forward`]
//! → [`phase::phase_transform`] → [`squeeze::synchrosqueeze`] →
//! [`reconstruct`] (ridges and band inversion). [`pipeline::analyze`] wires
//! the chain together with the default choices used by the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cwt;
mod error;
pub mod grid;
pub mod io;
pub mod phase;
pub mod pipeline;
pub mod reconstruct;
pub mod signal;
pub mod squeeze;
pub mod testsignals;
pub mod wavelets;

pub use error::{Result, SynsqError};
pub use rustfft::num_complex::Complex64;

pub use cwt::CwtPlane;
pub use phase::PhasePlane;
pub use pipeline::{analyze, Analysis, Component, Gamma, Pad, PipelineConfig, RidgeParams};
pub use reconstruct::Ridge;
pub use signal::{NonuniformSeries, UniformSeries};
pub use squeeze::SstPlane;
pub use wavelets::{WaveletKind, WaveletSpec};
