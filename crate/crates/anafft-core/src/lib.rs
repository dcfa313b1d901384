//! Simulation of Fourier transforms executed as cascades of small DFTs on
//! analog in-memory computing crossbars.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`], [`dft`], [`plan`] and [`reshape`]: exact complex math, DFT
//!   matrices, factorization planning and the index maps used by the
//!   Cooley-Tukey and vector-radix decompositions.
//! * [`device`]: the crossbar model (conductance programming, bit-serial
//!   input, analog MVM with read noise, IR drop and ADC quantization).
//! * [`engine`]: multi-stage analog FFT execution with requantization of
//!   intermediates and per-stage traces.
//! * [`cost`]: closed-form ADC/twiddle/buffer counts and energy estimates.
//! * [`sigproc`], [`metrics`], [`fixtures`], [`presets`]: spectrogram and
//!   image pipelines, quality metrics, deterministic test signals and the
//!   conductance presets of the measured experiments.
//!
//! The crate is `no_std` + `alloc`. Enable `parallel` for rayon-backed
//! execution of independent DFTs within a stage; results are identical with
//! and without it because every noise draw is keyed by position, not by
//! execution order.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod cost;
pub mod device;
pub mod dft;
pub mod engine;
mod error;
pub mod fixtures;
mod math;
pub mod metrics;
pub mod plan;
pub mod presets;
pub mod reshape;
pub mod rng;
pub mod sigproc;
pub mod tensor;

pub use error::Error;
pub use num_complex::Complex64 as C64;

pub type Result<T> = core::result::Result<T, Error>;
