//! Base-station discovery for millimetre-wave links.
//!
//! The crate covers the whole analytical chain of a beamformed
//! reference-signal (RS) search:
//!
//! - [`array`], [`channel`], [`waveform`]: ULA steering vectors, sparse
//!   multipath channels and the sampled observation blocks a UE collects.
//! - [`glrt`]: the GLRT detector, its ML estimates, threshold calibration
//!   and the exhaustive lag sweep.
//! - [`special`], [`ncf`]: regularized incomplete beta, noncentral F
//!   CDF/quantile, miss probability and the fading-aware upper bound.
//! - [`ldp`]: the closed-form large-deviations rate function of the miss
//!   probability with an independent numerical oracle.
//! - [`beam`]: desirable average-gain patterns, sector partitions, slot
//!   allocation and constant/variable-modulus beam synthesis.
//!
//! Everything here is `no_std` + `alloc`; file formats, the CLI and the
//! parallel Monte Carlo harness live in the companion `mmwave-discovery-sim`
//! crate.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` style guards reject NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod array;
pub mod beam;
pub mod channel;
pub mod error;
pub mod glrt;
pub mod ldp;
pub(crate) mod math;
pub mod ncf;
pub mod optim;
pub mod rng;
pub mod sector;
pub mod special;
pub mod waveform;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Complex baseband sample type used throughout.
pub type C64 = Complex64;
