//! Monte Carlo experiment runner for base-station discovery with designed
//! reference-signal codebooks.
//!
//! A [`Scenario`] (TOML file or built-in preset) fixes the arrays, frame,
//! channel law, topology, codebook and detector. [`Setup::new`] validates it
//! and designs the codebook, [`run_miss_sweep`] estimates the miss
//! probability against the number of searched slots, and
//! [`output::emit_results`] writes the rows as CSV or JSON.
//!
//! Every trial draws from its own random stream keyed by the master seed,
//! the slot count, the condition and the trial index, so results do not
//! depend on the number of worker threads.

pub mod design;
pub mod engine;
pub mod error;
pub mod output;
pub mod scenario;
pub mod sweep;

pub use design::{build_codebook, read_codebook, write_codebook, DesignedCodebook};
pub use engine::Setup;
pub use error::{Result, SimError};
pub use output::{emit_results, Format, ResultRow};
pub use scenario::{EngineKind, Scenario};
pub use sweep::{run_fa_calibration, run_fa_sweep, run_miss_sweep, RunOptions};
