//! Reference-signal codebook design.
//!
//! The design has three steps: build the desirable average-gain pattern from
//! a pathloss profile, split the sector into subintervals each served by one
//! synthesized beam, and give every beam a share of the slots proportional to
//! the energy its subinterval needs.

pub mod codebook;
pub mod pattern;
pub mod synth;

pub use codebook::{apply_power_constraint, avg_codebook_gain, random_codebook, Codebook, PoweredBeam};
pub use pattern::{
    alpha_for_rate, desired_pattern, global_target, pathloss_from_rate, slot_allocation,
    BeamTarget, PathlossProfile, RateLink, SectorPartition,
};
pub use synth::{synthesize_cm, synthesize_vm, BeamKind, SynthConfig, SynthesisReport};
