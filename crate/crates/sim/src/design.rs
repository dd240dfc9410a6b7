//! Codebook construction from a scenario and the codebook JSON format.
//!
//! A codebook file looks like
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "n_t": 32,
//!   "method": "vm",
//!   "M": 1,
//!   "beams": [[[0.17, 0.0], [0.05, -0.16], ...]],
//!   "slots": [12],
//!   "beta": null,
//!   "target_hash": "9f2c..."
//! }
//! ```
//!
//! Weights are stored as `[re, im]` pairs with shortest round-trip float
//! formatting, so reading a file back yields bit-identical beams.
//! `target_hash` is the SHA-256 of the profile, partition and slot counts
//! the beams were fitted to.

use std::path::Path;

use mmwave_discovery::array::Beamformer;
use mmwave_discovery::beam::pattern::BeamTarget;
use mmwave_discovery::beam::{
    desired_pattern, slot_allocation, synthesize_cm, synthesize_vm, Codebook, PathlossProfile,
    SectorPartition, SynthConfig,
};
use mmwave_discovery::C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SimError};
use crate::scenario::{Allocation, CodebookSpec, Method, Scenario};

pub const CODEBOOK_SCHEMA_VERSION: u32 = 1;

/// A designed codebook together with what it was designed for.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignedCodebook {
    pub method: Method,
    pub codebook: Codebook,
    pub beta: Option<f64>,
    pub target_hash: String,
}

impl DesignedCodebook {
    pub fn label(&self) -> String {
        CodebookSpec {
            method: self.method,
            m: self.codebook.len(),
            beta: self.beta,
            ..CodebookSpec::default()
        }
        .label()
    }
}

/// Equal slot counts, with the remainder going to the first beams.
fn equal_slots(m: usize, j_total: usize) -> Vec<usize> {
    (0..m).map(|i| j_total / m + usize::from(i < j_total % m)).collect()
}

fn target_hash(profile: &PathlossProfile, part: &SectorPartition, slots: &[usize], n_t: usize) -> String {
    let mut h = Sha256::new();
    h.update(format!("n_t={n_t};edges={:?};alphas={:?};", profile.edges(), profile.alphas()));
    for iv in &part.subintervals {
        h.update(format!("[{:?},{:?}]", iv.lo, iv.hi));
    }
    h.update(format!(";slots={slots:?}"));
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Build the codebook a scenario asks for.
///
/// The `random` method has no fixed beams; it returns `None` and trials draw
/// a fresh beam per slot.
pub fn build_codebook(scenario: &Scenario) -> Result<Option<DesignedCodebook>> {
    let spec = &scenario.codebook;
    let n_t = scenario.arrays.n_t;
    let profile = scenario.profile()?;
    let part = SectorPartition::uniform_in_sine(&profile, spec.m)?;
    let slots = match spec.allocation {
        Allocation::Optimized => slot_allocation(&part, spec.j_total)?,
        Allocation::Equal => equal_slots(spec.m, spec.j_total),
    };
    let hash = target_hash(&profile, &part, &slots, n_t);
    let beams = match spec.method {
        Method::Random => return Ok(None),
        Method::Omni => vec![Beamformer::omni(n_t)?],
        Method::Cm | Method::Vm => {
            let targets = desired_pattern(&profile, &part);
            synthesize_all(spec.method, &targets, n_t, spec.design_seed)?
        }
    };
    let mut codebook = Codebook::new(beams, slots)?;
    if let Some(beta) = spec.beta {
        codebook = codebook.with_power_constraint(beta)?;
    }
    Ok(Some(DesignedCodebook {
        method: spec.method,
        codebook,
        beta: spec.beta,
        target_hash: hash,
    }))
}

fn synthesize_all(method: Method, targets: &[BeamTarget], n_t: usize, seed: u64) -> Result<Vec<Beamformer>> {
    let cfg = SynthConfig::default();
    targets
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let s = mmwave_discovery::rng::derive_key(seed, i as u64);
            let (w, _) = match method {
                Method::Vm => synthesize_vm(|phi| t.gain(phi), &t.band, n_t, &cfg, s)?,
                _ => synthesize_cm(|phi| t.gain(phi), &t.band, n_t, &cfg, s)?,
            };
            Ok(w)
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodebookFile {
    schema_version: u32,
    n_t: usize,
    method: Method,
    #[serde(rename = "M")]
    m: usize,
    beams: Vec<Vec<[f64; 2]>>,
    slots: Vec<usize>,
    beta: Option<f64>,
    target_hash: String,
}

pub fn codebook_to_json(cb: &DesignedCodebook) -> String {
    let file = CodebookFile {
        schema_version: CODEBOOK_SCHEMA_VERSION,
        n_t: cb.codebook.n_t(),
        method: cb.method,
        m: cb.codebook.len(),
        beams: cb
            .codebook
            .beams()
            .iter()
            .map(|b| b.weights().iter().map(|w| [w.re, w.im]).collect())
            .collect(),
        slots: cb.codebook.slots().to_vec(),
        beta: cb.beta,
        target_hash: cb.target_hash.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("codebook serializes");
    s.push('\n');
    s
}

pub fn codebook_from_json(text: &str) -> Result<DesignedCodebook> {
    let bad = |detail: String| SimError::Format {
        what: "codebook file",
        detail,
    };
    let f: CodebookFile = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    if f.schema_version != CODEBOOK_SCHEMA_VERSION {
        return Err(bad(format!("unsupported schema_version {}", f.schema_version)));
    }
    if f.beams.len() != f.m {
        return Err(bad(format!("M = {} but {} beams", f.m, f.beams.len())));
    }
    let beams = f
        .beams
        .into_iter()
        .map(|b| {
            if b.len() != f.n_t {
                return Err(bad(format!("beam of length {} for n_t = {}", b.len(), f.n_t)));
            }
            Beamformer::new(b.into_iter().map(|[re, im]| C64::new(re, im)).collect())
                .map_err(|e| bad(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut codebook = Codebook::new(beams, f.slots).map_err(|e| bad(e.to_string()))?;
    if let Some(beta) = f.beta {
        codebook = codebook.with_power_constraint(beta).map_err(|e| bad(e.to_string()))?;
    }
    Ok(DesignedCodebook {
        method: f.method,
        codebook,
        beta: f.beta,
        target_hash: f.target_hash,
    })
}

pub fn write_codebook(cb: &DesignedCodebook, path: &Path) -> Result<()> {
    std::fs::write(path, codebook_to_json(cb)).map_err(|e| SimError::io(path, e))
}

pub fn read_codebook(path: &Path) -> Result<DesignedCodebook> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    codebook_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_split_hands_out_the_remainder_first() {
        assert_eq!(equal_slots(2, 12), vec![6, 6]);
        assert_eq!(equal_slots(4, 10), vec![3, 3, 2, 2]);
    }

    #[test]
    fn omni_codebook_from_a_preset() {
        let s = Scenario::preset("fig3").unwrap();
        let cb = build_codebook(&s).unwrap().unwrap();
        assert_eq!(cb.codebook.len(), 1);
        assert_eq!(cb.target_hash.len(), 64);
        assert_eq!(cb.label(), "omni-m1");
    }

    #[test]
    fn random_method_has_no_fixed_beams() {
        let mut s = Scenario::preset("open").unwrap();
        s.codebook.method = Method::Random;
        assert!(build_codebook(&s).unwrap().is_none());
    }

    #[test]
    fn malformed_files_are_format_errors() {
        let e = codebook_from_json("{\"schema_version\": 1}").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let cb = build_codebook(&Scenario::preset("fig3").unwrap()).unwrap().unwrap();
        let text = codebook_to_json(&cb).replace("\"schema_version\": 1", "\"schema_version\": 7");
        assert!(matches!(codebook_from_json(&text), Err(SimError::Format { .. })));
    }
}
