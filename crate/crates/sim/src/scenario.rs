//! Scenario files.
//!
//! A scenario is a TOML document; every table except `[detector]` has
//! defaults, so a minimal file only lists the searched slot counts:
//!
//! ```toml
//! id = "my-run"
//! [detector]
//! l = [10, 20]
//! ```
//!
//! Keys, with defaults:
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `id` | `"scenario"` | label copied into every result row |
//! | `engine` | `"conditional"` | `waveform`, `statistic` or `conditional` |
//! | `trials` | 20000 | Monte Carlo trials per (L, condition) point |
//! | `seed` | 1 | master seed |
//! | `quantile_trials` | 20000 | samples behind the fading bound (0 disables it) |
//! | `acquisition` | false | waveform engine only: require the full lag sweep to peak at the true lag |
//! | `frame.n_s`, `frame.n_slot` | 100, 5000 | RS length and slot length in samples |
//! | `frame.t_rs_s`, `frame.t_slot_s`, `frame.sample_rate_hz` | unset | alternative to the sample counts |
//! | `arrays.n_t`, `arrays.n_r` | 32, 16 | transmit and receive ULA sizes |
//! | `detector.p_fa` | 0.001 | sweep false-alarm target |
//! | `detector.l` | required | searched slot counts |
//! | `detector.gamma` | unset | fixed threshold on the statistic instead of one per L |
//! | `channel.q_paths` | 6 | paths per slot |
//! | `channel.dominant_ratio_db` | 13.2 | dominant to scatter power ratio; unset makes all paths Rayleigh |
//! | `channel.snr_db` | unset | per-antenna RS SNR list (one condition each); unset uses `[link]` |
//! | `channel.random_direction` | false | draw the dominant AoD uniformly over the sector per trial |
//! | `channel.dominant_aod_deg` | 0 | dominant AoD when not random |
//! | `topology.kind` | `"open"` | `open`, `half-blocked` or `custom` |
//! | `topology.sector_deg` | `[-30, 30]` | covered sector |
//! | `topology.alpha` | unset | pathloss of the open part; unset derives it from `[link]` |
//! | `topology.edges_deg`, `topology.alphas` | unset | piecewise-constant pathloss for `custom` |
//! | `link.rate_bps`, `link.rho`, `link.w_hz`, `link.w_rs_hz` | 10e6, 0.4, 1e9, 10e6 | rate target and bandwidths |
//! | `link.p_t`, `link.sigma2` | 1, 1 | transmit power and noise variance |
//! | `codebook.method` | `"omni"` | `omni`, `cm`, `vm` or `random` |
//! | `codebook.m` | 1 | number of beams |
//! | `codebook.j_total` | 12 | slots per codebook period |
//! | `codebook.allocation` | `"optimized"` | `optimized` or `equal` slot counts |
//! | `codebook.beta` | unset | per-antenna power limit as a fraction of the total |
//! | `codebook.design_seed` | 0 | seed of the beam synthesis |

use std::path::Path;

use mmwave_discovery::beam::{alpha_for_rate, PathlossProfile, RateLink};
use mmwave_discovery::sector::AngularInterval;
use mmwave_discovery::waveform::FrameConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    /// Full sample-level observation blocks and the GLRT statistic.
    Waveform,
    /// The statistic drawn from its exact law given the channel draw.
    Statistic,
    /// The exact miss probability given the channel draw, averaged.
    Conditional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_id")]
    pub id: String,
    #[serde(default = "default_engine")]
    pub engine: EngineKind,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_quantile_trials")]
    pub quantile_trials: u64,
    #[serde(default)]
    pub acquisition: bool,
    #[serde(default)]
    pub frame: FrameSpec,
    #[serde(default)]
    pub arrays: ArraySpec,
    pub detector: DetectorSpec,
    #[serde(default)]
    pub channel: ChannelSpec,
    #[serde(default)]
    pub topology: TopologySpec,
    #[serde(default)]
    pub link: LinkSpec,
    #[serde(default)]
    pub codebook: CodebookSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    #[serde(default = "default_n_s")]
    pub n_s: usize,
    #[serde(default = "default_n_slot")]
    pub n_slot: usize,
    pub t_rs_s: Option<f64>,
    pub t_slot_s: Option<f64>,
    pub sample_rate_hz: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySpec {
    #[serde(default = "default_n_t")]
    pub n_t: usize,
    #[serde(default = "default_n_r")]
    pub n_r: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSpec {
    #[serde(default = "default_p_fa")]
    pub p_fa: f64,
    pub l: Vec<usize>,
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    #[serde(default = "default_q")]
    pub q_paths: usize,
    #[serde(default = "default_ratio")]
    pub dominant_ratio_db: Option<f64>,
    pub snr_db: Option<Vec<f64>>,
    #[serde(default)]
    pub random_direction: bool,
    #[serde(default)]
    pub dominant_aod_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    Open,
    HalfBlocked,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    #[serde(default = "default_topology")]
    pub kind: TopologyKind,
    #[serde(default = "default_sector")]
    pub sector_deg: [f64; 2],
    pub alpha: Option<f64>,
    pub edges_deg: Option<Vec<f64>>,
    pub alphas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSpec {
    #[serde(default = "default_rate")]
    pub rate_bps: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_w")]
    pub w_hz: f64,
    #[serde(default = "default_w_rs")]
    pub w_rs_hz: f64,
    #[serde(default = "one")]
    pub p_t: f64,
    #[serde(default = "one")]
    pub sigma2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Omni,
    Cm,
    Vm,
    Random,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Omni => "omni",
            Method::Cm => "cm",
            Method::Vm => "vm",
            Method::Random => "random",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Allocation {
    Optimized,
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookSpec {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_j")]
    pub j_total: usize,
    #[serde(default = "default_allocation")]
    pub allocation: Allocation,
    pub beta: Option<f64>,
    #[serde(default)]
    pub design_seed: u64,
}

impl CodebookSpec {
    /// Short label such as `vm-m2` or `cm-m1-beta0.03125`.
    pub fn label(&self) -> String {
        let mut s = format!("{}-m{}", self.method.as_str(), self.m);
        if self.allocation == Allocation::Equal && self.m > 1 {
            s.push_str("-equal");
        }
        if let Some(b) = self.beta {
            s.push_str(&format!("-beta{b}"));
        }
        s
    }
}

fn default_id() -> String {
    "scenario".into()
}
fn default_engine() -> EngineKind {
    EngineKind::Conditional
}
fn default_trials() -> u64 {
    20_000
}
fn default_seed() -> u64 {
    1
}
fn default_quantile_trials() -> u64 {
    20_000
}
fn default_n_s() -> usize {
    100
}
fn default_n_slot() -> usize {
    5000
}
fn default_n_t() -> usize {
    32
}
fn default_n_r() -> usize {
    16
}
fn default_p_fa() -> f64 {
    1e-3
}
fn default_q() -> usize {
    6
}
fn default_ratio() -> Option<f64> {
    Some(13.2)
}
fn default_topology() -> TopologyKind {
    TopologyKind::Open
}
fn default_sector() -> [f64; 2] {
    [-30.0, 30.0]
}
fn default_rate() -> f64 {
    10e6
}
fn default_rho() -> f64 {
    0.4
}
fn default_w() -> f64 {
    1e9
}
fn default_w_rs() -> f64 {
    10e6
}
fn one() -> f64 {
    1.0
}
fn default_method() -> Method {
    Method::Omni
}
fn default_m() -> usize {
    1
}
fn default_j() -> usize {
    12
}
fn default_allocation() -> Allocation {
    Allocation::Optimized
}

impl Default for FrameSpec {
    fn default() -> Self {
        Self {
            n_s: default_n_s(),
            n_slot: default_n_slot(),
            t_rs_s: None,
            t_slot_s: None,
            sample_rate_hz: None,
        }
    }
}

impl Default for ArraySpec {
    fn default() -> Self {
        Self {
            n_t: default_n_t(),
            n_r: default_n_r(),
        }
    }
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self {
            q_paths: default_q(),
            dominant_ratio_db: default_ratio(),
            snr_db: None,
            random_direction: false,
            dominant_aod_deg: 0.0,
        }
    }
}

impl Default for TopologySpec {
    fn default() -> Self {
        Self {
            kind: default_topology(),
            sector_deg: default_sector(),
            alpha: None,
            edges_deg: None,
            alphas: None,
        }
    }
}

impl Default for LinkSpec {
    fn default() -> Self {
        Self {
            rate_bps: default_rate(),
            rho: default_rho(),
            w_hz: default_w(),
            w_rs_hz: default_w_rs(),
            p_t: 1.0,
            sigma2: 1.0,
        }
    }
}

impl Default for CodebookSpec {
    fn default() -> Self {
        Self {
            method: default_method(),
            m: default_m(),
            j_total: default_j(),
            allocation: default_allocation(),
            beta: None,
            design_seed: 0,
        }
    }
}

/// Names accepted by [`Scenario::preset`].
pub const PRESETS: [&str; 3] = ["fig3", "open", "half-blocked"];

impl Scenario {
    /// Built-in scenarios.
    ///
    /// * `fig3`: omni transmission at −23 dB RS SNR, L = 16…34.
    /// * `open`: VM single-beam codebook over the open 60° sector.
    /// * `half-blocked`: two VM beams with optimized slots, lower half
    ///   blocked.
    pub fn preset(name: &str) -> Result<Self> {
        let base = Scenario {
            id: name.to_string(),
            engine: EngineKind::Conditional,
            trials: default_trials(),
            seed: default_seed(),
            quantile_trials: default_quantile_trials(),
            acquisition: false,
            frame: FrameSpec::default(),
            arrays: ArraySpec::default(),
            detector: DetectorSpec {
                p_fa: default_p_fa(),
                l: vec![5, 10, 15, 20, 25],
                gamma: None,
            },
            channel: ChannelSpec::default(),
            topology: TopologySpec::default(),
            link: LinkSpec::default(),
            codebook: CodebookSpec::default(),
        };
        match name {
            "fig3" => Ok(Scenario {
                quantile_trials: 100_000,
                detector: DetectorSpec {
                    l: (16..=34).step_by(2).collect(),
                    ..base.detector.clone()
                },
                channel: ChannelSpec {
                    snr_db: Some(vec![-23.0]),
                    ..ChannelSpec::default()
                },
                topology: TopologySpec {
                    alpha: Some(1.0),
                    ..TopologySpec::default()
                },
                ..base
            }),
            "open" => Ok(Scenario {
                channel: ChannelSpec {
                    random_direction: true,
                    ..ChannelSpec::default()
                },
                codebook: CodebookSpec {
                    method: Method::Vm,
                    ..CodebookSpec::default()
                },
                ..base
            }),
            "half-blocked" => Ok(Scenario {
                channel: ChannelSpec {
                    random_direction: true,
                    ..ChannelSpec::default()
                },
                topology: TopologySpec {
                    kind: TopologyKind::HalfBlocked,
                    ..TopologySpec::default()
                },
                codebook: CodebookSpec {
                    method: Method::Vm,
                    m: 2,
                    ..CodebookSpec::default()
                },
                ..base
            }),
            _ => Err(SimError::config(format!(
                "unknown preset `{name}` (known: {})",
                PRESETS.join(", ")
            ))),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| SimError::config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// A preset name or a path to a TOML file.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if PRESETS.contains(&name_or_path) {
            return Self::preset(name_or_path);
        }
        let path = Path::new(name_or_path);
        let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Check every field; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SimError::config(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be positive");
        }
        if self.quantile_trials != 0
            && self.quantile_trials < mmwave_discovery::ncf::MIN_QUANTILE_TRIALS as u64
        {
            return bad("quantile_trials must be 0 or at least 10000");
        }
        if self.detector.l.is_empty() || self.detector.l.contains(&0) {
            return bad("detector.l must be a nonempty list of positive slot counts");
        }
        if !(self.detector.p_fa > 0.0 && self.detector.p_fa < 1.0) {
            return bad("detector.p_fa must lie in (0, 1)");
        }
        if let Some(g) = self.detector.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return bad("detector.gamma must be positive");
            }
        }
        if self.arrays.n_t == 0 || self.arrays.n_r == 0 {
            return bad("array sizes must be positive");
        }
        self.frame()?;
        if self.channel.q_paths == 0 {
            return bad("channel.q_paths must be positive");
        }
        if let Some(snr) = &self.channel.snr_db {
            if snr.is_empty() || snr.iter().any(|x| !x.is_finite()) {
                return bad("channel.snr_db must be a nonempty list of finite values");
            }
        }
        if !(self.link.p_t > 0.0 && self.link.sigma2 > 0.0) {
            return bad("link.p_t and link.sigma2 must be positive");
        }
        self.profile()?;
        let cb = &self.codebook;
        if cb.m == 0 {
            return bad("codebook.m must be positive");
        }
        if cb.j_total < cb.m {
            return bad("codebook.j_total must be at least codebook.m");
        }
        if matches!(cb.method, Method::Omni | Method::Random) && cb.m != 1 {
            return bad("omni and random codebooks take m = 1");
        }
        if let Some(b) = cb.beta {
            if !(b * self.arrays.n_t as f64 >= 1.0 - 1e-12 && b <= 1.0) {
                return bad("codebook.beta must lie in [1/n_t, 1]");
            }
        }
        if self.acquisition && self.engine != EngineKind::Waveform {
            return bad("acquisition mode needs the waveform engine");
        }
        Ok(())
    }

    pub fn frame(&self) -> Result<FrameConfig> {
        let f = &self.frame;
        let r = match (f.t_rs_s, f.t_slot_s, f.sample_rate_hz) {
            (None, None, None) => FrameConfig::from_samples(f.n_slot, f.n_s),
            (Some(t_rs), Some(t_slot), Some(fs)) => FrameConfig::from_seconds(t_slot, t_rs, fs),
            _ => {
                return Err(SimError::config(
                    "frame.t_rs_s, frame.t_slot_s and frame.sample_rate_hz go together",
                ))
            }
        };
        r.map_err(|e| SimError::config(format!("frame: {e}")))
    }

    pub fn sector(&self) -> Result<AngularInterval> {
        let [lo, hi] = self.topology.sector_deg;
        AngularInterval::from_degrees(lo, hi)
            .map_err(|e| SimError::config(format!("topology.sector_deg: {e}")))
    }

    pub fn rate_link(&self) -> RateLink {
        RateLink {
            rho: self.link.rho,
            w: self.link.w_hz,
            w_rs: self.link.w_rs_hz,
            p_t: self.link.p_t,
            sigma2: self.link.sigma2,
            g_t_max: self.arrays.n_t as f64,
            g_r_max: self.arrays.n_r as f64,
        }
    }

    /// Pathloss of the unobstructed part of the sector.
    pub fn base_alpha(&self) -> Result<f64> {
        match self.topology.alpha {
            Some(a) if a > 0.0 && a.is_finite() => Ok(a),
            Some(_) => Err(SimError::config("topology.alpha must be positive")),
            None => alpha_for_rate(self.link.rate_bps, &self.rate_link())
                .map_err(|e| SimError::config(format!("link: {e}"))),
        }
    }

    pub fn profile(&self) -> Result<PathlossProfile> {
        let sector = self.sector()?;
        let t = &self.topology;
        let p = match t.kind {
            TopologyKind::Open => PathlossProfile::uniform(sector, self.base_alpha()?),
            TopologyKind::HalfBlocked => PathlossProfile::half_blocked(sector, self.base_alpha()?),
            TopologyKind::Custom => {
                let (Some(e), Some(a)) = (&t.edges_deg, &t.alphas) else {
                    return Err(SimError::config(
                        "custom topology needs topology.edges_deg and topology.alphas",
                    ));
                };
                PathlossProfile::from_table(e.iter().map(|d| d.to_radians()).collect(), a.clone())
            }
        };
        p.map_err(|e| SimError::config(format!("topology: {e}")))
    }

    /// Condition labels and their noise variances, in row order.
    pub fn conditions(&self) -> Result<Vec<Condition>> {
        match &self.channel.snr_db {
            Some(list) => {
                let alpha = self.base_alpha()?;
                Ok(list
                    .iter()
                    .map(|&db| Condition {
                        label: format!("snr_db={db}"),
                        // per-antenna RS SNR of an omni transmission:
                        // P_T·E‖h‖²/(N_R σ²) with E‖h‖² = N_R/α
                        sigma2: self.link.p_t / (alpha * 10f64.powf(db / 10.0)),
                    })
                    .collect())
            }
            None => Ok(vec![Condition {
                label: self.codebook.label(),
                sigma2: self.link.sigma2,
            }]),
        }
    }
}

/// One noise setting of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub label: String,
    pub sigma2: f64,
}
