//! Pathloss profiles, sector partitions and desirable gain patterns.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::sector::AngularInterval;

/// Piecewise-constant pathloss `α(φ)` over a sector.
///
/// Segment `i` covers `[edges[i], edges[i+1]]`; at an interior edge the
/// segment to the left applies.
#[derive(Debug, Clone, PartialEq)]
pub struct PathlossProfile {
    sector: AngularInterval,
    edges: Vec<f64>,
    alphas: Vec<f64>,
}

impl PathlossProfile {
    /// Profile from segment edges (radians, increasing) and per-segment α.
    pub fn from_table(edges: Vec<f64>, alphas: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || alphas.len() + 1 != edges.len() {
            return Err(Error::Shape {
                what: "pathloss table: edges vs values",
                expected: alphas.len() + 1,
                found: edges.len(),
            });
        }
        if edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain("pathloss table edges must increase"));
        }
        if alphas.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::Domain("pathloss must be positive on the sector"));
        }
        let sector = AngularInterval::new(edges[0], edges[edges.len() - 1])?;
        Ok(Self {
            sector,
            edges,
            alphas,
        })
    }

    /// Constant pathloss over the sector.
    pub fn uniform(sector: AngularInterval, alpha: f64) -> Result<Self> {
        Self::from_table(alloc::vec![sector.lo, sector.hi], alloc::vec![alpha])
    }

    /// Sector whose directions at or below 0 rad are blocked: `α/2` there and
    /// `α` above.
    pub fn half_blocked(sector: AngularInterval, alpha: f64) -> Result<Self> {
        if !(sector.lo < 0.0 && sector.hi > 0.0) {
            return Err(Error::Domain("half-blocked sector must straddle broadside"));
        }
        Self::from_table(
            alloc::vec![sector.lo, 0.0, sector.hi],
            alloc::vec![alpha / 2.0, alpha],
        )
    }

    /// Sample a pathloss function on `n` segments of equal sine-space width.
    pub fn from_fn<F: FnMut(f64) -> f64>(sector: AngularInterval, mut f: F, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("need at least one segment"));
        }
        let (u0, u1) = (sector.u_lo(), sector.u_hi());
        let edges: Vec<f64> = (0..=n)
            .map(|i| {
                if i == 0 {
                    sector.lo
                } else if i == n {
                    sector.hi
                } else {
                    math::asin(u0 + (u1 - u0) * i as f64 / n as f64)
                }
            })
            .collect();
        let alphas = (0..n)
            .map(|i| {
                let um = u0 + (u1 - u0) * (i as f64 + 0.5) / n as f64;
                f(math::asin(um))
            })
            .collect();
        Self::from_table(edges, alphas)
    }

    pub fn sector(&self) -> AngularInterval {
        self.sector
    }
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }
    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// `α(φ)`; `None` outside the sector.
    pub fn alpha_at(&self, phi: f64) -> Option<f64> {
        if !self.sector.contains(phi) {
            return None;
        }
        let i = self.edges[1..].iter().position(|&e| phi <= e).unwrap_or(self.alphas.len() - 1);
        Some(self.alphas[i])
    }

    /// Sine-space integral of `α` over `[lo, hi] ∩ sector`.
    pub fn alpha_integral(&self, lo: f64, hi: f64) -> f64 {
        let mut acc = 0.0;
        for (i, &a) in self.alphas.iter().enumerate() {
            let l = self.edges[i].max(lo);
            let h = self.edges[i + 1].min(hi);
            if h > l {
                acc += a * (math::sin(h) - math::sin(l));
            }
        }
        acc
    }

    /// Sine-space mean `ᾱ` over an interval inside the sector.
    pub fn mean_alpha_over(&self, iv: &AngularInterval) -> f64 {
        self.alpha_integral(iv.lo, iv.hi) / iv.sine_width()
    }

    /// Sine-space mean `ᾱ` over the whole sector.
    pub fn mean_alpha(&self) -> f64 {
        self.mean_alpha_over(&self.sector)
    }
}

/// Link quantities converting a target data rate into a pathloss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateLink {
    /// Fraction of resources used for downlink data.
    pub rho: f64,
    /// Data bandwidth (Hz).
    pub w: f64,
    /// RS bandwidth (Hz).
    pub w_rs: f64,
    pub p_t: f64,
    pub sigma2: f64,
    pub g_t_max: f64,
    pub g_r_max: f64,
}

impl RateLink {
    /// SNR needed to carry `r_th` bit/s: `2^{r_th/(ρW)} − 1`.
    pub fn snr_threshold(&self, r_th: f64) -> f64 {
        math::exp_m1(core::f64::consts::LN_2 * r_th / (self.rho * self.w))
    }
}

/// `α = (P_T/σ²)·(G_T^max G_R^max / SNR_th)·(W_rs/W)` for target rate `r_th`.
pub fn alpha_for_rate(r_th: f64, link: &RateLink) -> Result<f64> {
    if !(r_th > 0.0) {
        return Err(Error::Domain("target rate must be positive"));
    }
    if !(link.rho > 0.0 && link.rho <= 1.0) {
        return Err(Error::Domain("resource fraction must lie in (0, 1]"));
    }
    let snr = link.snr_threshold(r_th);
    Ok(link.p_t / link.sigma2 * (link.g_t_max * link.g_r_max / snr) * (link.w_rs / link.w))
}

/// Pathloss profile from a per-direction rate target, sampled on `n`
/// equal-sine-width segments.
pub fn pathloss_from_rate<F: Fn(f64) -> f64>(
    rate: F,
    link: &RateLink,
    sector: AngularInterval,
    n: usize,
) -> Result<PathlossProfile> {
    if n == 0 {
        return Err(Error::Domain("need at least one segment"));
    }
    let mut err = None;
    let p = PathlossProfile::from_fn(
        sector,
        |phi| match alpha_for_rate(rate(phi), link) {
            Ok(a) => a,
            Err(e) => {
                err = Some(e);
                1.0
            }
        },
        n,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(p),
    }
}

/// Split of the sector into subintervals, each covered by one beam.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorPartition {
    pub subintervals: Vec<AngularInterval>,
    /// `κ^(m) = 2/|Ω^(m)|`, the flat gain level that spends a unit-norm
    /// beam's whole energy on the subinterval.
    pub kappa: Vec<f64>,
    /// Sine-space mean pathloss `ᾱ^(m)` of each subinterval.
    pub mean_alpha: Vec<f64>,
}

impl SectorPartition {
    /// Partition at the given angle edges (must start and end at the
    /// profile's sector boundaries).
    pub fn from_edges(edges: &[f64], profile: &PathlossProfile) -> Result<Self> {
        let s = profile.sector();
        if edges.len() < 2 {
            return Err(Error::Domain("partition needs at least one subinterval"));
        }
        if (edges[0] - s.lo).abs() > 1e-12 || (edges[edges.len() - 1] - s.hi).abs() > 1e-12 {
            return Err(Error::Domain("partition must cover the profile's sector"));
        }
        let mut subintervals = Vec::with_capacity(edges.len() - 1);
        for w in edges.windows(2) {
            subintervals.push(AngularInterval::new(w[0], w[1])?);
        }
        let kappa = subintervals.iter().map(|iv| 2.0 / iv.sine_width()).collect();
        let mean_alpha = subintervals.iter().map(|iv| profile.mean_alpha_over(iv)).collect();
        Ok(Self {
            subintervals,
            kappa,
            mean_alpha,
        })
    }

    /// `m` subintervals of equal sine-space width.
    pub fn uniform_in_sine(profile: &PathlossProfile, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("partition needs at least one subinterval"));
        }
        let s = profile.sector();
        let (u0, u1) = (s.u_lo(), s.u_hi());
        let edges: Vec<f64> = (0..=m)
            .map(|i| {
                if i == 0 {
                    s.lo
                } else if i == m {
                    s.hi
                } else {
                    math::asin(u0 + (u1 - u0) * i as f64 / m as f64)
                }
            })
            .collect();
        Self::from_edges(&edges, profile)
    }

    pub fn len(&self) -> usize {
        self.subintervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subintervals.is_empty()
    }
}

/// Desirable gain pattern of one beam: `κ α(φ)/ᾱ` on its band, zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamTarget {
    pub band: AngularInterval,
    pub kappa: f64,
    pub mean_alpha: f64,
    profile: PathlossProfile,
}

impl BeamTarget {
    pub fn gain(&self, phi: f64) -> f64 {
        if !self.band.contains(phi) {
            return 0.0;
        }
        match self.profile.alpha_at(phi) {
            Some(a) => self.kappa * a / self.mean_alpha,
            None => 0.0,
        }
    }
}

/// Per-subinterval desirable patterns.
pub fn desired_pattern(profile: &PathlossProfile, partition: &SectorPartition) -> Vec<BeamTarget> {
    partition
        .subintervals
        .iter()
        .zip(&partition.kappa)
        .zip(&partition.mean_alpha)
        .map(|((&band, &kappa), &mean_alpha)| BeamTarget {
            band,
            kappa,
            mean_alpha,
            profile: profile.clone(),
        })
        .collect()
}

/// Sector-wide desirable average gain `G*(φ) = κ* α(φ)/ᾱ`, `κ* = 2/|Ω|`.
pub fn global_target(profile: &PathlossProfile) -> BeamTarget {
    let band = profile.sector();
    BeamTarget {
        band,
        kappa: 2.0 / band.sine_width(),
        mean_alpha: profile.mean_alpha(),
        profile: profile.clone(),
    }
}

/// Slot-weighted average of per-beam targets.
pub fn composite_target(targets: &[BeamTarget], slots: &[usize], phi: f64) -> f64 {
    let j: usize = slots.iter().sum();
    targets
        .iter()
        .zip(slots)
        .map(|(t, &s)| s as f64 * t.gain(phi))
        .sum::<f64>()
        / j as f64
}

/// Slots per beam over a period of `j_total`: `J_m ∝ |Ω^(m)|·ᾱ^(m)`, rounded by
/// largest remainder (ties to the larger `ᾱ^(m)`, then the lower index), with
/// every beam getting at least one slot.
pub fn slot_allocation(partition: &SectorPartition, j_total: usize) -> Result<Vec<usize>> {
    let m = partition.len();
    if m == 0 {
        return Err(Error::Domain("empty partition"));
    }
    if j_total < m {
        return Err(Error::Infeasible("slot period shorter than the number of beams"));
    }
    let weights: Vec<f64> = partition
        .subintervals
        .iter()
        .zip(&partition.mean_alpha)
        .map(|(iv, &a)| iv.sine_width() * a)
        .collect();
    let total: f64 = weights.iter().sum();
    let ideal: Vec<f64> = weights.iter().map(|w| j_total as f64 * w / total).collect();
    let mut counts: Vec<usize> = ideal.iter().map(|&x| math::floor(x + 1e-9) as usize).collect();
    let mut order: Vec<usize> = (0..m).collect();
    let rem = |i: usize| ideal[i] - counts[i] as f64;
    order.sort_by(|&a, &b| {
        rem(b)
            .partial_cmp(&rem(a))
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(
                partition.mean_alpha[b]
                    .partial_cmp(&partition.mean_alpha[a])
                    .unwrap_or(core::cmp::Ordering::Equal),
            )
            .then(a.cmp(&b))
    });
    let assigned: usize = counts.iter().sum();
    for &i in order.iter().take(j_total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    // every beam must appear at least once per period
    while let Some(z) = counts.iter().position(|&c| c == 0) {
        let donor = (0..m).max_by_key(|&i| (counts[i], core::cmp::Reverse(i))).unwrap_or(0);
        counts[donor] -= 1;
        counts[z] += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sector() -> AngularInterval {
        AngularInterval::from_degrees(-30.0, 30.0).unwrap()
    }

    #[test]
    fn table_one_snr_threshold() {
        let link = RateLink {
            rho: 0.4,
            w: 1e9,
            w_rs: 1e7,
            p_t: 1.0,
            sigma2: 1.0,
            g_t_max: 32.0,
            g_r_max: 16.0,
        };
        let snr = link.snr_threshold(10e6);
        assert!((snr - (2f64.powf(0.025) - 1.0)).abs() < 1e-15);
        assert!((snr - 0.017480).abs() < 1e-6);
        let a = alpha_for_rate(10e6, &link).unwrap();
        assert!((a - 512.0 / snr * 0.01).abs() < 1e-9);
        // R = rho W gives SNR_th = 1
        let a1 = alpha_for_rate(0.4e9, &link).unwrap();
        assert!((a1 - 512.0 * 0.01).abs() < 1e-12);
        let p = pathloss_from_rate(|_| 10e6, &link, sector(), 8).unwrap();
        assert!(p.alphas().iter().all(|&x| x == a));
    }

    #[test]
    fn half_blocked_profile() {
        let p = PathlossProfile::half_blocked(sector(), 10.0).unwrap();
        assert_eq!(p.alpha_at(-0.3), Some(5.0));
        assert_eq!(p.alpha_at(0.0), Some(5.0));
        assert_eq!(p.alpha_at(0.2), Some(10.0));
        assert_eq!(p.alpha_at(0.9), None);
        // mean in sine space: halves of equal sine width
        assert!((p.mean_alpha() - 7.5).abs() < 1e-12);
        let q = sector().mean_u(|phi| p.alpha_at(phi).unwrap(), 2000);
        assert!((q - 7.5).abs() < 1e-6);
    }

    #[test]
    fn uniform_targets_are_flat_and_conserve_energy() {
        let p = PathlossProfile::uniform(sector(), 3.0).unwrap();
        let part = SectorPartition::uniform_in_sine(&p, 4).unwrap();
        let t = desired_pattern(&p, &part);
        let g = global_target(&p);
        assert!((g.gain(0.1) - 2.0).abs() < 1e-15);
        for tm in &t {
            let mid = 0.5 * (tm.band.lo + tm.band.hi);
            assert!((tm.gain(mid) - 4.0 * g.gain(0.1)).abs() < 1e-12);
            let energy = crate::sector::AngularInterval::full().integrate_u(|phi| tm.gain(phi), 4000);
            assert!((energy - 2.0).abs() < 1e-2);
            let exact = tm.kappa * p.alpha_integral(tm.band.lo, tm.band.hi) / tm.mean_alpha;
            assert!((exact - 2.0).abs() < 1e-12);
        }
        let one = desired_pattern(&p, &SectorPartition::uniform_in_sine(&p, 1).unwrap());
        assert!((one[0].gain(0.0) - 2.0).abs() < 1e-15);
        assert_eq!(one[0].gain(1.0), 0.0);
    }

    #[test]
    fn half_blocked_composite_follows_pathloss() {
        let p = PathlossProfile::half_blocked(sector(), 10.0).unwrap();
        let part = SectorPartition::from_edges(&[sector().lo, 0.0, sector().hi], &p).unwrap();
        let t = desired_pattern(&p, &part);
        let slots = slot_allocation(&part, 12).unwrap();
        assert_eq!(slots, alloc::vec![4, 8]);
        let lo = composite_target(&t, &slots, -0.2);
        let hi = composite_target(&t, &slots, 0.2);
        assert!((hi / lo - 2.0).abs() < 1e-12);
        let g = global_target(&p);
        assert!((g.gain(-0.2) - lo).abs() < 1e-12 && (g.gain(0.2) - hi).abs() < 1e-12);
    }

    #[test]
    fn slot_allocation_examples() {
        let p = PathlossProfile::uniform(sector(), 3.0).unwrap();
        let part = SectorPartition::uniform_in_sine(&p, 4).unwrap();
        assert_eq!(slot_allocation(&part, 16).unwrap(), alloc::vec![4, 4, 4, 4]);
        let one = SectorPartition::uniform_in_sine(&p, 1).unwrap();
        assert_eq!(slot_allocation(&one, 7).unwrap(), alloc::vec![7]);
        assert!(matches!(slot_allocation(&part, 3), Err(Error::Infeasible(_))));
        // uneven remainders: 4 equal beams over 6 slots
        let s = slot_allocation(&part, 6).unwrap();
        assert_eq!(s.iter().sum::<usize>(), 6);
        assert!(s.iter().all(|&c| c >= 1));
    }

    #[test]
    fn ties_go_to_the_more_demanding_subinterval() {
        let p = PathlossProfile::half_blocked(sector(), 10.0).unwrap();
        let part = SectorPartition::from_edges(&[sector().lo, 0.0, sector().hi], &p).unwrap();
        // ideal (1, 2) over 3 slots; over 4 slots ideal (4/3, 8/3): remainders 1/3 and 2/3
        assert_eq!(slot_allocation(&part, 3).unwrap(), alloc::vec![1, 2]);
        assert_eq!(slot_allocation(&part, 4).unwrap(), alloc::vec![1, 3]);
        // equal remainders: alpha equal halves but a single extra slot
        let u = PathlossProfile::from_table(
            alloc::vec![sector().lo, 0.0, sector().hi],
            alloc::vec![2.0, 2.0],
        )
        .unwrap();
        let part = SectorPartition::from_edges(&[sector().lo, 0.0, sector().hi], &u).unwrap();
        assert_eq!(slot_allocation(&part, 3).unwrap(), alloc::vec![2, 1]);
    }
}
