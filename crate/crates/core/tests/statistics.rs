use mmwave_discovery::array::{Beamformer, UlaConfig};
use mmwave_discovery::channel::{effective_channel, ChannelLaw};
use mmwave_discovery::glrt::{glrt_statistic, threshold_for_pfa};
use mmwave_discovery::ncf::{
    default_xi_grid, f_quantile, fading_upper_bound, mean_gain_sample, miss_prob, ncf_cdf,
    ncf_cdf_pair_with, FadingLink, LinkDims, NcfParams, QuantileTable,
};
use mmwave_discovery::rng::substream;
use mmwave_discovery::sector::AngularInterval;
use mmwave_discovery::waveform::{generate_rs, observe_effective, Hypothesis, RsKind};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Poisson};

fn params(n1: f64, n2: f64, l: f64) -> NcfParams {
    NcfParams::new(n1, n2, l).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdf_is_monotone_in_x_and_decreasing_in_lambda(
        n1 in 1.0f64..80.0,
        n2 in 1.0f64..400.0,
        lambda in 0.0f64..200.0,
        x in 0.05f64..6.0,
        dx in 0.01f64..1.0,
        dl in 0.5f64..20.0,
    ) {
        let p = params(n1, n2, lambda);
        let a = ncf_cdf(x, &p).unwrap();
        let b = ncf_cdf(x + dx, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a);
        let c = ncf_cdf(x, &params(n1, n2, lambda + dl)).unwrap();
        prop_assert!(c <= a);
    }

    #[test]
    fn quantile_round_trips(n1 in 2.0f64..60.0, n2 in 2.0f64..300.0, lambda in 0.0f64..50.0, x in 0.1f64..5.0) {
        let p = params(n1, n2, lambda);
        let prob = ncf_cdf(x, &p).unwrap();
        prop_assume!(prob > 1e-6 && prob < 1.0 - 1e-6);
        let back = f_quantile(prob, &p).unwrap();
        prop_assert!((back - x).abs() < 1e-8 * x.max(1.0), "{} vs {}", back, x);
    }
}

#[test]
fn doubling_the_term_cap_changes_nothing() {
    for &(n1, n2, l, x) in &[(8.0, 40.0, 12.0, 1.5), (320.0, 31680.0, 500.0, 1.9), (4.0, 12.0, 3000.0, 300.0)] {
        let a = ncf_cdf_pair_with(x, &params(n1, n2, l), 10_000, 1e-13).unwrap();
        let b = ncf_cdf_pair_with(x, &params(n1, n2, l), 20_000, 1e-13).unwrap();
        assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    }
}

#[test]
fn cdf_matches_a_chi_square_ratio_sample() {
    let (n1, n2, lambda, x) = (8.0, 40.0, 12.0, 1.5);
    let p = ncf_cdf(x, &params(n1, n2, lambda)).unwrap();
    let mut rng = substream(31, 0);
    let pois = Poisson::new(lambda / 2.0).unwrap();
    let den = ChiSquared::new(n2).unwrap();
    let n = 1_000_000;
    let mut hits = 0usize;
    for _ in 0..n {
        let k: f64 = pois.sample(&mut rng);
        let num = ChiSquared::new(n1 + 2.0 * k).unwrap().sample(&mut rng);
        if (num / n1) / (den.sample(&mut rng) / n2) <= x {
            hits += 1;
        }
    }
    let est = hits as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    assert!((est - p).abs() < 3.0 * se, "{est} vs {p}");
}

#[test]
fn large_table_quantile_agrees_with_the_threshold() {
    let dims = LinkDims::new(16, 10, 100).unwrap();
    let gamma = threshold_for_pfa(1e-3, 5000, &dims).unwrap();
    let x = f_quantile(1.0 - 2e-7, &dims.params(0.0).unwrap()).unwrap();
    assert!(x.is_finite());
    assert!((x / 99.0 - gamma).abs() < 1e-9 * gamma);
    let at = miss_prob(gamma, &dims, 0.0).unwrap();
    assert!((at - (1.0 - 2e-7)).abs() < 1e-10);
    assert!(miss_prob(gamma, &dims, 1e4).unwrap() < 1e-12);
}

fn link(n_r: usize, l: usize, n_s: usize, sigma2: f64, gamma: f64) -> FadingLink {
    FadingLink { p_t: 1.0, sigma2, dims: LinkDims::new(n_r, l, n_s).unwrap(), gamma }
}

#[test]
fn deterministic_channel_bound_is_the_f_term() {
    let fl = link(2, 3, 8, 1.0, 0.4);
    let h = 1.7;
    let (b, _) = fading_upper_bound(|_| h, &default_xi_grid(), &fl).unwrap();
    let f = miss_prob(0.4, &fl.dims, 3.0 * 2.0 * 8.0 * h).unwrap();
    // ξ → 0 limit, approached at the first grid point 1e-5
    assert!(b >= f && b - f < 2e-5, "{b} vs {f}");
}

#[test]
fn two_point_law_matches_hand_minimization() {
    let fl = link(2, 3, 8, 2.0, 0.5);
    let q = |xi: f64| if xi <= 0.5 { 0.5 } else { 1.5 };
    let grid = default_xi_grid();
    let (b, _) = fading_upper_bound(q, &grid, &fl).unwrap();
    let lam = |h: f64| 3.0 * 2.0 * 8.0 * h / 2.0;
    let lo_xi = grid[0];
    let hi_xi = *grid.iter().find(|&&x| x > 0.5).unwrap();
    let f_lo = miss_prob(0.5, &fl.dims, lam(0.5)).unwrap();
    let f_hi = miss_prob(0.5, &fl.dims, lam(1.5)).unwrap();
    let want = (lo_xi + (1.0 - lo_xi) * f_lo).min(hi_xi + (1.0 - hi_xi) * f_hi);
    assert!((b - want).abs() < 1e-15, "{b} vs {want}");
    // every grid term upper-bounds the infimum
    for &xi in &grid {
        let t = xi + (1.0 - xi) * miss_prob(0.5, &fl.dims, lam(q(xi))).unwrap();
        assert!(t >= b);
    }
}

fn mixed_law(ratio_db: f64) -> ChannelLaw {
    let sector = AngularInterval::from_degrees(-30.0, 30.0).unwrap();
    ChannelLaw::new(3, Some(ratio_db), 1.0, 0.0, sector).unwrap()
}

#[test]
fn fading_bound_dominates_simulation() {
    let (n_r, n_s) = (2, 8);
    let rx = UlaConfig::new(n_r).unwrap();
    let tx = UlaConfig::new(4).unwrap();
    let omni = Beamformer::omni(4).unwrap();
    let rs = generate_rs(n_s, 1.0, RsKind::Qpsk, 1).unwrap();
    let mut pick = substream(404, 0);
    for cfg in 0..5u64 {
        let l = pick.random_range(2..5usize);
        let ratio = pick.random_range(3.0..13.0);
        let law = mixed_law(ratio);
        // mean λ between 15 and 40; E‖h_l‖² = N_R for the omni beam
        let mean_lambda = pick.random_range(15.0..40.0);
        let sigma2 = 2.0 * n_s as f64 * l as f64 * n_r as f64 / mean_lambda;
        let dims = LinkDims::new(n_r, l, n_s).unwrap();
        let gamma = threshold_for_pfa(1e-3, 50, &dims).unwrap();

        let key = 5000 + cfg;
        let samples: Vec<f64> = (0..20_000)
            .map(|t| mean_gain_sample(key, t, &law, std::slice::from_ref(&omni), &rx, &tx, l).unwrap())
            .collect();
        let grid = default_xi_grid();
        let table = QuantileTable::from_samples(samples, &grid).unwrap();
        let fl = FadingLink { p_t: 1.0, sigma2, dims, gamma };
        let (bound, _) = fading_upper_bound(|x| table.value_at(x), &grid, &fl).unwrap();

        let trials = 20_000u64;
        let mut misses = 0;
        for t in 0..trials {
            let mut rng = substream(key + 1_000, t);
            let win = law.sample_window(&mut rng, l);
            let h: Vec<_> = win.iter().map(|c| effective_channel(c, &omni, &rx, &tx).unwrap()).collect();
            let y = observe_effective(&mut rng, &h, &rs, sigma2, Hypothesis::H1).unwrap();
            if glrt_statistic(&y, &rs).unwrap().statistic <= gamma {
                misses += 1;
            }
        }
        let p = misses as f64 / trials as f64;
        let sd = (p * (1.0 - p) / trials as f64).sqrt();
        assert!(bound >= p - 3.0 * sd, "config {cfg}: bound {bound} < simulated {p}");
    }
}

#[test]
fn mixed_law_quantiles_are_stable_across_seeds() {
    let law = mixed_law(13.2);
    let rx = UlaConfig::new(4).unwrap();
    let tx = UlaConfig::new(4).unwrap();
    let omni = [Beamformer::omni(4).unwrap()];
    let xi = [0.01, 0.1, 0.5, 0.9];
    let draw = |key| -> Vec<f64> {
        (0..20_000).map(|t| mean_gain_sample(key, t, &law, &omni, &rx, &tx, 2).unwrap()).collect()
    };
    let a = draw(1);
    let b = draw(2);
    let ta = QuantileTable::from_samples(a.clone(), &xi).unwrap();
    let tb = QuantileTable::from_samples(b, &xi).unwrap();
    for w in ta.values.windows(2) {
        assert!(w[1] >= w[0]);
    }
    // bootstrap spread of each quantile from the first sample
    let mut rng = substream(3, 3);
    let reps = 200;
    let mut boot = vec![Vec::with_capacity(reps); xi.len()];
    for _ in 0..reps {
        let re: Vec<f64> = (0..a.len()).map(|_| a[rng.random_range(0..a.len())]).collect();
        let t = QuantileTable::from_samples(re, &xi).unwrap();
        for (k, v) in t.values.iter().enumerate() {
            boot[k].push(*v);
        }
    }
    for k in 0..xi.len() {
        let m = boot[k].iter().sum::<f64>() / reps as f64;
        let sd = (boot[k].iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (reps - 1) as f64).sqrt();
        // difference of two independent estimates: sd·√2, allow 4 of those
        let tol = 4.0 * std::f64::consts::SQRT_2 * sd;
        assert!((ta.values[k] - tb.values[k]).abs() <= tol, "xi {}: {} vs {}", xi[k], ta.values[k], tb.values[k]);
    }
}

#[test]
fn constant_channel_quantiles_are_flat() {
    let t = QuantileTable::from_samples(vec![2.5; 10_000], &[1e-5, 0.3, 0.999]).unwrap();
    assert!(t.values.iter().all(|&v| v == 2.5));
    assert_eq!(t.extrapolated, vec![true, false, false]);
}
