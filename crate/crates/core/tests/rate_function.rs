use mmwave_discovery::ldp::{
    kkt_residual, miss_approx, rate_function, rate_function_oracle, validity_threshold,
    worst_direction_exponent, LinkBudget,
};
use mmwave_discovery::rng::substream;
use mmwave_discovery::sector::AngularInterval;
use rand::Rng;

#[test]
fn closed_form_matches_the_oracle_on_random_inputs() {
    let mut rng = substream(17, 0);
    let mut checked = 0;
    while checked < 200 {
        let n_r = rng.random_range(1..=16usize);
        let n_s = rng.random_range(2..=120usize);
        let eta = 10f64.powf(rng.random_range(-1.0..2.5));
        let g_max = validity_threshold(eta, n_r, n_s);
        let gamma = g_max * rng.random_range(0.02..0.98);
        let cf = rate_function(eta, gamma, n_r, n_s).unwrap();
        assert!(cf.valid && cf.value > 0.0);
        assert!(cf.t1_star < 0.5 && cf.t2_star < 0.5);
        assert!(kkt_residual(&cf, gamma, n_r, n_s).abs() < 1e-9);
        let or = rate_function_oracle(eta, gamma, n_r, n_s).unwrap();
        let rel = (cf.value - or).abs() / cf.value;
        assert!(rel <= 1e-6, "n_r {n_r} n_s {n_s} eta {eta} gamma {gamma}: {} vs {or}", cf.value);
        checked += 1;
    }
}

#[test]
fn small_case_roots() {
    let r = rate_function(4.0, 1.0, 1, 2).unwrap();
    assert!((r.x_star - (1.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
    assert!((r.v_star - (2.0 + 2f64.sqrt())).abs() < 1e-12);
    let o = rate_function_oracle(4.0, 1.0, 1, 2).unwrap();
    assert!((r.value - o).abs() < 1e-6);
}

#[test]
fn strictly_increasing_in_eta_and_zero_past_the_boundary() {
    let (n_r, n_s, gamma) = (16, 100, 0.02);
    let mut prev = -1.0;
    for k in 0..40 {
        let eta = 1.0 + 2.0 * k as f64;
        let r = rate_function(eta, gamma, n_r, n_s).unwrap();
        if r.valid {
            assert!(r.value > prev);
            prev = r.value;
        }
    }
    let eta = 7.5;
    let edge = validity_threshold(eta, n_r, n_s);
    let r = rate_function(eta, edge, n_r, n_s).unwrap();
    assert!(!r.valid && r.value == 0.0);
    assert_eq!(miss_approx(10, &r), 1.0);
}

#[test]
fn exponential_approximation_arithmetic() {
    let mut r = rate_function(20.0, 0.01, 4, 50).unwrap();
    r.value = 0.3;
    assert!((miss_approx(10, &r) - (-3f64).exp()).abs() < 1e-15);
}

#[test]
fn worst_direction_sits_at_a_beam_edge() {
    // two beams of width 30° with a cosine-shaped roll-off that dips 3 dB at
    // both edges of each beam
    let sector = AngularInterval::from_degrees(-30.0, 30.0).unwrap();
    let gain = |phi: f64| {
        let d = phi.to_degrees();
        let centre = if d < 0.0 { -15.0 } else { 15.0 };
        let x = (d - centre) / 15.0;
        2.0 * (1.0 - 0.5 * x * x)
    };
    let link = LinkBudget { p_t: 1.0, n_r: 16, n_s: 100, sigma2: 1.0 };
    let alpha = 292.9;
    let grid = sector.angle_grid_step(0.1f64.to_radians());
    let w = worst_direction_exponent(gain, |_| alpha, &grid, 0.02, &link).unwrap();
    let d = w.link.angle.to_degrees();
    let at_edge = [-30.0, 0.0, 30.0].iter().any(|e| (d - e).abs() < 0.11);
    assert!(at_edge, "worst direction {d}");
    for &phi in &grid {
        let r = rate_function(link.eta(gain(phi), alpha), 0.02, 16, 100).unwrap();
        assert!(w.rate.value <= r.value + 1e-15);
    }
}

#[test]
fn a_null_direction_caps_the_exponent_at_zero() {
    let link = LinkBudget { p_t: 1.0, n_r: 4, n_s: 20, sigma2: 1.0 };
    let grid = [-0.2, 0.0, 0.2];
    let w = worst_direction_exponent(|phi: f64| if phi == 0.0 { 0.0 } else { 3.0 }, |_| 2.0, &grid, 0.05, &link)
        .unwrap();
    assert!(w.link.null_gain);
    assert_eq!(w.rate.value, 0.0);
}
