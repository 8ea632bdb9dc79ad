use approx::assert_relative_eq;
use proptest::prelude::*;

use qread_core::dispersive::{
    cavity_population, cavity_population_spectral, click_probability, click_probability_infinite,
    contrast_approx, contrast_dispersive, finite_time_delta, finite_time_delta_approx, optimal_cavity_decay,
    optimal_cavity_decay_asymptote, Branch, Counting, SpectralWindow,
};
use qread_core::quad::{integrate_real, QuadOptions};
use qread_core::units::{ghz, mhz, us};
use qread_core::{make_dimensionless, pulse_spectrum, PulseParams, SystemParams};

/// Golden-section maximum of a unimodal function on [a, b].
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    while (b - a).abs() > 1e-10 * (a.abs() + b.abs()) {
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    0.5 * (a + b)
}

fn tail_integral(k: f64, d: f64, from: f64) -> f64 {
    let span = 60.0 / k.min(1.0);
    integrate_real(|t| cavity_population(t, k, d).unwrap(), from, from + span, QuadOptions::default()).unwrap()
}

#[test]
fn population_matches_spectral_quadrature() {
    // dimensionless frame: t_ph = 1, so κ = K and ω_eff − ω_ph = D
    for &(k, d) in &[(0.4, 0.0), (1.0, 0.0), (4.27, 0.0), (4.27, 7.3), (20.0, 2.0)] {
        let pulse = PulseParams::new(1.0, 0.0, 500.0).unwrap();
        for &tau in &[0.3, 1.0, 2.5, 6.0] {
            let spectral = cavity_population_spectral(
                |w| pulse_spectrum(&pulse, w),
                500.0 + d,
                k,
                tau,
                SpectralWindow::around(500.0, 400.0),
                QuadOptions { abs_tol: 1e-11, rel_tol: 1e-9, max_intervals: 400_000 },
            )
            .unwrap();
            let closed = cavity_population(tau, k, d).unwrap();
            assert!((spectral - closed).abs() < 2e-5, "K={k} D={d} τ={tau}: {spectral} vs {closed}");
        }
    }
}

#[test]
fn infinite_click_is_integrated_output_flux() {
    for &(k, d) in &[(0.5, 0.0), (4.27, 0.0), (4.27, 7.28), (30.0, 3.0)] {
        let flux = 0.5 * k * tail_integral(k, d, 0.0);
        let p = click_probability_infinite(k, d / 2.0, Branch::General(d), 1.0).unwrap().value;
        assert_relative_eq!(p, flux, max_relative = 1e-8);
    }
}

#[test]
fn finite_delta_is_flux_after_the_window() {
    for &(k, d, tau) in &[(4.27, 0.0, 6.0), (10.0, 0.0, 3.0), (4.27, 7.28, 2.0), (0.7, 0.4, 5.0), (1.0, 0.0, 4.0)] {
        let delta = finite_time_delta(k, d, tau).unwrap();
        let flux = 0.5 * k * tail_integral(k, d, tau);
        assert!((delta - flux).abs() < 1e-9 + 1e-7 * flux, "K={k} D={d} τ={tau}: {delta} vs {flux}");
    }
}

#[test]
fn optimal_decay_is_the_brute_force_argmax() {
    for &x in &[0.5, 1.0, 3.64, 10.0, 100.0, 1000.0] {
        let brute = golden_max(|k| contrast_dispersive(k, x, 1.0, None).unwrap(), 1e-3, 1e5);
        assert_relative_eq!(optimal_cavity_decay(x).unwrap(), brute, max_relative = 1e-6);
    }
}

#[test]
fn optimal_decay_approaches_its_asymptote() {
    let rel = |x: f64| (optimal_cavity_decay_asymptote(x) / optimal_cavity_decay(x).unwrap() - 1.0).abs();
    assert!(rel(1e6) < 1e-2);
    assert!(rel(1e6) < rel(1e3));
}

#[test]
fn approximate_contrast_within_a_tenth_of_a_point_at_large_pull() {
    for &x in &[100.0, 300.0, 1000.0] {
        let k = optimal_cavity_decay(x).unwrap();
        let exact = contrast_dispersive(k, x, 1.0, None).unwrap();
        let approx = contrast_approx(k, x, 1.0);
        assert!(approx.valid);
        assert!((approx.value - exact).abs() <= 1e-3, "X={x}");
    }
    assert!(!contrast_approx(4.0, 3.64, 1.0).valid);
}

#[test]
fn delta_asymptote_near_exact_at_large_decay() {
    let exact = finite_time_delta(50.0, 0.0, 6.0).unwrap();
    assert_relative_eq!(finite_time_delta_approx(50.0, 6.0), exact, max_relative = 0.05);
}

#[test]
fn table_dimensionless_group() {
    // Fast-readout row: g/2π = 53.6 MHz at 5/4.09 GHz, κ/2π = 4.08 MHz, t_ph = 1/6 μs.
    let p = SystemParams::new(ghz(5.0), ghz(4.09), mhz(53.6), mhz(4.08), 1.0).unwrap();
    let pulse = PulseParams::resonant_up(&p, us(1.0) / 6.0, 0.0).unwrap();
    let g = make_dimensionless(&p, &pulse).unwrap();
    assert_relative_eq!(g.k, 2.0 * std::f64::consts::PI * 4.08e6 / 6e6, max_relative = 1e-12);
    assert_eq!(g.d_up, 0.0);
    assert_relative_eq!(g.d_down, -2.0 * g.x, max_relative = 1e-12);
}

proptest! {
    #[test]
    fn click_probabilities_bounded(k in 1e-2f64..1e3, x in 0.0f64..1e3, eta in 0.0f64..=1.0, tau in 0.0f64..50.0) {
        for branch in [Branch::Resonant, Branch::Detuned] {
            for counting in [Counting::Infinite, Counting::Finite(tau)] {
                let p = click_probability(k, x, branch, eta, counting).unwrap().value;
                prop_assert!((0.0..=eta + 1e-12).contains(&p));
            }
        }
    }

    #[test]
    fn no_pull_no_contrast(k in 1e-2f64..1e3, eta in 0.0f64..=1.0) {
        prop_assert_eq!(contrast_dispersive(k, 0.0, eta, None).unwrap(), 0.0);
    }

    #[test]
    fn contrast_grows_with_pull(k in 1e-2f64..1e3, x in 1e-3f64..1e3, step in 1e-3f64..1.0) {
        let c1 = contrast_dispersive(k, x, 1.0, None).unwrap();
        let c2 = contrast_dispersive(k, x * (1.0 + step), 1.0, None).unwrap();
        prop_assert!(c2 >= c1);
    }

    #[test]
    fn contrast_linear_in_efficiency(k in 1e-2f64..1e3, x in 0.0f64..1e3, eta in 0.0f64..=1.0) {
        let one = contrast_dispersive(k, x, 1.0, None).unwrap();
        let c = contrast_dispersive(k, x, eta, None).unwrap();
        prop_assert!((c - eta * one).abs() < 1e-14);
    }

    #[test]
    fn delta_shrinks_with_window(k in 1e-1f64..1e2, d in 0.0f64..50.0, tau in 0.0f64..30.0, dt in 1e-3f64..5.0) {
        let a = finite_time_delta(k, d, tau).unwrap();
        let b = finite_time_delta(k, d, tau + dt).unwrap();
        prop_assert!(b <= a + 1e-12);
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn finite_counting_converges_to_infinite(k in 1e-1f64..1e2, x in 0.0f64..1e2) {
        let inf = contrast_dispersive(k, x, 1.0, None).unwrap();
        let fin = contrast_dispersive(k, x, 1.0, Some(800.0 / k.min(1.0))).unwrap();
        prop_assert!((inf - fin).abs() < 1e-12);
    }

    #[test]
    fn group_is_scale_free(s in 1e-3f64..1e3, g in 1.0f64..100.0) {
        let p = SystemParams::new(ghz(5.0), ghz(4.09), mhz(g), mhz(5.0), 1.0).unwrap();
        let pulse = PulseParams::resonant_up(&p, us(0.2), 0.0).unwrap();
        let a = make_dimensionless(&p, &pulse).unwrap();
        let ps = p.scaled(s);
        let pulse_s = PulseParams::resonant_up(&ps, us(0.2) / s, 0.0).unwrap();
        let b = make_dimensionless(&ps, &pulse_s).unwrap();
        prop_assert!((a.k / b.k - 1.0).abs() < 1e-12);
        prop_assert!((a.x / b.x - 1.0).abs() < 1e-12);
    }
}
