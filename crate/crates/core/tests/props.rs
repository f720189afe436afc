//! Property-based invariants: order relations, ranges, and round trips that
//! must hold across the whole parameter domain, not just at frozen points.

use proptest::prelude::*;
use udnsim::allocator::{
    optimize_closed_form, papr_bandwidth_for, papr_outage, PaprVariant, SpectrumConfig,
};
use udnsim::analytic::{rho_const, rho_t, se_bounds_mmw, se_bounds_muw, se_linearized_muw};
use udnsim::blockage::{beta_param, eta_param, stats_from_kv, stats_to_kv, BuildingStats};
use udnsim::channel::beam_covers;
use udnsim::geometry::{Point2, Window};

fn stats(rho: f64, area: f64, kappa: f64, mu: f64, sigma: f64, b: f64) -> BuildingStats {
    BuildingStats {
        avg_perimeter_m: rho,
        avg_area_m2: area,
        coverage: kappa,
        height_ln_mu: mu,
        height_ln_sigma: sigma,
        bs_height_m: b,
    }
}

proptest! {
    #[test]
    fn height_fraction_in_unit_interval_and_antenna_monotone(
        mu in -1.0..3.0f64,
        sigma in 0.05..1.2f64,
        b1 in 1.0..50.0f64,
        bump in 0.1..30.0f64,
    ) {
        let e1 = eta_param(&stats(50.0, 150.0, 0.3, mu, sigma, b1)).unwrap();
        let e2 = eta_param(&stats(50.0, 150.0, 0.3, mu, sigma, b1 + bump)).unwrap();
        prop_assert!((0.0..=1.0).contains(&e1));
        prop_assert!(e2 <= e1 + 1e-9, "raising the antenna increased blocking: {e1} -> {e2}");
    }

    #[test]
    fn height_fraction_monotone_in_building_height(
        mu in -1.0..2.5f64,
        lift in 0.05..1.0f64,
        sigma in 0.05..1.2f64,
        b in 1.0..50.0f64,
    ) {
        let e1 = eta_param(&stats(50.0, 150.0, 0.3, mu, sigma, b)).unwrap();
        let e2 = eta_param(&stats(50.0, 150.0, 0.3, mu + lift, sigma, b)).unwrap();
        prop_assert!(e2 >= e1 - 1e-9, "taller buildings decreased blocking: {e1} -> {e2}");
    }

    #[test]
    fn blockage_density_positive_and_coverage_monotone(
        rho in 5.0..200.0f64,
        area in 20.0..2000.0f64,
        kappa in 0.01..0.9f64,
        step in 0.01..0.09f64,
    ) {
        let b1 = beta_param(&stats(rho, area, kappa, 1.0, 0.3, 10.0)).unwrap();
        let b2 = beta_param(&stats(rho, area, kappa + step, 1.0, 0.3, 10.0)).unwrap();
        prop_assert!(b1 > 0.0);
        prop_assert!(b2 > b1, "denser coverage must raise the blockage density");
    }

    #[test]
    fn interference_factor_capped_and_monotone(
        alpha in 2.3..6.0f64,
        t1 in 0.01..30.0f64,
        dt in 0.01..10.0f64,
    ) {
        let rc = rho_const(alpha).unwrap();
        let r1 = rho_t(alpha, t1).unwrap();
        let r2 = rho_t(alpha, t1 + dt).unwrap();
        prop_assert!(r1 <= rc + 1e-9);
        prop_assert!(r2 >= r1 - 1e-9, "truncated factor must grow with t");
    }

    #[test]
    fn beam_cover_widens_with_beam(
        txx in -40.0..40.0f64, txy in -40.0..40.0f64,
        aimx in -40.0..40.0f64, aimy in -40.0..40.0f64,
        rxx in -40.0..40.0f64, rxy in -40.0..40.0f64,
        theta in 0.1..5.0f64,
        widen in 0.1..2.0f64,
    ) {
        let w = Window::new(100.0, false).unwrap();
        let tx = Point2::new(txx, txy);
        let aim = Point2::new(aimx, aimy);
        let rx = Point2::new(rxx, rxy);
        prop_assume!((aimx - txx).abs() > 1e-6 || (aimy - txy).abs() > 1e-6);
        prop_assume!((rxx - txx).abs() > 1e-6 || (rxy - txy).abs() > 1e-6);
        if beam_covers(tx, aim, rx, theta, &w) {
            prop_assert!(
                beam_covers(tx, aim, rx, (theta + widen).min(2.0 * std::f64::consts::PI), &w),
                "widening the beam lost coverage"
            );
        }
    }

    #[test]
    fn outage_range_and_bandwidth_round_trip(
        eps in 1e-4..0.999f64,
        delta in 0.5..10.0f64,
        fs in 1e3..1e7f64,
    ) {
        let w = papr_bandwidth_for(fs, delta, eps).unwrap();
        prop_assert!(w > 0.0 && w.is_finite());
        let back = papr_outage(w, fs, delta).unwrap();
        prop_assert!((0.0..=1.0).contains(&back));
        prop_assert!((back - eps).abs() <= 1e-9 * eps.max(1e-3), "round trip: {eps} -> {back}");
        let worse = papr_outage(w * 1.5, fs, delta).unwrap();
        prop_assert!(worse >= back - 1e-15, "outage must grow with bandwidth");
    }

    #[test]
    fn stats_kv_round_trips_exactly(
        rho in 1.0..300.0f64,
        area in 1.0..3000.0f64,
        kappa in 0.001..0.999f64,
        mu in -2.0..4.0f64,
        sigma in 0.0..2.0f64,
        b in 0.5..60.0f64,
    ) {
        let s = stats(rho, area, kappa, mu, sigma, b);
        let back = stats_from_kv(&stats_to_kv(&s)).unwrap();
        prop_assert_eq!(back.avg_perimeter_m.to_bits(), s.avg_perimeter_m.to_bits());
        prop_assert_eq!(back.avg_area_m2.to_bits(), s.avg_area_m2.to_bits());
        prop_assert_eq!(back.coverage.to_bits(), s.coverage.to_bits());
        prop_assert_eq!(back.height_ln_mu.to_bits(), s.height_ln_mu.to_bits());
        prop_assert_eq!(back.height_ln_sigma.to_bits(), s.height_ln_sigma.to_bits());
        prop_assert_eq!(back.bs_height_m.to_bits(), s.bs_height_m.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sub6_bracket_contains_linearized_form(
        alpha in 2.3..6.0f64,
        log_lh in 0.0..11.5f64,
    ) {
        let lh = log_lh.exp();
        let b = se_bounds_muw(lh, alpha).unwrap();
        let lin = se_linearized_muw(lh, alpha).unwrap();
        prop_assert!(b.lower >= 0.0 && b.upper >= b.lower - 1e-9);
        prop_assert!(b.lower <= lin + 1e-7, "lower bound above linearized form");
        // The closed-form upper only dominates in the dense regime.
        if lh >= 10.0 {
            prop_assert!(lin <= b.upper + 1e-7, "linearized form above upper bound");
        }
    }

    #[test]
    fn beam_bracket_ordered_and_finite(
        alpha in 2.3..5.0f64,
        log_lh in 0.0..9.0f64,
        log_lam in -11.5..-7.0f64,
        theta in 0.05..6.28f64,
        r_l in 10.0..1000.0f64,
    ) {
        let lh = log_lh.exp();
        let lam_m = log_lam.exp();
        let b = se_bounds_mmw(lh, lam_m, alpha, theta, r_l).unwrap();
        prop_assert!(b.lower.is_finite() && b.upper.is_finite());
        prop_assert!(b.lower >= 0.0);
        prop_assert!(b.lower <= b.upper + 1e-9, "bracket inverted: {} > {}", b.lower, b.upper);
    }

    #[test]
    fn closed_form_split_respects_band_and_floor(
        zeta in 0.05..0.9f64,
        w_mu in 5e6..5e7f64,
        w_m in 5e7..1e9f64,
        g_mu in 0.5..4.0f64,
        g_m in 0.1..3.0f64,
        inversion in proptest::bool::ANY,
    ) {
        let s = SpectrumConfig {
            w_mu_hz: w_mu,
            w_m_hz: w_m,
            f_s_hz: 244.14e3,
            delta_linear: 5.0118723362727224,
            epsilon: 0.7,
            zeta,
        };
        let variant = if inversion { PaprVariant::Inversion } else { PaprVariant::LogConstant };
        let r = optimize_closed_form(&s, g_mu, g_m, variant).unwrap();
        prop_assert!((0.0..=w_mu).contains(&r.w_mu_ul_hz));
        prop_assert!(r.w_m_ul_hz <= w_m + 1e-6);
        if r.feasible {
            prop_assert!(
                r.achieved_ratio >= zeta * (1.0 - 1e-6) - 1e-9,
                "feasible split misses the floor: {} < {zeta}",
                r.achieved_ratio
            );
        }
        if !r.clamped {
            prop_assert!(
                (r.achieved_ratio - zeta).abs() <= zeta * 1e-6,
                "interior optimum off the floor: {} vs {zeta}",
                r.achieved_ratio
            );
        }
    }
}
