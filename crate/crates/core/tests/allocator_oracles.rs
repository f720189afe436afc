//! Spectrum-split optimizer against frozen values from an independent
//! implementation, plus exact identities the optimum must satisfy.

use udnsim::allocator::{
    asymptotic_gammas, max_w_m_ul, optimal_dl_rate, optimize_closed_form, optimize_numeric,
    papr_bandwidth_for, papr_outage, papr_log_constant, rates, PaprVariant, SeSet,
    SpectrumConfig,
};
use udnsim::geometry::DensityConfig;

const FS: f64 = 244.14e3;

fn delta7db() -> f64 {
    10f64.powf(0.7)
}

fn spec(w_m_hz: f64, zeta: f64) -> SpectrumConfig {
    SpectrumConfig {
        w_mu_hz: 20e6,
        w_m_hz,
        f_s_hz: FS,
        delta_linear: delta7db(),
        epsilon: 0.7,
        zeta,
    }
}

fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    assert!(
        (got - want).abs() <= tol,
        "{what}: got {got}, want {want} (tol {tol})"
    );
}

#[test]
fn peak_power_bandwidth_frozen_values() {
    let d = delta7db();
    assert_close(d, 5.0118723363, 1e-9, "7 dB in linear units");
    let wi = papr_bandwidth_for(FS, d, 0.7).unwrap();
    assert_close(wi, 19_269_471.6976, 1e-3, "outage-inverted bandwidth");
    assert_close(papr_outage(wi, FS, d).unwrap(), 0.7, 1e-12, "round trip outage");
    assert_close(papr_log_constant(FS, d, 0.7).unwrap(), 44_872_527.1749, 1e-3, "log-ratio cap");
    // Same formulas with the clipping threshold taken as a raw linear 7.
    assert_close(papr_bandwidth_for(FS, 7.0, 0.7).unwrap(), 119_056_650.9224, 1e-3, "raw-linear inversion");
    assert_close(papr_log_constant(FS, 7.0, 0.7).unwrap(), 277_245_421.5506, 1e-3, "raw-linear cap");
}

#[test]
fn dense_network_se_slopes_frozen_values() {
    let d = DensityConfig { lambda_m: 2e-4, lambda_mu: 4e-4, lambda_u: 1e-4 };
    let (g_mu, g_m) = asymptotic_gammas(&d, 4.0, 3.0, 100.0).unwrap();
    assert_close(g_mu, 2.7725887222, 1e-9, "sub-6GHz slope");
    assert_close(g_m, 1.0377791518, 1e-9, "beam-tier slope");
    assert_close(g_m / g_mu, 0.3742997090, 1e-9, "slope ratio");
}

#[test]
fn closed_form_split_frozen_values() {
    let (g_mu, g_m) = (2.7725887222397811, 1.0377791518254577);

    // 500 MHz band: the outage-inverted cap wants more sub-6GHz uplink than
    // exists; the log-ratio cap lands in the interior.
    let r = optimize_closed_form(&spec(500e6, 0.2), g_mu, g_m, PaprVariant::Inversion).unwrap();
    assert_close(r.w_mu_ul_unclamped_hz, 27_312_418.10, 0.5, "inversion raw at 500 MHz");
    assert!(r.clamped);
    assert_close(r.w_mu_ul_hz, 20e6, 1e-6, "inversion clamps to full band");

    let r = optimize_closed_form(&spec(500e6, 0.2), g_mu, g_m, PaprVariant::LogConstant).unwrap();
    assert_close(r.w_mu_ul_unclamped_hz, 17_729_201.89, 0.5, "log-ratio raw at 500 MHz");
    assert!(!r.clamped && r.feasible);
    assert_close(r.w_mu_ul_hz / 20e6, 0.8865, 1e-4, "log-ratio band share");
    assert_close(r.achieved_ratio, 0.2, 1e-9, "interior optimum sits on the floor");

    // 1 GHz band: both variants overflow the sub-6GHz band.
    let r = optimize_closed_form(&spec(1e9, 0.2), g_mu, g_m, PaprVariant::Inversion).unwrap();
    assert_close(r.w_mu_ul_unclamped_hz, 58_504_060.51, 0.5, "inversion raw at 1 GHz");
    assert!(r.clamped);
    let r = optimize_closed_form(&spec(1e9, 0.2), g_mu, g_m, PaprVariant::LogConstant).unwrap();
    assert_close(r.w_mu_ul_unclamped_hz, 48_920_844.30, 0.5, "log-ratio raw at 1 GHz");
    assert!(r.clamped);
    assert_close(r.w_mu_ul_hz, 20e6, 1e-6, "log-ratio clamps to full band");
}

#[test]
fn grid_corners_and_floor_plugback() {
    let (g_mu, g_m) = (2.7725887222397811, 1.0377791518254577);
    let corners = [
        (0.16, 150e6, 3_290_194.950954),
        (0.24, 290e6, 17_667_490.532671),
        (0.20, 220e6, 9_845_098.347231),
    ];
    for (zeta, wm, want) in corners {
        let s = spec(wm, zeta);
        let r = optimize_closed_form(&s, g_mu, g_m, PaprVariant::Inversion).unwrap();
        assert!(!r.clamped, "corner zeta={zeta} wm={wm} should be interior");
        assert_close(r.w_mu_ul_hz, want, want * 1e-9, "corner split");
        // Plugging the optimum back into the rate model recovers the floor
        // with equality.
        let (r_dl, r_ul) = rates(r.w_mu_ul_hz, r.w_m_ul_hz, &SeSet::symmetric(g_mu, g_m), &s).unwrap();
        assert_close(r_ul / r_dl, zeta, zeta * 1e-10, "floor plug-back");
    }
}

#[test]
fn numeric_and_closed_form_agree_on_grid() {
    let (g_mu, g_m) = (2.7725887222397811, 1.0377791518254577);
    let se = SeSet::symmetric(g_mu, g_m);
    for zeta in [0.16, 0.18, 0.20, 0.22, 0.24] {
        for wm in [150e6, 185e6, 220e6, 255e6, 290e6] {
            let s = spec(wm, zeta);
            let cf = optimize_closed_form(&s, g_mu, g_m, PaprVariant::Inversion).unwrap();
            let nm = optimize_numeric(&s, &se, PaprVariant::Inversion).unwrap();
            assert!(!cf.clamped);
            assert_close(
                nm.w_mu_ul_hz,
                cf.w_mu_ul_hz,
                cf.w_mu_ul_hz.abs() * 1e-8,
                &format!("zeta={zeta} wm={wm}"),
            );
        }
    }
}

#[test]
fn best_rate_identity_at_interior_optimum() {
    let (g_mu, g_m) = (2.7725887222397811, 1.0377791518254577);
    let s = spec(500e6, 0.2);
    let rd_star = optimal_dl_rate(&s, g_mu, g_m).unwrap();
    assert_close(rd_star, 478_617_791.9721, 1e-2, "best rate frozen value");
    // At an interior optimum the downlink rate equals the best achievable
    // one regardless of how the uplink share splits across tiers.
    let r = optimize_closed_form(&s, g_mu, g_m, PaprVariant::LogConstant).unwrap();
    assert!(!r.clamped);
    assert_close(r.rate_dl, rd_star, rd_star * 1e-9, "interior optimum attains best rate");
}

#[test]
fn cap_reporting_is_consistent() {
    let s = spec(500e6, 0.2);
    for variant in [PaprVariant::Inversion, PaprVariant::LogConstant] {
        let cap = max_w_m_ul(&s, variant).unwrap();
        assert!(cap.inversion_hz > 0.0 && cap.log_constant_hz > 0.0);
        let chosen = match variant {
            PaprVariant::Inversion => cap.inversion_hz,
            PaprVariant::LogConstant => cap.log_constant_hz,
        };
        assert_close(cap.w_m_ul_hz, chosen.min(s.w_m_hz), 1e-9, "cap honors band edge");
        assert_eq!(cap.band_limited, chosen >= s.w_m_hz);
    }
    // A band narrower than the cap binds instead.
    let narrow = spec(5e6, 0.2);
    let cap = max_w_m_ul(&narrow, PaprVariant::Inversion).unwrap();
    assert!(cap.band_limited);
    assert_close(cap.w_m_ul_hz, 5e6, 1e-9, "narrow band binds");
}
