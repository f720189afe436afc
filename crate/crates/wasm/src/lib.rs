//! Thin JSON-over-strings façade for the browser demo. Every export takes
//! plain numbers and returns a JSON string, so the page needs no generated
//! type glue beyond the wasm-bindgen loader.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use udnsim::allocator::{optimize_closed_form, PaprVariant, SpectrumConfig};
use udnsim::analytic;
use udnsim::blockage::{avg_los_distance, beta_param, eta_param, BuildingStats};
use udnsim::{Error, Result};

fn to_json<T: Serialize>(rows: &T) -> Result<String> {
    serde_json::to_string(rows).map_err(|e| Error::invalid(format!("serialize failed: {e}")))
}

fn js<T>(r: Result<T>) -> std::result::Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[derive(Serialize)]
struct Sub6Row {
    lambda_hat: f64,
    lower: f64,
    upper: f64,
    exact: f64,
    asymptote: Option<f64>,
}

fn sub6_se_rows(alpha_mu: f64, lambda_hats: &[f64]) -> Result<String> {
    let mut rows = Vec::with_capacity(lambda_hats.len());
    for &lh in lambda_hats {
        let b = analytic::se_bounds_muw(lh, alpha_mu)?;
        rows.push(Sub6Row {
            lambda_hat: lh,
            lower: b.lower,
            upper: b.upper,
            exact: analytic::se_exact_muw(lh, alpha_mu)?,
            asymptote: if lh >= 1.0 {
                Some(analytic::se_asymptotic_muw(lh, alpha_mu)?)
            } else {
                None
            },
        });
    }
    to_json(&rows)
}

/// Sub-6GHz mean SE versus densification: closed-form bracket, exact
/// integral, and dense-network asymptote, as a JSON array.
#[wasm_bindgen]
pub fn sub6_se_table(
    alpha_mu: f64,
    lambda_hats: Vec<f64>,
) -> std::result::Result<String, JsError> {
    js(sub6_se_rows(alpha_mu, &lambda_hats))
}

#[derive(Serialize)]
struct MmwRow {
    lambda_hat: f64,
    lower: f64,
    upper: f64,
    asymptote: Option<f64>,
}

fn mmw_se_rows(
    alpha_m: f64,
    theta_rad: f64,
    r_l_m: f64,
    lambda_u: f64,
    lambda_hats: &[f64],
) -> Result<String> {
    let mut rows = Vec::with_capacity(lambda_hats.len());
    for &lh in lambda_hats {
        let lambda_m = lh * lambda_u;
        let b = analytic::se_bounds_mmw(lh, lambda_m, alpha_m, theta_rad, r_l_m)?;
        rows.push(MmwRow {
            lambda_hat: lh,
            lower: b.lower,
            upper: b.upper,
            asymptote: if lh >= 1.0 {
                Some(analytic::se_asymptotic_mmw(lh, lambda_m, alpha_m, r_l_m)?)
            } else {
                None
            },
        });
    }
    to_json(&rows)
}

/// Directional-tier mean SE bracket versus densification (the mmWave BS
/// density scales as lambda_hat * lambda_u), as a JSON array.
#[wasm_bindgen]
pub fn mmw_se_table(
    alpha_m: f64,
    theta_rad: f64,
    r_l_m: f64,
    lambda_u: f64,
    lambda_hats: Vec<f64>,
) -> std::result::Result<String, JsError> {
    js(mmw_se_rows(alpha_m, theta_rad, r_l_m, lambda_u, &lambda_hats))
}

#[derive(Serialize)]
struct BlockageSummary {
    beta_per_m: f64,
    eta: f64,
    r_l_m: f64,
}

fn blockage_rows(
    avg_perimeter_m: f64,
    avg_area_m2: f64,
    coverage: f64,
    height_ln_mu: f64,
    height_ln_sigma: f64,
    bs_height_m: f64,
) -> Result<String> {
    let stats = BuildingStats {
        avg_perimeter_m,
        avg_area_m2,
        coverage,
        height_ln_mu,
        height_ln_sigma,
        bs_height_m,
    };
    stats.validate()?;
    to_json(&BlockageSummary {
        beta_per_m: beta_param(&stats)?,
        eta: eta_param(&stats)?,
        r_l_m: avg_los_distance(&stats)?,
    })
}

/// Blockage parameters and average LOS range from aggregate building
/// statistics, as a JSON object.
#[wasm_bindgen]
pub fn blockage_summary(
    avg_perimeter_m: f64,
    avg_area_m2: f64,
    coverage: f64,
    height_ln_mu: f64,
    height_ln_sigma: f64,
    bs_height_m: f64,
) -> std::result::Result<String, JsError> {
    js(blockage_rows(
        avg_perimeter_m,
        avg_area_m2,
        coverage,
        height_ln_mu,
        height_ln_sigma,
        bs_height_m,
    ))
}

#[derive(Serialize)]
struct AllocationRow {
    w_m_hz: f64,
    w_mu_ul_hz: f64,
    w_m_ul_hz: f64,
    rate_dl: f64,
    rate_ul: f64,
    clamped: bool,
    feasible: bool,
}

#[allow(clippy::too_many_arguments)]
fn allocation_rows(
    w_mu_hz: f64,
    zeta: f64,
    f_s_hz: f64,
    delta_db: f64,
    epsilon: f64,
    log_constant_cap: bool,
    gamma_mu: f64,
    gamma_m: f64,
    w_m_list_hz: &[f64],
) -> Result<String> {
    let variant = if log_constant_cap {
        PaprVariant::LogConstant
    } else {
        PaprVariant::Inversion
    };
    let mut rows = Vec::with_capacity(w_m_list_hz.len());
    for &w_m_hz in w_m_list_hz {
        let spec = SpectrumConfig {
            w_mu_hz,
            w_m_hz,
            f_s_hz,
            delta_linear: 10f64.powf(delta_db / 10.0),
            epsilon,
            zeta,
        };
        let r = optimize_closed_form(&spec, gamma_mu, gamma_m, variant)?;
        rows.push(AllocationRow {
            w_m_hz,
            w_mu_ul_hz: r.w_mu_ul_hz,
            w_m_ul_hz: r.w_m_ul_hz,
            rate_dl: r.rate_dl,
            rate_ul: r.rate_ul,
            clamped: r.clamped,
            feasible: r.feasible,
        });
    }
    to_json(&rows)
}

/// Closed-form uplink/downlink bandwidth split swept over the mmWave
/// bandwidth, as a JSON array. Per-tier SE values come in as gammas so the
/// page can tie them to the SE panel.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn allocation_curve(
    w_mu_hz: f64,
    zeta: f64,
    f_s_hz: f64,
    delta_db: f64,
    epsilon: f64,
    log_constant_cap: bool,
    gamma_mu: f64,
    gamma_m: f64,
    w_m_list_hz: Vec<f64>,
) -> std::result::Result<String, JsError> {
    js(allocation_rows(
        w_mu_hz,
        zeta,
        f_s_hz,
        delta_db,
        epsilon,
        log_constant_cap,
        gamma_mu,
        gamma_m,
        &w_m_list_hz,
    ))
}

/// Per-tier dense-network SE values for the allocation panel.
#[wasm_bindgen]
pub fn asymptotic_se_pair(
    lambda_u: f64,
    lambda_m: f64,
    lambda_mu: f64,
    alpha_mu: f64,
    alpha_m: f64,
    r_l_m: f64,
) -> std::result::Result<String, JsError> {
    let densities = udnsim::geometry::DensityConfig { lambda_m, lambda_mu, lambda_u };
    let pair = udnsim::allocator::asymptotic_gammas(&densities, alpha_mu, alpha_m, r_l_m);
    js(pair.and_then(|(gamma_mu, gamma_m)| {
        to_json(&serde_json::json!({ "gamma_mu": gamma_mu, "gamma_m": gamma_m }))
    }))
}
