//! Uplink/downlink bandwidth partitioning across the two tiers. The mmWave
//! uplink share is capped by a single-carrier PAPR-outage constraint; the
//! sub-6GHz uplink share is then the smallest bandwidth meeting a minimum
//! uplink/downlink rate ratio, which maximizes the downlink rate.

use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::error::{require, require_finite, Error, Result};
use crate::geometry::DensityConfig;
use crate::numeric::bisect_root;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectrumConfig {
    /// Sub-6GHz band, Hz.
    pub w_mu_hz: f64,
    /// mmWave band, Hz.
    pub w_m_hz: f64,
    /// Subcarrier spacing of the uplink waveform, Hz.
    pub f_s_hz: f64,
    /// PAPR threshold, linear (not dB).
    pub delta_linear: f64,
    /// Tolerated PAPR outage probability, in (0,1).
    pub epsilon: f64,
    /// Minimum uplink/downlink rate ratio, in [0,1].
    pub zeta: f64,
}

impl SpectrumConfig {
    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.w_mu_hz, "sub-6GHz bandwidth"),
            (self.w_m_hz, "mmWave bandwidth"),
            (self.f_s_hz, "subcarrier spacing"),
            (self.delta_linear, "PAPR threshold"),
        ] {
            require_finite(v, name)?;
            require(v > 0.0, &format!("{name} must be positive"))?;
        }
        require_finite(self.epsilon, "outage tolerance")?;
        require(
            self.epsilon > 0.0 && self.epsilon < 1.0,
            "outage tolerance must lie strictly between 0 and 1",
        )?;
        require_finite(self.zeta, "rate-ratio floor")?;
        require(
            self.zeta >= 0.0 && self.zeta <= 1.0,
            "rate-ratio floor must lie in [0, 1]",
        )?;
        Ok(())
    }
}

/// Which closed-form expression caps the mmWave uplink bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaprVariant {
    /// Exact inversion of the outage expression at probability epsilon.
    #[default]
    Inversion,
    /// The compact constant-form approximation with ln(1/epsilon) in place
    /// of the inverted term; looser for small epsilon.
    LogConstant,
}

impl PaprVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            PaprVariant::Inversion => "inversion",
            PaprVariant::LogConstant => "log_constant",
        }
    }
}

impl std::str::FromStr for PaprVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inversion" => Ok(PaprVariant::Inversion),
            "log_constant" => Ok(PaprVariant::LogConstant),
            other => Err(Error::invalid(format!("unknown PAPR variant {other:?}"))),
        }
    }
}

/// Probability that a single-carrier uplink of bandwidth `w_hz` exceeds
/// PAPR threshold `delta_linear`:
///
///   P = 1 - exp( -(w / f_s) e^(-delta) sqrt(pi delta / 3) )
pub fn papr_outage(w_hz: f64, f_s_hz: f64, delta_linear: f64) -> Result<f64> {
    require_finite(w_hz, "bandwidth")?;
    require(w_hz >= 0.0, "bandwidth must be nonnegative")?;
    require(f_s_hz > 0.0 && f_s_hz.is_finite(), "subcarrier spacing must be positive")?;
    require(delta_linear > 0.0 && delta_linear.is_finite(), "PAPR threshold must be positive")?;
    let x = w_hz / f_s_hz
        * (-delta_linear).exp()
        * (std::f64::consts::PI * delta_linear / 3.0).sqrt();
    Ok(-(-x).exp_m1())
}

/// Largest bandwidth whose PAPR outage stays at `epsilon`: the exact
/// inversion of `papr_outage`.
pub fn papr_bandwidth_for(f_s_hz: f64, delta_linear: f64, epsilon: f64) -> Result<f64> {
    require(f_s_hz > 0.0 && f_s_hz.is_finite(), "subcarrier spacing must be positive")?;
    require(delta_linear > 0.0 && delta_linear.is_finite(), "PAPR threshold must be positive")?;
    require(epsilon > 0.0 && epsilon < 1.0, "outage tolerance must lie in (0,1)")?;
    Ok(f_s_hz
        * delta_linear.exp()
        * (3.0 / (std::f64::consts::PI * delta_linear)).sqrt()
        * -(-epsilon).ln_1p())
}

/// Constant-form bandwidth cap: sqrt(3) f_s e^delta (pi delta)^(-1/2) / ln(1/epsilon).
pub fn papr_log_constant(f_s_hz: f64, delta_linear: f64, epsilon: f64) -> Result<f64> {
    require(f_s_hz > 0.0 && f_s_hz.is_finite(), "subcarrier spacing must be positive")?;
    require(delta_linear > 0.0 && delta_linear.is_finite(), "PAPR threshold must be positive")?;
    require(epsilon > 0.0 && epsilon < 1.0, "outage tolerance must lie in (0,1)")?;
    Ok(3f64.sqrt() * f_s_hz * delta_linear.exp()
        / (std::f64::consts::PI * delta_linear).sqrt()
        / (1.0 / epsilon).ln())
}

/// The mmWave uplink bandwidth cap, with both candidate expressions
/// reported so callers can see how far apart they are.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PaprCap {
    pub w_m_ul_hz: f64,
    pub variant: PaprVariant,
    /// True when the whole mmWave band fits under the cap, i.e. the min
    /// was taken at w_m.
    pub band_limited: bool,
    pub inversion_hz: f64,
    pub log_constant_hz: f64,
}

pub fn max_w_m_ul(spec: &SpectrumConfig, variant: PaprVariant) -> Result<PaprCap> {
    spec.validate()?;
    let inversion_hz = papr_bandwidth_for(spec.f_s_hz, spec.delta_linear, spec.epsilon)?;
    let log_constant_hz = papr_log_constant(spec.f_s_hz, spec.delta_linear, spec.epsilon)?;
    let cap = match variant {
        PaprVariant::Inversion => inversion_hz,
        PaprVariant::LogConstant => log_constant_hz,
    };
    Ok(PaprCap {
        w_m_ul_hz: cap.min(spec.w_m_hz),
        variant,
        band_limited: spec.w_m_hz <= cap,
        inversion_hz,
        log_constant_hz,
    })
}

/// Mean spectral efficiencies (nats/s/Hz) feeding the rate model, one per
/// tier and direction. Any consistent source works: asymptotes, bound
/// midpoints, or Monte Carlo estimates.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SeSet {
    pub mu_dl: f64,
    pub mu_ul: f64,
    pub m_dl: f64,
    pub m_ul: f64,
}

impl SeSet {
    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.mu_dl, "sub-6GHz DL SE"),
            (self.mu_ul, "sub-6GHz UL SE"),
            (self.m_dl, "mmWave DL SE"),
            (self.m_ul, "mmWave UL SE"),
        ] {
            require_finite(v, name)?;
            require(v >= 0.0, &format!("{name} must be nonnegative"))?;
        }
        Ok(())
    }

    /// Direction-symmetric set from one per-tier value.
    pub fn symmetric(gamma_mu: f64, gamma_m: f64) -> SeSet {
        SeSet { mu_dl: gamma_mu, mu_ul: gamma_mu, m_dl: gamma_m, m_ul: gamma_m }
    }
}

/// Sum rates for a bandwidth split: UL gets `w_mu_ul` of the sub-6GHz band
/// and `w_m_ul` of the mmWave band, DL gets the rest. Nats/s.
pub fn rates(
    w_mu_ul_hz: f64,
    w_m_ul_hz: f64,
    se: &SeSet,
    spec: &SpectrumConfig,
) -> Result<(f64, f64)> {
    spec.validate()?;
    se.validate()?;
    require(
        (0.0..=spec.w_mu_hz).contains(&w_mu_ul_hz),
        "sub-6GHz UL bandwidth outside [0, w_mu]",
    )?;
    require(
        (0.0..=spec.w_m_hz).contains(&w_m_ul_hz),
        "mmWave UL bandwidth outside [0, w_m]",
    )?;
    let r_dl = (spec.w_mu_hz - w_mu_ul_hz) * se.mu_dl + (spec.w_m_hz - w_m_ul_hz) * se.m_dl;
    let r_ul = w_mu_ul_hz * se.mu_ul + w_m_ul_hz * se.m_ul;
    Ok((r_dl, r_ul))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AllocationResult {
    pub w_mu_ul_hz: f64,
    pub w_m_ul_hz: f64,
    /// Closed-form value before projection onto [0, w_mu]; equals
    /// `w_mu_ul_hz` when no clamping occurred.
    pub w_mu_ul_unclamped_hz: f64,
    pub rate_dl: f64,
    pub rate_ul: f64,
    /// rate_ul / rate_dl actually achieved (infinite if rate_dl is 0).
    pub achieved_ratio: f64,
    pub clamped: bool,
    /// False when even the clamped allocation misses the ratio floor.
    pub feasible: bool,
    pub papr: PaprCap,
}

fn finish(
    spec: &SpectrumConfig,
    se: &SeSet,
    papr: PaprCap,
    w_raw: f64,
) -> Result<AllocationResult> {
    let w = w_raw.clamp(0.0, spec.w_mu_hz);
    let (rate_dl, rate_ul) = rates(w, papr.w_m_ul_hz, se, spec)?;
    let achieved_ratio = if rate_dl > 0.0 { rate_ul / rate_dl } else { f64::INFINITY };
    let feasible = rate_ul >= spec.zeta * rate_dl * (1.0 - 1e-9) - 1e-12;
    Ok(AllocationResult {
        w_mu_ul_hz: w,
        w_m_ul_hz: papr.w_m_ul_hz,
        w_mu_ul_unclamped_hz: w_raw,
        rate_dl,
        rate_ul,
        achieved_ratio,
        clamped: w != w_raw,
        feasible,
        papr,
    })
}

/// Closed-form optimizer under the dense-network rate model, where both
/// directions of a tier share one SE value gamma:
///
///   w_mu_ul = w_mu/(1 + 1/zeta) + (w_m/(1 + 1/zeta) - w_m_ul) gamma_m / gamma_mu
///
/// projected onto [0, w_mu]. The mmWave uplink share is the PAPR cap.
pub fn optimize_closed_form(
    spec: &SpectrumConfig,
    gamma_mu: f64,
    gamma_m: f64,
    variant: PaprVariant,
) -> Result<AllocationResult> {
    spec.validate()?;
    require_finite(gamma_mu, "sub-6GHz SE")?;
    require_finite(gamma_m, "mmWave SE")?;
    require(gamma_mu > 0.0, "sub-6GHz SE must be positive")?;
    require(gamma_m >= 0.0, "mmWave SE must be nonnegative")?;

    let papr = max_w_m_ul(spec, variant)?;
    // 1/(1 + 1/zeta) -> 0 as zeta -> 0: all constraints then satisfied by
    // pure-mmWave uplink and the formula degenerates gracefully.
    let denom = 1.0 + 1.0 / spec.zeta;
    let share = if denom.is_infinite() { 0.0 } else { 1.0 / denom };
    let w_raw = spec.w_mu_hz * share + (spec.w_m_hz * share - papr.w_m_ul_hz) * gamma_m / gamma_mu;
    finish(spec, &SeSet::symmetric(gamma_mu, gamma_m), papr, w_raw)
}

/// Numeric optimizer: finds the smallest sub-6GHz uplink bandwidth meeting
/// the rate-ratio floor by bisection on the monotone excess-rate function.
/// Works for any SE set, including direction-asymmetric ones.
pub fn optimize_numeric(
    spec: &SpectrumConfig,
    se: &SeSet,
    variant: PaprVariant,
) -> Result<AllocationResult> {
    spec.validate()?;
    se.validate()?;
    let papr = max_w_m_ul(spec, variant)?;
    let g = |w: f64| -> f64 {
        let r_dl = (spec.w_mu_hz - w) * se.mu_dl + (spec.w_m_hz - papr.w_m_ul_hz) * se.m_dl;
        let r_ul = w * se.mu_ul + papr.w_m_ul_hz * se.m_ul;
        r_ul - spec.zeta * r_dl
    };
    let w_raw = if g(0.0) >= 0.0 {
        0.0
    } else if g(spec.w_mu_hz) < 0.0 {
        // Even the whole band uplink misses the floor; report the best
        // effort and let the caller decide how hard to fail.
        spec.w_mu_hz
    } else {
        bisect_root(g, 0.0, spec.w_mu_hz, spec.w_mu_hz * 1e-13)?
    };
    finish(spec, se, papr, w_raw)
}

/// Best achievable downlink rate when the ratio floor binds and the PAPR
/// cap is ignored: (w_mu gamma_mu + w_m gamma_m) / (1 + zeta).
pub fn optimal_dl_rate(spec: &SpectrumConfig, gamma_mu: f64, gamma_m: f64) -> Result<f64> {
    spec.validate()?;
    require(gamma_mu >= 0.0 && gamma_m >= 0.0, "SE values must be nonnegative")?;
    Ok((spec.w_mu_hz * gamma_mu + spec.w_m_hz * gamma_m) / (1.0 + spec.zeta))
}

/// Dense-network per-tier SE values from the deployment densities:
/// gamma_mu = (alpha_mu/2) ln(lambda_hat_mu),
/// gamma_m  = (alpha_m C_L / 2) ln(lambda_hat_m).
pub fn asymptotic_gammas(
    densities: &DensityConfig,
    alpha_mu: f64,
    alpha_m: f64,
    r_l: f64,
) -> Result<(f64, f64)> {
    densities.validate()?;
    let lh_mu = densities.lambda_hat_mu();
    let lh_m = densities.lambda_hat_m();
    for (lh, name) in [(lh_mu, "sub-6GHz"), (lh_m, "mmWave")] {
        require(
            lh > 1.0,
            &format!("{name} BS density must exceed the user density for the dense-network rate model"),
        )?;
    }
    let gamma_mu = analytic::se_asymptotic_muw(lh_mu, alpha_mu)?;
    let gamma_m = analytic::se_asymptotic_mmw(lh_m, densities.lambda_m, alpha_m, r_l)?;
    Ok((gamma_mu, gamma_m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec() -> SpectrumConfig {
        SpectrumConfig {
            w_mu_hz: 20e6,
            w_m_hz: 500e6,
            f_s_hz: 244.14e3,
            delta_linear: 10f64.powf(0.7),
            epsilon: 0.7,
            zeta: 0.2,
        }
    }

    #[test]
    fn outage_round_trip_is_exact() {
        let s = spec();
        let w = papr_bandwidth_for(s.f_s_hz, s.delta_linear, s.epsilon).unwrap();
        let eps = papr_outage(w, s.f_s_hz, s.delta_linear).unwrap();
        assert_relative_eq!(eps, s.epsilon, epsilon = 1e-12);
    }

    #[test]
    fn outage_monotone_in_bandwidth() {
        let s = spec();
        let mut prev = -1.0;
        for w in [0.0, 1e6, 1e7, 1e8, 1e9] {
            let p = papr_outage(w, s.f_s_hz, s.delta_linear).unwrap();
            assert!(p >= prev && (0.0..=1.0).contains(&p));
            prev = p;
        }
        assert_eq!(papr_outage(0.0, s.f_s_hz, s.delta_linear).unwrap(), 0.0);
    }

    #[test]
    fn cap_reports_both_expressions() {
        let s = spec();
        let cap = max_w_m_ul(&s, PaprVariant::Inversion).unwrap();
        assert!(cap.inversion_hz < cap.log_constant_hz);
        assert_eq!(cap.w_m_ul_hz, cap.inversion_hz.min(s.w_m_hz));
        assert!(!cap.band_limited);
        // A narrow mmWave band takes the min at w_m.
        let narrow = SpectrumConfig { w_m_hz: 1e6, ..s };
        let cap = max_w_m_ul(&narrow, PaprVariant::Inversion).unwrap();
        assert_eq!(cap.w_m_ul_hz, 1e6);
        assert!(cap.band_limited);
    }

    #[test]
    fn zero_ratio_floor_needs_no_sub6_uplink() {
        let s = SpectrumConfig { zeta: 0.0, ..spec() };
        let r = optimize_closed_form(&s, 2.77, 1.04, PaprVariant::Inversion).unwrap();
        assert_eq!(r.w_mu_ul_hz, 0.0);
        assert!(r.clamped); // raw value is negative
        assert!(r.feasible);
        assert!(r.rate_ul > 0.0);
    }

    #[test]
    fn numeric_matches_closed_form_interior() {
        // The constant-form cap leaves the optimum interior at these SEs;
        // the inversion cap pushes it past w_mu and both paths must agree
        // on the clamp.
        let s = spec();
        let (gmu, gm) = (2.7725887222397811, 1.0377791518254577);
        let cf = optimize_closed_form(&s, gmu, gm, PaprVariant::LogConstant).unwrap();
        let nm =
            optimize_numeric(&s, &SeSet::symmetric(gmu, gm), PaprVariant::LogConstant).unwrap();
        assert!(!cf.clamped);
        assert_relative_eq!(cf.w_mu_ul_hz, nm.w_mu_ul_hz, max_relative = 1e-10);
        assert_relative_eq!(nm.achieved_ratio, s.zeta, epsilon = 1e-11);

        let cf = optimize_closed_form(&s, gmu, gm, PaprVariant::Inversion).unwrap();
        let nm = optimize_numeric(&s, &SeSet::symmetric(gmu, gm), PaprVariant::Inversion).unwrap();
        assert!(cf.clamped);
        assert_eq!(cf.w_mu_ul_hz, s.w_mu_hz);
        assert_eq!(nm.w_mu_ul_hz, s.w_mu_hz);
        assert!(!cf.feasible && !nm.feasible);
    }

    #[test]
    fn infeasible_reported_not_errored() {
        // Tiny mmWave UL SE and a full ratio floor: even all-uplink sub-6GHz
        // cannot reach zeta = 1 when DL keeps the whole mmWave band.
        let s = SpectrumConfig { zeta: 1.0, ..spec() };
        let se = SeSet { mu_dl: 3.0, mu_ul: 0.1, m_dl: 3.0, m_ul: 0.0 };
        let r = optimize_numeric(&s, &se, PaprVariant::Inversion).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.w_mu_ul_hz, s.w_mu_hz);
        assert!(r.achieved_ratio < s.zeta);
    }

    #[test]
    fn ratio_floor_zero_is_always_feasible() {
        let s = SpectrumConfig { zeta: 0.0, ..spec() };
        let se = SeSet { mu_dl: 3.0, mu_ul: 0.0, m_dl: 3.0, m_ul: 0.0 };
        let r = optimize_numeric(&s, &se, PaprVariant::Inversion).unwrap();
        assert!(r.feasible);
        assert_eq!(r.w_mu_ul_hz, 0.0);
    }
}
