//! Closed-form and quadrature-based spectral-efficiency results for the
//! two-tier network: the interference functional rho, the exact mean SE of
//! the sub-6GHz tier, closed-form lower/upper bounds for both tiers, and
//! the dense-network asymptotes. All SE values are in nats/s/Hz.

use crate::error::{Error, Result};
use crate::numeric::integrate;

/// Closed-form lower/upper bracket for a mean SE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Path-loss exponents at or below 2 make the interference functional
/// diverge; reject anything that close to the boundary.
pub const ALPHA_MIN: f64 = 2.0 + 1e-6;

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha < ALPHA_MIN {
        return Err(Error::invalid(format!(
            "path-loss exponent must be a finite value above {ALPHA_MIN}, got {alpha}"
        )));
    }
    Ok(())
}

fn check_lambda_hat(lambda_hat: f64) -> Result<()> {
    if !(lambda_hat.is_finite() && lambda_hat > 0.0) {
        return Err(Error::invalid(format!(
            "BS/user density ratio must be positive and finite, got {lambda_hat}"
        )));
    }
    Ok(())
}

/// Limit of the interference functional: (2*pi/alpha) * csc(2*pi/alpha).
pub fn rho_const(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let x = 2.0 * std::f64::consts::PI / alpha;
    Ok(x / x.sin())
}

/// Truncated interference functional
///   rho_t(alpha, t) = integral over u in [(e^t - 1)^(-2/alpha), inf)
///                     of du / (1 + u^(alpha/2)).
///
/// Monotone nondecreasing in t, with rho_t -> rho_const as t -> inf.
/// Evaluated as adaptive quadrature up to a cut M plus an alternating
/// tail series in M^(-alpha/2), whose truncation error is bounded by the
/// first omitted term.
pub fn rho_t(alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid(format!("truncation parameter t must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let p = alpha / 2.0;
    let a = t.exp_m1().powf(-2.0 / alpha);

    // Pick M so M^(-p) <= 1/16: the series then gains >4 bits per term.
    let m_cut = a.max(16f64.powf(1.0 / p));

    let mut head = 0.0;
    if a < m_cut {
        let q = integrate(|u| 1.0 / (1.0 + u.powf(p)), a, m_cut, 1e-12, 1e-10)?;
        head = q.value;
    }

    // Tail: sum over j >= 1 of (-1)^(j+1) M^(1 - j*p) / (j*p - 1).
    let mut tail = 0.0;
    let mut sign = 1.0;
    for j in 1..=80 {
        let jp = j as f64 * p;
        let term = m_cut.powf(1.0 - jp) / (jp - 1.0);
        tail += sign * term;
        if term < 1e-15 * (head + tail).abs().max(1e-300) {
            break;
        }
        sign = -sign;
    }

    Ok(head + tail)
}

/// Exact mean SE of a sub-6GHz link under nearest-BS association and
/// saturated scheduling, as a single integral over the SE threshold t:
///
///   SE = integral over t >= 0 of dt / (1 + (e^t - 1)^(2/alpha) * rho_t / lambda_hat)
pub fn se_exact_muw(lambda_hat: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_lambda_hat(lambda_hat)?;
    let rc = rho_const(alpha)?;

    // Integrand tail decays like (lambda_hat/rho_const) e^(-2t/alpha);
    // place the cut so the dropped mass is ~1e-9.
    let t_max = (alpha / 2.0) * (lambda_hat * (alpha / 2.0) / (rc * 1e-9)).ln();
    let integrand = |t: f64| -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        let z = t.exp_m1().powf(2.0 / alpha);
        let r = rho_t(alpha, t).unwrap_or(f64::NAN);
        1.0 / (1.0 + z * r / lambda_hat)
    };
    let q = integrate(integrand, 0.0, t_max, 1e-9, 1e-7)?;
    Ok(q.value)
}

/// First-order (linearized) form of the same integral:
///
///   SE ~= integral of (1 - (e^t - 1)^(2/alpha) * rho_t / lambda_hat)^+ dt
///
/// Sits between the closed-form bounds of `se_bounds_muw` and below the
/// exact value; used mainly as a consistency probe in tests.
pub fn se_linearized_muw(lambda_hat: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_lambda_hat(lambda_hat)?;

    let g = |t: f64| -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        let z = t.exp_m1().powf(2.0 / alpha);
        let r = rho_t(alpha, t).unwrap_or(f64::NAN);
        (1.0 - z * r / lambda_hat).max(0.0)
    };

    // The support edge is where z * rho_t crosses lambda_hat; expand the
    // window until the clamp has definitely kicked in.
    let mut t_hi = (((1.0 + 2.0 / alpha) * lambda_hat).powf(alpha / 2.0) * 4.0).ln_1p();
    for _ in 0..64 {
        if g(t_hi) == 0.0 {
            break;
        }
        t_hi *= 2.0;
    }
    if g(t_hi) != 0.0 {
        return Err(Error::numerical("linearized SE support edge not found"));
    }
    let q = integrate(g, 0.0, t_hi, 1e-9, 1e-7)?;
    Ok(q.value)
}

/// Closed-form bracket for the sub-6GHz mean SE:
///
///   lower = [ln(1 + (lambda_hat / rho_const)^(alpha/2)) - alpha/2]^+
///   upper = [ln(1 + ((1 + 2/alpha) lambda_hat)^(alpha/2)) - alpha/2]^+
pub fn se_bounds_muw(lambda_hat: f64, alpha: f64) -> Result<SeBounds> {
    check_alpha(alpha)?;
    check_lambda_hat(lambda_hat)?;
    let rc = rho_const(alpha)?;
    let h = alpha / 2.0;
    let lower = ((lambda_hat / rc).powf(h).ln_1p() - h).max(0.0);
    let upper = (((1.0 + 2.0 / alpha) * lambda_hat).powf(h).ln_1p() - h).max(0.0);
    Ok(SeBounds { lower, upper })
}

/// Probability that at least one mmWave BS lies within line-of-sight range:
/// 1 - exp(-lambda_m * pi * r_l^2). Accepts r_l = infinity (fully open).
pub fn c_l(lambda_m: f64, r_l: f64) -> Result<f64> {
    if !(lambda_m.is_finite() && lambda_m > 0.0) {
        return Err(Error::invalid(format!("mmWave BS density must be positive, got {lambda_m}")));
    }
    if !(r_l > 0.0) {
        return Err(Error::invalid(format!("LOS range must be positive, got {r_l}")));
    }
    Ok(-(-lambda_m * std::f64::consts::PI * r_l * r_l).exp_m1())
}

/// Closed-form bracket for the mmWave mean SE with sectorized beams of
/// width `theta` and LOS range `r_l`. The conditional LOS-coverage factor
///
///   C_t = 1 - exp(-lambda_m pi r_l^2 [1 + rho_m (phi (e^t-1))^(2/alpha) / lambda_hat])
///
/// multiplies each integrand, with phi = theta / (2 pi).
pub fn se_bounds_mmw(
    lambda_hat_m: f64,
    lambda_m: f64,
    alpha_m: f64,
    theta: f64,
    r_l: f64,
) -> Result<SeBounds> {
    check_alpha(alpha_m)?;
    check_lambda_hat(lambda_hat_m)?;
    if !(lambda_m.is_finite() && lambda_m > 0.0) {
        return Err(Error::invalid(format!("mmWave BS density must be positive, got {lambda_m}")));
    }
    if !(theta > 0.0 && theta <= 2.0 * std::f64::consts::PI + 1e-12) {
        return Err(Error::invalid(format!("beam width must lie in (0, 2*pi], got {theta}")));
    }
    if !(r_l > 0.0) {
        return Err(Error::invalid(format!("LOS range must be positive, got {r_l}")));
    }

    let phi = theta / (2.0 * std::f64::consts::PI);
    let h = alpha_m / 2.0;
    let rc = rho_const(alpha_m)?;
    let area = lambda_m * std::f64::consts::PI * r_l * r_l;

    let cov = |z: f64, rho: f64| -> f64 {
        // area may be +inf when r_l is infinite; exp_m1(-inf) = -1 gives 1.
        -(-area * (1.0 + rho * z / lambda_hat_m)).exp_m1()
    };
    let z_of = move |t: f64| (phi * t.exp_m1()).powf(2.0 / alpha_m);

    // Support edges: where each bracketed term crosses zero.
    let t_lower = ((lambda_hat_m / rc).powf(h) / phi).ln_1p();
    let t_upper = (((1.0 + 2.0 / alpha_m) * lambda_hat_m).powf(h) / phi).ln_1p();

    let lower_integrand = |t: f64| -> f64 {
        if t <= 0.0 {
            return cov(0.0, rc);
        }
        let z = z_of(t);
        let lin = (1.0 - rc * z / lambda_hat_m).max(0.0);
        if lin == 0.0 {
            return 0.0;
        }
        cov(z, rc) * lin
    };
    let upper_integrand = |t: f64| -> f64 {
        if t <= 0.0 {
            return cov(0.0, rc);
        }
        let z = z_of(t);
        let lin = (1.0 - z / ((1.0 + 2.0 / alpha_m) * lambda_hat_m)).max(0.0);
        if lin == 0.0 {
            return 0.0;
        }
        cov(z, rc) * lin
    };

    let lower = integrate(lower_integrand, 0.0, t_lower, 1e-10, 1e-9)?.value;
    let upper = integrate(upper_integrand, 0.0, t_upper, 1e-10, 1e-9)?.value;
    Ok(SeBounds { lower, upper })
}

/// Dense-network asymptote of the sub-6GHz mean SE: (alpha/2) ln(lambda_hat).
pub fn se_asymptotic_muw(lambda_hat: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(lambda_hat.is_finite() && lambda_hat >= 1.0) {
        return Err(Error::invalid(format!(
            "asymptote needs density ratio >= 1, got {lambda_hat}"
        )));
    }
    Ok(alpha / 2.0 * lambda_hat.ln())
}

/// Dense-network asymptote of the mmWave mean SE:
/// (alpha_m * C_L / 2) ln(lambda_hat_m), discounted by LOS coverage.
pub fn se_asymptotic_mmw(
    lambda_hat_m: f64,
    lambda_m: f64,
    alpha_m: f64,
    r_l: f64,
) -> Result<f64> {
    check_alpha(alpha_m)?;
    if !(lambda_hat_m.is_finite() && lambda_hat_m >= 1.0) {
        return Err(Error::invalid(format!(
            "asymptote needs density ratio >= 1, got {lambda_hat_m}"
        )));
    }
    let cl = c_l(lambda_m, r_l)?;
    Ok(alpha_m * cl / 2.0 * lambda_hat_m.ln())
}
