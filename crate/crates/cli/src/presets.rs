//! Named parameter bundles for the standard experiment set, so the common
//! runs need no config file. Each preset is a full configuration plus the
//! sweep lists the relevant subcommand consumes.

use udnsim::allocator::{PaprVariant, SpectrumConfig};
use udnsim::channel::Link;
use udnsim::config::{BlockageSource, NetworkConfig};
use udnsim::geometry::DensityConfig;
use udnsim::{Error, Result};

pub struct Preset {
    pub name: &'static str,
    pub config: NetworkConfig,
    /// Relative densification levels for `se` and `sweep`.
    pub lambda_hats: Vec<f64>,
    pub links: Vec<Link>,
    /// mmWave bandwidth grid for `optimize`.
    pub wm_list_hz: Vec<f64>,
    /// Uplink rate-fraction grid for `optimize`.
    pub zeta_list: Vec<f64>,
}

/// Shared defaults: a dense urban layout with an explicit 100 m LOS range,
/// one user per 100 m x 100 m on average, and the 20 MHz + 500 MHz split.
fn base() -> NetworkConfig {
    NetworkConfig {
        densities: DensityConfig { lambda_m: 2e-4, lambda_mu: 4e-4, lambda_u: 1e-4 },
        alpha_m: 3.0,
        alpha_mu: 4.0,
        theta_rad: std::f64::consts::FRAC_PI_6,
        noise_power: 0.0,
        spectrum: SpectrumConfig {
            w_mu_hz: 20e6,
            w_m_hz: 500e6,
            f_s_hz: 244.14e3,
            delta_linear: 10f64.powf(0.7),
            epsilon: 0.7,
            zeta: 0.2,
        },
        papr_variant: PaprVariant::Inversion,
        blockage: BlockageSource::ExplicitRl { r_l_m: 100.0 },
        half_width_m: None,
        wraparound: true,
        seed: 1,
        n_realizations: 1000,
        cap_nats: 50.0,
    }
}

const SE_LEVELS: [f64; 7] = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0];

fn wm_grid() -> Vec<f64> {
    (1..=10).map(|k| k as f64 * 100e6).collect()
}

pub fn lookup(name: &str) -> Result<Preset> {
    let mut p = Preset {
        name: "",
        config: base(),
        lambda_hats: SE_LEVELS.to_vec(),
        links: Link::ALL.to_vec(),
        wm_list_hz: vec![base().spectrum.w_m_hz],
        zeta_list: vec![base().spectrum.zeta],
    };
    match name {
        // Sub-6GHz SE vs densification, uplink and downlink.
        "fig2" => {
            p.name = "fig2";
            p.links = vec![Link::MuwDl, Link::MuwUl];
        }
        // Directional-tier SE vs densification.
        "fig3" => {
            p.name = "fig3";
            p.links = vec![Link::MmwDl, Link::MmwUl];
        }
        // Allocation vs mmWave bandwidth, exact PAPR inversion.
        "fig4" => {
            p.name = "fig4";
            p.wm_list_hz = wm_grid();
        }
        // Same grid under the log-constant PAPR cap.
        "fig5a" => {
            p.name = "fig5a";
            p.config.papr_variant = PaprVariant::LogConstant;
            p.wm_list_hz = wm_grid();
        }
        // Allocation vs required uplink fraction at fixed 500 MHz.
        "fig5b" => {
            p.name = "fig5b";
            p.config.papr_variant = PaprVariant::LogConstant;
            p.zeta_list = (1..=19).map(|k| k as f64 * 0.05).collect();
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown preset {other:?}; expected one of fig2, fig3, fig4, fig5a, fig5b"
            )))
        }
    }
    Ok(p)
}
