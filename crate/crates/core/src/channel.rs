//! Per-link SIR assembly on a sampled deployment, for the probe user at
//! index 0. The mmWave tier uses sectorized transmit beams of width theta
//! (unit gain inside the sector, zero outside) and a hard LOS range; the
//! sub-6GHz tier is omnidirectional. Small-scale fading is unit-mean
//! exponential (Rayleigh power), drawn per link.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::blockage::LosModel;
use crate::error::{require, require_finite, Error, Result};
use crate::geometry::{Deployment, Point2, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Link {
    MmwDl,
    MmwUl,
    MuwDl,
    MuwUl,
}

impl Link {
    pub const ALL: [Link; 4] = [Link::MmwDl, Link::MmwUl, Link::MuwDl, Link::MuwUl];

    pub fn is_mmw(&self) -> bool {
        matches!(self, Link::MmwDl | Link::MmwUl)
    }

    pub fn is_downlink(&self) -> bool {
        matches!(self, Link::MmwDl | Link::MuwDl)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Link::MmwDl => "mmw_dl",
            Link::MmwUl => "mmw_ul",
            Link::MuwDl => "muw_dl",
            Link::MuwUl => "muw_ul",
        }
    }
}

impl std::fmt::Display for Link {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Link {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mmw_dl" => Ok(Link::MmwDl),
            "mmw_ul" => Ok(Link::MmwUl),
            "muw_dl" => Ok(Link::MuwDl),
            "muw_ul" => Ok(Link::MuwUl),
            other => Err(Error::invalid(format!("unknown link {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub alpha_m: f64,
    pub alpha_mu: f64,
    /// mmWave beam width, radians, in (0, 2*pi].
    pub theta: f64,
    /// Normalized noise power; 0 gives the interference-limited regime.
    pub noise_power: f64,
    pub los: LosModel,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        for (a, name) in [(self.alpha_m, "mmWave"), (self.alpha_mu, "sub-6GHz")] {
            require_finite(a, &format!("{name} path-loss exponent"))?;
            require(a > 2.0, &format!("{name} path-loss exponent must exceed 2"))?;
        }
        require_finite(self.theta, "beam width")?;
        require(
            self.theta > 0.0 && self.theta <= 2.0 * std::f64::consts::PI + 1e-12,
            "beam width must lie in (0, 2*pi]",
        )?;
        require_finite(self.noise_power, "noise power")?;
        require(self.noise_power >= 0.0, "noise power must be nonnegative")?;
        require(self.los.r_l > 0.0, "LOS range must be positive")?;
        Ok(())
    }
}

/// Raw SIR (or SINR) of one link in one realization. `infinite` marks a
/// zero-denominator sample; `value` is then f64::INFINITY and downstream
/// averaging caps it.
#[derive(Debug, Clone, Copy)]
pub struct SirSample {
    pub link: Link,
    pub value: f64,
    pub infinite: bool,
}

/// True iff the transmit beam at `tx`, aimed at `aim`, covers `rx` within
/// a sector of width `theta`. Distances follow the window metric.
pub fn beam_covers(tx: Point2, aim: Point2, rx: Point2, theta: f64, window: &Window) -> bool {
    if theta >= 2.0 * std::f64::consts::PI - 1e-12 {
        return true;
    }
    let (tx_ax, tx_ay) = window.displacement(tx, aim);
    let (rx_ax, rx_ay) = window.displacement(tx, rx);
    let na = (tx_ax * tx_ax + tx_ay * tx_ay).sqrt();
    let nr = (rx_ax * rx_ax + rx_ay * rx_ay).sqrt();
    let cos_ang = (tx_ax * rx_ax + tx_ay * rx_ay) / (na * nr).max(1e-300);
    cos_ang >= (0.5 * theta).cos() - 1e-12
}

/// Interfering (BS, scheduled user) pairs of a tier: every BS with a slot
/// except the probe's serving BS, in BS index order.
fn interferers<'a>(
    sched: &'a [Option<u32>],
    serving: usize,
) -> impl Iterator<Item = (usize, usize)> + 'a {
    sched
        .iter()
        .enumerate()
        .filter_map(move |(b, s)| match s {
            Some(u) if b != serving => Some((b, *u as usize)),
            _ => None,
        })
}

/// Computes one link's SIR with an injectable fade source; fades are drawn
/// in a fixed order (serving link first, then interferers by BS index)
/// regardless of beam or LOS gating, so equal-seed runs stay comparable
/// across channel-parameter changes.
pub fn sir_with_fades<F: FnMut() -> f64>(
    link: Link,
    dep: &Deployment,
    cfg: &ChannelConfig,
    mut fade: F,
) -> Result<SirSample> {
    cfg.validate()?;
    require(!dep.users.is_empty(), "deployment has no probe user")?;
    let (bs, assoc, sched, alpha) = if link.is_mmw() {
        (&dep.mmw_bs, &dep.assoc_mmw, &dep.sched_mmw, cfg.alpha_m)
    } else {
        (&dep.muw_bs, &dep.assoc_muw, &dep.sched_muw, cfg.alpha_mu)
    };
    if bs.is_empty() {
        return Err(Error::invalid("no BSs of the requested tier in this realization"));
    }
    let probe = dep.users[0];
    let serving = assoc[0];
    let w = &dep.window;
    let r = w.distance(probe, bs[serving]);

    let serving_fade = fade();
    let signal = if link.is_mmw() && !cfg.los.is_los(r) {
        // Serving path blocked: the beam carries nothing.
        0.0
    } else {
        serving_fade * r.powf(-alpha)
    };

    let mut interference = 0.0;
    for (b, u) in interferers(sched, serving) {
        let g = fade();
        let contribution = match link {
            Link::MuwDl => {
                let d = w.distance(bs[b], probe);
                g * d.powf(-alpha)
            }
            Link::MuwUl => {
                let d = w.distance(dep.users[u], bs[serving]);
                g * d.powf(-alpha)
            }
            Link::MmwDl => {
                // Interfering BS beams at its own scheduled user.
                let d = w.distance(bs[b], probe);
                if cfg.los.is_los(d) && beam_covers(bs[b], dep.users[u], probe, cfg.theta, w) {
                    g * d.powf(-alpha)
                } else {
                    0.0
                }
            }
            Link::MmwUl => {
                // Interfering user beams at its own BS; victim is the
                // probe's serving BS.
                let tx = dep.users[u];
                let d = w.distance(tx, bs[serving]);
                if cfg.los.is_los(d) && beam_covers(tx, bs[b], bs[serving], cfg.theta, w) {
                    g * d.powf(-alpha)
                } else {
                    0.0
                }
            }
        };
        interference += contribution;
    }

    let denom = interference + cfg.noise_power;
    let (value, infinite) = if denom > 0.0 {
        (signal / denom, false)
    } else if signal > 0.0 {
        (f64::INFINITY, true)
    } else {
        (0.0, false)
    };
    Ok(SirSample { link, value, infinite })
}

/// Same with unit-mean exponential fades from `rng`.
pub fn sir_sample<R: Rng + ?Sized>(
    link: Link,
    dep: &Deployment,
    cfg: &ChannelConfig,
    rng: &mut R,
) -> Result<SirSample> {
    sir_with_fades(link, dep, cfg, || rng.sample::<f64, _>(Exp1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockage::LosModel;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(theta: f64, r_l: f64) -> ChannelConfig {
        ChannelConfig {
            alpha_m: 3.0,
            alpha_mu: 4.0,
            theta,
            noise_power: 0.0,
            los: LosModel { r_l },
        }
    }

    /// Probe at origin; serving BS at (1,0); one interfering BS at (0,3)
    /// whose scheduled user sits at (0,4).
    fn toy(window: Window) -> Deployment {
        Deployment {
            window,
            mmw_bs: vec![Point2::new(1.0, 0.0), Point2::new(0.0, 3.0)],
            muw_bs: vec![Point2::new(1.0, 0.0), Point2::new(0.0, 3.0)],
            users: vec![Point2::ORIGIN, Point2::new(0.0, 4.0)],
            assoc_mmw: vec![0, 1],
            assoc_muw: vec![0, 1],
            sched_mmw: vec![Some(0), Some(1)],
            sched_muw: vec![Some(0), Some(1)],
        }
    }

    #[test]
    fn beam_covering_sector_edges() {
        let w = Window::new(100.0, false).unwrap();
        let tx = Point2::ORIGIN;
        let aim = Point2::new(10.0, 0.0);
        // Receiver 44 degrees off boresight: inside a 90-degree sector,
        // outside a 60-degree one.
        let rx = Point2::new(44f64.to_radians().cos() * 5.0, 44f64.to_radians().sin() * 5.0);
        assert!(beam_covers(tx, aim, rx, std::f64::consts::FRAC_PI_2, &w));
        assert!(!beam_covers(tx, aim, rx, std::f64::consts::FRAC_PI_3, &w));
        // Full circle always covers.
        assert!(beam_covers(tx, aim, rx, 2.0 * std::f64::consts::PI, &w));
    }

    #[test]
    fn beam_covering_respects_wraparound() {
        let w = Window::new(10.0, true).unwrap();
        // Aim points left across the seam: (9,0) -> (-9,0) is +2 in x.
        let tx = Point2::new(9.0, 0.0);
        let aim = Point2::new(-9.0, 0.0);
        let rx = Point2::new(-8.0, 0.0);
        assert!(beam_covers(tx, aim, rx, std::f64::consts::FRAC_PI_3, &w));
        let behind = Point2::new(5.0, 0.0);
        assert!(!beam_covers(tx, aim, behind, std::f64::consts::FRAC_PI_3, &w));
    }

    #[test]
    fn muw_dl_matches_hand_computation() {
        let w = Window::new(100.0, false).unwrap();
        let dep = toy(w);
        let c = cfg(std::f64::consts::PI / 6.0, 100.0);
        // Unit fades: S = 1^-4 = 1, I = 3^-4.
        let s = sir_with_fades(Link::MuwDl, &dep, &c, || 1.0).unwrap();
        assert_relative_eq!(s.value, 81.0, epsilon = 1e-9);
    }

    #[test]
    fn muw_ul_measures_at_serving_bs() {
        let w = Window::new(100.0, false).unwrap();
        let dep = toy(w);
        let c = cfg(std::f64::consts::PI / 6.0, 100.0);
        // Interfering user at (0,4); serving BS at (1,0): d^2 = 17.
        let s = sir_with_fades(Link::MuwUl, &dep, &c, || 1.0).unwrap();
        assert_relative_eq!(s.value, 17f64.powi(2), epsilon = 1e-9);
    }

    #[test]
    fn mmw_dl_interferer_beam_misses_probe() {
        let w = Window::new(100.0, false).unwrap();
        let dep = toy(w);
        // Interfering BS at (0,3) aims at its user at (0,4): away from the
        // probe at the origin. A narrow beam cannot hit it.
        let c = cfg(std::f64::consts::PI / 6.0, 100.0);
        let s = sir_with_fades(Link::MmwDl, &dep, &c, || 1.0).unwrap();
        assert!(s.infinite, "no interference reaches the probe");
        // A full-circle beam does hit: S = 1, I = 3^-3.
        let c = cfg(2.0 * std::f64::consts::PI, 100.0);
        let s = sir_with_fades(Link::MmwDl, &dep, &c, || 1.0).unwrap();
        assert_relative_eq!(s.value, 27.0, epsilon = 1e-9);
    }

    #[test]
    fn mmw_serving_blocked_beyond_los_range() {
        let w = Window::new(100.0, false).unwrap();
        let dep = toy(w);
        let c = cfg(2.0 * std::f64::consts::PI, 0.5); // serving at distance 1
        let s = sir_with_fades(Link::MmwDl, &dep, &c, || 1.0).unwrap();
        assert_eq!(s.value, 0.0);
        assert!(!s.infinite);
    }

    #[test]
    fn mmw_ul_beam_width_gates_interference() {
        let w = Window::new(100.0, false).unwrap();
        let dep = toy(w);
        // Interfering user (0,4) aims at its BS (0,3); the serving BS (1,0)
        // sits 14.0 degrees off that boresight at distance sqrt(17). A
        // 30-degree beam covers it: S = 1, I = 17^-1.5.
        let c = cfg(std::f64::consts::PI / 6.0, 100.0);
        let s = sir_with_fades(Link::MmwUl, &dep, &c, || 1.0).unwrap();
        assert_relative_eq!(s.value, 17f64.powf(1.5), epsilon = 1e-9);
        // A 15-degree beam (7.5-degree half-angle) misses it entirely.
        let c = cfg(std::f64::consts::PI / 12.0, 100.0);
        let s = sir_with_fades(Link::MmwUl, &dep, &c, || 1.0).unwrap();
        assert!(s.infinite);
    }

    #[test]
    fn noise_prevents_infinite_sir() {
        let w = Window::new(100.0, false).unwrap();
        let dep = toy(w);
        let mut c = cfg(std::f64::consts::PI / 6.0, 100.0);
        c.noise_power = 0.1;
        let s = sir_with_fades(Link::MmwDl, &dep, &c, || 1.0).unwrap();
        assert!(!s.infinite);
        assert_relative_eq!(s.value, 10.0, epsilon = 1e-9);
    }

    #[test]
    fn coverage_probability_tracks_beam_fraction() {
        // Random interferer aim directions: the chance a fixed receiver
        // falls inside the sector is theta / 2 pi.
        let w = Window::new(100.0, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let theta = std::f64::consts::PI / 3.0;
        let tx = Point2::ORIGIN;
        let rx = Point2::new(7.0, -2.0);
        let n = 200_000;
        let mut hits = 0;
        for _ in 0..n {
            let ang = rng.gen_range(0.0..(2.0 * std::f64::consts::PI));
            let aim = Point2::new(ang.cos() * 3.0, ang.sin() * 3.0);
            if beam_covers(tx, aim, rx, theta, &w) {
                hits += 1;
            }
        }
        let frac = hits as f64 / n as f64;
        let expect = theta / (2.0 * std::f64::consts::PI);
        // Binomial stderr ~ 0.00083; allow 5 sigma.
        assert!((frac - expect).abs() < 0.0042, "coverage fraction {frac} vs {expect}");
    }
}
