//! Monte Carlo estimation of mean link spectral efficiency. Realizations
//! are independent: each gets its own counter-mode RNG stream derived from
//! the run seed, so results are reproducible bit-for-bit regardless of
//! thread count, and realization i can be replayed in isolation.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(not(target_arch = "wasm32"))]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::channel::{sir_sample, ChannelConfig, Link};
use crate::error::{require, require_finite, Error, Result};
use crate::geometry::{sample_ppp, DensityConfig, Deployment, Point2, Window};
use crate::numeric::mean_stderr;

/// Everything needed to run one estimation experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub densities: DensityConfig,
    pub channel: ChannelConfig,
    /// None: auto-size the window from the sparsest process in play.
    pub half_width_m: Option<f64>,
    pub wraparound: bool,
    pub n_realizations: u64,
    pub seed: u64,
    /// Cap applied to ln(1 + SIR) per sample; bounds the contribution of
    /// interference-free realizations.
    pub cap_nats: f64,
    pub links: BTreeSet<Link>,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        self.densities.validate()?;
        self.channel.validate()?;
        require(self.n_realizations >= 2, "need at least 2 realizations")?;
        require_finite(self.cap_nats, "SE cap")?;
        require(self.cap_nats > 0.0, "SE cap must be positive")?;
        require(!self.links.is_empty(), "no links requested")?;
        if let Some(hw) = self.half_width_m {
            require_finite(hw, "window half width")?;
            require(hw > 0.0, "window half width must be positive")?;
        }
        Ok(())
    }

    fn needs_mmw(&self) -> bool {
        self.links.iter().any(Link::is_mmw)
    }

    fn needs_muw(&self) -> bool {
        self.links.iter().any(|l| !l.is_mmw())
    }

    /// Auto-sized window: half width 20 / sqrt(lambda_min * pi), i.e. 20
    /// mean nearest-neighbor scales of the sparsest process involved, so
    /// truncated far-field interference is negligible.
    pub fn window(&self) -> Result<Window> {
        let hw = match self.half_width_m {
            Some(hw) => hw,
            None => {
                let mut lam_min = self.densities.lambda_u;
                if self.needs_mmw() {
                    lam_min = lam_min.min(self.densities.lambda_m);
                }
                if self.needs_muw() {
                    lam_min = lam_min.min(self.densities.lambda_mu);
                }
                20.0 / (lam_min * std::f64::consts::PI).sqrt()
            }
        };
        Window::new(hw, self.wraparound)
    }
}

/// Per-link estimate. Counts refer to realizations that produced a sample
/// for this link; `n_skipped` realizations had no BS of the tier at all.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeEstimate {
    pub link: Link,
    pub mean_nats: f64,
    pub stderr: f64,
    pub n: u64,
    pub n_zero: u64,
    pub n_capped: u64,
    pub n_skipped: u64,
}

/// Paired downlink-uplink contrast of one tier, over realizations where
/// both directions produced a sample. Sharing the deployment across the
/// pair cancels most geometry noise, so `stderr` here is the right scale
/// for testing whether the two directions differ.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GapEstimate {
    pub mmw: bool,
    pub mean_dl_minus_ul: f64,
    pub stderr: f64,
    pub n: u64,
}

#[derive(Debug, Clone)]
pub struct EstimateOutput {
    pub per_link: Vec<SeEstimate>,
    pub gaps: Vec<GapEstimate>,
    pub window: Window,
    pub warnings: Vec<String>,
}

impl EstimateOutput {
    pub fn estimate(&self, link: Link) -> Option<&SeEstimate> {
        self.per_link.iter().find(|e| e.link == link)
    }

    pub fn gap(&self, mmw: bool) -> Option<&GapEstimate> {
        self.gaps.iter().find(|g| g.mmw == mmw)
    }
}

/// One realization's capped SE samples in `Link::ALL` order; None when the
/// tier had no BS in the window.
type Row = [Option<Sample>; 4];

#[derive(Debug, Clone, Copy)]
struct Sample {
    se: f64,
    zero: bool,
    capped: bool,
}

pub fn estimate_se(plan: &ExperimentPlan) -> Result<EstimateOutput> {
    plan.validate()?;
    let window = plan.window()?;

    let mut warnings = Vec::new();
    for (needed, lam, name) in [
        (plan.needs_mmw(), plan.densities.lambda_m, "mmWave BS"),
        (plan.needs_muw(), plan.densities.lambda_mu, "sub-6GHz BS"),
    ] {
        let expected = lam * window.area();
        if needed && expected < 10.0 {
            warnings.push(format!(
                "expected {name} count per window is only {expected:.2}; estimates will be noisy"
            ));
        }
    }

    // Ordered collect keeps results bit-identical whether realizations run
    // in parallel or on the single-threaded wasm fallback.
    #[cfg(not(target_arch = "wasm32"))]
    let rows: Result<Vec<Row>> = (0..plan.n_realizations)
        .into_par_iter()
        .map(|i| one_realization(plan, &window, i))
        .collect();
    #[cfg(target_arch = "wasm32")]
    let rows: Result<Vec<Row>> = (0..plan.n_realizations)
        .map(|i| one_realization(plan, &window, i))
        .collect();
    let rows = rows?;

    let mut per_link = Vec::new();
    for link in Link::ALL {
        if !plan.links.contains(&link) {
            continue;
        }
        let slot = link_slot(link);
        let samples: Vec<f64> = rows.iter().filter_map(|r| r[slot].map(|s| s.se)).collect();
        let n_skipped = plan.n_realizations - samples.len() as u64;
        if samples.len() < 2 {
            return Err(Error::numerical(format!(
                "link {link}: {} realizations produced samples; increase the window or density",
                samples.len()
            )));
        }
        let (mean, stderr) = mean_stderr(&samples)?;
        per_link.push(SeEstimate {
            link,
            mean_nats: mean,
            stderr,
            n: samples.len() as u64,
            n_zero: rows.iter().filter(|r| r[slot].is_some_and(|s| s.zero)).count() as u64,
            n_capped: rows.iter().filter(|r| r[slot].is_some_and(|s| s.capped)).count() as u64,
            n_skipped,
        });
    }

    let mut gaps = Vec::new();
    for (mmw, dl, ul) in [(true, Link::MmwDl, Link::MmwUl), (false, Link::MuwDl, Link::MuwUl)] {
        if !(plan.links.contains(&dl) && plan.links.contains(&ul)) {
            continue;
        }
        let diffs: Vec<f64> = rows
            .iter()
            .filter_map(|r| match (r[link_slot(dl)], r[link_slot(ul)]) {
                (Some(a), Some(b)) => Some(a.se - b.se),
                _ => None,
            })
            .collect();
        if diffs.len() >= 2 {
            let (mean, stderr) = mean_stderr(&diffs)?;
            gaps.push(GapEstimate { mmw, mean_dl_minus_ul: mean, stderr, n: diffs.len() as u64 });
        }
    }

    Ok(EstimateOutput { per_link, gaps, window, warnings })
}

fn link_slot(link: Link) -> usize {
    Link::ALL.iter().position(|l| *l == link).expect("link in ALL")
}

fn one_realization(plan: &ExperimentPlan, window: &Window, index: u64) -> Result<Row> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    // Stream 0 is reserved for auxiliary draws outside the realization
    // loop; realizations use streams 1..=n.
    rng.set_stream(index + 1);

    let mmw_bs = if plan.needs_mmw() {
        sample_ppp(plan.densities.lambda_m, window, &mut rng)?
    } else {
        Vec::new()
    };
    let muw_bs = if plan.needs_muw() {
        sample_ppp(plan.densities.lambda_mu, window, &mut rng)?
    } else {
        Vec::new()
    };
    let mut users = vec![Point2::ORIGIN];
    users.extend(sample_ppp(plan.densities.lambda_u, window, &mut rng)?);

    let mut dep = Deployment::build(*window, mmw_bs, muw_bs, users, &mut rng)?;

    // Condition on the probe being the scheduled user of its serving BS.
    // Schedules of all other cells are independent of this choice, so
    // overwriting the probe cell's slot implements the conditioning
    // exactly rather than approximately.
    if !dep.mmw_bs.is_empty() {
        dep.sched_mmw[dep.assoc_mmw[0]] = Some(0);
    }
    if !dep.muw_bs.is_empty() {
        dep.sched_muw[dep.assoc_muw[0]] = Some(0);
    }

    let mut row: Row = [None; 4];
    for link in Link::ALL {
        if !plan.links.contains(&link) {
            continue;
        }
        let tier_empty = if link.is_mmw() { dep.mmw_bs.is_empty() } else { dep.muw_bs.is_empty() };
        if tier_empty {
            continue;
        }
        let sir = sir_sample(link, &dep, &plan.channel, &mut rng)?;
        let raw = sir.value.ln_1p();
        let se = raw.min(plan.cap_nats);
        row[link_slot(link)] = Some(Sample {
            se,
            zero: sir.value == 0.0,
            capped: sir.infinite || raw > plan.cap_nats,
        });
    }
    Ok(row)
}

/// One row of a density sweep: the estimate plus the analytic bracket and
/// asymptote of the same link at that density ratio.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepPoint {
    pub lambda_hat: f64,
    pub link: Link,
    pub est: SeEstimate,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub asymptote: f64,
}

/// Runs `estimate_se` across BS-to-user density ratios, scaling both BS
/// tiers to lambda_hat * lambda_u while keeping everything else fixed.
/// Each ratio gets an offset seed so points are independent.
pub fn convergence_sweep(plan: &ExperimentPlan, lambda_hats: &[f64]) -> Result<Vec<SweepPoint>> {
    plan.validate()?;
    require(!lambda_hats.is_empty(), "empty density-ratio list")?;
    for pair in lambda_hats.windows(2) {
        require(pair[0] < pair[1], "density ratios must be strictly increasing")?;
    }
    require(lambda_hats[0] > 0.0, "density ratios must be positive")?;

    let mut points = Vec::new();
    for (k, &lh) in lambda_hats.iter().enumerate() {
        let mut p = plan.clone();
        p.densities.lambda_m = lh * plan.densities.lambda_u;
        p.densities.lambda_mu = lh * plan.densities.lambda_u;
        p.seed = plan.seed.wrapping_add(k as u64);
        let out = estimate_se(&p)?;
        for est in &out.per_link {
            let (lower, upper, asymptote) = if est.link.is_mmw() {
                let b = analytic::se_bounds_mmw(
                    lh,
                    p.densities.lambda_m,
                    p.channel.alpha_m,
                    p.channel.theta,
                    p.channel.los.r_l,
                )?;
                let a = if lh >= 1.0 {
                    analytic::se_asymptotic_mmw(
                        lh,
                        p.densities.lambda_m,
                        p.channel.alpha_m,
                        p.channel.los.r_l,
                    )?
                } else {
                    f64::NAN
                };
                (b.lower, b.upper, a)
            } else {
                let b = analytic::se_bounds_muw(lh, p.channel.alpha_mu)?;
                let a = if lh >= 1.0 {
                    analytic::se_asymptotic_muw(lh, p.channel.alpha_mu)?
                } else {
                    f64::NAN
                };
                (b.lower, b.upper, a)
            };
            points.push(SweepPoint {
                lambda_hat: lh,
                link: est.link,
                est: *est,
                lower_bound: lower,
                upper_bound: upper,
                asymptote,
            });
        }
    }
    Ok(points)
}
