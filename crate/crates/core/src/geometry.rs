//! Planar point processes on a square observation window: PPP sampling,
//! nearest-BS association through a uniform grid index, and per-BS user
//! scheduling. The window is centered on the origin and defaults to torus
//! (wraparound) distances so the probe user at the origin sees a
//! statistically translation-invariant network.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{require, require_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };
}

/// Square observation window [-half_width, half_width)^2.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Window {
    half_width: f64,
    wraparound: bool,
}

impl Window {
    pub fn new(half_width: f64, wraparound: bool) -> Result<Self> {
        require_finite(half_width, "window half width")?;
        require(half_width > 0.0, "window half width must be positive")?;
        Ok(Window { half_width, wraparound })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn wraparound(&self) -> bool {
        self.wraparound
    }

    pub fn side(&self) -> f64 {
        2.0 * self.half_width
    }

    pub fn area(&self) -> f64 {
        self.side() * self.side()
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= -self.half_width && p.x < self.half_width
            && p.y >= -self.half_width && p.y < self.half_width
    }

    /// Displacement from `a` to `b`, minimum-image if wraparound.
    pub fn displacement(&self, a: Point2, b: Point2) -> (f64, f64) {
        let mut dx = b.x - a.x;
        let mut dy = b.y - a.y;
        if self.wraparound {
            let l = self.side();
            dx -= l * (dx / l).round();
            dy -= l * (dy / l).round();
        }
        (dx, dy)
    }

    pub fn distance_sq(&self, a: Point2, b: Point2) -> f64 {
        let (dx, dy) = self.displacement(a, b);
        dx * dx + dy * dy
    }

    pub fn distance(&self, a: Point2, b: Point2) -> f64 {
        self.distance_sq(a, b).sqrt()
    }
}

/// BS and user densities of the two-tier deployment, all in points/m^2.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DensityConfig {
    pub lambda_m: f64,
    pub lambda_mu: f64,
    pub lambda_u: f64,
}

impl DensityConfig {
    pub fn validate(&self) -> Result<()> {
        for (v, name) in [
            (self.lambda_m, "mmWave BS density"),
            (self.lambda_mu, "sub-6GHz BS density"),
            (self.lambda_u, "user density"),
        ] {
            require_finite(v, name)?;
            require(v > 0.0, &format!("{name} must be positive"))?;
        }
        Ok(())
    }

    /// BS-to-user density ratio of the mmWave tier.
    pub fn lambda_hat_m(&self) -> f64 {
        self.lambda_m / self.lambda_u
    }

    /// BS-to-user density ratio of the sub-6GHz tier.
    pub fn lambda_hat_mu(&self) -> f64 {
        self.lambda_mu / self.lambda_u
    }
}

/// Homogeneous PPP of the given intensity on the window.
pub fn sample_ppp<R: Rng + ?Sized>(density: f64, window: &Window, rng: &mut R) -> Result<Vec<Point2>> {
    require_finite(density, "density")?;
    require(density > 0.0, "density must be positive")?;
    let mean = density * window.area();
    if mean > 1e9 {
        return Err(Error::invalid(format!(
            "expected point count {mean:.3e} is unreasonably large; shrink the window"
        )));
    }
    let n = Poisson::new(mean)
        .map_err(|e| Error::invalid(format!("bad Poisson mean {mean}: {e}")))?
        .sample(rng) as usize;
    let hw = window.half_width();
    let mut pts = Vec::with_capacity(n);
    for _ in 0..n {
        pts.push(Point2::new(rng.gen_range(-hw..hw), rng.gen_range(-hw..hw)));
    }
    Ok(pts)
}

/// Uniform grid over the window for nearest-neighbor queries, torus-aware.
pub struct GridIndex<'a> {
    points: &'a [Point2],
    window: Window,
    n_axis: usize,
    cell: f64,
    cells: Vec<Vec<u32>>,
}

impl<'a> GridIndex<'a> {
    pub fn new(points: &'a [Point2], window: &Window) -> Result<Self> {
        require(!points.is_empty(), "cannot index an empty point set")?;
        if points.len() > u32::MAX as usize {
            return Err(Error::invalid("too many points for the grid index"));
        }
        // Aim for about one point per cell.
        let n_axis = (points.len() as f64).sqrt().floor().max(1.0) as usize;
        let cell = window.side() / n_axis as f64;
        let mut cells = vec![Vec::new(); n_axis * n_axis];
        for (i, p) in points.iter().enumerate() {
            let (ix, iy) = cell_of(*p, window, n_axis, cell);
            cells[iy * n_axis + ix].push(i as u32);
        }
        Ok(GridIndex { points, window: *window, n_axis, cell, cells })
    }

    /// Index and distance of the point nearest to `q`.
    pub fn nearest(&self, q: Point2) -> (usize, f64) {
        let (qx, qy) = cell_of(q, &self.window, self.n_axis, self.cell);
        let n = self.n_axis as isize;
        let mut best = u32::MAX;
        let mut best_d2 = f64::INFINITY;

        let scan_cell = |cx: isize, cy: isize, best: &mut u32, best_d2: &mut f64| {
            let (cx, cy) = if self.window.wraparound() {
                (cx.rem_euclid(n), cy.rem_euclid(n))
            } else {
                if cx < 0 || cx >= n || cy < 0 || cy >= n {
                    return;
                }
                (cx, cy)
            };
            for &i in &self.cells[(cy * n + cx) as usize] {
                let d2 = self.window.distance_sq(q, self.points[i as usize]);
                if d2 < *best_d2 {
                    *best_d2 = d2;
                    *best = i;
                }
            }
        };

        let mut r: isize = 0;
        loop {
            if 2 * r + 1 >= n {
                // Ring wrapped the whole torus: finish with a full sweep.
                for cy in 0..n {
                    for cx in 0..n {
                        scan_cell(cx, cy, &mut best, &mut best_d2);
                    }
                }
                break;
            }
            if r == 0 {
                scan_cell(qx as isize, qy as isize, &mut best, &mut best_d2);
            } else {
                let (qx, qy) = (qx as isize, qy as isize);
                for dx in -r..=r {
                    scan_cell(qx + dx, qy + r, &mut best, &mut best_d2);
                    scan_cell(qx + dx, qy - r, &mut best, &mut best_d2);
                }
                for dy in (-r + 1)..=(r - 1) {
                    scan_cell(qx + r, qy + dy, &mut best, &mut best_d2);
                    scan_cell(qx - r, qy + dy, &mut best, &mut best_d2);
                }
            }
            // Any unscanned point sits at Chebyshev cell distance > r, hence
            // at least r*cell away in Euclidean distance.
            if best_d2.sqrt() <= r as f64 * self.cell {
                break;
            }
            r += 1;
        }
        (best as usize, best_d2.sqrt())
    }
}

fn cell_of(p: Point2, window: &Window, n_axis: usize, cell: f64) -> (usize, usize) {
    let hw = window.half_width();
    let ix = ((p.x + hw) / cell).floor();
    let iy = ((p.y + hw) / cell).floor();
    let clamp = |v: f64| (v.max(0.0) as usize).min(n_axis - 1);
    (clamp(ix), clamp(iy))
}

/// Nearest-BS association: `result[i]` is the BS index serving user `i`.
pub fn associate(users: &[Point2], bs: &[Point2], window: &Window) -> Result<Vec<usize>> {
    let idx = GridIndex::new(bs, window)?;
    Ok(users.iter().map(|&u| idx.nearest(u).0).collect())
}

/// Uniformly random scheduled user per BS (None for BSs with no users),
/// via single-pass reservoir sampling over the association list.
pub fn schedule<R: Rng + ?Sized>(assoc: &[usize], n_bs: usize, rng: &mut R) -> Vec<Option<u32>> {
    let mut slot: Vec<Option<u32>> = vec![None; n_bs];
    let mut count: Vec<u32> = vec![0; n_bs];
    for (u, &b) in assoc.iter().enumerate() {
        count[b] += 1;
        if rng.gen_range(0..count[b]) == 0 {
            slot[b] = Some(u as u32);
        }
    }
    slot
}

/// One sampled network realization. Users are shared between tiers; each
/// tier has its own association and schedule. A tier left unsampled has
/// empty vectors throughout.
#[derive(Debug, Clone)]
pub struct Deployment {
    pub window: Window,
    pub mmw_bs: Vec<Point2>,
    pub muw_bs: Vec<Point2>,
    pub users: Vec<Point2>,
    pub assoc_mmw: Vec<usize>,
    pub assoc_muw: Vec<usize>,
    pub sched_mmw: Vec<Option<u32>>,
    pub sched_muw: Vec<Option<u32>>,
}

impl Deployment {
    /// Associates and schedules the given point sets. Empty BS tiers are
    /// allowed and simply produce empty association/schedule vectors.
    pub fn build<R: Rng + ?Sized>(
        window: Window,
        mmw_bs: Vec<Point2>,
        muw_bs: Vec<Point2>,
        users: Vec<Point2>,
        rng: &mut R,
    ) -> Result<Self> {
        let (assoc_mmw, sched_mmw) = if mmw_bs.is_empty() {
            (Vec::new(), Vec::new())
        } else {
            let a = associate(&users, &mmw_bs, &window)?;
            let s = schedule(&a, mmw_bs.len(), rng);
            (a, s)
        };
        let (assoc_muw, sched_muw) = if muw_bs.is_empty() {
            (Vec::new(), Vec::new())
        } else {
            let a = associate(&users, &muw_bs, &window)?;
            let s = schedule(&a, muw_bs.len(), rng);
            (a, s)
        };
        Ok(Deployment { window, mmw_bs, muw_bs, users, assoc_mmw, assoc_muw, sched_mmw, sched_muw })
    }

    /// Number of BSs holding a scheduled user in the given tier.
    pub fn active_count(&self, sched: &[Option<u32>]) -> usize {
        sched.iter().filter(|s| s.is_some()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn torus_displacement_wraps() {
        let w = Window::new(10.0, true).unwrap();
        let (dx, dy) = w.displacement(Point2::new(9.0, 0.0), Point2::new(-9.0, 0.0));
        assert!((dx - 2.0).abs() < 1e-12 && dy == 0.0);
        let d = w.distance(Point2::new(-9.5, -9.5), Point2::new(9.5, 9.5));
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn plain_window_does_not_wrap() {
        let w = Window::new(10.0, false).unwrap();
        let d = w.distance(Point2::new(9.0, 0.0), Point2::new(-9.0, 0.0));
        assert!((d - 18.0).abs() < 1e-12);
    }

    #[test]
    fn ppp_count_matches_intensity() {
        let w = Window::new(500.0, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut total = 0usize;
        let reps = 200;
        for _ in 0..reps {
            total += sample_ppp(1e-3, &w, &mut rng).unwrap().len();
        }
        let mean = total as f64 / reps as f64;
        let expect = 1e-3 * w.area();
        // 200 reps of Poisson(1000): stderr ~ 2.2, allow 5 sigma.
        assert!((mean - expect).abs() < 12.0, "mean {mean} vs {expect}");
    }

    #[test]
    fn grid_nearest_agrees_with_brute_force() {
        for &wrap in &[true, false] {
            let w = Window::new(100.0, wrap).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let pts = sample_ppp(2e-2, &w, &mut rng).unwrap();
            let idx = GridIndex::new(&pts, &w).unwrap();
            for _ in 0..300 {
                let q = Point2::new(rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0));
                let (gi, gd) = idx.nearest(q);
                let (bi, bd) = pts
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| (i, w.distance(q, p)))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap();
                assert_eq!(gi, bi, "wrap={wrap}");
                assert!((gd - bd).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn schedule_is_uniform_over_cell_users() {
        // 1 BS, 4 users: each user should win the slot about 1/4 of runs.
        let assoc = vec![0usize; 4];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut wins = [0u32; 4];
        let reps = 40_000;
        for _ in 0..reps {
            let s = schedule(&assoc, 1, &mut rng);
            wins[s[0].unwrap() as usize] += 1;
        }
        for &w in &wins {
            let f = w as f64 / reps as f64;
            // Binomial(40000, 1/4) stderr ~ 0.00217; allow 5 sigma.
            assert!((f - 0.25).abs() < 0.011, "empirical frequency {f}");
        }
    }

    #[test]
    fn schedule_assigns_each_bs_at_most_one_user() {
        let w = Window::new(300.0, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bs = sample_ppp(1e-3, &w, &mut rng).unwrap();
        let users = sample_ppp(5e-4, &w, &mut rng).unwrap();
        let assoc = associate(&users, &bs, &w).unwrap();
        let sched = schedule(&assoc, bs.len(), &mut rng);
        // A scheduled user must belong to the BS's own cell, and a BS with
        // at least one user must have a slot filled.
        let mut has_user = vec![false; bs.len()];
        for &b in &assoc {
            has_user[b] = true;
        }
        for (b, s) in sched.iter().enumerate() {
            match s {
                Some(u) => assert_eq!(assoc[*u as usize], b),
                None => assert!(!has_user[b]),
            }
        }
    }

    #[test]
    fn active_fraction_matches_thinning_law() {
        // Fraction of BSs with at least one user vs the standard cell-load
        // approximation 1 - (1 + x/3.5)^-3.5 at x = lambda_u/lambda_bs.
        let w = Window::new(1000.0, true).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let lam_bs = 1e-3;
        let lam_u = 1e-3; // x = 1
        let mut active = 0usize;
        let mut total = 0usize;
        for _ in 0..30 {
            let bs = sample_ppp(lam_bs, &w, &mut rng).unwrap();
            let users = sample_ppp(lam_u, &w, &mut rng).unwrap();
            let assoc = associate(&users, &bs, &w).unwrap();
            let sched = schedule(&assoc, bs.len(), &mut rng);
            active += sched.iter().filter(|s| s.is_some()).count();
            total += bs.len();
        }
        let frac = active as f64 / total as f64;
        let theory = 1.0 - (1.0f64 + 1.0 / 3.5).powf(-3.5);
        assert!((frac - theory).abs() < 0.01, "active fraction {frac} vs {theory}");
    }
}
