//! Line-of-sight range from urban building statistics. A link of length r
//! survives if no building crosses it with enough height to cut the 3D
//! path between antenna tops; aggregate building geometry collapses into
//! two scalars (a crossing rate and the fraction of crossings tall enough
//! to block) and the mean LOS range follows in closed form.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{require, require_finite, Error, Result};
use crate::geometry::Point2;
use crate::numeric::integrate;

/// Aggregate building statistics of an urban region. Heights are modeled
/// log-normal: ln H ~ N(height_ln_mu, height_ln_sigma^2), in meters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BuildingStats {
    /// Mean building perimeter, meters.
    pub avg_perimeter_m: f64,
    /// Mean building footprint area, m^2.
    pub avg_area_m2: f64,
    /// Fraction of ground covered by buildings, in (0,1).
    pub coverage: f64,
    pub height_ln_mu: f64,
    pub height_ln_sigma: f64,
    /// Common antenna height of BSs and users, meters.
    pub bs_height_m: f64,
}

impl BuildingStats {
    pub fn validate(&self) -> Result<()> {
        require_finite(self.avg_perimeter_m, "average perimeter")?;
        require(self.avg_perimeter_m > 0.0, "average perimeter must be positive")?;
        require_finite(self.avg_area_m2, "average area")?;
        require(self.avg_area_m2 > 0.0, "average area must be positive")?;
        require_finite(self.coverage, "coverage")?;
        require(
            self.coverage > 0.0 && self.coverage < 1.0,
            "coverage must lie strictly between 0 and 1",
        )?;
        require_finite(self.height_ln_mu, "log-height mean")?;
        require_finite(self.height_ln_sigma, "log-height sigma")?;
        require(self.height_ln_sigma >= 0.0, "log-height sigma must be nonnegative")?;
        require_finite(self.bs_height_m, "antenna height")?;
        require(self.bs_height_m > 0.0, "antenna height must be positive")?;
        Ok(())
    }

    /// Mean building height E[H] = exp(mu + sigma^2/2).
    pub fn mean_height_m(&self) -> f64 {
        (self.height_ln_mu + 0.5 * self.height_ln_sigma * self.height_ln_sigma).exp()
    }

    /// P(H <= h) under the fitted log-normal.
    pub fn height_cdf(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        if self.height_ln_sigma == 0.0 {
            return if h.ln() >= self.height_ln_mu { 1.0 } else { 0.0 };
        }
        let std = Normal::new(0.0, 1.0).expect("unit normal");
        std.cdf((h.ln() - self.height_ln_mu) / self.height_ln_sigma)
    }
}

/// Hard-disc LOS model: a link is line-of-sight iff its length does not
/// exceed `r_l` (which may be infinite for an open environment).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LosModel {
    pub r_l: f64,
}

impl LosModel {
    pub fn new(r_l: f64) -> Result<Self> {
        require(r_l > 0.0 && !r_l.is_nan(), "LOS range must be positive")?;
        Ok(LosModel { r_l })
    }

    pub fn is_los(&self, r: f64) -> bool {
        r <= self.r_l
    }
}

/// LOS indicator: 1 iff 0 <= r <= r_l (boundary inclusive).
pub fn los_indicator(model: &LosModel, r: f64) -> Result<u8> {
    require(r >= 0.0, "link length must be nonnegative")?;
    Ok(u8::from(model.is_los(r)))
}

/// Building-crossing rate per meter of link length:
/// beta = -2 rho ln(1 - kappa) / (pi A).
pub fn beta_param(stats: &BuildingStats) -> Result<f64> {
    stats.validate()?;
    let k = stats.coverage;
    Ok(-2.0 * stats.avg_perimeter_m * (1.0 - k).ln() / (std::f64::consts::PI * stats.avg_area_m2))
}

/// Fraction of building crossings tall enough to block the 3D path,
/// averaged over a uniform crossing position s in [0,1]:
///
///   eta = integral over s in [0,1] of P(H > (1 - s) B) ds
///
/// where B is the antenna height. Lies in [0,1]; eta = 0 means no building
/// ever reaches the path (fully open), eta = 1 means every crossing blocks.
pub fn eta_param(stats: &BuildingStats) -> Result<f64> {
    stats.validate()?;
    let b = stats.bs_height_m;
    if stats.height_ln_sigma == 0.0 {
        // Point mass at e^mu: the crossing blocks iff (1-s) B < e^mu,
        // an s-interval of length min(1, e^mu / B).
        return Ok((stats.height_ln_mu.exp() / b).min(1.0));
    }
    let q = integrate(|s| 1.0 - stats.height_cdf((1.0 - s) * b), 0.0, 1.0, 1e-9, 1e-8)?;
    Ok(q.value.clamp(0.0, 1.0))
}

/// Mean LOS range from the three blockage parameters:
/// R_L = 2 (1 - kappa) / (beta eta).
pub fn los_distance_from(kappa: f64, beta: f64, eta: f64) -> Result<f64> {
    require_finite(kappa, "coverage")?;
    require(kappa > 0.0 && kappa < 1.0, "coverage must lie strictly between 0 and 1")?;
    require_finite(beta, "crossing rate")?;
    require_finite(eta, "blocking fraction")?;
    require(beta >= 0.0 && eta >= 0.0, "blockage parameters must be nonnegative")?;
    let be = beta * eta;
    if be <= 0.0 {
        return Err(Error::numerical(
            "open environment: no effective blockage, LOS range is unbounded",
        ));
    }
    Ok(2.0 * (1.0 - kappa) / be)
}

/// Mean LOS range straight from building statistics.
pub fn avg_los_distance(stats: &BuildingStats) -> Result<f64> {
    let beta = beta_param(stats)?;
    let eta = eta_param(stats)?;
    los_distance_from(stats.coverage, beta, eta)
}

/// A single building footprint with its floor count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuildingRecord {
    pub footprint: Vec<Point2>,
    pub floors: u32,
}

impl BuildingRecord {
    /// Vertices with a closing duplicate of the first point removed.
    fn ring(&self) -> Result<&[Point2]> {
        let n = self.footprint.len();
        require(n >= 4, "polygon needs at least 3 vertices plus a closing point")?;
        let first = self.footprint[0];
        let last = self.footprint[n - 1];
        require(
            (first.x - last.x).abs() < 1e-9 && (first.y - last.y).abs() < 1e-9,
            "polygon ring must be closed (first point repeated at the end)",
        )?;
        Ok(&self.footprint[..n - 1])
    }

    pub fn perimeter_m(&self) -> Result<f64> {
        let ring = self.ring()?;
        let mut p = 0.0;
        for i in 0..ring.len() {
            let a = ring[i];
            let b = ring[(i + 1) % ring.len()];
            p += ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
        }
        Ok(p)
    }

    /// Shoelace area, absolute value.
    pub fn area_m2(&self) -> Result<f64> {
        let ring = self.ring()?;
        let mut s = 0.0;
        for i in 0..ring.len() {
            let a = ring[i];
            let b = ring[(i + 1) % ring.len()];
            s += a.x * b.y - b.x * a.y;
        }
        Ok(0.5 * s.abs())
    }

    pub fn validate(&self) -> Result<()> {
        require(self.floors >= 1, "building must have at least one floor")?;
        let area = self.area_m2()?;
        require(area > 0.0, "polygon area must be positive")?;
        require(self.is_simple()?, "polygon must not self-intersect")?;
        Ok(())
    }

    /// Rejects rings whose non-adjacent edges intersect. O(n^2), fine for
    /// building footprints.
    fn is_simple(&self) -> Result<bool> {
        let ring = self.ring()?;
        let n = ring.len();
        for i in 0..n {
            for j in (i + 1)..n {
                // Skip adjacent edges (they share an endpoint).
                if j == i || (j + 1) % n == i || (i + 1) % n == j {
                    continue;
                }
                let (a1, a2) = (ring[i], ring[(i + 1) % n]);
                let (b1, b2) = (ring[j], ring[(j + 1) % n]);
                if segments_intersect(a1, a2, b1, b2) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn segments_intersect(a1: Point2, a2: Point2, b1: Point2, b2: Point2) -> bool {
    let d1 = orient(a1, a2, b1);
    let d2 = orient(a1, a2, b2);
    let d3 = orient(b1, b2, a1);
    let d4 = orient(b1, b2, a2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    // Collinear overlaps count as intersections too.
    let on = |p: Point2, q: Point2, r: Point2| {
        orient(p, q, r) == 0.0
            && r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    on(a1, a2, b1) || on(a1, a2, b2) || on(b1, b2, a1) || on(b1, b2, a2)
}

/// Aggregates building records into the blockage statistics. Heights are
/// floors x floor_height; the log-normal is fit by maximum likelihood on
/// log-heights, and the antenna height is set to the fitted mean E[H].
pub fn ingest_buildings(
    records: &[BuildingRecord],
    region_area_m2: f64,
    floor_height_m: f64,
) -> Result<BuildingStats> {
    require(!records.is_empty(), "no building records")?;
    require_finite(region_area_m2, "region area")?;
    require(region_area_m2 > 0.0, "region area must be positive")?;
    let mut rows = Vec::with_capacity(records.len());
    for r in records {
        r.validate()?;
        rows.push((r.perimeter_m()?, r.area_m2()?, r.floors));
    }
    ingest_rows(&rows, region_area_m2, floor_height_m)
}

/// Same aggregation from per-building (perimeter, area, floors) rows, for
/// data sources that ship precomputed footprint measurements.
pub fn ingest_rows(
    rows: &[(f64, f64, u32)],
    region_area_m2: f64,
    floor_height_m: f64,
) -> Result<BuildingStats> {
    require(!rows.is_empty(), "no building rows")?;
    require_finite(region_area_m2, "region area")?;
    require(region_area_m2 > 0.0, "region area must be positive")?;
    require_finite(floor_height_m, "floor height")?;
    require(floor_height_m > 0.0, "floor height must be positive")?;

    let n = rows.len() as f64;
    let mut sum_p = 0.0;
    let mut sum_a = 0.0;
    let mut sum_ln_h = 0.0;
    for &(p, a, floors) in rows {
        require(p > 0.0 && p.is_finite(), "building perimeter must be positive")?;
        require(a > 0.0 && a.is_finite(), "building area must be positive")?;
        require(floors >= 1, "building must have at least one floor")?;
        sum_p += p;
        sum_a += a;
        sum_ln_h += (floors as f64 * floor_height_m).ln();
    }
    if sum_a > region_area_m2 {
        return Err(Error::invalid(format!(
            "total footprint area {sum_a:.1} m^2 exceeds the region area {region_area_m2:.1} m^2"
        )));
    }
    let mu = sum_ln_h / n;
    let mut ss = 0.0;
    for &(_, _, floors) in rows {
        let d = (floors as f64 * floor_height_m).ln() - mu;
        ss += d * d;
    }
    // MLE variance (1/n); matches the fit being a plug-in estimate, not an
    // unbiased sample variance.
    let sigma = (ss / n).sqrt();

    let stats = BuildingStats {
        avg_perimeter_m: sum_p / n,
        avg_area_m2: sum_a / n,
        coverage: (sum_a / region_area_m2).min(1.0 - 1e-12),
        height_ln_mu: mu,
        height_ln_sigma: sigma,
        bs_height_m: (mu + 0.5 * sigma * sigma).exp(),
    };
    stats.validate()?;
    Ok(stats)
}

/// Flat `key = value` rendering of the statistics, one per line.
pub fn stats_to_kv(stats: &BuildingStats) -> String {
    format!(
        "avg_perimeter_m = {}\navg_area_m2 = {}\ncoverage = {}\nheight_ln_mu = {}\nheight_ln_sigma = {}\nbs_height_m = {}\n",
        stats.avg_perimeter_m,
        stats.avg_area_m2,
        stats.coverage,
        stats.height_ln_mu,
        stats.height_ln_sigma,
        stats.bs_height_m
    )
}

/// Parses the `key = value` rendering produced by `stats_to_kv`.
pub fn stats_from_kv(text: &str) -> Result<BuildingStats> {
    let mut vals = std::collections::BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("line {}: expected `key = value`", lineno + 1)))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("line {}: bad number {:?}", lineno + 1, v.trim())))?;
        vals.insert(k.trim().to_string(), v);
    }
    let get = |k: &str| -> Result<f64> {
        vals.get(k).copied().ok_or_else(|| Error::invalid(format!("missing key {k}")))
    };
    let stats = BuildingStats {
        avg_perimeter_m: get("avg_perimeter_m")?,
        avg_area_m2: get("avg_area_m2")?,
        coverage: get("coverage")?,
        height_ln_mu: get("height_ln_mu")?,
        height_ln_sigma: get("height_ln_sigma")?,
        bs_height_m: get("bs_height_m")?,
    };
    stats.validate()?;
    Ok(stats)
}

/// Reads building records from a GeoJSON FeatureCollection whose features
/// carry Polygon geometry (planar coordinates in meters) and an integer
/// `floors` property. Only the exterior ring is used.
pub fn records_from_geojson(text: &str) -> Result<Vec<BuildingRecord>> {
    let doc: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("bad GeoJSON: {e}")))?;
    let features = doc
        .get("features")
        .and_then(|f| f.as_array())
        .ok_or_else(|| Error::invalid("GeoJSON must be a FeatureCollection with features"))?;
    let mut records = Vec::with_capacity(features.len());
    for (i, feat) in features.iter().enumerate() {
        let geom = feat
            .get("geometry")
            .ok_or_else(|| Error::invalid(format!("feature {i}: missing geometry")))?;
        let gtype = geom.get("type").and_then(|t| t.as_str()).unwrap_or("");
        if gtype != "Polygon" {
            return Err(Error::invalid(format!(
                "feature {i}: geometry type {gtype:?}, only Polygon is supported"
            )));
        }
        let rings = geom
            .get("coordinates")
            .and_then(|c| c.as_array())
            .ok_or_else(|| Error::invalid(format!("feature {i}: missing coordinates")))?;
        let exterior = rings
            .first()
            .and_then(|r| r.as_array())
            .ok_or_else(|| Error::invalid(format!("feature {i}: empty polygon")))?;
        let mut footprint = Vec::with_capacity(exterior.len());
        for pt in exterior {
            let xy = pt.as_array().filter(|a| a.len() >= 2).ok_or_else(|| {
                Error::invalid(format!("feature {i}: coordinate is not an [x, y] pair"))
            })?;
            let x = xy[0].as_f64().ok_or_else(|| Error::invalid("non-numeric coordinate"))?;
            let y = xy[1].as_f64().ok_or_else(|| Error::invalid("non-numeric coordinate"))?;
            footprint.push(Point2::new(x, y));
        }
        let floors = feat
            .get("properties")
            .and_then(|p| p.get("floors"))
            .and_then(|f| f.as_u64())
            .ok_or_else(|| {
                Error::invalid(format!("feature {i}: missing integer `floors` property"))
            })?;
        if floors == 0 || floors > u32::MAX as u64 {
            return Err(Error::invalid(format!("feature {i}: floors out of range")));
        }
        let rec = BuildingRecord { footprint, floors: floors as u32 };
        rec.validate().map_err(|e| Error::invalid(format!("feature {i}: {e}")))?;
        records.push(rec);
    }
    Ok(records)
}

/// Reads per-building rows from CSV with header `perimeter_m,area_m2,floors`.
pub fn rows_from_csv(text: &str) -> Result<Vec<(f64, f64, u32)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::invalid("empty building CSV"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["perimeter_m", "area_m2", "floors"] {
        return Err(Error::invalid(format!(
            "building CSV header must be `perimeter_m,area_m2,floors`, got {header:?}"
        )));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::invalid(format!("line {}: expected 3 fields", lineno + 1)));
        }
        let p: f64 = parts[0]
            .parse()
            .map_err(|_| Error::invalid(format!("line {}: bad perimeter", lineno + 1)))?;
        let a: f64 = parts[1]
            .parse()
            .map_err(|_| Error::invalid(format!("line {}: bad area", lineno + 1)))?;
        let f: u32 = parts[2]
            .parse()
            .map_err(|_| Error::invalid(format!("line {}: bad floors", lineno + 1)))?;
        rows.push((p, a, f));
    }
    Ok(rows)
}
