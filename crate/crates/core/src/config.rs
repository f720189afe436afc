//! Run configuration: a flat TOML file with unit-suffixed keys, parsed
//! strictly (unknown keys are errors, exclusive groups are enforced) so
//! that a typo fails loudly instead of silently using a default.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::allocator::{PaprVariant, SpectrumConfig};
use crate::blockage::{self, BuildingStats};
use crate::channel::{ChannelConfig, Link};
use crate::error::{require, Error, Result};
use crate::geometry::DensityConfig;
use crate::montecarlo::ExperimentPlan;

/// Where the LOS range comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum BlockageSource {
    /// Direct LOS range in meters.
    ExplicitRl { r_l_m: f64 },
    /// Aggregate building statistics given inline.
    Stats(BuildingStats),
    /// Building data file (GeoJSON polygons or per-building CSV rows).
    GeoData { path: String, region_area_m2: f64, floor_height_m: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub densities: DensityConfig,
    pub alpha_m: f64,
    pub alpha_mu: f64,
    pub theta_rad: f64,
    pub noise_power: f64,
    pub spectrum: SpectrumConfig,
    pub papr_variant: PaprVariant,
    pub blockage: BlockageSource,
    pub half_width_m: Option<f64>,
    pub wraparound: bool,
    pub seed: u64,
    pub n_realizations: u64,
    pub cap_nats: f64,
}

impl NetworkConfig {
    /// LOS range in meters; ingests building data when required, with
    /// relative paths resolved against `base_dir`.
    pub fn resolve_r_l(&self, base_dir: Option<&Path>) -> Result<f64> {
        match &self.blockage {
            BlockageSource::ExplicitRl { r_l_m } => {
                require(*r_l_m > 0.0 && !r_l_m.is_nan(), "r_l_m must be positive")?;
                Ok(*r_l_m)
            }
            BlockageSource::Stats(stats) => blockage::avg_los_distance(stats),
            BlockageSource::GeoData { path, region_area_m2, floor_height_m } => {
                let p = Path::new(path);
                let full = match (p.is_relative(), base_dir) {
                    (true, Some(base)) => base.join(p),
                    _ => p.to_path_buf(),
                };
                let text = std::fs::read_to_string(&full).map_err(|e| {
                    Error::invalid(format!("cannot read building data {}: {e}", full.display()))
                })?;
                let stats = ingest_geodata(&full, &text, *region_area_m2, *floor_height_m)?;
                blockage::avg_los_distance(&stats)
            }
        }
    }

    /// Building statistics, when the blockage source provides them.
    pub fn building_stats(&self, base_dir: Option<&Path>) -> Result<Option<BuildingStats>> {
        match &self.blockage {
            BlockageSource::ExplicitRl { .. } => Ok(None),
            BlockageSource::Stats(stats) => Ok(Some(*stats)),
            BlockageSource::GeoData { path, region_area_m2, floor_height_m } => {
                let p = Path::new(path);
                let full = match (p.is_relative(), base_dir) {
                    (true, Some(base)) => base.join(p),
                    _ => p.to_path_buf(),
                };
                let text = std::fs::read_to_string(&full).map_err(|e| {
                    Error::invalid(format!("cannot read building data {}: {e}", full.display()))
                })?;
                Ok(Some(ingest_geodata(&full, &text, *region_area_m2, *floor_height_m)?))
            }
        }
    }

    pub fn channel(&self, r_l: f64) -> Result<ChannelConfig> {
        let cfg = ChannelConfig {
            alpha_m: self.alpha_m,
            alpha_mu: self.alpha_mu,
            theta: self.theta_rad,
            noise_power: self.noise_power,
            los: blockage::LosModel::new(r_l)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn plan(&self, links: &[Link], r_l: f64) -> Result<ExperimentPlan> {
        let plan = ExperimentPlan {
            densities: self.densities,
            channel: self.channel(r_l)?,
            half_width_m: self.half_width_m,
            wraparound: self.wraparound,
            n_realizations: self.n_realizations,
            seed: self.seed,
            cap_nats: self.cap_nats,
            links: links.iter().copied().collect(),
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        self.densities.validate()?;
        self.spectrum.validate()?;
        require(self.alpha_m > 2.0, "alpha_m must exceed 2")?;
        require(self.alpha_mu > 2.0, "alpha_mu must exceed 2")?;
        require(
            self.theta_rad > 0.0 && self.theta_rad <= 2.0 * std::f64::consts::PI + 1e-12,
            "theta_rad must lie in (0, 2*pi]",
        )?;
        require(self.noise_power >= 0.0, "noise_power must be nonnegative")?;
        require(self.cap_nats > 0.0, "cap_nats must be positive")?;
        require(self.n_realizations >= 2, "n_realizations must be at least 2")?;
        if let Some(hw) = self.half_width_m {
            require(hw > 0.0 && hw.is_finite(), "half_width_m must be positive")?;
        }
        Ok(())
    }
}

fn ingest_geodata(
    path: &Path,
    text: &str,
    region_area_m2: f64,
    floor_height_m: f64,
) -> Result<BuildingStats> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    match ext.as_str() {
        "geojson" | "json" => {
            let records = blockage::records_from_geojson(text)?;
            blockage::ingest_buildings(&records, region_area_m2, floor_height_m)
        }
        "csv" => {
            let rows = blockage::rows_from_csv(text)?;
            blockage::ingest_rows(&rows, region_area_m2, floor_height_m)
        }
        other => Err(Error::invalid(format!(
            "building data must be .geojson/.json or .csv, got extension {other:?}"
        ))),
    }
}

struct Section<'a> {
    name: &'a str,
    table: &'a toml::Table,
    seen: BTreeSet<&'a str>,
}

impl<'a> Section<'a> {
    fn new(name: &'a str, table: &'a toml::Table) -> Self {
        Section { name, table, seen: BTreeSet::new() }
    }

    fn get(&mut self, key: &'static str) -> Option<&'a toml::Value> {
        let v = self.table.get(key);
        if v.is_some() {
            self.seen.insert(key);
        }
        v
    }

    fn f64_req(&mut self, key: &'static str) -> Result<f64> {
        self.f64_opt(key)?
            .ok_or_else(|| Error::invalid(format!("[{}] missing key {key}", self.name)))
    }

    fn f64_opt(&mut self, key: &'static str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(f)) => Ok(Some(*f)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(v) => Err(Error::invalid(format!(
                "[{}] key {key} must be a number, got {v}",
                self.name
            ))),
        }
    }

    fn u64_opt(&mut self, key: &'static str) -> Result<Option<u64>> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(v) => Err(Error::invalid(format!(
                "[{}] key {key} must be a nonnegative integer, got {v}",
                self.name
            ))),
        }
    }

    fn bool_opt(&mut self, key: &'static str) -> Result<Option<bool>> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::Boolean(b)) => Ok(Some(*b)),
            Some(v) => Err(Error::invalid(format!(
                "[{}] key {key} must be a boolean, got {v}",
                self.name
            ))),
        }
    }

    fn str_opt(&mut self, key: &'static str) -> Result<Option<&'a str>> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.as_str())),
            Some(v) => Err(Error::invalid(format!(
                "[{}] key {key} must be a string, got {v}",
                self.name
            ))),
        }
    }

    fn finish(self) -> Result<()> {
        for key in self.table.keys() {
            if !self.seen.contains(key.as_str()) {
                return Err(Error::invalid(format!("[{}] unknown key {key}", self.name)));
            }
        }
        Ok(())
    }
}

fn section<'a>(root: &'a toml::Table, name: &'a str) -> Result<Option<Section<'a>>> {
    match root.get(name) {
        None => Ok(None),
        Some(toml::Value::Table(t)) => Ok(Some(Section::new(name, t))),
        Some(_) => Err(Error::invalid(format!("[{name}] must be a table"))),
    }
}

fn section_req<'a>(root: &'a toml::Table, name: &'a str) -> Result<Section<'a>> {
    section(root, name)?.ok_or_else(|| Error::invalid(format!("missing [{name}] section")))
}

/// Parses the TOML text into a validated configuration.
pub fn parse_config(text: &str) -> Result<NetworkConfig> {
    let root: toml::Table = text
        .parse()
        .map_err(|e| Error::invalid(format!("config is not valid TOML: {e}")))?;

    let known = ["densities", "channel", "spectrum", "blockage", "window", "run"];
    for key in root.keys() {
        if !known.contains(&key.as_str()) {
            return Err(Error::invalid(format!("unknown section [{key}]")));
        }
    }

    let mut s = section_req(&root, "densities")?;
    let densities = DensityConfig {
        lambda_m: s.f64_req("lambda_m_per_m2")?,
        lambda_mu: s.f64_req("lambda_mu_per_m2")?,
        lambda_u: s.f64_req("lambda_u_per_m2")?,
    };
    s.finish()?;

    let mut s = section_req(&root, "channel")?;
    let alpha_m = s.f64_req("alpha_m")?;
    let alpha_mu = s.f64_req("alpha_mu")?;
    let theta_rad = s.f64_req("theta_rad")?;
    let noise_power = s.f64_opt("noise_power")?.unwrap_or(0.0);
    s.finish()?;

    let mut s = section_req(&root, "spectrum")?;
    let w_mu_hz = s.f64_req("w_mu_hz")?;
    let w_m_hz = s.f64_req("w_m_hz")?;
    let f_s_hz = s.f64_req("f_s_hz")?;
    let delta_db = s.f64_opt("delta_db")?;
    let delta_linear_raw = s.f64_opt("delta_linear")?;
    let delta_linear = match (delta_db, delta_linear_raw) {
        (Some(db), None) => 10f64.powf(db / 10.0),
        (None, Some(lin)) => lin,
        (Some(_), Some(_)) => {
            return Err(Error::invalid(
                "[spectrum] give exactly one of delta_db and delta_linear, not both",
            ))
        }
        (None, None) => {
            return Err(Error::invalid(
                "[spectrum] give exactly one of delta_db and delta_linear",
            ))
        }
    };
    let epsilon = s.f64_req("epsilon")?;
    let zeta = s.f64_req("zeta")?;
    let papr_variant = match s.str_opt("papr_variant")? {
        None => PaprVariant::default(),
        Some(v) => v.parse()?,
    };
    s.finish()?;
    let spectrum = SpectrumConfig { w_mu_hz, w_m_hz, f_s_hz, delta_linear, epsilon, zeta };

    let mut s = section_req(&root, "blockage")?;
    let r_l_m = s.f64_opt("r_l_m")?;
    let stats_keys = [
        s.f64_opt("avg_perimeter_m")?,
        s.f64_opt("avg_area_m2")?,
        s.f64_opt("coverage")?,
        s.f64_opt("height_ln_mu")?,
        s.f64_opt("height_ln_sigma")?,
        s.f64_opt("bs_height_m")?,
    ];
    let geodata = s.str_opt("geodata_path")?.map(str::to_owned);
    let region_area_m2 = s.f64_opt("region_area_m2")?;
    let floor_height_m = s.f64_opt("floor_height_m")?;
    s.finish()?;

    let has_stats = stats_keys.iter().any(Option::is_some);
    let has_geo = geodata.is_some() || region_area_m2.is_some() || floor_height_m.is_some();
    let blockage = match (r_l_m, has_stats, has_geo) {
        (Some(r), false, false) => BlockageSource::ExplicitRl { r_l_m: r },
        (None, true, false) => {
            let all: Option<Vec<f64>> = stats_keys.iter().copied().collect();
            let all = all.ok_or_else(|| {
                Error::invalid(
                    "[blockage] inline statistics need all of avg_perimeter_m, avg_area_m2, \
                     coverage, height_ln_mu, height_ln_sigma, bs_height_m",
                )
            })?;
            let stats = BuildingStats {
                avg_perimeter_m: all[0],
                avg_area_m2: all[1],
                coverage: all[2],
                height_ln_mu: all[3],
                height_ln_sigma: all[4],
                bs_height_m: all[5],
            };
            stats.validate()?;
            BlockageSource::Stats(stats)
        }
        (None, false, true) => {
            let path = geodata.ok_or_else(|| {
                Error::invalid("[blockage] geodata needs geodata_path")
            })?;
            BlockageSource::GeoData {
                path,
                region_area_m2: region_area_m2.ok_or_else(|| {
                    Error::invalid("[blockage] geodata needs region_area_m2")
                })?,
                floor_height_m: floor_height_m.ok_or_else(|| {
                    Error::invalid("[blockage] geodata needs floor_height_m")
                })?,
            }
        }
        (None, false, false) => {
            return Err(Error::invalid(
                "[blockage] give one of: r_l_m, inline building statistics, or geodata_path",
            ))
        }
        _ => {
            return Err(Error::invalid(
                "[blockage] r_l_m, inline statistics, and geodata are mutually exclusive",
            ))
        }
    };

    let (half_width_m, wraparound) = match section(&root, "window")? {
        None => (None, true),
        Some(mut s) => {
            let hw = s.f64_opt("half_width_m")?;
            let wrap = s.bool_opt("wraparound")?.unwrap_or(true);
            s.finish()?;
            (hw, wrap)
        }
    };

    let (seed, n_realizations, cap_nats) = match section(&root, "run")? {
        None => (1, 1000, 50.0),
        Some(mut s) => {
            let seed = s.u64_opt("seed")?.unwrap_or(1);
            let n = s.u64_opt("n_realizations")?.unwrap_or(1000);
            let cap = s.f64_opt("cap_nats")?.unwrap_or(50.0);
            s.finish()?;
            (seed, n, cap)
        }
    };

    let cfg = NetworkConfig {
        densities,
        alpha_m,
        alpha_mu,
        theta_rad,
        noise_power,
        spectrum,
        papr_variant,
        blockage,
        half_width_m,
        wraparound,
        seed,
        n_realizations,
        cap_nats,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Loads and parses a config file; the second element is the directory
/// against which relative data paths inside the config resolve.
pub fn load_config(path: &Path) -> Result<(NetworkConfig, Option<std::path::PathBuf>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read config {}: {e}", path.display())))?;
    let cfg = parse_config(&text)?;
    Ok((cfg, path.parent().map(|p| p.to_path_buf())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
[densities]
lambda_m_per_m2 = 2e-4
lambda_mu_per_m2 = 4e-4
lambda_u_per_m2 = 1e-4

[channel]
alpha_m = 3.0
alpha_mu = 4.0
theta_rad = 0.5235987755982988

[spectrum]
w_mu_hz = 20e6
w_m_hz = 500e6
f_s_hz = 244.14e3
delta_db = 7.0
epsilon = 0.7
zeta = 0.2

[blockage]
r_l_m = 100.0

[run]
seed = 42
n_realizations = 100
"#;

    #[test]
    fn parses_complete_config() {
        let cfg = parse_config(GOOD).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.n_realizations, 100);
        assert_eq!(cfg.cap_nats, 50.0);
        assert!(cfg.wraparound);
        assert!((cfg.spectrum.delta_linear - 10f64.powf(0.7)).abs() < 1e-12);
        assert_eq!(cfg.papr_variant, PaprVariant::Inversion);
        assert_eq!(cfg.resolve_r_l(None).unwrap(), 100.0);
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = GOOD.replace("zeta = 0.2", "zeta = 0.2\nzeta_typo = 0.3");
        assert!(parse_config(&bad).is_err());
        let bad = format!("{GOOD}\n[extra]\nx = 1\n");
        assert!(parse_config(&bad).is_err());
    }

    #[test]
    fn delta_forms_are_exclusive() {
        let both = GOOD.replace("delta_db = 7.0", "delta_db = 7.0\ndelta_linear = 5.0");
        assert!(parse_config(&both).is_err());
        let neither = GOOD.replace("delta_db = 7.0\n", "");
        assert!(parse_config(&neither).is_err());
        let lin = GOOD.replace("delta_db = 7.0", "delta_linear = 5.011872336272722");
        let cfg = parse_config(&lin).unwrap();
        assert!((cfg.spectrum.delta_linear - 5.011872336272722).abs() < 1e-15);
    }

    #[test]
    fn blockage_sources_are_exclusive() {
        let two = GOOD.replace("r_l_m = 100.0", "r_l_m = 100.0\ncoverage = 0.3");
        assert!(parse_config(&two).is_err());
        let none = GOOD.replace("r_l_m = 100.0\n", "");
        assert!(parse_config(&none).is_err());
    }

    #[test]
    fn inline_stats_resolve_to_r_l() {
        let stats = GOOD.replace(
            "r_l_m = 100.0",
            "avg_perimeter_m = 59.02\navg_area_m2 = 218.60\ncoverage = 0.3477\n\
             height_ln_mu = 1.62\nheight_ln_sigma = 0.27\nbs_height_m = 14.23",
        );
        let cfg = parse_config(&stats).unwrap();
        let r_l = cfg.resolve_r_l(None).unwrap();
        assert!(r_l > 40.0 && r_l < 60.0, "r_l = {r_l}");
    }

    #[test]
    fn partial_inline_stats_rejected() {
        let partial = GOOD.replace("r_l_m = 100.0", "coverage = 0.3477");
        assert!(parse_config(&partial).is_err());
    }

    #[test]
    fn json_round_trip() {
        let cfg = parse_config(GOOD).unwrap();
        let js = serde_json::to_string(&cfg).unwrap();
        let back: NetworkConfig = serde_json::from_str(&js).unwrap();
        assert_eq!(back.seed, cfg.seed);
        assert_eq!(back.spectrum.zeta, cfg.spectrum.zeta);
        match back.blockage {
            BlockageSource::ExplicitRl { r_l_m } => assert_eq!(r_l_m, 100.0),
            other => panic!("wrong blockage source: {other:?}"),
        }
    }
}
