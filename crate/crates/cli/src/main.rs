//! Command-line front end: blockage ingestion, SE tables, density sweeps,
//! and bandwidth-allocation sweeps, each emitting CSV plus a run manifest.
//!
//! Exit codes: 0 success, 1 invalid input, 2 numerical failure,
//! 3 infeasible allocation (only with --strict-feasibility).

mod manifest;
mod output;
mod presets;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use manifest::RunManifest;
use output::{SeRow, Units};
use presets::Preset;
use udnsim::allocator::{asymptotic_gammas, optimize_closed_form, PaprVariant};
use udnsim::analytic;
use udnsim::blockage;
use udnsim::channel::Link;
use udnsim::config::{load_config, BlockageSource, NetworkConfig};
use udnsim::montecarlo::{convergence_sweep, SeEstimate};
use udnsim::{Error, Result};

#[derive(Parser)]
#[command(
    name = "udnsim",
    version,
    about = "Two-tier ultra-dense network simulator: spectral-efficiency \
             estimation, LOS blockage analysis, and UL/DL bandwidth allocation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Derive building statistics and the average LOS range
    Blockage(BlockageArgs),
    /// Tabulate per-link spectral efficiency across density ratios
    Se(SeArgs),
    /// Monte Carlo density sweep with the analytic bracket alongside
    Sweep(SweepArgs),
    /// Sweep the closed-form UL/DL bandwidth allocation
    Optimize(OptimizeArgs),
}

#[derive(Args)]
struct Shared {
    /// TOML configuration file
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Named parameter bundle: fig2, fig3, fig4, fig5a, fig5b
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Override the configured RNG seed
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for data files (default: current directory)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Units for spectral-efficiency and rate columns
    #[arg(long, value_enum, default_value_t = UnitsArg::Nats)]
    units: UnitsArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum UnitsArg {
    Nats,
    Bits,
}

impl UnitsArg {
    fn to_units(self) -> Units {
        match self {
            UnitsArg::Nats => Units::Nats,
            UnitsArg::Bits => Units::Bits,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Analytic,
    Exact,
    Montecarlo,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Inversion,
    #[value(name = "log_constant", alias = "log-constant")]
    LogConstant,
}

impl VariantArg {
    fn to_variant(self) -> PaprVariant {
        match self {
            VariantArg::Inversion => PaprVariant::Inversion,
            VariantArg::LogConstant => PaprVariant::LogConstant,
        }
    }
}

#[derive(Args)]
struct BlockageArgs {
    #[command(flatten)]
    shared: Shared,
    /// Building data file (GeoJSON polygons or per-building CSV);
    /// overrides the config's blockage source
    #[arg(long, value_name = "PATH", requires_all = ["region_area_m2", "floor_height_m"])]
    geodata: Option<PathBuf>,
    /// Total region area the building data covers
    #[arg(long, value_name = "M2", requires = "geodata")]
    region_area_m2: Option<f64>,
    /// Story height used to turn floor counts into heights
    #[arg(long, value_name = "M", requires = "geodata")]
    floor_height_m: Option<f64>,
}

#[derive(Args)]
struct SeArgs {
    #[command(flatten)]
    shared: Shared,
    /// Which estimator(s) to tabulate
    #[arg(long, value_enum, default_value_t = ModeArg::All)]
    mode: ModeArg,
    /// Comma-separated BS-to-user density ratios
    #[arg(long = "lambda-hats", value_name = "LIST", value_delimiter = ',')]
    lambda_hats: Option<Vec<f64>>,
    /// Comma-separated links: mmw_dl, mmw_ul, muw_dl, muw_ul
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    links: Option<Vec<String>>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    shared: Shared,
    /// Comma-separated BS-to-user density ratios
    #[arg(long = "lambda-hats", value_name = "LIST", value_delimiter = ',')]
    lambda_hats: Option<Vec<f64>>,
    /// Comma-separated links: mmw_dl, mmw_ul, muw_dl, muw_ul
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    links: Option<Vec<String>>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    shared: Shared,
    /// Comma-separated mmWave bandwidths in Hz
    #[arg(long = "wm-hz", value_name = "LIST", value_delimiter = ',')]
    wm_hz: Option<Vec<f64>>,
    /// Comma-separated uplink/downlink rate-ratio floors
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    zeta: Option<Vec<f64>>,
    /// PAPR cap form (overrides the configured variant)
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Exit with the infeasibility code if any point misses the ratio floor
    #[arg(long)]
    strict_feasibility: bool,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match cli.cmd {
        Cmd::Blockage(a) => cmd_blockage(a),
        Cmd::Se(a) => cmd_se(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Optimize(a) => cmd_optimize(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(match e {
            Error::InvalidInput(_) => 1,
            Error::Numerical(_) => 2,
            Error::Infeasible(_) => 3,
        });
    }
}

/// Resolved run inputs shared by every subcommand.
struct Loaded {
    config: NetworkConfig,
    /// Directory for data paths inside a config file.
    base_dir: Option<PathBuf>,
    preset: Option<Preset>,
    out_dir: PathBuf,
    units: Units,
}

fn load(shared: &Shared, allow_bare: bool) -> Result<Loaded> {
    let (config, base_dir, preset) = match (&shared.config, &shared.preset) {
        (Some(path), None) => {
            let (cfg, dir) = load_config(path)?;
            (cfg, dir, None)
        }
        (None, Some(name)) => {
            let p = presets::lookup(name)?;
            (p.config.clone(), None, Some(p))
        }
        (None, None) if allow_bare => (presets::lookup("fig2")?.config, None, None),
        (None, None) => {
            return Err(Error::invalid("give one of --config <path> or --preset <name>"))
        }
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    let mut loaded = Loaded {
        config,
        base_dir,
        preset,
        out_dir: shared.out.clone().unwrap_or_else(|| PathBuf::from(".")),
        units: shared.units.to_units(),
    };
    if let Some(seed) = shared.seed {
        loaded.config.seed = seed;
    }
    loaded.config.validate()?;
    Ok(loaded)
}

fn join_f64(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn join_links(links: &[Link]) -> String {
    links.iter().map(|l| l.as_str().to_string()).collect::<Vec<_>>().join(",")
}

/// Density-ratio list: flag wins, then preset, then the standard ladder.
fn resolve_lambda_hats(flag: Option<Vec<f64>>, loaded: &Loaded) -> Result<Vec<f64>> {
    let mut xs = match (flag, &loaded.preset) {
        (Some(v), _) => v,
        (None, Some(p)) => p.lambda_hats.clone(),
        (None, None) => vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0],
    };
    if xs.is_empty() {
        return Err(Error::invalid("empty density-ratio list"));
    }
    for &x in &xs {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::invalid(format!("density ratios must be positive, got {x}")));
        }
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();
    Ok(xs)
}

/// Link list in canonical order: flag wins, then preset, then all four.
fn resolve_links(flag: Option<Vec<String>>, loaded: &Loaded) -> Result<Vec<Link>> {
    let chosen: Vec<Link> = match (flag, &loaded.preset) {
        (Some(names), _) => {
            names.iter().map(|s| s.trim().parse()).collect::<Result<Vec<Link>>>()?
        }
        (None, Some(p)) => p.links.clone(),
        (None, None) => Link::ALL.to_vec(),
    };
    let ordered: Vec<Link> =
        Link::ALL.iter().copied().filter(|l| chosen.contains(l)).collect();
    if ordered.is_empty() {
        return Err(Error::invalid("empty link list"));
    }
    Ok(ordered)
}

/// Writes `bytes` to `out_dir/name`, registers it in the manifest, and
/// drops the manifest JSON beside it.
fn emit(loaded: &Loaded, man: &mut RunManifest, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    std::fs::create_dir_all(&loaded.out_dir).map_err(|e| {
        Error::invalid(format!("cannot create {}: {e}", loaded.out_dir.display()))
    })?;
    let path = loaded.out_dir.join(name);
    std::fs::write(&path, bytes)
        .map_err(|e| Error::invalid(format!("cannot write {}: {e}", path.display())))?;
    man.add_output(&path, bytes);
    let man_path = man.write_beside(&path)?;
    println!("wrote {}", path.display());
    println!("wrote {}", man_path.display());
    Ok(path)
}

/// Analytic bracket and asymptote for one link at one density ratio, with
/// both BS tiers scaled to lambda_hat * lambda_u as in the sweep.
fn bracket_for(
    cfg: &NetworkConfig,
    lh: f64,
    link: Link,
    r_l: f64,
) -> Result<(f64, f64, Option<f64>)> {
    if link.is_mmw() {
        let lambda_m = lh * cfg.densities.lambda_u;
        let b = analytic::se_bounds_mmw(lh, lambda_m, cfg.alpha_m, cfg.theta_rad, r_l)?;
        let a = if lh >= 1.0 {
            Some(analytic::se_asymptotic_mmw(lh, lambda_m, cfg.alpha_m, r_l)?)
        } else {
            None
        };
        Ok((b.lower, b.upper, a))
    } else {
        let b = analytic::se_bounds_muw(lh, cfg.alpha_mu)?;
        let a = if lh >= 1.0 {
            Some(analytic::se_asymptotic_muw(lh, cfg.alpha_mu)?)
        } else {
            None
        };
        Ok((b.lower, b.upper, a))
    }
}

fn cmd_se(a: SeArgs) -> Result<()> {
    let loaded = load(&a.shared, false)?;
    let cfg = &loaded.config;
    let r_l = cfg.resolve_r_l(loaded.base_dir.as_deref())?;
    let lambda_hats = resolve_lambda_hats(a.lambda_hats, &loaded)?;
    let links = resolve_links(a.links, &loaded)?;
    let modes: &[&'static str] = match a.mode {
        ModeArg::Analytic => &["analytic"],
        ModeArg::Exact => &["exact"],
        ModeArg::Montecarlo => &["montecarlo"],
        ModeArg::All => &["analytic", "exact", "montecarlo"],
    };

    let mut mc: BTreeMap<(usize, Link), SeEstimate> = BTreeMap::new();
    if modes.contains(&"montecarlo") {
        let plan = cfg.plan(&links, r_l)?;
        for p in convergence_sweep(&plan, &lambda_hats)? {
            let k = lambda_hats.iter().position(|&x| x == p.lambda_hat).unwrap();
            mc.insert((k, p.link), p.est);
        }
    }

    let mut rows = Vec::new();
    for (k, &lh) in lambda_hats.iter().enumerate() {
        for &link in &links {
            let (lower, upper, asym) = bracket_for(cfg, lh, link, r_l)?;
            for &mode in modes {
                let mut row = SeRow {
                    lambda_hat: lh,
                    link,
                    mode,
                    mean: None,
                    stderr: None,
                    lower: Some(lower),
                    upper: Some(upper),
                    asymptote: asym,
                    n: None,
                    n_zero: None,
                    n_capped: None,
                };
                match mode {
                    "exact" if !link.is_mmw() => {
                        row.mean = Some(analytic::se_exact_muw(lh, cfg.alpha_mu)?);
                    }
                    "montecarlo" => {
                        let e = mc.get(&(k, link)).expect("sweep covers every pair");
                        row.mean = Some(e.mean_nats);
                        row.stderr = Some(e.stderr);
                        row.n = Some(e.n);
                        row.n_zero = Some(e.n_zero);
                        row.n_capped = Some(e.n_capped);
                    }
                    _ => {}
                }
                rows.push(row);
            }
        }
    }

    let mut params = BTreeMap::new();
    params.insert("mode".into(), modes.join(","));
    params.insert("lambda_hats".into(), join_f64(&lambda_hats));
    params.insert("links".into(), join_links(&links));
    params.insert("units".into(), loaded.units.as_str().into());
    let mut man = RunManifest::new("se", cfg.seed, cfg, params)?;
    let bytes = output::render_se_table(&rows, &man.digest, cfg.seed, loaded.units)?;
    emit(&loaded, &mut man, "se.csv", &bytes)?;
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let loaded = load(&a.shared, false)?;
    let cfg = &loaded.config;
    let r_l = cfg.resolve_r_l(loaded.base_dir.as_deref())?;
    let lambda_hats = resolve_lambda_hats(a.lambda_hats, &loaded)?;
    let links = resolve_links(a.links, &loaded)?;

    let plan = cfg.plan(&links, r_l)?;
    let points = convergence_sweep(&plan, &lambda_hats)?;

    let mut params = BTreeMap::new();
    params.insert("lambda_hats".into(), join_f64(&lambda_hats));
    params.insert("links".into(), join_links(&links));
    params.insert("units".into(), loaded.units.as_str().into());
    let mut man = RunManifest::new("sweep", cfg.seed, cfg, params)?;
    let bytes =
        output::render_sweep_table(&points, &man.digest, cfg.seed, loaded.units)?;
    emit(&loaded, &mut man, "sweep.csv", &bytes)?;
    Ok(())
}

fn cmd_optimize(a: OptimizeArgs) -> Result<()> {
    let mut loaded = load(&a.shared, false)?;
    if let Some(v) = a.variant {
        loaded.config.papr_variant = v.to_variant();
    }
    let cfg = &loaded.config;
    let r_l = cfg.resolve_r_l(loaded.base_dir.as_deref())?;

    let wm_list = match (&a.wm_hz, &loaded.preset) {
        (Some(v), _) => v.clone(),
        (None, Some(p)) => p.wm_list_hz.clone(),
        (None, None) => vec![cfg.spectrum.w_m_hz],
    };
    let zeta_list = match (&a.zeta, &loaded.preset) {
        (Some(v), _) => v.clone(),
        (None, Some(p)) => p.zeta_list.clone(),
        (None, None) => vec![cfg.spectrum.zeta],
    };
    if wm_list.is_empty() || zeta_list.is_empty() {
        return Err(Error::invalid("empty sweep list"));
    }

    let (gamma_mu, gamma_m) =
        asymptotic_gammas(&cfg.densities, cfg.alpha_mu, cfg.alpha_m, r_l)?;

    let mut rows = Vec::new();
    for &wm in &wm_list {
        for &zeta in &zeta_list {
            let mut spec = cfg.spectrum;
            spec.w_m_hz = wm;
            spec.zeta = zeta;
            let r = optimize_closed_form(&spec, gamma_mu, gamma_m, cfg.papr_variant)?;
            rows.push((wm, zeta, r));
        }
    }

    let mut params = BTreeMap::new();
    params.insert("wm_hz".into(), join_f64(&wm_list));
    params.insert("zeta".into(), join_f64(&zeta_list));
    params.insert("variant".into(), cfg.papr_variant.as_str().into());
    params.insert("units".into(), loaded.units.as_str().into());
    params.insert("se_source".into(), "asymptotic".into());
    let mut man = RunManifest::new("optimize", cfg.seed, cfg, params)?;
    let bytes =
        output::render_allocation_table(&rows, &man.digest, cfg.seed, loaded.units)?;
    emit(&loaded, &mut man, "allocation.csv", &bytes)?;

    if a.strict_feasibility {
        if let Some((wm, zeta, _)) = rows.iter().find(|(_, _, r)| !r.feasible) {
            return Err(Error::infeasible(format!(
                "rate-ratio floor unreachable at w_m_hz = {wm}, zeta = {zeta}: \
                 even the full sub-6GHz band uplink misses zeta * rate_dl"
            )));
        }
    }
    Ok(())
}

fn cmd_blockage(a: BlockageArgs) -> Result<()> {
    let bare_geodata = a.geodata.is_some();
    let mut loaded = load(&a.shared, bare_geodata)?;
    if let Some(path) = &a.geodata {
        loaded.config.blockage = BlockageSource::GeoData {
            path: path.to_string_lossy().into_owned(),
            // Both flags are present whenever --geodata is (clap `requires`).
            region_area_m2: a.region_area_m2.unwrap(),
            floor_height_m: a.floor_height_m.unwrap(),
        };
        // Flag-given paths resolve against the working directory.
        loaded.base_dir = None;
    }
    let cfg = &loaded.config;

    let stats = cfg.building_stats(loaded.base_dir.as_deref())?;
    let (beta, eta, r_l) = match &stats {
        Some(st) => (
            Some(blockage::beta_param(st)?),
            Some(blockage::eta_param(st)?),
            blockage::avg_los_distance(st)?,
        ),
        None => (None, None, cfg.resolve_r_l(loaded.base_dir.as_deref())?),
    };

    let mut params = BTreeMap::new();
    params.insert("source".into(), match &cfg.blockage {
        BlockageSource::ExplicitRl { .. } => "explicit_r_l".to_string(),
        BlockageSource::Stats(_) => "stats".to_string(),
        BlockageSource::GeoData { path, .. } => format!("geodata:{path}"),
    });
    let man = RunManifest::new("blockage", cfg.seed, cfg, params)?;
    let report = output::render_blockage_report(stats.as_ref(), beta, eta, r_l, &man.digest);
    print!("{report}");

    if a.shared.out.is_some() {
        let mut man = man;
        emit(&loaded, &mut man, "blockage.txt", report.as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_link_order_and_dedup() {
        let loaded = Loaded {
            config: presets::lookup("fig2").unwrap().config,
            base_dir: None,
            preset: None,
            out_dir: PathBuf::from("."),
            units: Units::Nats,
        };
        let links = resolve_links(
            Some(vec!["muw_ul".into(), "mmw_dl".into(), "muw_ul".into()]),
            &loaded,
        )
        .unwrap();
        assert_eq!(links, vec![Link::MmwDl, Link::MuwUl]);
        assert!(resolve_links(Some(vec!["sub6".into()]), &loaded).is_err());

        let lhs = resolve_lambda_hats(Some(vec![5.0, 1.0, 5.0]), &loaded).unwrap();
        assert_eq!(lhs, vec![1.0, 5.0]);
        assert!(resolve_lambda_hats(Some(vec![-1.0]), &loaded).is_err());
    }
}
