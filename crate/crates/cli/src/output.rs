//! CSV and report rendering. Data files carry a comment header with the
//! run digest so every table is traceable to its manifest, and contain no
//! timestamps so identical runs produce identical bytes.

use udnsim::allocator::AllocationResult;
use udnsim::channel::Link;
use udnsim::montecarlo::SweepPoint;
use udnsim::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Nats,
    Bits,
}

impl Units {
    pub fn as_str(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }

    /// Multiplier taking a value in nats to the requested unit.
    pub fn factor(self) -> f64 {
        match self {
            Units::Nats => 1.0,
            Units::Bits => std::f64::consts::LOG2_E,
        }
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_count(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn header_block(digest: &str, seed: u64, units: Units) -> String {
    format!(
        "# udnsim {}\n# digest: {digest}\n# seed: {seed}\n# units: {}\n",
        env!("CARGO_PKG_VERSION"),
        units.as_str()
    )
}

fn write_csv(comment: String, header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut buf = comment.into_bytes();
    let mut w = csv::Writer::from_writer(&mut buf);
    w.write_record(header).map_err(|e| Error::invalid(format!("csv write failed: {e}")))?;
    for row in rows {
        w.write_record(&row).map_err(|e| Error::invalid(format!("csv write failed: {e}")))?;
    }
    w.flush().map_err(|e| Error::invalid(format!("csv flush failed: {e}")))?;
    drop(w);
    Ok(buf)
}

/// One row of the mode-aware SE table; absent cells stay empty so each mode
/// fills only the columns it actually computes.
pub struct SeRow {
    pub lambda_hat: f64,
    pub link: Link,
    pub mode: &'static str,
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub asymptote: Option<f64>,
    pub n: Option<u64>,
    pub n_zero: Option<u64>,
    pub n_capped: Option<u64>,
}

pub fn render_se_table(rows: &[SeRow], digest: &str, seed: u64, units: Units) -> Result<Vec<u8>> {
    let mean_col = match units {
        Units::Nats => "mean_nats",
        Units::Bits => "mean_bits",
    };
    let header = [
        "lambda_hat",
        "link",
        "mode",
        mean_col,
        "stderr",
        "lower_bound",
        "upper_bound",
        "asymptote",
        "n",
        "n_zero",
        "n_capped",
    ];
    let f = units.factor();
    let data = rows
        .iter()
        .map(|r| {
            vec![
                r.lambda_hat.to_string(),
                r.link.as_str().to_string(),
                r.mode.to_string(),
                fmt_opt(r.mean.map(|v| v * f)),
                fmt_opt(r.stderr.map(|v| v * f)),
                fmt_opt(r.lower.map(|v| v * f)),
                fmt_opt(r.upper.map(|v| v * f)),
                fmt_opt(r.asymptote.map(|v| v * f)),
                fmt_count(r.n),
                fmt_count(r.n_zero),
                fmt_count(r.n_capped),
            ]
        })
        .collect();
    write_csv(header_block(digest, seed, units), &header, data)
}

pub fn render_sweep_table(
    points: &[SweepPoint],
    digest: &str,
    seed: u64,
    units: Units,
) -> Result<Vec<u8>> {
    let mean_col = match units {
        Units::Nats => "mean_nats",
        Units::Bits => "mean_bits",
    };
    let header = [
        "lambda_hat",
        "link",
        mean_col,
        "stderr",
        "lower_bound",
        "upper_bound",
        "asymptote",
        "n",
        "n_zero",
        "n_capped",
    ];
    let f = units.factor();
    let data = points
        .iter()
        .map(|p| {
            vec![
                p.lambda_hat.to_string(),
                p.link.as_str().to_string(),
                (p.est.mean_nats * f).to_string(),
                (p.est.stderr * f).to_string(),
                (p.lower_bound * f).to_string(),
                (p.upper_bound * f).to_string(),
                (p.asymptote * f).to_string(),
                p.est.n.to_string(),
                p.est.n_zero.to_string(),
                p.est.n_capped.to_string(),
            ]
        })
        .collect();
    write_csv(header_block(digest, seed, units), &header, data)
}

pub fn render_allocation_table(
    rows: &[(f64, f64, AllocationResult)],
    digest: &str,
    seed: u64,
    units: Units,
) -> Result<Vec<u8>> {
    let (dl_col, ul_col) = match units {
        Units::Nats => ("rate_dl_nats_per_s", "rate_ul_nats_per_s"),
        Units::Bits => ("rate_dl_bits_per_s", "rate_ul_bits_per_s"),
    };
    let header = [
        "w_m_hz",
        "zeta",
        "w_mu_ul_hz",
        "w_m_ul_hz",
        dl_col,
        ul_col,
        "clamped",
        "feasible",
    ];
    let f = units.factor();
    let data = rows
        .iter()
        .map(|(wm, zeta, r)| {
            vec![
                wm.to_string(),
                zeta.to_string(),
                r.w_mu_ul_hz.to_string(),
                r.w_m_ul_hz.to_string(),
                (r.rate_dl * f).to_string(),
                (r.rate_ul * f).to_string(),
                r.clamped.to_string(),
                r.feasible.to_string(),
            ]
        })
        .collect();
    write_csv(header_block(digest, seed, units), &header, data)
}

/// Plain-text blockage report: input statistics (when available) followed by
/// the derived quantities.
pub fn render_blockage_report(
    stats: Option<&udnsim::blockage::BuildingStats>,
    beta: Option<f64>,
    eta: Option<f64>,
    r_l: f64,
    digest: &str,
) -> String {
    let mut s = format!("# udnsim {}\n# digest: {digest}\n", env!("CARGO_PKG_VERSION"));
    if let Some(st) = stats {
        s.push_str(&udnsim::blockage::stats_to_kv(st));
    }
    if let Some(b) = beta {
        s.push_str(&format!("beta_per_m = {b}\n"));
    }
    if let Some(e) = eta {
        s.push_str(&format!("eta = {e}\n"));
    }
    s.push_str(&format!("r_l_m = {r_l}\n"));
    s
}
