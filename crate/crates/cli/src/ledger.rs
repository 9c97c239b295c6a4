//! Append-only run ledger: one delimited-text row per evaluation result.
//! The timestamp column exists only here, so every other artifact stays
//! byte-identical across reruns.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

use magnav::textio::{fmt_f64, parse_f64};

pub const LEDGER_FILE: &str = "ledger.csv";
const HEADER: &str = "timestamp,flight_id,model,split,metric,value,config_hash";

#[derive(Debug, Clone)]
pub struct LedgerRow {
    pub timestamp: u64,
    pub flight_id: String,
    pub model: String,
    pub split: String,
    pub metric: String,
    pub value: f64,
    pub config_hash: String,
}

pub fn append(out_dir: &Path, rows: &[LedgerRow]) -> Result<()> {
    let path = out_dir.join(LEDGER_FILE);
    let new_file = !path.exists();
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .with_context(|| format!("opening {}", path.display()))?;
    if new_file {
        writeln!(file, "{HEADER}")?;
    }
    for row in rows {
        writeln!(
            file,
            "{},{},{},{},{},{},{}",
            row.timestamp,
            row.flight_id,
            row.model,
            row.split,
            row.metric,
            fmt_f64(row.value),
            row.config_hash
        )?;
    }
    Ok(())
}

pub fn read(out_dir: &Path) -> Result<Vec<LedgerRow>> {
    let path = out_dir.join(LEDGER_FILE);
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != HEADER {
                anyhow::bail!("{}: unexpected header `{line}`", path.display());
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            anyhow::bail!("{}: bad ledger row `{line}`", path.display());
        }
        rows.push(LedgerRow {
            timestamp: fields[0].parse().context("timestamp")?,
            flight_id: fields[1].to_string(),
            model: fields[2].to_string(),
            split: fields[3].to_string(),
            metric: fields[4].to_string(),
            value: parse_f64(fields[5]).context("value")?,
            config_hash: fields[6].to_string(),
        });
    }
    Ok(rows)
}

pub fn now_epoch_seconds() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
