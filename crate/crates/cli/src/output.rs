use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use gravlam_core::correlation::MC_SHARDS;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;
use crate::error::CliError;

/// Everything needed to regenerate an artifact with the same binary.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub version: &'static str,
    pub command: &'static str,
    pub workers: usize,
    pub mc_shards: u64,
    /// Resolved flags; valid as a `--config` file for the same command.
    pub config: Value,
}

impl Metadata {
    pub fn new<C: Serialize>(command: &'static str, workers: usize, config: &C) -> Result<Self, CliError> {
        Ok(Metadata {
            version: gravlam_core::VERSION,
            command,
            workers,
            mc_shards: MC_SHARDS,
            config: serde_json::to_value(config)?,
        })
    }

    fn write_csv_preamble(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "# gravlam {}", self.version)?;
        writeln!(out, "# command: {}", self.command)?;
        writeln!(out, "# workers: {}", self.workers)?;
        writeln!(out, "# mc_shards: {}", self.mc_shards)?;
        writeln!(out, "# config: {}", self.config)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))
}

/// Writes `payload` as CSV (metadata as `#` comment lines, then the table)
/// or as a JSON object with a leading `metadata` key.
pub fn write_artifact<F>(
    path: &Path,
    format: Format,
    meta: &Metadata,
    csv_table: F,
    payload: Map<String, Value>,
) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
{
    let mut out = create(path)?;
    match format {
        Format::Csv => {
            meta.write_csv_preamble(&mut out)?;
            csv_table(&mut out)?;
        }
        Format::Json => {
            let mut doc = Map::new();
            doc.insert("metadata".into(), serde_json::to_value(meta)?);
            doc.extend(payload);
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)?;
        }
    }
    out.flush().map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Writes raw text to `path`.
pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut out = create(path)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}
