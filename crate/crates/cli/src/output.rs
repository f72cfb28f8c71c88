//! Result emission: CSV or JSON records plus a run manifest.

use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Everything needed to rerun a command and get the same records.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub argv: Vec<String>,
    pub common: serde_json::Value,
    pub parameters: serde_json::Value,
    pub duration_secs: f64,
}

impl RunManifest {
    pub fn new(
        subcommand: &'static str,
        argv: Vec<String>,
        parameters: serde_json::Value,
        common: serde_json::Value,
    ) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            argv,
            common,
            parameters,
            duration_secs: 0.0,
        }
    }
}

enum Payload {
    Empty,
    Bytes(Vec<u8>),
    Json(serde_json::Value),
}

pub struct Emitter {
    format: Format,
    out: Option<PathBuf>,
    manifest: RunManifest,
    payload: Payload,
}

impl Emitter {
    pub fn new(format: Format, out: Option<PathBuf>, manifest: RunManifest) -> Self {
        Emitter {
            format,
            out,
            manifest,
            payload: Payload::Empty,
        }
    }

    pub fn records<T: Serialize>(&mut self, rows: &[T]) -> Result<()> {
        self.payload = match self.format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for r in rows {
                    w.serialize(r)?;
                }
                Payload::Bytes(w.into_inner().context("flushing CSV")?)
            }
            Format::Json => Payload::Json(serde_json::to_value(rows)?),
        };
        Ok(())
    }

    /// Output that is already encoded, such as a generated data file.
    pub fn raw(&mut self, bytes: &[u8]) -> Result<()> {
        self.payload = Payload::Bytes(bytes.to_vec());
        Ok(())
    }

    pub fn finish(mut self, elapsed: Duration) -> Result<()> {
        self.manifest.duration_secs = elapsed.as_secs_f64();
        let manifest_json = serde_json::to_string_pretty(&self.manifest)?;
        let (body, embedded) = match std::mem::replace(&mut self.payload, Payload::Empty) {
            Payload::Empty => (Vec::new(), false),
            Payload::Bytes(b) => (b, false),
            Payload::Json(records) => {
                let doc = serde_json::json!({ "manifest": self.manifest, "records": records });
                let mut b = serde_json::to_vec_pretty(&doc)?;
                b.push(b'\n');
                (b, true)
            }
        };
        match &self.out {
            Some(path) => {
                std::fs::write(path, &body).with_context(|| format!("writing {}", path.display()))?;
                let mut mpath = path.clone().into_os_string();
                mpath.push(".manifest.json");
                std::fs::write(&mpath, manifest_json + "\n")
                    .with_context(|| format!("writing {}", PathBuf::from(&mpath).display()))?;
            }
            None => {
                std::io::stdout().write_all(&body)?;
                if !embedded {
                    eprintln!("{manifest_json}");
                }
            }
        }
        Ok(())
    }
}
