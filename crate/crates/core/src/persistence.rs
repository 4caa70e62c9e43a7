//! Reproducibility layer: run manifests, canonical serialization, digests.
//!
//! Every run directory holds a `manifest.json` (canonical JSON: sorted keys,
//! no insignificant whitespace) recording the full config snapshot, the
//! seed, the artifact version and a SHA-256 digest for every data file.
//! Floats in CSV files are written with 17 significant digits so parsing
//! them back reproduces the exact `f64`, and digests are stable across
//! platforms. All files are written atomically (temp file + rename); one
//! writer per output directory, readers unrestricted.

use crate::error::{Error, Result};
use crate::experiments::SweepPoint;
use crate::market::Trajectory;
use crate::stats::SeriesReport;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Version of the manifest schema this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

/// 17 significant digits: enough to round-trip any finite `f64` exactly.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Compact JSON with keys sorted at every level.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    // serde_json::Value maps are BTreeMaps, so converting first sorts keys.
    let value = serde_json::to_value(value)
        .map_err(|e| Error::domain(format!("serialization failed: {e}")))?;
    Ok(value.to_string())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

/// Everything needed to reproduce and verify a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub artifact_version: String,
    pub command: String,
    /// Full config snapshot; round-trips losslessly through serde.
    pub config: serde_json::Value,
    pub seed: u64,
    /// Set when a CLI seed override replaced the config seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_override: Option<u64>,
    /// Value of the output-root environment variable, when it was honored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_root_env: Option<String>,
    pub timestamp_unix: u64,
    /// Free-form annotations (output format, job bound, normalization mode).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, String>,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config: serde_json::Value, seed: u64) -> Self {
        let timestamp_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            schema_version: SCHEMA_VERSION,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.into(),
            config,
            seed,
            seed_override: None,
            out_root_env: None,
            timestamp_unix,
            notes: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }
}

/// On-disk encoding for tabular payloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    Csv,
    Json,
}

/// The payload written next to a manifest.
#[derive(Debug, Clone)]
pub enum RunData<'a> {
    Trajectory {
        trajectory: &'a Trajectory,
        format: DataFormat,
    },
    Sweep {
        points: &'a [SweepPoint],
        format: DataFormat,
    },
    Report(&'a SeriesReport),
    /// Arbitrary JSON document under the given file stem.
    Json {
        name: String,
        value: serde_json::Value,
    },
}

/// CSV with header `t,price,log_return,magnetization,lambda,field`, one row
/// per step, floats with 17 significant digits.
pub fn trajectory_to_csv(t: &Trajectory) -> String {
    let mut out = String::with_capacity(t.len() * 96 + 64);
    out.push_str("t,price,log_return,magnetization,lambda,field\n");
    for i in 0..t.len() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            i + 1,
            format_float(t.price[i]),
            format_float(t.log_return[i]),
            format_float(t.magnetization[i]),
            format_float(t.lambda[i]),
            format_float(t.field[i]),
        ));
    }
    out
}

/// Parse a trajectory CSV back. The initial price is not part of the CSV
/// schema; it comes from the manifest's config snapshot.
pub fn trajectory_from_csv(text: &str, initial_price: f64) -> Result<Trajectory> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::domain("empty trajectory CSV".to_string()))?;
    if header != "t,price,log_return,magnetization,lambda,field" {
        return Err(Error::domain(format!(
            "unexpected trajectory CSV header {header:?}"
        )));
    }
    let mut t = Trajectory {
        initial_price,
        price: Vec::new(),
        log_return: Vec::new(),
        magnetization: Vec::new(),
        lambda: Vec::new(),
        field: Vec::new(),
    };
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::domain(format!(
                "trajectory CSV line {}: expected 6 fields, got {}",
                lineno + 2,
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::domain(format!("trajectory CSV line {}: {e}", lineno + 2)))
        };
        t.price.push(parse(fields[1])?);
        t.log_return.push(parse(fields[2])?);
        t.magnetization.push(parse(fields[3])?);
        t.lambda.push(parse(fields[4])?);
        t.field.push(parse(fields[5])?);
    }
    Ok(t)
}

/// CSV with header `lambda,mean_abs_m,susceptibility,n_samples`.
pub fn sweep_to_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("lambda,mean_abs_m,susceptibility,n_samples\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_float(p.lambda),
            format_float(p.mean_abs_m),
            format_float(p.susceptibility),
            p.n_samples,
        ));
    }
    out
}

pub fn sweep_from_csv(text: &str) -> Result<Vec<SweepPoint>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::domain("empty sweep CSV".to_string()))?;
    if header != "lambda,mean_abs_m,susceptibility,n_samples" {
        return Err(Error::domain(format!(
            "unexpected sweep CSV header {header:?}"
        )));
    }
    lines
        .enumerate()
        .map(|(lineno, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::domain(format!(
                    "sweep CSV line {}: expected 4 fields",
                    lineno + 2
                )));
            }
            let bad = |e: &dyn std::fmt::Display| {
                Error::domain(format!("sweep CSV line {}: {e}", lineno + 2))
            };
            Ok(SweepPoint {
                lambda: fields[0].parse().map_err(|e| bad(&e))?,
                mean_abs_m: fields[1].parse().map_err(|e| bad(&e))?,
                susceptibility: fields[2].parse().map_err(|e| bad(&e))?,
                n_samples: fields[3].parse().map_err(|e| bad(&e))?,
            })
        })
        .collect()
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .ok_or_else(|| Error::domain("path has no parent".to_string()))?;
    let file_name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::domain("invalid file name".to_string()))?;
    let tmp = dir.join(format!(".{file_name}.tmp"));
    let result = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

fn render(data: &RunData) -> Result<(String, Vec<u8>)> {
    Ok(match data {
        RunData::Trajectory {
            trajectory,
            format: DataFormat::Csv,
        } => (
            "trajectory.csv".to_string(),
            trajectory_to_csv(trajectory).into_bytes(),
        ),
        RunData::Trajectory {
            trajectory,
            format: DataFormat::Json,
        } => (
            "trajectory.json".to_string(),
            to_canonical_json(trajectory)?.into_bytes(),
        ),
        RunData::Sweep {
            points,
            format: DataFormat::Csv,
        } => ("sweep.csv".to_string(), sweep_to_csv(points).into_bytes()),
        RunData::Sweep {
            points,
            format: DataFormat::Json,
        } => (
            "sweep.json".to_string(),
            to_canonical_json(points)?.into_bytes(),
        ),
        RunData::Report(report) => (
            "report.json".to_string(),
            to_canonical_json(report)?.into_bytes(),
        ),
        RunData::Json { name, value } => (format!("{name}.json"), value.to_string().into_bytes()),
    })
}

/// Write the data file and the manifest into `output_dir`, atomically, with
/// the data digest recorded in the manifest. Returns the written paths
/// (data first, `manifest.json` last).
pub fn write_run(
    manifest: &mut RunManifest,
    data: &RunData,
    output_dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(output_dir).map_err(|e| Error::io(output_dir, e))?;
    let (file, bytes) = render(data)?;
    let data_path = output_dir.join(&file);
    atomic_write(&data_path, &bytes)?;
    manifest.outputs = vec![OutputFile {
        file,
        sha256: sha256_hex(&bytes),
    }];
    let manifest_path = output_dir.join("manifest.json");
    atomic_write(&manifest_path, to_canonical_json(manifest)?.as_bytes())?;
    Ok(vec![data_path, manifest_path])
}

/// A data file read back and verified against its recorded digest.
#[derive(Debug, Clone)]
pub struct VerifiedFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl VerifiedFile {
    pub fn text(&self) -> Result<&str> {
        std::str::from_utf8(&self.bytes)
            .map_err(|e| Error::Integrity(format!("{}: not valid UTF-8: {e}", self.name)))
    }
}

/// Read a run directory back: parse the manifest, check the schema version,
/// verify every listed file against its digest.
pub fn read_run(output_dir: &Path) -> Result<(RunManifest, Vec<VerifiedFile>)> {
    let manifest_path = output_dir.join("manifest.json");
    let raw = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let value: serde_json::Value = serde_json::from_str(&raw)
        .map_err(|e| Error::Integrity(format!("manifest.json is not valid JSON: {e}")))?;
    let found = value
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Integrity("manifest.json has no schema_version".to_string()))?
        as u32;
    if found != SCHEMA_VERSION {
        return Err(Error::Version {
            found,
            supported: SCHEMA_VERSION,
        });
    }
    let manifest: RunManifest = serde_json::from_value(value)
        .map_err(|e| Error::Integrity(format!("manifest.json does not match schema: {e}")))?;
    let mut files = Vec::with_capacity(manifest.outputs.len());
    for output in &manifest.outputs {
        let path = output_dir.join(&output.file);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let digest = sha256_hex(&bytes);
        if digest != output.sha256 {
            return Err(Error::Integrity(format!(
                "{}: digest {digest} does not match recorded {}",
                output.file, output.sha256
            )));
        }
        files.push(VerifiedFile {
            name: output.file.clone(),
            bytes,
        });
    }
    Ok((manifest, files))
}
