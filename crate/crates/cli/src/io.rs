//! File formats and atomic writes.

use anyhow::{bail, Context, Result};
use levymap::simulate::{Provenance, SampleBatch, SimConfig};
use num_complex::Complex64;
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write through a temporary file in the target directory, then rename over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("JSON values serialize");
    s.push(b'\n');
    s
}

/// Samples as CSV: two comment lines carrying the provenance and its hash, a header
/// `x0,x1,...`, then one row per sample with round-trip exact floats.
pub fn samples_csv(batch: &SampleBatch) -> Result<Vec<u8>> {
    let prov = serde_json::to_string(&batch.provenance)?;
    let mut out = Vec::new();
    writeln!(out, "# provenance-sha256: {}", sha256_hex(prov.as_bytes()))?;
    writeln!(out, "# provenance: {prov}")?;
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record((0..batch.dim()).map(|j| format!("x{j}")))?;
    for x in batch.samples() {
        w.write_record(x.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    drop(w);
    Ok(out)
}

pub fn read_samples_csv(text: &str) -> Result<SampleBatch> {
    let mut provenance = None;
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some(p) = line.strip_prefix("# provenance: ") {
            provenance = Some(serde_json::from_str::<Provenance>(p).context("parsing provenance line")?);
        }
    }
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let dim = r.headers()?.len();
    if dim == 0 {
        bail!("sample CSV has no columns");
    }
    let mut data = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != dim {
            bail!("row {} has {} columns, expected {dim}", i + 1, rec.len());
        }
        for f in rec.iter() {
            data.push(f.trim().parse::<f64>().with_context(|| format!("row {}: bad number {f:?}", i + 1))?);
        }
    }
    let provenance =
        provenance.unwrap_or_else(|| Provenance { config: SimConfig::default(), source: Value::String("external".into()) });
    Ok(SampleBatch::new(dim, data, provenance)?)
}

/// Exponent table: probe coordinates, then real and imaginary parts.
pub fn exponent_csv(probes: &[Vec<f64>], values: &[Complex64]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut w = csv::Writer::from_writer(&mut out);
    let dim = probes.first().map_or(1, Vec::len);
    let mut header: Vec<String> = if dim == 1 { vec!["y".into()] } else { (0..dim).map(|j| format!("y{j}")).collect() };
    header.extend(["re".to_string(), "im".to_string()]);
    w.write_record(&header)?;
    for (y, v) in probes.iter().zip(values) {
        let mut row: Vec<String> = y.iter().map(|c| c.to_string()).collect();
        row.push(v.re.to_string());
        row.push(v.im.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    drop(w);
    Ok(out)
}

/// JSON has no infinities; they are written as the string `"inf"`.
pub fn real_value(v: f64) -> Value {
    if v.is_infinite() {
        Value::String(if v > 0.0 { "inf" } else { "-inf" }.into())
    } else {
        serde_json::json!(v)
    }
}
