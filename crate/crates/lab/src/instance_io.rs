//! Plain-text instance files.
//!
//! ```text
//! # cgqmc instance
//! format = 1
//! instance_id = fully_connected-n3-s5
//! n = 3
//! model_class = fully_connected
//! seed = 5
//! distribution = standard_normal
//! fields
//! 0 1.0e0
//! ...
//! couplings
//! 1 0 -2.5e-1
//! ...
//! ```
//!
//! Values are written in scientific notation with 17 fractional digits, so a round trip is exact.
//! Coupling lines are `j k value` with `j > k`; absent pairs are zero.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cgqmc_core::{IsingInstance, ModelClass};

use crate::error::{LabError, LabResult};

pub const FORMAT_VERSION: u32 = 1;

pub fn format_instance(instance: &IsingInstance) -> String {
    let class = instance.model_class();
    let distribution = if class == ModelClass::Custom {
        "unspecified"
    } else {
        "standard_normal"
    };
    let mut out = String::new();
    out.push_str("# cgqmc instance\n");
    let _ = writeln!(out, "format = {FORMAT_VERSION}");
    let _ = writeln!(out, "instance_id = {}", instance.instance_id());
    let _ = writeln!(out, "n = {}", instance.n());
    let _ = writeln!(out, "model_class = {class}");
    let _ = writeln!(out, "seed = {}", instance.seed());
    let _ = writeln!(out, "distribution = {distribution}");
    out.push_str("fields\n");
    for (i, h) in instance.fields().iter().enumerate() {
        let _ = writeln!(out, "{i} {h:.17e}");
    }
    out.push_str("couplings\n");
    for (j, k, v) in instance.coupling_triples() {
        if v != 0.0 {
            let _ = writeln!(out, "{j} {k} {v:.17e}");
        }
    }
    out
}

#[derive(PartialEq)]
enum Section {
    Header,
    Fields,
    Couplings,
}

/// Parses an instance; `origin` only labels error messages.
pub fn parse_instance(text: &str, origin: &Path) -> LabResult<IsingInstance> {
    let fail = |line: usize, message: String| LabError::InstanceFormat {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut section = Section::Header;
    let mut id = None;
    let mut n = None;
    let mut class = ModelClass::Custom;
    let mut seed = 0u64;
    let mut fields: Vec<Option<f64>> = Vec::new();
    let mut triples = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line {
            "fields" | "couplings" => {
                let Some(n) = n else {
                    return Err(fail(lineno, "n must be given before the data sections".into()));
                };
                fields.resize(n, None);
                section = if line == "fields" {
                    Section::Fields
                } else {
                    Section::Couplings
                };
                continue;
            }
            _ => {}
        }
        match section {
            Section::Header => {
                let Some((key, value)) = line.split_once('=') else {
                    return Err(fail(lineno, format!("expected `key = value`, got `{line}`")));
                };
                let (key, value) = (key.trim(), value.trim());
                match key {
                    "format" => {
                        if value != FORMAT_VERSION.to_string() {
                            return Err(fail(lineno, format!("unsupported format {value}")));
                        }
                    }
                    "instance_id" => id = Some(value.to_string()),
                    "n" => n = Some(value.parse().map_err(|_| fail(lineno, format!("bad n `{value}`")))?),
                    "model_class" => class = value.parse().map_err(|e: cgqmc_core::Error| fail(lineno, e.to_string()))?,
                    "seed" => seed = value.parse().map_err(|_| fail(lineno, format!("bad seed `{value}`")))?,
                    "distribution" => {}
                    other => return Err(fail(lineno, format!("unknown key `{other}`"))),
                }
            }
            Section::Fields => {
                let parts: Vec<&str> = line.split_whitespace().collect();
                let [i, v] = parts[..] else {
                    return Err(fail(lineno, "expected `i value`".into()));
                };
                let i: usize = i.parse().map_err(|_| fail(lineno, format!("bad index `{i}`")))?;
                let v: f64 = v.parse().map_err(|_| fail(lineno, format!("bad value `{v}`")))?;
                let slot = fields
                    .get_mut(i)
                    .ok_or_else(|| fail(lineno, format!("field index {i} out of range")))?;
                if slot.replace(v).is_some() {
                    return Err(fail(lineno, format!("field {i} given twice")));
                }
            }
            Section::Couplings => {
                let parts: Vec<&str> = line.split_whitespace().collect();
                let [j, k, v] = parts[..] else {
                    return Err(fail(lineno, "expected `j k value`".into()));
                };
                let j: usize = j.parse().map_err(|_| fail(lineno, format!("bad index `{j}`")))?;
                let k: usize = k.parse().map_err(|_| fail(lineno, format!("bad index `{k}`")))?;
                let v: f64 = v.parse().map_err(|_| fail(lineno, format!("bad value `{v}`")))?;
                triples.push((j, k, v));
            }
        }
    }
    let n = n.ok_or_else(|| fail(0, "missing n".into()))?;
    let fields: Vec<f64> = fields.into_iter().map(|f| f.unwrap_or(0.0)).collect();
    if fields.len() != n {
        return Err(fail(0, "missing fields section".into()));
    }
    let instance = IsingInstance::from_triples(n, &triples, fields).map_err(|e| fail(0, e.to_string()))?;
    let id = id.unwrap_or_else(|| {
        origin
            .file_stem()
            .map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned())
    });
    Ok(instance.with_metadata(id, seed, class))
}

pub fn read_instance(path: &Path) -> LabResult<IsingInstance> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse_instance(&text, path)
}

/// Writes `<dir>/<instance_id>.txt` and returns its path.
pub fn write_instance(dir: &Path, instance: &IsingInstance) -> LabResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let path = dir.join(format!("{}.txt", instance.instance_id()));
    fs::write(&path, format_instance(instance)).map_err(|e| LabError::io(&path, e))?;
    Ok(path)
}
