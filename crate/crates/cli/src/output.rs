use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use tempfile::NamedTempFile;

use crate::CliError;

/// Write through a temp file in the target directory, then rename into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut tmp = NamedTempFile::new_in(&dir).map_err(|e| CliError::io(&dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| CliError::io(path, e))?;
    tmp.flush().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Indented JSON in which arrays of scalars, and arrays of those, stay on one
/// line, so matrices read row by row.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report serializes");
    let mut s = String::new();
    write_value(&mut s, &v, 0);
    s.push('\n');
    s
}

fn is_flat(v: &Value, depth: usize) -> bool {
    match v {
        Value::Array(items) => depth > 0 && items.iter().all(|x| is_flat(x, depth - 1)),
        Value::Object(_) => false,
        _ => true,
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        Value::Array(items) if !items.is_empty() && !is_flat(v, 2) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        _ => out.push_str(&v.to_string()),
    }
}

/// Write JSON to `out`, or to stdout when no path is given.
pub fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let text = to_json(value);
    match out {
        Some(p) => write_atomic(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub struct TraceRow {
    pub step: usize,
    pub value: f64,
    pub rank: Option<usize>,
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut s = String::from("step,value,rank\n");
    for r in rows {
        let rank = r.rank.map(|k| k.to_string()).unwrap_or_default();
        s.push_str(&format!("{},{:?},{}\n", r.step, r.value, rank));
    }
    s
}

/// `--csv` with no path writes next to `--out` with a `.csv` extension.
pub fn csv_path(csv: &Option<Option<PathBuf>>, out: Option<&Path>) -> Result<Option<PathBuf>, CliError> {
    match csv {
        None => Ok(None),
        Some(Some(p)) => Ok(Some(p.clone())),
        Some(None) => out
            .map(|o| Some(o.with_extension("csv")))
            .ok_or_else(|| CliError::input("--csv without a path needs --out")),
    }
}
