//! Artifact writers: CSV and JSON, always through a temp file plus atomic
//! rename so a failing run never leaves a partially written artifact.
//!
//! Floats are formatted with Rust's shortest round-trip representation, so
//! parsing a CSV cell back yields the identical f64.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Run(format!("writing {}: {e}", path.display()))
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| io_err(path, e))?;
    }
    let tmp: PathBuf = {
        let mut name = path.file_name().unwrap_or_default().to_os_string();
        name.push(format!(".tmp-{}", std::process::id()));
        path.with_file_name(name)
    };
    {
        let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        f.write_all(bytes).map_err(|e| io_err(&tmp, e))?;
        f.sync_all().map_err(|e| io_err(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// Write one CSV file: comma delimiter, `\n` line endings, header row.
pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Run(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

/// Shortest representation that parses back to the identical value: Rust's
/// positional and scientific forms both round-trip, so take the shorter
/// (positional on ties).
pub fn fmt_f64(v: f64) -> String {
    let plain = format!("{v}");
    if !v.is_finite() {
        return plain;
    }
    let sci = format!("{v:e}");
    if sci.len() < plain.len() {
        sci
    } else {
        plain
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_written_atomically_with_unix_endings() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(
            &path,
            &["a", "b"],
            vec![vec!["1".to_string(), "2".to_string()]],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "a,b\n1,2\n");
        // no stray temp files
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn floats_roundtrip_through_display() {
        for &v in &[
            0.1,
            1.0 / 3.0,
            f64::MIN_POSITIVE,
            -277.38189261903887,
            1e-300,
            2.898266111172849e-90,
        ] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        // tiny magnitudes come out in scientific notation, not 300 zeros
        assert!(fmt_f64(1e-300).len() < 10);
        assert_eq!(fmt_f64(0.1), "0.1");
    }
}
