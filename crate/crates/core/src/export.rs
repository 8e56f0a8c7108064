//! CSV / JSON serialization and atomic file writes.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::{CMatrix, Result, StateVector, C64};

/// Shortest round-trip representation in exponent form; `-0` prints as `0e0`.
pub fn fmt_f64(x: f64) -> String {
    format!("{:e}", x + 0.0)
}

pub fn complex_pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn vector_json(v: &StateVector) -> serde_json::Value {
    serde_json::Value::from(v.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>())
}

pub fn matrix_json(m: &CMatrix) -> serde_json::Value {
    crate::hamiltonian::matrix_to_json(m, false)
}

/// Render rows as CSV with a header line.
pub fn csv_bytes<I>(headers: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(headers)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| crate::Error::Io(e.to_string()))
}

pub fn json_bytes(value: &serde_json::Value) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

/// Write to a sibling temporary file, then rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_and_header() {
        let b = csv_bytes(&["a", "b"], vec![vec!["1".into(), "x,y".into()]]).unwrap();
        assert_eq!(String::from_utf8(b).unwrap(), "a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.0, 1.0, -0.5, 1e-15, 0.1 + 0.2, std::f64::consts::PI] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(-0.0), "0e0");
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = std::env::temp_dir().join(format!("fockedge-export-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("out.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }
}
