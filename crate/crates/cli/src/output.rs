use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Rows of already formatted cells.
#[derive(Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut out = String::new();
        write_record(&mut out, &self.header);
        for r in &self.rows {
            write_record(&mut out, r);
        }
        out.into_bytes()
    }
}

fn write_record(out: &mut String, cells: &[String]) {
    for (i, c) in cells.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        if c.contains([',', '"', '\n', '\r']) {
            out.push('"');
            out.push_str(&c.replace('"', "\"\""));
            out.push('"');
        } else {
            out.push_str(c);
        }
    }
    out.push_str("\r\n");
}

/// Shortest decimal that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else {
        String::new()
    }
}

pub fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

/// What a subcommand produced: the main document plus any companion files.
pub struct Artifact {
    pub main: Vec<u8>,
    /// `(suffix, bytes)`, written to `<out>.<suffix>`.
    pub companions: Vec<(String, Vec<u8>)>,
}

impl Artifact {
    pub fn single(main: Vec<u8>) -> Self {
        Self {
            main,
            companions: Vec::new(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub subcommand: String,
    pub config_sha256: String,
    pub seed: u64,
    pub format: String,
    pub version: String,
    pub generator: String,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputRecord>,
}

pub fn companion_path(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes the artifact to `out` (or stdout) and returns one record per file written.
pub fn emit(artifact: &Artifact, out: Option<&Path>) -> io::Result<Vec<OutputRecord>> {
    let Some(out) = out else {
        let mut stdout = io::stdout().lock();
        stdout.write_all(&artifact.main)?;
        for (_, bytes) in &artifact.companions {
            io::stderr().write_all(bytes)?;
        }
        return Ok(Vec::new());
    };
    let mut records = Vec::new();
    let mut put = |path: PathBuf, bytes: &[u8]| -> io::Result<()> {
        fs::write(&path, bytes)?;
        records.push(OutputRecord {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    };
    put(out.to_path_buf(), &artifact.main)?;
    for (suffix, bytes) in &artifact.companions {
        put(companion_path(out, suffix), bytes)?;
    }
    Ok(records)
}

pub fn write_manifest(out: &Path, manifest: &Manifest) -> io::Result<()> {
    fs::write(companion_path(out, "manifest.json"), json_bytes(manifest))
}

pub fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting() {
        let mut t = Table::new(["a", "b,c"]);
        t.push(vec!["x\"y".into(), "1".into()]);
        assert_eq!(String::from_utf8(t.to_csv()).unwrap(), "a,\"b,c\"\r\n\"x\"\"y\",1\r\n");
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0, -2.5e-300, 1e21, 0.30000000000000004, f64::MIN_POSITIVE] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(1.0), "1.0");
        assert_eq!(num(f64::NAN), "");
    }

    #[test]
    fn digest_is_hex() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
