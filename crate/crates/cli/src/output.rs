//! Error reports, provenance records and artifact writing.

use std::fs;
use std::path::{Path, PathBuf};

use ddwarn_core::seed::sha256_hex;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ConfigError;

/// A failed run. Usage problems exit 2, data and validation problems exit 1.
#[derive(Debug)]
pub struct Failure {
    usage: bool,
    code: String,
    message: String,
    line: Option<u64>,
    file: Option<PathBuf>,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Failure {
        Failure {
            usage: true,
            code: "usage".into(),
            message: message.into(),
            line: None,
            file: None,
        }
    }

    pub fn config(e: ConfigError, path: &Path) -> Failure {
        Failure {
            usage: true,
            code: "invalid_config".into(),
            message: e.message,
            line: e.line.map(|l| l as u64),
            file: Some(path.to_path_buf()),
        }
    }

    pub fn data(code: impl Into<String>, message: impl Into<String>) -> Failure {
        Failure {
            usage: false,
            code: code.into(),
            message: message.into(),
            line: None,
            file: None,
        }
    }

    pub fn in_file(mut self, path: &Path) -> Failure {
        self.file = Some(path.to_path_buf());
        self
    }

    pub fn exit_code(&self) -> u8 {
        if self.usage {
            2
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        json!({
            "status": "error",
            "code": self.code,
            "message": self.message,
            "line": self.line,
            "file": self.file.as_ref().map(|p| p.display().to_string()),
        })
        .to_string()
    }
}

impl From<ddwarn_core::Error> for Failure {
    fn from(e: ddwarn_core::Error) -> Failure {
        let mut f = Failure::data(e.code(), e.to_string());
        f.line = e.line();
        f
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputFile {
    pub file: String,
    pub sha256: String,
}

impl InputFile {
    pub fn new(path: &Path, bytes: &[u8]) -> InputFile {
        InputFile {
            file: path.display().to_string(),
            sha256: sha256_hex(bytes),
        }
    }
}

/// What produced an artifact: the command, inputs, effective config and seed.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config_digest: String,
    pub inputs: Vec<InputFile>,
}

/// Writes artifacts into one directory, each carrying provenance.
pub struct Artifacts {
    dir: PathBuf,
    provenance: Provenance,
}

impl Artifacts {
    pub fn new(dir: &Path, provenance: Provenance) -> Result<Artifacts, Failure> {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::data("io_error", format!("cannot create {}: {e}", dir.display())).in_file(dir))?;
        Ok(Artifacts {
            dir: dir.to_path_buf(),
            provenance,
        })
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)
            .map_err(|e| Failure::data("io_error", format!("cannot write {}: {e}", path.display())).in_file(&path))?;
        Ok(path)
    }

    /// A data file plus a `<name>.meta.json` sidecar holding its provenance.
    pub fn data(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, Failure> {
        let path = self.write(name, bytes)?;
        let meta = json!({
            "artifact": name,
            "sha256": sha256_hex(bytes),
            "provenance": self.provenance,
        });
        self.write(&format!("{name}.meta.json"), pretty(&meta).as_bytes())?;
        Ok(path)
    }

    /// A JSON report with provenance embedded under `"provenance"`.
    pub fn report<T: Serialize>(&self, name: &str, body: &T) -> Result<String, Failure> {
        let mut value = serde_json::to_value(body).map_err(ddwarn_core::Error::from)?;
        match &mut value {
            Value::Object(map) => {
                map.insert("provenance".into(), serde_json::to_value(&self.provenance).expect("serializable"));
            }
            other => {
                value = json!({ "body": other.take(), "provenance": self.provenance });
            }
        }
        let text = pretty(&value);
        self.write(name, text.as_bytes())?;
        Ok(text)
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
