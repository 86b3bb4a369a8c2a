//! Run manifests: a `key=value` record of everything needed to reproduce an output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub timestamp: String,
    pub seed: Option<u64>,
    pub params: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            seed,
            params: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command={}", self.command);
        let _ = writeln!(out, "version={}", self.version);
        let _ = writeln!(out, "timestamp={}", self.timestamp);
        match self.seed {
            Some(s) => {
                let _ = writeln!(out, "seed={s}");
            }
            None => out.push_str("seed=none\n"),
        }
        for (k, v) in &self.params {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// Parses a rendered manifest back into `(key, value)` pairs.
    #[cfg(test)]
    pub fn parse(text: &str) -> Vec<(String, String)> {
        text.lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }
}

/// Sidecar location for an output file: `<path>.manifest`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_and_parse() {
        let m = RunManifest::new("simulate", Some(9))
            .param("sm", 5)
            .param("decoder", "ida");
        let kv = RunManifest::parse(&m.render());
        assert_eq!(kv[0], ("command".into(), "simulate".into()));
        assert!(kv.contains(&("seed".into(), "9".into())));
        assert!(kv.contains(&("decoder".into(), "ida".into())));
        assert!(kv.iter().any(|(k, _)| k == "timestamp"));
    }

    #[test]
    fn sidecar_appends_suffix() {
        assert_eq!(
            sidecar_path(Path::new("out/run.csv")),
            PathBuf::from("out/run.csv.manifest")
        );
    }
}
