//! Line-oriented `key = value` text files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are unique.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug)]
pub(crate) struct KvFile {
    path: PathBuf,
    entries: BTreeMap<String, (usize, String)>,
}

impl KvFile {
    pub(crate) fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(config_error(path, line_no, format!("expected key=value, got `{line}`")));
            };
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(config_error(path, line_no, "empty key"));
            }
            if entries.contains_key(&key) {
                return Err(config_error(path, line_no, format!("duplicate key `{key}`")));
            }
            entries.insert(key, (line_no, value.trim().to_string()));
        }
        Ok(Self {
            path: path.to_path_buf(),
            entries,
        })
    }

    /// Fails on the first key not in `known`.
    pub(crate) fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        match self.entries.iter().find(|(k, _)| !known.contains(&k.as_str())) {
            Some((key, (line, _))) => Err(self.error(*line, format!("unknown key `{key}`"))),
            None => Ok(()),
        }
    }

    pub(crate) fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.entries.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    pub(crate) fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, value)) => value
                .parse()
                .map(Some)
                .map_err(|_| self.error(line, format!("invalid value `{value}` for `{key}`"))),
        }
    }

    pub(crate) fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?
            .ok_or_else(|| self.error(0, format!("missing key `{key}`")))
    }

    pub(crate) fn error(&self, line: usize, message: impl Into<String>) -> Error {
        config_error(&self.path, line, message)
    }
}

fn config_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_values() {
        let kv = KvFile::parse("# rig\n\nfov_deg = 60\nzones=4\n", Path::new("t.cfg")).unwrap();
        assert_eq!(kv.get::<f64>("fov_deg").unwrap(), Some(60.0));
        assert_eq!(kv.require::<usize>("zones").unwrap(), 4);
        assert_eq!(kv.get::<f64>("seed").unwrap(), None);
        assert!(kv.reject_unknown(&["fov_deg", "zones"]).is_ok());
    }

    #[test]
    fn reports_line_of_problem() {
        let err = KvFile::parse("a=1\nnonsense\n", Path::new("t.cfg")).unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err}");
        let kv = KvFile::parse("a=1\nb=x\n", Path::new("t.cfg")).unwrap();
        assert!(matches!(kv.get::<f64>("b"), Err(Error::Config { line: 2, .. })));
        assert!(matches!(kv.reject_unknown(&["a"]), Err(Error::Config { line: 2, .. })));
        assert!(KvFile::parse("a=1\na=2\n", Path::new("t.cfg")).is_err());
    }
}
