use std::fmt::Display;
use std::path::Path;

/// Flat `key=value` run record.
#[derive(Debug, Default, Clone)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Self::default();
        m.push("command", command);
        m.push("version", env!("CARGO_PKG_VERSION"));
        m
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn push_path(&mut self, key: &str, path: &Path) {
        self.push(key, path.display());
    }

    pub fn extend<K: Into<String>>(&mut self, pairs: impl IntoIterator<Item = (K, String)>) {
        for (k, v) in pairs {
            self.push(k, v);
        }
    }

    pub fn render(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}
