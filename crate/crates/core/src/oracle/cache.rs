use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::OracleError;

/// Oracle scores keyed by canonical SMILES, backed by an append-only CSV
/// with header `smiles,score`.
#[derive(Debug, Default)]
pub struct LabelCache {
    path: Option<PathBuf>,
    entries: HashMap<String, f64>,
    pending: Vec<(String, f64)>,
}

impl LabelCache {
    pub fn in_memory() -> LabelCache {
        LabelCache::default()
    }

    /// Opens the cache at `path`; a missing file starts empty. A file that
    /// exists but cannot be read or parsed is an error.
    pub fn open(path: impl AsRef<Path>) -> Result<LabelCache, OracleError> {
        let path = path.as_ref().to_path_buf();
        let mut entries = HashMap::new();
        match File::open(&path) {
            Ok(file) => {
                let mut rdr = csv::Reader::from_reader(file);
                for record in rdr.deserialize() {
                    let (smiles, score): (String, f64) = record.map_err(|e| OracleError::Cache {
                        path: path.clone(),
                        reason: e.to_string(),
                    })?;
                    entries.insert(smiles, score);
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(OracleError::Cache { path, reason: e.to_string() }),
        }
        Ok(LabelCache { path: Some(path), entries, pending: Vec::new() })
    }

    pub fn get(&self, smiles: &str) -> Option<f64> {
        self.entries.get(smiles).copied()
    }

    pub fn insert(&mut self, smiles: String, score: f64) {
        if self.entries.insert(smiles.clone(), score).is_none() {
            self.pending.push((smiles, score));
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Appends entries added since the last persist.
    pub fn persist(&mut self) -> Result<(), OracleError> {
        let Some(path) = &self.path else {
            self.pending.clear();
            return Ok(());
        };
        if self.pending.is_empty() {
            return Ok(());
        }
        let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let mut out = BufWriter::new(file);
        if fresh {
            writeln!(out, "smiles,score")?;
        }
        for (smiles, score) in self.pending.drain(..) {
            writeln!(out, "{smiles},{score}")?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.csv");
        let mut c = LabelCache::open(&path).unwrap();
        assert!(c.is_empty());
        c.insert("CC".into(), 2.5);
        c.insert("CC".into(), 2.5);
        c.persist().unwrap();
        c.insert("CO".into(), 11.0);
        c.persist().unwrap();
        let c = LabelCache::open(&path).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.get("CO"), Some(11.0));
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.matches("smiles,score").count(), 1);
    }

    #[test]
    fn corrupt_cache_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.csv");
        std::fs::write(&path, "smiles,score\nCC,notanumber\n").unwrap();
        assert!(matches!(LabelCache::open(&path), Err(OracleError::Cache { .. })));
    }
}
