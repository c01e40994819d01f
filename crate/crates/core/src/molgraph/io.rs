//! SMILES list files: UTF-8, one `SMILES[<TAB>name]` record per line, `#`
//! starts a comment line, blank lines are skipped.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Lines};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmilesRecord {
    /// 1-based line number in the source file.
    pub line: usize,
    pub smiles: String,
    pub name: Option<String>,
}

pub struct SmilesRecords<R> {
    lines: Lines<R>,
    line: usize,
}

impl<R: BufRead> SmilesRecords<R> {
    pub fn new(reader: R) -> Self {
        SmilesRecords { lines: reader.lines(), line: 0 }
    }
}

impl SmilesRecords<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        Ok(SmilesRecords::new(BufReader::new(File::open(path)?)))
    }
}

impl<R: BufRead> Iterator for SmilesRecords<R> {
    type Item = io::Result<SmilesRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(e)),
            };
            self.line += 1;
            let trimmed = line.trim_end_matches(['\r', '\n']);
            if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
                continue;
            }
            let (smiles, name) = match trimmed.split_once('\t') {
                Some((s, n)) => (s.trim(), Some(n.trim().to_string()).filter(|n| !n.is_empty())),
                None => (trimmed.trim(), None),
            };
            return Some(Ok(SmilesRecord { line: self.line, smiles: smiles.to_string(), name }));
        }
    }
}

/// Reads every record of a SMILES list file into memory.
pub fn read_smiles_file(path: impl AsRef<Path>) -> io::Result<Vec<SmilesRecord>> {
    SmilesRecords::open(path)?.collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_names_and_blanks() {
        let text = "# header\nCCO\tethanol\n\nc1ccccc1\n  # indented comment\nCC\t\n";
        let recs: Vec<_> = SmilesRecords::new(text.as_bytes()).map(Result::unwrap).collect();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[0], SmilesRecord { line: 2, smiles: "CCO".into(), name: Some("ethanol".into()) });
        assert_eq!(recs[1].line, 4);
        assert_eq!(recs[2].name, None);
    }
}
