use std::fs;
use std::path::Path;

use crate::molgraph::{canonical_ranks, parse_fragment, Molecule};

use super::SpaceError;

const FRAG105: &str = include_str!("../../data/frag105.smi");
const FRAG464: &str = include_str!("../../data/frag464.smi");

/// A building block and the atoms that may bond to a host.
#[derive(Debug, Clone)]
pub struct Fragment {
    pub smiles: String,
    pub molecule: Molecule,
    pub attachments: Vec<usize>,
    /// One attachment atom per symmetry class.
    pub(crate) attachment_reps: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct FragmentLibrary {
    pub name: String,
    pub fragments: Vec<Fragment>,
}

impl FragmentLibrary {
    pub fn parse(name: &str, text: &str) -> Result<FragmentLibrary, SpaceError> {
        let mut fragments = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let smiles = line.split_whitespace().next().unwrap_or(line);
            let parsed = parse_fragment(smiles).map_err(|source| SpaceError::Parse { line: k + 1, source })?;
            if parsed.attachments.is_empty() {
                return Err(SpaceError::NoAttachment { line: k + 1 });
            }
            if let Some(&bad) = parsed.attachments.iter().find(|&&a| parsed.molecule.free_valence(a) == 0) {
                return Err(SpaceError::Parse {
                    line: k + 1,
                    source: crate::molgraph::MolError::Valence {
                        atom: bad,
                        element: parsed.molecule.atom(bad).element,
                    },
                });
            }
            let ranks = canonical_ranks(&parsed.molecule);
            let mut attachment_reps: Vec<usize> = Vec::new();
            for &a in &parsed.attachments {
                if !attachment_reps.iter().any(|&r| ranks[r] == ranks[a]) {
                    attachment_reps.push(a);
                }
            }
            fragments.push(Fragment {
                smiles: smiles.to_string(),
                molecule: parsed.molecule,
                attachments: parsed.attachments,
                attachment_reps,
            });
        }
        if fragments.is_empty() {
            return Err(SpaceError::EmptyLibrary);
        }
        Ok(FragmentLibrary { name: name.to_string(), fragments })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<FragmentLibrary, SpaceError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("library");
        FragmentLibrary::parse(name, &text)
    }

    /// Libraries compiled into the crate: `frag105` and `frag464`.
    pub fn builtin(name: &str) -> Option<FragmentLibrary> {
        let text = match name {
            "frag105" => FRAG105,
            "frag464" => FRAG464,
            _ => return None,
        };
        Some(FragmentLibrary::parse(name, text).expect("shipped libraries parse"))
    }

    pub fn len(&self) -> usize {
        self.fragments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fragments.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn methyl() {
        let lib = FragmentLibrary::parse("t", "C*\n").unwrap();
        assert_eq!(lib.len(), 1);
        assert_eq!(lib.fragments[0].attachments, vec![0]);
    }

    #[test]
    fn shipped_counts() {
        assert_eq!(FragmentLibrary::builtin("frag105").unwrap().len(), 105);
        assert_eq!(FragmentLibrary::builtin("frag464").unwrap().len(), 464);
    }

    #[test]
    fn errors() {
        assert!(matches!(FragmentLibrary::parse("t", ""), Err(SpaceError::EmptyLibrary)));
        assert!(matches!(FragmentLibrary::parse("t", "# only\n\n"), Err(SpaceError::EmptyLibrary)));
        assert!(matches!(FragmentLibrary::parse("t", "C*\nCC\n"), Err(SpaceError::NoAttachment { line: 2 })));
        assert!(matches!(FragmentLibrary::parse("t", "C*\nC(*\n"), Err(SpaceError::Parse { line: 2, .. })));
    }

    #[test]
    fn symmetric_attachments_collapse() {
        let lib = FragmentLibrary::parse("t", "*c1ccc(*)cc1\n").unwrap();
        assert_eq!(lib.fragments[0].attachments.len(), 2);
        assert_eq!(lib.fragments[0].attachment_reps.len(), 1);
    }
}
