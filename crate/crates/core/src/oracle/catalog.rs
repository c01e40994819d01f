use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::molgraph::parse_smiles;

use super::OracleError;

const DEFAULT_CATALOG: &str = include_str!("../../data/catalog.csv");

/// Purchasable building blocks keyed by canonical SMILES.
#[derive(Debug, Clone)]
pub struct Catalog {
    entries: BTreeMap<String, f64>,
    min_price_per_atom: f64,
}

impl Catalog {
    pub fn from_entries(entries: impl IntoIterator<Item = (String, f64)>) -> Result<Catalog, OracleError> {
        let mut map = BTreeMap::new();
        let mut min_rate = f64::INFINITY;
        for (k, (smiles, price)) in entries.into_iter().enumerate() {
            if !(price.is_finite() && price > 0.0) {
                return Err(OracleError::BadPrice { line: k + 2, price });
            }
            let mol = parse_smiles(&smiles).map_err(|source| OracleError::Smiles { line: k + 2, source })?;
            min_rate = min_rate.min(price / mol.heavy_atoms() as f64);
            let key = mol.canonical_smiles().to_string();
            // Duplicate spellings keep the cheaper offer.
            let slot = map.entry(key).or_insert(price);
            *slot = slot.min(price);
        }
        if map.is_empty() {
            return Err(OracleError::EmptyCatalog);
        }
        Ok(Catalog { entries: map, min_price_per_atom: min_rate })
    }

    /// Reads CSV with header `smiles,price`.
    pub fn from_reader(reader: impl Read) -> Result<Catalog, OracleError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut rows = Vec::new();
        for record in rdr.deserialize() {
            let (smiles, price): (String, f64) = record?;
            rows.push((smiles, price));
        }
        Catalog::from_entries(rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Catalog, OracleError> {
        Catalog::from_reader(File::open(path)?)
    }

    /// The catalog compiled into the crate.
    pub fn builtin() -> Catalog {
        Catalog::from_reader(DEFAULT_CATALOG.as_bytes()).expect("shipped catalog parses")
    }

    pub fn price(&self, canonical_smiles: &str) -> Option<f64> {
        self.entries.get(canonical_smiles).copied()
    }

    pub fn contains(&self, canonical_smiles: &str) -> bool {
        self.entries.contains_key(canonical_smiles)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Cheapest price per heavy atom over all entries.
    pub fn min_price_per_atom(&self) -> f64 {
        self.min_price_per_atom
    }
}
