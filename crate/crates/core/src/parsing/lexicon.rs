use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const DEFAULT_TITLES: &[&str] = &["Dr.", "Prof.", "Mr.", "Ms.", "Mrs.", "PhD"];
pub const DEFAULT_STREET_SUFFIXES: &[&str] = &["Street", "St", "Ave", "Avenue", "Blvd", "Road", "Rd"];

/// A case-insensitive word list. Entries match with or without a trailing period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    entries: Vec<String>,
}

impl Lexicon {
    pub fn new<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut entries: Vec<String> = entries
            .into_iter()
            .map(|e| fold(e.as_ref()))
            .filter(|e| !e.is_empty())
            .collect();
        entries.sort();
        entries.dedup();
        Self { entries }
    }

    /// One entry per line; blank lines and `#` comments are ignored.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        ))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.binary_search(&fold(token)).is_ok()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn fold(token: &str) -> String {
    token.trim().trim_end_matches('.').to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicons {
    pub titles: Lexicon,
    pub street_suffixes: Lexicon,
}

impl Default for Lexicons {
    fn default() -> Self {
        Self {
            titles: Lexicon::new(DEFAULT_TITLES),
            street_suffixes: Lexicon::new(DEFAULT_STREET_SUFFIXES),
        }
    }
}

impl Lexicons {
    /// Loads whichever lists are given, falling back to the shipped defaults.
    pub fn load(titles: Option<&Path>, street_suffixes: Option<&Path>) -> Result<Self> {
        let defaults = Self::default();
        Ok(Self {
            titles: titles.map(Lexicon::load).transpose()?.unwrap_or(defaults.titles),
            street_suffixes: street_suffixes
                .map(Lexicon::load)
                .transpose()?
                .unwrap_or(defaults.street_suffixes),
        })
    }
}
