//! Locates, identifies and isolates the data elements inside each raw field.

mod address;
mod date;
mod lexicon;
mod name;
mod orcid;

pub use address::{parse_address, AddressParse};
pub use date::{format_date, parse_date, DateParse, DatePrecision};
pub use lexicon::{Lexicon, Lexicons, DEFAULT_STREET_SUFFIXES, DEFAULT_TITLES};
pub use name::{parse_name, NameParse};
pub use orcid::{orcid_checksum_ok, parse_orcid, OrcidParse, OrcidValidity};

use serde::Serialize;

use crate::record::RawRecord;

/// Splits on whitespace, commas and semicolons, dropping punctuation-only tokens.
pub fn tokenize(field_text: &str) -> Vec<String> {
    field_text
        .split(|c: char| c.is_whitespace() || c == ',' || c == ';')
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .map(str::to_owned)
        .collect()
}

/// Parse results for every present field of one raw row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParsedRecord {
    pub row_index: usize,
    pub author_id: Option<String>,
    pub name: Option<NameParse>,
    pub orcid: Option<OrcidParse>,
    pub birth_date: Option<DateParse>,
    pub address: Option<AddressParse>,
}

pub fn parse_record(raw: &RawRecord, lexicons: &Lexicons) -> ParsedRecord {
    ParsedRecord {
        row_index: raw.row_index,
        author_id: raw.author_id.clone(),
        name: raw.name.as_deref().map(|n| parse_name(n, lexicons)),
        orcid: raw.orcid_raw.as_deref().map(parse_orcid),
        birth_date: raw.birth_date_raw.as_deref().map(parse_date),
        address: raw.address_raw.as_deref().map(|a| parse_address(a, lexicons)),
    }
}
