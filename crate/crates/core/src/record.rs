//! Shared record, field and issue types used by every pipeline phase.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

/// Logical fields of a researcher record plus the emitted address and name columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    AuthorId,
    Name,
    Orcid,
    BirthDate,
    Address,
    First,
    Last,
    Zip,
    State,
    City,
    Street,
}

impl Field {
    /// The five fields of an ingested row.
    pub const SOURCE: [Field; 5] = [
        Field::AuthorId,
        Field::Name,
        Field::Orcid,
        Field::BirthDate,
        Field::Address,
    ];

    /// Columns of the cleansed/golden CSV, in header order.
    pub const EMITTED: [Field; 9] = [
        Field::AuthorId,
        Field::First,
        Field::Last,
        Field::Orcid,
        Field::BirthDate,
        Field::Zip,
        Field::State,
        Field::City,
        Field::Street,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Field::AuthorId => "author_id",
            Field::Name => "name",
            Field::Orcid => "orcid",
            Field::BirthDate => "birth_date",
            Field::Address => "address",
            Field::First => "first",
            Field::Last => "last",
            Field::Zip => "zip",
            Field::State => "state",
            Field::City => "city",
            Field::Street => "street",
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One ingested row. Every text field is either absent or non-empty trimmed text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRecord {
    pub row_index: usize,
    pub author_id: Option<String>,
    pub name: Option<String>,
    pub orcid_raw: Option<String>,
    pub birth_date_raw: Option<String>,
    pub address_raw: Option<String>,
}

impl RawRecord {
    /// Builds a record, normalizing blank or whitespace-only cells to absent.
    pub fn new(
        row_index: usize,
        author_id: Option<&str>,
        name: Option<&str>,
        orcid_raw: Option<&str>,
        birth_date_raw: Option<&str>,
        address_raw: Option<&str>,
    ) -> Self {
        Self {
            row_index,
            author_id: normalize_cell(author_id),
            name: normalize_cell(name),
            orcid_raw: normalize_cell(orcid_raw),
            birth_date_raw: normalize_cell(birth_date_raw),
            address_raw: normalize_cell(address_raw),
        }
    }

    pub fn get(&self, field: Field) -> Option<&str> {
        match field {
            Field::AuthorId => self.author_id.as_deref(),
            Field::Name => self.name.as_deref(),
            Field::Orcid => self.orcid_raw.as_deref(),
            Field::BirthDate => self.birth_date_raw.as_deref(),
            Field::Address => self.address_raw.as_deref(),
            _ => None,
        }
    }
}

/// Trims a cell and maps empty results to `None`.
pub fn normalize_cell(value: Option<&str>) -> Option<String> {
    value
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(str::to_owned)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StatusState {
    Present,
    Missing,
    Invalid,
    Corrected,
    Enriched,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldStatus {
    pub state: StatusState,
    pub note: Option<String>,
}

impl FieldStatus {
    pub fn present() -> Self {
        Self { state: StatusState::Present, note: None }
    }

    pub fn missing() -> Self {
        Self { state: StatusState::Missing, note: None }
    }

    pub fn with_rule(state: StatusState, rule_id: &str, detail: &str) -> Self {
        Self { state, note: Some(rule_note(rule_id, detail)) }
    }

    /// Moves this status to `state` and appends the rule citation to the note.
    pub fn record(&mut self, state: StatusState, rule_id: &str, detail: &str) {
        let entry = rule_note(rule_id, detail);
        self.note = Some(match self.note.take() {
            Some(prev) if !prev.is_empty() => format!("{prev}; {entry}"),
            _ => entry,
        });
        self.state = state;
    }

    /// Rule ids cited in the note, in application order.
    pub fn rule_ids(&self) -> Vec<&str> {
        self.note
            .as_deref()
            .map(|n| {
                n.split("; ")
                    .map(|entry| entry.split(':').next().unwrap_or(entry).trim())
                    .collect()
            })
            .unwrap_or_default()
    }
}

fn rule_note(rule_id: &str, detail: &str) -> String {
    if detail.is_empty() {
        rule_id.to_owned()
    } else {
        format!("{rule_id}: {detail}")
    }
}

/// The five problem classes of research data quality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IssueKind {
    MissingValue,
    IncorrectValue,
    Duplicate,
    NonUniformFormat,
    Inconsistency,
}

impl IssueKind {
    pub const ALL: [IssueKind; 5] = [
        IssueKind::MissingValue,
        IssueKind::IncorrectValue,
        IssueKind::Duplicate,
        IssueKind::NonUniformFormat,
        IssueKind::Inconsistency,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QualityIssue {
    pub row_index: usize,
    pub field: Field,
    pub kind: IssueKind,
    pub detail: String,
}

/// Which reading of a two-part name is the given name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NameOrder {
    GivenFirst,
    FamilyFirst,
    Ambiguous,
}

/// A validated birth date, possibly known only to the year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BirthDate {
    Full(NaiveDate),
    YearOnly(i32),
}

impl BirthDate {
    pub fn year(self) -> i32 {
        match self {
            BirthDate::Full(d) => d.year(),
            BirthDate::YearOnly(y) => y,
        }
    }

    /// ISO `YYYY-MM-DD` for full dates; year-only dates are not emitted.
    pub fn iso(self) -> Option<String> {
        match self {
            BirthDate::Full(d) => Some(d.format("%Y-%m-%d").to_string()),
            BirthDate::YearOnly(_) => None,
        }
    }
}

/// 16-character researcher identifier stored as four groups of four.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Orcid(String);

impl Orcid {
    /// Accepts only the canonical `XXXX-XXXX-XXXX-XXXX` shape over ASCII alphanumerics.
    pub fn parse_canonical(text: &str) -> Option<Self> {
        is_canonical_orcid(text).then(|| Self(text.to_owned()))
    }

    pub(crate) fn from_groups(groups: &[String; 4]) -> Self {
        Self(groups.join("-"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn digits(&self) -> impl Iterator<Item = char> + '_ {
        self.0.chars().filter(|c| *c != '-')
    }
}

pub(crate) fn is_canonical_orcid(text: &str) -> bool {
    let bytes = text.as_bytes();
    bytes.len() == 19
        && bytes.iter().enumerate().all(|(i, b)| {
            if i == 4 || i == 9 || i == 14 {
                *b == b'-'
            } else {
                b.is_ascii_digit() || b.is_ascii_uppercase()
            }
        })
}

impl TryFrom<String> for Orcid {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Orcid::parse_canonical(&value).ok_or_else(|| format!("not a canonical ORCID: {value}"))
    }
}

impl From<Orcid> for String {
    fn from(value: Orcid) -> Self {
        value.0
    }
}

impl fmt::Display for Orcid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StructuredAddress {
    pub street: Option<String>,
    pub city: Option<String>,
    pub state: Option<String>,
    pub zip: Option<String>,
}

impl StructuredAddress {
    pub fn is_empty(&self) -> bool {
        self.street.is_none() && self.city.is_none() && self.state.is_none() && self.zip.is_none()
    }

    pub fn component_count(&self) -> usize {
        [&self.street, &self.city, &self.state, &self.zip]
            .iter()
            .filter(|c| c.is_some())
            .count()
    }

    /// `zip; state; city; street`, absent components omitted.
    pub fn canonical(&self) -> String {
        [&self.zip, &self.state, &self.city, &self.street]
            .into_iter()
            .flatten()
            .map(String::as_str)
            .collect::<Vec<_>>()
            .join("; ")
    }
}

pub fn is_zip(text: &str) -> bool {
    text.len() == 5 && text.bytes().all(|b| b.is_ascii_digit())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanRecord {
    pub row_index: usize,
    pub author_id: Option<String>,
    pub given: Option<String>,
    pub middle: Option<String>,
    pub family: Option<String>,
    pub titles: Vec<String>,
    pub name_order: NameOrder,
    pub orcid: Option<Orcid>,
    pub birth_date: Option<BirthDate>,
    pub address: Option<StructuredAddress>,
    pub statuses: BTreeMap<Field, FieldStatus>,
}

impl CleanRecord {
    pub fn empty(row_index: usize) -> Self {
        Self {
            row_index,
            author_id: None,
            given: None,
            middle: None,
            family: None,
            titles: Vec::new(),
            name_order: NameOrder::GivenFirst,
            orcid: None,
            birth_date: None,
            address: None,
            statuses: BTreeMap::new(),
        }
    }

    pub fn status(&self, field: Field) -> Option<&FieldStatus> {
        self.statuses.get(&field)
    }

    pub fn status_mut(&mut self, field: Field) -> &mut FieldStatus {
        self.statuses.entry(field).or_insert_with(FieldStatus::present)
    }

    /// Given, middle and family joined by single spaces.
    pub fn display_name(&self) -> Option<String> {
        let parts: Vec<&str> = [&self.given, &self.middle, &self.family]
            .into_iter()
            .flatten()
            .map(String::as_str)
            .collect();
        (!parts.is_empty()).then(|| parts.join(" "))
    }

    /// Value of `field` as it appears in profiles and emitted CSV.
    pub fn value(&self, field: Field) -> Option<String> {
        let address = self.address.as_ref();
        match field {
            Field::AuthorId => self.author_id.clone(),
            Field::Name => self.display_name(),
            Field::Orcid => self.orcid.as_ref().map(|o| o.to_string()),
            Field::BirthDate => self.birth_date.and_then(BirthDate::iso),
            Field::Address => address.filter(|a| !a.is_empty()).map(StructuredAddress::canonical),
            Field::First => self.given.clone(),
            Field::Last => self.family.clone(),
            Field::Zip => address.and_then(|a| a.zip.clone()),
            Field::State => address.and_then(|a| a.state.clone()),
            Field::City => address.and_then(|a| a.city.clone()),
            Field::Street => address.and_then(|a| a.street.clone()),
        }
    }

    /// Number of populated logical fields (internal representation, including year-only dates).
    pub fn present_field_count(&self) -> usize {
        [
            self.author_id.is_some(),
            self.given.is_some(),
            self.middle.is_some(),
            self.family.is_some(),
            !self.titles.is_empty(),
            self.orcid.is_some(),
            self.birth_date.is_some(),
            self.address.as_ref().is_some_and(|a| !a.is_empty()),
        ]
        .into_iter()
        .filter(|p| *p)
        .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blank_cells_become_absent() {
        let r = RawRecord::new(1, Some(""), Some("   "), None, Some(" 1983 "), Some("\t"));
        assert_eq!(r.author_id, None);
        assert_eq!(r.name, None);
        assert_eq!(r.birth_date_raw.as_deref(), Some("1983"));
        assert_eq!(r.address_raw, None);
    }

    #[test]
    fn canonical_address_rendering_omits_absent_parts() {
        let a = StructuredAddress {
            street: Some("145 F. Concord Street".into()),
            city: Some("Orlando".into()),
            state: Some("FL".into()),
            zip: Some("32801".into()),
        };
        assert_eq!(a.canonical(), "32801; FL; Orlando; 145 F. Concord Street");
        let b = StructuredAddress { zip: None, ..a };
        assert_eq!(b.canonical(), "FL; Orlando; 145 F. Concord Street");
    }

    #[test]
    fn orcid_shape() {
        assert!(Orcid::parse_canonical("0450-1254-3598-F156").is_some());
        assert!(Orcid::parse_canonical("0450125435980F156").is_none());
        assert!(Orcid::parse_canonical("0450-1254-3598-f156").is_none());
    }

    #[test]
    fn status_notes_accumulate_rule_ids() {
        let mut s = FieldStatus::present();
        s.record(StatusState::Corrected, "strip_titles", "Dr.");
        s.record(StatusState::Corrected, "reconcile_name_order", "");
        assert_eq!(s.rule_ids(), vec!["strip_titles", "reconcile_name_order"]);
    }

    #[test]
    fn year_only_dates_are_not_emitted() {
        let mut r = CleanRecord::empty(1);
        r.birth_date = Some(BirthDate::YearOnly(1983));
        assert_eq!(r.value(Field::BirthDate), None);
        assert_eq!(r.present_field_count(), 1);
    }
}
