//! CSV ingestion of raw rows and emission of cleansed/golden records.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::{
    normalize_cell, BirthDate, CleanRecord, Field, FieldStatus, NameOrder, Orcid, RawRecord,
    StructuredAddress,
};

/// Header names of the five source columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMapping {
    pub author_id: String,
    pub name: String,
    pub orcid: String,
    pub birth_date: String,
    pub address: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            author_id: "Author ID".into(),
            name: "Name".into(),
            orcid: "ORCID".into(),
            birth_date: "Birth Date".into(),
            address: "Address".into(),
        }
    }
}

/// A data row that could not be read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowError {
    pub row: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub records: Vec<RawRecord>,
    pub errors: Vec<RowError>,
}

pub fn ingest_csv(path: &Path, mapping: &ColumnMapping) -> Result<Ingested> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    ingest_reader(file, mapping, path)
}

/// Reads raw rows from any reader; `origin` labels errors.
///
/// Row indexes count data rows from 1 in file order. A malformed row keeps its
/// index (so later rows stay stable), is skipped, and is reported in `errors`.
pub fn ingest_reader<R: Read>(reader: R, mapping: &ColumnMapping, origin: &Path) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::csv(origin, e))?.clone();
    if headers.is_empty() {
        return Ok(Ingested::default());
    }
    let position = |column: &str| {
        headers
            .iter()
            .position(|h| h.trim() == column)
            .ok_or_else(|| Error::MissingColumn { path: origin.to_path_buf(), column: column.to_owned() })
    };
    let cols = [
        position(&mapping.author_id)?,
        position(&mapping.name)?,
        position(&mapping.orcid)?,
        position(&mapping.birth_date)?,
        position(&mapping.address)?,
    ];

    let mut out = Ingested::default();
    for (i, row) in rdr.records().enumerate() {
        let row_index = i + 1;
        match row {
            Ok(row) => {
                let cell = |c: usize| row.get(c);
                out.records.push(RawRecord::new(
                    row_index,
                    cell(cols[0]),
                    cell(cols[1]),
                    cell(cols[2]),
                    cell(cols[3]),
                    cell(cols[4]),
                ));
            }
            Err(e) => {
                log::warn!("{}: skipping data row {row_index}: {e}", origin.display());
                out.errors.push(RowError { row: row_index, message: e.to_string() });
            }
        }
    }
    Ok(out)
}

pub const EMITTED_HEADER: [&str; 9] = [
    "author_id", "first", "last", "orcid", "birth_date", "zip", "state", "city", "street",
];

pub fn emit_csv(records: &[CleanRecord], path: &Path) -> Result<usize> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let n = write_clean(records, file).map_err(|e| Error::csv(path, e))?;
    Ok(n)
}

pub fn write_clean<W: Write>(records: &[CleanRecord], writer: W) -> Result<usize, csv::Error> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(EMITTED_HEADER)?;
    for r in records {
        let row: Vec<String> = Field::EMITTED
            .iter()
            .map(|f| r.value(*f).unwrap_or_default())
            .collect();
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(records.len())
}

/// Reads a file written by [`emit_csv`] back into clean records.
///
/// Cells that do not hold canonical values (a malformed identifier or date) are
/// dropped and marked invalid.
pub fn read_clean_csv(path: &Path) -> Result<Vec<CleanRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let headers = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let mut cols = [0usize; 9];
    for (slot, name) in cols.iter_mut().zip(EMITTED_HEADER) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn { path: path.to_path_buf(), column: name.into() })?;
    }

    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let cell = |k: usize| normalize_cell(row.get(cols[k]));
        let mut rec = CleanRecord::empty(i + 1);
        rec.author_id = cell(0);
        rec.given = cell(1);
        rec.family = cell(2);
        if let Some(text) = cell(3) {
            rec.orcid = Orcid::parse_canonical(&text);
            if rec.orcid.is_none() {
                rec.statuses.insert(
                    Field::Orcid,
                    FieldStatus::with_rule(crate::record::StatusState::Invalid, "read_clean", &text),
                );
            }
        }
        if let Some(text) = cell(4) {
            rec.birth_date = NaiveDate::parse_from_str(&text, "%Y-%m-%d").ok().map(BirthDate::Full);
            if rec.birth_date.is_none() {
                rec.statuses.insert(
                    Field::BirthDate,
                    FieldStatus::with_rule(crate::record::StatusState::Invalid, "read_clean", &text),
                );
            }
        }
        let address = StructuredAddress { zip: cell(5), state: cell(6), city: cell(7), street: cell(8) };
        rec.address = (!address.is_empty()).then_some(address);
        rec.name_order = NameOrder::GivenFirst;
        mark_present(&mut rec);
        out.push(rec);
    }
    Ok(out)
}

fn mark_present(rec: &mut CleanRecord) {
    let present = [
        (Field::AuthorId, rec.author_id.is_some()),
        (Field::Name, rec.given.is_some() || rec.family.is_some()),
        (Field::Orcid, rec.orcid.is_some()),
        (Field::BirthDate, rec.birth_date.is_some()),
        (Field::Address, rec.address.is_some()),
    ];
    for (field, is_present) in present {
        rec.statuses.entry(field).or_insert_with(|| {
            if is_present {
                FieldStatus::present()
            } else {
                FieldStatus::missing()
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ingest_str(text: &str) -> Ingested {
        ingest_reader(text.as_bytes(), &ColumnMapping::default(), Path::new("<test>")).unwrap()
    }

    #[test]
    fn empty_file_yields_no_records() {
        assert!(ingest_str("").records.is_empty());
    }

    #[test]
    fn header_only_yields_no_records() {
        let got = ingest_str("Author ID,Name,ORCID,Birth Date,Address\n");
        assert!(got.records.is_empty());
        assert!(got.errors.is_empty());
    }

    #[test]
    fn all_empty_row_has_all_fields_absent() {
        let got = ingest_str("Author ID,Name,ORCID,Birth Date,Address\n,,,,\n");
        assert_eq!(got.records, vec![RawRecord::new(1, None, None, None, None, None)]);
    }

    #[test]
    fn missing_column_is_an_error() {
        let err = ingest_reader(
            "Author ID,Name,ORCID,Address\n".as_bytes(),
            &ColumnMapping::default(),
            Path::new("<test>"),
        )
        .unwrap_err();
        assert!(matches!(err, Error::MissingColumn { ref column, .. } if column == "Birth Date"));
    }

    #[test]
    fn malformed_row_is_skipped_and_counted() {
        let got = ingest_str("Author ID,Name,ORCID,Birth Date,Address\n1,A B,,,\n2,too,few\n3,C D,,,\n");
        assert_eq!(got.records.len(), 2);
        assert_eq!(got.records[1].row_index, 3);
        assert_eq!(got.errors.len(), 1);
        assert_eq!(got.errors[0].row, 2);
    }

    #[test]
    fn custom_mapping_reorders_columns() {
        let mapping = ColumnMapping {
            author_id: "id".into(),
            name: "full_name".into(),
            orcid: "orcid".into(),
            birth_date: "dob".into(),
            address: "addr".into(),
        };
        let got = ingest_reader(
            "dob,addr,orcid,full_name,id,extra\n1983,x,,Olivia Svenson,410003,ignored\n".as_bytes(),
            &mapping,
            Path::new("<test>"),
        )
        .unwrap();
        let r = &got.records[0];
        assert_eq!(r.author_id.as_deref(), Some("410003"));
        assert_eq!(r.name.as_deref(), Some("Olivia Svenson"));
        assert_eq!(r.birth_date_raw.as_deref(), Some("1983"));
    }

    #[test]
    fn empty_emit_writes_header() {
        let mut buf = Vec::new();
        assert_eq!(write_clean(&[], &mut buf).unwrap(), 0);
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "author_id,first,last,orcid,birth_date,zip,state,city,street\n"
        );
    }

    #[test]
    fn full_record_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let mut rec = CleanRecord::empty(1);
        rec.author_id = Some("353035".into());
        rec.given = Some("Alien".into());
        rec.family = Some("Scott".into());
        rec.orcid = Orcid::parse_canonical("0000-0007-0212-2108");
        rec.birth_date = Some(BirthDate::Full(NaiveDate::from_ymd_opt(1965, 10, 25).unwrap()));
        rec.address = Some(StructuredAddress {
            street: Some("145 F. Concord Street".into()),
            city: Some("Orlando".into()),
            state: Some("FL".into()),
            zip: Some("32801".into()),
        });
        assert_eq!(emit_csv(&[rec.clone()], &path).unwrap(), 1);
        let back = read_clean_csv(&path).unwrap();
        assert_eq!(back.len(), 1);
        for f in Field::EMITTED {
            assert_eq!(back[0].value(f), rec.value(f), "{f}");
        }
        // second trip is a fixed point including statuses
        emit_csv(&back, &path).unwrap();
        assert_eq!(read_clean_csv(&path).unwrap(), back);
    }
}
