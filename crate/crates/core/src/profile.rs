//! Quality metrics and issue lists over raw or cleansed records.
//!
//! Completeness is the share of records with a value. Validity is the share of
//! present values passing the field's format rule, and uniformity is the share
//! of present values written in the field's most common format. The duplicate
//! ratio and consistency violations need cluster information and are zero when
//! profiling without it.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;

use crate::enrich::{normalize_city, Gazetteer};
use crate::error::{Error, Result};
use crate::matching::DuplicateCluster;
use crate::parsing::{
    orcid_checksum_ok, parse_address, parse_date, parse_name, parse_orcid, DatePrecision, Lexicons, OrcidValidity,
};
use crate::record::{is_canonical_orcid, is_zip, CleanRecord, Field, IssueKind, NameOrder, QualityIssue, RawRecord};

/// Read access to the rendered value of each field.
pub trait FieldValues: Sync {
    fn row_index(&self) -> usize;
    fn field_value(&self, field: Field) -> Option<String>;
}

impl FieldValues for RawRecord {
    fn row_index(&self) -> usize {
        self.row_index
    }

    fn field_value(&self, field: Field) -> Option<String> {
        self.get(field).map(str::to_owned)
    }
}

impl FieldValues for CleanRecord {
    fn row_index(&self) -> usize {
        self.row_index
    }

    fn field_value(&self, field: Field) -> Option<String> {
        self.value(field)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub valid: bool,
    /// Format class used for uniformity.
    pub format: String,
}

/// Field schema plus a validity test and format classifier per field.
pub trait FormatRules: Sync {
    fn fields(&self) -> &[Field];
    fn check(&self, field: Field, value: &str, record: &dyn FieldValues) -> Check;
}

/// Rules for the five source columns, using the field parsers.
#[derive(Debug, Clone, Default)]
pub struct SourceRules {
    pub lexicons: Lexicons,
    pub strict_orcid: bool,
}

impl FormatRules for SourceRules {
    fn fields(&self) -> &[Field] {
        &Field::SOURCE
    }

    fn check(&self, field: Field, value: &str, _record: &dyn FieldValues) -> Check {
        match field {
            Field::AuthorId => Check { valid: is_digits(value), format: mask(value) },
            Field::Name => {
                let p = parse_name(value, &self.lexicons);
                let order = match p.order_confidence {
                    NameOrder::FamilyFirst => "F, G",
                    NameOrder::Ambiguous => "N N",
                    NameOrder::GivenFirst if p.middle.is_some() => "G M F",
                    NameOrder::GivenFirst if p.given.is_some() => "G F",
                    NameOrder::GivenFirst => "F",
                };
                let format = if p.titles.is_empty() { order.to_owned() } else { format!("T {order}") };
                Check { valid: !p.is_failure(), format }
            }
            Field::Orcid => {
                let p = parse_orcid(value);
                let well_formed = matches!(p.validity, OrcidValidity::CanonicalHyphenated | OrcidValidity::Reformatted);
                let checksum = !self.strict_orcid || p.canonical().is_some_and(|o| orcid_checksum_ok(&o));
                Check { valid: well_formed && checksum, format: orcid_mask(value) }
            }
            Field::BirthDate => {
                let p = parse_date(value);
                Check { valid: p.precision != DatePrecision::Unparseable, format: p.source_format }
            }
            Field::Address => {
                let p = parse_address(value, &self.lexicons);
                Check { valid: p.is_recognized(), format: p.format }
            }
            _ => Check { valid: true, format: mask(value) },
        }
    }
}

/// Rules for the nine cleansed CSV columns. With a gazetteer, a city or state
/// contradicting the record's known zip is invalid.
#[derive(Debug, Clone, Default)]
pub struct EmittedRules {
    pub gazetteer: Option<Gazetteer>,
}

impl FormatRules for EmittedRules {
    fn fields(&self) -> &[Field] {
        &Field::EMITTED
    }

    fn check(&self, field: Field, value: &str, record: &dyn FieldValues) -> Check {
        let place = || {
            let zip = record.field_value(Field::Zip)?;
            self.gazetteer.as_ref()?.place(&zip).cloned()
        };
        match field {
            Field::AuthorId => Check { valid: is_digits(value), format: mask(value) },
            Field::First | Field::Last | Field::City => {
                let valid = value.chars().all(|c| c.is_alphabetic() || " -'.".contains(c))
                    && value.chars().any(char::is_alphabetic)
                    && (field != Field::City
                        || place().is_none_or(|p| normalize_city(&p.city) == normalize_city(value)));
                let format = if is_titlecase(value) { "Title".to_owned() } else { mask(value) };
                Check { valid, format }
            }
            Field::Orcid => Check {
                valid: is_canonical_orcid(value) && value.bytes().any(|b| b.is_ascii_alphanumeric() && b != b'0'),
                format: orcid_mask(value),
            },
            Field::BirthDate => Check {
                valid: NaiveDate::parse_from_str(value, "%Y-%m-%d").is_ok() && value.len() == 10,
                format: "YYYY-MM-DD".into(),
            },
            Field::Zip => Check { valid: is_zip(value), format: mask(value) },
            Field::State => Check {
                valid: value.len() == 2
                    && value.bytes().all(|b| b.is_ascii_uppercase())
                    && place().is_none_or(|p| p.state == value),
                format: mask(value),
            },
            Field::Street => {
                let first_has_digit = value.split(' ').next().is_some_and(|t| t.chars().any(|c| c.is_ascii_digit()));
                Check {
                    valid: value.chars().any(char::is_alphanumeric),
                    format: if first_has_digit { "house street" } else { "street" }.into(),
                }
            }
            _ => Check { valid: true, format: mask(value) },
        }
    }
}

fn is_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

/// Digits become `9`, letters `A`; everything else is kept.
fn mask(s: &str) -> String {
    s.chars()
        .map(|c| match c {
            '0'..='9' => '9',
            c if c.is_alphabetic() => 'A',
            c => c,
        })
        .collect()
}

/// The final check character may be a letter, so all alphanumerics become `X`.
fn orcid_mask(s: &str) -> String {
    s.chars().map(|c| if c.is_alphanumeric() { 'X' } else { c }).collect()
}

/// Every word starts upper-case and no multi-letter word is all upper-case.
fn is_titlecase(s: &str) -> bool {
    s.split(' ').all(|w| {
        let letters: Vec<char> = w.chars().filter(|c| c.is_alphabetic()).collect();
        letters.first().is_some_and(|c| c.is_uppercase()) && !(letters.len() > 1 && letters.iter().all(|c| c.is_uppercase()))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldMetrics {
    pub field: Field,
    pub total: usize,
    pub present: usize,
    pub valid: usize,
    pub modal_format: Option<String>,
    pub modal_count: usize,
    pub completeness: f64,
    pub validity: f64,
    pub uniformity: f64,
    /// Count per format class, in order of first appearance.
    pub formats: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityProfile {
    pub record_count: usize,
    pub fields: Vec<FieldMetrics>,
    pub duplicate_records: usize,
    pub duplicate_ratio: f64,
    pub consistency_violations: usize,
    pub issues: Vec<QualityIssue>,
}

impl QualityProfile {
    pub fn field(&self, field: Field) -> Option<&FieldMetrics> {
        self.fields.iter().find(|m| m.field == field)
    }

    pub fn issue_count(&self, kind: IssueKind) -> usize {
        self.issues.iter().filter(|i| i.kind == kind).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes") + "\n"
    }

    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "records                 {}", self.record_count);
        let _ = writeln!(out, "duplicate ratio         {:.4} ({} records)", self.duplicate_ratio, self.duplicate_records);
        let _ = writeln!(out, "consistency violations  {}", self.consistency_violations);
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:<12} {:>9} {:>12} {:>9} {:>10} {:>10}  modal format",
            "field", "present", "completeness", "valid", "validity", "uniformity"
        );
        for m in &self.fields {
            let _ = writeln!(
                out,
                "{:<12} {:>9} {:>12.4} {:>9} {:>10.4} {:>10.4}  {}",
                m.field.as_str(),
                format!("{}/{}", m.present, m.total),
                m.completeness,
                format!("{}/{}", m.valid, m.present),
                m.validity,
                m.uniformity,
                m.modal_format.as_deref().unwrap_or("-"),
            );
        }
        let _ = writeln!(out);
        for kind in IssueKind::ALL {
            let _ = writeln!(out, "{:<24} {}", format!("{kind:?}"), self.issue_count(kind));
        }
        out
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Profiles `records` without cluster information.
pub fn profile<R: FieldValues>(records: &[R], rules: &dyn FormatRules) -> QualityProfile {
    profile_with_clusters(records, rules, &[])
}

/// Profiles `records`; `clusters` supply the duplicate and consistency checks.
pub fn profile_with_clusters<R: FieldValues>(
    records: &[R],
    rules: &dyn FormatRules,
    clusters: &[DuplicateCluster],
) -> QualityProfile {
    let fields = rules.fields();
    let checks: Vec<Vec<Option<Check>>> = records
        .par_iter()
        .map(|r| {
            fields
                .iter()
                .map(|f| r.field_value(*f).map(|v| rules.check(*f, &v, r)))
                .collect()
        })
        .collect();

    let mut metrics = Vec::with_capacity(fields.len());
    let mut issues = Vec::new();
    for (k, &field) in fields.iter().enumerate() {
        let mut formats: Vec<(String, usize)> = Vec::new();
        let (mut present, mut valid) = (0, 0);
        for (r, row) in records.iter().zip(&checks) {
            match &row[k] {
                None => issues.push(issue(r.row_index(), field, IssueKind::MissingValue, "no value".into())),
                Some(c) => {
                    present += 1;
                    if c.valid {
                        valid += 1;
                    } else {
                        let value = r.field_value(field).unwrap_or_default();
                        issues.push(issue(r.row_index(), field, IssueKind::IncorrectValue, format!("cannot read {value:?}")));
                    }
                    match formats.iter_mut().find(|(f, _)| *f == c.format) {
                        Some((_, n)) => *n += 1,
                        None => formats.push((c.format.clone(), 1)),
                    }
                }
            }
        }
        let modal = formats
            .iter()
            .fold(None::<&(String, usize)>, |best, cur| match best {
                Some(b) if b.1 >= cur.1 => Some(b),
                _ => Some(cur),
            })
            .cloned();
        if let Some((modal_format, _)) = &modal {
            for (r, row) in records.iter().zip(&checks) {
                if let Some(c) = &row[k] {
                    if c.format != *modal_format {
                        issues.push(issue(
                            r.row_index(),
                            field,
                            IssueKind::NonUniformFormat,
                            format!("{} instead of {modal_format}", c.format),
                        ));
                    }
                }
            }
        }
        let modal_count = modal.as_ref().map_or(0, |m| m.1);
        metrics.push(FieldMetrics {
            field,
            total: records.len(),
            present,
            valid,
            modal_format: modal.map(|m| m.0),
            modal_count,
            completeness: ratio(present, records.len()),
            validity: ratio(valid, present),
            uniformity: ratio(modal_count, present),
            formats,
        });
    }

    let (duplicate_records, consistency_violations) = cluster_issues(records, fields, clusters, &mut issues);
    issues.sort();
    QualityProfile {
        record_count: records.len(),
        fields: metrics,
        duplicate_records,
        duplicate_ratio: if records.is_empty() { 0.0 } else { duplicate_records as f64 / records.len() as f64 },
        consistency_violations,
        issues,
    }
}

fn issue(row_index: usize, field: Field, kind: IssueKind, detail: String) -> QualityIssue {
    QualityIssue { row_index, field, kind, detail }
}

fn cluster_issues<R: FieldValues>(
    records: &[R],
    fields: &[Field],
    clusters: &[DuplicateCluster],
    issues: &mut Vec<QualityIssue>,
) -> (usize, usize) {
    let by_row: BTreeMap<usize, &R> = records.iter().map(|r| (r.row_index(), r)).collect();
    let record_field = fields[0];
    let (mut duplicates, mut inconsistent) = (0, 0);
    for c in clusters.iter().filter(|c| c.member_rows.len() > 1) {
        let members: Vec<&R> = c.member_rows.iter().filter_map(|r| by_row.get(r).copied()).collect();
        if members.len() < 2 {
            continue;
        }
        let rows = c.member_rows.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        for m in &members {
            duplicates += 1;
            issues.push(issue(m.row_index(), record_field, IssueKind::Duplicate, format!("cluster {rows}")));
        }
        if !fields.contains(&Field::BirthDate) {
            continue;
        }
        let dates: Vec<(usize, NaiveDate)> = members
            .iter()
            .filter_map(|m| {
                let v = m.field_value(Field::BirthDate)?;
                parse_date(&v).date().map(|d| (m.row_index(), d))
            })
            .collect();
        let distinct: std::collections::BTreeSet<NaiveDate> = dates.iter().map(|(_, d)| *d).collect();
        if distinct.len() > 1 {
            for (row, d) in &dates {
                inconsistent += 1;
                issues.push(issue(
                    *row,
                    Field::BirthDate,
                    IssueKind::Inconsistency,
                    format!("{d} disagrees with cluster {rows}"),
                ));
            }
        }
    }
    (duplicates, inconsistent)
}

/// The issue list of [`profile_with_clusters`].
pub fn detect_violations<R: FieldValues>(
    records: &[R],
    rules: &dyn FormatRules,
    clusters: &[DuplicateCluster],
) -> Vec<QualityIssue> {
    profile_with_clusters(records, rules, clusters).issues
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldDelta {
    pub field: Field,
    pub completeness: f64,
    pub validity: f64,
    pub uniformity: f64,
}

/// Signed differences `after - before`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileDelta {
    pub record_count: i64,
    pub fields: Vec<FieldDelta>,
    pub duplicate_ratio: f64,
    pub consistency_violations: i64,
    pub regression: bool,
    /// Metrics that worsened, as `field.metric`.
    pub regressions: Vec<String>,
}

impl ProfileDelta {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("delta serializes") + "\n"
    }
}

/// Compares two profiles over the same field schema. Lower quality ratios or
/// higher duplicate and inconsistency figures count as regressions.
pub fn compare_profiles(before: &QualityProfile, after: &QualityProfile) -> Result<ProfileDelta> {
    let names = |p: &QualityProfile| p.fields.iter().map(|m| m.field.to_string()).collect::<Vec<_>>();
    if names(before) != names(after) {
        return Err(Error::SchemaMismatch { before: names(before), after: names(after) });
    }
    let mut regressions = Vec::new();
    let mut fields = Vec::new();
    for (b, a) in before.fields.iter().zip(&after.fields) {
        let d = FieldDelta {
            field: b.field,
            completeness: a.completeness - b.completeness,
            validity: a.validity - b.validity,
            uniformity: a.uniformity - b.uniformity,
        };
        for (metric, delta) in [("completeness", d.completeness), ("validity", d.validity), ("uniformity", d.uniformity)] {
            if delta < 0.0 {
                regressions.push(format!("{}.{metric}", b.field));
            }
        }
        fields.push(d);
    }
    let duplicate_ratio = after.duplicate_ratio - before.duplicate_ratio;
    if duplicate_ratio > 0.0 {
        regressions.push("duplicate_ratio".into());
    }
    let consistency_violations = after.consistency_violations as i64 - before.consistency_violations as i64;
    if consistency_violations > 0 {
        regressions.push("consistency_violations".into());
    }
    Ok(ProfileDelta {
        record_count: after.record_count as i64 - before.record_count as i64,
        fields,
        duplicate_ratio,
        consistency_violations,
        regression: !regressions.is_empty(),
        regressions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    use crate::record::Orcid;

    fn raw(row: usize, [a, n, o, d, addr]: [&str; 5]) -> RawRecord {
        RawRecord::new(row, Some(a), Some(n), Some(o), Some(d), Some(addr))
    }

    #[test]
    fn empty_dataset_is_vacuous() {
        let p = profile::<RawRecord>(&[], &SourceRules::default());
        assert_eq!(p.record_count, 0);
        assert!(p.fields.iter().all(|m| m.completeness == 1.0 && m.validity == 1.0 && m.uniformity == 1.0));
        assert!(p.issues.is_empty());
    }

    #[test]
    fn absent_column_has_zero_completeness_and_vacuous_ratios() {
        let recs = [raw(1, ["1", "Ann Lee", "", "", ""]), raw(2, ["2", "Bob Kay", "", "", ""])];
        let p = profile(&recs, &SourceRules::default());
        let m = p.field(Field::Orcid).unwrap();
        assert_eq!((m.present, m.completeness, m.validity, m.uniformity), (0, 0.0, 1.0, 1.0));
        assert_eq!(p.issue_count(IssueKind::MissingValue), 6);
    }

    #[test]
    fn unreadable_date_is_incorrect() {
        let recs = [raw(3, ["353035", "Alien William Scott", "0000-0007-0212-2108", "652510", "25 Concord 32801 Street"])];
        let issues = detect_violations(&recs, &SourceRules::default(), &[]);
        assert!(issues
            .iter()
            .any(|i| i.row_index == 3 && i.field == Field::BirthDate && i.kind == IssueKind::IncorrectValue));
    }

    #[test]
    fn canonical_record_has_no_issues() {
        let mut r = CleanRecord::empty(1);
        r.author_id = Some("353035".into());
        r.given = Some("Alien".into());
        r.family = Some("Scott".into());
        r.orcid = Orcid::parse_canonical("0000-0007-0212-2108");
        r.birth_date = Some(crate::record::BirthDate::Full(NaiveDate::from_ymd_opt(1965, 10, 25).unwrap()));
        r.address = Some(crate::record::StructuredAddress {
            street: Some("145 F. Concord Street".into()),
            city: Some("Orlando".into()),
            state: Some("FL".into()),
            zip: Some("32801".into()),
        });
        assert!(detect_violations(&[r.clone()], &EmittedRules::default(), &[]).is_empty());
        assert!(detect_violations(&[r], &SourceRules::default(), &[]).is_empty());
    }

    #[test]
    fn gazetteer_contradiction_is_invalid() {
        let g = Gazetteer::from_entries([(
            "32801".to_owned(),
            crate::enrich::Place { city: "Orlando".into(), state: "FL".into() },
        )]);
        let mut r = CleanRecord::empty(1);
        r.address = Some(crate::record::StructuredAddress {
            city: Some("Tampa".into()),
            state: Some("FL".into()),
            zip: Some("32801".into()),
            street: None,
        });
        let p = profile(&[r], &EmittedRules { gazetteer: Some(g) });
        assert_eq!(p.field(Field::City).unwrap().valid, 0);
        assert_eq!(p.field(Field::State).unwrap().valid, 1);
    }

    #[test]
    fn modal_tie_goes_to_first_format() {
        let recs = [raw(1, ["", "", "", "10/25/1965", ""]), raw(2, ["", "", "", "25.10.1965", ""])];
        let p = profile(&recs, &SourceRules::default());
        let m = p.field(Field::BirthDate).unwrap();
        assert_eq!(m.modal_format.as_deref(), Some("MM/DD/YYYY"));
        assert_eq!(m.modal_count, 1);
        assert_eq!(p.issues.iter().filter(|i| i.kind == IssueKind::NonUniformFormat).map(|i| i.row_index).collect::<Vec<_>>(), [2]);
    }

    #[test]
    fn cluster_issues_and_delta() {
        let recs = [
            raw(1, ["1", "Ann Lee", "", "10/25/1965", ""]),
            raw(2, ["1", "Ann Lee", "", "25.10.1956", ""]),
            raw(3, ["2", "Bob Kay", "", "", ""]),
        ];
        let clusters = [
            DuplicateCluster { member_rows: vec![1, 2], evidence: vec![] },
            DuplicateCluster { member_rows: vec![3], evidence: vec![] },
        ];
        let p = profile_with_clusters(&recs, &SourceRules::default(), &clusters);
        assert_eq!(p.duplicate_records, 2);
        assert_eq!(p.consistency_violations, 2);
        assert_eq!(p.issue_count(IssueKind::Duplicate), 2);

        let same = compare_profiles(&p, &p).unwrap();
        assert!(!same.regression);
        assert!(same.fields.iter().all(|d| d.completeness == 0.0 && d.validity == 0.0 && d.uniformity == 0.0));

        let mut worse = p.clone();
        worse.fields[0].completeness -= 0.1;
        let d = compare_profiles(&p, &worse).unwrap();
        assert!(d.regression);
        assert_eq!(d.regressions, ["author_id.completeness"]);

        let emitted = profile::<CleanRecord>(&[], &EmittedRules::default());
        assert!(matches!(compare_profiles(&p, &emitted), Err(Error::SchemaMismatch { .. })));
    }

    #[test]
    fn profiling_is_read_only_and_repeatable() {
        let recs = vec![raw(1, ["1", "Dr. Ann Lee", "0000000702122108", "1983", "12 Ford Ave 32801"])];
        let copy = recs.clone();
        let a = profile(&recs, &SourceRules::default());
        let b = profile(&recs, &SourceRules::default());
        assert_eq!(a, b);
        assert_eq!(recs, copy);
        assert_eq!(a.to_json(), b.to_json());
    }
}
