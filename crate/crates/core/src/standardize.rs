//! Maps parse results onto canonical [`CleanRecord`] form.
//!
//! [`Standardizer::standardize`] performs the structural conversion that every
//! record receives (ISO dates, hyphenated identifiers, structured addresses)
//! and then runs the configured rule list through [`apply_rules`]. Every change
//! cites the id of the rule that made it in the field's status note.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::parsing::{orcid_checksum_ok, DatePrecision, OrcidValidity, ParsedRecord};
use crate::record::{
    BirthDate, CleanRecord, Field, FieldStatus, StatusState, StructuredAddress,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StandardizationRule {
    pub field: Field,
    pub rule_id: &'static str,
    pub description: &'static str,
    /// Whether the rule may be listed in the pipeline configuration.
    pub configurable: bool,
}

const fn rule(field: Field, rule_id: &'static str, description: &'static str, configurable: bool) -> StandardizationRule {
    StandardizationRule { field, rule_id, description, configurable }
}

/// Every rule id that can appear in a status note.
pub const RULES: &[StandardizationRule] = &[
    rule(Field::Name, "strip_titles", "move honorific titles out of the name", false),
    rule(Field::Name, "reject_name", "drop a name consisting only of titles", false),
    rule(Field::Name, "titlecase_names", "title-case all-upper or all-lower name parts", true),
    rule(Field::Name, "reconcile_name_order", "flip an ambiguous two-part name to the cluster orientation", false),
    rule(Field::Name, "family_typo_vote", "replace a family name within edit distance 1 of the cluster majority", false),
    rule(Field::Name, "expand_initial", "expand a given-name initial to the cluster's full given name", false),
    rule(Field::Orcid, "hyphenate_orcid", "insert hyphens into a bare 16-character identifier", false),
    rule(Field::Orcid, "reject_zero_orcid", "drop the all-zero placeholder identifier", false),
    rule(Field::Orcid, "reject_malformed_orcid", "drop an identifier that is not 16 alphanumerics", false),
    rule(Field::Orcid, "orcid_checksum", "drop an identifier failing the MOD 11-2 check (strict mode)", false),
    rule(Field::BirthDate, "iso_date", "render a full date as YYYY-MM-DD", false),
    rule(Field::BirthDate, "year_only", "keep a year-only date internally, withheld from output", false),
    rule(Field::BirthDate, "reject_date", "drop a date that cannot be parsed", false),
    rule(Field::Address, "structure_address", "split a free-form address into zip, state, city and street", false),
    rule(Field::Address, "drop_trailing_tokens", "drop unassigned tokens after the zip", false),
    rule(Field::Address, "reject_address", "drop an address with no recognisable component", false),
    rule(Field::Address, "expand_pb", "expand post-box abbreviations to PO Box", true),
    rule(Field::Address, "expand_abbreviations", "apply the street abbreviation table", true),
    rule(Field::Address, "uppercase_state", "upper-case the state code", true),
    rule(Field::Address, "gazetteer_fill", "fill a missing address component from the gazetteer", false),
    rule(Field::Address, "harmonize_address", "adopt the best-evidenced address of cluster members sharing a zip", false),
];

pub fn rule_by_id(id: &str) -> Option<&'static StandardizationRule> {
    RULES.iter().find(|r| r.rule_id == id)
}

pub fn configurable_rule_ids() -> Vec<&'static str> {
    RULES.iter().filter(|r| r.configurable).map(|r| r.rule_id).collect()
}

pub const DEFAULT_RULES: &[&str] = &["titlecase_names", "expand_pb", "expand_abbreviations", "uppercase_state"];

pub fn default_abbreviations() -> BTreeMap<String, String> {
    [
        ("P.B.", "PO Box"),
        ("St", "Street"),
        ("St.", "Street"),
        ("Ave", "Ave"),
        ("Ave.", "Ave"),
        ("Rd", "Road"),
        ("Rd.", "Road"),
        ("Blvd.", "Blvd"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_owned(), v.to_owned()))
    .collect()
}

const PO_BOX_MARKERS: &[&str] = &["p.b.", "p.b", "pb", "pob", "p.o.b.", "p.o.b", "postbox"];

/// An ordered, validated list of configurable rules plus the abbreviation table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    ids: Vec<&'static str>,
    abbreviations: BTreeMap<String, String>,
}

impl Default for RuleSet {
    fn default() -> Self {
        Self {
            ids: DEFAULT_RULES.to_vec(),
            abbreviations: default_abbreviations(),
        }
    }
}

impl RuleSet {
    pub fn empty() -> Self {
        Self { ids: Vec::new(), abbreviations: BTreeMap::new() }
    }

    pub fn new<S: AsRef<str>>(ids: &[S], abbreviations: BTreeMap<String, String>) -> Result<Self> {
        let mut resolved = Vec::with_capacity(ids.len());
        for id in ids {
            match rule_by_id(id.as_ref()).filter(|r| r.configurable) {
                Some(r) => resolved.push(r.rule_id),
                None => {
                    return Err(Error::UnknownRule {
                        id: id.as_ref().to_owned(),
                        valid: configurable_rule_ids(),
                    })
                }
            }
        }
        Ok(Self { ids: resolved, abbreviations })
    }

    pub fn ids(&self) -> &[&'static str] {
        &self.ids
    }

    fn abbreviation(&self, token: &str) -> Option<&str> {
        self.abbreviations
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(token))
            .map(|(_, v)| v.as_str())
    }
}

/// Applies configurable rules in list order. Re-application is a no-op.
pub fn apply_rules(record: &CleanRecord, rules: &RuleSet) -> CleanRecord {
    let mut out = record.clone();
    for id in rules.ids() {
        match *id {
            "titlecase_names" => titlecase_names(&mut out),
            "expand_pb" => rewrite_street(&mut out, "expand_pb", |t| {
                PO_BOX_MARKERS
                    .contains(&t.to_lowercase().as_str())
                    .then(|| "PO Box".to_owned())
            }),
            "expand_abbreviations" => rewrite_street(&mut out, "expand_abbreviations", |t| {
                rules.abbreviation(t).map(str::to_owned)
            }),
            "uppercase_state" => uppercase_state(&mut out),
            other => unreachable!("rule set holds only configurable ids, got {other}"),
        }
    }
    out
}

fn titlecase_names(rec: &mut CleanRecord) {
    let mut changed = Vec::new();
    for part in [&mut rec.given, &mut rec.middle, &mut rec.family].into_iter().flatten() {
        let fixed = titlecase(part);
        if fixed != *part {
            changed.push(format!("{part} -> {fixed}"));
            *part = fixed;
        }
    }
    if !changed.is_empty() {
        rec.status_mut(Field::Name)
            .record(StatusState::Corrected, "titlecase_names", &changed.join(", "));
    }
}

fn titlecase(text: &str) -> String {
    text.split(' ')
        .map(|word| {
            let letters: Vec<char> = word.chars().filter(|c| c.is_alphabetic()).collect();
            let uniform = letters.len() > 1
                && (letters.iter().all(|c| c.is_uppercase()) || letters.iter().all(|c| c.is_lowercase()));
            if !uniform && !letters.iter().all(|c| c.is_lowercase()) {
                return word.to_owned();
            }
            let mut out = String::with_capacity(word.len());
            let mut start = true;
            for c in word.chars() {
                if start && c.is_alphabetic() {
                    out.extend(c.to_uppercase());
                    start = false;
                } else {
                    out.extend(c.to_lowercase());
                    if c == '-' || c == '\'' {
                        start = true;
                    }
                }
            }
            out
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn rewrite_street(rec: &mut CleanRecord, rule_id: &str, map: impl Fn(&str) -> Option<String>) {
    let Some(street) = rec.address.as_mut().and_then(|a| a.street.as_mut()) else {
        return;
    };
    let rewritten: Vec<String> = street
        .split(' ')
        .map(|t| map(t).unwrap_or_else(|| t.to_owned()))
        .collect();
    let rewritten = rewritten.join(" ");
    if rewritten != *street {
        let detail = format!("{street} -> {rewritten}");
        *street = rewritten;
        rec.status_mut(Field::Address).record(StatusState::Corrected, rule_id, &detail);
    }
}

fn uppercase_state(rec: &mut CleanRecord) {
    let Some(state) = rec.address.as_mut().and_then(|a| a.state.as_mut()) else {
        return;
    };
    let upper = state.to_uppercase();
    if upper != *state {
        let detail = format!("{state} -> {upper}");
        *state = upper;
        rec.status_mut(Field::Address).record(StatusState::Corrected, "uppercase_state", &detail);
    }
}

#[derive(Debug, Clone, Default)]
pub struct Standardizer {
    pub rules: RuleSet,
    pub strict_orcid: bool,
}

impl Standardizer {
    pub fn new(rules: RuleSet, strict_orcid: bool) -> Self {
        Self { rules, strict_orcid }
    }

    pub fn standardize(&self, parsed: &ParsedRecord) -> CleanRecord {
        let mut rec = CleanRecord::empty(parsed.row_index);

        rec.author_id = parsed.author_id.clone();
        rec.statuses.insert(Field::AuthorId, presence(rec.author_id.is_some()));

        let name_status = match &parsed.name {
            None => FieldStatus::missing(),
            Some(name) if name.is_failure() => {
                rec.titles = name.titles.clone();
                FieldStatus::with_rule(StatusState::Invalid, "reject_name", "no name tokens besides titles")
            }
            Some(name) => {
                rec.titles = name.titles.clone();
                rec.given = name.given.clone();
                rec.middle = name.middle.clone();
                rec.family = name.family.clone();
                rec.name_order = name.order_confidence;
                if name.titles.is_empty() {
                    FieldStatus::present()
                } else {
                    FieldStatus::with_rule(StatusState::Corrected, "strip_titles", &name.titles.join(" "))
                }
            }
        };
        rec.statuses.insert(Field::Name, name_status);

        let orcid_status = match &parsed.orcid {
            None => FieldStatus::missing(),
            Some(p) => match p.validity {
                OrcidValidity::CanonicalHyphenated => {
                    rec.orcid = p.canonical();
                    FieldStatus::present()
                }
                OrcidValidity::Reformatted => {
                    rec.orcid = p.canonical();
                    FieldStatus::with_rule(StatusState::Corrected, "hyphenate_orcid", "")
                }
                OrcidValidity::AllZero => {
                    FieldStatus::with_rule(StatusState::Invalid, "reject_zero_orcid", "all-zero placeholder")
                }
                OrcidValidity::StructurallyInvalid => {
                    FieldStatus::with_rule(StatusState::Invalid, "reject_malformed_orcid", "")
                }
            },
        };
        rec.statuses.insert(Field::Orcid, orcid_status);

        let date_status = match &parsed.birth_date {
            None => FieldStatus::missing(),
            Some(d) => match d.precision {
                DatePrecision::Full => {
                    rec.birth_date = d.date().map(BirthDate::Full);
                    if d.source_format == "YYYY-MM-DD" {
                        FieldStatus::present()
                    } else {
                        FieldStatus::with_rule(StatusState::Corrected, "iso_date", &format!("from {}", d.source_format))
                    }
                }
                DatePrecision::YearOnly => {
                    rec.birth_date = d.year.map(BirthDate::YearOnly);
                    FieldStatus::with_rule(StatusState::Present, "year_only", "")
                }
                DatePrecision::Unparseable => FieldStatus::with_rule(
                    StatusState::Invalid,
                    "reject_date",
                    d.note.as_deref().unwrap_or(""),
                ),
            },
        };
        rec.statuses.insert(Field::BirthDate, date_status);

        let address_status = match &parsed.address {
            None => FieldStatus::missing(),
            Some(a) => {
                let structured = StructuredAddress {
                    street: (!a.street_tokens.is_empty()).then(|| a.street_tokens.join(" ")),
                    city: a.city.clone(),
                    state: a.state.clone(),
                    zip: a.zip_candidate.clone(),
                };
                if structured.is_empty() {
                    FieldStatus::with_rule(StatusState::Invalid, "reject_address", "")
                } else {
                    rec.address = Some(structured);
                    let mut status = if a.format == "canonical" {
                        FieldStatus::present()
                    } else {
                        FieldStatus::with_rule(StatusState::Corrected, "structure_address", &a.format)
                    };
                    if !a.trailing.is_empty() {
                        status.record(StatusState::Corrected, "drop_trailing_tokens", &a.trailing.join(" "));
                    }
                    status
                }
            }
        };
        rec.statuses.insert(Field::Address, address_status);

        self.finish(rec)
    }

    /// Re-standardizes an already clean record; canonical records come back unchanged.
    pub fn restandardize(&self, record: &CleanRecord) -> CleanRecord {
        let mut rec = record.clone();
        if let Some(addr) = rec.address.as_mut() {
            if addr.zip.as_deref().is_some_and(|z| !crate::record::is_zip(z)) {
                addr.zip = None;
                rec.status_mut(Field::Address)
                    .record(StatusState::Corrected, "structure_address", "zip not five digits");
            }
        }
        if rec.address.as_ref().is_some_and(StructuredAddress::is_empty) {
            rec.address = None;
            *rec.status_mut(Field::Address) = FieldStatus::with_rule(StatusState::Invalid, "reject_address", "");
        }
        self.finish(rec)
    }

    fn finish(&self, mut rec: CleanRecord) -> CleanRecord {
        if self.strict_orcid && rec.orcid.as_ref().is_some_and(|o| !orcid_checksum_ok(o)) {
            rec.orcid = None;
            rec.status_mut(Field::Orcid)
                .record(StatusState::Invalid, "orcid_checksum", "MOD 11-2 check failed");
        }
        apply_rules(&rec, &self.rules)
    }
}

fn presence(present: bool) -> FieldStatus {
    if present {
        FieldStatus::present()
    } else {
        FieldStatus::missing()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parsing::{parse_record, Lexicons};
    use crate::record::RawRecord;

    fn clean(raw: RawRecord) -> CleanRecord {
        Standardizer::default().standardize(&parse_record(&raw, &Lexicons::default()))
    }

    #[test]
    fn rule_ids_are_unique() {
        let mut ids: Vec<_> = RULES.iter().map(|r| r.rule_id).collect();
        ids.sort();
        let n = ids.len();
        ids.dedup();
        assert_eq!(ids.len(), n);
    }

    #[test]
    fn zero_orcid_and_dot_date() {
        let r = clean(RawRecord::new(
            2,
            Some("353035"),
            Some("Dr. Alien Scott"),
            Some("0000-0000-0000-0000"),
            Some("25.10.1965"),
            Some("Concord Street, 32801 145F"),
        ));
        assert_eq!(r.given.as_deref(), Some("Alien"));
        assert_eq!(r.family.as_deref(), Some("Scott"));
        assert_eq!(r.titles, ["Dr."]);
        assert_eq!(r.orcid, None);
        assert_eq!(r.status(Field::Orcid).unwrap().state, StatusState::Invalid);
        assert_eq!(r.value(Field::BirthDate).as_deref(), Some("1965-10-25"));
        assert_eq!(r.value(Field::Address).as_deref(), Some("32801; 145F Concord Street"));
        assert_eq!(r.status(Field::Address).unwrap().state, StatusState::Corrected);
    }

    #[test]
    fn unparseable_date_is_invalid() {
        let r = clean(RawRecord::new(3, Some("353035"), Some("Alien William Scott"), None, Some("652510"), None));
        assert_eq!(r.given.as_deref(), Some("Alien"));
        assert_eq!(r.middle.as_deref(), Some("William"));
        assert_eq!(r.birth_date, None);
        let st = r.status(Field::BirthDate).unwrap();
        assert_eq!(st.state, StatusState::Invalid);
        assert_eq!(st.rule_ids(), ["reject_date"]);
    }

    #[test]
    fn year_only_is_kept_but_not_emitted() {
        let r = clean(RawRecord::new(8, None, None, None, Some("1983"), None));
        assert_eq!(r.birth_date, Some(BirthDate::YearOnly(1983)));
        assert_eq!(r.value(Field::BirthDate), None);
    }

    #[test]
    fn po_box_expanded() {
        let r = clean(RawRecord::new(7, None, None, None, None, Some("745-7801 P.B. Las Vegas 29502")));
        let a = r.address.as_ref().unwrap();
        assert_eq!(a.street.as_deref(), Some("745-7801 PO Box"));
        assert_eq!(a.city.as_deref(), Some("Las Vegas"));
        assert!(r.status(Field::Address).unwrap().rule_ids().contains(&"expand_pb"));
    }

    #[test]
    fn empty_rule_list_is_identity() {
        let r = Standardizer::new(RuleSet::empty(), false).standardize(&parse_record(
            &RawRecord::new(7, None, Some("OLIVIA svenson"), None, None, Some("745-7801 P.B. Las Vegas 29502")),
            &Lexicons::default(),
        ));
        assert_eq!(apply_rules(&r, &RuleSet::empty()), r);
        assert_eq!(r.address.unwrap().street.as_deref(), Some("745-7801 P.B."));
        assert_eq!(r.given.as_deref(), Some("OLIVIA"));
    }

    #[test]
    fn expand_pb_alone() {
        let rules = RuleSet::new(&["expand_pb"], BTreeMap::new()).unwrap();
        let r = Standardizer::new(rules, false).standardize(&parse_record(
            &RawRecord::new(7, None, None, None, None, Some("745-7801 P.B. Las Vegas 29502")),
            &Lexicons::default(),
        ));
        assert!(r.address.unwrap().street.unwrap().contains("PO Box"));
    }

    #[test]
    fn titlecase() {
        let r = clean(RawRecord::new(1, None, Some("OLIVIA o'neil-svenson"), None, None, None));
        assert_eq!(r.given.as_deref(), Some("Olivia"));
        assert_eq!(r.family.as_deref(), Some("O'Neil-Svenson"));
        let r = clean(RawRecord::new(1, None, Some("McDonald A."), None, None, None));
        assert_eq!(r.given.as_deref(), Some("McDonald"));
    }

    #[test]
    fn unknown_rule_lists_valid_ids() {
        let err = RuleSet::new(&["expand_pb", "nope"], BTreeMap::new()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("nope"));
        for id in configurable_rule_ids() {
            assert!(msg.contains(id));
        }
        assert!(RuleSet::new(&["strip_titles"], BTreeMap::new()).is_err());
    }

    #[test]
    fn strict_orcid_drops_bad_checksum() {
        let raw = RawRecord::new(1, None, None, Some("0450-1254-3598-F156"), None, None);
        let parsed = parse_record(&raw, &Lexicons::default());
        let lax = Standardizer::default().standardize(&parsed);
        assert!(lax.orcid.is_some());
        let strict = Standardizer::new(RuleSet::default(), true).standardize(&parsed);
        assert_eq!(strict.orcid, None);
        assert_eq!(strict.status(Field::Orcid).unwrap().state, StatusState::Invalid);
    }

    #[test]
    fn canonical_record_restandardizes_unchanged() {
        let r = clean(RawRecord::new(
            1,
            Some("353035"),
            Some("Alien Scott"),
            Some("0000-0007-0212-2108"),
            Some("10/25/1965"),
            Some("145 F. Concord Street, Orlando, 32801"),
        ));
        let s = Standardizer::default();
        assert_eq!(s.restandardize(&r), r);
        assert_eq!(apply_rules(&apply_rules(&r, &s.rules), &s.rules), r);
    }
}
