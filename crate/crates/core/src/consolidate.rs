//! Reconciles the members of each duplicate cluster and merges them into one
//! golden record.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{levenshtein, DuplicateCluster};
use crate::record::{BirthDate, CleanRecord, Field, FieldStatus, NameOrder, StatusState, StructuredAddress};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurvivorshipRule {
    /// Most frequent present value.
    #[default]
    MajorityNonNull,
    /// Value of the member with the most populated fields.
    MostCompleteRecord,
    /// Longest rendered value.
    LongestValue,
}

/// Per-field survivorship rules; ties always go to the lowest row index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurvivorshipPolicy {
    pub default: SurvivorshipRule,
    pub fields: BTreeMap<Field, SurvivorshipRule>,
}

impl SurvivorshipPolicy {
    pub fn rule(&self, field: Field) -> SurvivorshipRule {
        self.fields.get(&field).copied().unwrap_or(self.default)
    }

    pub fn validate(&self) -> Result<()> {
        match self.fields.keys().find(|f| !Field::SOURCE.contains(f)) {
            Some(f) => Err(Error::Config(format!(
                "survivorship rules apply to author_id, name, orcid, birth_date and address, not {f}"
            ))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GoldenRecord {
    pub record: CleanRecord,
    pub member_rows: Vec<usize>,
    /// Rows whose value agrees with the surviving value, per source field.
    pub provenance: BTreeMap<Field, Vec<usize>>,
}

/// Outcome of orienting one member's name against the cluster reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Kept,
    Flipped,
    Unresolved,
}

/// Aligns name orientation and spelling across cluster members.
///
/// The reference family name is the majority among members whose order is
/// known; a wholly ambiguous cluster falls back to the token shared by most
/// members. Members are returned sorted by row index.
pub fn reconcile_names(members: &[CleanRecord]) -> (Vec<CleanRecord>, BTreeMap<usize, Orientation>) {
    let mut out: Vec<CleanRecord> = members.to_vec();
    out.sort_by_key(|r| r.row_index);
    let mut orientation = BTreeMap::new();

    let Some(reference) = reference_family(&out) else {
        for rec in &mut out {
            let unresolved = rec.name_order == NameOrder::Ambiguous;
            if unresolved && members.len() > 1 {
                let state = rec.status(Field::Name).map_or(StatusState::Present, |s| s.state);
                rec.status_mut(Field::Name)
                    .record(state, "reconcile_name_order", "no shared token, left as parsed");
            }
            orientation.insert(rec.row_index, if unresolved { Orientation::Unresolved } else { Orientation::Kept });
        }
        return (out, orientation);
    };

    for rec in &mut out {
        let mut o = Orientation::Kept;
        let family_ok = rec.family.as_deref() == Some(reference.as_str());
        if !family_ok && rec.name_order == NameOrder::Ambiguous && rec.given.as_deref() == Some(reference.as_str()) {
            let before = rec.display_name().unwrap_or_default();
            std::mem::swap(&mut rec.given, &mut rec.family);
            let after = rec.display_name().unwrap_or_default();
            rec.status_mut(Field::Name)
                .record(StatusState::Corrected, "reconcile_name_order", &format!("{before} -> {after}"));
            o = Orientation::Flipped;
        }
        if let Some(family) = rec.family.clone() {
            if family != reference && levenshtein(&family, &reference) <= 1 {
                rec.family = Some(reference.clone());
                rec.status_mut(Field::Name)
                    .record(StatusState::Corrected, "family_typo_vote", &format!("{family} -> {reference}"));
            }
        }
        if rec.family.as_deref() == Some(reference.as_str()) {
            rec.name_order = NameOrder::GivenFirst;
        }
        orientation.insert(rec.row_index, o);
    }

    if let Some(full_given) = majority_full_given(&out, &reference) {
        for rec in &mut out {
            let Some(given) = rec.given.clone() else { continue };
            if rec.family.as_deref() == Some(reference.as_str()) && is_initial(&given) && same_initial(&given, &full_given) {
                rec.given = Some(full_given.clone());
                rec.status_mut(Field::Name)
                    .record(StatusState::Corrected, "expand_initial", &format!("{given} -> {full_given}"));
            }
        }
    }
    (out, orientation)
}

fn reference_family(sorted: &[CleanRecord]) -> Option<String> {
    let known: Vec<&str> = sorted
        .iter()
        .filter(|r| r.name_order != NameOrder::Ambiguous)
        .filter_map(|r| r.family.as_deref())
        .collect();
    if !known.is_empty() {
        return majority(known.iter().copied());
    }

    // Token voting: each member contributes its given and family once.
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for rec in sorted {
        let tokens: BTreeSet<&str> = [rec.given.as_deref(), rec.family.as_deref()].into_iter().flatten().collect();
        for t in tokens {
            *counts.entry(t).or_default() += 1;
        }
    }
    let best = counts.values().copied().max().filter(|n| *n > 1)?;
    let tied: BTreeSet<&str> = counts.iter().filter(|(_, n)| **n == best).map(|(t, _)| *t).collect();
    for rec in sorted {
        for t in [rec.family.as_deref(), rec.given.as_deref()].into_iter().flatten() {
            if tied.contains(t) {
                return Some(t.to_owned());
            }
        }
    }
    None
}

/// Most frequent value, ties to the first in iteration order.
fn majority<'a>(values: impl Iterator<Item = &'a str>) -> Option<String> {
    let mut order: Vec<&str> = Vec::new();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for v in values {
        let n = counts.entry(v).or_default();
        if *n == 0 {
            order.push(v);
        }
        *n += 1;
    }
    let best = counts.values().copied().max()?;
    order.into_iter().find(|v| counts[v] == best).map(str::to_owned)
}

fn majority_full_given(sorted: &[CleanRecord], reference: &str) -> Option<String> {
    majority(
        sorted
            .iter()
            .filter(|r| r.family.as_deref() == Some(reference))
            .filter_map(|r| r.given.as_deref())
            .filter(|g| !is_initial(g)),
    )
}

fn same_initial(a: &str, b: &str) -> bool {
    let first = |s: &str| s.chars().next().map(|c| c.to_lowercase().collect::<String>());
    first(a) == first(b)
}

fn is_initial(token: &str) -> bool {
    let core = token.strip_suffix('.').unwrap_or(token);
    core.chars().count() == 1 && core.chars().all(char::is_alphabetic)
}

/// Members sharing a zip adopt the address of the best-evidenced one: most
/// components not filled from the gazetteer, then longest street, then lowest row.
pub fn harmonize_addresses(members: &mut [CleanRecord]) {
    let mut by_zip: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, rec) in members.iter().enumerate() {
        if let Some(zip) = rec.address.as_ref().and_then(|a| a.zip.clone()) {
            by_zip.entry(zip).or_default().push(i);
        }
    }
    for idxs in by_zip.values().filter(|v| v.len() > 1) {
        let best = *idxs
            .iter()
            .max_by(|&&a, &&b| {
                let (ra, rb) = (&members[a], &members[b]);
                evidence(ra)
                    .cmp(&evidence(rb))
                    .then(street_len(ra).cmp(&street_len(rb)))
                    .then(rb.row_index.cmp(&ra.row_index))
            })
            .expect("group has members");
        let address = members[best].address.clone();
        let source_row = members[best].row_index;
        let component_statuses: Vec<(Field, Option<FieldStatus>)> = [Field::Zip, Field::State, Field::City]
            .into_iter()
            .map(|f| (f, members[best].status(f).cloned()))
            .collect();
        for &i in idxs {
            let rec = &mut members[i];
            if rec.address == address {
                continue;
            }
            rec.address = address.clone();
            for (f, s) in &component_statuses {
                match s {
                    Some(s) => rec.statuses.insert(*f, s.clone()),
                    None => rec.statuses.remove(f),
                };
            }
            rec.status_mut(Field::Address).record(
                StatusState::Corrected,
                "harmonize_address",
                &format!("adopted row {source_row}"),
            );
        }
    }
}

fn evidence(rec: &CleanRecord) -> usize {
    let Some(addr) = rec.address.as_ref() else { return 0 };
    let enriched = [Field::Zip, Field::State, Field::City]
        .into_iter()
        .filter(|f| rec.status(*f).is_some_and(|s| s.state == StatusState::Enriched))
        .count();
    addr.component_count().saturating_sub(enriched)
}

fn street_len(rec: &CleanRecord) -> usize {
    rec.address.as_ref().and_then(|a| a.street.as_ref()).map_or(0, |s| s.chars().count())
}

/// Name and address reconciliation for one cluster. Idempotent.
pub fn reconcile_cluster(members: &[CleanRecord]) -> Vec<CleanRecord> {
    let (mut out, _) = reconcile_names(members);
    harmonize_addresses(&mut out);
    out
}

/// Reconciles every cluster and returns all records in row order.
pub fn reconcile_all(clusters: &[DuplicateCluster], records: &[CleanRecord]) -> Vec<CleanRecord> {
    let by_row: BTreeMap<usize, &CleanRecord> = records.iter().map(|r| (r.row_index, r)).collect();
    let mut out: Vec<CleanRecord> = Vec::with_capacity(records.len());
    for c in clusters {
        let members: Vec<CleanRecord> = c.member_rows.iter().filter_map(|r| by_row.get(r)).map(|r| (*r).clone()).collect();
        if members.len() > 1 {
            out.extend(reconcile_cluster(&members));
        } else {
            out.extend(members);
        }
    }
    out.sort_by_key(|r| r.row_index);
    out
}

/// Merges the records named by `cluster` into one golden record.
pub fn merge(cluster: &DuplicateCluster, records: &[CleanRecord], policy: &SurvivorshipPolicy) -> Result<GoldenRecord> {
    let wanted: BTreeSet<usize> = cluster.member_rows.iter().copied().collect();
    let members: Vec<CleanRecord> = records.iter().filter(|r| wanted.contains(&r.row_index)).cloned().collect();
    merge_members(&members, policy)
}

/// Reconciles `members` and resolves each source field by `policy`.
pub fn merge_members(members: &[CleanRecord], policy: &SurvivorshipPolicy) -> Result<GoldenRecord> {
    if members.is_empty() {
        return Err(Error::EmptyCluster);
    }
    let members = reconcile_cluster(members);
    let member_rows: Vec<usize> = members.iter().map(|r| r.row_index).collect();
    let mut golden = CleanRecord::empty(member_rows[0]);
    let mut provenance = BTreeMap::new();

    let pick = |field: Field, members: &[CleanRecord]| -> Option<(usize, Vec<usize>)> {
        select(field, policy.rule(field), members)
    };

    if let Some((i, rows)) = pick(Field::AuthorId, &members) {
        golden.author_id = members[i].author_id.clone();
        provenance.insert(Field::AuthorId, rows);
    }
    if let Some((i, rows)) = pick(Field::Name, &members) {
        let m = &members[i];
        golden.given = m.given.clone();
        golden.middle = m.middle.clone();
        golden.family = m.family.clone();
        golden.titles = m.titles.clone();
        golden.name_order = m.name_order;
        provenance.insert(Field::Name, rows);
    }
    if let Some((i, rows)) = pick(Field::Orcid, &members) {
        golden.orcid = members[i].orcid.clone();
        provenance.insert(Field::Orcid, rows);
    }
    if let Some((i, rows)) = pick(Field::BirthDate, &members) {
        golden.birth_date = members[i].birth_date;
        provenance.insert(Field::BirthDate, rows);
    }
    if let Some((i, rows)) = pick(Field::Address, &members) {
        golden.address = members[i].address.clone();
        provenance.insert(Field::Address, rows);
    }

    for field in Field::SOURCE {
        let status = match provenance.get(&field) {
            Some(rows) => FieldStatus {
                state: StatusState::Present,
                note: Some(format!("merge: rows {}", join_rows(rows))),
            },
            None => FieldStatus::missing(),
        };
        golden.statuses.insert(field, status);
    }

    Ok(GoldenRecord { record: golden, member_rows, provenance })
}

fn join_rows(rows: &[usize]) -> String {
    rows.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// Comparable key of a member's value for `field`, if present.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Text(String),
    Name(Option<String>, Option<String>, Option<String>),
    Date(BirthDate),
    Address(StructuredAddress),
}

fn key(field: Field, rec: &CleanRecord) -> Option<Key> {
    match field {
        Field::AuthorId => rec.author_id.clone().map(Key::Text),
        Field::Name => (rec.given.is_some() || rec.family.is_some())
            .then(|| Key::Name(rec.given.clone(), rec.middle.clone(), rec.family.clone())),
        Field::Orcid => rec.orcid.as_ref().map(|o| Key::Text(o.to_string())),
        Field::BirthDate => rec.birth_date.map(Key::Date),
        Field::Address => rec.address.clone().filter(|a| !a.is_empty()).map(Key::Address),
        _ => None,
    }
}

fn rendered_len(field: Field, rec: &CleanRecord) -> usize {
    match field {
        Field::BirthDate => match rec.birth_date {
            Some(BirthDate::Full(_)) => 10,
            Some(BirthDate::YearOnly(_)) => 4,
            None => 0,
        },
        _ => rec.value(field).map_or(0, |v| v.chars().count()),
    }
}

/// Number of source fields with a value; year-only dates count.
pub fn source_field_count(rec: &CleanRecord) -> usize {
    Field::SOURCE.iter().filter(|f| key(**f, rec).is_some()).count()
}

/// Index of the surviving member and the rows agreeing with it. `members` must
/// be sorted by row index.
fn select(field: Field, rule: SurvivorshipRule, members: &[CleanRecord]) -> Option<(usize, Vec<usize>)> {
    let keyed: Vec<(usize, Key)> = members
        .iter()
        .enumerate()
        .filter_map(|(i, r)| key(field, r).map(|k| (i, k)))
        .collect();
    if keyed.is_empty() {
        return None;
    }
    let agreeing = |winner: &Key| -> Vec<usize> {
        keyed
            .iter()
            .filter(|(_, k)| k == winner || year_supports(k, winner))
            .map(|(i, _)| members[*i].row_index)
            .collect()
    };

    let winner = match rule {
        SurvivorshipRule::MajorityNonNull => {
            let full_years: BTreeSet<i32> = keyed
                .iter()
                .filter_map(|(_, k)| match k {
                    Key::Date(d @ BirthDate::Full(_)) => Some(d.year()),
                    _ => None,
                })
                .collect();
            // a year-only date votes for every full date of its year
            let mut votes: BTreeMap<&Key, usize> = BTreeMap::new();
            for (_, k) in &keyed {
                match k {
                    Key::Date(BirthDate::YearOnly(y)) if full_years.contains(y) => {
                        let targets: BTreeSet<&Key> =
                            keyed.iter().map(|(_, o)| o).filter(|o| year_supports(k, o)).collect();
                        for t in targets {
                            *votes.entry(t).or_default() += 1;
                        }
                    }
                    _ => *votes.entry(k).or_default() += 1,
                }
            }
            let best = votes.values().copied().max()?;
            keyed.iter().find(|(_, k)| votes.get(k) == Some(&best)).map(|(i, _)| *i)?
        }
        SurvivorshipRule::MostCompleteRecord => {
            let best = keyed.iter().map(|(i, _)| source_field_count(&members[*i])).max()?;
            keyed.iter().find(|(i, _)| source_field_count(&members[*i]) == best).map(|(i, _)| *i)?
        }
        SurvivorshipRule::LongestValue => {
            let best = keyed.iter().map(|(i, _)| rendered_len(field, &members[*i])).max()?;
            keyed.iter().find(|(i, _)| rendered_len(field, &members[*i]) == best).map(|(i, _)| *i)?
        }
    };
    let winner_key = key(field, &members[winner]).expect("winner has a value");
    Some((winner, agreeing(&winner_key)))
}

/// A year-only date supports a full date of the same year.
fn year_supports(voter: &Key, candidate: &Key) -> bool {
    matches!(
        (voter, candidate),
        (Key::Date(BirthDate::YearOnly(y)), Key::Date(full @ BirthDate::Full(_))) if full.year() == *y
    )
}
