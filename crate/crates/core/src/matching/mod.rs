//! Pair scoring, blocking and duplicate clustering.

mod similarity;
mod soundex;
mod union_find;

pub use similarity::{jaro, jaro_winkler, levenshtein};
pub use soundex::soundex;
pub use union_find::UnionFind;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::{BirthDate, CleanRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchWeights {
    pub orcid: f64,
    pub family: f64,
    pub given: f64,
    pub birth_date: f64,
    pub address: f64,
    pub author_id: f64,
}

impl Default for MatchWeights {
    fn default() -> Self {
        Self { orcid: 0.35, family: 0.20, given: 0.15, birth_date: 0.15, address: 0.10, author_id: 0.05 }
    }
}

impl MatchWeights {
    fn as_array(&self) -> [f64; 6] {
        [self.orcid, self.family, self.given, self.birth_date, self.address, self.author_id]
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.as_array();
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Config(format!("matching weights must be finite and non-negative: {w:?}")));
        }
        if w.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Config("matching weights must have a positive sum".into()));
        }
        Ok(())
    }
}

pub const DEFAULT_THRESHOLD: f64 = 0.85;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Match,
    NonMatch,
    Barred,
}

/// Per-field similarities; `None` where either record lacks the field.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct FieldScores {
    pub orcid: Option<f64>,
    pub family: Option<f64>,
    pub given: Option<f64>,
    pub birth_date: Option<f64>,
    pub address: Option<f64>,
    pub author_id: Option<f64>,
}

impl FieldScores {
    fn as_array(&self) -> [Option<f64>; 6] {
        [self.orcid, self.family, self.given, self.birth_date, self.address, self.author_id]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchScore {
    pub pair: (usize, usize),
    pub field_scores: FieldScores,
    pub total: f64,
    pub verdict: Verdict,
    /// Hard rule that decided the verdict, if any.
    pub rule: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DuplicateCluster {
    pub member_rows: Vec<usize>,
    pub evidence: Vec<MatchScore>,
}

impl DuplicateCluster {
    pub fn is_duplicate(&self) -> bool {
        self.member_rows.len() > 1
    }
}

/// Validated weights and threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matcher {
    weights: MatchWeights,
    threshold: f64,
}

impl Default for Matcher {
    fn default() -> Self {
        Self { weights: MatchWeights::default(), threshold: DEFAULT_THRESHOLD }
    }
}

impl Matcher {
    pub fn new(weights: MatchWeights, threshold: f64) -> Result<Self> {
        weights.validate()?;
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::Config(format!("matching threshold must lie in [0, 1], got {threshold}")));
        }
        Ok(Self { weights, threshold })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn weights(&self) -> &MatchWeights {
        &self.weights
    }

    /// Scores a pair. Differing author ids bar the pair and equal ones link it;
    /// otherwise differing identifiers bar it, and the weighted total decides.
    pub fn score(&self, a: &CleanRecord, b: &CleanRecord) -> MatchScore {
        let jw = |x: &str, y: &str| jaro_winkler(&x.to_lowercase(), &y.to_lowercase());

        let scores = FieldScores {
            orcid: a.orcid.as_ref().zip(b.orcid.as_ref()).map(|(x, y)| indicator(x == y)),
            family: a.family.as_deref().zip(b.family.as_deref()).map(|(x, y)| jw(x, y)),
            given: a.given.as_deref().zip(b.given.as_deref()).map(|(x, y)| jw(x, y)),
            birth_date: a.birth_date.zip(b.birth_date).map(|(x, y)| date_similarity(x, y)),
            address: a
                .address
                .as_ref()
                .zip(b.address.as_ref())
                .filter(|(x, y)| !x.is_empty() && !y.is_empty())
                .map(|(x, y)| jaro_winkler(&x.canonical(), &y.canonical())),
            author_id: a.author_id.as_deref().zip(b.author_id.as_deref()).map(|(x, y)| indicator(x == y)),
        };

        let mut num = 0.0;
        let mut den = 0.0;
        for (w, s) in self.weights.as_array().into_iter().zip(scores.as_array()) {
            if let Some(s) = s {
                num += w * s;
                den += w;
            }
        }
        let total = if den > 0.0 { (num / den).clamp(0.0, 1.0) } else { 0.0 };

        let (verdict, rule) = match (scores.author_id, scores.orcid) {
            (Some(s), _) if s < 1.0 => (Verdict::Barred, Some("author_id_conflict")),
            (Some(_), _) => (Verdict::Match, Some("same_author_id")),
            (None, Some(s)) if s < 1.0 => (Verdict::Barred, Some("orcid_conflict")),
            _ if total >= self.threshold => (Verdict::Match, None),
            _ => (Verdict::NonMatch, None),
        };
        MatchScore { pair: (a.row_index, b.row_index), field_scores: scores, total, verdict, rule }
    }

    /// Scores every pair sharing a block and clusters the matches.
    pub fn match_records(&self, records: &[CleanRecord]) -> MatchOutcome {
        let pairs = candidate_pairs(&block(records));
        self.score_pairs(records, pairs)
    }

    /// Scores all pairs without blocking; the reference for blocking recall.
    pub fn match_exhaustive(&self, records: &[CleanRecord]) -> MatchOutcome {
        let rows: Vec<usize> = records.iter().map(|r| r.row_index).collect();
        let mut pairs = BTreeSet::new();
        for (i, a) in rows.iter().enumerate() {
            for b in &rows[i + 1..] {
                pairs.insert(ordered(*a, *b));
            }
        }
        self.score_pairs(records, pairs)
    }

    fn score_pairs(&self, records: &[CleanRecord], pairs: BTreeSet<(usize, usize)>) -> MatchOutcome {
        let by_row: BTreeMap<usize, &CleanRecord> = records.iter().map(|r| (r.row_index, r)).collect();
        let pairs: Vec<(usize, usize)> = pairs.into_iter().collect();
        let scores: Vec<MatchScore> = pairs
            .par_iter()
            .map(|(a, b)| self.score(by_row[a], by_row[b]))
            .collect();
        let rows: Vec<usize> = by_row.keys().copied().collect();
        let clusters = cluster(&scores, &rows);
        MatchOutcome { scores, clusters }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchOutcome {
    pub scores: Vec<MatchScore>,
    pub clusters: Vec<DuplicateCluster>,
}

impl MatchOutcome {
    pub fn match_pairs(&self) -> BTreeSet<(usize, usize)> {
        self.scores
            .iter()
            .filter(|s| s.verdict == Verdict::Match)
            .map(|s| ordered(s.pair.0, s.pair.1))
            .collect()
    }
}

/// Validates `weights` and `threshold`, then scores one pair.
pub fn score_pair(a: &CleanRecord, b: &CleanRecord, weights: &MatchWeights, threshold: f64) -> Result<MatchScore> {
    Ok(Matcher::new(*weights, threshold)?.score(a, b))
}

fn indicator(equal: bool) -> f64 {
    if equal {
        1.0
    } else {
        0.0
    }
}

fn date_similarity(a: BirthDate, b: BirthDate) -> f64 {
    match (a, b) {
        (BirthDate::Full(x), BirthDate::Full(y)) => indicator(x == y),
        _ if a.year() == b.year() => 0.5,
        _ => 0.0,
    }
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

pub const RESIDUAL_BLOCK: &str = "residual";

/// Blocking keys of one record.
///
/// The surname's Soundex code is the primary key. Shared author ids, shared
/// identifiers and shared full birth dates co-block records whose surnames
/// encode differently. The codes of both name parts, pooled regardless of
/// role, co-block records whose only comparable fields are the names,
/// including records with the parts swapped. Records with neither surname nor
/// author id also land in the residual block.
pub fn block_keys(record: &CleanRecord) -> Vec<String> {
    let mut keys = Vec::new();
    if let Some(family) = &record.family {
        keys.push(soundex(family).unwrap_or_else(|_| format!("family:{}", family.to_lowercase())));
    }
    for part in [&record.family, &record.given].into_iter().flatten() {
        if let Ok(code) = soundex(part) {
            keys.push(format!("name:{code}"));
        }
    }
    keys.dedup();
    if let Some(id) = &record.author_id {
        keys.push(format!("author:{id}"));
    }
    if let Some(orcid) = &record.orcid {
        keys.push(format!("orcid:{orcid}"));
    }
    if let Some(iso) = record.birth_date.and_then(BirthDate::iso) {
        keys.push(format!("birth:{iso}"));
    }
    if record.family.is_none() && record.author_id.is_none() {
        keys.push(RESIDUAL_BLOCK.to_owned());
    }
    keys
}

pub fn block(records: &[CleanRecord]) -> BTreeMap<String, Vec<usize>> {
    let mut blocks: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for r in records {
        for key in block_keys(r) {
            blocks.entry(key).or_default().push(r.row_index);
        }
    }
    for rows in blocks.values_mut() {
        rows.sort_unstable();
        rows.dedup();
    }
    blocks
}

pub fn candidate_pairs(blocks: &BTreeMap<String, Vec<usize>>) -> BTreeSet<(usize, usize)> {
    let mut pairs = BTreeSet::new();
    for rows in blocks.values() {
        for (i, a) in rows.iter().enumerate() {
            for b in &rows[i + 1..] {
                pairs.insert(ordered(*a, *b));
            }
        }
    }
    pairs
}

/// Connected components of the `Match` edges over `rows`, ordered by smallest member.
pub fn cluster(scores: &[MatchScore], rows: &[usize]) -> Vec<DuplicateCluster> {
    let mut rows: Vec<usize> = rows.to_vec();
    rows.sort_unstable();
    rows.dedup();
    let pos: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(i, r)| (*r, i)).collect();
    let mut uf = UnionFind::new(rows.len());
    for s in scores.iter().filter(|s| s.verdict == Verdict::Match) {
        if let (Some(&a), Some(&b)) = (pos.get(&s.pair.0), pos.get(&s.pair.1)) {
            uf.union(a, b);
        }
    }

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, row) in rows.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().push(*row);
    }
    let mut clusters: Vec<DuplicateCluster> = groups
        .into_values()
        .map(|member_rows| DuplicateCluster { member_rows, evidence: Vec::new() })
        .collect();
    clusters.sort_by_key(|c| c.member_rows[0]);

    let owner: BTreeMap<usize, usize> = clusters
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.member_rows.iter().map(move |r| (*r, i)))
        .collect();
    let mut evidence: Vec<&MatchScore> = scores.iter().filter(|s| s.verdict == Verdict::Match).collect();
    evidence.sort_by_key(|s| ordered(s.pair.0, s.pair.1));
    for s in evidence {
        if let Some(&i) = owner.get(&s.pair.0) {
            if owner.get(&s.pair.1) == Some(&i) {
                clusters[i].evidence.push(s.clone());
            }
        }
    }
    clusters
}
