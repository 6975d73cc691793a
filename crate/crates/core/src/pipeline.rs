//! End-to-end orchestration: configuration, the in-memory run and artifact output.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consolidate::{merge_members, reconcile_all, GoldenRecord, SurvivorshipPolicy};
use crate::enrich::{enrich, load_gazetteer, Gazetteer};
use crate::error::{Error, Result};
use crate::io::{ingest_csv, write_clean, ColumnMapping, RowError};
use crate::matching::{MatchOutcome, MatchScore, MatchWeights, Matcher, DEFAULT_THRESHOLD};
use crate::parsing::{parse_record, Lexicon, Lexicons};
use crate::profile::{compare_profiles, profile, profile_with_clusters, EmittedRules, ProfileDelta, QualityProfile, SourceRules};
use crate::record::{CleanRecord, Field, RawRecord};
use crate::standardize::{default_abbreviations, RuleSet, Standardizer, DEFAULT_RULES};

pub const CONFIG_ENV: &str = "RISCLEANSE_CONFIG";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LexiconPaths {
    pub titles: Option<PathBuf>,
    pub street_suffixes: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StandardizationConfig {
    pub rules: Vec<String>,
    pub abbreviations: BTreeMap<String, String>,
}

impl Default for StandardizationConfig {
    fn default() -> Self {
        Self {
            rules: DEFAULT_RULES.iter().map(|s| (*s).to_owned()).collect(),
            abbreviations: default_abbreviations(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchingConfig {
    pub weights: MatchWeights,
    pub threshold: f64,
}

impl Default for MatchingConfig {
    fn default() -> Self {
        Self { weights: MatchWeights::default(), threshold: DEFAULT_THRESHOLD }
    }
}

/// Settings of one run. Relative paths in a config file are resolved against
/// the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub gazetteer: Option<PathBuf>,
    pub lexicons: LexiconPaths,
    pub columns: ColumnMapping,
    pub standardization: StandardizationConfig,
    pub matching: MatchingConfig,
    pub consolidation: SurvivorshipPolicy,
    pub strict_orcid: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            input: None,
            out_dir: PathBuf::from("out"),
            gazetteer: None,
            lexicons: LexiconPaths::default(),
            columns: ColumnMapping::default(),
            standardization: StandardizationConfig::default(),
            matching: MatchingConfig::default(),
            consolidation: SurvivorshipPolicy::default(),
            strict_orcid: false,
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub input: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub threshold: Option<f64>,
    pub strict_orcid: bool,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.input.as_mut() {
            join(p);
        }
        join(&mut self.out_dir);
        for p in [&mut self.gazetteer, &mut self.lexicons.titles, &mut self.lexicons.street_suffixes]
            .into_iter()
            .flatten()
        {
            join(p);
        }
    }

    pub fn apply(&mut self, overrides: &Overrides) {
        if let Some(p) = &overrides.input {
            self.input = Some(p.clone());
        }
        if let Some(p) = &overrides.out_dir {
            self.out_dir = p.clone();
        }
        if let Some(t) = overrides.threshold {
            self.matching.threshold = t;
        }
        self.strict_orcid |= overrides.strict_orcid;
    }

    /// Checks every setting and loads the referenced lexicons and gazetteer.
    pub fn prepare(&self) -> Result<Pipeline> {
        let input = self.input.clone().ok_or_else(|| Error::Config("no input file given".into()))?;
        let matcher = Matcher::new(self.matching.weights, self.matching.threshold)?;
        let rules = RuleSet::new(&self.standardization.rules, self.standardization.abbreviations.clone())?;
        self.consolidation.validate()?;

        let referenced = |p: &Path, what: &str| -> Result<()> {
            if p.is_file() {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} file {} does not exist", p.display())))
            }
        };
        let as_config = |e: Error| Error::Config(e.to_string());
        let mut lexicons = Lexicons::default();
        if let Some(p) = &self.lexicons.titles {
            referenced(p, "titles lexicon")?;
            lexicons.titles = Lexicon::load(p).map_err(as_config)?;
        }
        if let Some(p) = &self.lexicons.street_suffixes {
            referenced(p, "street suffix lexicon")?;
            lexicons.street_suffixes = Lexicon::load(p).map_err(as_config)?;
        }
        let gazetteer = match &self.gazetteer {
            Some(p) => {
                referenced(p, "gazetteer")?;
                load_gazetteer(p).map_err(as_config)?.gazetteer
            }
            None => Gazetteer::default(),
        };

        Ok(Pipeline {
            input,
            out_dir: self.out_dir.clone(),
            columns: self.columns.clone(),
            standardizer: Standardizer::new(rules, self.strict_orcid),
            strict_orcid: self.strict_orcid,
            lexicons,
            gazetteer,
            matcher,
            policy: self.consolidation.clone(),
        })
    }
}

/// A validated configuration with its resources loaded.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub input: PathBuf,
    pub out_dir: PathBuf,
    pub columns: ColumnMapping,
    pub lexicons: Lexicons,
    pub gazetteer: Gazetteer,
    pub standardizer: Standardizer,
    pub strict_orcid: bool,
    pub matcher: Matcher,
    pub policy: SurvivorshipPolicy,
}

/// Everything a full `clean` run computes, before anything is written.
#[derive(Debug, Clone)]
pub struct CleanRun {
    pub raw: Vec<RawRecord>,
    pub row_errors: Vec<RowError>,
    /// Parsed, standardized and enriched records.
    pub standardized: Vec<CleanRecord>,
    pub matches: MatchOutcome,
    /// Standardized records after per-cluster name and address reconciliation.
    pub cleansed: Vec<CleanRecord>,
    pub golden: Vec<GoldenRecord>,
    pub profile_before: QualityProfile,
    pub profile_after: QualityProfile,
    pub profile_cleansed: QualityProfile,
    pub delta: ProfileDelta,
}

impl CleanRun {
    pub fn golden_records(&self) -> Vec<CleanRecord> {
        self.golden.iter().map(|g| g.record.clone()).collect()
    }
}

impl Pipeline {
    pub fn source_rules(&self) -> SourceRules {
        SourceRules { lexicons: self.lexicons.clone(), strict_orcid: self.strict_orcid }
    }

    pub fn emitted_rules(&self) -> EmittedRules {
        EmittedRules { gazetteer: (!self.gazetteer.is_empty()).then(|| self.gazetteer.clone()) }
    }

    pub fn ingest(&self) -> Result<(Vec<RawRecord>, Vec<RowError>)> {
        let ingested = ingest_csv(&self.input, &self.columns)?;
        log::info!(
            "read {} records from {} ({} rows skipped)",
            ingested.records.len(),
            self.input.display(),
            ingested.errors.len()
        );
        Ok((ingested.records, ingested.errors))
    }

    /// Parse, standardize and enrich.
    pub fn standardize(&self, raw: &[RawRecord]) -> Vec<CleanRecord> {
        raw.par_iter()
            .map(|r| {
                let parsed = parse_record(r, &self.lexicons);
                enrich(&self.standardizer.standardize(&parsed), &self.gazetteer)
            })
            .collect()
    }

    pub fn merge(&self, cleansed: &[CleanRecord], matches: &MatchOutcome) -> Result<Vec<GoldenRecord>> {
        let by_row: HashMap<usize, &CleanRecord> = cleansed.iter().map(|r| (r.row_index, r)).collect();
        matches
            .clusters
            .par_iter()
            .map(|c| {
                let members: Vec<CleanRecord> =
                    c.member_rows.iter().filter_map(|r| by_row.get(r).map(|m| (*m).clone())).collect();
                merge_members(&members, &self.policy)
            })
            .collect()
    }

    pub fn run(&self, raw: Vec<RawRecord>, row_errors: Vec<RowError>) -> Result<CleanRun> {
        let source_rules = self.source_rules();
        let standardized = self.standardize(&raw);
        let matches = self.matcher.match_records(&standardized);
        log::info!("{} candidate pairs scored, {} clusters", matches.scores.len(), matches.clusters.len());
        let cleansed = reconcile_all(&matches.clusters, &standardized);
        let golden = self.merge(&cleansed, &matches)?;

        let profile_before = profile_with_clusters(&raw, &source_rules, &matches.clusters);
        let golden_records: Vec<CleanRecord> = golden.iter().map(|g| g.record.clone()).collect();
        let profile_after = profile(&golden_records, &source_rules);
        let profile_cleansed = profile(&cleansed, &self.emitted_rules());
        let delta = compare_profiles(&profile_before, &profile_after)?;
        if delta.regression {
            log::warn!("quality regressed on {}", delta.regressions.join(", "));
        }
        Ok(CleanRun {
            raw,
            row_errors,
            standardized,
            matches,
            cleansed,
            golden,
            profile_before,
            profile_after,
            profile_cleansed,
            delta,
        })
    }
}

#[derive(Debug, Serialize)]
struct MatchReport<'a> {
    threshold: f64,
    weights: &'a MatchWeights,
    clusters: Vec<&'a [usize]>,
    scores: &'a [MatchScore],
}

fn match_report(matcher: &Matcher, outcome: &MatchOutcome) -> String {
    let report = MatchReport {
        threshold: matcher.threshold(),
        weights: matcher.weights(),
        clusters: outcome.clusters.iter().map(|c| c.member_rows.as_slice()).collect(),
        scores: &outcome.scores,
    };
    serde_json::to_string_pretty(&report).expect("match report serializes") + "\n"
}

#[derive(Debug, Serialize)]
struct ProvenanceEntry<'a> {
    row_index: usize,
    member_rows: &'a [usize],
    provenance: &'a BTreeMap<Field, Vec<usize>>,
}

fn provenance_report(golden: &[GoldenRecord]) -> String {
    let entries: Vec<ProvenanceEntry> = golden
        .iter()
        .map(|g| ProvenanceEntry { row_index: g.record.row_index, member_rows: &g.member_rows, provenance: &g.provenance })
        .collect();
    serde_json::to_string_pretty(&entries).expect("provenance serializes") + "\n"
}

fn csv_bytes(records: &[CleanRecord]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_clean(records, &mut buf).map_err(|e| Error::csv("<memory>", e))?;
    Ok(buf)
}

fn issues_csv(profile: &QualityProfile) -> Result<Vec<u8>> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let wrap = |e: csv::Error| Error::csv("issues.csv", e);
    wtr.write_record(["row_index", "field", "kind", "detail"]).map_err(wrap)?;
    for i in &profile.issues {
        wtr.write_record([i.row_index.to_string(), i.field.to_string(), format!("{:?}", i.kind), i.detail.clone()])
            .map_err(wrap)?;
    }
    wtr.into_inner().map_err(|e| Error::io("issues.csv", e.into_error()))
}

/// Writes all artifacts or none: on the first failure, files already written
/// are removed.
fn write_artifacts(out_dir: &Path, artifacts: Vec<(&str, Vec<u8>)>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    for (name, bytes) in artifacts {
        let path = out_dir.join(name);
        if let Err(e) = fs::write(&path, bytes) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            let _ = fs::remove_file(&path);
            return Err(Error::io(path, e));
        }
        written.push(path);
    }
    Ok(written)
}

/// Result of a subcommand: its one-line summary and the files it wrote.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub line: String,
    pub artifacts: Vec<PathBuf>,
}

pub fn run_clean(config: &PipelineConfig) -> Result<RunSummary> {
    let pipeline = config.prepare()?;
    let (raw, errors) = pipeline.ingest()?;
    let run = pipeline.run(raw, errors)?;
    let golden = run.golden_records();
    let artifacts = vec![
        ("cleansed.csv", csv_bytes(&run.cleansed)?),
        ("standardized.csv", csv_bytes(&run.standardized)?),
        ("golden.csv", csv_bytes(&golden)?),
        ("profile_before.json", run.profile_before.to_json().into_bytes()),
        ("profile_before.txt", run.profile_before.to_text().into_bytes()),
        ("profile_after.json", run.profile_after.to_json().into_bytes()),
        ("profile_after.txt", run.profile_after.to_text().into_bytes()),
        ("profile_cleansed.json", run.profile_cleansed.to_json().into_bytes()),
        ("profile_delta.json", run.delta.to_json().into_bytes()),
        ("issues.csv", issues_csv(&run.profile_before)?),
        ("matches.json", match_report(&pipeline.matcher, &run.matches).into_bytes()),
        ("provenance.json", provenance_report(&run.golden).into_bytes()),
    ];
    let written = write_artifacts(&pipeline.out_dir, artifacts)?;
    Ok(RunSummary {
        line: format!(
            "clean: {} records, {} skipped, {} clusters, {} golden records -> {}",
            run.raw.len(),
            run.row_errors.len(),
            run.matches.clusters.len(),
            run.golden.len(),
            pipeline.out_dir.display()
        ),
        artifacts: written,
    })
}

pub fn run_profile(config: &PipelineConfig) -> Result<RunSummary> {
    let pipeline = config.prepare()?;
    let (raw, errors) = pipeline.ingest()?;
    let p = profile(&raw, &pipeline.source_rules());
    let written = write_artifacts(
        &pipeline.out_dir,
        vec![("profile.json", p.to_json().into_bytes()), ("profile.txt", p.to_text().into_bytes())],
    )?;
    Ok(RunSummary {
        line: format!(
            "profile: {} records, {} skipped, {} issues -> {}",
            p.record_count,
            errors.len(),
            p.issues.len(),
            pipeline.out_dir.display()
        ),
        artifacts: written,
    })
}

pub fn run_match(config: &PipelineConfig) -> Result<RunSummary> {
    let pipeline = config.prepare()?;
    let (raw, _) = pipeline.ingest()?;
    let standardized = pipeline.standardize(&raw);
    let outcome = pipeline.matcher.match_records(&standardized);
    let written = write_artifacts(
        &pipeline.out_dir,
        vec![("matches.json", match_report(&pipeline.matcher, &outcome).into_bytes())],
    )?;
    Ok(RunSummary {
        line: format!(
            "match: {} records, {} pairs scored, {} clusters -> {}",
            raw.len(),
            outcome.scores.len(),
            outcome.clusters.len(),
            pipeline.out_dir.display()
        ),
        artifacts: written,
    })
}

pub fn run_merge(config: &PipelineConfig) -> Result<RunSummary> {
    let pipeline = config.prepare()?;
    let (raw, _) = pipeline.ingest()?;
    let standardized = pipeline.standardize(&raw);
    let outcome = pipeline.matcher.match_records(&standardized);
    let cleansed = reconcile_all(&outcome.clusters, &standardized);
    let golden = pipeline.merge(&cleansed, &outcome)?;
    let records: Vec<CleanRecord> = golden.iter().map(|g| g.record.clone()).collect();
    let written = write_artifacts(
        &pipeline.out_dir,
        vec![("golden.csv", csv_bytes(&records)?), ("provenance.json", provenance_report(&golden).into_bytes())],
    )?;
    Ok(RunSummary {
        line: format!("merge: {} records, {} golden records -> {}", raw.len(), golden.len(), pipeline.out_dir.display()),
        artifacts: written,
    })
}

/// 1 for configuration problems, 2 for everything else.
pub fn exit_code(error: &Error) -> i32 {
    if error.is_config() {
        1
    } else {
        2
    }
}
