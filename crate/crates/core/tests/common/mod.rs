//! Shared helpers for the integration tests: fixture paths, a synthetic
//! dataset generator with realistic entry errors, and brute-force string
//! similarity oracles.

#![allow(dead_code)]

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riscleanse::enrich::{Gazetteer, Place};
use riscleanse::pipeline::{Pipeline, PipelineConfig};
use riscleanse::record::RawRecord;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_config() -> PathBuf {
    fixtures_dir().join("pipeline.json")
}

const GIVEN: &[&str] = &[
    "Alien", "Olivia", "Anna", "Bernd", "Clara", "David", "Emma", "Felix", "Greta", "Hanna", "Igor", "Jonas",
    "Karin", "Lukas", "Maria", "Nora", "Oskar", "Paula", "Rafael", "Sofia", "Tobias", "Ute", "Viktor", "Wanda",
    "Beatrix", "Cyril", "Dmitri", "Esther", "Fabian", "Gideon", "Helga", "Imre", "Jasper", "Kenji", "Leopold",
    "Mirela", "Nikolai", "Ottilie", "Priya", "Quentin", "Regina", "Stellan", "Thea", "Ulrich", "Vera", "Wolfgang",
    "Xaver", "Yusuf", "Zelda", "Amara", "Bodhi", "Cosima", "Darius", "Elif", "Folke", "Gaia", "Hugo", "Ines",
    "Joaquin", "Kasimir", "Luzia", "Magnus",
];
const FAMILY_HEAD: &[&str] = &[
    "Ber", "Kal", "Mor", "Sven", "Scot", "Tan", "Lin", "Har", "Vel", "Dor", "Fen", "Gal", "Jor", "Mal", "Nor", "Pel",
    "Ros", "Tor", "Wil", "Zan", "Bram", "Quin", "Yar", "Hol",
];
const FAMILY_TAIL: &[&str] = &["son", "ley", "man", "berg", "ton", "ski", "ard", "ini", "ez", "ow", "field", "stad"];
const STREETS: &[&str] = &["Concord", "Ford", "Maple", "Harbor", "Lincoln", "Cedar", "Willow", "Summit", "Bay", "Grove"];
const SUFFIXES: &[&str] = &["Street", "Ave", "Road", "Blvd"];
const CITIES: &[(&str, &str)] = &[
    ("Orlando", "FL"),
    ("Las Vegas", "NV"),
    ("Tampa", "FL"),
    ("Reno", "NV"),
    ("Austin", "TX"),
    ("Dallas", "TX"),
    ("Boise", "ID"),
    ("Salem", "OR"),
    ("Denver", "CO"),
    ("Mesa", "AZ"),
];

/// One zip per city, starting at 30001.
pub fn synthetic_gazetteer() -> Gazetteer {
    Gazetteer::from_entries(CITIES.iter().enumerate().map(|(i, (city, state))| {
        (format!("{}", 30001 + i), Place { city: (*city).into(), state: (*state).into() })
    }))
}

/// A pipeline with default settings and the synthetic gazetteer.
pub fn synthetic_pipeline() -> Pipeline {
    let cfg = PipelineConfig { input: Some("synthetic.csv".into()), ..Default::default() };
    let mut p = cfg.prepare().expect("default config is valid");
    p.gazetteer = synthetic_gazetteer();
    p
}

#[derive(Debug, Clone)]
pub struct Person {
    pub author_id: String,
    pub given: String,
    pub middle: Option<String>,
    pub family: String,
    pub orcid: String,
    pub birth: (i32, u32, u32),
    pub house: u32,
    pub street: String,
    pub city_index: usize,
}

/// ISO 7064 MOD 11-2 check character.
fn check_char(digits: &[u32]) -> char {
    let total = digits.iter().fold(0, |acc, d| (acc + d) * 2);
    let result = (12 - total % 11) % 11;
    if result == 10 {
        'X'
    } else {
        char::from_digit(result, 10).unwrap()
    }
}

pub struct Generator {
    rng: ChaCha8Rng,
    next_id: u32,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), next_id: 100_000 }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn person(&mut self) -> Person {
        let r = &mut self.rng;
        let digits: Vec<u32> = (0..15).map(|_| r.gen_range(0..10)).collect();
        let mut orcid: String = digits.iter().map(|d| char::from_digit(*d, 10).unwrap()).collect();
        orcid.push(check_char(&digits));
        let orcid = format!("{}-{}-{}-{}", &orcid[0..4], &orcid[4..8], &orcid[8..12], &orcid[12..16]);
        self.next_id += 1;
        Person {
            author_id: self.next_id.to_string(),
            given: GIVEN.choose(r).unwrap().to_string(),
            middle: r.gen_bool(0.2).then(|| GIVEN.choose(r).unwrap().to_string()),
            family: format!("{}{}", FAMILY_HEAD.choose(r).unwrap(), FAMILY_TAIL.choose(r).unwrap()),
            orcid,
            birth: (r.gen_range(1940..2000), r.gen_range(1..=12), r.gen_range(1..=28)),
            house: r.gen_range(1..999),
            street: format!("{} {}", STREETS.choose(r).unwrap(), SUFFIXES.choose(r).unwrap()),
            city_index: r.gen_range(0..CITIES.len()),
        }
    }

    /// One source row for `p` with randomly injected entry errors.
    pub fn row(&mut self, p: &Person, row_index: usize) -> RawRecord {
        let r = &mut self.rng;
        let author_id = (!r.gen_bool(0.1)).then(|| p.author_id.clone());

        let mut family = p.family.clone();
        if r.gen_bool(0.05) {
            let mut chars: Vec<char> = family.chars().collect();
            let at = r.gen_range(1..chars.len());
            chars[at] = *['a', 'e', 'h', 'o', 't'].choose(r).unwrap();
            family = chars.into_iter().collect();
        }
        let given = if r.gen_bool(0.05) { format!("{}.", &p.given[..1]) } else { p.given.clone() };
        let name = match r.gen_range(0..100) {
            0..=49 => format!("{given} {family}"),
            50..=64 => format!("{family} {given}"),
            65..=74 => format!("{family}, {given}"),
            75..=84 => format!("Dr. {given} {family}"),
            85..=94 => match &p.middle {
                Some(m) => format!("{given} {m} {family}"),
                None => format!("{given} {family}"),
            },
            _ => format!("{} {}", given.to_uppercase(), family.to_uppercase()),
        };

        let bare: String = p.orcid.chars().filter(|c| *c != '-').collect();
        let orcid = match r.gen_range(0..100) {
            0..=49 => Some(p.orcid.clone()),
            50..=64 => Some(bare.clone()),
            65..=69 => Some(bare.to_lowercase()),
            70..=89 => None,
            90..=94 => Some("0000-0000-0000-0000".into()),
            _ => Some(bare[..12].to_owned()),
        };

        let (y, m, d) = p.birth;
        let birth = match r.gen_range(0..100) {
            0..=24 => Some(format!("{m}/{d}/{y}")),
            25..=49 => Some(format!("{d:02}.{m:02}.{y}")),
            50..=64 => Some(format!("{d}-{m}-{y}")),
            65..=74 => Some(format!("{y}-{m:02}-{d:02}")),
            75..=84 => Some(y.to_string()),
            85..=89 => Some(format!("{m:02}/{d:02}/{:02}", y % 100)),
            90..=94 => Some(format!("{:02}{:02}{:02}", y % 100, d, m)),
            _ => None,
        };

        let (city, state) = CITIES[p.city_index];
        let zip = 30001 + p.city_index;
        let (street_name, suffix) = p.street.split_once(' ').unwrap();
        let h = p.house;
        let address = match r.gen_range(0..100) {
            0..=29 => Some(format!("{h} {}, {city}, {zip}", p.street)),
            30..=44 => Some(format!("{}, {zip} {h}", p.street)),
            45..=54 => Some(format!("{h} {street_name} {zip} {suffix}")),
            55..=64 => Some(format!("{h}-{} P.B. {city} {zip}", h + 7000)),
            65..=79 => Some(format!("{h} {} {zip}", p.street)),
            80..=89 => Some(format!("{h} {}, {city} {state} {zip} US", p.street)),
            _ => None,
        };

        RawRecord::new(
            row_index,
            author_id.as_deref(),
            Some(&name),
            orcid.as_deref(),
            birth.as_deref(),
            address.as_deref(),
        )
    }

    /// Exactly `n` rows: each person gets one to three rows, shuffled.
    pub fn dataset(&mut self, n: usize) -> Vec<RawRecord> {
        let mut people: Vec<Person> = Vec::new();
        while people.len() < n {
            let p = self.person();
            let copies = self.rng.gen_range(1..=3).min(n - people.len());
            people.extend(std::iter::repeat_n(p, copies));
        }
        people.shuffle(&mut self.rng);
        people.iter().enumerate().map(|(i, p)| self.row(p, i + 1)).collect()
    }

    pub fn word(&mut self, max_len: usize, alphabet: &[char]) -> String {
        let len = self.rng.gen_range(0..=max_len);
        (0..len).map(|_| *alphabet.choose(&mut self.rng).unwrap()).collect()
    }
}

/// Edit distance by memoized recursion over suffixes.
pub fn levenshtein_oracle(a: &str, b: &str) -> usize {
    fn go(a: &[char], b: &[char], memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if a.is_empty() {
            return b.len();
        }
        if b.is_empty() {
            return a.len();
        }
        if let Some(v) = memo.get(&(a.len(), b.len())) {
            return *v;
        }
        let cost = usize::from(a[0] != b[0]);
        let v = (go(&a[1..], b, memo) + 1)
            .min(go(a, &b[1..], memo) + 1)
            .min(go(&a[1..], &b[1..], memo) + cost);
        memo.insert((a.len(), b.len()), v);
        v
    }
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    go(&a, &b, &mut HashMap::new())
}

/// Textbook Jaro-Winkler with the first argument driving the match scan.
pub fn jaro_winkler_oracle(s1: &str, s2: &str) -> f64 {
    let a: Vec<char> = s1.chars().collect();
    let b: Vec<char> = s2.chars().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let range = (a.len().max(b.len()) / 2).max(1) - 1;
    let mut a_flags = vec![false; a.len()];
    let mut b_flags = vec![false; b.len()];
    let mut matches = 0usize;
    for i in 0..a.len() {
        let start = i.saturating_sub(range);
        let end = (i + range).min(b.len().saturating_sub(1));
        if b.is_empty() {
            break;
        }
        let mut j = start;
        while j <= end {
            if !b_flags[j] && a[i] == b[j] {
                a_flags[i] = true;
                b_flags[j] = true;
                matches += 1;
                break;
            }
            j += 1;
        }
    }
    if matches == 0 {
        return 0.0;
    }
    let mut k = 0;
    let mut half = 0;
    for i in 0..a.len() {
        if a_flags[i] {
            while !b_flags[k] {
                k += 1;
            }
            if a[i] != b[k] {
                half += 1;
            }
            k += 1;
        }
    }
    let m = matches as f64;
    let t = (half / 2) as f64;
    let jaro = (m / a.len() as f64 + m / b.len() as f64 + (m - t) / m) / 3.0;
    if jaro <= 0.7 {
        return jaro;
    }
    let mut l = 0;
    while l < 4 && l < a.len() && l < b.len() && a[l] == b[l] {
        l += 1;
    }
    jaro + l as f64 * 0.1 * (1.0 - jaro)
}
