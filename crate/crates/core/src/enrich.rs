//! Fills missing address components from a zip/city/state gazetteer.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::record::{is_zip, CleanRecord, Field, StatusState};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Place {
    pub city: String,
    pub state: String,
}

/// Bidirectional zip ↔ place lookup.
///
/// Places served by more than one zip are absent from the reverse map, so a
/// city alone never guesses a zip.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    zip_to_place: BTreeMap<String, Place>,
    place_to_zip: BTreeMap<(String, String), String>,
    city_to_zips: BTreeMap<String, BTreeSet<String>>,
}

#[derive(Debug, Clone, Default)]
pub struct GazetteerLoad {
    pub gazetteer: Gazetteer,
    pub warnings: Vec<String>,
}

/// Case-folds and collapses internal whitespace.
pub fn normalize_city(city: &str) -> String {
    city.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

impl Gazetteer {
    pub fn from_entries<I>(entries: I) -> Self
    where
        I: IntoIterator<Item = (String, Place)>,
    {
        let zip_to_place: BTreeMap<String, Place> = entries.into_iter().collect();
        let mut by_place: BTreeMap<(String, String), BTreeSet<String>> = BTreeMap::new();
        let mut city_to_zips: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (zip, place) in &zip_to_place {
            let city = normalize_city(&place.city);
            by_place
                .entry((city.clone(), place.state.to_uppercase()))
                .or_default()
                .insert(zip.clone());
            city_to_zips.entry(city).or_default().insert(zip.clone());
        }
        let place_to_zip = by_place
            .into_iter()
            .filter(|(_, zips)| zips.len() == 1)
            .map(|(k, zips)| (k, zips.into_iter().next().unwrap_or_default()))
            .collect();
        Self { zip_to_place, place_to_zip, city_to_zips }
    }

    pub fn len(&self) -> usize {
        self.zip_to_place.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zip_to_place.is_empty()
    }

    pub fn place(&self, zip: &str) -> Option<&Place> {
        self.zip_to_place.get(zip)
    }

    pub fn zip_for(&self, city: &str, state: Option<&str>) -> Option<&str> {
        let city = normalize_city(city);
        match state {
            Some(state) => self
                .place_to_zip
                .get(&(city, state.to_uppercase()))
                .map(String::as_str),
            None => {
                let zips = self.city_to_zips.get(&city)?;
                (zips.len() == 1).then(|| zips.iter().next().map(String::as_str)).flatten()
            }
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &Place)> {
        self.zip_to_place.iter().map(|(z, p)| (z.as_str(), p))
    }
}

pub fn load_gazetteer(path: &Path) -> Result<GazetteerLoad> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_gazetteer(file, path)
}

/// Reads `zip,city,state` rows. Malformed rows are skipped and duplicate zips
/// keep the last row, each with a warning.
pub fn read_gazetteer<R: Read>(reader: R, origin: &Path) -> Result<GazetteerLoad> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let mut warnings = Vec::new();
    let headers = match rdr.headers() {
        Ok(h) => h.clone(),
        Err(e) => return Err(Error::csv(origin, e)),
    };
    if headers.is_empty() || headers.iter().all(|h| h.trim().is_empty()) {
        return Ok(GazetteerLoad::default());
    }
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MissingColumn { path: origin.to_path_buf(), column: name.into() })
    };
    let (zc, cc, sc) = (col("zip")?, col("city")?, col("state")?);

    let mut entries: Vec<(String, Place)> = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                warnings.push(format!("line {line}: {e}"));
                continue;
            }
        };
        let cell = |c: usize| row.get(c).map(str::trim).unwrap_or("");
        let (zip, city, state) = (cell(zc), cell(cc), cell(sc));
        if !is_zip(zip) || city.is_empty() || state.is_empty() {
            warnings.push(format!("line {line}: malformed gazetteer row skipped"));
            continue;
        }
        let place = Place { city: city.to_owned(), state: state.to_uppercase() };
        if let Some(&at) = seen.get(zip) {
            warnings.push(format!("line {line}: duplicate zip {zip}, keeping the later row"));
            entries[at].1 = place;
        } else {
            seen.insert(zip.to_owned(), entries.len());
            entries.push((zip.to_owned(), place));
        }
    }
    for w in &warnings {
        log::warn!("{}: {w}", origin.display());
    }
    Ok(GazetteerLoad { gazetteer: Gazetteer::from_entries(entries), warnings })
}

/// Fills absent address components; present values are never overwritten.
pub fn enrich(record: &CleanRecord, gazetteer: &Gazetteer) -> CleanRecord {
    let mut out = record.clone();
    let Some(addr) = out.address.as_mut() else {
        return out;
    };
    let mut filled: Vec<(Field, String)> = Vec::new();

    if let Some(zip) = addr.zip.clone() {
        if let Some(place) = gazetteer.place(&zip) {
            let city_agrees = addr
                .city
                .as_deref()
                .is_none_or(|c| normalize_city(c) == normalize_city(&place.city));
            if addr.state.is_none() && city_agrees {
                addr.state = Some(place.state.clone());
                filled.push((Field::State, place.state.clone()));
            }
            if addr.city.is_none() {
                addr.city = Some(place.city.clone());
                filled.push((Field::City, place.city.clone()));
            }
        }
    } else if let Some(city) = addr.city.clone() {
        if let Some(zip) = gazetteer.zip_for(&city, addr.state.as_deref()) {
            let zip = zip.to_owned();
            addr.zip = Some(zip.clone());
            filled.push((Field::Zip, zip.clone()));
            if addr.state.is_none() {
                if let Some(place) = gazetteer.place(&zip) {
                    addr.state = Some(place.state.clone());
                    filled.push((Field::State, place.state.clone()));
                }
            }
        }
    }

    for (field, value) in filled {
        out.status_mut(field).record(StatusState::Enriched, "gazetteer_fill", &value);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::StructuredAddress;

    fn fixture() -> Gazetteer {
        read_gazetteer(
            "zip,city,state\n32801,Orlando,FL\n29502,Las Vegas,NV\n".as_bytes(),
            Path::new("<test>"),
        )
        .unwrap()
        .gazetteer
    }

    fn with_address(addr: StructuredAddress) -> CleanRecord {
        let mut r = CleanRecord::empty(1);
        r.address = Some(addr);
        r
    }

    #[test]
    fn loads_fixture() {
        let g = fixture();
        assert_eq!(g.len(), 2);
        assert_eq!(g.place("32801").unwrap().city, "Orlando");
        assert_eq!(g.zip_for("las  VEGAS", Some("NV")), Some("29502"));
    }

    #[test]
    fn empty_file_is_empty_gazetteer() {
        let load = read_gazetteer("".as_bytes(), Path::new("<test>")).unwrap();
        assert!(load.gazetteer.is_empty());
        let r = with_address(StructuredAddress { zip: Some("32801".into()), ..Default::default() });
        assert_eq!(enrich(&r, &load.gazetteer), r);
    }

    #[test]
    fn duplicate_zip_last_wins_with_warning() {
        let load = read_gazetteer(
            "zip,city,state\n32801,Orlando,FL\n32801,Winter Park,FL\n".as_bytes(),
            Path::new("<test>"),
        )
        .unwrap();
        assert_eq!(load.gazetteer.len(), 1);
        assert_eq!(load.warnings.len(), 1);
        assert_eq!(load.gazetteer.place("32801").unwrap().city, "Winter Park");
        assert_eq!(load.gazetteer.zip_for("Orlando", Some("FL")), None);
    }

    #[test]
    fn malformed_rows_skipped() {
        let load = read_gazetteer(
            "zip,city,state\n3280,Orlando,FL\n29502,Las Vegas,NV\n12345,,XX\n".as_bytes(),
            Path::new("<test>"),
        )
        .unwrap();
        assert_eq!(load.gazetteer.len(), 1);
        assert_eq!(load.warnings.len(), 2);
    }

    #[test]
    fn zip_fills_city_and_state() {
        let r = with_address(StructuredAddress {
            zip: Some("32801".into()),
            street: Some("145 F. Concord Street".into()),
            ..Default::default()
        });
        let e = enrich(&r, &fixture());
        let a = e.address.as_ref().unwrap();
        assert_eq!(a.state.as_deref(), Some("FL"));
        assert_eq!(a.city.as_deref(), Some("Orlando"));
        assert_eq!(e.status(Field::City).unwrap().state, StatusState::Enriched);
        assert_eq!(a.canonical(), "32801; FL; Orlando; 145 F. Concord Street");
    }

    #[test]
    fn city_fills_zip() {
        let r = with_address(StructuredAddress {
            city: Some("Las Vegas".into()),
            state: Some("NV".into()),
            ..Default::default()
        });
        let e = enrich(&r, &fixture());
        assert_eq!(e.address.as_ref().unwrap().zip.as_deref(), Some("29502"));
        assert_eq!(e.status(Field::Zip).unwrap().state, StatusState::Enriched);
    }

    #[test]
    fn unknown_zip_and_no_address_unchanged() {
        let none = CleanRecord::empty(3);
        assert_eq!(enrich(&none, &fixture()), none);
        let r = with_address(StructuredAddress { zip: Some("99999".into()), ..Default::default() });
        assert_eq!(enrich(&r, &fixture()), r);
    }

    #[test]
    fn maps_are_mutually_consistent() {
        let g = fixture();
        for (zip, place) in g.entries() {
            assert_eq!(g.zip_for(&place.city, Some(&place.state)), Some(zip));
        }
    }
}
