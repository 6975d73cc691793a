use serde::Serialize;

use crate::record::{is_canonical_orcid, Orcid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OrcidValidity {
    CanonicalHyphenated,
    Reformatted,
    StructurallyInvalid,
    AllZero,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrcidParse {
    pub groups: Option<[String; 4]>,
    pub validity: OrcidValidity,
}

impl OrcidParse {
    /// The hyphenated identifier for the two well-formed states.
    pub fn canonical(&self) -> Option<Orcid> {
        match self.validity {
            OrcidValidity::CanonicalHyphenated | OrcidValidity::Reformatted => {
                self.groups.as_ref().map(Orcid::from_groups)
            }
            _ => None,
        }
    }
}

pub fn parse_orcid(id_text: &str) -> OrcidParse {
    let text = id_text.trim();
    let bare: Option<String> = if text.len() == 19 && is_canonical_orcid(&text.to_ascii_uppercase()) {
        Some(text.chars().filter(|c| *c != '-').collect())
    } else if text.len() == 16 && text.chars().all(|c| c.is_ascii_alphanumeric()) {
        Some(text.to_owned())
    } else {
        None
    };

    let Some(bare) = bare else {
        return OrcidParse { groups: None, validity: OrcidValidity::StructurallyInvalid };
    };
    if bare.bytes().all(|b| b == b'0') {
        return OrcidParse { groups: None, validity: OrcidValidity::AllZero };
    }
    let upper = bare.to_ascii_uppercase();
    let groups = [0, 4, 8, 12].map(|i| upper[i..i + 4].to_owned());
    let validity = if text.len() == 19 && text == groups.join("-") {
        OrcidValidity::CanonicalHyphenated
    } else {
        OrcidValidity::Reformatted
    };
    OrcidParse { groups: Some(groups), validity }
}

/// ISO 7064 MOD 11-2 check over the first 15 digits against the 16th character.
pub fn orcid_checksum_ok(orcid: &Orcid) -> bool {
    let chars: Vec<char> = orcid.digits().collect();
    let mut total: u32 = 0;
    for c in &chars[..15] {
        let Some(d) = c.to_digit(10) else { return false };
        total = (total + d) * 2;
    }
    let check = (12 - total % 11) % 11;
    let expected = if check == 10 { 'X' } else { char::from_digit(check, 10).unwrap_or('?') };
    chars[15] == expected
}
