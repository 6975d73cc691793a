use serde::Serialize;

use super::{tokenize, Lexicons};
use crate::record::is_zip;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AddressParse {
    pub house_tokens: Vec<String>,
    pub street_name: Option<String>,
    pub city: Option<String>,
    pub state: Option<String>,
    pub zip_candidate: Option<String>,
    /// Unassigned tokens that precede the zip.
    pub leftover: Vec<String>,
    /// Unassigned tokens that follow the zip.
    pub trailing: Vec<String>,
    /// House tokens followed by street name and leftovers in source order.
    pub street_tokens: Vec<String>,
    /// Order of recognised components, e.g. `house-street-city-zip`.
    pub format: String,
}

impl AddressParse {
    pub fn is_recognized(&self) -> bool {
        self.zip_candidate.is_some() || self.street_name.is_some() || self.city.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    House,
    Street,
    City,
    State,
    Zip,
    Leftover,
}

impl Role {
    fn label(self) -> &'static str {
        match self {
            Role::House => "house",
            Role::Street => "street",
            Role::City => "city",
            Role::State => "state",
            Role::Zip => "zip",
            Role::Leftover => "other",
        }
    }
}

/// Splits a free-form postal address into house, street, city, state and zip.
///
/// Also accepts the canonical `zip; state; city; street` rendering.
pub fn parse_address(address_text: &str, lexicons: &Lexicons) -> AddressParse {
    if let Some(p) = parse_canonical(address_text, lexicons) {
        return p;
    }
    parse_free(address_text, lexicons, true)
}

fn parse_canonical(text: &str, lexicons: &Lexicons) -> Option<AddressParse> {
    if !text.contains(';') {
        return None;
    }
    let segments: Vec<&str> = text.split(';').map(str::trim).filter(|s| !s.is_empty()).collect();
    let mut rest = &segments[..];
    let mut zip = None;
    let mut state = None;
    if let Some((first, tail)) = rest.split_first() {
        if is_zip(first) {
            zip = Some((*first).to_owned());
            rest = tail;
        }
    }
    if let Some((first, tail)) = rest.split_first() {
        if is_state_code(first) {
            state = Some((*first).to_owned());
            rest = tail;
        }
    }
    let (city, street) = match rest {
        [] => (None, None),
        [one] => {
            let looks_like_street = one.chars().any(|c| c.is_ascii_digit())
                || tokenize(one).iter().any(|t| lexicons.street_suffixes.contains(t));
            if looks_like_street {
                (None, Some(*one))
            } else {
                (Some(*one), None)
            }
        }
        [city, street] => (Some(*city), Some(*street)),
        _ => return None,
    };
    if city.is_some_and(|c| tokenize(c).iter().any(|t| !is_word(t))) {
        return None;
    }

    let street_parse = street.map(|s| parse_free(s, lexicons, false));
    let mut out = street_parse.unwrap_or_else(|| AddressParse {
        house_tokens: vec![],
        street_name: None,
        city: None,
        state: None,
        zip_candidate: None,
        leftover: vec![],
        trailing: vec![],
        street_tokens: vec![],
        format: String::new(),
    });
    out.city = city.map(|c| tokenize(c).join(" "));
    out.state = state;
    out.zip_candidate = zip;
    out.format = "canonical".into();
    Some(out)
}

fn parse_free(text: &str, lexicons: &Lexicons, detect_city: bool) -> AddressParse {
    let mut tokens: Vec<(usize, String)> = Vec::new();
    for (segment, part) in text.split(',').enumerate() {
        tokens.extend(tokenize(part).into_iter().map(|t| (segment, t)));
    }
    let n = tokens.len();
    let mut roles: Vec<Option<Role>> = vec![None; n];
    let tok = |i: usize| tokens[i].1.as_str();

    let zip_idx = (0..n).find(|&i| is_zip(tok(i)));
    if let Some(z) = zip_idx {
        roles[z] = Some(Role::Zip);
    }

    // leading house number, optionally followed by a unit letter ("145 F.")
    let mut i = 0;
    while i < n && roles[i].is_none() && has_digit(tok(i)) {
        roles[i] = Some(Role::House);
        i += 1;
    }
    if i > 0 && i < n && roles[i].is_none() && is_initial(tok(i)) {
        roles[i] = Some(Role::House);
    }

    let suffix_idx = (0..n)
        .rev()
        .find(|&i| roles[i].is_none() && lexicons.street_suffixes.contains(tok(i)));
    if let Some(s) = suffix_idx {
        roles[s] = Some(Role::Street);
        let segment = tokens[s].0;
        for j in (0..s).rev() {
            if tokens[j].0 != segment {
                break;
            }
            match roles[j] {
                Some(Role::Zip) => continue,
                None if !has_digit(tok(j)) => roles[j] = Some(Role::Street),
                _ => break,
            }
        }
    }

    if let Some(z) = zip_idx {
        if z > 0 && roles[z - 1].is_none() && is_state_code(tok(z - 1)) {
            roles[z - 1] = Some(Role::State);
        }
    }

    if detect_city {
        let end = match zip_idx {
            Some(z) if z > 0 && roles[z - 1] == Some(Role::State) => z - 1,
            Some(z) => z,
            None => n,
        };
        let floor = suffix_idx.map_or(0, |s| s + 1);
        let mut start = end;
        while start > floor && roles[start - 1].is_none() && is_word(tok(start - 1)) {
            start -= 1;
        }
        for role in &mut roles[start..end] {
            *role = Some(Role::City);
        }
    }

    if !roles.contains(&Some(Role::House)) {
        for (k, role) in roles.iter_mut().enumerate() {
            if role.is_none() && has_digit(tokens[k].1.as_str()) {
                *role = Some(Role::House);
            }
        }
    }

    let zip_pos = zip_idx.unwrap_or(n);
    let mut leftover = Vec::new();
    let mut trailing = Vec::new();
    for k in 0..n {
        if roles[k].is_none() {
            roles[k] = Some(Role::Leftover);
            if k < zip_pos {
                leftover.push(tokens[k].1.clone());
            } else {
                trailing.push(tokens[k].1.clone());
            }
        }
    }

    let collect = |role: Role| -> Vec<String> {
        (0..n).filter(|&k| roles[k] == Some(role)).map(|k| tokens[k].1.clone()).collect()
    };
    let joined = |role: Role| -> Option<String> {
        let parts = collect(role);
        (!parts.is_empty()).then(|| parts.join(" "))
    };

    let house_tokens = collect(Role::House);
    let mut street_tokens = house_tokens.clone();
    street_tokens.extend((0..zip_pos).filter_map(|k| match roles[k] {
        Some(Role::Street | Role::Leftover) => Some(tokens[k].1.clone()),
        _ => None,
    }));

    let mut labels: Vec<&str> = Vec::new();
    for role in roles.iter().flatten() {
        if labels.last() != Some(&role.label()) {
            labels.push(role.label());
        }
    }
    let mut format = labels.join("-");
    if text.contains(',') {
        format.push_str("/comma");
    }

    AddressParse {
        house_tokens,
        street_name: joined(Role::Street),
        city: joined(Role::City),
        state: joined(Role::State),
        zip_candidate: zip_idx.map(|z| tokens[z].1.clone()),
        leftover,
        trailing,
        street_tokens,
        format,
    }
}

fn has_digit(t: &str) -> bool {
    t.chars().any(|c| c.is_ascii_digit())
}

/// A single letter, optionally followed by a period.
fn is_initial(t: &str) -> bool {
    let core = t.strip_suffix('.').unwrap_or(t);
    core.chars().count() == 1 && core.chars().all(char::is_alphabetic)
}

fn is_word(t: &str) -> bool {
    t.chars().any(char::is_alphabetic) && t.chars().all(|c| c.is_alphabetic() || c == '-' || c == '\'')
}

fn is_state_code(t: &str) -> bool {
    t.len() == 2 && t.bytes().all(|b| b.is_ascii_uppercase())
}
