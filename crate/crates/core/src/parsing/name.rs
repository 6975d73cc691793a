use serde::Serialize;

use super::{tokenize, Lexicons};
use crate::record::NameOrder;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NameParse {
    pub titles: Vec<String>,
    pub given: Option<String>,
    pub middle: Option<String>,
    pub family: Option<String>,
    pub order_confidence: NameOrder,
}

impl NameParse {
    /// True when the input held nothing but titles.
    pub fn is_failure(&self) -> bool {
        self.given.is_none() && self.family.is_none()
    }

    /// Every token of the parse, titles first.
    pub fn tokens(&self) -> Vec<String> {
        let mut out = self.titles.clone();
        for part in [&self.given, &self.middle, &self.family].into_iter().flatten() {
            out.extend(part.split(' ').map(str::to_owned));
        }
        out
    }
}

/// Splits a personal name into titles and given/middle/family parts.
///
/// `Family, Given [Middle]` is read family-first. Otherwise tokens are assigned
/// positionally; a bare two-token name is flagged [`NameOrder::Ambiguous`].
pub fn parse_name(name_text: &str, lexicons: &Lexicons) -> NameParse {
    let (family_first, head, tail) = match name_text.split_once(',') {
        Some((head, tail)) if !tokenize(head).is_empty() && !tokenize(tail).is_empty() => {
            (true, head, tail)
        }
        _ => (false, name_text, ""),
    };

    let mut titles = Vec::new();
    let mut keep = |text: &str| -> Vec<String> {
        tokenize(text)
            .into_iter()
            .filter(|t| {
                let is_title = lexicons.titles.contains(t);
                if is_title {
                    titles.push(t.clone());
                }
                !is_title
            })
            .collect()
    };
    let head = keep(head);
    let tail = keep(tail);

    let (given, middle, family, order) = if family_first && !head.is_empty() && !tail.is_empty() {
        let family = head.join(" ");
        let (given, middle) = split_first(&tail);
        (Some(given), middle, Some(family), NameOrder::FamilyFirst)
    } else {
        let rest: Vec<String> = head.into_iter().chain(tail).collect();
        match rest.len() {
            0 => (None, None, None, NameOrder::Ambiguous),
            1 => (None, None, Some(rest[0].clone()), NameOrder::GivenFirst),
            2 => (Some(rest[0].clone()), None, Some(rest[1].clone()), NameOrder::Ambiguous),
            n => (
                Some(rest[0].clone()),
                Some(rest[1..n - 1].join(" ")),
                Some(rest[n - 1].clone()),
                NameOrder::GivenFirst,
            ),
        }
    };

    NameParse { titles, given, middle, family, order_confidence: order }
}

fn split_first(tokens: &[String]) -> (String, Option<String>) {
    let middle = (tokens.len() > 1).then(|| tokens[1..].join(" "));
    (tokens[0].clone(), middle)
}
