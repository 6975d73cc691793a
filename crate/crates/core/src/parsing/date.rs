use chrono::{Datelike, NaiveDate};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DatePrecision {
    Full,
    YearOnly,
    Unparseable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DateParse {
    pub year: Option<i32>,
    pub month: Option<u32>,
    pub day: Option<u32>,
    pub precision: DatePrecision,
    /// Shape of the input, e.g. `MM/DD/YYYY`; `unrecognized` when no shape applies.
    pub source_format: String,
    pub note: Option<String>,
}

impl DateParse {
    fn full(date: NaiveDate, format: &str) -> Self {
        Self {
            year: Some(date.year()),
            month: Some(date.month()),
            day: Some(date.day()),
            precision: DatePrecision::Full,
            source_format: format.into(),
            note: None,
        }
    }

    fn unparseable(format: &str, note: impl Into<String>) -> Self {
        Self {
            year: None,
            month: None,
            day: None,
            precision: DatePrecision::Unparseable,
            source_format: format.into(),
            note: Some(note.into()),
        }
    }

    pub fn date(&self) -> Option<NaiveDate> {
        match self.precision {
            DatePrecision::Full => NaiveDate::from_ymd_opt(self.year?, self.month?, self.day?),
            _ => None,
        }
    }
}

/// Two-digit years below 30 are in the 2000s, the rest in the 1900s.
pub const TWO_DIGIT_YEAR_PIVOT: i32 = 30;

/// Reads a birth date, disambiguating field order by separator:
/// `/` is month-first, `.` and `-` are day-first, and `YYYY-MM-DD` is ISO.
pub fn parse_date(date_text: &str) -> DateParse {
    let text = date_text.trim();
    if text.len() == 4 && is_digits(text) {
        return DateParse {
            year: text.parse().ok(),
            month: None,
            day: None,
            precision: DatePrecision::YearOnly,
            source_format: "YYYY".into(),
            note: None,
        };
    }
    if is_digits(text) {
        return DateParse::unparseable(
            "undelimited",
            format!("{}-digit run without separators", text.len()),
        );
    }

    let Some(sep) = ['/', '.', '-'].into_iter().find(|s| text.contains(*s)) else {
        return DateParse::unparseable("unrecognized", "no date separator");
    };
    let parts: Vec<&str> = text.split(sep).collect();
    if parts.len() != 3 || !parts.iter().all(|p| !p.is_empty() && is_digits(p)) {
        return DateParse::unparseable("unrecognized", format!("expected three numeric parts around `{sep}`"));
    }

    let iso = sep == '-' && parts[0].len() == 4;
    let (day_part, month_part, year_part) = match sep {
        '/' => (parts[1], parts[0], parts[2]),
        _ if iso => (parts[2], parts[1], parts[0]),
        _ => (parts[0], parts[1], parts[2]),
    };
    if day_part.len() > 2 || month_part.len() > 2 {
        return DateParse::unparseable("unrecognized", "day or month longer than two digits");
    }
    let two_digit = year_part.len() == 2;
    let format = match (sep, two_digit) {
        ('/', false) => "MM/DD/YYYY",
        ('/', true) => "MM/DD/YY",
        ('.', false) => "DD.MM.YYYY",
        ('.', true) => "DD.MM.YY",
        ('-', _) if iso => "YYYY-MM-DD",
        ('-', false) => "D-M-YYYY",
        _ => "D-M-YY",
    };
    let year: i32 = match year_part.len() {
        4 => year_part.parse().unwrap_or_default(),
        2 => {
            let yy: i32 = year_part.parse().unwrap_or_default();
            if yy < TWO_DIGIT_YEAR_PIVOT {
                2000 + yy
            } else {
                1900 + yy
            }
        }
        _ => return DateParse::unparseable(format, "year must have two or four digits"),
    };
    let month: u32 = month_part.parse().unwrap_or_default();
    let day: u32 = day_part.parse().unwrap_or_default();
    if !(1..=12).contains(&month) {
        return DateParse::unparseable(format, format!("month {month} out of range"));
    }
    match NaiveDate::from_ymd_opt(year, month, day) {
        Some(d) => DateParse::full(d, format),
        None => DateParse::unparseable(format, format!("day {day} out of range for {year}-{month:02}")),
    }
}

pub fn format_date(date: NaiveDate) -> String {
    date.format("%Y-%m-%d").to_string()
}

fn is_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}
