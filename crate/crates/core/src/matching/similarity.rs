//! Edit distance and Jaro-Winkler similarity over Unicode scalar values.

/// Minimum number of single-character insertions, deletions and substitutions.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if ca == cb {
                diag
            } else {
                1 + diag.min(above).min(row[j])
            };
            diag = above;
        }
    }
    row[b.len()]
}

pub fn jaro(a: &str, b: &str) -> f64 {
    // order the pair so the result is bit-identical under argument swap
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut b_used = vec![false; b.len()];
    let mut a_matched = Vec::with_capacity(a.len());
    for (i, ca) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        if let Some(j) = (lo..hi).find(|&j| !b_used[j] && b[j] == *ca) {
            b_used[j] = true;
            a_matched.push(*ca);
        }
    }
    let m = a_matched.len();
    if m == 0 {
        return 0.0;
    }
    let b_matched = b.iter().zip(&b_used).filter(|(_, used)| **used).map(|(c, _)| c);
    let half_transpositions = a_matched.iter().zip(b_matched).filter(|(x, y)| x != y).count();
    let m = m as f64;
    let t = (half_transpositions / 2) as f64;
    (m / a.len() as f64 + m / b.len() as f64 + (m - t) / m) / 3.0
}

pub const WINKLER_SCALING: f64 = 0.1;
pub const WINKLER_MAX_PREFIX: usize = 4;
/// Jaro scores at or below this value get no prefix boost.
pub const WINKLER_BOOST_THRESHOLD: f64 = 0.7;

pub fn jaro_winkler(a: &str, b: &str) -> f64 {
    let sim = jaro(a, b);
    if sim <= WINKLER_BOOST_THRESHOLD {
        return sim;
    }
    let prefix = a
        .chars()
        .zip(b.chars())
        .take(WINKLER_MAX_PREFIX)
        .take_while(|(x, y)| x == y)
        .count();
    sim + prefix as f64 * WINKLER_SCALING * (1.0 - sim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein("Scott", "Scoth"), 1);
        assert_eq!(levenshtein("x", "x"), 0);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
    }

    #[test]
    fn jaro_winkler_examples() {
        // jaro = (4/5 + 4/5 + 4/4) / 3, four-character common prefix
        let jaro_ss = (0.8 + 0.8 + 1.0) / 3.0;
        assert!((jaro("Scott", "Scoth") - jaro_ss).abs() < 1e-12);
        assert!((jaro_winkler("Scott", "Scoth") - (jaro_ss + 0.4 * (1.0 - jaro_ss))).abs() < 1e-12);
        assert!((jaro_winkler("Scott", "Scoth") - 0.92).abs() < 1e-9);
        assert_eq!(jaro_winkler("a", "a"), 1.0);
        assert!((jaro_winkler("MARTHA", "MARHTA") - 0.961_111_111_111).abs() < 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(jaro_winkler("", ""), 1.0);
        assert_eq!(jaro_winkler("", "a"), 0.0);
        assert_eq!(jaro_winkler("abc", "xyz"), 0.0);
    }
}
