use std::collections::HashMap;

/// Unrestricted Damerau-Levenshtein distance over Unicode scalar values.
///
/// Insertions, deletions, substitutions and transpositions of adjacent
/// characters each cost one, and a transposed pair may be edited further
/// (so `ca` -> `abc` is 2, where the optimal-string-alignment variant gives 3).
/// Comparison is case-sensitive.
pub fn damerau_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (n, m) = (a.len(), b.len());
    if n == 0 {
        return m;
    }
    if m == 0 {
        return n;
    }

    // Lowrance-Wagner: rows and columns are shifted by one to hold the
    // sentinel `max` border.
    let max = n + m;
    let width = m + 2;
    let mut d = vec![0usize; (n + 2) * width];
    let at = |i: usize, j: usize| i * width + j;
    d[at(0, 0)] = max;
    for i in 0..=n {
        d[at(i + 1, 0)] = max;
        d[at(i + 1, 1)] = i;
    }
    for j in 0..=m {
        d[at(0, j + 1)] = max;
        d[at(1, j + 1)] = j;
    }

    // last row in which each character of `a` was seen
    let mut last_row: HashMap<char, usize> = HashMap::new();
    for i in 1..=n {
        let mut last_match_col = 0;
        for j in 1..=m {
            let i1 = last_row.get(&b[j - 1]).copied().unwrap_or(0);
            let j1 = last_match_col;
            let cost = if a[i - 1] == b[j - 1] {
                last_match_col = j;
                0
            } else {
                1
            };
            let substitute = d[at(i, j)] + cost;
            let insert = d[at(i + 1, j)] + 1;
            let delete = d[at(i, j + 1)] + 1;
            let transpose = d[at(i1, j1)] + (i - i1 - 1) + 1 + (j - j1 - 1);
            d[at(i + 1, j + 1)] = substitute.min(insert).min(delete).min(transpose);
        }
        last_row.insert(a[i - 1], i);
    }
    d[at(n + 1, m + 1)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(damerau_levenshtein("x", "x"), 0);
        assert_eq!(damerau_levenshtein("grpe", "grep"), 1);
        assert_eq!(damerau_levenshtein("got", "git"), 1);
        assert_eq!(damerau_levenshtein("gti", "git"), 1);
        assert_eq!(damerau_levenshtein("Jupyter", "jupyter"), 1);
        assert_eq!(damerau_levenshtein("g", "git"), 2);
        assert_eq!(damerau_levenshtein("", "abc"), 3);
        assert_eq!(damerau_levenshtein("abc", ""), 3);
        assert_eq!(damerau_levenshtein("kitten", "sitting"), 3);
    }

    #[test]
    fn unrestricted_transposition() {
        // the optimal-string-alignment distance here is 3
        assert_eq!(damerau_levenshtein("ca", "abc"), 2);
    }

    #[test]
    fn counts_characters_not_bytes() {
        assert_eq!(damerau_levenshtein("café", "cafe"), 1);
        assert_eq!(damerau_levenshtein("ü", "ü"), 0);
    }
}
