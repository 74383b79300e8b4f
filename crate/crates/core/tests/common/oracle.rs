//! Reference implementations checked against the library.

use std::collections::{HashMap, VecDeque};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Piece {
    Word(String),
    Op(String),
}

/// Split a value into words and operators, tracking quotes, escapes,
/// `$(...)`, `${...}` and backticks. `None` when a quote or group is left
/// open. No redirection handling: callers avoid `<` and `>` before `&`.
pub fn pieces(value: &str) -> Option<Vec<Piece>> {
    let chars: Vec<char> = value.chars().collect();
    let mut out = Vec::new();
    let mut word = String::new();
    let mut i = 0;
    let flush = |word: &mut String, out: &mut Vec<Piece>| {
        if !word.is_empty() {
            out.push(Piece::Word(std::mem::take(word)));
        }
    };
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\r' => {
                flush(&mut word, &mut out);
                i += 1;
            }
            '|' | '&' | ';' => {
                flush(&mut word, &mut out);
                let next = chars.get(i + 1).copied();
                let op = match (c, next) {
                    ('|', Some('&')) => "|&",
                    ('|', Some('|')) => "||",
                    ('&', Some('&')) => "&&",
                    _ => "",
                };
                if op.is_empty() {
                    out.push(Piece::Op(c.to_string()));
                    i += 1;
                } else {
                    out.push(Piece::Op(op.to_string()));
                    i += 2;
                }
            }
            _ => {
                let end = quoted_end(&chars, i)?;
                word.extend(&chars[i..end]);
                i = end;
            }
        }
    }
    flush(&mut word, &mut out);
    Some(out)
}

/// End (exclusive) of the quoting construct or plain character at `i`.
fn quoted_end(chars: &[char], i: usize) -> Option<usize> {
    match chars[i] {
        '\\' => Some((i + 2).min(chars.len())),
        '\'' => chars[i + 1..].iter().position(|&c| c == '\'').map(|p| i + p + 2),
        '"' => {
            let mut j = i + 1;
            while j < chars.len() {
                match chars[j] {
                    '"' => return Some(j + 1),
                    '\\' => j += 2,
                    '`' | '$' => j = quoted_end(chars, j)?,
                    _ => j += 1,
                }
            }
            None
        }
        '`' => {
            let mut j = i + 1;
            while j < chars.len() {
                match chars[j] {
                    '`' => return Some(j + 1),
                    '\\' => j += 2,
                    _ => j += 1,
                }
            }
            None
        }
        '$' if matches!(chars.get(i + 1), Some('(') | Some('{')) => {
            let (open, close) = if chars[i + 1] == '(' { ('(', ')') } else { ('{', '}') };
            let mut depth = 0;
            let mut j = i + 1;
            while j < chars.len() {
                let c = chars[j];
                if c == open {
                    depth += 1;
                    j += 1;
                } else if c == close {
                    depth -= 1;
                    j += 1;
                    if depth == 0 {
                        return Some(j);
                    }
                } else if matches!(c, '\'' | '"' | '`' | '\\') {
                    j = quoted_end(chars, j)?;
                } else {
                    j += 1;
                }
            }
            None
        }
        _ => Some(i + 1),
    }
}

/// Collapse unquoted whitespace and space out operators.
pub fn normalize(value: &str) -> Option<String> {
    let p = pieces(value)?;
    Some(
        p.iter()
            .map(|p| match p {
                Piece::Word(w) | Piece::Op(w) => w.as_str(),
            })
            .collect::<Vec<_>>()
            .join(" "),
    )
}

/// Operators at quote depth zero, and whether the value ends with one.
pub fn separator_count(value: &str) -> Option<(usize, bool)> {
    let p = pieces(value)?;
    let n = p.iter().filter(|x| matches!(x, Piece::Op(_))).count();
    Some((n, matches!(p.last(), Some(Piece::Op(_)))))
}

/// True if an operator starts the value or follows another operator.
pub fn has_empty_command(value: &str) -> Option<bool> {
    let p = pieces(value)?;
    let mut prev_op = true;
    for x in &p {
        let op = matches!(x, Piece::Op(_));
        if op && prev_op {
            return Some(true);
        }
        prev_op = op;
    }
    Some(false)
}

/// Edit distances from `start` to every string over `alphabet` no longer
/// than `max_len`, by breadth-first search over single edits: insert,
/// delete, substitute, swap adjacent.
pub fn edit_ball(start: &str, alphabet: &[char], max_len: usize) -> HashMap<String, usize> {
    let mut dist = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(start.to_string(), 0);
    queue.push_back(start.to_string());
    while let Some(s) = queue.pop_front() {
        let d = dist[&s];
        let cs: Vec<char> = s.chars().collect();
        let mut next = Vec::new();
        for i in 0..=cs.len() {
            if cs.len() < max_len {
                for &a in alphabet {
                    let mut t = cs.clone();
                    t.insert(i, a);
                    next.push(t);
                }
            }
            if i < cs.len() {
                let mut t = cs.clone();
                t.remove(i);
                next.push(t);
                for &a in alphabet {
                    if a != cs[i] {
                        let mut t = cs.clone();
                        t[i] = a;
                        next.push(t);
                    }
                }
            }
            if i + 1 < cs.len() {
                let mut t = cs.clone();
                t.swap(i, i + 1);
                next.push(t);
            }
        }
        for t in next {
            let t: String = t.into_iter().collect();
            if !dist.contains_key(&t) {
                dist.insert(t.clone(), d + 1);
                queue.push_back(t);
            }
        }
    }
    dist
}

/// Every string over `alphabet` of length at most `max_len`.
pub fn all_strings(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..max_len {
        frontier = frontier
            .iter()
            .flat_map(|s| alphabet.iter().map(move |&a| format!("{s}{a}")))
            .collect();
        out.extend(frontier.iter().cloned());
    }
    out
}

/// Median by sorting.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
