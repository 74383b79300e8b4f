use regex::Regex;
use std::fmt;
use std::sync::LazyLock;

use super::kb::KnowledgeBase;
use crate::parser::unquote;

static IPV4: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[0-9]+\.[0-9]+\.[0-9]+\.[0-9]+").unwrap());
static DOMAIN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\.([A-Za-z0-9-]+)(?:[/:]|$)").unwrap());
static REMOTE_REF: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^([A-Za-z0-9._-]+)/[A-Za-z0-9._-]+$").unwrap());

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocationKind {
    Path,
    Url,
    Ipv4,
    Domain,
}

impl LocationKind {
    pub fn is_remote(self) -> bool {
        !matches!(self, LocationKind::Path)
    }

    pub fn name(self) -> &'static str {
        match self {
            LocationKind::Path => "path",
            LocationKind::Url => "url",
            LocationKind::Ipv4 => "ipv4",
            LocationKind::Domain => "domain",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exclusion {
    /// A literal from the exclusion list, e.g. `/dev/null`.
    Literal,
    /// `origin/master` and similar remote-tracking refs.
    RemoteRef,
    /// Only dots and slashes, like `../..`.
    UnnamedRelative,
}

impl Exclusion {
    pub fn name(self) -> &'static str {
        match self {
            Exclusion::Literal => "literal",
            Exclusion::RemoteRef => "remote-ref",
            Exclusion::UnnamedRelative => "unnamed-relative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocationVerdict {
    Location(LocationKind),
    Excluded(Exclusion),
    NotLocation,
}

impl LocationVerdict {
    pub fn is_location(self) -> bool {
        matches!(self, LocationVerdict::Location(_))
    }
}

impl fmt::Display for LocationVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocationVerdict::Location(k) => write!(f, "location:{}", k.name()),
            LocationVerdict::Excluded(e) => write!(f, "excluded:{}", e.name()),
            LocationVerdict::NotLocation => f.write_str("none"),
        }
    }
}

/// Whether `argument` names a location, ignoring which command it belongs to.
pub fn is_location(argument: &str, kb: &KnowledgeBase) -> bool {
    location_verdict(argument, None, kb).is_location()
}

/// Classify one argument token. `command` enables the git remote-ref rule.
pub fn location_verdict(argument: &str, command: Option<&str>, kb: &KnowledgeBase) -> LocationVerdict {
    let text = unquote(argument).unwrap_or_else(|_| argument.to_string());
    let Some(kind) = positive_kind(&text, kb) else {
        return LocationVerdict::NotLocation;
    };
    match exclusion(&text, command, kb) {
        Some(e) => LocationVerdict::Excluded(e),
        None => LocationVerdict::Location(kind),
    }
}

fn positive_kind(text: &str, kb: &KnowledgeBase) -> Option<LocationKind> {
    if text.contains("://") {
        return Some(LocationKind::Url);
    }
    if text.contains('/') {
        return Some(LocationKind::Path);
    }
    if IPV4.is_match(text) {
        return Some(LocationKind::Ipv4);
    }
    let has_tld = DOMAIN
        .captures_iter(text)
        .any(|c| kb.tld_set.contains(&c[1].to_ascii_lowercase()));
    has_tld.then_some(LocationKind::Domain)
}

fn exclusion(text: &str, command: Option<&str>, kb: &KnowledgeBase) -> Option<Exclusion> {
    let target = strip_redirect(text);
    let after_eq = target.rsplit_once('=').map(|(_, r)| r);
    if [Some(text), Some(target), after_eq]
        .into_iter()
        .flatten()
        .any(|t| kb.location_exclusions.contains(t))
    {
        return Some(Exclusion::Literal);
    }
    if let Some(c) = REMOTE_REF.captures(target) {
        if kb.remote_names.contains(&c[1]) || command == Some("git") {
            return Some(Exclusion::RemoteRef);
        }
    }
    if target.contains('.') && target.chars().all(|c| c == '.' || c == '/') {
        return Some(Exclusion::UnnamedRelative);
    }
    None
}

/// `2>/dev/null` -> `/dev/null`, `&>log` -> `log`.
fn strip_redirect(text: &str) -> &str {
    let prefix = text
        .find(|c: char| !(c.is_ascii_digit() || matches!(c, '<' | '>' | '&' | '|')))
        .unwrap_or(text.len());
    if text[..prefix].contains(['<', '>']) {
        &text[prefix..]
    } else {
        text
    }
}
