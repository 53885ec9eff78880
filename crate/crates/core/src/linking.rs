//! Event-data players to market-value players, by exact normalized name.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use crate::error::{CoreError, Result};
use crate::market::PlayerDirectory;

/// Case-folded, diacritics stripped, punctuation collapsed to single spaces.
pub fn normalize_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.nfkd().filter(|c| !is_combining_mark(*c)) {
        let mapped = match c {
            'ø' | 'Ø' => "o",
            'ß' => "ss",
            'ł' | 'Ł' => "l",
            'đ' | 'Đ' | 'ð' | 'Ð' => "d",
            'æ' | 'Æ' => "ae",
            'œ' | 'Œ' => "oe",
            'ı' => "i",
            'þ' | 'Þ' => "th",
            _ => "",
        };
        if !mapped.is_empty() {
            out.push_str(mapped);
        } else if c.is_alphanumeric() {
            out.extend(c.to_lowercase());
        } else {
            out.push(' ');
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkCandidate {
    pub player_id: u64,
    pub name: String,
    pub nickname: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum UnmatchedReason {
    NotFound,
    Ambiguous { candidates: Vec<u64> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unmatched {
    pub player_id: u64,
    pub name: String,
    #[serde(flatten)]
    pub reason: UnmatchedReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkReport {
    /// Event-data player id to market-value player id.
    pub links: BTreeMap<u64, u64>,
    pub overridden: Vec<u64>,
    pub unmatched: Vec<Unmatched>,
}

/// `event_player_id,market_player_id` per line; `#` starts a comment.
pub fn parse_overrides(text: &str) -> Result<BTreeMap<u64, u64>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let bad = || CoreError::BadOverride {
            line: i + 1,
            text: line.to_string(),
        };
        let (a, b) = line.split_once(',').ok_or_else(bad)?;
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        out.insert(a, b);
    }
    Ok(out)
}

/// Tries the nickname, then the full name; the first form with exactly one
/// match wins. Names with several matches and no unique form are reported
/// as ambiguous, never guessed.
pub fn link_players(
    candidates: &[LinkCandidate],
    directory: &PlayerDirectory,
    overrides: &BTreeMap<u64, u64>,
) -> LinkReport {
    let mut index: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for meta in directory.players.values() {
        index
            .entry(normalize_name(&meta.name))
            .or_default()
            .push(meta.player_id);
    }

    let mut report = LinkReport::default();
    for c in candidates {
        if let Some(&target) = overrides.get(&c.player_id) {
            report.links.insert(c.player_id, target);
            report.overridden.push(c.player_id);
            continue;
        }
        let forms = c.nickname.iter().chain(std::iter::once(&c.name));
        let mut ambiguous: Option<Vec<u64>> = None;
        let mut linked = None;
        for form in forms {
            match index.get(&normalize_name(form)).map(Vec::as_slice) {
                Some([only]) => {
                    linked = Some(*only);
                    break;
                }
                Some(many) if many.len() > 1 => {
                    ambiguous.get_or_insert_with(|| many.to_vec());
                }
                _ => {}
            }
        }
        match (linked, ambiguous) {
            (Some(target), _) => {
                report.links.insert(c.player_id, target);
            }
            (None, Some(candidates)) => report.unmatched.push(Unmatched {
                player_id: c.player_id,
                name: c.name.clone(),
                reason: UnmatchedReason::Ambiguous { candidates },
            }),
            (None, None) => report.unmatched.push(Unmatched {
                player_id: c.player_id,
                name: c.name.clone(),
                reason: UnmatchedReason::NotFound,
            }),
        }
    }
    report
}
