//! Aldebaran `.aut` text:
//!
//! ```text
//! des (initial, transitions, states)
//! (from, "label", to)
//! (from, i, to)
//! ```

use std::fmt::Write;

use thiserror::Error;

use super::{Lts, TAU};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum AutError {
    #[error("line {line}: malformed header: {message}")]
    Header { line: usize, message: String },
    #[error("line {line}: malformed transition: {message}")]
    Transition { line: usize, message: String },
    #[error("line {line}: state {id} out of range (the header declares {states} states)")]
    IdOutOfRange { line: usize, id: u64, states: usize },
    #[error("header declares {expected} transitions, found {found}")]
    Count { expected: usize, found: usize },
}

pub fn write_aut(l: &Lts) -> String {
    let mut out = format!("des ({}, {}, {})\n", l.initial, l.transitions.len(), l.states);
    for (a, lab, b) in &l.transitions {
        if lab == TAU {
            writeln!(out, "({a}, {TAU}, {b})").unwrap();
        } else {
            writeln!(out, "({a}, \"{lab}\", {b})").unwrap();
        }
    }
    out
}

fn number(s: &str, line: usize, header: bool) -> Result<u64, AutError> {
    s.trim().parse().map_err(|_| {
        let message = format!("`{}` is not a non-negative integer", s.trim());
        if header {
            AutError::Header { line, message }
        } else {
            AutError::Transition { line, message }
        }
    })
}

pub fn read_aut(text: &str) -> Result<Lts, AutError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(AutError::Header {
        line: 1,
        message: "empty file".into(),
    })?;
    let inner = header
        .strip_prefix("des")
        .map(str::trim)
        .and_then(|h| h.strip_prefix('('))
        .and_then(|h| h.strip_suffix(')'))
        .ok_or_else(|| AutError::Header {
            line: hline,
            message: "expected `des (initial, transitions, states)`".into(),
        })?;
    let fields: Vec<&str> = inner.split(',').collect();
    if fields.len() != 3 {
        return Err(AutError::Header {
            line: hline,
            message: format!("expected 3 fields, found {}", fields.len()),
        });
    }
    let initial = number(fields[0], hline, true)?;
    let count = number(fields[1], hline, true)? as usize;
    let states = number(fields[2], hline, true)? as usize;
    if initial as usize >= states {
        return Err(AutError::IdOutOfRange {
            line: hline,
            id: initial,
            states,
        });
    }

    let mut transitions = Vec::with_capacity(count);
    for (line, t) in lines {
        let bad = |message: &str| AutError::Transition {
            line,
            message: message.to_string(),
        };
        let inner = t
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| bad("expected `(from, label, to)`"))?;
        let (from, rest) = inner.split_once(',').ok_or_else(|| bad("missing label"))?;
        let (label, to) = rest.rsplit_once(',').ok_or_else(|| bad("missing target state"))?;
        let label = label.trim();
        let label = if let Some(q) = label.strip_prefix('"') {
            q.strip_suffix('"').ok_or_else(|| bad("unterminated label"))?
        } else {
            label
        };
        if label.is_empty() {
            return Err(bad("empty label"));
        }
        let mut ids = [0u32; 2];
        for (k, s) in [from, to].into_iter().enumerate() {
            let id = number(s, line, false)?;
            if id as usize >= states {
                return Err(AutError::IdOutOfRange { line, id, states });
            }
            ids[k] = id as u32;
        }
        transitions.push((ids[0], label.to_string(), ids[1]));
    }
    if transitions.len() != count {
        return Err(AutError::Count {
            expected: count,
            found: transitions.len(),
        });
    }
    Ok(Lts {
        states,
        initial: initial as u32,
        transitions,
    })
}
