//! `--config FILE` support: a flat `dotted.key = value` file whose keys map
//! onto command-line flags (`train.learning_rate` → `--learning-rate`).
//! The expanded flags are placed before the user's own arguments, and clap is
//! configured so the last occurrence of a flag wins.

use std::path::Path;

use clap::{ArgAction, Command};

#[derive(Debug, thiserror::Error)]
pub enum OverlayError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Syntax { path: String, line: usize, message: String },
}

/// `(flag, value)` pairs in file order.
pub fn parse_overlay(text: &str, path: &str) -> Result<Vec<(String, String)>, OverlayError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: &str| OverlayError::Syntax {
            path: path.to_string(),
            line: i + 1,
            message: message.to_string(),
        };
        let (key, value) = line.split_once('=').ok_or_else(|| syntax("expected `key = value`"))?;
        let key = key.trim();
        let value = value.trim().trim_matches('"');
        let last = key.rsplit('.').next().unwrap_or(key);
        if last.is_empty() || !last.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(syntax("invalid key"));
        }
        out.push((last.replace('_', "-"), value.to_string()));
    }
    Ok(out)
}

fn is_switch(cmd: &Command, sub: &str, flag: &str) -> bool {
    cmd.find_subcommand(sub)
        .and_then(|s| s.get_arguments().find(|a| a.get_long() == Some(flag)))
        .is_some_and(|a| matches!(a.get_action(), ArgAction::SetTrue | ArgAction::SetFalse))
}

/// Expand every `--config FILE` in `args` into flags inserted right after
/// the subcommand name. The `--config` arguments themselves are removed.
pub fn expand(cmd: &Command, args: Vec<String>) -> Result<Vec<String>, OverlayError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut files = Vec::new();
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            match it.next() {
                Some(f) => files.push(f),
                // Leave it for clap to report the missing value.
                None => rest.push(a),
            }
        } else if let Some(f) = a.strip_prefix("--config=") {
            files.push(f.to_string());
        } else {
            rest.push(a);
        }
    }
    if files.is_empty() || rest.len() < 2 {
        return Ok(rest);
    }
    let sub = rest[1].clone();
    let mut extra = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(Path::new(&f)).map_err(|source| OverlayError::Read {
            path: f.clone(),
            source,
        })?;
        for (flag, value) in parse_overlay(&text, &f)? {
            if is_switch(cmd, &sub, &flag) {
                if matches!(value.as_str(), "true" | "1" | "yes" | "on") {
                    extra.push(format!("--{flag}"));
                }
            } else {
                extra.push(format!("--{flag}={value}"));
            }
        }
    }
    let mut out = Vec::with_capacity(rest.len() + extra.len());
    out.extend(rest.drain(..2));
    out.extend(extra);
    out.extend(rest);
    Ok(out)
}
