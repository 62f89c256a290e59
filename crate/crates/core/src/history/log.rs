//! Change-log ingestion from a pipe-delimited export or a live git
//! repository, plus rename resolution.
//!
//! Export format, one record per line:
//! `commit_id|timestamp_iso8601|author|file_path|added|deleted` for a
//! touched file, `R|old_path|new_path` for a recorded rename. Renames are
//! resolved globally: every change row is re-attributed to the path's final
//! name, so history before a rename counts toward the surviving file.

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;

use chrono::{DateTime, Utc};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LogRecord {
    Change {
        commit_id: String,
        timestamp: DateTime<Utc>,
        author: String,
        path: String,
        added: u32,
        deleted: u32,
    },
    Rename {
        old: String,
        new: String,
    },
}

impl LogRecord {
    pub fn change(
        commit_id: &str,
        timestamp: DateTime<Utc>,
        author: &str,
        path: &str,
        added: u32,
        deleted: u32,
    ) -> Self {
        LogRecord::Change {
            commit_id: commit_id.to_string(),
            timestamp,
            author: author.to_string(),
            path: path.to_string(),
            added,
            deleted,
        }
    }
}

/// Parses a log export. `origin` names the file in errors.
pub fn parse_log(text: &str, origin: &Path) -> Result<Vec<LogRecord>> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('|').collect();
        let err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line: line_no,
            message,
        };
        if fields[0] == "R" {
            if fields.len() != 3 {
                return Err(err(format!(
                    "rename record needs 3 fields, got {}",
                    fields.len()
                )));
            }
            records.push(LogRecord::Rename {
                old: fields[1].to_string(),
                new: fields[2].to_string(),
            });
            continue;
        }
        if fields.len() != 6 {
            return Err(err(format!("expected 6 fields, got {}", fields.len())));
        }
        let timestamp = DateTime::parse_from_rfc3339(fields[1])
            .map_err(|e| err(format!("bad timestamp {:?}: {e}", fields[1])))?
            .with_timezone(&Utc);
        let added: u32 = fields[4]
            .parse()
            .map_err(|_| err(format!("bad added count {:?}", fields[4])))?;
        let deleted: u32 = fields[5]
            .parse()
            .map_err(|_| err(format!("bad deleted count {:?}", fields[5])))?;
        if added + deleted == 0 {
            // a touched entry must carry at least one changed line
            continue;
        }
        records.push(LogRecord::change(
            fields[0], timestamp, fields[2], fields[3], added, deleted,
        ));
    }
    Ok(records)
}

/// Re-attributes every change to its path's final name and drops the
/// rename records. Change mass is conserved.
pub fn resolve_renames(records: Vec<LogRecord>) -> Vec<LogRecord> {
    let mut forward: HashMap<String, String> = HashMap::new();
    for rec in &records {
        if let LogRecord::Rename { old, new } = rec {
            forward.insert(old.clone(), new.clone());
        }
    }
    let final_name = |mut path: String| {
        let mut hops = 0;
        while let Some(next) = forward.get(&path) {
            path = next.clone();
            hops += 1;
            if hops > forward.len() {
                break; // rename cycle; keep the current name
            }
        }
        path
    };
    records
        .into_iter()
        .filter_map(|rec| match rec {
            LogRecord::Rename { .. } => None,
            LogRecord::Change {
                commit_id,
                timestamp,
                author,
                path,
                added,
                deleted,
            } => Some(LogRecord::Change {
                commit_id,
                timestamp,
                author,
                path: final_name(path),
                added,
                deleted,
            }),
        })
        .collect()
}

/// Reads history from a live repository via `git log --numstat`.
pub fn ingest_git_repo(repo: &Path) -> Result<Vec<LogRecord>> {
    let output = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args([
            "log",
            "--reverse",
            "--date-order",
            "--numstat",
            "-M",
            "--format=@%H|%cI|%an <%ae>",
        ])
        .output()
        .map_err(|e| Error::Input(format!("cannot run git in {}: {e}", repo.display())))?;
    if !output.status.success() {
        return Err(Error::Input(format!(
            "git log failed in {}: {}",
            repo.display(),
            String::from_utf8_lossy(&output.stderr).trim()
        )));
    }
    let text = String::from_utf8_lossy(&output.stdout);
    let mut records = Vec::new();
    let mut current: Option<(String, DateTime<Utc>, String)> = None;
    for line in text.lines() {
        if let Some(header) = line.strip_prefix('@') {
            let parts: Vec<&str> = header.splitn(3, '|').collect();
            if parts.len() != 3 {
                return Err(Error::Input(format!("unexpected git header {line:?}")));
            }
            let timestamp = DateTime::parse_from_rfc3339(parts[1])
                .map_err(|e| Error::Input(format!("bad git timestamp {:?}: {e}", parts[1])))?
                .with_timezone(&Utc);
            current = Some((parts[0].to_string(), timestamp, parts[2].to_string()));
            continue;
        }
        let mut cols = line.split('\t');
        let (Some(added), Some(deleted), Some(path)) = (cols.next(), cols.next(), cols.next())
        else {
            continue;
        };
        let Some((id, timestamp, author)) = &current else {
            continue;
        };
        // binary files report "-" deltas
        let (Ok(added), Ok(deleted)) = (added.parse::<u32>(), deleted.parse::<u32>()) else {
            continue;
        };
        let (path, rename) = split_numstat_path(path);
        if let Some((old, new)) = rename {
            records.push(LogRecord::Rename { old, new });
        }
        if added + deleted > 0 {
            records.push(LogRecord::change(id, *timestamp, author, &path, added, deleted));
        }
    }
    Ok(records)
}

/// Expands numstat rename notation. `a/{b => c}/d.java` and plain
/// `old => new` both yield the new path plus the rename pair.
fn split_numstat_path(raw: &str) -> (String, Option<(String, String)>) {
    if let (Some(open), Some(close)) = (raw.find('{'), raw.find('}')) {
        if open < close {
            if let Some((old_mid, new_mid)) = raw[open + 1..close].split_once(" => ") {
                let prefix = &raw[..open];
                let suffix = &raw[close + 1..];
                let old = normalize_path(&format!("{prefix}{old_mid}{suffix}"));
                let new = normalize_path(&format!("{prefix}{new_mid}{suffix}"));
                return (new.clone(), Some((old, new)));
            }
        }
    }
    if let Some((old, new)) = raw.split_once(" => ") {
        return (new.to_string(), Some((old.to_string(), new.to_string())));
    }
    (raw.to_string(), None)
}

fn normalize_path(path: &str) -> String {
    path.split('/')
        .filter(|c| !c.is_empty())
        .collect::<Vec<_>>()
        .join("/")
}

/// Commit timestamp of a tag or revision, for window cutoffs.
pub fn git_revision_time(repo: &Path, revision: &str) -> Result<DateTime<Utc>> {
    let output = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(["log", "-1", "--format=%cI", revision])
        .output()
        .map_err(|e| Error::Input(format!("cannot run git in {}: {e}", repo.display())))?;
    if !output.status.success() {
        return Err(Error::Input(format!(
            "cannot resolve revision {revision}: {}",
            String::from_utf8_lossy(&output.stderr).trim()
        )));
    }
    let text = String::from_utf8_lossy(&output.stdout);
    DateTime::parse_from_rfc3339(text.trim())
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| Error::Input(format!("bad timestamp for {revision}: {e}")))
}
