//! Append-only newline-delimited JSON log of accepted annotations.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use glossa::corpus::Tag;
use serde::{Deserialize, Serialize};

use crate::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub task_id: String,
    pub narrative_id: String,
    pub model_version: usize,
    /// Final tags, one sequence per non-excluded sentence.
    pub tags: Vec<Vec<Tag>>,
    pub annotator_id: String,
    /// Milliseconds since the Unix epoch.
    pub timestamp_ms: u64,
    pub changed_count: usize,
    /// Task id of the accepted record this one re-reviews.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supersedes: Option<String>,
}

#[derive(Debug)]
pub struct RecordLog {
    path: PathBuf,
    file: File,
}

impl RecordLog {
    /// Opens or creates the log and returns its records. A torn final line
    /// (no trailing newline, unparseable) is cut off; any other bad line is
    /// an error.
    pub fn open(path: &Path) -> Result<(Self, Vec<AnnotationRecord>), ServiceError> {
        let io = |e| ServiceError::Io(path.display().to_string(), e);
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)
            .map_err(io)?;
        let mut text = String::new();
        file.read_to_string(&mut text).map_err(io)?;
        let mut records = Vec::new();
        let mut good_len = 0usize;
        let mut offset = 0usize;
        for (i, line) in text.split_inclusive('\n').enumerate() {
            offset += line.len();
            let complete = line.ends_with('\n');
            let body = line.trim();
            if body.is_empty() {
                good_len = offset;
                continue;
            }
            match (serde_json::from_str::<AnnotationRecord>(body), complete) {
                (Ok(r), true) => {
                    records.push(r);
                    good_len = offset;
                }
                (_, false) => break,
                (Err(e), true) => {
                    return Err(ServiceError::Log {
                        line: i + 1,
                        msg: e.to_string(),
                    })
                }
            }
        }
        if good_len < text.len() {
            file.set_len(good_len as u64).map_err(io)?;
            file.seek(SeekFrom::End(0)).map_err(io)?;
        }
        Ok((
            RecordLog {
                path: path.to_path_buf(),
                file,
            },
            records,
        ))
    }

    /// Writes one record and syncs it to disk before returning.
    pub fn append(&mut self, record: &AnnotationRecord) -> Result<(), ServiceError> {
        let mut line = serde_json::to_string(record).expect("records serialize");
        line.push('\n');
        let io = |e| ServiceError::Io(self.path.display().to_string(), e);
        self.file.write_all(line.as_bytes()).map_err(io)?;
        self.file.sync_data().map_err(io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use glossa::corpus::parse_tag;

    fn record(id: &str) -> AnnotationRecord {
        AnnotationRecord {
            task_id: format!("{id}@v0"),
            narrative_id: id.into(),
            model_version: 0,
            tags: vec![vec![parse_tag("P+D").unwrap(), parse_tag("N").unwrap()]],
            annotator_id: "a".into(),
            timestamp_ms: 1,
            changed_count: 1,
            supersedes: None,
        }
    }

    #[test]
    fn records_survive_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.ndjson");
        let (mut log, old) = RecordLog::open(&path).unwrap();
        assert!(old.is_empty());
        log.append(&record("a")).unwrap();
        log.append(&record("b")).unwrap();
        drop(log);
        let (_, recs) = RecordLog::open(&path).unwrap();
        assert_eq!(recs, vec![record("a"), record("b")]);
    }

    #[test]
    fn torn_tail_is_dropped_but_corruption_is_not() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.ndjson");
        let good = serde_json::to_string(&record("a")).unwrap();
        std::fs::write(&path, format!("{good}\n{{\"task_id\": \"b")).unwrap();
        let (mut log, recs) = RecordLog::open(&path).unwrap();
        assert_eq!(recs.len(), 1);
        log.append(&record("c")).unwrap();
        let (_, recs) = RecordLog::open(&path).unwrap();
        assert_eq!(recs, vec![record("a"), record("c")]);

        std::fs::write(&path, format!("oops\n{good}\n")).unwrap();
        assert!(matches!(RecordLog::open(&path), Err(ServiceError::Log { line: 1, .. })));
    }
}
