use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::HarnessError;
use crate::ids::content_hash;

/// One scored call to the evaluator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub cache_key: String,
    pub pair_id: String,
    pub model: String,
    pub template_hash: String,
    pub run_index: u32,
    pub score: f64,
    pub justification: Option<String>,
    pub raw_text: String,
}

/// One ranked triple returned by the evaluator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRecord {
    pub cache_key: String,
    pub group_id: String,
    pub brief_id: String,
    pub model: String,
    pub template_hash: String,
    /// Profile ids in the order they were presented (labels A, B, C).
    pub profile_ids: Vec<String>,
    /// Rank (1 = best) per presented profile, parallel to `profile_ids`.
    pub ranks: Vec<u8>,
    pub raw_text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum StoreLine {
    Score(ScoreRecord),
    Rank(RankRecord),
}

/// Cache key for one scoring call; re-running a campaign with the same
/// design, templates, model, and run index hits the same key.
pub fn score_cache_key(pair_id: &str, template_hash: &str, model: &str, run_index: u32) -> String {
    content_hash(format!("{pair_id}|{template_hash}|{model}|{run_index}").as_bytes())
}

/// Cache key for one ranking call over a triple group.
pub fn rank_cache_key(group_id: &str, template_hash: &str, model: &str) -> String {
    content_hash(format!("{group_id}|{template_hash}|{model}|rank").as_bytes())
}

/// Append-only JSONL record store.
///
/// Every completed call is flushed as one line, so a killed campaign loses at
/// most the line being written. On open, a truncated final line is dropped;
/// corruption anywhere else is an error rather than silent data loss.
pub struct RecordStore {
    path: PathBuf,
    writer: BufWriter<File>,
    scores: BTreeMap<String, ScoreRecord>,
    ranks: BTreeMap<String, RankRecord>,
}

impl RecordStore {
    pub fn open(path: &Path) -> Result<Self, HarnessError> {
        let mut scores = BTreeMap::new();
        let mut ranks = BTreeMap::new();
        if path.exists() {
            let mut text = String::new();
            File::open(path)?.read_to_string(&mut text)?;
            let lines: Vec<&str> = text.lines().collect();
            let ends_clean = text.is_empty() || text.ends_with('\n');
            for (i, line) in lines.iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<StoreLine>(line) {
                    Ok(StoreLine::Score(r)) => {
                        scores.insert(r.cache_key.clone(), r);
                    }
                    Ok(StoreLine::Rank(r)) => {
                        ranks.insert(r.cache_key.clone(), r);
                    }
                    Err(_) if i == lines.len() - 1 && !ends_clean => {
                        // Partial trailing line from an interrupted write.
                    }
                    Err(e) => {
                        return Err(HarnessError::Store(format!(
                            "{}:{}: unreadable record: {e}",
                            path.display(),
                            i + 1
                        )));
                    }
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(RecordStore {
            path: path.to_path_buf(),
            writer: BufWriter::new(file),
            scores,
            ranks,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn append(&mut self, line: &StoreLine) -> Result<(), HarnessError> {
        let json = serde_json::to_string(line)
            .map_err(|e| HarnessError::Store(format!("serialize record: {e}")))?;
        self.writer.write_all(json.as_bytes())?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()?;
        Ok(())
    }

    pub fn append_score(&mut self, record: ScoreRecord) -> Result<(), HarnessError> {
        self.append(&StoreLine::Score(record.clone()))?;
        self.scores.insert(record.cache_key.clone(), record);
        Ok(())
    }

    pub fn append_rank(&mut self, record: RankRecord) -> Result<(), HarnessError> {
        self.append(&StoreLine::Rank(record.clone()))?;
        self.ranks.insert(record.cache_key.clone(), record);
        Ok(())
    }

    pub fn score(&self, cache_key: &str) -> Option<&ScoreRecord> {
        self.scores.get(cache_key)
    }

    pub fn rank(&self, cache_key: &str) -> Option<&RankRecord> {
        self.ranks.get(cache_key)
    }

    pub fn score_count(&self) -> usize {
        self.scores.len()
    }

    pub fn rank_count(&self) -> usize {
        self.ranks.len()
    }

    pub fn scores(&self) -> impl Iterator<Item = &ScoreRecord> {
        self.scores.values()
    }

    pub fn ranks(&self) -> impl Iterator<Item = &RankRecord> {
        self.ranks.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(key: &str, score: f64) -> ScoreRecord {
        ScoreRecord {
            cache_key: key.to_string(),
            pair_id: "p:b".into(),
            model: "synthetic".into(),
            template_hash: "t".into(),
            run_index: 0,
            score,
            justification: None,
            raw_text: format!("Score : {score}/10"),
        }
    }

    #[test]
    fn round_trips_records_across_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        {
            let mut store = RecordStore::open(&path).unwrap();
            store.append_score(record("k1", 7.0)).unwrap();
            store.append_score(record("k2", 4.5)).unwrap();
        }
        let store = RecordStore::open(&path).unwrap();
        assert_eq!(store.score_count(), 2);
        assert_eq!(store.score("k2").unwrap().score, 4.5);
        assert!(store.score("k3").is_none());
    }

    #[test]
    fn drops_a_truncated_final_line_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        {
            let mut store = RecordStore::open(&path).unwrap();
            store.append_score(record("k1", 7.0)).unwrap();
        }
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("{\"kind\":\"score\",\"cache_key\":\"k2\",\"trunc");
        std::fs::write(&path, &text).unwrap();

        let store = RecordStore::open(&path).unwrap();
        assert_eq!(store.score_count(), 1);
    }

    #[test]
    fn corruption_in_the_middle_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        std::fs::write(&path, "not json\n{\"also\":\"wrong\"}\n").unwrap();
        assert!(matches!(RecordStore::open(&path), Err(HarnessError::Store(_))));
    }

    #[test]
    fn cache_keys_separate_runs_and_models() {
        let a = score_cache_key("p:b", "t", "m", 0);
        assert_eq!(a, score_cache_key("p:b", "t", "m", 0));
        assert_ne!(a, score_cache_key("p:b", "t", "m", 1));
        assert_ne!(a, score_cache_key("p:b", "t", "other", 0));
        assert_ne!(a, rank_cache_key("p:b", "t", "m"));
    }
}
