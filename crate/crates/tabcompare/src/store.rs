//! In-memory, content-addressed store for uploaded scores and built
//! comparison documents, optionally mirrored to a directory (one JSON file
//! per object, written atomically via rename).

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use tabcompare_core::{load_score, Score};

use crate::{content_id, is_content_id};

#[derive(Debug, Clone)]
pub struct StoredScore {
    pub id: String,
    pub filename: String,
    pub score: Arc<Score>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparisonSummary {
    pub id: String,
    pub created_at: String,
    pub version_names: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct StoredComparison {
    pub summary: ComparisonSummary,
    /// The serialized document, served byte for byte.
    pub document: Arc<str>,
}

#[derive(Serialize, Deserialize)]
struct ScoreFile {
    filename: String,
    content: String,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ComparisonFile {
    created_at: String,
    version_names: Vec<String>,
    document: String,
}

#[derive(Default)]
struct Inner {
    scores: HashMap<String, StoredScore>,
    comparisons: HashMap<String, StoredComparison>,
}

#[derive(Default)]
pub struct Store {
    inner: RwLock<Inner>,
    data_dir: Option<PathBuf>,
}

impl Store {
    pub fn in_memory() -> Self {
        Store::default()
    }

    /// Opens (and creates if needed) a persistent store. Files that no
    /// longer parse are skipped with a warning.
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(dir.join("scores"))?;
        fs::create_dir_all(dir.join("comparisons"))?;
        let mut inner = Inner::default();
        for (id, bytes) in read_objects(&dir.join("scores"))? {
            let parsed = serde_json::from_slice::<ScoreFile>(&bytes)
                .map_err(|e| e.to_string())
                .and_then(|f| {
                    load_score(f.content.as_bytes())
                        .map(|s| (f.filename, s))
                        .map_err(|e| e.to_string())
                });
            match parsed {
                Ok((filename, score)) => {
                    inner.scores.insert(
                        id.clone(),
                        StoredScore {
                            id,
                            filename,
                            score: Arc::new(score),
                        },
                    );
                }
                Err(e) => log::warn!("skipping stored score {id}: {e}"),
            }
        }
        for (id, bytes) in read_objects(&dir.join("comparisons"))? {
            match serde_json::from_slice::<ComparisonFile>(&bytes) {
                Ok(f) => {
                    let summary = ComparisonSummary {
                        id: id.clone(),
                        created_at: f.created_at,
                        version_names: f.version_names,
                    };
                    inner.comparisons.insert(
                        id,
                        StoredComparison {
                            summary,
                            document: f.document.into(),
                        },
                    );
                }
                Err(e) => log::warn!("skipping stored comparison {id}: {e}"),
            }
        }
        log::info!(
            "loaded {} score(s) and {} comparison(s) from {}",
            inner.scores.len(),
            inner.comparisons.len(),
            dir.display()
        );
        Ok(Store {
            inner: RwLock::new(inner),
            data_dir: Some(dir),
        })
    }

    /// Stores an already parsed upload. Uploading identical bytes again
    /// returns the existing entry unchanged.
    pub fn put_score(&self, raw: &[u8], filename: &str, score: Score) -> io::Result<StoredScore> {
        let id = content_id(raw);
        if let Some(existing) = self.score(&id) {
            return Ok(existing);
        }
        if let Some(dir) = &self.data_dir {
            let content = String::from_utf8_lossy(raw).into_owned();
            let file = ScoreFile {
                filename: filename.to_owned(),
                content,
            };
            write_atomic(
                &dir.join("scores"),
                &id,
                &serde_json::to_vec(&file).expect("serializable"),
            )?;
        }
        let stored = StoredScore {
            id: id.clone(),
            filename: filename.to_owned(),
            score: Arc::new(score),
        };
        let mut inner = self.inner.write().expect("store lock poisoned");
        Ok(inner.scores.entry(id).or_insert(stored).clone())
    }

    pub fn score(&self, id: &str) -> Option<StoredScore> {
        self.inner
            .read()
            .expect("store lock poisoned")
            .scores
            .get(id)
            .cloned()
    }

    pub fn put_comparison(
        &self,
        document: String,
        version_names: Vec<String>,
        created_at: String,
    ) -> io::Result<StoredComparison> {
        let id = content_id(document.as_bytes());
        if let Some(existing) = self.comparison(&id) {
            return Ok(existing);
        }
        if let Some(dir) = &self.data_dir {
            let file = ComparisonFile {
                created_at: created_at.clone(),
                version_names: version_names.clone(),
                document: document.clone(),
            };
            write_atomic(
                &dir.join("comparisons"),
                &id,
                &serde_json::to_vec(&file).expect("serializable"),
            )?;
        }
        let stored = StoredComparison {
            summary: ComparisonSummary {
                id: id.clone(),
                created_at,
                version_names,
            },
            document: document.into(),
        };
        let mut inner = self.inner.write().expect("store lock poisoned");
        Ok(inner.comparisons.entry(id).or_insert(stored).clone())
    }

    pub fn comparison(&self, id: &str) -> Option<StoredComparison> {
        self.inner
            .read()
            .expect("store lock poisoned")
            .comparisons
            .get(id)
            .cloned()
    }

    /// All comparisons, oldest first.
    pub fn comparisons(&self) -> Vec<ComparisonSummary> {
        let inner = self.inner.read().expect("store lock poisoned");
        let mut out: Vec<_> = inner
            .comparisons
            .values()
            .map(|c| c.summary.clone())
            .collect();
        out.sort_by(|a, b| (&a.created_at, &a.id).cmp(&(&b.created_at, &b.id)));
        out
    }
}

fn read_objects(dir: &Path) -> io::Result<Vec<(String, Vec<u8>)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(id) = path
            .file_name()
            .and_then(|n| n.to_str())
            .and_then(|n| n.strip_suffix(".json"))
        else {
            continue;
        };
        if !is_content_id(id) {
            continue;
        }
        out.push((id.to_owned(), fs::read(&path)?));
    }
    Ok(out)
}

fn write_atomic(dir: &Path, id: &str, bytes: &[u8]) -> io::Result<()> {
    let tmp = dir.join(format!(".{id}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, dir.join(format!("{id}.json")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tabcompare_core::parse_tabtext;

    const SRC: &str = "\\track \"G\"\n0.1.1 |";

    #[test]
    fn duplicate_upload_keeps_first_entry() {
        let store = Store::in_memory();
        let a = store
            .put_score(SRC.as_bytes(), "a.tabtxt", parse_tabtext(SRC).unwrap())
            .unwrap();
        let b = store
            .put_score(SRC.as_bytes(), "b.tabtxt", parse_tabtext(SRC).unwrap())
            .unwrap();
        assert_eq!(a.id, b.id);
        assert_eq!(b.filename, "a.tabtxt");
    }

    #[test]
    fn persists_across_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let (sid, cid) = {
            let store = Store::open(dir.path()).unwrap();
            let s = store
                .put_score(SRC.as_bytes(), "a.tabtxt", parse_tabtext(SRC).unwrap())
                .unwrap();
            let c = store
                .put_comparison(
                    "{}\n".into(),
                    vec!["a".into()],
                    "2026-01-01T00:00:00Z".into(),
                )
                .unwrap();
            (s.id, c.summary.id)
        };
        fs::write(
            dir.path()
                .join("scores")
                .join(format!("{}.json", "0".repeat(64))),
            b"garbage",
        )
        .unwrap();
        let store = Store::open(dir.path()).unwrap();
        assert_eq!(store.score(&sid).unwrap().filename, "a.tabtxt");
        assert_eq!(&*store.comparison(&cid).unwrap().document, "{}\n");
        assert_eq!(store.comparisons().len(), 1);
        assert!(store.score(&"0".repeat(64)).is_none());
    }
}
