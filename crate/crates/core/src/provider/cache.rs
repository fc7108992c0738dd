use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use super::RawResponse;
use crate::error::{Error, Result};

/// Append-only JSONL store of raw responses keyed by request digest.
///
/// A final line without a trailing newline is a torn write from an
/// interrupted run; it is discarded on open.
pub struct ResponseCache {
    path: PathBuf,
    inner: Mutex<Inner>,
}

struct Inner {
    entries: HashMap<String, RawResponse>,
    file: File,
}

impl ResponseCache {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        }
        let mut entries = HashMap::new();
        let mut good_len = 0u64;
        if path.exists() {
            let f = File::open(&path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
            let mut reader = BufReader::new(f);
            let mut line = String::new();
            let mut lineno = 0;
            loop {
                line.clear();
                let n = reader
                    .read_line(&mut line)
                    .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
                if n == 0 || !line.ends_with('\n') {
                    break;
                }
                lineno += 1;
                good_len += n as u64;
                if line.trim().is_empty() {
                    continue;
                }
                let r: RawResponse = serde_json::from_str(&line).map_err(|e| Error::Load {
                    path: path.clone(),
                    line: lineno,
                    id: String::new(),
                    field: String::new(),
                    message: e.to_string(),
                })?;
                entries.insert(r.key.clone(), r);
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        let len = file.metadata().map_err(|e| Error::io("reading cache metadata", e))?.len();
        if len > good_len {
            file.set_len(good_len).map_err(|e| Error::io("truncating torn cache line", e))?;
        }
        Ok(ResponseCache {
            path,
            inner: Mutex::new(Inner { entries, file }),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("cache lock").entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, key: &str) -> Option<RawResponse> {
        self.inner.lock().expect("cache lock").entries.get(key).cloned()
    }

    /// Appends `resp` unless its key is already stored.
    pub fn put(&self, resp: &RawResponse) -> Result<()> {
        let mut inner = self.inner.lock().expect("cache lock");
        if inner.entries.contains_key(&resp.key) {
            return Ok(());
        }
        let mut line = serde_json::to_string(resp)?;
        line.push('\n');
        inner
            .file
            .write_all(line.as_bytes())
            .and_then(|_| inner.file.flush())
            .map_err(|e| Error::io(format!("appending to {}", self.path.display()), e))?;
        inner.entries.insert(resp.key.clone(), resp.clone());
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resp(key: &str, text: &str) -> RawResponse {
        RawResponse {
            key: key.into(),
            work_item_key: format!("w-{key}"),
            model_name: "m".into(),
            text: text.into(),
            latency_secs: 0.25,
            attempt: 1,
            timestamp_ms: 1,
        }
    }

    #[test]
    fn round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/cache.jsonl");
        let tricky = "<think>é \"quoted\"\n\ttab \u{1F600}</think>\n{\"label\": \"Normal\"}\r\n";
        {
            let c = ResponseCache::open(&path).unwrap();
            c.put(&resp("a", tricky)).unwrap();
            c.put(&resp("a", "ignored")).unwrap();
            c.put(&resp("b", "")).unwrap();
        }
        let c = ResponseCache::open(&path).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.get("a").unwrap(), resp("a", tricky));
        assert_eq!(c.get("b").unwrap().text, "");
    }

    #[test]
    fn torn_tail_discarded() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let mut body = serde_json::to_string(&resp("a", "x")).unwrap();
        body.push_str("\n{\"key\": \"b\", \"te");
        std::fs::write(&path, body).unwrap();
        {
            let c = ResponseCache::open(&path).unwrap();
            assert_eq!(c.len(), 1);
            c.put(&resp("c", "y")).unwrap();
        }
        let c = ResponseCache::open(&path).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.get("c").is_some());
    }

    #[test]
    fn corrupt_line_is_load_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        std::fs::write(&path, "not json\n").unwrap();
        assert!(matches!(ResponseCache::open(&path), Err(Error::Load { line: 1, .. })));
    }
}
