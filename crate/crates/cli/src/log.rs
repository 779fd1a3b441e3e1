//! JSON-lines stage log on stderr.

use serde_json::{json, Map, Value};
use std::time::Instant;

#[derive(Debug, Clone, Copy)]
pub struct Log {
    quiet: bool,
}

impl Log {
    pub fn new(quiet: bool) -> Self {
        Log { quiet }
    }

    pub fn emit(&self, mut record: Map<String, Value>) {
        if self.quiet {
            return;
        }
        record.insert("ts_unix_ms".into(), json!(unix_ms()));
        eprintln!("{}", Value::Object(record));
    }

    /// Runs `f` and logs its wall time as `{"stage": name, "ms": ...}` plus
    /// any `extra` fields.
    pub fn stage<T>(&self, name: &str, f: impl FnOnce() -> T) -> T {
        self.stage_with(name, Map::new(), f)
    }

    pub fn stage_with<T>(&self, name: &str, extra: Map<String, Value>, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        let mut rec = Map::new();
        rec.insert("stage".into(), json!(name));
        rec.insert("ms".into(), json!(ms));
        rec.extend(extra);
        self.emit(rec);
        out
    }

    pub fn summary(&self, name: &str, samples_ms: &mut [f64]) {
        if samples_ms.is_empty() {
            return;
        }
        samples_ms.sort_by(f64::total_cmp);
        let mut rec = Map::new();
        rec.insert("stage".into(), json!(name));
        rec.insert("count".into(), json!(samples_ms.len()));
        rec.insert("median_ms".into(), json!(samples_ms[samples_ms.len() / 2]));
        rec.insert("max_ms".into(), json!(samples_ms[samples_ms.len() - 1]));
        self.emit(rec);
    }
}

fn unix_ms() -> u128 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}
