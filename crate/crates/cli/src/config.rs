//! Key-value run configuration. Command-line flags override file values.
//!
//! ```text
//! # evego.conf
//! window_ms = 33
//! seq_len = 20
//! threshold = 0.2
//! ```
//!
//! Recognised keys: `window_ms`, `stride_ms`, `seq_len`, `lnes_width`,
//! `lnes_height`, `sensor_width`, `sensor_height`, `threshold`,
//! `intrinsics`, `confidence`, `threads`.

use crate::error::usage;
use anyhow::{Context, Result};
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const DEFAULT_WINDOW_MS: f64 = 33.0;
pub const DEFAULT_SEQ_LEN: usize = 20;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    pub window_ms: Option<f64>,
    pub stride_ms: Option<f64>,
    pub seq_len: Option<usize>,
    pub lnes_width: Option<usize>,
    pub lnes_height: Option<usize>,
    pub sensor_width: Option<u16>,
    pub sensor_height: Option<u16>,
    pub threshold: Option<f64>,
    pub intrinsics: Option<PathBuf>,
    pub confidence: Option<String>,
    pub threads: Option<usize>,
}

fn value<T: FromStr>(key: &str, raw: &str, line: usize) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>()
        .map(Some)
        .map_err(|e| usage(format!("config line {line}: bad value for {key}: {e}")))
}

impl Config {
    pub fn parse(text: &str, base: &Path) -> Result<Config> {
        let mut c = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let n = i + 1;
            let (key, val) = line
                .split_once('=')
                .ok_or_else(|| usage(format!("config line {n}: expected key = value")))?;
            let (key, val) = (key.trim(), val.trim());
            match key {
                "window_ms" => c.window_ms = value(key, val, n)?,
                "stride_ms" => c.stride_ms = value(key, val, n)?,
                "seq_len" => c.seq_len = value(key, val, n)?,
                "lnes_width" => c.lnes_width = value(key, val, n)?,
                "lnes_height" => c.lnes_height = value(key, val, n)?,
                "sensor_width" => c.sensor_width = value(key, val, n)?,
                "sensor_height" => c.sensor_height = value(key, val, n)?,
                "threshold" => c.threshold = value(key, val, n)?,
                "intrinsics" => c.intrinsics = Some(base.join(val)),
                "confidence" => c.confidence = Some(val.to_string()),
                "threads" => c.threads = value(key, val, n)?,
                other => return Err(usage(format!("config line {n}: unknown key {other:?}"))),
            }
        }
        Ok(c)
    }

    /// Relative paths in the file resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Config::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

/// Converts milliseconds to whole microseconds, rejecting non-positive values.
pub fn ms_to_us(ms: f64, what: &str) -> Result<u64> {
    if !(ms > 0.0 && ms.is_finite()) {
        return Err(usage(format!("{what} must be positive, got {ms}")));
    }
    Ok((ms * 1000.0).round() as u64)
}
