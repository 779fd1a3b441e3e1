//! File loading and writing shared by the subcommands.

use crate::error::usage;
use anyhow::{Context as _, Result};
use evego_core::events::{
    parse_event_csv, read_event_stream, read_evt, write_event_csv, write_event_stream, write_evt,
    EventStream, TimestampMode,
};
use evego_core::fisheye::{load_intrinsics, FisheyeIntrinsics};
use evego_core::lnes::{lnes_to_rgb, LnesFrame};
use evego_core::Grid;
use image::{ExtendedColorType, ImageFormat};
use std::path::Path;

pub const DEFAULT_SENSOR: (u16, u16) = (640, 480);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventFormat {
    /// Header plus 13-byte records.
    Evt,
    /// Bare 13-byte records; dimensions come from flags.
    Raw,
    /// `x,y,t,p` text.
    Csv,
}

impl EventFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("evt") => Ok(EventFormat::Evt),
            Some("bin") | Some("raw") => Ok(EventFormat::Raw),
            Some("csv") | Some("txt") => Ok(EventFormat::Csv),
            _ => Err(usage(format!(
                "cannot tell the event format of {} (use .evt, .bin/.raw or .csv)",
                path.display()
            ))),
        }
    }
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn load_events(path: &Path, sensor: (u16, u16)) -> Result<EventStream> {
    let mode = TimestampMode::Lenient;
    let stream = match EventFormat::from_path(path)? {
        EventFormat::Evt => read_evt(&read_file(path)?, mode),
        EventFormat::Raw => read_event_stream(&read_file(path)?, sensor.0, sensor.1, mode),
        EventFormat::Csv => {
            let text = String::from_utf8(read_file(path)?).context("event CSV is not UTF-8")?;
            parse_event_csv(&text, sensor.0, sensor.1, mode)
        }
    };
    stream.with_context(|| format!("decoding events from {}", path.display()))
}

pub fn save_events(path: &Path, stream: &EventStream) -> Result<()> {
    let bytes = match EventFormat::from_path(path)? {
        EventFormat::Evt => write_evt(stream),
        EventFormat::Raw => write_event_stream(stream),
        EventFormat::Csv => write_event_csv(stream).into_bytes(),
    };
    write_file(path, &bytes)
}

pub fn load_intrinsics_or_default(path: Option<&Path>) -> Result<FisheyeIntrinsics> {
    match path {
        Some(p) => load_intrinsics(p).with_context(|| format!("loading intrinsics {}", p.display())),
        None => Ok(FisheyeIntrinsics::synthetic_190()),
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn write_rgb_png(path: &Path, width: usize, height: usize, rgb: &[u8]) -> Result<()> {
    let mut bytes = Vec::new();
    image::write_buffer_with_format(
        &mut std::io::Cursor::new(&mut bytes),
        rgb,
        width as u32,
        height as u32,
        ExtendedColorType::Rgb8,
        ImageFormat::Png,
    )
    .with_context(|| format!("encoding {}", path.display()))?;
    write_file(path, &bytes)
}

pub fn write_lnes_png(path: &Path, frame: &LnesFrame) -> Result<()> {
    let rgb = lnes_to_rgb(frame);
    write_rgb_png(path, rgb.width, rgb.height, &rgb.data)
}

pub fn load_lnes(path: &Path) -> Result<LnesFrame> {
    LnesFrame::from_bytes(&read_file(path)?).with_context(|| format!("decoding LNES blob {}", path.display()))
}

/// Greyscale image scaled to [0, 1].
pub fn load_gray(path: &Path) -> Result<Grid> {
    let img = image::open(path)
        .with_context(|| format!("decoding image {}", path.display()))?
        .into_luma16();
    let (w, h) = img.dimensions();
    let data = img.pixels().map(|p| p.0[0] as f64 / 65535.0).collect();
    Ok(Grid::from_vec(h as usize, w as usize, data)?)
}

/// Rows of whitespace- or comma-separated numbers, `#` comments allowed.
pub fn parse_rows(text: &str, width: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("line {}: not a number", i + 1))?;
        if row.len() != width {
            anyhow::bail!("line {}: expected {width} values, found {}", i + 1, row.len());
        }
        out.push(row);
    }
    Ok(out)
}
