//! Frame directories hold a `manifest.txt` with one `<timestamp_us> <file>`
//! line per frame. Files ending in `.pgm` are greyscale PGMs (P2 or P5);
//! anything else is read as a flat float frame.

use crate::error::usage;
use crate::fileio::{read_file, read_text, save_events};
use crate::Context;
use anyhow::{bail, Context as _, Result};
use clap::Args;
use evego_core::simulator::{parse_flat_f32, parse_pgm, simulate_events, IntensityFrame, SimulatorConfig};
use serde_json::{json, Map};
use std::path::{Path, PathBuf};

pub const MANIFEST: &str = "manifest.txt";

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Directory containing manifest.txt and the frames it lists.
    #[arg(long)]
    pub frames: PathBuf,
    /// Contrast threshold in log-intensity units.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Output stream (.evt, .bin or .csv).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn load_frames(dir: &Path) -> Result<Vec<IntensityFrame>> {
    let manifest = dir.join(MANIFEST);
    let text = read_text(&manifest)?;
    let mut frames = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(t), Some(file), None) = (parts.next(), parts.next(), parts.next()) else {
            bail!("{} line {}: expected `<timestamp_us> <file>`", manifest.display(), i + 1);
        };
        let t: u64 = t
            .parse()
            .with_context(|| format!("{} line {}: bad timestamp", manifest.display(), i + 1))?;
        let path = dir.join(file);
        let bytes = read_file(&path)?;
        let (w, h, values) = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")) {
            parse_pgm(&bytes)
        } else {
            parse_flat_f32(&bytes)
        }
        .with_context(|| format!("decoding {}", path.display()))?;
        frames.push(IntensityFrame::new(w, h, t, &values).with_context(|| format!("frame {}", path.display()))?);
    }
    Ok(frames)
}

pub fn run(args: SimulateArgs, ctx: &Context) -> Result<()> {
    let threshold = args
        .threshold
        .or(ctx.config.threshold)
        .ok_or_else(|| usage("--threshold is required (no default contrast threshold)"))?;
    let cfg = SimulatorConfig::new(threshold).map_err(|e| usage(e.to_string()))?;
    let frames = ctx.log.stage("read_frames", || load_frames(&args.frames))?;
    let mut extra = Map::new();
    extra.insert("frames".into(), json!(frames.len()));
    let stream = ctx
        .log
        .stage_with("simulate", extra, || simulate_events(frames, cfg, ctx.exec))?;
    let mut extra = Map::new();
    extra.insert("events".into(), json!(stream.len()));
    ctx.log.stage_with("write_events", extra, || save_events(&args.out, &stream))
}
