//! Events to network inputs: window, encode LNES, combine through the
//! residual frame buffer, and export every stage.
//!
//! Output layout under `--out`:
//! `lnes/frame_NNNNN.{lnes,png}`, `input/input_NNNNN.{bin,png}` and
//! `manifest.json` describing each window.

use super::lnes::LnesSize;
use super::SensorArgs;
use crate::config::{ms_to_us, DEFAULT_SEQ_LEN, DEFAULT_WINDOW_MS};
use crate::error::usage;
use crate::fileio::{load_events, load_gray, write_file, write_lnes_png};
use crate::Context;
use anyhow::{bail, Context as _, Result};
use clap::Args;
use evego_core::events::window_events;
use evego_core::lnes::{
    encode_into, ConfidenceMap, ConfidenceProvider, ConstantConfidence, FrameBuffer, LnesFrame,
    SegmentationConfidence, CONFIDENCE_COLS, CONFIDENCE_ROWS,
};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const DEFAULT_CONFIDENCE: &str = "const:0.5";
pub const DEFAULT_MASK_GAIN: f64 = 10.0;

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Input event stream (.evt, .bin or .csv).
    #[arg(long)]
    pub events: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Window length in milliseconds [default: 33].
    #[arg(long)]
    pub window_ms: Option<f64>,
    /// Frames per sequence; the buffer resets at each sequence start [default: 20].
    #[arg(long)]
    pub seq_len: Option<usize>,
    /// Confidence source: `const:<value>` or `masks:<dir>[:<gain>]` with one
    /// greyscale PNG per frame [default: const:0.5].
    #[arg(long)]
    pub confidence: Option<String>,
    #[command(flatten)]
    pub size: LnesSize,
    #[command(flatten)]
    pub sensor: SensorArgs,
}

fn provider(spec: &str) -> Result<Box<dyn ConfidenceProvider>> {
    if let Some(v) = spec.strip_prefix("const:") {
        let v: f64 = v.parse().map_err(|_| usage(format!("bad constant confidence {v:?}")))?;
        let map = ConfidenceMap::constant(CONFIDENCE_ROWS, CONFIDENCE_COLS, v).map_err(|e| usage(e.to_string()))?;
        return Ok(Box::new(ConstantConfidence(map)));
    }
    if let Some(rest) = spec.strip_prefix("masks:") {
        let (dir, gain) = match rest.rsplit_once(':') {
            Some((d, g)) if g.parse::<f64>().is_ok() => (d, g.parse().unwrap()),
            _ => (rest, DEFAULT_MASK_GAIN),
        };
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
            .with_context(|| format!("listing masks in {dir}"))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")))
            .collect();
        files.sort();
        if files.is_empty() {
            bail!("no PNG masks in {dir}");
        }
        let masks = files
            .iter()
            .map(|p| Ok(load_gray(p)?.resize_bilinear(CONFIDENCE_ROWS, CONFIDENCE_COLS)))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Box::new(SegmentationConfidence::with_gain(masks, gain)?));
    }
    Err(usage(format!("unknown confidence source {spec:?}")))
}

fn create_dir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).with_context(|| format!("creating {}", p.display()))
}

pub fn run(args: PipelineArgs, ctx: &Context) -> Result<()> {
    let window_ms = args.window_ms.or(ctx.config.window_ms).unwrap_or(DEFAULT_WINDOW_MS);
    let duration = ms_to_us(window_ms, "--window-ms")?;
    let seq_len = args.seq_len.or(ctx.config.seq_len).unwrap_or(DEFAULT_SEQ_LEN);
    if seq_len == 0 {
        return Err(usage("--seq-len must be at least 1"));
    }
    let spec = args
        .confidence
        .clone()
        .or(ctx.config.confidence.clone())
        .unwrap_or_else(|| DEFAULT_CONFIDENCE.to_string());
    let mut provider = provider(&spec)?;
    let (w, h) = args.size.resolve(ctx);

    let stream = ctx.log.stage("read_events", || load_events(&args.events, args.sensor.resolve(ctx)))?;
    let windows = ctx.log.stage("window", || window_events(&stream, duration, duration))?;

    let lnes_dir = args.out.join("lnes");
    let input_dir = args.out.join("input");
    create_dir(&lnes_dir)?;
    create_dir(&input_dir)?;

    let mut buffer = FrameBuffer::new(w, h, CONFIDENCE_ROWS, CONFIDENCE_COLS);
    let mut frame = LnesFrame::zeros(w, h);
    let mut encode_ms = Vec::with_capacity(windows.len());
    let mut repm_ms = Vec::with_capacity(windows.len());
    let mut entries = Vec::with_capacity(windows.len());
    for (k, win) in windows.iter().enumerate() {
        if k % seq_len == 0 {
            buffer.reset();
        }
        let start = Instant::now();
        encode_into(win, &mut frame);
        let mid = Instant::now();
        let input = buffer.step(&frame, provider.as_mut())?;
        let end = Instant::now();
        encode_ms.push((mid - start).as_secs_f64() * 1e3);
        repm_ms.push((end - mid).as_secs_f64() * 1e3);

        write_file(&lnes_dir.join(format!("frame_{k:05}.lnes")), &frame.to_bytes())?;
        write_lnes_png(&lnes_dir.join(format!("frame_{k:05}.png")), &frame)?;
        write_file(&input_dir.join(format!("input_{k:05}.bin")), &input.to_bytes())?;
        write_lnes_png(&input_dir.join(format!("input_{k:05}.png")), &input.to_unit_frame())?;
        entries.push(json!({
            "index": k,
            "sequence": k / seq_len,
            "t_start_us": win.t_start(),
            "t_end_us": win.t_end(),
            "events": win.len(),
            "partial": win.is_partial(),
        }));
    }
    ctx.log.summary("lnes_encode", &mut encode_ms);
    ctx.log.summary("repm_step", &mut repm_ms);

    let manifest = json!({
        "window_us": duration,
        "seq_len": seq_len,
        "lnes_width": w,
        "lnes_height": h,
        "confidence": spec,
        "frames": entries,
    });
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_file(&args.out.join("manifest.json"), text.as_bytes())
}
