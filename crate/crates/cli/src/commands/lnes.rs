use super::SensorArgs;
use crate::config::{ms_to_us, DEFAULT_WINDOW_MS};
use crate::fileio::{load_events, load_gray, load_lnes, write_file, write_lnes_png};
use crate::Context;
use anyhow::{Context as _, Result};
use clap::{Args, Subcommand};
use evego_core::events::window_events;
use evego_core::lnes::{augment_lnes, encode_windows, BinaryMask, LNES_HEIGHT, LNES_WIDTH};
use serde_json::{json, Map};
use std::path::PathBuf;

#[derive(Debug, Clone, Args)]
pub struct LnesSize {
    /// Output width [default: 256].
    #[arg(long)]
    pub lnes_width: Option<usize>,
    /// Output height [default: 192].
    #[arg(long)]
    pub lnes_height: Option<usize>,
}

impl LnesSize {
    pub fn resolve(&self, ctx: &Context) -> (usize, usize) {
        (
            self.lnes_width.or(ctx.config.lnes_width).unwrap_or(LNES_WIDTH),
            self.lnes_height.or(ctx.config.lnes_height).unwrap_or(LNES_HEIGHT),
        )
    }
}

#[derive(Debug, Subcommand)]
pub enum LnesCmd {
    /// Window a stream and write frame_NNNNN.lnes blobs plus PNG previews.
    Encode {
        input: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Window length in milliseconds [default: 33].
        #[arg(long)]
        window_ms: Option<f64>,
        /// Window stride in milliseconds [default: window length].
        #[arg(long)]
        stride_ms: Option<f64>,
        #[command(flatten)]
        size: LnesSize,
        #[command(flatten)]
        sensor: SensorArgs,
    },
    /// Render an LNES blob as a PNG (red positive, blue negative).
    Viz {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Paste the background's events outside the human mask into the foreground.
    Augment {
        #[arg(long)]
        fg: PathBuf,
        #[arg(long)]
        bg: PathBuf,
        /// Greyscale image; pixels above one half mark the human.
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run(cmd: LnesCmd, ctx: &Context) -> Result<()> {
    match cmd {
        LnesCmd::Encode { input, out, window_ms, stride_ms, size, sensor } => {
            let window_ms = window_ms.or(ctx.config.window_ms).unwrap_or(DEFAULT_WINDOW_MS);
            let duration = ms_to_us(window_ms, "--window-ms")?;
            let stride = match stride_ms.or(ctx.config.stride_ms) {
                Some(ms) => ms_to_us(ms, "--stride-ms")?,
                None => duration,
            };
            let (w, h) = size.resolve(ctx);
            let stream = ctx.log.stage("read_events", || load_events(&input, sensor.resolve(ctx)))?;
            let windows = window_events(&stream, duration, stride)?;
            let mut extra = Map::new();
            extra.insert("windows".into(), json!(windows.len()));
            let frames = ctx
                .log
                .stage_with("lnes_encode", extra, || encode_windows(&windows, w, h, ctx.exec))?;
            ctx.log.stage("export", || -> Result<()> {
                std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
                for (k, f) in frames.iter().enumerate() {
                    write_file(&out.join(format!("frame_{k:05}.lnes")), &f.to_bytes())?;
                    write_lnes_png(&out.join(format!("frame_{k:05}.png")), f)?;
                }
                Ok(())
            })?;
        }
        LnesCmd::Viz { input, out } => {
            write_lnes_png(&out, &load_lnes(&input)?)?;
        }
        LnesCmd::Augment { fg, bg, mask, out } => {
            let fg = load_lnes(&fg)?;
            let bg = load_lnes(&bg)?;
            let m = load_gray(&mask)?;
            let mask = BinaryMask::from_fn(m.cols(), m.rows(), |x, y| m.get(y, x) > 0.5);
            let merged = augment_lnes(&fg, &bg, &mask)?;
            write_file(&out, &merged.to_bytes())?;
        }
    }
    Ok(())
}
