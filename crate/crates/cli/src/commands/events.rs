use super::{print_json, SensorArgs};
use crate::config::ms_to_us;
use crate::fileio::{load_events, save_events};
use crate::Context;
use anyhow::Result;
use clap::Subcommand;
use evego_core::events::bandwidth_report;
use serde_json::json;
use std::path::PathBuf;

#[derive(Debug, Subcommand)]
pub enum EventsCmd {
    /// Print sensor size, event count, time span and polarity balance.
    Info {
        input: PathBuf,
        #[command(flatten)]
        sensor: SensorArgs,
    },
    /// Convert between .evt, raw .bin and .csv (chosen by extension).
    Convert {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        sensor: SensorArgs,
    },
    /// Bytes per window compared with raw RGB frames.
    Bandwidth {
        input: PathBuf,
        /// Window length in milliseconds.
        #[arg(long, default_value_t = 16.66)]
        window_ms: f64,
        #[command(flatten)]
        sensor: SensorArgs,
    },
}

pub fn run(cmd: EventsCmd, ctx: &Context) -> Result<()> {
    match cmd {
        EventsCmd::Info { input, sensor } => {
            let s = ctx.log.stage("read_events", || load_events(&input, sensor.resolve(ctx)))?;
            let positive = s.events().iter().filter(|e| e.polarity.as_i8() > 0).count();
            let (first, last) = s.time_span().map_or((None, None), |(a, b)| (Some(a), Some(b)));
            print_json(&json!({
                "width": s.width(),
                "height": s.height(),
                "events": s.len(),
                "positive": positive,
                "negative": s.len() - positive,
                "t_first_us": first,
                "t_last_us": last,
            }));
        }
        EventsCmd::Convert { input, output, sensor } => {
            let s = ctx.log.stage("read_events", || load_events(&input, sensor.resolve(ctx)))?;
            ctx.log.stage("write_events", || save_events(&output, &s))?;
        }
        EventsCmd::Bandwidth { input, window_ms, sensor } => {
            let duration = ms_to_us(window_ms, "--window-ms")?;
            let s = ctx.log.stage("read_events", || load_events(&input, sensor.resolve(ctx)))?;
            let r = bandwidth_report(&s, duration)?;
            print_json(&json!({
                "window_us": duration,
                "bytes_per_event": r.bytes_per_event,
                "events": r.event_count,
                "windows": r.window_count,
                "mean_events_per_window": r.mean_events_per_window,
                "mean_bytes_per_window": r.mean_bytes_per_window,
                "rgb_1080p_bytes": r.rgb_1080p_bytes,
                "rgb_vga_bytes": r.rgb_vga_bytes,
                "ratio_1080p": r.ratio_1080p,
                "ratio_vga": r.ratio_vga,
            }));
        }
    }
    Ok(())
}
