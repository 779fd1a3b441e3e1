pub mod eval;
pub mod events;
pub mod geometry;
pub mod lnes;
pub mod pipeline;
pub mod simulate;

use crate::fileio::DEFAULT_SENSOR;
use crate::Context;
use clap::Args;

/// Sensor size for inputs without a header.
#[derive(Debug, Clone, Args)]
pub struct SensorArgs {
    /// Sensor width for headerless inputs [default: 640].
    #[arg(long)]
    pub sensor_width: Option<u16>,
    /// Sensor height for headerless inputs [default: 480].
    #[arg(long)]
    pub sensor_height: Option<u16>,
}

impl SensorArgs {
    pub fn resolve(&self, ctx: &Context) -> (u16, u16) {
        (
            self.sensor_width.or(ctx.config.sensor_width).unwrap_or(DEFAULT_SENSOR.0),
            self.sensor_height.or(ctx.config.sensor_height).unwrap_or(DEFAULT_SENSOR.1),
        )
    }
}

pub fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("JSON values always serialise"));
}
