//! Exit-code classification and machine-readable error reports.

use evego_core::fisheye::FisheyeError;
use evego_core::metrics::MetricsError;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DATA: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

/// Bad flags, flag combinations or configuration.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// A computation that is well-posed in general failed on this input.
#[derive(Debug)]
pub struct NumericalError(pub String);

impl std::fmt::Display for NumericalError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericalError {}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if cause.is::<NumericalError>() {
            return EXIT_NUMERICAL;
        }
        if let Some(e) = cause.downcast_ref::<FisheyeError>() {
            if matches!(
                e,
                FisheyeError::OutsideFieldOfView { .. } | FisheyeError::DegeneratePoint
            ) {
                return EXIT_NUMERICAL;
            }
        }
        if let Some(MetricsError::DegenerateConfiguration) = cause.downcast_ref::<MetricsError>() {
            return EXIT_NUMERICAL;
        }
    }
    EXIT_DATA
}

pub fn kind(code: u8) -> &'static str {
    match code {
        EXIT_USAGE => "usage",
        EXIT_NUMERICAL => "numerical",
        _ => "data",
    }
}
