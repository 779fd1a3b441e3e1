//! Deterministic building blocks for egocentric event-camera motion capture.
//!
//! The crate covers everything around the learned model: event-stream I/O and
//! windowing, LNES time surfaces and the residual frame buffer, the
//! omnidirectional fisheye camera, rigid-transform calibration chains,
//! ray-cast joint visibility, the loss and metric suite, and a contrast
//! threshold event simulator.
//!
//! Batch entry points take an [`Execution`] so callers can pick between the
//! rayon-backed path (feature `parallel`, on by default) and the plain
//! sequential loop. Both produce identical results.

pub mod events;
pub mod exec;
pub mod fisheye;
pub mod grid;
pub mod lnes;
pub mod metrics;
pub mod pose;
pub mod rigid;
pub mod simulator;
pub mod visibility;

pub use exec::Execution;
pub use grid::Grid;
pub use pose::{Joint, Pose3D, VisibilityMask, NUM_JOINTS};
