//! Ideal contrast-threshold event simulation from intensity frames, plus
//! pose resampling helpers for building synthetic datasets.

mod frames;
mod poses;

pub use frames::{parse_flat_f32, parse_pgm};
pub use poses::{interpolate_poses, pose_at, smpl_joint_map, TimedPose, SMPL_JOINT_COUNT, SMPL_TO_CANONICAL};

use crate::events::{Event, EventError, EventStream, Polarity, TimestampMode};
use crate::exec::Execution;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimulatorError {
    #[error("intensity {value} at ({x}, {y}) is not positive and finite")]
    NonPositiveIntensity { x: usize, y: usize, value: f64 },
    #[error("frame at {t} us does not come after {previous} us")]
    UnorderedFrames { previous: u64, t: u64 },
    #[error("frame is {got:?}, expected {expected:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("frame dimensions {0}x{1} are empty or exceed the event coordinate range")]
    BadDimensions(usize, usize),
    #[error("need at least {needed} frames, got {got}")]
    TooFewFrames { needed: usize, got: usize },
    #[error("contrast threshold must be positive and finite, got {0}")]
    InvalidThreshold(f64),
    #[error("need at least two keyframes, got {0}")]
    TooFewKeyframes(usize),
    #[error("keyframe {0} does not come after the previous one")]
    UnorderedKeyframes(usize),
    #[error("target rate must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("expected {expected} SMPL joints, got {got}")]
    WrongJointCount { expected: usize, got: usize },
    #[error("bad frame file: {0}")]
    BadFrame(String),
    #[error(transparent)]
    Events(#[from] EventError),
}

/// A linear-intensity image with its timestamp. Stored as log intensity.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityFrame {
    width: usize,
    height: usize,
    t: u64,
    log: Vec<f64>,
}

impl IntensityFrame {
    /// `values` is row-major linear intensity and must be strictly positive.
    pub fn new(width: usize, height: usize, t: u64, values: &[f64]) -> Result<Self, SimulatorError> {
        Self::check_dims(width, height, values.len())?;
        let mut log = Vec::with_capacity(values.len());
        for (i, &v) in values.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SimulatorError::NonPositiveIntensity {
                    x: i % width,
                    y: i / width,
                    value: v,
                });
            }
            log.push(v.ln());
        }
        Ok(IntensityFrame { width, height, t, log })
    }

    /// Builds a frame directly from log intensities.
    pub fn from_log(width: usize, height: usize, t: u64, log: Vec<f64>) -> Result<Self, SimulatorError> {
        Self::check_dims(width, height, log.len())?;
        if let Some(i) = log.iter().position(|v| !v.is_finite()) {
            return Err(SimulatorError::NonPositiveIntensity {
                x: i % width,
                y: i / width,
                value: log[i].exp(),
            });
        }
        Ok(IntensityFrame { width, height, t, log })
    }

    fn check_dims(width: usize, height: usize, len: usize) -> Result<(), SimulatorError> {
        if width == 0 || height == 0 || width > u16::MAX as usize || height > u16::MAX as usize {
            return Err(SimulatorError::BadDimensions(width, height));
        }
        if len != width * height {
            return Err(SimulatorError::DimensionMismatch {
                expected: (width, height),
                got: (len, 1),
            });
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn timestamp(&self) -> u64 {
        self.t
    }

    pub fn log_intensity(&self) -> &[f64] {
        &self.log
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulatorConfig {
    threshold: f64,
}

impl SimulatorConfig {
    pub fn new(threshold: f64) -> Result<Self, SimulatorError> {
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(SimulatorError::InvalidThreshold(threshold));
        }
        Ok(SimulatorConfig { threshold })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct PixelState {
    /// Reference level in units of C above the pixel's first log intensity.
    level: i64,
    last_t: Option<u64>,
}

/// Per-pixel simulator state carried across frames.
///
/// References sit on an integer lattice `L_init + k*C`, so after any number
/// of frames the residual between the net log change and the signed event
/// count times C stays below C.
#[derive(Debug, Clone)]
pub struct EventSimulator {
    cfg: SimulatorConfig,
    exec: Execution,
    init: Vec<f64>,
    prev: Option<IntensityFrame>,
    state: Vec<PixelState>,
}

impl EventSimulator {
    pub fn new(cfg: SimulatorConfig, exec: Execution) -> Self {
        EventSimulator {
            cfg,
            exec,
            init: Vec::new(),
            prev: None,
            state: Vec::new(),
        }
    }

    /// Consumes the next frame and returns the events since the previous one,
    /// sorted by `(t, y, x)`. The first frame only sets the references.
    pub fn feed(&mut self, frame: IntensityFrame) -> Result<Vec<Event>, SimulatorError> {
        let Some(prev) = self.prev.as_ref() else {
            self.init = frame.log.clone();
            self.state = vec![PixelState::default(); frame.log.len()];
            self.prev = Some(frame);
            return Ok(Vec::new());
        };
        if (frame.width, frame.height) != (prev.width, prev.height) {
            return Err(SimulatorError::DimensionMismatch {
                expected: (prev.width, prev.height),
                got: (frame.width, frame.height),
            });
        }
        if frame.t <= prev.t {
            return Err(SimulatorError::UnorderedFrames {
                previous: prev.t,
                t: frame.t,
            });
        }
        let width = frame.width;
        let c = self.cfg.threshold;
        let (t0, t1) = (prev.t, frame.t);
        let init = &self.init;
        let prev = self.prev.as_ref().unwrap();
        let rows = self.exec.map_chunks_mut(&mut self.state, width, |y, row| {
            let mut out = Vec::new();
            for (x, px) in row.iter_mut().enumerate() {
                let i = y * width + x;
                let q0 = (prev.log[i] - init[i]) / c;
                let q1 = (frame.log[i] - init[i]) / c;
                emit_crossings(px, q0, q1, t0, t1, x as u16, y as u16, &mut out);
            }
            out
        });
        let mut events: Vec<Event> = rows.into_iter().flatten().collect();
        events.sort_by_key(|e| (e.t, e.y, e.x));
        self.prev = Some(frame);
        Ok(events)
    }
}

/// Steps the pixel's reference level towards `q1`, one event per lattice
/// crossing. Crossing times are linear in log intensity between the frames,
/// rounded to whole microseconds and bumped to stay strictly increasing.
#[allow(clippy::too_many_arguments)]
#[inline]
fn emit_crossings(
    px: &mut PixelState,
    q0: f64,
    q1: f64,
    t0: u64,
    t1: u64,
    x: u16,
    y: u16,
    out: &mut Vec<Event>,
) {
    let span = (t1 - t0) as f64;
    let mut push = |px: &mut PixelState, level: f64, polarity| {
        let frac = if q1 != q0 { ((level - q0) / (q1 - q0)).clamp(0.0, 1.0) } else { 1.0 };
        let mut t = t0 + (frac * span).round() as u64;
        if let Some(last) = px.last_t {
            t = t.max(last + 1);
        }
        px.last_t = Some(t);
        out.push(Event::new(x, y, t, polarity));
    };
    while q1 >= (px.level + 1) as f64 {
        px.level += 1;
        push(px, px.level as f64, Polarity::Positive);
    }
    while q1 <= (px.level - 1) as f64 {
        px.level -= 1;
        push(px, px.level as f64, Polarity::Negative);
    }
}

/// Runs the simulator over a whole sequence and returns one time-sorted
/// stream.
pub fn simulate_events(
    frames: Vec<IntensityFrame>,
    cfg: SimulatorConfig,
    exec: Execution,
) -> Result<EventStream, SimulatorError> {
    if frames.len() < 2 {
        return Err(SimulatorError::TooFewFrames {
            needed: 2,
            got: frames.len(),
        });
    }
    let (w, h) = (frames[0].width as u16, frames[0].height as u16);
    let mut sim = EventSimulator::new(cfg, exec);
    let mut events = Vec::new();
    for f in frames {
        events.extend(sim.feed(f)?);
    }
    // Bumped timestamps can spill past a frame boundary.
    events.sort_by_key(|e| (e.t, e.y, e.x));
    Ok(EventStream::new(w, h, events, TimestampMode::Strict)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn log_frame(w: usize, h: usize, t: u64, log: Vec<f64>) -> IntensityFrame {
        IntensityFrame::from_log(w, h, t, log).unwrap()
    }

    fn cfg(c: f64) -> SimulatorConfig {
        SimulatorConfig::new(c).unwrap()
    }

    #[test]
    fn constant_input_is_silent() {
        let frames = (0..5).map(|i| log_frame(4, 3, i * 1000, vec![0.7; 12])).collect();
        let s = simulate_events(frames, cfg(0.2), Execution::Sequential).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn step_of_two_thresholds() {
        let c = 0.25;
        let frames = vec![
            log_frame(2, 1, 0, vec![0.5, 0.5]),
            log_frame(2, 1, 1000, vec![0.5 + 2.0 * c, 0.5]),
        ];
        let s = simulate_events(frames, cfg(c), Execution::Sequential).unwrap();
        let ev = s.events();
        assert_eq!(ev.len(), 2);
        assert!(ev.iter().all(|e| e.x == 0 && e.polarity == Polarity::Positive));
        assert_eq!((ev[0].t, ev[1].t), (500, 1000));
    }

    #[test]
    fn negative_ramp_timestamps() {
        // 0 -> -1 over 1000 us with C = 0.3: crossings at q = -1, -2, -3.
        let frames = vec![log_frame(1, 1, 0, vec![0.0]), log_frame(1, 1, 1000, vec![-1.0])];
        let s = simulate_events(frames, cfg(0.3), Execution::Sequential).unwrap();
        let t: Vec<u64> = s.events().iter().map(|e| e.t).collect();
        assert_eq!(t, vec![300, 600, 900]);
        assert!(s.events().iter().all(|e| e.polarity == Polarity::Negative));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            IntensityFrame::new(2, 1, 0, &[1.0, 0.0]),
            Err(SimulatorError::NonPositiveIntensity { x: 1, y: 0, .. })
        ));
        assert!(IntensityFrame::new(2, 1, 0, &[1.0, -3.0]).is_err());
        assert!(SimulatorConfig::new(0.0).is_err());
        let frames = vec![log_frame(1, 1, 10, vec![0.0]), log_frame(1, 1, 10, vec![1.0])];
        assert!(matches!(
            simulate_events(frames, cfg(0.1), Execution::Sequential),
            Err(SimulatorError::UnorderedFrames { .. })
        ));
        assert!(matches!(
            simulate_events(vec![log_frame(1, 1, 0, vec![0.0])], cfg(0.1), Execution::Sequential),
            Err(SimulatorError::TooFewFrames { .. })
        ));
        let frames = vec![log_frame(1, 1, 0, vec![0.0]), log_frame(2, 1, 5, vec![0.0, 0.0])];
        assert!(matches!(
            simulate_events(frames, cfg(0.1), Execution::Sequential),
            Err(SimulatorError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn many_crossings_in_short_interval_stay_strictly_increasing() {
        let frames = vec![log_frame(1, 1, 0, vec![0.0]), log_frame(1, 1, 3, vec![2.0])];
        let s = simulate_events(frames, cfg(0.1), Execution::Sequential).unwrap();
        assert_eq!(s.len(), 20);
        assert!(s.events().windows(2).all(|w| w[1].t > w[0].t));
    }

    fn random_sequence(rng: &mut impl Rng, w: usize, h: usize, n: usize) -> Vec<IntensityFrame> {
        let mut t = 0;
        (0..n)
            .map(|_| {
                t += rng.random_range(1..5000u64);
                let log = (0..w * h).map(|_| rng.random_range(-2.0..2.0)).collect();
                log_frame(w, h, t, log)
            })
            .collect()
    }

    fn per_pixel_counts(s: &EventStream, n: usize, w: usize) -> Vec<(i64, i64)> {
        let mut c = vec![(0, 0); n];
        for e in s.events() {
            let i = e.y as usize * w + e.x as usize;
            match e.polarity {
                Polarity::Positive => c[i].0 += 1,
                Polarity::Negative => c[i].1 += 1,
            }
        }
        c
    }

    #[test]
    fn parallel_matches_sequential() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let frames = random_sequence(&mut rng, 17, 9, 6);
        let a = simulate_events(frames.clone(), cfg(0.15), Execution::Sequential).unwrap();
        let b = simulate_events(frames, cfg(0.15), Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn conservation(seed in any::<u64>(), c in 0.05f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (w, h) = (6, 5);
            let frames = random_sequence(&mut rng, w, h, 5);
            let first = frames[0].log.clone();
            let last = frames[4].log.clone();
            let s = simulate_events(frames, cfg(c), Execution::Parallel).unwrap();
            for (i, (p, n)) in per_pixel_counts(&s, w * h, w).into_iter().enumerate() {
                let net = last[i] - first[i];
                prop_assert!(((p - n) as f64 * c - net).abs() < c);
            }
            let mut last_t = vec![None; w * h];
            for e in s.events() {
                let i = e.y as usize * w + e.x as usize;
                prop_assert!(last_t[i].is_none_or(|l| e.t > l));
                last_t[i] = Some(e.t);
            }
        }

        #[test]
        fn monotone_ramps_count_floor(seed in any::<u64>(), c in 0.05f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 12;
            let start: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let sign: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
            let mut cur = start.clone();
            let mut frames = vec![log_frame(n, 1, 0, cur.clone())];
            for k in 1..6u64 {
                for i in 0..n {
                    cur[i] += sign[i] * rng.random_range(0.0..0.8);
                }
                frames.push(log_frame(n, 1, k * 1000, cur.clone()));
            }
            let s = simulate_events(frames, cfg(c), Execution::Sequential).unwrap();
            for (i, (p, m)) in per_pixel_counts(&s, n, n).into_iter().enumerate() {
                let expected = ((cur[i] - start[i]) / c).abs().floor() as i64;
                prop_assert_eq!(p + m, expected);
                prop_assert!(p == 0 || m == 0);
            }
        }

        #[test]
        fn doubling_threshold_never_adds_events(seed in any::<u64>(), c in 0.05f64..0.5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let frames = random_sequence(&mut rng, 5, 4, 6);
            let a = simulate_events(frames.clone(), cfg(c), Execution::Sequential).unwrap();
            let b = simulate_events(frames, cfg(2.0 * c), Execution::Sequential).unwrap();
            prop_assert!(b.len() <= a.len());
        }
    }
}
