use super::procrustes::{mpjpe, pa_mpjpe};
use super::MetricsError;
use crate::exec::Execution;
use crate::pose::Pose3D;
use std::collections::BTreeMap;

/// One evaluated frame.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalFrame {
    pub action: String,
    pub pred: Pose3D,
    pub gt: Pose3D,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActionMetrics {
    pub frames: usize,
    /// Millimetres, averaged over frames.
    pub mpjpe: f64,
    pub pa_mpjpe: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub per_action: BTreeMap<String, ActionMetrics>,
    pub overall: ActionMetrics,
}

/// Per-frame MPJPE and PA-MPJPE, averaged per action and overall.
pub fn evaluate_sequence(frames: &[EvalFrame], exec: Execution) -> Result<EvalReport, MetricsError> {
    let scores = exec.map(frames, |f| {
        pa_mpjpe(&f.pred, &f.gt).map(|pa| (mpjpe(&f.pred, &f.gt), pa))
    });
    let mut report = EvalReport::default();
    let mut sums: BTreeMap<&str, (usize, f64, f64)> = BTreeMap::new();
    let mut total = (0usize, 0.0, 0.0);
    for (f, s) in frames.iter().zip(scores) {
        let (m, pa) = s?;
        let e = sums.entry(&f.action).or_default();
        *e = (e.0 + 1, e.1 + m, e.2 + pa);
        total = (total.0 + 1, total.1 + m, total.2 + pa);
    }
    let finish = |(n, m, pa): (usize, f64, f64)| ActionMetrics {
        frames: n,
        mpjpe: if n > 0 { m / n as f64 } else { 0.0 },
        pa_mpjpe: if n > 0 { pa / n as f64 } else { 0.0 },
    };
    for (action, s) in sums {
        report.per_action.insert(action.to_string(), finish(s));
    }
    report.overall = finish(total);
    Ok(report)
}
