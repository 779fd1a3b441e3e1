//! Pose files: one frame per line, `action,x1,y1,z1,...,x16,y16,z16` in
//! canonical joint order (millimetres). The action label may be omitted, in
//! which case the frame counts as `unlabeled`. `--pred` and `--gt` are either
//! two such files or two directories whose `*.csv` files pair up by name.

use crate::error::usage;
use crate::fileio::{read_text, write_file};
use crate::Context;
use anyhow::{bail, Context as _, Result};
use clap::Args;
use evego_core::metrics::{evaluate_sequence, ActionMetrics, EvalFrame};
use evego_core::Pose3D;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted poses (file or directory).
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth poses (file or directory); its action labels are used.
    #[arg(long)]
    pub gt: PathBuf,
    /// JSON report path; stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

pub const UNLABELED: &str = "unlabeled";

#[derive(Debug, Serialize)]
struct Metrics {
    frames: usize,
    mpjpe_mm: f64,
    pa_mpjpe_mm: f64,
}

impl From<ActionMetrics> for Metrics {
    fn from(m: ActionMetrics) -> Self {
        Metrics {
            frames: m.frames,
            mpjpe_mm: m.mpjpe,
            pa_mpjpe_mm: m.pa_mpjpe,
        }
    }
}

#[derive(Debug, Serialize)]
struct Report {
    per_action: BTreeMap<String, Metrics>,
    overall: Metrics,
}

/// Parses a pose file into `(action, pose)` rows.
pub fn parse_pose_rows(text: &str) -> Result<Vec<(String, Pose3D)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let (action, nums) = match fields.len() {
            49 => (fields[0].to_string(), &fields[1..]),
            48 => (UNLABELED.to_string(), &fields[..]),
            n => bail!("line {}: expected 48 coordinates with an optional label, found {n} fields", i + 1),
        };
        let values = nums
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("line {}: not a number", i + 1))?;
        let pose = Pose3D::from_flat(&values).with_context(|| format!("line {}", i + 1))?;
        pose.validate().with_context(|| format!("line {}", i + 1))?;
        out.push((action, pose));
    }
    Ok(out)
}

fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

fn load_pairs(pred: &Path, gt: &Path) -> Result<Vec<EvalFrame>> {
    let pairs: Vec<(PathBuf, PathBuf)> = match (pred.is_dir(), gt.is_dir()) {
        (false, false) => vec![(pred.to_path_buf(), gt.to_path_buf())],
        (true, true) => {
            let gt_files = csv_files(gt)?;
            if gt_files.is_empty() {
                bail!("no .csv files in {}", gt.display());
            }
            gt_files
                .into_iter()
                .map(|g| {
                    let name = g.file_name().expect("listed files have names");
                    (pred.join(name), g)
                })
                .collect()
        }
        _ => return Err(usage("--pred and --gt must both be files or both be directories")),
    };
    let mut frames = Vec::new();
    for (p, g) in pairs {
        let pred_rows = parse_pose_rows(&read_text(&p)?).with_context(|| format!("parsing {}", p.display()))?;
        let gt_rows = parse_pose_rows(&read_text(&g)?).with_context(|| format!("parsing {}", g.display()))?;
        if pred_rows.len() != gt_rows.len() {
            bail!(
                "{} has {} frames but {} has {}",
                p.display(),
                pred_rows.len(),
                g.display(),
                gt_rows.len()
            );
        }
        frames.extend(
            pred_rows
                .into_iter()
                .zip(gt_rows)
                .map(|((_, pred), (action, gt))| EvalFrame { action, pred, gt }),
        );
    }
    Ok(frames)
}

pub fn run(args: EvalArgs, ctx: &Context) -> Result<()> {
    let frames = ctx.log.stage("read_poses", || load_pairs(&args.pred, &args.gt))?;
    let report = ctx.log.stage("evaluate", || evaluate_sequence(&frames, ctx.exec))?;
    let out = Report {
        per_action: report.per_action.into_iter().map(|(k, v)| (k, v.into())).collect(),
        overall: report.overall.into(),
    };
    let mut text = serde_json::to_string_pretty(&out)?;
    text.push('\n');
    match &args.report {
        Some(p) => write_file(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
