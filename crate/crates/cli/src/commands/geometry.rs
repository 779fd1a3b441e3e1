use super::print_json;
use crate::fileio::{load_intrinsics_or_default, parse_rows, read_text, write_file};
use crate::Context;
use anyhow::{Context as _, Result};
use clap::{Args, Subcommand};
use evego_core::rigid::{compose_hand_eye, parse_points, transform_points, world_to_device, RigidTransform};
use evego_core::visibility::{egocentric_visibility, project_joints, LabeledMesh, MeshIndex};
use evego_core::{Joint, Pose3D};
use nalgebra::Vector2;
use serde_json::json;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, Subcommand)]
pub enum CameraCmd {
    /// Camera-frame points (x y z per line, mm) to pixels (u v per line).
    Project {
        #[arg(long)]
        intrinsics: Option<PathBuf>,
        /// Points file; reads stdin when omitted.
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Pixels (u v per line) to unit rays (x y z per line).
    Unproject {
        #[arg(long)]
        intrinsics: Option<PathBuf>,
        /// Pixels file; reads stdin when omitted.
        #[arg(long)]
        pixels: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum CalibCmd {
    /// Camera-from-head transform from three checkerboard poses.
    HandEye {
        /// Floor board seen by the event camera.
        #[arg(long)]
        me: PathBuf,
        /// Floor board seen by the external RGB camera.
        #[arg(long)]
        mf: PathBuf,
        /// Head board seen by the external RGB camera.
        #[arg(long)]
        mh: PathBuf,
        /// World-to-head transform; when given the world-to-device transform
        /// is written instead.
        #[arg(long)]
        mwc: Option<PathBuf>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a 4x4 transform to points (x y z per line).
    Apply {
        #[arg(long)]
        transform: PathBuf,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct VisibilityArgs {
    /// Part-labelled mesh.
    #[arg(long)]
    pub mesh: PathBuf,
    /// 16 joints, x y z per line.
    #[arg(long)]
    pub pose: PathBuf,
    #[arg(long)]
    pub intrinsics: Option<PathBuf>,
    /// World-to-device transform applied to both mesh and pose first.
    #[arg(long)]
    pub transform: Option<PathBuf>,
}

fn input_text(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) => read_text(p),
        None => std::io::read_to_string(std::io::stdin()).context("reading stdin"),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_file(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_transform(path: &Path) -> Result<RigidTransform> {
    RigidTransform::parse(&read_text(path)?).with_context(|| format!("loading transform {}", path.display()))
}

pub fn run_camera(cmd: CameraCmd, ctx: &Context) -> Result<()> {
    let mut out = String::new();
    match cmd {
        CameraCmd::Project { intrinsics, points } => {
            let intr = load_intrinsics_or_default(intrinsics.as_deref().or(ctx.config.intrinsics.as_deref()))?;
            let pts = parse_points(&input_text(points.as_deref())?)?;
            for (i, p) in pts.iter().enumerate() {
                let px = intr.project(p).with_context(|| format!("point {i}"))?;
                let _ = writeln!(out, "{} {}", px.x, px.y);
            }
        }
        CameraCmd::Unproject { intrinsics, pixels } => {
            let intr = load_intrinsics_or_default(intrinsics.as_deref().or(ctx.config.intrinsics.as_deref()))?;
            for (i, row) in parse_rows(&input_text(pixels.as_deref())?, 2)?.iter().enumerate() {
                let ray = intr
                    .unproject(&Vector2::new(row[0], row[1]))
                    .with_context(|| format!("pixel {i}"))?;
                let _ = writeln!(out, "{} {} {}", ray.x, ray.y, ray.z);
            }
        }
    }
    print!("{out}");
    Ok(())
}

pub fn run_calib(cmd: CalibCmd, _ctx: &Context) -> Result<()> {
    match cmd {
        CalibCmd::HandEye { me, mf, mh, mwc, out } => {
            let m_ce = compose_hand_eye(&load_transform(&me)?, &load_transform(&mf)?, &load_transform(&mh)?);
            let result = match mwc {
                Some(p) => world_to_device(&m_ce, &load_transform(&p)?),
                None => m_ce,
            };
            emit(out.as_deref(), &result.to_text())
        }
        CalibCmd::Apply { transform, points, out } => {
            let m = load_transform(&transform)?;
            let pts = parse_points(&read_text(&points)?)?;
            let mut text = String::new();
            for p in transform_points(&m, &pts) {
                let _ = writeln!(text, "{} {} {}", p.x, p.y, p.z);
            }
            emit(out.as_deref(), &text)
        }
    }
}

pub fn run_visibility(args: VisibilityArgs, ctx: &Context) -> Result<()> {
    let intr = load_intrinsics_or_default(args.intrinsics.as_deref().or(ctx.config.intrinsics.as_deref()))?;
    let mut mesh = ctx.log.stage("read_mesh", || -> Result<LabeledMesh> {
        Ok(LabeledMesh::parse(&read_text(&args.mesh)?)?)
    })?;
    let mut pose = Pose3D::parse(&read_text(&args.pose)?).context("loading pose")?;
    if let Some(t) = &args.transform {
        let m = load_transform(t)?;
        mesh = mesh.map_vertices(|v| m.transform_point(v));
        pose = pose.map(|p| m.transform_point(p));
    }
    let index = ctx.log.stage("build_bvh", || MeshIndex::new(mesh));
    let mask = ctx.log.stage("visibility", || egocentric_visibility(&pose, &index, &intr))?;
    let projected = project_joints(&pose, &intr);
    let joints: Vec<_> = Joint::ALL
        .iter()
        .map(|j| {
            let i = j.index();
            json!({
                "joint": j.name(),
                "visible": mask.0[i],
                "in_image": projected.in_image[i],
                "pixel": projected.pixels[i].map(|p| [p.x, p.y]),
            })
        })
        .collect();
    print_json(&json!({ "visible_count": mask.count(), "joints": joints }));
    Ok(())
}
