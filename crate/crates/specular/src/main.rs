//! Command-line surface for the specular laboratory.
//!
//! Every subcommand prints a JSON report to stdout (or `--out`); scenes and
//! SVG renders go to the paths given explicitly. All angles are radians.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use specular::block::{build_block, verify_block, BlockSpec};
use specular::geometry::{Direction, Point};
use specular::io::{read_scene, render_svg, write_scene, SvgOverlay};
use specular::measure::theorem1_report;
use specular::mirror::{build_invisible_mirror, verify_mirror, MirrorReport};
use specular::projection::project_scene;
use specular::scene::Scene;
use specular::tracer::{trace, DEFAULT_BOUNCE_CAP};
use specular::urchin::{build_urchin, solve_parameters};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "specular", version, about = "pre-fractal mirror sets, ray tracing, shadow measures")]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker bound (outputs do not depend on it); falls back to
    /// SPECULAR_THREADS, then 1.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a venetian-blind block S_{ρ,θ₁,ε} and verify it.
    BuildBlock {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        theta1: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 8)]
        budget: usize,
        /// Scene file to write.
        #[arg(long)]
        scene_out: PathBuf,
    },
    /// Re-verify a block scene against a (ρ, θ₁, ε) contract.
    VerifyBlock {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        theta1: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1e-3)]
        grid_step: f64,
    },
    /// Build the sea-urchin coating F for a target ε.
    BuildUrchin {
        #[arg(long)]
        eps: f64,
        /// Number of spike directions (multiple of 4); solved if omitted.
        #[arg(long)]
        n: Option<usize>,
        /// Inner radius r₁.
        #[arg(long)]
        r1: Option<f64>,
        /// Desk-scale block tolerance ε₁ (defaults to the relaxed floor).
        #[arg(long)]
        eps1: Option<f64>,
        #[arg(long, default_value_t = 8)]
        budget: usize,
        #[arg(long)]
        scene_out: PathBuf,
    },
    /// Monte-Carlo invisibility statistics for an urchin scene.
    VerifyUrchin {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 100_000)]
        n_rays: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build the invisible mirror G for a list of shadow directions α.
    BuildMirror {
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        eps: f64,
        /// Target α (repeatable).
        #[arg(long, required = true)]
        alpha: Vec<f64>,
        /// Relative alignment tolerance for irrational directions.
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long, default_value_t = 1 << 20)]
        budget: usize,
        #[arg(long)]
        scene_out: PathBuf,
    },
    /// Check single-bounce redirection and shadow sizes of a mirror scene.
    VerifyMirror {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1000)]
        n_rays: usize,
        /// Shadow directions to measure (repeatable).
        #[arg(long)]
        alpha: Vec<f64>,
    },
    /// Trace one directed line through a scene.
    Trace {
        #[arg(long)]
        scene: PathBuf,
        /// Travel direction, radians.
        #[arg(long)]
        angle: f64,
        #[arg(long, default_value_t = 0.0)]
        wx: f64,
        #[arg(long, default_value_t = 0.0)]
        wy: f64,
        #[arg(long, default_value_t = DEFAULT_BOUNCE_CAP)]
        cap: usize,
    },
    /// Shadow (projection) measure of a scene at angle α.
    Shadow {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        alpha: f64,
    },
    /// Render a scene (optionally with traced rays) to SVG.
    Render {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        svg_out: PathBuf,
        /// Ray offsets r to trace and overlay (repeatable).
        #[arg(long)]
        ray: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        ray_angle: f64,
    },
}

fn load(path: &PathBuf) -> Result<Scene, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    read_scene(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn save_scene(scene: &Scene, path: &PathBuf) -> Result<(), String> {
    fs::write(path, write_scene(scene)).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(report: &serde_json::Value, out: Option<&PathBuf>) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    match out {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    let out = cli.out.as_ref();
    match cli.cmd {
        Cmd::BuildBlock {
            rho,
            theta1,
            eps,
            budget,
            scene_out,
        } => {
            let spec = BlockSpec::new(rho, theta1, eps, budget).map_err(|e| e.to_string())?;
            let scene = build_block(&spec).map_err(|e| e.to_string())?;
            save_scene(&scene, &scene_out)?;
            let report = json!({
                "tool_version": VERSION,
                "command": "build-block",
                "rho": rho, "theta1": theta1, "eps": eps, "budget": budget,
                "segment_count": scene.segment_count(),
                "meta": scene.meta,
                "scene": scene_out,
            });
            emit(&report, out)?;
            Ok(true)
        }
        Cmd::VerifyBlock {
            scene,
            rho,
            theta1,
            eps,
            grid_step,
        } => {
            let spec = BlockSpec::new(rho, theta1, eps, 1).map_err(|e| e.to_string())?;
            let sc = load(&scene)?;
            let rep = verify_block(&sc, &spec, grid_step);
            let accepted = rep.accepted;
            let report = json!({
                "tool_version": VERSION,
                "command": "verify-block",
                "rho": rho, "theta1": theta1, "eps": eps, "grid_step": grid_step,
                "report": rep,
            });
            emit(&report, out)?;
            Ok(accepted)
        }
        Cmd::BuildUrchin {
            eps,
            n,
            r1,
            eps1,
            budget,
            scene_out,
        } => {
            let strict = solve_parameters(eps, n, r1).map_err(|e| e.to_string())?;
            let mut params = strict.relaxed();
            if let Some(e1) = eps1 {
                let q = params.q();
                params.eps1 = e1;
                params.rho = q / (1.0 + 2.0 * e1);
                params.strict = false;
            }
            let spec = BlockSpec::new(params.rho, params.theta1(), params.eps1, budget)
                .map_err(|e| e.to_string())?;
            let block = build_block(&spec).map_err(|e| e.to_string())?;
            let urchin = build_urchin(&params, &block).map_err(|e| e.to_string())?;
            save_scene(&urchin.scene, &scene_out)?;
            let report = json!({
                "tool_version": VERSION,
                "command": "build-urchin",
                "eps": eps,
                "params": params,
                "strict_eps1": strict.eps1,
                "j_star": urchin.j_star,
                "segment_count": urchin.scene.segment_count(),
                "scene": scene_out,
            });
            emit(&report, out)?;
            Ok(true)
        }
        Cmd::VerifyUrchin {
            scene,
            eps,
            n_rays,
            seed,
        } => {
            let sc = load(&scene)?;
            let rep = theorem1_report(&sc, eps, n_rays, seed);
            let accepted = rep.hit_fraction > 0.0 && rep.same_direction_fraction >= 0.9;
            let report = json!({
                "tool_version": VERSION,
                "command": "verify-urchin",
                "eps": eps, "n_rays": n_rays, "seed": seed,
                "accepted": accepted,
                "report": rep,
            });
            emit(&report, out)?;
            Ok(accepted)
        }
        Cmd::BuildMirror {
            theta,
            eps,
            alpha,
            delta,
            budget,
            scene_out,
        } => {
            let (scene, rep) =
                build_invisible_mirror(theta, eps, &alpha, delta, budget).map_err(|e| e.to_string())?;
            save_scene(&scene, &scene_out)?;
            let report = json!({
                "tool_version": VERSION,
                "command": "build-mirror",
                "theta": theta, "eps": eps, "alphas": alpha, "delta": delta,
                "budget": budget,
                "segment_count": scene.segment_count(),
                "report": rep,
                "scene": scene_out,
            });
            emit(&report, out)?;
            Ok(rep.uncovered_alphas.is_empty())
        }
        Cmd::VerifyMirror {
            scene,
            theta,
            eps,
            n_rays,
            alpha,
        } => {
            let sc = load(&scene)?;
            let n_star = sc
                .meta
                .get("n_star")
                .and_then(|v| v.parse().ok())
                .unwrap_or(sc.segment_count() as usize);
            let mut rep = MirrorReport {
                theta,
                epsilon: eps,
                n_star,
                stages: Vec::new(),
                alpha_shadows: Vec::new(),
                part_one: None,
                uncovered_alphas: Vec::new(),
            };
            verify_mirror(&sc, theta, eps, n_rays, &alpha, &mut rep);
            let part = rep.part_one.as_ref().expect("part one filled");
            let accepted = part.single_bounce_rays + part.degenerate_rays == part.n_rays
                && part.max_exit_angle_error <= 1e-9
                && rep.alpha_shadows.iter().all(|&(_, s)| s < eps);
            let report = json!({
                "tool_version": VERSION,
                "command": "verify-mirror",
                "theta": theta, "eps": eps, "n_rays": n_rays,
                "accepted": accepted,
                "report": rep,
            });
            emit(&report, out)?;
            Ok(accepted)
        }
        Cmd::Trace {
            scene,
            angle,
            wx,
            wy,
            cap,
        } => {
            let sc = load(&scene)?;
            let path = trace(&sc, Direction::from_angle(angle), Point::new(wx, wy), cap);
            let report = json!({
                "tool_version": VERSION,
                "command": "trace",
                "angle": angle, "w": [wx, wy], "cap": cap,
                "bounces": path.bounces,
                "degenerate": path.degenerate,
                "cap_exceeded": path.cap_exceeded,
                "exit_angle": path.exit.v.angle(),
                "exit_w": [path.exit.w.x, path.exit.w.y],
                "points": path.points.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>(),
            });
            emit(&report, out)?;
            Ok(true)
        }
        Cmd::Shadow { scene, alpha } => {
            let sc = load(&scene)?;
            let shadow = project_scene(&sc, alpha);
            let report = json!({
                "tool_version": VERSION,
                "command": "shadow",
                "alpha": alpha,
                "measure": shadow.measure(),
                "intervals": shadow.intervals(),
            });
            emit(&report, out)?;
            Ok(true)
        }
        Cmd::Render {
            scene,
            svg_out,
            ray,
            ray_angle,
        } => {
            let sc = load(&scene)?;
            let v = Direction::from_angle(ray_angle);
            let side = v.perp().unit();
            let overlay = SvgOverlay {
                paths: ray
                    .iter()
                    .map(|&r| trace(&sc, v, side * r, DEFAULT_BOUNCE_CAP))
                    .collect(),
                outlines: Vec::new(),
            };
            let svg = render_svg(&sc, &overlay);
            fs::write(&svg_out, &svg).map_err(|e| format!("{}: {e}", svg_out.display()))?;
            let report = json!({
                "tool_version": VERSION,
                "command": "render",
                "scene": scene,
                "svg": svg_out,
                "rays": ray,
                "bytes": svg.len(),
            });
            emit(&report, out)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
